//! Concept hierarchy and sense lexicon.
//!
//! The hierarchy is a rooted DAG of concept identifiers with child→parent
//! edges (a node may have several parents). Semantic distance between two
//! concepts is the edge count of the shortest path when parent edges are
//! traversed in both directions. The lexicon maps (surface, lemma, pos)
//! onto concepts of the hierarchy; one concept per entry, several entries
//! per polysemous lemma.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

/// Identifier of one node in the concept hierarchy.
///
/// Non-empty and free of whitespace, so it survives tab-separated files.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self, ConceptError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(ConceptError::BadConceptId(id));
        }
        Ok(ConceptId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl FromStr for ConceptId {
    type Err = ConceptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConceptId::new(s)
    }
}

/// Part-of-speech tag as it appears in lexicon and corpus files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    N,
    V,
    Adj,
    Adv,
    P,
    Aux,
    Other,
}

impl Pos {
    /// Content words are the only ones the extraction rules emit.
    pub fn is_content(self) -> bool {
        matches!(self, Pos::N | Pos::V | Pos::Adj)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::N => "N",
            Pos::V => "V",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::P => "P",
            Pos::Aux => "AUX",
            Pos::Other => "OTHER",
        }
    }
}

impl FromStr for Pos {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Pos::N),
            "V" => Ok(Pos::V),
            "ADJ" => Ok(Pos::Adj),
            "ADV" => Ok(Pos::Adv),
            "P" => Ok(Pos::P),
            "AUX" => Ok(Pos::Aux),
            "OTHER" => Ok(Pos::Other),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ConceptError {
    #[error("invalid concept id `{0}`: must be non-empty without whitespace")]
    BadConceptId(String),
    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),
}

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("line {line}: expected `concept<TAB>parent<TAB>gloss`")]
    Columns { line: usize },
    #[error("line {line}: {source}")]
    Id {
        line: usize,
        #[source]
        source: ConceptError,
    },
    #[error("line {line}: parent `{parent}` is never declared")]
    UnknownParent { line: usize, parent: String },
    #[error("line {line}: parent cycle through `{id}`")]
    Cycle { line: usize, id: String },
    #[error("no root line (parent `-`) in hierarchy")]
    MissingRoot,
    #[error("line {line}: second root `{id}`; a hierarchy has exactly one")]
    DuplicateRoot { line: usize, id: String },
    #[error("line {line}: root `{id}` may not also list a parent")]
    RootHasParent { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

struct Row {
    line: usize,
    id: ConceptId,
    parent: Option<ConceptId>,
    gloss: String,
}

/// Rooted DAG of concepts plus glosses. Immutable once built; all queries
/// take `&self` and are safe to share across threads.
#[derive(Clone, Debug)]
pub struct ConceptHierarchy {
    ids: Vec<ConceptId>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    gloss: Vec<String>,
    root: usize,
}

impl ConceptHierarchy {
    /// Reads the hierarchy TSV format: `concept<TAB>parent<TAB>gloss`, one
    /// edge per line, `-` as the root's parent, `#` lines and blank lines
    /// ignored. A node with several parents occupies several lines.
    pub fn load(reader: impl BufRead) -> Result<Self, HierarchyError> {
        let mut rows = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split('\t');
            let (id, parent, gloss) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => return Err(HierarchyError::Columns { line: lineno }),
            };
            let id = ConceptId::new(id).map_err(|source| HierarchyError::Id { line: lineno, source })?;
            let parent = if parent == "-" {
                None
            } else {
                Some(ConceptId::new(parent).map_err(|source| HierarchyError::Id { line: lineno, source })?)
            };
            rows.push(Row {
                line: lineno,
                id,
                parent,
                gloss: gloss.to_string(),
            });
        }
        Self::build(rows)
    }

    /// Builds a hierarchy from `(concept, parent, gloss)` records, `None`
    /// parent marking the root. Diagnostics report record positions as
    /// line numbers.
    pub fn from_records<I, S>(records: I) -> Result<Self, HierarchyError>
    where
        I: IntoIterator<Item = (S, Option<S>, S)>,
        S: Into<String>,
    {
        let mut rows = Vec::new();
        for (n, (id, parent, gloss)) in records.into_iter().enumerate() {
            let line = n + 1;
            let id = ConceptId::new(id).map_err(|source| HierarchyError::Id { line, source })?;
            let parent = parent
                .map(|p| ConceptId::new(p).map_err(|source| HierarchyError::Id { line, source }))
                .transpose()?;
            rows.push(Row {
                line,
                id,
                parent,
                gloss: gloss.into(),
            });
        }
        Self::build(rows)
    }

    fn build(rows: Vec<Row>) -> Result<Self, HierarchyError> {
        let mut ids: Vec<ConceptId> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut gloss: Vec<String> = Vec::new();
        let mut first_line: Vec<usize> = Vec::new();
        for row in &rows {
            if !index.contains_key(row.id.as_str()) {
                index.insert(row.id.as_str().to_string(), ids.len());
                ids.push(row.id.clone());
                gloss.push(row.gloss.clone());
                first_line.push(row.line);
            }
        }

        let n = ids.len();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut root: Option<(usize, usize)> = None; // (node, line)
        let mut edge_lines: HashMap<(usize, usize), usize> = HashMap::new();
        for row in &rows {
            let child = index[row.id.as_str()];
            match &row.parent {
                None => match root {
                    None => root = Some((child, row.line)),
                    Some((r, _)) if r == child => {}
                    Some(_) => {
                        return Err(HierarchyError::DuplicateRoot {
                            line: row.line,
                            id: row.id.as_str().to_string(),
                        })
                    }
                },
                Some(p) => {
                    let parent = *index.get(p.as_str()).ok_or_else(|| HierarchyError::UnknownParent {
                        line: row.line,
                        parent: p.as_str().to_string(),
                    })?;
                    if !parents[child].contains(&parent) {
                        parents[child].push(parent);
                        edge_lines.insert((child, parent), row.line);
                    }
                }
            }
        }

        let (root, _root_line) = root.ok_or(HierarchyError::MissingRoot)?;
        if !parents[root].is_empty() {
            let line = parents[root]
                .iter()
                .map(|&p| edge_lines[&(root, p)])
                .min()
                .unwrap();
            return Err(HierarchyError::RootHasParent {
                line,
                id: ids[root].as_str().to_string(),
            });
        }

        // Kahn's algorithm over child→parent edges; leftovers sit on cycles.
        let mut out_deg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n]; // parent -> children
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                incoming[p].push(child);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| out_deg[i] == 0).collect();
        let mut done = 0usize;
        while let Some(u) = queue.pop_front() {
            done += 1;
            for &c in &incoming[u] {
                out_deg[c] -= 1;
                if out_deg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if done != n {
            let offender = (0..n)
                .filter(|&i| out_deg[i] > 0)
                .min_by_key(|&i| first_line[i])
                .unwrap();
            return Err(HierarchyError::Cycle {
                line: first_line[offender],
                id: ids[offender].as_str().to_string(),
            });
        }

        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }

        Ok(ConceptHierarchy {
            ids,
            index,
            parents,
            children,
            gloss,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> &ConceptId {
        &self.ids[self.root]
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptId> {
        self.ids.iter()
    }

    pub fn gloss(&self, id: &str) -> Option<&str> {
        self.index.get(id).map(|&i| self.gloss[i].as_str())
    }

    pub fn parents_of(&self, id: &str) -> Result<Vec<&ConceptId>, ConceptError> {
        let i = self.idx(id)?;
        Ok(self.parents[i].iter().map(|&p| &self.ids[p]).collect())
    }

    fn idx(&self, id: &str) -> Result<usize, ConceptError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| ConceptError::UnknownConcept(id.to_string()))
    }

    pub(crate) fn idx_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Breadth-first ball around `start`, undirected, including `start`
    /// at distance 0. `radius` of `None` explores the whole graph.
    pub(crate) fn ball(&self, start: usize, radius: Option<u32>) -> Vec<(usize, u32)> {
        let mut dist: Vec<u32> = vec![u32::MAX; self.ids.len()];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        let mut out = vec![(start, 0)];
        while let Some(u) = queue.pop_front() {
            if let Some(r) = radius {
                if dist[u] >= r {
                    continue;
                }
            }
            for &v in self.parents[u].iter().chain(self.children[u].iter()) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    out.push((v, dist[v]));
                    queue.push_back(v);
                }
            }
        }
        out
    }

    /// Shortest undirected path length between two concepts, in edges.
    /// Every hierarchy is connected through its root, so a distance always
    /// exists for known ids.
    pub fn distance(&self, a: &str, b: &str) -> Result<u32, ConceptError> {
        let a = self.idx(a)?;
        let b = self.idx(b)?;
        if a == b {
            return Ok(0);
        }
        let mut dist: Vec<u32> = vec![u32::MAX; self.ids.len()];
        let mut queue = VecDeque::new();
        dist[a] = 0;
        queue.push_back(a);
        while let Some(u) = queue.pop_front() {
            for &v in self.parents[u].iter().chain(self.children[u].iter()) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    if v == b {
                        return Ok(dist[v]);
                    }
                    queue.push_back(v);
                }
            }
        }
        unreachable!("hierarchy invariant: every node reaches the root");
    }

    /// All concepts within `radius` edges of `c`, excluding `c` itself.
    pub fn neighbors_within(&self, c: &str, radius: u32) -> Result<BTreeSet<ConceptId>, ConceptError> {
        let start = self.idx(c)?;
        Ok(self
            .ball(start, Some(radius))
            .into_iter()
            .filter(|&(i, _)| i != start)
            .map(|(i, _)| self.ids[i].clone())
            .collect())
    }

    /// Canonical TSV rendering: nodes sorted by id, the root first in its
    /// own sort position with parent `-`, multi-parent nodes on one line
    /// per parent. `load(write_tsv(h)) == h`.
    pub fn write_tsv(&self, w: &mut impl Write) -> io::Result<()> {
        let mut order: Vec<usize> = (0..self.ids.len()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        for i in order {
            if i == self.root {
                writeln!(w, "{}\t-\t{}", self.ids[i], self.gloss[i])?;
            } else {
                let mut ps: Vec<&ConceptId> = self.parents[i].iter().map(|&p| &self.ids[p]).collect();
                ps.sort();
                for p in ps {
                    writeln!(w, "{}\t{}\t{}", self.ids[i], p, self.gloss[i])?;
                }
            }
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("concept ids and glosses are valid UTF-8")
    }
}

impl PartialEq for ConceptHierarchy {
    fn eq(&self, other: &Self) -> bool {
        if self.root() != other.root() {
            return false;
        }
        let nodes = |h: &Self| -> BTreeMap<ConceptId, String> {
            h.ids.iter().cloned().zip(h.gloss.iter().cloned()).collect()
        };
        let edges = |h: &Self| -> BTreeSet<(ConceptId, ConceptId)> {
            h.parents
                .iter()
                .enumerate()
                .flat_map(|(c, ps)| ps.iter().map(move |&p| (h.ids[c].clone(), h.ids[p].clone())))
                .collect()
        };
        nodes(self) == nodes(other) && edges(self) == edges(other)
    }
}

impl Eq for ConceptHierarchy {}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected `surface<TAB>lemma<TAB>pos<TAB>concept`")]
    Columns { line: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
    #[error("line {line}: unknown part-of-speech tag `{tag}`")]
    BadPos { line: usize, tag: String },
    #[error("line {line}: sense `{sense}` is not in the hierarchy")]
    UnknownSense { line: usize, sense: String },
    #[error("line {line}: duplicate (lemma, pos, sense) entry")]
    DuplicateEntry { line: usize },
    #[error("line {line}: {source}")]
    Id {
        line: usize,
        #[source]
        source: ConceptError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub sense: ConceptId,
}

/// Sense inventory: entries in file order, indexed by lemma.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    by_lemma: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Reads the lexicon TSV format and validates every sense against the
    /// hierarchy.
    pub fn load(reader: impl BufRead, hierarchy: &ConceptHierarchy) -> Result<Self, LexiconError> {
        let mut entries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [surface, lemma, pos, sense] = fields[..] else {
                return Err(LexiconError::Columns { line: lineno });
            };
            if surface.is_empty() || lemma.is_empty() {
                return Err(LexiconError::EmptyField { line: lineno });
            }
            let pos: Pos = pos.parse().map_err(|()| LexiconError::BadPos {
                line: lineno,
                tag: pos.to_string(),
            })?;
            let sense = ConceptId::new(sense).map_err(|source| LexiconError::Id { line: lineno, source })?;
            entries.push((lineno, LexEntry {
                surface: surface.to_string(),
                lemma: lemma.to_string(),
                pos,
                sense,
            }));
        }
        Self::from_numbered(entries, hierarchy)
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = LexEntry>,
        hierarchy: &ConceptHierarchy,
    ) -> Result<Self, LexiconError> {
        Self::from_numbered(
            entries.into_iter().enumerate().map(|(n, e)| (n + 1, e)).collect(),
            hierarchy,
        )
    }

    fn from_numbered(entries: Vec<(usize, LexEntry)>, hierarchy: &ConceptHierarchy) -> Result<Self, LexiconError> {
        let mut seen: HashSet<(String, Pos, String)> = HashSet::new();
        let mut lex = Lexicon::default();
        for (line, entry) in entries {
            if !hierarchy.contains(entry.sense.as_str()) {
                return Err(LexiconError::UnknownSense {
                    line,
                    sense: entry.sense.as_str().to_string(),
                });
            }
            let key = (entry.lemma.clone(), entry.pos, entry.sense.as_str().to_string());
            if !seen.insert(key) {
                return Err(LexiconError::DuplicateEntry { line });
            }
            lex.by_lemma
                .entry(entry.lemma.clone())
                .or_default()
                .push(lex.entries.len());
            lex.entries.push(entry);
        }
        Ok(lex)
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.by_lemma.contains_key(lemma)
    }

    /// All senses of a lemma in file order; empty when the lemma is absent.
    pub fn senses_of(&self, lemma: &str) -> Vec<(Pos, &ConceptId)> {
        self.by_lemma
            .get(lemma)
            .map(|ix| ix.iter().map(|&i| (self.entries[i].pos, &self.entries[i].sense)).collect())
            .unwrap_or_default()
    }

    /// Distinct sense concepts of a lemma, first-appearance order.
    pub fn distinct_senses_of(&self, lemma: &str) -> Vec<&ConceptId> {
        let mut seen = HashSet::new();
        self.senses_of(lemma)
            .into_iter()
            .filter_map(|(_, c)| seen.insert(c.as_str()).then_some(c))
            .collect()
    }
}

/// Minimum concept distance over all sense pairs of two lemmas; `None`
/// when either lemma has no senses, which callers treat as "cannot
/// compare" rather than an error.
pub fn word_distance(h: &ConceptHierarchy, lex: &Lexicon, a: &str, b: &str) -> Option<u32> {
    word_distance_witness(h, lex, a, b).map(|(d, _, _)| d)
}

/// Like [`word_distance`] but also reports the first sense pair attaining
/// the minimum, in lexicon order.
pub fn word_distance_witness(
    h: &ConceptHierarchy,
    lex: &Lexicon,
    a: &str,
    b: &str,
) -> Option<(u32, ConceptId, ConceptId)> {
    let mut best: Option<(u32, ConceptId, ConceptId)> = None;
    for (_, ca) in lex.senses_of(a) {
        for (_, cb) in lex.senses_of(b) {
            let Ok(d) = h.distance(ca.as_str(), cb.as_str()) else {
                continue;
            };
            if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                best = Some((d, ca.clone(), cb.clone()));
            }
        }
    }
    best
}
