//! Dependency-annotated sentences and gold annotations.
//!
//! A sentence is a flat list of tokens with 1-based indices, a head link
//! per token (0 = sentence root), a link relation (`dep` or `coord`) and
//! an optional compound-noun group label. Coordination is encoded as a
//! `coord` head link from the non-final conjunct to its parallel
//! counterpart; such a link is not a dependency.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, BufRead};
use std::str::FromStr;

use thiserror::Error;

use crate::concept::{ConceptId, Pos};

/// Relation carried by a head link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Dep,
    Coord,
}

impl Rel {
    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Dep => "dep",
            Rel::Coord => "coord",
        }
    }
}

impl FromStr for Rel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dep" => Ok(Rel::Dep),
            "coord" => Ok(Rel::Coord),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Index of the token this one attaches to; 0 marks a root.
    pub head: usize,
    pub rel: Rel,
    /// Compound-noun group label; tokens sharing a label form one unit.
    pub group: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SentenceError {
    #[error("token {token}: head {head} out of range 0..={len}")]
    HeadOutOfRange { token: usize, head: usize, len: usize },
    #[error("token {token}: head equals its own index")]
    SelfHead { token: usize },
    #[error("token {token}: head links form a cycle")]
    CyclicHeads { token: usize },
    #[error("compound group `{label}` is not contiguous")]
    NonContiguousGroup { label: String },
    #[error("token {token}: expected index {expected}")]
    IndexMismatch { token: usize, expected: usize },
    #[error("sentence has no tokens")]
    Empty,
}

/// One dependency-parsed sentence. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    tokens: Vec<Token>,
}

impl Sentence {
    /// Validates head-range, acyclicity and compound contiguity.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self, SentenceError> {
        if tokens.is_empty() {
            return Err(SentenceError::Empty);
        }
        let len = tokens.len();
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(SentenceError::IndexMismatch {
                    token: t.index,
                    expected: i + 1,
                });
            }
            if t.head > len {
                return Err(SentenceError::HeadOutOfRange {
                    token: t.index,
                    head: t.head,
                    len,
                });
            }
            if t.head == t.index {
                return Err(SentenceError::SelfHead { token: t.index });
            }
        }

        // Walk head chains with path marking: 0 = unvisited, 1 = on the
        // current path, 2 = cleared.
        let mut state = vec![0u8; len + 1];
        for start in 1..=len {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            loop {
                if cur == 0 || state[cur] == 2 {
                    break;
                }
                if state[cur] == 1 {
                    return Err(SentenceError::CyclicHeads { token: cur });
                }
                state[cur] = 1;
                path.push(cur);
                cur = tokens[cur - 1].head;
            }
            for p in path {
                state[p] = 2;
            }
        }

        let mut spans: HashMap<&str, (usize, usize, usize)> = HashMap::new(); // label -> (first, last, count)
        for t in &tokens {
            if let Some(label) = &t.group {
                let e = spans.entry(label.as_str()).or_insert((t.index, t.index, 0));
                e.0 = e.0.min(t.index);
                e.1 = e.1.max(t.index);
                e.2 += 1;
            }
        }
        for (label, (first, last, count)) in spans {
            if last - first + 1 != count {
                return Err(SentenceError::NonContiguousGroup {
                    label: label.to_string(),
                });
            }
        }

        Ok(Sentence {
            id: id.into(),
            tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// 1-based access.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Indices of the compound group containing token `i`, in sentence
    /// order; `[i]` when the token is ungrouped. Panics on an invalid
    /// index.
    pub fn compound_of(&self, i: usize) -> Vec<usize> {
        let t = self.token(i).expect("token index in range");
        match &t.group {
            None => vec![i],
            Some(label) => self
                .tokens
                .iter()
                .filter(|u| u.group.as_deref() == Some(label.as_str()))
                .map(|u| u.index)
                .collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("sentence `{id}` (line {line}): {source}")]
    Sentence {
        id: String,
        line: usize,
        #[source]
        source: SentenceError,
    },
    #[error("line {line}: duplicate sentence id `{id}`")]
    DuplicateSentence { id: String, line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads the corpus format: a `# sid = <id>` header per sentence, one
/// token per line (`index surface lemma pos head rel group`,
/// tab-separated), sentences separated by blank lines.
pub fn load_corpus(reader: impl BufRead) -> Result<Vec<Sentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut current: Option<(String, usize, Vec<Token>)> = None; // (id, header line, tokens)

    let flush = |current: &mut Option<(String, usize, Vec<Token>)>,
                     sentences: &mut Vec<Sentence>|
     -> Result<(), CorpusError> {
        if let Some((id, line, tokens)) = current.take() {
            let sentence = Sentence::new(id.clone(), tokens)
                .map_err(|source| CorpusError::Sentence { id, line, source })?;
            sentences.push(sentence);
        }
        Ok(())
    };

    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() {
            flush(&mut current, &mut sentences)?;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(id) = rest.strip_prefix("sid") {
                let id = id.trim_start().strip_prefix('=').map(str::trim).unwrap_or_default();
                if id.is_empty() {
                    return Err(CorpusError::Syntax {
                        line: lineno,
                        msg: "empty sentence id".to_string(),
                    });
                }
                flush(&mut current, &mut sentences)?;
                if !seen_ids.insert(id.to_string()) {
                    return Err(CorpusError::DuplicateSentence {
                        id: id.to_string(),
                        line: lineno,
                    });
                }
                current = Some((id.to_string(), lineno, Vec::new()));
                continue;
            }
            // other comment lines are ignored
            continue;
        }

        let Some((id, header_line, tokens)) = current.as_mut() else {
            return Err(CorpusError::Syntax {
                line: lineno,
                msg: "token line before any `# sid = ...` header".to_string(),
            });
        };
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [index, surface, lemma, pos, head, rel, group] = fields[..] else {
            return Err(CorpusError::Syntax {
                line: lineno,
                msg: format!("expected 7 tab-separated fields, found {}", fields.len()),
            });
        };
        let syntax = |msg: String| CorpusError::Syntax { line: lineno, msg };
        let index: usize = index.parse().map_err(|_| syntax(format!("bad token index `{index}`")))?;
        let head: usize = head.parse().map_err(|_| syntax(format!("bad head `{head}`")))?;
        let pos: Pos = pos.parse().map_err(|()| syntax(format!("bad pos tag `{pos}`")))?;
        let rel: Rel = rel.parse().map_err(|()| syntax(format!("bad relation `{rel}`")))?;
        if surface.is_empty() || lemma.is_empty() {
            return Err(syntax("empty surface or lemma".to_string()));
        }
        if index != tokens.len() + 1 {
            return Err(CorpusError::Sentence {
                id: id.clone(),
                line: *header_line,
                source: SentenceError::IndexMismatch {
                    token: index,
                    expected: tokens.len() + 1,
                },
            });
        }
        tokens.push(Token {
            index,
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos,
            head,
            rel,
            group: (group != "-").then(|| group.to_string()),
        });
    }
    flush(&mut current, &mut sentences)?;
    Ok(sentences)
}

/// Gold label for one target occurrence; several senses may count as
/// correct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldItem {
    pub sentence_id: String,
    pub token_index: usize,
    pub target_lemma: String,
    pub senses: BTreeSet<ConceptId>,
}

#[derive(Debug, Error)]
pub enum GoldError {
    #[error("line {line}: expected `sentence_id<TAB>token_index<TAB>lemma<TAB>senses`")]
    Columns { line: usize },
    #[error("line {line}: bad token index `{value}`")]
    BadIndex { line: usize, value: String },
    #[error("line {line}: empty sense set")]
    EmptySenses { line: usize },
    #[error("line {line}: bad sense id `{value}`")]
    BadSense { line: usize, value: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads gold TSV: `sentence_id  token_index  target_lemma  sense[,sense...]`.
pub fn load_gold(reader: impl BufRead) -> Result<Vec<GoldItem>, GoldError> {
    let mut items = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [sid, index, lemma, senses] = fields[..] else {
            return Err(GoldError::Columns { line: lineno });
        };
        let token_index: usize = index.parse().map_err(|_| GoldError::BadIndex {
            line: lineno,
            value: index.to_string(),
        })?;
        if senses.is_empty() {
            return Err(GoldError::EmptySenses { line: lineno });
        }
        let mut set = BTreeSet::new();
        for s in senses.split(',') {
            let sense = ConceptId::new(s).map_err(|_| GoldError::BadSense {
                line: lineno,
                value: s.to_string(),
            })?;
            set.insert(sense);
        }
        items.push(GoldItem {
            sentence_id: sid.to_string(),
            token_index,
            target_lemma: lemma.to_string(),
            senses: set,
        });
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn tok(index: usize, lemma: &str, pos: Pos, head: usize) -> Token {
        Token {
            index,
            surface: lemma.to_string(),
            lemma: lemma.to_string(),
            pos,
            head,
            rel: Rel::Dep,
            group: None,
        }
    }

    #[test]
    fn empty_stream_gives_empty_corpus() {
        assert!(load_corpus(Cursor::new("")).unwrap().is_empty());
    }

    #[test]
    fn parses_two_token_sentence() {
        let text = "# sid = s1\n1\tある\tある\tV\t2\tdep\t-\n2\tこと\tこと\tN\t0\tdep\t-\n";
        let corpus = load_corpus(Cursor::new(text)).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus[0].id, "s1");
        assert_eq!(corpus[0].len(), 2);
        assert_eq!(corpus[0].token(1).unwrap().head, 2);
    }

    #[test]
    fn self_head_is_rejected() {
        let text = "# sid = s1\n1\tx\tx\tN\t1\tdep\t-\n";
        let err = load_corpus(Cursor::new(text)).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::Sentence {
                source: SentenceError::SelfHead { token: 1 },
                ..
            }
        ));
    }

    #[test]
    fn head_out_of_range_and_cycles_rejected() {
        let text = "# sid = s1\n1\tx\tx\tN\t9\tdep\t-\n";
        assert!(matches!(
            load_corpus(Cursor::new(text)).unwrap_err(),
            CorpusError::Sentence {
                source: SentenceError::HeadOutOfRange { .. },
                ..
            }
        ));

        let text = "# sid = s1\n1\tx\tx\tN\t2\tdep\t-\n2\ty\ty\tN\t1\tdep\t-\n";
        assert!(matches!(
            load_corpus(Cursor::new(text)).unwrap_err(),
            CorpusError::Sentence {
                source: SentenceError::CyclicHeads { .. },
                ..
            }
        ));
    }

    #[test]
    fn non_contiguous_group_rejected() {
        let tokens = vec![
            Token { group: Some("C1".into()), ..tok(1, "a", Pos::N, 0) },
            tok(2, "b", Pos::N, 1),
            Token { group: Some("C1".into()), ..tok(3, "c", Pos::N, 1) },
        ];
        assert_eq!(
            Sentence::new("s", tokens).unwrap_err(),
            SentenceError::NonContiguousGroup { label: "C1".into() }
        );
    }

    #[test]
    fn duplicate_sentence_id_rejected() {
        let text = "# sid = s1\n1\tx\tx\tN\t0\tdep\t-\n\n# sid = s1\n1\ty\ty\tN\t0\tdep\t-\n";
        assert!(matches!(
            load_corpus(Cursor::new(text)).unwrap_err(),
            CorpusError::DuplicateSentence { line: 4, .. }
        ));
    }

    #[test]
    fn compound_of_returns_whole_group_in_order() {
        let tokens = vec![
            Token { group: Some("C1".into()), ..tok(1, "お昼", Pos::N, 2) },
            Token { group: Some("C1".into()), ..tok(2, "過ぎ", Pos::N, 3) },
            tok(3, "電話する", Pos::V, 0),
        ];
        let s = Sentence::new("s", tokens).unwrap();
        assert_eq!(s.compound_of(1), vec![1, 2]);
        assert_eq!(s.compound_of(2), vec![1, 2]);
        assert_eq!(s.compound_of(3), vec![3]);
    }

    #[test]
    fn three_member_compound_from_middle() {
        let tokens = vec![
            Token { group: Some("G".into()), ..tok(1, "a", Pos::N, 2) },
            Token { group: Some("G".into()), ..tok(2, "b", Pos::N, 3) },
            Token { group: Some("G".into()), ..tok(3, "c", Pos::N, 0) },
        ];
        let s = Sentence::new("s", tokens).unwrap();
        assert_eq!(s.compound_of(2), vec![1, 2, 3]);
    }

    #[test]
    fn compound_groups_partition_the_sentence() {
        let tokens = vec![
            Token { group: Some("A".into()), ..tok(1, "a", Pos::N, 2) },
            Token { group: Some("A".into()), ..tok(2, "b", Pos::N, 4) },
            Token { group: Some("B".into()), ..tok(3, "c", Pos::N, 4) },
            Token { group: Some("B".into()), ..tok(4, "d", Pos::N, 0) },
        ];
        let s = Sentence::new("s", tokens).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                let a = s.compound_of(i);
                let b = s.compound_of(j);
                assert!(a == b || a.iter().all(|x| !b.contains(x)));
            }
        }
    }

    #[test]
    fn gold_parses_single_and_multiple_senses() {
        let text = "s1\t3\t昼\t昼の食事\ns2\t1\t昼\t昼の食事,正午の時分\n";
        let items = load_gold(Cursor::new(text)).unwrap();
        assert_eq!(items[0].senses.len(), 1);
        assert_eq!(items[1].senses.len(), 2);
        assert_eq!(items[1].token_index, 1);
    }

    #[test]
    fn gold_rejects_empty_sense_set() {
        let err = load_gold(Cursor::new("s1\t3\t昼\t\n")).unwrap_err();
        assert!(matches!(err, GoldError::EmptySenses { line: 1 }));
    }
}
