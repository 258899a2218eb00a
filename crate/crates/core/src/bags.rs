//! Per-sense co-occurrence bags: synonym harvesting, corpus search and
//! weighted accumulation.
//!
//! For every sense of a target lemma, synonyms are the other lemmas whose
//! senses sit within a small distance of the sense concept. Every corpus
//! occurrence of a synonym is treated as a pivot, the extraction rules run
//! there, and each extracted word increments the sense's bag. Words from
//! weight-2 positions increment by 2, so a bag's total counts the inflated
//! multiset size.
//!
//! Accumulation is additive and order-independent; with the `parallel`
//! feature the per-sentence work is spread over rayon and merged, which
//! yields the same bags as the sequential fallback.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::concept::{ConceptHierarchy, ConceptId, Lexicon};
use crate::corpus::Sentence;
use crate::extract::{extract_by_rules, PositionClass, RuleTag};

pub const DEFAULT_SYNONYM_RADIUS: u32 = 2;
pub const DEFAULT_SYNONYM_CAP: usize = 64;

/// Synonyms selected for one sense of a target lemma, closest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynonymSet {
    pub target_lemma: String,
    pub sense: ConceptId,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Error)]
pub enum BagError {
    #[error("`{sense}` is not a sense of `{lemma}`")]
    UnknownSense { lemma: String, sense: String },
    #[error("line {line}: expected `target<TAB>sense<TAB>lemma<TAB>rule<TAB>count`")]
    Columns { line: usize },
    #[error("line {line}: bad rule tag `{tag}`")]
    BadRule { line: usize, tag: String },
    #[error("line {line}: count must be a positive integer")]
    BadCount { line: usize },
    #[error("line {line}: bad sense id `{sense}`")]
    BadSense { line: usize, sense: String },
    #[error("line {line}: duplicate row")]
    DuplicateRow { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Collects the synonyms of `(target_lemma, sense)`: every other lemma
/// with at least one sense within `radius` of the sense concept, minus
/// `exclusions`, ordered by (minimum distance, lemma) and truncated to
/// `cap`. The ordering makes the result independent of lexicon file
/// order.
pub fn harvest_synonyms(
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    target_lemma: &str,
    sense: &str,
    radius: u32,
    cap: usize,
    exclusions: &BTreeSet<String>,
) -> Result<SynonymSet, BagError> {
    let sense = lexicon
        .senses_of(target_lemma)
        .into_iter()
        .map(|(_, c)| c)
        .find(|c| c.as_str() == sense)
        .cloned()
        .ok_or_else(|| BagError::UnknownSense {
            lemma: target_lemma.to_string(),
            sense: sense.to_string(),
        })?;

    let start = hierarchy
        .idx_of(sense.as_str())
        .expect("lexicon senses are validated against the hierarchy");
    let within: HashMap<usize, u32> = hierarchy.ball(start, Some(radius)).into_iter().collect();

    let mut best: HashMap<&str, u32> = HashMap::new();
    for entry in lexicon.entries() {
        if entry.lemma == target_lemma || exclusions.contains(&entry.lemma) {
            continue;
        }
        let Some(idx) = hierarchy.idx_of(entry.sense.as_str()) else {
            continue;
        };
        if let Some(&d) = within.get(&idx) {
            best.entry(entry.lemma.as_str())
                .and_modify(|cur| *cur = (*cur).min(d))
                .or_insert(d);
        }
    }

    let mut ranked: Vec<(u32, &str)> = best.into_iter().map(|(l, d)| (d, l)).collect();
    ranked.sort_unstable();
    Ok(SynonymSet {
        target_lemma: target_lemma.to_string(),
        sense,
        synonyms: ranked.into_iter().take(cap).map(|(_, l)| l.to_string()).collect(),
    })
}

/// One synonym occurrence in the corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub sentence_id: String,
    pub token_index: usize,
    pub lemma: String,
}

/// All corpus tokens whose lemma belongs to the synonym set, in corpus
/// order.
pub fn find_examples(corpus: &[Sentence], synonyms: &SynonymSet) -> Vec<Occurrence> {
    let wanted: BTreeSet<&str> = synonyms.synonyms.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    for sentence in corpus {
        for token in sentence.tokens() {
            if wanted.contains(token.lemma.as_str()) {
                out.push(Occurrence {
                    sentence_id: sentence.id.clone(),
                    token_index: token.index,
                    lemma: token.lemma.clone(),
                });
            }
        }
    }
    out
}

/// Weighted multiset of co-occurring lemmas for one sense, each count
/// tagged with the rule that extracted it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoocBag {
    counts: BTreeMap<String, BTreeMap<RuleTag, u64>>,
    total: u64,
}

impl CoocBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, lemma: &str, rule: RuleTag, amount: u64) {
        debug_assert!(amount > 0);
        *self
            .counts
            .entry(lemma.to_string())
            .or_default()
            .entry(rule)
            .or_insert(0) += amount;
        self.total += amount;
    }

    /// Inflated multiset size: the sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Count of a lemma across all rule tags.
    pub fn count_of(&self, lemma: &str) -> u64 {
        self.counts
            .get(lemma)
            .map(|per_rule| per_rule.values().sum())
            .unwrap_or(0)
    }

    /// Count of a lemma restricted to one position class.
    pub fn count_in_class(&self, lemma: &str, class: PositionClass) -> u64 {
        self.counts
            .get(lemma)
            .map(|per_rule| {
                per_rule
                    .iter()
                    .filter(|(rule, _)| rule.position() == class)
                    .map(|(_, c)| c)
                    .sum()
            })
            .unwrap_or(0)
    }

    /// Distinct lemmas in the bag, sorted.
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// `(lemma, rule, count)` rows in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, RuleTag, u64)> {
        self.counts
            .iter()
            .flat_map(|(lemma, per_rule)| per_rule.iter().map(move |(&rule, &count)| (lemma.as_str(), rule, count)))
    }

    pub fn merge(&mut self, other: CoocBag) {
        for (lemma, per_rule) in other.counts {
            for (rule, count) in per_rule {
                self.add(&lemma, rule, count);
            }
        }
    }
}

/// Bags for every sense of one target lemma.
pub type SenseBags = BTreeMap<ConceptId, CoocBag>;

/// Builds the bags for one target lemma from its synonym sets. Every
/// synonym occurrence is a pivot; each extracted word increments the
/// sense's bag by the extraction weight (or by 1 when `weighted` is
/// off, the collection-weight ablation).
///
/// Uses rayon when the `parallel` feature is enabled.
pub fn build_bags(corpus: &[Sentence], synonym_sets: &[SynonymSet], weighted: bool) -> SenseBags {
    #[cfg(feature = "parallel")]
    {
        build_bags_parallel(corpus, synonym_sets, weighted)
    }
    #[cfg(not(feature = "parallel"))]
    {
        build_bags_sequential(corpus, synonym_sets, weighted)
    }
}

/// Sequential fallback of [`build_bags`]; always available.
pub fn build_bags_sequential(corpus: &[Sentence], synonym_sets: &[SynonymSet], weighted: bool) -> SenseBags {
    let plan = BuildPlan::new(synonym_sets, weighted);
    let mut bags = plan.empty_bags();
    for sentence in corpus {
        plan.accumulate(sentence, &mut bags);
    }
    bags
}

/// Data-parallel [`build_bags`]: per-sentence accumulation fanned out
/// over rayon, merged by commutative addition.
#[cfg(feature = "parallel")]
pub fn build_bags_parallel(corpus: &[Sentence], synonym_sets: &[SynonymSet], weighted: bool) -> SenseBags {
    let plan = BuildPlan::new(synonym_sets, weighted);
    corpus
        .par_iter()
        .fold(
            || plan.empty_bags(),
            |mut bags, sentence| {
                plan.accumulate(sentence, &mut bags);
                bags
            },
        )
        .reduce(
            || plan.empty_bags(),
            |mut left, right| {
                for (sense, bag) in right {
                    left.entry(sense).or_default().merge(bag);
                }
                left
            },
        )
}

struct BuildPlan<'a> {
    by_synonym: HashMap<&'a str, Vec<&'a ConceptId>>,
    senses: Vec<&'a ConceptId>,
    weighted: bool,
}

impl<'a> BuildPlan<'a> {
    fn new(synonym_sets: &'a [SynonymSet], weighted: bool) -> Self {
        if let Some(first) = synonym_sets.first() {
            assert!(
                synonym_sets.iter().all(|s| s.target_lemma == first.target_lemma),
                "all synonym sets must share one target lemma"
            );
        }
        let mut by_synonym: HashMap<&str, Vec<&ConceptId>> = HashMap::new();
        for set in synonym_sets {
            for lemma in &set.synonyms {
                by_synonym.entry(lemma.as_str()).or_default().push(&set.sense);
            }
        }
        BuildPlan {
            by_synonym,
            senses: synonym_sets.iter().map(|s| &s.sense).collect(),
            weighted,
        }
    }

    fn empty_bags(&self) -> SenseBags {
        self.senses.iter().map(|&s| (s.clone(), CoocBag::new())).collect()
    }

    fn accumulate(&self, sentence: &Sentence, bags: &mut SenseBags) {
        for token in sentence.tokens() {
            let Some(senses) = self.by_synonym.get(token.lemma.as_str()) else {
                continue;
            };
            let words = extract_by_rules(sentence, token.index);
            for sense in senses {
                let bag = bags.get_mut(sense.as_str()).expect("bag initialized per sense");
                for w in &words {
                    let amount = if self.weighted { u64::from(w.weight) } else { 1 };
                    bag.add(&w.lemma, w.rule, amount);
                }
            }
        }
    }
}

/// Bags for several target lemmas, as stored in one bags file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BagSet {
    by_target: BTreeMap<String, SenseBags>,
}

impl BagSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, target_lemma: &str, bags: SenseBags) {
        self.by_target.insert(target_lemma.to_string(), bags);
    }

    pub fn get(&self, target_lemma: &str) -> Option<&SenseBags> {
        self.by_target.get(target_lemma)
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.by_target.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.by_target.is_empty()
    }

    /// Writes rows sorted by (target, sense, lemma, rule); stable across
    /// runs and re-serializations. Empty bags produce no rows.
    pub fn save(&self, w: &mut impl Write) -> io::Result<()> {
        for (target, senses) in &self.by_target {
            for (sense, bag) in senses {
                for (lemma, rule, count) in bag.entries() {
                    writeln!(w, "{target}\t{sense}\t{lemma}\t{rule}\t{count}")?;
                }
            }
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("lemmas and ids are valid UTF-8")
    }

    pub fn load(reader: impl BufRead) -> Result<Self, BagError> {
        let mut set = BagSet::new();
        let mut seen: BTreeSet<(String, String, String, RuleTag)> = BTreeSet::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [target, sense, lemma, rule, count] = fields[..] else {
                return Err(BagError::Columns { line: lineno });
            };
            let rule: RuleTag = rule.parse().map_err(|()| BagError::BadRule {
                line: lineno,
                tag: rule.to_string(),
            })?;
            let count: u64 = match count.parse() {
                Ok(c) if c > 0 => c,
                _ => return Err(BagError::BadCount { line: lineno }),
            };
            let sense = ConceptId::new(sense).map_err(|_| BagError::BadSense {
                line: lineno,
                sense: sense.to_string(),
            })?;
            if !seen.insert((target.to_string(), sense.as_str().to_string(), lemma.to_string(), rule)) {
                return Err(BagError::DuplicateRow { line: lineno });
            }
            set.by_target
                .entry(target.to_string())
                .or_default()
                .entry(sense)
                .or_default()
                .add(lemma, rule, count);
        }
        Ok(set)
    }
}
