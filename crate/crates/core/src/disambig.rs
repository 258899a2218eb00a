//! Sense selection: weighted overlap scoring with a thesaurus-distance
//! fallback, plus the sequential priority strategy.
//!
//! Stage one scores every sense by the weighted proportion of the key
//! words found in its bag and answers on a unique strictly-positive
//! maximum. When nothing overlaps (or the maximum ties), stage two looks
//! for the semantically closest (key word, bag word) pair in the concept
//! hierarchy; equal distances are broken by the bag proportion of the
//! attaining word. Items may stay unanswered after both stages.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::bags::{BagSet, SenseBags};
use crate::concept::{word_distance, ConceptHierarchy, ConceptId, Lexicon};
use crate::corpus::Sentence;
use crate::extract::{extract_at_level, extract_keys, ExtractedWord, PositionClass, LEVELS};

/// Overlap score of one sense; at most the summed key weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseScore {
    pub sense: ConceptId,
    pub score: f64,
}

/// Which part of the pipeline produced an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Overlap,
    Thesaurus,
    /// Decided by the priority schedule at this level (1..=7).
    Sequential(u8),
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Overlap => f.write_str("overlap"),
            Stage::Thesaurus => f.write_str("thesaurus"),
            Stage::Sequential(k) => write!(f, "sequential-level-{k}"),
        }
    }
}

impl FromStr for Stage {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "overlap" => Ok(Stage::Overlap),
            "thesaurus" => Ok(Stage::Thesaurus),
            _ => {
                let k: u8 = s.strip_prefix("sequential-level-").ok_or(())?.parse().map_err(|_| ())?;
                (1..=7).contains(&k).then_some(Stage::Sequential(k)).ok_or(())
            }
        }
    }
}

/// Outcome for one target occurrence.
#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Answered { sense: ConceptId, score: f64, stage: Stage },
    Unanswered,
}

impl Decision {
    pub fn is_answered(&self) -> bool {
        matches!(self, Decision::Answered { .. })
    }

    pub fn sense(&self) -> Option<&ConceptId> {
        match self {
            Decision::Answered { sense, .. } => Some(sense),
            Decision::Unanswered => None,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Decision::Answered { stage, .. } => Some(*stage),
            Decision::Unanswered => None,
        }
    }
}

/// Scoring switches: `positional` restricts key/bag matches to the same
/// structural position; `query_weight` applies the 2x key weight at
/// query time (on by default, off for the ablation).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoreOptions {
    pub positional: bool,
    pub query_weight: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            positional: false,
            query_weight: true,
        }
    }
}

/// Weighted-proportion score of every sense in `bags`, in sense order.
/// A bag with total 0 scores 0.
pub fn score_overlap(keys: &[ExtractedWord], bags: &SenseBags, opts: ScoreOptions) -> Vec<SenseScore> {
    bags.iter()
        .map(|(sense, bag)| {
            let total = bag.total();
            let mut score = 0.0;
            if total > 0 {
                for key in keys {
                    let count = if opts.positional {
                        bag.count_in_class(&key.lemma, key.rule.position())
                    } else {
                        bag.count_of(&key.lemma)
                    };
                    if count > 0 {
                        let weight = if opts.query_weight { f64::from(key.weight) } else { 1.0 };
                        score += weight * (count as f64 / total as f64);
                    }
                }
            }
            SenseScore {
                sense: sense.clone(),
                score,
            }
        })
        .collect()
}

enum OverlapOutcome {
    Winner(usize),
    AllZero,
    Tie(Vec<usize>),
}

fn classify(scores: &[SenseScore]) -> OverlapOutcome {
    let best = scores.iter().map(|s| s.score).fold(0.0f64, f64::max);
    if best <= 0.0 {
        return OverlapOutcome::AllZero;
    }
    let winners: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.score == best)
        .map(|(i, _)| i)
        .collect();
    match winners.as_slice() {
        [single] => OverlapOutcome::Winner(*single),
        _ => OverlapOutcome::Tie(winners),
    }
}

/// Picks the sense with the unique strictly-positive maximum score;
/// all-zero scores and positive ties stay unanswered at this stage.
pub fn decide_by_overlap(scores: &[SenseScore]) -> Decision {
    match classify(scores) {
        OverlapOutcome::Winner(i) => Decision::Answered {
            sense: scores[i].sense.clone(),
            score: scores[i].score,
            stage: Stage::Overlap,
        },
        _ => Decision::Unanswered,
    }
}

/// Thesaurus fallback: selects the sense whose bag holds a word at the
/// minimum semantic distance from any key word; equal distances are
/// broken by the attaining word's proportion in its bag. The recorded
/// score is that proportion.
pub fn decide_by_thesaurus(
    keys: &[ExtractedWord],
    bags: &SenseBags,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
) -> Decision {
    thesaurus_among(keys, bags, None, hierarchy, lexicon, opts)
}

fn thesaurus_among(
    keys: &[ExtractedWord],
    bags: &SenseBags,
    allowed: Option<&BTreeSet<&str>>,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
) -> Decision {
    // distinct probes; in positional mode a key lemma probes once per class
    let probes: BTreeSet<(&str, Option<PositionClass>)> = keys
        .iter()
        .map(|k| {
            (
                k.lemma.as_str(),
                opts.positional.then(|| k.rule.position()),
            )
        })
        .collect();

    let mut memo: HashMap<(&str, &str), Option<u32>> = HashMap::new();
    let eligible = |bag: &crate::bags::CoocBag, lemma: &str, class: Option<PositionClass>| -> u64 {
        match class {
            Some(c) => bag.count_in_class(lemma, c),
            None => bag.count_of(lemma),
        }
    };

    let senses: Vec<(&ConceptId, &crate::bags::CoocBag)> = bags
        .iter()
        .filter(|(sense, bag)| {
            bag.total() > 0 && allowed.map_or(true, |set| set.contains(sense.as_str()))
        })
        .collect();

    let mut nearest: Option<u32> = None;
    for (_, bag) in &senses {
        for word in bag.lemmas() {
            for &(key, class) in &probes {
                if eligible(bag, word, class) == 0 {
                    continue;
                }
                let d = *memo
                    .entry((key, word))
                    .or_insert_with(|| word_distance(hierarchy, lexicon, key, word));
                if let Some(d) = d {
                    if nearest.map_or(true, |n| d < n) {
                        nearest = Some(d);
                    }
                }
            }
        }
    }
    let Some(nearest) = nearest else {
        return Decision::Unanswered;
    };

    // senses attaining the minimum, each with the best proportion of an
    // attaining word in its bag
    let mut candidates: Vec<(&ConceptId, f64)> = Vec::new();
    for (sense, bag) in &senses {
        let mut best_prop: Option<f64> = None;
        for word in bag.lemmas() {
            for &(key, class) in &probes {
                let count = eligible(bag, word, class);
                if count == 0 {
                    continue;
                }
                if memo.get(&(key, word)).copied().flatten() == Some(nearest) {
                    let prop = count as f64 / bag.total() as f64;
                    if best_prop.map_or(true, |b| prop > b) {
                        best_prop = Some(prop);
                    }
                }
            }
        }
        if let Some(prop) = best_prop {
            candidates.push((sense, prop));
        }
    }

    match candidates.as_slice() {
        [] => Decision::Unanswered,
        [(sense, prop)] => Decision::Answered {
            sense: (*sense).clone(),
            score: *prop,
            stage: Stage::Thesaurus,
        },
        _ => {
            let best = candidates.iter().map(|&(_, p)| p).fold(f64::MIN, f64::max);
            let winners: Vec<&(&ConceptId, f64)> =
                candidates.iter().filter(|&&(_, p)| p == best).collect();
            match winners.as_slice() {
                [(sense, prop)] => Decision::Answered {
                    sense: (*sense).clone(),
                    score: *prop,
                    stage: Stage::Thesaurus,
                },
                _ => Decision::Unanswered,
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum DisambigError {
    #[error("no co-occurrence bags for target lemma `{lemma}`")]
    NoBags { lemma: String },
    #[error("sentence `{sentence_id}` has no token {token}")]
    BadToken { sentence_id: String, token: usize },
}

/// Full pipeline for one occurrence: overlap first, thesaurus on zero
/// overlap; a positive overlap tie defers to the thesaurus restricted to
/// the tied senses.
pub fn disambiguate(
    sentence: &Sentence,
    pivot: usize,
    bags: &SenseBags,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
) -> Result<Decision, DisambigError> {
    let lemma = &sentence
        .token(pivot)
        .ok_or_else(|| DisambigError::BadToken {
            sentence_id: sentence.id.clone(),
            token: pivot,
        })?
        .lemma;
    if bags.is_empty() {
        return Err(DisambigError::NoBags { lemma: lemma.clone() });
    }
    let keys = extract_keys(sentence, pivot);
    let scores = score_overlap(&keys, bags, opts);
    Ok(match classify(&scores) {
        OverlapOutcome::Winner(i) => Decision::Answered {
            sense: scores[i].sense.clone(),
            score: scores[i].score,
            stage: Stage::Overlap,
        },
        OverlapOutcome::AllZero => thesaurus_among(&keys, bags, None, hierarchy, lexicon, opts),
        OverlapOutcome::Tie(winners) => {
            let tied: BTreeSet<&str> = winners.iter().map(|&i| scores[i].sense.as_str()).collect();
            thesaurus_among(&keys, bags, Some(&tied), hierarchy, lexicon, opts)
        }
    })
}

/// Priority-schedule strategy: take each level's keys alone, answer as
/// soon as one level has a unique strictly-positive overlap maximum,
/// and fall back to [`disambiguate`] after the last level.
pub fn disambiguate_sequential(
    sentence: &Sentence,
    pivot: usize,
    bags: &SenseBags,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
) -> Result<Decision, DisambigError> {
    disambiguate_sequential_with(&LEVELS, sentence, pivot, bags, hierarchy, lexicon, opts)
}

/// [`disambiguate_sequential`] with a custom level order.
pub fn disambiguate_sequential_with(
    schedule: &[u8],
    sentence: &Sentence,
    pivot: usize,
    bags: &SenseBags,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
) -> Result<Decision, DisambigError> {
    let lemma = &sentence
        .token(pivot)
        .ok_or_else(|| DisambigError::BadToken {
            sentence_id: sentence.id.clone(),
            token: pivot,
        })?
        .lemma;
    if bags.is_empty() {
        return Err(DisambigError::NoBags { lemma: lemma.clone() });
    }
    for &level in schedule {
        let keys = extract_at_level(sentence, pivot, level);
        if keys.is_empty() {
            continue;
        }
        let scores = score_overlap(&keys, bags, opts);
        if let OverlapOutcome::Winner(i) = classify(&scores) {
            return Ok(Decision::Answered {
                sense: scores[i].sense.clone(),
                score: scores[i].score,
                stage: Stage::Sequential(level),
            });
        }
    }
    disambiguate(sentence, pivot, bags, hierarchy, lexicon, opts)
}

/// Disambiguation strategy selector for batch runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Basic,
    Sequential,
}

impl FromStr for Strategy {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Strategy::Basic),
            "sequential" => Ok(Strategy::Sequential),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Basic => "basic",
            Strategy::Sequential => "sequential",
        })
    }
}

/// One occurrence to disambiguate: corpus position plus token index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkItem {
    /// 0-based index into the corpus sentence list.
    pub sentence: usize,
    /// 1-based token index within that sentence.
    pub token: usize,
}

/// A decision bound to its occurrence, as serialized in decision files.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRecord {
    pub sentence_id: String,
    pub token_index: usize,
    pub target_lemma: String,
    pub decision: Decision,
}

fn decide_one(
    corpus: &[Sentence],
    item: WorkItem,
    bags: &BagSet,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
    strategy: Strategy,
) -> Result<DecisionRecord, DisambigError> {
    let sentence = &corpus[item.sentence];
    let token = sentence.token(item.token).ok_or_else(|| DisambigError::BadToken {
        sentence_id: sentence.id.clone(),
        token: item.token,
    })?;
    let sense_bags = bags.get(&token.lemma).ok_or_else(|| DisambigError::NoBags {
        lemma: token.lemma.clone(),
    })?;
    let decision = match strategy {
        Strategy::Basic => disambiguate(sentence, item.token, sense_bags, hierarchy, lexicon, opts)?,
        Strategy::Sequential => {
            disambiguate_sequential(sentence, item.token, sense_bags, hierarchy, lexicon, opts)?
        }
    };
    Ok(DecisionRecord {
        sentence_id: sentence.id.clone(),
        token_index: item.token,
        target_lemma: token.lemma.clone(),
        decision,
    })
}

/// Disambiguates a batch of occurrences against shared read-only
/// resources, preserving item order. Uses rayon when the `parallel`
/// feature is enabled.
pub fn disambiguate_batch(
    corpus: &[Sentence],
    items: &[WorkItem],
    bags: &BagSet,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
    strategy: Strategy,
) -> Result<Vec<DecisionRecord>, DisambigError> {
    #[cfg(feature = "parallel")]
    {
        disambiguate_batch_parallel(corpus, items, bags, hierarchy, lexicon, opts, strategy)
    }
    #[cfg(not(feature = "parallel"))]
    {
        disambiguate_batch_sequential(corpus, items, bags, hierarchy, lexicon, opts, strategy)
    }
}

/// Sequential fallback of [`disambiguate_batch`]; always available.
pub fn disambiguate_batch_sequential(
    corpus: &[Sentence],
    items: &[WorkItem],
    bags: &BagSet,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
    strategy: Strategy,
) -> Result<Vec<DecisionRecord>, DisambigError> {
    items
        .iter()
        .map(|&item| decide_one(corpus, item, bags, hierarchy, lexicon, opts, strategy))
        .collect()
}

/// Data-parallel [`disambiguate_batch`].
#[cfg(feature = "parallel")]
pub fn disambiguate_batch_parallel(
    corpus: &[Sentence],
    items: &[WorkItem],
    bags: &BagSet,
    hierarchy: &ConceptHierarchy,
    lexicon: &Lexicon,
    opts: ScoreOptions,
    strategy: Strategy,
) -> Result<Vec<DecisionRecord>, DisambigError> {
    items
        .par_iter()
        .map(|&item| decide_one(corpus, item, bags, hierarchy, lexicon, opts, strategy))
        .collect()
}

#[derive(Debug, Error)]
pub enum DecisionFileError {
    #[error("line {line}: expected `sid<TAB>token<TAB>lemma<TAB>sense<TAB>score<TAB>stage`")]
    Columns { line: usize },
    #[error("line {line}: bad token index")]
    BadIndex { line: usize },
    #[error("line {line}: bad stage `{stage}`")]
    BadStage { line: usize, stage: String },
    #[error("line {line}: bad score")]
    BadScore { line: usize },
    #[error("line {line}: bad sense id")]
    BadSense { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One line per decision: `sid  token  lemma  sense|-  score|-  stage`,
/// stage `unanswered` for open items.
pub fn save_decisions(records: &[DecisionRecord], w: &mut impl Write) -> io::Result<()> {
    for r in records {
        match &r.decision {
            Decision::Answered { sense, score, stage } => writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.sentence_id, r.token_index, r.target_lemma, sense, score, stage
            )?,
            Decision::Unanswered => writeln!(
                w,
                "{}\t{}\t{}\t-\t-\tunanswered",
                r.sentence_id, r.token_index, r.target_lemma
            )?,
        }
    }
    Ok(())
}

pub fn decisions_to_string(records: &[DecisionRecord]) -> String {
    let mut buf = Vec::new();
    save_decisions(records, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("decision fields are valid UTF-8")
}

pub fn load_decisions(reader: impl BufRead) -> Result<Vec<DecisionRecord>, DecisionFileError> {
    let mut records = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [sid, token, lemma, sense, score, stage] = fields[..] else {
            return Err(DecisionFileError::Columns { line: lineno });
        };
        let token_index: usize = token.parse().map_err(|_| DecisionFileError::BadIndex { line: lineno })?;
        let decision = if stage == "unanswered" {
            if sense != "-" || score != "-" {
                return Err(DecisionFileError::BadStage {
                    line: lineno,
                    stage: stage.to_string(),
                });
            }
            Decision::Unanswered
        } else {
            let stage: Stage = stage.parse().map_err(|()| DecisionFileError::BadStage {
                line: lineno,
                stage: stage.to_string(),
            })?;
            let sense = ConceptId::new(sense).map_err(|_| DecisionFileError::BadSense { line: lineno })?;
            let score: f64 = score.parse().map_err(|_| DecisionFileError::BadScore { line: lineno })?;
            Decision::Answered { sense, score, stage }
        };
        records.push(DecisionRecord {
            sentence_id: sid.to_string(),
            token_index,
            target_lemma: lemma.to_string(),
            decision,
        });
    }
    Ok(records)
}
