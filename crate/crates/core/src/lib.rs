//! Knowledge-based word-sense disambiguation over a concept hierarchy.
//!
//! Given a sense inventory (a lexicon mapping lemmas onto nodes of a
//! rooted concept DAG) and a dependency-parsed corpus, the pipeline is:
//!
//! 1. [`bags::harvest_synonyms`] — collect, for each sense of a target
//!    lemma, the lemmas whose senses sit close to it in the hierarchy;
//! 2. [`bags::build_bags`] — run the positional extraction rules of
//!    [`extract`] at every corpus occurrence of those synonyms and
//!    accumulate per-sense weighted co-occurrence bags;
//! 3. [`disambig::disambiguate`] — score the senses of a new occurrence
//!    by the weighted overlap between its key words and each bag,
//!    falling back to thesaurus distance when nothing overlaps;
//! 4. [`eval::evaluate`] — score decisions against gold annotations and
//!    render per-lemma answer-rate/accuracy reports.
//!
//! Bag building and batch disambiguation are data-parallel over
//! sentences (rayon, `parallel` feature, on by default); the sequential
//! fallbacks produce identical results and stay available for
//! comparison, see `benches/pipeline.rs`.

pub mod bags;
pub mod concept;
pub mod corpus;
pub mod disambig;
pub mod eval;
pub mod extract;

pub use bags::{build_bags, find_examples, harvest_synonyms, BagSet, CoocBag, SenseBags, SynonymSet};
pub use concept::{word_distance, ConceptHierarchy, ConceptId, Lexicon, Pos};
pub use corpus::{load_corpus, load_gold, GoldItem, Sentence, Token};
pub use disambig::{
    decide_by_overlap, decide_by_thesaurus, disambiguate, disambiguate_batch, disambiguate_sequential,
    Decision, DecisionRecord, ScoreOptions, SenseScore, Stage, Strategy, WorkItem,
};
pub use eval::{evaluate, random_baseline, staged_evaluate, EvalRow, Report};
pub use extract::{extract_at_level, extract_by_rules, extract_keys, ExtractedWord, RuleTag};
