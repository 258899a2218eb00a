//! Scoring decisions against gold annotations.
//!
//! Reports carry raw counts per target lemma plus an answer rate
//! (answered / n) and an accuracy (correct / answered), both rendered to
//! one decimal with half-up rounding. A decision is correct when it is
//! answered and its sense belongs to the gold item's correct set, which
//! may hold more than one sense.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::concept::Lexicon;
use crate::corpus::GoldItem;
use crate::disambig::{Decision, DecisionRecord, Stage};

/// `100 * num / den` to one decimal, half-up; `0.0` when `den` is 0.
pub fn pct1(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.0".to_string();
    }
    let tenths = (2000 * num + den) / (2 * den);
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// One report line. `sense_count` is `None` on the totals row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalRow {
    pub lemma: String,
    pub sense_count: Option<usize>,
    pub n: u64,
    pub correct: u64,
    pub wrong: u64,
    pub unanswered: u64,
}

impl EvalRow {
    pub fn answered(&self) -> u64 {
        self.correct + self.wrong
    }

    pub fn answer_rate(&self) -> String {
        pct1(self.answered(), self.n)
    }

    pub fn accuracy(&self) -> String {
        pct1(self.correct, self.answered())
    }

    pub fn to_tsv(&self) -> String {
        let senses = self
            .sense_count
            .map_or_else(|| "-".to_string(), |c| c.to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.lemma,
            senses,
            self.n,
            self.correct,
            self.wrong,
            self.unanswered,
            self.answer_rate(),
            self.accuracy()
        )
    }
}

pub const REPORT_HEADER: &str = "# lemma\tsenses\tn\tcorrect\twrong\tunanswered\tanswer_rate\taccuracy";

/// Per-lemma rows (sorted by lemma), a totals row, and the mismatches
/// between the decision and gold sets, which are reported rather than
/// silently dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub rows: Vec<EvalRow>,
    pub total: EvalRow,
    pub decisions_without_gold: Vec<(String, usize)>,
    pub gold_without_decision: Vec<(String, usize)>,
}

impl Report {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_tsv());
            out.push('\n');
        }
        out.push_str(&self.total.to_tsv());
        out.push('\n');
        out
    }

    /// Space-aligned rendering for terminals.
    pub fn to_aligned(&self) -> String {
        let header = ["lemma", "senses", "n", "correct", "wrong", "unanswered", "rate", "acc"];
        let mut cells: Vec<[String; 8]> = Vec::new();
        for row in self.rows.iter().chain([&self.total]) {
            cells.push([
                row.lemma.clone(),
                row.sense_count.map_or_else(|| "-".into(), |c| c.to_string()),
                row.n.to_string(),
                row.correct.to_string(),
                row.wrong.to_string(),
                row.unanswered.to_string(),
                row.answer_rate(),
                row.accuracy(),
            ]);
        }
        let mut widths = [0usize; 8];
        for (i, h) in header.iter().enumerate() {
            widths[i] = h.chars().count();
        }
        for row in &cells {
            for (i, c) in row.iter().enumerate() {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
        let mut out = String::new();
        let emit = |cols: &[String; 8], out: &mut String| {
            for (i, c) in cols.iter().enumerate() {
                let pad = widths[i] - c.chars().count();
                if i > 0 {
                    out.push_str("  ");
                }
                if i == 0 {
                    out.push_str(c);
                    out.push_str(&" ".repeat(pad));
                } else {
                    out.push_str(&" ".repeat(pad));
                    out.push_str(c);
                }
            }
            out.push('\n');
        };
        emit(&header.map(String::from), &mut out);
        for row in &cells {
            emit(row, &mut out);
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("duplicate decision for ({sentence_id}, {token_index})")]
    DuplicateDecision { sentence_id: String, token_index: usize },
    #[error("({sentence_id}, {token_index}): decision lemma `{decision}` does not match gold lemma `{gold}`")]
    LemmaMismatch {
        sentence_id: String,
        token_index: usize,
        decision: String,
        gold: String,
    },
    #[error("gold target `{lemma}` has no senses in the lexicon")]
    NoSenses { lemma: String },
}

struct Matched<'a> {
    lemma: &'a str,
    decision: &'a Decision,
    gold: &'a GoldItem,
}

fn match_items<'a>(
    decisions: &'a [DecisionRecord],
    gold: &'a [GoldItem],
) -> Result<(Vec<Matched<'a>>, Vec<(String, usize)>, Vec<(String, usize)>), EvalError> {
    let mut by_key: HashMap<(&str, usize), &DecisionRecord> = HashMap::new();
    for d in decisions {
        if by_key.insert((d.sentence_id.as_str(), d.token_index), d).is_some() {
            return Err(EvalError::DuplicateDecision {
                sentence_id: d.sentence_id.clone(),
                token_index: d.token_index,
            });
        }
    }

    let mut matched = Vec::new();
    let mut gold_without = Vec::new();
    let mut used: HashMap<(&str, usize), ()> = HashMap::new();
    for g in gold {
        match by_key.get(&(g.sentence_id.as_str(), g.token_index)) {
            Some(d) => {
                if d.target_lemma != g.target_lemma {
                    return Err(EvalError::LemmaMismatch {
                        sentence_id: g.sentence_id.clone(),
                        token_index: g.token_index,
                        decision: d.target_lemma.clone(),
                        gold: g.target_lemma.clone(),
                    });
                }
                used.insert((g.sentence_id.as_str(), g.token_index), ());
                matched.push(Matched {
                    lemma: g.target_lemma.as_str(),
                    decision: &d.decision,
                    gold: g,
                });
            }
            None => gold_without.push((g.sentence_id.clone(), g.token_index)),
        }
    }
    let decisions_without = decisions
        .iter()
        .filter(|d| !used.contains_key(&(d.sentence_id.as_str(), d.token_index)))
        .map(|d| (d.sentence_id.clone(), d.token_index))
        .collect();
    Ok((matched, decisions_without, gold_without))
}

fn rows_from<'a>(
    items: impl IntoIterator<Item = &'a Matched<'a>>,
    lemma_universe: &BTreeMap<&'a str, ()>,
    lexicon: &Lexicon,
) -> (Vec<EvalRow>, EvalRow) {
    let mut counts: BTreeMap<&str, (u64, u64, u64)> = // (correct, wrong, unanswered)
        lemma_universe.keys().map(|&l| (l, (0, 0, 0))).collect();
    for m in items {
        let slot = counts.get_mut(m.lemma).expect("lemma in universe");
        match m.decision {
            Decision::Answered { sense, .. } => {
                if m.gold.senses.contains(sense.as_str()) {
                    slot.0 += 1;
                } else {
                    slot.1 += 1;
                }
            }
            Decision::Unanswered => slot.2 += 1,
        }
    }
    let rows: Vec<EvalRow> = counts
        .iter()
        .map(|(&lemma, &(correct, wrong, unanswered))| EvalRow {
            lemma: lemma.to_string(),
            sense_count: Some(lexicon.distinct_senses_of(lemma).len()),
            n: correct + wrong + unanswered,
            correct,
            wrong,
            unanswered,
        })
        .collect();
    let total = EvalRow {
        lemma: "TOTAL".to_string(),
        sense_count: None,
        n: rows.iter().map(|r| r.n).sum(),
        correct: rows.iter().map(|r| r.correct).sum(),
        wrong: rows.iter().map(|r| r.wrong).sum(),
        unanswered: rows.iter().map(|r| r.unanswered).sum(),
    };
    (rows, total)
}

/// Scores every decision against its gold item (matched on sentence id
/// and token index). Unmatched entries on either side are reported in
/// the result, not dropped.
pub fn evaluate(decisions: &[DecisionRecord], gold: &[GoldItem], lexicon: &Lexicon) -> Result<Report, EvalError> {
    let (matched, decisions_without, gold_without) = match_items(decisions, gold)?;
    let universe: BTreeMap<&str, ()> = matched.iter().map(|m| (m.lemma, ())).collect();
    let (rows, total) = rows_from(matched.iter(), &universe, lexicon);
    Ok(Report {
        rows,
        total,
        decisions_without_gold: decisions_without,
        gold_without_decision: gold_without,
    })
}

/// Splits the matched items into those answered before the thesaurus
/// stage and the rest (thesaurus answers plus unanswered items), and
/// reports each partition over the same lemma rows, so per-lemma `n`
/// values sum to the unpartitioned report.
pub fn staged_evaluate(
    decisions: &[DecisionRecord],
    gold: &[GoldItem],
    lexicon: &Lexicon,
) -> Result<(Report, Report), EvalError> {
    let (matched, decisions_without, gold_without) = match_items(decisions, gold)?;
    let universe: BTreeMap<&str, ()> = matched.iter().map(|m| (m.lemma, ())).collect();
    let is_early = |m: &&Matched<'_>| {
        matches!(
            m.decision,
            Decision::Answered { stage, .. } if *stage != Stage::Thesaurus
        )
    };
    let (early, fallback): (Vec<&Matched>, Vec<&Matched>) = matched.iter().partition(is_early);
    let (rows_a, total_a) = rows_from(early.into_iter(), &universe, lexicon);
    let (rows_b, total_b) = rows_from(fallback.into_iter(), &universe, lexicon);
    Ok((
        Report {
            rows: rows_a,
            total: total_a,
            decisions_without_gold: decisions_without.clone(),
            gold_without_decision: gold_without.clone(),
        },
        Report {
            rows: rows_b,
            total: total_b,
            decisions_without_gold: decisions_without,
            gold_without_decision: gold_without,
        },
    ))
}

/// Expected accuracy of choosing a sense uniformly at random:
/// `100 x mean over gold items of |correct senses| / |senses|`.
/// Returns 0 for an empty gold set.
pub fn random_baseline(gold: &[GoldItem], lexicon: &Lexicon) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for item in gold {
        let senses = lexicon.distinct_senses_of(&item.target_lemma);
        if senses.is_empty() {
            return Err(EvalError::NoSenses {
                lemma: item.target_lemma.clone(),
            });
        }
        sum += item.senses.len() as f64 / senses.len() as f64;
    }
    Ok(100.0 * sum / gold.len() as f64)
}

/// Renders the baseline as a comment line for report output.
pub fn baseline_line(baseline: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "# random-baseline = {:.1}", baseline);
    s
}
