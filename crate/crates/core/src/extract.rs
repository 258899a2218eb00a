//! Positional extraction of co-occurring words around a pivot token.
//!
//! Four base rules gather words from fixed structural positions relative
//! to the pivot's unit (the pivot's compound group, or the pivot alone):
//!
//! * R1 — other members of the pivot's compound
//! * R2 — the word the unit depends on (its governor)
//! * R3 — other words depending on that same governor
//! * R4 — words depending on the unit
//!
//! R2 and R4 words carry weight 2, the rest weight 1. Only content words
//! (nouns, verbs, adjectives) are emitted, and never the pivot itself nor
//! any token sharing the pivot's lemma.
//!
//! On top of the base rules, a seven-level priority schedule splits the
//! same neighborhood by part of speech and adds three wider positions:
//! other dependents of the governor (level 5), dependents of those words
//! (level 6, expanding compound groups) and coordination-parallel words
//! (level 7).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::concept::Pos;
use crate::corpus::{Rel, Sentence};

/// Structural position a word was extracted from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleTag {
    R1,
    R2,
    R3,
    R4,
    P5,
    P6,
    P7,
}

/// Coarse position class used when matching keys against bag entries in
/// positional mode. P5 shares R3's position (other dependents of the
/// governor).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PositionClass {
    Compound,
    Governor,
    CoDependent,
    Dependent,
    Nested,
    Parallel,
}

impl RuleTag {
    pub fn weight(self) -> u32 {
        match self {
            RuleTag::R2 | RuleTag::R4 => 2,
            _ => 1,
        }
    }

    pub fn position(self) -> PositionClass {
        match self {
            RuleTag::R1 => PositionClass::Compound,
            RuleTag::R2 => PositionClass::Governor,
            RuleTag::R3 | RuleTag::P5 => PositionClass::CoDependent,
            RuleTag::R4 => PositionClass::Dependent,
            RuleTag::P6 => PositionClass::Nested,
            RuleTag::P7 => PositionClass::Parallel,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RuleTag::R1 => "R1",
            RuleTag::R2 => "R2",
            RuleTag::R3 => "R3",
            RuleTag::R4 => "R4",
            RuleTag::P5 => "P5",
            RuleTag::P6 => "P6",
            RuleTag::P7 => "P7",
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleTag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R1" => Ok(RuleTag::R1),
            "R2" => Ok(RuleTag::R2),
            "R3" => Ok(RuleTag::R3),
            "R4" => Ok(RuleTag::R4),
            "P5" => Ok(RuleTag::P5),
            "P6" => Ok(RuleTag::P6),
            "P7" => Ok(RuleTag::P7),
            _ => Err(()),
        }
    }
}

/// One extracted word occurrence. `weight` is always
/// [`RuleTag::weight`] of `rule`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedWord {
    pub lemma: String,
    pub rule: RuleTag,
    pub weight: u32,
    /// Token index the word came from; useful for tracing and ordering.
    pub token: usize,
}

struct Extractor<'a> {
    sentence: &'a Sentence,
    pivot: usize,
    pivot_lemma: &'a str,
    unit: Vec<usize>,
}

impl<'a> Extractor<'a> {
    fn new(sentence: &'a Sentence, pivot: usize) -> Self {
        let pivot_lemma = sentence
            .token(pivot)
            .expect("pivot index in range")
            .lemma
            .as_str();
        Extractor {
            sentence,
            pivot,
            pivot_lemma,
            unit: sentence.compound_of(pivot),
        }
    }

    fn in_unit(&self, index: usize) -> bool {
        self.unit.contains(&index)
    }

    /// The token the pivot's unit depends on: head of the unit's final
    /// member, present only for a genuine dependency link.
    fn governor(&self) -> Option<usize> {
        let last = *self.unit.last().expect("unit is non-empty");
        let t = self.sentence.token(last).unwrap();
        (t.rel == Rel::Dep && t.head != 0).then_some(t.head)
    }

    fn emit(&self, out: &mut Vec<ExtractedWord>, index: usize, rule: RuleTag) {
        let t = self.sentence.token(index).unwrap();
        if index == self.pivot || !t.pos.is_content() || t.lemma == self.pivot_lemma {
            return;
        }
        out.push(ExtractedWord {
            lemma: t.lemma.clone(),
            rule,
            weight: rule.weight(),
            token: index,
        });
    }

    /// Tokens attached to the given head index by a dependency link.
    fn dependents_of(&self, head: usize) -> impl Iterator<Item = usize> + '_ {
        self.sentence
            .tokens()
            .iter()
            .filter(move |t| t.rel == Rel::Dep && t.head == head)
            .map(|t| t.index)
    }

    /// Tokens attached to any member of the unit from outside it.
    fn unit_dependents(&self) -> Vec<usize> {
        self.sentence
            .tokens()
            .iter()
            .filter(|t| t.rel == Rel::Dep && self.in_unit(t.head) && !self.in_unit(t.index))
            .map(|t| t.index)
            .collect()
    }

    /// Other dependents of the governor, outside the unit.
    fn co_dependents(&self) -> Vec<usize> {
        match self.governor() {
            None => Vec::new(),
            Some(gov) => self
                .dependents_of(gov)
                .filter(|&i| !self.in_unit(i))
                .collect(),
        }
    }

    /// Coordination partners of the unit, either direction.
    fn coord_partners(&self) -> Vec<usize> {
        let mut partners = BTreeSet::new();
        let last = *self.unit.last().unwrap();
        let t = self.sentence.token(last).unwrap();
        if t.rel == Rel::Coord && t.head != 0 {
            partners.insert(t.head);
        }
        for u in self.sentence.tokens() {
            if u.rel == Rel::Coord && u.head != 0 && self.in_unit(u.head) && !self.in_unit(u.index) {
                partners.insert(u.index);
            }
        }
        partners.into_iter().collect()
    }
}

/// Applies the four base rules to `pivot`. Output is ordered by rule,
/// then token index; duplicates are kept, one entry per occurrence.
pub fn extract_by_rules(sentence: &Sentence, pivot: usize) -> Vec<ExtractedWord> {
    let ex = Extractor::new(sentence, pivot);
    let mut out = Vec::new();
    for &i in &ex.unit {
        ex.emit(&mut out, i, RuleTag::R1);
    }
    if let Some(gov) = ex.governor() {
        ex.emit(&mut out, gov, RuleTag::R2);
        for i in ex.co_dependents() {
            ex.emit(&mut out, i, RuleTag::R3);
        }
    }
    for i in ex.unit_dependents() {
        ex.emit(&mut out, i, RuleTag::R4);
    }
    out
}

/// Key-word extraction for the input sentence; same contract as
/// [`extract_by_rules`], the separate name marks the query side.
pub fn extract_keys(sentence: &Sentence, pivot: usize) -> Vec<ExtractedWord> {
    extract_by_rules(sentence, pivot)
}

/// Priority levels of the sequential schedule, in default order.
pub const LEVELS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

/// Extracts only the words at one priority level:
///
/// 1. governing verb, 2. governing noun/adjective, 3. dependent verb,
/// 4. dependent noun/adjective, 5. other dependents of the governor,
/// 6. dependents of the level-5 words (compound groups expanded),
/// 7. coordination-parallel words.
///
/// Levels 1–2 are governor positions (weight 2, tag R2); levels 3–4 are
/// dependent positions (weight 2, tag R4); levels 5–7 carry weight 1
/// with tags P5–P7.
pub fn extract_at_level(sentence: &Sentence, pivot: usize, level: u8) -> Vec<ExtractedWord> {
    assert!((1..=7).contains(&level), "level must be 1..=7, got {level}");
    let ex = Extractor::new(sentence, pivot);
    let mut out = Vec::new();
    match level {
        1 | 2 => {
            if let Some(gov) = ex.governor() {
                let pos = sentence.token(gov).unwrap().pos;
                let wanted = if level == 1 {
                    pos == Pos::V
                } else {
                    matches!(pos, Pos::N | Pos::Adj)
                };
                if wanted {
                    ex.emit(&mut out, gov, RuleTag::R2);
                }
            }
        }
        3 | 4 => {
            for i in ex.unit_dependents() {
                let pos = sentence.token(i).unwrap().pos;
                let wanted = if level == 3 {
                    pos == Pos::V
                } else {
                    matches!(pos, Pos::N | Pos::Adj)
                };
                if wanted {
                    ex.emit(&mut out, i, RuleTag::R4);
                }
            }
        }
        5 => {
            for i in ex.co_dependents() {
                ex.emit(&mut out, i, RuleTag::P5);
            }
        }
        6 => {
            // dependents of the level-5 words, with nested noun phrases
            // (compound groups) expanded to all their members
            let mut bases = Vec::new();
            for i in ex.co_dependents() {
                let t = sentence.token(i).unwrap();
                if t.pos.is_content() && t.lemma != ex.pivot_lemma {
                    bases.push(i);
                }
            }
            let mut found = BTreeSet::new();
            for base in bases {
                for d in ex.dependents_of(base) {
                    for m in sentence.compound_of(d) {
                        found.insert(m);
                    }
                }
            }
            for i in found {
                if !ex.in_unit(i) {
                    ex.emit(&mut out, i, RuleTag::P6);
                }
            }
        }
        7 => {
            for i in ex.coord_partners() {
                ex.emit(&mut out, i, RuleTag::P7);
            }
        }
        _ => unreachable!(),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;

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

    fn grouped(index: usize, lemma: &str, pos: Pos, head: usize, group: &str) -> Token {
        Token {
            group: Some(group.to_string()),
            ..tok(index, lemma, pos, head)
        }
    }

    fn coord(index: usize, lemma: &str, pos: Pos, head: usize) -> Token {
        Token {
            rel: Rel::Coord,
            ..tok(index, lemma, pos, head)
        }
    }

    fn pairs(words: &[ExtractedWord]) -> Vec<(&str, RuleTag, u32)> {
        words.iter().map(|w| (w.lemma.as_str(), w.rule, w.weight)).collect()
    }

    /// 食堂でお昼を食べてから、授業に出ることにした。
    fn sentence_eat_at_cafeteria() -> Sentence {
        Sentence::new(
            "2.3",
            vec![
                tok(1, "食堂", Pos::N, 3),
                tok(2, "お昼", Pos::N, 3),
                tok(3, "食べる", Pos::V, 5),
                tok(4, "授業", Pos::N, 5),
                tok(5, "出る", Pos::V, 6),
                tok(6, "こと", Pos::N, 7),
                tok(7, "する", Pos::V, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rule2_and_rule3_from_governing_verb() {
        let s = sentence_eat_at_cafeteria();
        let words = extract_by_rules(&s, 2);
        assert_eq!(
            pairs(&words),
            [("食べる", RuleTag::R2, 2), ("食堂", RuleTag::R3, 1)]
        );
    }

    /// あの日食べたお昼は最高においしかった。 (お昼 kept as its own root so
    /// the parse pins exactly the dependent-verb position)
    fn sentence_that_day_lunch() -> Sentence {
        Sentence::new(
            "rule4",
            vec![
                tok(1, "あの", Pos::Other, 2),
                tok(2, "日", Pos::N, 3),
                tok(3, "食べる", Pos::V, 4),
                tok(4, "お昼", Pos::N, 0),
                tok(5, "最高", Pos::N, 6),
                tok(6, "おいしい", Pos::Adj, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rule4_from_dependent_verb() {
        let s = sentence_that_day_lunch();
        assert_eq!(pairs(&extract_by_rules(&s, 4)), [("食べる", RuleTag::R4, 2)]);
    }

    /// 明日のお昼過ぎには電話します。 (お昼+過ぎ form a compound)
    fn sentence_past_noon() -> Sentence {
        Sentence::new(
            "rule1",
            vec![
                tok(1, "明日", Pos::Other, 3),
                grouped(2, "お昼", Pos::N, 3, "C1"),
                grouped(3, "過ぎ", Pos::N, 4, "C1"),
                tok(4, "する", Pos::Aux, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rule1_from_compound_member() {
        let s = sentence_past_noon();
        assert_eq!(pairs(&extract_by_rules(&s, 2)), [("過ぎ", RuleTag::R1, 1)]);
    }

    /// 一部の生物は体内時計という手段で夜と昼に適応する。
    fn sentence_adapt() -> Sentence {
        Sentence::new(
            "2.5",
            vec![
                tok(1, "一部", Pos::N, 2),
                tok(2, "生物", Pos::N, 8),
                grouped(3, "体内", Pos::N, 4, "C1"),
                grouped(4, "時計", Pos::N, 5, "C1"),
                tok(5, "手段", Pos::N, 8),
                tok(6, "夜", Pos::N, 8),
                tok(7, "昼", Pos::N, 8),
                tok(8, "適応する", Pos::V, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn key_set_of_adapt_sentence() {
        let s = sentence_adapt();
        assert_eq!(
            pairs(&extract_keys(&s, 7)),
            [
                ("適応する", RuleTag::R2, 2),
                ("生物", RuleTag::R3, 1),
                ("手段", RuleTag::R3, 1),
                ("夜", RuleTag::R3, 1),
            ]
        );
    }

    #[test]
    fn root_pivot_without_dependents_yields_nothing() {
        let s = Sentence::new("s", vec![tok(1, "昼", Pos::N, 0)]).unwrap();
        assert!(extract_keys(&s, 1).is_empty());
        for level in LEVELS {
            assert!(extract_at_level(&s, 1, level).is_empty());
        }
    }

    #[test]
    fn non_content_compound_member_excluded() {
        let s = Sentence::new(
            "s",
            vec![
                grouped(1, "ほど", Pos::P, 2, "C1"),
                grouped(2, "昼", Pos::N, 3, "C1"),
                tok(3, "見る", Pos::V, 0),
            ],
        )
        .unwrap();
        let words = extract_by_rules(&s, 2);
        assert!(words.iter().all(|w| w.lemma != "ほど"));
        assert_eq!(pairs(&words), [("見る", RuleTag::R2, 2)]);
    }

    #[test]
    fn pivot_lemma_never_extracted() {
        let s = Sentence::new(
            "s",
            vec![
                tok(1, "昼", Pos::N, 3),
                tok(2, "昼", Pos::N, 3),
                tok(3, "過ごす", Pos::V, 0),
            ],
        )
        .unwrap();
        let words = extract_by_rules(&s, 1);
        assert!(words.iter().all(|w| w.lemma != "昼"));
        for w in &words {
            assert_ne!(w.token, 1);
        }
    }

    /// 草木はかなり酸性度の高い雨を吸っている。
    fn sentence_rain() -> Sentence {
        Sentence::new(
            "3.4",
            vec![
                tok(1, "草木", Pos::N, 6),
                tok(2, "かなり", Pos::Adv, 4),
                tok(3, "酸性度", Pos::N, 4),
                tok(4, "高い", Pos::Adj, 5),
                tok(5, "雨", Pos::N, 6),
                tok(6, "吸う", Pos::V, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rain_sentence_levels_and_rules() {
        let s = sentence_rain();
        assert_eq!(pairs(&extract_at_level(&s, 5, 1)), [("吸う", RuleTag::R2, 2)]);
        assert_eq!(pairs(&extract_at_level(&s, 5, 4)), [("高い", RuleTag::R4, 2)]);
        assert_eq!(pairs(&extract_at_level(&s, 5, 5)), [("草木", RuleTag::P5, 1)]);
        // the base rules pull the same neighborhood at once
        assert_eq!(
            pairs(&extract_by_rules(&s, 5)),
            [
                ("吸う", RuleTag::R2, 2),
                ("草木", RuleTag::R3, 1),
                ("高い", RuleTag::R4, 2),
            ]
        );
    }

    /// 本田さんは老人福祉の世界に大きな足跡を残した。
    fn sentence_footprint() -> Sentence {
        Sentence::new(
            "3.2",
            vec![
                tok(1, "本田さん", Pos::N, 7),
                grouped(2, "老人", Pos::N, 3, "C1"),
                grouped(3, "福祉", Pos::N, 4, "C1"),
                tok(4, "世界", Pos::N, 7),
                tok(5, "大きい", Pos::Adj, 6),
                tok(6, "足跡", Pos::N, 7),
                tok(7, "残す", Pos::V, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn footprint_sentence_level_schedule() {
        let s = sentence_footprint();
        assert_eq!(pairs(&extract_at_level(&s, 6, 1)), [("残す", RuleTag::R2, 2)]);
        assert!(extract_at_level(&s, 6, 2).is_empty());
        assert!(extract_at_level(&s, 6, 3).is_empty());
        assert_eq!(pairs(&extract_at_level(&s, 6, 4)), [("大きい", RuleTag::R4, 2)]);
        assert_eq!(
            pairs(&extract_at_level(&s, 6, 5)),
            [("本田さん", RuleTag::P5, 1), ("世界", RuleTag::P5, 1)]
        );
        assert_eq!(
            pairs(&extract_at_level(&s, 6, 6)),
            [("老人", RuleTag::P6, 1), ("福祉", RuleTag::P6, 1)]
        );
        assert!(extract_at_level(&s, 6, 7).is_empty());
    }

    /// 昼は施設で体を動かし、夜は自宅でぐっすり眠るようになった。
    fn sentence_day_night() -> Sentence {
        Sentence::new(
            "3.1",
            vec![
                coord(1, "昼", Pos::N, 5),
                tok(2, "施設", Pos::N, 4),
                tok(3, "体", Pos::N, 4),
                tok(4, "動かす", Pos::V, 8),
                tok(5, "夜", Pos::N, 7),
                tok(6, "自宅", Pos::N, 7),
                tok(7, "眠る", Pos::V, 8),
                tok(8, "なる", Pos::V, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coordination_partner_extracted_at_level_seven() {
        let s = sentence_day_night();
        assert_eq!(pairs(&extract_at_level(&s, 1, 7)), [("夜", RuleTag::P7, 1)]);
        // and symmetrically from the other conjunct
        assert_eq!(pairs(&extract_at_level(&s, 5, 7)), [("昼", RuleTag::P7, 1)]);
        // the coord link is not a dependency: no governor for 昼
        assert!(extract_at_level(&s, 1, 1).is_empty());
        assert!(extract_by_rules(&s, 1).is_empty());
    }

    #[test]
    fn weight_is_a_function_of_the_rule_tag() {
        for s in [
            sentence_eat_at_cafeteria(),
            sentence_adapt(),
            sentence_footprint(),
            sentence_rain(),
            sentence_day_night(),
        ] {
            for pivot in 1..=s.len() {
                for w in extract_by_rules(&s, pivot) {
                    assert_eq!(w.weight, w.rule.weight());
                }
                for level in LEVELS {
                    for w in extract_at_level(&s, pivot, level) {
                        assert_eq!(w.weight, w.rule.weight());
                        assert_ne!(w.token, pivot);
                    }
                }
            }
        }
    }

    #[test]
    fn base_rules_cover_levels_one_to_five() {
        // lemma sets: rules R2/R3/R4 == levels {1,2} / {5} / {3,4};
        // R1 has no level and is only in the base extraction.
        for s in [
            sentence_eat_at_cafeteria(),
            sentence_adapt(),
            sentence_footprint(),
            sentence_rain(),
        ] {
            for pivot in 1..=s.len() {
                let by_rules: Vec<(usize, PositionClass)> = extract_by_rules(&s, pivot)
                    .into_iter()
                    .filter(|w| w.rule != RuleTag::R1)
                    .map(|w| (w.token, w.rule.position()))
                    .collect();
                let mut by_levels: Vec<(usize, PositionClass)> = (1..=5)
                    .flat_map(|l| extract_at_level(&s, pivot, l))
                    .map(|w| (w.token, w.rule.position()))
                    .collect();
                by_levels.sort_by_key(|&(t, _)| t);
                let mut sorted_rules = by_rules.clone();
                sorted_rules.sort_by_key(|&(t, _)| t);
                assert_eq!(sorted_rules, by_levels, "pivot {pivot} in {}", s.id);
            }
        }
    }
}
