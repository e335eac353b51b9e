//! Template matching over tagged sentences.
//!
//! Matching is deterministic and greedy: each (rule, start offset) pair is
//! attempted exactly once with no backtracking, and every successful attempt
//! emits records — a sentence matching two rules (or one rule at two offsets)
//! for the same pair counts once per match.
//!
//! Noun-phrase slots accept an optional leading determiner (absorbed, never
//! emitted), then the longest run of `JJ*`/`NN*` tokens, shrunk from the
//! right until it ends in a noun. The emitted phrase is the head noun plus at
//! most `max_modifiers` immediately preceding run tokens; punctuation never
//! enters a span because it is neither `JJ*` nor `NN*`. A slot that opens a
//! template must be left-maximal — matching is skipped when the previous
//! token could have extended the span — so one underlying phrase cannot
//! produce a second, truncated alignment of the same rule.

use super::dsl::{Atom, AtomKind, PatternRule};
use super::{ExtractionRecord, TaggedSentence, TaggedToken};

/// Knobs for noun-phrase matching.
#[derive(Debug, Clone, Copy)]
pub struct MatchOptions {
    /// Modifiers kept to the left of the head noun (default 2).
    pub max_modifiers: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { max_modifiers: 2 }
    }
}

/// `X+` lists stop extending after this many items.
pub const MAX_LIST_ITEMS: usize = 8;

fn is_np_token(tok: &TaggedToken) -> bool {
    tok.pos.starts_with("JJ") || tok.pos.starts_with("NN")
}

fn is_noun(tok: &TaggedToken) -> bool {
    tok.pos.starts_with("NN")
}

fn is_determiner(tok: &TaggedToken) -> bool {
    tok.pos == "DT"
}

fn pos_matches(class: &str, tok: &TaggedToken) -> bool {
    match class.strip_suffix('*') {
        Some(prefix) => tok.pos.starts_with(prefix),
        None => tok.pos == class,
    }
}

#[derive(Debug, Clone)]
struct NpMatch {
    phrase: String,
    head: String,
    end: usize,
}

/// Matches a noun phrase starting at `start`; returns the filler and the
/// first unconsumed position.
fn match_np(tokens: &[TaggedToken], start: usize, opts: &MatchOptions) -> Option<NpMatch> {
    let mut i = start;
    if i < tokens.len() && is_determiner(&tokens[i]) {
        i += 1;
    }
    let run_start = i;
    while i < tokens.len() && is_np_token(&tokens[i]) {
        i += 1;
    }
    let mut end = i;
    while end > run_start && !is_noun(&tokens[end - 1]) {
        end -= 1;
    }
    if end == run_start {
        return None;
    }
    let head_idx = end - 1;
    let first = head_idx
        .saturating_sub(opts.max_modifiers)
        .max(run_start);
    let phrase = tokens[first..=head_idx]
        .iter()
        .map(|t| t.lemma.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Some(NpMatch {
        phrase,
        head: tokens[head_idx].lemma.clone(),
        end,
    })
}

fn is_list_conjunction(tok: &TaggedToken) -> bool {
    tok.lemma == "and" || tok.lemma == "or"
}

/// Consumes a list separator (`,`, `and`, `or`, or `, and`/`, or`) followed
/// by another noun phrase.
fn match_list_continuation(
    tokens: &[TaggedToken],
    pos: usize,
    opts: &MatchOptions,
) -> Option<(NpMatch, usize)> {
    let mut p = pos;
    if p < tokens.len() && tokens[p].lemma == "," {
        p += 1;
        if p < tokens.len() && is_list_conjunction(&tokens[p]) {
            p += 1;
        }
    } else if p < tokens.len() && is_list_conjunction(&tokens[p]) {
        p += 1;
    } else {
        return None;
    }
    let np = match_np(tokens, p, opts)?;
    let end = np.end;
    Some((np, end))
}

#[derive(Debug)]
struct Fillers {
    y: NpMatch,
    xs: Vec<NpMatch>,
}

fn match_rule_at(
    tokens: &[TaggedToken],
    rule: &PatternRule,
    start: usize,
    opts: &MatchOptions,
) -> Option<Fillers> {
    let mut pos = start;
    let mut y: Option<NpMatch> = None;
    let mut xs: Vec<NpMatch> = Vec::new();

    for (idx, atom) in rule.atoms.iter().enumerate() {
        match &atom.kind {
            AtomKind::SlotX | AtomKind::SlotY | AtomKind::SlotXList => {
                // A template-initial slot must be left-maximal; interior
                // slots are anchored by the atom that precedes them.
                if idx == 0 && start > 0 {
                    let prev = &tokens[start - 1];
                    if is_np_token(prev) || is_determiner(prev) {
                        return None;
                    }
                }
                let np = match_np(tokens, pos, opts)?;
                pos = np.end;
                match atom.kind {
                    AtomKind::SlotY => y = Some(np),
                    AtomKind::SlotX => xs.push(np),
                    AtomKind::SlotXList => {
                        xs.push(np);
                        while xs.len() < MAX_LIST_ITEMS {
                            match match_list_continuation(tokens, pos, opts) {
                                Some((np, end)) => {
                                    xs.push(np);
                                    pos = end;
                                }
                                None => break,
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
            kind => {
                let hit = pos < tokens.len() && single_token_matches(kind, &tokens[pos]);
                if hit {
                    pos += 1;
                } else if !atom.optional {
                    return None;
                }
            }
        }
    }
    y.map(|y| Fillers { y, xs })
}

fn single_token_matches(kind: &AtomKind, tok: &TaggedToken) -> bool {
    match kind {
        AtomKind::Literal(w) => tok.lemma == *w,
        AtomKind::Alternation(set) => set.iter().any(|w| tok.lemma == *w),
        AtomKind::Negated(set) => !set.iter().any(|w| tok.lemma == *w),
        AtomKind::PosClass(class) => pos_matches(class, tok),
        _ => unreachable!("slots are handled by the caller"),
    }
}

/// Runs every rule at every start offset and emits one record per
/// (rule, X filler) match, plus the bare-head pair whenever a filler or the
/// hypernym is a multi-word phrase.
pub fn match_sentence(
    sentence: &TaggedSentence,
    rules: &[PatternRule],
    opts: &MatchOptions,
) -> Vec<ExtractionRecord> {
    let tokens = sentence.tokens();
    let mut records = Vec::new();
    for rule in rules {
        for start in 0..tokens.len() {
            let Some(fillers) = match_rule_at(tokens, rule, start, opts) else {
                continue;
            };
            for x in &fillers.xs {
                if x.phrase != fillers.y.phrase {
                    records.push(ExtractionRecord {
                        hypo: x.phrase.clone(),
                        hyper: fillers.y.phrase.clone(),
                        pattern_id: rule.id.clone(),
                        count: 1,
                    });
                }
                let multiword = x.head != x.phrase || fillers.y.head != fillers.y.phrase;
                if multiword && x.head != fillers.y.head {
                    records.push(ExtractionRecord {
                        hypo: x.head.clone(),
                        hyper: fillers.y.head.clone(),
                        pattern_id: rule.id.clone(),
                        count: 1,
                    });
                }
            }
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::dsl::compile_patterns;
    use crate::extract::TaggedSentence;

    fn sentence(spec: &[(&str, &str)]) -> TaggedSentence {
        let tokens = spec
            .iter()
            .map(|(lemma, pos)| TaggedToken::new(lemma, lemma, pos).unwrap())
            .collect();
        TaggedSentence::new(tokens).unwrap()
    }

    fn pairs(records: &[ExtractionRecord]) -> Vec<(String, String)> {
        records
            .iter()
            .map(|r| (r.hypo.clone(), r.hyper.clone()))
            .collect()
    }

    #[test]
    fn bare_such_as_rule_matches() {
        let rules = compile_patterns("rule y-such-as-x : Y such as X\n").unwrap();
        let s = sentence(&[("animal", "NN"), ("such", "JJ"), ("as", "IN"), ("cat", "NN")]);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        assert_eq!(pairs(&records), vec![("cat".into(), "animal".into())]);
        assert_eq!(records[0].pattern_id, "y-such-as-x");
    }

    #[test]
    fn and_any_other_matches() {
        let rules = compile_patterns("rule other : X (and | or) (any | some) other Y\n").unwrap();
        let s = sentence(&[
            ("cat", "NN"),
            ("and", "CC"),
            ("any", "DT"),
            ("other", "JJ"),
            ("animal", "NN"),
        ]);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        assert_eq!(pairs(&records), vec![("cat".into(), "animal".into())]);
    }

    #[test]
    fn no_trigger_means_no_records() {
        let rules = crate::extract::default_patterns();
        let s = sentence(&[("the", "DT"), ("weather", "NN"), ("improve", "VBD")]);
        assert!(match_sentence(&s, &rules, &MatchOptions::default()).is_empty());
    }

    #[test]
    fn optional_atom_consumed_when_present() {
        let rules = compile_patterns("rule sup : X be JJS most? Y\n").unwrap();
        let with = sentence(&[
            ("gold", "NN"),
            ("be", "VBZ"),
            ("fine", "JJS"),
            ("most", "RBS"),
            ("metal", "NN"),
        ]);
        let without = sentence(&[
            ("gold", "NN"),
            ("be", "VBZ"),
            ("fine", "JJS"),
            ("metal", "NN"),
        ]);
        for s in [with, without] {
            let records = match_sentence(&s, &rules, &MatchOptions::default());
            assert_eq!(pairs(&records), vec![("gold".into(), "metal".into())]);
        }
    }

    #[test]
    fn negated_atom_blocks_listed_lemmas() {
        let rules = crate::extract::default_patterns();
        let blocked = sentence(&[
            ("wheel", "NN"),
            ("be", "VBZ"),
            ("a", "DT"),
            ("part", "NN"),
            ("of", "IN"),
            ("machine", "NN"),
        ]);
        assert!(match_sentence(&blocked, &rules, &MatchOptions::default()).is_empty());

        let allowed = sentence(&[
            ("dolphin", "NN"),
            ("be", "VBZ"),
            ("a", "DT"),
            ("smart", "JJ"),
            ("animal", "NN"),
        ]);
        let records = match_sentence(&allowed, &rules, &MatchOptions::default());
        assert_eq!(pairs(&records), vec![("dolphin".into(), "animal".into())]);
    }

    #[test]
    fn multiword_filler_co_emits_head_pair() {
        let rules = compile_patterns("rule inc : Y include X+\n").unwrap();
        let s = sentence(&[
            ("large", "JJ"),
            ("mammal", "NNS"),
            ("include", "VBG"),
            ("black", "JJ"),
            ("bear", "NNS"),
        ]);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        assert_eq!(
            pairs(&records),
            vec![
                ("black bear".into(), "large mammal".into()),
                ("bear".into(), "mammal".into()),
            ]
        );
    }

    #[test]
    fn modifier_cap_trims_the_phrase() {
        let rules = compile_patterns("rule inc : Y include X\n").unwrap();
        let s = sentence(&[
            ("mammal", "NNS"),
            ("include", "VBG"),
            ("big", "JJ"),
            ("old", "JJ"),
            ("gray", "JJ"),
            ("cat", "NNS"),
        ]);
        let records = match_sentence(&s, &rules, &MatchOptions { max_modifiers: 2 });
        assert_eq!(
            pairs(&records),
            vec![
                ("old gray cat".into(), "mammal".into()),
                ("cat".into(), "mammal".into()),
            ]
        );
        let records = match_sentence(&s, &rules, &MatchOptions { max_modifiers: 0 });
        assert_eq!(pairs(&records), vec![("cat".into(), "mammal".into())]);
    }

    #[test]
    fn list_slot_walks_separators_and_caps_at_eight() {
        let rules = compile_patterns("rule inc : Y include X+\n").unwrap();
        let mut toks: Vec<(String, String)> = vec![
            ("thing".into(), "NNS".into()),
            ("include".into(), "VBG".into()),
        ];
        for i in 0..10 {
            if i > 0 {
                toks.push((",".into(), ",".into()));
                if i == 9 {
                    toks.push(("and".into(), "CC".into()));
                }
            }
            toks.push((format!("item{i}"), "NN".into()));
        }
        let spec: Vec<(&str, &str)> = toks.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let s = sentence(&spec);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        assert_eq!(records.len(), MAX_LIST_ITEMS);
        assert_eq!(records[0].hypo, "item0");
        assert_eq!(records[7].hypo, "item7");
    }

    #[test]
    fn initial_slot_must_be_left_maximal() {
        let rules = compile_patterns("rule inc : Y include X\n").unwrap();
        let s = sentence(&[
            ("big", "JJ"),
            ("cat", "NNS"),
            ("include", "VBG"),
            ("lion", "NNS"),
        ]);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        // One alignment only: "big cat" plus its head pair, not a second
        // truncated match starting at "cat".
        assert_eq!(
            pairs(&records),
            vec![
                ("lion".into(), "big cat".into()),
                ("lion".into(), "cat".into()),
            ]
        );
    }

    #[test]
    fn determiner_prefix_is_absorbed_not_emitted() {
        let rules = compile_patterns("rule inc : Y include X\n").unwrap();
        let s = sentence(&[
            ("the", "DT"),
            ("family", "NN"),
            ("include", "VBZ"),
            ("a", "DT"),
            ("dog", "NN"),
        ]);
        let records = match_sentence(&s, &rules, &MatchOptions::default());
        assert_eq!(pairs(&records), vec![("dog".into(), "family".into())]);
    }

    #[test]
    fn hypernym_always_comes_from_the_y_slot() {
        let rules = crate::extract::default_patterns();
        let s = sentence(&[
            ("predator", "NNS"),
            ("such", "JJ"),
            ("as", "IN"),
            ("lion", "NNS"),
        ]);
        // such-as needs a token before Y, so prepend one.
        let s2 = sentence(&[
            ("many", "JJ"),
            ("predator", "NNS"),
            ("such", "JJ"),
            ("as", "IN"),
            ("lion", "NNS"),
        ]);
        assert!(match_sentence(&s, &rules, &MatchOptions::default()).is_empty());
        let records = match_sentence(&s2, &rules, &MatchOptions::default());
        assert_eq!(pairs(&records), vec![("lion".into(), "predator".into())]);
    }

    #[test]
    fn self_pairs_are_not_emitted() {
        let rules = compile_patterns("rule inc : Y include X\n").unwrap();
        let s = sentence(&[("cat", "NNS"), ("include", "VBG"), ("cat", "NNS")]);
        assert!(match_sentence(&s, &rules, &MatchOptions::default()).is_empty());
    }
}
