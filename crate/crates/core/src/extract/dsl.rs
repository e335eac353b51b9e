//! Pattern rule DSL.
//!
//! One rule per line: `rule <id> : <atom> <atom> ...`. Blank lines and `#`
//! comments are skipped. Atoms:
//!
//! * `word` — literal lemma (matching is case-insensitive on lemmas; a bare
//!   `,` is a literal comma token)
//! * `(a | b | c)` — any of the listed lemmas
//! * `!(a | b | c)` — exactly one token whose lemma is NOT listed
//! * `JJS`, `NN*` — uppercase atoms match Penn Treebank POS tags, `*` for a
//!   prefix wildcard
//! * `X`, `Y` — noun-phrase slots; `X+` — a comma/and/or separated list of
//!   noun phrases
//! * a trailing `?` makes the preceding non-slot atom optional
//!
//! Every rule must bind exactly one `Y` (the hypernym) and at least one `X`
//! (a hyponym). Slots may not be adjacent: the matcher is greedy and two
//! back-to-back noun-phrase slots would have no anchor between them.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("pattern DSL error at line {line}, column {col}: {kind}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub kind: DslErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum DslErrorKind {
    #[error("expected `rule <id> : <template>`")]
    ExpectedRule,
    #[error("missing `:` after the rule id")]
    MissingColon,
    #[error("duplicate rule id {0:?}")]
    DuplicateRuleId(String),
    #[error("unclosed `(` group")]
    UnclosedGroup,
    #[error("empty `()` group")]
    EmptyGroup,
    #[error("`!` must be followed by `(`")]
    BareNegation,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("`?` must follow a literal, alternation, negation, or POS atom")]
    DanglingOptional,
    #[error("noun-phrase slots cannot be optional")]
    OptionalSlot,
    #[error("rule has no template atoms")]
    EmptyTemplate,
    #[error("rule must contain exactly one Y slot")]
    YSlotCount,
    #[error("rule must contain at least one X slot")]
    NoXSlot,
    #[error("adjacent noun-phrase slots are ambiguous")]
    AdjacentSlots,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomKind {
    /// A single lemma.
    Literal(String),
    /// One token whose lemma is in the set.
    Alternation(Vec<String>),
    /// One token whose lemma is NOT in the set.
    Negated(Vec<String>),
    /// One token whose POS tag matches (exact, or prefix when ending in `*`).
    PosClass(String),
    /// Hyponym noun phrase.
    SlotX,
    /// Hypernym noun phrase.
    SlotY,
    /// List of hyponym noun phrases separated by commas and/or `and`/`or`.
    SlotXList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub kind: AtomKind,
    pub optional: bool,
}

/// A compiled template. `X`/`X+` slots always bind the hyponym and the `Y`
/// slot the hypernym of every emitted pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternRule {
    pub id: String,
    pub atoms: Vec<Atom>,
}

impl PatternRule {
    pub fn is_slot(atom: &Atom) -> bool {
        matches!(
            atom.kind,
            AtomKind::SlotX | AtomKind::SlotY | AtomKind::SlotXList
        )
    }
}

/// The rule set shipped with the crate; see `default.pat`.
pub const DEFAULT_PATTERNS: &str = include_str!("default.pat");

/// Compiles the built-in rules. Their validity is enforced by tests.
pub fn default_patterns() -> Vec<PatternRule> {
    compile_patterns(DEFAULT_PATTERNS).expect("built-in pattern file compiles")
}

/// Parses a pattern DSL file into rules, in file order.
pub fn compile_patterns(text: &str) -> Result<Vec<PatternRule>, DslError> {
    let mut rules = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rule = parse_rule_line(line, lineno)?;
        if !seen_ids.insert(rule.id.clone()) {
            return Err(DslError {
                line: lineno,
                col: 1,
                kind: DslErrorKind::DuplicateRuleId(rule.id),
            });
        }
        rules.push(rule);
    }
    Ok(rules)
}

#[derive(Debug, PartialEq)]
enum Tok {
    Word(String),
    Open,
    Close,
    Pipe,
    Bang,
    Question,
    Colon,
}

fn tokenize_line(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, DslError> {
    let mut toks = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(byte, c)) = chars.peek() {
        let col = line[..byte].chars().count() + 1;
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push((Tok::Open, col));
            }
            ')' => {
                chars.next();
                toks.push((Tok::Close, col));
            }
            '|' => {
                chars.next();
                toks.push((Tok::Pipe, col));
            }
            '!' => {
                chars.next();
                toks.push((Tok::Bang, col));
            }
            '?' => {
                chars.next();
                toks.push((Tok::Question, col));
            }
            ':' => {
                chars.next();
                toks.push((Tok::Colon, col));
            }
            _ => {
                let start = byte;
                let mut end = byte + c.len_utf8();
                chars.next();
                while let Some(&(b, c2)) = chars.peek() {
                    if c2.is_whitespace() || "()|!?:".contains(c2) {
                        break;
                    }
                    end = b + c2.len_utf8();
                    chars.next();
                }
                toks.push((Tok::Word(line[start..end].to_string()), col));
            }
        }
    }
    if toks.is_empty() {
        return Err(DslError {
            line: lineno,
            col: 1,
            kind: DslErrorKind::ExpectedRule,
        });
    }
    Ok(toks)
}

fn parse_rule_line(line: &str, lineno: usize) -> Result<PatternRule, DslError> {
    let err = |col: usize, kind: DslErrorKind| DslError {
        line: lineno,
        col,
        kind,
    };
    let toks = tokenize_line(line, lineno)?;
    let mut it = toks.into_iter().peekable();

    match it.next() {
        Some((Tok::Word(w), _)) if w == "rule" => {}
        Some((_, col)) => return Err(err(col, DslErrorKind::ExpectedRule)),
        None => return Err(err(1, DslErrorKind::ExpectedRule)),
    }
    let id = match it.next() {
        Some((Tok::Word(w), _)) => w,
        Some((_, col)) => return Err(err(col, DslErrorKind::ExpectedRule)),
        None => return Err(err(1, DslErrorKind::ExpectedRule)),
    };
    match it.next() {
        Some((Tok::Colon, _)) => {}
        Some((_, col)) => return Err(err(col, DslErrorKind::MissingColon)),
        None => return Err(err(line.chars().count(), DslErrorKind::MissingColon)),
    }

    let mut atoms: Vec<Atom> = Vec::new();
    while let Some((tok, col)) = it.next() {
        let kind = match tok {
            Tok::Word(w) => match w.as_str() {
                "X" => AtomKind::SlotX,
                "Y" => AtomKind::SlotY,
                "X+" => AtomKind::SlotXList,
                _ if is_pos_class(&w) => AtomKind::PosClass(w),
                _ => AtomKind::Literal(w.to_lowercase()),
            },
            Tok::Bang => {
                match it.next() {
                    Some((Tok::Open, open_col)) => {
                        AtomKind::Negated(parse_group_words(&mut it, lineno, open_col)?)
                    }
                    Some((_, c)) => return Err(err(c, DslErrorKind::BareNegation)),
                    None => return Err(err(col, DslErrorKind::BareNegation)),
                }
            }
            Tok::Open => AtomKind::Alternation(parse_group_words(&mut it, lineno, col)?),
            Tok::Question => {
                let Some(last) = atoms.last_mut() else {
                    return Err(err(col, DslErrorKind::DanglingOptional));
                };
                if PatternRule::is_slot(last) {
                    return Err(err(col, DslErrorKind::OptionalSlot));
                }
                if last.optional {
                    return Err(err(col, DslErrorKind::DanglingOptional));
                }
                last.optional = true;
                continue;
            }
            Tok::Close => return Err(err(col, DslErrorKind::UnexpectedChar(')'))),
            Tok::Pipe => return Err(err(col, DslErrorKind::UnexpectedChar('|'))),
            Tok::Colon => return Err(err(col, DslErrorKind::UnexpectedChar(':'))),
        };
        atoms.push(Atom {
            kind,
            optional: false,
        });
    }

    if atoms.is_empty() {
        return Err(err(line.chars().count(), DslErrorKind::EmptyTemplate));
    }
    let y_slots = atoms
        .iter()
        .filter(|a| a.kind == AtomKind::SlotY)
        .count();
    if y_slots != 1 {
        return Err(err(1, DslErrorKind::YSlotCount));
    }
    if !atoms
        .iter()
        .any(|a| matches!(a.kind, AtomKind::SlotX | AtomKind::SlotXList))
    {
        return Err(err(1, DslErrorKind::NoXSlot));
    }
    for pair in atoms.windows(2) {
        if PatternRule::is_slot(&pair[0]) && PatternRule::is_slot(&pair[1]) {
            return Err(err(1, DslErrorKind::AdjacentSlots));
        }
    }
    Ok(PatternRule { id, atoms })
}

fn parse_group_words(
    it: &mut std::iter::Peekable<std::vec::IntoIter<(Tok, usize)>>,
    lineno: usize,
    open_col: usize,
) -> Result<Vec<String>, DslError> {
    let mut words = Vec::new();
    let mut expect_word = true;
    loop {
        match it.next() {
            Some((Tok::Word(w), col)) => {
                if !expect_word {
                    // Two adjacent words inside a group: a `)` went missing.
                    return Err(DslError {
                        line: lineno,
                        col,
                        kind: DslErrorKind::UnclosedGroup,
                    });
                }
                words.push(w.to_lowercase());
                expect_word = false;
            }
            Some((Tok::Pipe, _)) => expect_word = true,
            Some((Tok::Close, col)) => {
                if words.is_empty() {
                    return Err(DslError {
                        line: lineno,
                        col,
                        kind: DslErrorKind::EmptyGroup,
                    });
                }
                return Ok(words);
            }
            Some((_, col)) => {
                return Err(DslError {
                    line: lineno,
                    col,
                    kind: DslErrorKind::UnclosedGroup,
                })
            }
            None => {
                return Err(DslError {
                    line: lineno,
                    col: open_col,
                    kind: DslErrorKind::UnclosedGroup,
                })
            }
        }
    }
}

/// Uppercase A-Z words (with optional trailing `*`) are POS-class atoms.
fn is_pos_class(w: &str) -> bool {
    let body = w.strip_suffix('*').unwrap_or(w);
    !body.is_empty() && body.chars().all(|c| c.is_ascii_uppercase() || c == '$')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_file_compiles_to_ten_rules() {
        let rules = default_patterns();
        assert_eq!(rules.len(), 10);
        assert_eq!(rules[0].id, "which-is-a-of");
        assert_eq!(rules[9].id, "including");
    }

    #[test]
    fn empty_file_gives_empty_rule_list() {
        assert_eq!(compile_patterns("").unwrap(), vec![]);
        assert_eq!(compile_patterns("# only comments\n\n").unwrap(), vec![]);
    }

    #[test]
    fn parses_atom_shapes() {
        let rules =
            compile_patterns("rule demo : X ,? be JJS (most)? !(member | part) of NN* Y\n")
                .unwrap();
        let atoms = &rules[0].atoms;
        assert_eq!(atoms[0].kind, AtomKind::SlotX);
        assert_eq!(atoms[1].kind, AtomKind::Literal(",".into()));
        assert!(atoms[1].optional);
        assert_eq!(atoms[3].kind, AtomKind::PosClass("JJS".into()));
        assert_eq!(atoms[4].kind, AtomKind::Alternation(vec!["most".into()]));
        assert!(atoms[4].optional);
        assert_eq!(
            atoms[5].kind,
            AtomKind::Negated(vec!["member".into(), "part".into()])
        );
        assert_eq!(atoms[7].kind, AtomKind::PosClass("NN*".into()));
        assert_eq!(atoms[8].kind, AtomKind::SlotY);
    }

    #[test]
    fn two_y_slots_rejected() {
        let err = compile_patterns("rule bad : X such as Y Y\n").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::YSlotCount);
        assert_eq!(err.line, 1);
    }

    #[test]
    fn missing_slots_rejected() {
        assert_eq!(
            compile_patterns("rule bad : X such as\n").unwrap_err().kind,
            DslErrorKind::YSlotCount
        );
        assert_eq!(
            compile_patterns("rule bad : Y such as\n").unwrap_err().kind,
            DslErrorKind::NoXSlot
        );
    }

    #[test]
    fn adjacent_slots_rejected() {
        let err = compile_patterns("rule bad : Y X\n").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::AdjacentSlots);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = compile_patterns("rule a : Y of X\nrule a : X of Y\n").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::DuplicateRuleId("a".into()));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = compile_patterns("rule a : Y of X\nrule b : X (a | b of Y\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, DslErrorKind::UnclosedGroup);

        let err = compile_patterns("rule c : X? of Y\n").unwrap_err();
        assert_eq!((err.line, err.col), (1, 11));
        assert_eq!(err.kind, DslErrorKind::OptionalSlot);

        let err = compile_patterns("nonsense here\n").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::ExpectedRule);

        let err = compile_patterns("rule d missing-template\n").unwrap_err();
        assert_eq!(err.kind, DslErrorKind::MissingColon);
    }

    #[test]
    fn rule_order_follows_file_order() {
        let rules = compile_patterns("rule z : Y of X\nrule a : X of Y\n").unwrap();
        assert_eq!(rules[0].id, "z");
        assert_eq!(rules[1].id, "a");
    }
}
