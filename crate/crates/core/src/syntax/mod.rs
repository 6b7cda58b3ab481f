//! The concept language: abstract syntax, parsing, and rendering.
//!
//! Concepts are built from atomic names, `Top`, `Bot`, boolean connectives,
//! role quantifiers, and a typicality operator `T(·)` that selects the most
//! typical members of a concept. Axioms relate concepts by strict inclusion
//! (`C <= D`), defeasible inclusion with an optional weight
//! (`T(C) <= D @ w`), graded inclusion (`C <= D >= a`), or assert membership
//! of a named individual (`C(a)`).
//!
//! Knowledge-base documents group axioms into three sections: `strict:` for
//! unweighted axioms, one `block <Name>:` per distinguished concept holding
//! that concept's weighted defeasible inclusions, and `assertions:`.
//!
//! The renderer and the parser are mutually inverse: rendering any value
//! produced by the parser and parsing it back yields a structurally equal
//! value, and the same holds for programmatically built values as long as
//! atomic names are valid identifiers and typicality is not nested.

mod lexer;
mod parser;
mod render;

use std::fmt;

use thiserror::Error;

/// A concept expression.
///
/// `Typ` must not be nested inside another `Typ`; the parser rejects such
/// input and the renderer-parser round trip is only guaranteed without
/// nesting.
#[derive(Debug, Clone, PartialEq)]
pub enum Concept {
    /// A named atomic concept.
    Atomic(String),
    /// The universal concept, containing every domain element.
    Top,
    /// The empty concept.
    Bottom,
    /// Complement.
    Not(Box<Concept>),
    /// Intersection.
    And(Box<Concept>, Box<Concept>),
    /// Union.
    Or(Box<Concept>, Box<Concept>),
    /// Existential role restriction `some r.C`.
    Exists(String, Box<Concept>),
    /// Universal role restriction `all r.C`.
    Forall(String, Box<Concept>),
    /// Typicality `T(C)`: the most preferred members of `C`.
    Typ(Box<Concept>),
}

impl Concept {
    /// An atomic concept with the given name.
    pub fn atomic(name: impl Into<String>) -> Self {
        Concept::Atomic(name.into())
    }

    /// The complement of this concept.
    pub fn not(self) -> Self {
        Concept::Not(Box::new(self))
    }

    /// The intersection of this concept with `other`.
    pub fn and(self, other: Concept) -> Self {
        Concept::And(Box::new(self), Box::new(other))
    }

    /// The union of this concept with `other`.
    pub fn or(self, other: Concept) -> Self {
        Concept::Or(Box::new(self), Box::new(other))
    }

    /// Existential restriction `some role.self`.
    pub fn exists(role: impl Into<String>, body: Concept) -> Self {
        Concept::Exists(role.into(), Box::new(body))
    }

    /// Universal restriction `all role.self`.
    pub fn forall(role: impl Into<String>, body: Concept) -> Self {
        Concept::Forall(role.into(), Box::new(body))
    }

    /// The typicality concept `T(self)`.
    pub fn typ(self) -> Self {
        Concept::Typ(Box::new(self))
    }

    /// Does any subexpression use the typicality operator?
    pub fn contains_typ(&self) -> bool {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => false,
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => c.contains_typ(),
            Concept::And(a, b) | Concept::Or(a, b) => a.contains_typ() || b.contains_typ(),
            Concept::Typ(_) => true,
        }
    }

    /// Does any typicality subexpression have a non-atomic argument?
    pub fn has_compound_typ(&self) -> bool {
        match self {
            Concept::Atomic(_) | Concept::Top | Concept::Bottom => false,
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => {
                c.has_compound_typ()
            }
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.has_compound_typ() || b.has_compound_typ()
            }
            Concept::Typ(c) => !matches!(**c, Concept::Atomic(_)) || c.has_compound_typ(),
        }
    }

    /// Does a `T(·)` occur inside the argument of another `T(·)`?
    pub fn has_nested_typ(&self) -> bool {
        fn walk(c: &Concept, inside_typ: bool) -> bool {
            match c {
                Concept::Atomic(_) | Concept::Top | Concept::Bottom => false,
                Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => {
                    walk(c, inside_typ)
                }
                Concept::And(a, b) | Concept::Or(a, b) => {
                    walk(a, inside_typ) || walk(b, inside_typ)
                }
                Concept::Typ(c) => inside_typ || walk(c, true),
            }
        }
        walk(self, false)
    }
}

/// An axiom of the concept language.
///
/// The parser classifies an inclusion whose left-hand side is a top-level
/// `T(·)` as [`Axiom::Typicality`]; build values the same way to keep the
/// render-parse round trip structural.
#[derive(Debug, Clone, PartialEq)]
pub enum Axiom {
    /// `lhs <= rhs`: every member of `lhs` is a member of `rhs`.
    Strict { lhs: Concept, rhs: Concept },
    /// `T(C) <= rhs`, optionally weighted (`@ w`). `lhs` carries the full
    /// typicality concept; when a weight is present `lhs` must be
    /// `T(AtomicName)`.
    Typicality {
        lhs: Concept,
        rhs: Concept,
        weight: Option<f64>,
    },
    /// `lhs <= rhs >= threshold`: graded inclusion with a threshold in
    /// `[0, 1]`.
    Fuzzy {
        lhs: Concept,
        rhs: Concept,
        threshold: f64,
    },
    /// `concept(individual)`: the named individual belongs to the concept.
    Assertion { concept: Concept, individual: String },
}

impl Axiom {
    /// A convenience constructor for `lhs <= rhs`.
    pub fn strict(lhs: Concept, rhs: Concept) -> Self {
        Axiom::Strict { lhs, rhs }
    }

    /// A convenience constructor for `T(name) <= rhs @ weight`.
    pub fn weighted(name: impl Into<String>, rhs: Concept, weight: f64) -> Self {
        Axiom::Typicality {
            lhs: Concept::atomic(name).typ(),
            rhs,
            weight: Some(weight),
        }
    }
}

/// One weighted defeasible inclusion inside a block: `T(C) <= rhs @ weight`
/// with the block's concept as `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInclusion {
    pub rhs: Concept,
    pub weight: f64,
}

/// The weighted defeasible inclusions of one distinguished concept, in
/// declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBlock {
    /// The distinguished concept's name; every inclusion of the block has
    /// `T(concept)` as its left-hand side.
    pub concept: String,
    pub inclusions: Vec<WeightedInclusion>,
}

impl WeightedBlock {
    /// A block with no inclusions yet.
    pub fn new(concept: impl Into<String>) -> Self {
        WeightedBlock {
            concept: concept.into(),
            inclusions: Vec::new(),
        }
    }

    /// The full axiom form of the `i`-th inclusion.
    pub fn axiom(&self, i: usize) -> Axiom {
        let inc = &self.inclusions[i];
        Axiom::weighted(self.concept.clone(), inc.rhs.clone(), inc.weight)
    }
}

/// A knowledge base: strict-section axioms, one weighted block per
/// distinguished concept, and assertions.
///
/// Blocks keep their declaration order, as do the inclusions within each
/// block; block names are unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    /// Axioms of the `strict:` section (strict, graded, and unweighted
    /// defeasible inclusions).
    pub strict: Vec<Axiom>,
    pub blocks: Vec<WeightedBlock>,
    pub assertions: Vec<Axiom>,
}

impl KnowledgeBase {
    /// An empty knowledge base.
    pub fn new() -> Self {
        KnowledgeBase::default()
    }

    /// Look up the block of a distinguished concept.
    pub fn block(&self, concept: &str) -> Option<&WeightedBlock> {
        self.blocks.iter().find(|b| b.concept == concept)
    }

    /// The names of the distinguished concepts, in declaration order.
    pub fn distinguished(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|b| b.concept.as_str())
    }
}

/// A parse failure, with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

/// Reserved words of the concept language.
const KEYWORDS: &[&str] = &["and", "or", "not", "some", "all", "Top", "Bot"];

/// Is `name` usable as an atomic concept, role, individual, or block name?
///
/// Identifiers match `[A-Za-z_][A-Za-z0-9_]*` and must not collide with a
/// reserved word.
pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false);
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Parse a single concept expression.
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    parser::parse_concept_str(text)
}

/// Parse a single axiom.
pub fn parse_axiom(text: &str) -> Result<Axiom, ParseError> {
    parser::parse_axiom_str(text, 1)
}

/// Parse a query file: one axiom per line, with blank lines and `#` comments
/// ignored. Errors report the file line.
pub fn parse_query(text: &str) -> Result<Vec<Axiom>, ParseError> {
    let mut axioms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        axioms.push(parser::parse_axiom_str(line, idx + 1)?);
    }
    Ok(axioms)
}

/// Parse a knowledge-base document in the sectioned file format.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    parser::parse_kb_str(text)
}

/// Render a knowledge base in the sectioned file format.
///
/// Empty sections are omitted; an empty knowledge base renders as the empty
/// string. The output parses back to a structurally equal knowledge base.
pub fn render_kb(kb: &KnowledgeBase) -> String {
    render::render_kb(kb)
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_kb(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(n: &str) -> Concept {
        Concept::atomic(n)
    }

    // ---- parsing ---------------------------------------------------------

    #[test]
    fn parses_connectives_with_expected_precedence() {
        let c = parse_concept("Bird and not Fly").unwrap();
        assert_eq!(c, atom("Bird").and(atom("Fly").not()));

        // `not` binds tighter than `and`, which binds tighter than `or`.
        let c = parse_concept("A or B and not C").unwrap();
        assert_eq!(c, atom("A").or(atom("B").and(atom("C").not())));

        // Parentheses override.
        let c = parse_concept("(A or B) and C").unwrap();
        assert_eq!(c, atom("A").or(atom("B")).and(atom("C")));
    }

    #[test]
    fn parses_quantifiers_binding_tighter_than_binary_operators() {
        let c = parse_concept("some has_wings.Top and Bird").unwrap();
        assert_eq!(
            c,
            Concept::exists("has_wings", Concept::Top).and(atom("Bird"))
        );

        let c = parse_concept("all r.not A").unwrap();
        assert_eq!(c, Concept::forall("r", atom("A").not()));

        let c = parse_concept("not some r.A").unwrap();
        assert_eq!(c, Concept::exists("r", atom("A")).not());
    }

    #[test]
    fn parses_typicality() {
        assert_eq!(parse_concept("T(Penguin)").unwrap(), atom("Penguin").typ());
        assert_eq!(
            parse_concept("T(Bird and Fly)").unwrap(),
            atom("Bird").and(atom("Fly")).typ()
        );
        // A lone `T` is an ordinary atomic name.
        assert_eq!(parse_concept("T").unwrap(), atom("T"));
    }

    #[test]
    fn rejects_nested_typicality() {
        let err = parse_concept("T(T(Bird))").unwrap_err();
        assert!(err.message.contains("typicality"), "got: {err}");
        let err = parse_concept("T(Bird and T(Fly))").unwrap_err();
        assert!(err.message.contains("typicality"), "got: {err}");
    }

    #[test]
    fn rejects_malformed_input_with_position() {
        let err = parse_concept("Bird and").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col > 0);

        assert!(parse_concept("and Bird").is_err());
        assert!(parse_concept("Bird Bird").is_err());
        assert!(parse_concept("(Bird").is_err());
        assert!(parse_concept("some .A").is_err());
        assert!(parse_concept("").is_err());
        assert!(parse_concept("3Bird").is_err());
        assert!(parse_concept("Bird & Fly").is_err());
    }

    #[test]
    fn parses_axiom_kinds() {
        assert_eq!(
            parse_axiom("Penguin <= Bird").unwrap(),
            Axiom::strict(atom("Penguin"), atom("Bird"))
        );
        assert_eq!(
            parse_axiom("T(Bird) <= Fly").unwrap(),
            Axiom::Typicality {
                lhs: atom("Bird").typ(),
                rhs: atom("Fly"),
                weight: None,
            }
        );
        assert_eq!(
            parse_axiom("T(Bird) <= Fly @ 20").unwrap(),
            Axiom::weighted("Bird", atom("Fly"), 20.0)
        );
        assert_eq!(
            parse_axiom("T(Penguin) <= Fly @ -70").unwrap(),
            Axiom::weighted("Penguin", atom("Fly"), -70.0)
        );
        assert_eq!(
            parse_axiom("Bird <= Fly >= 0.7").unwrap(),
            Axiom::Fuzzy {
                lhs: atom("Bird"),
                rhs: atom("Fly"),
                threshold: 0.7,
            }
        );
        assert_eq!(
            parse_axiom("Bird(tweety)").unwrap(),
            Axiom::Assertion {
                concept: atom("Bird"),
                individual: "tweety".into(),
            }
        );
        assert_eq!(
            parse_axiom("(Bird and Fly)(tweety)").unwrap(),
            Axiom::Assertion {
                concept: atom("Bird").and(atom("Fly")),
                individual: "tweety".into(),
            }
        );
    }

    #[test]
    fn rejects_bad_axioms() {
        // A weight requires a typicality lhs over an atomic name.
        assert!(parse_axiom("Bird <= Fly @ 5").is_err());
        assert!(parse_axiom("T(Bird and Fly) <= X @ 1").is_err());
        // Graded thresholds live in [0, 1].
        assert!(parse_axiom("A <= B >= 1.5").is_err());
        assert!(parse_axiom("A <= B >= -0.1").is_err());
        // Trailing garbage.
        assert!(parse_axiom("A <= B C").is_err());
    }

    // ---- knowledge-base documents ---------------------------------------

    const PENGUIN_KB: &str = "\
strict:
  Penguin <= Bird
  Black and Grey <= Bot
block Bird:
  T(Bird) <= Fly @ 20
  T(Bird) <= some has_wings.Top @ 50
  T(Bird) <= some has_feather.Top @ 50
block Penguin:
  T(Penguin) <= Fly @ -70
  T(Penguin) <= Black @ 50
  T(Penguin) <= Grey @ 10
";

    #[test]
    fn parses_sectioned_document() {
        let kb = parse_kb(PENGUIN_KB).unwrap();
        assert_eq!(kb.strict.len(), 2);
        assert_eq!(kb.assertions.len(), 0);
        assert_eq!(
            kb.distinguished().collect::<Vec<_>>(),
            vec!["Bird", "Penguin"]
        );

        let bird = kb.block("Bird").unwrap();
        assert_eq!(bird.inclusions[0].rhs, atom("Fly"));
        assert_eq!(bird.inclusions[0].weight, 20.0);
        assert_eq!(
            bird.axiom(0),
            Axiom::weighted("Bird", atom("Fly"), 20.0)
        );

        let penguin = kb.block("Penguin").unwrap();
        assert_eq!(penguin.inclusions[0].weight, -70.0);
        // Declaration order is preserved.
        assert_eq!(penguin.inclusions[2].rhs, atom("Grey"));
    }

    #[test]
    fn parses_empty_document() {
        let kb = parse_kb("").unwrap();
        assert!(kb.strict.is_empty() && kb.blocks.is_empty() && kb.assertions.is_empty());
        let kb = parse_kb("  \n# only a comment\n").unwrap();
        assert_eq!(kb, KnowledgeBase::new());
    }

    #[test]
    fn parses_assertions_and_comments() {
        let kb = parse_kb(
            "assertions:\n  Penguin(opus) # the canonical penguin\n  Bird(tweety)\n",
        )
        .unwrap();
        assert_eq!(kb.assertions.len(), 2);
    }

    #[test]
    fn rejects_misplaced_and_malformed_sections() {
        // Axiom before any section header.
        assert!(parse_kb("Penguin <= Bird\n").is_err());
        // Duplicate block.
        let err = parse_kb("block A:\n  T(A) <= B @ 1\nblock A:\n").unwrap_err();
        assert!(err.message.contains("duplicate"), "got: {err}");
        // Weighted inclusion outside a block.
        assert!(parse_kb("strict:\n  T(A) <= B @ 1\n").is_err());
        // Block line whose lhs names a different concept.
        let err = parse_kb("block A:\n  T(B) <= C @ 1\n").unwrap_err();
        assert!(err.line == 2, "got: {err}");
        // Block line without a weight.
        assert!(parse_kb("block A:\n  T(A) <= C\n").is_err());
        // Assertion outside the assertions section.
        assert!(parse_kb("strict:\n  Bird(tweety)\n").is_err());
        // Bad block name.
        assert!(parse_kb("block 5x:\n").is_err());
    }

    #[test]
    fn reports_file_line_numbers() {
        let err = parse_kb("strict:\n  A <= B\n  A <=\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    // ---- rendering -------------------------------------------------------

    #[test]
    fn renders_with_minimal_parentheses() {
        assert_eq!(
            atom("A").and(atom("B").or(atom("C"))).to_string(),
            "A and (B or C)"
        );
        assert_eq!(
            atom("A").or(atom("B")).and(atom("C")).to_string(),
            "(A or B) and C"
        );
        assert_eq!(
            atom("A").and(atom("B")).and(atom("C")).to_string(),
            "A and B and C"
        );
        assert_eq!(
            atom("A").and(atom("B").and(atom("C"))).to_string(),
            "A and (B and C)"
        );
        assert_eq!(atom("Bird").typ().to_string(), "T(Bird)");
        assert_eq!(
            Concept::exists("r", atom("A").and(atom("B"))).to_string(),
            "some r.(A and B)"
        );
        assert_eq!(
            Concept::exists("r", atom("A").not()).to_string(),
            "some r.not A"
        );
        assert_eq!(atom("A").not().not().to_string(), "not not A");
        assert_eq!(
            atom("A").and(atom("B")).not().to_string(),
            "not (A and B)"
        );
    }

    #[test]
    fn renders_axioms() {
        assert_eq!(
            Axiom::weighted("Bird", atom("Fly"), 20.0).to_string(),
            "T(Bird) <= Fly @ 20"
        );
        assert_eq!(
            Axiom::weighted("Penguin", atom("Fly"), -70.0).to_string(),
            "T(Penguin) <= Fly @ -70"
        );
        assert_eq!(
            Axiom::Fuzzy {
                lhs: atom("A"),
                rhs: atom("B"),
                threshold: 0.25,
            }
            .to_string(),
            "A <= B >= 0.25"
        );
        assert_eq!(
            Axiom::Assertion {
                concept: atom("Bird"),
                individual: "tweety".into(),
            }
            .to_string(),
            "Bird(tweety)"
        );
    }

    #[test]
    fn document_round_trips() {
        let kb = parse_kb(PENGUIN_KB).unwrap();
        let rendered = render_kb(&kb);
        let reparsed = parse_kb(&rendered).unwrap();
        assert_eq!(kb, reparsed);
    }

    // ---- property tests --------------------------------------------------

    fn arb_name() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("A".to_string()),
            Just("Bird".to_string()),
            Just("f_2".to_string()),
            Just("_x".to_string()),
            Just("T".to_string()),
            "[a-z][a-zA-Z0-9_]{0,6}".prop_filter("keyword", |s| is_valid_identifier(s)),
        ]
    }

    /// Concepts without any `T(·)`.
    fn arb_concept_no_typ() -> impl Strategy<Value = Concept> {
        let leaf = prop_oneof![
            arb_name().prop_map(Concept::Atomic),
            Just(Concept::Top),
            Just(Concept::Bottom),
        ];
        leaf.prop_recursive(5, 24, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(|c| c.not()),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (arb_name(), inner.clone()).prop_map(|(r, c)| Concept::exists(r, c)),
                (arb_name(), inner).prop_map(|(r, c)| Concept::forall(r, c)),
            ]
        })
    }

    /// Concepts that may contain non-nested `T(·)`.
    fn arb_concept() -> impl Strategy<Value = Concept> {
        let leaf = prop_oneof![
            arb_name().prop_map(Concept::Atomic),
            Just(Concept::Top),
            Just(Concept::Bottom),
            arb_concept_no_typ().prop_map(|c| c.typ()),
        ];
        leaf.prop_recursive(4, 20, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(|c| c.not()),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (arb_name(), inner.clone()).prop_map(|(r, c)| Concept::exists(r, c)),
                (arb_name(), inner).prop_map(|(r, c)| Concept::forall(r, c)),
            ]
        })
    }

    proptest! {
        #[test]
        fn concept_round_trips(c in arb_concept()) {
            prop_assume!(!c.has_nested_typ());
            let text = c.to_string();
            let parsed = parse_concept(&text).unwrap();
            prop_assert_eq!(parsed, c);
        }

        #[test]
        fn weight_literals_round_trip(w in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
            let ax = Axiom::weighted("A", Concept::atomic("B"), w);
            let parsed = parse_axiom(&ax.to_string()).unwrap();
            prop_assert_eq!(parsed, ax);
        }
    }
}
