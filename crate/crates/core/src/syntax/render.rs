//! Rendering concepts, axioms, and knowledge bases back to surface syntax.
//!
//! Parentheses are emitted only where the grammar's precedence would
//! otherwise regroup the expression, so rendering is minimal and the
//! render-parse round trip is structural.

use std::fmt;

use super::{Axiom, Concept, KnowledgeBase};

/// Binding strength, loosest first. Binary operators associate to the left,
/// so a right child at the same level needs parentheses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Or,
    And,
    Prefix,
    Primary,
}

fn prec(c: &Concept) -> Prec {
    match c {
        Concept::Or(..) => Prec::Or,
        Concept::And(..) => Prec::And,
        Concept::Not(_) | Concept::Exists(..) | Concept::Forall(..) => Prec::Prefix,
        Concept::Atomic(_) | Concept::Top | Concept::Bottom | Concept::Typ(_) => Prec::Primary,
    }
}

fn fmt_concept(c: &Concept, min: Prec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parens = prec(c) < min;
    if parens {
        f.write_str("(")?;
    }
    match c {
        Concept::Atomic(name) => f.write_str(name)?,
        Concept::Top => f.write_str("Top")?,
        Concept::Bottom => f.write_str("Bot")?,
        Concept::Not(inner) => {
            f.write_str("not ")?;
            fmt_concept(inner, Prec::Prefix, f)?;
        }
        Concept::And(a, b) => {
            fmt_concept(a, Prec::And, f)?;
            f.write_str(" and ")?;
            fmt_concept(b, Prec::Prefix, f)?;
        }
        Concept::Or(a, b) => {
            fmt_concept(a, Prec::Or, f)?;
            f.write_str(" or ")?;
            fmt_concept(b, Prec::And, f)?;
        }
        Concept::Exists(role, body) => {
            write!(f, "some {role}.")?;
            fmt_concept(body, Prec::Prefix, f)?;
        }
        Concept::Forall(role, body) => {
            write!(f, "all {role}.")?;
            fmt_concept(body, Prec::Prefix, f)?;
        }
        Concept::Typ(inner) => {
            f.write_str("T(")?;
            fmt_concept(inner, Prec::Or, f)?;
            f.write_str(")")?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_concept(self, Prec::Or, f)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Strict { lhs, rhs } => write!(f, "{lhs} <= {rhs}"),
            Axiom::Typicality { lhs, rhs, weight } => {
                write!(f, "{lhs} <= {rhs}")?;
                if let Some(w) = weight {
                    write!(f, " @ {w}")?;
                }
                Ok(())
            }
            Axiom::Fuzzy {
                lhs,
                rhs,
                threshold,
            } => write!(f, "{lhs} <= {rhs} >= {threshold}"),
            Axiom::Assertion {
                concept,
                individual,
            } => match prec(concept) {
                // A compound concept needs parentheses so the individual's
                // `(` cannot be absorbed into the concept.
                Prec::Primary => write!(f, "{concept}({individual})"),
                _ => write!(f, "({concept})({individual})"),
            },
        }
    }
}

pub(super) fn render_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    if !kb.strict.is_empty() {
        out.push_str("strict:\n");
        for ax in &kb.strict {
            out.push_str(&format!("  {ax}\n"));
        }
    }
    for block in &kb.blocks {
        out.push_str(&format!("block {}:\n", block.concept));
        for i in 0..block.inclusions.len() {
            out.push_str(&format!("  {}\n", block.axiom(i)));
        }
    }
    if !kb.assertions.is_empty() {
        out.push_str("assertions:\n");
        for ax in &kb.assertions {
            out.push_str(&format!("  {ax}\n"));
        }
    }
    out
}
