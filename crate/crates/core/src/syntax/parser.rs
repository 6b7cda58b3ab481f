//! Recursive-descent parser for concepts, axioms, and knowledge-base
//! documents.
//!
//! Precedence, loosest to tightest: `or`, `and`, then the prefix operators
//! `not` / `some r.` / `all r.`, then primaries. Binary operators associate
//! to the left; quantifier bodies sit at prefix level, so `some r.A and B`
//! is `(some r.A) and B`.

use super::lexer::{lex, Tok, Token};
use super::{
    is_valid_identifier, strip_comment, Axiom, Concept, KnowledgeBase, ParseError, WeightedBlock,
    WeightedInclusion,
};

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Strictly positive while parsing the argument of a `T(·)`.
    typ_depth: u32,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            typ_depth: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn expect_number(&mut self, what: &str) -> Result<f64, ParseError> {
        match *self.peek() {
            Tok::Number(n) => {
                self.bump();
                Ok(n)
            }
            ref other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(format!(
                "unexpected {} after a complete expression",
                self.peek().describe()
            )))
        }
    }

    // concept := and_expr ("or" and_expr)*
    fn concept(&mut self) -> Result<Concept, ParseError> {
        let mut acc = self.and_expr()?;
        while *self.peek() == Tok::Or {
            self.bump();
            acc = acc.or(self.and_expr()?);
        }
        Ok(acc)
    }

    // and_expr := prefix ("and" prefix)*
    fn and_expr(&mut self) -> Result<Concept, ParseError> {
        let mut acc = self.prefix()?;
        while *self.peek() == Tok::And {
            self.bump();
            acc = acc.and(self.prefix()?);
        }
        Ok(acc)
    }

    // prefix := "not" prefix | "some" role "." prefix | "all" role "." prefix | primary
    fn prefix(&mut self) -> Result<Concept, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(self.prefix()?.not())
            }
            Tok::Some => {
                self.bump();
                let role = self.expect_ident("a role name after `some`")?;
                self.expect(Tok::Dot, "`.` after the role name")?;
                Ok(Concept::exists(role, self.prefix()?))
            }
            Tok::All => {
                self.bump();
                let role = self.expect_ident("a role name after `all`")?;
                self.expect(Tok::Dot, "`.` after the role name")?;
                Ok(Concept::forall(role, self.prefix()?))
            }
            _ => self.primary(),
        }
    }

    // primary := "Top" | "Bot" | "T" "(" concept ")" | ident | "(" concept ")"
    fn primary(&mut self) -> Result<Concept, ParseError> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Concept::Top)
            }
            Tok::Bot => {
                self.bump();
                Ok(Concept::Bottom)
            }
            Tok::LParen => {
                self.bump();
                let c = self.concept()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            Tok::Ident(name) => {
                // `T` immediately followed by `(` is the typicality operator;
                // any other identifier (including a bare `T`) is atomic.
                if name == "T" && self.tokens[self.pos + 1].tok == Tok::LParen {
                    if self.typ_depth > 0 {
                        return Err(self.error(
                            "the argument of a typicality T(...) cannot contain another typicality",
                        ));
                    }
                    self.bump(); // T
                    self.bump(); // (
                    self.typ_depth += 1;
                    let c = self.concept()?;
                    self.typ_depth -= 1;
                    self.expect(Tok::RParen, "`)` closing T(")?;
                    Ok(c.typ())
                } else {
                    self.bump();
                    Ok(Concept::Atomic(name))
                }
            }
            other => Err(self.error(format!("expected a concept, found {}", other.describe()))),
        }
    }

    fn axiom(&mut self) -> Result<Axiom, ParseError> {
        let lhs = self.concept()?;
        match self.peek().clone() {
            Tok::SubsumedBy => {
                self.bump();
                let rhs = self.concept()?;
                match self.peek().clone() {
                    Tok::At => {
                        self.bump();
                        let (wline, wcol) = self.here();
                        let weight = self.expect_number("a weight after `@`")?;
                        if !matches!(&lhs, Concept::Typ(inner) if matches!(**inner, Concept::Atomic(_)))
                        {
                            return Err(ParseError::new(
                                wline,
                                wcol,
                                "a weighted inclusion needs a T(Name) left-hand side",
                            ));
                        }
                        self.expect_eof()?;
                        Ok(Axiom::Typicality {
                            lhs,
                            rhs,
                            weight: Some(weight),
                        })
                    }
                    Tok::AtLeast => {
                        self.bump();
                        let (tline, tcol) = self.here();
                        let threshold = self.expect_number("a threshold after `>=`")?;
                        if !(0.0..=1.0).contains(&threshold) {
                            return Err(ParseError::new(
                                tline,
                                tcol,
                                format!("threshold {threshold} is outside [0, 1]"),
                            ));
                        }
                        self.expect_eof()?;
                        Ok(Axiom::Fuzzy {
                            lhs,
                            rhs,
                            threshold,
                        })
                    }
                    _ => {
                        self.expect_eof()?;
                        if matches!(lhs, Concept::Typ(_)) {
                            Ok(Axiom::Typicality {
                                lhs,
                                rhs,
                                weight: None,
                            })
                        } else {
                            Ok(Axiom::Strict { lhs, rhs })
                        }
                    }
                }
            }
            Tok::LParen => {
                self.bump();
                let individual = self.expect_ident("an individual name")?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect_eof()?;
                Ok(Axiom::Assertion {
                    concept: lhs,
                    individual,
                })
            }
            other => Err(self.error(format!(
                "expected `<=` or `(individual)` after a concept, found {}",
                other.describe()
            ))),
        }
    }
}

pub(super) fn parse_concept_str(text: &str) -> Result<Concept, ParseError> {
    let mut p = Parser::new(lex(text, 1)?);
    let c = p.concept()?;
    p.expect_eof()?;
    Ok(c)
}

pub(super) fn parse_axiom_str(text: &str, first_line: usize) -> Result<Axiom, ParseError> {
    let mut p = Parser::new(lex(text, first_line)?);
    p.axiom()
}

enum Section {
    Strict,
    Block(String),
    Assertions,
}

pub(super) fn parse_kb_str(text: &str) -> Result<KnowledgeBase, ParseError> {
    let mut kb = KnowledgeBase::new();
    let mut section: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }

        if line == "strict:" {
            section = Some(Section::Strict);
            continue;
        }
        if line == "assertions:" {
            section = Some(Section::Assertions);
            continue;
        }
        if let Some(rest) = line.strip_prefix("block ") {
            if let Some(name) = rest.strip_suffix(':') {
                let name = name.trim();
                if !is_valid_identifier(name) {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("`{name}` is not a valid block name"),
                    ));
                }
                if kb.block(name).is_some() {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("duplicate block for concept `{name}`"),
                    ));
                }
                kb.blocks.push(WeightedBlock::new(name));
                section = Some(Section::Block(name.to_string()));
                continue;
            }
        }

        let axiom = parse_axiom_str(line, lineno)?;
        match &section {
            None => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    "expected a section header first: `strict:`, `block <Name>:`, or `assertions:`",
                ));
            }
            Some(Section::Strict) => match axiom {
                Axiom::Typicality {
                    weight: Some(_), ..
                } => {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        "weighted inclusions belong in a `block <Name>:` section",
                    ));
                }
                Axiom::Assertion { .. } => {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        "assertions belong in the `assertions:` section",
                    ));
                }
                ax => kb.strict.push(ax),
            },
            Some(Section::Block(name)) => match axiom {
                Axiom::Typicality {
                    lhs,
                    rhs,
                    weight: Some(weight),
                } => {
                    let lhs_name = match &lhs {
                        Concept::Typ(inner) => match &**inner {
                            Concept::Atomic(n) => n.clone(),
                            _ => unreachable!("weighted lhs is validated as T(Name)"),
                        },
                        _ => unreachable!("weighted lhs is validated as T(Name)"),
                    };
                    if lhs_name != *name {
                        return Err(ParseError::new(
                            lineno,
                            1,
                            format!(
                                "inclusion for `T({lhs_name})` does not match block `{name}`"
                            ),
                        ));
                    }
                    let block = kb
                        .blocks
                        .iter_mut()
                        .find(|b| b.concept == *name)
                        .expect("current block exists");
                    block.inclusions.push(WeightedInclusion { rhs, weight });
                }
                _ => {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("a block line must be a weighted inclusion `T({name}) <= D @ w`"),
                    ));
                }
            },
            Some(Section::Assertions) => match axiom {
                ax @ Axiom::Assertion { .. } => kb.assertions.push(ax),
                _ => {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        "only `Concept(individual)` assertions are allowed here",
                    ));
                }
            },
        }
    }

    Ok(kb)
}
