//! Fuzzy models and graded concept evaluation.
//!
//! A [`FuzzyModel`] assigns each atomic concept a membership degree in
//! `[0, 1]` for every domain element. Compound concepts are evaluated with
//! one of three residuated t-norm/implication pairs:
//!
//! | choice        | t-norm           | t-conorm        | implication                  |
//! |---------------|------------------|-----------------|------------------------------|
//! | `Goedel`      | `min(a, b)`      | `max(a, b)`     | `1` if `a <= b`, else `b`    |
//! | `Product`     | `a * b`          | `a + b - a*b`   | `1` if `a <= b`, else `b/a`  |
//! | `Lukasiewicz` | `max(0, a+b-1)`  | `min(1, a+b)`   | `min(1, 1 - a + b)`          |
//!
//! Negation is standard (`1 - a`) for all three choices. A graded inclusion
//! `C <= D >= t` holds when the infimum over the domain of
//! `impl(C(x), D(x))` reaches the threshold `t` (up to the tolerance).
//!
//! Membership degrees also induce preferences: higher degree means more
//! typical, so the induced score is the negated degree, and `T(C)` denotes
//! the elements of maximal degree among those with positive degree.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::PreferenceRelation;
use crate::syntax::{Axiom, Concept};

/// Errors from building or evaluating fuzzy models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("a fuzzy model needs a non-empty domain")]
    EmptyDomain,
    #[error("domain labels must be unique (`{0}` repeats)")]
    DuplicateLabel(String),
    #[error("degrees for `{concept}` have length {got}, domain has {expected}")]
    DegreeLength {
        concept: String,
        expected: usize,
        got: usize,
    },
    #[error("degree {value} of `{concept}` at element {element} is outside [0, 1]")]
    DegreeOutOfRange {
        concept: String,
        element: usize,
        value: f64,
    },
    #[error("unknown atomic concept `{0}`")]
    UnknownConcept(String),
    #[error("element index {0} is outside the domain")]
    ElementOutOfRange(usize),
    #[error("role restrictions are not supported in fuzzy evaluation (`{0}`)")]
    RoleUnsupported(String),
    #[error("typicality cannot appear inside a typicality argument")]
    NestedTypicality,
    #[error("expected a graded axiom `C <= D >= t`")]
    NotGraded,
    #[error(transparent)]
    Preference(#[from] crate::model::ModelError),
}

/// The three shipped residuated logics. `Goedel` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FuzzyLogic {
    #[default]
    Goedel,
    Product,
    Lukasiewicz,
}

impl FuzzyLogic {
    /// The conjunction (t-norm) of this logic.
    pub fn tnorm(self, a: f64, b: f64) -> f64 {
        match self {
            FuzzyLogic::Goedel => a.min(b),
            FuzzyLogic::Product => a * b,
            FuzzyLogic::Lukasiewicz => (a + b - 1.0).max(0.0),
        }
    }

    /// The disjunction (t-conorm) dual to the t-norm.
    pub fn tconorm(self, a: f64, b: f64) -> f64 {
        match self {
            FuzzyLogic::Goedel => a.max(b),
            FuzzyLogic::Product => a + b - a * b,
            FuzzyLogic::Lukasiewicz => (a + b).min(1.0),
        }
    }

    /// The residuated implication of the t-norm: the largest `c` with
    /// `tnorm(a, c) <= b`.
    pub fn implication(self, a: f64, b: f64) -> f64 {
        match self {
            FuzzyLogic::Goedel => {
                if a <= b {
                    1.0
                } else {
                    b
                }
            }
            FuzzyLogic::Product => {
                if a <= b {
                    1.0
                } else {
                    b / a
                }
            }
            FuzzyLogic::Lukasiewicz => (1.0 - a + b).min(1.0),
        }
    }

    /// Standard negation, shared by all three logics.
    pub fn negation(self, a: f64) -> f64 {
        1.0 - a
    }

    /// The lowercase name used by file formats and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            FuzzyLogic::Goedel => "goedel",
            FuzzyLogic::Product => "product",
            FuzzyLogic::Lukasiewicz => "lukasiewicz",
        }
    }

    /// Parse a logic name as accepted by [`FuzzyLogic::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "goedel" => Some(FuzzyLogic::Goedel),
            "product" => Some(FuzzyLogic::Product),
            "lukasiewicz" => Some(FuzzyLogic::Lukasiewicz),
            _ => None,
        }
    }
}

/// A fuzzy model: a labelled domain and, per atomic concept, a membership
/// degree in `[0, 1]` for every element.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyModel {
    labels: Vec<String>,
    degrees: BTreeMap<String, Vec<f64>>,
}

impl FuzzyModel {
    /// A model over the given domain labels (non-empty, unique).
    pub fn new(labels: Vec<String>) -> Result<Self, FuzzyError> {
        if labels.is_empty() {
            return Err(FuzzyError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(FuzzyError::DuplicateLabel(l.clone()));
            }
        }
        Ok(FuzzyModel {
            labels,
            degrees: BTreeMap::new(),
        })
    }

    /// The domain size.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Is the domain empty? (Never true for a constructed model.)
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The element labels, indexed by element id.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The label of one element.
    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// Look up an element id by label.
    pub fn element(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Set the membership degrees of an atomic concept, one per element,
    /// each in `[0, 1]`.
    pub fn set_degrees(
        &mut self,
        name: impl Into<String>,
        degrees: Vec<f64>,
    ) -> Result<(), FuzzyError> {
        let name = name.into();
        if degrees.len() != self.len() {
            return Err(FuzzyError::DegreeLength {
                concept: name,
                expected: self.len(),
                got: degrees.len(),
            });
        }
        if let Some(i) = degrees
            .iter()
            .position(|d| !(0.0..=1.0).contains(d) || d.is_nan())
        {
            return Err(FuzzyError::DegreeOutOfRange {
                concept: name,
                element: i,
                value: degrees[i],
            });
        }
        self.degrees.insert(name, degrees);
        Ok(())
    }

    /// The degrees of an atomic concept, if declared.
    pub fn degrees(&self, name: &str) -> Option<&[f64]> {
        self.degrees.get(name).map(Vec::as_slice)
    }

    /// The degree of one element in an atomic concept.
    pub fn degree(&self, name: &str, x: usize) -> Option<f64> {
        self.degrees.get(name).map(|d| d[x])
    }

    /// The declared atomic concepts, in name order.
    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.degrees.keys().map(String::as_str)
    }
}

/// Evaluate the membership degree of element `x` in concept `c`.
///
/// Role restrictions are unsupported. `T(C)` evaluates crisply: `1.0` when
/// `x` belongs to [`typicality_set`] of `C`, else `0.0`.
pub fn fuzzy_eval(
    model: &FuzzyModel,
    c: &Concept,
    x: usize,
    logic: FuzzyLogic,
    epsilon: f64,
) -> Result<f64, FuzzyError> {
    if x >= model.len() {
        return Err(FuzzyError::ElementOutOfRange(x));
    }
    match c {
        Concept::Atomic(name) => model
            .degree(name, x)
            .ok_or_else(|| FuzzyError::UnknownConcept(name.clone())),
        Concept::Top => Ok(1.0),
        Concept::Bottom => Ok(0.0),
        Concept::Not(inner) => Ok(logic.negation(fuzzy_eval(model, inner, x, logic, epsilon)?)),
        Concept::And(a, b) => Ok(logic.tnorm(
            fuzzy_eval(model, a, x, logic, epsilon)?,
            fuzzy_eval(model, b, x, logic, epsilon)?,
        )),
        Concept::Or(a, b) => Ok(logic.tconorm(
            fuzzy_eval(model, a, x, logic, epsilon)?,
            fuzzy_eval(model, b, x, logic, epsilon)?,
        )),
        Concept::Exists(role, _) | Concept::Forall(role, _) => {
            Err(FuzzyError::RoleUnsupported(role.clone()))
        }
        Concept::Typ(inner) => {
            let typical = typicality_set(model, inner, logic, epsilon)?;
            Ok(if typical.contains(&x) { 1.0 } else { 0.0 })
        }
    }
}

/// The most typical members of `c`: the elements of maximal degree among
/// those with positive degree. All-zero degrees yield the empty set.
///
/// `c` must be role-free and typicality-free.
pub fn typicality_set(
    model: &FuzzyModel,
    c: &Concept,
    logic: FuzzyLogic,
    epsilon: f64,
) -> Result<BTreeSet<usize>, FuzzyError> {
    if c.contains_typ() {
        return Err(FuzzyError::NestedTypicality);
    }
    let degrees: Vec<f64> = (0..model.len())
        .map(|x| fuzzy_eval(model, c, x, logic, epsilon))
        .collect::<Result<_, _>>()?;
    let support: Vec<usize> = (0..model.len()).filter(|&x| degrees[x] > 0.0).collect();
    Ok(support
        .iter()
        .copied()
        .filter(|&x| !support.iter().any(|&z| degrees[z] > degrees[x] + epsilon))
        .collect())
}

/// The verdict of checking one graded inclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyCheckReport {
    pub axiom: Axiom,
    /// The infimum over the domain of `impl(lhs(x), rhs(x))`.
    pub infimum: f64,
    pub holds: bool,
    /// Elements whose implication value stays below the threshold, with
    /// that value, ascending by element. Non-empty exactly when `holds` is
    /// false.
    pub counterexamples: Vec<(usize, f64)>,
}

/// Check a graded inclusion `C <= D >= t`: the axiom holds when
/// `inf_x impl(C(x), D(x)) >= t - epsilon`.
pub fn check_fuzzy_inclusion(
    model: &FuzzyModel,
    axiom: &Axiom,
    logic: FuzzyLogic,
    epsilon: f64,
) -> Result<FuzzyCheckReport, FuzzyError> {
    let (lhs, rhs, threshold) = match axiom {
        Axiom::Fuzzy {
            lhs,
            rhs,
            threshold,
        } => (lhs, rhs, *threshold),
        _ => return Err(FuzzyError::NotGraded),
    };

    let mut infimum = f64::INFINITY;
    let mut counterexamples = Vec::new();
    for x in 0..model.len() {
        let a = fuzzy_eval(model, lhs, x, logic, epsilon)?;
        let b = fuzzy_eval(model, rhs, x, logic, epsilon)?;
        let value = logic.implication(a, b);
        infimum = infimum.min(value);
        if value < threshold - epsilon {
            counterexamples.push((x, value));
        }
    }
    Ok(FuzzyCheckReport {
        axiom: axiom.clone(),
        infimum,
        holds: counterexamples.is_empty(),
        counterexamples,
    })
}

/// The preference induced by an atomic concept's degrees: an element is
/// preferred when its degree is higher, so the score is the negated degree.
pub fn induce_preference(
    model: &FuzzyModel,
    concept: &str,
    epsilon: f64,
) -> Result<PreferenceRelation, FuzzyError> {
    let degrees = model
        .degrees(concept)
        .ok_or_else(|| FuzzyError::UnknownConcept(concept.to_string()))?;
    let scores: Vec<f64> = degrees.iter().map(|d| -d).collect();
    Ok(PreferenceRelation::with_epsilon(scores, epsilon)?)
}
