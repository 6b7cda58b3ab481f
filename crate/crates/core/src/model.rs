//! Preference relations, multipreference models, and two-valued model
//! checking.
//!
//! A *preference relation* orders the elements of a finite domain by a
//! score: lower scores are more preferred, and `+inf` marks maximally
//! dispreferred elements. A score always induces a strict weak order
//! (irreflexive, transitive, well-founded, and modular). Several relations
//! — one per distinguished concept — combine into one global order by the
//! Pareto rule; the result is stored as an explicit pair set because it can
//! fail modularity even though every ingredient is modular.
//!
//! A [`MultiPrefModel`] bundles a labelled domain with atomic-concept
//! extensions, optional role interpretations, per-concept preferences, and
//! an optional global order. Concept evaluation interprets `T(C)` as the
//! minimal members of `C` under the relevant order, and
//! [`MultiPrefModel::check`] decides inclusion and assertion axioms by
//! direct evaluation, reporting counterexamples.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::syntax::{Axiom, Concept};

/// Errors from building or querying preference structures and models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("scores must not contain NaN or -inf (element {0})")]
    BadScore(usize),
    #[error("epsilon must be a finite, non-negative number")]
    BadEpsilon,
    #[error("a preference relation needs a non-empty domain")]
    EmptyDomain,
    #[error("domain sizes differ: {0} vs {1}")]
    DomainMismatch(usize, usize),
    #[error("element index {0} is outside the domain")]
    ElementOutOfRange(usize),
    #[error("at least one preference relation is required")]
    NoPreferences,
    #[error("domain labels must be unique (`{0}` repeats)")]
    DuplicateLabel(String),
    #[error("unknown atomic concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("`{0}` has no preference relation; T(...) needs a distinguished concept in per-concept mode")]
    NotDistinguished(String),
    #[error("per-concept typicality needs an atomic argument; use global mode for `T({0})`")]
    CompoundTypicality(String),
    #[error("no global preference order is available; combine the per-concept orders first")]
    MissingGlobalOrder,
    #[error("a global order must be irreflexive and transitive")]
    InvalidGlobalOrder,
    #[error("a preference for `{0}` needs an atomic extension for `{0}` first")]
    PreferenceWithoutExtension(String),
    #[error("graded axioms are checked against fuzzy models, not two-valued ones")]
    GradedAxiom,
}

/// Anything that strictly orders the elements `0..len()` of a domain.
pub trait StrictOrder {
    /// The domain size.
    fn len(&self) -> usize;
    /// Is `x` strictly preferred to `y`?
    fn prefers(&self, x: usize, y: usize) -> bool;
    /// Is the domain empty?
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A preference relation induced by a score map. Lower scores are more
/// preferred; `+inf` is allowed and two `+inf` scores tie.
///
/// Comparison is exact by default. With a positive `epsilon`, scores within
/// `epsilon` of each other tie, so `x` is preferred to `y` only when
/// `score(x) < score(y) - epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceRelation {
    scores: Vec<f64>,
    epsilon: f64,
}

impl PreferenceRelation {
    /// A relation with exact score comparison.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self, ModelError> {
        Self::with_epsilon(scores, 0.0)
    }

    /// A relation that treats scores within `epsilon` as tied.
    pub fn with_epsilon(scores: Vec<f64>, epsilon: f64) -> Result<Self, ModelError> {
        if scores.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        if let Some(i) = scores
            .iter()
            .position(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return Err(ModelError::BadScore(i));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(ModelError::BadEpsilon);
        }
        Ok(PreferenceRelation { scores, epsilon })
    }

    /// The score of element `x`.
    pub fn score(&self, x: usize) -> f64 {
        self.scores[x]
    }

    /// All scores, indexed by element.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// The tie tolerance.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Do `x` and `y` tie (neither is preferred to the other)?
    pub fn ties(&self, x: usize, y: usize) -> bool {
        !self.prefers(x, y) && !self.prefers(y, x)
    }

    /// The weak counterpart: `x` is at least as preferred as `y`.
    pub fn at_least_as_preferred(&self, x: usize, y: usize) -> bool {
        !self.prefers(y, x)
    }
}

impl StrictOrder for PreferenceRelation {
    fn len(&self) -> usize {
        self.scores.len()
    }

    fn prefers(&self, x: usize, y: usize) -> bool {
        self.scores[x] < self.scores[y] - self.epsilon
    }
}

/// A strict order given extensionally, as the set of pairs `(x, y)` with
/// `x` preferred to `y`. This is how Pareto-combined orders are kept, since
/// they can be non-modular and therefore fit no score map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitOrder {
    len: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl ExplicitOrder {
    pub fn new(len: usize, pairs: BTreeSet<(usize, usize)>) -> Result<Self, ModelError> {
        if len == 0 {
            return Err(ModelError::EmptyDomain);
        }
        for &(x, y) in &pairs {
            let bad = if x >= len { x } else { y };
            if x >= len || y >= len {
                return Err(ModelError::ElementOutOfRange(bad));
            }
        }
        Ok(ExplicitOrder { len, pairs })
    }

    /// The preferred-to pairs, ordered.
    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    /// Check the four strict-order properties of this relation.
    pub fn properties(&self) -> OrderProperties {
        validate_preference(self)
    }
}

impl StrictOrder for ExplicitOrder {
    fn len(&self) -> usize {
        self.len
    }

    fn prefers(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }
}

/// The minimal elements of `subset`: members with no strictly preferred
/// member inside `subset`. Empty input yields an empty output; for a
/// well-founded order a non-empty input yields a non-empty output.
pub fn minimal<O: StrictOrder + ?Sized>(
    order: &O,
    subset: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    subset
        .iter()
        .copied()
        .filter(|&u| !subset.iter().any(|&z| order.prefers(z, u)))
        .collect()
}

/// Combine per-concept preferences into one global order by the Pareto
/// rule: `x` is globally preferred to `y` when some relation strictly
/// prefers `x` and no relation strictly prefers `y`.
///
/// The result is irreflexive, transitive, and well-founded, but may be
/// non-modular, so it is returned as an explicit pair set.
pub fn pareto_combine<'a, I>(prefs: I) -> Result<ExplicitOrder, ModelError>
where
    I: IntoIterator<Item = &'a PreferenceRelation>,
{
    let prefs: Vec<&PreferenceRelation> = prefs.into_iter().collect();
    let first = prefs.first().ok_or(ModelError::NoPreferences)?;
    let n = first.len();
    for p in &prefs {
        if p.len() != n {
            return Err(ModelError::DomainMismatch(n, p.len()));
        }
    }

    let mut pairs = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            let some_strict = prefs.iter().any(|p| p.prefers(x, y));
            let all_weak = prefs.iter().all(|p| p.at_least_as_preferred(x, y));
            if some_strict && all_weak {
                pairs.insert((x, y));
            }
        }
    }
    ExplicitOrder::new(n, pairs)
}

/// The outcome of checking the four strict-order properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderProperties {
    pub irreflexive: bool,
    pub transitive: bool,
    /// Every non-empty subset has a minimal element; on a finite domain
    /// this is exactly acyclicity of the strict relation.
    pub well_founded: bool,
    /// For all `x < y` and every `z`: `x < z` or `z < y`.
    pub modular: bool,
}

impl OrderProperties {
    /// Do all four properties hold?
    pub fn all_hold(&self) -> bool {
        self.irreflexive && self.transitive && self.well_founded && self.modular
    }
}

/// Exhaustively check irreflexivity, transitivity, well-foundedness, and
/// modularity of an order over its finite domain.
pub fn validate_preference<O: StrictOrder + ?Sized>(order: &O) -> OrderProperties {
    let n = order.len();

    let irreflexive = (0..n).all(|x| !order.prefers(x, x));

    let mut transitive = true;
    'trans: for x in 0..n {
        for y in 0..n {
            if !order.prefers(x, y) {
                continue;
            }
            for z in 0..n {
                if order.prefers(y, z) && !order.prefers(x, z) {
                    transitive = false;
                    break 'trans;
                }
            }
        }
    }

    let mut modular = true;
    'modular: for x in 0..n {
        for y in 0..n {
            if !order.prefers(x, y) {
                continue;
            }
            for z in 0..n {
                if !order.prefers(x, z) && !order.prefers(z, y) {
                    modular = false;
                    break 'modular;
                }
            }
        }
    }

    // On a finite domain, "every non-empty subset has a minimal element"
    // holds exactly when the strict relation has no cycle: a cycle is a
    // subset without minimal elements, and without cycles any walk along
    // strictly-preferred predecessors must terminate.
    let mut colour = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut well_founded = true;
    'outer: for start in 0..n {
        if colour[start] != 0 {
            continue;
        }
        // Iterative DFS over the "is preferred to" edges.
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        colour[start] = 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (u, next) = stack[top];
            if next >= n {
                colour[u] = 2;
                stack.pop();
                continue;
            }
            stack[top].1 += 1;
            if !order.prefers(u, next) {
                continue;
            }
            match colour[next] {
                0 => {
                    colour[next] = 1;
                    stack.push((next, 0));
                }
                1 => {
                    well_founded = false;
                    break 'outer;
                }
                _ => {}
            }
        }
    }

    OrderProperties {
        irreflexive,
        transitive,
        well_founded,
        modular,
    }
}

/// How `T(C)` is interpreted during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypicalityMode {
    /// `T(C)` requires `C` to be an atomic distinguished concept and uses
    /// that concept's own preference relation.
    PerConcept,
    /// `T(C)` works for any concept and uses the model's global order.
    Global,
}

/// The verdict of checking one axiom against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub axiom: Axiom,
    pub holds: bool,
    /// Elements witnessing failure (in the lhs but not the rhs), ascending.
    /// Non-empty exactly when `holds` is false.
    pub counterexamples: Vec<usize>,
}

/// A finite multipreference model: a labelled domain, atomic-concept
/// extensions, role interpretations, one preference relation per
/// distinguished concept, and an optional global order.
#[derive(Debug, Clone)]
pub struct MultiPrefModel {
    labels: Vec<String>,
    atomic: BTreeMap<String, BTreeSet<usize>>,
    roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
    prefs: BTreeMap<String, PreferenceRelation>,
    global: Option<ExplicitOrder>,
}

impl MultiPrefModel {
    /// A model over the given domain labels (non-empty, unique).
    pub fn new(labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(ModelError::DuplicateLabel(l.clone()));
            }
        }
        Ok(MultiPrefModel {
            labels,
            atomic: BTreeMap::new(),
            roles: BTreeMap::new(),
            prefs: BTreeMap::new(),
            global: None,
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

    /// Set the extension of an atomic concept.
    pub fn set_extension(
        &mut self,
        name: impl Into<String>,
        extension: BTreeSet<usize>,
    ) -> Result<(), ModelError> {
        self.check_ids(&extension)?;
        self.atomic.insert(name.into(), extension);
        Ok(())
    }

    /// The extension of an atomic concept, if declared.
    pub fn extension(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.atomic.get(name)
    }

    /// The declared atomic concepts, in name order.
    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.atomic.keys().map(String::as_str)
    }

    /// Set the interpretation of a role.
    pub fn set_role(
        &mut self,
        name: impl Into<String>,
        pairs: BTreeSet<(usize, usize)>,
    ) -> Result<(), ModelError> {
        for &(x, y) in &pairs {
            if x >= self.len() {
                return Err(ModelError::ElementOutOfRange(x));
            }
            if y >= self.len() {
                return Err(ModelError::ElementOutOfRange(y));
            }
        }
        self.roles.insert(name.into(), pairs);
        Ok(())
    }

    /// The pairs of a role, if declared.
    pub fn role(&self, name: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.roles.get(name)
    }

    /// All declared roles with their pairs, in name order.
    pub fn roles(&self) -> impl Iterator<Item = (&str, &BTreeSet<(usize, usize)>)> {
        self.roles.iter().map(|(n, p)| (n.as_str(), p))
    }

    /// Attach a preference relation to a distinguished concept. The concept
    /// must already have an atomic extension.
    pub fn set_preference(
        &mut self,
        name: impl Into<String>,
        pref: PreferenceRelation,
    ) -> Result<(), ModelError> {
        let name = name.into();
        if pref.len() != self.len() {
            return Err(ModelError::DomainMismatch(self.len(), pref.len()));
        }
        if !self.atomic.contains_key(&name) {
            return Err(ModelError::PreferenceWithoutExtension(name));
        }
        self.prefs.insert(name, pref);
        Ok(())
    }

    /// The preference relation of a distinguished concept.
    pub fn preference(&self, name: &str) -> Option<&PreferenceRelation> {
        self.prefs.get(name)
    }

    /// All preference-bearing concepts with their relations, in name order.
    pub fn preferences(&self) -> impl Iterator<Item = (&str, &PreferenceRelation)> {
        self.prefs.iter().map(|(n, p)| (n.as_str(), p))
    }

    /// The distinguished concepts (those carrying a preference), in name
    /// order.
    pub fn distinguished(&self) -> impl Iterator<Item = &str> {
        self.prefs.keys().map(String::as_str)
    }

    /// Install a global order. It must be irreflexive and transitive.
    pub fn set_global(&mut self, order: ExplicitOrder) -> Result<(), ModelError> {
        if order.len() != self.len() {
            return Err(ModelError::DomainMismatch(self.len(), order.len()));
        }
        let props = order.properties();
        if !props.irreflexive || !props.transitive {
            return Err(ModelError::InvalidGlobalOrder);
        }
        self.global = Some(order);
        Ok(())
    }

    /// The global order, if installed.
    pub fn global(&self) -> Option<&ExplicitOrder> {
        self.global.as_ref()
    }

    /// Compute and install the Pareto combination of all per-concept
    /// preferences as the global order.
    pub fn combine_global(&mut self) -> Result<&ExplicitOrder, ModelError> {
        let order = pareto_combine(self.prefs.values())?;
        self.global = Some(order);
        Ok(self.global.as_ref().expect("just set"))
    }

    fn check_ids(&self, set: &BTreeSet<usize>) -> Result<(), ModelError> {
        match set.iter().rfind(|&&x| x >= self.len()) {
            Some(&x) => Err(ModelError::ElementOutOfRange(x)),
            None => Ok(()),
        }
    }

    fn universe(&self) -> BTreeSet<usize> {
        (0..self.len()).collect()
    }

    /// Evaluate a concept to its extension.
    pub fn eval(&self, c: &Concept, mode: TypicalityMode) -> Result<BTreeSet<usize>, ModelError> {
        match c {
            Concept::Atomic(name) => self
                .atomic
                .get(name)
                .cloned()
                .ok_or_else(|| ModelError::UnknownConcept(name.clone())),
            Concept::Top => Ok(self.universe()),
            Concept::Bottom => Ok(BTreeSet::new()),
            Concept::Not(inner) => {
                let inner = self.eval(inner, mode)?;
                Ok((0..self.len()).filter(|x| !inner.contains(x)).collect())
            }
            Concept::And(a, b) => {
                let a = self.eval(a, mode)?;
                let b = self.eval(b, mode)?;
                Ok(a.intersection(&b).copied().collect())
            }
            Concept::Or(a, b) => {
                let a = self.eval(a, mode)?;
                let b = self.eval(b, mode)?;
                Ok(a.union(&b).copied().collect())
            }
            Concept::Exists(role, body) => {
                let pairs = self
                    .roles
                    .get(role)
                    .ok_or_else(|| ModelError::UnknownRole(role.clone()))?;
                let body = self.eval(body, mode)?;
                Ok(pairs
                    .iter()
                    .filter(|(_, y)| body.contains(y))
                    .map(|&(x, _)| x)
                    .collect())
            }
            Concept::Forall(role, body) => {
                let pairs = self
                    .roles
                    .get(role)
                    .ok_or_else(|| ModelError::UnknownRole(role.clone()))?;
                let body = self.eval(body, mode)?;
                Ok((0..self.len())
                    .filter(|&x| {
                        pairs
                            .iter()
                            .filter(|&&(u, _)| u == x)
                            .all(|&(_, y)| body.contains(&y))
                    })
                    .collect())
            }
            Concept::Typ(inner) => {
                let extension = self.eval(inner, mode)?;
                match mode {
                    TypicalityMode::PerConcept => match &**inner {
                        Concept::Atomic(name) => {
                            let pref = self
                                .prefs
                                .get(name)
                                .ok_or_else(|| ModelError::NotDistinguished(name.clone()))?;
                            Ok(minimal(pref, &extension))
                        }
                        other => Err(ModelError::CompoundTypicality(other.to_string())),
                    },
                    TypicalityMode::Global => {
                        let order =
                            self.global.as_ref().ok_or(ModelError::MissingGlobalOrder)?;
                        Ok(minimal(order, &extension))
                    }
                }
            }
        }
    }

    /// Check an inclusion or assertion axiom, reporting counterexamples.
    ///
    /// Graded (`>=`) axioms are rejected: they are checked against fuzzy
    /// models.
    pub fn check(&self, axiom: &Axiom, mode: TypicalityMode) -> Result<CheckReport, ModelError> {
        match axiom {
            Axiom::Strict { lhs, rhs } | Axiom::Typicality { lhs, rhs, .. } => {
                let l = self.eval(lhs, mode)?;
                let r = self.eval(rhs, mode)?;
                let counterexamples: Vec<usize> =
                    l.iter().copied().filter(|x| !r.contains(x)).collect();
                Ok(CheckReport {
                    axiom: axiom.clone(),
                    holds: counterexamples.is_empty(),
                    counterexamples,
                })
            }
            Axiom::Assertion {
                concept,
                individual,
            } => {
                let x = self
                    .element(individual)
                    .ok_or_else(|| ModelError::UnknownIndividual(individual.clone()))?;
                let holds = self.eval(concept, mode)?.contains(&x);
                Ok(CheckReport {
                    axiom: axiom.clone(),
                    holds,
                    counterexamples: if holds { vec![] } else { vec![x] },
                })
            }
            Axiom::Fuzzy { .. } => Err(ModelError::GradedAxiom),
        }
    }
}
