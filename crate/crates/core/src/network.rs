//! Feedforward and recurrent networks, and the models they induce.
//!
//! A [`Network`] is a directed graph of named units. Input units carry
//! stimulus values unchanged; every other unit applies its activation to the
//! weighted sum of its predecessors plus a bias. Acyclic networks are
//! evaluated in one topological pass; cyclic networks are iterated
//! synchronously from zero until the state is stationary (or
//! [`NetworkError::NoStationaryState`] after the configured bound).
//!
//! Evaluating a set of stimuli yields logical models over the stimuli as
//! domain, one concept per unit:
//!
//! * [`build_two_valued_model`] cuts each unit's activation at a threshold
//!   to get crisp extensions, and turns the activations of selected units
//!   into preferences (higher activation preferred).
//! * [`build_fuzzy_model`] reads the activations directly as membership
//!   degrees, which requires every value to land in `[0, 1]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::FuzzyModel;
use crate::model::{ModelError, MultiPrefModel};
use crate::syntax::is_valid_identifier;

/// Errors from constructing or evaluating networks.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("a network needs at least one unit")]
    NoUnits,
    #[error("a network needs at least one input unit")]
    NoInputs,
    #[error("`{0}` is not a valid unit name (want letters, digits, `_`, not starting with a digit)")]
    BadUnitName(String),
    #[error("duplicate unit `{0}`")]
    DuplicateUnit(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("`{0}` is listed as an input twice")]
    DuplicateInput(String),
    #[error("input unit `{0}` cannot have incoming edges")]
    InputHasIncoming(String),
    #[error("input unit `{0}` must use the identity activation")]
    InputNotIdentity(String),
    #[error("input unit `{0}` must have zero bias")]
    InputHasBias(String),
    #[error("stimulus has {got} values, the network has {expected} inputs")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no stationary state after {iterations} iterations (residual {residual:.3e})")]
    NoStationaryState { iterations: usize, residual: f64 },
    #[error("unit `{unit}` produced {value} on stimulus {stimulus}, outside [0, 1]; {hint}")]
    NotFuzzy {
        unit: String,
        stimulus: usize,
        value: f64,
        hint: &'static str,
    },
    #[error("stimulus {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<NetworkError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl NetworkError {
    fn at_row(self, row: usize) -> NetworkError {
        NetworkError::AtRow {
            row,
            source: Box::new(self),
        }
    }
}

/// A unit's activation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    /// `u` unchanged; required for input units.
    Identity,
    /// The logistic function `1 / (1 + exp(-u))`, ranging in `(0, 1)`.
    Sigmoid,
    /// `tanh(u)`, ranging in `(-1, 1)`.
    Tanh,
    /// `(tanh(u) + 1) / 2`, a copy of `tanh` rescaled into `(0, 1)`.
    TanhRescaled,
    /// The step `1` if `u >= 0` else `0`. Not strictly increasing.
    Threshold,
    /// A steepness-adjusted logistic, `1 / (1 + exp(-slope * u))`.
    CustomMonotone { slope: f64 },
}

impl Activation {
    /// Apply the function to an input value.
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Activation::Identity => u,
            Activation::Sigmoid => 1.0 / (1.0 + (-u).exp()),
            Activation::Tanh => u.tanh(),
            Activation::TanhRescaled => (u.tanh() + 1.0) / 2.0,
            Activation::Threshold => {
                if u >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::CustomMonotone { slope } => 1.0 / (1.0 + (-slope * u).exp()),
        }
    }

    /// Does a larger input always produce a strictly larger output?
    pub fn is_strictly_increasing(self) -> bool {
        match self {
            Activation::Identity
            | Activation::Sigmoid
            | Activation::Tanh
            | Activation::TanhRescaled => true,
            Activation::Threshold => false,
            Activation::CustomMonotone { slope } => slope > 0.0,
        }
    }

    /// Does every output land in `[0, 1]`?
    pub fn unit_interval_range(self) -> bool {
        match self {
            Activation::Sigmoid
            | Activation::TanhRescaled
            | Activation::Threshold
            | Activation::CustomMonotone { .. } => true,
            Activation::Identity | Activation::Tanh => false,
        }
    }
}

/// A named unit with its activation and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub name: String,
    pub activation: Activation,
    pub bias: f64,
}

impl Unit {
    pub fn new(name: impl Into<String>, activation: Activation, bias: f64) -> Self {
        Unit {
            name: name.into(),
            activation,
            bias,
        }
    }

    /// An input unit: identity activation, zero bias.
    pub fn input(name: impl Into<String>) -> Self {
        Unit::new(name, Activation::Identity, 0.0)
    }
}

/// A weighted connection between two named units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, weight: f64) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            weight,
        }
    }
}

/// Bounds for the synchronous iteration used on cyclic networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixpointConfig {
    /// Stop when no unit changed by more than this between sweeps.
    pub tolerance: f64,
    /// Give up after this many sweeps.
    pub max_iterations: usize,
}

impl Default for FixpointConfig {
    fn default() -> Self {
        FixpointConfig {
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

/// A directed network of named units.
#[derive(Debug, Clone)]
pub struct Network {
    units: Vec<Unit>,
    edges: Vec<Edge>,
    /// Edge endpoints resolved to unit ids, parallel to `edges`.
    edge_ids: Vec<(usize, usize)>,
    /// Ids of the input units, in declaration order.
    inputs: Vec<usize>,
    /// Per unit, the indices into `edges` of its incoming edges, in edge
    /// declaration order.
    incoming: Vec<Vec<usize>>,
    name_to_id: BTreeMap<String, usize>,
    /// A topological order of the units, present iff the graph is acyclic.
    topo_order: Option<Vec<usize>>,
}

impl Network {
    /// Validate and assemble a network.
    ///
    /// Unit names must be unique identifiers; edges must connect known
    /// units; the listed inputs must exist, have no incoming edges, use the
    /// identity activation and carry zero bias.
    pub fn new(
        units: Vec<Unit>,
        edges: Vec<Edge>,
        inputs: Vec<String>,
    ) -> Result<Self, NetworkError> {
        if units.is_empty() {
            return Err(NetworkError::NoUnits);
        }
        if inputs.is_empty() {
            return Err(NetworkError::NoInputs);
        }
        let mut name_to_id = BTreeMap::new();
        for (i, unit) in units.iter().enumerate() {
            if !is_valid_identifier(&unit.name) {
                return Err(NetworkError::BadUnitName(unit.name.clone()));
            }
            if name_to_id.insert(unit.name.clone(), i).is_some() {
                return Err(NetworkError::DuplicateUnit(unit.name.clone()));
            }
        }
        let resolve = |name: &str| {
            name_to_id
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownUnit(name.to_string()))
        };
        let mut edge_ids = Vec::with_capacity(edges.len());
        let mut incoming = vec![Vec::new(); units.len()];
        for (i, edge) in edges.iter().enumerate() {
            let from = resolve(&edge.from)?;
            let to = resolve(&edge.to)?;
            edge_ids.push((from, to));
            incoming[to].push(i);
        }
        let mut input_ids = Vec::with_capacity(inputs.len());
        for name in &inputs {
            let id = resolve(name)?;
            if input_ids.contains(&id) {
                return Err(NetworkError::DuplicateInput(name.clone()));
            }
            if !incoming[id].is_empty() {
                return Err(NetworkError::InputHasIncoming(name.clone()));
            }
            if units[id].activation != Activation::Identity {
                return Err(NetworkError::InputNotIdentity(name.clone()));
            }
            if units[id].bias != 0.0 {
                return Err(NetworkError::InputHasBias(name.clone()));
            }
            input_ids.push(id);
        }
        let topo_order = topological_order(units.len(), &edge_ids);
        Ok(Network {
            units,
            edges,
            edge_ids,
            inputs: input_ids,
            incoming,
            name_to_id,
            topo_order,
        })
    }

    /// The number of units.
    pub fn len(&self) -> usize {
        self.units.len()
    }

    /// Is the network empty? (Never true for a constructed network.)
    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// All units, indexed by unit id.
    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    /// All edges, in declaration order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The input unit ids, in declaration order.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// The input unit names, in declaration order.
    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|&i| self.units[i].name.as_str())
    }

    /// Resolve a unit name to its id.
    pub fn unit_id(&self, name: &str) -> Option<usize> {
        self.name_to_id.get(name).copied()
    }

    /// The unit with the given id.
    pub fn unit(&self, id: usize) -> &Unit {
        &self.units[id]
    }

    /// Is this unit an input?
    pub fn is_input(&self, id: usize) -> bool {
        self.inputs.contains(&id)
    }

    /// The incoming connections of a unit as `(source unit, weight)` pairs,
    /// in edge declaration order.
    pub fn incoming(&self, id: usize) -> impl Iterator<Item = (&Unit, f64)> {
        self.incoming[id].iter().map(move |&e| {
            let (from, _) = self.edge_ids[e];
            (&self.units[from], self.edges[e].weight)
        })
    }

    /// Does the connection graph contain no cycle?
    pub fn is_feedforward(&self) -> bool {
        self.topo_order.is_some()
    }

    /// The weighted input a unit receives from a given state, summing its
    /// incoming edges in declaration order and adding the bias last.
    fn local_field(&self, id: usize, state: &[f64]) -> f64 {
        let mut u = 0.0;
        for &e in &self.incoming[id] {
            let (from, _) = self.edge_ids[e];
            u += self.edges[e].weight * state[from];
        }
        u + self.units[id].bias
    }

    /// Compute every unit's activation for one stimulus (one value per
    /// input unit, in input declaration order). The result is indexed by
    /// unit id.
    pub fn evaluate(
        &self,
        stimulus: &[f64],
        cfg: &FixpointConfig,
    ) -> Result<Vec<f64>, NetworkError> {
        if stimulus.len() != self.inputs.len() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.inputs.len(),
                got: stimulus.len(),
            });
        }
        match &self.topo_order {
            Some(order) => Ok(self.evaluate_ordered(stimulus, order)),
            None => self.evaluate_fixpoint(stimulus, cfg),
        }
    }

    /// One pass over an acyclic network in topological order.
    fn evaluate_ordered(&self, stimulus: &[f64], order: &[usize]) -> Vec<f64> {
        let mut state = vec![0.0; self.len()];
        for (&id, &value) in self.inputs.iter().zip(stimulus) {
            state[id] = value;
        }
        for &id in order {
            if !self.is_input(id) {
                state[id] = self.units[id].activation.apply(self.local_field(id, &state));
            }
        }
        state
    }

    /// Synchronous iteration from zero for cyclic networks: every non-input
    /// unit updates simultaneously from the previous sweep's state until no
    /// unit moves by more than the tolerance.
    fn evaluate_fixpoint(
        &self,
        stimulus: &[f64],
        cfg: &FixpointConfig,
    ) -> Result<Vec<f64>, NetworkError> {
        let mut state = vec![0.0; self.len()];
        for (&id, &value) in self.inputs.iter().zip(stimulus) {
            state[id] = value;
        }
        let mut residual = f64::INFINITY;
        for _ in 0..cfg.max_iterations {
            let mut next = state.clone();
            residual = 0.0;
            for id in 0..self.len() {
                if self.is_input(id) {
                    continue;
                }
                next[id] = self.units[id].activation.apply(self.local_field(id, &state));
                residual = residual.max((next[id] - state[id]).abs());
            }
            state = next;
            if residual < cfg.tolerance {
                return Ok(state);
            }
        }
        Err(NetworkError::NoStationaryState {
            iterations: cfg.max_iterations,
            residual,
        })
    }

    /// Evaluate a batch of stimuli; errors name the failing row.
    pub fn evaluate_all(
        &self,
        stimuli: &[Vec<f64>],
        cfg: &FixpointConfig,
    ) -> Result<Vec<Vec<f64>>, NetworkError> {
        stimuli
            .iter()
            .enumerate()
            .map(|(row, s)| self.evaluate(s, cfg).map_err(|e| e.at_row(row)))
            .collect()
    }
}

/// Kahn's algorithm; `Some(order)` iff the graph is acyclic.
fn topological_order(n: usize, edge_ids: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut outgoing = vec![Vec::new(); n];
    for &(from, to) in edge_ids {
        indegree[to] += 1;
        outgoing[from].push(to);
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(id) = queue.pop() {
        order.push(id);
        for &next in &outgoing[id] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                queue.push(next);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Domain labels for a batch of stimuli: `s0`, `s1`, ...
fn stimulus_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// Build a two-valued preferential model from a network and stimuli.
///
/// The domain is the stimuli (labelled `s0`, `s1`, ...). Every unit becomes
/// a concept whose extension holds the stimuli activating it above
/// `threshold`. Each unit named in `focus` also contributes a preference:
/// stimuli with higher activation are more typical (scores compare up to
/// `epsilon`).
pub fn build_two_valued_model(
    network: &Network,
    stimuli: &[Vec<f64>],
    focus: &[String],
    threshold: f64,
    epsilon: f64,
    cfg: &FixpointConfig,
) -> Result<MultiPrefModel, NetworkError> {
    for name in focus {
        if network.unit_id(name).is_none() {
            return Err(NetworkError::UnknownUnit(name.clone()));
        }
    }
    let activations = network.evaluate_all(stimuli, cfg)?;
    let mut model = MultiPrefModel::new(stimulus_labels(stimuli.len()))?;
    for (id, unit) in network.units().iter().enumerate() {
        let extension = (0..stimuli.len())
            .filter(|&row| activations[row][id] > threshold)
            .collect();
        model.set_extension(&unit.name, extension)?;
    }
    for name in focus {
        let id = network.unit_id(name).expect("focus names checked above");
        let scores: Vec<f64> = activations.iter().map(|a| -a[id]).collect();
        let pref = crate::model::PreferenceRelation::with_epsilon(scores, epsilon)?;
        model.set_preference(name, pref)?;
    }
    Ok(model)
}

fn fuzzy_hint(activation: Activation, is_input: bool) -> &'static str {
    if is_input {
        "stimulus values must lie in [0, 1]"
    } else if activation == Activation::Tanh {
        "tanh ranges in (-1, 1); use `tanh_rescaled` or `build_fuzzy_model_rescaling_tanh`"
    } else {
        "the unit's activation must map into [0, 1]"
    }
}

fn build_fuzzy(
    network: &Network,
    stimuli: &[Vec<f64>],
    cfg: &FixpointConfig,
    rescale_tanh: bool,
) -> Result<FuzzyModel, NetworkError> {
    let activations = network.evaluate_all(stimuli, cfg)?;
    let mut model = FuzzyModel::new(stimulus_labels(stimuli.len()))
        .map_err(|_| NetworkError::Model(ModelError::EmptyDomain))?;
    for (id, unit) in network.units().iter().enumerate() {
        let rescale = rescale_tanh && unit.activation == Activation::Tanh;
        let mut degrees = Vec::with_capacity(stimuli.len());
        for (row, a) in activations.iter().enumerate() {
            let value = if rescale { (a[id] + 1.0) / 2.0 } else { a[id] };
            if !(0.0..=1.0).contains(&value) {
                return Err(NetworkError::NotFuzzy {
                    unit: unit.name.clone(),
                    stimulus: row,
                    value,
                    hint: fuzzy_hint(unit.activation, network.is_input(id)),
                });
            }
            degrees.push(value);
        }
        model
            .set_degrees(&unit.name, degrees)
            .expect("lengths and ranges checked above");
    }
    Ok(model)
}

/// Build a fuzzy model from a network and stimuli: every unit becomes a
/// graded concept whose degree on a stimulus is the unit's activation.
/// Fails with a hint if any activation (or stimulus value) leaves `[0, 1]`.
pub fn build_fuzzy_model(
    network: &Network,
    stimuli: &[Vec<f64>],
    cfg: &FixpointConfig,
) -> Result<FuzzyModel, NetworkError> {
    build_fuzzy(network, stimuli, cfg, false)
}

/// Like [`build_fuzzy_model`], but `tanh` units record `(y + 1) / 2` so
/// their degrees land in `[0, 1]`.
pub fn build_fuzzy_model_rescaling_tanh(
    network: &Network,
    stimuli: &[Vec<f64>],
    cfg: &FixpointConfig,
) -> Result<FuzzyModel, NetworkError> {
    build_fuzzy(network, stimuli, cfg, true)
}
