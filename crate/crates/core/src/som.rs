//! Self-organising maps and the preferential models they induce.
//!
//! A [`SomMap`] is a grid of units, each holding a weight vector in input
//! space. Training ([`train_som`]) moves the weights toward the data with
//! the classic recipe: per-epoch exponential decay of learning rate and
//! neighbourhood radius, a Gaussian neighbourhood around each stimulus's
//! best-matching unit, and a seeded shuffle of the stimuli every epoch.
//!
//! After training, labelled stimuli ([`CategoryData`]) induce a logical
//! model ([`build_som_model`]): the domain collects the stimuli, the
//! best-matching-unit weight vectors, and any extra probe points; each
//! category `C` becomes a concept whose membership and typicality are both
//! governed by the *relative distance*
//!
//! ```text
//! rd(y, C) = min_{u in BMU(C)} ||y - w_u||  /  max_{x in C} ||x - w_bmu(x)||
//! ```
//!
//! An element belongs to `C` when `rd(y, C) <= 1`, and is more typical the
//! smaller its relative distance. A defeasible inclusion between two
//! categories can then be model-checked, and
//! [`check_category_inclusion`] also reports the summary statistic
//! `max_{x in C_i} rd(w_bmu(x), C_j)` alongside the authoritative verdict.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    CheckReport, ModelError, MultiPrefModel, PreferenceRelation, TypicalityMode,
};
use crate::syntax::{is_valid_identifier, Axiom, Concept};

/// Errors from map construction, training, or model building.
#[derive(Debug, Error)]
pub enum SomError {
    #[error("a map needs at least one unit and one input dimension")]
    EmptyMap,
    #[error("a {rows}x{cols} map needs {} weight vectors, got {got}", rows * cols)]
    BadWeightCount { rows: usize, cols: usize, got: usize },
    #[error("expected vectors of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training data needs at least one category")]
    NoCategories,
    #[error("category `{0}` has no stimuli")]
    EmptyCategory(String),
    #[error("`{0}` is not a valid category name (want letters, digits, `_`, not starting with a digit)")]
    BadCategoryName(String),
    #[error("duplicate category `{0}`")]
    DuplicateCategory(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Euclidean distance between two equal-length vectors.
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A rectangular grid of units with one weight vector each.
#[derive(Debug, Clone, PartialEq)]
pub struct SomMap {
    rows: usize,
    cols: usize,
    input_dim: usize,
    /// Row-major: unit `(r, c)` is at index `r * cols + c`.
    weights: Vec<Vec<f64>>,
}

impl SomMap {
    /// Assemble a map from explicit weight vectors (row-major).
    pub fn from_weights(
        rows: usize,
        cols: usize,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self, SomError> {
        if rows == 0 || cols == 0 || weights.is_empty() {
            return Err(SomError::EmptyMap);
        }
        if weights.len() != rows * cols {
            return Err(SomError::BadWeightCount {
                rows,
                cols,
                got: weights.len(),
            });
        }
        let input_dim = weights[0].len();
        if input_dim == 0 {
            return Err(SomError::EmptyMap);
        }
        if let Some(w) = weights.iter().find(|w| w.len() != input_dim) {
            return Err(SomError::DimensionMismatch {
                expected: input_dim,
                got: w.len(),
            });
        }
        Ok(SomMap {
            rows,
            cols,
            input_dim,
            weights,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// The number of units.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// All weight vectors, row-major.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// The weight vector of one unit.
    pub fn weight(&self, unit: usize) -> &[f64] {
        &self.weights[unit]
    }

    /// The grid coordinates of a unit index.
    pub fn position(&self, unit: usize) -> (usize, usize) {
        (unit / self.cols, unit % self.cols)
    }

    /// Squared Euclidean distance between two units on the grid.
    fn grid_distance2(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.position(a);
        let (rb, cb) = self.position(b);
        let dr = ra as f64 - rb as f64;
        let dc = ca as f64 - cb as f64;
        dr * dr + dc * dc
    }
}

/// The unit whose weight vector is nearest to `x`; ties break toward the
/// lowest unit index.
pub fn best_matching_unit(map: &SomMap, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (u, w) in map.weights.iter().enumerate() {
        let d = euclidean(x, w);
        if d < best_d {
            best_d = d;
            best = u;
        }
    }
    best
}

/// One named class of training stimuli.
#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub name: String,
    pub stimuli: Vec<Vec<f64>>,
}

impl Category {
    pub fn new(name: impl Into<String>, stimuli: Vec<Vec<f64>>) -> Self {
        Category {
            name: name.into(),
            stimuli,
        }
    }
}

/// Validated labelled training data: uniquely named, non-empty categories
/// of equal-dimension stimuli.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryData {
    categories: Vec<Category>,
    input_dim: usize,
}

impl CategoryData {
    pub fn new(categories: Vec<Category>) -> Result<Self, SomError> {
        if categories.is_empty() {
            return Err(SomError::NoCategories);
        }
        let mut seen = BTreeSet::new();
        for cat in &categories {
            if !is_valid_identifier(&cat.name) {
                return Err(SomError::BadCategoryName(cat.name.clone()));
            }
            if !seen.insert(cat.name.clone()) {
                return Err(SomError::DuplicateCategory(cat.name.clone()));
            }
            if cat.stimuli.is_empty() {
                return Err(SomError::EmptyCategory(cat.name.clone()));
            }
        }
        let input_dim = categories[0].stimuli[0].len();
        if input_dim == 0 {
            return Err(SomError::EmptyMap);
        }
        for cat in &categories {
            if let Some(x) = cat.stimuli.iter().find(|x| x.len() != input_dim) {
                return Err(SomError::DimensionMismatch {
                    expected: input_dim,
                    got: x.len(),
                });
            }
        }
        Ok(CategoryData {
            categories,
            input_dim,
        })
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, name: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Every stimulus of every category, in declaration order.
    pub fn all_stimuli(&self) -> impl Iterator<Item = &[f64]> {
        self.categories
            .iter()
            .flat_map(|c| c.stimuli.iter().map(Vec::as_slice))
    }
}

/// Hyperparameters for [`train_som`]. Learning rate and radius both decay
/// exponentially per epoch: `value(t) = initial * exp(-t / time_constant)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub initial_radius: f64,
    pub rate_time_constant: f64,
    pub radius_time_constant: f64,
    pub seed: u64,
}

impl TrainingConfig {
    /// Sensible defaults for a grid: learning rate 0.5, initial radius half
    /// the longer side, rate decaying over half the epochs, radius decaying
    /// to about one unit by the final epoch.
    pub fn for_grid(rows: usize, cols: usize, epochs: usize, seed: u64) -> Self {
        let radius = (rows.max(cols) as f64 / 2.0).max(1.0);
        let epochs_f = (epochs as f64).max(1.0);
        let radius_tc = if radius > 1.0 {
            epochs_f / radius.ln()
        } else {
            epochs_f
        };
        TrainingConfig {
            epochs,
            initial_learning_rate: 0.5,
            initial_radius: radius,
            rate_time_constant: epochs_f / 2.0,
            radius_time_constant: radius_tc,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SomError> {
        if !(self.initial_learning_rate > 0.0) {
            return Err(SomError::InvalidConfig("learning rate must be positive"));
        }
        if !(self.initial_radius > 0.0) {
            return Err(SomError::InvalidConfig("radius must be positive"));
        }
        if !(self.rate_time_constant > 0.0) || !(self.radius_time_constant > 0.0) {
            return Err(SomError::InvalidConfig("time constants must be positive"));
        }
        Ok(())
    }
}

/// A random initial map whose weights straddle the data: each component is
/// placed just outside the observed range of its dimension, on a random
/// side, so training has to pull every unit toward the clusters.
pub fn random_initial_map(
    rows: usize,
    cols: usize,
    data: &CategoryData,
    rng: &mut impl Rng,
) -> Result<SomMap, SomError> {
    if rows == 0 || cols == 0 {
        return Err(SomError::EmptyMap);
    }
    let dim = data.input_dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for x in data.all_stimuli() {
        for d in 0..dim {
            lo[d] = lo[d].min(x[d]);
            hi[d] = hi[d].max(x[d]);
        }
    }
    let mut weights = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let mut w = Vec::with_capacity(dim);
        for d in 0..dim {
            let span = (hi[d] - lo[d]).max(0.0);
            let span = if span > 0.0 { span } else { 1.0 };
            let offset = (0.05 + 0.45 * rng.gen::<f64>()) * span;
            let value = if rng.gen::<bool>() {
                hi[d] + offset
            } else {
                lo[d] - offset
            };
            w.push(value);
        }
        weights.push(w);
    }
    SomMap::from_weights(rows, cols, weights)
}

/// Run the training epochs on an existing map, in place.
pub fn train_map(
    map: &mut SomMap,
    data: &CategoryData,
    config: &TrainingConfig,
    rng: &mut impl Rng,
) -> Result<(), SomError> {
    config.validate()?;
    if map.input_dim != data.input_dim() {
        return Err(SomError::DimensionMismatch {
            expected: map.input_dim,
            got: data.input_dim(),
        });
    }
    let mut stimuli: Vec<&[f64]> = data.all_stimuli().collect();
    for epoch in 0..config.epochs {
        let t = epoch as f64;
        let rate = config.initial_learning_rate * (-t / config.rate_time_constant).exp();
        let sigma = (config.initial_radius * (-t / config.radius_time_constant).exp()).max(1e-9);
        let two_sigma2 = 2.0 * sigma * sigma;
        stimuli.shuffle(rng);
        for x in &stimuli {
            let bmu = best_matching_unit(map, x);
            for u in 0..map.len() {
                let h = (-map.grid_distance2(u, bmu) / two_sigma2).exp();
                let step = rate * h;
                if step < 1e-12 {
                    continue;
                }
                let w = &mut map.weights[u];
                for d in 0..map.input_dim {
                    w[d] += step * (x[d] - w[d]);
                }
            }
        }
    }
    Ok(())
}

/// Initialise a map from the configured seed and train it on the data.
pub fn train_som(
    data: &CategoryData,
    rows: usize,
    cols: usize,
    config: &TrainingConfig,
) -> Result<SomMap, SomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut map = random_initial_map(rows, cols, data, &mut rng)?;
    train_map(&mut map, data, config, &mut rng)?;
    Ok(map)
}

/// Mean distance from each stimulus to its best-matching unit's weights.
pub fn quantization_error(map: &SomMap, data: &CategoryData) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for x in data.all_stimuli() {
        total += euclidean(x, map.weight(best_matching_unit(map, x)));
        count += 1;
    }
    total / count as f64
}

/// A category's footprint on a trained map: its stimuli's best-matching
/// units and the worst stimulus-to-unit distance (the denominator of every
/// relative distance to this category).
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryGeometry {
    pub bmus: BTreeSet<usize>,
    pub max_distance: f64,
}

impl CategoryGeometry {
    pub fn of(map: &SomMap, category: &Category) -> Self {
        let mut bmus = BTreeSet::new();
        let mut max_distance = 0.0f64;
        for x in &category.stimuli {
            let bmu = best_matching_unit(map, x);
            bmus.insert(bmu);
            max_distance = max_distance.max(euclidean(x, map.weight(bmu)));
        }
        CategoryGeometry { bmus, max_distance }
    }

    /// The relative distance of a point to this category: nearest distance
    /// to one of the category's units, normalised by the category's worst
    /// in-category distance. When that denominator is zero (every stimulus
    /// sits exactly on its unit), the relative distance is `0` on the units
    /// themselves and infinite elsewhere.
    pub fn relative_distance(&self, map: &SomMap, y: &[f64]) -> f64 {
        let nearest = self
            .bmus
            .iter()
            .map(|&u| euclidean(y, map.weight(u)))
            .fold(f64::INFINITY, f64::min);
        if self.max_distance > 0.0 {
            nearest / self.max_distance
        } else if nearest == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// A preferential model read off a trained map, plus the bookkeeping that
/// ties domain elements back to stimuli and units.
#[derive(Debug, Clone)]
pub struct SomModel {
    pub model: MultiPrefModel,
    /// The input-space coordinates of each domain element.
    pub points: Vec<Vec<f64>>,
    /// Per category, the domain ids of its best-matching units' weight
    /// vectors.
    pub bmu_elements: BTreeMap<String, BTreeSet<usize>>,
    /// Per category, the domain ids of its training stimuli.
    pub stimulus_elements: BTreeMap<String, BTreeSet<usize>>,
    /// Per category, the relative-distance denominator.
    pub max_distances: BTreeMap<String, f64>,
    /// Domain ids of the extra probe points, in input order.
    pub extra_elements: Vec<usize>,
    /// The membership cut: an element belongs to a category when its
    /// relative distance is at most this.
    pub rd_max: f64,
}

/// Build the preferential model of a trained map.
///
/// The domain holds every training stimulus, every best-matching unit's
/// weight vector, and the `extra` probe points, deduplicated bitwise (first
/// label wins). Each category becomes a concept: extension = elements with
/// relative distance at most 1, preference = ascending relative distance
/// (compared up to `epsilon`).
pub fn build_som_model(
    map: &SomMap,
    data: &CategoryData,
    extra: &[Vec<f64>],
    epsilon: f64,
) -> Result<SomModel, SomError> {
    if map.input_dim != data.input_dim() {
        return Err(SomError::DimensionMismatch {
            expected: map.input_dim,
            got: data.input_dim(),
        });
    }
    if let Some(x) = extra.iter().find(|x| x.len() != map.input_dim) {
        return Err(SomError::DimensionMismatch {
            expected: map.input_dim,
            got: x.len(),
        });
    }

    let mut key_to_id: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut intern = |label: String, point: &[f64]| -> usize {
        let key: Vec<u64> = point.iter().map(|v| v.to_bits()).collect();
        *key_to_id.entry(key).or_insert_with(|| {
            labels.push(label);
            points.push(point.to_vec());
            labels.len() - 1
        })
    };

    let mut stimulus_elements: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for cat in data.categories() {
        let ids = cat
            .stimuli
            .iter()
            .enumerate()
            .map(|(i, x)| intern(format!("{}:{i}", cat.name), x))
            .collect();
        stimulus_elements.insert(cat.name.clone(), ids);
    }

    let geometries: BTreeMap<String, CategoryGeometry> = data
        .categories()
        .iter()
        .map(|cat| (cat.name.clone(), CategoryGeometry::of(map, cat)))
        .collect();

    let mut bmu_elements: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for cat in data.categories() {
        let ids = geometries[&cat.name]
            .bmus
            .iter()
            .map(|&u| {
                let (r, c) = map.position(u);
                intern(format!("bmu_r{r}c{c}"), map.weight(u))
            })
            .collect();
        bmu_elements.insert(cat.name.clone(), ids);
    }

    let extra_elements: Vec<usize> = extra
        .iter()
        .enumerate()
        .map(|(i, x)| intern(format!("extra:{i}"), x))
        .collect();

    let rd_max = 1.0;
    let mut model = MultiPrefModel::new(labels)?;
    for cat in data.categories() {
        let geometry = &geometries[&cat.name];
        let rd: Vec<f64> = points
            .iter()
            .map(|p| geometry.relative_distance(map, p))
            .collect();
        let extension = (0..points.len())
            .filter(|&i| rd[i] <= rd_max + epsilon)
            .collect();
        model.set_extension(&cat.name, extension)?;
        model.set_preference(&cat.name, PreferenceRelation::with_epsilon(rd, epsilon)?)?;
    }

    Ok(SomModel {
        model,
        points,
        bmu_elements,
        stimulus_elements,
        max_distances: geometries
            .into_iter()
            .map(|(name, g)| (name, g.max_distance))
            .collect(),
        extra_elements,
        rd_max,
    })
}

/// The summary statistic for `lhs -> rhs`: the worst relative distance to
/// `rhs` over the best-matching units of `lhs`.
pub fn inclusion_statistic(som: &SomModel, lhs: &str, rhs: &str) -> Result<f64, SomError> {
    let bmus = som
        .bmu_elements
        .get(lhs)
        .ok_or_else(|| SomError::UnknownCategory(lhs.to_string()))?;
    let pref = som
        .model
        .preference(rhs)
        .ok_or_else(|| SomError::UnknownCategory(rhs.to_string()))?;
    Ok(bmus
        .iter()
        .map(|&id| pref.score(id))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// The verdict of checking a defeasible inclusion between two categories.
#[derive(Debug, Clone)]
pub struct CategoryCheck {
    /// The authoritative model-check of `T(lhs) <= rhs`.
    pub report: CheckReport,
    /// The summary statistic [`inclusion_statistic`].
    pub statistic: f64,
    /// The cut the statistic is compared against.
    pub statistic_threshold: f64,
    /// Whether the statistic alone would accept the inclusion.
    pub statistic_holds: bool,
}

/// Check the defeasible inclusion `T(lhs) <= rhs` by model checking, and
/// report the summary statistic alongside.
pub fn check_category_inclusion(
    som: &SomModel,
    lhs: &str,
    rhs: &str,
    epsilon: f64,
) -> Result<CategoryCheck, SomError> {
    for name in [lhs, rhs] {
        if som.model.extension(name).is_none() {
            return Err(SomError::UnknownCategory(name.to_string()));
        }
    }
    let axiom = Axiom::Typicality {
        lhs: Concept::typ(Concept::atomic(lhs)),
        rhs: Concept::atomic(rhs),
        weight: None,
    };
    let report = som.model.check(&axiom, TypicalityMode::PerConcept)?;
    let statistic = inclusion_statistic(som, lhs, rhs)?;
    Ok(CategoryCheck {
        report,
        statistic,
        statistic_threshold: som.rd_max,
        statistic_holds: statistic <= som.rd_max + epsilon,
    })
}
