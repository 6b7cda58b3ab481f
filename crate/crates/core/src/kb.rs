//! Weighted knowledge bases: extraction from networks, weight evaluation,
//! and coherence against fuzzy models.
//!
//! [`extract_kb`] reads a network's connections as defeasible knowledge:
//! each selected unit `k` becomes a weighted block whose inclusions pair the
//! source concepts of its incoming edges with their synaptic weights, plus a
//! `(Top, bias)` entry standing for the always-on bias synapse.
//!
//! A block then scores domain elements. Over a two-valued model, the weight
//! of `x` under concept `C_i` is the sum of the weights of the inclusions
//! whose right-hand side holds at `x` — or negative infinity when `x` is
//! not an instance of `C_i` at all ([`weight_two_valued`]). Over a fuzzy
//! model it is the degree-weighted sum ([`weight_fuzzy`]), which for an
//! extracted block reproduces the unit's local field `u_k + b_k`.
//!
//! Higher weight means more typical, so a weight table induces a preference
//! by negating ([`WeightTable::preference`]). Finally, [`check_coherence`]
//! verifies that a fuzzy model and its extracted knowledge agree: for every
//! block concept and every ordered pair of elements, the degree order and
//! the weight order must not strictly disagree.

use thiserror::Error;

use crate::fuzzy::{fuzzy_eval, FuzzyError, FuzzyLogic, FuzzyModel};
use crate::model::{ModelError, MultiPrefModel, PreferenceRelation, TypicalityMode};
use crate::network::Network;
use crate::syntax::{Concept, KnowledgeBase, WeightedBlock, WeightedInclusion};

/// Errors from knowledge-base extraction and weight evaluation.
#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("the knowledge base has no block for `{0}`")]
    NoBlock(String),
    #[error("element index {0} is outside the domain")]
    ElementOutOfRange(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// Read the selected units of a network as a weighted knowledge base.
///
/// Every unit in `focus` becomes a block named after it. A non-input unit's
/// block lists one inclusion per incoming edge, in edge declaration order,
/// weighted by the synaptic weight, followed by a `(Top, bias)` entry for
/// the bias. Input units yield empty blocks: their activity is given, not
/// derived. The strict and assertion sections stay empty.
pub fn extract_kb(network: &Network, focus: &[String]) -> Result<KnowledgeBase, KbError> {
    let mut kb = KnowledgeBase::new();
    for name in focus {
        let id = network
            .unit_id(name)
            .ok_or_else(|| KbError::UnknownUnit(name.clone()))?;
        let mut block = WeightedBlock::new(name.clone());
        if !network.is_input(id) {
            for (from, weight) in network.incoming(id) {
                block.inclusions.push(WeightedInclusion {
                    rhs: Concept::atomic(&from.name),
                    weight,
                });
            }
            block.inclusions.push(WeightedInclusion {
                rhs: Concept::Top,
                weight: network.unit(id).bias,
            });
        }
        kb.blocks.push(block);
    }
    Ok(kb)
}

/// The two-valued weight of element `x` under a block concept: the sum of
/// the weights of the block's inclusions whose right-hand side holds at
/// `x`, or negative infinity when `x` is not an instance of the concept.
pub fn weight_two_valued(
    model: &MultiPrefModel,
    kb: &KnowledgeBase,
    concept: &str,
    x: usize,
    mode: TypicalityMode,
) -> Result<f64, KbError> {
    if x >= model.len() {
        return Err(KbError::ElementOutOfRange(x));
    }
    let block = kb
        .block(concept)
        .ok_or_else(|| KbError::NoBlock(concept.to_string()))?;
    if !model.eval(&Concept::atomic(concept), mode)?.contains(&x) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut total = 0.0;
    for inc in &block.inclusions {
        if model.eval(&inc.rhs, mode)?.contains(&x) {
            total += inc.weight;
        }
    }
    Ok(total)
}

/// The fuzzy weight of element `x` under a block concept: the sum over the
/// block of each inclusion weight times the degree of its right-hand side
/// at `x`. `Top` has degree 1, so a bias entry contributes its weight
/// unscaled; there is no membership gate and no infinity.
pub fn weight_fuzzy(
    model: &FuzzyModel,
    kb: &KnowledgeBase,
    concept: &str,
    x: usize,
    logic: FuzzyLogic,
    epsilon: f64,
) -> Result<f64, KbError> {
    let block = kb
        .block(concept)
        .ok_or_else(|| KbError::NoBlock(concept.to_string()))?;
    let mut total = 0.0;
    for inc in &block.inclusions {
        total += inc.weight * fuzzy_eval(model, &inc.rhs, x, logic, epsilon)?;
    }
    Ok(total)
}

/// One block concept's weight for every domain element.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub concept: String,
    pub weights: Vec<f64>,
}

impl WeightTable {
    /// Tabulate [`weight_two_valued`] over the whole domain.
    pub fn two_valued(
        model: &MultiPrefModel,
        kb: &KnowledgeBase,
        concept: &str,
        mode: TypicalityMode,
    ) -> Result<Self, KbError> {
        let weights = (0..model.len())
            .map(|x| weight_two_valued(model, kb, concept, x, mode))
            .collect::<Result<_, _>>()?;
        Ok(WeightTable {
            concept: concept.to_string(),
            weights,
        })
    }

    /// Tabulate [`weight_fuzzy`] over the whole domain.
    pub fn fuzzy(
        model: &FuzzyModel,
        kb: &KnowledgeBase,
        concept: &str,
        logic: FuzzyLogic,
        epsilon: f64,
    ) -> Result<Self, KbError> {
        let weights = (0..model.len())
            .map(|x| weight_fuzzy(model, kb, concept, x, logic, epsilon))
            .collect::<Result<_, _>>()?;
        Ok(WeightTable {
            concept: concept.to_string(),
            weights,
        })
    }

    /// The preference the weights induce: higher weight is more typical, so
    /// the score is the negated weight (a negative-infinity weight becomes
    /// an infinitely bad score).
    pub fn preference(&self, epsilon: f64) -> Result<PreferenceRelation, KbError> {
        let scores: Vec<f64> = self.weights.iter().map(|w| -w).collect();
        Ok(PreferenceRelation::with_epsilon(scores, epsilon)?)
    }
}

/// One disagreement between degree order and weight order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceViolation {
    pub concept: String,
    pub x: usize,
    pub y: usize,
    pub degree_x: f64,
    pub degree_y: f64,
    pub weight_x: f64,
    pub weight_y: f64,
}

/// The outcome of [`check_coherence`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub holds: bool,
    pub violations: Vec<CoherenceViolation>,
}

/// Check that a fuzzy model and a weighted knowledge base order the domain
/// the same way.
///
/// For every block concept `C_i` and ordered pair `(x, y)`, membership
/// degree and fuzzy weight must rank the pair consistently:
/// `degree(x) >= degree(y)` exactly when `W_i(x) >= W_i(y)`. A pair is
/// reported when one side holds while the other fails by more than
/// `epsilon`, so rounding-level discrepancies don't count as violations.
pub fn check_coherence(
    model: &FuzzyModel,
    kb: &KnowledgeBase,
    logic: FuzzyLogic,
    epsilon: f64,
) -> Result<CoherenceReport, KbError> {
    let mut violations = Vec::new();
    for block in &kb.blocks {
        let degrees = model
            .degrees(&block.concept)
            .ok_or_else(|| KbError::Fuzzy(FuzzyError::UnknownConcept(block.concept.clone())))?
            .to_vec();
        let weights = WeightTable::fuzzy(model, kb, &block.concept, logic, epsilon)?.weights;
        for x in 0..model.len() {
            for y in 0..model.len() {
                if x == y {
                    continue;
                }
                let (dx, dy) = (degrees[x], degrees[y]);
                let (wx, wy) = (weights[x], weights[y]);
                let degree_up_weight_down = dx >= dy && wx < wy - epsilon;
                let weight_up_degree_down = wx >= wy && dx < dy - epsilon;
                if degree_up_weight_down || weight_up_degree_down {
                    violations.push(CoherenceViolation {
                        concept: block.concept.clone(),
                        x,
                        y,
                        degree_x: dx,
                        degree_y: dy,
                        weight_x: wx,
                        weight_y: wy,
                    });
                }
            }
        }
    }
    Ok(CoherenceReport {
        holds: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StrictOrder;
    use crate::network::{
        build_fuzzy_model, Activation, Edge, FixpointConfig, Unit,
    };
    use crate::syntax::{parse_kb, render_kb, Axiom};
    use std::collections::BTreeSet;

    fn set(ids: &[usize]) -> BTreeSet<usize> {
        ids.iter().copied().collect()
    }

    // ---- extraction -------------------------------------------------------------

    fn two_input_net() -> Network {
        Network::new(
            vec![
                Unit::input("j1"),
                Unit::input("j2"),
                Unit::new("k", Activation::Sigmoid, 0.3),
            ],
            vec![Edge::new("j1", "k", 2.0), Edge::new("j2", "k", -1.5)],
            vec!["j1".into(), "j2".into()],
        )
        .unwrap()
    }

    #[test]
    fn extracts_incoming_edges_then_bias() {
        let kb = extract_kb(&two_input_net(), &["k".into()]).unwrap();
        assert!(kb.strict.is_empty() && kb.assertions.is_empty());
        let block = kb.block("k").unwrap();
        assert_eq!(
            block.inclusions,
            vec![
                WeightedInclusion { rhs: Concept::atomic("j1"), weight: 2.0 },
                WeightedInclusion { rhs: Concept::atomic("j2"), weight: -1.5 },
                WeightedInclusion { rhs: Concept::Top, weight: 0.3 },
            ]
        );
    }

    #[test]
    fn input_units_yield_empty_blocks() {
        let kb = extract_kb(&two_input_net(), &["j1".into(), "k".into()]).unwrap();
        assert!(kb.block("j1").unwrap().inclusions.is_empty());
        assert_eq!(kb.block("k").unwrap().inclusions.len(), 3);
        assert!(matches!(
            extract_kb(&two_input_net(), &["nope".into()]),
            Err(KbError::UnknownUnit(_))
        ));
    }

    #[test]
    fn extraction_round_trips_through_the_file_format() {
        let kb = extract_kb(&two_input_net(), &["j1".into(), "k".into()]).unwrap();
        let text = render_kb(&kb);
        let reparsed = parse_kb(&text).unwrap();
        assert_eq!(kb, reparsed);
    }

    #[test]
    fn every_edge_lands_in_exactly_one_block() {
        let net = Network::new(
            vec![
                Unit::input("a"),
                Unit::input("b"),
                Unit::new("h1", Activation::Sigmoid, 0.1),
                Unit::new("h2", Activation::Sigmoid, -0.2),
                Unit::new("out", Activation::Sigmoid, 0.5),
            ],
            vec![
                Edge::new("a", "h1", 0.4),
                Edge::new("b", "h1", -0.6),
                Edge::new("a", "h2", 1.2),
                Edge::new("h1", "out", 0.9),
                Edge::new("h2", "out", -1.1),
            ],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let focus: Vec<String> = ["h1", "h2", "out"].map(String::from).to_vec();
        let kb = extract_kb(&net, &focus).unwrap();
        let mut from_kb: Vec<(String, String, f64)> = Vec::new();
        for block in &kb.blocks {
            for inc in &block.inclusions {
                if let Concept::Atomic(from) = &inc.rhs {
                    from_kb.push((from.clone(), block.concept.clone(), inc.weight));
                }
            }
        }
        let from_net: Vec<(String, String, f64)> = net
            .edges()
            .iter()
            .map(|e| (e.from.clone(), e.to.clone(), e.weight))
            .collect();
        assert_eq!(from_kb, from_net);
        // Each block also carries exactly one bias entry.
        for block in &kb.blocks {
            let biases = block
                .inclusions
                .iter()
                .filter(|inc| inc.rhs == Concept::Top)
                .count();
            assert_eq!(biases, 1, "{}", block.concept);
        }
    }

    // ---- two-valued weights -------------------------------------------------------

    /// The bird/penguin weighted knowledge base with its six inclusions.
    fn penguin_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        let mut bird = WeightedBlock::new("Bird");
        for (rhs, w) in [("Fly", 20.0), ("Wings", 50.0), ("Feather", 50.0)] {
            bird.inclusions.push(WeightedInclusion {
                rhs: Concept::atomic(rhs),
                weight: w,
            });
        }
        let mut penguin = WeightedBlock::new("Penguin");
        for (rhs, w) in [("Fly", -70.0), ("Black", 50.0), ("Grey", 10.0)] {
            penguin.inclusions.push(WeightedInclusion {
                rhs: Concept::atomic(rhs),
                weight: w,
            });
        }
        kb.blocks.push(bird);
        kb.blocks.push(penguin);
        kb
    }

    /// b is a flying bird; p1 a black penguin; p2 a grey penguin that flies.
    fn penguin_model() -> MultiPrefModel {
        let mut m =
            MultiPrefModel::new(vec!["b".into(), "p1".into(), "p2".into()]).unwrap();
        m.set_extension("Bird", set(&[0, 1, 2])).unwrap();
        m.set_extension("Penguin", set(&[1, 2])).unwrap();
        m.set_extension("Fly", set(&[0, 2])).unwrap();
        m.set_extension("Wings", set(&[0, 1, 2])).unwrap();
        m.set_extension("Feather", set(&[0, 1, 2])).unwrap();
        m.set_extension("Black", set(&[1])).unwrap();
        m.set_extension("Grey", set(&[2])).unwrap();
        m
    }

    #[test]
    fn penguin_weights_match_hand_summation() {
        let kb = penguin_kb();
        let m = penguin_model();
        let w = |concept: &str, x: usize| {
            weight_two_valued(&m, &kb, concept, x, TypicalityMode::PerConcept).unwrap()
        };
        assert_eq!(w("Bird", 0), 120.0);
        assert_eq!(w("Bird", 1), 100.0);
        assert_eq!(w("Bird", 2), 120.0);
        assert_eq!(w("Penguin", 0), f64::NEG_INFINITY);
        assert_eq!(w("Penguin", 1), 50.0);
        assert_eq!(w("Penguin", 2), -60.0);
    }

    #[test]
    fn penguin_weights_prefer_the_black_penguin() {
        let kb = penguin_kb();
        let m = penguin_model();
        let table =
            WeightTable::two_valued(&m, &kb, "Penguin", TypicalityMode::PerConcept).unwrap();
        assert_eq!(table.weights, vec![f64::NEG_INFINITY, 50.0, -60.0]);
        let pref = table.preference(0.0).unwrap();
        assert!(pref.prefers(1, 2)); // p1 before p2
        assert!(pref.prefers(2, 0)); // any instance before the non-instance
        assert!(!pref.prefers(0, 2));
    }

    #[test]
    fn shifting_all_weights_preserves_the_preference() {
        let kb = penguin_kb();
        let m = penguin_model();
        let table =
            WeightTable::two_valued(&m, &kb, "Penguin", TypicalityMode::PerConcept).unwrap();
        let shifted = WeightTable {
            concept: table.concept.clone(),
            weights: table.weights.iter().map(|w| w + 1000.0).collect(),
        };
        let p = table.preference(0.0).unwrap();
        let q = shifted.preference(0.0).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(p.prefers(x, y), q.prefers(x, y));
            }
        }
    }

    #[test]
    fn reports_missing_blocks_and_elements() {
        let kb = penguin_kb();
        let m = penguin_model();
        assert!(matches!(
            weight_two_valued(&m, &kb, "Fish", 0, TypicalityMode::PerConcept),
            Err(KbError::NoBlock(_))
        ));
        assert!(matches!(
            weight_two_valued(&m, &kb, "Bird", 9, TypicalityMode::PerConcept),
            Err(KbError::ElementOutOfRange(9))
        ));
    }

    // ---- fuzzy weights ---------------------------------------------------------

    #[test]
    fn fuzzy_weight_is_the_degree_weighted_sum() {
        let mut m = FuzzyModel::new(vec!["x".into()]).unwrap();
        m.set_degrees("D", vec![0.25]).unwrap();
        let mut kb = KnowledgeBase::new();
        let mut block = WeightedBlock::new("C");
        block.inclusions.push(WeightedInclusion {
            rhs: Concept::atomic("D"),
            weight: 8.0,
        });
        kb.blocks.push(block);
        // Single inclusion: w * degree.
        assert_eq!(
            weight_fuzzy(&m, &kb, "C", 0, FuzzyLogic::Goedel, 0.0).unwrap(),
            2.0
        );
        // A bias entry adds its weight times Top's degree 1.
        kb.blocks[0].inclusions.push(WeightedInclusion {
            rhs: Concept::Top,
            weight: -0.5,
        });
        assert_eq!(
            weight_fuzzy(&m, &kb, "C", 0, FuzzyLogic::Goedel, 0.0).unwrap(),
            1.5
        );
    }

    #[test]
    fn crisp_degrees_reproduce_two_valued_weights_on_instances() {
        let kb = penguin_kb();
        let two = penguin_model();
        let mut fuz = FuzzyModel::new(vec!["b".into(), "p1".into(), "p2".into()]).unwrap();
        for name in ["Bird", "Penguin", "Fly", "Wings", "Feather", "Black", "Grey"] {
            let extension = two.extension(name).unwrap();
            let degrees = (0..3)
                .map(|x| if extension.contains(&x) { 1.0 } else { 0.0 })
                .collect();
            fuz.set_degrees(name, degrees).unwrap();
        }
        for concept in ["Bird", "Penguin"] {
            for x in 0..3 {
                let crisp =
                    weight_two_valued(&two, &kb, concept, x, TypicalityMode::PerConcept)
                        .unwrap();
                if crisp.is_finite() {
                    let graded =
                        weight_fuzzy(&fuz, &kb, concept, x, FuzzyLogic::Goedel, 0.0).unwrap();
                    assert_eq!(crisp, graded, "{concept} at {x}");
                }
            }
        }
    }

    #[test]
    fn fuzzy_weight_of_extracted_block_is_the_local_field() {
        let net = two_input_net();
        let cfg = FixpointConfig::default();
        let stimuli = vec![vec![0.2, 0.9], vec![0.7, 0.1], vec![1.0, 1.0]];
        let kb = extract_kb(&net, &["k".into()]).unwrap();
        let m = build_fuzzy_model(&net, &stimuli, &cfg).unwrap();
        for (row, s) in stimuli.iter().enumerate() {
            let field = 2.0 * s[0] - 1.5 * s[1] + 0.3;
            let w = weight_fuzzy(&m, &kb, "k", row, FuzzyLogic::Goedel, 0.0).unwrap();
            assert!((w - field).abs() < 1e-12, "row {row}: {w} vs {field}");
        }
    }

    // ---- coherence -------------------------------------------------------------

    #[test]
    fn smooth_network_is_coherent_with_its_extracted_knowledge() {
        let net = Network::new(
            vec![
                Unit::input("x1"),
                Unit::input("x2"),
                Unit::new("h", Activation::Sigmoid, -0.4),
                Unit::new("out", Activation::Sigmoid, 0.7),
            ],
            vec![
                Edge::new("x1", "h", 1.3),
                Edge::new("x2", "h", -0.8),
                Edge::new("h", "out", 1.1),
                Edge::new("x1", "out", 0.5),
            ],
            vec!["x1".into(), "x2".into()],
        )
        .unwrap();
        let stimuli: Vec<Vec<f64>> = vec![
            vec![0.1, 0.9],
            vec![0.5, 0.5],
            vec![0.9, 0.2],
            vec![0.3, 0.3],
            vec![0.0, 1.0],
        ];
        let kb = extract_kb(&net, &["h".into(), "out".into()]).unwrap();
        let m = build_fuzzy_model(&net, &stimuli, &FixpointConfig::default()).unwrap();
        let report = check_coherence(&m, &kb, FuzzyLogic::Goedel, 1e-6).unwrap();
        assert!(report.holds, "{:?}", report.violations);
    }

    #[test]
    fn saturated_step_unit_breaks_coherence() {
        // Both stimuli drive the step unit's field positive, so both output
        // exactly 1 — but the fields (and hence the weights) differ.
        let net = Network::new(
            vec![Unit::input("x"), Unit::new("t", Activation::Threshold, 0.0)],
            vec![Edge::new("x", "t", 1.0)],
            vec!["x".into()],
        )
        .unwrap();
        let stimuli = vec![vec![0.2], vec![0.7]];
        let kb = extract_kb(&net, &["t".into()]).unwrap();
        let m = build_fuzzy_model(&net, &stimuli, &FixpointConfig::default()).unwrap();
        assert_eq!(m.degrees("t").unwrap(), &[1.0, 1.0]);
        let report = check_coherence(&m, &kb, FuzzyLogic::Goedel, 1e-6).unwrap();
        assert!(!report.holds);
        let v = &report.violations[0];
        assert_eq!(v.concept, "t");
        assert_eq!((v.degree_x, v.degree_y), (1.0, 1.0));
        assert!((v.weight_x - 0.2).abs() < 1e-12 && (v.weight_y - 0.7).abs() < 1e-12);
    }

    #[test]
    fn single_element_domain_is_trivially_coherent() {
        let net = two_input_net();
        let kb = extract_kb(&net, &["k".into()]).unwrap();
        let m = build_fuzzy_model(&net, &[vec![0.4, 0.6]], &FixpointConfig::default()).unwrap();
        let report = check_coherence(&m, &kb, FuzzyLogic::Goedel, 1e-6).unwrap();
        assert!(report.holds);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn coherence_requires_degrees_for_every_block() {
        let kb = penguin_kb();
        let mut m = FuzzyModel::new(vec!["x".into()]).unwrap();
        m.set_degrees("Bird", vec![1.0]).unwrap();
        // No degrees for Penguin (or the rhs concepts) -> error, not a pass.
        assert!(check_coherence(&m, &kb, FuzzyLogic::Goedel, 0.0).is_err());
    }

    // ---- extracted knowledge end to end ----------------------------------------

    #[test]
    fn extracted_kb_orders_stimuli_like_the_network_does() {
        let net = two_input_net();
        let stimuli = vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.5, 0.5]];
        let kb = extract_kb(&net, &["k".into()]).unwrap();
        let m = build_fuzzy_model(&net, &stimuli, &FixpointConfig::default()).unwrap();
        let table = WeightTable::fuzzy(&m, &kb, "k", FuzzyLogic::Goedel, 0.0).unwrap();
        let from_weights = table.preference(0.0).unwrap();
        let from_degrees = crate::fuzzy::induce_preference(&m, "k", 0.0).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(
                    from_weights.prefers(x, y),
                    from_degrees.prefers(x, y),
                    "({x}, {y})"
                );
            }
        }
    }

    #[test]
    fn rendered_extraction_mentions_typicality_axioms() {
        let kb = extract_kb(&two_input_net(), &["k".into()]).unwrap();
        let text = render_kb(&kb);
        assert!(text.contains("block k:"));
        assert!(text.contains("T(k) <= j1 @ 2"));
        assert!(text.contains("T(k) <= Top @ 0.3"));
        // And the block reconstructs full axioms on demand.
        assert_eq!(
            kb.block("k").unwrap().axiom(0),
            Axiom::weighted("k", Concept::atomic("j1"), 2.0)
        );
    }
}
