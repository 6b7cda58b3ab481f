//! File formats: JSON snapshots for maps, networks, and models, plus CSV
//! readers for stimuli.
//!
//! Snapshots are plain data mirrors of the in-memory types. Loading always
//! re-validates through the owning type's constructor, so a hand-edited
//! file cannot smuggle in an inconsistent structure. Preference scores may
//! be infinite, which JSON numbers cannot express; score lists therefore
//! serialize infinities as the strings `"inf"` and `"-inf"`.
//!
//! Two CSV shapes are supported: labelled rows (`label,v1,v2,...`) grouping
//! stimuli into categories in first-appearance order, and plain numeric
//! rows for network stimuli.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{FuzzyError, FuzzyModel};
use crate::model::{ModelError, MultiPrefModel, PreferenceRelation};
use crate::network::{Edge, Network, NetworkError, Unit};
use crate::som::{Category, CategoryData, SomError, SomMap};
use crate::syntax::is_valid_identifier;

/// Errors from reading or writing files.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("row {row}: first field `{text}` is numeric; the label column is missing")]
    MissingLabel { row: usize, text: String },
    #[error("row {row}: `{text}` is not a valid category label")]
    BadLabel { row: usize, text: String },
    #[error("row {row}, field {field}: `{text}` is not a finite number")]
    BadNumber {
        row: usize,
        field: usize,
        text: String,
    },
    #[error("the snapshot has no membership degrees to build a fuzzy model from")]
    NoDegrees,
}

/// Write any serializable value as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), SnapshotError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Read a JSON file into any deserializable value.
pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, SnapshotError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

// ---- map snapshots ----------------------------------------------------------

/// The serialized form of a [`SomMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomSnapshot {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<Vec<f64>>,
}

impl From<&SomMap> for SomSnapshot {
    fn from(map: &SomMap) -> Self {
        SomSnapshot {
            rows: map.rows(),
            cols: map.cols(),
            weights: map.weights().to_vec(),
        }
    }
}

impl TryFrom<SomSnapshot> for SomMap {
    type Error = SomError;

    fn try_from(snapshot: SomSnapshot) -> Result<Self, SomError> {
        SomMap::from_weights(snapshot.rows, snapshot.cols, snapshot.weights)
    }
}

// ---- network snapshots --------------------------------------------------------

/// The serialized form of a [`Network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub units: Vec<Unit>,
    pub edges: Vec<Edge>,
    pub inputs: Vec<String>,
}

impl From<&Network> for NetworkSnapshot {
    fn from(network: &Network) -> Self {
        NetworkSnapshot {
            units: network.units().to_vec(),
            edges: network.edges().to_vec(),
            inputs: network.input_names().map(String::from).collect(),
        }
    }
}

impl TryFrom<NetworkSnapshot> for Network {
    type Error = NetworkError;

    fn try_from(snapshot: NetworkSnapshot) -> Result<Self, NetworkError> {
        Network::new(snapshot.units, snapshot.edges, snapshot.inputs)
    }
}

// ---- model snapshots ------------------------------------------------------------

/// Score lists admit infinities, which JSON numbers cannot carry; they
/// travel as the strings `"inf"` / `"-inf"`.
mod score_list {
    use serde::de::Error as DeError;
    use serde::ser::Error as SerError;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(scores: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
        let repr: Result<Vec<Repr>, S::Error> = scores
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    Ok(Repr::Number(v))
                } else if v == f64::INFINITY {
                    Ok(Repr::Text("inf".into()))
                } else if v == f64::NEG_INFINITY {
                    Ok(Repr::Text("-inf".into()))
                } else {
                    Err(S::Error::custom("score lists cannot contain NaN"))
                }
            })
            .collect();
        repr?.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(deserializer)?
            .into_iter()
            .map(|r| match r {
                Repr::Number(v) => Ok(v),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(D::Error::custom(format!(
                        "expected a number, \"inf\" or \"-inf\", got `{other}`"
                    ))),
                },
            })
            .collect()
    }
}

/// The serialized form of one preference relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceSnapshot {
    #[serde(with = "score_list")]
    pub scores: Vec<f64>,
    pub epsilon: f64,
}

/// The serialized form of a logical model, two-valued and/or fuzzy.
///
/// Written from a two-valued model it carries extensions and preference
/// scores; written from a fuzzy model it carries membership degrees. Either
/// kind of model can be rebuilt: missing extensions are derived from
/// degrees by a threshold cut, missing preferences by negating degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub elements: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extensions: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub degrees: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub preferences: BTreeMap<String, PreferenceSnapshot>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub roles: BTreeMap<String, Vec<(usize, usize)>>,
}

impl ModelSnapshot {
    /// Capture a two-valued model.
    pub fn from_model(model: &MultiPrefModel) -> Self {
        ModelSnapshot {
            elements: model.labels().to_vec(),
            extensions: model
                .concepts()
                .map(|n| {
                    let ids = model.extension(n).expect("declared concept");
                    (n.to_string(), ids.iter().copied().collect())
                })
                .collect(),
            degrees: BTreeMap::new(),
            preferences: model
                .preferences()
                .map(|(n, p)| {
                    (
                        n.to_string(),
                        PreferenceSnapshot {
                            scores: p.scores().to_vec(),
                            epsilon: p.epsilon(),
                        },
                    )
                })
                .collect(),
            roles: model
                .roles()
                .map(|(n, pairs)| (n.to_string(), pairs.iter().copied().collect()))
                .collect(),
        }
    }

    /// Capture a fuzzy model.
    pub fn from_fuzzy(model: &FuzzyModel) -> Self {
        ModelSnapshot {
            elements: model.labels().to_vec(),
            extensions: BTreeMap::new(),
            degrees: model
                .concepts()
                .map(|n| (n.to_string(), model.degrees(n).expect("declared").to_vec()))
                .collect(),
            preferences: BTreeMap::new(),
            roles: BTreeMap::new(),
        }
    }

    /// Rebuild a two-valued model. Concepts with explicit extensions and
    /// preferences use them; concepts present only as degrees fall back to
    /// the cut `degree > threshold` and the preference "higher degree
    /// first" (compared up to `epsilon`).
    pub fn to_model(&self, threshold: f64, epsilon: f64) -> Result<MultiPrefModel, SnapshotError> {
        let mut model = MultiPrefModel::new(self.elements.clone())?;
        for (name, ids) in &self.extensions {
            model.set_extension(name, ids.iter().copied().collect())?;
        }
        for (name, degrees) in &self.degrees {
            if !self.extensions.contains_key(name) {
                let cut = (0..degrees.len()).filter(|&i| degrees[i] > threshold).collect();
                model.set_extension(name, cut)?;
            }
        }
        for (name, pairs) in &self.roles {
            model.set_role(name, pairs.iter().copied().collect())?;
        }
        for (name, pref) in &self.preferences {
            let relation = PreferenceRelation::with_epsilon(pref.scores.clone(), pref.epsilon)
                .map_err(ModelError::from)?;
            model.set_preference(name, relation)?;
        }
        for (name, degrees) in &self.degrees {
            if !self.preferences.contains_key(name) {
                let scores = degrees.iter().map(|d| -d).collect();
                let relation = PreferenceRelation::with_epsilon(scores, epsilon)
                    .map_err(ModelError::from)?;
                model.set_preference(name, relation)?;
            }
        }
        Ok(model)
    }

    /// Rebuild a fuzzy model from the stored degrees.
    pub fn to_fuzzy(&self) -> Result<FuzzyModel, SnapshotError> {
        if self.degrees.is_empty() {
            return Err(SnapshotError::NoDegrees);
        }
        let mut model = FuzzyModel::new(self.elements.clone())?;
        for (name, degrees) in &self.degrees {
            model.set_degrees(name, degrees.clone())?;
        }
        Ok(model)
    }
}

// ---- CSV stimuli ------------------------------------------------------------

fn parse_field(text: &str, row: usize, field: usize) -> Result<f64, SnapshotError> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(SnapshotError::BadNumber {
            row,
            field,
            text: text.to_string(),
        }),
    }
}

/// Read `label,v1,v2,...` rows from any reader, grouping stimuli into
/// categories in first-appearance order. Row numbers in errors are
/// 1-based.
pub fn read_labeled_csv_from(reader: impl io::Read) -> Result<CategoryData, SnapshotError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let label = record.get(0).unwrap_or("").trim();
        if label.parse::<f64>().is_ok() {
            return Err(SnapshotError::MissingLabel {
                row,
                text: label.to_string(),
            });
        }
        if !is_valid_identifier(label) {
            return Err(SnapshotError::BadLabel {
                row,
                text: label.to_string(),
            });
        }
        let values = (1..record.len())
            .map(|f| parse_field(&record[f], row, f + 1))
            .collect::<Result<Vec<f64>, _>>()?;
        if !groups.contains_key(label) {
            order.push(label.to_string());
        }
        groups.entry(label.to_string()).or_default().push(values);
    }
    let categories = order
        .into_iter()
        .map(|name| {
            let stimuli = groups.remove(&name).expect("grouped above");
            Category::new(name, stimuli)
        })
        .collect();
    Ok(CategoryData::new(categories)?)
}

/// Read labelled stimuli from a CSV file. See [`read_labeled_csv_from`].
pub fn read_labeled_csv(path: impl AsRef<Path>) -> Result<CategoryData, SnapshotError> {
    read_labeled_csv_from(fs::File::open(path)?)
}

/// Read plain numeric rows from any reader. Row numbers in errors are
/// 1-based.
pub fn read_row_csv_from(reader: impl io::Read) -> Result<Vec<Vec<f64>>, SnapshotError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let values = (0..record.len())
            .map(|f| parse_field(&record[f], row, f + 1))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(values);
    }
    Ok(rows)
}

/// Read unlabelled numeric stimuli from a CSV file. See
/// [`read_row_csv_from`].
pub fn read_row_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>, SnapshotError> {
    read_row_csv_from(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StrictOrder;
    use crate::network::{Activation, FixpointConfig};
    use std::collections::BTreeSet;

    fn set(ids: &[usize]) -> BTreeSet<usize> {
        ids.iter().copied().collect()
    }

    #[test]
    fn som_snapshot_round_trips() {
        let map = SomMap::from_weights(
            1,
            2,
            vec![vec![0.25, -1.5], vec![f64::MIN_POSITIVE, 3.0]],
        )
        .unwrap();
        let snapshot = SomSnapshot::from(&map);
        let json = serde_json::to_string(&snapshot).unwrap();
        let back: SomSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(SomMap::try_from(back).unwrap(), map);
    }

    #[test]
    fn som_snapshot_revalidates_on_load() {
        let bad = SomSnapshot {
            rows: 2,
            cols: 2,
            weights: vec![vec![0.0]],
        };
        assert!(matches!(
            SomMap::try_from(bad),
            Err(SomError::BadWeightCount { .. })
        ));
    }

    #[test]
    fn network_snapshot_round_trips_and_revalidates() {
        let net = Network::new(
            vec![
                Unit::input("x"),
                Unit::new("h", Activation::CustomMonotone { slope: 1.5 }, -0.25),
            ],
            vec![Edge::new("x", "h", 0.75)],
            vec!["x".into()],
        )
        .unwrap();
        let snapshot = NetworkSnapshot::from(&net);
        let json = serde_json::to_string_pretty(&snapshot).unwrap();
        let back: NetworkSnapshot = serde_json::from_str(&json).unwrap();
        let rebuilt = Network::try_from(back).unwrap();
        let cfg = FixpointConfig::default();
        assert_eq!(
            net.evaluate(&[0.3], &cfg).unwrap(),
            rebuilt.evaluate(&[0.3], &cfg).unwrap()
        );

        let mut broken = NetworkSnapshot::from(&net);
        broken.edges.push(Edge::new("ghost", "h", 1.0));
        assert!(matches!(
            Network::try_from(broken),
            Err(NetworkError::UnknownUnit(_))
        ));
    }

    #[test]
    fn infinite_scores_survive_json() {
        let mut model = MultiPrefModel::new(vec!["a".into(), "b".into()]).unwrap();
        model.set_extension("C", set(&[0])).unwrap();
        model
            .set_preference(
                "C",
                PreferenceRelation::with_epsilon(vec![0.5, f64::INFINITY], 1e-9).unwrap(),
            )
            .unwrap();
        let snapshot = ModelSnapshot::from_model(&model);
        let json = serde_json::to_string(&snapshot).unwrap();
        assert!(json.contains(r#""inf""#));
        let back: ModelSnapshot = serde_json::from_str(&json).unwrap();
        let rebuilt = back.to_model(0.0, 0.0).unwrap();
        let p = rebuilt.preference("C").unwrap();
        assert_eq!(p.score(1), f64::INFINITY);
        assert_eq!(p.epsilon(), 1e-9);
        assert!(p.prefers(0, 1));
    }

    #[test]
    fn two_valued_model_round_trips() {
        let mut model =
            MultiPrefModel::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        model.set_extension("C", set(&[0, 2])).unwrap();
        model.set_extension("D", set(&[1])).unwrap();
        model
            .set_preference(
                "C",
                PreferenceRelation::with_epsilon(vec![1.0, 0.0, 2.0], 0.0).unwrap(),
            )
            .unwrap();
        model.set_role("r", [(0, 1), (2, 2)].into_iter().collect()).unwrap();
        let snapshot = ModelSnapshot::from_model(&model);
        let json = serde_json::to_string(&snapshot).unwrap();
        let back: ModelSnapshot = serde_json::from_str(&json).unwrap();
        let rebuilt = back.to_model(0.0, 0.0).unwrap();
        assert_eq!(rebuilt.labels(), model.labels());
        assert_eq!(rebuilt.extension("C"), model.extension("C"));
        assert_eq!(rebuilt.extension("D"), model.extension("D"));
        assert_eq!(rebuilt.role("r"), model.role("r"));
        let (p, q) = (model.preference("C").unwrap(), rebuilt.preference("C").unwrap());
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(p.prefers(x, y), q.prefers(x, y));
            }
        }
    }

    #[test]
    fn fuzzy_snapshot_round_trips_and_derives_cuts() {
        let mut fuzzy = FuzzyModel::new(vec!["a".into(), "b".into()]).unwrap();
        fuzzy.set_degrees("C", vec![0.8, 0.2]).unwrap();
        let snapshot = ModelSnapshot::from_fuzzy(&fuzzy);
        let json = serde_json::to_string(&snapshot).unwrap();
        let back: ModelSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_fuzzy().unwrap(), fuzzy);

        // The same snapshot also rebuilds as a two-valued model by cutting
        // the degrees and preferring higher ones.
        let two = back.to_model(0.5, 0.0).unwrap();
        assert_eq!(two.extension("C").unwrap(), &set(&[0]));
        assert!(two.preference("C").unwrap().prefers(0, 1));

        let empty = ModelSnapshot {
            elements: vec!["a".into()],
            extensions: BTreeMap::new(),
            degrees: BTreeMap::new(),
            preferences: BTreeMap::new(),
            roles: BTreeMap::new(),
        };
        assert!(matches!(empty.to_fuzzy(), Err(SnapshotError::NoDegrees)));
    }

    #[test]
    fn snapshot_rejects_nan_scores_and_bad_markers() {
        let err = serde_json::from_str::<PreferenceSnapshot>(
            r#"{"scores": [0.0, "huge"], "epsilon": 0.0}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("inf"));
    }

    // ---- CSV -------------------------------------------------------------

    #[test]
    fn labeled_csv_groups_in_first_appearance_order() {
        let text = "\
B, 1.0, 2.0
A, 0.5, 0.25
B, 3.5, -1.0

A, 0.0, 0.0
";
        let data = read_labeled_csv_from(text.as_bytes()).unwrap();
        let names: Vec<&str> = data.categories().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["B", "A"]);
        assert_eq!(data.category("B").unwrap().stimuli.len(), 2);
        assert_eq!(data.category("A").unwrap().stimuli[0], vec![0.5, 0.25]);
        assert_eq!(data.input_dim(), 2);
    }

    #[test]
    fn labeled_csv_diagnoses_a_missing_label_column() {
        let err = read_labeled_csv_from("1.0, 2.0\n".as_bytes()).unwrap_err();
        match err {
            SnapshotError::MissingLabel { row, text } => {
                assert_eq!(row, 1);
                assert_eq!(text, "1.0");
            }
            other => panic!("expected MissingLabel, got {other:?}"),
        }
    }

    #[test]
    fn labeled_csv_reports_bad_values_with_positions() {
        let err = read_labeled_csv_from("A, 1.0\nB, oops\n".as_bytes()).unwrap_err();
        match err {
            SnapshotError::BadNumber { row, field, text } => {
                assert_eq!((row, field), (2, 2));
                assert_eq!(text, "oops");
            }
            other => panic!("expected BadNumber, got {other:?}"),
        }
        assert!(matches!(
            read_labeled_csv_from("not ok, 1.0\n".as_bytes()),
            Err(SnapshotError::BadLabel { row: 1, .. })
        ));
        // Mixed dimensions surface as category-data validation errors.
        assert!(matches!(
            read_labeled_csv_from("A, 1.0\nA, 1.0, 2.0\n".as_bytes()),
            Err(SnapshotError::Som(SomError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn row_csv_reads_plain_numbers() {
        let rows = read_row_csv_from("0.1, 0.9\n0.4, 0.6\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![vec![0.1, 0.9], vec![0.4, 0.6]]);
        assert!(matches!(
            read_row_csv_from("0.1, x\n".as_bytes()),
            Err(SnapshotError::BadNumber { row: 1, field: 2, .. })
        ));
        assert!(matches!(
            read_row_csv_from("inf, 0.0\n".as_bytes()),
            Err(SnapshotError::BadNumber { row: 1, field: 1, .. })
        ));
    }

    #[test]
    fn files_round_trip_on_disk() {
        let dir = std::env::temp_dir().join(format!("snapshot-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("map.som");
        let map = SomMap::from_weights(1, 1, vec![vec![1.0, 2.0]]).unwrap();
        write_json(&path, &SomSnapshot::from(&map)).unwrap();
        let loaded: SomSnapshot = read_json(&path).unwrap();
        assert_eq!(SomMap::try_from(loaded).unwrap(), map);
        fs::remove_dir_all(&dir).unwrap();
    }
}
