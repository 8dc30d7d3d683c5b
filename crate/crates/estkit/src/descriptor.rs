//! JSON form of set descriptors: `{"kind": "L1Ball", "n": 128, "params": {"radius": 1}}`.
//!
//! Dictionary matrices travel as column-major arrays (`data[j·n + i]` is
//! entry `(i, j)`); matrix-valued sets take `d1` and `d2` with `n = d1·d2`.

use estkit_core::{Matrix, SetDescriptor, SetKind};
use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

fn one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Radius {
    #[serde(default = "one")]
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Halfwidth {
    #[serde(default = "one")]
    halfwidth: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sparsity {
    s: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseRadius {
    s: usize,
    #[serde(default = "one")]
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Dictionary {
    /// Number of atoms `N`.
    columns: usize,
    data: Vec<f64>,
    #[serde(default = "one")]
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Points {
    points: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LowRank {
    rank: usize,
    d1: usize,
    d2: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Nuclear {
    #[serde(default = "one")]
    radius: f64,
    d1: usize,
    d2: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    kind: String,
    n: usize,
    #[serde(default)]
    params: Value,
}

fn params<T: DeserializeOwned>(kind: &str, v: Value) -> Result<T, String> {
    let v = if v.is_null() { json!({}) } else { v };
    serde_path_to_error::deserialize(v).map_err(|e| format!("params of {kind}: {}: {}", e.path(), e.inner()))
}

fn from_raw(raw: Raw) -> Result<SetDescriptor, String> {
    let n = raw.n;
    let p = raw.params;
    let kind = match raw.kind.as_str() {
        "EuclideanBall" => SetKind::EuclideanBall { radius: params::<Radius>(&raw.kind, p)?.radius },
        "L1Ball" => SetKind::L1Ball { radius: params::<Radius>(&raw.kind, p)?.radius },
        "Hypercube" => SetKind::Hypercube { halfwidth: params::<Halfwidth>(&raw.kind, p)?.halfwidth },
        "SparseCone" => SetKind::SparseCone { s: params::<Sparsity>(&raw.kind, p)?.s },
        "SparseUnitSet" => SetKind::SparseUnitSet { s: params::<Sparsity>(&raw.kind, p)?.s },
        "ConvexSparse" => {
            let q: SparseRadius = params(&raw.kind, p)?;
            SetKind::ConvexSparse { s: q.s, radius: q.radius }
        }
        "SparseHull" => {
            let q: SparseRadius = params(&raw.kind, p)?;
            SetKind::SparseHull { s: q.s, radius: q.radius }
        }
        "DictionaryHull" => {
            let q: Dictionary = params(&raw.kind, p)?;
            if q.data.len() != n * q.columns {
                return Err(format!(
                    "params of DictionaryHull: data has {} entries, expected n·columns = {}",
                    q.data.len(),
                    n * q.columns
                ));
            }
            let dictionary = Matrix::from_col_major(n, q.columns, &q.data).map_err(|e| e.to_string())?;
            SetKind::DictionaryHull { dictionary, radius: q.radius }
        }
        "FiniteSet" => SetKind::FiniteSet { points: params::<Points>(&raw.kind, p)?.points },
        "LowRankCone" => {
            let q: LowRank = params(&raw.kind, p)?;
            SetKind::LowRankCone { rank: q.rank, d1: q.d1, d2: q.d2 }
        }
        "NuclearBall" => {
            let q: Nuclear = params(&raw.kind, p)?;
            SetKind::NuclearBall { radius: q.radius, d1: q.d1, d2: q.d2 }
        }
        other => return Err(format!("unknown set kind `{other}`")),
    };
    Ok(SetDescriptor::new(kind, n))
}

fn to_raw(desc: &SetDescriptor) -> Raw {
    let params = match &desc.kind {
        SetKind::EuclideanBall { radius } | SetKind::L1Ball { radius } => json!({ "radius": radius }),
        SetKind::Hypercube { halfwidth } => json!({ "halfwidth": halfwidth }),
        SetKind::SparseCone { s } | SetKind::SparseUnitSet { s } => json!({ "s": s }),
        SetKind::ConvexSparse { s, radius } | SetKind::SparseHull { s, radius } => json!({ "s": s, "radius": radius }),
        SetKind::DictionaryHull { dictionary, radius } => {
            json!({ "columns": dictionary.cols(), "data": dictionary.to_col_major(), "radius": radius })
        }
        SetKind::FiniteSet { points } => json!({ "points": points }),
        SetKind::LowRankCone { rank, d1, d2 } => json!({ "rank": rank, "d1": d1, "d2": d2 }),
        SetKind::NuclearBall { radius, d1, d2 } => json!({ "radius": radius, "d1": d1, "d2": d2 }),
    };
    Raw { kind: desc.kind.name().to_string(), n: desc.n, params }
}

/// Serde adapter for [`SetDescriptor`] in the JSON layout above.
#[derive(Debug, Clone, PartialEq)]
pub struct SetJson(pub SetDescriptor);

impl Serialize for SetJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        to_raw(&self.0).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SetJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Raw::deserialize(deserializer)?;
        from_raw(raw).map(SetJson).map_err(D::Error::custom)
    }
}

/// Parse a descriptor from JSON text.
pub fn parse_set(text: &str) -> Result<SetDescriptor, String> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize::<_, SetJson>(&mut de)
        .map(|s| s.0)
        .map_err(|e| format!("set descriptor: {}: {}", e.path(), e.inner()))
}

pub fn set_to_json(desc: &SetDescriptor) -> Value {
    serde_json::to_value(SetJson(desc.clone())).expect("descriptors serialize")
}
