//! JSON interchange: schema tag, rationals as `"p/q"`, complex numbers as `[re, im]`.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qarith::{ExponentTuple, HybridDims};
use crate::qlinalg::{StateVector, C64};
use crate::states::StateSpec;
use crate::strategy::{Rational, TestPartition, TestSubset};

pub const SCHEMA: &str = "qudit-verify/1";

pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}/1", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}")))?;
    let q: BigInt = q.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}")))?;
    if q == BigInt::from(0) {
        return invalid(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(p, q))
}

pub fn complex_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn check_schema(schema: &Option<String>) -> Result<()> {
    match schema.as_deref() {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => invalid(format!("unsupported schema {other:?}, expected {SCHEMA:?}")),
    }
}

/// A state description as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(flatten)]
    pub spec: StateSpec,
}

pub fn parse_state_spec(json: &str) -> Result<StateSpec> {
    let doc: StateDocument =
        serde_json::from_str(json).map_err(|e| Error::InvalidArgument(format!("state document: {e}")))?;
    check_schema(&doc.schema)?;
    Ok(doc.spec)
}

pub fn state_spec_to_json(spec: &StateSpec) -> String {
    serde_json::to_string_pretty(&StateDocument { schema: Some(SCHEMA.into()), spec: spec.clone() })
        .expect("state specs always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDocument {
    pub schema: String,
    pub dims: Vec<usize>,
    pub subsets: Vec<TestSubset>,
    pub weights: Vec<String>,
}

impl From<&TestPartition> for PartitionDocument {
    fn from(p: &TestPartition) -> Self {
        Self {
            schema: SCHEMA.into(),
            dims: p.dims.dims().to_vec(),
            subsets: p.subsets.clone(),
            weights: p.weights.iter().map(rational_to_string).collect(),
        }
    }
}

impl TryFrom<PartitionDocument> for TestPartition {
    type Error = Error;
    fn try_from(doc: PartitionDocument) -> Result<Self> {
        check_schema(&Some(doc.schema))?;
        let p = TestPartition {
            dims: HybridDims::new(doc.dims)?,
            subsets: doc.subsets,
            weights: doc.weights.iter().map(|w| parse_rational(w)).collect::<Result<_>>()?,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn partition_to_json(p: &TestPartition) -> String {
    serde_json::to_string_pretty(&PartitionDocument::from(p)).expect("partitions always serialize")
}

pub fn partition_from_json(json: &str) -> Result<TestPartition> {
    let doc: PartitionDocument =
        serde_json::from_str(json).map_err(|e| Error::InvalidArgument(format!("partition document: {e}")))?;
    doc.try_into()
}

/// Amplitudes as CSV: `index,label,re,im` with big-endian labels.
pub fn amplitudes_csv(psi: &StateVector) -> String {
    let mut out = String::from("index,label,re,im\n");
    for (i, a) in psi.amplitudes.iter().enumerate() {
        let label: Vec<String> = psi.dims.digits(i).iter().map(usize::to_string).collect();
        out.push_str(&format!("{i},{},{},{}\n", label.join(" "), a.re, a.im));
    }
    out
}

/// Sorted exponent tuples as plain integer arrays.
pub fn tuples_json(ts: &[ExponentTuple]) -> Vec<Vec<usize>> {
    ts.iter().map(|t| t.0.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{family_partition, rat};

    #[test]
    fn rational_round_trip() {
        for r in [rat(3, 7), rat(-2, 5), rat(4, 1)] {
            assert_eq!(parse_rational(&rational_to_string(&r)).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn state_round_trip() {
        let spec = StateSpec::GhzLikeQudit { n: 3, d: 3, thetas: vec![0.4, 0.9] };
        assert_eq!(parse_state_spec(&state_spec_to_json(&spec)).unwrap(), spec);
        assert!(parse_state_spec(r#"{"family":"psi1","schema":"other/2"}"#).is_err());
        assert_eq!(parse_state_spec(r#"{"family":"psi1"}"#).unwrap(), StateSpec::Psi1);
    }

    #[test]
    fn partition_round_trip() {
        let p = family_partition(&StateSpec::Ghz { n: 3, d: 2 }).unwrap();
        let json = partition_to_json(&p);
        let back = partition_from_json(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(partition_to_json(&back), json);
    }
}
