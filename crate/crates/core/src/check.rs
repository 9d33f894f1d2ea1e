//! Recorded inequality checks.
//!
//! Every verdict in a report is a [`Check`]: the two sides, the relation,
//! and the tolerance, so the verdict can be recomputed from stored data.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub claim: String,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    pub relation: Relation,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    pub tolerance: f64,
    /// Signed slack in the direction of the relation; negative on failure.
    #[serde(with = "extended_f64")]
    pub margin: f64,
    pub pass: bool,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Lt => lhs < rhs + tol,
            Relation::Ge => lhs + tol >= rhs,
            Relation::Gt => lhs + tol > rhs,
            Relation::Eq => (lhs - rhs).abs() <= tol || lhs == rhs,
        }
    }

    fn margin(self, lhs: f64, rhs: f64) -> f64 {
        if lhs == rhs {
            return 0.0;
        }
        match self {
            Relation::Le | Relation::Lt => rhs - lhs,
            Relation::Ge | Relation::Gt => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        }
    }
}

impl Check {
    pub fn new(
        claim: impl Into<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            claim: claim.into(),
            lhs,
            relation,
            rhs,
            tolerance,
            margin: relation.margin(lhs, rhs),
            pass: relation.holds(lhs, rhs, tolerance),
        }
    }

    pub fn le(claim: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(claim, lhs, Relation::Le, rhs, tolerance)
    }

    pub fn lt(claim: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::new(claim, lhs, Relation::Lt, rhs, 0.0)
    }

    pub fn ge(claim: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(claim, lhs, Relation::Ge, rhs, tolerance)
    }

    pub fn gt(claim: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::new(claim, lhs, Relation::Gt, rhs, 0.0)
    }

    pub fn eq(claim: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(claim, lhs, Relation::Eq, rhs, tolerance)
    }

    /// Boolean fact recorded as `lhs == 1`.
    pub fn flag(claim: impl Into<String>, holds: bool) -> Self {
        Self::eq(claim, if holds { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    /// Whether the stored verdict agrees with the stored sides.
    pub fn is_consistent(&self) -> bool {
        self.pass == self.relation.holds(self.lhs, self.rhs, self.tolerance)
    }
}

/// JSON has no infinities; they are written as the strings `"inf"` / `"-inf"`.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {s:?}"))),
            },
        }
    }
}
