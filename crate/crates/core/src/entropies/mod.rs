//! One-shot entropic quantities. All logarithms are base 2.

mod basic;
mod conditional;
mod hypothesis;
mod smoothing;
mod spread;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

use crate::linalg::ComplexMatrix;

pub use basic::{
    cond_mutual_information, d_half, dmax, fidelity, fidelity_and_distance, min_entropy,
    mutual_information, purified_distance, relative_entropy, relative_entropy_variance,
    von_neumann, SUPPORT_TOL,
};
pub use conditional::{hmax_cond, hmin_cond, imax, min_trace_dominating, BarrierOptions, TraceSdp};
pub use hypothesis::{dh_eps, positive_part_projector};
pub use smoothing::{smooth_dmax, SmoothingCandidate};
pub use spread::{entanglement_spread, spread_ks, SpreadReport};

/// A value in bits that may be +∞ (support violations, vanishing overlaps).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bits {
    Finite(f64),
    Infinite,
}

impl Bits {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bits::Finite(v) => Some(v),
            Bits::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Bits::Infinite)
    }

    /// As a float, mapping the infinite state to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Finite value or panic; for callers that have already ruled out +∞.
    pub fn expect_finite(self, what: &str) -> f64 {
        self.finite()
            .unwrap_or_else(|| panic!("{what} is unexpectedly infinite"))
    }

    pub fn neg(self) -> Option<f64> {
        self.finite().map(|v| -v)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bits::Finite(v) => write!(f, "{v}"),
            Bits::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bits::Finite(v) => s.serialize_f64(*v),
            Bits::Infinite => s.serialize_str("+inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Bits;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"+inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bits, E> {
                Ok(Bits::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bits, E> {
                Ok(Bits::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bits, E> {
                Ok(Bits::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bits, E> {
                if v == "+inf" {
                    Ok(Bits::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// What a certificate operator certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Test operator 0 ⪯ Π ⪯ I.
    TestOperator,
    /// Projector onto a maximizing eigenvector.
    WitnessProjector,
    /// Optimal normalized marginal σ.
    Marginal,
    /// Smoothed candidate state.
    SmoothedState,
    /// Purification used by a duality route, stored as a column.
    Purification,
}

/// Iteration count, duality gap and related numbers from an iterative solver.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Relative primal–dual gap, or bracket width for bisections.
    pub gap: f64,
    /// Primal feasibility residual or constraint residual.
    pub residual: f64,
    pub extras: BTreeMap<String, f64>,
}

/// Value in bits plus an optional certificate and solver diagnostics.
#[derive(Clone, Debug)]
pub struct EntropyResult {
    pub value: Bits,
    pub certificate: Option<(CertificateKind, ComplexMatrix)>,
    pub solver: Option<SolverReport>,
}

impl EntropyResult {
    pub fn plain(value: Bits) -> Self {
        EntropyResult {
            value,
            certificate: None,
            solver: None,
        }
    }

    pub fn certificate_matrix(&self) -> Option<&ComplexMatrix> {
        self.certificate.as_ref().map(|(_, m)| m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_serialize_round_trip() {
        let s = serde_json::to_string(&[Bits::Finite(0.5), Bits::Infinite]).unwrap();
        assert_eq!(s, "[0.5,\"+inf\"]");
        let back: Vec<Bits> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Bits::Finite(0.5), Bits::Infinite]);
    }
}
