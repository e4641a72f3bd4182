use std::collections::BTreeMap;

use super::basic::{dmax, purified_distance};
use super::{Bits, CertificateKind, EntropyResult, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, matrix_function, ComplexMatrix, MatrixFunction};

/// One evaluated point of the smoothing ansatz.
#[derive(Clone, Debug)]
pub struct SmoothingCandidate {
    pub state: ComplexMatrix,
    pub value: f64,
    pub distance: f64,
    /// Mixing weight p in (1 − p)ρ + pτ.
    pub weight: f64,
    /// Ratio cap c of the clipped direction, or `None` when τ = σ.
    pub clip: Option<f64>,
}

fn mix(rho: &ComplexMatrix, tau: &ComplexMatrix, p: f64) -> ComplexMatrix {
    &rho.scale(1.0 - p) + &tau.scale(p)
}

/// Feasible upper bound on min{D_max(ρ′‖σ) : P(ρ′, ρ) ≤ ε}.
///
/// Searches mixtures (1 − p)ρ + pτ where τ is either σ or a clipped copy of
/// ρ, namely σ^{1/2} min(Γ, c) σ^{1/2} normalized, with Γ = σ^{−1/2}ρσ^{−1/2}.
/// For each τ the largest admissible p is found by bisection (the purified
/// distance is nondecreasing along the segment) and `budget` evenly spaced
/// weights up to it are evaluated. ρ itself is always a candidate, so the
/// result never exceeds D_max(ρ‖σ). The certificate is the chosen ρ′; its
/// verified distance is in the solver extras.
pub fn smooth_dmax(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    eps: f64,
    budget: usize,
) -> Result<EntropyResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Parameter(format!(
            "eps must lie in [0, 1), got {eps}"
        )));
    }
    let base = dmax(rho, sigma)?;
    let base_value = match base.value {
        Bits::Finite(v) => v,
        Bits::Infinite => return Ok(base),
    };
    let mut best = SmoothingCandidate {
        state: rho.clone(),
        value: base_value,
        distance: 0.0,
        weight: 0.0,
        clip: None,
    };
    let budget = budget.max(1);
    if eps > 0.0 {
        let mut directions: Vec<(ComplexMatrix, Option<f64>)> = vec![(sigma.clone(), None)];
        let half = matrix_function(sigma, MatrixFunction::Sqrt)?;
        let inv_half = matrix_function(sigma, MatrixFunction::InvSqrtOnSupport)?;
        let gamma = inv_half.matmul(rho).matmul(&inv_half).hermitian_part();
        let ge = eig_hermitian(&gamma)?;
        let (gmin, gmax) = (ge.min().max(0.0), ge.max());
        for j in 0..budget {
            let c = gmin + (gmax - gmin) * (j as f64 + 0.5) / budget as f64;
            let clipped = ge.rebuild(|g| g.clamp(0.0, c));
            let tau = half.matmul(&clipped).matmul(&half).hermitian_part();
            let tr = tau.trace_re();
            if tr > 1e-12 {
                directions.push((tau.scale(1.0 / tr), Some(c)));
            }
        }
        for (tau, clip) in directions {
            let mut consider = |p: f64| -> Result<()> {
                let cand = mix(rho, &tau, p);
                let d = purified_distance(&cand, rho)?;
                if d > eps {
                    return Ok(());
                }
                if let Bits::Finite(v) = dmax(&cand, sigma)?.value {
                    if v < best.value {
                        best = SmoothingCandidate {
                            state: cand,
                            value: v,
                            distance: d,
                            weight: p,
                            clip,
                        };
                    }
                }
                Ok(())
            };
            let p_max = if purified_distance(&tau, rho)? <= eps {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if purified_distance(&mix(rho, &tau, mid), rho)? <= eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            if p_max <= 0.0 {
                continue;
            }
            for k in 1..=budget {
                consider(p_max * k as f64 / budget as f64)?;
            }
        }
    }
    let mut extras = BTreeMap::new();
    extras.insert("purified_distance".to_string(), best.distance);
    extras.insert("mixing_weight".to_string(), best.weight);
    extras.insert("unsmoothed_value".to_string(), base_value);
    if let Some(c) = best.clip {
        extras.insert("clip_level".to_string(), c);
    }
    Ok(EntropyResult {
        value: Bits::Finite(best.value),
        certificate: Some((CertificateKind::SmoothedState, best.state)),
        solver: Some(SolverReport {
            iterations: budget,
            gap: 0.0,
            residual: best.distance,
            extras,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded_rng};

    #[test]
    fn zero_eps_returns_dmax() {
        let mut rng = seeded_rng(6);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 3);
        let s = smooth_dmax(&rho, &sigma, 0.0, 8).unwrap();
        let d = dmax(&rho, &sigma).unwrap();
        assert_eq!(s.value, d.value);
    }

    #[test]
    fn never_exceeds_dmax_and_respects_ball() {
        let mut rng = seeded_rng(7);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 2);
            let sigma = random_density(&mut rng, 2);
            let s = smooth_dmax(&rho, &sigma, 0.1, 8).unwrap();
            let d = dmax(&rho, &sigma).unwrap().value.to_f64();
            assert!(s.value.to_f64() <= d + 1e-12);
            let cert = s.certificate_matrix().unwrap();
            assert!(purified_distance(cert, &rho).unwrap() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn clipping_a_spike_lowers_the_value() {
        let rho = ComplexMatrix::from_real_diag(&[0.9, 0.1]);
        let sigma = ComplexMatrix::from_real_diag(&[0.2, 0.8]);
        let s = smooth_dmax(&rho, &sigma, 0.2, 16).unwrap();
        let d = dmax(&rho, &sigma).unwrap().value.to_f64();
        assert!(s.value.to_f64() < d - 1e-3);
        let cert = s.certificate_matrix().unwrap();
        assert!(purified_distance(cert, &rho).unwrap() <= 0.2);
    }
}
