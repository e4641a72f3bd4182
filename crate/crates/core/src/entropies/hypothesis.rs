use super::{Bits, CertificateKind, EntropyResult, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, support_projector, ComplexMatrix};

/// Type-II errors at or below this count as exact zeros (value +∞).
const TYPE2_ZERO: f64 = 1e-14;
const MAX_BISECTIONS: usize = 200;

/// Projector onto the strictly positive eigenspace of a Hermitian matrix.
/// Eigenvalues within `tol` of zero are left out.
pub fn positive_part_projector(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let e = eig_hermitian(m)?;
    Ok(e.rebuild(|l| if l > tol { 1.0 } else { 0.0 }))
}

struct Probe {
    t: f64,
    proj: ComplexMatrix,
    type1: f64,
}

fn probe(rho: &ComplexMatrix, sigma: &ComplexMatrix, t: f64, scale: f64) -> Result<Probe> {
    let m = rho - &sigma.scale(t);
    let tol = 1e-14 * (scale * (1.0 + t));
    let proj = positive_part_projector(&m, tol)?;
    Ok(Probe {
        t,
        type1: proj.trace_product(rho).re,
        proj,
    })
}

/// D_H^ε(ρ‖σ) = −log min{Tr Πσ : 0 ⪯ Π ⪯ I, Tr Πρ ≥ 1 − ε}.
///
/// Neyman–Pearson structure: the optimum is the projector onto the positive
/// part of ρ − tσ plus a fractional weight on the boundary eigenspace of the
/// critical threshold t. The threshold is found by bisection; the final test
/// mixes the two bracketing projectors so that Tr Πρ = 1 − ε exactly. Once
/// the bracket isolates the critical threshold, the mixture is exactly the
/// boundary-weighted test. ε = 0 returns the support projector of ρ.
pub fn dh_eps(rho: &ComplexMatrix, sigma: &ComplexMatrix, eps: f64) -> Result<EntropyResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Parameter(format!(
            "eps must lie in [0, 1), got {eps}"
        )));
    }
    if rho.rows() != sigma.rows() {
        return Err(Error::Dimension(format!(
            "operands have dimensions {} and {}",
            rho.rows(),
            sigma.rows()
        )));
    }
    let target = 1.0 - eps;
    let n = rho.rows();
    let finish = |pi: ComplexMatrix, report: SolverReport| -> EntropyResult {
        let type2 = pi.trace_product(sigma).re;
        let value = if type2 <= TYPE2_ZERO {
            Bits::Infinite
        } else {
            Bits::Finite(-type2.log2())
        };
        EntropyResult {
            value,
            certificate: Some((CertificateKind::TestOperator, pi)),
            solver: Some(report),
        }
    };

    if eps == 0.0 {
        let pi = support_projector(rho)?;
        let residual = (pi.trace_product(rho).re - 1.0).abs();
        return Ok(finish(
            pi,
            SolverReport {
                residual,
                ..Default::default()
            },
        ));
    }

    // Tests living on ker σ cost nothing.
    let kernel = &ComplexMatrix::identity(n) - &support_projector(sigma)?;
    let free = kernel.trace_product(rho).re;
    if free >= target {
        let pi = kernel.scale(target / free);
        return Ok(finish(pi, SolverReport::default()));
    }

    let scale = rho.max_abs().max(sigma.max_abs()).max(1e-300);
    let mut lo = probe(rho, sigma, 0.0, scale)?;
    if lo.type1 < target {
        // Only happens when ρ carries rounding-level negative directions.
        lo.proj = support_projector(rho)?;
        lo.type1 = lo.proj.trace_product(rho).re;
    }
    let mut t = 1.0;
    let mut hi = probe(rho, sigma, t, scale)?;
    let mut doublings = 0;
    while hi.type1 >= target {
        lo = hi;
        t *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return Err(Error::Convergence {
                iterations: doublings,
                detail: "no threshold drives the type-I success below 1 - eps".into(),
                best_bound: None,
            });
        }
        hi = probe(rho, sigma, t, scale)?;
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let width = hi.t - lo.t;
        if width <= 1e-15 * hi.t.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo.t + hi.t);
        if mid <= lo.t || mid >= hi.t {
            break;
        }
        iterations += 1;
        let p = probe(rho, sigma, mid, scale)?;
        if p.type1 >= target {
            lo = p;
        } else {
            hi = p;
        }
    }

    let spread = lo.type1 - hi.type1;
    let alpha = if spread > 0.0 {
        ((target - hi.type1) / spread).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let pi = &lo.proj.scale(alpha) + &hi.proj.scale(1.0 - alpha);
    let residual = (pi.trace_product(rho).re - target).abs();
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("threshold".to_string(), 0.5 * (lo.t + hi.t));
    extras.insert("boundary_weight".to_string(), alpha);
    Ok(finish(
        pi,
        SolverReport {
            iterations: iterations + doublings,
            gap: hi.t - lo.t,
            residual,
            extras,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_leq, C64};
    use crate::random::{random_density, seeded_rng};

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(v)
    }

    #[test]
    fn identical_states() {
        let mut rng = seeded_rng(10);
        let rho = random_density(&mut rng, 3);
        let r = dh_eps(&rho, &rho, 0.5).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classical_pair() {
        let r = dh_eps(&diag(&[0.7, 0.3]), &diag(&[0.4, 0.6]), 0.25).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-12);
        let pi = r.certificate_matrix().unwrap();
        assert!(pi.max_abs_diff(&diag(&[1.0, 1.0 / 6.0])) < 1e-10);
    }

    #[test]
    fn zero_eps_uses_support_projector() {
        let s = 0.5f64.sqrt();
        let plus = ComplexMatrix::outer(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
        let r = dh_eps(&diag(&[1.0, 0.0]), &plus, 0.0).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_eps() {
        let m = diag(&[0.5, 0.5]);
        assert!(matches!(dh_eps(&m, &m, 1.5), Err(Error::Parameter(_))));
        assert!(matches!(dh_eps(&m, &m, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let r = dh_eps(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.1).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn certificate_is_valid_test() {
        let mut rng = seeded_rng(20);
        for _ in 0..50 {
            let rho = random_density(&mut rng, 4);
            let sigma = random_density(&mut rng, 4);
            let eps = 0.2;
            let r = dh_eps(&rho, &sigma, eps).unwrap();
            let pi = r.certificate_matrix().unwrap();
            assert!(
                operator_leq(&ComplexMatrix::zeros(4, 4), pi, 1e-9)
                    .unwrap()
                    .0
            );
            assert!(
                operator_leq(pi, &ComplexMatrix::identity(4), 1e-9)
                    .unwrap()
                    .0
            );
            let t1 = pi.trace_product(&rho).re;
            assert!(t1 >= 1.0 - eps - 1e-9 && t1 <= 1.0 + 1e-12);
            let v = -pi.trace_product(&sigma).re.log2();
            assert!((v - r.value.to_f64()).abs() < 1e-12);
        }
    }
}
