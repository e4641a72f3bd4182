//! Fidelity and the family of relative entropies for a pair of qubit states.

use qsrlab::entropies::{
    d_half, dh_eps, dmax, fidelity, purified_distance, relative_entropy, relative_entropy_variance,
    smooth_dmax,
};
use qsrlab::ComplexMatrix;

fn main() -> qsrlab::Result<()> {
    let rho = ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
    let sigma = ComplexMatrix::from_real_diag(&[0.4, 0.6]);

    println!("F(rho, sigma)      = {:.6}", fidelity(&rho, &sigma)?);
    println!(
        "P(rho, sigma)      = {:.6}",
        purified_distance(&rho, &sigma)?
    );
    println!("D(rho||sigma)      = {}", relative_entropy(&rho, &sigma)?);
    println!(
        "V(rho||sigma)      = {:.6}",
        relative_entropy_variance(&rho, &sigma)?
    );
    println!("D_1/2(rho||sigma)  = {}", d_half(&rho, &sigma)?);
    println!("D_max(rho||sigma)  = {}", dmax(&rho, &sigma)?.value);
    for eps in [0.01, 0.1, 0.3] {
        println!(
            "D_H^{eps}(rho||sigma) = {}",
            dh_eps(&rho, &sigma, eps)?.value
        );
        println!(
            "D_max^{eps}(rho||sigma) <= {}",
            smooth_dmax(&rho, &sigma, eps, 16)?.value
        );
    }

    // a support violation makes D_max infinite
    let pure = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
    let other = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    println!("D_max(|0><0| || |1><1|) = {}", dmax(&pure, &other)?.value);
    Ok(())
}
