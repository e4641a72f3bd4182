//! D_H^eps of n copies against n times the relative entropy.

use qsrlab::verify::asymptotic_sweep;
use qsrlab::ComplexMatrix;

fn main() -> qsrlab::Result<()> {
    let rho = ComplexMatrix::from_real_diag(&[0.7, 0.3]);
    let sigma = ComplexMatrix::from_real_diag(&[0.4, 0.6]);
    let r = asymptotic_sweep(&rho, &sigma, 0.2, 8)?;
    println!(
        "D = {:.6}, V = {:.6}, envelope c = {:.4}",
        r.relative_entropy, r.variance, r.c
    );
    println!("{:>3} {:>10} {:>10} {:>10}", "n", "D_H", "nD", "LP");
    for p in &r.points {
        println!(
            "{:>3} {:>10.5} {:>10.5} {:>10}",
            p.n,
            p.value,
            p.reference,
            p.lp_oracle.map_or("-".into(), |v| format!("{v:.5}"))
        );
    }
    println!("max LP deviation {:?}, pass {}", r.lp_max_deviation, r.pass);
    Ok(())
}
