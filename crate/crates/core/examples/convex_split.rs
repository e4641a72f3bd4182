//! How fast the convex-split mixture approaches the product of marginals.

use qsrlab::protocol::convex_split_check;
use qsrlab::random::{random_density, seeded_rng};
use qsrlab::states::{QuantumState, RegisterLayout};

fn main() -> qsrlab::Result<()> {
    let mut rng = seeded_rng(3);
    let rho = QuantumState::new(
        RegisterLayout::new([("P", 2), ("Q", 2)])?,
        random_density(&mut rng, 4),
    )?;
    let sigma = random_density(&mut rng, 2);
    println!("{:>3} {:>10} {:>12}", "n", "F^2", "1 - 2^k/n");
    for n in 1..=6 {
        let c = convex_split_check(&rho, "Q", &sigma, n, None)?;
        println!("{n:>3} {:>10.6} {:>12.6}", c.fidelity_sq, c.lower_bound);
    }
    Ok(())
}
