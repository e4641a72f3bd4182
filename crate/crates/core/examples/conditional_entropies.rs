//! Conditional min- and max-entropies, I_max and the entanglement spread of
//! a random three-party pure state.

use qsrlab::entropies::{hmax_cond, hmin_cond, imax, spread_ks};
use qsrlab::states::{random_pure, RegisterLayout};

fn main() -> qsrlab::Result<()> {
    let layout = RegisterLayout::new([("R", 2), ("B", 2), ("C", 2)])?;
    let phi = random_pure(layout, 11);

    let cb = phi.marginal(&["C", "B"])?;
    let hmin = hmin_cond(cb.matrix(), 2, 2)?;
    let hmax = hmax_cond(cb.matrix(), 2, 2)?;
    println!("H_min(C|B) = {}", hmin.value);
    println!("H_max(C|B) = {}", hmax.value);
    if let Some(s) = &hmin.solver {
        println!("  solver: {} iterations, gap {:.1e}", s.iterations, s.gap);
    }

    let rc = phi.marginal(&["R", "C"])?;
    println!("I_max(R:C) = {}", imax(rc.matrix(), 2, 2)?.value);

    let spread = spread_ks(&phi, "R", "C")?;
    println!("spread of C = {:.6}", spread.spread);
    println!(
        "k1..k4 = {:?} {:?} {:?} {:?}",
        spread.k1, spread.k2, spread.k3, spread.k4
    );
    Ok(())
}
