//! Forward and reversed runs on the same input and the cheaper of the two.

use qsrlab::protocol::{best_cost, run_protocol, run_protocol_reversed, ProtocolConfig};
use qsrlab::states::{random_pure, RegisterLayout};

fn main() -> qsrlab::Result<()> {
    let layout = RegisterLayout::new([("R", 2), ("A", 2), ("B", 2), ("C", 2)])?;
    let phi = random_pure(layout, 17);
    let config = ProtocolConfig {
        n: Some(3),
        b: Some(1),
        ..ProtocolConfig::default()
    };
    let fwd = run_protocol(&phi, &config)?;
    let rev = run_protocol_reversed(&phi, &config)?;
    println!(
        "forward:  P = {:.6}, qubits = {}",
        fwd.measured_p, fwd.qubits_sent
    );
    println!(
        "reversed: P = {:.6}, qubits = {}, leakage = {:?}",
        rev.measured_p, rev.qubits_sent, rev.reversal_leakage
    );
    println!("best cost = {}", best_cost(&fwd, &rev));
    Ok(())
}
