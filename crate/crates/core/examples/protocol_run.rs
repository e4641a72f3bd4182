//! Redistributing C from Alice to Bob: a Bell pair and a random four-qubit
//! state.

use qsrlab::protocol::{run_protocol, ProtocolConfig};
use qsrlab::states::{random_pure, PureVector, RegisterLayout};

fn main() -> qsrlab::Result<()> {
    // R and A trivial, C maximally entangled with B
    let bell = PureVector::maximally_entangled("B", "C", 2);
    let phi = PureVector::basis("R", 1, 0)
        .tensor(&PureVector::basis("A", 1, 0))?
        .tensor(&bell)?;
    let config = ProtocolConfig {
        n: Some(4),
        b: Some(1),
        ..ProtocolConfig::default()
    };
    let t = run_protocol(&phi, &config)?;
    println!(
        "Bell pair: P = {:.3e}, qubits sent = {}, residual = {:.1e}",
        t.measured_p, t.qubits_sent, t.max_residual
    );

    let layout = RegisterLayout::new([("R", 2), ("A", 2), ("B", 2), ("C", 2)])?;
    let phi = random_pure(layout, 5);
    let config = ProtocolConfig {
        n: Some(4),
        b: Some(2),
        ..ProtocolConfig::default()
    };
    let t = run_protocol(&phi, &config)?;
    println!("random input:");
    println!("  k = {:.4}, D_H = {:.4}", t.k, t.dh_value);
    println!("  measured P     = {:.6}", t.measured_p);
    println!("  derived bound  = {:.6}", t.derived_bound);
    println!("  qubits sent    = {}", t.qubits_sent);
    println!("  decode success = {:.6}", t.decode_success_prob);
    for s in &t.steps {
        println!("  {:<24} norm defect {:.1e}", s.step, s.norm_defect);
    }
    Ok(())
}
