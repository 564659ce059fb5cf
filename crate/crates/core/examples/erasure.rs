//! Erasing a maximally mixed qubit with a purifying memory, at zero heat.
//!
//! cargo run --example erasure

use gptt::symmetry::chi;
use gptt::thermo::{erasure_demo, ThermoConfig};
use gptt::zoo::parse_model_ref;
use nalgebra::DVector;

fn main() -> gptt::Result<()> {
    let q = parse_model_ref("quantum:2")?;
    let mut h = DVector::zeros(q.vector_dim());
    h[1] = 1.0;
    let r = erasure_demo(&chi(&q)?, 1.0, &h, &q, &ThermoConfig::default())?;
    println!("system entropy {:.4} -> {:.4}", r.entropy_before, r.entropy_after);
    println!("memory entropy {:.4} -> {:.4}", r.memory_entropy_before, r.memory_entropy_after);
    println!("S(S|M) {:.4} -> {:.4}", r.conditional_before, r.conditional_after);
    println!("heat to environment {:.2e}, memory-assisted bound {:.4}", r.ledger.delta_e_env, r.memory_bound_rhs);
    for c in r.checks() {
        println!("  {:<22} {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    Ok(())
}
