//! Rényi, relative and bipartite entropies, and a random audit of
//! measurement-entropy monotonicity.
//!
//! cargo run --example entropies

use gptt::gpt::StateVec;
use gptt::hilbert::{CVec, C64};
use gptt::random::{random_state, rng_from_seed};
use gptt::symmetry::chi;
use gptt::thermo::{bipartite_entropies, entropy, monotone_audit, relative_entropy};
use gptt::zoo::parse_model_ref;

fn main() -> gptt::Result<()> {
    let mut rng = rng_from_seed(11);
    let q = parse_model_ref("quantum:3")?;
    let rho = random_state(&mut rng, &q);
    for alpha in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
        println!("S_{alpha:<4} = {:.5}", entropy(&rho, alpha)?);
    }
    println!("S(rho || chi) = {:.5}", relative_entropy(&rho, &chi(&q)?)?.value());

    let audit = monotone_audit(&mut rng, &rho, 1.0, 200)?;
    println!("monotone audit over {} tests: pass {} (smallest gap {:.2e})", audit.trials, audit.pass, audit.min_measurement_gap);

    let qq = parse_model_ref("quantum:2*quantum:2")?;
    let h = C64::new(0.5f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    let bell = StateVec::pure_from_vector(&qq, &CVec::from_vec(vec![h, z, z, h]))?;
    let b = bipartite_entropies(&bell)?;
    println!("bell: S(AB) {:.4} S(A) {:.4} I(A:B) {:.4} S(A|B) {:.4}", b.s_ab, b.s_a, b.mutual, b.conditional);
    Ok(())
}
