//! Heat-entropy ledger of a system interacting reversibly with a thermal
//! environment.
//!
//! cargo run --example landauer

use gptt::gpt::{swap, ChannelMap};
use gptt::hilbert::Field;
use gptt::random::{haar_unitary, random_state, rng_from_seed};
use gptt::thermo::{landauer_ledger, ThermoConfig};
use gptt::zoo::{compose_systems, parse_model_ref};
use nalgebra::DVector;

fn main() -> gptt::Result<()> {
    let mut rng = rng_from_seed(3);
    let q = parse_model_ref("quantum:2")?;
    let se = compose_systems(&q, &q)?;
    let mut h = DVector::zeros(q.vector_dim());
    h[1] = 1.0;
    let rho = random_state(&mut rng, &q);
    let config = ThermoConfig::default();

    let interactions = [
        ("swap", swap(&se)?),
        ("random", ChannelMap::unitary(&se, &haar_unitary(&mut rng, 4, Field::Complex))?),
    ];
    for (name, u) in &interactions {
        let l = landauer_ledger(&rho, &h, 0.7, u, &config)?;
        println!("{name}: dE_env {:.5} dS_sys {:.5} I {:.5} D {:.5}", l.delta_e_env, l.ds_system, l.mutual_term, l.relent_term.value());
        for c in l.checks() {
            println!("  {:<20} {} ({:.1e})", c.name, if c.pass { "pass" } else { "FAIL" }, c.residual);
        }
    }
    Ok(())
}
