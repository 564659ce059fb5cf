//! Gibbs states from an inverse temperature or a mean energy, and the
//! maximum-entropy audit on the energy shell.
//!
//! cargo run --example gibbs

use gptt::random::rng_from_seed;
use gptt::spectral::spectrum;
use gptt::thermo::{beta_from_energy, energy, gibbs_state, max_entropy_audit, von_neumann};
use gptt::zoo::parse_model_ref;
use nalgebra::DVector;

fn main() -> gptt::Result<()> {
    let c = parse_model_ref("classical:3")?;
    let h = DVector::from_vec(vec![0.0, 1.0, 2.0]);
    for beta in [0.0, 0.5, 2.0, f64::INFINITY, -1.0] {
        let g = gibbs_state(&c, &h, beta)?;
        println!("beta {beta:>5}: {:.4?} energy {:.4}", g.coords().as_slice(), energy(&h, &g)?);
    }

    let q = parse_model_ref("quantum:2")?;
    let mut hq = DVector::zeros(q.vector_dim());
    hq[1] = 1.0;
    let e = 0.25;
    let beta = beta_from_energy(&q, &hq, e)?;
    let g = gibbs_state(&q, &hq, beta)?;
    println!("qubit at E = {e}: beta {beta:.6} (ln 3 = {:.6}) spectrum {:.4?}", 3f64.ln(), spectrum(&g)?);
    let audit = max_entropy_audit(&mut rng_from_seed(5), &q, &hq, e, 200)?;
    println!("gibbs entropy {:.5}, largest excess of shell states {:.2e}", von_neumann(&g)?, audit.max_excess);
    Ok(())
}
