//! Spectral decomposition of states across several models.
//!
//! cargo run --example diagonalise

use gptt::random::{random_state, rng_from_seed};
use gptt::spectral::{diagonalize, diagonalize_peel, schmidt};
use gptt::zoo::parse_model_ref;
use gptt::gpt::StateVec;
use gptt::hilbert::{CVec, C64};

fn main() -> gptt::Result<()> {
    let mut rng = rng_from_seed(7);
    for name in ["classical:3", "quantum:3", "doubled_quantum:2", "extended_classical:2:2"] {
        let model = parse_model_ref(name)?;
        let rho = random_state(&mut rng, &model);
        let d = diagonalize(&rho)?;
        println!("{name:<24} spectrum {:.4?}", d.eigenvalues);
        println!("{:<24} residual {:.1e}", "", d.reconstruction_residual(rho.coords()));
    }

    // the peel loop only needs the cone and the maximal-eigenvalue search
    let q = parse_model_ref("quantum:2")?;
    let rho = random_state(&mut rng, &q);
    let (a, b) = (diagonalize(&rho)?, diagonalize_peel(&rho)?);
    println!("qubit eigensolver {:.6?} peel {:.6?}", a.eigenvalues, b.eigenvalues);

    // a polytope state that no perfectly distinguishable pure set can resolve
    let square = parse_model_ref("square_bit")?;
    let off = StateVec::from_slice(&square, &[0.2, 0.4, 1.0])?;
    match diagonalize(&off) {
        Ok(d) => println!("square bit spectrum {:?}", d.eigenvalues),
        Err(e) => println!("square bit: {e}"),
    }

    let qq = parse_model_ref("quantum:2*quantum:2")?;
    let (c, s) = (C64::new(0.8f64.sqrt(), 0.0), C64::new(0.2f64.sqrt(), 0.0));
    let zero = C64::new(0.0, 0.0);
    let psi = StateVec::pure_from_vector(&qq, &CVec::from_vec(vec![c, zero, zero, s]))?;
    println!("schmidt coefficients {:.3?}", schmidt(&psi)?.coefficients);
    Ok(())
}
