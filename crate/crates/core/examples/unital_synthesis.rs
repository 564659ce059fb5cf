//! Builds a unital channel from a doubly stochastic matrix and its
//! Birkhoff decomposition.
//!
//! cargo run --example unital_synthesis

use gptt::gpt::pairing;
use gptt::resource::{birkhoff_decompose, build_unital_channel, doubly_stochastic_for, permutation_matrix};
use gptt::spectral::spectrum;
use gptt::symmetry::chi;
use gptt::zoo::{parse_model_ref, pure_maximal_set};
use nalgebra::{DMatrix, DVector};

fn main() -> gptt::Result<()> {
    let p = [0.5, 0.3, 0.2, 0.0];
    let q = [0.35, 0.3, 0.2, 0.15];
    let d = doubly_stochastic_for(&p, &q)?;
    println!("D =\n{d:.3}");
    let terms = birkhoff_decompose(&d)?;
    let mut rebuilt = DMatrix::zeros(4, 4);
    for (w, perm) in &terms {
        println!("  {w:.4} x {perm:?}");
        rebuilt += permutation_matrix(perm) * *w;
    }
    println!("{} terms, reconstruction error {:.1e}", terms.len(), (rebuilt - &d).amax());
    println!("D p = {:.3?}", (&d * DVector::from_column_slice(&p)).as_slice());

    let model = parse_model_ref("quantum:3")?;
    let basis = pure_maximal_set(&model)?.states;
    let rho = basis[0].mix(&basis[1], 0.7)?;
    let sigma = rho.mix(&chi(&model)?, 0.5)?;
    let channel = build_unital_channel(&rho, &sigma)?;
    let image = channel.apply(&rho)?;
    println!("spectrum {:.3?} -> {:.3?}", spectrum(&rho)?, spectrum(&image)?);
    println!("image error {:.1e}", (image.coords() - sigma.coords()).amax());
    let u = gptt::gpt::EffectVec::unit(&model);
    println!("maps chi to chi with trace {:.3}", pairing(&u, &channel.apply(&chi(&model)?)?)?);
    Ok(())
}
