//! Reversible-and-rescaled conversions: a mixture of reversible maps for a
//! qubit, and a sector-swapping conversion in a doubled quantum model.
//!
//! cargo run --example rare_synthesis

use gptt::gpt::{Model, StateVec};
use gptt::hilbert::{CMat, C64};
use gptt::resource::{build_rare_channel, convertible, rare_equivalent_doubled, sector_spectra, Answer, Theory};
use gptt::symmetry::chi;
use gptt::zoo::parse_model_ref;
use nalgebra::DVector;

fn diag(model: &Model, d: &[f64]) -> gptt::Result<StateVec> {
    let m = CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|x| C64::new(*x, 0.0))));
    StateVec::from_matrix(model, &m)
}

fn main() -> gptt::Result<()> {
    let q = parse_model_ref("quantum:2")?;
    let rho = diag(&q, &[0.7, 0.3])?;
    let channel = build_rare_channel(&rho, &chi(&q)?)?;
    for (w, _) in channel.witness().unwrap_or_default() {
        println!("qubit witness weight {w:.4}");
    }

    let model = parse_model_ref("doubled_quantum:2")?;
    let rho = diag(&model, &[0.4, 0.1, 0.3, 0.2])?;
    let sigma = diag(&model, &[0.2, 0.3, 0.1, 0.4])?;
    println!("rho   sector spectra {:?}", sector_spectra(&rho)?);
    println!("sigma sector spectra {:?}", sector_spectra(&sigma)?);
    println!("equivalent: {}", rare_equivalent_doubled(&rho, &sigma)?);
    if let Answer::Yes(c) = convertible(&rho, &sigma, Theory::Rare)?.answer {
        println!("image error {:.1e}", (c.apply(&rho)?.coords() - sigma.coords()).amax());
    }

    let tau = diag(&model, &[0.5, 0.0, 0.3, 0.2])?;
    match convertible(&rho, &tau, Theory::Rare)?.answer {
        Answer::No(cert) => println!("rho -> tau refused: {cert}"),
        other => println!("rho -> tau: {}", other.label()),
    }
    Ok(())
}
