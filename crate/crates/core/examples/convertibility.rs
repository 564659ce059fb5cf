//! Convertibility verdicts under unital, reversible-and-rescaled and noisy
//! operations, including a pair that separates the first two.
//!
//! cargo run --example convertibility

use gptt::resource::{convertible, counterexample_pair, majorization_certificate, Answer, Theory};
use gptt::spectral::spectrum;
use gptt::zoo::{parse_model_ref, sector_weights};

fn main() -> gptt::Result<()> {
    let p = [0.6, 0.3, 0.1];
    let q = [0.4, 0.35, 0.25];
    println!("{p:?} majorises {q:?}: {:?}", majorization_certificate(&p, &q)?.is_none());
    if let Some(cert) = majorization_certificate(&q, &p)? {
        println!("reverse direction fails: {cert}");
    }

    let model = parse_model_ref("doubled_quantum:2")?;
    let (rho, sigma) = counterexample_pair(&model)?;
    println!("rho   spectrum {:?} sectors {:?}", spectrum(&rho)?, sector_weights(&rho)?);
    println!("sigma spectrum {:?} sectors {:?}", spectrum(&sigma)?, sector_weights(&sigma)?);
    for theory in [Theory::Unital, Theory::Rare, Theory::Noisy] {
        let verdict = convertible(&rho, &sigma, theory)?;
        let detail = match &verdict.answer {
            Answer::Yes(c) => format!("channel with tags {:?}", c.tags()),
            Answer::No(cert) => cert.to_string(),
            Answer::Unknown(why) => why.clone(),
        };
        println!("{theory:?}: {} ({detail})", verdict.answer.label());
    }
    Ok(())
}
