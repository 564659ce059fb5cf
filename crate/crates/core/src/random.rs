//! Seeded sampling of unitaries, states and probability vectors.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::gpt::{EffectVec, Model, StateVec};
use crate::hilbert::{CMat, CVec, Field, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng, field: Field) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    match field {
        Field::Real => C64::new(re, 0.0),
        Field::Complex => C64::new(re, StandardNormal.sample(rng)),
    }
}

/// Haar-distributed unitary (orthogonal for the real field), via the QR
/// decomposition of a Ginibre matrix with the phases of `R` removed.
pub fn haar_unitary(rng: &mut impl Rng, n: usize, field: Field) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| gaussian(rng, field));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Uniformly random point of the probability simplex.
pub fn random_probability(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random unit vector in one sector of a quantum-like model.
pub fn random_pure_vector(rng: &mut impl Rng, model: &Model, sector: usize) -> CVec {
    let layout = model.layout().expect("quantum-like model");
    let off = layout.sector_offset(sector);
    let n = layout.sectors()[sector];
    let mut v = CVec::zeros(layout.hilbert_dim());
    for i in 0..n {
        v[off + i] = gaussian(rng, layout.field());
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Random pure state: a random vector in a random sector, or a random
/// vertex of a polytope.
pub fn random_pure_state(rng: &mut impl Rng, model: &Model) -> StateVec {
    match model.layout() {
        Some(layout) => {
            let sector = rng.random_range(0..layout.sector_count());
            let v = random_pure_vector(rng, model, sector);
            StateVec::raw(model, DVector::from_vec(layout.projector(&v)))
        }
        None => {
            let vs = model.vertices().expect("polytope");
            StateVec::raw(model, vs[rng.random_range(0..vs.len())].clone())
        }
    }
}

/// Random full-rank normalised state. Quantum-like models get random
/// sector weights and Wishart-distributed blocks; polytopes get a random
/// convex combination of their vertices.
pub fn random_state(rng: &mut impl Rng, model: &Model) -> StateVec {
    match model.layout() {
        Some(layout) => {
            let weights = random_probability(rng, layout.sector_count());
            let blocks: Vec<CMat> = layout
                .sectors()
                .iter()
                .zip(&weights)
                .map(|(&n, &w)| {
                    let g = CMat::from_fn(n, n, |_, _| gaussian(rng, layout.field()));
                    let b = &g * g.adjoint();
                    let t = b.trace().re;
                    b * C64::new(w / t, 0.0)
                })
                .collect();
            StateVec::raw(model, DVector::from_vec(layout.from_blocks(&blocks)))
        }
        None => {
            let vs = model.vertices().expect("polytope");
            let p = random_probability(rng, vs.len());
            let coords = vs.iter().zip(&p).fold(DVector::zeros(model.vector_dim()), |acc, (v, w)| acc + v * *w);
            StateVec::raw(model, coords)
        }
    }
}

/// Random test made of rank-one effects: in every sector, `extra` more
/// outcomes than the sector dimension, taken from the rows of a Haar
/// isometry.
pub fn random_pure_test(rng: &mut impl Rng, model: &Model, extra: usize) -> Vec<EffectVec> {
    let layout = model.layout().expect("quantum-like model");
    let mut effects = Vec::new();
    for k in 0..layout.sector_count() {
        let (off, n) = (layout.sector_offset(k), layout.sectors()[k]);
        let u = haar_unitary(rng, n + extra, layout.field());
        for a in 0..n + extra {
            let mut w = CVec::zeros(layout.hilbert_dim());
            for i in 0..n {
                w[off + i] = u[(a, i)].conj();
            }
            effects.push(EffectVec::raw(model, DVector::from_vec(layout.projector(&w))));
        }
    }
    effects
}
