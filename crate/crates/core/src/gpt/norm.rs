use nalgebra::DVector;

use crate::gpt::model::{ConeSpec, ModelSpec};
use crate::hilbert::hermitian_eigen;
use crate::lp::LinearProgram;

/// All eigenvalues of a signed vector of a quantum-like model, unsorted.
pub(crate) fn block_eigenvalues(model: &ModelSpec, xi: &DVector<f64>) -> Option<Vec<f64>> {
    let layout = model.layout()?;
    let mut out = Vec::with_capacity(layout.hilbert_dim());
    for k in 0..layout.sector_count() {
        out.extend(hermitian_eigen(&layout.block(xi.as_slice(), k), layout.field()).0);
    }
    Some(out)
}

/// Operational norm `sup_{0 ≤ a ≤ u} (a|ξ) − (u−a|ξ)` of a signed state-space
/// vector. For quantum-like models this is the 1-norm of the spectrum.
pub fn state_norm(model: &ModelSpec, xi: &DVector<f64>) -> f64 {
    if let Some(vals) = block_eigenvalues(model, xi) {
        return vals.iter().map(|v| v.abs()).sum();
    }
    let generators = match &model.effect_cone {
        ConeSpec::Vertex { generators } => generators,
        ConeSpec::Blocks(_) => unreachable!("block cones come with a layout"),
    };
    // a = E μ, u − a = E ν; maximise 2(a|ξ) − (u|ξ)
    let g = generators.len();
    let dim = xi.len();
    let mut lp = LinearProgram::new(2 * g);
    for r in 0..dim {
        let mut row = vec![0.0; 2 * g];
        for (j, e) in generators.iter().enumerate() {
            row[j] = e[r];
            row[g + j] = e[r];
        }
        lp.equality(row, model.unit_effect[r]);
    }
    let mut gain = vec![0.0; 2 * g];
    for (j, e) in generators.iter().enumerate() {
        gain[j] = 2.0 * e.dot(xi);
    }
    lp.maximise(gain);
    let best = match lp.solve().optimal() {
        Some((_, value)) => -value,
        None => panic!("unit effect is not a sum of effect generators for {}", model.id()),
    };
    (best - model.unit_effect.dot(xi)).max(0.0)
}

/// Supremum of `|(X|ρ)|` over normalised states: the largest absolute
/// eigenvalue for quantum-like models.
pub fn effect_norm(model: &ModelSpec, x: &DVector<f64>) -> f64 {
    if let Some(vals) = block_eigenvalues(model, x) {
        return vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    }
    model
        .vertices()
        .expect("polytope models list their vertices")
        .iter()
        .fold(0.0, |m: f64, v| m.max(x.dot(v).abs()))
}
