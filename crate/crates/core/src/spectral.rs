//! Diagonalisation of states and observables, the dagger map, functional
//! calculus, transition matrices and Schmidt decompositions.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gpt::cone::distinguishing_test;
use crate::gpt::model::{ConeSpec, Model, ModelSpec};
use crate::gpt::{EffectVec, StateVec};
use crate::hilbert::{complete_basis, hermitian_eigen, CMat, CVec, HilbertLayout, C64};
use crate::lp::LinearProgram;
use crate::{DEGENERACY_TOL, TOL, ZERO_NORM};

/// Which algorithm produced a diagonalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Per-sector Hermitian eigensolver.
    Eigensolver,
    /// Repeated maximum-eigenvalue peeling.
    Peel,
}

/// A group of equal eigenvalues and the sum of its eigenstates.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub value: f64,
    pub multiplicity: usize,
    pub projector: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub model: Model,
    /// Spectrum in descending order, length `d`.
    pub eigenvalues: Vec<f64>,
    pub eigenstates: Vec<StateVec>,
    pub dagger_effects: Vec<EffectVec>,
    pub reduced: Vec<Eigenspace>,
    /// Hilbert-space eigenvectors, for quantum-like models.
    pub eigenvectors: Option<Vec<CVec>>,
    pub method: Method,
}

impl Diagonalization {
    /// `‖Σ λ_i α_i − ξ‖_∞`.
    pub fn reconstruction_residual(&self, xi: &DVector<f64>) -> f64 {
        let sum = self
            .eigenvalues
            .iter()
            .zip(&self.eigenstates)
            .fold(DVector::zeros(xi.len()), |acc, (l, s)| acc + s.coords() * *l);
        (sum - xi).amax()
    }
}

fn lex_desc(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-12 {
            return y.partial_cmp(x).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Sorts terms by decreasing eigenvalue; within a degenerate group the
/// eigenstate with the lexicographically larger coordinates comes first.
fn sort_terms<T>(terms: &mut Vec<(f64, DVector<f64>, T)>) {
    terms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < terms.len() {
        let mut end = start + 1;
        while end < terms.len() && (terms[end - 1].0 - terms[end].0).abs() < DEGENERACY_TOL {
            end += 1;
        }
        terms[start..end].sort_by(|a, b| lex_desc(&a.1, &b.1));
        start = end;
    }
}

fn reduce(values: &[f64], states: &[StateVec]) -> Vec<Eigenspace> {
    let mut out: Vec<Eigenspace> = Vec::new();
    for (v, s) in values.iter().zip(states) {
        match out.last_mut() {
            Some(last) if (last.value - v).abs() < DEGENERACY_TOL => {
                let m = last.multiplicity as f64;
                last.value = (last.value * m + v) / (m + 1.0);
                last.multiplicity += 1;
                last.projector += s.coords();
            }
            _ => out.push(Eigenspace { value: *v, multiplicity: 1, projector: s.coords().clone() }),
        }
    }
    out
}

fn embed(layout: &HilbertLayout, sector: usize, local: &CVec) -> CVec {
    let mut full = CVec::zeros(layout.hilbert_dim());
    full.rows_mut(layout.sector_offset(sector), local.len()).copy_from(local);
    full
}

/// Eigen-decomposition of any vector of a quantum-like model.
fn layout_spectrum(model: &Model, layout: &HilbertLayout, xi: &DVector<f64>) -> Diagonalization {
    let mut terms: Vec<(f64, DVector<f64>, CVec)> = Vec::new();
    for k in 0..layout.sector_count() {
        let (vals, vecs) = hermitian_eigen(&layout.block(xi.as_slice(), k), layout.field());
        for (v, local) in vals.into_iter().zip(vecs) {
            let full = embed(layout, k, &local);
            let proj = DVector::from_vec(layout.projector(&full));
            terms.push((v, proj, full));
        }
    }
    sort_terms(&mut terms);
    finish_layout(model, terms, Method::Eigensolver)
}

fn finish_layout(model: &Model, terms: Vec<(f64, DVector<f64>, CVec)>, method: Method) -> Diagonalization {
    let eigenvalues: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let eigenstates: Vec<StateVec> = terms.iter().map(|t| StateVec::raw(model, t.1.clone())).collect();
    let dagger_effects = terms.iter().map(|t| EffectVec::raw(model, t.1.clone())).collect();
    let reduced = reduce(&eigenvalues, &eigenstates);
    Diagonalization {
        model: model.clone(),
        eigenvalues,
        eigenstates,
        dagger_effects,
        reduced,
        eigenvectors: Some(terms.into_iter().map(|t| t.2).collect()),
        method,
    }
}

/// Diagonalises a normalised state. Quantum-like models use the
/// eigensolver; polytope models run the peel loop, which fails on states
/// that are not mixtures of perfectly distinguishable pure states.
pub fn diagonalize(rho: &StateVec) -> Result<Diagonalization> {
    check_normalized(rho)?;
    let model = rho.model();
    match model.layout() {
        Some(layout) => Ok(layout_spectrum(model, layout, rho.coords())),
        None => diagonalize_peel(rho),
    }
}

/// Diagonalises a signed vector (an observable) of a quantum-like model.
pub fn diagonalize_observable(model: &Model, x: &DVector<f64>) -> Result<Diagonalization> {
    model.check_dim(x.len())?;
    match model.layout() {
        Some(layout) => Ok(layout_spectrum(model, layout, x)),
        None => Err(Error::Unsupported(format!(
            "observables of {} have no canonical diagonalisation",
            model.id()
        ))),
    }
}

fn check_normalized(rho: &StateVec) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::InvalidParameter(format!(
            "state is not normalised (trace {})",
            rho.trace()
        )));
    }
    Ok(())
}

/// Result of one peeling step `ρ = p* α + (1 − p*) σ`.
#[derive(Debug, Clone)]
pub struct Peel {
    pub p: f64,
    pub alpha: StateVec,
    /// Absent when `ρ` is pure.
    pub sigma: Option<StateVec>,
}

/// Largest `p` with `ρ − p α` in the cone, for a vertex `α`.
fn vertex_peel_weight(rho: &DVector<f64>, alpha: &DVector<f64>, generators: &[DVector<f64>]) -> f64 {
    // variables (p, λ): p α + V λ = ρ, maximise p
    let g = generators.len();
    let mut lp = LinearProgram::new(g + 1);
    for r in 0..rho.len() {
        let mut row = vec![alpha[r]];
        row.extend(generators.iter().map(|v| v[r]));
        lp.equality(row, rho[r]);
    }
    let mut gain = vec![0.0; g + 1];
    gain[0] = 1.0;
    lp.maximise(gain);
    lp.solve().optimal().map_or(0.0, |(x, _)| x[0])
}

/// Largest eigenpair of a Hermitian block by power iteration polished
/// with Rayleigh-quotient steps; the block is assumed positive semidefinite.
fn top_eigenpair(block: &CMat) -> (f64, CVec) {
    let n = block.nrows();
    let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    v /= C64::new(v.norm(), 0.0);
    let rq = |v: &CVec| (v.adjoint() * block * v)[(0, 0)].re;
    let mut mu = rq(&v);
    for _ in 0..2000 {
        let w = block * &v;
        let norm = w.norm();
        if norm < ZERO_NORM {
            return (0.0, v);
        }
        let next = w / C64::new(norm, 0.0);
        let change = (&next - &v).norm();
        v = next;
        let m = rq(&v);
        let settled = (m - mu).abs() < 1e-15 && change < 1e-10;
        mu = m;
        if settled {
            break;
        }
    }
    for _ in 0..5 {
        let shifted = block - CMat::identity(n, n) * C64::new(mu, 0.0);
        let Some(w) = shifted.lu().solve(&v) else { break };
        let norm = w.norm();
        if !norm.is_finite() || norm < ZERO_NORM {
            break;
        }
        let next = w / C64::new(norm, 0.0);
        let m = rq(&next);
        if m < mu - 1e-12 {
            break;
        }
        v = next;
        mu = m;
    }
    (mu, v)
}

/// One step of the peel: the largest weight any pure state can carry in a
/// convex decomposition of `ρ`.
pub fn max_eigenvalue_peel(rho: &StateVec) -> Result<Peel> {
    check_normalized(rho)?;
    let model = rho.model();
    let (p, alpha) = match (model.vertices(), model.state_cone()) {
        (Some(vs), ConeSpec::Vertex { generators }) => {
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, v) in vs.iter().enumerate() {
                let p = vertex_peel_weight(rho.coords(), v, generators);
                if p > best.0 + 1e-12 {
                    best = (p, i);
                }
            }
            (best.0, vs[best.1].clone())
        }
        _ => {
            let layout = model.layout().expect("block cones come with layouts");
            let mut best: Option<(f64, CVec)> = None;
            for k in 0..layout.sector_count() {
                let (l, v) = top_eigenpair(&layout.block(rho.coords().as_slice(), k));
                if best.as_ref().is_none_or(|b| l > b.0 + 1e-12) {
                    best = Some((l, embed(layout, k, &v)));
                }
            }
            let (l, v) = best.unwrap();
            (l, DVector::from_vec(layout.projector(&v)))
        }
    };
    let p = p.clamp(0.0, 1.0);
    let sigma = (p < 1.0 - TOL).then(|| StateVec::raw(model, (rho.coords() - &alpha * p) / (1.0 - p)));
    Ok(Peel { p, alpha: StateVec::raw(model, alpha), sigma })
}

fn failure(message: String, residue: &DVector<f64>) -> Error {
    Error::Diagonalization { message, residue: residue.iter().copied().collect() }
}

/// Diagonalisation by repeated peeling, without an eigensolver.
pub fn diagonalize_peel(rho: &StateVec) -> Result<Diagonalization> {
    check_normalized(rho)?;
    let model = rho.model();
    let d = model.capacity();
    let mut remainder = rho.coords().clone();
    let mut terms: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut vectors: Vec<CVec> = Vec::new();
    while terms.len() < d + 1 {
        let weight = model.unit_effect().dot(&remainder);
        if weight < 1e-12 || remainder.amax() < 1e-12 {
            break;
        }
        if terms.len() == d {
            return Err(failure(
                format!("{} pure states do not exhaust the state (weight {weight:.3e} left)", d),
                &remainder,
            ));
        }
        match model.layout() {
            Some(layout) => {
                let mut best: Option<(f64, CVec)> = None;
                for k in 0..layout.sector_count() {
                    let (l, v) = top_eigenpair(&layout.block(remainder.as_slice(), k));
                    if best.as_ref().is_none_or(|b| l > b.0 + 1e-12) {
                        best = Some((l, embed(layout, k, &v)));
                    }
                }
                let (l, v) = best.unwrap();
                let alpha = DVector::from_vec(layout.projector(&v));
                remainder -= &alpha * l;
                terms.push((l, alpha));
                vectors.push(v);
            }
            None => {
                let normalized = StateVec::raw(model, &remainder / weight);
                let peel = max_eigenvalue_peel(&normalized)?;
                let w = weight * peel.p;
                remainder -= peel.alpha.coords() * w;
                terms.push((w, peel.alpha.into_coords()));
            }
        }
    }
    // pad with zero-weight pure states and check joint distinguishability
    match model.layout() {
        Some(layout) => {
            for i in 0..vectors.len() {
                for j in 0..i {
                    if vectors[i].dotc(&vectors[j]).norm() > 1e-6 {
                        return Err(failure("peeled eigenstates are not orthogonal".into(), &remainder));
                    }
                }
            }
            let mut full = Vec::new();
            for k in 0..layout.sector_count() {
                let off = layout.sector_offset(k);
                let n = layout.sectors()[k];
                let given: Vec<CVec> = vectors
                    .iter()
                    .filter(|v| v.rows(off, n).norm() > 0.5)
                    .cloned()
                    .collect();
                full.extend(complete_basis(layout, k, &given).into_iter().skip(given.len()));
            }
            let mut all: Vec<(f64, DVector<f64>, CVec)> = terms
                .into_iter()
                .zip(vectors)
                .map(|((l, a), v)| (l, a, v))
                .collect();
            for v in full {
                all.push((0.0, DVector::from_vec(layout.projector(&v)), v));
            }
            sort_terms(&mut all);
            Ok(finish_layout(model, all, Method::Peel))
        }
        None => {
            let gens = match model.effect_cone() {
                ConeSpec::Vertex { generators } => generators,
                ConeSpec::Blocks(_) => unreachable!(),
            };
            let mut states: Vec<DVector<f64>> = terms.iter().map(|t| t.1.clone()).collect();
            if distinguishing_test(gens, model.unit_effect(), &states).is_none() {
                return Err(failure(
                    format!("{} peeled pure states are not perfectly distinguishable", states.len()),
                    &remainder,
                ));
            }
            let vs = model.vertices().unwrap();
            for v in vs {
                if states.len() == d {
                    break;
                }
                if states.iter().any(|s| (s - v).amax() < 1e-9) {
                    continue;
                }
                let mut trial = states.clone();
                trial.push(v.clone());
                if distinguishing_test(gens, model.unit_effect(), &trial).is_some() {
                    states = trial;
                    terms.push((0.0, v.clone()));
                }
            }
            if terms.len() < d {
                return Err(failure("could not complete the distinguishable set".into(), &remainder));
            }
            let mut tagged: Vec<(f64, DVector<f64>, ())> = terms.into_iter().map(|(l, a)| (l, a, ())).collect();
            sort_terms(&mut tagged);
            let states: Vec<DVector<f64>> = tagged.iter().map(|t| t.1.clone()).collect();
            let effects = distinguishing_test(gens, model.unit_effect(), &states)
                .ok_or_else(|| Error::Internal("distinguishing test vanished".into()))?;
            let eigenvalues: Vec<f64> = tagged.iter().map(|t| t.0).collect();
            let eigenstates: Vec<StateVec> = states.into_iter().map(|s| StateVec::raw(model, s)).collect();
            let reduced = reduce(&eigenvalues, &eigenstates);
            Ok(Diagonalization {
                model: model.clone(),
                eigenvalues,
                eigenstates,
                dagger_effects: effects.into_iter().map(|e| EffectVec::raw(model, e)).collect(),
                reduced,
                eigenvectors: None,
                method: Method::Peel,
            })
        }
    }
}

/// Eigenvalues of a state, sorted descending.
pub fn spectrum(rho: &StateVec) -> Result<Vec<f64>> {
    Ok(diagonalize(rho)?.eigenvalues)
}

/// The normalised pure effect that is certain on the pure state `x`.
pub fn dagger(x: &StateVec) -> Result<EffectVec> {
    let model = x.model();
    if model.layout().is_none() {
        return Err(Error::Unsupported(format!("{} has no dagger map", model.id())));
    }
    let top = diagonalize(x)?.eigenvalues[0];
    if top < 1.0 - DEGENERACY_TOL {
        return Err(Error::NotPure { top });
    }
    // self-dual embedding: the effect has the coordinates of the state
    Ok(EffectVec::raw(model, x.coords().clone()))
}

/// `ξ† = Σ x_i α_i†` computed from a diagonalisation of `ξ`.
pub fn dagger_extend(model: &Model, xi: &DVector<f64>) -> Result<EffectVec> {
    let diag = diagonalize_observable(model, xi)?;
    let sum = diag
        .eigenvalues
        .iter()
        .zip(&diag.dagger_effects)
        .fold(DVector::zeros(xi.len()), |acc, (x, a)| acc + a.coords() * *x);
    Ok(EffectVec::raw(model, sum))
}

/// `Σ f(x_i) α_i†` for an observable `X = Σ x_i α_i†`. `f` returns `None`
/// where it is undefined.
pub fn functional_calculus<F>(model: &Model, x: &DVector<f64>, f: F) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Option<f64>,
{
    let diag = diagonalize_observable(model, x)?;
    let mut out = DVector::zeros(x.len());
    for space in &diag.reduced {
        let fx = f(space.value).ok_or(Error::UndefinedFunction { eigenvalue: space.value })?;
        out += &space.projector * fx;
    }
    Ok(out)
}

/// `T_ij = (α_i†|α'_j)` for two pure maximal sets.
pub fn transition_matrix(set_a: &[StateVec], set_b: &[StateVec]) -> Result<DMatrix<f64>> {
    if set_a.len() != set_b.len() {
        return Err(Error::Dimension { expected: set_a.len(), found: set_b.len() });
    }
    let daggers: Vec<EffectVec> = set_a.iter().map(dagger).collect::<Result<_>>()?;
    let n = set_a.len();
    let mut t = DMatrix::zeros(n, n);
    for (i, a) in daggers.iter().enumerate() {
        for (j, b) in set_b.iter().enumerate() {
            t[(i, j)] = crate::gpt::pairing(a, b)?;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Strictly positive coefficients `p_i`, descending.
    pub coefficients: Vec<f64>,
    pub effects_a: Vec<EffectVec>,
    pub effects_b: Vec<EffectVec>,
    pub vectors_a: Vec<CVec>,
    pub vectors_b: Vec<CVec>,
}

/// Schmidt decomposition `Ψ = Σ √p_i |a_i⟩|b_i⟩` of a pure bipartite state.
/// Each sector pair is decomposed separately so that every Schmidt vector
/// lies inside a single local sector.
pub fn schmidt(psi: &StateVec) -> Result<Schmidt> {
    let model = psi.model();
    let composite = model
        .composite()
        .ok_or_else(|| Error::Structure(format!("{} is not a composite system", model.id())))?;
    let diag = diagonalize(psi)?;
    let top = diag.eigenvalues[0];
    if top < 1.0 - DEGENERACY_TOL {
        return Err(Error::NotPure { top });
    }
    let v = &diag.eigenvectors.as_ref().expect("layout model")[0];
    let (la, lb) = (composite.left.layout().unwrap(), composite.right.layout().unwrap());
    let amplitude = |x: usize, y: usize| v[composite.index_of(x, y)];
    let mut terms: Vec<(f64, CVec, CVec)> = Vec::new();
    for j in 0..la.sector_count() {
        for l in 0..lb.sector_count() {
            let (oa, na) = (la.sector_offset(j), la.sectors()[j]);
            let (ob, nb) = (lb.sector_offset(l), lb.sectors()[l]);
            let block = CMat::from_fn(na, nb, |a, b| amplitude(oa + a, ob + b));
            if block.iter().all(|z| z.norm() < 1e-12) {
                continue;
            }
            let svd = block.svd(true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            for (i, s) in svd.singular_values.iter().enumerate() {
                if s * s > 1e-12 {
                    let mut left = CVec::zeros(la.hilbert_dim());
                    left.rows_mut(oa, na).copy_from(&u.column(i));
                    let mut right = CVec::zeros(lb.hilbert_dim());
                    right.rows_mut(ob, nb).copy_from(&vt.row(i).transpose());
                    terms.push((s * s, left, right));
                }
            }
        }
    }
    terms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let (a, b) = (&composite.left, &composite.right);
    Ok(Schmidt {
        coefficients: terms.iter().map(|t| t.0).collect(),
        effects_a: terms.iter().map(|t| EffectVec::raw(a, la.projector(&t.1).into())).collect(),
        effects_b: terms.iter().map(|t| EffectVec::raw(b, lb.projector(&t.2).into())).collect(),
        vectors_a: terms.iter().map(|t| t.1.clone()).collect(),
        vectors_b: terms.into_iter().map(|t| t.2).collect(),
    })
}

/// Sum of absolute eigenvalues; exposed for norm checks on peeled output.
pub fn spectral_norm1(model: &ModelSpec, xi: &DVector<f64>) -> Option<f64> {
    crate::gpt::norm::block_eigenvalues(model, xi).map(|v| v.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::{product_effect, product_state};
    use crate::random::{haar_unitary, random_pure_vector, random_state, rng_from_seed};
    use crate::symmetry::chi;
    use crate::zoo::{build_model, compose_systems, pure_maximal_set, ModelKind};
    use crate::hilbert::Field;

    #[test]
    fn invariant_state_has_uniform_spectrum() {
        for kind in [ModelKind::Quantum { n: 3 }, ModelKind::DoubledQuantum { n: 2 }, ModelKind::Classical { d: 4 }] {
            let m = build_model(&kind).unwrap();
            let s = spectrum(&chi(&m).unwrap()).unwrap();
            let d = m.capacity() as f64;
            assert!(s.iter().all(|x| (x - 1.0 / d).abs() < 1e-12), "{kind}: {s:?}");
        }
    }

    #[test]
    fn pure_states_have_unit_spectrum() {
        let q = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let mut rng = rng_from_seed(8);
        let v = random_pure_vector(&mut rng, &q, 0);
        let s = spectrum(&StateVec::pure_from_vector(&q, &v).unwrap()).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
    }

    #[test]
    fn classical_peel() {
        let c = build_model(&ModelKind::Classical { d: 3 }).unwrap();
        let peel = max_eigenvalue_peel(&chi(&c).unwrap()).unwrap();
        assert!((peel.p - 1.0 / 3.0).abs() < 1e-12);
        let rho = StateVec::from_slice(&c, &[0.7, 0.3, 0.0]).unwrap();
        let peel = max_eigenvalue_peel(&rho).unwrap();
        assert!((peel.p - 0.7).abs() < 1e-12);
        assert_eq!(peel.alpha.coords().as_slice(), &[1.0, 0.0, 0.0]);
        let pure = StateVec::from_slice(&c, &[0.0, 1.0, 0.0]).unwrap();
        assert!(max_eigenvalue_peel(&pure).unwrap().sigma.is_none());
    }

    #[test]
    fn peel_matches_eigensolver() {
        let mut rng = rng_from_seed(21);
        for kind in [ModelKind::Quantum { n: 3 }, ModelKind::Classical { d: 5 }, ModelKind::DoubledQuantum { n: 2 }] {
            let m = build_model(&kind).unwrap();
            for _ in 0..20 {
                let rho = random_state(&mut rng, &m);
                let fast = diagonalize(&rho).unwrap();
                let slow = diagonalize_peel(&rho).unwrap();
                for (a, b) in fast.eigenvalues.iter().zip(&slow.eigenvalues) {
                    assert!((a - b).abs() < 1e-7, "{kind}: {:?} vs {:?}", fast.eigenvalues, slow.eigenvalues);
                }
                assert!(slow.reconstruction_residual(rho.coords()) < 1e-7);
            }
        }
    }

    #[test]
    fn square_bit_centre_and_offset() {
        let sq = build_model(&ModelKind::SquareBit).unwrap();
        let d = diagonalize(&chi(&sq).unwrap()).unwrap();
        assert!((d.eigenvalues[0] - 0.5).abs() < 1e-9 && (d.eigenvalues[1] - 0.5).abs() < 1e-9);
        for (i, a) in d.dagger_effects.iter().enumerate() {
            for (j, s) in d.eigenstates.iter().enumerate() {
                let p = crate::gpt::pairing(a, s).unwrap();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        let off = StateVec::from_slice(&sq, &[0.2, 0.4, 1.0]).unwrap();
        assert!(matches!(diagonalize(&off), Err(Error::Diagonalization { .. })));
        let vertex = StateVec::from_slice(&sq, &[1.0, -1.0, 1.0]).unwrap();
        let d = diagonalize(&vertex).unwrap();
        assert_eq!(d.eigenvalues.len(), 2);
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduced_form_reconstructs() {
        let q = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let rho = StateVec::from_slice(&q, &[0.5, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let d = diagonalize(&rho).unwrap();
        assert_eq!(d.reduced.len(), 2);
        assert_eq!(d.reduced[1].multiplicity, 2);
        let sum = d.reduced.iter().fold(DVector::zeros(9), |a, e| a + &e.projector * e.value);
        assert!((sum - rho.coords()).amax() < 1e-12);
    }

    #[test]
    fn degenerate_ties_are_deterministic() {
        let c = build_model(&ModelKind::Classical { d: 3 }).unwrap();
        let rho = StateVec::from_slice(&c, &[0.25, 0.5, 0.25]).unwrap();
        let d = diagonalize(&rho).unwrap();
        assert_eq!(d.eigenstates[1].coords().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(d.eigenstates[2].coords().as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn dagger_and_extension() {
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let mut rng = rng_from_seed(2);
        let psi = StateVec::pure_from_vector(&q, &random_pure_vector(&mut rng, &q, 0)).unwrap();
        let a = dagger(&psi).unwrap();
        assert!((crate::gpt::pairing(&a, &psi).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(dagger(&chi(&q).unwrap()), Err(Error::NotPure { .. })));
        let ext = dagger_extend(&q, chi(&q).unwrap().coords()).unwrap();
        let p = crate::gpt::pairing(&ext, &psi).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn functional_calculus_examples() {
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let h = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let beta = 3f64.ln();
        let g = functional_calculus(&q, &h, |e| Some((-beta * e).exp())).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 1.0 / 3.0).abs() < 1e-12);
        let id = functional_calculus(&q, &h, Some).unwrap();
        assert!((id - &h).amax() < 1e-12);
        let chi3 = chi(&build_model(&ModelKind::Quantum { n: 3 }).unwrap()).unwrap();
        let q3 = chi3.model().clone();
        let s = functional_calculus(&q3, chi3.coords(), |p| (p > 0.0).then(|| -p.ln())).unwrap();
        assert!((s - q3.unit_effect() * 3f64.ln()).amax() < 1e-12);
        let pure = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            functional_calculus(&q, &pure, |p| (p > 0.0).then(|| p.ln())),
            Err(Error::UndefinedFunction { .. })
        ));
    }

    #[test]
    fn transition_matrices_are_doubly_stochastic() {
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let comp = pure_maximal_set(&q).unwrap().states;
        let t = transition_matrix(&comp, &comp).unwrap();
        assert!((t - DMatrix::identity(2, 2)).amax() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVec::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
        let minus = CVec::from_vec(vec![C64::new(h, 0.0), C64::new(-h, 0.0)]);
        let had = vec![
            StateVec::pure_from_vector(&q, &plus).unwrap(),
            StateVec::pure_from_vector(&q, &minus).unwrap(),
        ];
        let t = transition_matrix(&comp, &had).unwrap();
        assert!(t.iter().all(|x| (x - 0.5).abs() < 1e-12));
        let q3 = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let mut rng = rng_from_seed(6);
        let basis = |u: &CMat| -> Vec<StateVec> {
            (0..3).map(|i| StateVec::pure_from_vector(&q3, &u.column(i).into_owned()).unwrap()).collect()
        };
        let t = transition_matrix(
            &basis(&haar_unitary(&mut rng, 3, Field::Complex)),
            &basis(&haar_unitary(&mut rng, 3, Field::Complex)),
        )
        .unwrap();
        for i in 0..3 {
            assert!((t.row(i).sum() - 1.0).abs() < 1e-9 && (t.column(i).sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let qq = compose_systems(&q, &q).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CVec::from_vec(vec![C64::new(h, 0.0), 0.0.into(), 0.0.into(), C64::new(h, 0.0)]);
        let s = schmidt(&StateVec::pure_from_vector(&qq, &bell).unwrap()).unwrap();
        assert_eq!(s.coefficients.len(), 2);
        assert!(s.coefficients.iter().all(|p| (p - 0.5).abs() < 1e-12));
        let mut rng = rng_from_seed(1);
        let a = StateVec::pure_from_vector(&q, &random_pure_vector(&mut rng, &q, 0)).unwrap();
        let b = StateVec::pure_from_vector(&q, &random_pure_vector(&mut rng, &q, 0)).unwrap();
        let prod = product_state(&qq, &a, &b).unwrap();
        let s = schmidt(&prod).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn schmidt_of_doubled_example_splits_sectors() {
        let dq = build_model(&ModelKind::DoubledQuantum { n: 2 }).unwrap();
        let dd = compose_systems(&dq, &dq).unwrap();
        let c = dd.composite().unwrap();
        // (|0,0⟩_A|0,0⟩_B + |1,0⟩_A|1,0⟩_B)/√2; |k,i⟩ is basis vector k·2 + i
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = CVec::zeros(16);
        psi[c.index_of(0, 0)] = C64::new(h, 0.0);
        psi[c.index_of(2, 2)] = C64::new(h, 0.0);
        let state = StateVec::pure_from_vector(&dd, &psi).unwrap();
        let s = schmidt(&state).unwrap();
        assert_eq!(s.coefficients.len(), 2);
        let weights: Vec<Vec<f64>> = s
            .effects_a
            .iter()
            .map(|e| dq.layout().unwrap().sector_traces(e.coords().as_slice()))
            .collect();
        assert!(weights.contains(&vec![1.0, 0.0]) && weights.contains(&vec![0.0, 1.0]));
        for i in 0..2 {
            for j in 0..2 {
                let e = product_effect(&dd, &s.effects_a[i], &s.effects_b[j]).unwrap();
                let p = crate::gpt::pairing(&e, &state).unwrap();
                let expected = if i == j { s.coefficients[i] } else { 0.0 };
                assert!((p - expected).abs() < 1e-12);
            }
        }
        let marginal = crate::gpt::marginal(&state, crate::gpt::Side::Left).unwrap();
        let m = marginal.to_matrix().unwrap();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-12 && (m[(2, 2)].re - 0.5).abs() < 1e-12);
    }
}
