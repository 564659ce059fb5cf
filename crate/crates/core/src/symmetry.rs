//! Reversible groups, invariant states, twirling and distinguishability.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::cone::{cone_membership, distinguishing_test};
use crate::gpt::model::{ConeSpec, GroupSpec, Model, ModelSpec};
use crate::gpt::{product_state, EffectVec, StateVec};
use crate::hilbert::{hermitian_eigen, CMat, CVec, C64};
use crate::{TOL, ZERO_NORM};

/// Largest finite group the closure will enumerate.
pub const GROUP_CAP: usize = 10_000;

fn matrix_key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|x| (x / TOL).round() as i64).collect()
}

fn closure(generators: &[DMatrix<f64>], dim: usize) -> std::result::Result<Vec<DMatrix<f64>>, String> {
    let id = DMatrix::identity(dim, dim);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(matrix_key(&id));
    let mut elements = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = h * &g;
            if seen.insert(matrix_key(&next)) {
                if elements.len() >= GROUP_CAP {
                    return Err(format!("group has more than {GROUP_CAP} elements"));
                }
                elements.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(elements)
}

/// All elements of a finite reversible group, computed once per model.
pub fn group_elements(model: &ModelSpec) -> Result<&[DMatrix<f64>]> {
    let GroupSpec::Finite { generators } = model.group() else {
        return Err(Error::Unsupported(format!("{} has a continuous reversible group", model.id())));
    };
    model
        .group_cache
        .get_or_init(|| closure(generators, model.vector_dim()))
        .as_deref()
        .map_err(|e| Error::Unsupported(e.clone()))
}

#[derive(Debug, Clone)]
pub struct InvariantState {
    /// The invariant state, or a representative of the invariant set.
    pub state: StateVec,
    pub unique: bool,
    /// Dimension of the affine set of normalised invariant vectors.
    pub affine_dimension: usize,
    /// Basis of the linear space of invariant vectors.
    pub basis: Vec<DVector<f64>>,
}

/// Orthonormal basis of the common fixed space of the generators.
fn fixed_space(generators: &[DMatrix<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut gram = DMatrix::zeros(dim, dim);
    for g in generators {
        let a = g - DMatrix::identity(dim, dim);
        gram += a.tr_mul(&a);
    }
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.amax().max(1.0);
    (0..dim)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

pub fn invariant_state(model: &Model) -> Result<InvariantState> {
    let generators = match model.group() {
        GroupSpec::Parametric { layout } | GroupSpec::Structured { layout } => {
            let d = layout.hilbert_dim() as f64;
            let chi = DVector::from_vec(layout.identity()) / d;
            return Ok(InvariantState {
                state: StateVec::raw(model, chi.clone()),
                unique: true,
                affine_dimension: 0,
                basis: vec![chi],
            });
        }
        GroupSpec::Finite { generators } => generators,
    };
    let basis = fixed_space(generators, model.vector_dim());
    let u = model.unit_effect();
    if basis.iter().all(|b| u.dot(b).abs() < ZERO_NORM) {
        return Err(Error::Internal(format!("{} has no normalisable invariant vector", model.id())));
    }
    let affine_dimension = basis.len() - 1;
    let state = if basis.len() == 1 {
        let b = &basis[0];
        b / u.dot(b)
    } else {
        // group average of the centroid of the pure vertices
        let vs = model.vertices().ok_or_else(|| Error::Internal("finite group without vertices".into()))?;
        let centroid = vs.iter().fold(DVector::zeros(model.vector_dim()), |a, v| a + v) / vs.len() as f64;
        group_average(model, &centroid)?
    };
    if !cone_membership(&state, model.state_cone()).is_inside() {
        return Err(Error::Internal(format!("invariant vector of {} lies outside the cone", model.id())));
    }
    Ok(InvariantState {
        state: StateVec::raw(model, state),
        unique: affine_dimension == 0,
        affine_dimension,
        basis,
    })
}

/// The unique invariant (microcanonical) state χ.
pub fn chi(model: &Model) -> Result<StateVec> {
    let inv = invariant_state(model)?;
    if !inv.unique {
        return Err(Error::Structure(format!(
            "{} has a {}-dimensional family of invariant states",
            model.id(),
            inv.affine_dimension
        )));
    }
    Ok(inv.state)
}

fn group_average(model: &ModelSpec, x: &DVector<f64>) -> Result<DVector<f64>> {
    let elements = group_elements(model)?;
    let sum = elements.iter().fold(DVector::zeros(x.len()), |acc, g| acc + g * x);
    Ok(sum / elements.len() as f64)
}

#[derive(Debug, Clone)]
pub struct Twirl {
    pub state: StateVec,
    /// False when the group fixes more than one state; the result is then a
    /// projection onto the invariant set rather than χ.
    pub unique_fixed_point: bool,
}

/// Average of `ρ` over the reversible group.
pub fn twirl(rho: &StateVec) -> Result<Twirl> {
    let model = rho.model();
    match model.group() {
        GroupSpec::Parametric { .. } | GroupSpec::Structured { .. } => {
            let chi = chi(model)?;
            Ok(Twirl {
                state: StateVec::raw(model, chi.coords() * rho.trace()),
                unique_fixed_point: true,
            })
        }
        GroupSpec::Finite { .. } => {
            let avg = group_average(model, rho.coords())?;
            let unique = invariant_state(model)?.unique;
            Ok(Twirl { state: StateVec::raw(model, avg), unique_fixed_point: unique })
        }
    }
}

/// Whether the reversible group acts transitively on pure states.
pub fn is_transitive(model: &Model) -> bool {
    let GroupSpec::Finite { generators } = model.group() else {
        return true;
    };
    let Some(vs) = model.vertices() else {
        return true;
    };
    let key = |v: &DVector<f64>| -> Vec<i64> { v.iter().map(|x| (x / 1e-7).round() as i64).collect() };
    let mut seen = HashSet::from([key(&vs[0])]);
    let mut queue = VecDeque::from([vs[0].clone()]);
    while let Some(v) = queue.pop_front() {
        for g in generators {
            let w = g * &v;
            if seen.insert(key(&w)) {
                queue.push_back(w);
            }
        }
    }
    vs.iter().all(|v| seen.contains(&key(v))) && seen.len() == vs.len()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EquilibriumCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Compares `χ_A ⊗ χ_B` with the invariant state of the composite.
pub fn informational_equilibrium_check(a: &Model, b: &Model) -> Result<EquilibriumCheck> {
    let ab = crate::zoo::compose_systems(a, b)?;
    let product = product_state(&ab, &chi(a)?, &chi(b)?)?;
    let residual = (product.coords() - chi(&ab)?.coords()).amax();
    Ok(EquilibriumCheck { holds: residual <= 1e-8, residual })
}

/// Observation test distinguishing a list of states.
#[derive(Debug, Clone)]
pub struct DistinguishingTest {
    /// `effects[i]` fires with certainty on `states[i]` and never on the others.
    pub effects: Vec<EffectVec>,
    /// Remaining effect needed to complete the test, if any.
    pub complement: Option<EffectVec>,
}

/// Projector onto the support of a positive operator, in full-space form.
fn support_projector(model: &ModelSpec, coords: &DVector<f64>) -> CMat {
    let layout = model.layout().expect("quantum-like model");
    let n = layout.hilbert_dim();
    let mut p = CMat::zeros(n, n);
    for k in 0..layout.sector_count() {
        let (vals, vecs) = hermitian_eigen(&layout.block(coords.as_slice(), k), layout.field());
        let off = layout.sector_offset(k);
        for (v, vec) in vals.into_iter().zip(vecs) {
            if v > 1e-9 {
                let mut full = CVec::zeros(n);
                full.rows_mut(off, vec.len()).copy_from(&vec);
                p += &full * full.adjoint();
            }
        }
    }
    p
}

/// Searches for a perfectly distinguishing test. Polytopes solve a linear
/// feasibility problem over the effect cone; quantum-like models compare
/// supports.
pub fn perfectly_distinguishable_search(model: &Model, states: &[StateVec]) -> Option<DistinguishingTest> {
    if states.is_empty() {
        return None;
    }
    match model.effect_cone() {
        ConeSpec::Vertex { generators } => {
            let coords: Vec<DVector<f64>> = states.iter().map(|s| s.coords().clone()).collect();
            let effects = distinguishing_test(generators, model.unit_effect(), &coords)?;
            Some(DistinguishingTest {
                effects: effects.into_iter().map(|e| EffectVec::raw(model, e)).collect(),
                complement: None,
            })
        }
        ConeSpec::Blocks(layout) => {
            let projectors: Vec<CMat> = states.iter().map(|s| support_projector(model, s.coords())).collect();
            for (i, p) in projectors.iter().enumerate() {
                for (j, s) in states.iter().enumerate() {
                    if i != j {
                        let overlap = (p * s.to_matrix().unwrap()).trace().re / s.trace();
                        if overlap > 1e-9 {
                            return None;
                        }
                    }
                }
            }
            let n = layout.hilbert_dim();
            let rest = CMat::identity(n, n) - projectors.iter().fold(CMat::zeros(n, n), |a, p| a + p);
            let to_effect = |m: &CMat| EffectVec::raw(model, DVector::from_vec(layout.from_matrix(m).0));
            let complement = (rest.iter().map(|z: &C64| z.norm()).fold(0.0, f64::max) > 1e-9)
                .then(|| to_effect(&rest));
            Some(DistinguishingTest { effects: projectors.iter().map(to_effect).collect(), complement })
        }
    }
}

/// Indices of a largest perfectly distinguishable subset of the pure
/// vertices (empty if no pair is distinguishable).
pub fn max_distinguishable_vertices(model: &Model) -> Vec<usize> {
    let Some(vs) = model.vertices() else {
        return (0..model.capacity()).collect();
    };
    for size in (2..=vs.len().min(model.vector_dim())).rev() {
        for subset in crate::zoo::subsets(vs.len(), size) {
            let states: Vec<StateVec> = subset.iter().map(|&i| StateVec::raw(model, vs[i].clone())).collect();
            if perfectly_distinguishable_search(model, &states).is_some() {
                return subset;
            }
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_pure_state, random_state, rng_from_seed};
    use crate::zoo::{build_model, compose_systems, ModelKind};

    #[test]
    fn quantum_invariant_state_is_maximally_mixed() {
        let q = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let m = chi(&q).unwrap().to_matrix().unwrap();
        assert!((m - CMat::identity(3, 3) * C64::new(1.0 / 3.0, 0.0)).camax() < 1e-15);
    }

    #[test]
    fn polytope_invariant_states_are_centres() {
        for kind in [ModelKind::SquareBit, ModelKind::DiamondBit] {
            let m = build_model(&kind).unwrap();
            let inv = invariant_state(&m).unwrap();
            assert!(inv.unique, "{kind}");
            assert!((inv.state.coords() - DVector::from_vec(vec![0.0, 0.0, 1.0])).amax() < 1e-12);
        }
        assert_eq!(group_elements(&build_model(&ModelKind::SquareBit).unwrap()).unwrap().len(), 8);
    }

    #[test]
    fn non_unique_fixed_points_are_reported() {
        let sq = build_model(&ModelKind::SquareBit).unwrap();
        let desc = crate::zoo::PolytopeDescription {
            name: Some("unsymmetric square".into()),
            vector_dim: 3,
            unit_effect: vec![0.0, 0.0, 1.0],
            state_vertices: sq.vertices().unwrap().iter().map(|v| v.as_slice().to_vec()).collect(),
            effect_generators: vec![
                vec![0.5, 0.0, 0.5],
                vec![-0.5, 0.0, 0.5],
                vec![0.0, 0.5, 0.5],
                vec![0.0, -0.5, 0.5],
            ],
            group_generators: vec![vec![vec![-1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]],
        };
        let m = crate::zoo::polytope_model(&desc).unwrap();
        let inv = invariant_state(&m).unwrap();
        assert!(!inv.unique);
        assert_eq!(inv.affine_dimension, 1);
        assert!(chi(&m).is_err());
    }

    #[test]
    fn transitivity() {
        assert!(is_transitive(&build_model(&ModelKind::SquareBit).unwrap()));
        assert!(!is_transitive(&build_model(&ModelKind::DiamondBit).unwrap()));
        assert!(is_transitive(&build_model(&ModelKind::Quantum { n: 2 }).unwrap()));
        assert!(is_transitive(&build_model(&ModelKind::Classical { d: 4 }).unwrap()));
    }

    #[test]
    fn twirls() {
        let mut rng = rng_from_seed(4);
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let t = twirl(&random_pure_state(&mut rng, &q)).unwrap();
        assert!((t.state.coords() - chi(&q).unwrap().coords()).amax() < 1e-12);
        let sq = build_model(&ModelKind::SquareBit).unwrap();
        let v = StateVec::raw(&sq, sq.vertices().unwrap()[1].clone());
        let t = twirl(&v).unwrap();
        assert!((t.state.coords() - chi(&sq).unwrap().coords()).amax() < 1e-12);
        let r = random_state(&mut rng, &sq);
        let once = twirl(&r).unwrap().state;
        let twice = twirl(&once).unwrap().state;
        assert!((once.coords() - twice.coords()).amax() < 1e-9);
    }

    #[test]
    fn equilibrium_for_standard_composites() {
        for kind in [ModelKind::Classical { d: 2 }, ModelKind::Quantum { n: 2 }, ModelKind::DoubledQuantum { n: 2 }] {
            let m = build_model(&kind).unwrap();
            assert!(informational_equilibrium_check(&m, &m).unwrap().holds, "{kind}");
        }
        let a = build_model(&ModelKind::Classical { d: 2 }).unwrap();
        let b = build_model(&ModelKind::Classical { d: 3 }).unwrap();
        assert!(informational_equilibrium_check(&a, &b).unwrap().holds);
        let _ = compose_systems(&a, &b).unwrap();
    }

    #[test]
    fn distinguishability() {
        let trit = build_model(&ModelKind::RestrictedTrit).unwrap();
        let vs: Vec<StateVec> = trit.vertices().unwrap().iter().map(|v| StateVec::raw(&trit, v.clone())).collect();
        assert!(perfectly_distinguishable_search(&trit, &vs[..2]).is_none());
        assert!(perfectly_distinguishable_search(&trit, &vs).is_none());
        assert!(max_distinguishable_vertices(&trit).is_empty());

        let q = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let set = crate::zoo::pure_maximal_set(&q).unwrap();
        let test = perfectly_distinguishable_search(&q, &set.states[..2]).unwrap();
        assert!((test.effects[0].coords() - set.states[0].coords()).amax() < 1e-12);
        assert!(test.complement.is_some());

        let c = build_model(&ModelKind::Classical { d: 3 }).unwrap();
        let set = crate::zoo::pure_maximal_set(&c).unwrap();
        let test = perfectly_distinguishable_search(&c, &set.states).unwrap();
        assert!(test.complement.is_none());
        assert_eq!(test.effects[1].coords().as_slice(), &[0.0, 1.0, 0.0]);
    }
}
