use crate::error::{Error, Result};
use crate::gpt::channel::{ChannelMap, ChannelTag};
use crate::gpt::model::{Composite, Model};
use crate::gpt::vectors::{EffectVec, StateVec};
use crate::hilbert::{CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn composite_of(model: &Model) -> Result<&Composite> {
    model
        .composite()
        .ok_or_else(|| Error::Structure(format!("{} is not a composite system", model.id())))
}

/// Operator `X_A ⊗ Y_B` written in the composite basis.
fn product_matrix(c: &Composite, x: &CMat, y: &CMat) -> CMat {
    let n = c.pairs().len();
    CMat::from_fn(n, n, |r, s| {
        let (xr, yr) = c.pairs()[r];
        let (xs, ys) = c.pairs()[s];
        x[(xr, xs)] * y[(yr, ys)]
    })
}

fn product_coords(ab: &Model, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let c = composite_of(ab)?;
    let la = c.left.layout().expect("composite factors have layouts");
    let lb = c.right.layout().expect("composite factors have layouts");
    let m = product_matrix(c, &la.to_matrix(a), &lb.to_matrix(b));
    let (coords, leakage) = ab.layout().unwrap().from_matrix(&m);
    if leakage > crate::TOL {
        return Err(Error::Internal(format!("product operator leaks {leakage:.3e} across sectors")));
    }
    Ok(coords)
}

/// `ρ_A ⊗ σ_B` on the composite `ab`, which must be built from the two
/// factor systems.
pub fn product_state(ab: &Model, rho: &StateVec, sigma: &StateVec) -> Result<StateVec> {
    let c = composite_of(ab)?;
    c.left.require_same(rho.model())?;
    c.right.require_same(sigma.model())?;
    let coords = product_coords(ab, rho.coords().as_slice(), sigma.coords().as_slice())?;
    StateVec::new(ab, coords.into())
}

pub fn product_effect(ab: &Model, a: &EffectVec, b: &EffectVec) -> Result<EffectVec> {
    let c = composite_of(ab)?;
    c.left.require_same(a.model())?;
    c.right.require_same(b.model())?;
    let coords = product_coords(ab, a.coords().as_slice(), b.coords().as_slice())?;
    EffectVec::new(ab, coords.into())
}

/// Partial trace of a composite operator onto one factor.
pub(crate) fn partial_trace(c: &Composite, m: &CMat, keep: Side) -> CMat {
    let (da, db) = (c.left.hilbert_dim(), c.right.hilbert_dim());
    match keep {
        Side::Left => CMat::from_fn(da, da, |x, x2| {
            (0..db).map(|y| m[(c.index_of(x, y), c.index_of(x2, y))]).sum::<C64>()
        }),
        Side::Right => CMat::from_fn(db, db, |y, y2| {
            (0..da).map(|x| m[(c.index_of(x, y), c.index_of(x, y2))]).sum::<C64>()
        }),
    }
}

/// Applies the deterministic effect to the discarded factor.
pub fn marginal(rho: &StateVec, keep: Side) -> Result<StateVec> {
    let ab = rho.model();
    let c = composite_of(ab)?;
    let m = rho.to_matrix().expect("composites have layouts");
    let reduced = partial_trace(c, &m, keep);
    let target = match keep {
        Side::Left => &c.left,
        Side::Right => &c.right,
    };
    StateVec::from_matrix(target, &reduced)
}

/// The reversible channel exchanging the two factors, `A⊗B → B⊗A`.
pub fn swap(ab: &Model) -> Result<ChannelMap> {
    let c = composite_of(ab)?;
    let ba = crate::zoo::compose_systems(&c.right, &c.left)?;
    let cba = composite_of(&ba)?;
    let n = c.pairs().len();
    let mut p = CMat::zeros(n, n);
    for (i, &(x, y)) in c.pairs().iter().enumerate() {
        p[(cba.index_of(y, x), i)] = C64::new(1.0, 0.0);
    }
    let forward = ChannelMap::from_kraus(ab, &ba, vec![p.clone()])?;
    let backward = ChannelMap::from_kraus(&ba, ab, vec![p.adjoint()])?;
    let mut out = forward;
    out.set_inverse(backward.matrix().clone());
    out.insert_tag(ChannelTag::Reversible);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::CVec;
    use crate::zoo::{build_model, compose_systems, ModelKind};

    #[test]
    fn marginal_of_product_recovers_factor() {
        let a = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let b = build_model(&ModelKind::Quantum { n: 3 }).unwrap();
        let ab = compose_systems(&a, &b).unwrap();
        let rho = StateVec::from_slice(&a, &[0.6, 0.4, 0.2, 0.1]).unwrap();
        let sigma = crate::symmetry::chi(&b).unwrap();
        let prod = product_state(&ab, &rho, &sigma).unwrap();
        let back = marginal(&prod, Side::Left).unwrap();
        assert!((back.coords() - rho.coords()).amax() < 1e-12);
        let other = marginal(&prod, Side::Right).unwrap();
        assert!((other.coords() - sigma.coords()).amax() < 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let q = build_model(&ModelKind::Quantum { n: 2 }).unwrap();
        let qq = compose_systems(&q, &q).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVec::from_vec(vec![C64::new(h, 0.0), 0.0.into(), 0.0.into(), C64::new(h, 0.0)]);
        let bell = StateVec::pure_from_vector(&qq, &psi).unwrap();
        for side in [Side::Left, Side::Right] {
            let m = marginal(&bell, side).unwrap().to_matrix().unwrap();
            // partial trace oracle: ρ_A[i][j] = Σ_k ψ[i,k] ψ*[j,k]
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if i == j { 0.5 } else { 0.0 };
                    assert!((m[(i, j)].re - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn swap_exchanges_factors() {
        let a = build_model(&ModelKind::Classical { d: 2 }).unwrap();
        let b = build_model(&ModelKind::Classical { d: 3 }).unwrap();
        let ab = compose_systems(&a, &b).unwrap();
        let ba = compose_systems(&b, &a).unwrap();
        let rho = StateVec::from_slice(&a, &[0.25, 0.75]).unwrap();
        let sigma = StateVec::from_slice(&b, &[0.5, 0.3, 0.2]).unwrap();
        let s = swap(&ab).unwrap();
        let out = s.apply(&product_state(&ab, &rho, &sigma).unwrap()).unwrap();
        let expected = product_state(&ba, &sigma, &rho).unwrap();
        assert!((out.coords() - expected.coords()).amax() < 1e-14);
        assert!(s.has_tag(ChannelTag::Reversible));
    }
}
