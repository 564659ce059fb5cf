use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gpt::cone::{cone_membership, Membership};
use crate::gpt::model::{Model, ModelSpec};
use crate::hilbert::{CMat, CVec, C64};
use crate::{TOL, ZERO_NORM};

/// A (possibly subnormalised) state of a system.
#[derive(Debug, Clone)]
pub struct StateVec {
    model: Model,
    coords: DVector<f64>,
}

/// An effect, expressed in the dual coordinates of a system.
#[derive(Debug, Clone)]
pub struct EffectVec {
    model: Model,
    coords: DVector<f64>,
}

fn cone_tolerance(coords: &DVector<f64>) -> f64 {
    TOL * coords.amax().max(1.0)
}

impl StateVec {
    /// Validates dimension, non-degeneracy and cone membership.
    pub fn new(model: &Model, coords: DVector<f64>) -> Result<Self> {
        model.check_dim(coords.len())?;
        let norm = coords.norm();
        if norm < ZERO_NORM {
            return Err(Error::DegenerateState { norm });
        }
        if let Membership::Outside { distance } = cone_membership(&coords, &model.state_cone) {
            if distance > cone_tolerance(&coords) {
                return Err(Error::ConeViolation { distance });
            }
        }
        Ok(Self { model: model.clone(), coords })
    }

    pub fn from_slice(model: &Model, coords: &[f64]) -> Result<Self> {
        Self::new(model, DVector::from_column_slice(coords))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn raw(model: &Model, coords: DVector<f64>) -> Self {
        Self { model: model.clone(), coords }
    }

    /// Builds a state from a block-diagonal density operator.
    pub fn from_matrix(model: &Model, m: &CMat) -> Result<Self> {
        let layout = model
            .layout()
            .ok_or_else(|| Error::Structure(format!("{} has no Hilbert-space layout", model.id())))?;
        if m.nrows() != layout.hilbert_dim() || m.ncols() != layout.hilbert_dim() {
            return Err(Error::Dimension { expected: layout.hilbert_dim(), found: m.nrows() });
        }
        let (coords, leakage) = layout.from_matrix(m);
        if leakage > TOL {
            return Err(Error::Structure(format!(
                "operator has coherence {leakage:.3e} outside the allowed sectors"
            )));
        }
        Self::new(model, DVector::from_vec(coords))
    }

    /// The pure state `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`; `ψ` must live in a single sector.
    pub fn pure_from_vector(model: &Model, psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm < ZERO_NORM {
            return Err(Error::DegenerateState { norm });
        }
        let unit = psi / C64::new(norm, 0.0);
        Self::from_matrix(model, &(&unit * unit.adjoint()))
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    /// Probability of the deterministic effect, `(u|ρ)`.
    pub fn trace(&self) -> f64 {
        self.model.unit_effect.dot(&self.coords)
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t < ZERO_NORM {
            return Err(Error::DegenerateState { norm: t });
        }
        Ok(Self::raw(&self.model, &self.coords / t))
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, other: &StateVec, p: f64) -> Result<Self> {
        self.model.require_same(&other.model)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixing weight {p} outside [0, 1]")));
        }
        Ok(Self::raw(&self.model, &self.coords * p + &other.coords * (1.0 - p)))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.model, &self.coords * factor)
    }

    /// Density operator on the full Hilbert space, for quantum-like models.
    pub fn to_matrix(&self) -> Option<CMat> {
        self.model.layout().map(|l| l.to_matrix(self.coords.as_slice()))
    }
}

impl EffectVec {
    pub fn new(model: &Model, coords: DVector<f64>) -> Result<Self> {
        model.check_dim(coords.len())?;
        Ok(Self { model: model.clone(), coords })
    }

    pub fn from_slice(model: &Model, coords: &[f64]) -> Result<Self> {
        Self::new(model, DVector::from_column_slice(coords))
    }

    pub(crate) fn raw(model: &Model, coords: DVector<f64>) -> Self {
        Self { model: model.clone(), coords }
    }

    /// The deterministic effect `u`.
    pub fn unit(model: &Model) -> Self {
        Self::raw(model, model.unit_effect.clone())
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    /// Checks `0 ≤ (a|ρ) ≤ 1` on every pure state (eigenvalues in `[0, 1]`
    /// for quantum-like models).
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = effect_range(&self.model, &self.coords);
        if lo < -TOL || hi > 1.0 + TOL {
            return Err(Error::ConeViolation { distance: (-lo).max(hi - 1.0) });
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Option<CMat> {
        self.model.layout().map(|l| l.to_matrix(self.coords.as_slice()))
    }
}

/// Smallest and largest value of `(a|ρ)` over normalised states.
pub(crate) fn effect_range(model: &ModelSpec, a: &DVector<f64>) -> (f64, f64) {
    match model.layout() {
        Some(layout) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..layout.sector_count() {
                let (vals, _) =
                    crate::hilbert::hermitian_eigen(&layout.block(a.as_slice(), k), layout.field());
                for v in vals {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            (lo, hi)
        }
        None => {
            let vs = model.vertices().expect("polytope models list their vertices");
            vs.iter().map(|v| a.dot(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
                (l.min(p), h.max(p))
            })
        }
    }
}

/// The probability `(a|ρ)`.
pub fn pairing(a: &EffectVec, rho: &StateVec) -> Result<f64> {
    a.model.require_same(&rho.model)?;
    if a.coords.len() != rho.coords.len() {
        return Err(Error::Dimension { expected: a.coords.len(), found: rho.coords.len() });
    }
    Ok(a.coords.dot(&rho.coords))
}
