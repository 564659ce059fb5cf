use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::cone::{cone_distance, cone_membership, Membership};
use crate::gpt::model::{ConeSpec, Model};
use crate::gpt::vectors::{EffectVec, StateVec};
use crate::hilbert::{hermitian_eigen, kraus_apply, CMat, Field, HilbertLayout, C64};
use crate::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelTag {
    Reversible,
    Unital,
    /// Random-reversible: a convex mixture of reversible channels.
    Rare,
    MeasureAndPrepare,
}

impl ChannelTag {
    pub fn name(self) -> &'static str {
        match self {
            ChannelTag::Reversible => "reversible",
            ChannelTag::Unital => "unital",
            ChannelTag::Rare => "rare",
            ChannelTag::MeasureAndPrepare => "measure_and_prepare",
        }
    }
}

/// A linear map between state spaces satisfying `u_out ∘ M = u_in`.
#[derive(Debug, Clone)]
pub struct ChannelMap {
    input: Model,
    output: Model,
    matrix: DMatrix<f64>,
    tags: BTreeSet<ChannelTag>,
    inverse: Option<DMatrix<f64>>,
    witness: Option<Vec<(f64, ChannelMap)>>,
    kraus: Option<Vec<CMat>>,
}

/// `‖u_outᵀ M − u_inᵀ‖_∞`.
pub fn channel_residual(input: &Model, output: &Model, matrix: &DMatrix<f64>) -> f64 {
    let row = matrix.tr_mul(output.unit_effect());
    (row - input.unit_effect()).amax()
}

impl ChannelMap {
    pub fn new(input: &Model, output: &Model, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != output.vector_dim() {
            return Err(Error::Dimension { expected: output.vector_dim(), found: matrix.nrows() });
        }
        if matrix.ncols() != input.vector_dim() {
            return Err(Error::Dimension { expected: input.vector_dim(), found: matrix.ncols() });
        }
        let residual = channel_residual(input, output, &matrix);
        if residual > TOL {
            return Err(Error::NotAChannel { residual });
        }
        Ok(Self {
            input: input.clone(),
            output: output.clone(),
            matrix,
            tags: BTreeSet::new(),
            inverse: None,
            witness: None,
            kraus: None,
        })
    }

    pub fn identity(model: &Model) -> Self {
        let d = model.vector_dim();
        let mut c = Self::new(model, model, DMatrix::identity(d, d)).expect("identity is a channel");
        c.inverse = Some(DMatrix::identity(d, d));
        c.tags.insert(ChannelTag::Reversible);
        c.tags.insert(ChannelTag::Unital);
        if let Some(l) = model.layout() {
            let n = l.hilbert_dim();
            c.kraus = Some(vec![CMat::identity(n, n)]);
        }
        c
    }

    /// The deterministic effect seen as a channel onto the trivial system.
    pub fn discard(model: &Model) -> Result<Self> {
        let trivial = crate::zoo::trivial_system();
        let m = DMatrix::from_row_slice(1, model.vector_dim(), model.unit_effect().as_slice());
        Self::new(model, &trivial, m)
    }

    /// The channel `X ↦ Σ K X K†` between quantum-like models.
    pub fn from_kraus(input: &Model, output: &Model, kraus: Vec<CMat>) -> Result<Self> {
        let (lin, lout) = layouts(input, output)?;
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.nrows() != lout.hilbert_dim() || k.ncols() != lin.hilbert_dim() {
                return Err(Error::Dimension { expected: lin.hilbert_dim(), found: k.ncols() });
            }
        }
        let matrix = kraus_matrix(lin, lout, &kraus)?;
        let mut c = Self::new(input, output, matrix)?;
        c.kraus = Some(kraus);
        Ok(c)
    }

    /// Conjugation by a unitary (orthogonal for real models). The unitary
    /// must map sectors onto sectors.
    pub fn unitary(model: &Model, u: &CMat) -> Result<Self> {
        let n = u.nrows();
        let defect = (u.adjoint() * u - CMat::identity(n, n)).camax();
        if u.ncols() != n || defect > 1e-8 {
            return Err(Error::InvalidParameter(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        let mut c = Self::from_kraus(model, model, vec![u.clone()])?;
        let inv = Self::from_kraus(model, model, vec![u.adjoint()])?;
        c.inverse = Some(inv.matrix);
        c.tags.insert(ChannelTag::Reversible);
        c.tag_unital_if_possible();
        Ok(c)
    }

    /// A reversible channel given by its matrix. The inverse is computed and
    /// must itself map the state cone into itself.
    pub fn reversible(model: &Model, matrix: DMatrix<f64>) -> Result<Self> {
        let mut c = Self::new(model, model, matrix)?;
        let inv = c.matrix.clone().try_inverse().ok_or_else(|| Error::InvalidTag {
            tag: "reversible",
            reason: "matrix is singular".into(),
        })?;
        let residual = channel_residual(model, model, &inv);
        if residual > TOL {
            return Err(Error::InvalidTag {
                tag: "reversible",
                reason: format!("inverse violates the channel condition by {residual:.3e}"),
            });
        }
        match model.state_cone() {
            ConeSpec::Vertex { generators } => {
                for g in generators {
                    for m in [&c.matrix, &inv] {
                        let image = m * g;
                        if let Membership::Outside { distance } = cone_membership(&image, model.state_cone()) {
                            return Err(Error::InvalidTag {
                                tag: "reversible",
                                reason: format!("maps a generator out of the cone by {distance:.3e}"),
                            });
                        }
                    }
                }
            }
            ConeSpec::Blocks(_) => {
                let d = model.vector_dim();
                let defect = (c.matrix.tr_mul(&c.matrix) - DMatrix::identity(d, d)).amax();
                if defect > 1e-8 {
                    return Err(Error::InvalidTag {
                        tag: "reversible",
                        reason: format!("map does not preserve the trace inner product ({defect:.3e})"),
                    });
                }
            }
        }
        c.inverse = Some(inv);
        c.tags.insert(ChannelTag::Reversible);
        c.tag_unital_if_possible();
        Ok(c)
    }

    /// `ρ ↦ Σ_i (a_i|ρ) ρ_i`.
    pub fn measure_and_prepare(
        input: &Model,
        output: &Model,
        effects: &[EffectVec],
        states: &[StateVec],
    ) -> Result<Self> {
        if effects.len() != states.len() || effects.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} effects for {} preparations",
                effects.len(),
                states.len()
            )));
        }
        let mut matrix = DMatrix::zeros(output.vector_dim(), input.vector_dim());
        for (a, s) in effects.iter().zip(states) {
            input.require_same(a.model())?;
            output.require_same(s.model())?;
            matrix += s.coords() * a.coords().transpose();
        }
        let mut c = Self::new(input, output, matrix)?;
        if let (Some(lin), Some(lout)) = (input.layout(), output.layout()) {
            c.kraus = measure_prepare_kraus(lin, lout, effects, states);
        }
        c.tags.insert(ChannelTag::MeasureAndPrepare);
        c.tag_unital_if_possible();
        Ok(c)
    }

    /// Convex mixture `Σ_k w_k C_k`. A mixture of reversible channels is
    /// tagged `rare` and keeps the mixture as its witness.
    pub fn mixture(weights: &[f64], channels: &[ChannelMap]) -> Result<Self> {
        if weights.len() != channels.len() || channels.is_empty() {
            return Err(Error::InvalidParameter("weights and channels differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < -TOL) || (total - 1.0).abs() > TOL {
            return Err(Error::InvalidParameter(format!(
                "weights {weights:?} are not a probability distribution"
            )));
        }
        let first = &channels[0];
        let mut matrix = DMatrix::zeros(first.output.vector_dim(), first.input.vector_dim());
        for (w, c) in weights.iter().zip(channels) {
            first.input.require_same(&c.input)?;
            first.output.require_same(&c.output)?;
            matrix += &c.matrix * *w;
        }
        let mut out = Self::new(&first.input, &first.output, matrix)?;
        if channels.iter().all(|c| c.kraus.is_some()) {
            let mut ks = Vec::new();
            for (w, c) in weights.iter().zip(channels) {
                if *w > 0.0 {
                    let s = C64::new(w.sqrt(), 0.0);
                    ks.extend(c.kraus.as_ref().unwrap().iter().map(|k| k * s));
                }
            }
            out.kraus = Some(ks);
        }
        if channels.iter().all(|c| c.has_tag(ChannelTag::Reversible)) {
            let witness = weights
                .iter()
                .zip(channels)
                .map(|(w, c)| (w.max(0.0), c.clone()))
                .collect();
            out.witness = Some(witness);
            out.tags.insert(ChannelTag::Rare);
        }
        if channels.iter().all(|c| c.has_tag(ChannelTag::Unital)) {
            out.tags.insert(ChannelTag::Unital);
        } else {
            out.tag_unital_if_possible();
        }
        Ok(out)
    }

    pub fn input(&self) -> &Model {
        &self.input
    }

    pub fn output(&self) -> &Model {
        &self.output
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn tags(&self) -> &BTreeSet<ChannelTag> {
        &self.tags
    }

    pub fn has_tag(&self, tag: ChannelTag) -> bool {
        self.tags.contains(&tag)
    }

    /// Reversible mixture witnessing a `rare` tag.
    pub fn witness(&self) -> Option<&[(f64, ChannelMap)]> {
        self.witness.as_deref()
    }

    pub fn kraus(&self) -> Option<&[CMat]> {
        self.kraus.as_deref()
    }

    /// The inverse channel of a reversible channel.
    pub fn inverse(&self) -> Option<ChannelMap> {
        let inv = self.inverse.as_ref()?;
        let mut c = ChannelMap::new(&self.output, &self.input, inv.clone()).ok()?;
        c.inverse = Some(self.matrix.clone());
        c.tags = self
            .tags
            .iter()
            .copied()
            .filter(|t| matches!(t, ChannelTag::Reversible | ChannelTag::Unital))
            .collect();
        c.kraus = self
            .kraus
            .as_ref()
            .filter(|k| k.len() == 1)
            .map(|k| vec![k[0].adjoint()]);
        Some(c)
    }

    /// Adds a tag after verifying the corresponding property.
    pub fn with_tag(mut self, tag: ChannelTag) -> Result<Self> {
        match tag {
            ChannelTag::Unital => {
                let residual = self.unital_residual()?;
                if residual > TOL {
                    return Err(Error::InvalidTag {
                        tag: tag.name(),
                        reason: format!("C χ differs from χ by {residual:.3e}"),
                    });
                }
            }
            ChannelTag::Reversible => {
                if self.inverse.is_none() {
                    let r = ChannelMap::reversible(&self.input, self.matrix.clone())?;
                    self.inverse = r.inverse;
                }
            }
            ChannelTag::Rare => {
                let ok = self.witness.as_ref().is_some_and(|w| {
                    let total: f64 = w.iter().map(|(p, _)| p).sum();
                    (total - 1.0).abs() <= TOL
                        && w.iter().all(|(p, c)| *p >= 0.0 && c.has_tag(ChannelTag::Reversible))
                });
                if !ok && !self.has_tag(ChannelTag::Reversible) {
                    return Err(Error::InvalidTag {
                        tag: tag.name(),
                        reason: "no reversible mixture witness".into(),
                    });
                }
            }
            ChannelTag::MeasureAndPrepare => {
                return Err(Error::InvalidTag {
                    tag: tag.name(),
                    reason: "only assigned by the measure-and-prepare constructor".into(),
                })
            }
        }
        self.tags.insert(tag);
        Ok(self)
    }

    /// `‖C χ_in − χ_out‖_∞`, requiring unique invariant states on both ends.
    pub fn unital_residual(&self) -> Result<f64> {
        let chi_in = crate::symmetry::chi(&self.input)?;
        let chi_out = crate::symmetry::chi(&self.output)?;
        Ok((&self.matrix * chi_in.coords() - chi_out.coords()).amax())
    }

    pub(crate) fn set_inverse(&mut self, inverse: DMatrix<f64>) {
        self.inverse = Some(inverse);
    }

    pub(crate) fn insert_tag(&mut self, tag: ChannelTag) {
        self.tags.insert(tag);
    }

    fn tag_unital_if_possible(&mut self) {
        if matches!(self.unital_residual(), Ok(r) if r <= TOL) {
            self.tags.insert(ChannelTag::Unital);
        }
    }

    /// Applies the channel to a state, rejecting outputs that leave the cone.
    pub fn apply(&self, rho: &StateVec) -> Result<StateVec> {
        self.input.require_same(rho.model())?;
        let out = &self.matrix * rho.coords();
        let distance = cone_distance(&out, self.output.state_cone());
        if distance > TOL * out.amax().max(1.0) {
            return Err(Error::ConeViolation { distance });
        }
        Ok(StateVec::raw(&self.output, out))
    }

    /// Applies the linear map to an arbitrary coordinate vector.
    pub fn apply_coords(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        self.input.check_dim(xi.len())?;
        Ok(&self.matrix * xi)
    }
}

fn layouts<'a>(input: &'a Model, output: &'a Model) -> Result<(&'a HilbertLayout, &'a HilbertLayout)> {
    match (input.layout(), output.layout()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Structure(format!(
            "Kraus operators need Hilbert-space models, got {} → {}",
            input.id(),
            output.id()
        ))),
    }
}

fn kraus_matrix(lin: &HilbertLayout, lout: &HilbertLayout, kraus: &[CMat]) -> Result<DMatrix<f64>> {
    let din = lin.coord_dim();
    let mut matrix = DMatrix::zeros(lout.coord_dim(), din);
    let mut e = vec![0.0; din];
    for j in 0..din {
        e[j] = 1.0;
        let x = lin.to_matrix(&e);
        e[j] = 0.0;
        let (col, leakage) = lout.from_matrix(&kraus_apply(kraus, &x));
        if leakage > TOL {
            return Err(Error::Structure(format!(
                "Kraus family creates coherence {leakage:.3e} across sectors"
            )));
        }
        matrix.set_column(j, &DVector::from_vec(col));
    }
    Ok(matrix)
}

/// Kraus operators `√(λ_k μ_l) |f_l⟩⟨e_k|` built from spectral
/// decompositions of each effect `a = Σ λ_k |e_k⟩⟨e_k|` and preparation
/// `ρ = Σ μ_l |f_l⟩⟨f_l|`. Returns `None` when an effect or preparation is
/// not positive semidefinite.
fn measure_prepare_kraus(
    lin: &HilbertLayout,
    lout: &HilbertLayout,
    effects: &[EffectVec],
    states: &[StateVec],
) -> Option<Vec<CMat>> {
    let spectral = |layout: &HilbertLayout, coords: &[f64]| -> Option<Vec<(f64, crate::hilbert::CVec)>> {
        let mut out = Vec::new();
        for k in 0..layout.sector_count() {
            let (vals, vecs) = hermitian_eigen(&layout.block(coords, k), layout.field());
            let off = layout.sector_offset(k);
            for (v, vec) in vals.into_iter().zip(vecs) {
                if v < -1e-9 {
                    return None;
                }
                if v > 1e-14 {
                    let mut full = crate::hilbert::CVec::zeros(layout.hilbert_dim());
                    full.rows_mut(off, vec.len()).copy_from(&vec);
                    out.push((v, full));
                }
            }
        }
        Some(out)
    };
    let mut kraus = Vec::new();
    for (a, s) in effects.iter().zip(states) {
        let ea = spectral(lin, a.coords().as_slice())?;
        let fs = spectral(lout, s.coords().as_slice())?;
        for (lambda, e) in &ea {
            for (mu, f) in &fs {
                let w = C64::new((lambda * mu).sqrt(), 0.0);
                kraus.push(f * e.adjoint() * w);
            }
        }
    }
    Some(kraus)
}

/// Kraus operators of a channel on a quantum or classical model,
/// recovered from its Choi operator when none were recorded.
pub(crate) fn kraus_of(c: &ChannelMap) -> Result<Vec<CMat>> {
    if let Some(k) = &c.kraus {
        return Ok(k.clone());
    }
    let (lin, lout) = layouts(&c.input, &c.output)?;
    let simple = |l: &HilbertLayout| l.sector_count() == 1 || l.sectors().iter().all(|&n| n == 1);
    if lin.field() != Field::Complex || !simple(lin) {
        return Err(Error::Composition(format!(
            "channel on {} has no recorded Kraus representation",
            c.input.id()
        )));
    }
    let n = lin.hilbert_dim();
    let m = lout.hilbert_dim();
    let phi = |h: &CMat| -> CMat {
        let (coords, _) = lin.from_matrix(h);
        let out = &c.matrix * DVector::from_vec(coords);
        lout.to_matrix(out.as_slice())
    };
    let mut choi = CMat::zeros(n * m, n * m);
    let i = C64::new(0.0, 1.0);
    for a in 0..n {
        for b in 0..n {
            let mut e_ab = CMat::zeros(n, n);
            e_ab[(a, b)] = C64::new(1.0, 0.0);
            let herm = (&e_ab + e_ab.adjoint()) * C64::new(0.5, 0.0);
            let anti = (&e_ab - e_ab.adjoint()) * C64::new(0.0, -0.5);
            let image = phi(&herm) + phi(&anti) * i;
            choi.view_mut((a * m, b * m), (m, m)).copy_from(&image);
        }
    }
    let (vals, vecs) = hermitian_eigen(&choi, Field::Complex);
    let mut kraus = Vec::new();
    for (lambda, v) in vals.into_iter().zip(vecs) {
        if lambda < -1e-8 {
            return Err(Error::Composition(format!(
                "map on {} is not completely positive (Choi eigenvalue {lambda:.3e})",
                c.input.id()
            )));
        }
        if lambda > 1e-12 {
            let s = lambda.sqrt();
            kraus.push(CMat::from_fn(m, n, |r, col| v[col * m + r] * s));
        }
    }
    Ok(kraus)
}

/// Sequential composition `C2 ∘ C1`.
pub fn compose(c2: &ChannelMap, c1: &ChannelMap) -> Result<ChannelMap> {
    c1.output.require_same(&c2.input)?;
    let mut out = ChannelMap::new(&c1.input, &c2.output, &c2.matrix * &c1.matrix)?;
    if let (Some(k2), Some(k1)) = (&c2.kraus, &c1.kraus) {
        out.kraus = Some(k2.iter().flat_map(|b| k1.iter().map(move |a| b * a)).collect());
    }
    for tag in [ChannelTag::Reversible, ChannelTag::Unital] {
        if c1.has_tag(tag) && c2.has_tag(tag) {
            out.tags.insert(tag);
        }
    }
    if let (Some(i1), Some(i2)) = (&c1.inverse, &c2.inverse) {
        out.inverse = Some(i1 * i2);
    }
    let parts = |c: &ChannelMap| -> Option<Vec<(f64, ChannelMap)>> {
        match &c.witness {
            Some(w) => Some(w.clone()),
            None if c.has_tag(ChannelTag::Reversible) => Some(vec![(1.0, c.clone())]),
            None => None,
        }
    };
    if let (Some(w2), Some(w1)) = (parts(c2), parts(c1)) {
        if w1.len() * w2.len() > 1 && w1.len() * w2.len() <= 4096 {
            let mut witness = Vec::with_capacity(w1.len() * w2.len());
            for (p2, b) in &w2 {
                for (p1, a) in &w1 {
                    witness.push((p1 * p2, compose(b, a)?));
                }
            }
            out.witness = Some(witness);
            out.tags.insert(ChannelTag::Rare);
        }
    }
    Ok(out)
}

fn lifted(c1: &ChannelMap, c2: &ChannelMap) -> Result<ChannelMap> {
    let ab_in = crate::zoo::compose_systems(&c1.input, &c2.input)?;
    let ab_out = crate::zoo::compose_systems(&c1.output, &c2.output)?;
    let k1 = kraus_of(c1)?;
    let k2 = kraus_of(c2)?;
    let cin = ab_in.composite().expect("composite model");
    let cout = ab_out.composite().expect("composite model");
    let lift = |a: &CMat, b: &CMat| -> CMat {
        CMat::from_fn(cout.pairs().len(), cin.pairs().len(), |r, c| {
            let (xo, yo) = cout.pairs()[r];
            let (xi, yi) = cin.pairs()[c];
            a[(xo, xi)] * b[(yo, yi)]
        })
    };
    let kraus: Vec<CMat> = k1.iter().flat_map(|a| k2.iter().map(move |b| lift(a, b))).collect();
    ChannelMap::from_kraus(&ab_in, &ab_out, kraus)
}

/// Parallel composition on the composite systems built by the model zoo.
pub fn tensor(c1: &ChannelMap, c2: &ChannelMap) -> Result<ChannelMap> {
    let mut out = lifted(c1, c2)?;
    if c1.has_tag(ChannelTag::Reversible) && c2.has_tag(ChannelTag::Reversible) {
        if let (Some(a), Some(b)) = (c1.inverse(), c2.inverse()) {
            out.inverse = Some(lifted(&a, &b)?.matrix);
            out.tags.insert(ChannelTag::Reversible);
        }
    }
    if c1.has_tag(ChannelTag::Unital) && c2.has_tag(ChannelTag::Unital) {
        out.tag_unital_if_possible();
    }
    Ok(out)
}
