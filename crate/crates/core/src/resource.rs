//! Majorisation, doubly stochastic matrices, and the three convertibility
//! preorders on states (random-reversible, noisy, unital).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::cone::distinguishing_test;
use crate::gpt::model::ConeSpec;
use crate::gpt::{ChannelMap, ChannelTag, Model, ModelKind, StateVec};
use crate::hilbert::{hermitian_eigen, CMat, CVec, C64};
use crate::spectral::diagonalize;
use crate::symmetry::group_elements;
use crate::zoo::subsets;
use crate::{DEGENERACY_TOL, ZERO_NORM};

/// Tolerance on prefix sums and on the totals of compared distributions.
const MAJORIZATION_TOL: f64 = 1e-9;

/// Evidence that a conversion is impossible.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// 1-based prefix length `k` with `Σ_{i≤k} p↓ < Σ_{i≤k} q↓`.
    Prefix { index: usize, lhs: f64, rhs: f64 },
    /// Sorted per-sector spectra differ even up to sector permutations.
    SectorSpectra { from: Vec<Vec<f64>>, to: Vec<Vec<f64>> },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Prefix { index, lhs, rhs } => {
                write!(f, "prefix sum {index}: {lhs:.6} < {rhs:.6}")
            }
            Certificate::SectorSpectra { from, to } => {
                write!(f, "sector spectra {from:?} vs {to:?}")
            }
        }
    }
}

pub fn sorted_desc(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `None` when `p ⪰ q`, otherwise the first failing prefix.
pub fn majorization_certificate(p: &[f64], q: &[f64]) -> Result<Option<Certificate>> {
    let n = p.len().max(q.len());
    let pad = |v: &[f64]| {
        let mut s = sorted_desc(v);
        s.resize(n, 0.0);
        s
    };
    let (ps, qs) = (pad(p), pad(q));
    if let Some(x) = ps.iter().chain(&qs).find(|x| **x < -MAJORIZATION_TOL || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("entry {x} is not a probability")));
    }
    let (sp, sq): (f64, f64) = (ps.iter().sum(), qs.iter().sum());
    if (sp - sq).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("totals differ: {sp} vs {sq}")));
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for k in 0..n {
        lhs += ps[k];
        rhs += qs[k];
        if lhs < rhs - MAJORIZATION_TOL {
            return Ok(Some(Certificate::Prefix { index: k + 1, lhs, rhs }));
        }
    }
    Ok(None)
}

/// `p ⪰ q`: every prefix sum of `p↓` dominates that of `q↓`.
pub fn majorizes(p: &[f64], q: &[f64]) -> Result<bool> {
    Ok(majorization_certificate(p, q)?.is_none())
}

pub fn check_doubly_stochastic(d: &DMatrix<f64>) -> Result<()> {
    if !d.is_square() {
        return Err(Error::Dimension { expected: d.nrows(), found: d.ncols() });
    }
    let mut deviation: f64 = d.iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max);
    for i in 0..d.nrows() {
        deviation = deviation.max((d.row(i).sum() - 1.0).abs()).max((d.column(i).sum() - 1.0).abs());
    }
    if deviation > 1e-8 {
        return Err(Error::NotDoublyStochastic { deviation });
    }
    Ok(())
}

/// `perm[j]` is the row holding the 1 of column `j`, so `(Π p)_{perm[j]} = p_j`.
pub type Permutation = Vec<usize>;

pub fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(perm.len(), perm.len());
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = 1.0;
    }
    m
}

/// Perfect matching of columns to rows using entries `≥ threshold`.
fn perfect_matching(m: &DMatrix<f64>, threshold: f64) -> Option<Permutation> {
    let n = m.nrows();
    let mut row_of_col: Vec<Option<usize>> = vec![None; n];
    let mut col_of_row: Vec<Option<usize>> = vec![None; n];
    fn augment(
        m: &DMatrix<f64>,
        t: f64,
        col: usize,
        seen: &mut [bool],
        row_of_col: &mut [Option<usize>],
        col_of_row: &mut [Option<usize>],
    ) -> bool {
        for row in 0..m.nrows() {
            if m[(row, col)] >= t && !seen[row] {
                seen[row] = true;
                let free = match col_of_row[row] {
                    None => true,
                    Some(other) => augment(m, t, other, seen, row_of_col, col_of_row),
                };
                if free {
                    row_of_col[col] = Some(row);
                    col_of_row[row] = Some(col);
                    return true;
                }
            }
        }
        false
    }
    for col in 0..n {
        let mut seen = vec![false; n];
        if !augment(m, threshold, col, &mut seen, &mut row_of_col, &mut col_of_row) {
            return None;
        }
    }
    Some(row_of_col.into_iter().map(|r| r.unwrap()).collect())
}

/// Convex decomposition `D = Σ_k λ_k Π_k`. Each step peels the
/// permutation whose smallest entry in `D` is largest, which zeroes at
/// least one entry, so at most `(d−1)² + 1` terms are produced.
pub fn birkhoff_decompose(d: &DMatrix<f64>) -> Result<Vec<(f64, Permutation)>> {
    check_doubly_stochastic(d)?;
    let n = d.nrows();
    let mut rest = d.map(|x| if x > ZERO_NORM { x } else { 0.0 });
    let mut terms = Vec::new();
    while rest.amax() > ZERO_NORM {
        let mut levels: Vec<f64> = rest.iter().copied().filter(|x| *x > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        // bottleneck matching by bisection over the distinct entries
        let (mut lo, mut hi) = (0usize, levels.len() - 1);
        let mut best = perfect_matching(&rest, levels[0]).ok_or_else(|| {
            Error::NotDoublyStochastic { deviation: rest.iter().sum::<f64>() }
        })?;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            match perfect_matching(&rest, levels[mid]) {
                Some(m) => {
                    best = m;
                    lo = mid;
                }
                None => hi = mid - 1,
            }
        }
        let weight = best.iter().enumerate().map(|(j, &i)| rest[(i, j)]).fold(f64::INFINITY, f64::min);
        for (j, &i) in best.iter().enumerate() {
            let v = rest[(i, j)] - weight;
            rest[(i, j)] = if v > ZERO_NORM { v } else { 0.0 };
        }
        terms.push((weight, best));
        if terms.len() > n * n {
            return Err(Error::Internal("Birkhoff peeling did not terminate".into()));
        }
    }
    Ok(terms)
}

/// A doubly stochastic `D` with `q = D p`, built from a chain of
/// two-entry averaging steps.
pub fn doubly_stochastic_for(p: &[f64], q: &[f64]) -> Result<DMatrix<f64>> {
    if p.len() != q.len() {
        return Err(Error::Dimension { expected: p.len(), found: q.len() });
    }
    if let Some(c) = majorization_certificate(p, q)? {
        return Err(Error::NotMajorized(c));
    }
    let n = p.len();
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        idx
    };
    let (ip, iq) = (order(p), order(q));
    let mut x: Vec<f64> = ip.iter().map(|&i| p[i]).collect();
    let y: Vec<f64> = iq.iter().map(|&i| q[i]).collect();
    let mut d = DMatrix::<f64>::identity(n, n);
    const EPS: f64 = 1e-15;
    for _ in 0..2 * n {
        let Some(j) = (0..n).rev().find(|&i| x[i] > y[i] + EPS) else { break };
        let Some(k) = (j + 1..n).find(|&i| x[i] < y[i] - EPS) else { break };
        let delta = (x[j] - y[j]).min(y[k] - x[k]);
        let lambda = 1.0 - delta / (x[j] - x[k]);
        let mut t = DMatrix::<f64>::identity(n, n) * lambda;
        t[(j, k)] = 1.0 - lambda;
        t[(k, j)] = 1.0 - lambda;
        t[(k, k)] = lambda;
        t[(j, j)] = lambda;
        for i in 0..n {
            if i != j && i != k {
                t[(i, i)] = 1.0;
            }
        }
        d = t * d;
        x[j] -= delta;
        x[k] += delta;
    }
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(iq[a], ip[b])] = d[(a, b)];
        }
    }
    Ok(out)
}

/// A unital measure-and-prepare channel taking `ρ` to `σ`: measure the
/// eigenbasis of `ρ` and, on outcome `j`, prepare `Σ_i D_ij α'_i` where
/// `α'_i` are the eigenstates of `σ`.
pub fn build_unital_channel(rho: &StateVec, sigma: &StateVec) -> Result<ChannelMap> {
    let model = rho.model();
    model.require_same(sigma.model())?;
    let (dr, ds) = (diagonalize(rho)?, diagonalize(sigma)?);
    let d = doubly_stochastic_for(&dr.eigenvalues, &ds.eigenvalues)?;
    let states: Vec<StateVec> = (0..d.ncols())
        .map(|j| {
            let coords = ds
                .eigenstates
                .iter()
                .enumerate()
                .fold(DVector::zeros(model.vector_dim()), |acc, (i, s)| acc + s.coords() * d[(i, j)]);
            StateVec::raw(model, coords)
        })
        .collect();
    let c = ChannelMap::measure_and_prepare(model, model, &dr.dagger_effects, &states)?;
    if c.has_tag(ChannelTag::Unital) {
        Ok(c)
    } else {
        c.with_tag(ChannelTag::Unital)
    }
}

/// A mixture of reversible channels taking `ρ` to `σ`. Term `k` rotates
/// the eigenbasis of `ρ` onto that of `σ` and then permutes by the `k`-th
/// Birkhoff permutation of the doubly stochastic matrix linking the spectra.
pub fn build_rare_channel(rho: &StateVec, sigma: &StateVec) -> Result<ChannelMap> {
    let model = rho.model();
    model.require_same(sigma.model())?;
    if !model.flags().unrestricted_reversibility {
        return Err(Error::Unsupported(format!(
            "{} lacks unrestricted reversibility; majorisation is not sufficient here",
            model.id()
        )));
    }
    let (dr, ds) = (diagonalize(rho)?, diagonalize(sigma)?);
    let d = doubly_stochastic_for(&dr.eigenvalues, &ds.eigenvalues)?;
    let (a, b) = match (&dr.eigenvectors, &ds.eigenvectors) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Unsupported(format!("{} has no eigenbasis rotations", model.id()))),
    };
    let n = a.len();
    let mut weights = Vec::new();
    let mut channels = Vec::new();
    for (w, perm) in birkhoff_decompose(&d)? {
        let u = (0..n).fold(CMat::zeros(n, n), |acc, j| acc + &b[perm[j]] * a[j].adjoint());
        weights.push(w);
        channels.push(ChannelMap::unitary(model, &u)?);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    ChannelMap::mixture(&weights, &channels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theory {
    Rare,
    Noisy,
    Unital,
}

impl Theory {
    pub fn name(self) -> &'static str {
        match self {
            Theory::Rare => "rare",
            Theory::Noisy => "noisy",
            Theory::Unital => "unital",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rare" => Ok(Theory::Rare),
            "noisy" => Ok(Theory::Noisy),
            "unital" => Ok(Theory::Unital),
            other => Err(Error::Parse(format!("unknown theory `{other}` (rare|noisy|unital)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Answer {
    Yes(ChannelMap),
    No(Certificate),
    Unknown(String),
}

impl Answer {
    pub fn label(&self) -> &'static str {
        match self {
            Answer::Yes(_) => "yes",
            Answer::No(_) => "no",
            Answer::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvertibilityVerdict {
    pub theory: Theory,
    pub answer: Answer,
}

impl ConvertibilityVerdict {
    fn new(theory: Theory, answer: Answer) -> Self {
        Self { theory, answer }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self.answer, Answer::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self.answer, Answer::No(_))
    }
}

/// Sorted spectrum of every sector block.
pub fn sector_spectra(rho: &StateVec) -> Result<Vec<Vec<f64>>> {
    let layout = rho
        .model()
        .layout()
        .ok_or_else(|| Error::Unsupported(format!("{} has no sectors", rho.model().id())))?;
    Ok((0..layout.sector_count())
        .map(|k| sorted_desc(&hermitian_eigen(&layout.block(rho.coords().as_slice(), k), layout.field()).0))
        .collect())
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < DEGENERACY_TOL)
}

/// Assigns each sector of `from` a distinct sector of `to` with the same
/// spectrum, if possible.
fn match_sectors(from: &[Vec<f64>], to: &[Vec<f64>]) -> Option<Vec<usize>> {
    let mut used = vec![false; to.len()];
    let mut out = Vec::with_capacity(from.len());
    for f in from {
        let k = (0..to.len()).find(|&k| !used[k] && close(f, &to[k]))?;
        used[k] = true;
        out.push(k);
    }
    Some(out)
}

/// A reversible channel mapping `ρ` to `σ` on a sectorised model: block
/// eigenbases are aligned after permuting sectors with equal spectra.
fn sector_aligning_unitary(rho: &StateVec, sigma: &StateVec, target: &[usize]) -> Result<ChannelMap> {
    let model = rho.model();
    let layout = model.layout().unwrap();
    let n = layout.hilbert_dim();
    let eig = |s: &StateVec, k: usize| {
        let (vals, vecs) = hermitian_eigen(&layout.block(s.coords().as_slice(), k), layout.field());
        let mut pairs: Vec<(f64, CVec)> = vals.into_iter().zip(vecs).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs
    };
    let mut u = CMat::zeros(n, n);
    for (k, &t) in target.iter().enumerate() {
        let (src, dst) = (eig(rho, k), eig(sigma, t));
        if layout.sectors()[k] != layout.sectors()[t] {
            return Err(Error::Internal("sector sizes differ".into()));
        }
        let (ok, ot) = (layout.sector_offset(k), layout.sector_offset(t));
        let m = src.iter().zip(&dst).fold(CMat::zeros(dst.len(), src.len()), |acc, (a, b)| acc + &b.1 * a.1.adjoint());
        u.view_mut((ot, ok), (m.nrows(), m.ncols())).copy_from(&m);
    }
    ChannelMap::unitary(model, &u)?.with_tag(ChannelTag::Rare)
}

/// Decides, or honestly declines to decide, whether `ρ` converts to `σ`.
pub fn convertible(rho: &StateVec, sigma: &StateVec, theory: Theory) -> Result<ConvertibilityVerdict> {
    let model = rho.model();
    model.require_same(sigma.model())?;
    for s in [rho, sigma] {
        if !s.is_normalized() {
            return Err(Error::InvalidParameter(format!("state is not normalised (trace {})", s.trace())));
        }
    }
    if model.layout().is_none() {
        return Ok(ConvertibilityVerdict::new(
            theory,
            Answer::Unknown(format!("{} has no spectral theory to decide convertibility", model.id())),
        ));
    }
    match theory {
        Theory::Unital => Ok(ConvertibilityVerdict::new(
            theory,
            match build_unital_channel(rho, sigma) {
                Ok(c) => Answer::Yes(c),
                Err(Error::NotMajorized(cert)) => Answer::No(cert),
                Err(e) => return Err(e),
            },
        )),
        Theory::Rare => {
            if model.flags().unrestricted_reversibility {
                return Ok(ConvertibilityVerdict::new(
                    theory,
                    match build_rare_channel(rho, sigma) {
                        Ok(c) => Answer::Yes(c),
                        Err(Error::NotMajorized(cert)) => Answer::No(cert),
                        Err(e) => return Err(e),
                    },
                ));
            }
            let (p, q) = (diagonalize(rho)?.eigenvalues, diagonalize(sigma)?.eigenvalues);
            if let Some(cert) = majorization_certificate(&p, &q)? {
                return Ok(ConvertibilityVerdict::new(theory, Answer::No(cert)));
            }
            if model.flags().sectorized && close(&p, &q) {
                // equal spectra: a random-reversible conversion must be a
                // single reversible map, which preserves sector spectra
                let (from, to) = (sector_spectra(rho)?, sector_spectra(sigma)?);
                return Ok(ConvertibilityVerdict::new(
                    theory,
                    match match_sectors(&from, &to) {
                        Some(target) => Answer::Yes(sector_aligning_unitary(rho, sigma, &target)?),
                        None => Answer::No(Certificate::SectorSpectra { from, to }),
                    },
                ));
            }
            Ok(ConvertibilityVerdict::new(
                theory,
                Answer::Unknown(format!(
                    "{} lacks unrestricted reversibility and no invariant separates the states",
                    model.id()
                )),
            ))
        }
        Theory::Noisy => {
            let rare = convertible(rho, sigma, Theory::Rare)?;
            if let Answer::Yes(c) = rare.answer {
                return Ok(ConvertibilityVerdict::new(theory, Answer::Yes(c)));
            }
            let unital = convertible(rho, sigma, Theory::Unital)?;
            if let Answer::No(cert) = unital.answer {
                return Ok(ConvertibilityVerdict::new(theory, Answer::No(cert)));
            }
            Ok(ConvertibilityVerdict::new(
                theory,
                Answer::Unknown("no decision procedure for noisy operations here".into()),
            ))
        }
    }
}

/// Random-reversible equivalence on a doubled quantum system: equal
/// spectra and equal sector spectra up to the sector swap.
pub fn rare_equivalent_doubled(rho: &StateVec, sigma: &StateVec) -> Result<bool> {
    let model = rho.model();
    model.require_same(sigma.model())?;
    if !matches!(model.kind(), ModelKind::DoubledQuantum { .. }) {
        return Err(Error::Unsupported(format!("{} is not a doubled quantum system", model.id())));
    }
    let (p, q) = (diagonalize(rho)?.eigenvalues, diagonalize(sigma)?.eigenvalues);
    if !close(&p, &q) {
        return Ok(false);
    }
    Ok(match_sectors(&sector_spectra(rho)?, &sector_spectra(sigma)?).is_some())
}

/// Two states with equal spectra whose sector weights are `(1, 0, …)` and
/// `(½, ½, 0, …)`.
pub fn counterexample_pair(model: &Model) -> Result<(StateVec, StateVec)> {
    let layout = model
        .layout()
        .filter(|l| model.flags().sectorized && l.sector_count() >= 2 && l.sectors()[0] >= 2)
        .ok_or_else(|| Error::Unsupported(format!("{} has no sector counterexample", model.id())))?;
    let half = C64::new(0.5, 0.0);
    let proj = |i: usize| {
        let v = layout.basis_vector(i);
        &v * v.adjoint() * half
    };
    let rho = proj(0) + proj(1);
    let sigma = proj(0) + proj(layout.sector_offset(1));
    Ok((StateVec::from_matrix(model, &rho)?, StateVec::from_matrix(model, &sigma)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBasis {
    Analytic,
    Exhaustive,
    Counterexample,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct ReversibilityReport {
    /// `None` when undecided.
    pub permutability: Option<bool>,
    pub strong_symmetry: Option<bool>,
    pub basis: ReportBasis,
    pub maximal_sets: Option<usize>,
    pub counterexample: Option<(StateVec, StateVec)>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Checks permutability and strong symmetry of the reversible group.
pub fn check_unrestricted_reversibility(model: &Model) -> ReversibilityReport {
    let undecided = ReversibilityReport {
        permutability: None,
        strong_symmetry: None,
        basis: ReportBasis::Undecided,
        maximal_sets: None,
        counterexample: None,
    };
    match model.kind() {
        ModelKind::Classical { .. } | ModelKind::Quantum { .. } | ModelKind::RealQuantum { .. } => {
            ReversibilityReport {
                permutability: Some(true),
                strong_symmetry: Some(true),
                basis: ReportBasis::Analytic,
                ..undecided
            }
        }
        ModelKind::DoubledQuantum { .. } | ModelKind::ExtendedClassical { .. } | ModelKind::ClassicalQuantum { .. } => {
            match counterexample_pair(model) {
                Ok(pair) => ReversibilityReport {
                    permutability: Some(false),
                    strong_symmetry: Some(false),
                    basis: ReportBasis::Counterexample,
                    counterexample: Some(pair),
                    ..undecided
                },
                Err(_) => undecided,
            }
        }
        ModelKind::SquareBit | ModelKind::RestrictedTrit | ModelKind::DiamondBit | ModelKind::Polytope { .. } => {
            exhaustive_check(model).unwrap_or(undecided)
        }
    }
}

fn exhaustive_check(model: &Model) -> Option<ReversibilityReport> {
    let vertices = model.vertices()?;
    let ConeSpec::Vertex { generators } = model.effect_cone() else { return None };
    let group = group_elements(model).ok()?;
    let find = |v: &DVector<f64>| vertices.iter().position(|w| (w - v).amax() < 1e-9);
    // each group element as a permutation of the vertices
    let actions: Vec<Vec<usize>> =
        group.iter().map(|g| vertices.iter().map(|v| find(&(g * v))).collect::<Option<Vec<_>>>()).collect::<Option<_>>()?;
    let c = model.capacity();
    let sets: Vec<Vec<usize>> = subsets(vertices.len(), c)
        .into_iter()
        .filter(|s| {
            let states: Vec<DVector<f64>> = s.iter().map(|&i| vertices[i].clone()).collect();
            distinguishing_test(generators, model.unit_effect(), &states).is_some()
        })
        .collect();
    let maps = |from: &[usize], to: &[usize]| actions.iter().any(|a| from.iter().zip(to).all(|(&x, &y)| a[x] == y));
    let perms = permutations(c);
    let permutability = sets.iter().all(|s| {
        perms.iter().all(|p| {
            let target: Vec<usize> = p.iter().map(|&i| s[i]).collect();
            maps(s, &target)
        })
    });
    let strong_symmetry = sets.iter().all(|s| sets.iter().all(|t| maps(s, t)));
    Some(ReversibilityReport {
        permutability: Some(permutability),
        strong_symmetry: Some(strong_symmetry),
        basis: ReportBasis::Exhaustive,
        maximal_sets: Some(sets.len()),
        counterexample: None,
    })
}
