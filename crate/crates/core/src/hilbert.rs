//! Real-vector embedding of block-diagonal Hermitian operators.
//!
//! A sectorised Hilbert space `H_0 ⊕ … ⊕ H_{N-1}` carries operators that
//! are block diagonal with respect to the sectors. Each Hermitian block of
//! order `n` is stored as real coordinates, sector after sector:
//!
//! ```text
//! [ h_00, h_11, …, h_(n-1)(n-1),                 diagonal
//!   √2·Re h_01, √2·Im h_01, √2·Re h_02, √2·Im h_02, …, √2·Re h_(n-2)(n-1), √2·Im h_(n-2)(n-1) ]
//! ```
//!
//! where the off-diagonal pairs run over the upper triangle in row-major
//! order. Real sectors drop the imaginary entries. With this scaling the
//! Euclidean dot product of two coordinate vectors is the trace inner
//! product `tr(A B)`, so states and effects share one coordinate system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    field: Field,
    sectors: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(field: Field, sectors: Vec<usize>) -> Self {
        assert!(!sectors.is_empty() && sectors.iter().all(|&n| n > 0));
        Self { field, sectors }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn sectors(&self) -> &[usize] {
        &self.sectors
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    /// Total Hilbert-space dimension (sum of sector dimensions).
    pub fn hilbert_dim(&self) -> usize {
        self.sectors.iter().sum()
    }

    pub fn block_len(&self, n: usize) -> usize {
        match self.field {
            Field::Complex => n * n,
            Field::Real => n * (n + 1) / 2,
        }
    }

    pub fn coord_dim(&self) -> usize {
        self.sectors.iter().map(|&n| self.block_len(n)).sum()
    }

    pub fn sector_offset(&self, k: usize) -> usize {
        self.sectors[..k].iter().sum()
    }

    pub fn coord_offset(&self, k: usize) -> usize {
        self.sectors[..k].iter().map(|&n| self.block_len(n)).sum()
    }

    /// Sector and local index of a global basis vector.
    pub fn sector_of(&self, index: usize) -> (usize, usize) {
        let mut rest = index;
        for (k, &n) in self.sectors.iter().enumerate() {
            if rest < n {
                return (k, rest);
            }
            rest -= n;
        }
        panic!("basis index {index} out of range");
    }

    /// Hermitian block `k` of the operator with the given coordinates.
    pub fn block(&self, coords: &[f64], k: usize) -> CMat {
        let n = self.sectors[k];
        let c = &coords[self.coord_offset(k)..self.coord_offset(k) + self.block_len(n)];
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(c[i], 0.0);
        }
        let mut pos = n;
        for i in 0..n {
            for j in i + 1..n {
                let z = match self.field {
                    Field::Complex => {
                        let z = C64::new(c[pos], c[pos + 1]) / SQRT2;
                        pos += 2;
                        z
                    }
                    Field::Real => {
                        let z = C64::new(c[pos] / SQRT2, 0.0);
                        pos += 1;
                        z
                    }
                };
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Writes the Hermitian part of `block` into the coordinates of sector `k`.
    fn write_block(&self, block: &CMat, k: usize, out: &mut [f64]) {
        let n = self.sectors[k];
        let base = self.coord_offset(k);
        for i in 0..n {
            out[base + i] = block[(i, i)].re;
        }
        let mut pos = base + n;
        for i in 0..n {
            for j in i + 1..n {
                // average with the mirrored entry so slightly non-Hermitian input is symmetrised
                let z = (block[(i, j)] + block[(j, i)].conj()) * 0.5;
                out[pos] = SQRT2 * z.re;
                pos += 1;
                if self.field == Field::Complex {
                    out[pos] = SQRT2 * z.im;
                    pos += 1;
                }
            }
        }
    }

    pub fn blocks(&self, coords: &[f64]) -> Vec<CMat> {
        (0..self.sector_count()).map(|k| self.block(coords, k)).collect()
    }

    pub fn from_blocks(&self, blocks: &[CMat]) -> Vec<f64> {
        let mut out = vec![0.0; self.coord_dim()];
        for (k, b) in blocks.iter().enumerate() {
            self.write_block(b, k, &mut out);
        }
        out
    }

    /// Full block-diagonal operator on the whole Hilbert space.
    pub fn to_matrix(&self, coords: &[f64]) -> CMat {
        let d = self.hilbert_dim();
        let mut m = CMat::zeros(d, d);
        for k in 0..self.sector_count() {
            let off = self.sector_offset(k);
            let b = self.block(coords, k);
            m.view_mut((off, off), b.shape()).copy_from(&b);
        }
        m
    }

    /// Coordinates of the block-diagonal part of `m`, together with the
    /// largest entry that the embedding had to discard (off-sector
    /// coherences, or imaginary parts in a real layout).
    pub fn from_matrix(&self, m: &CMat) -> (Vec<f64>, f64) {
        let mut out = vec![0.0; self.coord_dim()];
        let mut leakage: f64 = 0.0;
        let d = self.hilbert_dim();
        for r in 0..d {
            let (kr, _) = self.sector_of(r);
            for c in 0..d {
                let (kc, _) = self.sector_of(c);
                if kr != kc {
                    leakage = leakage.max(m[(r, c)].norm());
                } else if self.field == Field::Real {
                    leakage = leakage.max(m[(r, c)].im.abs());
                }
            }
        }
        for k in 0..self.sector_count() {
            let off = self.sector_offset(k);
            let n = self.sectors[k];
            let b = m.view((off, off), (n, n)).into_owned();
            self.write_block(&b, k, &mut out);
        }
        (out, leakage)
    }

    /// Coordinates of `|v⟩⟨v|`.
    pub fn projector(&self, v: &CVec) -> Vec<f64> {
        let m = v * v.adjoint();
        self.from_matrix(&m).0
    }

    pub fn identity(&self) -> Vec<f64> {
        let d = self.hilbert_dim();
        self.from_matrix(&CMat::identity(d, d)).0
    }

    /// Standard basis vector `e_index` of the whole Hilbert space.
    pub fn basis_vector(&self, index: usize) -> CVec {
        let mut v = CVec::zeros(self.hilbert_dim());
        v[index] = C64::new(1.0, 0.0);
        v
    }

    /// Weight `tr(block_k)` of each sector.
    pub fn sector_traces(&self, coords: &[f64]) -> Vec<f64> {
        (0..self.sector_count())
            .map(|k| {
                let off = self.coord_offset(k);
                coords[off..off + self.sectors[k]].iter().sum()
            })
            .collect()
    }
}

/// Eigen-decomposition of a Hermitian block. Real layouts keep real
/// eigenvectors. Eigenvalues are returned in the solver's order.
pub fn hermitian_eigen(block: &CMat, field: Field) -> (Vec<f64>, Vec<CVec>) {
    let n = block.nrows();
    match field {
        Field::Real => {
            let real = DMatrix::from_fn(n, n, |i, j| block[(i, j)].re);
            let eig = SymmetricEigen::new(real);
            let vecs = (0..n)
                .map(|i| eig.eigenvectors.column(i).map(|x| C64::new(x, 0.0)))
                .collect();
            (eig.eigenvalues.iter().copied().collect(), vecs)
        }
        Field::Complex => {
            let eig = SymmetricEigen::new(block.clone());
            let vecs = (0..n).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
            (eig.eigenvalues.iter().copied().collect(), vecs)
        }
    }
}

/// Builds `Σ_k K_k X K_k†` for a Kraus family acting on full matrices.
pub fn kraus_apply(kraus: &[CMat], x: &CMat) -> CMat {
    let mut out = CMat::zeros(kraus[0].nrows(), kraus[0].nrows());
    for k in kraus {
        out += k * x * k.adjoint();
    }
    out
}

/// Completes the given orthonormal vectors of one sector to an orthonormal
/// basis of that sector (Gram–Schmidt against standard basis vectors).
pub fn complete_basis(layout: &HilbertLayout, sector: usize, given: &[CVec]) -> Vec<CVec> {
    let off = layout.sector_offset(sector);
    let n = layout.sectors()[sector];
    let mut basis: Vec<CVec> = given.to_vec();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = layout.basis_vector(off + i);
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    basis
}
