//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the crate's numerical routines.
#![allow(dead_code)]

use gptt::hilbert::{CMat, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// sorted in descending order.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale = 1.0 + m.norm();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * kp - s * kq;
                    m[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * pk - s * qk;
                    m[(q, k)] = s * pk + c * qk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Eigenvalues of a Hermitian matrix through the real embedding
/// `[[A, -B], [B, A]]`, whose spectrum repeats every eigenvalue twice.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let real = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    jacobi_eigenvalues(&real).into_iter().step_by(2).collect()
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 1e-15).map(|&x| -x * x.ln()).sum()
}

pub fn von_neumann_matrix(rho: &CMat) -> f64 {
    shannon(&hermitian_eigenvalues(rho))
}

pub fn trace_norm(x: &CMat) -> f64 {
    hermitian_eigenvalues(x).iter().map(|v| v.abs()).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMat::from_fn(ra * rb, ca * cb, |r, c| a[(r / rb, c / cb)] * b[(r % rb, c % cb)])
}

/// Partial trace over the first factor of `C^da ⊗ C^db`.
pub fn trace_out_first(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum())
}

/// Partial trace over the second factor of `C^da ⊗ C^db`.
pub fn trace_out_second(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum())
}

pub fn trace(m: &CMat) -> f64 {
    m.trace().re
}

/// `exp(x)` by scaling and squaring of a truncated Taylor series.
pub fn expm(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm = x.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let y = x / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..30 {
        term = &term * &y / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Gaussian Hermitian matrix.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Prefix-sum majorisation `p ⪰ q` of distributions with equal totals.
pub fn majorizes(p: &[f64], q: &[f64], tol: f64) -> bool {
    let sort = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (p, q) = (sort(p), sort(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for i in 0..p.len().max(q.len()) {
        sp += p.get(i).copied().unwrap_or(0.0);
        sq += q.get(i).copied().unwrap_or(0.0);
        if sp < sq - tol {
            return false;
        }
    }
    true
}

/// Sinkhorn balancing of a random positive matrix.
pub fn random_doubly_stochastic(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() + 1e-3);
    for _ in 0..10_000 {
        for r in 0..d {
            let s: f64 = m.row(r).sum();
            m.row_mut(r).iter_mut().for_each(|x| *x /= s);
        }
        for c in 0..d {
            let s: f64 = m.column(c).sum();
            m.column_mut(c).iter_mut().for_each(|x| *x /= s);
        }
        let err = (0..d).map(|r| (m.row(r).sum() - 1.0).abs()).fold(0.0, f64::max);
        if err < 1e-15 {
            break;
        }
    }
    m
}

/// Convex combination of `k` random permutation matrices.
pub fn random_permutation_mixture(rng: &mut impl Rng, d: usize, k: usize) -> DMatrix<f64> {
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = DMatrix::zeros(d, d);
    for w in weights {
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        for (c, &r) in perm.iter().enumerate() {
            m[(r, c)] += w;
        }
    }
    m
}
