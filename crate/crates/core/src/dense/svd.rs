//! One-sided (Hestenes) Jacobi SVD.
//!
//! Columns of a working copy of the matrix are rotated pairwise until every
//! pair is orthogonal to working precision. The singular values are then the
//! column norms. This keeps small singular values accurate relative to the
//! column scaling, which the Hessenberg conditioning diagnostics rely on.

use super::matrix::{dot, norm2, DenseMatrix};
use super::qr::householder_qr;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 60;

/// `2^-52`.
pub const UNIT_ROUNDOFF_BINARY: f64 = f64::EPSILON;

/// How the numerical rank of a factorisation is decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankTolerance {
    /// `max(rows, cols) * 2^-52 * sigma_max`
    Default,
    /// `factor * sigma_max`
    Relative(f64),
    Absolute(f64),
}

impl RankTolerance {
    pub fn resolve(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match self {
            RankTolerance::Default => rows.max(cols) as f64 * UNIT_ROUNDOFF_BINARY * sigma_max,
            RankTolerance::Relative(f) => f * sigma_max,
            RankTolerance::Absolute(t) => t,
        }
    }
}

/// Full SVD `A = U diag(sigma) V^T` with `U` (rows x rows) and `V`
/// (cols x cols) orthogonal and `sigma` nonincreasing of length
/// `min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
    numerical_rank: usize,
    tolerance: f64,
}

impl SvdFactors {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value above the tolerance, or 0 for a numerically
    /// zero matrix.
    pub fn sigma_r(&self) -> f64 {
        match self.numerical_rank {
            0 => 0.0,
            r => self.sigma[r - 1],
        }
    }

    /// Orthonormal basis of the numerical range.
    pub fn u1(&self) -> DenseMatrix {
        self.u.leading_columns(0..self.numerical_rank)
    }

    /// Orthonormal basis of the numerical left null space.
    pub fn u2(&self) -> DenseMatrix {
        self.u.leading_columns(self.numerical_rank..self.u.cols())
    }

    /// Orthonormal basis of the numerical row space.
    pub fn v1(&self) -> DenseMatrix {
        self.v.leading_columns(0..self.numerical_rank)
    }

    /// Orthonormal basis of the numerical null space.
    pub fn v2(&self) -> DenseMatrix {
        self.v.leading_columns(self.numerical_rank..self.v.cols())
    }

    /// Singular values counted in the numerical rank.
    pub fn sigma_ranked(&self) -> &[f64] {
        &self.sigma[..self.numerical_rank]
    }
}

/// Relative coupling below which a column pair counts as orthogonal. The
/// computed inner product of two unit columns carries an error of roughly
/// `sqrt(rows) * eps`, so asking for less would never terminate.
fn rotation_threshold(rows: usize) -> f64 {
    ((rows as f64).sqrt() * f64::EPSILON).clamp(f64::EPSILON, 1e-14)
}

/// Orthogonalises the columns of `w` in place, applying the same rotations
/// to `v` when given.
fn orthogonalize_columns(w: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let n = w.cols();
    let threshold = rotation_threshold(w.rows());
    let mut off = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        off = 0.0_f64;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let (wi, wj) = w.two_cols_mut(i, j);
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (a, b) in wi.iter().zip(wj.iter()) {
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                // A squared norm in the subnormal range is a zero column.
                if alpha < f64::MIN_POSITIVE || beta < f64::MIN_POSITIVE || gamma == 0.0 {
                    continue;
                }
                let coupling = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                off = off.max(coupling);
                if coupling <= threshold {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wi, wj, c, s);
                if let Some(v) = v.as_deref_mut() {
                    let (vi, vj) = v.two_cols_mut(i, j);
                    rotate(vi, vj, c, s);
                }
            }
        }
        if off <= threshold {
            return Ok(());
        }
    }
    Err(Error::SvdNoConvergence {
        sweeps: MAX_SWEEPS,
        off_norm: off,
    })
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Full SVD by one-sided Jacobi.
pub fn jacobi_svd(m: &DenseMatrix, tolerance: RankTolerance) -> Result<SvdFactors> {
    if m.rows() < m.cols() {
        let t = jacobi_svd(&m.transpose(), tolerance)?;
        return Ok(SvdFactors {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
            numerical_rank: t.numerical_rank,
            tolerance: t.tolerance,
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = m.clone();
    let mut v = DenseMatrix::identity(cols);
    orthogonalize_columns(&mut w, Some(&mut v))?;

    let norms: Vec<f64> = w.columns().map(norm2).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let mut v_sorted = DenseMatrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        v_sorted.col_mut(k).copy_from_slice(v.col(j));
    }

    // Columns with a usable norm are normalised; the rest of U is an
    // orthonormal completion.
    let floor = f64::MIN_POSITIVE / f64::EPSILON;
    let usable: Vec<usize> = (0..cols).filter(|&k| sigma[k] > floor).collect();
    let mut u = DenseMatrix::zeros(rows, rows);
    for &k in &usable {
        let j = order[k];
        let s = sigma[k];
        for (dst, src) in u.col_mut(k).iter_mut().zip(w.col(j)) {
            *dst = src / s;
        }
    }
    if usable.len() < rows {
        let basis = DenseMatrix::from_columns(
            rows,
            &usable.iter().map(|&k| u.col(k).to_vec()).collect::<Vec<_>>(),
        )?;
        let complement = householder_qr(&basis)?.full_q();
        let mut fill = usable.len();
        for k in 0..rows {
            if k < cols && sigma[k] > floor {
                continue;
            }
            u.col_mut(k).copy_from_slice(complement.col(fill));
            fill += 1;
        }
    }

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let tol = tolerance.resolve(rows, cols, sigma_max);
    let numerical_rank = sigma.iter().filter(|&&s| s > tol).count();
    Ok(SvdFactors {
        u,
        sigma,
        v: v_sorted,
        numerical_rank,
        tolerance: tol,
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    let mut w = if m.rows() < m.cols() {
        m.transpose()
    } else {
        m.clone()
    };
    orthogonalize_columns(&mut w, None)?;
    let mut s: Vec<f64> = w.columns().map(norm2).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// `||A|| ||A^+||`: largest singular value over the smallest one above the
/// rank tolerance.
pub fn condition_number(m: &DenseMatrix, tolerance: RankTolerance) -> Result<f64> {
    let s = singular_values(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let tol = tolerance.resolve(m.rows(), m.cols(), smax);
    let smin = s.iter().copied().filter(|&x| x > tol).last().unwrap_or(smax);
    Ok(smax / smin)
}

/// Minimum-norm least squares solution `V_1 Sigma_r^{-1} U_1^T rhs`.
pub fn min_norm_least_squares(
    m: &DenseMatrix,
    rhs: &[f64],
    tolerance: RankTolerance,
) -> Result<Vec<f64>> {
    let svd = jacobi_svd(m, tolerance)?;
    min_norm_from_svd(&svd, rhs)
}

pub(crate) fn min_norm_from_svd(svd: &SvdFactors, rhs: &[f64]) -> Result<Vec<f64>> {
    let u1 = svd.u1();
    let mut c = u1.tr_matvec(rhs)?;
    for (ci, s) in c.iter_mut().zip(svd.sigma_ranked()) {
        *ci /= s;
    }
    svd.v1().matvec(&c)
}

/// Largest `|u_i^T u_j - delta_ij|` over the columns, used by tests and
/// invariant checks.
pub fn orthogonality_defect(q: &DenseMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..q.cols() {
        for j in i..q.cols() {
            let d = dot(q.col(i), q.col(j)) - if i == j { 1.0 } else { 0.0 };
            worst = worst.max(d.abs());
        }
    }
    worst
}
