//! Householder Arnoldi process.
//!
//! Basis vectors are generated as `q_j = s_j P_0 P_1 ... P_j e_j` with
//! reflectors `P_j` acting on components `j..n`. The signs `s_j` are chosen
//! so that `q_0` is the normalised start vector and every subdiagonal entry
//! of `H` is nonnegative.

use crate::dense::{norm2, pivoted_qr, spectral_norm, DenseMatrix, Reflector};
use crate::error::{dim_err, Error, Result};

pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// `dim A K_k < dim K_k`: `H_{k,k}` is singular and no least squares
    /// solution is guaranteed.
    CaseI,
    /// `dim K_{k+1} = k` with `H_{k,k}` of full rank, or the whole space
    /// has been spanned.
    CaseII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownCase {
    pub step: usize,
    pub kind: CaseKind,
    pub rank_hkk: usize,
    /// Raw `h_{k+1,k}`; zero when the space was exhausted.
    pub subdiagonal: f64,
    /// `true` when `k = n` rather than a small subdiagonal ended the process.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArnoldiStatus {
    Running,
    Breakdown(BreakdownCase),
}

#[derive(Debug, Clone)]
pub struct Arnoldi<'a> {
    a: &'a DenseMatrix,
    a_norm: f64,
    breakdown_tol: f64,
    reflectors: Vec<Reflector>,
    signs: Vec<f64>,
    q: Vec<Vec<f64>>,
    /// column `j` holds `h_{0..=j+1, j}`
    h: Vec<Vec<f64>>,
    status: ArnoldiStatus,
}

impl<'a> Arnoldi<'a> {
    pub fn new(a: &'a DenseMatrix, start: &[f64], breakdown_tol: f64) -> Result<Self> {
        let a_norm = spectral_norm(a)?;
        Self::with_norm(a, a_norm, start, breakdown_tol)
    }

    /// Same as [`Arnoldi::new`] with a precomputed `||A||_2`.
    pub fn with_norm(
        a: &'a DenseMatrix,
        a_norm: f64,
        start: &[f64],
        breakdown_tol: f64,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(dim_err(
                "arnoldi",
                format!("square matrix required, got {}x{}", a.rows(), a.cols()),
            ));
        }
        if start.len() != a.rows() {
            return Err(dim_err(
                "arnoldi",
                format!("{} rows but start vector of length {}", a.rows(), start.len()),
            ));
        }
        if !(breakdown_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "breakdown tolerance must be nonnegative, got {breakdown_tol}"
            )));
        }
        if norm2(start) <= breakdown_tol {
            return Err(Error::ZeroStartVector);
        }
        let (p0, beta) = Reflector::annihilating(0, start);
        let s0 = if beta < 0.0 { -1.0 } else { 1.0 };
        let mut state = Self {
            a,
            a_norm,
            breakdown_tol,
            reflectors: vec![p0],
            signs: vec![s0],
            q: Vec::new(),
            h: Vec::new(),
            status: ArnoldiStatus::Running,
        };
        let q0 = state.basis_vector(0);
        state.q.push(q0);
        Ok(state)
    }

    /// `s_j P_0 ... P_j e_j`
    fn basis_vector(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.a.rows()];
        e[j] = self.signs[j];
        for p in self.reflectors[..=j].iter().rev() {
            p.apply(&mut e);
        }
        e
    }

    /// Completed steps `k`.
    pub fn steps(&self) -> usize {
        self.h.len()
    }

    pub fn status(&self) -> ArnoldiStatus {
        self.status
    }

    pub fn is_running(&self) -> bool {
        self.status == ArnoldiStatus::Running
    }

    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    pub fn breakdown_tol(&self) -> f64 {
        self.breakdown_tol
    }

    /// Performs step `k + 1`, appending column `k` of `H` and, unless the
    /// process ends, the vector `q_{k+1}`.
    pub fn step(&mut self) -> Result<ArnoldiStatus> {
        if let ArnoldiStatus::Breakdown(case) = self.status {
            return Err(Error::ArnoldiFinished { step: case.step });
        }
        let n = self.a.rows();
        let k = self.h.len();
        let mut w = self.a.matvec(&self.q[k])?;
        for p in &self.reflectors {
            p.apply(&mut w);
        }
        let mut col: Vec<f64> = (0..=k).map(|i| self.signs[i] * w[i]).collect();

        if k + 1 == n {
            col.push(0.0);
            self.h.push(col);
            let rank_hkk = self.rank_hkk();
            self.status = ArnoldiStatus::Breakdown(BreakdownCase {
                step: k + 1,
                kind: CaseKind::CaseII,
                rank_hkk,
                subdiagonal: 0.0,
                exhausted: true,
            });
            return Ok(self.status);
        }

        let (p, beta) = Reflector::annihilating(k + 1, &w[k + 1..]);
        let raw = beta;
        let s_next = if raw < 0.0 { -1.0 } else { 1.0 };
        let sub = s_next * raw;
        col.push(sub);
        self.h.push(col);
        self.reflectors.push(p);
        self.signs.push(s_next);

        if sub <= self.breakdown_tol * self.a_norm {
            let rank_hkk = self.rank_hkk();
            let kind = if rank_hkk < k + 1 {
                CaseKind::CaseI
            } else {
                CaseKind::CaseII
            };
            self.status = ArnoldiStatus::Breakdown(BreakdownCase {
                step: k + 1,
                kind,
                rank_hkk,
                subdiagonal: sub,
                exhausted: false,
            });
        } else {
            let q = self.basis_vector(k + 1);
            self.q.push(q);
        }
        Ok(self.status)
    }

    /// Runs until breakdown or until `max_steps` steps are complete.
    pub fn run(&mut self, max_steps: usize) -> Result<ArnoldiStatus> {
        while self.is_running() && self.steps() < max_steps {
            self.step()?;
        }
        Ok(self.status)
    }

    fn rank_hkk(&self) -> usize {
        let k = self.h.len();
        let hkk = self.hessenberg().submatrix(0..k, 0..k);
        pivoted_qr(&hkk).rank_above(self.breakdown_tol * self.a_norm)
    }

    /// Extended Hessenberg matrix `H_{k+1,k}`. At breakdown the last row
    /// holds the (tiny or zero) final subdiagonal.
    pub fn hessenberg(&self) -> DenseMatrix {
        let k = self.h.len();
        let mut h = DenseMatrix::zeros(k + 1, k);
        for (j, col) in self.h.iter().enumerate() {
            h.col_mut(j)[..col.len()].copy_from_slice(col);
        }
        h
    }

    /// All basis vectors generated so far: `k + 1` while running, `k` after
    /// breakdown.
    pub fn basis(&self) -> DenseMatrix {
        DenseMatrix::from_columns(self.a.rows(), &self.q).expect("basis vectors have length n")
    }

    /// `Q_k`, the first `k` basis vectors.
    pub fn basis_k(&self) -> DenseMatrix {
        DenseMatrix::from_columns(self.a.rows(), &self.q[..self.h.len()])
            .expect("basis vectors have length n")
    }

    pub fn q(&self, j: usize) -> &[f64] {
        &self.q[j]
    }
}

/// Orthonormal basis of `span{s, As, ..., A^{k-1}s}` from pivoted QR of the
/// normalised power sequence. Columns beyond the numerical rank are dropped.
pub fn krylov_basis_oracle(a: &DenseMatrix, start: &[f64], k: usize) -> Result<DenseMatrix> {
    let n = a.rows();
    if start.len() != n {
        return Err(dim_err("krylov_basis_oracle", "start vector length"));
    }
    let mut cols = Vec::with_capacity(k);
    let mut v = start.to_vec();
    for _ in 0..k {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        cols.push(v.clone());
        v = a.matvec(&v)?;
    }
    if cols.is_empty() {
        return Ok(DenseMatrix::zeros(n, 0));
    }
    let z = DenseMatrix::from_columns(n, &cols)?;
    let qr = pivoted_qr(&z);
    let rank = qr.rank_above(1e-13 * qr.r().get(0, 0).abs());
    Ok(qr.thin_q().leading_columns(0..rank))
}
