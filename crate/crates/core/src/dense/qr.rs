use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{dim_err, Result};

/// Elementary reflector `I - tau v v^T` acting on components `start..`.
/// `v[0]` is the implicit unit entry.
#[derive(Debug, Clone)]
pub struct Reflector {
    start: usize,
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Reflector mapping `x` (a trailing segment beginning at `start`) onto a
    /// multiple of its first unit vector. Returns the reflector and the new
    /// leading entry `beta`.
    pub fn annihilating(start: usize, x: &[f64]) -> (Self, f64) {
        let alpha = x[0];
        let tail = norm2(&x[1..]);
        let mut v = vec![0.0; x.len()];
        v[0] = 1.0;
        if tail == 0.0 {
            return (Self { start, v, tau: 0.0 }, alpha);
        }
        let beta = -alpha.signum() * alpha.hypot(tail);
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        for (vi, xi) in v[1..].iter_mut().zip(&x[1..]) {
            *vi = xi * scale;
        }
        (Self { start, v, tau }, beta)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, x: &mut [f64]) {
        if self.tau == 0.0 {
            return;
        }
        let seg = &mut x[self.start..self.start + self.v.len()];
        let s = self.tau * dot(&self.v, seg);
        for (xi, vi) in seg.iter_mut().zip(&self.v) {
            *xi -= s * vi;
        }
    }
}

/// Householder QR factorisation `m P = Q R`, optionally with column pivoting.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    reflectors: Vec<Reflector>,
    /// min(rows, cols) x cols, upper trapezoidal
    r: DenseMatrix,
    /// `perm[i]` is the original index of the i-th factored column
    perm: Vec<usize>,
}

/// Unpivoted Householder QR of a tall matrix.
pub fn householder_qr(m: &DenseMatrix) -> Result<HouseholderQr> {
    if m.rows() < m.cols() {
        return Err(dim_err(
            "householder_qr",
            format!("need rows >= cols, got {}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(factor(m, false))
}

/// Householder QR with largest-remaining-column-norm pivoting. Ties go to the
/// lowest column index.
pub fn pivoted_qr(m: &DenseMatrix) -> HouseholderQr {
    factor(m, true)
}

fn factor(m: &DenseMatrix, pivot: bool) -> HouseholderQr {
    let (rows, cols) = (m.rows(), m.cols());
    let steps = rows.min(cols);
    let mut work = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut reflectors = Vec::with_capacity(steps);

    for k in 0..steps {
        if pivot {
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..cols {
                let nrm = norm2(&work.col(j)[k..]);
                if nrm > best_norm {
                    best_norm = nrm;
                    best = j;
                }
            }
            if best != k {
                swap_columns(&mut work, k, best);
                perm.swap(k, best);
            }
        }
        let (h, beta) = Reflector::annihilating(k, &work.col(k)[k..]);
        {
            let ck = work.col_mut(k);
            ck[k] = beta;
            ck[k + 1..].iter_mut().for_each(|v| *v = 0.0);
        }
        for j in k + 1..cols {
            h.apply(work.col_mut(j));
        }
        reflectors.push(h);
    }

    let mut r = DenseMatrix::zeros(steps, cols);
    for j in 0..cols {
        for i in 0..steps.min(j + 1) {
            r.set(i, j, work.get(i, j));
        }
    }
    HouseholderQr {
        rows,
        cols,
        reflectors,
        r,
        perm,
    }
}

fn swap_columns(m: &mut DenseMatrix, a: usize, b: usize) {
    let rows = m.rows();
    let tmp = m.col(a).to_vec();
    let cb = m.col(b).to_vec();
    m.col_mut(a).copy_from_slice(&cb);
    m.col_mut(b).copy_from_slice(&tmp);
    debug_assert_eq!(m.col(a).len(), rows);
}

impl HouseholderQr {
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn reflectors(&self) -> &[Reflector] {
        &self.reflectors
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `x <- Q^T x`.
    pub fn apply_qt(&self, x: &mut [f64]) {
        for h in &self.reflectors {
            h.apply(x);
        }
    }

    /// `x <- Q x`.
    pub fn apply_q(&self, x: &mut [f64]) {
        for h in self.reflectors.iter().rev() {
            h.apply(x);
        }
    }

    /// First `min(rows, cols)` columns of Q.
    pub fn thin_q(&self) -> DenseMatrix {
        self.q_columns(self.rows.min(self.cols))
    }

    /// Square orthogonal Q.
    pub fn full_q(&self) -> DenseMatrix {
        self.q_columns(self.rows)
    }

    fn q_columns(&self, count: usize) -> DenseMatrix {
        let mut q = DenseMatrix::zeros(self.rows, count);
        for j in 0..count {
            let c = q.col_mut(j);
            c[j] = 1.0;
            self.apply_q(c);
        }
        q
    }

    /// Number of leading diagonal entries of R whose magnitude exceeds `tol`.
    pub fn rank_above(&self, tol: f64) -> usize {
        self.r
            .diag()
            .iter()
            .take_while(|d| d.abs() > tol)
            .count()
    }

    /// Basic solution of `min ||rhs - m y||` using the leading `rank` pivots.
    pub fn basic_solution(&self, rhs: &[f64], rank: usize) -> Vec<f64> {
        let mut c = rhs.to_vec();
        self.apply_qt(&mut c);
        let mut z = vec![0.0; rank];
        for i in (0..rank).rev() {
            let mut s = c[i];
            for (j, zj) in z.iter().enumerate().skip(i + 1) {
                s -= self.r.get(i, j) * zj;
            }
            z[i] = s / self.r.get(i, i);
        }
        let mut y = vec![0.0; self.cols];
        for (i, zi) in z.into_iter().enumerate() {
            y[self.perm[i]] = zi;
        }
        y
    }
}

/// Default relative truncation level for [`pivoted_least_squares`].
pub fn default_ls_eta(m: &DenseMatrix) -> f64 {
    1e-14 * m.rows().max(m.cols()) as f64
}

/// Basic least squares solution by column-pivoted QR with numerical-rank
/// truncation at `eta * |R_11|`; `|R_11|` is the largest column norm and
/// stands in for `||m||`.
pub fn pivoted_least_squares(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    pivoted_least_squares_with(m, rhs, default_ls_eta(m))
}

pub fn pivoted_least_squares_with(m: &DenseMatrix, rhs: &[f64], eta: f64) -> Result<Vec<f64>> {
    if rhs.len() != m.rows() {
        return Err(dim_err(
            "pivoted_least_squares",
            format!("{} rows but rhs of length {}", m.rows(), rhs.len()),
        ));
    }
    let qr = pivoted_qr(m);
    let lead = qr.r.diag().first().map_or(0.0, |d| d.abs());
    if lead == 0.0 {
        return Ok(vec![0.0; m.cols()]);
    }
    let rank = qr.rank_above(eta * lead);
    Ok(qr.basic_solution(rhs, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::matrix::{matmul, tr_matmul};

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    /// Classical Gram-Schmidt with reorthogonalisation, as an independent check.
    fn gram_schmidt(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
        let (rows, cols) = (m.rows(), m.cols());
        let mut q = DenseMatrix::zeros(rows, cols);
        let mut r = DenseMatrix::zeros(cols, cols);
        for j in 0..cols {
            let mut v = m.col(j).to_vec();
            for _pass in 0..2 {
                for i in 0..j {
                    let c = dot(q.col(i), &v);
                    r.set(i, j, r.get(i, j) + c);
                    for (vk, qk) in v.iter_mut().zip(q.col(i)) {
                        *vk -= c * qk;
                    }
                }
            }
            let nrm = norm2(&v);
            r.set(j, j, nrm);
            for (qk, vk) in q.col_mut(j).iter_mut().zip(&v) {
                *qk = vk / nrm;
            }
        }
        (q, r)
    }

    #[test]
    fn triangular_input_is_reproduced_up_to_signs() {
        let m = DenseMatrix::from_rows(&[
            vec![2.0, 1.0, -1.0],
            vec![0.0, 3.0, 4.0],
            vec![0.0, 0.0, 5.0],
        ])
        .unwrap();
        let qr = householder_qr(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((qr.r().get(i, j).abs() - m.get(i, j).abs()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pythagorean_column() {
        let m = DenseMatrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let qr = householder_qr(&m).unwrap();
        assert!((qr.r().get(0, 0).abs() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn random_tall_matches_gram_schmidt() {
        let mut next = lcg(7);
        let m = DenseMatrix::new(8, 5, (0..40).map(|_| next()).collect()).unwrap();
        let qr = householder_qr(&m).unwrap();
        let q = qr.thin_q();
        let qtq = tr_matmul(&q, &q).unwrap();
        assert!(qtq.sub(&DenseMatrix::identity(5)).unwrap().frobenius_norm() < 1e-13);
        let recon = matmul(&q, qr.r()).unwrap();
        assert!(recon.sub(&m).unwrap().frobenius_norm() < 1e-13 * m.frobenius_norm());

        let (_gq, gr) = gram_schmidt(&m);
        for i in 0..5 {
            for j in i..5 {
                assert!((qr.r().get(i, j).abs() - gr.get(i, j).abs()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_column_gives_identity_reflector() {
        let m = DenseMatrix::zeros(3, 2);
        let qr = householder_qr(&m).unwrap();
        assert!(qr.reflectors().iter().all(|h| h.tau() == 0.0));
        assert_eq!(qr.r().frobenius_norm(), 0.0);
    }

    #[test]
    fn nonsingular_system_is_solved_exactly() {
        let m = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let y = pivoted_least_squares(&m, &[1.0, 2.0]).unwrap();
        let expected = [0.1, 0.6];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13 * b.abs());
        }
    }

    #[test]
    fn all_zero_matrix_gives_zero_solution() {
        let y = pivoted_least_squares(&DenseMatrix::zeros(3, 2), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn pivot_ties_prefer_first_column() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let qr = pivoted_qr(&m);
        assert_eq!(qr.permutation(), &[0, 1]);
        let y = pivoted_least_squares(&m, &[2.0, 0.0]).unwrap();
        assert_eq!(y, vec![2.0, 0.0]);
    }

    #[test]
    fn wide_matrix_least_squares() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let y = pivoted_least_squares(&m, &[6.0]).unwrap();
        assert!((dot(m.col(0), &[1.0]) * y[0] + 2.0 * y[1] + 3.0 * y[2] - 6.0).abs() < 1e-14);
        assert_eq!(y.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn rhs_length_is_checked() {
        assert!(pivoted_least_squares(&DenseMatrix::identity(2), &[1.0]).is_err());
    }
}
