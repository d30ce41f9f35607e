//! Generalized inverses, projectors and principal angles of a square matrix,
//! all read off one SVD `A = U Sigma V^T` split at the numerical rank into
//! `U = [U1, U2]`, `V = [V1, V2]`.
//!
//! The cross Gram blocks are `K = V1^T U1`, `L = V1^T U2` and `M = V2^T U1`.
//! The singular values of `K` are the cosines of the principal angles between
//! `R(A)` and `R(A^T)`: all ones for an EP matrix, all nonzero for a GP
//! matrix, all below one for a DR matrix.

use std::fmt::Write as _;

use crate::dense::{
    fingerprint, jacobi_svd, matmul, norm2, pivoted_qr, singular_values, sub_vec, tr_matmul,
    DenseMatrix, RankTolerance, SvdFactors,
};
use crate::error::{dim_err, Error, Result};

/// Thresholds used to classify a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyTolerance {
    /// Numerical rank of `A`.
    pub rank: RankTolerance,
    /// Largest admissible `||U1 U1^T - V1 V1^T||` (sine of the largest
    /// principal angle) for an EP matrix.
    pub ep: f64,
    /// Smallest admissible principal-angle cosine for a GP matrix.
    pub gp: f64,
}

impl Default for ClassifyTolerance {
    fn default() -> Self {
        Self {
            rank: RankTolerance::Relative(1e-8),
            ep: 1e-6,
            gp: 1e-13,
        }
    }
}

impl ClassifyTolerance {
    /// `1 - cos` of the angle whose sine is `ep`.
    fn cosine_gap(&self) -> f64 {
        let s = self.ep.min(1.0);
        // 1 - sqrt(1 - s^2) without cancellation
        s * s / (1.0 + (1.0 - s * s).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct SubspaceProfile {
    n: usize,
    rank: usize,
    index: usize,
    is_ep: bool,
    is_gp: bool,
    is_dr: bool,
    svd: SvdFactors,
    cross_gram_k: DenseMatrix,
    cross_gram_l: DenseMatrix,
    cross_gram_m: DenseMatrix,
    angle_cosines: Vec<f64>,
    kappa_k: f64,
    projector_distance: f64,
    tolerance: ClassifyTolerance,
    fingerprint: u64,
}

impl SubspaceProfile {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn index(&self) -> usize {
        self.index
    }
    pub fn is_ep(&self) -> bool {
        self.is_ep
    }
    pub fn is_gp(&self) -> bool {
        self.is_gp
    }
    pub fn is_dr(&self) -> bool {
        self.is_dr
    }
    pub fn svd(&self) -> &SvdFactors {
        &self.svd
    }
    /// `V1^T U1`
    pub fn cross_gram_k(&self) -> &DenseMatrix {
        &self.cross_gram_k
    }
    /// `V1^T U2`
    pub fn cross_gram_l(&self) -> &DenseMatrix {
        &self.cross_gram_l
    }
    /// `V2^T U1`
    pub fn cross_gram_m(&self) -> &DenseMatrix {
        &self.cross_gram_m
    }
    /// Principal-angle cosines between `R(A)` and `R(A^T)`, nonincreasing.
    pub fn angle_cosines(&self) -> &[f64] {
        &self.angle_cosines
    }
    pub fn min_cosine(&self) -> f64 {
        self.angle_cosines.last().copied().unwrap_or(1.0)
    }
    pub fn max_cosine(&self) -> f64 {
        self.angle_cosines.first().copied().unwrap_or(1.0)
    }
    /// `kappa(V1^T U1)`; infinite when a cosine vanishes, 1 for the empty block.
    pub fn kappa_k(&self) -> f64 {
        self.kappa_k
    }
    /// `||U1 U1^T - V1 V1^T||_2`.
    pub fn projector_distance(&self) -> f64 {
        self.projector_distance
    }
    pub fn tolerance(&self) -> ClassifyTolerance {
        self.tolerance
    }
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
    pub fn norm_a(&self) -> f64 {
        self.svd.sigma_max()
    }
    /// Smallest singular value inside the numerical rank.
    pub fn sigma_r(&self) -> f64 {
        self.svd.sigma_r()
    }
    /// `||A|| ||A^+||`, absent for the zero matrix.
    pub fn kappa_a(&self) -> Option<f64> {
        (self.rank > 0).then(|| self.svd.sigma_max() / self.svd.sigma_r())
    }

    /// `A^+ = V1 Sigma_r^{-1} U1^T`.
    pub fn pseudoinverse(&self) -> DenseMatrix {
        let mut v1s = self.svd.v1();
        for (j, s) in self.svd.sigma_ranked().iter().enumerate() {
            v1s.col_mut(j).iter_mut().for_each(|x| *x /= s);
        }
        matmul(&v1s, &self.svd.u1().transpose()).expect("conformal SVD blocks")
    }

    /// Group inverse from the block form
    /// `U [[K^-1 S^-1, K^-1 S^-1 K^-1 L], [O, O]] U^T`.
    pub fn group_inverse(&self) -> Result<DenseMatrix> {
        if !self.is_gp {
            return Err(Error::NotGroupMatrix);
        }
        let n = self.n;
        let r = self.rank;
        let k_inv = inverse(&self.cross_gram_k)?;
        let mut kis = k_inv.clone();
        for (j, s) in self.svd.sigma_ranked().iter().enumerate() {
            kis.col_mut(j).iter_mut().for_each(|x| *x /= s);
        }
        let kiski = matmul(&kis, &k_inv)?;
        let top_right = matmul(&kiski, &self.cross_gram_l)?;
        let mut block = DenseMatrix::zeros(n, n);
        for j in 0..r {
            for i in 0..r {
                block.set(i, j, kis.get(i, j));
            }
        }
        for j in 0..n - r {
            for i in 0..r {
                block.set(i, r + j, top_right.get(i, j));
            }
        }
        let u = self.svd.u();
        matmul(&matmul(u, &block)?, &u.transpose())
    }

    /// Oblique projector onto `R(A)` along `N(A)`: `U1 K^-1 V1^T`.
    pub fn oblique_projector(&self) -> Result<DenseMatrix> {
        if !self.is_gp {
            return Err(Error::NotGroupMatrix);
        }
        let k_inv = inverse(&self.cross_gram_k)?;
        matmul(&matmul(&self.svd.u1(), &k_inv)?, &self.svd.v1().transpose())
    }

    /// Flat `key=value` report, one entry per line.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let b = |v: bool| if v { "true" } else { "false" };
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "rank={}", self.rank);
        let _ = writeln!(out, "index={}", self.index);
        let _ = writeln!(out, "isEP={}", b(self.is_ep));
        let _ = writeln!(out, "isGP={}", b(self.is_gp));
        let _ = writeln!(out, "isDR={}", b(self.is_dr));
        let _ = writeln!(out, "minCosine={:.16e}", self.min_cosine());
        let _ = writeln!(out, "maxCosine={:.16e}", self.max_cosine());
        let _ = writeln!(out, "sigmaMax={:.16e}", self.svd.sigma_max());
        let _ = writeln!(out, "sigmaR={:.16e}", self.sigma_r());
        match self.kappa_a() {
            Some(k) => {
                let _ = writeln!(out, "kappaA={k:.16e}");
            }
            None => {
                let _ = writeln!(out, "kappaA=nan");
            }
        }
        let _ = writeln!(out, "kappaK={:.16e}", self.kappa_k);
        let _ = writeln!(out, "projectorDistance={:.16e}", self.projector_distance);
        out
    }
}

fn inverse(k: &DenseMatrix) -> Result<DenseMatrix> {
    let n = k.rows();
    let qr = pivoted_qr(k);
    if qr.rank_above(0.0) < n {
        return Err(Error::NotGroupMatrix);
    }
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        inv.col_mut(j).copy_from_slice(&qr.basic_solution(&e, n));
    }
    Ok(inv)
}

/// Rank, index and EP/GP/DR flags of a square matrix.
///
/// The zero matrix is reported with rank 0, index 1 and every flag set, the
/// vacuous reading of an empty `K`.
pub fn classify(a: &DenseMatrix, tol: ClassifyTolerance) -> Result<SubspaceProfile> {
    if !a.is_square() {
        return Err(dim_err(
            "classify",
            format!("square matrix required, got {}x{}", a.rows(), a.cols()),
        ));
    }
    let n = a.rows();
    let svd = jacobi_svd(a, tol.rank)?;
    let r = svd.numerical_rank();
    let (u1, u2, v1, v2) = (svd.u1(), svd.u2(), svd.v1(), svd.v2());
    let cross_gram_k = tr_matmul(&v1, &u1)?;
    let cross_gram_l = tr_matmul(&v1, &u2)?;
    let cross_gram_m = tr_matmul(&v2, &u1)?;
    let angle_cosines = if r == 0 {
        Vec::new()
    } else {
        singular_values(&cross_gram_k)?
    };
    let min_cos = angle_cosines.last().copied().unwrap_or(1.0);
    let max_cos = angle_cosines.first().copied().unwrap_or(1.0);
    let kappa_k = match min_cos {
        _ if r == 0 => 1.0,
        c if c == 0.0 => f64::INFINITY,
        c => max_cos / c,
    };

    let pu = matmul(&u1, &u1.transpose())?;
    let pv = matmul(&v1, &v1.transpose())?;
    let projector_distance = singular_values(&pu.sub(&pv)?)?
        .first()
        .copied()
        .unwrap_or(0.0);

    let gap = tol.cosine_gap();
    let ep_by_projector = projector_distance <= tol.ep;
    let ep_by_angles = r == 0 || min_cos >= 1.0 - gap;
    if ep_by_projector != ep_by_angles {
        return Err(Error::InconsistentClassification {
            projector_distance,
            min_cosine: min_cos,
        });
    }
    let is_ep = ep_by_projector;
    let is_gp = r == 0 || min_cos > tol.gp;
    let is_dr = r == 0 || max_cos < 1.0 - gap;

    let index = if r == n {
        0
    } else if is_gp {
        1
    } else {
        null_chain_index(a, &v2, svd.tolerance())?.max(2)
    };

    Ok(SubspaceProfile {
        n,
        rank: r,
        index,
        is_ep,
        is_gp,
        is_dr,
        svd,
        cross_gram_k,
        cross_gram_l,
        cross_gram_m,
        angle_cosines,
        kappa_k,
        projector_distance,
        tolerance: tol,
        fingerprint: fingerprint(&[a.as_slice()]),
    })
}

/// Smallest `k` with `dim N(A^k) = dim N(A^{k+1})`, following the chain
/// `N(A^{k+1}) = N((I - P_{N(A^k)}) A)` so that no explicit power of `A` is
/// formed.
fn null_chain_index(a: &DenseMatrix, null_a: &DenseMatrix, tol: f64) -> Result<usize> {
    let n = a.rows();
    let mut basis = null_a.clone();
    for k in 1..=n {
        let proj = matmul(&basis, &basis.transpose())?;
        let b = DenseMatrix::identity(n).sub(&proj)?;
        let svd = jacobi_svd(&matmul(&b, a)?, RankTolerance::Absolute(tol))?;
        let next = svd.v2();
        if next.cols() == basis.cols() {
            return Ok(k);
        }
        basis = next;
    }
    Ok(n)
}

/// The three reference solutions of `A x = b`.
#[derive(Debug, Clone)]
pub struct SolutionTriple {
    /// `A^+ b`
    pub x_star: Vec<f64>,
    /// `A^# b`, present iff the index is at most one
    pub x_sharp: Option<Vec<f64>>,
    /// `b - A x_star`, the least squares residual
    pub r_star: Vec<f64>,
    /// `U2 U2^T b`, the same residual computed by projection
    pub r_star_projected: Vec<f64>,
    fingerprint: u64,
}

impl SolutionTriple {
    /// Hash of `(A, b)`.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

pub fn pseudoinverse(a: &DenseMatrix, tol: ClassifyTolerance) -> Result<DenseMatrix> {
    let svd = jacobi_svd(a, tol.rank)?;
    let mut v1s = svd.v1();
    for (j, s) in svd.sigma_ranked().iter().enumerate() {
        v1s.col_mut(j).iter_mut().for_each(|x| *x /= s);
    }
    matmul(&v1s, &svd.u1().transpose())
}

pub fn group_inverse(a: &DenseMatrix, tol: ClassifyTolerance) -> Result<DenseMatrix> {
    classify(a, tol)?.group_inverse()
}

pub fn oblique_projector(a: &DenseMatrix, tol: ClassifyTolerance) -> Result<DenseMatrix> {
    classify(a, tol)?.oblique_projector()
}

pub fn solution_triple(
    a: &DenseMatrix,
    b: &[f64],
    tol: ClassifyTolerance,
) -> Result<SolutionTriple> {
    let profile = classify(a, tol)?;
    solution_triple_from(a, b, &profile)
}

/// Same as [`solution_triple`] but reuses an existing profile of `a`.
pub fn solution_triple_from(
    a: &DenseMatrix,
    b: &[f64],
    profile: &SubspaceProfile,
) -> Result<SolutionTriple> {
    if b.len() != a.rows() {
        return Err(dim_err(
            "solution_triple",
            format!("{} rows but b of length {}", a.rows(), b.len()),
        ));
    }
    if profile.fingerprint != fingerprint(&[a.as_slice()]) {
        return Err(Error::FingerprintMismatch);
    }
    let x_star = profile.pseudoinverse().matvec(b)?;
    let r_star = sub_vec(b, &a.matvec(&x_star)?);
    let u2 = profile.svd.u2();
    let r_star_projected = u2.matvec(&u2.tr_matvec(b)?)?;
    let x_sharp = if profile.index <= 1 {
        Some(profile.group_inverse()?.matvec(b)?)
    } else {
        None
    };
    Ok(SolutionTriple {
        x_star,
        x_sharp,
        r_star,
        r_star_projected,
        fingerprint: fingerprint(&[a.as_slice(), b]),
    })
}

/// Orthogonal projection of `v` onto `R(A^T)` (the row space).
pub fn project_row_space(profile: &SubspaceProfile, v: &[f64]) -> Vec<f64> {
    let v1 = profile.svd.v1();
    let c = v1.tr_matvec(v).expect("length checked by caller");
    v1.matvec(&c).expect("conformal")
}

/// Norm of the projection of `v` onto `R(A^T)`.
pub fn row_space_component_norm(profile: &SubspaceProfile, v: &[f64]) -> f64 {
    norm2(&profile.svd.v1().tr_matvec(v).expect("length checked by caller"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let d = a.sub(b).unwrap().max_abs();
        assert!(d <= tol, "difference {d:e} exceeds {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn diagonal_ep_matrix() {
        let p = classify(&m(&[&[1.0, 0.0], &[0.0, 0.0]]), ClassifyTolerance::default()).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.index(), 1);
        assert!(p.is_ep() && p.is_gp() && !p.is_dr());
        assert_eq!(p.angle_cosines(), &[1.0]);
    }

    #[test]
    fn gp_but_not_ep() {
        let eps = 1e-3;
        let p = classify(&m(&[&[eps, 1.0], &[0.0, 0.0]]), ClassifyTolerance::default()).unwrap();
        assert!(p.is_gp() && !p.is_ep() && p.is_dr());
        assert_eq!(p.index(), 1);
        let expected = eps / (1.0 + eps * eps).sqrt();
        assert!((p.angle_cosines()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_is_dr_with_index_two() {
        let p = classify(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), ClassifyTolerance::default()).unwrap();
        assert!(p.is_dr() && !p.is_gp() && !p.is_ep());
        assert_eq!(p.index(), 2);
        assert_eq!(p.kappa_k(), f64::INFINITY);
    }

    #[test]
    fn jordan_block_of_size_three() {
        let a = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(classify(&a, ClassifyTolerance::default()).unwrap().index(), 3);
    }

    #[test]
    fn zero_matrix_convention() {
        let p = classify(&DenseMatrix::zeros(3, 3), ClassifyTolerance::default()).unwrap();
        assert_eq!((p.rank(), p.index()), (0, 1));
        assert!(p.is_ep() && p.is_gp());
        assert!(p.kappa_a().is_none());
    }

    #[test]
    fn nonsingular_has_index_zero() {
        let p = classify(&m(&[&[2.0, 1.0], &[1.0, 3.0]]), ClassifyTolerance::default()).unwrap();
        assert_eq!(p.index(), 0);
        assert!(p.is_ep());
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(classify(&DenseMatrix::zeros(2, 3), ClassifyTolerance::default()).is_err());
    }

    #[test]
    fn pseudoinverse_of_diagonal() {
        let x = pseudoinverse(&DenseMatrix::from_diag(&[2.0, 0.0]), ClassifyTolerance::default())
            .unwrap();
        assert_close(&x, &DenseMatrix::from_diag(&[0.5, 0.0]), 1e-16);
    }

    #[test]
    fn gp_group_inverse_and_projector() {
        let eps = 1e-3;
        let a = m(&[&[eps, 1.0], &[0.0, 0.0]]);
        let g = group_inverse(&a, ClassifyTolerance::default()).unwrap();
        let expected = m(&[&[1.0 / eps, 1.0 / (eps * eps)], &[0.0, 0.0]]);
        assert_close(&g, &expected, 1e-12 * expected.max_abs());

        let p = oblique_projector(&a, ClassifyTolerance::default()).unwrap();
        assert_close(&p, &m(&[&[1.0, 1.0 / eps], &[0.0, 0.0]]), 1e-10);
        let null = p.matvec(&[1.0, -eps]).unwrap();
        assert!(norm2(&null) < 1e-12);
    }

    #[test]
    fn group_inverse_needs_index_one() {
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            group_inverse(&a, ClassifyTolerance::default()),
            Err(Error::NotGroupMatrix)
        ));
    }

    #[test]
    fn nonsingular_group_inverse_is_inverse() {
        let a = m(&[&[4.0, 1.0], &[2.0, 3.0]]);
        let g = group_inverse(&a, ClassifyTolerance::default()).unwrap();
        let inv = m(&[&[0.3, -0.1], &[-0.2, 0.4]]);
        assert_close(&g, &inv, 1e-12);
    }

    #[test]
    fn ep_group_inverse_equals_pseudoinverse() {
        let a = DenseMatrix::from_diag(&[1.0, 1e-2, 0.0]);
        let g = group_inverse(&a, ClassifyTolerance::default()).unwrap();
        let p = pseudoinverse(&a, ClassifyTolerance::default()).unwrap();
        assert_close(&g, &p, 1e-10 * p.max_abs());
    }

    #[test]
    fn ep_projector_is_orthogonal() {
        let a = DenseMatrix::from_diag(&[3.0, 0.0, 1.0]);
        let p = oblique_projector(&a, ClassifyTolerance::default()).unwrap();
        assert_close(&p, &DenseMatrix::from_diag(&[1.0, 0.0, 1.0]), 1e-15);
    }

    #[test]
    fn triples_for_the_two_by_two_examples() {
        let eps = 1e-4;
        let a = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let t = solution_triple(&a, &[1.0, eps], ClassifyTolerance::default()).unwrap();
        assert_eq!(t.x_star, vec![1.0, 0.0]);
        assert_eq!(t.r_star, vec![0.0, eps]);

        let eps = 1e-3;
        let a = m(&[&[eps, 1.0], &[0.0, 0.0]]);
        let t = solution_triple(&a, &[1.0, 0.0], ClassifyTolerance::default()).unwrap();
        let xs = t.x_sharp.unwrap();
        assert!((xs[0] - 1.0 / eps).abs() < 1e-12 / eps && xs[1].abs() < 1e-9);
        let c = 1.0 / (1.0 + eps * eps);
        assert!((t.x_star[0] - c * eps).abs() < 1e-15 && (t.x_star[1] - c).abs() < 1e-15);
    }

    #[test]
    fn rhs_in_left_null_space() {
        let a = DenseMatrix::from_diag(&[1.0, 0.0]);
        let t = solution_triple(&a, &[0.0, 2.0], ClassifyTolerance::default()).unwrap();
        assert_eq!(t.x_star, vec![0.0, 0.0]);
        assert_eq!(t.r_star, vec![0.0, 2.0]);
    }

    #[test]
    fn report_has_the_documented_keys() {
        let p = classify(&DenseMatrix::from_diag(&[1.0, 0.0]), ClassifyTolerance::default()).unwrap();
        let r = p.report();
        for key in ["rank=1", "index=1", "isEP=true", "isGP=true", "isDR=false", "kappaA=", "kappaK="] {
            assert!(r.contains(key), "missing {key} in\n{r}");
        }
    }
}
