use crate::dense::{matmul, min_norm_least_squares, norm2, sub_vec, DenseMatrix, RankTolerance};
use crate::error::{dim_err, Result};

/// GMRES iterate by brute force: the normalised power basis
/// `Z = [r0, A r0, ..., A^{k-1} r0]` and the SVD minimum-norm solution of
/// `min ||r0 - A Z c||`. Returns `x0 + Z c`.
pub fn brute_force_gmres_oracle(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    k: usize,
) -> Result<Vec<f64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n || x0.len() != n {
        return Err(dim_err("brute_force_gmres_oracle", "shapes of A, b and x0 disagree"));
    }
    let r0 = sub_vec(b, &a.matvec(x0)?);
    if k == 0 || norm2(&r0) == 0.0 {
        return Ok(x0.to_vec());
    }
    let mut cols = Vec::with_capacity(k);
    let mut v = r0.clone();
    for _ in 0..k {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        cols.push(v.clone());
        v = a.matvec(&v)?;
    }
    let z = DenseMatrix::from_columns(n, &cols)?;
    let az = matmul(a, &z)?;
    let c = min_norm_least_squares(&az, &r0, RankTolerance::Default)?;
    let mut x = x0.to_vec();
    for (xi, zi) in x.iter_mut().zip(z.matvec(&c)?) {
        *xi += zi;
    }
    Ok(x)
}
