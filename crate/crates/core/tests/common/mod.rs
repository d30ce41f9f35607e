//! Random test-matrix constructions shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sk_core::dense::{householder_qr, matmul, pivoted_least_squares, DenseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Box-Muller
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let v: f64 = rng.gen();
            (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
        })
        .collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, gaussian_vec(rng, rows * cols)).unwrap()
}

pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    householder_qr(&gaussian(rng, n, n)).unwrap().full_q()
}

fn inverse(x: &DenseMatrix) -> DenseMatrix {
    let n = x.rows();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            pivoted_least_squares(x, &e).unwrap()
        })
        .collect();
    DenseMatrix::from_columns(n, &cols).unwrap()
}

fn spread(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    (0..r)
        .map(|_| {
            let s: f64 = rng.gen_range(0.1..1.0);
            if rng.gen_bool(0.5) {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// `Q diag(M, 0) Q^T` with `Q` orthogonal and `M` a nonsingular `r x r` block.
pub fn random_ep(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DenseMatrix {
    let q = orthogonal(rng, n);
    let mut core = DenseMatrix::zeros(n, n);
    let d = spread(rng, r);
    let off = gaussian(rng, r, r);
    for j in 0..r {
        for i in 0..r {
            let v = if i == j { d[i] } else { 0.1 * off.get(i, j) / r as f64 };
            core.set(i, j, v);
        }
    }
    matmul(&matmul(&q, &core).unwrap(), &q.transpose()).unwrap()
}

/// `X diag(s_1..s_r, 0) X^{-1}` with a random nonsingular `X`; GP of rank `r`.
pub fn random_gp(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DenseMatrix {
    let mut x = gaussian(rng, n, n).scaled(0.5 / (n as f64).sqrt());
    for i in 0..n {
        x.set(i, i, x.get(i, i) + 1.0);
    }
    let mut d = spread(rng, r);
    d.resize(n, 0.0);
    let xd = matmul(&x, &DenseMatrix::from_diag(&d)).unwrap();
    matmul(&xd, &inverse(&x)).unwrap()
}

/// `G diag(s_1..s_r, 0) H` with random factors: a general singular matrix.
pub fn random_singular(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DenseMatrix {
    let left = gaussian(rng, n, r);
    let right = gaussian(rng, r, n);
    matmul(&left, &right).unwrap().scaled(1.0 / n as f64)
}

/// `A x` for a random `x`: a right-hand side in the range of `A`.
pub fn range_vector(rng: &mut ChaCha8Rng, a: &DenseMatrix) -> Vec<f64> {
    let x = gaussian_vec(rng, a.cols());
    a.matvec(&x).unwrap()
}

/// `X (diag(d) + J) X^{-1}` where `J` is a nilpotent 2x2 Jordan block in the
/// trailing corner: singular with index 2, so not GP.
pub fn random_index_two(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    assert!(n >= 2);
    let mut x = gaussian(rng, n, n).scaled(0.5 / (n as f64).sqrt());
    for i in 0..n {
        x.set(i, i, x.get(i, i) + 1.0);
    }
    let mut d = spread(rng, n - 2);
    d.resize(n, 0.0);
    let mut core = DenseMatrix::from_diag(&d);
    core.set(n - 2, n - 1, 1.0);
    matmul(&matmul(&x, &core).unwrap(), &inverse(&x)).unwrap()
}
