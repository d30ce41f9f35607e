//! Test systems with analytic reference values. Every reference is checked
//! against a numerical computation when the instance is built.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dense::io::{format_real, write_matrix, write_vector};
use crate::dense::{norm2, singular_values, sub_vec, DenseMatrix};
use crate::error::{Error, Result};
use crate::subspaces::{classify, solution_triple_from, ClassifyTolerance, SubspaceProfile};

const REFERENCE_RTOL: f64 = 1e-8;

/// Analytic quantities attached to a problem. Absent entries are unknown or
/// undefined for the chosen parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct References {
    pub kappa_a: Option<f64>,
    /// Lower bound on `kappa(A)`.
    pub kappa_a_lower: Option<f64>,
    pub kappa_k: Option<f64>,
    pub sigma_rank_a: Option<f64>,
    /// `sigma_r(V1^T U1)`
    pub min_cosine: Option<f64>,
    pub x_star: Option<Vec<f64>>,
    pub x_sharp: Option<Vec<f64>>,
    pub r_star: Option<Vec<f64>>,
    /// `||b|_{R(A)}||`
    pub b_range_norm: Option<f64>,
    /// `||b|_{N(A^T)}||`
    pub b_null_norm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: &'static str,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
    pub params: BTreeMap<&'static str, f64>,
    pub references: References,
}

impl ProblemInstance {
    fn build(
        name: &'static str,
        a: DenseMatrix,
        b: Vec<f64>,
        params: &[(&'static str, f64)],
        references: References,
    ) -> Result<Self> {
        let x0 = vec![0.0; a.cols()];
        let inst = Self {
            name,
            a,
            b,
            x0,
            params: params.iter().copied().collect(),
            references,
        };
        inst.verify()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn profile(&self) -> Result<SubspaceProfile> {
        classify(&self.a, ClassifyTolerance::default())
    }

    fn mismatch(&self, quantity: &'static str, expected: f64, computed: f64) -> Error {
        Error::ReferenceMismatch {
            problem: self.name.to_string(),
            quantity,
            expected,
            computed,
        }
    }

    fn check_scalar(&self, quantity: &'static str, expected: f64, computed: f64) -> Result<()> {
        if (expected - computed).abs() <= REFERENCE_RTOL * expected.abs() {
            Ok(())
        } else {
            Err(self.mismatch(quantity, expected, computed))
        }
    }

    fn check_component(&self, quantity: &'static str, expected: f64, computed: f64) -> Result<()> {
        if (expected - computed).abs() <= REFERENCE_RTOL * norm2(&self.b) {
            Ok(())
        } else {
            Err(self.mismatch(quantity, expected, computed))
        }
    }

    fn check_vector(&self, quantity: &'static str, expected: &[f64], computed: &[f64]) -> Result<()> {
        let err = norm2(&sub_vec(expected, computed));
        let scale = match norm2(expected) {
            e if e > 0.0 => e,
            _ => norm2(&self.b),
        };
        if err <= REFERENCE_RTOL * scale {
            Ok(())
        } else {
            Err(self.mismatch(quantity, norm2(expected), norm2(computed)))
        }
    }

    fn verify(&self) -> Result<()> {
        let refs = &self.references;
        let profile = self.profile()?;
        let triple = solution_triple_from(&self.a, &self.b, &profile)?;
        if let Some(k) = refs.kappa_a {
            let computed = profile.kappa_a().unwrap_or(f64::NAN);
            self.check_scalar("kappaA", k, computed)?;
        }
        if let Some(k) = refs.kappa_a_lower {
            let s = singular_values(&self.a)?;
            let computed = s[0] / s[s.len() - 1];
            if computed < k * (1.0 - REFERENCE_RTOL) {
                return Err(self.mismatch("kappaA lower bound", k, computed));
            }
        }
        if let Some(k) = refs.kappa_k {
            self.check_scalar("kappaK", k, profile.kappa_k())?;
        }
        if let Some(s) = refs.sigma_rank_a {
            self.check_scalar("sigmaR", s, profile.sigma_r())?;
        }
        if let Some(c) = refs.min_cosine {
            self.check_scalar("minCosine", c, profile.min_cosine())?;
        }
        if let Some(x) = &refs.x_star {
            self.check_vector("xStar", x, &triple.x_star)?;
        }
        if let Some(x) = &refs.x_sharp {
            let computed = triple
                .x_sharp
                .as_ref()
                .ok_or_else(|| self.mismatch("xSharp", norm2(x), f64::NAN))?;
            self.check_vector("xSharp", x, computed)?;
        }
        if let Some(r) = &refs.r_star {
            let err = norm2(&sub_vec(r, &triple.r_star));
            if err > REFERENCE_RTOL * norm2(&self.b) {
                return Err(self.mismatch("rStar", norm2(r), norm2(&triple.r_star)));
            }
        }
        if let Some(v) = refs.b_null_norm {
            self.check_component("bNullNorm", v, norm2(&triple.r_star))?;
        }
        if let Some(v) = refs.b_range_norm {
            let range_part = sub_vec(&self.b, &triple.r_star);
            self.check_component("bRangeNorm", v, norm2(&range_part))?;
        }
        Ok(())
    }

    /// `key=value` lines: the problem name followed by its parameters.
    pub fn params_text(&self) -> String {
        let mut out = format!("name={}\n", self.name);
        for (k, v) in &self.params {
            let _ = writeln!(out, "{k}={}", format_real(*v));
        }
        out
    }

    /// Writes `<name>_A.txt`, `<name>_b.txt` and `<name>_params.txt` into `dir`.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let paths = [
            dir.join(format!("{}_A.txt", self.name)),
            dir.join(format!("{}_b.txt", self.name)),
            dir.join(format!("{}_params.txt", self.name)),
        ];
        write_matrix(&paths[0], &self.a)?;
        write_vector(&paths[1], &self.b)?;
        fs::write(&paths[2], self.params_text())?;
        Ok(paths)
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

/// `A = diag(1, 0)`, `b = [1, eps]`.
pub fn ep_2x2(eps: f64) -> Result<ProblemInstance> {
    require(eps >= 0.0 && eps.is_finite(), "ep_2x2 needs eps >= 0")?;
    ProblemInstance::build(
        "ep_2x2",
        DenseMatrix::from_diag(&[1.0, 0.0]),
        vec![1.0, eps],
        &[("eps", eps)],
        References {
            sigma_rank_a: Some(1.0),
            kappa_a: Some(1.0),
            x_star: Some(vec![1.0, 0.0]),
            x_sharp: Some(vec![1.0, 0.0]),
            r_star: Some(vec![0.0, eps]),
            ..References::default()
        },
    )
}

/// `A = diag(1, delta)`, `b = [1, eps]`; a nonsingular perturbation of
/// [`ep_2x2`].
pub fn near_ep_2x2(delta: f64, eps: f64) -> Result<ProblemInstance> {
    require(delta != 0.0, "near_ep_2x2 needs delta > 0; use ep_2x2 for delta = 0")?;
    require(delta > 0.0 && eps > 0.0, "near_ep_2x2 needs delta, eps > 0")?;
    let x = vec![1.0, eps / delta];
    ProblemInstance::build(
        "near_ep_2x2",
        DenseMatrix::from_diag(&[1.0, delta]),
        vec![1.0, eps],
        &[("delta", delta), ("eps", eps)],
        References {
            kappa_a: Some(1.0 / delta.min(1.0) * delta.max(1.0)),
            x_star: Some(x.clone()),
            x_sharp: Some(x),
            r_star: Some(vec![0.0, 0.0]),
            ..References::default()
        },
    )
}

/// `D = diag(10^{-4(i-1)/63})`, `A = [[D, 0], [0, 0]]` of order 128 and
/// `b = [gamma 1_64; delta 1_64]`.
pub fn ep_diag_128(gamma: f64, delta: f64) -> Result<ProblemInstance> {
    require(gamma >= 0.0 && delta >= 0.0, "ep_diag_128 needs gamma, delta >= 0")?;
    require(gamma > 0.0 || delta > 0.0, "ep_diag_128 needs gamma or delta nonzero")?;
    let mut diag = vec![0.0; 128];
    for (i, d) in diag.iter_mut().take(64).enumerate() {
        *d = 10f64.powf(-4.0 * i as f64 / 63.0);
    }
    let mut b = vec![gamma; 128];
    b[64..].iter_mut().for_each(|v| *v = delta);
    let mut r_star = vec![0.0; 128];
    r_star[64..].iter_mut().for_each(|v| *v = delta);
    let x_star: Vec<f64> = (0..128)
        .map(|i| if i < 64 { gamma / diag[i] } else { 0.0 })
        .collect();
    ProblemInstance::build(
        "ep_diag_128",
        DenseMatrix::from_diag(&diag),
        b,
        &[("delta", delta), ("gamma", gamma)],
        References {
            kappa_a: Some(1e4),
            sigma_rank_a: Some(1e-4),
            min_cosine: Some(1.0),
            x_star: Some(x_star.clone()),
            x_sharp: Some(x_star),
            r_star: Some(r_star),
            b_range_norm: Some(8.0 * gamma),
            b_null_norm: Some(8.0 * delta),
            ..References::default()
        },
    )
}

/// `A = [[eps, 1], [0, 0]]`, `b = [1, 0]`: GP but not EP for `eps > 0`, DR
/// for `eps = 0`.
pub fn gp_2x2(eps: f64) -> Result<ProblemInstance> {
    require(eps >= 0.0 && eps.is_finite(), "gp_2x2 needs eps >= 0")?;
    let s = (1.0 + eps * eps).sqrt();
    let mut refs = References {
        sigma_rank_a: Some(s),
        x_star: Some(vec![eps / (s * s), 1.0 / (s * s)]),
        r_star: Some(vec![0.0, 0.0]),
        ..References::default()
    };
    if eps > 0.0 {
        refs.x_sharp = Some(vec![1.0 / eps, 0.0]);
        refs.min_cosine = Some(eps / s);
        refs.kappa_k = Some(1.0);
    }
    ProblemInstance::build(
        "gp_2x2",
        DenseMatrix::from_rows(&[vec![eps, 1.0], vec![0.0, 0.0]])?,
        vec![1.0, 0.0],
        &[("eps", eps)],
        refs,
    )
}

/// `A = [[eps, 1], [0, delta]]`, `b = [1, -eps]`; a nonsingular perturbation
/// of [`gp_2x2`] with `kappa(A) >= 1 / (delta eps)`.
pub fn near_gp_2x2(delta: f64, eps: f64) -> Result<ProblemInstance> {
    require(delta > 0.0 && eps > 0.0, "near_gp_2x2 needs delta, eps > 0")?;
    let x = vec![1.0 / eps + 1.0 / delta, -eps / delta];
    ProblemInstance::build(
        "near_gp_2x2",
        DenseMatrix::from_rows(&[vec![eps, 1.0], vec![0.0, delta]])?,
        vec![1.0, -eps],
        &[("delta", delta), ("eps", eps)],
        References {
            kappa_a_lower: Some(1.0 / (delta * eps)),
            x_star: Some(x.clone()),
            x_sharp: Some(x),
            ..References::default()
        },
    )
}

/// Diagonal entries `d_1 = 1`, `d_64 = 10^-rho` and
/// `d_i = d_64 + (64 - i)/63 (1 - d_64) 0.7^(i-1)` in between.
pub fn strakos_diagonal(rho: f64) -> Vec<f64> {
    let d64 = 10f64.powf(-rho);
    (1..=64)
        .map(|i| match i {
            1 => 1.0,
            64 => d64,
            _ => d64 + (64 - i) as f64 / 63.0 * (1.0 - d64) * 0.7f64.powi(i - 1),
        })
        .collect()
}

/// `A = [[D, I], [0, 0]]` of order 128 with the Strakos diagonal `D`,
/// `b = [f; 0]` with `f_i = 10^{-(64-i) rho / 63}`.
pub fn strakos_gp_128(rho: f64) -> Result<ProblemInstance> {
    require(rho > 0.0 && rho.is_finite(), "strakos_gp_128 needs rho > 0")?;
    let d = strakos_diagonal(rho);
    let mut a = DenseMatrix::zeros(128, 128);
    for (i, di) in d.iter().enumerate() {
        a.set(i, i, *di);
        a.set(i, 64 + i, 1.0);
    }
    let mut b = vec![0.0; 128];
    for (i, bi) in b.iter_mut().take(64).enumerate() {
        *bi = 10f64.powf(-((63 - i) as f64) * rho / 63.0);
    }
    let t = 10f64.powf(-2.0 * rho);
    ProblemInstance::build(
        "strakos_gp_128",
        a,
        b,
        &[("rho", rho)],
        References {
            kappa_a: Some((2.0 / (t + 1.0)).sqrt()),
            kappa_k: Some(10f64.powf(rho) * ((t + 1.0) / 2.0).sqrt()),
            sigma_rank_a: Some((1.0 + t).sqrt()),
            r_star: Some(vec![0.0; 128]),
            ..References::default()
        },
    )
}
