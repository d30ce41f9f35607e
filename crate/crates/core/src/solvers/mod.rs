//! GMRES and range-restricted GMRES drivers with per-iteration diagnostics
//! of the extended Hessenberg least squares problem.

mod bounds;
mod csv;
mod oracle;

pub use bounds::{check_bounds, BoundCheck, BoundId, BoundReport, BoundStatus};
pub use csv::{trace_csv, CSV_HEADER};
pub use oracle::brute_force_gmres_oracle;

use crate::arnoldi::{Arnoldi, ArnoldiStatus, BreakdownCase, CaseKind, DEFAULT_BREAKDOWN_TOL};
use crate::dense::{
    fingerprint, jacobi_svd, norm2, pivoted_least_squares_with, singular_values, sub_vec,
    DenseMatrix, RankTolerance,
};
use crate::error::{dim_err, Error, Result};

/// Unit roundoff used by the rank-deficiency flag.
pub const DEFAULT_UNIT_ROUNDOFF: f64 = 1.1e-16;

/// `||A^T r|| <= LS_SOLUTION_TOL ||A|| ||r0||` marks a least squares solution.
pub const LS_SOLUTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gmres,
    RrGmres,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gmres => "gmres",
            Method::RrGmres => "rrgmres",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmres" => Ok(Method::Gmres),
            "rrgmres" | "rr-gmres" => Ok(Method::RrGmres),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Arnoldi stops when `h_{k+1,k} <= breakdown_tol ||A||`.
    pub breakdown_tol: f64,
    pub unit_roundoff: f64,
    pub method: Method,
    /// When false, singular values of `H` are computed for the final step only.
    pub record_svd_every_step: bool,
    /// Relative truncation level of the pivoted Hessenberg solve; `None`
    /// selects `1e-14 max(k+1, k)`.
    pub ls_eta: Option<f64>,
    /// Relative rank tolerance used to obtain `r_*` from the SVD of `A`.
    pub rank_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
            unit_roundoff: DEFAULT_UNIT_ROUNDOFF,
            method: Method::Gmres,
            record_svd_every_step: true,
            ls_eta: None,
            rank_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.unit_roundoff > 0.0 && self.unit_roundoff < 1e-8) {
            return Err(Error::InvalidParameter(format!(
                "unit roundoff {} outside (0, 1e-8)",
                self.unit_roundoff
            )));
        }
        if !(self.breakdown_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "breakdown tolerance {} is negative",
                self.breakdown_tol
            )));
        }
        Ok(())
    }
}

/// Diagnostics of one iteration.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    /// `b - A x`, recomputed from the iterate
    pub r: Vec<f64>,
    /// `||r|| / ||b||`
    pub resnorm_rel: f64,
    /// `||A^T r|| / ||A^T b||`
    pub normal_resnorm_rel: f64,
    /// `||r - r_*|| / ||r||`
    pub res_err_rel: f64,
    pub sigma_max_h: f64,
    /// Smallest singular value of `H` above `max(k+1, k) 2^-52 sigma_max`.
    pub sigma_min_pos_h: f64,
    /// `sigma_k(H_{k+1,k})`
    pub sigma_last_h: f64,
    /// `sigma_max / sigma_k`, infinite when `sigma_k = 0`
    pub kappa_h: f64,
    /// `u kappa(H) >= 1`
    pub rank_deficient: bool,
    pub subdiagonal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Breakdown(BreakdownCase),
    MaxIter,
    /// `x0` already solved the system; no step was taken.
    InitialResidualZero,
}

#[derive(Debug, Clone)]
pub struct KrylovTrace {
    pub method: Method,
    pub steps: Vec<StepRecord>,
    pub x0: Vec<f64>,
    pub r0: Vec<f64>,
    pub r_star: Vec<f64>,
    pub b_norm: f64,
    pub at_b_norm: f64,
    pub a_norm: f64,
    pub termination: Termination,
    /// Final `H_{k+1,k}`.
    pub hessenberg: DenseMatrix,
    /// Final `Q_k`.
    pub basis: DenseMatrix,
    /// RR-GMRES only: `||(I - Q_{k+1} Q_{k+1}^T) r0||` per step.
    pub simpler_gmres_resnorm: Vec<f64>,
    pub unit_roundoff: f64,
    fingerprint_a: u64,
    fingerprint_ab: u64,
}

impl KrylovTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.steps.last()
    }

    pub fn final_x(&self) -> &[f64] {
        self.steps.last().map_or(&self.x0, |s| &s.x)
    }

    pub fn final_r(&self) -> &[f64] {
        self.steps.last().map_or(&self.r0, |s| &s.r)
    }

    pub fn final_normal_resnorm_rel(&self, a: &DenseMatrix) -> f64 {
        self.steps.last().map_or_else(
            || ratio(norm2(&a.tr_matvec(&self.r0).expect("checked")), self.at_b_norm),
            |s| s.normal_resnorm_rel,
        )
    }

    /// `||A^T r|| <= 1e-8 ||A|| ||r0||` at the final iterate.
    pub fn is_least_squares_solution(&self, a: &DenseMatrix) -> bool {
        let atr = norm2(&a.tr_matvec(self.final_r()).expect("checked"));
        atr <= LS_SOLUTION_TOL * self.a_norm * norm2(&self.r0)
    }

    pub fn breakdown(&self) -> Option<BreakdownCase> {
        match self.termination {
            Termination::Breakdown(c) => Some(c),
            _ => None,
        }
    }

    /// Hash of `A`.
    pub fn fingerprint_a(&self) -> u64 {
        self.fingerprint_a
    }

    /// Hash of `(A, b)`.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint_ab
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

struct Setup {
    r0: Vec<f64>,
    r_star: Vec<f64>,
    b_norm: f64,
    at_b_norm: f64,
    a_norm: f64,
}

fn setup(a: &DenseMatrix, b: &[f64], x0: &[f64], config: &SolverConfig) -> Result<Setup> {
    config.validate()?;
    if !a.is_square() {
        return Err(dim_err(
            "solve",
            format!("square matrix required, got {}x{}", a.rows(), a.cols()),
        ));
    }
    if b.len() != a.rows() || x0.len() != a.rows() {
        return Err(dim_err(
            "solve",
            format!("n = {} but b has {} and x0 {} entries", a.rows(), b.len(), x0.len()),
        ));
    }
    if let Some(i) = b.iter().chain(x0).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: i % a.rows(),
            col: 0,
        });
    }
    let svd = jacobi_svd(a, RankTolerance::Relative(config.rank_tol))?;
    let u2 = svd.u2();
    let r_star = u2.matvec(&u2.tr_matvec(b)?)?;
    let r0 = sub_vec(b, &a.matvec(x0)?);
    Ok(Setup {
        r0,
        r_star,
        b_norm: norm2(b),
        at_b_norm: norm2(&a.tr_matvec(b)?),
        a_norm: svd.sigma_max(),
    })
}

struct HessenbergStats {
    sigma_max: f64,
    sigma_min_pos: f64,
    sigma_last: f64,
    kappa: f64,
}

fn hessenberg_stats(h: &DenseMatrix) -> Result<HessenbergStats> {
    let s = singular_values(h)?;
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_last = s.last().copied().unwrap_or(0.0);
    let tol = RankTolerance::Default.resolve(h.rows(), h.cols(), sigma_max);
    let sigma_min_pos = s.iter().copied().filter(|&v| v > tol).last().unwrap_or(0.0);
    let kappa = if sigma_last == 0.0 {
        f64::INFINITY
    } else {
        sigma_max / sigma_last
    };
    Ok(HessenbergStats {
        sigma_max,
        sigma_min_pos,
        sigma_last,
        kappa,
    })
}

const NAN_STATS: HessenbergStats = HessenbergStats {
    sigma_max: f64::NAN,
    sigma_min_pos: f64::NAN,
    sigma_last: f64::NAN,
    kappa: f64::NAN,
};

/// Runs the method selected in `config`.
pub fn solve(a: &DenseMatrix, b: &[f64], x0: &[f64], config: &SolverConfig) -> Result<KrylovTrace> {
    match config.method {
        Method::Gmres => gmres(a, b, x0, config),
        Method::RrGmres => rr_gmres(a, b, x0, config),
    }
}

/// GMRES: `x_k = x0 + Q_k y_k` with `y_k` a pivoted-QR basic solution of
/// `min ||beta e_1 - H_{k+1,k} y||`.
pub fn gmres(a: &DenseMatrix, b: &[f64], x0: &[f64], config: &SolverConfig) -> Result<KrylovTrace> {
    let s = setup(a, b, x0, config)?;
    let beta = norm2(&s.r0);
    if beta <= config.breakdown_tol * s.b_norm || beta == 0.0 {
        return Ok(empty_trace(Method::Gmres, a, b, x0, s, config));
    }
    let start: Vec<f64> = s.r0.iter().map(|v| v / beta).collect();
    let arn = Arnoldi::with_norm(a, s.a_norm, &start, config.breakdown_tol)?;
    run(Method::Gmres, a, b, x0, s, arn, config, |_, h| {
        let mut rhs = vec![0.0; h.rows()];
        rhs[0] = beta;
        Ok(rhs)
    })
}

/// RR-GMRES: the Krylov space is built from `A r0`, and the small problem is
/// `min ||Q_{k+1}^T r0 - H_{k+1,k} y||`.
///
/// Fails with [`Error::StartVectorAnnihilated`] when
/// `||A r0|| <= n u ||A|| ||r0||`.
pub fn rr_gmres(
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
) -> Result<KrylovTrace> {
    let s = setup(a, b, x0, config)?;
    let beta = norm2(&s.r0);
    if beta <= config.breakdown_tol * s.b_norm || beta == 0.0 {
        return Ok(empty_trace(Method::RrGmres, a, b, x0, s, config));
    }
    let ar0 = a.matvec(&s.r0)?;
    let ar0_norm = norm2(&ar0);
    let n = a.rows() as f64;
    if ar0_norm <= n * config.unit_roundoff * s.a_norm * beta {
        return Err(Error::StartVectorAnnihilated {
            normal_residual_rel: ratio(norm2(&a.tr_matvec(&s.r0)?), s.at_b_norm),
        });
    }
    let start: Vec<f64> = ar0.iter().map(|v| v / ar0_norm).collect();
    let arn = Arnoldi::with_norm(a, s.a_norm, &start, config.breakdown_tol)?;
    let r0 = s.r0.clone();
    run(Method::RrGmres, a, b, x0, s, arn, config, move |arn, h| {
        let q = arn.basis();
        let mut rhs = q.tr_matvec(&r0)?;
        rhs.resize(h.rows(), 0.0);
        Ok(rhs)
    })
}

fn empty_trace(
    method: Method,
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    s: Setup,
    config: &SolverConfig,
) -> KrylovTrace {
    KrylovTrace {
        method,
        steps: Vec::new(),
        x0: x0.to_vec(),
        r0: s.r0,
        r_star: s.r_star,
        b_norm: s.b_norm,
        at_b_norm: s.at_b_norm,
        a_norm: s.a_norm,
        termination: Termination::InitialResidualZero,
        hessenberg: DenseMatrix::zeros(1, 0),
        basis: DenseMatrix::zeros(a.rows(), 0),
        simpler_gmres_resnorm: Vec::new(),
        unit_roundoff: config.unit_roundoff,
        fingerprint_a: fingerprint(&[a.as_slice()]),
        fingerprint_ab: fingerprint(&[a.as_slice(), b]),
    }
}

#[allow(clippy::too_many_arguments)]
fn run<F>(
    method: Method,
    a: &DenseMatrix,
    b: &[f64],
    x0: &[f64],
    s: Setup,
    mut arn: Arnoldi<'_>,
    config: &SolverConfig,
    small_rhs: F,
) -> Result<KrylovTrace>
where
    F: Fn(&Arnoldi<'_>, &DenseMatrix) -> Result<Vec<f64>>,
{
    let mut steps = Vec::new();
    let mut simpler = Vec::new();
    while arn.is_running() && steps.len() < config.max_iter {
        arn.step()?;
        let k = arn.steps();
        let h = arn.hessenberg();
        let rhs = small_rhs(&arn, &h)?;
        if method == Method::RrGmres {
            let q = arn.basis();
            let proj = q.matvec(&q.tr_matvec(&s.r0)?)?;
            simpler.push(norm2(&sub_vec(&s.r0, &proj)));
        }
        let eta = config.ls_eta.unwrap_or(1e-14 * (k + 1) as f64);
        let y = pivoted_least_squares_with(&h, &rhs, eta)?;
        let mut x = x0.to_vec();
        for (j, yj) in y.iter().enumerate() {
            crate::dense::axpy(*yj, arn.q(j), &mut x);
        }
        let r = sub_vec(b, &a.matvec(&x)?);
        let r_norm = norm2(&r);
        let stats = if config.record_svd_every_step {
            hessenberg_stats(&h)?
        } else {
            NAN_STATS
        };
        steps.push(StepRecord {
            iter: k,
            resnorm_rel: ratio(r_norm, s.b_norm),
            normal_resnorm_rel: ratio(norm2(&a.tr_matvec(&r)?), s.at_b_norm),
            res_err_rel: ratio(norm2(&sub_vec(&r, &s.r_star)), r_norm),
            sigma_max_h: stats.sigma_max,
            sigma_min_pos_h: stats.sigma_min_pos,
            sigma_last_h: stats.sigma_last,
            kappa_h: stats.kappa,
            rank_deficient: config.unit_roundoff * stats.kappa >= 1.0,
            subdiagonal: h.get(k, k - 1),
            x,
            r,
        });
    }
    let hessenberg = arn.hessenberg();
    if !config.record_svd_every_step {
        if let Some(last) = steps.last_mut() {
            let stats = hessenberg_stats(&hessenberg)?;
            last.sigma_max_h = stats.sigma_max;
            last.sigma_min_pos_h = stats.sigma_min_pos;
            last.sigma_last_h = stats.sigma_last;
            last.kappa_h = stats.kappa;
            last.rank_deficient = config.unit_roundoff * stats.kappa >= 1.0;
        }
    }
    let termination = match arn.status() {
        ArnoldiStatus::Breakdown(case) => Termination::Breakdown(case),
        ArnoldiStatus::Running => Termination::MaxIter,
    };
    Ok(KrylovTrace {
        method,
        steps,
        x0: x0.to_vec(),
        r0: s.r0,
        r_star: s.r_star,
        b_norm: s.b_norm,
        at_b_norm: s.at_b_norm,
        a_norm: s.a_norm,
        termination,
        hessenberg,
        basis: arn.basis_k(),
        simpler_gmres_resnorm: simpler,
        unit_roundoff: config.unit_roundoff,
        fingerprint_a: fingerprint(&[a.as_slice()]),
        fingerprint_ab: fingerprint(&[a.as_slice(), b]),
    })
}

/// Whether a finished trace ended in a breakdown that produced no least
/// squares solution.
pub fn breakdown_without_solution(trace: &KrylovTrace, a: &DenseMatrix) -> bool {
    matches!(trace.termination, Termination::Breakdown(_)) && !trace.is_least_squares_solution(a)
}

/// Case I breakdown of a finished trace, if any.
pub fn case_one(trace: &KrylovTrace) -> bool {
    matches!(
        trace.termination,
        Termination::Breakdown(BreakdownCase {
            kind: CaseKind::CaseI,
            ..
        })
    )
}
