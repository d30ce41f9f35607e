//! Inequalities relating the extended Hessenberg matrix to `A`, evaluated on
//! finished traces.

use std::fmt;

use super::{KrylovTrace, Method, StepRecord};
use crate::dense::{norm2, sub_vec};
use crate::error::{Error, Result};
use crate::subspaces::{row_space_component_norm, SolutionTriple, SubspaceProfile};

/// `||r_*|| <= CONSISTENT_TOL ||b||` counts as a consistent system.
pub const CONSISTENT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundId {
    /// EP: `sigma_k(H) <= ||A|| ||r_{k-1} - r_*|| / ||r_{k-1}||`
    A,
    /// `sigma_k(H) <= ||A|| ||r0|_{R(A^T)}|| / ||r0||`
    B,
    /// Consistent EP: `kappa(H) <= kappa(A)`
    C,
    /// EP, RR-GMRES: `sigma_r(A) <= sigma_k(H^R)`
    CRange,
    /// Consistent GP: `sigma_1(H) <= ||A|| ||V1^T U1||`
    D1,
    /// Consistent GP: `sigma_r(A) sigma_r(V1^T U1) <= sigma_k(H)`
    D2,
    /// Consistent GP: `kappa(H) <= kappa(A) kappa(V1^T U1)`
    D3,
    /// `||H^R_{k,k-1}|| <= ||H_{k+1,k}||`
    E1,
    /// `sigma_k(H_{k+1,k}) <= sigma_{k-1}(H^R_{k,k-1})`
    E2,
    /// `kappa(H^R_{k,k-1}) <= kappa(H_{k+1,k})`
    E3,
    /// GP: `sigma_r(V1^T U1) ||x_#|| <= ||x_*||`
    F1,
    /// GP: `||x_*|| <= ||x_#||`
    F2,
    /// `||H|| <= ||A||`
    HNorm,
}

impl BoundId {
    pub const ALL: [BoundId; 13] = [
        BoundId::A,
        BoundId::B,
        BoundId::C,
        BoundId::CRange,
        BoundId::D1,
        BoundId::D2,
        BoundId::D3,
        BoundId::E1,
        BoundId::E2,
        BoundId::E3,
        BoundId::F1,
        BoundId::F2,
        BoundId::HNorm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BoundId::A => "a",
            BoundId::B => "b",
            BoundId::C => "c",
            BoundId::CRange => "c-rr",
            BoundId::D1 => "d-sigma1",
            BoundId::D2 => "d-sigmak",
            BoundId::D3 => "d-kappa",
            BoundId::E1 => "e-norm",
            BoundId::E2 => "e-sigma",
            BoundId::E3 => "e-kappa",
            BoundId::F1 => "f-lower",
            BoundId::F2 => "f-upper",
            BoundId::HNorm => "h-norm",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Satisfied,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub id: BoundId,
    /// Trace the left side was read from; `None` for bounds on solutions.
    pub method: Option<Method>,
    pub iter: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub status: BoundStatus,
    /// `rhs - lhs`
    pub slack: f64,
}

impl BoundCheck {
    fn evaluate(id: BoundId, method: Option<Method>, iter: Option<usize>, lhs: f64, rhs: f64) -> Self {
        let ok = lhs <= rhs + 1e-8 * rhs.max(1.0);
        Self {
            id,
            method,
            iter,
            lhs,
            rhs,
            status: if ok {
                BoundStatus::Satisfied
            } else {
                BoundStatus::Violated
            },
            slack: rhs - lhs,
        }
    }

    fn not_applicable(id: BoundId) -> Self {
        Self {
            id,
            method: None,
            iter: None,
            lhs: f64::NAN,
            rhs: f64::NAN,
            status: BoundStatus::NotApplicable,
            slack: f64::NAN,
        }
    }

    /// `lhs / rhs`, how close the bound is to equality.
    pub fn tightness(&self) -> f64 {
        self.lhs / self.rhs
    }
}

#[derive(Debug, Clone, Default)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    pub consistent: bool,
}

impl BoundReport {
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == BoundStatus::Violated)
    }

    pub fn all_satisfied(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn of(&self, id: BoundId) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(move |c| c.id == id)
    }

    pub fn applicable(&self, id: BoundId) -> bool {
        self.of(id).any(|c| c.status != BoundStatus::NotApplicable)
    }

    fn push_or_na(&mut self, id: BoundId, checks: Vec<BoundCheck>) {
        if checks.is_empty() {
            self.checks.push(BoundCheck::not_applicable(id));
        } else {
            self.checks.extend(checks);
        }
    }
}

/// Evaluates every bound whose hypotheses hold for the problem described by
/// `profile` and `triple`. `rr` enables the cross-method bounds and must come
/// from the same `(A, b, x0)` as `gmres`.
pub fn check_bounds(
    gmres: &KrylovTrace,
    rr: Option<&KrylovTrace>,
    profile: &SubspaceProfile,
    triple: &SolutionTriple,
) -> Result<BoundReport> {
    if gmres.method != Method::Gmres {
        return Err(Error::InvalidParameter("first trace must come from GMRES".into()));
    }
    if gmres.fingerprint() != triple.fingerprint() || gmres.fingerprint_a() != profile.fingerprint() {
        return Err(Error::FingerprintMismatch);
    }
    if let Some(rr) = rr {
        if rr.method != Method::RrGmres {
            return Err(Error::InvalidParameter("second trace must come from RR-GMRES".into()));
        }
        if rr.fingerprint() != gmres.fingerprint() || rr.x0 != gmres.x0 {
            return Err(Error::FingerprintMismatch);
        }
    }

    let a_norm = profile.norm_a();
    let sigma_r = profile.sigma_r();
    let consistent = norm2(&triple.r_star) <= CONSISTENT_TOL * gmres.b_norm;
    let mut report = BoundReport {
        checks: Vec::new(),
        consistent,
    };
    let recorded = |t: &KrylovTrace| {
        t.steps
            .iter()
            .filter(|s| !s.sigma_last_h.is_nan())
            .cloned()
            .collect::<Vec<_>>()
    };
    let g_steps = recorded(gmres);
    let gm = Some(Method::Gmres);
    // Bounds that assume a Krylov space inside R(A) need dim = k <= rank(A).
    let rank = profile.rank();
    let in_range = |s: &&StepRecord| s.iter <= rank;

    let mut a_checks = Vec::new();
    if profile.is_ep() {
        for s in &g_steps {
            let prev = if s.iter == 1 {
                &gmres.r0
            } else {
                &gmres.steps[s.iter - 2].r
            };
            let prev_norm = norm2(prev);
            if prev_norm > 0.0 {
                let rhs = a_norm * norm2(&sub_vec(prev, &triple.r_star)) / prev_norm;
                a_checks.push(BoundCheck::evaluate(BoundId::A, gm, Some(s.iter), s.sigma_last_h, rhs));
            }
        }
    }
    report.push_or_na(BoundId::A, a_checks);

    let r0_norm = norm2(&gmres.r0);
    let b_checks = if r0_norm > 0.0 {
        let rhs = a_norm * row_space_component_norm(profile, &gmres.r0) / r0_norm;
        g_steps
            .iter()
            .map(|s| BoundCheck::evaluate(BoundId::B, gm, Some(s.iter), s.sigma_last_h, rhs))
            .collect()
    } else {
        Vec::new()
    };
    report.push_or_na(BoundId::B, b_checks);

    let kappa_a = profile.kappa_a();
    let c_checks = match kappa_a {
        Some(ka) if profile.is_ep() && consistent => g_steps
            .iter()
            .filter(in_range)
            .map(|s| BoundCheck::evaluate(BoundId::C, gm, Some(s.iter), s.kappa_h, ka))
            .collect(),
        _ => Vec::new(),
    };
    report.push_or_na(BoundId::C, c_checks);

    let rr_steps = rr.map(recorded).unwrap_or_default();
    let c_range = if profile.is_ep() && profile.rank() > 0 {
        rr_steps
            .iter()
            .filter(in_range)
            .map(|s| {
                BoundCheck::evaluate(
                    BoundId::CRange,
                    Some(Method::RrGmres),
                    Some(s.iter),
                    sigma_r,
                    s.sigma_last_h,
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    report.push_or_na(BoundId::CRange, c_range);

    let (mut d1, mut d2, mut d3) = (Vec::new(), Vec::new(), Vec::new());
    if let Some(ka) = kappa_a {
        if profile.is_gp() && consistent {
            let k_norm = profile.max_cosine();
            let k_min = profile.min_cosine();
            for s in g_steps.iter().filter(in_range) {
                let it = Some(s.iter);
                d1.push(BoundCheck::evaluate(BoundId::D1, gm, it, s.sigma_max_h, a_norm * k_norm));
                d2.push(BoundCheck::evaluate(BoundId::D2, gm, it, sigma_r * k_min, s.sigma_last_h));
                d3.push(BoundCheck::evaluate(BoundId::D3, gm, it, s.kappa_h, ka * profile.kappa_k()));
            }
        }
    }
    report.push_or_na(BoundId::D1, d1);
    report.push_or_na(BoundId::D2, d2);
    report.push_or_na(BoundId::D3, d3);

    let (mut e1, mut e2, mut e3) = (Vec::new(), Vec::new(), Vec::new());
    let n = profile.n();
    for g in g_steps.iter().filter(|g| g.iter >= 2 && g.iter < n) {
        if let Some(r) = rr_steps.iter().filter(in_range).find(|r| r.iter == g.iter - 1) {
            let it = Some(g.iter);
            let rm = Some(Method::RrGmres);
            e1.push(BoundCheck::evaluate(BoundId::E1, rm, it, r.sigma_max_h, g.sigma_max_h));
            e2.push(BoundCheck::evaluate(BoundId::E2, gm, it, g.sigma_last_h, r.sigma_last_h));
            e3.push(BoundCheck::evaluate(BoundId::E3, rm, it, r.kappa_h, g.kappa_h));
        }
    }
    report.push_or_na(BoundId::E1, e1);
    report.push_or_na(BoundId::E2, e2);
    report.push_or_na(BoundId::E3, e3);

    match (&triple.x_sharp, profile.is_gp() && consistent) {
        (Some(xs), true) => {
            let xs_norm = norm2(xs);
            let x_norm = norm2(&triple.x_star);
            report.checks.push(BoundCheck::evaluate(
                BoundId::F1,
                None,
                None,
                profile.min_cosine() * xs_norm,
                x_norm,
            ));
            report
                .checks
                .push(BoundCheck::evaluate(BoundId::F2, None, None, x_norm, xs_norm));
        }
        _ => {
            report.checks.push(BoundCheck::not_applicable(BoundId::F1));
            report.checks.push(BoundCheck::not_applicable(BoundId::F2));
        }
    }

    let mut h_norm: Vec<BoundCheck> = g_steps
        .iter()
        .map(|s| BoundCheck::evaluate(BoundId::HNorm, gm, Some(s.iter), s.sigma_max_h, a_norm))
        .collect();
    h_norm.extend(rr_steps.iter().map(|s| {
        BoundCheck::evaluate(
            BoundId::HNorm,
            Some(Method::RrGmres),
            Some(s.iter),
            s.sigma_max_h,
            a_norm,
        )
    }));
    report.push_or_na(BoundId::HNorm, h_norm);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{gmres, rr_gmres, SolverConfig};
    use crate::subspaces::{classify, solution_triple_from, ClassifyTolerance};
    use crate::DenseMatrix;

    #[test]
    fn gp_two_by_two_bounds() {
        let eps = 1e-3;
        let a = DenseMatrix::from_rows(&[vec![eps, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = [1.0, 0.0];
        let p = classify(&a, ClassifyTolerance::default()).unwrap();
        let t = solution_triple_from(&a, &b, &p).unwrap();
        let g = gmres(&a, &b, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        let r = rr_gmres(&a, &b, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        let rep = check_bounds(&g, Some(&r), &p, &t).unwrap();
        assert!(rep.consistent);
        assert!(rep.all_satisfied(), "{:?}", rep.violations().collect::<Vec<_>>());
        assert!(rep.applicable(BoundId::D2) && rep.applicable(BoundId::F1));
        assert!(!rep.applicable(BoundId::A) && !rep.applicable(BoundId::C));
    }

    #[test]
    fn mismatched_problem_is_rejected() {
        let a = DenseMatrix::from_diag(&[1.0, 0.0]);
        let p = classify(&a, ClassifyTolerance::default()).unwrap();
        let t = solution_triple_from(&a, &[1.0, 1.0], &p).unwrap();
        let g = gmres(&a, &[1.0, 2.0], &[0.0, 0.0], &SolverConfig::default()).unwrap();
        assert!(matches!(
            check_bounds(&g, None, &p, &t),
            Err(Error::FingerprintMismatch)
        ));
    }

    #[test]
    fn satisfied_rule_uses_absolute_floor() {
        let c = BoundCheck::evaluate(BoundId::B, None, None, 0.5 + 5e-9, 0.5);
        assert_eq!(c.status, BoundStatus::Satisfied);
        let c = BoundCheck::evaluate(BoundId::B, None, None, 0.5 + 2e-8, 0.5);
        assert_eq!(c.status, BoundStatus::Violated);
        let c = BoundCheck::evaluate(BoundId::B, None, None, 1e4 * (1.0 + 5e-9), 1e4);
        assert_eq!(c.status, BoundStatus::Satisfied);
    }
}
