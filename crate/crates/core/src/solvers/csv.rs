use std::fmt::Write as _;

use super::{KrylovTrace, Termination};
use crate::arnoldi::CaseKind;

pub const CSV_HEADER: &str = "iter,resnorm_rel,normal_resnorm_rel,res_err_rel,sigma_max_H,sigma_min_H,kappa_H,rank_deficient,breakdown";

/// One row per iteration. The `breakdown` column is empty except on the
/// final row of a trace that ended in breakdown, where it reads `I` or `II`.
pub fn trace_csv(trace: &KrylovTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.steps.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let last = trace.steps.len();
    for s in &trace.steps {
        let breakdown = match trace.termination {
            Termination::Breakdown(c) if s.iter == last => match c.kind {
                CaseKind::CaseI => "I",
                CaseKind::CaseII => "II",
            },
            _ => "",
        };
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            s.iter,
            s.resnorm_rel,
            s.normal_resnorm_rel,
            s.res_err_rel,
            s.sigma_max_h,
            s.sigma_last_h,
            s.kappa_h,
            u8::from(s.rank_deficient),
            breakdown
        );
    }
    out
}
