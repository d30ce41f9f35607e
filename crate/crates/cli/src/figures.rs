//! Figure reproduction: runs every curve of a figure, writes one CSV trace
//! per curve and one SVG chart per panel.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{Context, Result};
use clap::ValueEnum;
use sk_core::problems::{ep_diag_128, strakos_gp_128, ProblemInstance};
use sk_core::solvers::{solve, trace_csv, KrylovTrace, Method, SolverConfig, StepRecord};

use crate::chart::{Chart, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Relres,
    Reserr,
    Sv,
    RrRelres,
    RrReserr,
    RrSv,
    DiGmres,
    DiRrgmres,
}

const WEAK: [(f64, f64); 4] = [(1.0, 0.0), (1.0, 1e-12), (1.0, 1e-8), (1.0, 1e-4)];
const STRONG: [(f64, f64); 4] = [(1.0, 1.0), (1e-4, 1.0), (1e-8, 1.0), (1e-12, 1.0)];
const RHOS: [f64; 4] = [1.0, 4.0, 8.0, 12.0];

#[derive(Clone, Copy)]
enum Quantity {
    NormalResidual,
    ResidualError,
    Residual,
    Singular,
}

impl Quantity {
    fn y_label(self) -> &'static str {
        match self {
            Quantity::NormalResidual => "||A^T r_k|| / ||A^T b||",
            Quantity::ResidualError => "||r_k - r_*|| / ||r_k||",
            Quantity::Residual => "||r_k|| / ||b||",
            Quantity::Singular => "singular values",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Quantity::NormalResidual => "relres",
            Quantity::ResidualError => "reserr",
            Quantity::Residual => "res",
            Quantity::Singular => "sv",
        }
    }
}

struct Curve {
    tag: String,
    label: String,
    problem: ProblemInstance,
}

struct Group {
    name: &'static str,
    title: String,
    curves: Vec<Curve>,
}

fn num(v: f64) -> String {
    if v == 0.0 || v == 1.0 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn ep_group(name: &'static str, title: &str, settings: &[(f64, f64)]) -> Result<Group> {
    let curves = settings
        .iter()
        .map(|&(g, d)| {
            Ok(Curve {
                tag: format!("g{}_d{}", num(g), num(d)),
                label: format!("\u{3b3}={} \u{3b4}={}", num(g), num(d)),
                problem: ep_diag_128(g, d)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Group {
        name,
        title: title.to_string(),
        curves,
    })
}

fn di_group() -> Result<Group> {
    let curves = RHOS
        .iter()
        .map(|&rho| {
            Ok(Curve {
                tag: format!("rho{rho}"),
                label: format!("\u{3c1}={rho}"),
                problem: strakos_gp_128(rho)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Group {
        name: "di",
        title: "Strakos GP, different kappa(V1^T U1)".to_string(),
        curves,
    })
}

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::Relres => "relres",
            Figure::Reserr => "reserr",
            Figure::Sv => "sv",
            Figure::RrRelres => "rr-relres",
            Figure::RrReserr => "rr-reserr",
            Figure::RrSv => "rr-sv",
            Figure::DiGmres => "di-gmres",
            Figure::DiRrgmres => "di-rrgmres",
        }
    }

    fn method(self) -> Method {
        match self {
            Figure::Relres | Figure::Reserr | Figure::Sv | Figure::DiGmres => Method::Gmres,
            _ => Method::RrGmres,
        }
    }

    fn quantities(self) -> Vec<Quantity> {
        match self {
            Figure::Relres | Figure::RrRelres => vec![Quantity::NormalResidual],
            Figure::Reserr | Figure::RrReserr => vec![Quantity::ResidualError],
            Figure::Sv | Figure::RrSv => vec![Quantity::Singular],
            Figure::DiGmres | Figure::DiRrgmres => vec![Quantity::Residual, Quantity::Singular],
        }
    }

    fn groups(self) -> Result<Vec<Group>> {
        Ok(match self {
            Figure::DiGmres | Figure::DiRrgmres => vec![di_group()?],
            _ => vec![
                ep_group("weak", "weakly inconsistent", &WEAK)?,
                ep_group("strong", "strongly inconsistent", &STRONG)?,
            ],
        })
    }
}

fn run_all(curves: &[Curve], config: &SolverConfig) -> Result<Vec<KrylovTrace>> {
    thread::scope(|scope| {
        let handles: Vec<_> = curves
            .iter()
            .map(|c| {
                scope.spawn(move || {
                    let p = &c.problem;
                    solve(&p.a, &p.b, &p.x0, config)
                        .with_context(|| format!("{} {}", config.method.name(), c.label))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

fn points(trace: &KrylovTrace, f: impl Fn(&StepRecord) -> f64) -> Vec<(f64, f64)> {
    trace.steps.iter().map(|s| (s.iter as f64, f(s))).collect()
}

fn flat(label: &str, len: usize, value: f64) -> Series {
    Series {
        label: label.to_string(),
        points: vec![(1.0, value), (len.max(1) as f64, value)],
        dashed: true,
    }
}

fn chart(fig: Figure, group: &Group, traces: &[KrylovTrace], q: Quantity) -> Chart {
    let mut series = Vec::new();
    for (c, t) in group.curves.iter().zip(traces) {
        match q {
            Quantity::NormalResidual => series.push(Series {
                label: c.label.clone(),
                points: points(t, |s| s.normal_resnorm_rel),
                dashed: false,
            }),
            Quantity::ResidualError => series.push(Series {
                label: c.label.clone(),
                points: points(t, |s| s.res_err_rel),
                dashed: false,
            }),
            Quantity::Residual => series.push(Series {
                label: c.label.clone(),
                points: points(t, |s| s.resnorm_rel),
                dashed: false,
            }),
            Quantity::Singular => {
                series.push(Series {
                    label: format!("\u{3c3}max(H) {}", c.label),
                    points: points(t, |s| s.sigma_max_h),
                    dashed: false,
                });
                series.push(Series {
                    label: format!("\u{3c3}min(H) {}", c.label),
                    points: points(t, |s| s.sigma_last_h),
                    dashed: false,
                });
            }
        }
    }
    if let (Quantity::Singular, Some(first)) = (q, group.curves.first()) {
        let len = traces.iter().map(|t| t.iterations()).max().unwrap_or(1);
        if let Ok(profile) = first.problem.profile() {
            series.push(flat("\u{3c3}1(A)", len, profile.norm_a()));
            series.push(flat("\u{3c3}r(A)", len, profile.sigma_r()));
        }
        // sigma_min(H) below roughly u ||A|| means u ||H|| ||H^+|| >= 1.
        series.push(flat("u ||A||", len, traces[0].unit_roundoff * traces[0].a_norm));
    }
    Chart {
        title: format!("{} ({}): {}", fig.method().name(), group.title, q.y_label()),
        x_label: "iteration k".to_string(),
        y_label: q.y_label().to_string(),
        series,
    }
}

/// Runs `fig` and writes its files into `outdir`; returns the paths written.
pub fn reproduce(fig: Figure, outdir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir).with_context(|| format!("creating {}", outdir.display()))?;
    let config = SolverConfig {
        max_iter: 128,
        method: fig.method(),
        ..SolverConfig::default()
    };
    let mut written = Vec::new();
    for group in fig.groups()? {
        let traces = run_all(&group.curves, &config)?;
        for (c, t) in group.curves.iter().zip(&traces) {
            let path = outdir.join(format!("{}_{}_{}.csv", fig.id(), group.name, c.tag));
            fs::write(&path, trace_csv(t)).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        for q in fig.quantities() {
            let path = outdir.join(format!("{}_{}_{}.svg", fig.id(), group.name, q.tag()));
            let svg = chart(fig, &group, &traces, q).to_svg();
            fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}
