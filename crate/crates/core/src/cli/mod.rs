//! The `afmi` command-line front end.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bifurcation::{
    locate_homoclinic, locate_hopf, locate_saddle_node, locate_transcritical, sweep,
    BifurcationEvent, SweepDataset,
};
use crate::equilibria::{
    all_equilibria, find_kind, interior_equilibria, regime_classify, Equilibrium, EquilibriumKind,
    Regime, RegimeCurve,
};
use crate::integrate::{classify_omega_limit, integrate, AttractorId, Sample, Termination};
use crate::manifolds::{
    basin_fraction, manifold_topology, trace_manifold, write_manifolds_csv, BasinEstimate, Branch,
    Manifold, TopologyReport,
};
use crate::model::{predator_nullcline_y, prey_nullcline_y, ModelParams, State};
use crate::stability::{stability_report, StabilityReport};
use config::{Format, Overrides, Resolved, XiSpec};
use svg::{Figure, Glyph, Polyline};

/// Exit status for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "afmi",
    version,
    about = "Predator-prey model with additional food and mutual interference"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Additional food quantity.
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    #[arg(long, global = true)]
    pub xi_from: Option<f64>,
    #[arg(long, global = true)]
    pub xi_to: Option<f64>,
    #[arg(long, global = true)]
    pub xi_steps: Option<usize>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_time: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Transcritical,
    SaddleNode,
    Hopf,
    Homoclinic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All equilibria with eigenvalues and stability.
    Equilibria,
    /// Stability report for every equilibrium.
    Stability,
    /// Sampled prey and predator nullclines.
    Nullclines {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Integrate one trajectory.
    Simulate {
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
    },
    /// Stable and unstable manifolds of the interior saddle.
    Manifold {
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Attractor of every node of a grid of initial conditions.
    Basin {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        y_min: Option<f64>,
        #[arg(long)]
        y_max: Option<f64>,
    },
    /// Equilibria and bifurcation events over a range of xi.
    Sweep,
    /// Locate one bifurcation in xi.
    Bifurcate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Interior-equilibrium count over the (epsilon, xi) plane.
    RegimeMap {
        #[arg(long)]
        eps_from: Option<f64>,
        #[arg(long)]
        eps_to: Option<f64>,
        #[arg(long)]
        eps_steps: Option<usize>,
    },
    /// Reproduce one of the six preset scenarios.
    Case {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        id: u8,
    },
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Parameters of the preset scenarios.
pub fn reference_params(xi: f64) -> ModelParams {
    ModelParams::new(0.1, 0.319, 0.3, 0.322, xi, 15.0).expect("reference parameters are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasePreset {
    pub id: u8,
    pub xi: f64,
    pub title: &'static str,
}

pub const CASES: [CasePreset; 6] = [
    CasePreset {
        id: 1,
        xi: 1.0,
        title: "single stable coexistence state",
    },
    CasePreset {
        id: 2,
        xi: 1.92,
        title: "bi-stability separated by the stable manifold of E1",
    },
    CasePreset {
        id: 3,
        xi: 2.2,
        title: "stable focus E2 in the bistable regime",
    },
    CasePreset {
        id: 4,
        xi: 2.469,
        title: "stable manifold of E1 winding around the interior points",
    },
    CasePreset {
        id: 5,
        xi: 2.4741313,
        title: "saddle connection of E1",
    },
    CasePreset {
        id: 6,
        xi: 2.478,
        title: "unstable focus E2 ahead of the saddle-node",
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaReport {
    pub params: ModelParams,
    pub equilibria: Vec<Equilibrium>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub kind: EquilibriumKind,
    pub location: State,
    pub report: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityListing {
    pub params: ModelParams,
    pub entries: Vec<StabilityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nullclines {
    pub params: ModelParams,
    pub prey: Vec<State>,
    pub predator: Vec<State>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub params: ModelParams,
    pub initial: State,
    pub termination: Termination,
    pub attractor: AttractorId,
    pub clip_events: usize,
    pub steps: usize,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldReport {
    pub params: ModelParams,
    pub saddle: Equilibrium,
    pub manifolds: Vec<Manifold>,
    pub topology: Option<TopologyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub params: ModelParams,
    pub estimate: BasinEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: ModelParams,
    pub dataset: SweepDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCurveLine {
    pub curve: RegimeCurve,
    /// `(epsilon, xi)` pairs.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub epsilon: f64,
    pub xi: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    pub params: ModelParams,
    pub curves: Vec<RegimeCurveLine>,
    pub cells: Vec<RegimeCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub initial: State,
    pub attractor: AttractorId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: u8,
    pub title: String,
    pub params: ModelParams,
    pub equilibria: Vec<Equilibrium>,
    pub stability: Vec<StabilityEntry>,
    pub probes: Vec<Probe>,
    pub topology: Vec<(f64, TopologyReport)>,
    pub events: Vec<BifurcationEvent>,
}

fn overrides(g: &GlobalArgs) -> Overrides {
    Overrides {
        alpha: g.alpha,
        beta: g.beta,
        delta: g.delta,
        epsilon: g.epsilon,
        k: g.k,
        xi: g.xi,
        xi_from: g.xi_from,
        xi_to: g.xi_to,
        xi_steps: g.xi_steps,
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
        max_time: g.max_time,
        output: g.output.clone(),
        format: g.format,
    }
}

fn load(g: &GlobalArgs) -> Result<Resolved, Failure> {
    let cfg = match &g.config {
        Some(path) => config::RunConfig::load(path)?,
        None => config::RunConfig::default(),
    };
    Ok(config::resolve(&cfg, &overrides(g))?)
}

fn scalar_params(r: &Resolved) -> Result<ModelParams, Failure> {
    match r.xi {
        Some(XiSpec::Scalar(_)) => Ok(r.params),
        Some(XiSpec::Range(_)) => Err(config_err("this command needs a single `xi`, not a range")),
        None => Err(config_err(
            "missing `xi`: set it in the config file or with --xi",
        )),
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Failure::Numerical(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Failure::Numerical(e.to_string()))?;
    Ok(buf)
}

fn svg_bytes(fig: &Figure) -> Result<Vec<u8>, Failure> {
    fig.render()
        .map(String::into_bytes)
        .map_err(|e| Failure::Numerical(format!("layout error: {e}")))
}

fn pick_format(r: &Resolved, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = r.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<&str> = allowed
            .iter()
            .map(|f| match f {
                Format::Csv => "csv",
                Format::Json => "json",
                Format::Svg => "svg",
            })
            .collect();
        Err(config_err(format!(
            "format {f:?} is not available for this command (use {})",
            names.join(", ")
        )))
    }
}

fn write_out(r: &Resolved, bytes: &[u8]) -> Result<(), Failure> {
    match &r.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| config_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| config_err(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn sample_nullclines(p: &ModelParams, points: usize) -> Nullclines {
    let n = points.max(2);
    let xs = (0..n).map(|i| p.k() * i as f64 / (n - 1) as f64);
    let prey = xs
        .clone()
        .filter_map(|x| prey_nullcline_y(p, x).ok().map(|y| State::new(x, y)))
        .filter(|s| s.y >= 0.0 && s.y.is_finite())
        .collect();
    let predator = xs
        .map(|x| State::new(x, predator_nullcline_y(p, x)))
        .filter(|s| s.y >= 0.0)
        .collect();
    Nullclines {
        params: *p,
        prey,
        predator,
    }
}

/// Phase portrait: nullclines, optional manifolds and trajectories, and
/// one glyph per equilibrium.
pub fn portrait(p: &ModelParams, manifolds: &[Manifold], trajectories: &[Vec<State>]) -> Figure {
    let nc = sample_nullclines(p, 200);
    let eqs = all_equilibria(p);
    let y_top = eqs
        .iter()
        .map(|e| e.location.y)
        .chain(nc.prey.iter().map(|s| s.y))
        .chain(trajectories.iter().flatten().map(|s| s.y))
        .fold(1.0f64, f64::max)
        * 1.1;
    let to_pts = |v: &[State]| v.iter().map(|s| (s.x, s.y)).collect::<Vec<_>>();
    let mut layers = vec![(
        "nullclines".to_string(),
        vec![
            Polyline {
                class: "nullcline prey".into(),
                color: "#8c510a".into(),
                points: to_pts(&nc.prey),
            },
            Polyline {
                class: "nullcline predator".into(),
                color: "#01665e".into(),
                points: to_pts(&nc.predator),
            },
        ],
    )];
    if !manifolds.is_empty() {
        layers.push((
            "manifolds".into(),
            manifolds
                .iter()
                .map(|m| Polyline {
                    class: format!("manifold {}", m.branch.label()),
                    color: if m.branch.is_stable() {
                        "#a6611a"
                    } else {
                        "#4dac26"
                    }
                    .into(),
                    points: to_pts(&m.points),
                })
                .collect(),
        ));
    }
    if !trajectories.is_empty() {
        layers.push((
            "trajectories".into(),
            trajectories
                .iter()
                .map(|t| Polyline {
                    class: "trajectory".into(),
                    color: "#404040".into(),
                    points: to_pts(t),
                })
                .collect(),
        ));
    }
    let glyphs = eqs
        .iter()
        .map(|e| Glyph {
            role: if e.kind.is_interior() {
                "interior"
            } else {
                "boundary"
            }
            .into(),
            class: e.stability,
            at: (e.location.x, e.location.y),
        })
        .collect();
    Figure {
        title: format!("phase portrait, xi = {}", p.xi()),
        x_label: "prey x".into(),
        y_label: "predator y".into(),
        x_range: Some((0.0, p.k() * 1.02)),
        y_range: Some((0.0, y_top)),
        layers,
        glyphs,
    }
}

pub fn sweep_figure(d: &SweepDataset) -> Figure {
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut glyphs = Vec::new();
    for r in &d.rows {
        for e in &r.interiors {
            match e.kind {
                EquilibriumKind::InteriorHigh => high.push((r.xi, e.location.x)),
                _ => low.push((r.xi, e.location.x)),
            }
        }
    }
    for ev in &d.events {
        let class = match ev.kind {
            crate::bifurcation::BifurcationKind::Hopf => {
                crate::stability::StabilityClass::UnstableFocus
            }
            _ => crate::stability::StabilityClass::NonHyperbolic,
        };
        glyphs.push(Glyph {
            role: format!("event {}", ev.kind.label()),
            class,
            at: (ev.xi_star, ev.location.x),
        });
    }
    Figure {
        title: "interior equilibria versus xi".into(),
        x_label: "xi".into(),
        y_label: "prey x".into(),
        x_range: d.rows.first().zip(d.rows.last()).map(|(a, b)| (a.xi, b.xi)),
        y_range: None,
        layers: vec![(
            "branches".into(),
            vec![
                Polyline {
                    class: "branch low".into(),
                    color: "#2166ac".into(),
                    points: low,
                },
                Polyline {
                    class: "branch high".into(),
                    color: "#1b7837".into(),
                    points: high,
                },
            ],
        )],
        glyphs,
    }
}

pub fn regime_map(
    base: &ModelParams,
    eps: (f64, f64, usize),
    xi: (f64, f64, usize),
) -> Result<RegimeMap, crate::Error> {
    let grid = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let es = grid(eps.0, eps.1, eps.2);
    let xs = grid(xi.0, xi.1, xi.2);
    let curves = RegimeCurve::ALL
        .iter()
        .map(|c| RegimeCurveLine {
            curve: *c,
            points: es
                .iter()
                .filter_map(|&e| c.xi_at(base, e).filter(|x| x.is_finite()).map(|x| (e, x)))
                .collect(),
        })
        .collect();
    let mut cells = Vec::with_capacity(es.len() * xs.len());
    for &x in &xs {
        for &e in &es {
            cells.push(RegimeCell {
                epsilon: e,
                xi: x,
                regime: regime_classify(base, e, x)?,
            });
        }
    }
    Ok(RegimeMap {
        params: *base,
        curves,
        cells,
    })
}

pub fn regime_figure(m: &RegimeMap, xi_range: (f64, f64)) -> Figure {
    let colors = ["#d7191c", "#1a9641", "#2b83ba"];
    let lines = m
        .curves
        .iter()
        .zip(colors)
        .map(|(c, color)| Polyline {
            class: format!("regime-curve {}", c.curve.label()),
            color: color.into(),
            points: c.points.clone(),
        })
        .collect();
    let e = m
        .cells
        .iter()
        .map(|c| c.epsilon)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| {
            (a.0.min(v), a.1.max(v))
        });
    Figure {
        title: "regimes in the (epsilon, xi) plane".into(),
        x_label: "epsilon".into(),
        y_label: "xi".into(),
        x_range: Some(e),
        y_range: Some(xi_range),
        layers: vec![("regime-curves".into(), lines)],
        glyphs: Vec::new(),
    }
}

fn stability_entries(p: &ModelParams) -> Result<Vec<StabilityEntry>, crate::Error> {
    all_equilibria(p)
        .iter()
        .map(|e| {
            Ok(StabilityEntry {
                kind: e.kind,
                location: e.location,
                report: stability_report(p, e)?,
            })
        })
        .collect()
}

pub fn case_report(id: u8) -> Result<CaseReport, crate::Error> {
    let preset = CASES
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| crate::Error::Precondition(format!("no case {id}")))?;
    let p = reference_params(preset.xi);
    let set = crate::integrate::IntegratorSettings::default();
    let probe_points: &[State] = match id {
        2 | 3 => &[State::new(0.01, 8.0), State::new(10.0, 4.0)],
        4 => &[State::new(1.0, 0.5)],
        _ => &[],
    };
    let probes = probe_points
        .iter()
        .map(|s| {
            Ok(Probe {
                initial: *s,
                attractor: classify_omega_limit(&p, *s, &set)?,
            })
        })
        .collect::<Result<Vec<_>, crate::Error>>()?;
    let mut topology = Vec::new();
    if id == 5 {
        let ms = crate::manifolds::ManifoldSettings::default();
        for xi in [2.4741312, 2.4741313, 2.4741314, 2.475] {
            topology.push((xi, manifold_topology(&reference_params(xi), &ms)?));
        }
    }
    let mut events = Vec::new();
    if id == 6 {
        events.push(locate_saddle_node(&p, (2.3, 2.6))?);
    }
    Ok(CaseReport {
        id,
        title: preset.title.to_string(),
        params: p,
        equilibria: all_equilibria(&p),
        stability: stability_entries(&p)?,
        probes,
        topology,
        events,
    })
}

fn equilibria_csv(eqs: &[Equilibrium]) -> Result<Vec<u8>, Failure> {
    csv(|w| {
        writeln!(w, "kind,x,y,stability,re1,im1,re2,im2")?;
        for e in eqs {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                e.kind.label(),
                e.location.x,
                e.location.y,
                e.stability.label(),
                e.eigenvalues[0].re,
                e.eigenvalues[0].im,
                e.eigenvalues[1].re,
                e.eigenvalues[1].im
            )?;
        }
        Ok(())
    })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("AFMI_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            config_err(format!(
                "AFMI_THREADS must be a non-negative integer, got {v:?}"
            ))
        })?;
        // a pool built earlier in this process stays in place
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let mut r = load(&cli.global)?;
    let bytes = match &cli.command {
        Command::Equilibria => {
            let p = scalar_params(&r)?;
            let eqs = all_equilibria(&p);
            match pick_format(&r, Format::Json, &[Format::Json, Format::Csv, Format::Svg])? {
                Format::Json => json(&EquilibriaReport {
                    params: p,
                    equilibria: eqs,
                })?,
                Format::Csv => equilibria_csv(&eqs)?,
                Format::Svg => svg_bytes(&portrait(&p, &[], &[]))?,
            }
        }
        Command::Stability => {
            let p = scalar_params(&r)?;
            let entries = stability_entries(&p)?;
            match pick_format(&r, Format::Json, &[Format::Json, Format::Csv])? {
                Format::Json => json(&StabilityListing { params: p, entries })?,
                _ => csv(|w| {
                    writeln!(w, "kind,x,y,trace,det,class")?;
                    for e in &entries {
                        writeln!(
                            w,
                            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                            e.kind.label(),
                            e.location.x,
                            e.location.y,
                            e.report.trace,
                            e.report.determinant,
                            e.report.class.label()
                        )?;
                    }
                    Ok(())
                })?,
            }
        }
        Command::Nullclines { points } => {
            let p = scalar_params(&r)?;
            let nc = sample_nullclines(&p, *points);
            match pick_format(&r, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
                Format::Json => json(&nc)?,
                Format::Svg => svg_bytes(&portrait(&p, &[], &[]))?,
                Format::Csv => csv(|w| {
                    writeln!(w, "curve,x,y")?;
                    for s in &nc.prey {
                        writeln!(w, "prey,{:.16e},{:.16e}", s.x, s.y)?;
                    }
                    for s in &nc.predator {
                        writeln!(w, "predator,{:.16e},{:.16e}", s.x, s.y)?;
                    }
                    Ok(())
                })?,
            }
        }
        Command::Simulate { x0, y0 } => {
            let p = scalar_params(&r)?;
            let s0 = match (x0.or(r.initial.map(|s| s.x)), y0.or(r.initial.map(|s| s.y))) {
                (Some(x), Some(y)) => State::new(x, y),
                _ => {
                    return Err(config_err(
                        "missing initial state: set [initial] x, y or --x0/--y0",
                    ))
                }
            };
            if !s0.in_phi() {
                return Err(config_err(format!(
                    "initial state ({}, {}) must be finite and non-negative",
                    s0.x, s0.y
                )));
            }
            let tr = integrate(&p, s0, &r.integrator)?;
            let attractor = classify_omega_limit(&p, s0, &r.integrator)?;
            match pick_format(&r, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
                Format::Csv => csv(|w| tr.write_csv(w))?,
                Format::Json => json(&SimulationReport {
                    params: p,
                    initial: s0,
                    termination: tr.termination,
                    attractor,
                    clip_events: tr.clip_events,
                    steps: tr.steps,
                    samples: tr.samples.clone(),
                })?,
                Format::Svg => {
                    let path: Vec<State> = tr.samples.iter().map(|s| s.state).collect();
                    svg_bytes(&portrait(&p, &[], &[path]))?
                }
            }
        }
        Command::Manifold { budget } => {
            let p = scalar_params(&r)?;
            if let Some(b) = budget {
                r.manifold.arclength_budget = *b;
            }
            let saddle = find_kind(&interior_equilibria(&p), EquilibriumKind::InteriorLow)
                .filter(|e| e.stability == crate::stability::StabilityClass::Saddle)
                .ok_or_else(|| Failure::Numerical("no interior saddle at this xi".into()))?;
            let manifolds = Branch::ALL
                .iter()
                .map(|b| trace_manifold(&p, &saddle, *b, &r.manifold))
                .collect::<Result<Vec<_>, _>>()?;
            match pick_format(&r, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
                Format::Csv => csv(|w| write_manifolds_csv(w, &manifolds))?,
                Format::Json => json(&ManifoldReport {
                    params: p,
                    saddle,
                    topology: manifold_topology(&p, &r.manifold).ok(),
                    manifolds,
                })?,
                Format::Svg => svg_bytes(&portrait(&p, &manifolds, &[]))?,
            }
        }
        Command::Basin {
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
        } => {
            let p = scalar_params(&r)?;
            let g = &mut r.grid;
            g.nx = nx.unwrap_or(g.nx);
            g.ny = ny.unwrap_or(g.ny);
            g.x_min = x_min.unwrap_or(g.x_min);
            g.x_max = x_max.unwrap_or(g.x_max);
            g.y_min = y_min.unwrap_or(g.y_min);
            g.y_max = y_max.unwrap_or(g.y_max);
            r.grid.validate().map_err(|e| config_err(e.to_string()))?;
            let est = basin_fraction(&p, &r.grid, &r.integrator)?;
            match pick_format(&r, Format::Json, &[Format::Json, Format::Csv])? {
                Format::Json => json(&BasinReport {
                    params: p,
                    estimate: est,
                })?,
                _ => csv(|w| {
                    writeln!(w, "x,y,attractor")?;
                    for (i, a) in est.nodes.iter().enumerate() {
                        let s = est.grid.node(i);
                        writeln!(w, "{:.16e},{:.16e},{}", s.x, s.y, a.label())?;
                    }
                    Ok(())
                })?,
            }
        }
        Command::Sweep => {
            let Some(XiSpec::Range(range)) = r.xi else {
                return Err(config_err(
                    "sweep needs an xi range: [xi_range] or --xi-from/--xi-to/--xi-steps",
                ));
            };
            if range.steps < 2 {
                return Err(config_err("xi range needs at least 2 steps"));
            }
            let d = sweep(&r.params, (range.from, range.to), range.steps)?;
            match pick_format(&r, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
                Format::Csv => csv(|w| d.write_csv(w))?,
                Format::Json => json(&SweepReport {
                    params: r.params,
                    dataset: d,
                })?,
                Format::Svg => svg_bytes(&sweep_figure(&d))?,
            }
        }
        Command::Bifurcate { kind, lo, hi } => {
            let base = r.params;
            let bracket = match (lo.or(r.bracket.map(|b| b.0)), hi.or(r.bracket.map(|b| b.1))) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => return Err(config_err("a bracket needs both lo and hi")),
            };
            let need = || {
                bracket
                    .ok_or_else(|| config_err("missing bracket: set [bracket] lo, hi or --lo/--hi"))
            };
            let ev = match kind {
                KindArg::Transcritical => locate_transcritical(&base)?,
                KindArg::SaddleNode => locate_saddle_node(&base, need()?)?,
                KindArg::Hopf => locate_hopf(&base, need()?)?,
                KindArg::Homoclinic => locate_homoclinic(&base, need()?, &r.manifold)?,
            };
            pick_format(&r, Format::Json, &[Format::Json])?;
            json(&ev)?
        }
        Command::RegimeMap {
            eps_from,
            eps_to,
            eps_steps,
        } => {
            let reg = r.regime;
            let eps = (
                eps_from.unwrap_or(reg.epsilon_from),
                eps_to.unwrap_or(reg.epsilon_to),
                eps_steps.unwrap_or(reg.epsilon_steps),
            );
            let xi = match r.xi {
                Some(XiSpec::Range(x)) => (x.from, x.to, x.steps),
                _ => (0.0, 4.0, 41),
            };
            if !(eps.0 > 0.0 && eps.1 > eps.0 && eps.2 >= 2) {
                return Err(config_err(
                    "epsilon range must be positive and increasing with at least 2 steps",
                ));
            }
            let m = regime_map(&r.params, eps, xi)?;
            match pick_format(&r, Format::Json, &[Format::Json, Format::Csv, Format::Svg])? {
                Format::Json => json(&m)?,
                Format::Svg => svg_bytes(&regime_figure(&m, (xi.0.min(xi.1), xi.0.max(xi.1))))?,
                Format::Csv => csv(|w| {
                    writeln!(w, "epsilon,xi,regime")?;
                    for c in &m.cells {
                        writeln!(w, "{:.16e},{:.16e},{:?}", c.epsilon, c.xi, c.regime)?;
                    }
                    Ok(())
                })?,
            }
        }
        Command::Case { id } => {
            let rep = case_report(*id)?;
            match pick_format(&r, Format::Json, &[Format::Json, Format::Svg])? {
                Format::Json => json(&rep)?,
                _ => svg_bytes(&portrait(&rep.params, &[], &[]))?,
            }
        }
    };
    write_out(&r, &bytes)
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    // case presets carry their own parameters
    let cli = if matches!(cli.command, Command::Case { .. }) && cli.global.alpha.is_none() {
        with_reference_defaults(cli)
    } else {
        cli
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("afmi: {}", f.message());
            f.code()
        }
    }
}

fn with_reference_defaults(mut cli: Cli) -> Cli {
    let p = reference_params(0.0);
    let g = &mut cli.global;
    g.alpha.get_or_insert(p.alpha());
    g.beta.get_or_insert(p.beta());
    g.delta.get_or_insert(p.delta());
    g.epsilon.get_or_insert(p.epsilon());
    g.k.get_or_insert(p.k());
    cli
}
