//! Adaptive Dormand–Prince 5(4) integration with dense output, and
//! ω-limit classification of trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equilibria::{all_equilibria, interior_equilibria, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    pub max_steps: usize,
    pub escape_norm: f64,
    pub convergence_radius: f64,
    pub convergence_dwell: f64,
    /// Largest step the controller may take.
    pub max_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_time: 2000.0,
            max_steps: 500_000,
            escape_norm: 1e6,
            convergence_radius: 1e-5,
            convergence_dwell: 10.0,
            max_step: 1.0,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_time", self.max_time),
            ("escape_norm", self.escape_norm),
            ("convergence_radius", self.convergence_radius),
            ("convergence_dwell", self.convergence_dwell),
            ("max_step", self.max_step),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and positive",
                });
            }
        }
        for (name, value) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if value > 1e-3 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must not exceed 1e-3",
                });
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn with_tolerance_scale(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// Smallest step accepted before the integration is declared stiff.
pub const MIN_STEP: f64 = 1e-14;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Quartic interpolant over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; 2]; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; 2] {
        self.rcont[0]
    }

    pub fn end(&self) -> [f64; 2] {
        self.eval(self.t1())
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

/// Explicit Dormand–Prince 5(4) stepper for an autonomous planar field.
///
/// States are clipped to the closed non-negative quadrant after every
/// accepted step.
pub struct Dopri5<F> {
    f: F,
    t: f64,
    y: [f64; 2],
    k1: [f64; 2],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    clip_events: usize,
    last_clipped: bool,
    steps: usize,
    rejected: usize,
}

fn axpy(y: [f64; 2], terms: &[(f64, [f64; 2])], h: f64) -> [f64; 2] {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

impl<F: Fn([f64; 2]) -> [f64; 2]> Dopri5<F> {
    pub fn new(f: F, y0: [f64; 2], rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        let k1 = f(y0);
        let mut s = Self {
            f,
            t: 0.0,
            y: y0,
            k1,
            h: 0.0,
            rel_tol,
            abs_tol,
            max_step,
            clip_events: 0,
            last_clipped: false,
            steps: 0,
            rejected: 0,
        };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; 2] {
        self.y
    }

    pub fn clip_events(&self) -> usize {
        self.clip_events
    }

    /// Whether the most recent step clipped a coordinate to zero.
    pub fn last_clipped(&self) -> bool {
        self.last_clipped
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        let f0 = self.k1;
        let sc = [self.scale(self.y[0], 0.0), self.scale(self.y[1], 0.0)];
        let d0 = ((self.y[0] / sc[0]).powi(2) + (self.y[1] / sc[1]).powi(2)).sqrt() / 2f64.sqrt();
        let d1 = ((f0[0] / sc[0]).powi(2) + (f0[1] / sc[1]).powi(2)).sqrt() / 2f64.sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(self.max_step);
        let y1 = axpy(self.y, &[(1.0, f0)], h0);
        let f1 = (self.f)(y1);
        let d2 = (((f1[0] - f0[0]) / sc[0]).powi(2) + ((f1[1] - f0[1]) / sc[1]).powi(2)).sqrt()
            / 2f64.sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Takes one accepted step and returns its interpolant.
    pub fn step(&mut self) -> Result<DenseSegment> {
        self.step_capped(f64::INFINITY)
    }

    /// Takes one accepted step no longer than `cap`.
    pub fn step_capped(&mut self, cap: f64) -> Result<DenseSegment> {
        let y = self.y;
        let k1 = self.k1;
        let mut h = self.h.min(self.max_step).min(cap);
        let mut rejected_here = false;
        loop {
            if !(h >= MIN_STEP) {
                return Err(Error::Stiffness { t: self.t, step: h });
            }
            let f = &self.f;
            let k2 = f(axpy(y, &[(A21, k1)], h));
            let k3 = f(axpy(y, &[(A31, k1), (A32, k2)], h));
            let k4 = f(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
            let k5 = f(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
            let k6 = f(axpy(
                y,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
                h,
            ));
            let y1 = axpy(
                y,
                &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
                h,
            );
            let k7 = f(y1);
            let mut err = 0.0;
            for i in 0..2 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err += (e / self.scale(y[i], y1[i])).powi(2);
            }
            let err = (err / 2.0).sqrt();
            if !err.is_finite() {
                self.rejected += 1;
                rejected_here = true;
                h *= 0.2;
                continue;
            }
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            if err > 1.0 {
                self.rejected += 1;
                rejected_here = true;
                h *= fac.min(1.0);
                continue;
            }
            let mut rcont = [[0.0; 2]; 5];
            for i in 0..2 {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let seg = DenseSegment {
                t0: self.t,
                h,
                rcont,
            };
            self.t += h;
            self.steps += 1;
            let mut y_new = y1;
            self.last_clipped = false;
            for v in y_new.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                    self.clip_events += 1;
                    self.last_clipped = true;
                }
            }
            self.y = y_new;
            self.k1 = if self.last_clipped { f(y_new) } else { k7 };
            let grow = if rejected_here { fac.min(1.0) } else { fac };
            self.h = (h * grow).min(self.max_step);
            return Ok(seg);
        }
    }
}

/// Time direction for integration of the model field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Stepper for the model field, optionally time-reversed.
pub fn model_stepper<'a>(
    p: &'a ModelParams,
    s0: State,
    dir: Direction,
    settings: &IntegratorSettings,
) -> Dopri5<impl Fn([f64; 2]) -> [f64; 2] + 'a> {
    let sign = dir.sign();
    Dopri5::new(
        move |y: [f64; 2]| {
            let f = p.rhs(y[0], y[1]);
            [sign * f[0], sign * f[1]]
        },
        s0.as_array(),
        settings.rel_tol,
        settings.abs_tol,
        settings.max_step,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttractorId {
    PreyFreeEq,
    /// Index into the interior equilibria ordered by prey density.
    InteriorEq(usize),
    /// Periodic orbit surrounding the interior equilibrium with this index.
    LimitCycle(usize),
    PredatorFreeEq,
    TrivialEq,
    Unknown,
}

impl AttractorId {
    pub fn label(&self) -> String {
        match self {
            Self::PreyFreeEq => "prey-free".into(),
            Self::InteriorEq(i) => format!("interior-{}", i + 1),
            Self::LimitCycle(i) => format!("cycle-around-{}", i + 1),
            Self::PredatorFreeEq => "predator-free".into(),
            Self::TrivialEq => "trivial".into(),
            Self::Unknown => "unknown".into(),
        }
    }

    fn of_kind(kind: EquilibriumKind, interior_index: usize) -> Self {
        match kind {
            EquilibriumKind::Trivial => Self::TrivialEq,
            EquilibriumKind::PredatorFree => Self::PredatorFreeEq,
            EquilibriumKind::PreyFree => Self::PreyFreeEq,
            _ => Self::InteriorEq(interior_index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ConvergedTo(AttractorId),
    Escaped,
    BudgetExhausted,
    ReachedAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub clip_events: usize,
    pub steps: usize,
    /// Radii of successive crossings of the section anchored at the
    /// non-saddle interior equilibrium, if there is one.
    pub section_returns: Vec<f64>,
    #[serde(skip)]
    dense: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples
            .last()
            .map(|s| s.state)
            .unwrap_or(State::new(f64::NAN, f64::NAN))
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    /// State at time `t` from the quartic interpolant of the step
    /// containing it; `None` outside the integrated interval.
    pub fn interpolate(&self, t: f64) -> Option<State> {
        if self.dense.is_empty() {
            return (t == 0.0).then(|| self.samples[0].state);
        }
        let i = self.dense.partition_point(|seg| seg.t1() < t);
        let seg = self.dense.get(i)?;
        if t < seg.t0 {
            return None;
        }
        let y = seg.eval(t);
        Some(State::new(y[0].max(0.0), y[1].max(0.0)))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", s.t, s.state.x, s.state.y)?;
        }
        Ok(())
    }
}

/// Half-line `anchor + r·(1, 0)`, `r > 0`, crossed with decreasing `y`
/// when the orbit turns counterclockwise about the anchor.
#[derive(Debug, Clone, Copy)]
struct Section {
    anchor: State,
}

impl Section {
    fn crossing(&self, seg: &DenseSegment) -> Option<f64> {
        let a = seg.start();
        let b = seg.end();
        let ga = a[1] - self.anchor.y;
        let gb = b[1] - self.anchor.y;
        if !(ga < 0.0 && gb >= 0.0) {
            return None;
        }
        let (mut lo, mut hi) = (seg.t0, seg.t1());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if seg.eval(mid)[1] - self.anchor.y < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let x = seg.eval(0.5 * (lo + hi))[0];
        let r = x - self.anchor.x;
        (r > 0.0).then_some(r)
    }
}

/// Relative spread below which successive section returns count as a
/// periodic orbit.
const CYCLE_RETURN_TOL: f64 = 1e-7;
const CYCLE_RETURN_TOL_LOOSE: f64 = 1e-3;

fn returns_settled(r: &[f64], tol: f64, floor: f64) -> bool {
    if r.len() < 3 {
        return false;
    }
    let last = &r[r.len() - 3..];
    let lo = last.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo > floor && (hi - lo) <= tol * hi
}

/// Integrates the model from `s0` until an attractor captures the orbit,
/// the orbit escapes or reaches an axis, or the budget runs out.
pub fn integrate(p: &ModelParams, s0: State, settings: &IntegratorSettings) -> Result<Trajectory> {
    settings.validate()?;
    let s0 = s0.checked()?;
    let eqs = all_equilibria(p);
    let interiors = interior_equilibria(p);
    let targets: Vec<(State, AttractorId)> = eqs
        .iter()
        .map(|e| {
            let idx = interiors.iter().position(|i| i.kind == e.kind).unwrap_or(0);
            (e.location, AttractorId::of_kind(e.kind, idx))
        })
        .collect();
    let focus = interiors
        .iter()
        .enumerate()
        .rfind(|(_, e)| e.stability != crate::stability::StabilityClass::Saddle)
        .map(|(i, e)| (i, Section { anchor: e.location }));

    let mut stepper = model_stepper(p, s0, Direction::Forward, settings);
    let mut samples = vec![Sample { t: 0.0, state: s0 }];
    let mut dense = Vec::new();
    let mut returns = Vec::new();
    let mut near: Option<(usize, f64)> = None;
    let on_axis0 = s0.x == 0.0 || s0.y == 0.0;

    let nearest = |s: State| -> Option<usize> {
        targets
            .iter()
            .enumerate()
            .map(|(i, (e, _))| (i, e.dist(&s)))
            .filter(|(_, d)| *d <= settings.convergence_radius)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    };
    if let Some(i) = nearest(s0) {
        near = Some((i, 0.0));
    }

    let termination = loop {
        if stepper.steps() >= settings.max_steps || stepper.t() >= settings.max_time {
            break Termination::BudgetExhausted;
        }
        let seg = stepper.step_capped(settings.max_time - stepper.t())?;
        let s = State::from_array(stepper.y());
        samples.push(Sample {
            t: stepper.t(),
            state: s,
        });
        if let Some((_, sec)) = &focus {
            if let Some(r) = sec.crossing(&seg) {
                returns.push(r);
            }
        }
        dense.push(seg);

        if !(s.norm() <= settings.escape_norm) {
            break Termination::Escaped;
        }
        if stepper.last_clipped() && !on_axis0 && (s.x == 0.0 || s.y == 0.0) {
            break Termination::ReachedAxis;
        }
        match (nearest(s), near) {
            (Some(i), Some((j, since))) if i == j => {
                if stepper.t() - since >= settings.convergence_dwell {
                    break Termination::ConvergedTo(targets[i].1);
                }
            }
            (Some(i), _) => near = Some((i, stepper.t())),
            (None, _) => near = None,
        }
        if let Some((idx, _)) = focus {
            if returns_settled(
                &returns,
                CYCLE_RETURN_TOL,
                1e3 * settings.convergence_radius,
            ) {
                break Termination::ConvergedTo(AttractorId::LimitCycle(idx));
            }
        }
    };

    Ok(Trajectory {
        samples,
        termination,
        clip_events: stepper.clip_events(),
        steps: stepper.steps(),
        section_returns: returns,
        dense,
    })
}

/// State reached at time `t_end` (forward or backward), ignoring the
/// capture and escape criteria.
pub fn flow_to(
    p: &ModelParams,
    s0: State,
    t_end: f64,
    dir: Direction,
    settings: &IntegratorSettings,
) -> Result<State> {
    let s0 = s0.checked()?;
    let mut stepper = model_stepper(p, s0, dir, settings);
    while stepper.t() < t_end {
        if stepper.steps() >= settings.max_steps {
            return Err(Error::NoReturn(format!(
                "step budget exhausted at t = {}",
                stepper.t()
            )));
        }
        let seg = stepper.step_capped(t_end - stepper.t())?;
        if seg.t1() >= t_end {
            break;
        }
    }
    Ok(State::from_array(stepper.y()))
}

/// Attractor reached from `s0`.
pub fn classify_omega_limit(
    p: &ModelParams,
    s0: State,
    settings: &IntegratorSettings,
) -> Result<AttractorId> {
    let tr = integrate(p, s0, settings)?;
    Ok(match tr.termination {
        Termination::ConvergedTo(id) => id,
        Termination::Escaped => AttractorId::Unknown,
        Termination::ReachedAxis => axis_attractor(p, tr.final_state()),
        Termination::BudgetExhausted => {
            let focus = interior_equilibria(p)
                .iter()
                .rposition(|e| e.stability != crate::stability::StabilityClass::Saddle);
            match focus {
                Some(i)
                    if returns_settled(
                        &tr.section_returns,
                        CYCLE_RETURN_TOL_LOOSE,
                        1e3 * settings.convergence_radius,
                    ) =>
                {
                    AttractorId::LimitCycle(i)
                }
                _ => AttractorId::Unknown,
            }
        }
    })
}

/// Limit of the one-dimensional flow on the axis containing `s`.
fn axis_attractor(p: &ModelParams, s: State) -> AttractorId {
    if s.x == 0.0 {
        if s.y > 0.0 && crate::equilibria::prey_free_state(p).is_some() {
            AttractorId::PreyFreeEq
        } else {
            AttractorId::TrivialEq
        }
    } else if s.x > 0.0 {
        AttractorId::PredatorFreeEq
    } else {
        AttractorId::TrivialEq
    }
}
