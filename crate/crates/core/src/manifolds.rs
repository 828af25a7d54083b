//! Invariant manifolds of the interior saddle, basins of attraction,
//! periodic orbits around the interior focus, and the relative position
//! of the stable and unstable manifolds.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    all_equilibria, find_kind, interior_equilibria, Equilibrium, EquilibriumKind,
};
use crate::error::{Error, Result};
use crate::integrate::{
    classify_omega_limit, model_stepper, AttractorId, DenseSegment, Direction, IntegratorSettings,
};
use crate::linalg::{dot2, norm2};
use crate::model::{ModelParams, State};
use crate::stability::StabilityClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    StablePlus,
    StableMinus,
    UnstablePlus,
    UnstableMinus,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::StablePlus,
        Branch::StableMinus,
        Branch::UnstablePlus,
        Branch::UnstableMinus,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Branch::StablePlus => "stable+",
            Branch::StableMinus => "stable-",
            Branch::UnstablePlus => "unstable+",
            Branch::UnstableMinus => "unstable-",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Branch::StablePlus | Branch::StableMinus)
    }

    fn is_plus(&self) -> bool {
        matches!(self, Branch::StablePlus | Branch::UnstablePlus)
    }

    fn direction(&self) -> Direction {
        if self.is_stable() {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldSettings {
    /// Distance of the first point from the saddle; `None` selects
    /// `1e-6·(1 + ‖saddle‖)`.
    pub seed_offset: Option<f64>,
    pub max_segment: f64,
    pub arclength_budget: f64,
    pub max_time: f64,
    pub capture_radius: f64,
    pub coincidence_tol: f64,
    /// Arclength a branch must cover before a ray crossing counts.
    pub ray_clearance: f64,
    /// Ray direction from the focus for the gap; `None` points through
    /// the saddle.
    pub ray_direction: Option<[f64; 2]>,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ManifoldSettings {
    fn default() -> Self {
        Self {
            seed_offset: None,
            max_segment: 0.05,
            arclength_budget: 200.0,
            max_time: 3000.0,
            capture_radius: 1e-4,
            coincidence_tol: 2e-4,
            ray_clearance: 0.1,
            ray_direction: None,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
        }
    }
}

impl ManifoldSettings {
    fn integrator(&self) -> IntegratorSettings {
        IntegratorSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_time: self.max_time,
            max_step: 0.5,
            ..Default::default()
        }
    }

    pub fn seed_offset_for(&self, saddle: &State) -> f64 {
        self.seed_offset.unwrap_or(1e-6 * (1.0 + saddle.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ManifoldStop {
    Budget,
    Boundary,
    Captured(State),
    TimeLimit,
    Escaped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifold {
    pub origin: Equilibrium,
    pub branch: Branch,
    pub points: Vec<State>,
    pub arclength: f64,
    pub stop: ManifoldStop,
}

impl Manifold {
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "branch,x,y")?;
        }
        for s in &self.points {
            writeln!(w, "{},{:.16e},{:.16e}", self.branch.label(), s.x, s.y)?;
        }
        Ok(())
    }

    /// Number of proper crossings of the segment `a`–`b` with the polyline.
    pub fn crossings_with_segment(&self, a: State, b: State) -> usize {
        self.points
            .windows(2)
            .filter(|w| segments_cross(a, b, w[0], w[1]))
            .count()
    }

    /// Smallest distance from `s` to any polyline vertex or edge.
    pub fn distance_to(&self, s: State) -> f64 {
        self.points
            .windows(2)
            .map(|w| point_segment_distance(s, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: State, b: State) -> [f64; 2] {
    [a.x - b.x, a.y - b.y]
}

fn segments_cross(a: State, b: State, c: State, d: State) -> bool {
    let ab = sub(b, a);
    let cd = sub(d, c);
    let o1 = cross2(ab, sub(c, a));
    let o2 = cross2(ab, sub(d, a));
    let o3 = cross2(cd, sub(a, c));
    let o4 = cross2(cd, sub(b, c));
    (o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0)
}

fn point_segment_distance(s: State, a: State, b: State) -> f64 {
    let ab = sub(b, a);
    let l2 = dot2(ab, ab);
    let t = if l2 > 0.0 {
        (dot2(sub(s, a), ab) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm2([s.x - (a.x + t * ab[0]), s.y - (a.y + t * ab[1])])
}

/// Unit eigenvectors of a saddle, oriented as the plus branches.
///
/// The unstable vector points toward the other interior equilibrium when
/// there is one (otherwise toward larger prey); the stable vector points
/// toward larger predator density.
pub fn saddle_directions(p: &ModelParams, saddle: &Equilibrium) -> Result<([f64; 2], [f64; 2])> {
    let j = p.jacobian_at(saddle.location.x, saddle.location.y);
    if !(j.det() < 0.0) {
        return Err(Error::Precondition(format!(
            "{} at ({}, {}) is not a saddle (det = {:e})",
            saddle.kind.label(),
            saddle.location.x,
            saddle.location.y,
            j.det()
        )));
    }
    let [lu, ls] = j.eigenvalues();
    let mut vu = j.real_eigenvector(lu.re);
    let mut vs = j.real_eigenvector(ls.re);
    let angle = cross2(vu, vs).abs().asin();
    if !(angle > 1e-3) {
        return Err(Error::Precondition(format!(
            "saddle eigenvectors are nearly parallel (angle {angle:e} rad)"
        )));
    }
    let other = interior_equilibria(p)
        .into_iter()
        .find(|e| e.kind.is_interior() && e.location.dist(&saddle.location) > 1e-12);
    let toward = match other {
        Some(e) => sub(e.location, saddle.location),
        None => [1.0, 0.0],
    };
    if dot2(vu, toward) < 0.0 {
        vu = [-vu[0], -vu[1]];
    }
    if vs[1] < 0.0 || (vs[1] == 0.0 && vs[0] < 0.0) {
        vs = [-vs[0], -vs[1]];
    }
    Ok((vu, vs))
}

/// Evenly spaced points on `seg` after its start, no two consecutive ones
/// (including `prev`) farther apart than `max_segment`.
fn resample(seg: &DenseSegment, prev: State, max_segment: f64) -> Vec<State> {
    let end = State::from_array(seg.end());
    let mut n = ((2.0 * prev.dist(&end) / max_segment).ceil() as usize).max(1);
    loop {
        let pts: Vec<State> = (1..=n)
            .map(|j| {
                let y = seg.eval(seg.t0 + seg.h * j as f64 / n as f64);
                State::new(y[0].max(0.0), y[1].max(0.0))
            })
            .collect();
        let mut last = prev;
        let ok = pts.iter().all(|q| {
            let d = last.dist(q);
            last = *q;
            d < max_segment
        });
        if ok || n > 1 << 16 {
            return pts;
        }
        n *= 2;
    }
}

/// Traces one branch of the invariant manifolds of a saddle.
pub fn trace_manifold(
    p: &ModelParams,
    saddle: &Equilibrium,
    branch: Branch,
    settings: &ManifoldSettings,
) -> Result<Manifold> {
    trace_with(p, saddle, branch, settings, |_, _| false)
}

/// Traces a branch and stops early once `stop(points, arclength)` holds.
fn trace_with(
    p: &ModelParams,
    saddle: &Equilibrium,
    branch: Branch,
    settings: &ManifoldSettings,
    mut stop: impl FnMut(&[State], f64) -> bool,
) -> Result<Manifold> {
    let (vu, vs) = saddle_directions(p, saddle)?;
    let v = if branch.is_stable() { vs } else { vu };
    let sign = if branch.is_plus() { 1.0 } else { -1.0 };
    let off = settings.seed_offset_for(&saddle.location);
    let seed = State::new(
        saddle.location.x + sign * off * v[0],
        saddle.location.y + sign * off * v[1],
    )
    .checked()?;

    let dir = branch.direction();
    let sinks: Vec<State> = all_equilibria(p)
        .into_iter()
        .filter(|e| match dir {
            Direction::Forward => e.stability.is_attracting(),
            Direction::Backward => matches!(
                e.stability,
                StabilityClass::UnstableNode | StabilityClass::UnstableFocus
            ),
        })
        .map(|e| e.location)
        .collect();

    let integ = settings.integrator();
    let mut stepper = model_stepper(p, seed, dir, &integ);
    let mut points = vec![seed];
    let mut arclength = 0.0;
    let reason = loop {
        if stepper.t() >= settings.max_time || stepper.steps() >= integ.max_steps {
            break ManifoldStop::TimeLimit;
        }
        let seg = stepper.step()?;
        let prev = *points.last().unwrap();
        let mut hit_budget = false;
        let mut last = prev;
        for q in resample(&seg, prev, settings.max_segment) {
            arclength += last.dist(&q);
            points.push(q);
            last = q;
            if arclength >= settings.arclength_budget {
                hit_budget = true;
                break;
            }
        }
        if stop(&points, arclength) {
            break ManifoldStop::Budget;
        }
        if hit_budget {
            break ManifoldStop::Budget;
        }
        if last.norm() > integ.escape_norm {
            break ManifoldStop::Escaped;
        }
        if last.x == 0.0 || last.y == 0.0 {
            break ManifoldStop::Boundary;
        }
        if let Some(s) = sinks
            .iter()
            .find(|s| s.dist(&last) < settings.capture_radius)
        {
            break ManifoldStop::Captured(*s);
        }
    };
    Ok(Manifold {
        origin: *saddle,
        branch,
        points,
        arclength,
        stop: reason,
    })
}

/// Rectangle of initial conditions with `nx × ny` nodes, end points
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min >= 0.0
            && self.y_min >= 0.0
            && self.x_max >= self.x_min
            && self.y_max >= self.y_min
            && self.nx > 0
            && self.ny > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "grid [{}, {}]×[{}, {}] with {}×{} nodes is not a non-empty rectangle in the quadrant",
                self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny
            )))
        }
    }

    fn coord(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Node `idx` in row-major order (x varies fastest).
    pub fn node(&self, idx: usize) -> State {
        let i = idx % self.nx;
        let j = idx / self.nx;
        State::new(
            Self::coord(self.x_min, self.x_max, self.nx, i),
            Self::coord(self.y_min, self.y_max, self.ny, j),
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCount {
    pub attractor: AttractorId,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinEstimate {
    pub grid: GridSpec,
    pub counts: Vec<AttractorCount>,
    pub fraction_prey_free: f64,
    pub resolved: usize,
    pub unresolved: usize,
    /// Attractor of every node, row-major.
    pub nodes: Vec<AttractorId>,
}

impl BasinEstimate {
    pub fn count(&self, id: AttractorId) -> usize {
        self.counts
            .iter()
            .find(|c| c.attractor == id)
            .map_or(0, |c| c.count)
    }

    pub fn fraction(&self, id: AttractorId) -> f64 {
        if self.resolved == 0 {
            0.0
        } else {
            self.count(id) as f64 / self.resolved as f64
        }
    }
}

/// Classifies the ω-limit of every grid node.
pub fn basin_fraction(
    p: &ModelParams,
    grid: &GridSpec,
    settings: &IntegratorSettings,
) -> Result<BasinEstimate> {
    grid.validate()?;
    settings.validate()?;
    let nodes: Vec<AttractorId> = (0..grid.len())
        .into_par_iter()
        .map(|i| classify_omega_limit(p, grid.node(i), settings).unwrap_or(AttractorId::Unknown))
        .collect();
    let mut counts: Vec<AttractorCount> = Vec::new();
    for id in &nodes {
        match counts.iter_mut().find(|c| c.attractor == *id) {
            Some(c) => c.count += 1,
            None => counts.push(AttractorCount {
                attractor: *id,
                count: 1,
            }),
        }
    }
    counts.sort_by_key(|c| c.attractor);
    let unresolved = nodes.iter().filter(|n| **n == AttractorId::Unknown).count();
    let resolved = nodes.len() - unresolved;
    let prey_free = nodes
        .iter()
        .filter(|n| **n == AttractorId::PreyFreeEq)
        .count();
    Ok(BasinEstimate {
        grid: *grid,
        counts,
        fraction_prey_free: if resolved == 0 {
            0.0
        } else {
            prey_free as f64 / resolved as f64
        },
        resolved,
        unresolved,
        nodes,
    })
}

/// Half-line `anchor + r·direction`, `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub anchor: State,
    pub direction: [f64; 2],
}

impl SectionSpec {
    pub fn new(anchor: State, direction: [f64; 2]) -> Result<Self> {
        let n = norm2(direction);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Precondition(
                "section direction must be non-zero".into(),
            ));
        }
        Ok(Self {
            anchor,
            direction: [direction[0] / n, direction[1] / n],
        })
    }

    /// Section through the non-saddle interior equilibrium pointing toward
    /// larger prey.
    pub fn at_focus(p: &ModelParams) -> Result<Self> {
        let focus = interior_equilibria(p)
            .into_iter()
            .rev()
            .find(|e| e.stability != StabilityClass::Saddle)
            .ok_or_else(|| Error::Precondition("no non-saddle interior equilibrium".into()))?;
        Self::new(focus.location, [1.0, 0.0])
    }

    pub fn point(&self, r: f64) -> State {
        State::new(
            self.anchor.x + r * self.direction[0],
            self.anchor.y + r * self.direction[1],
        )
    }

    fn radial(&self, s: [f64; 2]) -> f64 {
        (s[0] - self.anchor.x) * self.direction[0] + (s[1] - self.anchor.y) * self.direction[1]
    }

    fn normal(&self, s: [f64; 2]) -> f64 {
        cross2(self.direction, [s[0] - self.anchor.x, s[1] - self.anchor.y])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleStability {
    StableCycle,
    UnstableCycle,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleResult {
    pub section: SectionSpec,
    pub fixed_point: State,
    pub period: f64,
    pub floquet_slope: f64,
    pub stability: CycleStability,
}

/// Band around unit return-map slope reported as neutral.
pub const NEUTRAL_BAND: f64 = 1e-3;
/// Contraction of successive section returns that counts as a fixed point.
pub const RETURN_CONTRACTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_returns: usize,
    /// Time allowed for a single return.
    pub max_return_time: f64,
}

impl Default for CycleSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_returns: 400,
            max_return_time: 2000.0,
        }
    }
}

impl CycleSettings {
    fn integrator(&self) -> IntegratorSettings {
        IntegratorSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: 0.5,
            ..Default::default()
        }
    }
}

/// First crossing of the section after leaving `s0`, in the rotation sense
/// of the flow; returns the crossing radius and the elapsed time.
fn next_crossing(
    p: &ModelParams,
    sec: &SectionSpec,
    s0: State,
    dir: Direction,
    cs: &CycleSettings,
) -> Result<Option<(f64, f64)>> {
    let f = p.rhs(s0.x, s0.y);
    let f = [dir.sign() * f[0], dir.sign() * f[1]];
    // orientation so that the signed normal increases along the flow at
    // the section; for a start off the section fall back to the field at
    // the anchor's ray point through s0
    let mut omega = cross2(sec.direction, f).signum();
    if omega == 0.0 {
        return Ok(None);
    }
    if sec.normal(s0.as_array()).abs() > 1e-12 {
        let r = sec.radial(s0.as_array()).abs().max(1e-6);
        let q = sec.point(r);
        let fq = p.rhs(q.x, q.y);
        omega = cross2(sec.direction, [dir.sign() * fq[0], dir.sign() * fq[1]]).signum();
    }
    let eqs = all_equilibria(p);
    let integ = cs.integrator();
    let mut st = model_stepper(p, s0, dir, &integ);
    loop {
        if st.t() > cs.max_return_time || st.steps() >= integ.max_steps {
            return Ok(None);
        }
        let seg = st.step()?;
        let a = seg.start();
        let b = seg.end();
        let ga = omega * sec.normal(a);
        let gb = omega * sec.normal(b);
        if ga < 0.0 && gb >= 0.0 {
            let (mut lo, mut hi) = (seg.t0, seg.t1());
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if omega * sec.normal(seg.eval(mid)) < 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let tc = 0.5 * (lo + hi);
            let r = sec.radial(seg.eval(tc));
            if r > 0.0 {
                return Ok(Some((r, tc)));
            }
        }
        let y = State::from_array(st.y());
        if y.norm() > integ.escape_norm || y.x == 0.0 || y.y == 0.0 {
            return Ok(None);
        }
        if eqs.iter().any(|e| e.location.dist(&y) < 1e-9) {
            return Ok(None);
        }
    }
}

/// Return map of the section in the given time direction.
pub fn return_map(
    p: &ModelParams,
    sec: &SectionSpec,
    r: f64,
    dir: Direction,
    cs: &CycleSettings,
) -> Result<Option<(f64, f64)>> {
    let s = sec.point(r);
    if !s.in_phi() {
        return Ok(None);
    }
    next_crossing(p, sec, s, dir, cs)
}

fn iterate_to_fixed_point(
    p: &ModelParams,
    sec: &SectionSpec,
    r0: f64,
    dir: Direction,
    cs: &CycleSettings,
) -> Result<Option<f64>> {
    let mut hist = vec![r0];
    let mut r = r0;
    for _ in 0..cs.max_returns {
        let Some((next, _)) = return_map(p, sec, r, dir, cs)? else {
            return Ok(None);
        };
        if next < 1e-7 {
            return Ok(None);
        }
        if (next - r).abs() < RETURN_CONTRACTION_TOL {
            return Ok(Some(next));
        }
        hist.push(next);
        r = next;
        // Aitken extrapolation on the last three iterates
        if hist.len() >= 3 && hist.len() % 3 == 0 {
            let n = hist.len();
            let (a, b, c) = (hist[n - 3], hist[n - 2], hist[n - 1]);
            let den = c - 2.0 * b + a;
            if den.abs() > 1e-300 {
                let acc = c - (c - b) * (c - b) / den;
                let monotone = (b - a) * (c - b) > 0.0 && ((c - b).abs() < (b - a).abs());
                if monotone && acc > 0.0 && acc.is_finite() {
                    r = acc;
                    hist.push(acc);
                }
            }
        }
    }
    Ok(None)
}

/// Finds a periodic orbit crossing the section, following the return map
/// forward (stable cycles) and backward in time (unstable cycles).
pub fn find_limit_cycle(
    p: &ModelParams,
    seed: State,
    section: &SectionSpec,
    cs: &CycleSettings,
) -> Result<Option<LimitCycleResult>> {
    let seed = seed.checked()?;
    if seed.dist(&section.anchor) < 1e-12 {
        return Ok(None);
    }
    let f_anchor = p.rhs(section.anchor.x, section.anchor.y);
    if norm2(f_anchor) > 1e-8 {
        return Err(Error::Precondition(
            "section must be anchored at an equilibrium".into(),
        ));
    }
    let probe = section.point(1e-3);
    let fp = p.rhs(probe.x, probe.y);
    if cross2(section.direction, fp).abs() < 1e-6 * norm2(fp) {
        return Err(Error::Precondition("section is tangent to the flow".into()));
    }

    for dir in [Direction::Forward, Direction::Backward] {
        let on_section = sec_contains(section, seed);
        let r0 = if on_section {
            section.radial(seed.as_array())
        } else {
            match next_crossing(p, section, seed, dir, cs)? {
                Some((r, _)) => r,
                None => continue,
            }
        };
        if let Some(r) = iterate_to_fixed_point(p, section, r0, dir, cs)? {
            return finish_cycle(p, section, r, cs).map(Some);
        }
    }
    Ok(None)
}

fn sec_contains(sec: &SectionSpec, s: State) -> bool {
    sec.normal(s.as_array()).abs() < 1e-12 && sec.radial(s.as_array()) > 0.0
}

fn finish_cycle(
    p: &ModelParams,
    sec: &SectionSpec,
    r: f64,
    cs: &CycleSettings,
) -> Result<LimitCycleResult> {
    let (r1, period) = return_map(p, sec, r, Direction::Forward, cs)?
        .ok_or_else(|| Error::NoReturn(format!("fixed point at radius {r} does not return")))?;
    let h = 1e-5 * r.max(1e-3);
    let plus = return_map(p, sec, r + h, Direction::Forward, cs)?;
    let minus = return_map(p, sec, r - h, Direction::Forward, cs)?;
    let slope = match (plus, minus) {
        (Some((a, _)), Some((b, _))) => (a - b) / (2.0 * h),
        (Some((a, _)), None) => (a - r1) / h,
        (None, Some((b, _))) => (r1 - b) / h,
        (None, None) => f64::NAN,
    };
    let stability = if (slope.abs() - 1.0).abs() <= NEUTRAL_BAND || !slope.is_finite() {
        CycleStability::Neutral
    } else if slope.abs() < 1.0 {
        CycleStability::StableCycle
    } else {
        CycleStability::UnstableCycle
    };
    Ok(LimitCycleResult {
        section: *sec,
        fixed_point: sec.point(0.5 * (r + r1)),
        period,
        floquet_slope: slope,
        stability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldTopology {
    UnstableInsideStable,
    StableInsideUnstable,
    NearCoincident,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub topology: ManifoldTopology,
    /// Signed radial separation; positive when the unstable branch returns
    /// closer to the focus than the stable one. `None` when indeterminate.
    pub gap: Option<f64>,
    pub ray_anchor: State,
    pub ray_direction: [f64; 2],
    /// Distance from the focus to the saddle along the ray.
    pub ray_length: f64,
    pub unstable_return: Option<f64>,
    pub stable_return: Option<f64>,
}

/// First crossing of the line through `anchor` along `d`, at positive
/// radial coordinate, after the branch has covered `clearance` of arclength.
/// Capture by an equilibrium at `anchor` counts as a return at radius 0.
fn first_ray_return(
    p: &ModelParams,
    saddle: &Equilibrium,
    branch: Branch,
    anchor: State,
    d: [f64; 2],
    settings: &ManifoldSettings,
) -> Result<Option<f64>> {
    let sec = SectionSpec::new(anchor, d)?;
    let mut found = None;
    let mut checked = 1usize;
    let m = trace_with(p, saddle, branch, settings, |pts, len| {
        if len < settings.ray_clearance {
            checked = pts.len();
            return false;
        }
        for i in checked.max(1)..pts.len() {
            let a = pts[i - 1].as_array();
            let b = pts[i].as_array();
            let ga = sec.normal(a);
            let gb = sec.normal(b);
            if (ga < 0.0) != (gb < 0.0) {
                let t = ga / (ga - gb);
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let r = sec.radial(x);
                if r > 0.0 {
                    found = Some(r);
                    return true;
                }
            }
        }
        checked = pts.len();
        false
    })?;
    // an orbit absorbed by the focus reaches it without crossing the ray
    if found.is_none() {
        if let ManifoldStop::Captured(s) = m.stop {
            if s.dist(&anchor) < settings.capture_radius {
                return Ok(Some(0.0));
            }
        }
    }
    Ok(found)
}

/// Refines a crossing radius by bisection on the dense trajectory.
fn refine_ray_return(
    p: &ModelParams,
    saddle: &Equilibrium,
    branch: Branch,
    anchor: State,
    d: [f64; 2],
    settings: &ManifoldSettings,
) -> Result<Option<f64>> {
    // A fine polyline makes the chord error negligible against the gap
    // tolerance; the coarse pass only decides whether a return happens.
    let fine = ManifoldSettings {
        max_segment: settings.max_segment.min(1e-3),
        ..*settings
    };
    match first_ray_return(p, saddle, branch, anchor, d, settings)? {
        None => Ok(None),
        Some(_) => first_ray_return(p, saddle, branch, anchor, d, &fine),
    }
}

/// Relative position of the upper stable and the inner unstable branch of
/// the saddle, measured along a ray from the focus.
pub fn manifold_topology(p: &ModelParams, settings: &ManifoldSettings) -> Result<TopologyReport> {
    let interiors = interior_equilibria(p);
    let e1 = find_kind(&interiors, EquilibriumKind::InteriorLow);
    let e2 = find_kind(&interiors, EquilibriumKind::InteriorHigh);
    let (Some(e1), Some(e2)) = (e1, e2) else {
        return Err(Error::Precondition(
            "two distinct interior equilibria are required".into(),
        ));
    };
    if e1.stability != StabilityClass::Saddle {
        return Err(Error::Precondition(
            "low interior equilibrium is not a saddle".into(),
        ));
    }
    let to_saddle = sub(e1.location, e2.location);
    let ray_length = norm2(to_saddle);
    let d = match settings.ray_direction {
        Some(v) => {
            let n = norm2(v);
            [v[0] / n, v[1] / n]
        }
        None => [to_saddle[0] / ray_length, to_saddle[1] / ray_length],
    };
    let reach = dot2(to_saddle, d).max(0.0);
    let ru = refine_ray_return(p, &e1, Branch::UnstablePlus, e2.location, d, settings)?;
    let rs = refine_ray_return(p, &e1, Branch::StablePlus, e2.location, d, settings)?;
    let (topology, gap) = if ru.is_none() && rs.is_none() {
        (ManifoldTopology::Indeterminate, None)
    } else {
        let inner_u = ru.map_or(reach, |r| r.min(reach));
        let inner_s = rs.map_or(reach, |r| r.min(reach));
        let gap = inner_s - inner_u;
        let t = if gap.abs() < settings.coincidence_tol {
            ManifoldTopology::NearCoincident
        } else if gap > 0.0 {
            ManifoldTopology::UnstableInsideStable
        } else {
            ManifoldTopology::StableInsideUnstable
        };
        (t, Some(gap))
    };
    Ok(TopologyReport {
        topology,
        gap,
        ray_anchor: e2.location,
        ray_direction: d,
        ray_length,
        unstable_return: ru,
        stable_return: rs,
    })
}

pub fn write_manifolds_csv<W: Write>(mut w: W, manifolds: &[Manifold]) -> std::io::Result<()> {
    writeln!(w, "branch,x,y")?;
    for m in manifolds {
        m.write_csv(&mut w, false)?;
    }
    Ok(())
}

pub fn write_cycle_csv<W: Write>(
    mut w: W,
    p: &ModelParams,
    cycle: &LimitCycleResult,
    samples: usize,
) -> Result<()> {
    let cs = CycleSettings::default();
    let integ = cs.integrator();
    let mut st = model_stepper(p, cycle.fixed_point, Direction::Forward, &integ);
    let io = |e: std::io::Error| Error::Precondition(format!("write failed: {e}"));
    writeln!(w, "t,x,y").map_err(io)?;
    let n = samples.max(2);
    let mut k = 0usize;
    let mut seg = None::<DenseSegment>;
    while k < n {
        let t = cycle.period * k as f64 / (n - 1) as f64;
        let s = match seg {
            Some(sg) if t <= sg.t1() && t >= sg.t0 => sg.eval(t),
            _ if t == 0.0 => cycle.fixed_point.as_array(),
            _ => {
                seg = Some(st.step()?);
                continue;
            }
        };
        writeln!(w, "{:.16e},{:.16e},{:.16e}", t, s[0], s[1]).map_err(io)?;
        k += 1;
    }
    Ok(())
}
