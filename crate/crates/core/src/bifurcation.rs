//! Locators for the transcritical, saddle-node, Hopf and homoclinic
//! bifurcations in ξ, and one-parameter sweeps.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    discriminant_roots_in_xi, find_kind, interior_equilibria, prey_free_state,
    quadratic_coefficients, transcritical_threshold, Equilibrium, EquilibriumKind,
};
use crate::error::{Error, Result};
use crate::manifolds::{manifold_topology, ManifoldSettings, ManifoldTopology};
use crate::model::{is_bounded_regime, predator_nullcline_y, ModelParams, State};
use crate::stability::{classify, StabilityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BifurcationKind {
    Transcritical,
    SaddleNode,
    Hopf,
    Homoclinic,
}

impl BifurcationKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Transcritical => "transcritical",
            Self::SaddleNode => "saddle-node",
            Self::Hopf => "hopf",
            Self::Homoclinic => "homoclinic",
        }
    }
}

/// Bisection width in ξ for the saddle-node and Hopf locators.
pub const XI_TOL: f64 = 1e-10;
/// Bisection width in ξ for the homoclinic locator.
pub const HOMOCLINIC_XI_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SotomayorQuantities {
    /// Eigenvalue of smallest modulus.
    pub eigenvalue: f64,
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub wt_f_xi: f64,
    pub wt_d2f_vv: f64,
    pub d2f_vv: [f64; 2],
    pub d2f_vv_fd: [f64; 2],
    /// Largest relative deviation between the analytic and the
    /// finite-difference second derivative.
    pub fd_relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleNodeConditions {
    pub exclusion_holds: bool,
    pub exclusion_value: f64,
    pub capacity_and_interference_holds: bool,
    pub ordinate_bracket_holds: bool,
    pub ordinate_lower: f64,
    pub ordinate_upper: f64,
    pub food_bracket_holds: bool,
    pub food_lower: f64,
    pub food_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Diagnostics {
    Transcritical {
        c_at_star: f64,
        prey_free_growth_below: f64,
        prey_free_growth_above: f64,
        class_below: Option<StabilityClass>,
        class_above: Option<StabilityClass>,
    },
    SaddleNode {
        discriminant: f64,
        root_separation: f64,
        min_abs_eigenvalue: f64,
        sotomayor: SotomayorQuantities,
        sufficient_conditions: SaddleNodeConditions,
    },
    Hopf {
        trace: f64,
        det: f64,
        eigenvalues: [Complex64; 2],
        dtrace_dxi: f64,
        /// `(J11 − J22)² + 4·J12·J21`.
        eigen_discriminant: f64,
        /// Ordinate excluded by the first sufficient condition.
        ordinate_exclusion: f64,
        /// `ξ < 1 + αξ + ε + y₂`.
        food_condition_holds: bool,
        food_condition_rhs: f64,
    },
    Homoclinic {
        xi_low: f64,
        xi_high: f64,
        gap_low: f64,
        gap_high: f64,
        iterations: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: BifurcationKind,
    pub xi_star: f64,
    pub location: State,
    /// Magnitude of the defining quantity (|c|, |Δ|, |trace| or |gap|) at
    /// `xi_star`.
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

fn ordered(bracket: (f64, f64)) -> (f64, f64) {
    if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    }
}

fn check_bracket(bracket: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = ordered(bracket);
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0) {
        return Err(Error::Precondition(format!(
            "bracket [{lo}, {hi}] must be finite and non-negative"
        )));
    }
    Ok((lo, hi))
}

/// Bisection on a sign change of `g`; returns the final bracket.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut g: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let glo = g(lo)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid
        } else {
            hi = mid
        }
    }
    Ok((lo, hi))
}

fn discriminant_at(base: &ModelParams, xi: f64) -> Result<f64> {
    Ok(quadratic_coefficients(&base.with_xi(xi)?).discriminant)
}

/// Transversality and nondegeneracy quantities at a fold with one zero
/// eigenvalue.
pub fn sotomayor_quantities(p: &ModelParams, e: &Equilibrium) -> Result<SotomayorQuantities> {
    let (x, y) = (e.location.x, e.location.y);
    let j = p.jacobian_at(x, y);
    let [l1, l2] = j.eigenvalues();
    let lam = if l1.norm() <= l2.norm() { l1 } else { l2 };
    if !(lam.norm() < 1e-6) {
        return Err(Error::Precondition(format!(
            "no eigenvalue near zero at ({x}, {y}); smallest modulus {:e}",
            lam.norm()
        )));
    }
    let fix = |v: [f64; 2]| {
        let first = if v[0].abs() > 1e-14 { v[0] } else { v[1] };
        if first < 0.0 {
            [-v[0], -v[1]]
        } else {
            v
        }
    };
    let v = fix(j.real_eigenvector(lam.re));
    let w = fix(j.transpose().real_eigenvector(lam.re));
    let f_xi = p.d_field_d_xi(x, y);
    let wt_f_xi = w[0] * f_xi[0] + w[1] * f_xi[1];

    let sp = p.second_partials(x, y);
    let quad = |a: [f64; 3]| a[0] * v[0] * v[0] + 2.0 * a[1] * v[0] * v[1] + a[2] * v[1] * v[1];
    let d2f_vv = [quad(sp[0]), quad(sp[1])];
    let wt_d2f_vv = w[0] * d2f_vv[0] + w[1] * d2f_vv[1];

    let h = 1e-4 * (1.0 + e.location.norm());
    let f0 = p.rhs(x, y);
    let fp = p.rhs(x + h * v[0], y + h * v[1]);
    let fm = p.rhs(x - h * v[0], y - h * v[1]);
    let d2f_vv_fd = [
        (fp[0] - 2.0 * f0[0] + fm[0]) / (h * h),
        (fp[1] - 2.0 * f0[1] + fm[1]) / (h * h),
    ];
    let scale = d2f_vv[0].abs().max(d2f_vv[1].abs()).max(1e-300);
    let fd_relative_error = (d2f_vv[0] - d2f_vv_fd[0])
        .abs()
        .max((d2f_vv[1] - d2f_vv_fd[1]).abs())
        / scale;
    Ok(SotomayorQuantities {
        eigenvalue: lam.re,
        v,
        w,
        wt_f_xi,
        wt_d2f_vv,
        d2f_vv,
        d2f_vv_fd,
        fd_relative_error,
    })
}

/// The four sufficient inequalities for a fold at `e`, evaluated as
/// stated. Informational; the Sotomayor quantities decide.
pub fn saddle_node_conditions(p: &ModelParams, e: &Equilibrium) -> SaddleNodeConditions {
    let (a, b, d, eps, k, xi) = (p.alpha(), p.beta(), p.delta(), p.epsilon(), p.k(), p.xi());
    let (x, y) = (e.location.x, e.location.y);
    let exclusion_value = ((b - d) * x + (b - d * a) * xi - d) / ((1.0 + a * xi + x) * (b - d * a));
    let exclusion_holds = (y - exclusion_value).abs() > 1e-9 * y.abs().max(1.0);
    let capacity_and_interference_holds = k > 2.0 * x && eps < 1.0;
    let s = (b - d) * x + b * xi;
    let ordinate_lower = s / ((b - d) * (x + xi));
    let ordinate_upper = b * b * (k - 2.0 * x) * (x + xi) * (x + xi) / (d * k * s);
    let food_lower = ((1.0 + a) * xi - 1.0) / ((2.0 - eps) * eps);
    let food_upper = (b * eps * (x + xi) * (1.0 - d * eps) - d * x) / (d * eps);
    SaddleNodeConditions {
        exclusion_holds,
        exclusion_value,
        capacity_and_interference_holds,
        ordinate_bracket_holds: ordinate_lower < y && y < ordinate_upper,
        ordinate_lower,
        ordinate_upper,
        food_bracket_holds: food_lower < y && y < food_upper,
        food_lower,
        food_upper,
    }
}

/// Fold of the two interior equilibria: root of the discriminant in ξ.
pub fn locate_saddle_node(base: &ModelParams, bracket: (f64, f64)) -> Result<BifurcationEvent> {
    let (lo, hi) = check_bracket(bracket)?;
    let (dlo, dhi) = (discriminant_at(base, lo)?, discriminant_at(base, hi)?);
    if (dlo < 0.0) == (dhi < 0.0) {
        return Err(Error::Bracket {
            quantity: "interior discriminant",
            lo,
            hi,
        });
    }
    // closed-form root as the starting bracket when available
    let (mut a, mut b) = (lo, hi);
    if let Some(r) = discriminant_roots_in_xi(base)
        .into_iter()
        .find(|r| *r > lo && *r < hi)
    {
        let w = 1e-6 * (1.0 + r.abs());
        let (ra, rb) = ((r - w).max(lo), (r + w).min(hi));
        let (ga, gb) = (discriminant_at(base, ra)?, discriminant_at(base, rb)?);
        if (ga < 0.0) != (gb < 0.0) {
            a = ra;
            b = rb;
        }
    }
    let (a, b) = bisect(a, b, XI_TOL, |xi| discriminant_at(base, xi))?;
    // the endpoint on the side with real roots carries the collided point
    let xi_star = if discriminant_at(base, a)? >= 0.0 {
        a
    } else {
        b
    };
    let p = base.with_xi(xi_star)?;
    let q = quadratic_coefficients(&p);
    let x = -q.b / (2.0 * q.a);
    let location = State::new(x, predator_nullcline_y(&p, x));
    let e = Equilibrium::at(&p, EquilibriumKind::InteriorCollided, location);
    let root_separation = q.discriminant.max(0.0).sqrt() / q.a.abs();
    let min_abs_eigenvalue = e.eigenvalues[0].norm().min(e.eigenvalues[1].norm());
    let sotomayor = sotomayor_quantities(&p, &e)?;
    Ok(BifurcationEvent {
        kind: BifurcationKind::SaddleNode,
        xi_star,
        location,
        residual: q.discriminant.abs(),
        diagnostics: Diagnostics::SaddleNode {
            discriminant: q.discriminant,
            root_separation,
            min_abs_eigenvalue,
            sotomayor,
            sufficient_conditions: saddle_node_conditions(&p, &e),
        },
    })
}

fn high_interior(base: &ModelParams, xi: f64) -> Result<(ModelParams, Equilibrium)> {
    let p = base.with_xi(xi)?;
    let e = find_kind(&interior_equilibria(&p), EquilibriumKind::InteriorHigh)
        .ok_or_else(|| Error::Precondition(format!("no high interior equilibrium at xi = {xi}")))?;
    Ok((p, e))
}

fn high_trace_det(base: &ModelParams, xi: f64) -> Result<(f64, f64)> {
    let (p, e) = high_interior(base, xi)?;
    let j = p.jacobian_at(e.location.x, e.location.y);
    Ok((j.trace(), j.det()))
}

/// Zero of the trace of the high interior equilibrium with positive
/// determinant.
pub fn locate_hopf(base: &ModelParams, bracket: (f64, f64)) -> Result<BifurcationEvent> {
    let (lo, hi) = check_bracket(bracket)?;
    let (tlo, _) = high_trace_det(base, lo)?;
    let (thi, _) = high_trace_det(base, hi)?;
    if (tlo < 0.0) == (thi < 0.0) {
        return Err(Error::Bracket {
            quantity: "trace of the high interior equilibrium",
            lo,
            hi,
        });
    }
    const SAMPLES: usize = 32;
    for i in 0..=SAMPLES {
        let xi = lo + (hi - lo) * i as f64 / SAMPLES as f64;
        let (_, det) = high_trace_det(base, xi)?;
        if !(det > 0.0) {
            return Err(Error::Precondition(format!(
                "determinant {det:e} is not positive at xi = {xi}"
            )));
        }
    }
    let (a, b) = bisect(lo, hi, XI_TOL, |xi| Ok(high_trace_det(base, xi)?.0))?;
    let (ta, tb) = (high_trace_det(base, a)?.0, high_trace_det(base, b)?.0);
    let xi_star = if ta.abs() <= tb.abs() { a } else { b };
    let (p, e) = high_interior(base, xi_star)?;
    let j = p.jacobian_at(e.location.x, e.location.y);
    let h = 1e-6;
    let dtrace_dxi =
        (high_trace_det(base, xi_star + h)?.0 - high_trace_det(base, xi_star - h)?.0) / (2.0 * h);
    let (x2, y2) = (e.location.x, e.location.y);
    let (al, be, de) = (p.alpha(), p.beta(), p.delta());
    let ordinate_exclusion = be * (x2 + xi_star) / al
        * (2.0 * al * de * (1.0 + al + x2) - be * (al * x2 + x2 + 2.0 * al + 1.0))
        / ((be - 2.0 * de) * x2 + be * xi_star);
    let food_condition_rhs = 1.0 + al * xi_star + p.epsilon() + y2;
    Ok(BifurcationEvent {
        kind: BifurcationKind::Hopf,
        xi_star,
        location: e.location,
        residual: j.trace().abs(),
        diagnostics: Diagnostics::Hopf {
            trace: j.trace(),
            det: j.det(),
            eigenvalues: j.eigenvalues(),
            dtrace_dxi,
            eigen_discriminant: (j.m11 - j.m22).powi(2) + 4.0 * j.m12 * j.m21,
            ordinate_exclusion,
            food_condition_holds: xi_star < food_condition_rhs,
            food_condition_rhs,
        },
    })
}

fn gap_at(base: &ModelParams, xi: f64, settings: &ManifoldSettings) -> Result<f64> {
    let r = manifold_topology(&base.with_xi(xi)?, settings)?;
    match (r.topology, r.gap) {
        (ManifoldTopology::Indeterminate, _) | (_, None) => Err(Error::Indeterminate { xi }),
        (_, Some(g)) => Ok(g),
    }
}

/// Saddle connection of the low interior equilibrium: bisection on the
/// sign of the manifold gap.
pub fn locate_homoclinic(
    base: &ModelParams,
    bracket: (f64, f64),
    settings: &ManifoldSettings,
) -> Result<BifurcationEvent> {
    let (lo, hi) = check_bracket(bracket)?;
    if !is_bounded_regime(base).bounded {
        return Err(Error::Precondition(
            "homoclinic search requires epsilon(1 - delta) < 1".into(),
        ));
    }
    let glo = gap_at(base, lo, settings)?;
    let ghi = gap_at(base, hi, settings)?;
    if (glo < 0.0) == (ghi < 0.0) {
        return Err(Error::Bracket {
            quantity: "manifold gap",
            lo,
            hi,
        });
    }
    let (mut a, mut b, mut ga, mut gb) = (lo, hi, glo, ghi);
    let mut iterations = 0;
    while b - a > HOMOCLINIC_XI_TOL {
        let mid = 0.5 * (a + b);
        let gm = gap_at(base, mid, settings)?;
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
            gb = gm;
        }
        iterations += 1;
    }
    let xi_star = 0.5 * (a + b);
    let p = base.with_xi(xi_star)?;
    let e1 = find_kind(&interior_equilibria(&p), EquilibriumKind::InteriorLow)
        .ok_or_else(|| Error::Precondition(format!("no saddle at xi = {xi_star}")))?;
    Ok(BifurcationEvent {
        kind: BifurcationKind::Homoclinic,
        xi_star,
        location: e1.location,
        residual: ga.abs().min(gb.abs()),
        diagnostics: Diagnostics::Homoclinic {
            xi_low: a,
            xi_high: b,
            gap_low: ga,
            gap_high: gb,
            iterations,
        },
    })
}

/// Growth rate of rare prey at the prey-free state, `J11` there.
fn prey_free_growth(base: &ModelParams, xi: f64) -> Result<(f64, Option<StabilityClass>)> {
    let p = base.with_xi(xi)?;
    let y = crate::model::predator_nullcline_intercept(&p);
    let j = p.jacobian_at(0.0, y);
    let class = prey_free_state(&p).map(|s| classify(&p.jacobian_at(s.x, s.y)));
    Ok((j.m11, class))
}

/// Interior branch passing through the prey-free state.
pub fn locate_transcritical(base: &ModelParams) -> Result<BifurcationEvent> {
    let xi_star = transcritical_threshold(base)?;
    let p = base.with_xi(xi_star)?;
    let c = quadratic_coefficients(&p).c;
    let y = crate::model::predator_nullcline_intercept(&p);
    let h = 1e-3 * (1.0 + xi_star);
    let (below, class_below) = prey_free_growth(base, xi_star - h)?;
    let (above, class_above) = prey_free_growth(base, xi_star + h)?;
    Ok(BifurcationEvent {
        kind: BifurcationKind::Transcritical,
        xi_star,
        location: State::new(0.0, y),
        residual: c.abs(),
        diagnostics: Diagnostics::Transcritical {
            c_at_star: c,
            prey_free_growth_below: below,
            prey_free_growth_above: above,
            class_below,
            class_above,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub kind: EquilibriumKind,
    pub location: State,
    pub stability: StabilityClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub xi: f64,
    pub interiors: Vec<BranchPoint>,
    pub prey_free: Option<BranchPoint>,
    /// Events located in `(previous ξ, this ξ]`.
    pub events: Vec<BifurcationKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDataset {
    pub rows: Vec<SweepRow>,
    pub events: Vec<BifurcationEvent>,
}

struct Signs {
    c: f64,
    disc: f64,
    trace_det: Option<(f64, f64)>,
}

fn signs_at(base: &ModelParams, xi: f64) -> Result<Signs> {
    let p = base.with_xi(xi)?;
    let q = quadratic_coefficients(&p);
    let trace_det = find_kind(&interior_equilibria(&p), EquilibriumKind::InteriorHigh).map(|e| {
        let j = p.jacobian_at(e.location.x, e.location.y);
        (j.trace(), j.det())
    });
    Ok(Signs {
        c: q.c,
        disc: q.discriminant,
        trace_det,
    })
}

/// Equilibria and stability on an even ξ grid over `range` (either
/// order), with events bracketed by sign changes of `c`, the discriminant
/// and the trace of the high interior equilibrium.
pub fn sweep(base: &ModelParams, range: (f64, f64), steps: usize) -> Result<SweepDataset> {
    if steps < 2 {
        return Err(Error::Precondition("a sweep needs at least 2 steps".into()));
    }
    let (lo, hi) = check_bracket(range)?;
    let xs: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let data: Vec<(SweepRow, Signs)> = xs
        .par_iter()
        .map(|&xi| -> Result<(SweepRow, Signs)> {
            let p = base.with_xi(xi)?;
            let point = |e: &Equilibrium| BranchPoint {
                kind: e.kind,
                location: e.location,
                stability: e.stability,
            };
            let interiors = interior_equilibria(&p).iter().map(point).collect();
            let prey_free = find_kind(
                &crate::equilibria::boundary_equilibria(&p),
                EquilibriumKind::PreyFree,
            )
            .map(|e| point(&e));
            Ok((
                SweepRow {
                    xi,
                    interiors,
                    prey_free,
                    events: Vec::new(),
                },
                signs_at(base, xi)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<SweepRow> = Vec::with_capacity(steps);
    let mut events = Vec::new();
    for i in 0..data.len() {
        let mut row = data[i].0.clone();
        if i > 0 {
            let (s0, s1) = (&data[i - 1].1, &data[i].1);
            let (a, b) = (xs[i - 1], xs[i]);
            let mut found = Vec::new();
            if (s0.c < 0.0) != (s1.c < 0.0) {
                if let Ok(ev) = locate_transcritical(base) {
                    if ev.xi_star >= a && ev.xi_star <= b {
                        found.push(ev);
                    }
                }
            }
            if (s0.disc < 0.0) != (s1.disc < 0.0) {
                found.extend(locate_saddle_node(base, (a, b)).ok());
            }
            if let (Some((t0, d0)), Some((t1, d1))) = (s0.trace_det, s1.trace_det) {
                if (t0 < 0.0) != (t1 < 0.0) && d0 > 0.0 && d1 > 0.0 {
                    found.extend(locate_hopf(base, (a, b)).ok());
                }
            }
            row.events = found.iter().map(|e| e.kind).collect();
            events.extend(found);
        }
        rows.push(row);
    }
    events.sort_by(|a, b| a.xi_star.total_cmp(&b.xi_star));
    Ok(SweepDataset { rows, events })
}

impl SweepDataset {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,x1,y1,stab1,x2,y2,stab2,events")?;
        for r in &self.rows {
            let low = r.interiors.iter().find(|e| {
                matches!(
                    e.kind,
                    EquilibriumKind::InteriorLow | EquilibriumKind::InteriorCollided
                )
            });
            let high = r
                .interiors
                .iter()
                .find(|e| e.kind == EquilibriumKind::InteriorHigh);
            let cols = |e: Option<&BranchPoint>| match e {
                Some(e) => format!(
                    "{:.16e},{:.16e},{}",
                    e.location.x,
                    e.location.y,
                    e.stability.label()
                ),
                None => ",,".to_string(),
            };
            let ev: Vec<&str> = r.events.iter().map(|e| e.label()).collect();
            writeln!(
                w,
                "{:.16e},{},{},{}",
                r.xi,
                cols(low),
                cols(high),
                ev.join(";")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::two_interior_window;

    fn pstar(xi: f64) -> ModelParams {
        ModelParams::new(0.1, 0.319, 0.3, 0.322, xi, 15.0).unwrap()
    }

    #[test]
    fn saddle_node_examples() {
        let ev = locate_saddle_node(&pstar(0.0), (2.3, 2.6)).unwrap();
        assert!((ev.xi_star - 2.4828).abs() < 5e-4);
        assert!((ev.location.x - 4.8713).abs() < 1e-3);
        assert!((ev.location.y - 5.2804).abs() < 1e-3);
        let Diagnostics::SaddleNode {
            min_abs_eigenvalue,
            sotomayor,
            sufficient_conditions,
            root_separation,
            ..
        } = ev.diagnostics
        else {
            panic!()
        };
        assert!(min_abs_eigenvalue < 1e-6);
        assert!(root_separation < 1e-4);
        assert!(sotomayor.wt_f_xi.abs() > 1e-6);
        assert!(sotomayor.wt_d2f_vv.abs() > 1e-6);
        assert!(sotomayor.fd_relative_error < 1e-4);
        assert!(sufficient_conditions.capacity_and_interference_holds);
        assert!((sufficient_conditions.ordinate_lower - 6.33).abs() < 0.01);
        assert!(!sufficient_conditions.ordinate_bracket_holds);

        assert!(matches!(
            locate_saddle_node(&pstar(0.0), (0.5, 1.5)),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn sotomayor_sign_symmetry_and_precondition() {
        let ev = locate_saddle_node(&pstar(0.0), (2.3, 2.6)).unwrap();
        let p = pstar(ev.xi_star);
        let e = Equilibrium::at(&p, EquilibriumKind::InteriorCollided, ev.location);
        let s = sotomayor_quantities(&p, &e).unwrap();
        let sp = p.second_partials(ev.location.x, ev.location.y);
        let v = [-s.v[0], -s.v[1]];
        let q = |a: [f64; 3]| a[0] * v[0] * v[0] + 2.0 * a[1] * v[0] * v[1] + a[2] * v[1] * v[1];
        let flipped = s.w[0] * q(sp[0]) + s.w[1] * q(sp[1]);
        assert!((flipped - s.wt_d2f_vv).abs() < 1e-15);

        let p = pstar(2.2);
        let e2 = find_kind(&interior_equilibria(&p), EquilibriumKind::InteriorHigh).unwrap();
        assert!(matches!(
            sotomayor_quantities(&p, &e2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn interference_condition_fails_at_high_interference() {
        let p = ModelParams::new(0.1, 0.319, 0.3, 1.2, 2.0, 15.0).unwrap();
        let e = Equilibrium::at(&p, EquilibriumKind::InteriorCollided, State::new(1.0, 1.0));
        assert!(!saddle_node_conditions(&p, &e).capacity_and_interference_holds);
    }

    #[test]
    fn hopf_examples() {
        let ev = locate_hopf(&pstar(0.0), (2.3, 2.478)).unwrap();
        assert!(ev.xi_star > 2.4 && ev.xi_star < 2.478);
        assert!(ev.residual < 1e-9);
        let Diagnostics::Hopf {
            det,
            eigenvalues,
            dtrace_dxi,
            ..
        } = ev.diagnostics
        else {
            panic!()
        };
        assert!(eigenvalues[0].re.abs() < 1e-8);
        assert!(eigenvalues[0].im.abs() > 1e-3);
        assert!((eigenvalues[0].im.abs() - det.sqrt()).abs() < 1e-8);
        assert!(dtrace_dxi.abs() > 1e-6);
        assert!((ev.xi_star - 2.4775841).abs() < 1e-6);
    }

    #[test]
    fn hopf_real_part_changes_sign() {
        let ev = locate_hopf(&pstar(0.0), (2.3, 2.478)).unwrap();
        for (xi, sign) in [(ev.xi_star - 1e-3, -1.0), (ev.xi_star + 1e-3, 1.0)] {
            let (p, e) = high_interior(&pstar(0.0), xi).unwrap();
            let l = p.jacobian_at(e.location.x, e.location.y).eigenvalues();
            assert!(l[0].re * sign > 0.0);
            assert!(l[0].im.abs() > 1e-3);
        }
    }

    #[test]
    fn transcritical_examples() {
        let ev = locate_transcritical(&pstar(0.0)).unwrap();
        assert!((ev.xi_star - 1.61046).abs() < 1e-4);
        assert!(ev.residual < 1e-12);
        let Diagnostics::Transcritical {
            prey_free_growth_below,
            prey_free_growth_above,
            class_below,
            class_above,
            ..
        } = ev.diagnostics
        else {
            panic!()
        };
        assert!(prey_free_growth_below > 0.0 && prey_free_growth_above < 0.0);
        assert_eq!(class_below, Some(StabilityClass::Saddle));
        assert!(class_above.unwrap().is_attracting());

        let bad = ModelParams::new(0.1, 0.319, 0.3, 0.95, 1.0, 15.0).unwrap();
        assert!(matches!(
            locate_transcritical(&bad),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn homoclinic_examples() {
        let set = ManifoldSettings::default();
        let ev = locate_homoclinic(&pstar(0.0), (2.46, 2.48), &set).unwrap();
        assert!((ev.xi_star - 2.4741313).abs() < 2e-3);
        let Diagnostics::Homoclinic {
            xi_low, xi_high, ..
        } = ev.diagnostics
        else {
            panic!()
        };
        assert!(xi_high - xi_low <= HOMOCLINIC_XI_TOL);
        assert!(matches!(
            locate_homoclinic(&pstar(0.0), (1.9, 2.1), &set),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn ordering_inside_window() {
        let w = two_interior_window(&pstar(0.0)).unwrap();
        let hopf = locate_hopf(&pstar(0.0), (2.3, 2.478)).unwrap().xi_star;
        let hom = locate_homoclinic(&pstar(0.0), (2.46, 2.48), &ManifoldSettings::default())
            .unwrap()
            .xi_star;
        for xi in [hopf, hom] {
            assert!(w.contains(xi));
        }
    }

    #[test]
    fn sweep_examples() {
        let d = sweep(&pstar(0.0), (0.5, 3.0), 500).unwrap();
        let kinds: Vec<BifurcationKind> = d.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![
                BifurcationKind::Transcritical,
                BifurcationKind::Hopf,
                BifurcationKind::SaddleNode
            ]
        );
        assert!((d.events[0].xi_star - 1.6105).abs() < 1e-3);
        assert!(d.events[1].xi_star > 2.4 && d.events[1].xi_star < 2.478);
        assert!((d.events[2].xi_star - 2.4828).abs() < 5e-4);
        assert!(d.rows.windows(2).all(|w| w[1].xi > w[0].xi));

        let rev = sweep(&pstar(0.0), (3.0, 0.5), 500).unwrap();
        for (a, b) in d.events.iter().zip(&rev.events) {
            assert_eq!(a.kind, b.kind);
            assert!((a.xi_star - b.xi_star).abs() < 1e-9);
        }

        let empty = sweep(&pstar(0.0), (2.6, 3.0), 50).unwrap();
        assert!(empty.rows.iter().all(|r| r.interiors.is_empty()));
        assert!(sweep(&pstar(0.0), (0.5, 3.0), 1).is_err());
    }

    #[test]
    fn sweep_csv_columns() {
        let d = sweep(&pstar(0.0), (2.0, 2.6), 7).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("xi,x1,y1,stab1,x2,y2,stab2,events"));
        for l in lines {
            assert_eq!(l.split(',').count(), 8);
        }
    }
}
