//! Linear stability of equilibria.
//!
//! The class of an equilibrium always comes from the direct eigen-solve of
//! the Jacobian. The closed-form bounds on the interior ordinates are
//! reported alongside as diagnostics; they are sufficient conditions and
//! may disagree with the direct answer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{predator_nullcline_y, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    NonHyperbolic,
}

impl StabilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::StableNode => "stable-node",
            Self::StableFocus => "stable-focus",
            Self::UnstableNode => "unstable-node",
            Self::UnstableFocus => "unstable-focus",
            Self::Saddle => "saddle",
            Self::NonHyperbolic => "non-hyperbolic",
        }
    }

    pub fn is_attracting(&self) -> bool {
        matches!(self, Self::StableNode | Self::StableFocus)
    }
}

/// Width of the non-hyperbolic band on the normalized trace and determinant.
pub const NON_HYPERBOLIC_TOL: f64 = 1e-9;

/// Trace–determinant classification of a planar linearization.
///
/// Trace and determinant are first divided by the largest entry (and its
/// square) so the band is scale-free. A zero-trace saddle stays a saddle.
pub fn classify(j: &Mat2) -> StabilityClass {
    let s = j.max_abs();
    if s == 0.0 || !s.is_finite() {
        return StabilityClass::NonHyperbolic;
    }
    let t = j.trace() / s;
    let d = j.det() / (s * s);
    if d.abs() < NON_HYPERBOLIC_TOL {
        return StabilityClass::NonHyperbolic;
    }
    if d < 0.0 {
        return StabilityClass::Saddle;
    }
    if t.abs() < NON_HYPERBOLIC_TOL {
        return StabilityClass::NonHyperbolic;
    }
    let node = t * t - 4.0 * d >= 0.0;
    match (t < 0.0, node) {
        (true, true) => StabilityClass::StableNode,
        (true, false) => StabilityClass::StableFocus,
        (false, true) => StabilityClass::UnstableNode,
        (false, false) => StabilityClass::UnstableFocus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub trace: f64,
    pub determinant: f64,
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
    pub bound_flags: Option<BoundFlags>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundFlags {
    LowInterior(SaddleCheck),
    HighInterior(HighInteriorCheck),
}

/// Maximum field residual accepted for an equilibrium.
pub const EQUILIBRIUM_RESIDUAL_TOL: f64 = 1e-6;

pub fn stability_report(p: &ModelParams, e: &Equilibrium) -> Result<StabilityReport> {
    let s = e.location.checked()?;
    let f = p.rhs(s.x, s.y);
    let residual = f[0].abs().max(f[1].abs());
    if !(residual < EQUILIBRIUM_RESIDUAL_TOL) {
        return Err(Error::StaleEquilibrium {
            x: s.x,
            y: s.y,
            residual,
        });
    }
    let j = p.jacobian_at(s.x, s.y);
    let bound_flags = match e.kind {
        EquilibriumKind::InteriorLow | EquilibriumKind::InteriorCollided => {
            Some(BoundFlags::LowInterior(saddle_bound_check(p, e)))
        }
        EquilibriumKind::InteriorHigh => Some(BoundFlags::HighInterior(high_interior_case(p, e))),
        _ => None,
    };
    Ok(StabilityReport {
        trace: j.trace(),
        determinant: j.det(),
        eigenvalues: j.eigenvalues(),
        class: classify(&j),
        bound_flags,
    })
}

/// Shorthands shared by the reduced expressions at an interior point.
struct Reduced {
    /// `(β − δ)x + βξ`, equal to `δ (1 + αξ + εy)` on the predator line.
    s: f64,
    /// `β (x + ξ) / δ`, the response denominator on the predator line.
    r: f64,
    /// `(β − δ)x + (β − δα)ξ − δ`, equal to `δεy` on the predator line.
    l: f64,
}

fn reduced(p: &ModelParams, x: f64) -> Reduced {
    let (a, b, d, xi) = (p.alpha(), p.beta(), p.delta(), p.xi());
    Reduced {
        s: (b - d) * x + b * xi,
        r: b * (x + xi) / d,
        l: (b - d) * x + (b - d * a) * xi - d,
    }
}

/// Trace and determinant at an interior equilibrium from the expressions
/// reduced with the predator-nullcline identities
/// `1 + αξ + x + εy = β(x + ξ)/δ` and `1 + αξ + εy = ((β − δ)x + βξ)/δ`.
pub fn trace_det_simplified(p: &ModelParams, interior: &Equilibrium) -> Result<(f64, f64)> {
    if !interior.kind.is_interior() {
        return Err(Error::Precondition(format!(
            "{} is not an interior equilibrium",
            interior.kind.label()
        )));
    }
    let (x, y) = (interior.location.x, interior.location.y);
    let on_line = predator_nullcline_y(p, x);
    if (on_line - y).abs() > 1e-8 * y.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "({x}, {y}) is off the predator nullcline (line value {on_line})"
        )));
    }
    let (b, d, e, k, xi) = (p.beta(), p.delta(), p.epsilon(), p.k(), p.xi());
    let Reduced { s, r, .. } = reduced(p, x);
    let h = p.food_offset() + x;
    let r2 = r * r;

    let trace = (b * (x + xi) * (b * (1.0 - 2.0 * x / k - d) * (x + xi) + d * d * h) - d * s * y)
        / (d * d * r2);

    // J22 reduces to −δεy/R and J21 to β(β − δ)(x + ξ)y/(δR²), so
    // det = (y/R⁴)[β(β − δ)x(x + ξ)(1 + αξ + x)/δ + εyRS − δεR³(1 − 2x/k)]
    let det = y / (r2 * r2)
        * (b * (b - d) * x * (x + xi) * h / d + e * y * r * s
            - d * e * r * r2 * (1.0 - 2.0 * x / k));
    Ok((trace, det))
}

/// Upper bound on the interior ordinate below which the reduced
/// determinant is claimed negative.
pub fn saddle_ordinate_bound(p: &ModelParams, x: f64) -> f64 {
    let (b, d, e, k, xi) = (p.beta(), p.delta(), p.epsilon(), p.k(), p.xi());
    let Reduced { s, l, .. } = reduced(p, x);
    let h = p.food_offset() + x;
    let num = (x + xi) * b * b * (x + xi) * (x + xi) * (k - 2.0 * x) * l;
    let den = d * k * ((x + xi) * s * l + d * x * (s - d * e) * h);
    num / den
}

/// Ordinate above which the interior trace is negative.
pub fn trace_ordinate_bound(p: &ModelParams, x: f64) -> f64 {
    let (b, d, k, xi) = (p.beta(), p.delta(), p.k(), p.xi());
    let Reduced { s, .. } = reduced(p, x);
    let h = p.food_offset() + x;
    b * (x + xi) * (b * ((1.0 - d) * k - 2.0 * x) * (x + xi) + k * d * d * h) / (d * k * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleCheck {
    /// `0 < y < bound` with `x > 0`.
    pub holds: bool,
    pub bound: f64,
    pub det: f64,
    pub det_negative: bool,
    /// Direct classification; authoritative.
    pub class: StabilityClass,
}

/// Ordinate-bound saddle test for the low interior equilibrium.
pub fn saddle_bound_check(p: &ModelParams, e1: &Equilibrium) -> SaddleCheck {
    let (x, y) = (e1.location.x, e1.location.y);
    let bound = saddle_ordinate_bound(p, x);
    let j = p.jacobian_at(x, y);
    let det = j.det();
    SaddleCheck {
        holds: x > 0.0 && y > 0.0 && y < bound,
        bound,
        det,
        det_negative: det < 0.0,
        class: classify(&j),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HighInteriorCase {
    /// Ordinate above both bounds: stable node or focus.
    StableRegime,
    /// Ordinate on the trace bound.
    WeakFocus,
    /// Ordinate below a bound: unstable.
    Repeller,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighInteriorCheck {
    pub case: HighInteriorCase,
    pub det_bound: f64,
    pub trace_bound: f64,
    pub trace: f64,
    pub det: f64,
    /// Direct classification; authoritative.
    pub class: StabilityClass,
}

/// Relative band around the trace bound reported as a weak focus.
pub const WEAK_FOCUS_TOL: f64 = 1e-7;

/// Case split for the high interior equilibrium from the determinant
/// and trace bounds on its ordinate.
pub fn high_interior_case(p: &ModelParams, e2: &Equilibrium) -> HighInteriorCheck {
    let (x, y) = (e2.location.x, e2.location.y);
    let det_bound = saddle_ordinate_bound(p, x);
    let trace_bound = trace_ordinate_bound(p, x);
    let j = p.jacobian_at(x, y);
    let on_trace_bound = (y - trace_bound).abs() <= WEAK_FOCUS_TOL * y.abs().max(1.0);
    let case = if y > det_bound && on_trace_bound {
        HighInteriorCase::WeakFocus
    } else if y > det_bound && y > trace_bound {
        HighInteriorCase::StableRegime
    } else {
        HighInteriorCase::Repeller
    };
    HighInteriorCheck {
        case,
        det_bound,
        trace_bound,
        trace: j.trace(),
        det: j.det(),
        class: classify(&j),
    }
}
