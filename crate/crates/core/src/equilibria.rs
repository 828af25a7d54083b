//! Closed-form equilibria.
//!
//! Interior equilibria lie on the predator nullcline line and solve
//! `a x² + b x + c = 0` with
//!
//! ```text
//! a = βε
//! b = βεξ − [δ − β(1 − ε)] k
//! c = [(β − δα − βε) ξ − δ] k
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{predator_nullcline_intercept, predator_nullcline_y, ModelParams, State};
use crate::stability::{classify, StabilityClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
}

impl QuadraticCoefficients {
    /// Real roots ordered ascending, without positivity filtering.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        if self.discriminant < 0.0 {
            return None;
        }
        let s = self.discriminant.sqrt();
        // q = −(b + sign(b)√Δ)/2 keeps both roots free of cancellation
        let q = -0.5 * (self.b + self.b.signum() * s);
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / self.a, self.c / q)
        };
        Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
    }

    /// Double-root test `|Δ| < 1e-10 · max(1, b²)`.
    pub fn is_double_root(&self) -> bool {
        self.discriminant.abs() < COLLISION_TOL * self.b.mul_add(self.b, 0.0).max(1.0)
    }

    pub fn residual(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

const COLLISION_TOL: f64 = 1e-10;

pub fn quadratic_coefficients(p: &ModelParams) -> QuadraticCoefficients {
    let (b_, d, e, xi, k) = (p.beta(), p.delta(), p.epsilon(), p.xi(), p.k());
    let a = b_ * e;
    let b = b_ * e * xi - (d - b_ * (1.0 - e)) * k;
    let c = (transcritical_denominator(p) * xi - d) * k;
    QuadraticCoefficients {
        a,
        b,
        c,
        discriminant: b * b - 4.0 * a * c,
    }
}

/// `β − δα − βε`.
pub(crate) fn transcritical_denominator(p: &ModelParams) -> f64 {
    p.beta() - p.delta() * p.alpha() - p.beta() * p.epsilon()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Trivial,
    PredatorFree,
    PreyFree,
    /// Smaller root of the interior quadratic (E1).
    InteriorLow,
    /// Larger root of the interior quadratic (E2).
    InteriorHigh,
    InteriorCollided,
}

impl EquilibriumKind {
    pub fn is_interior(&self) -> bool {
        matches!(
            self,
            Self::InteriorLow | Self::InteriorHigh | Self::InteriorCollided
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::PredatorFree => "predator-free",
            Self::PreyFree => "prey-free",
            Self::InteriorLow => "interior-low",
            Self::InteriorHigh => "interior-high",
            Self::InteriorCollided => "interior-collided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub location: State,
    pub eigenvalues: [Complex64; 2],
    pub stability: StabilityClass,
}

impl Equilibrium {
    /// Attaches eigen-data from the Jacobian at `location`.
    pub fn at(p: &ModelParams, kind: EquilibriumKind, location: State) -> Self {
        let j = p.jacobian_at(location.x, location.y);
        Self {
            kind,
            location,
            eigenvalues: j.eigenvalues(),
            stability: classify(&j),
        }
    }
}

/// Positive interior equilibria, ordered `InteriorLow` then `InteriorHigh`.
///
/// A double root yields a single `InteriorCollided`. Roots with `x <= 0`
/// or `y <= 0` are dropped.
pub fn interior_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let q = quadratic_coefficients(p);
    let admissible = |x: f64| -> Option<State> {
        let y = predator_nullcline_y(p, x);
        (x > 0.0 && y > 0.0).then_some(State::new(x, y))
    };
    if q.is_double_root() {
        let x = -q.b / (2.0 * q.a);
        return admissible(x)
            .map(|s| vec![Equilibrium::at(p, EquilibriumKind::InteriorCollided, s)])
            .unwrap_or_default();
    }
    let Some((lo, hi)) = q.real_roots() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(2);
    if let Some(s) = admissible(lo) {
        out.push(Equilibrium::at(p, EquilibriumKind::InteriorLow, s));
    }
    if let Some(s) = admissible(hi) {
        out.push(Equilibrium::at(p, EquilibriumKind::InteriorHigh, s));
    }
    out
}

/// `(0,0)`, `(k,0)` and, when its ordinate is positive, `(0, y*)`.
pub fn boundary_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let mut out = vec![
        Equilibrium::at(p, EquilibriumKind::Trivial, State::new(0.0, 0.0)),
        Equilibrium::at(p, EquilibriumKind::PredatorFree, State::new(p.k(), 0.0)),
    ];
    if let Some(s) = prey_free_state(p) {
        out.push(Equilibrium::at(p, EquilibriumKind::PreyFree, s));
    }
    out
}

/// Location of the prey-free equilibrium when it is strictly positive.
pub fn prey_free_state(p: &ModelParams) -> Option<State> {
    let y = predator_nullcline_intercept(p);
    // rounding at ξ = δ/(β − δα) must not manufacture a positive ordinate
    let scale = (p.beta() * p.xi()).max(p.delta()) / (p.delta() * p.epsilon());
    (y > 1e-12 * scale).then_some(State::new(0.0, y))
}

/// Every equilibrium: boundary first, then interior.
pub fn all_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let mut v = boundary_equilibria(p);
    v.extend(interior_equilibria(p));
    v
}

pub fn find_kind(eqs: &[Equilibrium], kind: EquilibriumKind) -> Option<Equilibrium> {
    eqs.iter().copied().find(|e| e.kind == kind)
}

/// Range of ξ with two positive interior equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoInteriorWindow {
    pub xi_low: f64,
    pub xi_high: Option<f64>,
}

impl TwoInteriorWindow {
    pub fn contains(&self, xi: f64) -> bool {
        xi > self.xi_low && self.xi_high.is_some_and(|h| xi < h)
    }
}

/// Coefficients `(A, B, C)` of the discriminant as a quadratic in ξ.
pub fn discriminant_in_xi(p: &ModelParams) -> (f64, f64, f64) {
    let (b_, d, e, k) = (p.beta(), p.delta(), p.epsilon(), p.k());
    let be = b_ * e;
    let cc = d - b_ * (1.0 - e);
    let g = transcritical_denominator(p);
    (
        be * be,
        -2.0 * be * k * (cc + 2.0 * g),
        cc * cc * k * k + 4.0 * be * k * d,
    )
}

/// Ascending real roots of `Δ(ξ) = 0`.
pub fn discriminant_roots_in_xi(p: &ModelParams) -> Vec<f64> {
    let (a, b, c) = discriminant_in_xi(p);
    let q = QuadraticCoefficients {
        a,
        b,
        c,
        discriminant: b * b - 4.0 * a * c,
    };
    match q.real_roots() {
        Some((r1, r2)) => vec![r1, r2],
        None => Vec::new(),
    }
}

/// Window `xi_low < ξ < xi_high` of two positive interiors; `None` when
/// `β − δα − βε <= 0`. The value of ξ stored in `p` is ignored.
pub fn two_interior_window(p: &ModelParams) -> Option<TwoInteriorWindow> {
    let g = transcritical_denominator(p);
    if g <= 0.0 {
        return None;
    }
    let xi_low = p.delta() / g;
    let cap = (p.delta() - p.beta() * (1.0 - p.epsilon())) * p.k() / (p.beta() * p.epsilon());
    let root = discriminant_roots_in_xi(p)
        .into_iter()
        .find(|&r| r > xi_low);
    let xi_high = match root {
        Some(r) => Some(r.min(cap)),
        None => Some(cap),
    }
    .filter(|&h| h > xi_low);
    Some(TwoInteriorWindow { xi_low, xi_high })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    NoInterior,
    OneInterior,
    TwoInterior,
    /// The two interior equilibria coincide.
    DegenerateBoundary,
}

impl Regime {
    pub fn interior_count(&self) -> usize {
        match self {
            Regime::NoInterior => 0,
            Regime::OneInterior | Regime::DegenerateBoundary => 1,
            Regime::TwoInterior => 2,
        }
    }
}

/// Classifies the point `(ε, ξ)` for the remaining constants of `base`.
pub fn regime_classify(base: &ModelParams, epsilon: f64, xi: f64) -> Result<Regime> {
    let p = base.with_epsilon(epsilon)?.with_xi(xi)?;
    let q = quadratic_coefficients(&p);
    if q.discriminant < 0.0 && !q.is_double_root() {
        return Ok(Regime::NoInterior);
    }
    let eqs = interior_equilibria(&p);
    Ok(match eqs.as_slice() {
        [] => Regime::NoInterior,
        [e] if e.kind == EquilibriumKind::InteriorCollided => Regime::DegenerateBoundary,
        [_] => Regime::OneInterior,
        _ => Regime::TwoInterior,
    })
}

/// `δ / (β − δα − βε)`, where the interior branch meets the prey-free state.
pub fn transcritical_threshold(p: &ModelParams) -> Result<f64> {
    let g = transcritical_denominator(p);
    if g <= 0.0 {
        return Err(Error::Infeasible(format!(
            "beta - delta*alpha - beta*epsilon = {g} is not positive"
        )));
    }
    Ok(p.delta() / g)
}

/// The three curves in the `(ε, ξ)` plane bounding the regimes:
/// `b = 0`, `c = 0`, and equal nullcline slopes at the predator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeCurve {
    LinearCoefficientZero,
    ConstantCoefficientZero,
    SlopeEquality,
}

impl RegimeCurve {
    pub const ALL: [RegimeCurve; 3] = [
        RegimeCurve::LinearCoefficientZero,
        RegimeCurve::ConstantCoefficientZero,
        RegimeCurve::SlopeEquality,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RegimeCurve::LinearCoefficientZero => "b=0",
            RegimeCurve::ConstantCoefficientZero => "c=0",
            RegimeCurve::SlopeEquality => "slope-equality",
        }
    }

    /// ξ on this curve at interference `epsilon`, if defined.
    pub fn xi_at(&self, base: &ModelParams, epsilon: f64) -> Option<f64> {
        let (a, b, d, k) = (base.alpha(), base.beta(), base.delta(), base.k());
        let v = match self {
            RegimeCurve::LinearCoefficientZero => (d - b * (1.0 - epsilon)) * k / (b * epsilon),
            RegimeCurve::ConstantCoefficientZero => {
                let g = b - d * a - b * epsilon;
                if g <= 0.0 {
                    return None;
                }
                d / g
            }
            RegimeCurve::SlopeEquality => {
                if epsilon >= 1.0 {
                    return None;
                }
                crate::model::xi_slope_bound(a, b, d, epsilon, k)
            }
        };
        v.is_finite().then_some(v)
    }
}
