//! The predator–prey vector field with additional food and a
//! Beddington–DeAngelis response, its Jacobian, nullclines, and the
//! polynomial system obtained by rescaling prey and time.
//!
//! ```text
//! dx/dt = x (1 − x/k) − x y / (1 + αξ + x + εy)
//! dy/dt = β (x + ξ) y / (1 + αξ + x + εy) − δ y
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// The six constants of one model instance.
///
/// Construction rejects non-finite values, non-positive rates, negative
/// food quantity and `beta <= delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    delta: f64,
    epsilon: f64,
    xi: f64,
    k: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    beta: f64,
    delta: f64,
    epsilon: f64,
    xi: f64,
    k: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.alpha, r.beta, r.delta, r.epsilon, r.xi, r.k)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            delta: p.delta,
            epsilon: p.epsilon,
            xi: p.xi,
            k: p.k,
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be strictly positive",
        });
    }
    Ok(())
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, epsilon: f64, xi: f64, k: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        check_positive("delta", delta)?;
        check_positive("epsilon", epsilon)?;
        check_positive("k", k)?;
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
                reason: "must be finite and non-negative",
            });
        }
        if beta <= delta {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must exceed delta",
            });
        }
        Ok(Self {
            alpha,
            beta,
            delta,
            epsilon,
            xi,
            k,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Same instance with a different additional-food quantity.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.delta, self.epsilon, xi, self.k)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.delta, epsilon, self.xi, self.k)
    }

    /// `epsilon < 1`, the low-interference regime.
    pub fn low_interference(&self) -> bool {
        self.epsilon < 1.0
    }

    /// `1 + αξ`, the food-saturation offset shared by every denominator.
    pub fn food_offset(&self) -> f64 {
        1.0 + self.alpha * self.xi
    }

    /// Response denominator `1 + αξ + x + εy`.
    pub fn response_denominator(&self, x: f64, y: f64) -> f64 {
        self.food_offset() + x + self.epsilon * y
    }

    /// Unchecked right-hand side; the integrators call this directly.
    #[inline]
    pub fn rhs(&self, x: f64, y: f64) -> [f64; 2] {
        let d = self.response_denominator(x, y);
        [
            x * (1.0 - x / self.k) - x * y / d,
            self.beta * (x + self.xi) * y / d - self.delta * y,
        ]
    }

    /// Unchecked Jacobian of [`ModelParams::rhs`].
    pub fn jacobian_at(&self, x: f64, y: f64) -> Mat2 {
        let c0 = self.food_offset();
        let d = c0 + x + self.epsilon * y;
        let d2 = d * d;
        Mat2::new(
            1.0 - 2.0 * x / self.k - (c0 + self.epsilon * y) * y / d2,
            -(c0 + x) * x / d2,
            (c0 + self.epsilon * y - self.xi) * self.beta * y / d2,
            self.beta * (x + self.xi) * (c0 + x) / d2 - self.delta,
        )
    }

    /// Analytic `∂F/∂ξ`.
    pub fn d_field_d_xi(&self, x: f64, y: f64) -> [f64; 2] {
        let d = self.response_denominator(x, y);
        let d2 = d * d;
        [
            self.alpha * x * y / d2,
            self.beta * y / d - self.alpha * self.beta * (x + self.xi) * y / d2,
        ]
    }

    /// Analytic second partials `[[f1_xx, f1_xy, f1_yy], [f2_xx, f2_xy, f2_yy]]`.
    pub fn second_partials(&self, x: f64, y: f64) -> [[f64; 3]; 2] {
        let (b, e, xi) = (self.beta, self.epsilon, self.xi);
        let d = self.response_denominator(x, y);
        let d2 = d * d;
        let d3 = d2 * d;
        let f1_xx = -2.0 / self.k + 2.0 * y / d2 - 2.0 * x * y / d3;
        let f1_xy = -1.0 / d + (x + e * y) / d2 - 2.0 * e * x * y / d3;
        let f1_yy = 2.0 * e * x / d2 - 2.0 * e * e * x * y / d3;
        let f2_xx = b * (2.0 * (x + xi) * y / d3 - 2.0 * y / d2);
        let f2_xy = b * (1.0 / d - (x + xi + e * y) / d2 + 2.0 * e * (x + xi) * y / d3);
        let f2_yy = b * (2.0 * e * e * (x + xi) * y / d3 - 2.0 * e * (x + xi) / d2);
        [[f1_xx, f1_xy, f1_yy], [f2_xx, f2_xy, f2_yy]]
    }

    /// Parameters of the topologically equivalent polynomial system.
    pub fn equivalent(&self) -> EquivalentParams {
        EquivalentParams::from_model(self)
    }
}

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Finite and in the closed non-negative quadrant.
    pub fn in_phi(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.x >= 0.0 && self.y >= 0.0
    }

    pub fn checked(self) -> Result<Self> {
        if self.in_phi() {
            Ok(self)
        } else {
            Err(Error::Domain {
                x: self.x,
                y: self.y,
            })
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn dist(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Time derivative `(dx/dt, dy/dt)` at `s`.
pub fn vector_field(p: &ModelParams, s: State) -> Result<[f64; 2]> {
    let s = s.checked()?;
    Ok(p.rhs(s.x, s.y))
}

/// Jacobian of the vector field at `s`.
pub fn jacobian(p: &ModelParams, s: State) -> Result<Mat2> {
    let s = s.checked()?;
    Ok(p.jacobian_at(s.x, s.y))
}

/// Non-trivial prey nullcline `y = (k − x)(1 + αξ + x) / (k − (k − x)ε)`.
pub fn prey_nullcline_y(p: &ModelParams, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 || x > p.k {
        return Err(Error::Domain { x, y: 0.0 });
    }
    let denom = p.k - (p.k - x) * p.epsilon;
    if denom.abs() <= 1e-12 {
        return Err(Error::Singular {
            context: "prey nullcline",
            value: denom,
        });
    }
    Ok((p.k - x) * (p.food_offset() + x) / denom)
}

/// Slope `(β − δ)/(δε)` of the predator nullcline line.
pub fn predator_nullcline_slope(p: &ModelParams) -> f64 {
    (p.beta - p.delta) / (p.delta * p.epsilon)
}

/// Intercept `((β − δα)ξ − δ)/(δε)` of the predator nullcline line.
pub fn predator_nullcline_intercept(p: &ModelParams) -> f64 {
    ((p.beta - p.delta * p.alpha) * p.xi - p.delta) / (p.delta * p.epsilon)
}

/// Non-trivial predator nullcline; may be negative.
pub fn predator_nullcline_y(p: &ModelParams, x: f64) -> f64 {
    predator_nullcline_slope(p) * x + predator_nullcline_intercept(p)
}

/// Constants of the polynomial system
///
/// ```text
/// du/dτ = u [k(1 − u)(P + u + Qv) − v]
/// dv/dτ = v [R(u + M) − N(P + u + Qv)]
/// ```
///
/// obtained from `x = k u`, `y = v` and `dt = dτ / (k (P + u + Qv))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentParams {
    pub p: f64,
    pub q: f64,
    /// `βk`; the rescaling fixes this product (see [`ModelParams::equivalent`]).
    pub r: f64,
    pub n: f64,
    pub m: f64,
    pub k: f64,
}

impl EquivalentParams {
    pub fn from_model(mp: &ModelParams) -> Self {
        Self {
            p: mp.food_offset() / mp.k,
            q: mp.epsilon / mp.k,
            r: mp.beta * mp.k,
            n: mp.k * mp.delta,
            m: mp.xi / mp.k,
            k: mp.k,
        }
    }

    /// Recovers δ as `N / k`.
    pub fn delta(&self) -> f64 {
        self.n / self.k
    }

    /// Positive time-rescaling factor `k (P + u + Qv)`.
    pub fn time_factor(&self, u: f64, v: f64) -> f64 {
        self.k * (self.p + u + self.q * v)
    }
}

/// Right-hand side of the polynomial system.
pub fn equivalent_field(ep: &EquivalentParams, u: f64, v: f64) -> [f64; 2] {
    let [gu, gv] = equivalent_per_capita(ep, u, v);
    [u * gu, v * gv]
}

/// Per-capita rates `(du/dτ)/u` and `(dv/dτ)/v` of the polynomial system.
pub fn equivalent_per_capita(ep: &EquivalentParams, u: f64, v: f64) -> [f64; 2] {
    let s = ep.p + u + ep.q * v;
    [ep.k * (1.0 - u) * s - v, ep.r * (u + ep.m) - ep.n * s]
}

/// Result of the closed-form boundedness predicate `ε(1 − δ) < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedRegime {
    pub bounded: bool,
    /// `1 − ε(1 − δ)`; positive iff bounded.
    pub margin: f64,
}

pub fn is_bounded_regime(p: &ModelParams) -> BoundedRegime {
    let margin = 1.0 - p.epsilon * (1.0 - p.delta);
    BoundedRegime {
        bounded: margin > 0.0,
        margin,
    }
}

/// Tangent slope of the prey nullcline at its predator-axis intercept
/// compared with the slope of the predator nullcline line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeComparison {
    pub m_prey_axis: f64,
    pub m_pred_line: f64,
    pub two_interior_slope_ok: bool,
    /// ξ at which the two slopes coincide.
    pub xi_slope_bound: f64,
}

pub fn slope_comparison(p: &ModelParams) -> Result<SlopeComparison> {
    if !p.low_interference() {
        return Err(Error::Infeasible(format!(
            "prey nullcline has no positive predator-axis intercept for epsilon = {}",
            p.epsilon
        )));
    }
    let (a, b, d, e, k) = (p.alpha, p.beta, p.delta, p.epsilon, p.k);
    let one_m = 1.0 - e;
    let m_prey_axis = (k * one_m - p.food_offset()) / (k * one_m * one_m);
    let m_pred_line = predator_nullcline_slope(p);
    let xi_slope_bound = xi_slope_bound(a, b, d, e, k);
    Ok(SlopeComparison {
        m_prey_axis,
        m_pred_line,
        two_interior_slope_ok: m_prey_axis > m_pred_line,
        xi_slope_bound,
    })
}

/// `[k(1−ε)(δ − β(1−ε)) − δε] / (αδε)`.
pub(crate) fn xi_slope_bound(alpha: f64, beta: f64, delta: f64, epsilon: f64, k: f64) -> f64 {
    let one_m = 1.0 - epsilon;
    (k * one_m * (delta - beta * one_m) - delta * epsilon) / (alpha * delta * epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pstar(xi: f64) -> ModelParams {
        ModelParams::new(0.1, 0.319, 0.3, 0.322, xi, 15.0).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(0.0, 0.319, 0.3, 0.322, 1.0, 15.0).is_err());
        assert!(ModelParams::new(0.1, 0.3, 0.319, 0.322, 1.0, 15.0).is_err());
        assert!(ModelParams::new(0.1, 0.319, 0.3, 0.322, -1.0, 15.0).is_err());
        assert!(ModelParams::new(0.1, 0.319, 0.3, f64::NAN, 1.0, 15.0).is_err());
        assert!(ModelParams::new(0.1, 0.319, 0.3, 0.322, 0.0, 15.0).is_ok());
    }

    #[test]
    fn vector_field_examples() {
        let p = pstar(2.2);
        assert_eq!(vector_field(&p, State::new(0.0, 0.0)).unwrap(), [0.0, 0.0]);
        let f = vector_field(&p, State::new(15.0, 0.0)).unwrap();
        assert!(f[0].abs() < 1e-15 && f[1] == 0.0);
        let f = vector_field(&p, State::new(8.02768, 5.05513)).unwrap();
        assert!(f[0].abs() < 1e-4 && f[1].abs() < 1e-4);
        // D = 2.542, dx = 14/15 − 1/D, dy = 0.319·3.2/D − 0.3
        let f = vector_field(&p, State::new(1.0, 1.0)).unwrap();
        assert!((f[0] - 0.539943).abs() < 1e-5, "{f:?}");
        assert!((f[1] - 0.101574).abs() < 1e-5, "{f:?}");
    }

    #[test]
    fn vector_field_domain_error() {
        let p = pstar(2.2);
        assert!(matches!(
            vector_field(&p, State::new(f64::NAN, 1.0)),
            Err(Error::Domain { .. })
        ));
        assert!(vector_field(&p, State::new(-1.0, 1.0)).is_err());
    }

    #[test]
    fn jacobian_on_prey_axis_collapses() {
        let p = pstar(2.2);
        let j = jacobian(&p, State::new(p.k(), 0.0)).unwrap();
        let c = 1.0 + p.alpha() * p.xi() + p.k();
        assert!((j.m12 + p.k() / c).abs() < 1e-15);
        assert_eq!(j.m21, 0.0);
    }

    #[test]
    fn prey_nullcline_examples() {
        let p = pstar(2.2);
        assert_eq!(prey_nullcline_y(&p, 15.0).unwrap(), 0.0);
        assert!((prey_nullcline_y(&p, 0.0).unwrap() - 1.22 / 0.678).abs() < 1e-12);
        assert!((prey_nullcline_y(&p, 0.0).unwrap() - 1.79941).abs() < 1e-5);
        assert!((prey_nullcline_y(&p, 8.02768).unwrap() - 5.05513).abs() < 1e-3);
    }

    #[test]
    fn prey_nullcline_singular_when_high_interference() {
        // ε = 1 makes the denominator vanish at x = 0
        let p = ModelParams::new(0.1, 0.319, 0.3, 1.0, 2.2, 15.0).unwrap();
        assert!(matches!(
            prey_nullcline_y(&p, 0.0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn predator_nullcline_examples() {
        let p = pstar(2.2);
        assert!((predator_nullcline_y(&p, 0.0) - 3.47619).abs() < 1e-5);
        assert!((predator_nullcline_y(&p, 8.02768) - 5.05516).abs() < 1e-4);
        assert!((predator_nullcline_slope(&p) - 0.196687).abs() < 1e-6);
    }

    #[test]
    fn equivalent_field_examples() {
        let p = pstar(2.2);
        let ep = p.equivalent();
        assert_eq!(equivalent_field(&ep, 0.0, 0.0), [0.0, 0.0]);
        let f = equivalent_field(&ep, 8.02768 / 15.0, 5.05513);
        assert!(f[0].abs() < 1e-3 && f[1].abs() < 1e-3, "{f:?}");
        // on the prey-free line v = 0 the flow vanishes at u = 1 and the
        // predator per-capita rate is R(1 + M) − N(P + 1)
        assert_eq!(equivalent_field(&ep, 1.0, 0.0), [0.0, 0.0]);
        let g = equivalent_per_capita(&ep, 1.0, 0.0);
        let by_hand = 0.319 * 15.0 * (1.0 + 2.2 / 15.0) - 4.5 * (1.22 / 15.0 + 1.0);
        assert!((g[1] - by_hand).abs() < 1e-12);
        assert!((ep.delta() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn equivalent_field_is_rescaled_field() {
        let p = pstar(2.2);
        let ep = p.equivalent();
        for &(x, y) in &[(1.0, 1.0), (3.0, 7.5), (12.0, 0.2)] {
            let f = p.rhs(x, y);
            let g = equivalent_field(&ep, x / p.k(), y);
            let s = ep.time_factor(x / p.k(), y);
            assert!((g[0] - s * f[0] / p.k()).abs() < 1e-12);
            assert!((g[1] - s * f[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn bounded_regime_examples() {
        let b = is_bounded_regime(&pstar(2.2));
        assert!(b.bounded);
        assert!((b.margin - 0.7746).abs() < 1e-12);
        let q = ModelParams::new(0.1, 0.6, 0.5, 2.5, 2.2, 15.0).unwrap();
        let b = is_bounded_regime(&q);
        assert!(!b.bounded);
        assert!((b.margin + 0.25).abs() < 1e-12);
        let near_one = ModelParams::new(0.1, 2.0, 1.0 - 1e-12, 50.0, 1.0, 15.0).unwrap();
        assert!(is_bounded_regime(&near_one).bounded);
    }

    #[test]
    fn slope_comparison_examples() {
        let s = slope_comparison(&pstar(2.2)).unwrap();
        assert!((s.m_prey_axis - 1.29800).abs() < 1e-5);
        assert!((s.m_pred_line - 0.196687).abs() < 1e-6);
        assert!(s.two_interior_slope_ok);

        let q = ModelParams::new(0.32, 0.6, 0.45, 0.15, 1.1, 15.0).unwrap();
        assert!(!slope_comparison(&q).unwrap().two_interior_slope_ok);

        let bound = s.xi_slope_bound;
        let at = slope_comparison(&pstar(bound)).unwrap();
        assert!((at.m_prey_axis - at.m_pred_line).abs() < 1e-9);

        let high = ModelParams::new(0.1, 0.319, 0.3, 1.2, 2.2, 15.0).unwrap();
        assert!(matches!(slope_comparison(&high), Err(Error::Infeasible(_))));
    }

    #[test]
    fn serde_validates() {
        let ok = r#"{"alpha":0.1,"beta":0.319,"delta":0.3,"epsilon":0.322,"xi":2.2,"k":15.0}"#;
        let p: ModelParams = serde_json::from_str(ok).unwrap();
        assert_eq!(p, pstar(2.2));
        let bad = r#"{"alpha":0.1,"beta":0.2,"delta":0.3,"epsilon":0.322,"xi":2.2,"k":15.0}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());
    }
}
