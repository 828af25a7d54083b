#![allow(dead_code)]

use afmi_core::equilibria::{find_kind, interior_equilibria, Equilibrium, EquilibriumKind};
use afmi_core::model::ModelParams;
use proptest::prelude::*;

pub fn pstar(xi: f64) -> ModelParams {
    ModelParams::new(0.1, 0.319, 0.3, 0.322, xi, 15.0).unwrap()
}

pub fn interior(p: &ModelParams, kind: EquilibriumKind) -> Equilibrium {
    find_kind(&interior_equilibria(p), kind)
        .unwrap_or_else(|| panic!("no {kind:?} at xi = {}", p.xi()))
}

/// Valid parameter sets over a broad box around the reference values.
pub fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.01f64..0.6,
        0.15f64..1.0,
        0.05f64..0.95,
        0.02f64..0.95,
        0.0f64..4.0,
        3.0f64..30.0,
    )
        .prop_map(|(a, b, dfrac, e, xi, k)| ModelParams::new(a, b, b * dfrac, e, xi, k).unwrap())
}

/// Parameter sets whose two-interior window is nonempty, with ξ inside it.
pub fn two_interior_params() -> impl Strategy<Value = ModelParams> {
    (params(), 0.02f64..0.98).prop_filter_map("needs a two-interior window", |(p, u)| {
        let w = afmi_core::equilibria::two_interior_window(&p)?;
        let hi = w.xi_high?;
        if hi - w.xi_low <= 1e-3 {
            return None;
        }
        let q = p.with_xi(w.xi_low + u * (hi - w.xi_low)).ok()?;
        (interior_equilibria(&q).len() == 2).then_some(q)
    })
}

pub fn rel_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
