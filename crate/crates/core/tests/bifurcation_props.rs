mod common;

use afmi_core::bifurcation::{
    locate_homoclinic, locate_hopf, locate_saddle_node, locate_transcritical, sweep,
    BifurcationKind, Diagnostics,
};
use afmi_core::equilibria::{interior_equilibria, EquilibriumKind};
use afmi_core::manifolds::ManifoldSettings;
use common::*;

#[test]
fn saddle_node_window_edges() {
    let ev = locate_saddle_node(&pstar(0.0), (2.3, 2.6)).unwrap();
    let Diagnostics::SaddleNode {
        root_separation,
        min_abs_eigenvalue,
        ..
    } = ev.diagnostics
    else {
        panic!("wrong diagnostics");
    };
    assert!(root_separation < 1e-4);
    assert!(min_abs_eigenvalue < 1e-4);
    assert!((2.3..=2.6).contains(&ev.xi_star));
    assert_eq!(interior_equilibria(&pstar(ev.xi_star - 1e-4)).len(), 2);
    assert_eq!(interior_equilibria(&pstar(ev.xi_star + 1e-4)).len(), 0);
}

#[test]
fn hopf_real_part_changes_sign() {
    let ev = locate_hopf(&pstar(0.0), (2.4, 2.478)).unwrap();
    let e_lo = interior(&pstar(ev.xi_star - 1e-3), EquilibriumKind::InteriorHigh);
    let e_hi = interior(&pstar(ev.xi_star + 1e-3), EquilibriumKind::InteriorHigh);
    assert!(e_lo.eigenvalues[0].re < 0.0 && e_hi.eigenvalues[0].re > 0.0);
    assert!(e_lo.eigenvalues[0].im.abs() > 1e-3 && e_hi.eigenvalues[0].im.abs() > 1e-3);
}

#[test]
fn hopf_and_homoclinic_inside_two_interior_window() {
    let base = pstar(0.0);
    let tc = locate_transcritical(&base).unwrap().xi_star;
    let sn = locate_saddle_node(&base, (2.3, 2.6)).unwrap().xi_star;
    let hopf = locate_hopf(&base, (2.4, 2.478)).unwrap().xi_star;
    let hom = locate_homoclinic(&base, (2.46, 2.48), &ManifoldSettings::default())
        .unwrap()
        .xi_star;
    for x in [hopf, hom] {
        assert!(tc < x && x < sn, "{x} outside ({tc}, {sn})");
    }
    assert!(hom < hopf);
}

#[test]
fn transcritical_crossing_is_linear() {
    let base = pstar(0.0);
    let xs = locate_transcritical(&base).unwrap().xi_star;
    // the branch passing through the prey-free state is the smaller root
    let root = |xi: f64| {
        let q = afmi_core::equilibria::quadratic_coefficients(&pstar(xi));
        q.real_roots().unwrap().0
    };
    let h = 1e-3;
    let (l, m, r) = (root(xs - h), root(xs), root(xs + h));
    assert!(m.abs() < 1e-9, "{m}");
    let slope_l = (m - l) / h;
    let slope_r = (r - m) / h;
    assert!(slope_l.abs() > 1e-3 && slope_l.is_finite());
    assert!(
        (slope_l - slope_r).abs() < 1e-2 * slope_l.abs(),
        "{slope_l} vs {slope_r}"
    );
}

#[test]
fn sweep_events_and_ordering() {
    let d = sweep(&pstar(0.0), (0.5, 3.0), 500).unwrap();
    let kinds: Vec<_> = d.events.iter().map(|e| e.kind).collect();
    assert_eq!(
        kinds,
        [
            BifurcationKind::Transcritical,
            BifurcationKind::Hopf,
            BifurcationKind::SaddleNode
        ]
    );
    assert!((d.events[0].xi_star - 1.6105).abs() < 1e-3);
    assert!(d.events[1].xi_star > 2.4 && d.events[1].xi_star < 2.478);
    assert!((d.events[2].xi_star - 2.4828).abs() < 1e-3);
    assert!(d.rows.windows(2).all(|w| w[1].xi > w[0].xi));
    let rev = sweep(&pstar(0.0), (3.0, 0.5), 500).unwrap();
    assert_eq!(rev.events.len(), d.events.len());
    for (a, b) in d.events.iter().zip(&rev.events) {
        assert_eq!(a.kind, b.kind);
        assert!((a.xi_star - b.xi_star).abs() < 1e-9);
    }
    let empty = sweep(&pstar(0.0), (2.6, 3.0), 40).unwrap();
    assert!(empty.rows.iter().all(|r| r.interiors.is_empty()));
}
