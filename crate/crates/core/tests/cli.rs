use std::path::Path;
use std::process::{Command, Output};

use afmi_core::bifurcation::BifurcationEvent;
use afmi_core::cli::{
    BasinReport, CaseReport, EquilibriaReport, ManifoldReport, Nullclines, RegimeMap,
    SimulationReport, StabilityListing, SweepReport,
};
use afmi_core::equilibria::EquilibriumKind;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tempfile::TempDir;

const PSTAR: [&str; 10] = [
    "--alpha",
    "0.1",
    "--beta",
    "0.319",
    "--delta",
    "0.3",
    "--epsilon",
    "0.322",
    "--k",
    "15",
];

fn afmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afmi"))
        .args(args)
        .env_remove("AFMI_THREADS")
        .output()
        .unwrap()
}

fn with_pstar<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&PSTAR);
    v
}

fn ok(out: &Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) -> T {
    let v: T = serde_json::from_str(text).unwrap();
    let again: T = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    v
}

#[test]
fn saddle_node_json() {
    let out = ok(&afmi(&with_pstar(&[
        "bifurcate",
        "--kind",
        "saddle-node",
        "--lo",
        "2.3",
        "--hi",
        "2.6",
    ])));
    let ev: BifurcationEvent = round_trip(&out);
    assert!((ev.xi_star - 2.4828).abs() < 5e-4, "{}", ev.xi_star);
}

#[test]
fn case_six_report() {
    let out = ok(&afmi(&["case", "--id", "6"]));
    let rep: CaseReport = round_trip(&out);
    let e2 = rep
        .equilibria
        .iter()
        .find(|e| e.kind == EquilibriumKind::InteriorHigh)
        .unwrap();
    assert!((e2.location.x - 5.26541).abs() < 1e-3);
    assert!((e2.location.y - 5.34353).abs() < 1e-3);
    assert!((e2.eigenvalues[0].re - 0.000645).abs() < 1e-4);
    assert_eq!(rep.events.len(), 1);
}

#[test]
fn case_presets_match_golden() {
    let golden: serde_json::Value =
        serde_json::from_str(include_str!("golden/case_presets.json")).unwrap();
    for g in golden.as_array().unwrap() {
        let id = g["id"].as_u64().unwrap().to_string();
        let rep: CaseReport = serde_json::from_str(&ok(&afmi(&["case", "--id", &id]))).unwrap();
        let p = &rep.params;
        let got = [p.xi(), p.alpha(), p.beta(), p.delta(), p.epsilon(), p.k()];
        let want = ["xi", "alpha", "beta", "delta", "epsilon", "k"].map(|k| g[k].as_f64().unwrap());
        assert_eq!(got, want, "case {id}");
        assert_eq!(rep.id.to_string(), id);
    }
    assert_eq!(afmi(&["case", "--id", "7"]).status.code(), Some(2));
}

#[test]
fn empty_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let out = afmi(&["equilibria", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[params]") && err.contains("alpha"), "{err}");
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(afmi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(afmi(&["equilibria", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(afmi(&with_pstar(&["equilibria"])).status.code(), Some(2));
    assert_eq!(
        afmi(&with_pstar(&["sweep", "--xi", "1.0"])).status.code(),
        Some(2)
    );
    assert_eq!(
        afmi(&with_pstar(&[
            "equilibria",
            "--xi",
            "1",
            "--format",
            "csv",
            "--k",
            "-1"
        ]))
        .status
        .code(),
        Some(2)
    );
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "xi = 1.0\n[params]\nalpha = 0.1\ncolour = 3\n").unwrap();
    assert_eq!(
        afmi(&["equilibria", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("no/such/dir/out.json");
    let out = afmi(&with_pstar(&[
        "equilibria",
        "--xi",
        "1",
        "-o",
        missing.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_afmi"))
        .args(with_pstar(&["equilibria", "--xi", "1"]))
        .env("AFMI_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let out = afmi(&with_pstar(&[
        "bifurcate",
        "--kind",
        "saddle-node",
        "--lo",
        "1.0",
        "--hi",
        "1.5",
    ]));
    assert_eq!(out.status.code(), Some(3));
    let out = afmi(&with_pstar(&["manifold", "--xi", "1.0"]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    assert_eq!(afmi(&["--help"]).status.code(), Some(0));
    assert_eq!(afmi(&["case", "--help"]).status.code(), Some(0));
}

#[test]
fn portrait_svg_is_deterministic_with_two_interior_glyphs() {
    let args = with_pstar(&["equilibria", "--xi", "2.2", "--format", "svg"]);
    let a = ok(&afmi(&args));
    let b = ok(&afmi(&args));
    assert_eq!(a, b);
    assert_eq!(a.matches("class=\"glyph interior ").count(), 2);
    assert!(a.contains("<svg") && a.contains("version=\"1.1\""));
    assert!(a.contains("layer nullclines"));
    let m = ok(&afmi(&with_pstar(&[
        "manifold", "--xi", "2.2", "--format", "svg",
    ])));
    assert!(m.contains("layer manifolds"));
    let s = ok(&afmi(&with_pstar(&[
        "simulate", "--xi", "2.2", "--x0", "10", "--y0", "4", "--format", "svg",
    ])));
    assert!(s.contains("layer trajectories"));
}

#[test]
fn regime_map_svg_has_three_curves() {
    let svg = ok(&afmi(&with_pstar(&[
        "regime-map",
        "--eps-from",
        "0.05",
        "--eps-to",
        "0.6",
        "--xi-from",
        "0",
        "--xi-to",
        "4",
        "--xi-steps",
        "41",
        "--format",
        "svg",
    ])));
    assert_eq!(svg.matches("<polyline class=\"regime-curve").count(), 3);
}

fn write_config(dir: &Path) -> String {
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        "xi = 1.5\n\n[params]\nalpha = 0.2\nbeta = 0.5\ndelta = 0.25\nepsilon = 0.4\nk = 12.0\n",
    )
    .unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn flags_override_file_per_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path());
    let file = [1.5, 0.2, 0.5, 0.25, 0.4, 12.0];
    let flags = [
        ("--xi", 1.7),
        ("--alpha", 0.15),
        ("--beta", 0.6),
        ("--delta", 0.3),
        ("--epsilon", 0.35),
        ("--k", 14.0),
    ];
    for (i, (flag, v)) in flags.iter().enumerate() {
        let vs = v.to_string();
        let out = ok(&afmi(&["equilibria", "--config", &cfg, flag, &vs]));
        let rep: EquilibriaReport = serde_json::from_str(&out).unwrap();
        let p = rep.params;
        let got = [p.xi(), p.alpha(), p.beta(), p.delta(), p.epsilon(), p.k()];
        let mut want = file;
        want[i] = *v;
        assert_eq!(got, want, "{flag}");
    }
    let out = ok(&afmi(&["equilibria", "--config", &cfg]));
    let rep: EquilibriaReport = serde_json::from_str(&out).unwrap();
    assert_eq!(rep.params.xi(), 1.5);
}

#[test]
fn output_file_and_csv_headers() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("traj.csv");
    let out = afmi(&with_pstar(&[
        "simulate",
        "--xi",
        "2.2",
        "--x0",
        "10",
        "--y0",
        "4",
        "-o",
        path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,x,y\n"));
    let sweep = ok(&afmi(&with_pstar(&[
        "sweep",
        "--xi-from",
        "1",
        "--xi-to",
        "3",
        "--xi-steps",
        "21",
    ])));
    assert!(sweep.starts_with("xi,x1,y1,stab1,x2,y2,stab2,events\n"));
    let man = ok(&afmi(&with_pstar(&["manifold", "--xi", "2.2"])));
    assert!(man.starts_with("branch,x,y\n"));
}

#[test]
fn every_json_report_round_trips() {
    let j = |args: &[&str]| {
        let mut v = with_pstar(args);
        v.extend(["--format", "json"]);
        ok(&afmi(&v))
    };
    round_trip::<EquilibriaReport>(&j(&["equilibria", "--xi", "2.2"]));
    round_trip::<StabilityListing>(&j(&["stability", "--xi", "2.2"]));
    round_trip::<Nullclines>(&j(&["nullclines", "--xi", "2.2"]));
    round_trip::<SimulationReport>(&j(&["simulate", "--xi", "2.2", "--x0", "10", "--y0", "4"]));
    round_trip::<ManifoldReport>(&j(&["manifold", "--xi", "2.2"]));
    round_trip::<BasinReport>(&j(&["basin", "--xi", "2.2", "--nx", "5", "--ny", "4"]));
    round_trip::<SweepReport>(&j(&[
        "sweep",
        "--xi-from",
        "1",
        "--xi-to",
        "3",
        "--xi-steps",
        "41",
    ]));
    round_trip::<BifurcationEvent>(&j(&[
        "bifurcate",
        "--kind",
        "hopf",
        "--lo",
        "2.4",
        "--hi",
        "2.478",
    ]));
    round_trip::<RegimeMap>(&j(&["regime-map"]));
    round_trip::<CaseReport>(&ok(&afmi(&["case", "--id", "5"])));
}

#[test]
fn simulate_reports_expected_attractors() {
    let rep: SimulationReport = serde_json::from_str(&ok(&afmi(&with_pstar(&[
        "simulate", "--xi", "2.2", "--x0", "10", "--y0", "4", "--format", "json",
    ]))))
    .unwrap();
    assert_eq!(
        rep.attractor,
        afmi_core::integrate::AttractorId::InteriorEq(1)
    );
}
