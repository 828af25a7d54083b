use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use afmi_ffi::*;

const P: [f64; 4] = [0.1, 0.319, 0.3, 0.322];

fn model(xi: f64) -> *mut AfmiModel {
    let mut m = ptr::null_mut();
    let s = unsafe { afmi_model_new(P[0], P[1], P[2], P[3], xi, 15.0, &mut m) };
    assert_eq!(s, AfmiStatus::Ok);
    m
}

fn last_error() -> String {
    let p = afmi_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn invalid_parameter_sets_message() {
    let mut m = ptr::null_mut();
    let s = unsafe { afmi_model_new(P[0], P[1], P[2], P[3], 1.0, 0.0, &mut m) };
    assert_eq!(s, AfmiStatus::InvalidParameter);
    assert!(m.is_null());
    assert!(last_error().contains('k'));
}

#[test]
fn null_pointers_are_rejected() {
    let s = unsafe { afmi_model_new(P[0], P[1], P[2], P[3], 1.0, 15.0, ptr::null_mut()) };
    assert_eq!(s, AfmiStatus::NullPointer);
    let mut n = 0usize;
    let s = unsafe { afmi_equilibria(ptr::null(), ptr::null_mut(), 0, &mut n) };
    assert_eq!(s, AfmiStatus::NullPointer);
    assert_eq!(unsafe { afmi_trajectory_len(ptr::null()) }, 0);
    unsafe {
        afmi_model_free(ptr::null_mut());
        afmi_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn equilibria_two_pass() {
    let m = model(2.2);
    let mut n = 0usize;
    assert_eq!(
        unsafe { afmi_equilibria(m, ptr::null_mut(), 0, &mut n) },
        AfmiStatus::BufferTooSmall
    );
    assert_eq!(n, 5);
    let mut buf = vec![
        AfmiEquilibrium {
            kind: AfmiEquilibriumKind::Trivial,
            x: 0.0,
            y: 0.0,
            eig_re: [0.0; 2],
            eig_im: [0.0; 2],
            stability: AfmiStability::NonHyperbolic,
        };
        n
    ];
    assert_eq!(
        unsafe { afmi_equilibria(m, buf.as_mut_ptr(), n, &mut n) },
        AfmiStatus::Ok
    );
    let low = buf
        .iter()
        .find(|e| e.kind == AfmiEquilibriumKind::InteriorLow)
        .unwrap();
    let high = buf
        .iter()
        .find(|e| e.kind == AfmiEquilibriumKind::InteriorHigh)
        .unwrap();
    assert_eq!(low.stability, AfmiStability::Saddle);
    assert_eq!(high.stability, AfmiStability::StableFocus);
    assert!(high.eig_im[0].abs() > 0.0);
    unsafe { afmi_model_free(m) };
}

#[test]
fn rhs_vanishes_at_equilibria() {
    let m = model(1.9);
    let mut buf = [AfmiEquilibrium {
        kind: AfmiEquilibriumKind::Trivial,
        x: 0.0,
        y: 0.0,
        eig_re: [0.0; 2],
        eig_im: [0.0; 2],
        stability: AfmiStability::NonHyperbolic,
    }; 8];
    let mut n = 0;
    assert_eq!(
        unsafe { afmi_equilibria(m, buf.as_mut_ptr(), 8, &mut n) },
        AfmiStatus::Ok
    );
    for e in &buf[..n] {
        let mut f = [1.0; 2];
        assert_eq!(
            unsafe { afmi_model_rhs(m, e.x, e.y, f.as_mut_ptr()) },
            AfmiStatus::Ok
        );
        assert!(f[0].abs() < 1e-9 && f[1].abs() < 1e-9, "{e:?} {f:?}");
    }
    let mut f = [0.0; 2];
    assert_eq!(
        unsafe { afmi_model_rhs(m, -1.0, 1.0, f.as_mut_ptr()) },
        AfmiStatus::Domain
    );
    unsafe { afmi_model_free(m) };
}

#[test]
fn simulate_reaches_prey_free_state() {
    let m = model(2.469);
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { afmi_simulate(m, 1.0, 0.5, 0.0, &mut t) },
        AfmiStatus::Ok
    );
    let len = unsafe { afmi_trajectory_len(t) };
    assert!(len > 2);
    let (mut tt, mut x, mut y) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { afmi_trajectory_sample(t, 0, &mut tt, &mut x, &mut y) },
        AfmiStatus::Ok
    );
    assert_eq!((tt, x, y), (0.0, 1.0, 0.5));
    assert_eq!(
        unsafe { afmi_trajectory_sample(t, len, &mut tt, &mut x, &mut y) },
        AfmiStatus::BufferTooSmall
    );
    let mut term = AfmiTermination::Escaped;
    let mut pf = -1;
    assert_eq!(
        unsafe { afmi_trajectory_termination(t, &mut term, &mut pf) },
        AfmiStatus::Ok
    );
    assert!(
        (term == AfmiTermination::Converged && pf == 1) || term == AfmiTermination::ReachedAxis,
        "{term:?}"
    );
    unsafe {
        afmi_trajectory_free(t);
        afmi_model_free(m);
    }
}

#[test]
fn locate_events() {
    let m = model(1.0);
    let mut ev = AfmiEvent {
        kind: AfmiBifurcation::Hopf,
        xi_star: 0.0,
        x: 0.0,
        y: 0.0,
        residual: 0.0,
    };
    assert_eq!(
        unsafe { afmi_locate(m, AfmiBifurcation::SaddleNode, 2.3, 2.6, &mut ev) },
        AfmiStatus::Ok
    );
    assert!((ev.xi_star - 2.4827835).abs() < 1e-6);
    assert_eq!(
        unsafe { afmi_locate(m, AfmiBifurcation::Hopf, 2.4, 2.48, &mut ev) },
        AfmiStatus::Ok
    );
    assert!((ev.xi_star - 2.4775841).abs() < 1e-6);
    assert_eq!(
        unsafe { afmi_locate(m, AfmiBifurcation::SaddleNode, 1.0, 1.5, &mut ev) },
        AfmiStatus::NoBracket
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { afmi_model_set_xi(m, -1.0) },
        AfmiStatus::InvalidParameter
    );
    unsafe { afmi_model_free(m) };
}

#[test]
fn header_is_current() {
    let h =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/afmi.h")).unwrap();
    for name in [
        "afmi_model_new",
        "afmi_model_free",
        "afmi_equilibria",
        "afmi_simulate",
        "afmi_trajectory_sample",
        "afmi_locate",
        "afmi_last_error",
        "typedef struct AfmiModel AfmiModel;",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_staticlib() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let tmp = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let target = tmp.parent().unwrap();
    let lib = ["debug", "release"]
        .iter()
        .map(|p| target.join(p).join("libafmi_ffi.a"))
        .find(|p| p.exists())
        .expect("libafmi_ffi.a not built");
    let dir = env!("CARGO_MANIFEST_DIR");
    let exe = tmp.join("afmi_smoke");
    let st = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(format!("{dir}/include"))
        .arg(format!("{dir}/tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 2.48278"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
