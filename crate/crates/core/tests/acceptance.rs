//! Acceptance criteria 1 to 11, one line each. Runs without the libtest harness so the
//! lines always appear in `cargo test` output; any failing criterion fails the target.

use lamegap::verify::{tol, Verifier, ALL};

fn main() {
    println!(
        "pinned tolerances: c1 abs {:e} ratio {}, c2 {:e}/{:e}, c3 slope {} r2 {}, c4 {:e}, c5 {:e}, c6 {}, \
         c7 slack {}, c8 {}, c9 {} +- {}, c10 {}, c11 fd {:e} interp {:e} patch {:e}",
        tol::CLOSED_FORM_2D_ABS,
        tol::CLOSED_FORM_2D_RATIO,
        tol::RADIAL_3D_REL,
        tol::TWO_TERM_3D_REL,
        tol::RATE_SLOPE,
        tol::LOG_R2,
        tol::PARITY_ABS,
        tol::CRAMER_REL,
        tol::LEADING_COEF_REL,
        tol::Q_BRACKET_SLACK,
        tol::EXPANSION_REL,
        tol::BLOWUP_SLOPE,
        tol::BLOWUP_SLOPE_TOL,
        tol::REMAINDER_SLOPE_TOL,
        tol::FD_REL,
        tol::INTERP_ABS,
        tol::PATCH_ABS,
    );
    let v = Verifier::default();
    let reports = v.run_all(&ALL).expect("criterion ids are valid");
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed", reports.len());
    if passed != reports.len() {
        std::process::exit(1);
    }
}
