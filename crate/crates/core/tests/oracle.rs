use std::f64::consts::{PI, SQRT_2};

use lamegap::factors::{definiteness_check, free_constants, leading_factor_data};
use lamegap::geometry::Monomial;
use lamegap::oracle::{extrapolate_starred, fit_k_star, solve_full, sweep, FullSolution, MeshParams, OracleConfig, SWEEP_EPS};
use lamegap::{make_family, BoundaryData, Error, FactorData, Family, LameConstants};

fn e1() -> BoundaryData {
    make_family(Family::E1, 1.0, 2, 2).unwrap()
}

fn coarse() -> OracleConfig {
    OracleConfig { mesh: MeshParams { n_layers: 4, angular_res: 64, neck_scale: 0.1 }, ..Default::default() }
}

fn e1_sweep() -> Vec<FullSolution> {
    sweep(&e1(), &SWEEP_EPS, &OracleConfig::default()).unwrap()
}

#[test]
fn energy_matrix_is_symmetric_and_definite_at_every_gap() {
    for s in e1_sweep() {
        let a = &s.factors.a;
        for i in 0..3 {
            for j in 0..i {
                let scale = (a[(i, i)] * a[(j, j)]).sqrt();
                assert!((a[(i, j)] - a[(j, i)]).abs() <= 1e-8 * scale, "eps {}", s.eps());
            }
        }
        let def = definiteness_check(&s.factors);
        assert!(def.passed && def.lambda_min > 0.0);
        assert!(s.flux_residual < 1e-10);
    }
}

#[test]
fn translation_energies_blow_up_like_inverse_root_gap() {
    let sols = e1_sweep();
    let lame = LameConstants::unit();
    for alpha in 1..=2 {
        let l = if alpha == 1 { lame.mu } else { lame.lambda + 2.0 * lame.mu };
        let c = SQRT_2 * PI * l;
        // a = c eps^(-1/2) + K: the scaled excess must be nearly constant across the sweep.
        let k: Vec<f64> = sols.iter().map(|s| s.factors.a[(alpha - 1, alpha - 1)] - c / s.eps().sqrt()).collect();
        let spread = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - k.iter().cloned().fold(f64::INFINITY, f64::min);
        let smallest = sols.last().unwrap().factors.a[(alpha - 1, alpha - 1)];
        assert!(spread < 0.1 * smallest, "alpha {alpha}: spread {spread} of {k:?}");
    }
}

#[test]
fn parity_zeros_in_q() {
    let cfg = coarse();
    let e2 = make_family(Family::E2, 1.0, 3, 2).unwrap();
    let e3 = make_family(Family::E3, 1.0, 1, 2).unwrap();
    let q2 = solve_full(&e2, 1e-2, &cfg).unwrap().factors.q;
    let q3 = solve_full(&e3, 1e-2, &cfg).unwrap().factors.q;
    assert!(q2[1].abs() <= 1e-10 * q2.amax(), "{q2:?}");
    assert!(q3[0].abs() <= 1e-10 * q3.amax() && q3[2].abs() <= 1e-10 * q3.amax(), "{q3:?}");
    let q1 = solve_full(&e1(), 1e-2, &cfg).unwrap().factors;
    assert!(q1.a[(0, 1)].abs() <= 1e-10 * q1.a[(0, 0)]);
}

#[test]
fn constants_equal_free_constants_bitwise() {
    let s = solve_full(&e1(), 2e-2, &coarse()).unwrap();
    let (x, _) = free_constants(&s.factors).unwrap();
    assert_eq!(x, s.constants);
}

#[test]
fn doubling_the_datum_doubles_q_exactly() {
    let cfg = coarse();
    let phi = e1();
    let s1 = solve_full(&phi, 2e-2, &cfg).unwrap();
    let s2 = solve_full(&phi.scaled(2.0), 2e-2, &cfg).unwrap();
    assert_eq!(s2.factors.q, &s1.factors.q * 2.0);
    assert_eq!(s2.factors.a, s1.factors.a);
}

#[test]
fn datum_not_vanishing_at_origin_is_rejected() {
    let phi = BoundaryData::custom(2, vec![vec![Monomial::new(1.0, vec![0])], Vec::new()], 1.0, 2).unwrap();
    let err = solve_full(&phi, 1e-2, &coarse()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)), "{err}");
}

#[test]
fn oracle_is_two_dimensional_only() {
    let phi = make_family(Family::E1, 1.0, 2, 3).unwrap();
    assert!(matches!(solve_full(&phi, 1e-2, &coarse()), Err(Error::Dimension(_))));
}

#[test]
fn q_sign_matches_negated_leading_functional() {
    let sols = e1_sweep();
    let s = sols.last().unwrap();
    let profile = s.domain.profile(0.2).unwrap();
    let lead = leading_factor_data(&profile, &e1(), &LameConstants::unit(), 0.2).unwrap();
    assert!(s.factors.q[0] < 0.0 && lead.q[0] < 0.0);
    assert!(s.factors.q[1] < 0.0 && lead.q[1] < 0.0);
}

#[test]
fn extrapolated_limits_are_finite_off_the_translation_diagonal() {
    let sols = e1_sweep();
    let samples: Vec<(f64, &FactorData)> = sols.iter().map(|s| (s.eps(), &s.factors)).collect();
    let st = extrapolate_starred(&samples).unwrap();
    assert!(st.data.eps.is_none());
    assert!(st.data.a[(0, 0)].is_infinite() && st.data.a[(1, 1)].is_infinite());
    assert!(st.data.a[(2, 2)].is_finite() && st.data.a[(2, 2)] > 0.0);
    assert!(st.data.q.iter().all(|v| v.is_finite()));
    // The limit lies beyond the last sample in the direction of the trend.
    let last = sols.last().unwrap().factors.a[(2, 2)];
    let prev = sols[sols.len() - 2].factors.a[(2, 2)];
    assert!((st.data.a[(2, 2)] - last) * (last - prev) >= 0.0);
    let k = fit_k_star(&samples, &LameConstants::unit(), &[1.0]).unwrap();
    assert_eq!(k.len(), 2);
}

#[test]
fn dump_has_a_block_per_field() {
    let s = solve_full(&e1(), 4e-2, &coarse()).unwrap();
    let text = s.dump_text();
    for name in ["u0", "u1", "u2", "u3", "u"] {
        assert!(text.contains(&format!("\nfield {name}\n")), "{name}");
    }
}
