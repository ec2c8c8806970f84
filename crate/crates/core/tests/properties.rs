use lamegap::expansion::bounds_segment;
use lamegap::factors::{f3, free_constants, scaled_determinant, solve_cramer, solve_direct, substitute_column};
use lamegap::fit::richardson_fit2;
use lamegap::oracle::BandedSpd;
use lamegap::quadrature::{closed_form_convex_2d, moment_integral};
use lamegap::{u_bar, BoundsInput, FactorData, Family, GapProfile, LameConstants, Provenance};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spd(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |i, j| entries[(i * n + j) % entries.len()]);
    &b * b.transpose() + DMatrix::identity(n, n) * 0.5
}

fn lame() -> impl Strategy<Value = LameConstants> {
    (0.1f64..5.0, 0.1f64..5.0).prop_map(|(l, m)| LameConstants::new(l, m, None, 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cramer_agrees_with_factorization(n in 1usize..=6, e in prop::collection::vec(-1.0f64..1.0, 36), q in prop::collection::vec(-1.0f64..1.0, 6)) {
        let a = spd(n, &e);
        let q = DVector::from_column_slice(&q[..n]);
        let xc = solve_cramer(&a, &q).unwrap();
        let xd = solve_direct(&a, &q).unwrap();
        prop_assert!((&xc - &xd).norm() <= 1e-10 * xd.norm().max(1e-12));
        prop_assert!((&a * &xd - &q).norm() <= 1e-10 * q.norm().max(1.0));
    }

    #[test]
    fn substituted_determinant_is_linear_in_the_column(
        n in 2usize..=6,
        e in prop::collection::vec(-1.0f64..1.0, 36),
        y1 in prop::collection::vec(-1.0f64..1.0, 6),
        y2 in prop::collection::vec(-1.0f64..1.0, 6),
        c in -3.0f64..3.0,
        col in 0usize..6,
    ) {
        let a = spd(n, &e);
        let alpha = 1 + col % n;
        let y1 = DVector::from_column_slice(&y1[..n]);
        let y2 = DVector::from_column_slice(&y2[..n]);
        let d = |y: &DVector<f64>| substitute_column(&a, y, alpha).unwrap().determinant();
        let lhs = d(&(&y1 + &y2 * c));
        let rhs = d(&y1) + c * d(&y2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (d(&y1).abs() + (c * d(&y2)).abs()).max(1e-12));
        let s = substitute_column(&a, &y1, alpha).unwrap();
        prop_assert_eq!(s.restore(), a);
    }

    #[test]
    fn cramer_ratios_match_free_constants(e in prop::collection::vec(-1.0f64..1.0, 9), q in prop::collection::vec(-1.0f64..1.0, 3)) {
        let a = spd(3, &e);
        let fd = FactorData::new(2, a.clone(), DVector::from_column_slice(&q), Provenance::User, Some(1e-2)).unwrap();
        let (x, diag) = free_constants(&fd).unwrap();
        let det = scaled_determinant(&a);
        for alpha in 1..=3 {
            let ratio = f3(&fd, alpha).unwrap().determinant() / det;
            prop_assert!((ratio - x[alpha - 1]).abs() <= 1e-9 * x.amax().max(1e-12));
        }
        prop_assert!(diag.agreement <= 1e-10);
    }

    #[test]
    fn free_constants_scale_with_the_datum(e in prop::collection::vec(-1.0f64..1.0, 9), q in prop::collection::vec(-1.0f64..1.0, 3), c in -10.0f64..10.0) {
        let fd = FactorData::new(2, spd(3, &e), DVector::from_column_slice(&q), Provenance::User, Some(1e-2)).unwrap();
        let (x, _) = free_constants(&fd).unwrap();
        let (xc, _) = free_constants(&fd.scaled_q(c)).unwrap();
        prop_assert!((&xc - &x * c).amax() <= 1e-12 * (x.amax() * c.abs()).max(1e-300) + 1e-300);
    }

    #[test]
    fn banded_cholesky_matches_dense(n in 2usize..40, bw in 1usize..6, e in prop::collection::vec(-1.0f64..1.0, 64), b in prop::collection::vec(-1.0f64..1.0, 40)) {
        let bw = bw.min(n - 1);
        let mut band = BandedSpd::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                let v = e[(i * 7 + j * 3) % e.len()];
                band.add(i, j, v);
                dense[(i, j)] += v;
                dense[(j, i)] += v;
            }
            let diag = 2.0 * bw as f64 + 1.0;
            band.add(i, i, diag);
            dense[(i, i)] += diag;
        }
        let rhs = &b[..n];
        let x = band.clone().factor().unwrap().solve(rhs);
        let xd = dense.clone().cholesky().unwrap().solve(&DVector::from_column_slice(rhs));
        let err = x.iter().zip(xd.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * xd.amax().max(1.0));
        let y = band.mul_vec(&x);
        let r = y.iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(r <= 1e-12);
    }

    #[test]
    fn two_term_extrapolation_recovers_the_limit(v_star in -5.0f64..5.0, c in 0.5f64..5.0, p in 0.4f64..1.5) {
        let eps: [f64; 5] = [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3];
        let v: Vec<f64> = eps.iter().map(|e| v_star + c * e.powf(p)).collect();
        let f = richardson_fit2(&eps, &v).unwrap();
        prop_assert!((f.v_star - v_star).abs() <= 1e-4 * (1.0 + v_star.abs()), "{f:?}");
    }

    #[test]
    fn energy_pairing_is_symmetric(l in lame(), g in prop::collection::vec(-1.0f64..1.0, 8)) {
        let a = DMatrix::from_column_slice(2, 2, &g[..4]);
        let b = DMatrix::from_column_slice(2, 2, &g[4..]);
        let ab = l.pairing(&a, &b);
        prop_assert!((ab - l.pairing(&b, &a)).abs() <= 1e-14 * (1.0 + ab.abs()));
        prop_assert!(l.pairing(&a, &a) >= -1e-14);
    }

    #[test]
    fn aux_gradients_match_finite_differences(l in lame(), x1 in -0.9f64..0.9, frac in 0.1f64..0.9, alpha in 1usize..=3) {
        let profile = GapProfile::quadratic(&[2.0], 1e-2, 1.0).unwrap();
        let x = [x1, frac * profile.delta(&[x1]).unwrap()];
        let (_, g) = u_bar(alpha, &profile, &l, None, &x).unwrap();
        for j in 0..2 {
            let h = 1e-5 * profile.delta(&[x1]).unwrap();
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (up, _) = u_bar(alpha, &profile, &l, None, &xp).unwrap();
            let (um, _) = u_bar(alpha, &profile, &l, None, &xm).unwrap();
            for i in 0..2 {
                let fd = (up[i] - um[i]) / (2.0 * h);
                prop_assert!((fd - g[(i, j)]).abs() <= 1e-5 * (1.0 + g.amax()), "alpha {alpha} ({i},{j}): {fd} vs {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn lower_certificate_never_exceeds_upper(k1 in 0.2f64..2.0, ratio in 1.0f64..4.0, m in 4u32..=6, eps in 1e-8f64..1e-2) {
        let input = BoundsInput::new(Family::E1, 2, m, 2, 1.0, (k1, k1 * ratio), LameConstants::unit());
        let b = bounds_segment(&input).unwrap();
        prop_assert_eq!(b.lower.rate, b.upper.rate);
        let lo = b.lower.evaluate(eps).unwrap().value;
        let hi = b.upper.evaluate(eps).unwrap().value;
        prop_assert!(0.0 < lo && lo <= hi * (1.0 + 1e-12), "{lo} > {hi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn moment_integral_matches_the_arctan_form(tau in 0.5f64..4.0, eps in 1e-6f64..1e-2) {
        let profile = GapProfile::quadratic(&[tau], eps, 1.0).unwrap();
        let v = moment_integral(&profile, 0, 1.0).unwrap().value;
        let s = (2.0 / (tau * eps)).sqrt();
        let exact = 2.0 * s * (1.0 / s / eps).atan();
        prop_assert!((v - exact).abs() <= 1e-8 * exact, "{v} vs {exact}");
        let two_term = closed_form_convex_2d(tau, 1.0, eps);
        prop_assert!((v - two_term).abs() <= 4.0 * eps.sqrt() / tau.sqrt() + 1e-9);
    }

    #[test]
    fn moment_integral_grows_as_the_gap_closes(eps in 1e-6f64..1e-2, k in 0u32..3) {
        let p = GapProfile::quadratic(&[2.0], eps, 1.0).unwrap();
        let a = moment_integral(&p, k, 1.0).unwrap().value;
        let b = moment_integral(&p.with_eps(eps / 2.0), k, 1.0).unwrap().value;
        prop_assert!(b > a);
    }
}
