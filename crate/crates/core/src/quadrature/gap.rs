use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use super::engine::{gauss_legendre, integrate_adaptive, NeumaierSum};
use super::{QuadResult, QuadSettings};
use crate::aux_fields::{lame_rate_constant, LameConstants};
use crate::boundary::{basis_count, BoundaryData};
use crate::error::{Error, Result};
use crate::geometry::GapProfile;

/// Radial break points: dyadic rings from `rad` down to the crossover scale, then the core.
fn radial_breaks(rad: f64, scale: f64) -> Vec<f64> {
    let mut b = vec![rad];
    let mut r = rad;
    while r * 0.5 >= scale && b.len() < 200 {
        r *= 0.5;
        b.push(r);
    }
    b.push(0.0);
    b
}

struct Piece {
    value: f64,
    err: f64,
    evals: usize,
    converged: bool,
}

/// Integrates a one-dimensional radial integrand over [0, rad] ring by ring. The core
/// cell [0, r_J] is rescaled to y = s / scale.
fn radial_rings<F>(g: &F, rad: f64, scale: f64, s: &QuadSettings) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let breaks = radial_breaks(rad, scale);
    let nseg = breaks.len() - 1;
    let per = (s.max_evals / nseg).max(1000);
    let abs_share = s.abs_tol / nseg as f64;
    let pieces: Vec<Piece> = (0..nseg)
        .into_par_iter()
        .map(|i| {
            let (hi, lo) = (breaks[i], breaks[i + 1]);
            let r = if lo == 0.0 {
                let sc = scale.min(hi).max(f64::MIN_POSITIVE);
                let core = integrate_adaptive(|y| sc * g(sc * y), 0.0, hi / sc, abs_share, s.rel_tol, per);
                core
            } else {
                integrate_adaptive(g, lo, hi, abs_share, s.rel_tol, per)
            };
            Piece { value: r.value, err: r.err, evals: r.n_evals, converged: r.converged }
        })
        .collect();
    let mut total = NeumaierSum::default();
    let mut err = 0.0;
    let mut evals = 0;
    let mut ok = true;
    for p in &pieces {
        total.add(p.value);
        err += p.err;
        evals += p.evals;
        ok &= p.converged;
    }
    if !ok {
        return Err(Error::Tolerance(format!("gap integral did not converge within {} evaluations", s.max_evals)));
    }
    Ok(QuadResult { value: total.total(), abs_error_estimate: err, n_evals: evals, ring_depth: nseg - 1 })
}

fn crossover(profile: &GapProfile) -> f64 {
    let k = profile.kappa[1].max(1e-300);
    (profile.eps / k).powf(1.0 / profile.m as f64)
}

fn sphere_area(n: usize) -> f64 {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => {
            let half = n as f64 / 2.0;
            2.0 * PI.powf(half) / gamma(half)
        }
    }
}

/// Volume of the n-ball of radius r.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    sphere_area(n) * r.powi(n as i32) / n as f64
}

fn gamma(x: f64) -> f64 {
    // Lanczos approximation, adequate for half-integers used here
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `int_{|x'|<rad} weight(x') / delta(x') dx'` by dyadic rings around the origin.
pub fn gap_integral<W>(profile: &GapProfile, weight: W, rad: f64, s: &QuadSettings) -> Result<QuadResult>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    check_radius(profile, rad)?;
    let n = profile.n();
    let scale = crossover(profile);
    let p = profile;
    match n {
        1 => {
            let g = |t: f64| {
                let a = [t];
                let b = [-t];
                weight(&a) / p.delta_unchecked(&a) + weight(&b) / p.delta_unchecked(&b)
            };
            radial_rings(&g, rad, scale, s)
        }
        2 => {
            let inner_tol = s.rel_tol * 1e-3;
            let g = |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                let mut acc = NeumaierSum::default();
                for q in 0..4 {
                    let a0 = q as f64 * 0.5 * PI;
                    let res = integrate_adaptive(
                        |th: f64| {
                            let x = [r * th.cos(), r * th.sin()];
                            weight(&x) / p.delta_unchecked(&x)
                        },
                        a0,
                        a0 + 0.5 * PI,
                        0.0,
                        inner_tol,
                        200_000,
                    );
                    acc.add(res.value);
                }
                r * acc.total()
            };
            radial_rings(&g, rad, scale, s)
        }
        3 => {
            let (gx, gw) = gauss_legendre(48);
            let g = |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                let mut acc = NeumaierSum::default();
                for (i, &u) in gx.iter().enumerate() {
                    let th = 0.5 * PI * (u + 1.0);
                    let (st, ct) = th.sin_cos();
                    for q in 0..4 {
                        for (j, &v) in gx.iter().enumerate() {
                            let ph = 0.5 * PI * q as f64 + 0.25 * PI * (v + 1.0);
                            let x = [r * st * ph.cos(), r * st * ph.sin(), r * ct];
                            acc.add(gw[i] * gw[j] * 0.5 * PI * 0.25 * PI * st * weight(&x) / p.delta_unchecked(&x));
                        }
                    }
                }
                r * r * acc.total()
            };
            radial_rings(&g, rad, scale, s)
        }
        _ => Err(Error::InvalidParameter(format!(
            "non-radial gap integrals need d - 1 <= 3, got d - 1 = {n}"
        ))),
    }
}

fn check_radius(profile: &GapProfile, rad: f64) -> Result<()> {
    if !(rad > 0.0) || rad > profile.radius * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("integration radius {rad} must lie in (0, R = {}]", profile.radius)));
    }
    Ok(())
}

/// `int_{|x'|<rad} |x'|^k / delta dx'` with default tolerances.
pub fn moment_integral(profile: &GapProfile, k: u32, rad: f64) -> Result<QuadResult> {
    moment_integral_with(profile, k, rad, &QuadSettings::default())
}

/// Moment integral with explicit settings; radially symmetric profiles use the radial reduction.
pub fn moment_integral_with(profile: &GapProfile, k: u32, rad: f64, s: &QuadSettings) -> Result<QuadResult> {
    check_radius(profile, rad)?;
    let n = profile.n();
    if profile.is_radial() {
        let area = sphere_area(n);
        let scale = crossover(profile);
        let g = |t: f64| {
            let mut x = vec![0.0; n];
            x[0] = t;
            area * t.powi(n as i32 - 1 + k as i32) / profile.delta_unchecked(&x)
        };
        return radial_rings(&g, rad, scale, s);
    }
    gap_integral(profile, |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().powf(0.5 * k as f64), rad, s)
}

/// Two-term expansion of the 2-D gap integral for strictly convex boundaries.
pub fn closed_form_convex_2d(tau1: f64, rad: f64, eps: f64) -> f64 {
    SQRT_2 * PI / tau1.sqrt() / eps.sqrt() - 4.0 / (tau1 * rad)
}

/// Two-term expansion of the 3-D gap integral; the angular integral uses 64-point Gauss.
pub fn closed_form_convex_3d(tau1: f64, tau2: f64, rad: f64, eps: f64) -> f64 {
    let (x, w) = gauss_legendre(64);
    let mut acc = 0.0;
    for (u, wi) in x.iter().zip(&w) {
        let th = 0.25 * PI * (u + 1.0);
        let (s, c) = th.sin_cos();
        let r = rad / SQRT_2 / (c * c / tau1 + s * s / tau2).sqrt();
        acc += wi * 0.25 * PI * r.ln();
    }
    let st = (tau1 * tau2).sqrt();
    2.0 * PI / st * eps.ln().abs() + 8.0 / st * acc
}

/// Leading part of the diagonal energy: `L int 1/delta` for translations and
/// `L/(d-1) int |x'|^2/delta` for rotations.
pub fn energy_leading(alpha: usize, profile: &GapProfile, lame: &LameConstants, rad: f64) -> Result<QuadResult> {
    energy_leading_with(alpha, profile, lame, rad, &QuadSettings::default())
}

pub fn energy_leading_with(
    alpha: usize,
    profile: &GapProfile,
    lame: &LameConstants,
    rad: f64,
    s: &QuadSettings,
) -> Result<QuadResult> {
    let d = profile.d;
    let l = lame_rate_constant(d, alpha, lame)?;
    if alpha <= d {
        Ok(moment_integral_with(profile, 0, rad, s)?.scaled(l))
    } else {
        Ok(moment_integral_with(profile, 2, rad, s)?.scaled(l / (d - 1) as f64))
    }
}

/// Leading boundary functional: `-mu int Phi^alpha/delta` (alpha < d), `-(lambda+2mu) int Phi^d/delta`
/// (alpha = d), `(lambda+2mu) int Phi^d x1/delta` (alpha = d+1). The normal component times the
/// surface element equals dx' exactly on the upper graph, so no surface factor remains.
/// The bounded remainder of the functional is not included.
pub fn q_leading(alpha: usize, phi: &BoundaryData, profile: &GapProfile, lame: &LameConstants, rad: f64) -> Result<QuadResult> {
    q_leading_with(alpha, phi, profile, lame, rad, &QuadSettings::default())
}

pub fn q_leading_with(
    alpha: usize,
    phi: &BoundaryData,
    profile: &GapProfile,
    lame: &LameConstants,
    rad: f64,
    s: &QuadSettings,
) -> Result<QuadResult> {
    let d = profile.d;
    if alpha < 1 || alpha > d + 1 || alpha > basis_count(d) {
        return Err(Error::IndexOutOfRange { index: alpha, max: d + 1 });
    }
    let l2 = lame.lambda + 2.0 * lame.mu;
    if alpha < d {
        let c = -lame.mu;
        Ok(gap_integral(profile, |x: &[f64]| phi.value(x)[alpha - 1], rad, s)?.scaled(c))
    } else if alpha == d {
        Ok(gap_integral(profile, |x: &[f64]| phi.value(x)[d - 1], rad, s)?.scaled(-l2))
    } else {
        Ok(gap_integral(profile, |x: &[f64]| phi.value(x)[d - 1] * x[0], rad, s)?.scaled(l2))
    }
}

/// Outcome of a parity-vanishing check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParityCheck {
    pub residual: f64,
    pub tolerance: f64,
    /// Whether the weight was detected as odd along the axis.
    pub weight_is_odd: bool,
    pub passed: bool,
}

/// Integrates `weight/delta` over B'_R and reports whether it vanishes to the quadrature tolerance.
pub fn parity_vanish_check<W>(weight: W, profile: &GapProfile, axis: usize) -> Result<ParityCheck>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    let n = profile.n();
    if axis >= n {
        return Err(Error::IndexOutOfRange { index: axis + 1, max: n });
    }
    let mut odd = true;
    for s in 0..16 {
        let x: Vec<f64> = (0..n).map(|c| profile.radius * (0.1 + 0.05 * ((s + 3 * c) % 16) as f64)).collect();
        let mut y = x.clone();
        y[axis] = -y[axis];
        let (a, b) = (weight(&x), weight(&y));
        if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
            odd = false;
        }
    }
    let s = QuadSettings::default();
    let r = gap_integral(profile, &weight, profile.radius, &s)?;
    let tol = s.abs_tol;
    Ok(ParityCheck { residual: r.value, tolerance: tol, weight_is_odd: odd, passed: r.value.abs() < tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_family, Family};

    #[test]
    fn moment_examples() {
        let p = GapProfile::power(2, 2, 1.0, 1e-4, 1.0).unwrap();
        let r = moment_integral(&p, 0, 1.0).unwrap();
        let exact = 200.0 * 100f64.atan();
        assert!(((r.value - exact) / exact).abs() < 1e-9);
        assert!(r.abs_error_estimate >= 0.0 && r.ring_depth > 0);
        let p = GapProfile::power(3, 2, 1.0, 1e-6, 1.0).unwrap();
        let r = moment_integral(&p, 0, 1.0).unwrap();
        let exact = PI * ((1.0 + 1e-6) / 1e-6f64).ln();
        assert!(((r.value - exact) / exact).abs() < 1e-9);
        let p = GapProfile::power(2, 2, 1.0, 1.0, 1.0).unwrap();
        let r = moment_integral(&p, 0, 1.0).unwrap();
        assert!((r.value / 2.0 - 1.0).abs() < 0.25);
    }

    #[test]
    fn nonradial_path_matches_radial() {
        let p = GapProfile::quadratic(&[2.0, 2.0], 1e-6, 1.0).unwrap();
        assert!(!p.is_radial());
        let r = moment_integral(&p, 0, 1.0).unwrap();
        let exact = PI * ((1.0 + 1e-6) / 1e-6f64).ln();
        assert!(((r.value - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_convex_2d(2.0, 1.0, 1e-4) - (100.0 * PI - 2.0)).abs() < 1e-10);
        let v = closed_form_convex_3d(2.0, 2.0, 1.0, 1e-6);
        assert!((v - PI * 1e6f64.ln()).abs() < 1e-10);
        let v = closed_form_convex_3d(2.0, 2.0, std::f64::consts::E, 1e-6);
        assert!((v - PI * 1e6f64.ln() - 2.0 * PI).abs() < 1e-10);
        let p = GapProfile::quadratic(&[8.0, 2.0], 1e-6, 1.0).unwrap();
        let q = moment_integral(&p, 0, 1.0).unwrap().value;
        let c = closed_form_convex_3d(8.0, 2.0, 1.0, 1e-6);
        assert!(((q - c) / q).abs() < 1e-2);
    }

    #[test]
    fn energy_examples() {
        let p = GapProfile::power(2, 2, 1.0, 1e-4, 1.0).unwrap();
        let lame = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        let e = energy_leading(1, &p, &lame, 1.0).unwrap().value;
        assert!((e - 200.0 * 100f64.atan()).abs() < 1e-6);
        let e = energy_leading(3, &p, &lame, 1.0).unwrap().value;
        let exact = 3.0 * (2.0 - 2.0 * 1e-2 * 100f64.atan());
        assert!((e - exact).abs() < 1e-8);
    }

    #[test]
    fn q_examples() {
        let p = GapProfile::power(2, 2, 1.0, 1e-4, 1.0).unwrap();
        let lame = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        let e1 = make_family(Family::E1, 1.0, 2, 2).unwrap();
        let q = q_leading(1, &e1, &p, &lame, 1.0).unwrap().value;
        let exact = 2.0 - 2.0 * 1e-2 * 100f64.atan();
        assert!((q - exact).abs() < 1e-8, "{q} vs {exact}");
        let e2 = make_family(Family::E2, 1.0, 1, 2).unwrap();
        assert_eq!(q_leading(1, &e2, &p, &lame, 1.0).unwrap().value, 0.0);
        let e3 = make_family(Family::E3, 1.0, 1, 2).unwrap();
        assert_eq!(q_leading(2, &e3, &p, &lame, 1.0).unwrap().value, 0.0);
        assert!(q_leading(4, &e3, &p, &lame, 1.0).is_err());
    }

    #[test]
    fn parity_examples() {
        let p = GapProfile::power(3, 2, 1.0, 1e-4, 0.5).unwrap();
        let c = parity_vanish_check(|x: &[f64]| x[0], &p, 0).unwrap();
        assert!(c.passed && c.weight_is_odd && c.residual.abs() < 1e-12);
        let c = parity_vanish_check(|x: &[f64]| x[0] * x[1], &p, 1).unwrap();
        assert!(c.passed && c.residual.abs() < 1e-12);
        let c = parity_vanish_check(|x: &[f64]| x[0] * x[0], &p, 0).unwrap();
        assert!(!c.passed && !c.weight_is_odd);
    }
}
