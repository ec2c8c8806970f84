//! Small least-squares helpers: linear and log-log fits, fitted-exponent extrapolation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Straight-line fit `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares `min |X c - y|`; returns coefficients and the residual norm.
/// Rank-deficient designs are rejected.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!("{} rows against {} observations", x.nrows(), y.len())));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::InvalidParameter("fewer observations than unknowns".into()));
    }
    // column scaling keeps the rank test meaningful for mixed magnitudes
    let scales: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).norm().max(1e-300)).collect();
    let xs = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] / scales[j]);
    let svd = xs.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::Singular("rank-deficient design matrix".into()));
    }
    let c = svd.solve(y, 0.0).map_err(|e| Error::Singular(e.to_string()))?;
    let resid = (&xs * &c - y).norm();
    let coef = DVector::from_fn(c.len(), |j, _| c[j] / scales[j]);
    Ok((coef, resid))
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("need at least two paired samples".into()));
    }
    let n = x.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { x[i] } else { 1.0 });
    let (c, _) = least_squares(&design, &DVector::from_column_slice(y))?;
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - c[0] * a - c[1]).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit { slope: c[0], intercept: c[1], r2 })
}

/// Slope of ln|v| against ln x.
pub fn loglog_slope(x: &[f64], v: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(v).any(|t| *t == 0.0 || !t.is_finite()) {
        return Err(Error::Domain("log-log fit needs finite nonzero data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|t| t.abs().ln()).collect();
    let lv: Vec<f64> = v.iter().map(|t| t.abs().ln()).collect();
    linear_fit(&lx, &lv)
}

/// Model `v(eps) = v_star + c eps^p + c2 eps^(2p)` with fitted p (`c2 = 0` for the one-term model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonFit {
    pub v_star: f64,
    pub c: f64,
    pub c2: f64,
    pub p: f64,
    pub residual: f64,
}

impl RichardsonFit {
    pub fn eval(&self, eps: f64) -> f64 {
        self.v_star + self.c * eps.powf(self.p) + self.c2 * eps.powf(2.0 * self.p)
    }
}

fn fixed_p(eps: &[f64], v: &[f64], p: f64, terms: usize) -> Result<RichardsonFit> {
    let design = DMatrix::from_fn(eps.len(), terms + 1, |i, j| if j == 0 { 1.0 } else { eps[i].powf(p * j as f64) });
    let (c, residual) = least_squares(&design, &DVector::from_column_slice(v))?;
    Ok(RichardsonFit { v_star: c[0], c: c[1], c2: if terms > 1 { c[2] } else { 0.0 }, p, residual })
}

/// Fits `v_star + c eps^p` with p searched on [p_lo, p_hi] and refined by golden section.
pub fn richardson_fit_range(eps: &[f64], v: &[f64], p_lo: f64, p_hi: f64) -> Result<RichardsonFit> {
    richardson_fit_terms(eps, v, p_lo, p_hi, 1)
}

/// Fitted-exponent extrapolation with `terms` (1 or 2) correction powers `eps^p, eps^(2p)`.
pub fn richardson_fit_terms(eps: &[f64], v: &[f64], p_lo: f64, p_hi: f64, terms: usize) -> Result<RichardsonFit> {
    if !(1..=2).contains(&terms) {
        return Err(Error::InvalidParameter(format!("{terms} correction terms; use 1 or 2")));
    }
    if eps.len() != v.len() || eps.len() < terms + 2 {
        return Err(Error::InvalidParameter(format!("extrapolation needs at least {} samples", terms + 2)));
    }
    let scale = v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return Ok(RichardsonFit { v_star: 0.0, c: 0.0, c2: 0.0, p: 1.0, residual: 0.0 });
    }
    let spread = v.iter().fold(0.0f64, |m, t| m.max((t - v[0]).abs()));
    if spread <= 1e-14 * scale {
        return Ok(RichardsonFit { v_star: v[0], c: 0.0, c2: 0.0, p: 1.0, residual: 0.0 });
    }
    let n_grid = 120;
    let mut best: Option<RichardsonFit> = None;
    let mut best_i: usize = 0;
    for i in 0..=n_grid {
        let p = p_lo + (p_hi - p_lo) * i as f64 / n_grid as f64;
        if let Ok(f) = fixed_p(eps, v, p, terms) {
            if best.map_or(true, |b| f.residual < b.residual) {
                best = Some(f);
                best_i = i;
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::Singular("no admissible exponent".into()))?;
    let h = (p_hi - p_lo) / n_grid as f64;
    let (mut a, mut b) = (p_lo + h * (best_i.saturating_sub(1)) as f64, (p_lo + h * (best_i + 1) as f64).min(p_hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        let (fc, fd) = match (fixed_p(eps, v, c, terms), fixed_p(eps, v, d, terms)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => break,
        };
        if fc.residual < fd.residual {
            b = d;
        } else {
            a = c;
        }
        for f in [fc, fd] {
            if f.residual < best.residual {
                best = f;
            }
        }
    }
    Ok(best)
}

/// Fitted-exponent extrapolation with p in [0.05, 3].
pub fn richardson_fit(eps: &[f64], v: &[f64]) -> Result<RichardsonFit> {
    richardson_fit_range(eps, v, 0.05, 3.0)
}

/// Two-term fitted-exponent extrapolation with p in [0.05, 3].
pub fn richardson_fit2(eps: &[f64], v: &[f64]) -> Result<RichardsonFit> {
    richardson_fit_terms(eps, v, 0.05, 3.0, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|t| 2.5 * t - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-13 && (f.intercept + 1.0).abs() < 1e-12 && f.r2 > 0.999_999);
    }

    #[test]
    fn recovers_power() {
        let e = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4];
        let v: Vec<f64> = e.iter().map(|t: &f64| 3.0 * t.powf(-0.5)).collect();
        assert!((loglog_slope(&e, &v).unwrap().slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn recovers_limit() {
        let e = [0.04, 0.02, 0.01, 0.005, 0.0025];
        let v: Vec<f64> = e.iter().map(|t: &f64| 1.7 - 0.8 * t.powf(0.7)).collect();
        let f = richardson_fit(&e, &v).unwrap();
        assert!((f.v_star - 1.7).abs() < 1e-8 && (f.p - 0.7).abs() < 1e-5);
    }

    #[test]
    fn recovers_two_term_limit() {
        let e = [0.04, 0.02, 0.01, 0.005, 0.0025];
        let v: Vec<f64> = e.iter().map(|t: &f64| 7.0 - 18.0 * t.sqrt() + 20.0 * t).collect();
        let f = richardson_fit2(&e, &v).unwrap();
        assert!((f.v_star - 7.0).abs() < 1e-6 && (f.p - 0.5).abs() < 1e-5);
        assert!((f.eval(0.01) - v[2]).abs() < 1e-9);
        let one = richardson_fit(&e, &v).unwrap();
        assert!((one.v_star - 7.0).abs() > (f.v_star - 7.0).abs());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
