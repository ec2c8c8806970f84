//! Boundary graphs near the touching point, the gap function and condition checks.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function of x' with first and second derivatives.
pub trait GraphFn: Send + Sync + fmt::Debug {
    fn value(&self, xp: &[f64]) -> f64;
    fn gradient(&self, xp: &[f64]) -> DVector<f64>;
    /// Row-major Hessian if available analytically.
    fn hessian(&self, _xp: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// One term `coef * prod x_i^{powers[i]}` of a polynomial graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: f64, powers: Vec<u32>) -> Self {
        Self { coef, powers }
    }

    fn eval(&self, xp: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(xp)
            .fold(self.coef, |acc, (&p, &x)| acc * x.powi(p as i32))
    }

    fn partial(&self, xp: &[f64], i: usize) -> f64 {
        let p = self.powers.get(i).copied().unwrap_or(0);
        if p == 0 {
            return 0.0;
        }
        let mut v = self.coef * p as f64;
        for (j, (&q, &x)) in self.powers.iter().zip(xp).enumerate() {
            let e = if j == i { q - 1 } else { q };
            v *= x.powi(e as i32);
        }
        v
    }

    fn partial2(&self, xp: &[f64], i: usize, j: usize) -> f64 {
        let mut pw: Vec<i64> = self.powers.iter().map(|&p| p as i64).collect();
        pw.resize(xp.len(), 0);
        let mut c = self.coef;
        for idx in [i, j] {
            if pw[idx] == 0 {
                return 0.0;
            }
            c *= pw[idx] as f64;
            pw[idx] -= 1;
        }
        pw.iter().zip(xp).fold(c, |acc, (&p, &x)| acc * x.powi(p as i32))
    }
}

/// Shapes available for h and h1.
#[derive(Debug, Clone)]
pub enum Graph {
    Zero,
    /// `coef * |x'|^m`.
    Power { coef: f64, m: u32 },
    /// Sum of monomials in x'.
    Polynomial(Vec<Monomial>),
    /// Lower arc of a sphere of the given radius tangent to x_d = 0 at the origin.
    Cap { radius: f64 },
    Custom(Arc<dyn GraphFn>),
}

fn norm(xp: &[f64]) -> f64 {
    xp.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Graph {
    pub fn value(&self, xp: &[f64]) -> f64 {
        match self {
            Graph::Zero => 0.0,
            Graph::Power { coef, m } => coef * norm(xp).powi(*m as i32),
            Graph::Polynomial(terms) => terms.iter().map(|t| t.eval(xp)).sum(),
            Graph::Cap { radius } => {
                let r2: f64 = xp.iter().map(|x| x * x).sum();
                // rho - sqrt(rho^2 - r^2) written without cancellation
                r2 / (radius + (radius * radius - r2).sqrt())
            }
            Graph::Custom(g) => g.value(xp),
        }
    }

    pub fn gradient(&self, xp: &[f64]) -> DVector<f64> {
        let n = xp.len();
        match self {
            Graph::Zero => DVector::zeros(n),
            Graph::Power { coef, m } => {
                let r = norm(xp);
                if r == 0.0 {
                    return DVector::zeros(n);
                }
                let s = coef * *m as f64 * r.powi(*m as i32 - 2);
                DVector::from_iterator(n, xp.iter().map(|x| s * x))
            }
            Graph::Polynomial(terms) => {
                DVector::from_fn(n, |i, _| terms.iter().map(|t| t.partial(xp, i)).sum())
            }
            Graph::Cap { radius } => {
                let r2: f64 = xp.iter().map(|x| x * x).sum();
                let s = (radius * radius - r2).sqrt();
                DVector::from_iterator(n, xp.iter().map(|x| x / s))
            }
            Graph::Custom(g) => g.gradient(xp),
        }
    }

    /// Analytic Hessian where the shape provides one.
    pub fn hessian_analytic(&self, xp: &[f64]) -> Option<DMatrix<f64>> {
        let n = xp.len();
        match self {
            Graph::Zero => Some(DMatrix::zeros(n, n)),
            Graph::Power { coef, m } => {
                let r = norm(xp);
                let m = *m as i32;
                if r == 0.0 {
                    return Some(if m == 2 {
                        DMatrix::identity(n, n) * (2.0 * coef)
                    } else {
                        DMatrix::zeros(n, n)
                    });
                }
                let c = coef * m as f64;
                let a = c * r.powi(m - 2);
                let b = c * (m - 2) as f64 * r.powi(m - 4);
                Some(DMatrix::from_fn(n, n, |i, j| {
                    let d = if i == j { a } else { 0.0 };
                    d + b * xp[i] * xp[j]
                }))
            }
            Graph::Polynomial(terms) => Some(DMatrix::from_fn(n, n, |i, j| {
                terms.iter().map(|t| t.partial2(xp, i, j)).sum()
            })),
            Graph::Cap { radius } => {
                let r2: f64 = xp.iter().map(|x| x * x).sum();
                let s = (radius * radius - r2).sqrt();
                let s3 = s * s * s;
                Some(DMatrix::from_fn(n, n, |i, j| {
                    let d = if i == j { 1.0 / s } else { 0.0 };
                    d + xp[i] * xp[j] / s3
                }))
            }
            Graph::Custom(g) => g.hessian(xp),
        }
    }

    /// Hessian with a 5-point central-difference fallback on the gradient.
    pub fn hessian(&self, xp: &[f64], step: f64) -> DMatrix<f64> {
        if let Some(h) = self.hessian_analytic(xp) {
            return h;
        }
        let n = xp.len();
        let mut out = DMatrix::zeros(n, n);
        let mut y = xp.to_vec();
        for j in 0..n {
            let g = |t: f64, y: &mut Vec<f64>| {
                y[j] = xp[j] + t;
                let v = self.gradient(y);
                y[j] = xp[j];
                v
            };
            let gp2 = g(2.0 * step, &mut y);
            let gp1 = g(step, &mut y);
            let gm1 = g(-step, &mut y);
            let gm2 = g(-2.0 * step, &mut y);
            for i in 0..n {
                out[(i, j)] = (-gp2[i] + 8.0 * gp1[i] - 8.0 * gm1[i] + gm2[i]) / (12.0 * step);
            }
        }
        (&out + out.transpose()) * 0.5
    }

    /// True when the value depends on |x'| only.
    pub fn is_radial(&self) -> bool {
        matches!(self, Graph::Zero | Graph::Power { .. } | Graph::Cap { .. })
    }
}

/// Profile of the thin gap: the graphs h (matrix boundary) and h1 (inclusion boundary
/// before translation), the translation distance and the envelope constants.
#[derive(Debug, Clone)]
pub struct GapProfile {
    pub d: usize,
    pub m: u32,
    pub radius: f64,
    pub eps: f64,
    pub h: Graph,
    pub h1: Graph,
    /// (kappa1, kappa2, kappa3, kappa4)
    pub kappa: [f64; 4],
}

impl GapProfile {
    /// Builds a profile and checks normalization at the origin and eps > 0.
    pub fn new(d: usize, m: u32, radius: f64, eps: f64, h: Graph, h1: Graph, kappa: [f64; 4]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("dimension {d} < 2")));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!("convexity order {m} < 2")));
        }
        if !(eps > 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidParameter("eps and R must be positive".into()));
        }
        let p = Self { d, m, radius, eps, h, h1, kappa };
        let o = vec![0.0; d - 1];
        let tol = 1e-12;
        if p.h.value(&o).abs() > tol || p.h1.value(&o).abs() > tol {
            return Err(Error::Geometry("h(0') and h1(0') must vanish".into()));
        }
        if p.h.gradient(&o).amax() > tol || p.h1.gradient(&o).amax() > tol {
            return Err(Error::Geometry("gradients of h and h1 must vanish at 0'".into()));
        }
        Ok(p)
    }

    /// `h = 0`, `h1 = coef |x'|^m`, with kappa1 = kappa2 = coef.
    pub fn power(d: usize, m: u32, coef: f64, eps: f64, radius: f64) -> Result<Self> {
        let k34 = (m as f64) * (m as f64) * coef.max(1.0) * (1.0 + (2.0 * radius).powi(m as i32));
        Self::new(d, m, radius, eps, Graph::Zero, Graph::Power { coef, m }, [coef, coef, k34, k34])
    }

    /// `h = 0`, `h1 = sum_i tau_i x_i^2 / 2` (m = 2).
    pub fn quadratic(tau: &[f64], eps: f64, radius: f64) -> Result<Self> {
        let d = tau.len() + 1;
        let terms = tau
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut p = vec![0; d - 1];
                p[i] = 2;
                Monomial::new(t / 2.0, p)
            })
            .collect();
        let lo = tau.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
        let hi = tau.iter().cloned().fold(0.0, f64::max) / 2.0;
        let k3 = 2.0 * hi * (1.0 + 4.0 * radius);
        Self::new(d, 2, radius, eps, Graph::Zero, Graph::Polynomial(terms), [lo, hi, k3, k3 + 4.0 * hi * radius * radius])
    }

    /// Two spheres: the matrix boundary of radius `r0` and the inclusion of radius `r1 < r0`,
    /// both tangent to x_d = 0 at the origin from above, inclusion shifted by eps.
    pub fn spheres(d: usize, r1: f64, r0: f64, eps: f64, radius: f64) -> Result<Self> {
        if !(r1 < r0) || 2.0 * radius >= r1 {
            return Err(Error::InvalidParameter("need r1 < r0 and 2R < r1".into()));
        }
        let mut p = Self::new(d, 2, radius, eps, Graph::Cap { radius: r0 }, Graph::Cap { radius: r1 }, [1.0; 4])?;
        let (k1, k2) = p.estimate_envelope(101);
        let rr = 2.0 * radius;
        let s1 = (r1 * r1 - rr * rr).sqrt();
        let k3 = (rr / s1) / rr + r1 * r1 / (s1 * s1 * s1);
        p.kappa = [k1, k2, k3, 3.0 * k3];
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.d - 1
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        let mut p = self.clone();
        p.eps = eps;
        p
    }

    pub fn with_kappa(mut self, kappa: [f64; 4]) -> Self {
        self.kappa = kappa;
        self
    }

    fn check_point(&self, xp: &[f64]) -> Result<()> {
        if xp.len() != self.n() {
            return Err(Error::Dimension(format!("x' has {} coordinates, expected {}", xp.len(), self.n())));
        }
        if norm(xp) > 2.0 * self.radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|x'| = {} exceeds 2R = {}", norm(xp), 2.0 * self.radius)));
        }
        Ok(())
    }

    /// Gap width `eps + h1 - h` at x' in B'_{2R}.
    pub fn delta(&self, xp: &[f64]) -> Result<f64> {
        self.check_point(xp)?;
        Ok(self.delta_unchecked(xp))
    }

    /// Gap width without the domain check.
    #[inline]
    pub fn delta_unchecked(&self, xp: &[f64]) -> f64 {
        self.eps + self.gap_shape(xp)
    }

    /// `h1 - h`.
    #[inline]
    pub fn gap_shape(&self, xp: &[f64]) -> f64 {
        match (&self.h, &self.h1) {
            (Graph::Cap { radius: r0 }, Graph::Cap { radius: r1 }) => {
                // difference of two caps, evaluated without cancellation
                let r2: f64 = xp.iter().map(|x| x * x).sum();
                let s0 = (r0 * r0 - r2).sqrt();
                let s1 = (r1 * r1 - r2).sqrt();
                r2 * ((r0 - r1) + (s0 - s1)) / ((r1 + s1) * (r0 + s0))
            }
            _ => self.h1.value(xp) - self.h.value(xp),
        }
    }

    pub fn grad_delta(&self, xp: &[f64]) -> DVector<f64> {
        self.h1.gradient(xp) - self.h.gradient(xp)
    }

    /// Finite-difference step used for Hessian fallbacks.
    pub fn fd_step(&self) -> f64 {
        (1e-3 * self.radius).max(1e-5)
    }

    pub fn hess_h(&self, xp: &[f64]) -> DMatrix<f64> {
        self.h.hessian(xp, self.fd_step())
    }

    pub fn hess_h1(&self, xp: &[f64]) -> DMatrix<f64> {
        self.h1.hessian(xp, self.fd_step())
    }

    pub fn hess_delta(&self, xp: &[f64]) -> DMatrix<f64> {
        self.hess_h1(xp) - self.hess_h(xp)
    }

    /// True when both graphs depend on |x'| only.
    pub fn is_radial(&self) -> bool {
        self.h.is_radial() && self.h1.is_radial()
    }

    /// Sampled min and max of `(h1 - h)/|x'|^m` over B'_{2R}.
    pub fn estimate_envelope(&self, n_samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for xp in sample_points(self.n(), 2.0 * self.radius, n_samples) {
            let r = norm(&xp);
            if r < 1e-3 * self.radius {
                continue;
            }
            let q = self.gap_shape(&xp) / r.powi(self.m as i32);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        (lo, hi)
    }

    /// Relative principal curvatures at the origin (m = 2).
    pub fn principal_relative_curvatures(&self) -> Result<Vec<f64>> {
        principal_relative_curvatures(self)
    }
}

/// Eigenvalues of the Hessian of `h1 - h` at 0', ascending.
pub fn principal_relative_curvatures(profile: &GapProfile) -> Result<Vec<f64>> {
    if profile.m != 2 {
        return Err(Error::Geometry(format!("curvatures need m = 2, got m = {}", profile.m)));
    }
    let o = vec![0.0; profile.n()];
    let h = profile.hess_delta(&o);
    let h = (&h + h.transpose()) * 0.5;
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ev[0] <= 0.0 {
        return Err(Error::Geometry(format!("non-positive relative curvature {}", ev[0])));
    }
    Ok(ev)
}

/// Deterministic sample set of B'_rad: a tensor grid clipped to the ball plus radial rays
/// along coordinate axes and diagonals.
pub fn sample_points(n: usize, rad: f64, n_samples: usize) -> Vec<Vec<f64>> {
    let n_samples = n_samples.max(1);
    let per_axis = match n {
        1 => n_samples,
        2 => n_samples.min(201),
        _ => n_samples.min(41),
    }
    .max(2);
    let mut pts = Vec::new();
    let total = per_axis.pow(n as u32);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let p: Vec<f64> = idx
            .iter()
            .map(|&i| -rad + 2.0 * rad * i as f64 / (per_axis - 1) as f64)
            .collect();
        if norm(&p) <= rad {
            pts.push(p);
        }
        for k in 0..n {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            dirs.push(v);
        }
    }
    if n >= 2 {
        let c = 1.0 / (n as f64).sqrt();
        dirs.push(vec![c; n]);
        dirs.push(vec![-c; n]);
    }
    for dir in &dirs {
        for j in 1..=n_samples {
            let t = rad * j as f64 / n_samples as f64;
            pts.push(dir.iter().map(|v| v * t).collect());
        }
    }
    pts
}

/// Outcome of one sampled structural condition.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    /// Sample point where the margin is smallest.
    pub worst_point: Vec<f64>,
    /// Smallest slack over samples; negative when violated.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n_points: usize,
    pub grid: String,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    margin: f64,
    point: Vec<f64>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, margin: f64::INFINITY, point: Vec::new() }
    }
    fn update(&mut self, slack: f64, xp: &[f64]) {
        if slack < self.margin {
            self.margin = slack;
            self.point = xp.to_vec();
        }
    }
    fn finish(self) -> ConditionCheck {
        ConditionCheck { name: self.name.into(), passed: self.margin >= 0.0, worst_point: self.point, margin: self.margin }
    }
}

/// Samples the envelope, derivative-growth, regularity, evenness and positivity conditions.
pub fn validate_conditions(profile: &GapProfile, n_samples: usize) -> ConditionReport {
    let n = profile.n();
    let rad = 2.0 * profile.radius;
    let pts = sample_points(n, rad, n_samples);
    let [k1, k2, k3, k4] = profile.kappa;
    let m = profile.m as i32;
    let rel = 1e-12;

    let mut lower = Tracker::new("H1-lower");
    let mut upper = Tracker::new("H1-upper");
    let mut grad = Tracker::new("H2-gradient");
    let mut hess = Tracker::new("H2-hessian");
    let mut reg = Tracker::new("H3-regularity");
    let mut even = Tracker::new("evenness");
    let mut pos = Tracker::new("gap-positive");
    let mut c2h = 0.0f64;
    let mut c2h1 = 0.0f64;
    for xp in &pts {
        let r = norm(xp);
        let g = profile.gap_shape(xp);
        let rm = r.powi(m);
        lower.update(g - k1 * rm + rel * rm.max(1e-300), xp);
        upper.update(k2 * rm - g + rel * rm.max(1e-300), xp);
        for gr in [&profile.h, &profile.h1] {
            let gv = gr.gradient(xp).norm();
            let hv = gr.hessian(xp, profile.fd_step()).norm();
            grad.update(k3 * r.powi(m - 1) - gv + rel, xp);
            hess.update(k3 * r.powi(m - 2) - hv + 1e-8, xp);
        }
        let sup = |gr: &Graph| {
            gr.value(xp).abs() + gr.gradient(xp).norm() + gr.hessian(xp, profile.fd_step()).norm()
        };
        c2h = c2h.max(sup(&profile.h));
        c2h1 = c2h1.max(sup(&profile.h1));
        for j in 0..n {
            let mut y = xp.clone();
            y[j] = -y[j];
            let diff = (profile.gap_shape(&y) - g).abs();
            even.update(1e-12 * (1.0 + g.abs()) - diff, xp);
        }
        pos.update(profile.delta_unchecked(xp), xp);
    }
    reg.update(k4 - (c2h + c2h1), &[]);
    let mut checks = vec![
        lower.finish(),
        upper.finish(),
        grad.finish(),
        hess.finish(),
        reg.finish(),
        even.finish(),
        pos.finish(),
    ];
    if profile.m == 2 {
        let mut q3 = Tracker::new("Q3-convexity");
        match principal_relative_curvatures(profile) {
            Ok(t) => q3.update(t[0], &vec![0.0; n]),
            Err(_) => q3.update(-1.0, &vec![0.0; n]),
        }
        checks.push(q3.finish());
    }
    ConditionReport {
        n_points: pts.len(),
        grid: format!("tensor grid clipped to |x'| <= {rad} with {n_samples} pts/axis (capped) plus radial rays"),
        checks,
    }
}

/// The thin region between the two graphs over a disk of radius t.
#[derive(Debug, Clone)]
pub struct ThinGapRegion {
    pub profile: GapProfile,
    pub t: f64,
}

impl ThinGapRegion {
    pub fn new(profile: GapProfile, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 2.0 * profile.radius) {
            return Err(Error::InvalidParameter(format!("need 0 < t <= 2R, got {t}")));
        }
        Ok(Self { profile, t })
    }

    /// Lower graph height h(x').
    pub fn bottom(&self, xp: &[f64]) -> f64 {
        self.profile.h.value(xp)
    }

    /// Upper graph height eps + h1(x').
    pub fn top(&self, xp: &[f64]) -> f64 {
        self.profile.eps + self.profile.h1.value(xp)
    }

    /// Membership in the closed region over |x'| < t.
    pub fn contains(&self, x: &[f64]) -> bool {
        let (xp, xd) = x.split_at(self.profile.n());
        norm(xp) <= self.t && xd[0] >= self.bottom(xp) - 1e-15 && xd[0] <= self.top(xp) + 1e-15
    }

    /// Unit normal on the upper boundary pointing out of the gap into the inclusion.
    pub fn normal_top(&self, xp: &[f64]) -> DVector<f64> {
        let g = self.profile.h1.gradient(xp);
        graph_normal(&g, 1.0)
    }

    /// Unit normal on the lower boundary pointing out of the gap.
    pub fn normal_bottom(&self, xp: &[f64]) -> DVector<f64> {
        let g = self.profile.h.gradient(xp);
        graph_normal(&g, -1.0)
    }
}

fn graph_normal(g: &DVector<f64>, sign: f64) -> DVector<f64> {
    let n = g.len();
    let s = (1.0 + g.norm_squared()).sqrt();
    DVector::from_fn(n + 1, |i, _| if i < n { -sign * g[i] / s } else { sign / s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        let p = GapProfile::power(2, 2, 0.5, 1e-4, 0.1).unwrap();
        assert_eq!(p.delta(&[0.0]).unwrap(), 1e-4);
        assert!((p.delta(&[0.1]).unwrap() - 5.1e-3).abs() < 1e-15);
        let q = GapProfile::power(3, 4, 1.0, 1e-6, 0.1).unwrap();
        assert!((q.delta(&[0.1, 0.0]).unwrap() - 1.01e-4).abs() < 1e-16);
        assert!(matches!(p.delta(&[0.3]), Err(Error::Domain(_))));
    }

    #[test]
    fn curvature_examples() {
        let p = GapProfile::quadratic(&[1.0, 2.0], 1e-3, 0.1).unwrap();
        let t = p.principal_relative_curvatures().unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12 && (t[1] - 2.0).abs() < 1e-12);
        let d = GapProfile::spheres(2, 0.5, 1.0, 1e-2, 0.2).unwrap();
        let t = d.principal_relative_curvatures().unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12);
        // finite-difference cross-check of the Hessian
        let c = Graph::Custom(Arc::new(CapNoHess(0.5)));
        let h = c.hessian(&[0.0], 1e-4);
        assert!((h[(0, 0)] - 2.0).abs() < 1e-6);
    }

    #[derive(Debug)]
    struct CapNoHess(f64);
    impl GraphFn for CapNoHess {
        fn value(&self, xp: &[f64]) -> f64 {
            Graph::Cap { radius: self.0 }.value(xp)
        }
        fn gradient(&self, xp: &[f64]) -> DVector<f64> {
            Graph::Cap { radius: self.0 }.gradient(xp)
        }
    }

    #[test]
    fn conditions_examples() {
        let p = GapProfile::power(3, 2, 1.0, 1e-3, 0.1).unwrap();
        let rep = validate_conditions(&p, 21);
        assert!(rep.get("H1-lower").unwrap().passed && rep.get("H1-upper").unwrap().passed);
        let bad = p.clone().with_kappa([2.0, 1.0, 10.0, 10.0]);
        let rep = validate_conditions(&bad, 21);
        let c = rep.get("H1-lower").unwrap();
        assert!(!c.passed && norm(&c.worst_point) > 0.0);
        // |x'|^2 + |x'|^3 sampled out to 0.1
        let terms = Graph::Custom(Arc::new(SqCube));
        let p = GapProfile::new(2, 2, 0.05, 1e-3, Graph::Zero, terms, [1.0, 1.1, 10.0, 10.0]).unwrap();
        let rep = validate_conditions(&p, 51);
        assert!(rep.get("H1-upper").unwrap().passed && rep.get("H1-lower").unwrap().passed);
    }

    #[derive(Debug)]
    struct SqCube;
    impl GraphFn for SqCube {
        fn value(&self, xp: &[f64]) -> f64 {
            let r = norm(xp);
            r * r + r * r * r
        }
        fn gradient(&self, xp: &[f64]) -> DVector<f64> {
            let r = norm(xp);
            DVector::from_iterator(xp.len(), xp.iter().map(|x| (2.0 + 3.0 * r) * x))
        }
    }

    #[test]
    fn normals_are_unit_and_orthogonal() {
        let p = GapProfile::spheres(2, 0.5, 1.0, 1e-2, 0.2).unwrap();
        let reg = ThinGapRegion::new(p.clone(), 0.2).unwrap();
        for &x in &[-0.15, 0.0, 0.07] {
            let nt = reg.normal_top(&[x]);
            let nb = reg.normal_bottom(&[x]);
            assert!((nt.norm() - 1.0).abs() < 1e-12 && (nb.norm() - 1.0).abs() < 1e-12);
            assert!(nt[1] > 0.0 && nb[1] < 0.0);
            let tt = [1.0, p.h1.gradient(&[x])[0]];
            assert!((tt[0] * nt[0] + tt[1] * nt[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_remainder_of_quadratic_gap() {
        let p = GapProfile::spheres(2, 0.5, 1.0, 1e-2, 0.2).unwrap();
        for &x in &[0.01, 0.05, 0.1, 0.2] {
            let r = p.delta(&[x]).unwrap() - p.eps - 0.5 * x * x;
            assert!(r.abs() <= 2.0 * x * x * x);
        }
    }
}
