//! Explicit approximations of the gap solutions: the linear interpolant across the gap,
//! its quadratic corrections, the general leading term and the remainder envelope.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary::{basis_count, rigid_basis, BoundaryData, RigidBasis};
use crate::error::{Error, Result};
use crate::geometry::GapProfile;

/// Isotropic Lamé constants with the ellipticity constant kappa5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameConstants {
    pub lambda: f64,
    pub mu: f64,
    pub kappa5: f64,
}

impl LameConstants {
    /// Checks `kappa5 <= mu` and `d lambda + 2 mu <= 1/kappa5`; kappa5 defaults to the largest admissible value.
    pub fn new(lambda: f64, mu: f64, kappa5: Option<f64>, d: usize) -> Result<Self> {
        let bulk = d as f64 * lambda + 2.0 * mu;
        if !(mu > 0.0) || !(bulk > 0.0) {
            return Err(Error::InvalidParameter(format!("not elliptic: mu = {mu}, d*lambda + 2mu = {bulk}")));
        }
        let k5 = kappa5.unwrap_or_else(|| mu.min(1.0 / bulk));
        if !(k5 > 0.0) || k5 > mu * (1.0 + 1e-15) || bulk > (1.0 / k5) * (1.0 + 1e-15) {
            return Err(Error::InvalidParameter(format!(
                "kappa5 = {k5} violates kappa5 <= mu = {mu} or d*lambda + 2mu = {bulk} <= 1/kappa5"
            )));
        }
        Ok(Self { lambda, mu, kappa5: k5 })
    }

    /// Unchecked constructor for internal use.
    pub fn unit() -> Self {
        Self { lambda: 1.0, mu: 1.0, kappa5: 0.25 }
    }

    /// (lambda + mu)/mu
    pub fn a_coef(&self) -> f64 {
        (self.lambda + self.mu) / self.mu
    }

    /// (lambda + mu)/(lambda + 2 mu)
    pub fn b_coef(&self) -> f64 {
        (self.lambda + self.mu) / (self.lambda + 2.0 * self.mu)
    }

    /// Stress `lambda tr(e) I + 2 mu e` for a displacement gradient G (entry (component, coordinate)).
    pub fn stress(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let n = g.nrows();
        let tr = g.trace();
        let mut s = (g + g.transpose()) * self.mu;
        for i in 0..n {
            s[(i, i)] += self.lambda * tr;
        }
        s
    }

    /// Energy density pairing `(C0 e(u), e(v))`.
    pub fn pairing(&self, gu: &DMatrix<f64>, gv: &DMatrix<f64>) -> f64 {
        let eu = (gu + gu.transpose()) * 0.5;
        let ev = (gv + gv.transpose()) * 0.5;
        self.lambda * eu.trace() * ev.trace() + 2.0 * self.mu * eu.dot(&ev)
    }
}

/// Bridge polynomial vanishing at 0 and 1.
pub fn f_bridge(v: f64) -> f64 {
    0.5 * (v - 0.5) * (v - 0.5) - 0.125
}

fn f_bridge_prime(v: f64) -> f64 {
    v - 0.5
}

/// Linear interpolant across the gap with its first and second derivatives.
#[derive(Debug, Clone)]
pub struct VbarEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Local gap data at a point.
struct GapPoint {
    /// d-vector with zero last entry
    grad_delta: DVector<f64>,
    vbar: VbarEval,
}

fn gap_point(profile: &GapProfile, x: &[f64], need_hessian: bool) -> Result<GapPoint> {
    let d = profile.d;
    if x.len() != d {
        return Err(Error::Dimension(format!("point has {} coordinates, expected {d}", x.len())));
    }
    let n = d - 1;
    let xp = &x[..n];
    let delta = profile.delta(xp)?;
    let h = profile.h.value(xp);
    let num = x[n] - h;
    let slack = 1e-12 * delta + 1e-15;
    if num < -slack || num > delta + slack {
        return Err(Error::Domain(format!("point {x:?} lies outside the gap slab")));
    }
    let gh = profile.h.gradient(xp);
    let gd = profile.grad_delta(xp);
    let mut nvec = DVector::zeros(d);
    let mut dvec = DVector::zeros(d);
    for i in 0..n {
        nvec[i] = -gh[i];
        dvec[i] = gd[i];
    }
    nvec[n] = 1.0;
    let value = num / delta;
    let gradient = (&nvec - &dvec * value) / delta;
    let hessian = if need_hessian {
        let hh = profile.hess_h(xp);
        let hd = profile.hess_delta(xp);
        let mut nij = DMatrix::zeros(d, d);
        let mut dij = DMatrix::zeros(d, d);
        for i in 0..n {
            for j in 0..n {
                nij[(i, j)] = -hh[(i, j)];
                dij[(i, j)] = hd[(i, j)];
            }
        }
        let d2 = delta * delta;
        DMatrix::from_fn(d, d, |i, j| {
            nij[(i, j)] / delta - (nvec[i] * dvec[j] + nvec[j] * dvec[i] + num * dij[(i, j)]) / d2
                + 2.0 * num * dvec[i] * dvec[j] / (d2 * delta)
        })
    } else {
        DMatrix::zeros(d, d)
    };
    Ok(GapPoint { grad_delta: dvec, vbar: VbarEval { value, gradient, hessian } })
}

/// `(x_d - h)/delta` with analytic derivatives.
pub fn vbar(profile: &GapProfile, x: &[f64]) -> Result<VbarEval> {
    Ok(gap_point(profile, x, true)?.vbar)
}

/// Field on the inclusion side, evaluated as a function of x' through the upper graph.
#[derive(Debug, Clone)]
pub enum TopField {
    Zero,
    /// psi(x', eps + h1(x')) for a rigid displacement.
    Rigid(RigidBasis),
    /// Arbitrary datum given directly as a function of x'.
    Data(BoundaryData),
}

impl TopField {
    /// Value and x'-Jacobian (d x (d-1)).
    pub fn eval(&self, profile: &GapProfile, xp: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = profile.d;
        let n = d - 1;
        match self {
            TopField::Zero => (DVector::zeros(d), DMatrix::zeros(d, n)),
            TopField::Rigid(psi) => {
                let top = profile.eps + profile.h1.value(xp);
                let mut x = xp.to_vec();
                x.push(top);
                let g = psi.gradient();
                let gh1 = profile.h1.gradient(xp);
                let j = DMatrix::from_fn(d, n, |i, c| g[(i, c)] + g[(i, n)] * gh1[c]);
                (psi.value(&x), j)
            }
            TopField::Data(b) => b.eval(xp),
        }
    }

    /// Sampled C^2 surrogate over B'_R.
    pub fn c2_norm(&self, profile: &GapProfile) -> f64 {
        match self {
            TopField::Zero => 0.0,
            TopField::Data(b) => b.c2_norm(profile.radius),
            TopField::Rigid(psi) => {
                // |psi| + |grad psi| is maximal at the edge of the disk; second derivatives vanish.
                let r = profile.radius;
                let edge = (r * r + (profile.eps + r * r).powi(2)).sqrt();
                let g = if psi.is_translation() { 0.0 } else { std::f64::consts::SQRT_2 };
                (if psi.is_translation() { 1.0 } else { edge }).max(g)
            }
        }
    }
}

fn bottom_eval(phi: Option<&BoundaryData>, d: usize, xp: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    match phi {
        Some(b) => b.eval(xp),
        None => (DVector::zeros(d), DMatrix::zeros(d, d - 1)),
    }
}

/// Widens a d x (d-1) Jacobian with a zero x_d column.
fn widen(j: &DMatrix<f64>) -> DMatrix<f64> {
    let d = j.nrows();
    DMatrix::from_fn(d, d, |i, c| if c + 1 < d { j[(i, c)] } else { 0.0 })
}

/// Value and gradient of `P + D vbar + a f D^d grad'delta + b f (grad'delta . D') e_d`.
fn assemble(
    p: &DVector<f64>,
    jp: &DMatrix<f64>,
    dv: &DVector<f64>,
    jd: &DMatrix<f64>,
    gp: &GapPoint,
    profile: &GapProfile,
    xp: &[f64],
    lame: &LameConstants,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = p.len();
    let n = d - 1;
    let a = lame.a_coef();
    let b = lame.b_coef();
    let v = gp.vbar.value;
    let vg = &gp.vbar.gradient;
    let f = f_bridge(v);
    let fp = f_bridge_prime(v);
    let dd = &gp.grad_delta;
    let hd = profile.hess_delta(xp);
    let hdd = |i: usize, j: usize| if i < n && j < n { hd[(i, j)] } else { 0.0 };
    let s: f64 = (0..n).map(|k| dd[k] * dv[k]).sum();

    let mut val = p + dv * v;
    for i in 0..n {
        val[i] += a * f * dv[n] * dd[i];
    }
    val[n] += b * f * s;

    let mut g = jp + jd * v + dv * vg.transpose();
    for j in 0..d {
        for i in 0..n {
            g[(i, j)] += a * (fp * vg[j] * dv[n] * dd[i] + f * jd[(n, j)] * dd[i] + f * dv[n] * hdd(i, j));
        }
        let ds: f64 = (0..n).map(|k| jd[(k, j)] * dd[k] + dv[k] * hdd(k, j)).sum();
        g[(n, j)] += b * (fp * vg[j] * s + f * ds);
    }
    (val, g)
}

fn check_alpha(d: usize, alpha: usize) -> Result<()> {
    let n = basis_count(d);
    if alpha > n {
        return Err(Error::IndexOutOfRange { index: alpha, max: n });
    }
    Ok(())
}

/// `psi_alpha vbar + F_alpha` for alpha >= 1, or `phi (1 - vbar) + F_0` for alpha = 0.
pub fn u_bar(
    alpha: usize,
    profile: &GapProfile,
    lame: &LameConstants,
    phi: Option<&BoundaryData>,
    x: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let d = profile.d;
    check_alpha(d, alpha)?;
    let gp = gap_point(profile, x, false)?;
    let xp = &x[..d - 1];
    if alpha == 0 {
        let phi = phi.ok_or_else(|| Error::InvalidParameter("u_bar(0) needs boundary data".into()))?;
        let (pv, pj) = phi.eval(xp);
        let jp = widen(&pj);
        let (dv, jd) = (-&pv, -&jp);
        Ok(assemble(&pv, &jp, &dv, &jd, &gp, profile, xp, lame))
    } else {
        let psi = rigid_basis(d, alpha)?;
        let dv = psi.value(x);
        let jd = psi.gradient();
        let z = DVector::zeros(d);
        let zj = DMatrix::zeros(d, d);
        Ok(assemble(&z, &zj, &dv, &jd, &gp, profile, xp, lame))
    }
}

/// General leading term built from the top trace Psi(x') and bottom datum Phi(x').
pub fn leading_term(
    psi: &TopField,
    phi: Option<&BoundaryData>,
    profile: &GapProfile,
    lame: &LameConstants,
    x: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let d = profile.d;
    let gp = gap_point(profile, x, false)?;
    let xp = &x[..d - 1];
    let (sv, sj) = psi.eval(profile, xp);
    let (pv, pj) = bottom_eval(phi, d, xp);
    let jp = widen(&pj);
    let dv = &sv - &pv;
    let jd = widen(&sj) - &jp;
    Ok(assemble(&pv, &jp, &dv, &jd, &gp, profile, xp, lame))
}

/// `|Psi - Phi| delta^{(m-2)/m} + delta (|psi|_C2 + |phi|_C2) + |grad'(Psi - Phi)|`.
/// Norms are estimated by sampling when not supplied.
pub fn remainder_envelope(
    psi: &TopField,
    phi: Option<&BoundaryData>,
    profile: &GapProfile,
    xp: &[f64],
    norms: Option<(f64, f64)>,
) -> Result<f64> {
    let d = profile.d;
    let delta = profile.delta(xp)?;
    let (sv, sj) = psi.eval(profile, xp);
    let (pv, pj) = bottom_eval(phi, d, xp);
    let (ns, np) = norms.unwrap_or_else(|| (psi.c2_norm(profile), phi.map_or(0.0, |b| b.c2_norm(profile.radius))));
    let m = profile.m as f64;
    Ok((&sv - &pv).norm() * delta.powf((m - 2.0) / m) + delta * (ns + np) + (sj - pj).norm())
}

/// `|D| delta^{-2/m} + |grad' D| / delta + |psi|_C2 + |phi|_C2` with D = Psi - Phi:
/// the scale that bounds the Lamé residual of the leading term.
pub fn residual_envelope(
    psi: &TopField,
    phi: Option<&BoundaryData>,
    profile: &GapProfile,
    xp: &[f64],
    norms: (f64, f64),
) -> Result<f64> {
    let d = profile.d;
    let delta = profile.delta(xp)?;
    let (sv, sj) = psi.eval(profile, xp);
    let (pv, pj) = bottom_eval(phi, d, xp);
    let m = profile.m as f64;
    Ok((&sv - &pv).norm() * delta.powf(-2.0 / m) + (sj - pj).norm() / delta + norms.0 + norms.1)
}

/// Rate constant L_d^alpha.
pub fn lame_rate_constant(d: usize, alpha: usize, lame: &LameConstants) -> Result<f64> {
    let n = basis_count(d);
    if alpha < 1 || alpha > n {
        return Err(Error::IndexOutOfRange { index: alpha, max: n });
    }
    let (mu, l2) = (lame.mu, lame.lambda + 2.0 * lame.mu);
    Ok(if d == 2 {
        if alpha == 1 { mu } else { l2 }
    } else if alpha < d {
        mu
    } else if alpha < 2 * d {
        l2
    } else {
        2.0 * mu
    })
}

/// Which auxiliary field an [`AuxField`] represents.
#[derive(Debug, Clone)]
pub enum AuxKind {
    UBar0,
    UBarAlpha(usize),
    Leading(TopField),
}

/// An auxiliary field bundled with its inputs.
#[derive(Debug, Clone)]
pub struct AuxField {
    pub kind: AuxKind,
    pub profile: GapProfile,
    pub lame: LameConstants,
    pub phi: Option<BoundaryData>,
}

impl AuxField {
    pub fn new(kind: AuxKind, profile: GapProfile, lame: LameConstants, phi: Option<BoundaryData>) -> Self {
        Self { kind, profile, lame, phi }
    }

    pub fn eval(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        match &self.kind {
            AuxKind::UBar0 => u_bar(0, &self.profile, &self.lame, self.phi.as_ref(), x),
            AuxKind::UBarAlpha(a) => u_bar(*a, &self.profile, &self.lame, None, x),
            AuxKind::Leading(psi) => leading_term(psi, self.phi.as_ref(), &self.profile, &self.lame, x),
        }
    }

    /// Lamé operator applied by central differences of the analytic stress; the step must
    /// not exceed a tenth of the local gap width.
    pub fn lame_residual(&self, x: &[f64], step: f64) -> Result<DVector<f64>> {
        let d = self.profile.d;
        let delta = self.profile.delta(&x[..d - 1])?;
        if step > delta / 10.0 {
            return Err(Error::Accuracy(format!("step {step:e} exceeds delta/10 = {:e}", delta / 10.0)));
        }
        // keep the stencil inside the gap along x_d
        let h = self.profile.h.value(&x[..d - 1]);
        let mut xc = x.to_vec();
        xc[d - 1] = xc[d - 1].clamp(h + 2.0 * step, h + delta - 2.0 * step);
        lame_operator_fd(|y| self.eval(y).map(|r| r.1), &self.lame, &xc, step)
    }
}

/// `div(C0 e(u))` by fourth-order central differences of the stress built from a gradient evaluator.
pub fn lame_operator_fd<F>(grad: F, lame: &LameConstants, x: &[f64], step: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let d = x.len();
    let mut out = DVector::zeros(d);
    let mut y = x.to_vec();
    for j in 0..d {
        let mut s = |t: f64| -> Result<DMatrix<f64>> {
            y[j] = x[j] + t;
            let g = grad(&y)?;
            y[j] = x[j];
            Ok(lame.stress(&g))
        };
        let sp2 = s(2.0 * step)?;
        let sp1 = s(step)?;
        let sm1 = s(-step)?;
        let sm2 = s(-2.0 * step)?;
        for i in 0..d {
            out[i] += (-sp2[(i, j)] + 8.0 * sp1[(i, j)] - 8.0 * sm1[(i, j)] + sm2[(i, j)]) / (12.0 * step);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_family, Family};

    fn profile() -> GapProfile {
        GapProfile::power(2, 2, 0.5, 1e-2, 0.2).unwrap()
    }

    #[test]
    fn bridge_values() {
        assert_eq!(f_bridge(0.0), 0.0);
        assert_eq!(f_bridge(1.0), 0.0);
        assert_eq!(f_bridge(0.5), -0.125);
    }

    #[test]
    fn vbar_example() {
        let p = profile();
        let v = vbar(&p, &[0.0, 5e-3]).unwrap();
        assert!((v.value - 0.5).abs() < 1e-14);
        assert!((v.gradient[1] - 100.0).abs() < 1e-10);
        assert!(vbar(&p, &[0.0, 2e-2]).is_err());
    }

    #[test]
    fn u_bar_examples() {
        let p = profile();
        let lame = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        let top = [0.1, p.eps + 0.005];
        let (v, _) = u_bar(1, &p, &lame, None, &top).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && v[1].abs() < 1e-14);
        let phi = make_family(Family::E1, 1.0, 2, 2).unwrap();
        let (v, _) = u_bar(0, &p, &lame, Some(&phi), &top).unwrap();
        assert!(v.amax() < 1e-14);
        let (_, g) = u_bar(2, &p, &lame, None, &[0.0, 5e-3]).unwrap();
        assert!((g[(1, 1)] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn lame_constant_examples() {
        let l = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        assert_eq!(lame_rate_constant(2, 1, &l).unwrap(), 1.0);
        let l = LameConstants::new(1.0, 2.0, None, 3).unwrap();
        assert_eq!(lame_rate_constant(3, 3, &l).unwrap(), 5.0);
        assert_eq!(lame_rate_constant(3, 6, &l).unwrap(), 4.0);
        assert!(lame_rate_constant(3, 7, &l).is_err());
        assert!(LameConstants::new(1.0, 1.0, Some(2.0), 2).is_err());
    }

    #[test]
    fn envelope_examples() {
        let p = profile();
        let e = remainder_envelope(&TopField::Zero, None, &p, &[0.05], None).unwrap();
        assert_eq!(e, 0.0);
        let psi = TopField::Rigid(rigid_basis(2, 1).unwrap());
        let e = remainder_envelope(&psi, None, &p, &[0.0], Some((1.0, 0.0))).unwrap();
        assert!((e - 1.0 - p.eps).abs() < 1e-14);
    }

    #[test]
    fn residual_of_linear_fields_vanishes() {
        let lame = LameConstants::new(1.3, 0.7, None, 2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 0.8, 2.0]);
        let r = lame_operator_fd(|_| Ok(a.clone()), &lame, &[0.1, 0.2], 1e-3).unwrap();
        assert!(r.amax() < 1e-8);
        let psi = rigid_basis(2, 3).unwrap();
        let r = lame_operator_fd(|_| Ok(psi.gradient()), &lame, &[0.4, -0.2], 1e-3).unwrap();
        assert!(r.amax() < 1e-8);
    }
}
