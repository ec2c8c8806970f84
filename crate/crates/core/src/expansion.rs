//! Pointwise asymptotic gradient and the upper/lower bound certificates.

use nalgebra::{DMatrix, DVector};

use crate::aux_fields::{u_bar, LameConstants};
use crate::boundary::{basis_count, classify_parity, BoundaryData};
use crate::error::{Error, Result};
use crate::factors::{c_alpha_asymptotic, FactorData};
use crate::geometry::GapProfile;
use crate::rates::{rate_table, BoundsInput, RateCertificate, Side, Theorem};

/// Everything needed to evaluate the asymptotic gradient.
#[derive(Debug, Clone)]
pub struct ExpansionConfig {
    pub profile: GapProfile,
    pub lame: LameConstants,
    pub phi: BoundaryData,
    /// Limit factor data (a*, Q*).
    pub starred: Option<FactorData>,
    /// Fitted constants K* for alpha = 1..d (needed for d = 2, 3).
    pub k_star: Option<Vec<f64>>,
    /// Relative principal curvatures; computed from the profile when absent.
    pub tau: Option<Vec<f64>>,
}

impl ExpansionConfig {
    pub fn new(profile: GapProfile, lame: LameConstants, phi: BoundaryData) -> Self {
        Self { profile, lame, phi, starred: None, k_star: None, tau: None }
    }

    pub fn with_starred(mut self, s: FactorData, k_star: Option<Vec<f64>>) -> Self {
        self.starred = Some(s);
        self.k_star = k_star;
        self
    }

    fn tau(&self) -> Result<Vec<f64>> {
        match &self.tau {
            Some(t) => Ok(t.clone()),
            None if self.profile.d >= 4 => Ok(Vec::new()),
            None => self.profile.principal_relative_curvatures(),
        }
    }

    /// Free constants C^alpha(eps) from the limit data.
    pub fn constants(&self) -> Result<DVector<f64>> {
        let s = self
            .starred
            .as_ref()
            .ok_or_else(|| Error::MissingFactorData("starred factor data required".into()))?;
        c_alpha_asymptotic(self.profile.d, s, &self.tau()?, &self.lame, self.profile.eps, self.k_star.as_deref())
    }

    /// Bounds input built from this configuration (parity classified from phi).
    pub fn bounds_input(&self) -> BoundsInput {
        let mut b = BoundsInput::new(
            self.phi.family,
            self.profile.d,
            self.profile.m,
            self.phi.k,
            self.phi.eta,
            (self.profile.kappa[0], self.profile.kappa[1]),
            self.lame,
        )
        .with_parity(classify_parity(&self.phi));
        b.starred = self.starred.clone();
        b
    }
}

/// Asymptotic gradient with its bounded-remainder band.
#[derive(Debug, Clone)]
pub struct AsymptoticGradient {
    pub gradient: DMatrix<f64>,
    /// Unit-constant radius of the O(|phi|_C2) remainder.
    pub uncertainty: f64,
    pub constants: DVector<f64>,
}

/// `sum_alpha C^alpha grad u_bar_alpha + grad u_bar_0` at a gap point.
pub fn grad_u_asymptotic(cfg: &ExpansionConfig, x: &[f64]) -> Result<AsymptoticGradient> {
    let d = cfg.profile.d;
    if x.len() != d {
        return Err(Error::Dimension(format!("point of length {} in dimension {d}", x.len())));
    }
    if d == 2 {
        let (_, j) = cfg.phi.eval(&[0.0]);
        if j.amax() > 1e-12 {
            return Err(Error::InvalidParameter("d = 2 expansion needs grad' phi(0) = 0".into()));
        }
    }
    let c = cfg.constants()?;
    let (_, mut g) = u_bar(0, &cfg.profile, &cfg.lame, Some(&cfg.phi), x)?;
    for alpha in 1..=basis_count(d) {
        if c[alpha - 1] != 0.0 {
            let (_, ga) = u_bar(alpha, &cfg.profile, &cfg.lame, None, x)?;
            g += ga * c[alpha - 1];
        }
    }
    Ok(AsymptoticGradient { gradient: g, uncertainty: cfg.phi.c2_norm(cfg.profile.radius), constants: c })
}

/// A lower/upper pair.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: RateCertificate,
    pub upper: RateCertificate,
}

fn pair(v: Vec<RateCertificate>) -> Result<Bounds> {
    let lower = v.iter().find(|c| c.side == Side::Lower).cloned();
    let upper = v.iter().find(|c| c.side == Side::Upper).cloned();
    match (lower, upper) {
        (Some(lower), Some(upper)) => Ok(Bounds { lower, upper }),
        _ => Err(Error::CaseNotCovered("estimate has no two-sided form".into())),
    }
}

/// Estimate on the segment x' = 0.
pub fn bounds_segment(input: &BoundsInput) -> Result<Bounds> {
    pair(rate_table(Theorem::Segment, input)?)
}

/// Estimate on the cylinder |x'| = eps^(1/m).
pub fn bounds_cylinder(input: &BoundsInput) -> Result<Bounds> {
    pair(rate_table(Theorem::Cylinder, input)?)
}

/// Upper envelope at distance `xnorm` from the axis.
pub fn bounds_field(input: &BoundsInput, xnorm: f64) -> Result<RateCertificate> {
    Ok(rate_table(Theorem::Field { xnorm }, input)?.remove(0))
}

/// Flat contact set of measure `sigma` (2r for d = 2): the family-specific pair followed
/// by the unified upper form.
pub fn bounds_flat(input: &BoundsInput, sigma: f64) -> Result<Vec<RateCertificate>> {
    rate_table(Theorem::Flat { sigma }, input)
}

/// Measure of the (d-1)-ball of radius r.
pub fn ball_measure(n: usize, r: f64) -> f64 {
    crate::quadrature::ball_volume(n, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_family, Family};
    use crate::factors::Provenance;

    fn cfg(phi: BoundaryData) -> ExpansionConfig {
        let p = GapProfile::quadratic(&[2.0], 1e-3, 0.2).unwrap();
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![f64::INFINITY, f64::INFINITY, 2.0]));
        let q = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let s = FactorData::new(2, a, q, Provenance::User, None).unwrap();
        ExpansionConfig::new(p, LameConstants::unit(), phi).with_starred(s, Some(vec![0.0, 0.0]))
    }

    #[test]
    fn zero_data_gives_zero() {
        let mut c = cfg(BoundaryData::zero(2));
        let s = c.starred.as_mut().unwrap();
        s.q = DVector::zeros(3);
        let g = grad_u_asymptotic(&c, &[0.0, 5e-4]).unwrap();
        assert_eq!(g.gradient.amax(), 0.0);
    }

    #[test]
    fn linear_in_data() {
        let phi = make_family(Family::E1, 1.0, 2, 2).unwrap();
        let c1 = cfg(phi.clone());
        let mut c2 = cfg(phi.scaled(2.0));
        c2.starred = Some(c1.starred.as_ref().unwrap().scaled_q(2.0));
        let x = [0.05, 2e-3];
        let g1 = grad_u_asymptotic(&c1, &x).unwrap().gradient;
        let g2 = grad_u_asymptotic(&c2, &x).unwrap().gradient;
        assert!((g2 - g1 * 2.0).amax() < 1e-12);
    }

    #[test]
    fn certificates() {
        let b = BoundsInput::new(Family::E1, 2, 6, 2, 1.0, (1.0, 1.0), LameConstants::unit());
        let s = bounds_segment(&b).unwrap();
        assert!((s.upper.rate.exponent_f64() + 2.0 / 3.0).abs() < 1e-15);
        let b = BoundsInput::new(Family::E1, 3, 5, 3, 1.0, (1.0, 1.0), LameConstants::unit());
        let c = bounds_cylinder(&b).unwrap();
        assert!((c.upper.rate.exponent_f64() + 0.6).abs() < 1e-15);
    }
}
