//! Rigid displacements and the Dirichlet datum on the matrix boundary.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Monomial;

/// Number of rigid displacements in dimension d.
pub fn basis_count(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Kind of a rigid basis element; indices are zero-based coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidKind {
    /// e_i
    Translation(usize),
    /// x_j e_i - x_i e_j
    Rotation { i: usize, j: usize },
}

/// One rigid displacement psi_alpha in the standard ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RigidBasis {
    pub d: usize,
    pub alpha: usize,
    pub kind: RigidKind,
}

/// The alpha-th rigid displacement (alpha is 1-based).
pub fn rigid_basis(d: usize, alpha: usize) -> Result<RigidBasis> {
    let n = basis_count(d);
    if alpha < 1 || alpha > n {
        return Err(Error::IndexOutOfRange { index: alpha, max: n });
    }
    let kind = if alpha <= d {
        RigidKind::Translation(alpha - 1)
    } else if alpha < 2 * d {
        RigidKind::Rotation { i: alpha - d - 1, j: d - 1 }
    } else {
        // remaining pairs i < j < d in lexicographic order
        let mut k = 2 * d;
        let mut found = None;
        'outer: for i in 0..d - 1 {
            for j in i + 1..d - 1 {
                if k == alpha {
                    found = Some(RigidKind::Rotation { i, j });
                    break 'outer;
                }
                k += 1;
            }
        }
        found.expect("pair enumeration covers every index")
    };
    Ok(RigidBasis { d, alpha, kind })
}

impl RigidBasis {
    pub fn value(&self, x: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.d);
        match self.kind {
            RigidKind::Translation(i) => v[i] = 1.0,
            RigidKind::Rotation { i, j } => {
                v[i] = x[j];
                v[j] = -x[i];
            }
        }
        v
    }

    /// Constant Jacobian, entry (component, coordinate).
    pub fn gradient(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.d, self.d);
        if let RigidKind::Rotation { i, j } = self.kind {
            g[(i, j)] = 1.0;
            g[(j, i)] = -1.0;
        }
        g
    }

    pub fn is_translation(&self) -> bool {
        matches!(self.kind, RigidKind::Translation(_))
    }
}

/// Example families of boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    E1,
    E2,
    E3,
    Custom,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E1" => Ok(Family::E1),
            "E2" => Ok(Family::E2),
            "E3" => Ok(Family::E3),
            "CUSTOM" => Ok(Family::Custom),
            _ => Err(Error::InvalidFamily(s.to_string())),
        }
    }
}

/// Parity classes of the datum under reflections x_j -> -x_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    A1,
    A2,
    A3,
    None,
}

/// Dirichlet datum phi as a function of x' on the lower boundary graph.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub d: usize,
    pub eta: f64,
    pub k: u32,
    pub family: Family,
    /// Per-component polynomial for custom data.
    pub custom: Vec<Vec<Monomial>>,
    /// Smooth radial cutoff radius for the global extension; `None` means no cutoff.
    pub cutoff: Option<f64>,
}

/// Builds one of the families E1, E2, E3.
pub fn make_family(tag: Family, eta: f64, k: u32, d: usize) -> Result<BoundaryData> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension {d} < 2")));
    }
    match tag {
        Family::E1 if k < 2 => return Err(Error::InvalidFamily(format!("E1 requires k >= 2, got {k}"))),
        Family::E2 | Family::E3 if k < 1 || k == 2 => {
            return Err(Error::InvalidFamily(format!("{tag:?} requires k >= 1 and k != 2, got {k}")))
        }
        Family::Custom => return Err(Error::InvalidFamily("use BoundaryData::custom".into())),
        _ => {}
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter("eta must be nonnegative".into()));
    }
    Ok(BoundaryData { d, eta, k, family: tag, custom: Vec::new(), cutoff: None })
}

/// Quintic smoothstep: 1 on [0, 1/2], 0 on [1, inf), C^2 in between (argument r/R).
fn cutoff_profile(t: f64) -> (f64, f64, f64) {
    if t <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = 2.0 * (t - 0.5);
    let v = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let dv = -30.0 * s * s * (1.0 - s) * (1.0 - s) * 2.0;
    let ddv = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) * 4.0;
    (v, dv, ddv)
}

impl BoundaryData {
    /// Polynomial datum, one monomial list per component; eta and k describe the claimed growth.
    pub fn custom(d: usize, components: Vec<Vec<Monomial>>, eta: f64, k: u32) -> Result<Self> {
        if components.len() != d {
            return Err(Error::Dimension(format!("{} components for d = {d}", components.len())));
        }
        Ok(Self { d, eta, k, family: Family::Custom, custom: components, cutoff: None })
    }

    /// Zero datum.
    pub fn zero(d: usize) -> Self {
        Self { d, eta: 0.0, k: 2, family: Family::Custom, custom: vec![Vec::new(); d], cutoff: None }
    }

    pub fn with_cutoff(mut self, radius: f64) -> Self {
        self.cutoff = Some(radius);
        self
    }

    /// The datum multiplied by c (eta may become negative for the closed-form families).
    pub fn scaled(&self, c: f64) -> Self {
        let mut b = self.clone();
        if self.family == Family::Custom {
            for t in b.custom.iter_mut().flatten() {
                t.coef *= c;
            }
            b.eta = self.eta * c.abs();
        } else {
            b.eta = self.eta * c;
        }
        b
    }

    fn raw(&self, xp: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.d;
        let n = d - 1;
        let mut v = DVector::zeros(d);
        let mut j = DMatrix::zeros(d, n);
        let eta = self.eta;
        let k = self.k as i32;
        match self.family {
            Family::E1 => {
                let r2: f64 = xp.iter().map(|x| x * x).sum();
                let r = r2.sqrt();
                let val = -eta * r.powi(k);
                let gscale = if r > 0.0 { -eta * k as f64 * r.powi(k - 2) } else { 0.0 };
                for i in 0..d {
                    v[i] = val;
                    for c in 0..n {
                        j[(i, c)] = gscale * xp[c];
                    }
                }
            }
            Family::E2 => {
                let x = xp[0];
                v[d - 1] = eta * x * x.abs().powi(k - 1);
                j[(d - 1, 0)] = eta * k as f64 * x.abs().powi(k - 1);
            }
            Family::E3 => {
                for i in 0..n {
                    let x = xp[i];
                    v[i] = eta * x * x.abs().powi(k - 1);
                    j[(i, i)] = eta * k as f64 * x.abs().powi(k - 1);
                }
            }
            Family::Custom => {
                for (i, comp) in self.custom.iter().enumerate() {
                    for t in comp {
                        v[i] += eval_mono(t, xp);
                        for c in 0..n {
                            j[(i, c)] += partial_mono(t, xp, c);
                        }
                    }
                }
            }
        }
        (v, j)
    }

    /// Value and Jacobian (d x (d-1)) of x' -> phi(x', h(x')).
    pub fn eval(&self, xp: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (v, j) = self.raw(xp);
        match self.cutoff {
            None => (v, j),
            Some(rc) => {
                let r: f64 = xp.iter().map(|x| x * x).sum::<f64>().sqrt();
                let (c, dc, _) = cutoff_profile(r / rc);
                let mut jj = j * c;
                if dc != 0.0 && r > 0.0 {
                    for i in 0..self.d {
                        for col in 0..self.d - 1 {
                            jj[(i, col)] += v[i] * dc / rc * xp[col] / r;
                        }
                    }
                }
                (v * c, jj)
            }
        }
    }

    pub fn value(&self, xp: &[f64]) -> DVector<f64> {
        self.eval(xp).0
    }

    /// phi(0) = 0.
    pub fn check_normalization(&self) -> Result<()> {
        let v = self.value(&vec![0.0; self.d - 1]);
        if v.amax() > 1e-14 {
            return Err(Error::InvalidParameter(format!("boundary datum must vanish at the origin, |phi(0)| = {}", v.amax())));
        }
        Ok(())
    }

    /// Largest `|phi(x')| / (eta |x'|^k)` over the sampled ball of radius `rad`.
    pub fn growth_ratio(&self, rad: f64, n_samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for xp in crate::geometry::sample_points(self.d - 1, rad, n_samples) {
            let r: f64 = xp.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r == 0.0 {
                continue;
            }
            let bound = self.eta.abs() * r.powi(self.k as i32);
            let v = self.value(&xp).norm();
            worst = worst.max(if bound > 0.0 { v / bound } else if v > 0.0 { f64::INFINITY } else { 0.0 });
        }
        worst
    }

    /// Sampled C^2 surrogate: max of |phi|, |grad phi|, |hess phi| on a 201-point-per-axis grid of B'_rad.
    pub fn c2_norm(&self, rad: f64) -> f64 {
        let n = self.d - 1;
        let per_axis = if n <= 2 { 201 } else { 31 };
        let h = 1e-5 * rad.max(1e-3);
        let mut best = 0.0f64;
        for xp in crate::geometry::sample_points(n, rad, per_axis) {
            let (v, j) = self.eval(&xp);
            best = best.max(v.norm()).max(j.norm());
            let mut hess = 0.0f64;
            for c in 0..n {
                let mut a = xp.clone();
                let mut b = xp.clone();
                a[c] += h;
                b[c] -= h;
                let dj = (self.eval(&a).1 - self.eval(&b).1) / (2.0 * h);
                hess += dj.norm_squared();
            }
            best = best.max(hess.sqrt());
        }
        best
    }
}

fn eval_mono(t: &Monomial, xp: &[f64]) -> f64 {
    t.powers.iter().zip(xp).fold(t.coef, |acc, (&p, &x)| acc * x.powi(p as i32))
}

fn partial_mono(t: &Monomial, xp: &[f64], i: usize) -> f64 {
    let p = t.powers.get(i).copied().unwrap_or(0);
    if p == 0 {
        return 0.0;
    }
    let mut v = t.coef * p as f64;
    for (j, (&q, &x)) in t.powers.iter().zip(xp).enumerate() {
        v *= x.powi(if j == i { q as i32 - 1 } else { q as i32 });
    }
    v
}

/// Reflection behavior of one component along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AxisParity {
    even: bool,
    odd: bool,
}

fn parity_table(phi: &BoundaryData, rad: f64) -> Vec<Vec<AxisParity>> {
    let d = phi.d;
    let n = d - 1;
    let mut table = vec![vec![AxisParity { even: true, odd: true }; n]; d];
    // 64 deterministic sample points per axis, off the coordinate planes
    for j in 0..n {
        for s in 0..64 {
            let xp: Vec<f64> = (0..n)
                .map(|c| {
                    let t = ((s * 7 + c * 13 + 3) % 64) as f64 / 64.0;
                    rad * (0.05 + 0.9 * t) * if (s + c) % 2 == 0 { 1.0 } else { -1.0 }
                })
                .collect();
            let mut y = xp.clone();
            y[j] = -y[j];
            let a = phi.value(&xp);
            let b = phi.value(&y);
            for i in 0..d {
                let scale = 1e-12 * (1.0 + a[i].abs().max(b[i].abs()));
                if (a[i] - b[i]).abs() > scale {
                    table[i][j].even = false;
                }
                if (a[i] + b[i]).abs() > scale {
                    table[i][j].odd = false;
                }
            }
        }
    }
    table
}

/// Parity class of the datum; the most specific matching class wins (A1, then A3, then A2).
pub fn classify_parity(phi: &BoundaryData) -> Parity {
    let d = phi.d;
    let n = d - 1;
    let t = parity_table(phi, 0.1);
    let a1 = (0..d).all(|i| (0..n).all(|j| t[i][j].even));
    if a1 {
        return Parity::A1;
    }
    let a3 = if d == 2 {
        t[0][0].odd && (0..1).all(|j| t[1][j].even && t[1][j].odd)
    } else {
        (0..n).all(|i| t[i][i].odd) && t[d - 1][0].odd && t[d - 1][1].odd
    };
    if a3 {
        return Parity::A3;
    }
    let a2 = if d == 2 {
        t[0][0].odd && t[1][0].odd
    } else {
        (0..n).all(|i| (0..n).any(|j| t[i][j].odd)) && t[d - 1][0].odd && (1..n).all(|j| t[d - 1][j].even)
    };
    if a2 {
        return Parity::A2;
    }
    Parity::None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_examples() {
        let p = rigid_basis(2, 3).unwrap();
        assert_eq!(p.value(&[0.3, 0.7]).as_slice(), &[0.7, -0.3]);
        let p = rigid_basis(3, 2).unwrap();
        assert_eq!(p.value(&[1.0, 2.0, 3.0]).as_slice(), &[0.0, 1.0, 0.0]);
        let p = rigid_basis(3, 6).unwrap();
        assert_eq!(p.value(&[1.0, 2.0, 3.0]).as_slice(), &[2.0, -1.0, 0.0]);
        let g = p.gradient();
        assert_eq!(&g + g.transpose(), DMatrix::zeros(3, 3));
        assert!(rigid_basis(3, 7).is_err());
        assert!(rigid_basis(2, 0).is_err());
    }

    #[test]
    fn family_examples() {
        let e1 = make_family(Family::E1, 1.0, 2, 2).unwrap();
        assert_eq!(e1.value(&[0.5]).as_slice(), &[-0.25, -0.25]);
        let e2 = make_family(Family::E2, 2.0, 1, 3).unwrap();
        assert_eq!(e2.value(&[0.5, -0.2]).as_slice(), &[0.0, 0.0, 1.0]);
        let e3 = make_family(Family::E3, 1.0, 3, 2).unwrap();
        assert!((e3.value(&[-0.5])[0] + 0.125).abs() < 1e-15);
        assert!(make_family(Family::E1, 1.0, 1, 2).is_err());
        assert!(make_family(Family::E2, 1.0, 2, 2).is_err());
    }

    #[test]
    fn parity_examples() {
        for d in [2, 3] {
            assert_eq!(classify_parity(&make_family(Family::E1, 1.0, 2, d).unwrap()), Parity::A1);
            assert_eq!(classify_parity(&make_family(Family::E2, 1.0, 3, d).unwrap()), Parity::A2);
            assert_eq!(classify_parity(&make_family(Family::E3, 1.0, 1, d).unwrap()), Parity::A3);
        }
        let c = BoundaryData::custom(2, vec![vec![Monomial::new(1.0, vec![0])], vec![Monomial::new(2.0, vec![0])]], 1.0, 1)
            .unwrap();
        assert_eq!(classify_parity(&c), Parity::A1);
        let mixed = BoundaryData::custom(
            2,
            vec![vec![Monomial::new(1.0, vec![2]), Monomial::new(1.0, vec![3])], vec![]],
            1.0,
            2,
        )
        .unwrap();
        assert_eq!(classify_parity(&mixed), Parity::None);
    }

    #[test]
    fn cutoff_is_smooth_and_local() {
        let e1 = make_family(Family::E1, 1.0, 2, 2).unwrap().with_cutoff(0.2);
        assert_eq!(e1.value(&[0.05]), make_family(Family::E1, 1.0, 2, 2).unwrap().value(&[0.05]));
        assert_eq!(e1.value(&[0.25]).amax(), 0.0);
        let h = 1e-6;
        for &x in &[0.11, 0.15, 0.19] {
            let fd = (e1.value(&[x + h]) - e1.value(&[x - h])) / (2.0 * h);
            assert!((fd[0] - e1.eval(&[x]).1[(0, 0)]).abs() < 1e-7);
        }
    }
}
