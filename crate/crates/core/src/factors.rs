//! Blow-up factor matrices, the free-constant system and its asymptotic solution.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::aux_fields::{lame_rate_constant, LameConstants};
use crate::boundary::{basis_count, BoundaryData};
use crate::geometry::GapProfile;
use crate::quadrature::{energy_leading, q_leading};
use crate::error::{Error, Result};
use crate::fit::least_squares;

/// Where factor data came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Oracle,
    Leading,
    User,
}

/// Energy Gram matrix `a` and functional vector `Q` of size N = d(d+1)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorData {
    pub d: usize,
    pub a: DMatrix<f64>,
    pub q: DVector<f64>,
    pub provenance: Provenance,
    /// Gap distance; `None` for limit (starred) data.
    pub eps: Option<f64>,
}

/// Plain serializable form of [`FactorData`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorFile {
    pub d: usize,
    pub a: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub provenance: Provenance,
    pub eps: Option<f64>,
}

impl FactorData {
    /// Checks the shape and symmetry (to 1e-8 relative, over finite entries).
    pub fn new(d: usize, a: DMatrix<f64>, q: DVector<f64>, provenance: Provenance, eps: Option<f64>) -> Result<Self> {
        let n = basis_count(d);
        if a.nrows() != n || a.ncols() != n || q.len() != n {
            return Err(Error::Dimension(format!(
                "factor data for d = {d} needs {n}x{n} and {n}, got {}x{} and {}",
                a.nrows(),
                a.ncols(),
                q.len()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                let diag = (a[(i, i)] * a[(j, j)]).abs().sqrt();
                let scale = x.abs().max(y.abs()).max(if diag.is_finite() { diag } else { 0.0 }).max(1e-300);
                if x.is_finite() && y.is_finite() && (x - y).abs() > 1e-8 * scale {
                    return Err(Error::InvalidParameter(format!("a is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { d, a, q, provenance, eps })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn to_file(&self) -> FactorFile {
        FactorFile {
            d: self.d,
            a: (0..self.n()).map(|i| self.a.row(i).iter().cloned().collect()).collect(),
            q: self.q.iter().cloned().collect(),
            provenance: self.provenance,
            eps: self.eps,
        }
    }

    pub fn from_file(f: &FactorFile) -> Result<Self> {
        let n = f.a.len();
        if f.a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows have unequal length".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| f.a[i][j]);
        Self::new(f.d, a, DVector::from_vec(f.q.clone()), f.provenance, f.eps)
    }

    /// Multiplies Q by c.
    pub fn scaled_q(&self, c: f64) -> Self {
        Self { q: &self.q * c, ..self.clone() }
    }
}

/// The four blocks of F split at index d.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl Blocks {
    pub fn reassemble(&self) -> DMatrix<f64> {
        let k = self.a.nrows();
        let n = k + self.d.nrows();
        DMatrix::from_fn(n, n, |i, j| match (i < k, j < k) {
            (true, true) => self.a[(i, j)],
            (true, false) => self.b[(i, j - k)],
            (false, true) => self.c[(i - k, j)],
            (false, false) => self.d[(i - k, j - k)],
        })
    }
}

/// Splits an N x N matrix with N = d(d+1)/2 into blocks at index d.
pub fn block_partition(f: &DMatrix<f64>, d: usize) -> Result<Blocks> {
    let n = basis_count(d);
    if f.nrows() != n || f.ncols() != n {
        return Err(Error::Dimension(format!("expected {n}x{n}, got {}x{}", f.nrows(), f.ncols())));
    }
    let r = n - d;
    Ok(Blocks {
        a: f.view((0, 0), (d, d)).into_owned(),
        b: f.view((0, d), (d, r)).into_owned(),
        c: f.view((d, 0), (r, d)).into_owned(),
        d: f.view((d, d), (r, r)).into_owned(),
    })
}

/// Which construction produced a substituted matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstKind {
    /// Q replaces column alpha of the full matrix.
    F3,
    /// Q_{d+1..N} replaces a column of the D block.
    F2,
    /// Bordered matrix: Q_alpha, Q_{d+1..N} in the first column next to row alpha of B and D.
    F1,
    /// Plain column substitution into an arbitrary base.
    Generic,
}

/// A matrix with one column replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutedMatrix {
    pub kind: SubstKind,
    /// Zero-based column inside `matrix`.
    pub column: usize,
    pub matrix: DMatrix<f64>,
    /// Column of the base that was replaced.
    pub original: DVector<f64>,
}

impl SubstitutedMatrix {
    /// The base matrix before substitution.
    pub fn restore(&self) -> DMatrix<f64> {
        let mut m = self.matrix.clone();
        m.set_column(self.column, &self.original);
        m
    }

    pub fn determinant(&self) -> f64 {
        scaled_determinant(&self.matrix)
    }
}

/// Replaces column `alpha` (1-based) of `base` by `y`.
pub fn substitute_column(base: &DMatrix<f64>, y: &DVector<f64>, alpha: usize) -> Result<SubstitutedMatrix> {
    if alpha < 1 || alpha > base.ncols() {
        return Err(Error::IndexOutOfRange { index: alpha, max: base.ncols() });
    }
    if y.len() != base.nrows() {
        return Err(Error::Dimension(format!("column of length {} for {} rows", y.len(), base.nrows())));
    }
    let mut m = base.clone();
    let original = base.column(alpha - 1).into_owned();
    m.set_column(alpha - 1, y);
    Ok(SubstitutedMatrix { kind: SubstKind::Generic, column: alpha - 1, matrix: m, original })
}

/// F3^alpha: Q in column alpha of a.
pub fn f3(fd: &FactorData, alpha: usize) -> Result<SubstitutedMatrix> {
    let mut s = substitute_column(&fd.a, &fd.q, alpha)?;
    s.kind = SubstKind::F3;
    Ok(s)
}

/// F2^alpha for alpha in d+1..N: Q_{d+1..N} in column alpha - d of the D block.
pub fn f2(fd: &FactorData, alpha: usize) -> Result<SubstitutedMatrix> {
    let (d, n) = (fd.d, fd.n());
    if alpha <= d || alpha > n {
        return Err(Error::IndexOutOfRange { index: alpha, max: n });
    }
    let blocks = block_partition(&fd.a, d)?;
    let y = fd.q.rows(d, n - d).into_owned();
    let mut s = substitute_column(&blocks.d, &y, alpha - d)?;
    s.kind = SubstKind::F2;
    Ok(s)
}

/// F1^alpha for alpha in 1..d: the bordered matrix with first column (Q_alpha, Q_{d+1..N}),
/// first row (., a_{alpha,d+1..N}) and the D block below.
pub fn f1(fd: &FactorData, alpha: usize) -> Result<SubstitutedMatrix> {
    let (d, n) = (fd.d, fd.n());
    if alpha < 1 || alpha > d {
        return Err(Error::IndexOutOfRange { index: alpha, max: d });
    }
    let r = n - d + 1;
    let idx = |i: usize| if i == 0 { alpha - 1 } else { d + i - 1 };
    let base = DMatrix::from_fn(r, r, |i, j| fd.a[(idx(i), idx(j))]);
    let y = DVector::from_fn(r, |i, _| fd.q[idx(i)]);
    let mut s = substitute_column(&base, &y, 1)?;
    s.kind = SubstKind::F1;
    Ok(s)
}

/// Determinant computed on a row-equilibrated copy, then rescaled.
pub fn scaled_determinant(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut c = m.clone();
    let mut log_scale = 0.0;
    let mut sign = 1.0;
    for i in 0..n {
        let s = c.row(i).amax();
        if s == 0.0 {
            return 0.0;
        }
        let p = s.log2().round();
        let f = 2f64.powf(-p);
        for j in 0..n {
            c[(i, j)] *= f;
        }
        log_scale += p;
    }
    let det = c.lu().determinant();
    if det < 0.0 {
        sign = -1.0;
    }
    sign * (det.abs().log2() + log_scale).exp2()
}

/// det D (the rotation block).
pub fn det_d(fd: &FactorData) -> Result<f64> {
    Ok(scaled_determinant(&block_partition(&fd.a, fd.d)?.d))
}

/// det F (the full matrix).
pub fn det_f(fd: &FactorData) -> f64 {
    scaled_determinant(&fd.a)
}

/// Smallest eigenvalue of a symmetric matrix and whether it is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Definiteness {
    pub lambda_min: f64,
    pub passed: bool,
    /// `1/lambda_min` when positive.
    pub constant: f64,
}

pub fn definiteness_check_matrix(a: &DMatrix<f64>) -> Definiteness {
    let sym = (a + a.transpose()) * 0.5;
    let lambda_min = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    Definiteness { lambda_min, passed: lambda_min > 0.0, constant: if lambda_min > 0.0 { 1.0 / lambda_min } else { f64::INFINITY } }
}

pub fn definiteness_check(fd: &FactorData) -> Definiteness {
    definiteness_check_matrix(&fd.a)
}

/// Diagnostics of the free-constant solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub cramer: DVector<f64>,
    pub direct: DVector<f64>,
    /// Largest relative difference between the two solutions.
    pub agreement: f64,
    pub det_f: f64,
    pub condition_estimate: f64,
    pub lambda_min: f64,
}

/// Cramer's rule on row-equilibrated copies.
pub fn solve_cramer(a: &DMatrix<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    let f = a.transpose();
    let det = scaled_determinant(&f);
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(f.nrows() as i32);
    if det.abs() <= 1e-14 * scale {
        return Err(Error::Singular(format!("|det F| = {det:e} below 1e-14 x scale {scale:e}")));
    }
    let mut x = DVector::zeros(q.len());
    for alpha in 1..=q.len() {
        x[alpha - 1] = substitute_column(&f, q, alpha)?.determinant() / det;
    }
    Ok(x)
}

/// Pivoted LU solve of `a^T X = Q`.
pub fn solve_direct(a: &DMatrix<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    a.transpose()
        .full_piv_lu()
        .solve(q)
        .ok_or_else(|| Error::Singular("pivoted factorization failed".into()))
}

fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    mx / mn
}

/// Solves `sum_alpha C^alpha a_{alpha beta} = Q_beta` by pivoted LU and by Cramer's rule.
pub fn free_constants(fd: &FactorData) -> Result<(DVector<f64>, SolveDiagnostics)> {
    let def = definiteness_check(fd);
    if !def.passed {
        return Err(Error::NotPositiveDefinite(def.lambda_min));
    }
    let direct = solve_direct(&fd.a, &fd.q)?;
    let cramer = solve_cramer(&fd.a, &fd.q)?;
    let scale = direct.amax().max(1e-300);
    let agreement = (&direct - &cramer).amax() / scale;
    let diag = SolveDiagnostics {
        det_f: det_f(fd),
        condition_estimate: condition_estimate(&fd.a),
        lambda_min: def.lambda_min,
        agreement,
        cramer,
        direct: direct.clone(),
    };
    Ok((direct, diag))
}

fn leading_scale(d: usize, eps: f64) -> Result<f64> {
    match d {
        2 => Ok(eps.powf(-0.5)),
        3 => Ok(eps.ln().abs()),
        _ => Err(Error::InvalidParameter(format!("diagonal expansion needs d in {{2, 3}}, got {d}"))),
    }
}

/// Theoretical leading coefficient of a_{alpha alpha}: sqrt2 pi L/sqrt(tau1) (d=2) or 2 pi L/sqrt(tau1 tau2) (d=3).
pub fn diag_leading_coefficient(alpha: usize, d: usize, lame: &LameConstants, tau: &[f64]) -> Result<f64> {
    if alpha < 1 || alpha > d {
        return Err(Error::IndexOutOfRange { index: alpha, max: d });
    }
    let l = lame_rate_constant(d, alpha, lame)?;
    match d {
        2 => Ok(SQRT_2 * PI * l / tau[0].sqrt()),
        3 => Ok(2.0 * PI * l / (tau[0] * tau[1]).sqrt()),
        _ => Err(Error::InvalidParameter(format!("diagonal expansion needs d in {{2, 3}}, got {d}"))),
    }
}

/// Two-term expansion of the diagonal energy entry with a supplied constant K*.
pub fn diag_expansion(alpha: usize, d: usize, lame: &LameConstants, tau: &[f64], eps: f64, k_star: f64) -> Result<f64> {
    let c = diag_leading_coefficient(alpha, d, lame, tau)?;
    Ok(c * leading_scale(d, eps)? + k_star)
}

/// Least-squares fit of `a(eps) = c s(eps) + K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryFit {
    pub leading_coef: f64,
    pub k_star: f64,
    pub residual: f64,
    /// Theoretical value of the leading coefficient.
    pub theoretical_coef: f64,
}

/// Fits the leading coefficient and constant of a diagonal energy entry.
pub fn fit_geometry_constants(
    samples: &[(f64, f64)],
    d: usize,
    alpha: usize,
    lame: &LameConstants,
    tau: &[f64],
) -> Result<GeometryFit> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("need at least three samples".into()));
    }
    let rows: Vec<f64> = samples.iter().map(|(e, _)| leading_scale(d, *e)).collect::<Result<_>>()?;
    let x = DMatrix::from_fn(samples.len(), 2, |i, j| if j == 0 { rows[i] } else { 1.0 });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let (coef, residual) = least_squares(&x, &y)?;
    Ok(GeometryFit {
        leading_coef: coef[0],
        k_star: coef[1],
        residual,
        theoretical_coef: diag_leading_coefficient(alpha, d, lame, tau)?,
    })
}

/// Constant K* with the leading coefficient fixed at c: mean of `a - c s(eps)`.
pub fn fit_constant_with_leading(samples: &[(f64, f64)], d: usize, c: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("need samples".into()));
    }
    let mut acc = 0.0;
    for (e, a) in samples {
        acc += a - c * leading_scale(d, *e)?;
    }
    Ok(acc / samples.len() as f64)
}

/// Asymptotic free constants from limit data: the diagonal-expansion form for d = 2, 3 and
/// Cramer ratios of the limit matrix for d >= 4.
pub fn c_alpha_asymptotic(
    d: usize,
    starred: &FactorData,
    tau: &[f64],
    lame: &LameConstants,
    eps: f64,
    k_star: Option<&[f64]>,
) -> Result<DVector<f64>> {
    if starred.d != d {
        return Err(Error::Dimension(format!("starred data for d = {}, expected {d}", starred.d)));
    }
    let n = basis_count(d);
    let mut x = DVector::zeros(n);
    if d >= 4 {
        let det = det_f(starred);
        if det == 0.0 {
            return Err(Error::Singular("det F* vanishes".into()));
        }
        for alpha in 1..=n {
            x[alpha - 1] = f3(starred, alpha)?.determinant() / det;
        }
        return Ok(x);
    }
    let ks = k_star.ok_or_else(|| Error::MissingFactorData("K* constants are required for d = 2, 3".into()))?;
    if ks.len() < d {
        return Err(Error::MissingFactorData(format!("need {d} K* constants, got {}", ks.len())));
    }
    if tau.len() < d - 1 {
        return Err(Error::MissingFactorData("relative curvatures are required".into()));
    }
    let dd = det_d(starred)?;
    if dd == 0.0 {
        return Err(Error::Singular("det D* vanishes".into()));
    }
    for alpha in 1..=d {
        let c = diag_leading_coefficient(alpha, d, lame, tau)?;
        let ratio = f1(starred, alpha)?.determinant() / dd;
        x[alpha - 1] = ratio / (c * leading_scale(d, eps)? + ks[alpha - 1]);
    }
    for alpha in d + 1..=n {
        x[alpha - 1] = f2(starred, alpha)?.determinant() / dd;
    }
    Ok(x)
}

/// Leading-order factor data at the profile's eps: diagonal energies from the gap
/// integrals, zero off-diagonals, and `Q = -q_leading` for alpha <= d+1 (zero beyond).
pub fn leading_factor_data(profile: &GapProfile, phi: &BoundaryData, lame: &LameConstants, rad: f64) -> Result<FactorData> {
    let d = profile.d;
    let n = basis_count(d);
    let mut a = DMatrix::zeros(n, n);
    let mut q = DVector::zeros(n);
    for alpha in 1..=n {
        a[(alpha - 1, alpha - 1)] = energy_leading(alpha, profile, lame, rad)?.value;
        if alpha <= d + 1 {
            q[alpha - 1] = -q_leading(alpha, phi, profile, lame, rad)?.value;
        }
    }
    FactorData::new(d, a, q, Provenance::Leading, Some(profile.eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(a: DMatrix<f64>, q: Vec<f64>, d: usize) -> FactorData {
        FactorData::new(d, a, DVector::from_vec(q), Provenance::User, None).unwrap()
    }

    #[test]
    fn partition_examples() {
        let f = DMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let b = block_partition(&f, 2).unwrap();
        assert_eq!(b.a.shape(), (2, 2));
        assert_eq!(b.d[(0, 0)], 8.0);
        assert_eq!(b.reassemble(), f);
        let f6 = DMatrix::from_fn(6, 6, |i, j| (i + 7 * j) as f64);
        let b = block_partition(&f6, 3).unwrap();
        assert_eq!(b.d.shape(), (3, 3));
        assert_eq!(b.reassemble(), f6);
        assert!(block_partition(&f6, 2).is_err());
    }

    #[test]
    fn substitution_examples() {
        let i3 = DMatrix::identity(3, 3);
        let s = substitute_column(&i3, &DVector::from_vec(vec![1.0, 2.0, 3.0]), 2).unwrap();
        assert!((s.determinant() - 2.0).abs() < 1e-14);
        assert_eq!(s.restore(), i3);
        let f = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let s = substitute_column(&f, &f.column(0).into_owned(), 1).unwrap();
        assert!((s.determinant() - f.determinant()).abs() < 1e-12);
        let s = substitute_column(&f, &DVector::zeros(3), 3).unwrap();
        assert_eq!(s.determinant(), 0.0);
        assert!(substitute_column(&f, &DVector::zeros(3), 4).is_err());
    }

    #[test]
    fn solve_examples() {
        let q = vec![1.0, -2.0, 3.0];
        let (x, _) = free_constants(&fd(DMatrix::identity(3, 3), q.clone(), 2)).unwrap();
        assert_eq!(x.as_slice(), q.as_slice());
        let (x, diag) = free_constants(&fd(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 4.0])), vec![2.0, 3.0, 4.0], 2)).unwrap();
        assert!((x - DVector::from_element(3, 1.0)).amax() < 1e-15);
        assert!(diag.agreement < 1e-12);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let q = DVector::from_vec(vec![3.0, 3.0]);
        assert!((solve_direct(&a, &q).unwrap() - DVector::from_element(2, 1.0)).amax() < 1e-14);
        assert!((solve_cramer(&a, &q).unwrap() - DVector::from_element(2, 1.0)).amax() < 1e-14);
    }

    #[test]
    fn definiteness_examples() {
        assert_eq!(definiteness_check_matrix(&DMatrix::identity(3, 3)).lambda_min, 1.0);
        let d = definiteness_check_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!((d.lambda_min + 1.0).abs() < 1e-14 && !d.passed);
        let bad = fd(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0])), vec![0.0; 3], 2);
        assert!(matches!(free_constants(&bad), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn diag_examples() {
        let l = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        let v = diag_expansion(1, 2, &l, &[2.0], 1e-4, 0.0).unwrap();
        assert!((v - 100.0 * PI).abs() < 1e-9);
        let l3 = LameConstants::new(1.0, 1.0, None, 3).unwrap();
        let v = diag_expansion(3, 3, &l3, &[1.0, 1.0], (-10f64).exp(), 0.0).unwrap();
        assert!((v - 60.0 * PI).abs() < 1e-9);
        let w = diag_expansion(1, 2, &l, &[2.0], 1e-4, 2.5).unwrap();
        assert!((w - v - 2.5).abs() > 0.0 && (w - diag_expansion(1, 2, &l, &[2.0], 1e-4, 0.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(diag_expansion(3, 2, &l, &[2.0], 1e-4, 0.0).is_err());
        assert!(diag_expansion(1, 4, &l, &[2.0], 1e-4, 0.0).is_err());
    }

    #[test]
    fn fit_examples() {
        let l = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        let eps: [f64; 5] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4];
        let s: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 100.0 * e.powf(-0.5) + 7.0)).collect();
        let f = fit_geometry_constants(&s, 2, 1, &l, &[1.0]).unwrap();
        assert!((f.leading_coef - 100.0).abs() < 1e-8 && (f.k_star - 7.0).abs() < 1e-6);
        let small: [f64; 5] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8];
        let s: Vec<(f64, f64)> = small.iter().map(|&e| (e, 100.0 * e.powf(-0.5) + 7.0 + e.powf(1.0 / 24.0))).collect();
        let f = fit_geometry_constants(&s, 2, 1, &l, &[1.0]).unwrap();
        assert!((f.leading_coef / 100.0 - 1.0).abs() < 0.02 && (f.k_star - 7.0).abs() < 0.5);
        assert!(fit_geometry_constants(&[(1e-4, 1.0); 3], 2, 1, &l, &[1.0]).is_err());
    }

    #[test]
    fn c_alpha_examples() {
        let l = LameConstants::new(1.0, 1.0, None, 2).unwrap();
        // D* = [1], B* = 0, Q* = (1, 0, 0) gives det F1*^1 / det D* = 1
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![f64::INFINITY, f64::INFINITY, 1.0]));
        let s = fd(a, vec![1.0, 0.0, 0.0], 2);
        let x = c_alpha_asymptotic(2, &s, &[2.0], &l, 1e-4, Some(&[0.0, 0.0])).unwrap();
        assert!((x[0] - 0.01 / PI).abs() < 1e-15);
        assert!(c_alpha_asymptotic(2, &s, &[2.0], &l, 1e-4, None).is_err());
        let l4 = LameConstants::new(1.0, 1.0, None, 4).unwrap();
        let mut q = vec![0.0; 10];
        q[0] = 1.0;
        let s4 = fd(DMatrix::identity(10, 10), q.clone(), 4);
        let x = c_alpha_asymptotic(4, &s4, &[], &l4, 1e-4, None).unwrap();
        assert_eq!(x.as_slice(), q.as_slice());
    }
}
