//! Closed-form blow-up rates: rho_i, the case selectors, the envelope constants,
//! the flat-boundary factors and the rate certificates for the segment, cylinder,
//! field and flat-boundary estimates.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::aux_fields::{lame_rate_constant, LameConstants};
use crate::boundary::{basis_count, Family, Parity};
use crate::error::{Error, Result};
use crate::factors::{det_d, det_f, f1, f2, f3, FactorData};

/// `eps^exponent |ln eps|^log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RateTerm {
    #[serde(serialize_with = "ser_ratio")]
    pub exponent: Ratio<i64>,
    pub log_power: i32,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(r))
}

fn fmt_ratio(r: &Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl RateTerm {
    pub const ONE: RateTerm = RateTerm { exponent: Ratio::new_raw(0, 1), log_power: 0 };

    pub fn power(num: i64, den: i64) -> Self {
        Self { exponent: Ratio::new(num, den), log_power: 0 }
    }

    pub fn log() -> Self {
        Self { exponent: Ratio::from_integer(0), log_power: 1 }
    }

    pub fn mul(self, o: Self) -> Self {
        Self { exponent: self.exponent + o.exponent, log_power: self.log_power + o.log_power }
    }

    pub fn inv(self) -> Self {
        Self { exponent: -self.exponent, log_power: -self.log_power }
    }

    pub fn exponent_f64(&self) -> f64 {
        *self.exponent.numer() as f64 / *self.exponent.denom() as f64
    }

    pub fn eval(&self, eps: f64) -> f64 {
        eps.powf(self.exponent_f64()) * eps.ln().abs().powi(self.log_power)
    }
}

impl fmt::Display for RateTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = *self.exponent.numer() != 0;
        match (e, self.log_power) {
            (false, 0) => write!(f, "1"),
            (true, 0) => write!(f, "eps^({})", fmt_ratio(&self.exponent)),
            (false, p) => write!(f, "|ln eps|^({p})"),
            (true, p) => write!(f, "eps^({}) |ln eps|^({p})", fmt_ratio(&self.exponent)),
        }
    }
}

/// Exponent structure of rho_i(d, m; eps).
pub fn rho_term(i: u32, d: usize, m: u32) -> RateTerm {
    let t = d as i64 + i as i64 - 1;
    let m = m as i64;
    match m.cmp(&t) {
        std::cmp::Ordering::Greater => RateTerm::power(t - m, m),
        std::cmp::Ordering::Equal => RateTerm::log(),
        std::cmp::Ordering::Less => RateTerm::ONE,
    }
}

/// rho_i(d, m; eps): `eps^((d+i-1)/m - 1)`, `|ln eps|` or 1.
pub fn rho(i: u32, d: usize, m: u32, eps: f64) -> f64 {
    rho_term(i, d, m).eval(eps)
}

/// (rho_A, rho_B) as rate terms.
pub fn rho_selector_terms(parity: Parity, d: usize, m: u32, k: u32) -> Result<(RateTerm, RateTerm)> {
    let r0 = rho_term(0, d, m);
    let r2 = rho_term(2, d, m);
    let a = match parity {
        Parity::A1 => rho_term(k, d, m).mul(r0.inv()),
        Parity::A2 | Parity::A3 => r0.inv(),
        Parity::None => return Err(Error::CaseNotCovered("parity class none has no rate selector".into())),
    };
    let b = match parity {
        Parity::A2 => rho_term(k + 1, d, m).mul(r2.inv()),
        _ => r2.inv(),
    };
    Ok((a, b))
}

pub fn rho_selectors(parity: Parity, d: usize, m: u32, k: u32, eps: f64) -> Result<(f64, f64)> {
    let (a, b) = rho_selector_terms(parity, d, m, k)?;
    Ok((a.eval(eps), b.eval(eps)))
}

/// G_ij(sigma): the flat-boundary factor. With sigma = 0 only the last term remains.
pub fn flat_gap_factor(i: u32, kappa_j: f64, d: usize, m: u32, eps: f64, sigma: f64) -> Result<f64> {
    if sigma < 0.0 {
        return Err(Error::Domain("sigma must be nonnegative".into()));
    }
    let n = (d - 1) as f64;
    let (i_f, m_f) = (i as f64, m as f64);
    let tail = kappa_j.powf(-(n + i_f) / m_f) * eps * rho(i, d, m, eps);
    if sigma == 0.0 {
        return Ok(tail);
    }
    Ok(sigma.powf((n + i_f) / n) + sigma.powf((n - 1.0 + i_f) / n) * kappa_j.powf(-1.0 / m_f) * eps.powf(1.0 / m_f) + tail)
}

/// Inputs shared by all certificates.
#[derive(Debug, Clone)]
pub struct BoundsInput {
    pub family: Family,
    pub parity: Parity,
    pub d: usize,
    pub m: u32,
    pub k: u32,
    pub eta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub lame: LameConstants,
    pub starred: Option<FactorData>,
}

impl BoundsInput {
    /// Parity taken from the family (E1 -> A1, E2 -> A2, E3 -> A3).
    pub fn new(family: Family, d: usize, m: u32, k: u32, eta: f64, kappa: (f64, f64), lame: LameConstants) -> Self {
        let parity = match family {
            Family::E1 => Parity::A1,
            Family::E2 => Parity::A2,
            Family::E3 => Parity::A3,
            Family::Custom => Parity::None,
        };
        Self { family, parity, d, m, k, eta, kappa1: kappa.0, kappa2: kappa.1, lame, starred: None }
    }

    pub fn with_starred(mut self, s: FactorData) -> Self {
        self.starred = Some(s);
        self
    }

    pub fn with_parity(mut self, p: Parity) -> Self {
        self.parity = p;
        self
    }
}

/// Basis index inside an expression: fixed or bound by the enclosing max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Idx {
    Fixed(usize),
    Var,
}

impl fmt::Display for Idx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Idx::Fixed(a) => write!(f, "{a}"),
            Idx::Var => write!(f, "a"),
        }
    }
}

/// Symbolic prefactor.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Eta,
    Kappa1,
    Kappa2,
    Eps,
    Lame(Idx),
    QStar(Idx),
    DetF1(Idx),
    DetF2(Idx),
    DetF3(Idx),
    DetD,
    DetF,
    Rate(RateTerm),
    FlatG { i: u32, j: u8, sigma: f64 },
    Pow(Box<Expr>, Ratio<i64>),
    Abs(Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Add(Vec<Expr>),
    Max { lo: usize, hi: usize, body: Box<Expr> },
    /// Body at the first index whose `test` is numerically nonzero.
    FirstNonzero { lo: usize, hi: usize, test: Box<Expr>, body: Box<Expr> },
}

fn pw(e: Expr, num: i64, den: i64) -> Expr {
    Expr::Pow(Box::new(e), Ratio::new(num, den))
}
fn mul(v: Vec<Expr>) -> Expr {
    Expr::Mul(v)
}
fn div(a: Expr, b: Expr) -> Expr {
    Expr::Div(Box::new(a), Box::new(b))
}
fn abs(a: Expr) -> Expr {
    Expr::Abs(Box::new(a))
}
fn add(v: Vec<Expr>) -> Expr {
    Expr::Add(v)
}
fn emax(lo: usize, hi: usize, body: Expr) -> Expr {
    Expr::Max { lo, hi, body: Box::new(body) }
}
fn one_plus(e: Expr) -> Expr {
    add(vec![Expr::Num(1.0), e])
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Eta => write!(f, "eta"),
            Expr::Kappa1 => write!(f, "kappa1"),
            Expr::Kappa2 => write!(f, "kappa2"),
            Expr::Eps => write!(f, "eps"),
            Expr::Lame(i) => write!(f, "L[{i}]"),
            Expr::QStar(i) => write!(f, "Q*[{i}]"),
            Expr::DetF1(i) => write!(f, "detF1*[{i}]"),
            Expr::DetF2(i) => write!(f, "detF2*[{i}]"),
            Expr::DetF3(i) => write!(f, "detF3*[{i}]"),
            Expr::DetD => write!(f, "detD*"),
            Expr::DetF => write!(f, "detF*"),
            Expr::Rate(r) => write!(f, "{r}"),
            Expr::FlatG { i, j, sigma } => write!(f, "G[{i},{j}]({sigma})"),
            Expr::Pow(b, p) => write!(f, "{b}^({})", fmt_ratio(p)),
            Expr::Abs(b) => write!(f, "|{b}|"),
            Expr::Mul(v) => {
                for (n, e) in v.iter().enumerate() {
                    if n > 0 {
                        write!(f, "*")?;
                    }
                    match e {
                        Expr::Add(_) | Expr::Div(..) => write!(f, "({e})")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
            Expr::Div(a, b) => {
                let wrap = |e: &Expr| matches!(e, Expr::Add(_) | Expr::Mul(_) | Expr::Div(..));
                if wrap(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                if wrap(b) {
                    write!(f, "/({b})")
                } else {
                    write!(f, "/{b}")
                }
            }
            Expr::Add(v) => {
                for (n, e) in v.iter().enumerate() {
                    if n > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            Expr::Max { lo, hi, body } => write!(f, "max_{{a={lo}..{hi}}}[{body}]"),
            Expr::FirstNonzero { lo, hi, test, body } => {
                write!(f, "first_{{a={lo}..{hi}: {test} != 0}}[{body}]")
            }
        }
    }
}

/// Evaluation of an expression or certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// False when factor tokens were missing and evaluated as 1.
    pub resolved: bool,
    pub notes: Vec<String>,
}

struct Ctx<'a> {
    input: &'a BoundsInput,
    eps: f64,
    alpha: Option<usize>,
    resolved: bool,
    notes: Vec<String>,
}

impl Ctx<'_> {
    fn idx(&self, i: Idx) -> Result<usize> {
        match i {
            Idx::Fixed(a) => Ok(a),
            Idx::Var => self.alpha.ok_or_else(|| Error::InvalidParameter("free index outside max".into())),
        }
    }

    fn factor<F: Fn(&FactorData) -> Result<f64>>(&mut self, f: F) -> Result<f64> {
        match &self.input.starred {
            Some(s) => f(s),
            None => {
                self.resolved = false;
                Ok(1.0)
            }
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<f64> {
        let inp = self.input;
        Ok(match e {
            Expr::Num(v) => *v,
            Expr::Eta => inp.eta,
            Expr::Kappa1 => inp.kappa1,
            Expr::Kappa2 => inp.kappa2,
            Expr::Eps => self.eps,
            Expr::Lame(i) => lame_rate_constant(inp.d, self.idx(*i)?, &inp.lame)?,
            Expr::QStar(i) => {
                let a = self.idx(*i)?;
                self.factor(|s| s.q.get(a - 1).copied().ok_or(Error::IndexOutOfRange { index: a, max: s.q.len() }))?
            }
            Expr::DetF1(i) => {
                let a = self.idx(*i)?;
                self.factor(|s| Ok(f1(s, a)?.determinant()))?
            }
            Expr::DetF2(i) => {
                let a = self.idx(*i)?;
                self.factor(|s| Ok(f2(s, a)?.determinant()))?
            }
            Expr::DetF3(i) => {
                let a = self.idx(*i)?;
                self.factor(|s| Ok(f3(s, a)?.determinant()))?
            }
            Expr::DetD => self.factor(det_d)?,
            Expr::DetF => self.factor(|s| Ok(det_f(s)))?,
            Expr::Rate(r) => r.eval(self.eps),
            Expr::FlatG { i, j, sigma } => {
                let kj = if *j == 1 { inp.kappa1 } else { inp.kappa2 };
                flat_gap_factor(*i, kj, inp.d, inp.m, self.eps, *sigma)?
            }
            Expr::Pow(b, p) => self.eval(b)?.powf(*p.numer() as f64 / *p.denom() as f64),
            Expr::Abs(b) => self.eval(b)?.abs(),
            Expr::Mul(v) => {
                let mut acc = 1.0;
                for t in v {
                    acc *= self.eval(t)?;
                }
                acc
            }
            Expr::Div(a, b) => self.eval(a)? / self.eval(b)?,
            Expr::Add(v) => {
                let mut acc = 0.0;
                for t in v {
                    acc += self.eval(t)?;
                }
                acc
            }
            Expr::Max { lo, hi, body } => {
                let saved = self.alpha;
                let mut best = f64::NEG_INFINITY;
                for a in *lo..=*hi {
                    self.alpha = Some(a);
                    best = best.max(self.eval(body)?);
                }
                self.alpha = saved;
                best
            }
            Expr::FirstNonzero { lo, hi, test, body } => {
                let saved = self.alpha;
                let mut vals = Vec::new();
                for a in *lo..=*hi {
                    self.alpha = Some(a);
                    vals.push((a, self.eval(test)?));
                }
                let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.1.abs()));
                let hit = vals.iter().find(|v| v.1.abs() > 1e-12 * scale.max(1e-300) && v.1 != 0.0);
                let out = match hit {
                    Some(&(a, _)) => {
                        self.alpha = Some(a);
                        self.notes.push(format!("lower bound realized at alpha0 = {a}"));
                        self.eval(body)?
                    }
                    None => {
                        self.notes.push("lower bound unavailable: all determinants vanish numerically".into());
                        0.0
                    }
                };
                self.alpha = saved;
                out
            }
        })
    }
}

impl Expr {
    pub fn evaluate(&self, input: &BoundsInput, eps: f64) -> Result<Evaluation> {
        let mut ctx = Ctx { input, eps, alpha: None, resolved: true, notes: Vec::new() };
        let value = ctx.eval(self)?;
        Ok(Evaluation { value, resolved: ctx.resolved, notes: ctx.notes })
    }

    /// True when the expression needs starred factor data.
    pub fn needs_factors(&self) -> bool {
        match self {
            Expr::QStar(_) | Expr::DetF1(_) | Expr::DetF2(_) | Expr::DetF3(_) | Expr::DetD | Expr::DetF => true,
            Expr::Pow(b, _) | Expr::Abs(b) => b.needs_factors(),
            Expr::Mul(v) | Expr::Add(v) => v.iter().any(Expr::needs_factors),
            Expr::Div(a, b) => a.needs_factors() || b.needs_factors(),
            Expr::Max { body, .. } => body.needs_factors(),
            Expr::FirstNonzero { test, body, .. } => test.needs_factors() || body.needs_factors(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Location {
    /// x' = 0.
    Segment,
    /// |x'| = eps^(1/m).
    Cylinder,
    /// A point at distance `xnorm` from the axis.
    Field { xnorm: f64 },
    /// Flat contact set with measure `sigma`.
    Flat { sigma: f64 },
}

/// Which estimate to tabulate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem {
    Segment,
    Cylinder,
    Field { xnorm: f64 },
    Flat { sigma: f64 },
}

/// One side of a rate estimate: `prefactor * rate`, universal constants set to 1.
#[derive(Debug, Clone)]
pub struct RateCertificate {
    pub theorem: String,
    pub case_label: String,
    pub side: Side,
    pub location: Location,
    pub rate: RateTerm,
    pub prefactor: Expr,
    pub notes: Vec<String>,
    pub input: BoundsInput,
}

impl RateCertificate {
    pub fn evaluate(&self, eps: f64) -> Result<Evaluation> {
        let mut e = self.prefactor.evaluate(&self.input, eps)?;
        e.value *= self.rate.eval(eps);
        e.notes.splice(0..0, self.notes.iter().cloned());
        Ok(e)
    }

    pub fn prefactor_string(&self) -> String {
        self.prefactor.to_string()
    }
}

fn ratio(n: i64, d: i64) -> (i64, i64) {
    (n, d)
}

/// H_A* and H_B* as expressions, first matching branch.
pub fn envelope_exprs(input: &BoundsInput) -> Result<(Expr, Expr)> {
    let (d, m, k) = (input.d as i64, input.m as i64, input.k as i64);
    let n = basis_count(input.d);
    let par = input.parity;
    let need_parity = || Error::CaseNotCovered("the envelope branch needs a parity class".into());
    let lq = |lo: usize, hi: usize, p: (i64, i64)| {
        emax(lo, hi, mul(vec![pw(Expr::Kappa2, p.0, p.1), div(abs(Expr::QStar(Idx::Var)), Expr::Lame(Idx::Var))]))
    };
    let f3max = |lo: usize, hi: usize| emax(lo, hi, div(abs(Expr::DetF3(Idx::Var)), Expr::DetF));

    let ha = if m >= d + k - 1 {
        match par {
            Parity::A1 => mul(vec![Expr::Eta, pw(Expr::Kappa2, d - 1, m), pw(Expr::Kappa1, -(d + k - 1), m)]),
            Parity::A2 | Parity::A3 => lq(1, input.d, ratio(d - 1, m)),
            Parity::None => return Err(need_parity()),
        }
    } else if m >= d + 1 {
        lq(1, input.d, ratio(d - 1, m))
    } else if m >= d - 1 {
        emax(
            1,
            input.d,
            mul(vec![
                pw(Expr::Kappa2, d - 1, m),
                div(abs(Expr::DetF1(Idx::Var)), mul(vec![Expr::Lame(Idx::Var), Expr::DetD])),
            ]),
        )
    } else {
        f3max(1, input.d)
    };

    let hb = if m >= d + k {
        match par {
            Parity::A2 => mul(vec![Expr::Eta, pw(Expr::Kappa2, d + 1, m), pw(Expr::Kappa1, -(d + k), m)]),
            Parity::A1 | Parity::A3 => lq(input.d + 1, n, ratio(d + 1, m)),
            Parity::None => return Err(need_parity()),
        }
    } else if m >= d + 1 {
        lq(input.d + 1, n, ratio(d + 1, m))
    } else if m >= d - 1 {
        emax(input.d + 1, n, div(abs(Expr::DetF2(Idx::Var)), Expr::DetD))
    } else {
        f3max(input.d + 1, n)
    };
    Ok((ha, hb))
}

fn eval_constant(e: &Expr, input: &BoundsInput) -> Result<f64> {
    if e.needs_factors() && input.starred.is_none() {
        return Err(Error::MissingFactorData(format!("branch {e} needs starred factor data")));
    }
    Ok(e.evaluate(input, 0.5)?.value)
}

/// H_A* alone.
pub fn envelope_a(input: &BoundsInput) -> Result<f64> {
    eval_constant(&envelope_exprs(input)?.0, input)
}

/// H_B* alone.
pub fn envelope_b(input: &BoundsInput) -> Result<f64> {
    eval_constant(&envelope_exprs(input)?.1, input)
}

/// Numerical (H_A*, H_B*); errors when a needed branch lacks factor data.
pub fn envelope_constants(input: &BoundsInput) -> Result<(f64, f64)> {
    let (a, b) = envelope_exprs(input)?;
    Ok((eval_constant(&a, input)?, eval_constant(&b, input)?))
}

fn not_covered(what: &str, input: &BoundsInput) -> Error {
    Error::CaseNotCovered(format!(
        "{what}: ({:?}, d={}, m={}, k={}) is not a stated case",
        input.family, input.d, input.m, input.k
    ))
}

fn cert(
    input: &BoundsInput,
    theorem: &str,
    label: &str,
    side: Side,
    location: Location,
    rate: RateTerm,
    prefactor: Expr,
) -> RateCertificate {
    RateCertificate {
        theorem: theorem.into(),
        case_label: label.into(),
        side,
        location,
        rate,
        prefactor,
        notes: Vec::new(),
        input: input.clone(),
    }
}

fn is_listed(f: Family) -> bool {
    matches!(f, Family::E1 | Family::E2 | Family::E3)
}

fn segment_table(input: &BoundsInput) -> Result<Vec<RateCertificate>> {
    let (d, m, k) = (input.d as i64, input.m as i64, input.k as i64);
    let du = input.d;
    let loc = Location::Segment;
    let th = "segment";
    if is_listed(input.family) && m <= d {
        if m >= d - 1 {
            let rate = RateTerm::power(-1, 1).mul(rho_term(0, du, input.m).inv());
            let body = |kap: Expr| {
                mul(vec![
                    pw(kap, d - 1, m),
                    div(abs(Expr::DetF1(Idx::Var)), mul(vec![abs(Expr::Lame(Idx::Var)), Expr::DetD])),
                ])
            };
            let up = emax(1, du, body(Expr::Kappa2));
            let lo = Expr::FirstNonzero { lo: 1, hi: du, test: Box::new(Expr::DetF1(Idx::Var)), body: Box::new(body(Expr::Kappa1)) };
            let label = "segment (i), d-1<=m<=d";
            return Ok(vec![
                cert(input, th, label, Side::Lower, loc, rate, lo),
                cert(input, th, label, Side::Upper, loc, rate, up),
            ]);
        }
        let rate = RateTerm::power(-1, 1);
        let body = div(abs(Expr::DetF3(Idx::Var)), Expr::DetF);
        let up = emax(1, du, body.clone());
        let lo = Expr::FirstNonzero { lo: 1, hi: du, test: Box::new(Expr::DetF3(Idx::Var)), body: Box::new(body) };
        let label = "segment (i), m<d-1";
        return Ok(vec![
            cert(input, th, label, Side::Lower, loc, rate, lo),
            cert(input, th, label, Side::Upper, loc, rate, up),
        ]);
    }
    if input.family == Family::E1 && m >= d + k {
        let rate = rho_term(input.k, du, input.m).mul(RateTerm::power(-1, 1)).mul(rho_term(0, du, input.m).inv());
        let lo = mul(vec![Expr::Eta, pw(Expr::Kappa1, d - 1, m), pw(Expr::Kappa2, -(d + k - 1), m)]);
        let up = mul(vec![Expr::Eta, pw(Expr::Kappa2, d - 1, m), pw(Expr::Kappa1, -(d + k - 1), m)]);
        let label = "segment (ii), E1, m>=d+k";
        return Ok(vec![
            cert(input, th, label, Side::Lower, loc, rate, lo),
            cert(input, th, label, Side::Upper, loc, rate, up),
        ]);
    }
    Err(not_covered("segment estimate", input))
}

fn cylinder_table(input: &BoundsInput) -> Result<Vec<RateCertificate>> {
    let (d, m, k) = (input.d as i64, input.m as i64, input.k as i64);
    let du = input.d;
    let n = basis_count(du);
    let loc = Location::Cylinder;
    let th = "cylinder";
    let e_rate = RateTerm::power(k - m, m);
    let q_body = |kap: Expr| mul(vec![pw(kap, d + 1, m), div(abs(Expr::QStar(Idx::Var)), abs(Expr::Lame(Idx::Var)))]);
    let q_fixed = |kap: Expr| {
        mul(vec![pw(kap, d + 1, m), div(abs(Expr::QStar(Idx::Fixed(du + 1))), abs(Expr::Lame(Idx::Fixed(du + 1))))])
    };
    let over = |e: Expr, kap: Expr| div(e, one_plus(kap));
    let with_q_note = |mut c: RateCertificate| {
        if let Some(s) = &input.starred {
            let q = s.q[du];
            c.notes.push(format!("checked Q*[{}] = {q:e}", du + 1));
            if q == 0.0 {
                c.notes.push("lower bound not certified: Q*[d+1] vanishes".into());
            }
        }
        c
    };

    if is_listed(input.family) && d < m && m < d + k && k > 1 {
        // integer m makes d < m < d+1 empty
        let rate = RateTerm::power(1 - m, m).mul(rho_term(2, du, input.m).inv());
        let up = over(emax(du + 1, n, q_body(Expr::Kappa2)), Expr::Kappa1);
        let lo = over(q_fixed(Expr::Kappa2), Expr::Kappa2);
        let label = "cylinder (i), d+1<=m<d+k";
        return Ok(vec![
            with_q_note(cert(input, th, label, Side::Lower, loc, rate, lo)),
            cert(input, th, label, Side::Upper, loc, rate, up),
        ]);
    }
    let first = (m > d + k && k >= 1 && k != 2) || (m == d + k && k == 1);
    let second = m == d + k && k > 2;
    match input.family {
        Family::E2 if first => {
            let lo = over(
                mul(vec![Expr::Eta, one_plus(mul(vec![pw(Expr::Kappa1, d + 1, m), pw(Expr::Kappa2, -(d + k), m)]))]),
                Expr::Kappa2,
            );
            let up = over(
                mul(vec![Expr::Eta, one_plus(mul(vec![pw(Expr::Kappa2, d + 1, m), pw(Expr::Kappa1, -(d + k), m)]))]),
                Expr::Kappa1,
            );
            let label = "cylinder (ii), E2, m>d+k or m=d+k=d+1";
            Ok(vec![
                cert(input, th, label, Side::Lower, loc, e_rate, lo),
                cert(input, th, label, Side::Upper, loc, e_rate, up),
            ])
        }
        Family::E2 if second => {
            let rate = rho_term(input.k + 1, du, input.m)
                .mul(RateTerm::power(1 - m, m))
                .mul(rho_term(2, du, input.m).inv());
            let lo = over(mul(vec![Expr::Eta, pw(Expr::Kappa1, d + 1, m), pw(Expr::Kappa2, -(d + k), m)]), Expr::Kappa2);
            let up = over(mul(vec![Expr::Eta, pw(Expr::Kappa2, d + 1, m), pw(Expr::Kappa1, -(d + k), m)]), Expr::Kappa1);
            let label = "cylinder (ii), E2, m=d+k, k>2";
            Ok(vec![
                cert(input, th, label, Side::Lower, loc, rate, lo),
                cert(input, th, label, Side::Upper, loc, rate, up),
            ])
        }
        Family::E3 if first => {
            let label = "cylinder (iii), E3, m>d+k or m=d+k=d+1";
            Ok(vec![
                cert(input, th, label, Side::Lower, loc, e_rate, over(Expr::Eta, Expr::Kappa2)),
                cert(input, th, label, Side::Upper, loc, e_rate, over(Expr::Eta, Expr::Kappa1)),
            ])
        }
        Family::E3 if second => {
            let up = over(add(vec![emax(du + 1, n, q_body(Expr::Kappa2)), Expr::Eta]), Expr::Kappa1);
            let lo = over(q_fixed(Expr::Kappa1), Expr::Kappa2);
            let label = "cylinder (iii), E3, m=d+k, k>2";
            Ok(vec![
                with_q_note(cert(input, th, label, Side::Lower, loc, e_rate, lo)),
                cert(input, th, label, Side::Upper, loc, e_rate, up),
            ])
        }
        _ => Err(not_covered("cylinder estimate", input)),
    }
}

fn field_table(input: &BoundsInput, xnorm: f64) -> Result<Vec<RateCertificate>> {
    if input.parity == Parity::None {
        return Err(Error::CaseNotCovered("field envelope needs a parity class A1, A2 or A3".into()));
    }
    let (ha, hb) = envelope_exprs(input)?;
    let (ra, rb) = rho_selector_terms(input.parity, input.d, input.m, input.k)?;
    let r = Expr::Num(xnorm);
    let num = add(vec![
        mul(vec![ha, Expr::Rate(ra)]),
        mul(vec![hb, Expr::Rate(rb), r.clone()]),
        mul(vec![Expr::Eta, pw(r.clone(), input.k as i64, 1)]),
    ]);
    let den = add(vec![Expr::Eps, mul(vec![Expr::Kappa1, pw(r, input.m as i64, 1)])]);
    let mut c = cert(input, "field", "field envelope", Side::Upper, Location::Field { xnorm }, RateTerm::ONE, div(num, den));
    c.notes.push(format!("parity {:?}", input.parity));
    Ok(vec![c])
}

fn flat_table(input: &BoundsInput, sigma: f64) -> Result<Vec<RateCertificate>> {
    let (d, k) = (input.d as i64, input.k as i64);
    let loc = Location::Flat { sigma };
    let rate = RateTerm::power(-1, 1);
    let s = || Expr::Num(sigma);
    let sk = || pw(s(), k, d - 1);
    let g = |i: u32, j: u8| Expr::FlatG { i, j, sigma };
    let ku = input.k;
    let th = "flat";
    let mut out = match input.family {
        Family::E1 => {
            let lo = mul(vec![Expr::Eta, add(vec![div(g(ku, 2), g(0, 1)), sk()])]);
            let up = mul(vec![Expr::Eta, add(vec![div(g(ku, 1), g(0, 2)), sk()])]);
            vec![
                cert(input, th, "flat (i), E1", Side::Lower, loc, rate, lo),
                cert(input, th, "flat (i), E1", Side::Upper, loc, rate, up),
            ]
        }
        Family::E2 => {
            let s1 = || pw(s(), 1, d - 1);
            let lo = mul(vec![Expr::Eta, add(vec![mul(vec![s1(), div(g(ku + 1, 2), g(2, 1))]), sk()])]);
            let up = mul(vec![Expr::Eta, add(vec![mul(vec![s1(), div(g(ku + 1, 1), g(2, 2))]), sk()])]);
            vec![
                cert(input, th, "flat (ii), E2", Side::Lower, loc, rate, lo),
                cert(input, th, "flat (ii), E2", Side::Upper, loc, rate, up),
            ]
        }
        Family::E3 => {
            let e = mul(vec![Expr::Eta, sk()]);
            vec![
                cert(input, th, "flat (iii), E3", Side::Lower, loc, rate, e.clone()),
                cert(input, th, "flat (iii), E3", Side::Upper, loc, rate, e),
            ]
        }
        Family::Custom => return Err(not_covered("flat estimate", input)),
    };
    let mut unified = cert(input, th, "flat, unified", Side::Upper, loc, rate, mul(vec![Expr::Eta, sk()]));
    unified.notes.push("order-of-magnitude form, valid as two-sided up to constants".into());
    out.push(unified);
    Ok(out)
}

/// Certificates for the requested estimate. Parameter tuples outside every stated case
/// are rejected.
pub fn rate_table(theorem: Theorem, input: &BoundsInput) -> Result<Vec<RateCertificate>> {
    if input.d < 2 || input.m < 2 {
        return Err(Error::InvalidParameter("need d >= 2 and m >= 2".into()));
    }
    match theorem {
        Theorem::Segment => segment_table(input),
        Theorem::Cylinder => cylinder_table(input),
        Theorem::Field { xnorm } => field_table(input, xnorm),
        Theorem::Flat { sigma } => flat_table(input, sigma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inp(f: Family, d: usize, m: u32, k: u32) -> BoundsInput {
        BoundsInput::new(f, d, m, k, 1.0, (1.0, 1.0), LameConstants::unit())
    }

    #[test]
    fn rho_examples() {
        assert!((rho(0, 2, 2, 1e-4) - 100.0).abs() < 1e-9);
        assert!((rho(0, 3, 2, (-10f64).exp()) - 10.0).abs() < 1e-12);
        assert_eq!(rho(2, 3, 2, 0.5), 1.0);
    }

    #[test]
    fn selector_examples() {
        let e = 1e-6;
        let (a, _) = rho_selectors(Parity::A1, 2, 6, 2, e).unwrap();
        assert!((a / e.powf(1.0 / 3.0) - 1.0).abs() < 1e-10);
        let (a, _) = rho_selectors(Parity::A2, 2, 2, 1, e).unwrap();
        assert!((a / e.sqrt() - 1.0).abs() < 1e-10);
        let (_, b) = rho_selectors(Parity::A3, 3, 4, 1, e).unwrap();
        assert!((b * e.ln().abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_examples() {
        let ha = envelope_a(&inp(Family::E1, 2, 4, 2)).unwrap();
        assert!((ha - 1.0).abs() < 1e-15);
        let mut i = inp(Family::E2, 2, 6, 1);
        i.kappa2 = 2.0;
        let hb = envelope_b(&i).unwrap();
        assert!((hb - 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(envelope_constants(&inp(Family::E1, 2, 2, 2)), Err(Error::MissingFactorData(_))));
    }

    #[test]
    fn flat_examples() {
        assert!((flat_gap_factor(0, 1.0, 2, 2, 1e-4, 0.0).unwrap() - 1e-2).abs() < 1e-15);
        let v = flat_gap_factor(2, 1.0, 3, 2, 1e-6, 0.25).unwrap();
        assert!((v - (0.0625 + 0.125e-3 + 1e-6)).abs() < 1e-12);
        assert!((flat_gap_factor(0, 1.0, 2, 2, 1e-14, 1.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn table_examples() {
        let t = rate_table(Theorem::Segment, &inp(Family::E1, 2, 6, 2)).unwrap();
        assert_eq!(t[1].rate.exponent, Ratio::new(-2, 3));
        let t = rate_table(Theorem::Cylinder, &inp(Family::E3, 2, 4, 1)).unwrap();
        assert_eq!(t[0].rate.exponent, Ratio::new(-3, 4));
        let t = rate_table(Theorem::Segment, &inp(Family::E2, 2, 2, 1)).unwrap();
        assert_eq!(t[1].rate.exponent, Ratio::new(-1, 2));
        assert!(!t[1].evaluate(1e-4).unwrap().resolved);
        assert!(matches!(rate_table(Theorem::Segment, &inp(Family::E2, 2, 4, 1)), Err(Error::CaseNotCovered(_))));
    }
}
