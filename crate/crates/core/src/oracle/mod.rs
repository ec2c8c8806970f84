//! Plane-strain finite-element oracle on two nearly touching disks.
//!
//! Every decomposed Dirichlet problem (one per rigid motion plus the boundary-data
//! problem) is solved on one factorized stiffness matrix; energy pairings and the
//! Q functionals are formed from volume integrals.

mod banded;
mod fem;
mod mesh;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

pub use banded::{BandedCholesky, BandedSpd};
pub use fem::{element_stiffness, energy_pairing, gradient_at, q_functional, FemSystem, Locator, SolveResult};
pub use mesh::{build_reference_domain, Mesh, MeshParams, NodeTag, ReferenceDomain};

use crate::aux_fields::LameConstants;
use crate::boundary::{basis_count, rigid_basis, BoundaryData};
use crate::error::{Error, Result};
use crate::factors::{diag_leading_coefficient, fit_constant_with_leading, free_constants, FactorData, Provenance, SolveDiagnostics};
use crate::fit::{richardson_fit, richardson_fit2, RichardsonFit};

/// Geometry, material and mesh settings of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub r1: f64,
    pub r0: f64,
    pub lame: LameConstants,
    pub mesh: MeshParams,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { r1: 0.5, r0: 1.0, lame: LameConstants::unit(), mesh: MeshParams::default() }
    }
}

/// Default gap sweep.
pub const SWEEP_EPS: [f64; 5] = [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3];

/// All subproblem solutions at one eps.
#[derive(Debug)]
pub struct FullSolution {
    pub domain: ReferenceDomain,
    pub system: FemSystem,
    /// Index 0 is the boundary-data problem, index alpha the rigid-motion problems.
    pub fields: Vec<SolveResult>,
    pub factors: FactorData,
    pub constants: DVector<f64>,
    pub diagnostics: SolveDiagnostics,
    /// `max_beta |Q_beta - sum_alpha C^alpha a_{alpha beta}|` relative to |Q| + |a||C|.
    pub flux_residual: f64,
    locator: Locator,
}

impl FullSolution {
    pub fn eps(&self) -> f64 {
        self.domain.eps
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.system.mesh
    }

    /// (0, eps/2).
    pub fn midgap(&self) -> [f64; 2] {
        [0.0, 0.5 * self.domain.eps]
    }

    /// Gradient of the single field `idx` at x.
    pub fn grad_field(&self, idx: usize, x: [f64; 2]) -> Result<DMatrix<f64>> {
        gradient_at(&[(&self.fields[idx], 1.0)], &self.locator, x)
    }

    /// `sum_alpha C^alpha grad u_alpha + grad u_0` at x.
    pub fn grad_u(&self, x: [f64; 2]) -> Result<DMatrix<f64>> {
        let mut parts: Vec<(&SolveResult, f64)> = vec![(&self.fields[0], 1.0)];
        for a in 1..self.fields.len() {
            parts.push((&self.fields[a], self.constants[a - 1]));
        }
        gradient_at(&parts, &self.locator, x)
    }

    /// Plain-text dump: header lines starting with `#`, then `nodes N` followed by
    /// `index x y tag` rows, `triangles M` followed by `index n0 n1 n2` rows, and one
    /// `field name` block per solution with `index u_x u_y` rows.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write;
        let mesh = self.mesh();
        let mut out = String::new();
        let _ = writeln!(out, "# lamegap mesh dump v1");
        let _ = writeln!(out, "# eps {}", self.eps());
        let _ = writeln!(out, "nodes {}", mesh.nodes.len());
        for (i, (p, t)) in mesh.nodes.iter().zip(&mesh.tags).enumerate() {
            let tag = match t {
                NodeTag::Inner => "inner",
                NodeTag::Outer => "outer",
                NodeTag::Interior => "interior",
            };
            let _ = writeln!(out, "{i} {} {} {tag}", p[0], p[1]);
        }
        let _ = writeln!(out, "triangles {}", mesh.triangles.len());
        for (i, t) in mesh.triangles.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        for (k, f) in self.fields.iter().enumerate() {
            let _ = writeln!(out, "field u{k}");
            for i in 0..mesh.nodes.len() {
                let _ = writeln!(out, "{i} {} {}", f.u[2 * i], f.u[2 * i + 1]);
            }
        }
        let _ = writeln!(out, "field u");
        for i in 0..mesh.nodes.len() {
            let mut u = [self.fields[0].u[2 * i], self.fields[0].u[2 * i + 1]];
            for a in 1..self.fields.len() {
                u[0] += self.constants[a - 1] * self.fields[a].u[2 * i];
                u[1] += self.constants[a - 1] * self.fields[a].u[2 * i + 1];
            }
            let _ = writeln!(out, "{i} {} {}", u[0], u[1]);
        }
        out
    }
}

/// Solves the decomposed problems on the reference disks at gap `eps`.
pub fn solve_full(phi: &BoundaryData, eps: f64, cfg: &OracleConfig) -> Result<FullSolution> {
    if phi.d != 2 {
        return Err(Error::Dimension("the oracle is two-dimensional".into()));
    }
    phi.check_normalization()?;
    let (domain, mesh) = build_reference_domain(eps, cfg.r1, cfg.r0, &cfg.mesh)?;
    let system = FemSystem::new(Arc::new(mesh), cfg.lame)?;
    let n = basis_count(2);
    let zero = |_: [f64; 2]| [0.0, 0.0];
    let data = |p: [f64; 2]| {
        let v = phi.value(&[p[0]]);
        [v[0], v[1]]
    };
    let fields: Vec<SolveResult> = (0..=n)
        .into_par_iter()
        .map(|a| {
            if a == 0 {
                Ok(system.solve(&zero, &data, "u0: 0 on inclusion, phi outside"))
            } else {
                let psi = rigid_basis(2, a)?;
                let f = move |p: [f64; 2]| {
                    let v = psi.value(&p);
                    [v[0], v[1]]
                };
                Ok(system.solve(&f, &zero, &format!("u{a}: psi_{a} on inclusion, 0 outside")))
            }
        })
        .collect::<Result<_>>()?;
    for f in &fields {
        if f.residual > 1e-10 {
            return Err(Error::Accuracy(format!("discrete residual {:e} for {}", f.residual, f.bc)));
        }
    }
    let mut a = DMatrix::zeros(n, n);
    let mut q = DVector::zeros(n);
    for i in 1..=n {
        for j in 1..=i {
            let v = system.pairing(&fields[i], &fields[j])?;
            a[(i - 1, j - 1)] = v;
            if i != j {
                a[(j - 1, i - 1)] = system.pairing(&fields[j], &fields[i])?;
            }
        }
        q[i - 1] = -system.pairing(&fields[0], &fields[i])?;
    }
    let factors = FactorData::new(2, a, q, Provenance::Oracle, Some(eps))?;
    let (constants, diagnostics) = free_constants(&factors)?;
    let recon = factors.a.transpose() * &constants;
    let scale = factors.q.amax() + factors.a.amax() * constants.amax();
    let flux_residual = (&recon - &factors.q).amax() / scale.max(1e-300);
    let locator = Locator::new(Arc::clone(&system.mesh), domain.inner_center());
    Ok(FullSolution { domain, system, fields, factors, constants, diagnostics, flux_residual, locator })
}

/// Full solutions over a list of gaps, computed in parallel.
pub fn sweep(phi: &BoundaryData, eps_list: &[f64], cfg: &OracleConfig) -> Result<Vec<FullSolution>> {
    eps_list.par_iter().map(|&e| solve_full(phi, e, cfg)).collect()
}

/// Extrapolated limit data and the per-entry fits.
#[derive(Debug, Clone)]
pub struct StarredFit {
    pub data: FactorData,
    pub fits: Vec<(String, RichardsonFit)>,
}

/// Limit factor data by fitted-exponent extrapolation of every bounded entry; the
/// diverging diagonal entries (alpha <= d) are set to infinity. Five or more samples
/// use the two-term model `v* + c eps^p + c2 eps^2p`, fewer the one-term model.
pub fn extrapolate_starred(samples: &[(f64, &FactorData)]) -> Result<StarredFit> {
    let first = samples.first().ok_or_else(|| Error::MissingFactorData("no samples".into()))?.1;
    let (d, n) = (first.d, first.n());
    let eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut fits = Vec::new();
    let mut fit = |name: String, v: Vec<f64>| -> f64 {
        let f = if eps.len() >= 5 { richardson_fit2(&eps, &v) } else { richardson_fit(&eps, &v) };
        match f {
            Ok(f) => {
                fits.push((name, f));
                f.v_star
            }
            Err(_) => *v.last().expect("nonempty"),
        }
    };
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = if i == j && i < d {
                f64::INFINITY
            } else {
                fit(format!("a[{},{}]", i + 1, j + 1), samples.iter().map(|s| s.1.a[(i, j)]).collect())
            };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut q = DVector::zeros(n);
    for i in 0..n {
        q[i] = fit(format!("Q[{}]", i + 1), samples.iter().map(|s| s.1.q[i]).collect());
    }
    Ok(StarredFit { data: FactorData::new(d, a, q, Provenance::Oracle, None)?, fits })
}

/// K* for alpha = 1..d with the leading coefficient fixed at its theoretical value.
pub fn fit_k_star(samples: &[(f64, &FactorData)], lame: &LameConstants, tau: &[f64]) -> Result<Vec<f64>> {
    let d = samples.first().ok_or_else(|| Error::MissingFactorData("no samples".into()))?.1.d;
    (1..=d)
        .map(|alpha| {
            let c = diag_leading_coefficient(alpha, d, lame, tau)?;
            let s: Vec<(f64, f64)> = samples.iter().map(|(e, f)| (*e, f.a[(alpha - 1, alpha - 1)])).collect();
            fit_constant_with_leading(&s, d, c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_family, Family};

    fn coarse() -> OracleConfig {
        OracleConfig { mesh: MeshParams { n_layers: 4, angular_res: 48, neck_scale: 0.1 }, ..Default::default() }
    }

    #[test]
    fn full_solve_is_consistent() {
        let phi = make_family(Family::E1, 1.0, 2, 2).unwrap();
        let s = solve_full(&phi, 2e-2, &coarse()).unwrap();
        assert!(s.flux_residual < 1e-9);
        let (x, _) = free_constants(&s.factors).unwrap();
        assert_eq!(x, s.constants);
        let a = &s.factors.a;
        assert!((a[(0, 2)] - a[(2, 0)]).abs() <= 1e-8 * a[(0, 2)].abs().max(1e-12));
    }

    #[test]
    fn zero_data_gives_zero_q() {
        let s = solve_full(&BoundaryData::zero(2), 2e-2, &coarse()).unwrap();
        assert_eq!(s.factors.q.amax(), 0.0);
    }

    #[test]
    fn dump_lists_every_node_per_field() {
        let phi = make_family(Family::E1, 1.0, 2, 2).unwrap();
        let s = solve_full(&phi, 4e-2, &coarse()).unwrap();
        let text = s.dump_text();
        let n = s.mesh().nodes.len();
        assert!(text.contains(&format!("nodes {n}\n")));
        assert_eq!(text.matches("field ").count(), 5);
        assert_eq!(text.lines().count(), 2 + 1 + n + 1 + s.mesh().triangles.len() + 5 * (n + 1));
    }
}
