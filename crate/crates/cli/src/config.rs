//! Run configuration: TOML file, dotted-key overrides, validation.

use std::path::Path;

use lamegap::geometry::{ConditionReport, Monomial};
use lamegap::oracle::{MeshParams, OracleConfig, SWEEP_EPS};
use lamegap::quadrature::QuadSettings;
use lamegap::{make_family, validate_conditions, BoundaryData, Family, GapProfile, Graph, LameConstants};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryBlock,
    pub material: MaterialBlock,
    pub boundary: BoundaryBlock,
    pub execution: ExecutionBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `h1 = sum_i c_i x_i^m`.
    Polynomial,
    /// `h1 = c |x'|^m`.
    Power,
    /// Spheres of radii `[r1, r0]` tangent at the origin.
    Disks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileBlock {
    pub kind: ProfileKind,
    pub coefficients: Vec<f64>,
}

impl Default for ProfileBlock {
    fn default() -> Self {
        Self { kind: ProfileKind::Polynomial, coefficients: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryBlock {
    pub dimension: usize,
    pub m: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub epsilon: f64,
    pub profile: ProfileBlock,
    /// Relative principal curvatures for the expansion; derived from the profile when absent.
    pub tau: Option<Vec<f64>>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub kappa4: Option<f64>,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        Self {
            dimension: 2,
            m: 2,
            radius: 1.0,
            epsilon: 1e-4,
            profile: ProfileBlock::default(),
            tau: None,
            kappa1: None,
            kappa2: None,
            kappa3: None,
            kappa4: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialBlock {
    pub lambda: f64,
    pub mu: f64,
    pub kappa5: Option<f64>,
}

impl Default for MaterialBlock {
    fn default() -> Self {
        Self { lambda: 1.0, mu: 1.0, kappa5: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryBlock {
    pub family: String,
    pub eta: f64,
    pub k: u32,
}

impl Default for BoundaryBlock {
    fn default() -> Self {
        Self { family: "E1".into(), eta: 1.0, k: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExecutionBlock {
    /// Evaluation gaps; defaults to `[geometry.epsilon]`, or `sweep_eps` for oracle runs.
    pub eps_list: Option<Vec<f64>>,
    /// Oracle sweep used for extrapolated limit data.
    pub sweep_eps: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    /// Output directory; `LAMEGAP_OUT` or `lamegap-out` when absent.
    pub out: Option<String>,
    pub n_layers: usize,
    pub angular_res: usize,
    pub neck_scale: f64,
    /// Samples per axis for the structural condition checks.
    pub condition_samples: usize,
    /// Fitted K* for alpha = 1..d when limit data come from a file.
    pub k_star: Option<Vec<f64>>,
}

impl Default for ExecutionBlock {
    fn default() -> Self {
        let q = QuadSettings::default();
        let mesh = MeshParams::default();
        Self {
            eps_list: None,
            sweep_eps: SWEEP_EPS.to_vec(),
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_evals: q.max_evals,
            seed: 0,
            threads: 0,
            out: None,
            n_layers: mesh.n_layers,
            angular_res: mesh.angular_res,
            neck_scale: mesh.neck_scale,
            condition_samples: 64,
            k_star: None,
        }
    }
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config { key: key.to_string(), msg: msg.to_string() }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| cfg_err("--config", format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| cfg_err("--config", e.message()))
            }
        }
    }

    /// Applies `key.path=value`; the value is read as a TOML literal, else as a string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| cfg_err(assignment, "override must have the form key=value"))?;
        let key = key.trim();
        let value = parse_literal(raw.trim());
        let mut root = toml::Value::try_from(&*self).map_err(|e| cfg_err(key, e))?;
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(cfg_err(key, "empty key segment"));
        }
        let mut node = &mut root;
        for part in &parts[..parts.len() - 1] {
            let table = node.as_table_mut().ok_or_else(|| cfg_err(key, "not a table"))?;
            node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let table = node.as_table_mut().ok_or_else(|| cfg_err(key, "not a table"))?;
        table.insert(parts[parts.len() - 1].to_string(), value);
        *self = root.try_into().map_err(|e: toml::de::Error| cfg_err(key, e.message()))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn lame(&self) -> Result<LameConstants, CliError> {
        let m = &self.material;
        LameConstants::new(m.lambda, m.mu, m.kappa5, self.geometry.dimension).map_err(|e| cfg_err("material", e))
    }

    pub fn profile(&self) -> Result<GapProfile, CliError> {
        let g = &self.geometry;
        let key = "geometry.profile";
        if g.dimension < 2 {
            return Err(cfg_err("geometry.dimension", "must be at least 2"));
        }
        if !(g.epsilon > 0.0 && g.epsilon.is_finite()) {
            return Err(cfg_err("geometry.epsilon", "must be positive"));
        }
        let n = g.dimension - 1;
        let c = &g.profile.coefficients;
        let profile = match g.profile.kind {
            ProfileKind::Power => {
                let [coef] = c[..] else {
                    return Err(cfg_err("geometry.profile.coefficients", "power profile takes one coefficient"));
                };
                GapProfile::power(g.dimension, g.m, coef, g.epsilon, g.radius)
            }
            ProfileKind::Polynomial => {
                if g.m % 2 != 0 {
                    return Err(cfg_err("geometry.m", "polynomial profile needs even m"));
                }
                let coefs: Vec<f64> = match c.len() {
                    1 => vec![c[0]; n],
                    l if l == n => c.clone(),
                    _ => {
                        return Err(cfg_err(
                            "geometry.profile.coefficients",
                            format!("expected 1 or {n} coefficients, got {}", c.len()),
                        ))
                    }
                };
                if coefs.iter().any(|&v| !(v > 0.0)) {
                    return Err(cfg_err("geometry.profile.coefficients", "coefficients must be positive"));
                }
                let terms = coefs
                    .iter()
                    .enumerate()
                    .map(|(i, &ci)| {
                        let mut p = vec![0; n];
                        p[i] = g.m;
                        Monomial::new(ci, p)
                    })
                    .collect();
                let lo = coefs.iter().cloned().fold(f64::INFINITY, f64::min) * (n as f64).powf(1.0 - g.m as f64 / 2.0);
                let hi = coefs.iter().cloned().fold(0.0, f64::max);
                let m2 = (g.m * g.m) as f64;
                let k3 = m2 * hi.max(1.0) * (1.0 + (2.0 * g.radius).powi(g.m as i32));
                GapProfile::new(g.dimension, g.m, g.radius, g.epsilon, Graph::Zero, Graph::Polynomial(terms), [lo, hi, k3, k3])
            }
            ProfileKind::Disks => {
                let [r1, r0] = c[..] else {
                    return Err(cfg_err("geometry.profile.coefficients", "disks profile takes [r1, r0]"));
                };
                if g.m != 2 {
                    return Err(cfg_err("geometry.m", "disks profile has m = 2"));
                }
                GapProfile::spheres(g.dimension, r1, r0, g.epsilon, g.radius)
            }
        }
        .map_err(|e| cfg_err(key, e))?;
        let mut kappa = profile.kappa;
        for (i, v) in [g.kappa1, g.kappa2, g.kappa3, g.kappa4].into_iter().enumerate() {
            if let Some(v) = v {
                kappa[i] = v;
            }
        }
        Ok(profile.with_kappa(kappa))
    }

    pub fn boundary(&self) -> Result<BoundaryData, CliError> {
        let b = &self.boundary;
        let family: Family = b.family.parse().map_err(|e| cfg_err("boundary.family", e))?;
        if family == Family::Custom {
            return Err(cfg_err("boundary.family", "custom data are not available from the config file"));
        }
        make_family(family, b.eta, b.k, self.geometry.dimension).map_err(|e| cfg_err("boundary", e))
    }

    pub fn quad_settings(&self) -> QuadSettings {
        let e = &self.execution;
        QuadSettings { abs_tol: e.abs_tol, rel_tol: e.rel_tol, max_evals: e.max_evals }
    }

    /// Reference disks from the geometry block when it describes disks, else the defaults.
    pub fn oracle(&self) -> Result<OracleConfig, CliError> {
        let e = &self.execution;
        let mut cfg = OracleConfig {
            lame: self.lame()?,
            mesh: MeshParams { n_layers: e.n_layers, angular_res: e.angular_res, neck_scale: e.neck_scale },
            ..Default::default()
        };
        if self.geometry.profile.kind == ProfileKind::Disks {
            if let [r1, r0] = self.geometry.profile.coefficients[..] {
                cfg.r1 = r1;
                cfg.r0 = r0;
            }
        }
        Ok(cfg)
    }

    /// Evaluation gaps, falling back to `fallback` when no list is configured.
    pub fn eps_list_or(&self, fallback: &[f64]) -> Vec<f64> {
        self.execution.eps_list.clone().unwrap_or_else(|| fallback.to_vec())
    }

    pub fn eps_list(&self) -> Vec<f64> {
        self.eps_list_or(&[self.geometry.epsilon])
    }

    pub fn out_dir(&self) -> String {
        self.execution
            .out
            .clone()
            .or_else(|| std::env::var("LAMEGAP_OUT").ok())
            .unwrap_or_else(|| "lamegap-out".into())
    }

    /// Checks every block; returns the structural condition report of the profile.
    pub fn validate(&self) -> Result<ConditionReport, CliError> {
        let e = &self.execution;
        for (key, list) in [("execution.eps_list", e.eps_list.as_deref()), ("execution.sweep_eps", Some(&e.sweep_eps[..]))] {
            if let Some(l) = list {
                if l.is_empty() || l.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(cfg_err(key, "needs at least one positive finite value"));
                }
            }
        }
        if !(e.abs_tol > 0.0) || !(e.rel_tol > 0.0) {
            return Err(cfg_err("execution.rel_tol", "tolerances must be positive"));
        }
        if e.max_evals == 0 || e.condition_samples < 2 {
            return Err(cfg_err("execution.max_evals", "work limits must be positive"));
        }
        if e.n_layers < 4 || e.angular_res < 8 || !(e.neck_scale > 0.0) {
            return Err(cfg_err("execution.n_layers", "mesh parameters out of range"));
        }
        if let Some(t) = &self.geometry.tau {
            if t.len() != self.geometry.dimension - 1 || t.iter().any(|v| !(*v > 0.0)) {
                return Err(cfg_err("geometry.tau", "needs d-1 positive curvatures"));
            }
        }
        self.lame()?;
        self.boundary()?;
        let profile = self.profile()?;
        let report = validate_conditions(&profile, e.condition_samples);
        if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
            let key = match bad.name.as_str() {
                "H1-lower" => "geometry.kappa1",
                "H1-upper" => "geometry.kappa2",
                "H2-gradient" | "H2-hessian" => "geometry.kappa3",
                "H3-regularity" => "geometry.kappa4",
                _ => "geometry.profile",
            };
            return Err(cfg_err(
                key,
                format!("condition {} fails (margin {:e} at {:?})", bad.name, bad.margin, bad.worst_point),
            ));
        }
        Ok(report)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn every_block_is_addressable() {
        let mut c = RunConfig::default();
        for kv in [
            "geometry.m=4",
            "geometry.R=0.5",
            "geometry.profile.kind=power",
            "geometry.profile.coefficients=[2.0]",
            "geometry.kappa1=1.5",
            "material.lambda=2.5",
            "material.kappa5=10",
            "boundary.family=E2",
            "execution.eps_list=[1e-3, 1e-4]",
            "execution.seed=7",
            "execution.out=elsewhere",
        ] {
            c.set(kv).unwrap();
        }
        assert_eq!(c.geometry.m, 4);
        assert_eq!(c.geometry.radius, 0.5);
        assert_eq!(c.geometry.profile.kind, ProfileKind::Power);
        assert_eq!(c.geometry.kappa1, Some(1.5));
        assert_eq!(c.material.kappa5, Some(10.0));
        assert_eq!(c.boundary.family, "E2");
        assert_eq!(c.execution.eps_list, Some(vec![1e-3, 1e-4]));
        assert_eq!(c.execution.out.as_deref(), Some("elsewhere"));
    }

    #[test]
    fn unknown_key_names_itself() {
        let err = RunConfig::default().set("geometry.radius=2").unwrap_err();
        assert!(matches!(err, CliError::Config { ref key, .. } if key == "geometry.radius"));
    }

    #[test]
    fn bad_material_is_a_config_error() {
        let mut c = RunConfig::default();
        c.set("material.mu=-1").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config { ref key, .. }) if key == "material"));
    }

    #[test]
    fn wrong_envelope_constant_is_reported() {
        let mut c = RunConfig::default();
        c.set("geometry.kappa1=5").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config { ref key, .. }) if key == "geometry.kappa1"));
    }

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.set("geometry.tau=[2.0]").unwrap();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
