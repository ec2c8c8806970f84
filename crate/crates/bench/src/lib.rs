//! Benchmark inputs shared by the criterion targets.

use lamegap::oracle::{MeshParams, OracleConfig};
use lamegap::{make_family, BoundaryData, Family, GapProfile};

/// `delta = eps + x1^2` on B'_1.
pub fn reference_profile(eps: f64) -> GapProfile {
    GapProfile::quadratic(&[2.0], eps, 1.0).expect("valid profile")
}

pub fn e1_datum(d: usize) -> BoundaryData {
    make_family(Family::E1, 1.0, 2, d).expect("valid datum")
}

pub fn oracle_config(n_layers: usize, angular_res: usize) -> OracleConfig {
    OracleConfig { mesh: MeshParams { n_layers, angular_res, neck_scale: 0.1 }, ..Default::default() }
}
