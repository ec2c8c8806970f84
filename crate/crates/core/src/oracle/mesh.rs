//! Reference geometry (two internally tangent disks pulled apart by eps) and its
//! fiber-structured triangulation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GapProfile;

/// Outer disk of radius r0 touching x_2 = 0 from above at the origin; inner disk of
/// radius r1 touching the same point, lifted by eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceDomain {
    pub eps: f64,
    pub r1: f64,
    pub r0: f64,
}

impl ReferenceDomain {
    pub fn new(eps: f64, r1: f64, r0: f64) -> Result<Self> {
        if !(r1 > 0.0 && r0 > r1) {
            return Err(Error::Geometry(format!("need 0 < r1 < r0, got r1 = {r1}, r0 = {r0}")));
        }
        if !(eps > 0.0 && eps < 0.5 * (r0 - r1)) {
            return Err(Error::Geometry(format!("eps = {eps} outside (0, (r0 - r1)/2)")));
        }
        Ok(Self { eps, r1, r0 })
    }

    pub fn inner_center(&self) -> [f64; 2] {
        [0.0, self.r1 + self.eps]
    }

    pub fn outer_center(&self) -> [f64; 2] {
        [0.0, self.r0]
    }

    /// Relative curvature 1/r1 - 1/r0.
    pub fn tau1(&self) -> f64 {
        1.0 / self.r1 - 1.0 / self.r0
    }

    /// Largest distance from the outer boundary reached by the inner disk is positive.
    pub fn inner_strictly_inside(&self) -> bool {
        let c = self.inner_center();
        let o = self.outer_center();
        ((c[0] - o[0]).powi(2) + (c[1] - o[1]).powi(2)).sqrt() + self.r1 < self.r0
    }

    /// Gap width at horizontal position x1.
    pub fn gap(&self, x1: f64) -> f64 {
        let cap = |r: f64| {
            let s = (r - x1) * (r + x1);
            x1 * x1 / (r + s.sqrt())
        };
        self.eps + cap(self.r1) - cap(self.r0)
    }

    /// Matching gap profile on |x'| <= 2R.
    pub fn profile(&self, radius: f64) -> Result<GapProfile> {
        GapProfile::spheres(2, self.r1, self.r0, self.eps, radius)
    }

    /// Distance from the inner center to the outer circle along direction `w`.
    fn exit(&self, w: [f64; 2]) -> f64 {
        let v = [0.0, self.r1 + self.eps - self.r0];
        let wv = w[0] * v[0] + w[1] * v[1];
        let vv = v[0] * v[0] + v[1] * v[1];
        -wv + (wv * wv - vv + self.r0 * self.r0).sqrt()
    }

    /// Length of the fiber at polar angle theta around the inner center.
    pub fn fiber_length(&self, theta: f64) -> f64 {
        self.exit([theta.cos(), theta.sin()]) - self.r1
    }
}

/// Mesh controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshParams {
    /// Elements across every fiber, in particular across the gap at x' = 0.
    pub n_layers: usize,
    /// Number of fibers on a full turn away from the neck.
    pub angular_res: usize,
    /// Fiber length below which the angular step shrinks proportionally.
    pub neck_scale: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { n_layers: 8, angular_res: 128, neck_scale: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeTag {
    Inner,
    Outer,
    Interior,
}

/// Structured triangulation: fibers from the inner center, `n_layers` elements each.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<NodeTag>,
    /// Fiber angles around the inner center, ascending, one fiber at -pi/2.
    pub angles: Vec<f64>,
    pub n_layers: usize,
}

fn tri_area(p: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (p[t[0]], p[t[1]], p[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn min_angle(p: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let a = p[t[i]];
        let b = p[t[(i + 1) % 3]];
        let c = p[t[(i + 2) % 3]];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = (u[0] * v[1] - u[1] * v[0]).abs();
        let dot = u[0] * v[0] + u[1] * v[1];
        best = best.min(cross.atan2(dot));
    }
    best
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_fibers(&self) -> usize {
        self.angles.len()
    }

    /// Node index of layer `l` on fiber `f`.
    pub fn node(&self, f: usize, l: usize) -> usize {
        f * (self.n_layers + 1) + l
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| tri_area(&self.nodes, t)).sum()
    }

    /// Smallest interior angle in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles.iter().map(|t| min_angle(&self.nodes, t)).fold(f64::INFINITY, f64::min).to_degrees()
    }

    pub fn min_signed_area(&self) -> f64 {
        self.triangles.iter().map(|t| tri_area(&self.nodes, t)).fold(f64::INFINITY, f64::min)
    }

    /// Plain-text dump: node table, element table.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nodes {}", self.nodes.len());
        for (i, (p, t)) in self.nodes.iter().zip(&self.tags).enumerate() {
            let _ = writeln!(s, "{i} {:.17e} {:.17e} {:?}", p[0], p[1], t);
        }
        let _ = writeln!(s, "# triangles {}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

/// Angular offsets from -pi/2 on [0, pi]: step `(2 pi / angular_res) min(1, L/neck_scale)`.
fn half_angles(dom: &ReferenceDomain, p: &MeshParams) -> Vec<f64> {
    let base = 2.0 * PI / p.angular_res as f64;
    let step = |phi: f64| base * (dom.fiber_length(phi - 0.5 * PI) / p.neck_scale).min(1.0);
    let mut out = vec![0.0];
    let mut phi = 0.0;
    while phi < PI {
        // midpoint rule keeps the step consistent with the local fiber length
        let h0 = step(phi);
        let h = step(phi + 0.5 * h0);
        phi += h;
        out.push(phi);
    }
    let scale = PI / phi;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Builds the reference domain and its triangulation.
pub fn build_reference_domain(eps: f64, r1: f64, r0: f64, params: &MeshParams) -> Result<(ReferenceDomain, Mesh)> {
    let dom = ReferenceDomain::new(eps, r1, r0)?;
    if params.n_layers < 4 {
        return Err(Error::Mesh(format!("n_layers = {} below 4", params.n_layers)));
    }
    if params.angular_res < 8 || params.neck_scale <= 0.0 {
        return Err(Error::Mesh("angular_res must be at least 8 and neck_scale positive".into()));
    }
    let half = half_angles(&dom, params);
    // right half counter-clockwise from the neck, left half mirrored
    let mut angles: Vec<f64> = half.iter().rev().map(|v| -0.5 * PI - v).collect();
    angles.pop();
    angles.extend(half.iter().map(|v| -0.5 * PI + v));
    let _ = angles.pop(); // pi/2 equals -3pi/2 up to the period
    angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));

    let nl = params.n_layers;
    let c = dom.inner_center();
    let mut nodes = Vec::with_capacity(angles.len() * (nl + 1));
    let mut tags = Vec::with_capacity(nodes.capacity());
    for &th in &angles {
        let w = [th.cos(), th.sin()];
        let len = dom.exit(w) - r1;
        for l in 0..=nl {
            let s = r1 + len * l as f64 / nl as f64;
            let s = if l == nl { dom.exit(w) } else { s };
            nodes.push([c[0] + s * w[0], c[1] + s * w[1]]);
            tags.push(match l {
                0 => NodeTag::Inner,
                x if x == nl => NodeTag::Outer,
                _ => NodeTag::Interior,
            });
        }
    }
    // exact tangency point at the neck
    let neck = angles
        .iter()
        .position(|&a| (a + 0.5 * PI).abs() < 1e-14)
        .ok_or_else(|| Error::Mesh("no fiber on the axis".into()))?;
    let nf = angles.len();
    let mut mesh = Mesh { nodes, triangles: Vec::new(), tags, angles, n_layers: nl };
    {
        let i0 = mesh.node(neck, 0);
        let i1 = mesh.node(neck, nl);
        mesh.nodes[i0] = [0.0, eps];
        mesh.nodes[i1] = [0.0, 0.0];
        for l in 1..nl {
            let i = mesh.node(neck, l);
            mesh.nodes[i] = [0.0, eps * (1.0 - l as f64 / nl as f64)];
        }
    }
    let mut tris = Vec::with_capacity(2 * nf * nl);
    for f in 0..nf {
        let g = (f + 1) % nf;
        for l in 0..nl {
            let a = mesh.node(f, l);
            let b = mesh.node(g, l);
            let cc = mesh.node(g, l + 1);
            let d = mesh.node(f, l + 1);
            let opt1 = [[a, b, cc], [a, cc, d]];
            let opt2 = [[a, b, d], [b, cc, d]];
            let q = |o: &[[usize; 3]; 2]| min_angle(&mesh.nodes, &o[0]).min(min_angle(&mesh.nodes, &o[1]));
            let pick = if q(&opt1) >= q(&opt2) { opt1 } else { opt2 };
            for mut t in pick {
                if tri_area(&mesh.nodes, &t) < 0.0 {
                    t.swap(1, 2);
                }
                tris.push(t);
            }
        }
    }
    mesh.triangles = tris;
    if mesh.min_signed_area() <= 0.0 {
        return Err(Error::Mesh("degenerate or inverted triangle".into()));
    }
    let ang = mesh.min_angle_deg();
    if ang < 5.0 {
        return Err(Error::Mesh(format!("minimum angle {ang:.2} deg below 5 deg; refine angular_res or neck_scale")));
    }
    Ok((dom, mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_mesh() {
        let (dom, mesh) = build_reference_domain(1e-2, 0.5, 1.0, &MeshParams { n_layers: 6, ..Default::default() }).unwrap();
        assert!(dom.inner_strictly_inside());
        assert!((dom.gap(0.0) - 1e-2).abs() < 1e-15);
        assert!((dom.tau1() - 1.0).abs() < 1e-15);
        assert!(mesh.min_angle_deg() >= 5.0);
        assert!(mesh.min_signed_area() > 0.0);
        let exact = PI * (1.0 - 0.25);
        assert!((mesh.area() - exact).abs() / exact < 2e-3);
        let x = 0.05;
        let taylor = 1e-2 + 0.5 * x * x;
        assert!((dom.gap(x) - taylor).abs() < x.powi(4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_reference_domain(0.3, 0.5, 1.0, &MeshParams::default()).is_err());
        assert!(build_reference_domain(1e-2, 0.5, 1.0, &MeshParams { n_layers: 2, ..Default::default() }).is_err());
    }
}
