//! Plane-strain P1 finite elements with full Dirichlet data.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::banded::{BandedCholesky, BandedSpd};
use super::mesh::{Mesh, NodeTag};
use crate::aux_fields::LameConstants;
use crate::error::{Error, Result};

/// Barycentric gradients and area of a triangle.
fn shape(mesh: &Mesh, t: &[usize; 3]) -> ([[f64; 2]; 3], f64) {
    let p = |i: usize| mesh.nodes[t[i]];
    let (a, b, c) = (p(0), p(1), p(2));
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let g = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (g, 0.5 * det)
}

/// 6x6 element stiffness, dof order (node0 x, node0 y, node1 x, ...).
pub fn element_stiffness(mesh: &Mesh, t: &[usize; 3], lame: &LameConstants) -> [[f64; 6]; 6] {
    let (g, area) = shape(mesh, t);
    let (l, m) = (lame.lambda, lame.mu);
    let mut k = [[0.0; 6]; 6];
    for a in 0..3 {
        for b in 0..3 {
            let (ga, gb) = (g[a], g[b]);
            let dot = ga[0] * gb[0] + ga[1] * gb[1];
            for i in 0..2 {
                for j in 0..2 {
                    // (C e(N_a e_i), e(N_b e_j)) = lambda ga_i gb_j + mu (delta_ij ga.gb + ga_j gb_i)
                    let mut v = l * ga[i] * gb[j] + m * ga[j] * gb[i];
                    if i == j {
                        v += m * dot;
                    }
                    k[2 * a + i][2 * b + j] = area * v;
                }
            }
        }
    }
    k
}

/// Factorized interior stiffness shared by all Dirichlet problems on one mesh.
pub struct FemSystem {
    pub mesh: Arc<Mesh>,
    pub lame: LameConstants,
    /// Interior dof number for each global dof, `usize::MAX` on the boundary.
    dof_map: Vec<usize>,
    n_int: usize,
    matrix: BandedSpd,
    chol: BandedCholesky,
    elements: Vec<[[f64; 6]; 6]>,
}

impl std::fmt::Debug for FemSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FemSystem").field("n_int", &self.n_int).field("bandwidth", &self.matrix.bandwidth()).finish()
    }
}

/// Which boundary a Dirichlet field applies to.
pub type BoundaryFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Nodal displacement with its boundary description.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub mesh: Arc<Mesh>,
    /// Interleaved (u_x, u_y) per node.
    pub u: Vec<f64>,
    pub bc: String,
    /// Relative residual of the interior system.
    pub residual: f64,
}

impl FemSystem {
    pub fn new(mesh: Arc<Mesh>, lame: LameConstants) -> Result<Self> {
        let nf = mesh.n_fibers();
        let nl = mesh.n_layers;
        let per = nl - 1;
        // zig-zag fiber order keeps the periodic wrap inside a narrow band
        let mut pos = vec![0usize; nf];
        let (mut lo, mut hi, mut k) = (0usize, nf - 1, 0usize);
        while lo <= hi {
            pos[lo] = k;
            k += 1;
            if lo != hi {
                pos[hi] = k;
                k += 1;
            }
            lo += 1;
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        let mut dof_map = vec![usize::MAX; 2 * mesh.n_nodes()];
        for f in 0..nf {
            for l in 1..nl {
                let node = mesh.node(f, l);
                let idx = pos[f] * per + (l - 1);
                dof_map[2 * node] = 2 * idx;
                dof_map[2 * node + 1] = 2 * idx + 1;
            }
        }
        let n_int = 2 * nf * per;
        let elements: Vec<[[f64; 6]; 6]> = mesh.triangles.par_iter().map(|t| element_stiffness(&mesh, t, &lame)).collect();
        let mut bw = 0;
        for t in &mesh.triangles {
            for &a in t {
                for &b in t {
                    let (x, y) = (dof_map[2 * a], dof_map[2 * b]);
                    if x != usize::MAX && y != usize::MAX {
                        bw = bw.max(x.abs_diff(y) + 1);
                    }
                }
            }
        }
        let mut matrix = BandedSpd::zeros(n_int, bw);
        for (t, ke) in mesh.triangles.iter().zip(&elements) {
            for a in 0..6 {
                let ga = dof_map[2 * t[a / 2] + a % 2];
                if ga == usize::MAX {
                    continue;
                }
                for b in 0..=a {
                    let gb = dof_map[2 * t[b / 2] + b % 2];
                    if gb == usize::MAX {
                        continue;
                    }
                    matrix.add(ga, gb, ke[a][b]);
                }
            }
        }
        let chol = matrix.clone().factor().map_err(|e| Error::Singular(format!("stiffness factorization: {e}")))?;
        Ok(Self { mesh, lame, dof_map, n_int, matrix, chol, elements })
    }

    pub fn n_interior_dofs(&self) -> usize {
        self.n_int
    }

    pub fn bandwidth(&self) -> usize {
        self.matrix.bandwidth()
    }

    /// Solves with `inner` prescribed on the inclusion boundary and `outer` on the outer one.
    pub fn solve(&self, inner: BoundaryFn<'_>, outer: BoundaryFn<'_>, label: &str) -> SolveResult {
        let mesh = &self.mesh;
        let mut u = vec![0.0; 2 * mesh.n_nodes()];
        for (i, (p, tag)) in mesh.nodes.iter().zip(&mesh.tags).enumerate() {
            let v = match tag {
                NodeTag::Inner => inner(*p),
                NodeTag::Outer => outer(*p),
                NodeTag::Interior => continue,
            };
            u[2 * i] = v[0];
            u[2 * i + 1] = v[1];
        }
        let mut rhs = vec![0.0; self.n_int];
        for (t, ke) in mesh.triangles.iter().zip(&self.elements) {
            for a in 0..6 {
                let ga = self.dof_map[2 * t[a / 2] + a % 2];
                if ga == usize::MAX {
                    continue;
                }
                for b in 0..6 {
                    let gl = 2 * t[b / 2] + b % 2;
                    if self.dof_map[gl] == usize::MAX {
                        rhs[ga] -= ke[a][b] * u[gl];
                    }
                }
            }
        }
        let x = self.chol.solve(&rhs);
        let r = self.matrix.mul_vec(&x);
        let rn: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = rhs.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (g, &m) in self.dof_map.iter().enumerate() {
            if m != usize::MAX {
                u[g] = x[m];
            }
        }
        SolveResult { mesh: Arc::clone(&self.mesh), u, bc: label.to_string(), residual: if bn > 0.0 { rn / bn } else { rn } }
    }

    /// `sum_e u_e^T K_e v_e`.
    pub fn pairing(&self, u: &SolveResult, v: &SolveResult) -> Result<f64> {
        if !Arc::ptr_eq(&u.mesh, &self.mesh) || !Arc::ptr_eq(&v.mesh, &self.mesh) {
            return Err(Error::Mesh("fields live on different meshes".into()));
        }
        let mut acc = crate::quadrature::NeumaierSum::default();
        for (t, ke) in self.mesh.triangles.iter().zip(&self.elements) {
            let mut s = 0.0;
            for a in 0..6 {
                let ua = u.u[2 * t[a / 2] + a % 2];
                if ua == 0.0 {
                    continue;
                }
                for b in 0..6 {
                    s += ua * ke[a][b] * v.u[2 * t[b / 2] + b % 2];
                }
            }
            acc.add(s);
        }
        Ok(acc.total())
    }
}

/// Energy pairing computed element by element from displacement gradients.
pub fn energy_pairing(u: &SolveResult, v: &SolveResult, lame: &LameConstants) -> Result<f64> {
    if !Arc::ptr_eq(&u.mesh, &v.mesh) {
        return Err(Error::Mesh("fields live on different meshes".into()));
    }
    let mut acc = crate::quadrature::NeumaierSum::default();
    for e in 0..u.mesh.triangles.len() {
        let (gu, area) = u.element_gradient(e);
        let (gv, _) = v.element_gradient(e);
        acc.add(area * lame.pairing(&gu, &gv));
    }
    Ok(acc.total())
}

/// Q_alpha[phi] = -(C e(u_0), e(u_alpha)) over the domain.
pub fn q_functional(u0: &SolveResult, ua: &SolveResult, lame: &LameConstants) -> Result<f64> {
    Ok(-energy_pairing(u0, ua, lame)?)
}

impl SolveResult {
    /// Constant gradient (row i: d u_i / d x_j) and area of element `e`.
    pub fn element_gradient(&self, e: usize) -> (DMatrix<f64>, f64) {
        let t = &self.mesh.triangles[e];
        let (g, area) = shape(&self.mesh, t);
        let mut m = DMatrix::zeros(2, 2);
        for a in 0..3 {
            for i in 0..2 {
                let ui = self.u[2 * t[a] + i];
                for j in 0..2 {
                    m[(i, j)] += ui * g[a][j];
                }
            }
        }
        (m, area)
    }

    pub fn value(&self, node: usize) -> [f64; 2] {
        [self.u[2 * node], self.u[2 * node + 1]]
    }

    /// Plain-text per-node displacement table.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut s = format!("# displacement {} nodes, bc {}\n", self.mesh.n_nodes(), self.bc);
        for i in 0..self.mesh.n_nodes() {
            let _ = writeln!(s, "{i} {:.17e} {:.17e}", self.u[2 * i], self.u[2 * i + 1]);
        }
        s
    }
}

/// Point location on the fiber mesh.
#[derive(Debug, Clone)]
pub struct Locator {
    mesh: Arc<Mesh>,
    center: [f64; 2],
}

impl Locator {
    pub fn new(mesh: Arc<Mesh>, center: [f64; 2]) -> Self {
        Self { mesh, center }
    }

    /// Elements containing `x` (several when `x` sits on an edge or node).
    pub fn elements_at(&self, x: [f64; 2]) -> Vec<usize> {
        let m = &self.mesh;
        let nf = m.n_fibers();
        let th = (x[1] - self.center[1]).atan2(x[0] - self.center[0]);
        // angles live in [-3pi/2, pi/2)
        let th = if th >= 0.5 * std::f64::consts::PI { th - 2.0 * std::f64::consts::PI } else { th };
        let f0 = match m.angles.binary_search_by(|a| a.partial_cmp(&th).expect("finite")) {
            Ok(i) => i,
            Err(i) => (i + nf - 1) % nf,
        };
        let mut hits = Vec::new();
        let per_fiber = 2 * m.n_layers;
        for df in [nf - 1, 0, 1] {
            let f = (f0 + df) % nf;
            for k in 0..per_fiber {
                let e = f * per_fiber + k;
                if inside(m, &m.triangles[e], x) {
                    hits.push(e);
                }
            }
        }
        hits.sort_unstable();
        hits.dedup();
        hits
    }
}

fn inside(m: &Mesh, t: &[usize; 3], x: [f64; 2]) -> bool {
    let (g, _) = shape(m, t);
    let a = m.nodes[t[0]];
    let l1 = g[1][0] * (x[0] - a[0]) + g[1][1] * (x[1] - a[1]);
    let l2 = g[2][0] * (x[0] - a[0]) + g[2][1] * (x[1] - a[1]);
    let l0 = 1.0 - l1 - l2;
    let tol = -1e-10;
    l0 >= tol && l1 >= tol && l2 >= tol
}

/// Area-weighted mean of element gradients at `x`.
pub fn gradient_at(fields: &[(&SolveResult, f64)], loc: &Locator, x: [f64; 2]) -> Result<DMatrix<f64>> {
    let els = loc.elements_at(x);
    if els.is_empty() {
        return Err(Error::Domain(format!("point ({}, {}) outside the mesh", x[0], x[1])));
    }
    let mut g = DMatrix::zeros(2, 2);
    let mut w = 0.0;
    for e in els {
        let mut ge = DMatrix::zeros(2, 2);
        let mut area = 0.0;
        for (f, c) in fields {
            let (gf, a) = f.element_gradient(e);
            ge += gf * *c;
            area = a;
        }
        g += ge * area;
        w += area;
    }
    Ok(g / w)
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{build_reference_domain, MeshParams};
    use super::*;

    fn system() -> FemSystem {
        let (_, mesh) = build_reference_domain(1e-2, 0.5, 1.0, &MeshParams { n_layers: 4, angular_res: 32, neck_scale: 0.1 }).unwrap();
        FemSystem::new(Arc::new(mesh), LameConstants::unit()).unwrap()
    }

    #[test]
    fn rigid_motion_is_strain_free() {
        let s = system();
        let rot = |p: [f64; 2]| [p[1], -p[0]];
        let r = s.solve(&rot, &rot, "rotation");
        for i in 0..s.mesh.n_nodes() {
            let p = s.mesh.nodes[i];
            assert!((r.value(i)[0] - p[1]).abs() < 1e-10 && (r.value(i)[1] + p[0]).abs() < 1e-10);
        }
        assert!(s.pairing(&r, &r).unwrap().abs() < 1e-11);
    }

    #[test]
    fn linear_patch() {
        let s = system();
        let a = [[0.3, 0.1], [0.1, -0.2]];
        let lin = move |p: [f64; 2]| [a[0][0] * p[0] + a[0][1] * p[1], a[1][0] * p[0] + a[1][1] * p[1]];
        let r = s.solve(&lin, &lin, "linear");
        for i in 0..s.mesh.n_nodes() {
            let v = lin(s.mesh.nodes[i]);
            assert!((r.value(i)[0] - v[0]).abs() < 1e-10 && (r.value(i)[1] - v[1]).abs() < 1e-10);
        }
        let am = DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
        let exact = s.mesh.area() * s.lame.pairing(&am, &am);
        let e = s.pairing(&r, &r).unwrap();
        assert!((e - exact).abs() < 1e-10 * exact);
        let e2 = energy_pairing(&r, &r, &s.lame).unwrap();
        assert!((e2 - exact).abs() < 1e-10 * exact);
    }
}
