//! Volume and interface bilinear forms, and load vectors.
//!
//! Conventions: the row index of every assembled matrix belongs to the test
//! function and the column index to the trial function. Vector fields use the
//! component-blocked numbering of [`DofMap`].

use crate::error::{invalid, Error, Result};
use crate::fem::basis::{edge_basis, Degree, ReferenceBasis, MAX_NODES};
use crate::fem::dofmap::DofMap;
use crate::fem::quadrature::{EdgeRule, QuadratureRule};
use crate::fem::sparse::{SparseMatrix, Triplets};
use crate::mesh::{interface_edges, Mesh2D, Point};

/// Affine map from the reference triangle onto one mesh triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    origin: Point,
    jac: [[f64; 2]; 2],
    det: f64,
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh2D, t: usize) -> Self {
        let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        Self {
            origin: a,
            jac,
            det,
        }
    }

    /// `|det J|`, twice the triangle area.
    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn map(&self, r: [f64; 2]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    /// Physical gradient from a reference gradient: `J^{-T} g`.
    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }
}

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub values: Vec<[f64; MAX_NODES]>,
    pub grads: Vec<[[f64; 2]; MAX_NODES]>,
}

impl Tabulation {
    pub fn new(degree: Degree, rule: &QuadratureRule) -> Self {
        let b = ReferenceBasis::new(degree);
        Self {
            values: rule.points.iter().map(|&p| b.eval(p)).collect(),
            grads: rule.points.iter().map(|&p| b.grad(p)).collect(),
        }
    }
}

const MAX_LOCAL: usize = 2 * MAX_NODES;

/// Loops over cells, lets `local` fill a dense element matrix indexed by
/// `component * nloc + node`, and scatters it.
fn assemble_cells<F>(mesh: &Mesh2D, rows: &DofMap, cols: &DofMap, mut local: F) -> SparseMatrix
where
    F: FnMut(usize, &ElementGeometry, &mut [[f64; MAX_LOCAL]; MAX_LOCAL]),
{
    let (nr, nc) = (rows.local_count(), cols.local_count());
    let mut trip = Triplets::new(rows.len(), cols.len());
    let mut block = [[0.0; MAX_LOCAL]; MAX_LOCAL];
    for t in 0..mesh.num_triangles() {
        let geo = ElementGeometry::new(mesh, t);
        block.iter_mut().for_each(|r| r.fill(0.0));
        local(t, &geo, &mut block);
        let (rd, cd) = (&rows.cell_dofs[t], &cols.cell_dofs[t]);
        for ci in 0..rows.components {
            for a in 0..nr {
                let gi = rows.global(ci, rd[a]);
                let row = &block[ci * nr + a];
                for cj in 0..cols.components {
                    for b in 0..nc {
                        let v = row[cj * nc + b];
                        if v != 0.0 {
                            trip.push(gi, cols.global(cj, cd[b]), v);
                        }
                    }
                }
            }
        }
    }
    trip.into_csr()
}

fn check_map(mesh: &Mesh2D, dofmap: &DofMap) -> Result<()> {
    if !dofmap.matches(mesh) {
        return invalid("dof map was not built on this mesh");
    }
    Ok(())
}

/// `M_ij = density * (phi_j, phi_i)`, block diagonal for vector maps.
pub fn assemble_mass(mesh: &Mesh2D, dofmap: &DofMap, density: f64) -> Result<SparseMatrix> {
    check_map(mesh, dofmap)?;
    if density < 0.0 {
        return invalid(format!("negative density {density}"));
    }
    let rule = QuadratureRule::triangle_order4();
    let tab = Tabulation::new(dofmap.degree, &rule);
    let n = dofmap.local_count();
    Ok(assemble_cells(mesh, dofmap, dofmap, |_, geo, block| {
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = density * w * geo.abs_det();
            let v = &tab.values[q];
            for a in 0..n {
                for b in 0..n {
                    let m = wq * v[a] * v[b];
                    for c in 0..dofmap.components {
                        block[c * n + a][c * n + b] += m;
                    }
                }
            }
        }
    }))
}

fn require_vector(dofmap: &DofMap) -> Result<()> {
    if dofmap.components != 2 {
        return invalid("form requires a 2-component vector dof map");
    }
    Ok(())
}

/// `A_ij = 2 coeff (D(Phi_j), D(Phi_i))` with `D(v) = (grad v + grad v^T) / 2`.
pub fn assemble_sym_grad_stiffness(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    coeff: f64,
) -> Result<SparseMatrix> {
    check_map(mesh, dofmap)?;
    require_vector(dofmap)?;
    let rule = QuadratureRule::triangle_order4();
    let tab = Tabulation::new(dofmap.degree, &rule);
    let n = dofmap.local_count();
    Ok(assemble_cells(mesh, dofmap, dofmap, |_, geo, block| {
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = coeff * w * geo.abs_det();
            let g: Vec<[f64; 2]> = tab.grads[q][..n].iter().map(|&r| geo.grad(r)).collect();
            // 2 D(phi e_c) : D(psi e_d) = delta_cd grad phi . grad psi + d_d phi d_c psi
            for a in 0..n {
                for b in 0..n {
                    let lap = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                    for d in 0..2 {
                        for c in 0..2 {
                            let mut v = g[b][d] * g[a][c];
                            if c == d {
                                v += lap;
                            }
                            block[d * n + a][c * n + b] += wq * v;
                        }
                    }
                }
            }
        }
    }))
}

/// `B_ij = coeff (div Phi_j, div Phi_i)`.
pub fn assemble_div_div(mesh: &Mesh2D, dofmap: &DofMap, coeff: f64) -> Result<SparseMatrix> {
    check_map(mesh, dofmap)?;
    require_vector(dofmap)?;
    let rule = QuadratureRule::triangle_order4();
    let tab = Tabulation::new(dofmap.degree, &rule);
    let n = dofmap.local_count();
    Ok(assemble_cells(mesh, dofmap, dofmap, |_, geo, block| {
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = coeff * w * geo.abs_det();
            let g: Vec<[f64; 2]> = tab.grads[q][..n].iter().map(|&r| geo.grad(r)).collect();
            for a in 0..n {
                for b in 0..n {
                    for d in 0..2 {
                        for c in 0..2 {
                            block[d * n + a][c * n + b] += wq * g[b][c] * g[a][d];
                        }
                    }
                }
            }
        }
    }))
}

/// Rectangular `C_kj = (psi_k, div Phi_j)` with rows in the scalar space
/// `q_dofmap` and columns in the vector space `v_dofmap`.
pub fn assemble_pressure_div(
    mesh: &Mesh2D,
    v_dofmap: &DofMap,
    q_dofmap: &DofMap,
) -> Result<SparseMatrix> {
    if !v_dofmap.matches(mesh) || !q_dofmap.matches(mesh) {
        return invalid("velocity and pressure dof maps must live on the same mesh");
    }
    require_vector(v_dofmap)?;
    if q_dofmap.components != 1 {
        return invalid("pressure dof map must be scalar");
    }
    let rule = QuadratureRule::triangle_order4();
    let vt = Tabulation::new(v_dofmap.degree, &rule);
    let qt = Tabulation::new(q_dofmap.degree, &rule);
    let (nv, nq) = (v_dofmap.local_count(), q_dofmap.local_count());
    Ok(assemble_cells(mesh, q_dofmap, v_dofmap, |_, geo, block| {
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * geo.abs_det();
            for b in 0..nv {
                let g = geo.grad(vt.grads[q][b]);
                for k in 0..nq {
                    let psi = qt.values[q][k];
                    for c in 0..2 {
                        block[k][c * nv + b] += wq * psi * g[c];
                    }
                }
            }
        }
    }))
}

/// `S_ij = (K grad phi_j, grad phi_i)` for a symmetric positive definite `K`.
pub fn assemble_scalar_stiffness(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    k: [[f64; 2]; 2],
) -> Result<SparseMatrix> {
    check_map(mesh, dofmap)?;
    if dofmap.components != 1 {
        return invalid("scalar stiffness requires a scalar dof map");
    }
    check_spd(k)?;
    let rule = QuadratureRule::triangle_order4();
    let tab = Tabulation::new(dofmap.degree, &rule);
    let n = dofmap.local_count();
    Ok(assemble_cells(mesh, dofmap, dofmap, |_, geo, block| {
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * geo.abs_det();
            let g: Vec<[f64; 2]> = tab.grads[q][..n].iter().map(|&r| geo.grad(r)).collect();
            for a in 0..n {
                for b in 0..n {
                    let kg = [
                        k[0][0] * g[b][0] + k[0][1] * g[b][1],
                        k[1][0] * g[b][0] + k[1][1] * g[b][1],
                    ];
                    block[a][b] += wq * (kg[0] * g[a][0] + kg[1] * g[a][1]);
                }
            }
        }
    }))
}

pub(crate) fn check_spd(k: [[f64; 2]; 2]) -> Result<()> {
    let scale = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let symmetric = (k[0][1] - k[1][0]).abs() <= 1e-14 * scale.max(1.0);
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    if !symmetric || k[0][0] <= 0.0 || det <= 0.0 || !det.is_finite() {
        return invalid(format!("conductivity tensor {k:?} is not symmetric positive definite"));
    }
    Ok(())
}

/// One side of an interface pairing.
#[derive(Debug, Clone, Copy)]
pub struct TraceSide<'a> {
    pub mesh: &'a Mesh2D,
    pub dofmap: &'a DofMap,
}

impl<'a> TraceSide<'a> {
    pub fn new(mesh: &'a Mesh2D, dofmap: &'a DofMap) -> Self {
        Self { mesh, dofmap }
    }
}

/// Interface edge seen from one side: dofs ordered (left vertex, right
/// vertex, midpoint) and the endpoint coordinates.
struct SideEdge {
    dofs: [usize; 3],
    left: Point,
    right: Point,
}

fn side_edges(side: &TraceSide<'_>) -> Vec<SideEdge> {
    interface_edges(side.mesh)
        .into_iter()
        .map(|ie| {
            let [a, b] = side.mesh.edges[ie.edge];
            let mut dofs = side.dofmap.edge_dofs(side.mesh, ie.edge);
            let (mut left, mut right) = (side.mesh.vertices[a], side.mesh.vertices[b]);
            if left[0] > right[0] {
                dofs.swap(0, 1);
                std::mem::swap(&mut left, &mut right);
            }
            SideEdge { dofs, left, right }
        })
        .collect()
}

/// `coeff * <trace_j, trace_i>_Gamma`, where a trace is the value of a scalar
/// basis function or `v . dir` of a vector one.
fn assemble_interface(
    row: TraceSide<'_>,
    row_dir: Option<[f64; 2]>,
    col: TraceSide<'_>,
    col_dir: Option<[f64; 2]>,
    coeff: f64,
) -> Result<SparseMatrix> {
    for (side, dir) in [(&row, row_dir), (&col, col_dir)] {
        check_map(side.mesh, side.dofmap)?;
        match (side.dofmap.components, dir) {
            (1, None) | (2, Some(_)) => {}
            (1, Some(_)) => return invalid("direction given for a scalar trace"),
            _ => return invalid("vector trace needs a direction"),
        }
    }
    let (re, ce) = (side_edges(&row), side_edges(&col));
    if re.len() != ce.len() {
        return Err(Error::NonMatchingInterface(format!(
            "{} vs {} interface edges",
            re.len(),
            ce.len()
        )));
    }
    let mut trip = Triplets::new(row.dofmap.len(), col.dofmap.len());
    if coeff == 0.0 {
        return Ok(trip.into_csr());
    }
    let rule = EdgeRule::gauss3();
    for (r, c) in re.iter().zip(&ce) {
        let same = |p: Point, q: Point| p[0].to_bits() == q[0].to_bits() && p[1].to_bits() == q[1].to_bits();
        if !same(r.left, c.left) || !same(r.right, c.right) {
            return Err(Error::NonMatchingInterface(format!(
                "edge {:?}-{:?} vs {:?}-{:?}",
                r.left, r.right, c.left, c.right
            )));
        }
        let len = (r.right[0] - r.left[0]).hypot(r.right[1] - r.left[1]);
        let traces = |side: &TraceSide<'_>, e: &SideEdge, dir: Option<[f64; 2]>, s: f64| {
            let phi = edge_basis(side.dofmap.degree, s);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(6);
            for (k, &v) in phi[..side.dofmap.degree.edge_node_count()].iter().enumerate() {
                match dir {
                    None => out.push((e.dofs[k], v)),
                    Some(d) => {
                        for (comp, &dc) in d.iter().enumerate() {
                            if dc != 0.0 {
                                out.push((side.dofmap.global(comp, e.dofs[k]), v * dc));
                            }
                        }
                    }
                }
            }
            out
        };
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let rt = traces(&row, r, row_dir, s);
            let ct = traces(&col, c, col_dir, s);
            let wq = coeff * w * len;
            for &(i, ti) in &rt {
                for &(j, tj) in &ct {
                    trip.push(i, j, wq * ti * tj);
                }
            }
        }
    }
    Ok(trip.into_csr())
}

/// `G_ij = coeff <P Phi_j, P Phi_i>_Gamma` using `P v = (v . tau) tau` on the
/// flat interface.
pub fn assemble_interface_tangential(
    row: TraceSide<'_>,
    col: TraceSide<'_>,
    tangent: [f64; 2],
    coeff: f64,
) -> Result<SparseMatrix> {
    assemble_interface(row, Some(tangent), col, Some(tangent), coeff)
}

/// `N_ij = coeff <trace_j, trace_i>_Gamma` where a vector side contributes
/// `v . n` with its own normal and a scalar side its value (pass `None`).
pub fn assemble_interface_normal(
    row: TraceSide<'_>,
    col: TraceSide<'_>,
    normal_row: Option<[f64; 2]>,
    normal_col: Option<[f64; 2]>,
    coeff: f64,
) -> Result<SparseMatrix> {
    assemble_interface(row, normal_row, col, normal_col, coeff)
}

/// `b_i = (f(t, .), phi_i)` for a scalar space.
pub fn assemble_load(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    f: impl Fn(f64, f64, f64) -> f64,
    t: f64,
) -> Vec<f64> {
    assert!(dofmap.matches(mesh) && dofmap.components == 1);
    load_impl(mesh, dofmap, t, |t, x, y| [f(t, x, y), 0.0])
}

/// `b_i = (f(t, .), Phi_i)` for a 2-vector space.
pub fn assemble_vector_load(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
    t: f64,
) -> Vec<f64> {
    assert!(dofmap.matches(mesh) && dofmap.components == 2);
    load_impl(mesh, dofmap, t, f)
}

fn load_impl(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    t: f64,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
) -> Vec<f64> {
    let rule = QuadratureRule::triangle_order4();
    let tab = Tabulation::new(dofmap.degree, &rule);
    let n = dofmap.local_count();
    let mut b = vec![0.0; dofmap.len()];
    for tri in 0..mesh.num_triangles() {
        let geo = ElementGeometry::new(mesh, tri);
        let dofs = &dofmap.cell_dofs[tri];
        for (q, (&p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = geo.map(p);
            let fv = f(t, x[0], x[1]);
            let wq = w * geo.abs_det();
            for a in 0..n {
                let phi = tab.values[q][a];
                for c in 0..dofmap.components {
                    b[dofmap.global(c, dofs[a])] += wq * fv[c] * phi;
                }
            }
        }
    }
    b
}
