//! Pointwise evaluation of discrete fields and quadrature loops that do not
//! go through assembled matrices.

use crate::fem::assembly::ElementGeometry;
use crate::fem::basis::{edge_basis, ReferenceBasis};
use crate::fem::dofmap::DofMap;
use crate::fem::quadrature::{EdgeRule, QuadratureRule};
use crate::mesh::{interface_edges, Mesh2D, Point};

/// A quadrature point of a triangle.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub cell: usize,
    pub xref: [f64; 2],
    pub x: Point,
    /// Physical weight, `w_q |det J|`.
    pub weight: f64,
}

/// A quadrature point on the interface.
#[derive(Debug, Clone, Copy)]
pub struct InterfacePoint {
    /// Position of the edge in left-to-right order.
    pub edge: usize,
    /// Parameter along the edge from its left end.
    pub s: f64,
    pub x: Point,
    pub weight: f64,
}

pub fn for_each_qp(mesh: &Mesh2D, rule: &QuadratureRule, mut f: impl FnMut(&QuadPoint, &ElementGeometry)) {
    for cell in 0..mesh.num_triangles() {
        let geo = ElementGeometry::new(mesh, cell);
        for (&xref, &w) in rule.points.iter().zip(&rule.weights) {
            let qp = QuadPoint {
                cell,
                xref,
                x: geo.map(xref),
                weight: w * geo.abs_det(),
            };
            f(&qp, &geo);
        }
    }
}

/// `int f` over the mesh.
pub fn integrate(mesh: &Mesh2D, rule: &QuadratureRule, f: impl Fn(&QuadPoint, &ElementGeometry) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_qp(mesh, rule, |qp, geo| acc += qp.weight * f(qp, geo));
    acc
}

/// Interface edges of a mesh with their end coordinates ordered left to right.
#[derive(Debug, Clone)]
struct TraceEdges {
    /// (left dof, right dof, mid dof) per edge, scalar numbering.
    dofs: Vec<[usize; 3]>,
    left: Vec<Point>,
    right: Vec<Point>,
}

impl TraceEdges {
    fn new(mesh: &Mesh2D, dofmap: &DofMap) -> Self {
        let mut out = Self {
            dofs: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        for ie in interface_edges(mesh) {
            let [a, b] = mesh.edges[ie.edge];
            let mut d = dofmap.edge_dofs(mesh, ie.edge);
            let (mut l, mut r) = (mesh.vertices[a], mesh.vertices[b]);
            if l[0] > r[0] {
                d.swap(0, 1);
                std::mem::swap(&mut l, &mut r);
            }
            out.dofs.push(d);
            out.left.push(l);
            out.right.push(r);
        }
        out
    }
}

pub fn for_each_interface_point(mesh: &Mesh2D, mut f: impl FnMut(&InterfacePoint)) {
    let rule = EdgeRule::gauss3();
    let mut edges: Vec<(Point, Point)> = interface_edges(mesh)
        .into_iter()
        .map(|ie| {
            let [a, b] = mesh.edges[ie.edge];
            let (l, r) = (mesh.vertices[a], mesh.vertices[b]);
            if l[0] <= r[0] {
                (l, r)
            } else {
                (r, l)
            }
        })
        .collect();
    edges.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    for (k, (l, r)) in edges.iter().enumerate() {
        let len = (r[0] - l[0]).hypot(r[1] - l[1]);
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            f(&InterfacePoint {
                edge: k,
                s,
                x: [l[0] + s * (r[0] - l[0]), l[1] + s * (r[1] - l[1])],
                weight: w * len,
            });
        }
    }
}

/// `int_Gamma f` using the interface edges of `mesh`.
pub fn integrate_interface(mesh: &Mesh2D, f: impl Fn(&InterfacePoint) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_interface_point(mesh, |ip| acc += ip.weight * f(ip));
    acc
}

/// A discrete field: coefficients on a dof map over a mesh.
#[derive(Debug, Clone)]
pub struct FeField<'a> {
    pub mesh: &'a Mesh2D,
    pub dofmap: &'a DofMap,
    pub coeffs: &'a [f64],
    basis: ReferenceBasis,
    trace: TraceEdges,
}

impl<'a> FeField<'a> {
    pub fn new(mesh: &'a Mesh2D, dofmap: &'a DofMap, coeffs: &'a [f64]) -> Self {
        assert!(dofmap.matches(mesh), "dof map was not built on this mesh");
        assert_eq!(coeffs.len(), dofmap.len(), "coefficient length");
        Self {
            mesh,
            dofmap,
            coeffs,
            basis: dofmap.basis(),
            trace: TraceEdges::new(mesh, dofmap),
        }
    }

    /// Value and gradient at a reference point of `cell`; scalar fields use
    /// component 0 only.
    pub fn eval(&self, cell: usize, xref: [f64; 2], geo: &ElementGeometry) -> ([f64; 2], [[f64; 2]; 2]) {
        let v = self.basis.eval(xref);
        let g = self.basis.grad(xref);
        let dofs = &self.dofmap.cell_dofs[cell];
        let mut val = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for a in 0..self.dofmap.local_count() {
            let ga = geo.grad(g[a]);
            for c in 0..self.dofmap.components {
                let coef = self.coeffs[self.dofmap.global(c, dofs[a])];
                val[c] += coef * v[a];
                grad[c][0] += coef * ga[0];
                grad[c][1] += coef * ga[1];
            }
        }
        (val, grad)
    }

    pub fn eval_qp(&self, qp: &QuadPoint, geo: &ElementGeometry) -> ([f64; 2], [[f64; 2]; 2]) {
        self.eval(qp.cell, qp.xref, geo)
    }

    /// Trace value at the interface point `x` (with `x[1] = 0`).
    pub fn trace(&self, x: Point) -> [f64; 2] {
        let n = self.trace.dofs.len();
        // edges are sorted, find the one containing x
        let k = self.trace.left.partition_point(|l| l[0] <= x[0]).saturating_sub(1).min(n - 1);
        let (l, r) = (self.trace.left[k], self.trace.right[k]);
        let s = (x[0] - l[0]) / (r[0] - l[0]);
        let phi = edge_basis(self.dofmap.degree, s);
        let mut out = [0.0; 2];
        for (j, &p) in phi[..self.dofmap.degree.edge_node_count()].iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate().take(self.dofmap.components) {
                *o += p * self.coeffs[self.dofmap.global(c, self.trace.dofs[k][j])];
            }
        }
        out
    }
}

/// Test-function coefficients at one quadrature point: the integrand is
/// `sum_c value[c] * Phi_c + grad[c] . grad Phi_c`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TestFlux {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
}

/// `b_i = int (value . Phi_i + grad : grad Phi_i)` with the flux supplied per
/// quadrature point.
pub fn test_volume(
    mesh: &Mesh2D,
    test: &DofMap,
    rule: &QuadratureRule,
    flux: impl Fn(&QuadPoint, &ElementGeometry) -> TestFlux,
) -> Vec<f64> {
    let basis = test.basis();
    let mut b = vec![0.0; test.len()];
    for_each_qp(mesh, rule, |qp, geo| {
        let fl = flux(qp, geo);
        let v = basis.eval(qp.xref);
        let g = basis.grad(qp.xref);
        let dofs = &test.cell_dofs[qp.cell];
        for a in 0..test.local_count() {
            let ga = geo.grad(g[a]);
            for c in 0..test.components {
                let val = fl.value[c] * v[a] + fl.grad[c][0] * ga[0] + fl.grad[c][1] * ga[1];
                b[test.global(c, dofs[a])] += qp.weight * val;
            }
        }
    });
    b
}

/// `b_i = int_Gamma value . Phi_i` over the interface edges of the test mesh.
pub fn test_interface(mesh: &Mesh2D, test: &DofMap, value: impl Fn(&InterfacePoint) -> [f64; 2]) -> Vec<f64> {
    let edges = TraceEdges::new(mesh, test);
    let mut b = vec![0.0; test.len()];
    for_each_interface_point(mesh, |ip| {
        let v = value(ip);
        let phi = edge_basis(test.degree, ip.s);
        for (j, &p) in phi[..test.degree.edge_node_count()].iter().enumerate() {
            for c in 0..test.components {
                b[test.global(c, edges.dofs[ip.edge][j])] += ip.weight * v[c] * p;
            }
        }
    });
    b
}
