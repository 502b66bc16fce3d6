//! Structured triangulations of the two unit-square subdomains.
//!
//! The fluid occupies `(0,1) x (0,1)` and the poroelastic structure
//! `(0,1) x (-1,0)`. They touch along the interface `y = 0`. Each subdomain
//! gets its own [`Mesh2D`]; the only thing they share is the set of interface
//! vertex coordinates, which are produced by identical arithmetic so that they
//! agree bitwise.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{invalid, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Fluid,
    Poro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    ExteriorFluid,
    ExteriorPoro,
    Interface,
}

impl EdgeTag {
    pub fn is_exterior(self) -> bool {
        matches!(self, EdgeTag::ExteriorFluid | EdgeTag::ExteriorPoro)
    }

    fn label(self) -> &'static str {
        match self {
            EdgeTag::Interior => "Interior",
            EdgeTag::ExteriorFluid => "ExteriorFluid",
            EdgeTag::ExteriorPoro => "ExteriorPoro",
            EdgeTag::Interface => "Interface",
        }
    }
}

/// Triangulation of one subdomain.
///
/// Local edge `k` of a triangle joins its vertices `k` and `(k + 1) % 3`;
/// `triangle_edges[t][k]` is the global index of that edge.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub triangle_edges: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub edge_tags: Vec<EdgeTag>,
    pub triangle_region: Vec<Region>,
    /// Largest edge length.
    pub h: f64,
    /// Number of cells per unit length.
    pub cells: usize,
    pub region: Region,
}

/// Unit normals and tangent of the flat interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceGeometry {
    pub n_f: [f64; 2],
    pub n_p: [f64; 2],
    pub tangent: [f64; 2],
}

impl Default for InterfaceGeometry {
    fn default() -> Self {
        Self {
            n_f: [0.0, -1.0],
            n_p: [0.0, 1.0],
            tangent: [1.0, 0.0],
        }
    }
}

/// Edge on the interface together with the triangle of the owning mesh that
/// contains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceEdge {
    pub edge: usize,
    pub triangle: usize,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Builds an `n x n` grid of squares over the subdomain of `region`, each
/// split along its lower-left to upper-right diagonal.
pub fn build_rect_mesh(n: usize, region: Region) -> Result<Mesh2D> {
    if n == 0 {
        return invalid("mesh refinement n must be at least 1");
    }
    let nf = n as f64;
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        // Poro rows run from y = -1 up to y = 0; (j - n) / n is exactly 0 at j = n.
        let y = match region {
            Region::Fluid => j as f64 / nf,
            Region::Poro => (j as f64 - nf) / nf,
        };
        for i in 0..=n {
            vertices.push([i as f64 / nf, y]);
        }
    }

    let vid = |i: usize, j: usize| j * stride + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_count = Vec::new();
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    for tri in &triangles {
        let mut local = [0; 3];
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            let idx = *edge_lookup.entry(key).or_insert_with(|| {
                edges.push([key.0, key.1]);
                edge_count.push(0usize);
                edges.len() - 1
            });
            edge_count[idx] += 1;
            local[k] = idx;
        }
        triangle_edges.push(local);
    }

    let exterior = match region {
        Region::Fluid => EdgeTag::ExteriorFluid,
        Region::Poro => EdgeTag::ExteriorPoro,
    };
    let edge_tags = edges
        .iter()
        .zip(&edge_count)
        .map(|(e, &count)| {
            if count == 2 {
                EdgeTag::Interior
            } else if vertices[e[0]][1] == 0.0 && vertices[e[1]][1] == 0.0 {
                EdgeTag::Interface
            } else {
                exterior
            }
        })
        .collect();

    let h = edges
        .iter()
        .map(|e| {
            let (a, b) = (vertices[e[0]], vertices[e[1]]);
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .fold(0.0, f64::max);

    let triangle_region = vec![region; triangles.len()];
    Ok(Mesh2D {
        vertices,
        triangles,
        triangle_edges,
        edges,
        edge_tags,
        triangle_region,
        h,
        cells: n,
        region,
    })
}

impl Mesh2D {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Grid spacing `1 / cells`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Plain-text dump: `v x y`, `t i j k`, `e i j TAG` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
        }
        for (e, tag) in self.edges.iter().zip(&self.edge_tags) {
            if *tag != EdgeTag::Interior {
                let _ = writeln!(out, "e {} {} {}", e[0], e[1], tag.label());
            }
        }
        out
    }
}

/// Interface edges of `mesh` with their owning triangle, sorted by the x
/// coordinate of the edge midpoint.
pub fn interface_edges(mesh: &Mesh2D) -> Vec<InterfaceEdge> {
    let mut owner = vec![usize::MAX; mesh.num_edges()];
    for (t, local) in mesh.triangle_edges.iter().enumerate() {
        for &e in local {
            if mesh.edge_tags[e] == EdgeTag::Interface {
                owner[e] = t;
            }
        }
    }
    let mut out: Vec<InterfaceEdge> = (0..mesh.num_edges())
        .filter(|&e| mesh.edge_tags[e] == EdgeTag::Interface)
        .map(|e| InterfaceEdge {
            edge: e,
            triangle: owner[e],
        })
        .collect();
    out.sort_by(|a, b| {
        mesh.edge_midpoint(a.edge)[0]
            .partial_cmp(&mesh.edge_midpoint(b.edge)[0])
            .expect("finite coordinates")
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let m = build_rect_mesh(1, Region::Fluid).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        let boundary: Vec<_> = m
            .edge_tags
            .iter()
            .filter(|t| **t != EdgeTag::Interior)
            .collect();
        assert_eq!(boundary.len(), 4);
        assert_eq!(
            boundary
                .iter()
                .filter(|t| ***t == EdgeTag::Interface)
                .count(),
            1
        );
        let iface = interface_edges(&m);
        assert_eq!(iface.len(), 1);
        assert_eq!(m.edge_midpoint(iface[0].edge)[0], 0.5);
    }

    #[test]
    fn counts_for_n4_poro() {
        let m = build_rect_mesh(4, Region::Poro).unwrap();
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_triangles(), 32);
        let iface = interface_edges(&m);
        assert_eq!(iface.len(), 4);
        for ie in &iface {
            let [a, b] = m.edges[ie.edge];
            assert_eq!(m.vertices[a][1], 0.0);
            assert_eq!(m.vertices[b][1], 0.0);
        }
        assert!(m
            .edge_tags
            .iter()
            .all(|t| *t != EdgeTag::ExteriorFluid));
    }

    #[test]
    fn zero_refinement_rejected() {
        assert!(build_rect_mesh(0, Region::Fluid).is_err());
    }

    #[test]
    fn unit_area_and_orientation() {
        for region in [Region::Fluid, Region::Poro] {
            let m = build_rect_mesh(8, region).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-14);
            assert!((0..m.num_triangles()).all(|t| m.triangle_area(t) > 0.0));
            assert!((m.h - 2f64.sqrt() / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn interface_midpoints_ordered() {
        let m = build_rect_mesh(8, Region::Fluid).unwrap();
        let iface = interface_edges(&m);
        assert_eq!(iface.len(), 8);
        for (k, ie) in iface.iter().enumerate() {
            let x = m.edge_midpoint(ie.edge)[0];
            assert!((x - (2 * k + 1) as f64 / 16.0).abs() < 1e-15);
            // the owner really contains the edge
            assert!(m.triangle_edges[ie.triangle].contains(&ie.edge));
        }
    }

    #[test]
    fn interface_vertices_coincide_bitwise() {
        for n in [1, 3, 7, 8, 13, 64] {
            let f = build_rect_mesh(n, Region::Fluid).unwrap();
            let p = build_rect_mesh(n, Region::Poro).unwrap();
            let fi = interface_edges(&f);
            let pi = interface_edges(&p);
            assert_eq!(fi.len(), n);
            for (a, b) in fi.iter().zip(&pi) {
                let mut fa: Vec<Point> = f.edges[a.edge].iter().map(|&v| f.vertices[v]).collect();
                let mut pb: Vec<Point> = p.edges[b.edge].iter().map(|&v| p.vertices[v]).collect();
                fa.sort_by(|x, y| x[0].partial_cmp(&y[0]).unwrap());
                pb.sort_by(|x, y| x[0].partial_cmp(&y[0]).unwrap());
                for (x, y) in fa.iter().zip(&pb) {
                    assert_eq!(x[0].to_bits(), y[0].to_bits());
                    assert_eq!(x[1].to_bits(), y[1].to_bits());
                }
            }
        }
    }

    #[test]
    fn interface_geometry() {
        let g = InterfaceGeometry::default();
        assert_eq!(g.n_p, [-g.n_f[0], -g.n_f[1]]);
        assert_eq!(g.n_f[0] * g.tangent[0] + g.n_f[1] * g.tangent[1], 0.0);
        assert_eq!(g.n_f[0].hypot(g.n_f[1]), 1.0);
        assert_eq!(g.tangent[0].hypot(g.tangent[1]), 1.0);
    }

    #[test]
    fn text_dump_lines() {
        let m = build_rect_mesh(1, Region::Poro).unwrap();
        let text = m.to_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("t ")).count(), 2);
        assert_eq!(text.lines().filter(|l| l.ends_with("Interface")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.ends_with("ExteriorPoro")).count(), 3);
    }

    proptest::proptest! {
        #[test]
        fn structural_counts(n in 1usize..24) {
            for region in [Region::Fluid, Region::Poro] {
                let m = build_rect_mesh(n, region).unwrap();
                proptest::prop_assert_eq!(m.num_triangles(), 2 * n * n);
                proptest::prop_assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
                proptest::prop_assert_eq!(interface_edges(&m).len(), n);
                proptest::prop_assert!((m.total_area() - 1.0).abs() < 1e-12);
            }
        }
    }
}
