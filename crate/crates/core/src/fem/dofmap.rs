use crate::fem::basis::{Degree, ReferenceBasis};
use crate::mesh::{Mesh2D, Point, Region};

/// Which discrete field a [`DofMap`] numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    FluidVelocity,
    FluidPressure,
    Displacement,
    PorePressure,
}

/// Global numbering of a (possibly vector valued) Lagrange space.
///
/// Scalar P2 dofs are the mesh vertices followed by the edge midpoints, so the
/// scalar index of vertex `v` is `v` and that of edge `e` is `nv + e`. Vector
/// fields are component-blocked: component `c` of scalar dof `s` lives at
/// `c * scalar_count + s`.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub field: Field,
    pub degree: Degree,
    pub components: usize,
    pub scalar_count: usize,
    /// Scalar dofs of each triangle in reference node order.
    pub cell_dofs: Vec<[usize; 6]>,
    /// Physical location of each scalar dof.
    pub node_coords: Vec<Point>,
    /// Sorted global indices carrying essential (Dirichlet) data.
    pub constrained: Vec<usize>,
    pub(crate) region: Region,
    pub(crate) cells: usize,
}

impl DofMap {
    /// Numbers `degree` Lagrange dofs on `mesh`. When `constrain_exterior` is
    /// set, every dof on an exterior edge (including the corners where the
    /// interface meets the exterior boundary) is marked as constrained.
    pub fn new(
        mesh: &Mesh2D,
        field: Field,
        degree: Degree,
        components: usize,
        constrain_exterior: bool,
    ) -> Self {
        let nv = mesh.num_vertices();
        let scalar_count = match degree {
            Degree::P1 => nv,
            Degree::P2 => nv + mesh.num_edges(),
        };
        let cell_dofs = mesh
            .triangles
            .iter()
            .zip(&mesh.triangle_edges)
            .map(|(tri, edges)| match degree {
                Degree::P1 => [tri[0], tri[1], tri[2], 0, 0, 0],
                Degree::P2 => [
                    tri[0],
                    tri[1],
                    tri[2],
                    nv + edges[0],
                    nv + edges[1],
                    nv + edges[2],
                ],
            })
            .collect();

        let mut node_coords = mesh.vertices.clone();
        if degree == Degree::P2 {
            node_coords.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
        }

        let mut on_boundary = vec![false; scalar_count];
        if constrain_exterior {
            for (e, (verts, tag)) in mesh.edges.iter().zip(&mesh.edge_tags).enumerate() {
                if tag.is_exterior() {
                    on_boundary[verts[0]] = true;
                    on_boundary[verts[1]] = true;
                    if degree == Degree::P2 {
                        on_boundary[nv + e] = true;
                    }
                }
            }
        }
        let constrained = (0..components)
            .flat_map(|c| {
                on_boundary
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(move |(s, _)| c * scalar_count + s)
            })
            .collect();

        Self {
            field,
            degree,
            components,
            scalar_count,
            cell_dofs,
            node_coords,
            constrained,
            region: mesh.region,
            cells: mesh.cells,
        }
    }

    pub fn len(&self) -> usize {
        self.components * self.scalar_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn basis(&self) -> ReferenceBasis {
        ReferenceBasis::new(self.degree)
    }

    pub fn local_count(&self) -> usize {
        self.degree.node_count()
    }

    pub fn global(&self, component: usize, scalar: usize) -> usize {
        component * self.scalar_count + scalar
    }

    pub fn is_vector(&self) -> bool {
        self.components > 1
    }

    /// Whether this map was built on `mesh`.
    pub fn matches(&self, mesh: &Mesh2D) -> bool {
        self.region == mesh.region
            && self.cells == mesh.cells
            && self.cell_dofs.len() == mesh.num_triangles()
    }

    /// Scalar dofs lying on mesh edge `e` ordered (first vertex, second
    /// vertex, midpoint) as stored in `mesh.edges[e]`.
    pub fn edge_dofs(&self, mesh: &Mesh2D, e: usize) -> [usize; 3] {
        let [a, b] = mesh.edges[e];
        let mid = match self.degree {
            Degree::P1 => usize::MAX,
            Degree::P2 => mesh.num_vertices() + e,
        };
        [a, b, mid]
    }

    /// Nodal interpolation of a scalar function.
    pub fn interpolate_scalar(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(self.components, 1, "scalar interpolation on a vector space");
        self.node_coords.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Nodal interpolation of a 2-vector function.
    pub fn interpolate_vector(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        assert_eq!(self.components, 2, "vector interpolation on a scalar space");
        let mut out = vec![0.0; self.len()];
        for (s, p) in self.node_coords.iter().enumerate() {
            let v = f(p[0], p[1]);
            out[s] = v[0];
            out[self.scalar_count + s] = v[1];
        }
        out
    }

    /// Values of a general interpolant restricted to the constrained dofs,
    /// in the order of `self.constrained`.
    pub fn constrained_values(&self, full: &[f64]) -> Vec<f64> {
        self.constrained.iter().map(|&i| full[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_rect_mesh;

    #[test]
    fn dof_counts() {
        for n in [1, 2, 5, 8] {
            let m = build_rect_mesh(n, Region::Fluid).unwrap();
            let p2 = DofMap::new(&m, Field::FluidVelocity, Degree::P2, 1, false);
            let p1 = DofMap::new(&m, Field::FluidPressure, Degree::P1, 1, false);
            assert_eq!(p2.len(), (2 * n + 1) * (2 * n + 1));
            assert_eq!(p1.len(), (n + 1) * (n + 1));
            let v = DofMap::new(&m, Field::FluidVelocity, Degree::P2, 2, true);
            assert_eq!(v.len(), 2 * (2 * n + 1) * (2 * n + 1));
        }
    }

    #[test]
    fn cell_dofs_cover_all_indices() {
        let m = build_rect_mesh(4, Region::Poro).unwrap();
        let d = DofMap::new(&m, Field::Displacement, Degree::P2, 1, false);
        let mut seen = vec![false; d.len()];
        for cd in &d.cell_dofs {
            for &i in &cd[..6] {
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn node_coords_match_reference_map() {
        let m = build_rect_mesh(3, Region::Fluid).unwrap();
        let d = DofMap::new(&m, Field::FluidVelocity, Degree::P2, 1, false);
        let b = d.basis();
        for (t, tri) in m.triangles.iter().enumerate() {
            let [a, p, q] = tri.map(|v| m.vertices[v]);
            for (k, r) in b.nodes().iter().enumerate() {
                let x = a[0] + r[0] * (p[0] - a[0]) + r[1] * (q[0] - a[0]);
                let y = a[1] + r[0] * (p[1] - a[1]) + r[1] * (q[1] - a[1]);
                let c = d.node_coords[d.cell_dofs[t][k]];
                assert!((c[0] - x).abs() < 1e-15 && (c[1] - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constrained_set_is_exterior_boundary() {
        let n = 4;
        let m = build_rect_mesh(n, Region::Fluid).unwrap();
        let d = DofMap::new(&m, Field::FluidVelocity, Degree::P2, 2, true);
        let per_component = d.constrained.len() / 2;
        // three exterior sides, 2n segments each, sharing two corners
        assert_eq!(per_component, 3 * 2 * n + 1);
        for &g in &d.constrained {
            let p = d.node_coords[g % d.scalar_count];
            let on_ext = p[0] == 0.0 || p[0] == 1.0 || p[1] == 1.0;
            assert!(on_ext, "{p:?}");
        }
        // interface corners are constrained, interior interface nodes are not
        let corner = d.node_coords.iter().position(|p| *p == [0.0, 0.0]).unwrap();
        assert!(d.constrained.contains(&corner));
        let inner = d.node_coords.iter().position(|p| *p == [0.5, 0.0]).unwrap();
        assert!(!d.constrained.contains(&inner));
    }
}
