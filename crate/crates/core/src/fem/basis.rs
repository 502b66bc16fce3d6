//! Lagrange bases on the reference triangle `{(s, t) : s, t >= 0, s + t <= 1}`.
//!
//! Node order: the three vertices `(0,0)`, `(1,0)`, `(0,1)`, then for P2 the
//! midpoints of local edges 0-1, 1-2 and 2-0.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn node_count(self) -> usize {
        match self {
            Degree::P1 => 3,
            Degree::P2 => 6,
        }
    }

    /// Nodes per edge (both endpoints plus interior nodes).
    pub fn edge_node_count(self) -> usize {
        match self {
            Degree::P1 => 2,
            Degree::P2 => 3,
        }
    }
}

pub const MAX_NODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceBasis {
    pub degree: Degree,
}

impl ReferenceBasis {
    pub fn new(degree: Degree) -> Self {
        Self { degree }
    }

    pub fn node_count(&self) -> usize {
        self.degree.node_count()
    }

    pub fn nodes(&self) -> &'static [[f64; 2]] {
        const NODES: [[f64; 2]; 6] = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 0.0],
            [0.5, 0.5],
            [0.0, 0.5],
        ];
        &NODES[..self.node_count()]
    }

    /// Values of all basis functions at reference point `p`.
    pub fn eval(&self, p: [f64; 2]) -> [f64; MAX_NODES] {
        let (l1, l2) = (p[0], p[1]);
        let l0 = 1.0 - l1 - l2;
        match self.degree {
            Degree::P1 => [l0, l1, l2, 0.0, 0.0, 0.0],
            Degree::P2 => [
                l0 * (2.0 * l0 - 1.0),
                l1 * (2.0 * l1 - 1.0),
                l2 * (2.0 * l2 - 1.0),
                4.0 * l0 * l1,
                4.0 * l1 * l2,
                4.0 * l2 * l0,
            ],
        }
    }

    /// Reference gradients `(d/ds, d/dt)` of all basis functions at `p`.
    pub fn grad(&self, p: [f64; 2]) -> [[f64; 2]; MAX_NODES] {
        let (l1, l2) = (p[0], p[1]);
        let l0 = 1.0 - l1 - l2;
        // d(l0) = (-1,-1), d(l1) = (1,0), d(l2) = (0,1)
        match self.degree {
            Degree::P1 => [
                [-1.0, -1.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [0.0; 2],
                [0.0; 2],
                [0.0; 2],
            ],
            Degree::P2 => {
                let g0 = 1.0 - 4.0 * l0;
                [
                    [g0, g0],
                    [4.0 * l1 - 1.0, 0.0],
                    [0.0, 4.0 * l2 - 1.0],
                    [4.0 * (l0 - l1), -4.0 * l1],
                    [4.0 * l2, 4.0 * l1],
                    [-4.0 * l2, 4.0 * (l0 - l2)],
                ]
            }
        }
    }
}

/// 1D Lagrange basis along an edge parametrised by `s in [0,1]`, ordered
/// (start vertex, end vertex, midpoint).
pub fn edge_basis(degree: Degree, s: f64) -> [f64; 3] {
    match degree {
        Degree::P1 => [1.0 - s, s, 0.0],
        Degree::P2 => [
            (1.0 - s) * (1.0 - 2.0 * s),
            s * (2.0 * s - 1.0),
            4.0 * s * (1.0 - s),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: [[f64; 2]; 5] = [
        [0.1, 0.2],
        [0.33, 0.33],
        [0.7, 0.05],
        [0.0, 0.9],
        [0.25, 0.6],
    ];

    #[test]
    fn partition_of_unity() {
        for degree in [Degree::P1, Degree::P2] {
            let b = ReferenceBasis::new(degree);
            for p in SAMPLES {
                let v = b.eval(p);
                let s: f64 = v[..b.node_count()].iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                let g = b.grad(p);
                let gs = g[..b.node_count()]
                    .iter()
                    .fold([0.0, 0.0], |acc, x| [acc[0] + x[0], acc[1] + x[1]]);
                assert!(gs[0].abs() < 1e-13 && gs[1].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn kronecker_at_nodes() {
        for degree in [Degree::P1, Degree::P2] {
            let b = ReferenceBasis::new(degree);
            for (j, &node) in b.nodes().iter().enumerate() {
                let v = b.eval(node);
                for i in 0..b.node_count() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((v[i] - expected).abs() < 1e-15, "{degree:?} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-6;
        for degree in [Degree::P1, Degree::P2] {
            let b = ReferenceBasis::new(degree);
            for p in SAMPLES {
                let g = b.grad(p);
                let (xp, xm) = (b.eval([p[0] + eps, p[1]]), b.eval([p[0] - eps, p[1]]));
                let (yp, ym) = (b.eval([p[0], p[1] + eps]), b.eval([p[0], p[1] - eps]));
                for i in 0..b.node_count() {
                    assert!((g[i][0] - (xp[i] - xm[i]) / (2.0 * eps)).abs() < 1e-8);
                    assert!((g[i][1] - (yp[i] - ym[i]) / (2.0 * eps)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn edge_basis_interpolates() {
        for degree in [Degree::P1, Degree::P2] {
            let nodes = [0.0, 1.0, 0.5];
            for (j, &s) in nodes[..degree.edge_node_count()].iter().enumerate() {
                let v = edge_basis(degree, s);
                for i in 0..degree.edge_node_count() {
                    assert_eq!(v[i], if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }
}
