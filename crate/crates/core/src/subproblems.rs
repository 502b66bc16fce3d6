//! The two decoupled subproblems advanced by one time step each.
//!
//! The fluid step solves for `(u, p)` and the poroelastic step for `(xi, phi)`
//! with `eta^{n+1} = eta^n + dt xi^{n+1}` eliminated. Both read only the
//! previous [`State`], so they can run at the same time.

use crate::error::{invalid, Error, Result};
use crate::fem::field::{test_interface, test_volume, FeField, TestFlux};
use crate::fem::{
    assemble_div_div, assemble_interface_normal, assemble_interface_tangential, assemble_load,
    assemble_mass, assemble_pressure_div, assemble_scalar_stiffness, assemble_sym_grad_stiffness,
    assemble_vector_load, Degree, DirichletElimination, DofMap, Field, QuadratureRule,
    SparseMatrix, TraceSide, Triplets,
};
use crate::linalg::{factorize, Factorization};
use crate::mesh::{build_rect_mesh, InterfaceGeometry, Mesh2D, Region};
use crate::mms::MmsCase;
use crate::params::PhysicalParams;

/// Meshes and finite element spaces of both subdomains at one refinement.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub cells: usize,
    pub fluid_mesh: Mesh2D,
    pub poro_mesh: Mesh2D,
    /// P2 fluid velocity, Dirichlet on the exterior fluid boundary.
    pub u_map: DofMap,
    /// P1 fluid pressure, unconstrained.
    pub p_map: DofMap,
    /// P2 displacement, shared by `eta` and `xi`, Dirichlet on the exterior.
    pub eta_map: DofMap,
    /// P1 pore pressure, Dirichlet on the exterior.
    pub phi_map: DofMap,
    pub geometry: InterfaceGeometry,
}

impl Discretization {
    /// `cells` squares per unit length on each subdomain.
    pub fn new(cells: usize) -> Result<Self> {
        let fluid_mesh = build_rect_mesh(cells, Region::Fluid)?;
        let poro_mesh = build_rect_mesh(cells, Region::Poro)?;
        Ok(Self {
            cells,
            u_map: DofMap::new(&fluid_mesh, Field::FluidVelocity, Degree::P2, 2, true),
            p_map: DofMap::new(&fluid_mesh, Field::FluidPressure, Degree::P1, 1, false),
            eta_map: DofMap::new(&poro_mesh, Field::Displacement, Degree::P2, 2, true),
            phi_map: DofMap::new(&poro_mesh, Field::PorePressure, Degree::P1, 1, true),
            fluid_mesh,
            poro_mesh,
            geometry: InterfaceGeometry::default(),
        })
    }

    pub fn fluid_len(&self) -> usize {
        self.u_map.len() + self.p_map.len()
    }

    pub fn poro_len(&self) -> usize {
        self.eta_map.len() + self.phi_map.len()
    }

    pub fn u_side(&self) -> TraceSide<'_> {
        TraceSide::new(&self.fluid_mesh, &self.u_map)
    }

    pub fn eta_side(&self) -> TraceSide<'_> {
        TraceSide::new(&self.poro_mesh, &self.eta_map)
    }

    pub fn phi_side(&self) -> TraceSide<'_> {
        TraceSide::new(&self.poro_mesh, &self.phi_map)
    }

    pub fn u_field<'a>(&'a self, c: &'a [f64]) -> FeField<'a> {
        FeField::new(&self.fluid_mesh, &self.u_map, c)
    }

    pub fn p_field<'a>(&'a self, c: &'a [f64]) -> FeField<'a> {
        FeField::new(&self.fluid_mesh, &self.p_map, c)
    }

    pub fn eta_field<'a>(&'a self, c: &'a [f64]) -> FeField<'a> {
        FeField::new(&self.poro_mesh, &self.eta_map, c)
    }

    pub fn phi_field<'a>(&'a self, c: &'a [f64]) -> FeField<'a> {
        FeField::new(&self.poro_mesh, &self.phi_map, c)
    }
}

/// The five discrete fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(disc: &Discretization) -> Self {
        Self {
            u: vec![0.0; disc.u_map.len()],
            p: vec![0.0; disc.p_map.len()],
            eta: vec![0.0; disc.eta_map.len()],
            xi: vec![0.0; disc.eta_map.len()],
            phi: vec![0.0; disc.phi_map.len()],
            t: 0.0,
        }
    }
}

/// Values of a vector function at the constrained dofs of `map`.
pub fn vector_boundary_values(map: &DofMap, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
    map.constrained
        .iter()
        .map(|&g| {
            let p = map.node_coords[g % map.scalar_count];
            f(p[0], p[1])[g / map.scalar_count]
        })
        .collect()
}

/// Values of a scalar function at the constrained dofs of `map`.
pub fn scalar_boundary_values(map: &DofMap, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    map.constrained
        .iter()
        .map(|&g| {
            let p = map.node_coords[g];
            f(p[0], p[1])
        })
        .collect()
}

/// Places `(block, row offset, col offset, scale)` pieces into one square
/// matrix of size `n`.
fn block_matrix(n: usize, blocks: &[(&SparseMatrix, usize, usize, f64)]) -> SparseMatrix {
    let mut t = Triplets::new(n, n);
    for &(b, r, c, s) in blocks {
        if s != 0.0 {
            t.add_block(b, r, c, s);
        }
    }
    t.into_csr()
}

fn check_time(prev: &State, dt: f64, t_next: f64) -> Result<()> {
    if (prev.t + dt - t_next).abs() > 1e-9 * t_next.abs().max(1.0) {
        return invalid(format!(
            "step from t = {} by dt = {} does not reach {}",
            prev.t, dt, t_next
        ));
    }
    Ok(())
}

fn check_state(disc: &Discretization, s: &State) -> Result<()> {
    for (got, expected) in [
        (s.u.len(), disc.u_map.len()),
        (s.p.len(), disc.p_map.len()),
        (s.eta.len(), disc.eta_map.len()),
        (s.xi.len(), disc.eta_map.len()),
        (s.phi.len(), disc.phi_map.len()),
    ] {
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// Fluid step operator over `[u, p]`, assembled and factorized once.
#[derive(Debug)]
pub struct FluidSystem {
    pub params: PhysicalParams,
    /// `(rho_f / dt) M`
    pub mass: SparseMatrix,
    /// `L <u.n_f, v.n_f>`
    pub normal: SparseMatrix,
    /// `gamma <P xi, P v>`, fluid rows and displacement columns.
    pub slip_cross: SparseMatrix,
    /// `<phi, v.n_f>`, fluid rows and pore pressure columns.
    pub phi_cross: SparseMatrix,
    /// Block matrix before boundary conditions.
    pub lhs: SparseMatrix,
    /// Block matrix after boundary conditions, the one that is factorized.
    pub reduced: SparseMatrix,
    elim: DirichletElimination,
    factor: Factorization,
}

/// `2 mu_f A + gamma G_ff + L N_ff` and `C`, the parts of the fluid operator
/// without the mass term.
pub(crate) fn stokes_blocks(
    disc: &Discretization,
    params: &PhysicalParams,
) -> Result<(SparseMatrix, SparseMatrix, SparseMatrix)> {
    let g = &disc.geometry;
    let a = assemble_sym_grad_stiffness(&disc.fluid_mesh, &disc.u_map, params.mu_f)?;
    let slip = assemble_interface_tangential(disc.u_side(), disc.u_side(), g.tangent, params.gamma)?;
    let normal =
        assemble_interface_normal(disc.u_side(), disc.u_side(), Some(g.n_f), Some(g.n_f), params.l)?;
    let c = assemble_pressure_div(&disc.fluid_mesh, &disc.u_map, &disc.p_map)?;
    let visc = SparseMatrix::linear_combination(&[(1.0, &a), (1.0, &slip), (1.0, &normal)]);
    Ok((visc, c, normal))
}

/// Saddle point matrix `[[vel, -C^T], [C, 0]]`.
pub(crate) fn saddle(vel: &SparseMatrix, c: &SparseMatrix) -> SparseMatrix {
    let (nu, np) = (vel.nrows(), c.nrows());
    let ct = c.transpose();
    block_matrix(nu + np, &[(vel, 0, 0, 1.0), (&ct, 0, nu, -1.0), (c, nu, 0, 1.0)])
}

pub fn build_fluid_system(disc: &Discretization, params: &PhysicalParams) -> Result<FluidSystem> {
    params.validate()?;
    let g = &disc.geometry;
    let mass = assemble_mass(&disc.fluid_mesh, &disc.u_map, params.rho_f / params.dt)?;
    let (visc, c, normal) = stokes_blocks(disc, params)?;
    let slip_cross =
        assemble_interface_tangential(disc.u_side(), disc.eta_side(), g.tangent, params.gamma)?;
    let phi_cross = assemble_interface_normal(disc.u_side(), disc.phi_side(), Some(g.n_f), None, 1.0)?;
    let vel = SparseMatrix::linear_combination(&[(1.0, &mass), (1.0, &visc)]);
    let lhs = saddle(&vel, &c);
    let (reduced, elim) = DirichletElimination::new(&lhs, &disc.u_map.constrained)?;
    let factor = factorize(&reduced)?;
    Ok(FluidSystem {
        params: *params,
        mass,
        normal,
        slip_cross,
        phi_cross,
        lhs,
        reduced,
        elim,
        factor,
    })
}

impl FluidSystem {
    pub fn dim(&self) -> usize {
        self.lhs.nrows()
    }

    /// Advances `(u, p)` from `prev` to `t_next`.
    pub fn step(
        &self,
        disc: &Discretization,
        prev: &State,
        mms: &MmsCase,
        t_next: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        check_state(disc, prev)?;
        check_time(prev, self.params.dt, t_next)?;
        let nu = disc.u_map.len();
        let mut rhs = vec![0.0; self.dim()];
        {
            let (ru, rp) = rhs.split_at_mut(nu);
            ru.copy_from_slice(&assemble_vector_load(
                &disc.fluid_mesh,
                &disc.u_map,
                |t, x, y| mms.forcing_f(t, x, y),
                t_next,
            ));
            self.mass.matvec_add(&prev.u, 1.0, ru);
            self.slip_cross.matvec_add(&prev.xi, 1.0, ru);
            self.normal.matvec_add(&prev.u, 1.0, ru);
            self.phi_cross.matvec_add(&prev.phi, -1.0, ru);
            rp.copy_from_slice(&assemble_load(
                &disc.fluid_mesh,
                &disc.p_map,
                |t, _, _| mms.forcing_g(t),
                t_next,
            ));
        }
        let bc = vector_boundary_values(&disc.u_map, |x, y| mms.exact_u(t_next, x, y));
        self.elim.apply_rhs(&mut rhs, &bc)?;
        let mut x = self.factor.solve(&rhs)?;
        let p = x.split_off(nu);
        Ok((x, p))
    }
}

/// Poroelastic step operator over `[xi, phi]`, assembled and factorized once.
#[derive(Debug)]
pub struct PoroSystem {
    pub params: PhysicalParams,
    /// `(rho_p / dt) M`
    pub mass_xi: SparseMatrix,
    /// `2 mu_p A + lambda_p B`
    pub elastic: SparseMatrix,
    /// `gamma <P u, P zeta>`, displacement rows and fluid columns.
    pub slip_cross: SparseMatrix,
    /// `<xi.n_p, zeta.n_p>`
    pub normal_xi: SparseMatrix,
    /// `(C0 / dt) M`
    pub mass_phi: SparseMatrix,
    /// `<u.n_p, psi>`, pore pressure rows and fluid columns.
    pub normal_u: SparseMatrix,
    /// `(1/L) <phi, psi>`
    pub phi_gamma: SparseMatrix,
    /// `<phi, zeta.n_p>`, the interface part of the upper off-diagonal block.
    pub phi_xi: SparseMatrix,
    pub lhs: SparseMatrix,
    pub reduced: SparseMatrix,
    elim: DirichletElimination,
    factor: Factorization,
}

/// `2 mu_p A + lambda_p B`.
pub(crate) fn elastic_block(disc: &Discretization, params: &PhysicalParams) -> Result<SparseMatrix> {
    let a = assemble_sym_grad_stiffness(&disc.poro_mesh, &disc.eta_map, params.mu_p)?;
    let b = assemble_div_div(&disc.poro_mesh, &disc.eta_map, params.lambda_p)?;
    Ok(SparseMatrix::linear_combination(&[(1.0, &a), (1.0, &b)]))
}

/// `(K grad phi, grad psi) + (1/L) <phi, psi>`.
pub(crate) fn darcy_blocks(
    disc: &Discretization,
    params: &PhysicalParams,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let k = assemble_scalar_stiffness(&disc.poro_mesh, &disc.phi_map, params.k)?;
    let gamma = assemble_interface_normal(disc.phi_side(), disc.phi_side(), None, None, 1.0 / params.l)?;
    Ok((k, gamma))
}

pub fn build_poro_system(disc: &Discretization, params: &PhysicalParams) -> Result<PoroSystem> {
    params.validate()?;
    let g = &disc.geometry;
    let dt = params.dt;
    let mass_xi = assemble_mass(&disc.poro_mesh, &disc.eta_map, params.rho_p / dt)?;
    let elastic = elastic_block(disc, params)?;
    let slip_pp = assemble_interface_tangential(disc.eta_side(), disc.eta_side(), g.tangent, params.gamma)?;
    let slip_cross =
        assemble_interface_tangential(disc.eta_side(), disc.u_side(), g.tangent, params.gamma)?;
    let normal_xi =
        assemble_interface_normal(disc.eta_side(), disc.eta_side(), Some(g.n_p), Some(g.n_p), 1.0)?;
    let mass_phi = assemble_mass(&disc.poro_mesh, &disc.phi_map, params.c0 / dt)?;
    let normal_u = assemble_interface_normal(disc.phi_side(), disc.u_side(), None, Some(g.n_p), 1.0)?;
    let (k, phi_gamma) = darcy_blocks(disc, params)?;
    let c = assemble_pressure_div(&disc.poro_mesh, &disc.eta_map, &disc.phi_map)?;
    let phi_xi = assemble_interface_normal(disc.eta_side(), disc.phi_side(), Some(g.n_p), None, 1.0)?;

    let xx = SparseMatrix::linear_combination(&[
        (1.0, &mass_xi),
        (dt, &elastic),
        (1.0, &slip_pp),
        (1.0, &normal_xi),
    ]);
    let ct = c.transpose();
    let xi_phi = phi_xi.transpose();
    let pp = SparseMatrix::linear_combination(&[(1.0, &mass_phi), (1.0, &k), (1.0, &phi_gamma)]);
    let nx = disc.eta_map.len();
    let lhs = block_matrix(
        disc.poro_len(),
        &[
            (&xx, 0, 0, 1.0),
            (&ct, 0, nx, -params.alpha),
            (&phi_xi, 0, nx, 1.0),
            (&c, nx, 0, params.alpha),
            (&xi_phi, nx, 0, -1.0),
            (&pp, nx, nx, 1.0),
        ],
    );
    let dofs: Vec<usize> = disc
        .eta_map
        .constrained
        .iter()
        .copied()
        .chain(disc.phi_map.constrained.iter().map(|&i| i + nx))
        .collect();
    let (reduced, elim) = DirichletElimination::new(&lhs, &dofs)?;
    let factor = factorize(&reduced)?;
    Ok(PoroSystem {
        params: *params,
        mass_xi,
        elastic,
        slip_cross,
        normal_xi,
        mass_phi,
        normal_u,
        phi_gamma,
        phi_xi,
        lhs,
        reduced,
        elim,
        factor,
    })
}

impl PoroSystem {
    pub fn dim(&self) -> usize {
        self.lhs.nrows()
    }

    /// Advances `(eta, xi, phi)` from `prev` to `t_next`.
    pub fn step(
        &self,
        disc: &Discretization,
        prev: &State,
        mms: &MmsCase,
        t_next: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        check_state(disc, prev)?;
        check_time(prev, self.params.dt, t_next)?;
        let nx = disc.eta_map.len();
        let mut rhs = vec![0.0; self.dim()];
        {
            let (rx, rf) = rhs.split_at_mut(nx);
            rx.copy_from_slice(&assemble_vector_load(
                &disc.poro_mesh,
                &disc.eta_map,
                |t, x, y| mms.forcing_e(t, x, y),
                t_next,
            ));
            self.mass_xi.matvec_add(&prev.xi, 1.0, rx);
            self.elastic.matvec_add(&prev.eta, -1.0, rx);
            self.slip_cross.matvec_add(&prev.u, 1.0, rx);
            self.normal_xi.matvec_add(&prev.xi, 1.0, rx);
            rf.copy_from_slice(&assemble_load(
                &disc.poro_mesh,
                &disc.phi_map,
                |t, x, y| mms.forcing_d(t, x, y),
                t_next,
            ));
            self.mass_phi.matvec_add(&prev.phi, 1.0, rf);
            self.normal_u.matvec_add(&prev.u, -1.0, rf);
            self.phi_gamma.matvec_add(&prev.phi, 1.0, rf);
        }
        let mut bc = vector_boundary_values(&disc.eta_map, |x, y| mms.exact_xi(t_next, x, y));
        bc.extend(scalar_boundary_values(&disc.phi_map, |x, y| mms.exact_phi(t_next, x, y)));
        self.elim.apply_rhs(&mut rhs, &bc)?;
        let mut xi = self.factor.solve(&rhs)?;
        let phi = xi.split_off(nx);
        let dt = self.params.dt;
        let eta = prev.eta.iter().zip(&xi).map(|(e, x)| e + dt * x).collect();
        Ok((eta, xi, phi))
    }
}

/// `max |sum of terms|` over free rows relative to the largest single term.
fn relative_residual(terms: &[Vec<f64>], free: impl Fn(usize) -> bool) -> f64 {
    let (mut r, mut s) = (0.0f64, 0.0f64);
    for i in 0..terms[0].len() {
        if !free(i) {
            continue;
        }
        r = r.max(terms.iter().map(|t| t[i]).sum::<f64>().abs());
        s = terms.iter().fold(s, |m, t| m.max(t[i].abs()));
    }
    if s == 0.0 {
        0.0
    } else {
        r / s
    }
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sym(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

/// Weak residual of the fluid equations for `(u, p)` at `t_next`, tested
/// against every unconstrained basis function. Evaluated pointwise by
/// quadrature, independently of the assembled matrices.
#[allow(clippy::too_many_arguments)]
pub fn fluid_residual(
    disc: &Discretization,
    params: &PhysicalParams,
    prev: &State,
    u: &[f64],
    p: &[f64],
    mms: &MmsCase,
    t_next: f64,
) -> f64 {
    let rule = QuadratureRule::triangle_order4();
    let (mesh, vm, qm) = (&disc.fluid_mesh, &disc.u_map, &disc.p_map);
    let g = disc.geometry;
    let (un, uo, pn) = (disc.u_field(u), disc.u_field(&prev.u), disc.p_field(p));
    let (xio, phio) = (disc.eta_field(&prev.xi), disc.phi_field(&prev.phi));
    let dt = params.dt;
    let inertia = test_volume(mesh, vm, &rule, |qp, geo| {
        let (a, _) = un.eval_qp(qp, geo);
        let (b, _) = uo.eval_qp(qp, geo);
        TestFlux {
            value: [params.rho_f / dt * (a[0] - b[0]), params.rho_f / dt * (a[1] - b[1])],
            ..Default::default()
        }
    });
    let viscous = test_volume(mesh, vm, &rule, |qp, geo| {
        let (_, gu) = un.eval_qp(qp, geo);
        let d = sym(gu);
        let s = 2.0 * params.mu_f;
        TestFlux {
            grad: [[s * d[0][0], s * d[0][1]], [s * d[1][0], s * d[1][1]]],
            ..Default::default()
        }
    });
    let pressure = test_volume(mesh, vm, &rule, |qp, geo| {
        let (pv, _) = pn.eval_qp(qp, geo);
        TestFlux {
            grad: [[-pv[0], 0.0], [0.0, -pv[0]]],
            ..Default::default()
        }
    });
    let forcing = test_volume(mesh, vm, &rule, |qp, _| {
        let f = mms.forcing_f(t_next, qp.x[0], qp.x[1]);
        TestFlux {
            value: [-f[0], -f[1]],
            ..Default::default()
        }
    });
    let interface = test_interface(mesh, vm, |ip| {
        let (a, b) = (un.trace(ip.x), uo.trace(ip.x));
        let xi = xio.trace(ip.x);
        let phi = phio.trace(ip.x)[0];
        let slip = params.gamma * (dot2(a, g.tangent) - dot2(xi, g.tangent));
        let normal = params.l * (dot2(a, g.n_f) - dot2(b, g.n_f)) + phi;
        [
            slip * g.tangent[0] + normal * g.n_f[0],
            slip * g.tangent[1] + normal * g.n_f[1],
        ]
    });
    let free = |i: usize| vm.constrained.binary_search(&i).is_err();
    let ru = relative_residual(&[inertia, viscous, pressure, forcing, interface], free);

    let div = test_volume(mesh, qm, &rule, |qp, geo| {
        let (_, gu) = un.eval_qp(qp, geo);
        TestFlux {
            value: [gu[0][0] + gu[1][1], 0.0],
            ..Default::default()
        }
    });
    let source = test_volume(mesh, qm, &rule, |_, _| TestFlux {
        value: [-mms.forcing_g(t_next), 0.0],
        ..Default::default()
    });
    let rp = relative_residual(&[div, source], |_| true);
    ru.max(rp)
}

/// Weak residual of the poroelastic equations, the counterpart of
/// [`fluid_residual`].
#[allow(clippy::too_many_arguments)]
pub fn poro_residual(
    disc: &Discretization,
    params: &PhysicalParams,
    prev: &State,
    eta: &[f64],
    xi: &[f64],
    phi: &[f64],
    mms: &MmsCase,
    t_next: f64,
) -> f64 {
    let rule = QuadratureRule::triangle_order4();
    let (mesh, vm, qm) = (&disc.poro_mesh, &disc.eta_map, &disc.phi_map);
    let g = disc.geometry;
    let dt = params.dt;
    let (en, xn, fnew) = (disc.eta_field(eta), disc.eta_field(xi), disc.phi_field(phi));
    let (xo, fo, uo) = (disc.eta_field(&prev.xi), disc.phi_field(&prev.phi), disc.u_field(&prev.u));

    let inertia = test_volume(mesh, vm, &rule, |qp, geo| {
        let (a, _) = xn.eval_qp(qp, geo);
        let (b, _) = xo.eval_qp(qp, geo);
        TestFlux {
            value: [params.rho_p / dt * (a[0] - b[0]), params.rho_p / dt * (a[1] - b[1])],
            ..Default::default()
        }
    });
    let elastic = test_volume(mesh, vm, &rule, |qp, geo| {
        let (_, ge) = en.eval_qp(qp, geo);
        let d = sym(ge);
        let (s, l) = (2.0 * params.mu_p, params.lambda_p * (ge[0][0] + ge[1][1]));
        TestFlux {
            grad: [[s * d[0][0] + l, s * d[0][1]], [s * d[1][0], s * d[1][1] + l]],
            ..Default::default()
        }
    });
    let biot = test_volume(mesh, vm, &rule, |qp, geo| {
        let (f, _) = fnew.eval_qp(qp, geo);
        let a = -params.alpha * f[0];
        TestFlux {
            grad: [[a, 0.0], [0.0, a]],
            ..Default::default()
        }
    });
    let forcing = test_volume(mesh, vm, &rule, |qp, _| {
        let f = mms.forcing_e(t_next, qp.x[0], qp.x[1]);
        TestFlux {
            value: [-f[0], -f[1]],
            ..Default::default()
        }
    });
    let interface = test_interface(mesh, vm, |ip| {
        let (a, b) = (xn.trace(ip.x), xo.trace(ip.x));
        let u = uo.trace(ip.x);
        let ph = fnew.trace(ip.x)[0];
        let slip = params.gamma * (dot2(a, g.tangent) - dot2(u, g.tangent));
        let normal = dot2(a, g.n_p) - dot2(b, g.n_p) + ph;
        [
            slip * g.tangent[0] + normal * g.n_p[0],
            slip * g.tangent[1] + normal * g.n_p[1],
        ]
    });
    let rx = relative_residual(&[inertia, elastic, biot, forcing, interface], |i| {
        vm.constrained.binary_search(&i).is_err()
    });

    let storage = test_volume(mesh, qm, &rule, |qp, geo| {
        let (a, _) = fnew.eval_qp(qp, geo);
        let (b, _) = fo.eval_qp(qp, geo);
        TestFlux {
            value: [params.c0 / dt * (a[0] - b[0]), 0.0],
            ..Default::default()
        }
    });
    let coupling = test_volume(mesh, qm, &rule, |qp, geo| {
        let (_, gx) = xn.eval_qp(qp, geo);
        TestFlux {
            value: [params.alpha * (gx[0][0] + gx[1][1]), 0.0],
            ..Default::default()
        }
    });
    let flow = test_volume(mesh, qm, &rule, |qp, geo| {
        let (_, gp) = fnew.eval_qp(qp, geo);
        let k = params.k;
        TestFlux {
            grad: [
                [k[0][0] * gp[0][0] + k[0][1] * gp[0][1], k[1][0] * gp[0][0] + k[1][1] * gp[0][1]],
                [0.0; 2],
            ],
            ..Default::default()
        }
    });
    let source = test_volume(mesh, qm, &rule, |qp, _| TestFlux {
        value: [-mms.forcing_d(t_next, qp.x[0], qp.x[1]), 0.0],
        ..Default::default()
    });
    let interface_phi = test_interface(mesh, qm, |ip| {
        let a = xn.trace(ip.x);
        let u = uo.trace(ip.x);
        let (pn, po) = (fnew.trace(ip.x)[0], fo.trace(ip.x)[0]);
        [-dot2(a, g.n_p) + dot2(u, g.n_p) + (pn - po) / params.l, 0.0]
    });
    let rf = relative_residual(&[storage, coupling, flow, source, interface_phi], |i| {
        qm.constrained.binary_search(&i).is_err()
    });
    rx.max(rf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::norm_inf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn manufactured_start(disc: &Discretization, mms: &MmsCase) -> State {
        State {
            u: disc.u_map.interpolate_vector(|x, y| mms.exact_u(0.0, x, y)),
            p: disc.p_map.interpolate_scalar(|x, y| mms.exact_p(0.0, x, y)),
            eta: disc.eta_map.interpolate_vector(|x, y| mms.exact_eta(0.0, x, y)),
            xi: disc.eta_map.interpolate_vector(|x, y| mms.exact_xi(0.0, x, y)),
            phi: disc.phi_map.interpolate_scalar(|x, y| mms.exact_phi(0.0, x, y)),
            t: 0.0,
        }
    }

    #[test]
    fn dimensions() {
        for n in [2, 4] {
            let d = Discretization::new(n).unwrap();
            let p = PhysicalParams::default();
            let f = build_fluid_system(&d, &p).unwrap();
            let s = build_poro_system(&d, &p).unwrap();
            let full = 2 * (2 * n + 1) * (2 * n + 1) + (n + 1) * (n + 1);
            assert_eq!(f.dim(), full);
            assert_eq!(s.dim(), full);
            // the unknowns left after removing the constrained ones
            assert_eq!(f.dim() - d.u_map.constrained.len(), full - 2 * (6 * n + 1));
            assert_eq!(
                s.dim() - d.eta_map.constrained.len() - d.phi_map.constrained.len(),
                full - 2 * (6 * n + 1) - (3 * n + 1)
            );
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let d = Discretization::new(4).unwrap();
        let p = PhysicalParams::default().with_dt(0.1);
        let z = MmsCase::zero();
        let s = State::zeros(&d);
        let (u, pr) = build_fluid_system(&d, &p).unwrap().step(&d, &s, &z, 0.1).unwrap();
        assert!(u.iter().chain(&pr).all(|&v| v == 0.0));
        let (e, x, f) = build_poro_system(&d, &p).unwrap().step(&d, &s, &z, 0.1).unwrap();
        assert!(e.iter().chain(&x).chain(&f).all(|&v| v == 0.0));
    }

    #[test]
    fn fluid_velocity_block_is_spd() {
        let d = Discretization::new(4).unwrap();
        let p = PhysicalParams::default();
        let f = build_fluid_system(&d, &p).unwrap();
        let nu = d.u_map.len();
        let a = f.reduced.block(0..nu, 0..nu);
        assert!(a.asymmetry() < 1e-12);
        // x^T A x > 0 for random x, and the smallest Gershgorin-free check:
        // power iteration on (shift I - A) gives the smallest eigenvalue.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x: Vec<f64> = (0..nu).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(a.bilinear(&x, &x) > 0.0);
        }
        let shift = a.norm_inf();
        let mut v: Vec<f64> = (0..nu).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut lam = 0.0;
        for _ in 0..3000 {
            let av = a.matvec(&v);
            let w: Vec<f64> = v.iter().zip(&av).map(|(x, y)| shift * x - y).collect();
            let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            lam = shift - nrm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.iter().map(|x| x / nrm).collect();
        }
        assert!(lam > 0.0, "smallest eigenvalue estimate {lam}");
    }

    #[test]
    fn poro_interface_blocks_are_skew_paired() {
        let d = Discretization::new(4).unwrap();
        let s = build_poro_system(&d, &PhysicalParams::default()).unwrap();
        let nx = d.eta_map.len();
        let nf = d.phi_map.len();
        let alpha_c = assemble_pressure_div(&d.poro_mesh, &d.eta_map, &d.phi_map).unwrap();
        // strip the Biot parts and compare what is left
        let upper = SparseMatrix::linear_combination(&[
            (1.0, &s.lhs.block(0..nx, nx..nx + nf)),
            (1.0, &alpha_c.transpose()),
        ]);
        let lower = SparseMatrix::linear_combination(&[
            (1.0, &s.lhs.block(nx..nx + nf, 0..nx)),
            (-1.0, &alpha_c),
        ]);
        let sum = SparseMatrix::linear_combination(&[(1.0, &upper), (1.0, &lower.transpose())]);
        assert!(sum.max_abs() < 1e-13);
        assert!(upper.max_abs() > 1e-3);
        assert!(s.lhs.asymmetry() > 0.1);
    }

    #[test]
    fn residual_oracles_and_update_relation() {
        let d = Discretization::new(4).unwrap();
        let params = PhysicalParams::default().with_dt(0.05);
        let mms = MmsCase::manufactured(&params);
        let f = build_fluid_system(&d, &params).unwrap();
        let s = build_poro_system(&d, &params).unwrap();
        let mut state = manufactured_start(&d, &mms);
        for k in 1..=3 {
            let t = k as f64 * params.dt;
            let (u, p) = f.step(&d, &state, &mms, t).unwrap();
            let (eta, xi, phi) = s.step(&d, &state, &mms, t).unwrap();
            let rf = fluid_residual(&d, &params, &state, &u, &p, &mms, t);
            let rp = poro_residual(&d, &params, &state, &eta, &xi, &phi, &mms, t);
            assert!(rf <= 1e-10, "fluid residual {rf}");
            assert!(rp <= 1e-10, "poro residual {rp}");
            for i in 0..eta.len() {
                assert_eq!(eta[i].to_bits(), (state.eta[i] + params.dt * xi[i]).to_bits());
            }
            // the oracle does see a wrong answer
            let mut bad = u.clone();
            let i = (d.u_map.len() / 2..)
                .find(|i| d.u_map.constrained.binary_search(i).is_err())
                .unwrap();
            bad[i] += 1e-3;
            assert!(fluid_residual(&d, &params, &state, &bad, &p, &mms, t) > 1e-8);
            state = State { u, p, eta, xi, phi, t };
        }
    }

    #[test]
    fn time_mismatch_rejected() {
        let d = Discretization::new(2).unwrap();
        let params = PhysicalParams::default().with_dt(0.1);
        let f = build_fluid_system(&d, &params).unwrap();
        let s = State::zeros(&d);
        assert!(f.step(&d, &s, &MmsCase::zero(), 0.2).is_err());
    }

    #[test]
    fn zero_slip_penalty_kills_cross_terms() {
        // gamma must be positive for a run, so check the assembly directly
        let d = Discretization::new(3).unwrap();
        let g = assemble_interface_tangential(d.u_side(), d.eta_side(), [1.0, 0.0], 0.0).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn larger_normal_penalty_pins_normal_trace() {
        let d = Discretization::new(4).unwrap();
        let mms = MmsCase::manufactured(&PhysicalParams::default());
        let start = manufactured_start(&d, &mms);
        let dt = 0.05;
        let mut jumps = Vec::new();
        for l in [1.0, 100.0] {
            let params = PhysicalParams::default().with_dt(dt).with_penalties(1.0, l);
            let f = build_fluid_system(&d, &params).unwrap();
            let (u, _) = f.step(&d, &start, &mms, dt).unwrap();
            let diff: Vec<f64> = u.iter().zip(&start.u).map(|(a, b)| a - b).collect();
            let fe = d.u_field(&diff);
            let j = crate::fem::field::integrate_interface(&d.fluid_mesh, |ip| {
                let v = fe.trace(ip.x);
                v[1] * v[1]
            })
            .sqrt();
            jumps.push(j);
        }
        assert!(jumps[1] < jumps[0], "{jumps:?}");
    }

    #[test]
    fn reassembly_is_bitwise_identical() {
        let d = Discretization::new(3).unwrap();
        let p = PhysicalParams::default();
        let a = build_poro_system(&d, &p).unwrap();
        let b = build_poro_system(&d, &p).unwrap();
        assert_eq!(a.lhs, b.lhs);
        let f = build_fluid_system(&d, &p).unwrap();
        let g = build_fluid_system(&d, &p).unwrap();
        assert_eq!(f.lhs, g.lhs);
        assert!(norm_inf(f.lhs.values()) > 0.0);
    }
}
