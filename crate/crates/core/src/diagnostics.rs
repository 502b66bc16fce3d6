//! Error norms, Ritz projections, discrete energies and convergence rates.

use crate::error::{invalid, Result};
use crate::fem::field::{integrate, integrate_interface, test_interface, test_volume, FeField, TestFlux};
use crate::fem::{DirichletElimination, DofMap, QuadratureRule, SparseMatrix};
use crate::linalg::factorize;
use crate::mesh::Mesh2D;
use crate::mms::MmsCase;
use crate::params::PhysicalParams;
use crate::subproblems::{
    darcy_blocks, elastic_block, saddle, scalar_boundary_values, stokes_blocks,
    vector_boundary_values, Discretization, State,
};

/// `||v_h - v||_{L2}` for a vector field, with the exact field sampled at the
/// points of a degree 6 rule.
pub fn l2_error_vector(
    mesh: &Mesh2D,
    map: &DofMap,
    coeffs: &[f64],
    exact: impl Fn(f64, f64) -> [f64; 2],
) -> f64 {
    let fe = FeField::new(mesh, map, coeffs);
    integrate(mesh, &QuadratureRule::triangle_order6(), |qp, geo| {
        let (v, _) = fe.eval_qp(qp, geo);
        let e = exact(qp.x[0], qp.x[1]);
        (v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2)
    })
    .sqrt()
}

/// Scalar counterpart of [`l2_error_vector`].
pub fn l2_error_scalar(mesh: &Mesh2D, map: &DofMap, coeffs: &[f64], exact: impl Fn(f64, f64) -> f64) -> f64 {
    let fe = FeField::new(mesh, map, coeffs);
    integrate(mesh, &QuadratureRule::triangle_order6(), |qp, geo| {
        let (v, _) = fe.eval_qp(qp, geo);
        (v[0] - exact(qp.x[0], qp.x[1])).powi(2)
    })
    .sqrt()
}

/// Full `H1` norm of the error of a vector field.
pub fn h1_error_vector(
    mesh: &Mesh2D,
    map: &DofMap,
    coeffs: &[f64],
    exact: impl Fn(f64, f64) -> [f64; 2],
    grad: impl Fn(f64, f64) -> [[f64; 2]; 2],
) -> f64 {
    let fe = FeField::new(mesh, map, coeffs);
    integrate(mesh, &QuadratureRule::triangle_order6(), |qp, geo| {
        let (v, g) = fe.eval_qp(qp, geo);
        let (x, y) = (qp.x[0], qp.x[1]);
        let (e, ge) = (exact(x, y), grad(x, y));
        let mut s = 0.0;
        for c in 0..2 {
            s += (v[c] - e[c]).powi(2) + (g[c][0] - ge[c][0]).powi(2) + (g[c][1] - ge[c][1]).powi(2);
        }
        s
    })
    .sqrt()
}

/// Full `H1` norm of the error of a scalar field.
pub fn h1_error_scalar(
    mesh: &Mesh2D,
    map: &DofMap,
    coeffs: &[f64],
    exact: impl Fn(f64, f64) -> f64,
    grad: impl Fn(f64, f64) -> [f64; 2],
) -> f64 {
    let fe = FeField::new(mesh, map, coeffs);
    integrate(mesh, &QuadratureRule::triangle_order6(), |qp, geo| {
        let (v, g) = fe.eval_qp(qp, geo);
        let (x, y) = (qp.x[0], qp.x[1]);
        let ge = grad(x, y);
        (v[0] - exact(x, y)).powi(2) + (g[0][0] - ge[0]).powi(2) + (g[0][1] - ge[1]).powi(2)
    })
    .sqrt()
}

/// Final-time errors of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub dt: f64,
    /// Grid spacing, `1 / cells`.
    pub h: f64,
    pub t: f64,
    pub e_eta: f64,
    pub e_xi: f64,
    pub e_phi: f64,
    pub e_u: f64,
    pub e_p: f64,
}

impl ErrorReport {
    pub fn errors(&self) -> [f64; 5] {
        [self.e_eta, self.e_xi, self.e_phi, self.e_u, self.e_p]
    }
}

/// L2 errors of every field of `state` against the exact solution at `state.t`.
pub fn error_report(disc: &Discretization, state: &State, mms: &MmsCase, n: usize, dt: f64) -> ErrorReport {
    let t = state.t;
    let (fm, pm) = (&disc.fluid_mesh, &disc.poro_mesh);
    ErrorReport {
        n,
        dt,
        h: 1.0 / disc.cells as f64,
        t,
        e_eta: l2_error_vector(pm, &disc.eta_map, &state.eta, |x, y| mms.exact_eta(t, x, y)),
        e_xi: l2_error_vector(pm, &disc.eta_map, &state.xi, |x, y| mms.exact_xi(t, x, y)),
        e_phi: l2_error_scalar(pm, &disc.phi_map, &state.phi, |x, y| mms.exact_phi(t, x, y)),
        e_u: l2_error_vector(fm, &disc.u_map, &state.u, |x, y| mms.exact_u(t, x, y)),
        e_p: l2_error_scalar(fm, &disc.p_map, &state.p, |x, y| mms.exact_p(t, x, y)),
    }
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sym_flux(g: [[f64; 2]; 2], two_mu: f64, lambda: f64) -> [[f64; 2]; 2] {
    let off = 0.5 * two_mu * (g[0][1] + g[1][0]);
    let div = lambda * (g[0][0] + g[1][1]);
    [[two_mu * g[0][0] + div, off], [off, two_mu * g[1][1] + div]]
}

fn solve_constrained(a: &SparseMatrix, mut rhs: Vec<f64>, dofs: &[usize], values: &[f64]) -> Result<Vec<f64>> {
    let (reduced, elim) = DirichletElimination::new(a, dofs)?;
    elim.apply_rhs(&mut rhs, values)?;
    factorize(&reduced)?.solve(&rhs)
}

/// Stokes Ritz projection of `(u, p)`: the fluid operator without the mass
/// term, tested against the continuous fields, with exterior values taken
/// from the interpolant of `u`.
pub fn ritz_project_stokes(
    disc: &Discretization,
    params: &PhysicalParams,
    u: impl Fn(f64, f64) -> [f64; 2],
    grad_u: impl Fn(f64, f64) -> [[f64; 2]; 2],
    p: impl Fn(f64, f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (visc, c, _) = stokes_blocks(disc, params)?;
    let lhs = saddle(&visc, &c);
    let rule = QuadratureRule::triangle_order6();
    let g = disc.geometry;
    let mesh = &disc.fluid_mesh;
    let mut rhs = test_volume(mesh, &disc.u_map, &rule, |qp, _| {
        let (x, y) = (qp.x[0], qp.x[1]);
        let mut f = sym_flux(grad_u(x, y), 2.0 * params.mu_f, 0.0);
        let pv = p(x, y);
        f[0][0] -= pv;
        f[1][1] -= pv;
        TestFlux {
            grad: f,
            ..Default::default()
        }
    });
    let iface = test_interface(mesh, &disc.u_map, |ip| {
        let v = u(ip.x[0], ip.x[1]);
        let s = params.gamma * dot2(v, g.tangent);
        let n = params.l * dot2(v, g.n_f);
        [s * g.tangent[0] + n * g.n_f[0], s * g.tangent[1] + n * g.n_f[1]]
    });
    rhs.iter_mut().zip(&iface).for_each(|(a, b)| *a += b);
    rhs.extend(test_volume(mesh, &disc.p_map, &rule, |qp, _| {
        let gu = grad_u(qp.x[0], qp.x[1]);
        TestFlux {
            value: [gu[0][0] + gu[1][1], 0.0],
            ..Default::default()
        }
    }));
    let bc = vector_boundary_values(&disc.u_map, &u);
    let mut x = solve_constrained(&lhs, rhs, &disc.u_map.constrained, &bc)?;
    let pr = x.split_off(disc.u_map.len());
    Ok((x, pr))
}

/// Elasticity Ritz projection with the exterior values of the interpolant.
pub fn ritz_project_elasticity(
    disc: &Discretization,
    params: &PhysicalParams,
    eta: impl Fn(f64, f64) -> [f64; 2],
    grad_eta: impl Fn(f64, f64) -> [[f64; 2]; 2],
) -> Result<Vec<f64>> {
    let lhs = elastic_block(disc, params)?;
    let rule = QuadratureRule::triangle_order6();
    let rhs = test_volume(&disc.poro_mesh, &disc.eta_map, &rule, |qp, _| TestFlux {
        grad: sym_flux(grad_eta(qp.x[0], qp.x[1]), 2.0 * params.mu_p, params.lambda_p),
        ..Default::default()
    });
    let bc = vector_boundary_values(&disc.eta_map, &eta);
    solve_constrained(&lhs, rhs, &disc.eta_map.constrained, &bc)
}

/// Darcy Ritz projection including the `(1/L) <., .>_Gamma` term.
pub fn ritz_project_darcy(
    disc: &Discretization,
    params: &PhysicalParams,
    phi: impl Fn(f64, f64) -> f64,
    grad_phi: impl Fn(f64, f64) -> [f64; 2],
) -> Result<Vec<f64>> {
    let (k, gamma) = darcy_blocks(disc, params)?;
    let lhs = SparseMatrix::linear_combination(&[(1.0, &k), (1.0, &gamma)]);
    let rule = QuadratureRule::triangle_order6();
    let kk = params.k;
    let mut rhs = test_volume(&disc.poro_mesh, &disc.phi_map, &rule, |qp, _| {
        let g = grad_phi(qp.x[0], qp.x[1]);
        TestFlux {
            grad: [[kk[0][0] * g[0] + kk[0][1] * g[1], kk[1][0] * g[0] + kk[1][1] * g[1]], [0.0; 2]],
            ..Default::default()
        }
    });
    let iface = test_interface(&disc.poro_mesh, &disc.phi_map, |ip| [phi(ip.x[0], ip.x[1]) / params.l, 0.0]);
    rhs.iter_mut().zip(&iface).for_each(|(a, b)| *a += b);
    let bc = scalar_boundary_values(&disc.phi_map, &phi);
    solve_constrained(&lhs, rhs, &disc.phi_map.constrained, &bc)
}

/// Ritz projections of the exact solution at time `t`, as a [`State`].
/// The structure velocity is the elasticity projection of `xi`.
pub fn ritz_state(disc: &Discretization, params: &PhysicalParams, mms: &MmsCase, t: f64) -> Result<State> {
    let (u, p) = ritz_project_stokes(
        disc,
        params,
        |x, y| mms.exact_u(t, x, y),
        |x, y| mms.grad_u(t, x, y),
        |x, y| mms.exact_p(t, x, y),
    )?;
    let eta = ritz_project_elasticity(disc, params, |x, y| mms.exact_eta(t, x, y), |x, y| mms.grad_eta(t, x, y))?;
    let xi = ritz_project_elasticity(disc, params, |x, y| mms.exact_xi(t, x, y), |x, y| mms.grad_xi(t, x, y))?;
    let phi = ritz_project_darcy(disc, params, |x, y| mms.exact_phi(t, x, y), |x, y| mms.grad_phi(t, x, y))?;
    Ok(State { u, p, eta, xi, phi, t })
}

/// Energy bookkeeping for one step `n -> n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub step: usize,
    /// `X_n^2`
    pub x_prev: f64,
    /// `X_{n+1}^2`
    pub x_sq: f64,
    /// `Y_{n+1}^2`
    pub y_sq: f64,
    /// `Z_{n+1}`
    pub z: f64,
    /// `X_{n+1}^2 - X_n^2 + Y_{n+1}^2 + Z_{n+1}`
    pub residual: f64,
}

impl EnergyRecord {
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.x_prev.max(1.0)
    }

    /// `X_{n+1}^2 <= X_n^2 + |Z_{n+1}|`, up to rounding in the energies.
    pub fn bounded(&self) -> bool {
        self.x_sq <= self.x_prev + self.z.abs() + 1e-12 * self.x_prev.max(1.0)
    }
}

/// Interface integrals of pairs of traces, evaluated on the fluid side edges.
fn gamma_integral(disc: &Discretization, f: impl Fn([f64; 2]) -> f64) -> f64 {
    integrate_interface(&disc.fluid_mesh, |ip| f(ip.x))
}

/// `X^2` of a state.
pub fn energy_x_sq(disc: &Discretization, params: &PhysicalParams, s: &State) -> f64 {
    let rule = QuadratureRule::triangle_order4();
    let (u, xi, eta, phi) = (disc.u_field(&s.u), disc.eta_field(&s.xi), disc.eta_field(&s.eta), disc.phi_field(&s.phi));
    let fluid = integrate(&disc.fluid_mesh, &rule, |qp, geo| {
        let (v, _) = u.eval_qp(qp, geo);
        params.rho_f * dot2(v, v)
    });
    let poro = integrate(&disc.poro_mesh, &rule, |qp, geo| {
        let (x, _) = xi.eval_qp(qp, geo);
        let (_, ge) = eta.eval_qp(qp, geo);
        let (f, _) = phi.eval_qp(qp, geo);
        params.rho_p * dot2(x, x)
            + 2.0 * params.mu_p * sym_sq(ge)
            + params.lambda_p * (ge[0][0] + ge[1][1]).powi(2)
            + params.c0 * f[0] * f[0]
    });
    let g = disc.geometry;
    let iface = gamma_integral(disc, |x| {
        let (a, b, f) = (u.trace(x), xi.trace(x), phi.trace(x)[0]);
        params.gamma * dot2(a, g.tangent).powi(2)
            + params.gamma * dot2(b, g.tangent).powi(2)
            + params.l * dot2(a, g.n_f).powi(2)
            + dot2(b, g.n_p).powi(2)
            + f * f / params.l
    });
    fluid + poro + params.dt * iface
}

/// `X` of a state.
pub fn energy_x(disc: &Discretization, params: &PhysicalParams, s: &State) -> f64 {
    energy_x_sq(disc, params, s).max(0.0).sqrt()
}

fn sym_sq(g: [[f64; 2]; 2]) -> f64 {
    let off = 0.5 * (g[0][1] + g[1][0]);
    g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * off * off
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `Y^2` for the step from `prev` to `cur`.
pub fn energy_y_sq(disc: &Discretization, params: &PhysicalParams, cur: &State, prev: &State) -> f64 {
    let rule = QuadratureRule::triangle_order4();
    let (du, dxi, deta, dphi) = (
        diff(&cur.u, &prev.u),
        diff(&cur.xi, &prev.xi),
        diff(&cur.eta, &prev.eta),
        diff(&cur.phi, &prev.phi),
    );
    let (du, dxi, deta, dphi) = (disc.u_field(&du), disc.eta_field(&dxi), disc.eta_field(&deta), disc.phi_field(&dphi));
    let (u, phi) = (disc.u_field(&cur.u), disc.phi_field(&cur.phi));
    let (xi, uo, xio) = (disc.eta_field(&cur.xi), disc.u_field(&prev.u), disc.eta_field(&prev.xi));
    let dt = params.dt;
    let k = params.k;
    let fluid = integrate(&disc.fluid_mesh, &rule, |qp, geo| {
        let (d, _) = du.eval_qp(qp, geo);
        let (_, gu) = u.eval_qp(qp, geo);
        params.rho_f * dot2(d, d) + 2.0 * dt * 2.0 * params.mu_f * sym_sq(gu)
    });
    let poro = integrate(&disc.poro_mesh, &rule, |qp, geo| {
        let (dx, _) = dxi.eval_qp(qp, geo);
        let (_, ge) = deta.eval_qp(qp, geo);
        let (df, _) = dphi.eval_qp(qp, geo);
        let (_, gp) = phi.eval_qp(qp, geo);
        let gp = gp[0];
        let kg = [k[0][0] * gp[0] + k[0][1] * gp[1], k[1][0] * gp[0] + k[1][1] * gp[1]];
        params.rho_p * dot2(dx, dx)
            + 2.0 * params.mu_p * sym_sq(ge)
            + params.lambda_p * (ge[0][0] + ge[1][1]).powi(2)
            + params.c0 * df[0] * df[0]
            + 2.0 * dt * dot2(kg, gp)
    });
    let g = disc.geometry;
    let iface = gamma_integral(disc, |x| {
        let t1 = dot2(u.trace(x), g.tangent) - dot2(xio.trace(x), g.tangent);
        let t2 = dot2(xi.trace(x), g.tangent) - dot2(uo.trace(x), g.tangent);
        let n1 = dot2(du.trace(x), g.n_f);
        let n2 = dot2(dxi.trace(x), g.n_p);
        let f = dphi.trace(x)[0];
        params.gamma * (t1 * t1 + t2 * t2) + params.l * n1 * n1 + n2 * n2 + f * f / params.l
    });
    fluid + poro + dt * iface
}

/// `Z` for the step from `prev` to `cur`.
pub fn energy_z(disc: &Discretization, params: &PhysicalParams, cur: &State, prev: &State) -> f64 {
    let (du, dphi) = (diff(&cur.u, &prev.u), diff(&cur.phi, &prev.phi));
    let (du, dphi) = (disc.u_field(&du), disc.phi_field(&dphi));
    let (phio, uo) = (disc.phi_field(&prev.phi), disc.u_field(&prev.u));
    let g = disc.geometry;
    2.0 * params.dt
        * gamma_integral(disc, |x| {
            phio.trace(x)[0] * dot2(du.trace(x), g.n_f) + dot2(uo.trace(x), g.n_p) * dphi.trace(x)[0]
        })
}

pub fn energy_record(disc: &Discretization, params: &PhysicalParams, step: usize, prev: &State, cur: &State) -> EnergyRecord {
    let x_prev = energy_x_sq(disc, params, prev);
    let x_sq = energy_x_sq(disc, params, cur);
    let y_sq = energy_y_sq(disc, params, cur, prev);
    let z = energy_z(disc, params, cur, prev);
    EnergyRecord {
        step,
        x_prev,
        x_sq,
        y_sq,
        z,
        residual: x_sq - x_prev + y_sq + z,
    }
}

/// Largest relative energy identity residual over a trajectory.
pub fn energy_identity_residual(disc: &Discretization, params: &PhysicalParams, states: &[State]) -> f64 {
    states
        .windows(2)
        .enumerate()
        .map(|(k, w)| energy_record(disc, params, k + 1, &w[0], &w[1]).relative_residual())
        .fold(0.0, f64::max)
}

/// `log(e_i / e_{i+1}) / log(factor)` for consecutive entries.
pub fn convergence_rates(errors: &[f64], factor: f64) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return invalid("need at least two errors for a rate");
    }
    if let Some(e) = errors.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return invalid(format!("errors must be positive, got {e}"));
    }
    if factor.is_nan() || factor <= 1.0 {
        return invalid(format!("refinement factor must exceed 1, got {factor}"));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).ln() / factor.ln()).collect())
}
