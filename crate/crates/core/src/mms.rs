//! Manufactured benchmark: closed-form exact fields and the matching forcing.
//!
//! All fields share the shape `w(x, y) = (-3x + cos y, y + 1)`:
//! `u = pi cos(pi t) w`, `eta = sin(pi t) w`, `xi = d/dt eta`,
//! `phi = e^t sin(pi x) cos(pi y / 2)` and `p = phi + 2 pi cos(pi t)`.
//! Gradients are returned as `g[i][j] = d_j v_i`.

use std::f64::consts::PI;

use crate::params::PhysicalParams;

/// Which data set drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// The manufactured solution above.
    Manufactured,
    /// Zero exact solution: no forcing, homogeneous boundary data.
    Zero,
}

/// Exact solution and forcing with the physical coefficients bound.
#[derive(Debug, Clone, Copy)]
pub struct MmsCase {
    pub kind: CaseKind,
    rho_f: f64,
    mu_f: f64,
    rho_p: f64,
    mu_p: f64,
    alpha: f64,
    c0: f64,
}

fn shape(x: f64, y: f64) -> [f64; 2] {
    [-3.0 * x + y.cos(), y + 1.0]
}

fn shape_grad(y: f64) -> [[f64; 2]; 2] {
    [[-3.0, -y.sin()], [0.0, 1.0]]
}

fn scale2(s: f64, v: [f64; 2]) -> [f64; 2] {
    [s * v[0], s * v[1]]
}

fn scale22(s: f64, g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [scale2(s, g[0]), scale2(s, g[1])]
}

impl MmsCase {
    pub fn new(kind: CaseKind, params: &PhysicalParams) -> Self {
        Self {
            kind,
            rho_f: params.rho_f,
            mu_f: params.mu_f,
            rho_p: params.rho_p,
            mu_p: params.mu_p,
            alpha: params.alpha,
            c0: params.c0,
        }
    }

    pub fn manufactured(params: &PhysicalParams) -> Self {
        Self::new(CaseKind::Manufactured, params)
    }

    pub fn zero() -> Self {
        Self::new(CaseKind::Zero, &PhysicalParams::default())
    }

    fn on(&self) -> f64 {
        match self.kind {
            CaseKind::Manufactured => 1.0,
            CaseKind::Zero => 0.0,
        }
    }

    pub fn exact_u(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        scale2(self.on() * PI * (PI * t).cos(), shape(x, y))
    }

    pub fn grad_u(&self, t: f64, _x: f64, y: f64) -> [[f64; 2]; 2] {
        scale22(self.on() * PI * (PI * t).cos(), shape_grad(y))
    }

    pub fn exact_p(&self, t: f64, x: f64, y: f64) -> f64 {
        self.exact_phi(t, x, y) + self.on() * 2.0 * PI * (PI * t).cos()
    }

    pub fn exact_eta(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        scale2(self.on() * (PI * t).sin(), shape(x, y))
    }

    pub fn grad_eta(&self, t: f64, _x: f64, y: f64) -> [[f64; 2]; 2] {
        scale22(self.on() * (PI * t).sin(), shape_grad(y))
    }

    /// Structure velocity, the time derivative of [`Self::exact_eta`].
    pub fn exact_xi(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        scale2(self.on() * PI * (PI * t).cos(), shape(x, y))
    }

    pub fn grad_xi(&self, t: f64, _x: f64, y: f64) -> [[f64; 2]; 2] {
        scale22(self.on() * PI * (PI * t).cos(), shape_grad(y))
    }

    pub fn exact_phi(&self, t: f64, x: f64, y: f64) -> f64 {
        self.on() * t.exp() * (PI * x).sin() * (0.5 * PI * y).cos()
    }

    pub fn grad_phi(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let e = self.on() * t.exp();
        [
            e * PI * (PI * x).cos() * (0.5 * PI * y).cos(),
            -e * 0.5 * PI * (PI * x).sin() * (0.5 * PI * y).sin(),
        ]
    }

    /// Fluid momentum forcing.
    pub fn forcing_f(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let (s, c, e) = ((PI * t).sin(), (PI * t).cos(), self.on() * t.exp());
        let on = self.on();
        [
            on * self.rho_f * PI * PI * s * (3.0 * x - y.cos())
                + PI * e * (PI * x).cos() * (0.5 * PI * y).cos()
                + on * self.mu_f * PI * c * y.cos(),
            -on * self.rho_f * PI * PI * s * (y + 1.0)
                - 0.5 * PI * e * (PI * x).sin() * (0.5 * PI * y).sin(),
        ]
    }

    /// Fluid mass source, constant in space.
    pub fn forcing_g(&self, t: f64) -> f64 {
        -self.on() * 2.0 * PI * (PI * t).cos()
    }

    /// Elastic momentum forcing.
    pub fn forcing_e(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let (s, e) = ((PI * t).sin(), self.on() * t.exp());
        let on = self.on();
        [
            on * self.rho_p * PI * PI * s * (3.0 * x - y.cos())
                + self.alpha * PI * e * (PI * x).cos() * (0.5 * PI * y).cos()
                + on * self.mu_p * s * y.cos(),
            -on * self.rho_p * PI * PI * s * (y + 1.0)
                - self.alpha * 0.5 * PI * e * (PI * x).sin() * (0.5 * PI * y).sin(),
        ]
    }

    /// Darcy mass forcing, written for `K = I`.
    pub fn forcing_d(&self, t: f64, x: f64, y: f64) -> f64 {
        let phi = self.exact_phi(t, x, y);
        self.c0 * phi - self.on() * 2.0 * self.alpha * PI * (PI * t).cos()
            + 1.25 * PI * PI * phi
    }

    /// Largest residual of each interface condition along `y = 0`, sampled
    /// at `samples` evenly spaced points, for conductivity `k` and Lame
    /// parameter `lambda_p`. This is a report: the forcing does not include
    /// interface data, so nothing forces these to vanish.
    pub fn interface_audit(
        &self,
        t: f64,
        k: [[f64; 2]; 2],
        lambda_p: f64,
        gamma: f64,
        samples: usize,
    ) -> InterfaceAudit {
        let nf = [0.0, -1.0];
        let tau = [1.0, 0.0];
        let mut out = InterfaceAudit::default();
        for i in 0..samples.max(1) {
            let x = (i as f64 + 0.5) / samples.max(1) as f64;
            let y = 0.0;
            let u = self.exact_u(t, x, y);
            let xi = self.exact_xi(t, x, y);
            let gphi = self.grad_phi(t, x, y);
            let up = [
                -(k[0][0] * gphi[0] + k[0][1] * gphi[1]),
                -(k[1][0] * gphi[0] + k[1][1] * gphi[1]),
            ];
            let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
            let sigma_f = self.fluid_stress(t, x, y);
            let sigma_p = self.poro_stress(t, x, y, lambda_p);
            let mul = |s: [[f64; 2]; 2], n: [f64; 2]| [dot(s[0], n), dot(s[1], n)];
            let sfn = mul(sigma_f, nf);
            let spn = mul(sigma_p, nf);
            let kin = dot([xi[0] + up[0], xi[1] + up[1]], nf) - dot(u, nf);
            let slip = dot(tau, sfn) + gamma * dot([u[0] - xi[0], u[1] - xi[1]], tau);
            let normal = dot(nf, sfn) + self.exact_phi(t, x, y);
            let traction = (sfn[0] - spn[0]).hypot(sfn[1] - spn[1]);
            out.kinematic = out.kinematic.max(kin.abs());
            out.slip = out.slip.max(slip.abs());
            out.normal_stress = out.normal_stress.max(normal.abs());
            out.traction = out.traction.max(traction);
        }
        out
    }

    /// Strong-form residuals of the bulk equations at a fluid point `(x, yf)`
    /// and a poroelastic point `(x, yp)`, with every derivative of the exact
    /// fields taken by fourth-order central differences. `params` supplies
    /// the coefficients the equations are checked against.
    pub fn strong_residuals(&self, params: &PhysicalParams, t: f64, x: f64, yf: f64, yp: f64) -> StrongResiduals {
        let h = 1e-3;
        let mut out = StrongResiduals::default();
        // rho_f du/dt - mu_f lap u - mu_f grad div u + grad p = F_f
        let ff = self.forcing_f(t, x, yf);
        for c in 0..2 {
            let dtu = d1(|s| self.exact_u(s, x, yf)[c], t, h);
            let lap = d2(|s| self.exact_u(t, s, yf)[c], x, h) + d2(|s| self.exact_u(t, x, s)[c], yf, h);
            let div = |xx: f64, yy: f64| {
                d1(|s| self.exact_u(t, s, yy)[0], xx, h) + d1(|s| self.exact_u(t, xx, s)[1], yy, h)
            };
            let gdiv = if c == 0 { d1(|s| div(s, yf), x, h) } else { d1(|s| div(x, s), yf, h) };
            let gp = if c == 0 {
                d1(|s| self.exact_p(t, s, yf), x, h)
            } else {
                d1(|s| self.exact_p(t, x, s), yf, h)
            };
            let r = params.rho_f * dtu - params.mu_f * (lap + gdiv) + gp - ff[c];
            out.fluid_momentum = out.fluid_momentum.max(r.abs());
        }
        let div_u = d1(|s| self.exact_u(t, s, yf)[0], x, h) + d1(|s| self.exact_u(t, x, s)[1], yf, h);
        out.fluid_mass = (div_u - self.forcing_g(t)).abs();

        // rho_p d2eta/dt2 - mu_p lap eta - (mu_p + lambda_p) grad div eta + alpha grad phi = F_e
        let fe = self.forcing_e(t, x, yp);
        for c in 0..2 {
            let dtt = d1(|s| self.exact_xi(s, x, yp)[c], t, h);
            let lap = d2(|s| self.exact_eta(t, s, yp)[c], x, h) + d2(|s| self.exact_eta(t, x, s)[c], yp, h);
            let div = |xx: f64, yy: f64| {
                d1(|s| self.exact_eta(t, s, yy)[0], xx, h) + d1(|s| self.exact_eta(t, xx, s)[1], yy, h)
            };
            let gdiv = if c == 0 { d1(|s| div(s, yp), x, h) } else { d1(|s| div(x, s), yp, h) };
            let gphi = if c == 0 {
                d1(|s| self.exact_phi(t, s, yp), x, h)
            } else {
                d1(|s| self.exact_phi(t, x, s), yp, h)
            };
            let r = params.rho_p * dtt - params.mu_p * lap - (params.mu_p + params.lambda_p) * gdiv
                + params.alpha * gphi
                - fe[c];
            out.elastic_momentum = out.elastic_momentum.max(r.abs());
        }

        // c0 dphi/dt + alpha div xi - div(K grad phi) = F_d
        let k = params.k;
        let dtphi = d1(|s| self.exact_phi(s, x, yp), t, h);
        let div_xi = d1(|s| self.exact_xi(t, s, yp)[0], x, h) + d1(|s| self.exact_xi(t, x, s)[1], yp, h);
        let flux = |xx: f64, yy: f64, i: usize| {
            let g = self.grad_phi(t, xx, yy);
            k[i][0] * g[0] + k[i][1] * g[1]
        };
        let div_flux = d1(|s| flux(s, yp, 0), x, h) + d1(|s| flux(x, s, 1), yp, h);
        out.darcy = (params.c0 * dtphi + params.alpha * div_xi - div_flux - self.forcing_d(t, x, yp)).abs();
        out
    }

    /// `2 mu_f D(u) - p I`.
    pub fn fluid_stress(&self, t: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
        let g = self.grad_u(t, x, y);
        let p = self.exact_p(t, x, y);
        let off = self.mu_f * (g[0][1] + g[1][0]);
        [
            [2.0 * self.mu_f * g[0][0] - p, off],
            [off, 2.0 * self.mu_f * g[1][1] - p],
        ]
    }

    /// `2 mu_p D(eta) + lambda_p div(eta) I - alpha phi I`.
    pub fn poro_stress(&self, t: f64, x: f64, y: f64, lambda_p: f64) -> [[f64; 2]; 2] {
        let g = self.grad_eta(t, x, y);
        let iso = lambda_p * (g[0][0] + g[1][1]) - self.alpha * self.exact_phi(t, x, y);
        let off = self.mu_p * (g[0][1] + g[1][0]);
        [
            [2.0 * self.mu_p * g[0][0] + iso, off],
            [off, 2.0 * self.mu_p * g[1][1] + iso],
        ]
    }
}

/// Maximum residuals of the four interface conditions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InterfaceAudit {
    /// `(xi + u_p) . n_f - u . n_f`
    pub kinematic: f64,
    /// `tau . sigma_f n_f + gamma (u - xi) . tau`
    pub slip: f64,
    /// `n_f . sigma_f n_f + phi`
    pub normal_stress: f64,
    /// `|sigma_f n_f - sigma_p n_f|`
    pub traction: f64,
}

// fourth-order central differences
fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Largest absolute residual of each bulk equation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StrongResiduals {
    pub fluid_momentum: f64,
    /// `div u - g_f`
    pub fluid_mass: f64,
    pub elastic_momentum: f64,
    pub darcy: f64,
}

impl StrongResiduals {
    pub fn max(&self) -> f64 {
        self.fluid_momentum.max(self.fluid_mass).max(self.elastic_momentum).max(self.darcy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case() -> MmsCase {
        MmsCase::manufactured(&PhysicalParams::default())
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn point_values() {
        let m = case();
        let u = m.exact_u(0.0, 0.0, 0.0);
        assert!(close(u[0], PI, 1e-15) && close(u[1], PI, 1e-15));
        let u = m.exact_u(0.5, 0.3, 0.9);
        assert!(u[0].abs() < 1e-15 && u[1].abs() < 1e-15);
        assert!(close(m.exact_p(0.0, 0.5, 0.0), 1.0 + 2.0 * PI, 1e-14));
        for y in [-1.0, -0.3, 0.0] {
            assert_eq!(m.exact_phi(0.7, 0.0, y), 0.0);
        }
        let e = m.exact_eta(0.5, 1.0, 0.0);
        assert!(close(e[0], -2.0, 1e-15) && close(e[1], 1.0, 1e-15));
        assert_eq!(m.exact_eta(0.0, 0.4, -0.2), [0.0, 0.0]);
        assert_eq!(m.exact_xi(0.0, 0.4, -0.2), m.exact_u(0.0, 0.4, -0.2));
        assert!(close(m.forcing_g(0.0), -2.0 * PI, 1e-15));
        assert!(close(m.forcing_d(0.0, 0.5, 0.0), 1.0 - 2.0 * PI + 1.25 * PI * PI, 1e-13));
    }

    #[test]
    fn pressure_offset_and_divergence() {
        let m = case();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (t, x, y) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            let d = m.exact_p(t, x, y) - m.exact_phi(t, x, y);
            assert!(close(d, 2.0 * PI * (PI * t).cos(), 1e-13));
            let g = m.grad_u(t, x, y);
            assert!(close(g[0][0] + g[1][1], m.forcing_g(t), 1e-13));
        }
        let g = m.grad_u(0.0, 0.3, 0.7);
        assert!(close(g[0][0] + g[1][1], -2.0 * PI, 1e-14));
    }

    #[test]
    fn xi_is_time_derivative_of_eta() {
        let m = case();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (t, x, y) = (rng.random::<f64>(), rng.random::<f64>(), -rng.random::<f64>());
            let h = 1e-6;
            let a = m.exact_eta(t + h, x, y);
            let b = m.exact_eta(t - h, x, y);
            let xi = m.exact_xi(t, x, y);
            for c in 0..2 {
                assert!(close((a[c] - b[c]) / (2.0 * h), xi[c], 1e-6));
            }
        }
    }

    #[test]
    fn hand_gradients_match_differences() {
        let m = case();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-3;
        for _ in 0..20 {
            let (t, x, y) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() - 0.5);
            let gu = m.grad_u(t, x, y);
            let ge = m.grad_eta(t, x, y);
            let gx = m.grad_xi(t, x, y);
            for c in 0..2 {
                assert!(close(d1(|s| m.exact_u(t, s, y)[c], x, h), gu[c][0], 1e-9));
                assert!(close(d1(|s| m.exact_u(t, x, s)[c], y, h), gu[c][1], 1e-9));
                assert!(close(d1(|s| m.exact_eta(t, s, y)[c], x, h), ge[c][0], 1e-9));
                assert!(close(d1(|s| m.exact_eta(t, x, s)[c], y, h), ge[c][1], 1e-9));
                assert!(close(d1(|s| m.exact_xi(t, x, s)[c], y, h), gx[c][1], 1e-9));
            }
            let gp = m.grad_phi(t, x, y);
            assert!(close(d1(|s| m.exact_phi(t, s, y), x, h), gp[0], 1e-9));
            assert!(close(d1(|s| m.exact_phi(t, x, s), y, h), gp[1], 1e-9));
        }
    }

    #[test]
    fn strong_form_residuals() {
        let p = PhysicalParams {
            rho_f: 1.3,
            mu_f: 0.7,
            rho_p: 1.1,
            mu_p: 0.9,
            lambda_p: 2.0,
            alpha: 0.8,
            c0: 0.6,
            ..PhysicalParams::default()
        };
        for params in [PhysicalParams::default(), p] {
            let m = MmsCase::manufactured(&params);
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            for _ in 0..20 {
                let (t, x, yf, yp) = (rng.random(), rng.random(), rng.random(), -rng.random::<f64>());
                let r = m.strong_residuals(&params, t, x, yf, yp);
                assert!(r.max() < 1e-8, "{r:?}");
            }
        }
        // a wrong coefficient is detected
        let m = MmsCase::manufactured(&p);
        let r = m.strong_residuals(&PhysicalParams { mu_f: 1.0, ..p }, 0.3, 0.4, 0.5, -0.5);
        assert!(r.fluid_momentum > 1e-3);
    }

    #[test]
    fn interface_audit_with_unit_coefficients() {
        let m = case();
        for t in [0.0, 0.3, 1.0] {
            let a = m.interface_audit(t, [[1.0, 0.0], [0.0, 1.0]], 1.0, 1.0, 16);
            assert!(a.kinematic < 1e-13 && a.slip < 1e-13);
            assert!(a.normal_stress < 1e-13 && a.traction < 1e-13, "{a:?}");
        }
    }

    #[test]
    fn zero_case_is_zero() {
        let z = MmsCase::zero();
        assert_eq!(z.exact_u(0.3, 0.1, 0.2), [0.0, 0.0]);
        assert_eq!(z.exact_p(0.3, 0.1, 0.2), 0.0);
        assert_eq!(z.exact_xi(0.3, 0.1, -0.2), [0.0, 0.0]);
        assert_eq!(z.forcing_f(0.3, 0.1, 0.2), [0.0, 0.0]);
        assert_eq!(z.forcing_e(0.3, 0.1, -0.2), [0.0, 0.0]);
        assert_eq!(z.forcing_d(0.3, 0.1, -0.2), 0.0);
        assert_eq!(z.forcing_g(0.3), 0.0);
    }
}
