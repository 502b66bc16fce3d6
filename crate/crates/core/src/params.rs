use crate::error::{invalid, Result};

/// Physical coefficients, interface penalties and the time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub rho_f: f64,
    pub mu_f: f64,
    pub rho_p: f64,
    pub mu_p: f64,
    pub lambda_p: f64,
    /// Biot-Willis coefficient.
    pub alpha: f64,
    /// Storage coefficient.
    pub c0: f64,
    /// Hydraulic conductivity tensor, symmetric positive definite.
    pub k: [[f64; 2]; 2],
    /// Slip penalty.
    pub gamma: f64,
    /// Normal penalty.
    pub l: f64,
    pub dt: f64,
}

impl Default for PhysicalParams {
    /// Every coefficient 1, `K = I`, `dt = 0.01`.
    fn default() -> Self {
        Self {
            rho_f: 1.0,
            mu_f: 1.0,
            rho_p: 1.0,
            mu_p: 1.0,
            lambda_p: 1.0,
            alpha: 1.0,
            c0: 1.0,
            k: [[1.0, 0.0], [0.0, 1.0]],
            gamma: 1.0,
            l: 1.0,
            dt: 0.01,
        }
    }
}

impl PhysicalParams {
    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_penalties(self, gamma: f64, l: f64) -> Self {
        Self { gamma, l, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("rho_f", self.rho_f),
            ("mu_f", self.mu_f),
            ("rho_p", self.rho_p),
            ("mu_p", self.mu_p),
            ("lambda_p", self.lambda_p),
            ("alpha", self.alpha),
            ("c0", self.c0),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("L", self.l), ("dt", self.dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        crate::fem::assembly::check_spd(self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PhysicalParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let p = PhysicalParams::default();
        assert!(p.with_dt(0.0).validate().is_err());
        assert!(p.with_penalties(0.0, 1.0).validate().is_err());
        assert!(p.with_penalties(1.0, -1.0).validate().is_err());
        assert!(PhysicalParams { rho_f: -1.0, ..p }.validate().is_err());
        assert!(PhysicalParams { mu_p: f64::NAN, ..p }.validate().is_err());
        assert!(PhysicalParams { k: [[1.0, 2.0], [2.0, 1.0]], ..p }.validate().is_err());
        assert!(PhysicalParams { c0: 0.0, ..p }.validate().is_ok());
    }
}
