//! Convergence studies, the energy test and projection orders, with CSV and
//! aligned text output.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    convergence_rates, error_report, h1_error_scalar, h1_error_vector, ritz_project_darcy, ritz_project_elasticity,
    ritz_project_stokes, EnergyRecord, ErrorReport,
};
use crate::driver::{InitMode, RunConfig, Simulation};
use crate::error::{invalid, Result};
use crate::mms::{CaseKind, MmsCase};
use crate::params::PhysicalParams;
use crate::subproblems::{Discretization, State};

/// Time step of the temporal study is `TEMPORAL_DT_SCALE / n`.
pub const TEMPORAL_DT_SCALE: f64 = 0.05;
/// Cells per unit length used for index `n` of the temporal study.
pub const TEMPORAL_CELLS_PER_N: usize = 1;
pub const SPATIAL_DT: f64 = 1e-7;
pub const SPATIAL_T: f64 = 1e-4;
/// Evaluation time of the projection study.
pub const PROJECTION_T: f64 = 0.25;

pub const CSV_HEADER: &str = "n,dt,h,e_eta,e_xi,e_phi,e_u,e_p";
const FIELDS: [&str; 5] = ["eta", "xi", "phi", "u", "p"];

/// Settings shared by every run of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Coefficients and penalties; `dt` is set per run.
    pub params: PhysicalParams,
    pub parallel: bool,
    pub init: InitMode,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            parallel: true,
            init: InitMode::Interp,
        }
    }
}

/// Formats with six significant digits, in exponent form for errors.
pub fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Six significant digits in plain notation when reasonable.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return sci(x);
    }
    format!("{:.*}", (5 - mag).max(0) as usize, x)
}

/// `log(e_0 / e_1) / log(n_1 / n_0)`.
fn pair_rate(e0: f64, e1: f64, n0: usize, n1: usize) -> Result<f64> {
    Ok(convergence_rates(&[e0, e1], n1 as f64 / n0 as f64)?[0])
}

/// Error rows of a refinement sequence and the rate of each consecutive pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    /// `rates[k][f]` compares rows `k` and `k + 1` for field `f` in the order
    /// `eta, xi, phi, u, p`.
    pub rates: Vec<[f64; 5]>,
}

impl ConvergenceTable {
    pub fn new(rows: Vec<ErrorReport>) -> Result<Self> {
        let mut rates = Vec::new();
        for w in rows.windows(2) {
            let (a, b) = (w[0].errors(), w[1].errors());
            let mut r = [0.0; 5];
            for f in 0..5 {
                r[f] = pair_rate(a[f], b[f], w[0].n, w[1].n)?;
            }
            rates.push(r);
        }
        Ok(Self { rows, rates })
    }

    /// Rates of one field, `0..5` in the order `eta, xi, phi, u, p`.
    pub fn field_rates(&self, field: usize) -> Vec<f64> {
        self.rates.iter().map(|r| r[field]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            let e = r.errors().map(sci).join(",");
            writeln!(s, "{},{},{},{e}", r.n, sci(r.dt), sci(r.h)).unwrap();
        }
        if !self.rates.is_empty() {
            writeln!(s).unwrap();
            writeln!(s, "pair,rate_eta,rate_xi,rate_phi,rate_u,rate_p").unwrap();
            for (w, r) in self.rows.windows(2).zip(&self.rates) {
                writeln!(s, "{}-{},{}", w[0].n, w[1].n, r.map(sig6).join(",")).unwrap();
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write!(s, "{:>6} {:>12} {:>12}", "n", "dt", "h").unwrap();
        for f in FIELDS {
            write!(s, " {:>12} {:>7}", format!("e_{f}"), "rate").unwrap();
        }
        writeln!(s).unwrap();
        for (k, r) in self.rows.iter().enumerate() {
            write!(s, "{:>6} {:>12} {:>12}", r.n, sci(r.dt), sci(r.h)).unwrap();
            for (f, e) in r.errors().iter().enumerate() {
                let rate = if k == 0 { "-".to_string() } else { format!("{:.2}", self.rates[k - 1][f]) };
                write!(s, " {:>12} {rate:>7}", sci(*e)).unwrap();
            }
            writeln!(s).unwrap();
        }
        s
    }
}

fn check_list(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return invalid("empty list of n");
    }
    if ns.contains(&0) {
        return invalid("n must be positive");
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("n must be strictly increasing");
    }
    Ok(())
}

/// One manufactured-solution run; returns the final-time errors.
pub fn single_run(n: usize, cells: usize, dt: f64, t_final: f64, opts: &StudyOptions) -> Result<ErrorReport> {
    let mut c = RunConfig::new(cells, opts.params.with_dt(dt), t_final);
    c.parallel = opts.parallel;
    c.init = opts.init;
    let sim = Simulation::new(c)?;
    let tr = sim.run()?;
    Ok(error_report(&sim.disc, &tr.final_state, &sim.mms, n, dt))
}

/// Paired refinement: `dt = 0.05 / n` on a mesh with
/// `cells_per_n * n` cells per unit length.
pub fn temporal_study(ns: &[usize], t_final: f64, cells_per_n: usize, opts: &StudyOptions) -> Result<ConvergenceTable> {
    check_list(ns)?;
    if cells_per_n == 0 {
        return invalid("cells per n must be positive");
    }
    let rows = ns
        .iter()
        .map(|&n| single_run(n, cells_per_n * n, TEMPORAL_DT_SCALE / n as f64, t_final, opts))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceTable::new(rows)
}

/// Mesh refinement `h = 1 / n` at a fixed small time step.
pub fn spatial_study(ns: &[usize], dt: f64, t_final: f64, opts: &StudyOptions) -> Result<ConvergenceTable> {
    check_list(ns)?;
    let rows = ns
        .iter()
        .map(|&n| single_run(n, n, dt, t_final, opts))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceTable::new(rows)
}

/// Energy records of one homogeneous run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRun {
    pub n: usize,
    pub dt: f64,
    pub records: Vec<EnergyRecord>,
}

impl EnergyRun {
    /// Largest `|X_{n+1}^2 - X_n^2 + Y_{n+1}^2 + Z_{n+1}| / max(X_n^2, 1)`.
    pub fn max_relative_residual(&self) -> f64 {
        self.records.iter().map(EnergyRecord::relative_residual).fold(0.0, f64::max)
    }

    pub fn bounded(&self) -> bool {
        self.records.iter().all(EnergyRecord::bounded)
    }
}

/// Uniform random coefficients in `[-1, 1]` for every field, zero on the
/// exterior boundary.
pub fn random_state(disc: &Discretization, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = State::zeros(disc);
    for v in s.u.iter_mut().chain(&mut s.p).chain(&mut s.eta).chain(&mut s.xi).chain(&mut s.phi) {
        *v = rng.random_range(-1.0..=1.0);
    }
    for &g in &disc.u_map.constrained {
        s.u[g] = 0.0;
    }
    for &g in &disc.eta_map.constrained {
        s.eta[g] = 0.0;
        s.xi[g] = 0.0;
    }
    for &g in &disc.phi_map.constrained {
        s.phi[g] = 0.0;
    }
    s
}

/// Homogeneous runs of `steps` steps from the same random state, one per `dt`.
pub fn energy_study(n: usize, dts: &[f64], steps: usize, seed: u64, opts: &StudyOptions) -> Result<Vec<EnergyRun>> {
    if dts.is_empty() {
        return invalid("empty list of dt");
    }
    if steps == 0 {
        return invalid("steps must be positive");
    }
    dts.iter()
        .map(|&dt| {
            let mut c = RunConfig::new(n, opts.params.with_dt(dt), steps as f64 * dt);
            c.case = CaseKind::Zero;
            c.parallel = opts.parallel;
            c.record_energy = true;
            let sim = Simulation::new(c)?;
            let tr = sim.run_from(random_state(&sim.disc, seed))?;
            Ok(EnergyRun {
                n,
                dt,
                records: tr.energy,
            })
        })
        .collect()
}

pub fn energy_csv(runs: &[EnergyRun]) -> String {
    let mut s = String::from("dt,step,x2_prev,x2,y2,z,residual,relative\n");
    for run in runs {
        for r in &run.records {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                sci(run.dt),
                r.step,
                sci(r.x_prev),
                sci(r.x_sq),
                sci(r.y_sq),
                sci(r.z),
                sci(r.residual),
                sci(r.relative_residual())
            )
            .unwrap();
        }
    }
    s
}

pub fn energy_text(runs: &[EnergyRun]) -> String {
    let mut s = format!("{:>12} {:>6} {:>14} {:>14} {:>8}\n", "dt", "steps", "max residual", "final X^2", "bounded");
    for run in runs {
        let last = run.records.last().map_or(0.0, |r| r.x_sq);
        writeln!(
            s,
            "{:>12} {:>6} {:>14} {:>14} {:>8}",
            sci(run.dt),
            run.records.len(),
            sci(run.max_relative_residual()),
            sci(last),
            run.bounded()
        )
        .unwrap();
    }
    s
}

/// `H1` errors of the three Ritz projections at one mesh size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionRow {
    pub n: usize,
    pub h: f64,
    pub e_u: f64,
    pub e_eta: f64,
    pub e_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionStudy {
    pub t: f64,
    pub rows: Vec<ProjectionRow>,
    /// `[u, eta, phi]` per consecutive pair.
    pub rates: Vec<[f64; 3]>,
    /// Largest coefficient deviation when projecting functions that lie in
    /// the discrete spaces.
    pub reproduction: f64,
}

impl ProjectionStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h,e_u_h1,e_eta_h1,e_phi_h1\n");
        for r in &self.rows {
            writeln!(s, "{},{},{},{},{}", r.n, sci(r.h), sci(r.e_u), sci(r.e_eta), sci(r.e_phi)).unwrap();
        }
        if !self.rates.is_empty() {
            s.push_str("\npair,rate_u,rate_eta,rate_phi\n");
            for (w, r) in self.rows.windows(2).zip(&self.rates) {
                writeln!(s, "{}-{},{}", w[0].n, w[1].n, r.map(sig6).join(",")).unwrap();
            }
        }
        writeln!(s, "\nreproduction,{}", sci(self.reproduction)).unwrap();
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>6} {:>12} {:>12} {:>7} {:>12} {:>7} {:>12} {:>7}\n",
            "n", "h", "e_u", "rate", "e_eta", "rate", "e_phi", "rate"
        );
        for (k, r) in self.rows.iter().enumerate() {
            let rate = |f: usize| if k == 0 { "-".to_string() } else { format!("{:.2}", self.rates[k - 1][f]) };
            writeln!(
                s,
                "{:>6} {:>12} {:>12} {:>7} {:>12} {:>7} {:>12} {:>7}",
                r.n,
                sci(r.h),
                sci(r.e_u),
                rate(0),
                sci(r.e_eta),
                rate(1),
                sci(r.e_phi),
                rate(2)
            )
            .unwrap();
        }
        writeln!(s, "reproduction error {}", sci(self.reproduction)).unwrap();
        s
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Projects a quadratic velocity and displacement, a linear pressure and a
/// linear Darcy pressure, all of which the discrete spaces contain.
pub fn projection_reproduction(n: usize, params: &PhysicalParams) -> Result<f64> {
    let d = Discretization::new(n)?;
    let u = |x: f64, y: f64| [x * x - 2.0 * x * y + 0.5, 3.0 * y * y + x - 1.0];
    let gu = |x: f64, y: f64| [[2.0 * x - 2.0 * y, -2.0 * x], [1.0, 6.0 * y]];
    let p = |x: f64, y: f64| 2.0 - x + 3.0 * y;
    let phi = |x: f64, y: f64| 0.5 + x + 2.0 * y;
    let (pu, pp) = ritz_project_stokes(&d, params, u, gu, p)?;
    let pe = ritz_project_elasticity(&d, params, u, gu)?;
    let pf = ritz_project_darcy(&d, params, phi, |_, _| [1.0, 2.0])?;
    Ok(max_diff(&pu, &d.u_map.interpolate_vector(u))
        .max(max_diff(&pp, &d.p_map.interpolate_scalar(p)))
        .max(max_diff(&pe, &d.eta_map.interpolate_vector(u)))
        .max(max_diff(&pf, &d.phi_map.interpolate_scalar(phi))))
}

/// `H1` errors of the Stokes, elasticity and Darcy projections of the
/// manufactured solution at time `t`.
pub fn projection_study(ns: &[usize], t: f64, params: &PhysicalParams) -> Result<ProjectionStudy> {
    check_list(ns)?;
    params.validate()?;
    let m = MmsCase::manufactured(params);
    let mut rows = Vec::new();
    for &n in ns {
        let d = Discretization::new(n)?;
        let (pu, _) = ritz_project_stokes(
            &d,
            params,
            |x, y| m.exact_u(t, x, y),
            |x, y| m.grad_u(t, x, y),
            |x, y| m.exact_p(t, x, y),
        )?;
        let pe = ritz_project_elasticity(&d, params, |x, y| m.exact_eta(t, x, y), |x, y| m.grad_eta(t, x, y))?;
        let pf = ritz_project_darcy(&d, params, |x, y| m.exact_phi(t, x, y), |x, y| m.grad_phi(t, x, y))?;
        rows.push(ProjectionRow {
            n,
            h: 1.0 / n as f64,
            e_u: h1_error_vector(&d.fluid_mesh, &d.u_map, &pu, |x, y| m.exact_u(t, x, y), |x, y| m.grad_u(t, x, y)),
            e_eta: h1_error_vector(
                &d.poro_mesh,
                &d.eta_map,
                &pe,
                |x, y| m.exact_eta(t, x, y),
                |x, y| m.grad_eta(t, x, y),
            ),
            e_phi: h1_error_scalar(
                &d.poro_mesh,
                &d.phi_map,
                &pf,
                |x, y| m.exact_phi(t, x, y),
                |x, y| m.grad_phi(t, x, y),
            ),
        });
    }
    let mut rates = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        rates.push([
            pair_rate(a.e_u, b.e_u, a.n, b.n)?,
            pair_rate(a.e_eta, b.e_eta, a.n, b.n)?,
            pair_rate(a.e_phi, b.e_phi, a.n, b.n)?,
        ]);
    }
    Ok(ProjectionStudy {
        t,
        rows,
        rates,
        reproduction: projection_reproduction(ns[0], params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(n: usize, e: f64) -> ErrorReport {
        ErrorReport {
            n,
            dt: 0.05 / n as f64,
            h: 1.0 / n as f64,
            t: 1.0,
            e_eta: e,
            e_xi: e,
            e_phi: e,
            e_u: e,
            e_p: e,
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(sci(8.49e-2), "8.49000e-2");
        assert_eq!(sig6(0.984234567), "0.984235");
        assert_eq!(sig6(2.0), "2.00000");
        assert_eq!(sig6(-1.5), "-1.50000");
        assert_eq!(sig6(1234.5678), "1234.57");
    }

    #[test]
    fn table_csv_shape() {
        let t = ConvergenceTable::new(vec![report(8, 0.4), report(16, 0.2), report(32, 0.1), report(64, 0.05)]).unwrap();
        assert_eq!(t.rates.len(), 3);
        assert!(t.rates.iter().flatten().all(|r| (r - 1.0).abs() < 1e-14));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "8,6.25000e-3,1.25000e-1,4.00000e-1,4.00000e-1,4.00000e-1,4.00000e-1,4.00000e-1");
        assert_eq!(lines.len(), 1 + 4 + 1 + 1 + 3);
        assert_eq!(lines[8], "16-32,1.00000,1.00000,1.00000,1.00000,1.00000");
        assert!(t.to_text().lines().count() == 5);
    }

    #[test]
    fn rejects_bad_lists() {
        let o = StudyOptions::default();
        assert!(temporal_study(&[], 1.0, 1, &o).is_err());
        assert!(temporal_study(&[8, 4], 1.0, 1, &o).is_err());
        assert!(spatial_study(&[0, 4], 1e-3, 1e-2, &o).is_err());
        assert!(ConvergenceTable::new(vec![report(8, 0.4), report(16, 0.0)]).is_err());
    }

    #[test]
    fn small_studies_run() {
        let o = StudyOptions::default();
        let t = spatial_study(&[2, 4], 1e-3, 2e-3, &o).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.errors().iter().all(|e| e.is_finite() && *e > 0.0)));
        let e = energy_study(3, &[0.1, 1.0], 3, 1, &o).unwrap();
        assert!(e.iter().all(|r| r.records.len() == 3 && r.max_relative_residual() < 1e-10 && r.bounded()));
        assert!(energy_csv(&e).lines().count() == 7);
        let p = projection_study(&[2, 4], PROJECTION_T, &o.params).unwrap();
        assert!(p.reproduction < 1e-11);
        assert_eq!(p.rates.len(), 1);
    }

    #[test]
    fn random_state_is_seeded_and_homogeneous() {
        let d = Discretization::new(3).unwrap();
        let a = random_state(&d, 5);
        assert_eq!(a, random_state(&d, 5));
        assert_ne!(a, random_state(&d, 6));
        assert!(d.u_map.constrained.iter().all(|&g| a.u[g] == 0.0));
    }
}
