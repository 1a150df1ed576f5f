//! Runtime verification of the provable structure: the energy ledger, norm
//! monitors, the Agmon inequality monitor, the coupling-measure accumulator,
//! the thermal mass audit, and the two-solution comparator.

use crate::error::{Result, ThermoError};
use crate::field::{BoundaryKind, Field, NormSet};
use crate::solver::{Observer, PhysParams, SimState, StepInfo};

/// One row of the energy ledger: E = kinetic + elastic + thermal L1, the
/// cumulative viscous dissipation, and the identity defect
/// residual = (E(t) + dissipation) - E(0).
#[derive(Debug, Clone, Copy)]
pub struct EnergyRow {
    pub step: usize,
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub thermal_l1: f64,
    pub dissipation_cum: f64,
    pub residual: f64,
}

impl EnergyRow {
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.thermal_l1
    }
}

/// Per-step energy audit of the basic energy identity; dissipation is
/// evaluated at the new state, consistent with the backward-Euler substeps.
#[derive(Debug, Default)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
    e0: f64,
    diss_cum: f64,
}

impl EnergyLedger {
    pub fn new() -> EnergyLedger {
        EnergyLedger::default()
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.residual.abs()))
    }

    fn row(&self, step: usize, state: &SimState) -> EnergyRow {
        let kinetic = 0.5 * state.v.norms().l2.powi(2);
        let elastic = 0.5 * state.u.norms().h1_semi.powi(2);
        let thermal_l1 = state.theta.norms().l1;
        EnergyRow {
            step,
            t: state.t,
            kinetic,
            elastic,
            thermal_l1,
            dissipation_cum: self.diss_cum,
            residual: (kinetic + elastic + thermal_l1 + self.diss_cum) - self.e0,
        }
    }
}

impl Observer for EnergyLedger {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.diss_cum = 0.0;
        self.e0 = 0.0;
        let mut row = self.row(0, state);
        self.e0 = row.total();
        row.residual = 0.0;
        self.rows.push(row);
    }

    fn on_step(&mut self, _prev: &SimState, next: &SimState, info: &StepInfo, params: &PhysParams) {
        self.diss_cum += info.dt * params.nu * next.v.norms().h1_semi.powi(2);
        let row = self.row(info.step, next);
        self.rows.push(row);
    }
}

/// Norm time series for u, v, theta plus the finite-difference observables
/// ||theta_t||, ||u_tt|| reconstructed from consecutive states.
#[derive(Debug, Clone)]
pub struct NormRow {
    pub step: usize,
    pub t: f64,
    pub u: NormSet,
    pub v: NormSet,
    pub theta: NormSet,
    pub theta_t_l2: f64,
    pub u_tt_l2: f64,
}

#[derive(Debug, Default)]
pub struct NormHistory {
    pub rows: Vec<NormRow>,
}

impl NormHistory {
    pub fn new() -> NormHistory {
        NormHistory::default()
    }
}

impl Observer for NormHistory {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.rows.push(NormRow {
            step: 0,
            t: state.t,
            u: state.u.norms(),
            v: state.v.norms(),
            theta: state.theta.norms(),
            theta_t_l2: 0.0,
            u_tt_l2: 0.0,
        });
    }

    fn on_step(&mut self, prev: &SimState, next: &SimState, info: &StepInfo, _params: &PhysParams) {
        self.rows.push(NormRow {
            step: info.step,
            t: next.t,
            u: next.u.norms(),
            v: next.v.norms(),
            theta: next.theta.norms(),
            theta_t_l2: next.theta.dist_l2(&prev.theta) / info.dt,
            u_tt_l2: next.v.dist_l2(&prev.v) / info.dt,
        });
    }
}

/// Checks Agmon's inequality on u, v (zero-trace form) and theta (general
/// form) at every state of a run; records failures and the worst slack seen.
#[derive(Debug)]
pub struct AgmonMonitor {
    pub checks: u64,
    pub failures: u64,
    pub min_slack: f64,
}

impl AgmonMonitor {
    pub fn new() -> AgmonMonitor {
        AgmonMonitor {
            checks: 0,
            failures: 0,
            min_slack: f64::INFINITY,
        }
    }

    fn check_state(&mut self, state: &SimState) {
        for f in [&state.u, &state.v, &state.theta] {
            let rep = f.agmon_check();
            self.checks += 1;
            if !rep.holds {
                self.failures += 1;
            }
            self.min_slack = self.min_slack.min(rep.slack);
        }
    }
}

impl Default for AgmonMonitor {
    fn default() -> Self {
        Self::new()
    }
}

impl Observer for AgmonMonitor {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.check_state(state);
    }

    fn on_step(&mut self, _prev: &SimState, next: &SimState, _info: &StepInfo, _p: &PhysParams) {
        self.check_state(next);
    }
}

/// Accumulates the pairings <v * theta_x, psi>_w of the coupling product
/// against a fixed family of test functions, plus the running
/// L2-in-time L1-in-space bound on the product itself.
#[derive(Debug)]
pub struct CouplingMeasure {
    pub test_names: Vec<String>,
    test_values: Vec<Vec<f64>>,
    /// pairings[j][k] = pairing of test function j at step k.
    pub pairings: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    l2t_l1x_sq: f64,
    pub l2t_l1x_bound: f64,
}

impl CouplingMeasure {
    /// Default family {1, x, sin(pi x^), centered bump}; constants, linear
    /// growth, oscillation, locality.
    pub fn with_default_tests(grid: &crate::grid::Grid) -> CouplingMeasure {
        let xs: Vec<f64> = (0..grid.n_nodes()).map(|i| grid.node(i)).collect();
        let xh: Vec<f64> = (0..grid.n_nodes()).map(|i| grid.node_hat(i)).collect();
        let bump = |s: f64| {
            let r = 2.0 * s - 1.0;
            if r.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        };
        CouplingMeasure::new(vec![
            ("one".into(), xs.iter().map(|_| 1.0).collect()),
            ("x".into(), xs.clone()),
            (
                "sin_pi_xhat".into(),
                xh.iter().map(|&s| (std::f64::consts::PI * s).sin()).collect(),
            ),
            ("bump".into(), xh.iter().map(|&s| bump(s)).collect()),
        ])
    }

    pub fn new(tests: Vec<(String, Vec<f64>)>) -> CouplingMeasure {
        assert!(tests.len() >= 2, "need at least two test functions");
        let (test_names, test_values): (Vec<_>, Vec<_>) = tests.into_iter().unzip();
        let pairings = vec![Vec::new(); test_names.len()];
        CouplingMeasure {
            test_names,
            test_values,
            pairings,
            times: Vec::new(),
            l2t_l1x_sq: 0.0,
            l2t_l1x_bound: 0.0,
        }
    }

    /// Final pairing value for test function `j`.
    pub fn last_pairing(&self, j: usize) -> f64 {
        *self.pairings[j].last().expect("no steps recorded")
    }
}

impl Observer for CouplingMeasure {
    fn on_step(&mut self, _prev: &SimState, next: &SimState, info: &StepInfo, _p: &PhysParams) {
        let grad_theta = next.theta.d1();
        let w = next.theta.grid().quad_weights();
        let product: Vec<f64> = next
            .v
            .values()
            .iter()
            .zip(grad_theta.values())
            .map(|(v, g)| v * g)
            .collect();
        for (series, psi) in self.pairings.iter_mut().zip(&self.test_values) {
            let pairing: f64 = product
                .iter()
                .zip(psi)
                .zip(w)
                .map(|((q, p), wi)| wi * q * p)
                .sum();
            series.push(pairing);
        }
        let l1: f64 = product.iter().zip(w).map(|(q, wi)| wi * q.abs()).sum();
        self.l2t_l1x_sq += info.dt * l1 * l1;
        self.l2t_l1x_bound = self.l2t_l1x_sq.sqrt();
        self.times.push(next.t);
    }
}

/// Audits the thermal mass exchange identity
/// d/dt (sum w theta) = -mu <theta, d1 v>_w:
/// per step, defect = delta(sum w theta) + dt mu <theta_old, d1 v_new>_w,
/// which is O(dt^2) for smooth solutions. Also tracks the raw mass drift,
/// which must vanish for mu = 0.
#[derive(Debug, Default)]
pub struct MassAudit {
    pub mass0: f64,
    pub max_step_defect: f64,
    pub max_mass_drift: f64,
    prev_mass: f64,
}

impl MassAudit {
    pub fn new() -> MassAudit {
        MassAudit::default()
    }
}

impl Observer for MassAudit {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.mass0 = state.theta.integral();
        self.prev_mass = self.mass0;
        self.max_step_defect = 0.0;
        self.max_mass_drift = 0.0;
    }

    fn on_step(&mut self, prev: &SimState, next: &SimState, info: &StepInfo, params: &PhysParams) {
        let mass = next.theta.integral();
        let exchange = prev.theta.inner(&next.v.d1());
        let defect = (mass - self.prev_mass) + info.dt * params.mu * exchange;
        self.max_step_defect = self.max_step_defect.max(defect.abs());
        self.max_mass_drift = self.max_mass_drift.max((mass - self.mass0).abs());
        self.prev_mass = mass;
    }
}

/// Records states at a shared output-time grid (multiples of `every`),
/// linearly interpolated in time between the bracketing accepted steps so
/// that runs with different internal step sequences stay comparable.
#[derive(Debug)]
pub struct SnapshotRecorder {
    every: f64,
    next_mark: f64,
    pub times: Vec<f64>,
    pub states: Vec<SimState>,
}

impl SnapshotRecorder {
    pub fn new(every: f64) -> SnapshotRecorder {
        assert!(every > 0.0);
        SnapshotRecorder {
            every,
            next_mark: 0.0,
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    fn lerp(prev: &SimState, next: &SimState, t: f64) -> SimState {
        let span = next.t - prev.t;
        let w = if span > 0.0 { (t - prev.t) / span } else { 1.0 };
        let mix = |a: &Field, b: &Field| {
            Field::new(
                a.grid().clone(),
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (1.0 - w) * x + w * y)
                    .collect(),
                a.bc(),
            )
        };
        SimState {
            t,
            u: mix(&prev.u, &next.u),
            v: mix(&prev.v, &next.v),
            theta: mix(&prev.theta, &next.theta),
        }
    }
}

impl Observer for SnapshotRecorder {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.times.push(state.t);
        self.states.push(state.clone());
        self.next_mark = state.t + self.every;
    }

    fn on_step(&mut self, prev: &SimState, next: &SimState, _info: &StepInfo, _p: &PhysParams) {
        while self.next_mark <= next.t + 1e-12 {
            let snap = Self::lerp(prev, next, self.next_mark);
            self.times.push(self.next_mark);
            self.states.push(snap);
            self.next_mark += self.every;
        }
    }
}

/// Difference history of two runs sampled on the same output-time grid.
#[derive(Debug, Clone)]
pub struct DiffRow {
    pub t: f64,
    pub dv_l2: f64,
    pub du_x_l2: f64,
    pub dtheta_l2: f64,
    /// Cumulative L2(0, t) norm of d1(delta theta).
    pub dtheta_x_cum: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiffHistory {
    pub rows: Vec<DiffRow>,
}

impl DiffHistory {
    pub fn sup<F: Fn(&DiffRow) -> f64>(&self, f: F) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(f(r)))
    }

    pub fn final_row(&self) -> &DiffRow {
        self.rows.last().expect("empty diff history")
    }
}

/// Pointwise-in-time difference norms of two snapshot sequences; symmetric in
/// its arguments. Errors with `GridMismatch` when grids or output times
/// disagree.
pub fn compare_runs(a: &SnapshotRecorder, b: &SnapshotRecorder) -> Result<DiffHistory> {
    if a.states.len() != b.states.len() {
        return Err(ThermoError::GridMismatch(format!(
            "snapshot counts differ: {} vs {}",
            a.states.len(),
            b.states.len()
        )));
    }
    let mut rows = Vec::with_capacity(a.states.len());
    let mut cum_sq = 0.0;
    let mut prev_t = None;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        if !sa.u.grid().same_mesh(sb.u.grid()) {
            return Err(ThermoError::GridMismatch(
                "snapshot grids differ".to_string(),
            ));
        }
        if (sa.t - sb.t).abs() > 1e-10 {
            return Err(ThermoError::GridMismatch(format!(
                "snapshot times differ: {} vs {}",
                sa.t, sb.t
            )));
        }
        let grid = sa.u.grid().clone();
        let diff = |fa: &Field, fb: &Field, bc: BoundaryKind| {
            Field::new(
                grid.clone(),
                fa.values()
                    .iter()
                    .zip(fb.values())
                    .map(|(x, y)| x - y)
                    .collect(),
                bc,
            )
        };
        let dv = diff(&sa.v, &sb.v, BoundaryKind::DirichletZero);
        let du = diff(&sa.u, &sb.u, BoundaryKind::DirichletZero);
        let dtheta = diff(&sa.theta, &sb.theta, BoundaryKind::NeumannZero);
        let dtheta_x_l2 = dtheta.norms().h1_semi;
        if let Some(pt) = prev_t {
            cum_sq += (sa.t - pt) * dtheta_x_l2 * dtheta_x_l2;
        }
        prev_t = Some(sa.t);
        rows.push(DiffRow {
            t: sa.t,
            dv_l2: dv.norms().l2,
            du_x_l2: du.norms().h1_semi,
            dtheta_l2: dtheta.norms().l2,
            dtheta_x_cum: cum_sq.sqrt(),
        });
    }
    Ok(DiffHistory { rows })
}

/// One monitored bound with its observed/allowed ratio.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub observed: f64,
    pub allowed: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks the a-priori bounds against a completed run: the conserved-energy
/// domination of sup-in-time kinetic + elastic + thermal L1, and the
/// Gronwall bound ||theta(t)||_L2 <= exp(C t) ||theta0||_L2 with
/// C = 2 mu max{sqrt(2), sqrt(1/(b-a))}.
pub fn bound_monitor(
    ledger: &EnergyLedger,
    norms: &NormHistory,
    params: &PhysParams,
    interval_len: f64,
) -> BoundReport {
    let mut checks = Vec::new();

    let e0 = ledger.e0();
    let sup_e = ledger.rows.iter().fold(0.0f64, |m, r| m.max(r.total()));
    let allowed = e0 * (1.0 + 1e-12) + 1e-14;
    checks.push(BoundCheck {
        name: "sup_t (kinetic + elastic + thermal_l1) <= E(0)".to_string(),
        observed: sup_e,
        allowed,
        ratio: if allowed > 0.0 { sup_e / allowed } else { 0.0 },
        pass: sup_e <= allowed,
    });

    let c = 2.0 * params.mu * (2.0f64.sqrt()).max((1.0 / interval_len).sqrt());
    let theta0_l2 = norms.rows.first().map(|r| r.theta.l2).unwrap_or(0.0);
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    for row in &norms.rows {
        let allowed = (c * row.t).exp() * theta0_l2 + 1e-14;
        let ratio = row.theta.l2 / allowed;
        if ratio > worst_ratio {
            worst_ratio = ratio;
        }
        if row.theta.l2 > allowed * (1.0 + 1e-12) {
            pass = false;
        }
    }
    checks.push(BoundCheck {
        name: "||theta(t)||_L2 <= exp(C t) ||theta0||_L2".to_string(),
        observed: worst_ratio,
        allowed: 1.0,
        ratio: worst_ratio,
        pass,
    });

    BoundReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryKind, Field};
    use crate::grid::Grid;
    use crate::initial::InitialData;
    use crate::solver::{run, Forcing, PhysParams};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn rest_init(grid: &Arc<Grid>, c: f64) -> InitialData {
        InitialData::new(
            Field::zeros(grid, BoundaryKind::DirichletZero),
            Field::zeros(grid, BoundaryKind::DirichletZero),
            Field::from_fn(grid, BoundaryKind::NeumannZero, |_| c),
        )
        .unwrap()
    }

    fn packet_init(grid: &Arc<Grid>) -> InitialData {
        InitialData::new(
            Field::from_fn(grid, BoundaryKind::DirichletZero, |x| {
                (PI * x).sin() * (-25.0 * (x - 0.5) * (x - 0.5)).exp()
            }),
            Field::zeros(grid, BoundaryKind::DirichletZero),
            Field::from_fn(grid, BoundaryKind::NeumannZero, |x| 1.0 + (PI * x).cos()),
        )
        .unwrap()
    }

    #[test]
    fn rest_state_energy_residual_is_zero() {
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        let init = rest_init(&g, 2.0);
        let params = PhysParams::new(1.0, 0.05, 1e-3, 0.1);
        let mut ledger = EnergyLedger::new();
        run(&init, &params, &Forcing::none(), &mut [&mut ledger]).unwrap();
        assert!(ledger.max_abs_residual() <= 1e-14, "{}", ledger.max_abs_residual());
    }

    #[test]
    fn decoupled_heat_conserves_thermal_mass() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let init = InitialData::new(
            Field::zeros(&g, BoundaryKind::DirichletZero),
            Field::zeros(&g, BoundaryKind::DirichletZero),
            Field::from_fn(&g, BoundaryKind::NeumannZero, |x| 1.0 + (PI * x).cos()),
        )
        .unwrap();
        let params = PhysParams::new(0.0, 0.0, 1e-3, 0.5);
        let mut ledger = EnergyLedger::new();
        let mut mass = MassAudit::new();
        run(&init, &params, &Forcing::none(), &mut [&mut ledger, &mut mass]).unwrap();
        // kinetic = elastic = 0 throughout, thermal_l1 constant per unit time.
        for row in &ledger.rows {
            assert_eq!(row.kinetic, 0.0);
            assert_eq!(row.elastic, 0.0);
        }
        assert!(mass.max_mass_drift <= 1e-12 * params.t_end.max(1.0), "{}", mass.max_mass_drift);
    }

    #[test]
    fn energy_residual_is_first_order_in_dt() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let init = packet_init(&g);
        let resid = |dt: f64| {
            let params = PhysParams::new(1.0, 0.01, dt, 1.0);
            let mut ledger = EnergyLedger::new();
            run(&init, &params, &Forcing::none(), &mut [&mut ledger]).unwrap();
            ledger.max_abs_residual()
        };
        let dt = 1.0 / 256.0;
        let ratio = resid(dt) / resid(dt / 2.0);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn coupling_pairings_vanish_without_motion_or_gradient() {
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        // Spatially constant temperature: d1 theta = 0 -> all pairings 0.
        let init = rest_init(&g, 2.0);
        let params = PhysParams::new(1.0, 0.01, 1e-3, 0.02);
        let mut cm = CouplingMeasure::with_default_tests(&g);
        run(&init, &params, &Forcing::none(), &mut [&mut cm]).unwrap();
        // The temperature stays constant to roundoff, so the pairings are
        // zero up to ~1e-30 noise from the tridiagonal solves.
        for series in &cm.pairings {
            assert!(series.iter().all(|&p| p.abs() <= 1e-16));
        }
        assert!(cm.l2t_l1x_bound <= 1e-16);
    }

    #[test]
    fn compare_identical_runs_gives_zero() {
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        let init = packet_init(&g);
        let params = PhysParams::new(1.0, 0.05, 1e-3, 0.05);
        let mut snap_a = SnapshotRecorder::new(0.01);
        let mut snap_b = SnapshotRecorder::new(0.01);
        run(&init, &params, &Forcing::none(), &mut [&mut snap_a]).unwrap();
        run(&init, &params, &Forcing::none(), &mut [&mut snap_b]).unwrap();
        let diff = compare_runs(&snap_a, &snap_b).unwrap();
        for row in &diff.rows {
            assert_eq!(row.dv_l2, 0.0);
            assert_eq!(row.du_x_l2, 0.0);
            assert_eq!(row.dtheta_l2, 0.0);
        }
    }

    #[test]
    fn compare_runs_is_symmetric() {
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        let init_a = packet_init(&g);
        let init_b = rest_init(&g, 1.5);
        let params = PhysParams::new(1.0, 0.05, 1e-3, 0.05);
        let mut snap_a = SnapshotRecorder::new(0.01);
        let mut snap_b = SnapshotRecorder::new(0.01);
        run(&init_a, &params, &Forcing::none(), &mut [&mut snap_a]).unwrap();
        run(&init_b, &params, &Forcing::none(), &mut [&mut snap_b]).unwrap();
        let ab = compare_runs(&snap_a, &snap_b).unwrap();
        let ba = compare_runs(&snap_b, &snap_a).unwrap();
        for (x, y) in ab.rows.iter().zip(&ba.rows) {
            assert_eq!(x.dv_l2, y.dv_l2);
            assert_eq!(x.du_x_l2, y.du_x_l2);
            assert_eq!(x.dtheta_l2, y.dtheta_l2);
            assert_eq!(x.dtheta_x_cum, y.dtheta_x_cum);
        }
    }

    #[test]
    fn compare_runs_rejects_grid_mismatch() {
        let g1 = Grid::new(0.0, 1.0, 32).unwrap();
        let g2 = Grid::new(0.0, 1.0, 64).unwrap();
        let params = PhysParams::new(0.0, 0.0, 1e-3, 0.02);
        let mut snap_a = SnapshotRecorder::new(0.01);
        let mut snap_b = SnapshotRecorder::new(0.01);
        run(&rest_init(&g1, 1.0), &params, &Forcing::none(), &mut [&mut snap_a]).unwrap();
        run(&rest_init(&g2, 1.0), &params, &Forcing::none(), &mut [&mut snap_b]).unwrap();
        assert!(matches!(
            compare_runs(&snap_a, &snap_b),
            Err(ThermoError::GridMismatch(_))
        ));
    }

    #[test]
    fn bounds_hold_on_rest_state() {
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        let init = rest_init(&g, 2.0);
        let params = PhysParams::new(1.0, 0.05, 1e-3, 0.1);
        let mut ledger = EnergyLedger::new();
        let mut norms = NormHistory::new();
        run(&init, &params, &Forcing::none(), &mut [&mut ledger, &mut norms]).unwrap();
        let report = bound_monitor(&ledger, &norms, &params, g.len_interval());
        assert!(report.all_pass(), "{:?}", report.checks);
    }

    #[test]
    fn decoupled_theta_l2_nonincreasing() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let init = InitialData::new(
            Field::zeros(&g, BoundaryKind::DirichletZero),
            Field::zeros(&g, BoundaryKind::DirichletZero),
            Field::from_fn(&g, BoundaryKind::NeumannZero, |x| 1.0 + (PI * x).cos()),
        )
        .unwrap();
        let params = PhysParams::new(0.0, 0.0, 1e-3, 0.3);
        let mut norms = NormHistory::new();
        let mut ledger = EnergyLedger::new();
        run(&init, &params, &Forcing::none(), &mut [&mut ledger, &mut norms]).unwrap();
        for pair in norms.rows.windows(2) {
            assert!(pair[1].theta.l2 <= pair[0].theta.l2 * (1.0 + 1e-13));
        }
        let report = bound_monitor(&ledger, &norms, &params, g.len_interval());
        assert!(report.all_pass());
    }

    #[test]
    fn agmon_holds_along_a_coupled_run() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let init = packet_init(&g);
        let params = PhysParams::new(1.0, 0.01, 1.0 / 256.0, 0.25);
        let mut agmon = AgmonMonitor::new();
        run(&init, &params, &Forcing::none(), &mut [&mut agmon]).unwrap();
        assert_eq!(agmon.failures, 0, "min slack {}", agmon.min_slack);
    }
}
