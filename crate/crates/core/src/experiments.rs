//! Orchestrated studies: the standard verification suite, the vanishing
//! viscosity sweep, manufactured-solution convergence verification, and the
//! perturbation-stability experiment.
//!
//! Branches of a sweep or stability study are independent runs and execute
//! in parallel; reports are merged in parameter order, so output is
//! deterministic regardless of scheduling. The `THERMO1D_THREADS`
//! environment variable caps branch parallelism.

use std::sync::Arc;

use crate::diagnostics::{
    bound_monitor, compare_runs, AgmonMonitor, BoundReport, CouplingMeasure, EnergyLedger,
    MassAudit, NormHistory, SnapshotRecorder,
};
use crate::error::{Result, ThermoError};
use crate::field::{BoundaryKind, Field};
use crate::grid::Grid;
use crate::initial::{make_profile, mollify_family, DataRole, InitialData, ProfileKind};
use crate::solver::{run, Forcing, PhysParams, RunResult};

/// Shared output-time spacing for cross-run comparisons.
pub const OUTPUT_EVERY: f64 = 0.01;

fn branch_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("THERMO1D_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

// ---------------------------------------------------------------------------
// Standard suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: String,
    pub mu: f64,
    pub nu: f64,
}

/// The twelve (mu, nu) combinations exercised by the verification suite.
pub fn standard_suite_cases() -> Vec<SuiteCase> {
    let mut cases = Vec::new();
    for &mu in &[0.0, 0.5, 1.0, 2.0] {
        for &nu in &[0.0, 0.01, 0.1] {
            cases.push(SuiteCase {
                name: format!("mu{mu}_nu{nu}"),
                mu,
                nu,
            });
        }
    }
    cases
}

/// Smooth packet data on (0, 1): localized displacement, zero velocity,
/// nonnegative oscillatory temperature.
pub fn packet_data(grid: &Arc<Grid>) -> InitialData {
    let u0 = make_profile(&ProfileKind::SinePacket, DataRole::Displacement, grid).unwrap();
    let u1 = Field::zeros(grid, BoundaryKind::DirichletZero);
    let theta0 = make_profile(&ProfileKind::SinePacket, DataRole::Temperature, grid).unwrap();
    InitialData::new(u0, u1, theta0).unwrap()
}

/// Everything the acceptance checks need from one suite run.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub case: SuiteCase,
    pub min_theta: f64,
    pub total_clamps: u64,
    pub agmon_failures: u64,
    pub agmon_checks: u64,
    pub bounds: BoundReport,
    pub max_picard_iters: u32,
    pub max_energy_residual: f64,
    pub mass_drift: f64,
    pub result: RunResult,
}

struct MinThetaObserver(f64);
impl crate::solver::Observer for MinThetaObserver {
    fn on_step(
        &mut self,
        _prev: &crate::solver::SimState,
        next: &crate::solver::SimState,
        _info: &crate::solver::StepInfo,
        _params: &PhysParams,
    ) {
        self.0 = self.0.min(next.theta.min());
    }
}

/// Runs one (mu, nu) case of the standard suite at N = 64, dt = h/4.
pub fn run_suite_case(case: &SuiteCase, t_end: f64) -> Result<SuiteOutcome> {
    let grid = Grid::new(0.0, 1.0, 64)?;
    let init = packet_data(&grid);
    let dt = grid.h() / 4.0;
    let params = PhysParams::new(case.mu, case.nu, dt, t_end);

    let mut ledger = EnergyLedger::new();
    let mut norms = NormHistory::new();
    let mut agmon = AgmonMonitor::new();
    let mut mass = MassAudit::new();
    let mut min_theta = MinThetaObserver(f64::INFINITY);
    let result = run(
        &init,
        &params,
        &Forcing::none(),
        &mut [
            &mut ledger,
            &mut norms,
            &mut agmon,
            &mut mass,
            &mut min_theta,
        ],
    )?;
    let bounds = bound_monitor(&ledger, &norms, &params, grid.len_interval());
    Ok(SuiteOutcome {
        case: case.clone(),
        min_theta: min_theta.0,
        total_clamps: result.total_clamps,
        agmon_failures: agmon.failures,
        agmon_checks: agmon.checks,
        bounds,
        max_picard_iters: result.max_picard_iters,
        max_energy_residual: ledger.max_abs_residual(),
        mass_drift: mass.max_mass_drift,
        result,
    })
}

/// Runs the full standard suite in parallel branches.
pub fn run_standard_suite(t_end: f64) -> Result<Vec<SuiteOutcome>> {
    use rayon::prelude::*;
    let cases = standard_suite_cases();
    branch_pool().install(|| {
        cases
            .par_iter()
            .map(|c| run_suite_case(c, t_end))
            .collect::<Result<Vec<_>>>()
    })
}

// ---------------------------------------------------------------------------
// Viscosity sweep
// ---------------------------------------------------------------------------

/// Cauchy distance between two consecutive viscosity branches.
#[derive(Debug, Clone, Copy)]
pub struct SweepPair {
    pub nu_hi: f64,
    pub nu_lo: f64,
    /// Sup over shared output times of the L2 distance.
    pub dist_u: f64,
    pub dist_v: f64,
    pub dist_theta: f64,
}

#[derive(Debug)]
pub struct SweepBranch {
    pub nu: f64,
    /// Mollification index used for the data (when mollify was requested).
    pub mollify_n: Option<u64>,
    /// Coupling pairings <v theta_x, psi> at t_end for psi = 1 and psi = x.
    pub pairing_one: f64,
    pub pairing_x: f64,
    pub l2t_l1x_bound: f64,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub nu_list: Vec<f64>,
    pub branches: Vec<SweepBranch>,
    pub pairs: Vec<SweepPair>,
}

/// Runs the system once per viscosity in `nu_list` (strictly decreasing,
/// positive) and reports pairwise Cauchy distances on the shared output-time
/// grid. With `mollify` set, each branch with nu = 1/n uses the regularized
/// data family at the matching n. Failed branches are marked in the report
/// without aborting the others.
pub fn viscosity_sweep(
    init: &InitialData,
    base_params: &PhysParams,
    nu_list: &[f64],
    mollify: bool,
) -> Result<SweepReport> {
    use rayon::prelude::*;
    if nu_list.is_empty() {
        return Err(ThermoError::InvalidGrid("empty nu list".to_string()));
    }
    for pair in nu_list.windows(2) {
        if !(pair[0] > pair[1]) {
            return Err(ThermoError::InvalidGrid(format!(
                "nu list must be strictly decreasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if *nu_list.last().unwrap() <= 0.0 {
        return Err(ThermoError::InvalidGrid(
            "nu list entries must be positive".to_string(),
        ));
    }

    let branch = |&nu: &f64| -> (SweepBranch, Option<SnapshotRecorder>) {
        let n = (1.0 / nu).round().max(1.0) as u64;
        let data = if mollify {
            match mollify_family(init, n) {
                Ok(fam) => InitialData::new(init.u0.clone(), fam.u1_n, fam.theta0_n)
                    .expect("mollified data stays valid"),
                Err(e) => {
                    return (
                        SweepBranch {
                            nu,
                            mollify_n: Some(n),
                            pairing_one: f64::NAN,
                            pairing_x: f64::NAN,
                            l2t_l1x_bound: f64::NAN,
                            error: Some(e.to_string()),
                        },
                        None,
                    )
                }
            }
        } else {
            init.clone()
        };
        let mut params = base_params.clone();
        params.nu = nu;
        let mut snaps = SnapshotRecorder::new(OUTPUT_EVERY);
        let grid = data.grid().clone();
        let mut coupling = CouplingMeasure::new(vec![
            (
                "one".to_string(),
                vec![1.0; grid.n_nodes()],
            ),
            (
                "x".to_string(),
                (0..grid.n_nodes()).map(|i| grid.node(i)).collect(),
            ),
        ]);
        match run(
            &data,
            &params,
            &Forcing::none(),
            &mut [&mut snaps, &mut coupling],
        ) {
            Ok(_) => (
                SweepBranch {
                    nu,
                    mollify_n: mollify.then_some(n),
                    pairing_one: coupling.last_pairing(0),
                    pairing_x: coupling.last_pairing(1),
                    l2t_l1x_bound: coupling.l2t_l1x_bound,
                    error: None,
                },
                Some(snaps),
            ),
            Err(e) => (
                SweepBranch {
                    nu,
                    mollify_n: mollify.then_some(n),
                    pairing_one: f64::NAN,
                    pairing_x: f64::NAN,
                    l2t_l1x_bound: f64::NAN,
                    error: Some(e.to_string()),
                },
                None,
            ),
        }
    };

    let outcomes: Vec<(SweepBranch, Option<SnapshotRecorder>)> =
        branch_pool().install(|| nu_list.par_iter().map(branch).collect());

    let mut pairs = Vec::new();
    for w in outcomes.windows(2) {
        if let (Some(hi), Some(lo)) = (&w[0].1, &w[1].1) {
            let count = hi.states.len().min(lo.states.len());
            let mut du = 0.0f64;
            let mut dv = 0.0f64;
            let mut dth = 0.0f64;
            for k in 0..count {
                du = du.max(hi.states[k].u.dist_l2(&lo.states[k].u));
                dv = dv.max(hi.states[k].v.dist_l2(&lo.states[k].v));
                dth = dth.max(hi.states[k].theta.dist_l2(&lo.states[k].theta));
            }
            pairs.push(SweepPair {
                nu_hi: w[0].0.nu,
                nu_lo: w[1].0.nu,
                dist_u: du,
                dist_v: dv,
                dist_theta: dth,
            });
        }
    }

    Ok(SweepReport {
        nu_list: nu_list.to_vec(),
        branches: outcomes.into_iter().map(|(b, _)| b).collect(),
        pairs,
    })
}

// ---------------------------------------------------------------------------
// Method of manufactured solutions
// ---------------------------------------------------------------------------

/// An analytic solution pair together with the forcings that make it solve
/// the coupled system exactly.
pub struct ManufacturedSolution {
    pub u: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub u_t: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub theta: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub theta_x: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub f_u: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub f_theta: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

/// The fixed verification pair on (a, b) with kappa = pi/(b - a):
/// u* = sin(kappa (x-a)) sin(t), theta* = 2 + cos(kappa (x-a)) cos(t).
/// Forcings derived by substitution into the regularized system:
///   f_u     = (kappa^2 - 1) sin sin(t) + (nu kappa^2 - mu kappa) sin cos(t)
///   f_theta = -cos sin(t) + kappa^2 cos cos(t)
///             + mu kappa cos cos(t) (2 + cos cos(t))
pub fn standard_manufactured(mu: f64, nu: f64, a: f64, b: f64) -> ManufacturedSolution {
    let k = std::f64::consts::PI / (b - a);
    ManufacturedSolution {
        u: Arc::new(move |t, x| (k * (x - a)).sin() * t.sin()),
        u_t: Arc::new(move |t, x| (k * (x - a)).sin() * t.cos()),
        theta: Arc::new(move |t, x| 2.0 + (k * (x - a)).cos() * t.cos()),
        theta_x: Arc::new(move |t, x| -k * (k * (x - a)).sin() * t.cos()),
        f_u: Arc::new(move |t, x| {
            let s = (k * (x - a)).sin();
            (k * k - 1.0) * s * t.sin() + (nu * k * k - mu * k) * s * t.cos()
        }),
        f_theta: Arc::new(move |t, x| {
            let c = (k * (x - a)).cos();
            -c * t.sin() + k * k * c * t.cos() + mu * k * c * t.cos() * (2.0 + c * t.cos())
        }),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvRow {
    pub n_cells: usize,
    pub dt: f64,
    pub error_u_l2: f64,
    pub error_theta_l2: f64,
    /// log2 error ratio against the previous row; NaN on the first row.
    pub observed_order_u: f64,
    pub observed_order_theta: f64,
}

impl ConvRow {
    pub fn observed_order(&self) -> f64 {
        self.observed_order_u.min(self.observed_order_theta)
    }
}

#[derive(Debug, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvRow>,
}

fn mms_initial_data(ms: &ManufacturedSolution, grid: &Arc<Grid>) -> Result<InitialData> {
    let (a, b) = (grid.a(), grid.b());
    for &x in &[a, b] {
        if (ms.u)(0.0, x).abs() > 1e-12 {
            return Err(ThermoError::IncompatibleExactSolution(format!(
                "u(0, {x}) = {} violates Dirichlet data",
                (ms.u)(0.0, x)
            )));
        }
        if (ms.u_t)(0.0, x).abs() > 1e-12 {
            return Err(ThermoError::IncompatibleExactSolution(format!(
                "u_t(0, {x}) = {} violates Dirichlet data",
                (ms.u_t)(0.0, x)
            )));
        }
        if (ms.theta_x)(0.0, x).abs() > 1e-12 {
            return Err(ThermoError::IncompatibleExactSolution(format!(
                "theta_x(0, {x}) = {} violates Neumann data",
                (ms.theta_x)(0.0, x)
            )));
        }
    }
    let u0 = Field::from_fn(grid, BoundaryKind::DirichletZero, |x| (ms.u)(0.0, x));
    let u1 = Field::from_fn(grid, BoundaryKind::DirichletZero, |x| (ms.u_t)(0.0, x));
    let theta0 = Field::from_fn(grid, BoundaryKind::NeumannZero, |x| (ms.theta)(0.0, x));
    if theta0.min() <= 0.0 {
        return Err(ThermoError::IncompatibleExactSolution(format!(
            "exact temperature must stay positive, min theta(0) = {}",
            theta0.min()
        )));
    }
    InitialData::new(u0, u1, theta0)
}

fn mms_run_errors(
    ms: &ManufacturedSolution,
    mu: f64,
    nu: f64,
    grid: &Arc<Grid>,
    dt: f64,
    t_end: f64,
) -> Result<(f64, f64)> {
    let init = mms_initial_data(ms, grid)?;
    let mut params = PhysParams::new(mu, nu, dt, t_end);
    params.picard_tol = 1e-12;
    let f_u = ms.f_u.clone();
    let f_theta = ms.f_theta.clone();
    let forcing = Forcing::new(move |t, x| f_u(t, x), move |t, x| f_theta(t, x));
    let result = run(&init, &params, &forcing, &mut [])?;
    let tf = result.final_state.t;
    let exact_u = Field::from_fn(grid, BoundaryKind::DirichletZero, |x| (ms.u)(tf, x));
    let exact_theta = Field::from_fn(grid, BoundaryKind::NeumannZero, |x| (ms.theta)(tf, x));
    Ok((
        result.final_state.u.dist_l2(&exact_u),
        result.final_state.theta.dist_l2(&exact_theta),
    ))
}

/// Spatial refinement study: dt proportional to h^2, so the first-order
/// temporal error refines at the same second-order-in-h rate as the stencils.
pub fn mms_verify_spatial(
    ms: &ManufacturedSolution,
    mu: f64,
    nu: f64,
    a: f64,
    b: f64,
    n_list: &[usize],
    t_end: f64,
) -> Result<ConvergenceTable> {
    let mut table = ConvergenceTable::default();
    let mut prev: Option<ConvRow> = None;
    for &n in n_list {
        let grid = Grid::new(a, b, n)?;
        let dt = grid.h() * grid.h();
        let (eu, et) = mms_run_errors(ms, mu, nu, &grid, dt, t_end)?;
        let (ou, ot) = match &prev {
            Some(p) => ((p.error_u_l2 / eu).log2(), (p.error_theta_l2 / et).log2()),
            None => (f64::NAN, f64::NAN),
        };
        let row = ConvRow {
            n_cells: n,
            dt,
            error_u_l2: eu,
            error_theta_l2: et,
            observed_order_u: ou,
            observed_order_theta: ot,
        };
        table.rows.push(row);
        prev = Some(row);
    }
    Ok(table)
}

/// Temporal refinement study at one fine fixed grid.
pub fn mms_verify_temporal(
    ms: &ManufacturedSolution,
    mu: f64,
    nu: f64,
    a: f64,
    b: f64,
    n_cells: usize,
    dt_list: &[f64],
    t_end: f64,
) -> Result<ConvergenceTable> {
    let grid = Grid::new(a, b, n_cells)?;
    let mut table = ConvergenceTable::default();
    let mut prev: Option<ConvRow> = None;
    for &dt in dt_list {
        let (eu, et) = mms_run_errors(ms, mu, nu, &grid, dt, t_end)?;
        let order = |p: f64, e: f64, pdt: f64| (p / e).ln() / (pdt / dt).ln();
        let (ou, ot) = match &prev {
            Some(p) => (
                order(p.error_u_l2, eu, p.dt),
                order(p.error_theta_l2, et, p.dt),
            ),
            None => (f64::NAN, f64::NAN),
        };
        let row = ConvRow {
            n_cells,
            dt,
            error_u_l2: eu,
            error_theta_l2: et,
            observed_order_u: ou,
            observed_order_theta: ot,
        };
        table.rows.push(row);
        prev = Some(row);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Stability experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub delta: f64,
    pub final_dtheta_l2: f64,
    pub final_dv_l2: f64,
    pub sup_dv_l2: f64,
    /// Largest observed ratio ||dv(t)|| / ||d1 dtheta||_{L2(0,t)}.
    pub response_constant: f64,
}

#[derive(Debug)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Least-squares slope of log(final ||dtheta||) against log(delta).
    pub slope: f64,
}

/// Runs the base data and a family of theta0 perturbations delta*cos(pi x^),
/// compares each against the base, and fits the perturbation-response slope.
pub fn stability_experiment(
    init: &InitialData,
    perturbation_sizes: &[f64],
    params: &PhysParams,
) -> Result<StabilityReport> {
    use rayon::prelude::*;
    let grid = init.grid().clone();

    let run_snapshots = |data: &InitialData| -> Result<SnapshotRecorder> {
        let mut snaps = SnapshotRecorder::new(OUTPUT_EVERY);
        run(data, params, &Forcing::none(), &mut [&mut snaps])?;
        Ok(snaps)
    };
    let base = run_snapshots(init)?;

    let perturbed = |delta: f64| -> Result<StabilityRow> {
        let theta0 = Field::new(
            grid.clone(),
            init.theta0
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| v + delta * (std::f64::consts::PI * grid.node_hat(i)).cos())
                .collect(),
            BoundaryKind::NeumannZero,
        );
        let data = InitialData::new(init.u0.clone(), init.u1.clone(), theta0)?;
        let snaps = run_snapshots(&data)?;
        let diff = compare_runs(&base, &snaps)?;
        let mut k = 0.0f64;
        for row in &diff.rows {
            if row.dtheta_x_cum > 1e-300 {
                k = k.max(row.dv_l2 / row.dtheta_x_cum);
            }
        }
        let last = diff.final_row();
        Ok(StabilityRow {
            delta,
            final_dtheta_l2: last.dtheta_l2,
            final_dv_l2: last.dv_l2,
            sup_dv_l2: diff.sup(|r| r.dv_l2),
            response_constant: k,
        })
    };

    let rows: Vec<StabilityRow> = branch_pool().install(|| {
        perturbation_sizes
            .par_iter()
            .map(|&d| perturbed(d))
            .collect::<Result<Vec<_>>>()
    })?;

    // Least squares in log-log space over the nonzero deltas.
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.delta > 0.0 && r.final_dtheta_l2 > 0.0)
        .map(|r| (r.delta.ln(), r.final_dtheta_l2.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };

    Ok(StabilityReport { rows, slope })
}
