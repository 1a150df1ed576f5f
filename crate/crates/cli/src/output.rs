//! Deterministic CSV emission.
//!
//! Numbers are printed with 17 significant digits so files round-trip
//! doubles exactly and regression comparisons can be byte-exact. Files are
//! written to a temporary sibling and renamed on completion; a partial file
//! never carries a result name.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use thermo1d::diagnostics::{EnergyRow, NormRow};
use thermo1d::solver::{Observer, PhysParams, SimState, StepInfo};

/// 17 significant digits: one before the point, 16 after.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `content` to `dir/name` atomically.
pub fn write_file(dir: &Path, name: &str, content: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".tmp-{name}"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

pub fn energy_csv(rows: &[&EnergyRow]) -> String {
    let mut s = String::from("step,t,kinetic,elastic,thermal_l1,dissipation_cum,residual\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.step,
            fmt(r.t),
            fmt(r.kinetic),
            fmt(r.elastic),
            fmt(r.thermal_l1),
            fmt(r.dissipation_cum),
            fmt(r.residual)
        ));
    }
    s
}

pub fn norms_csv(rows: &[&NormRow]) -> String {
    let mut s = String::from(
        "step,t,u_l2,u_linf,u_h1,v_l2,v_linf,theta_l1,theta_l2,theta_linf,theta_t_l2,u_tt_l2\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.step,
            fmt(r.t),
            fmt(r.u.l2),
            fmt(r.u.linf),
            fmt(r.u.h1_semi),
            fmt(r.v.l2),
            fmt(r.v.linf),
            fmt(r.theta.l1),
            fmt(r.theta.l2),
            fmt(r.theta.linf),
            fmt(r.theta_t_l2),
            fmt(r.u_tt_l2)
        ));
    }
    s
}

pub fn fields_csv(state: &SimState) -> String {
    let grid = state.u.grid();
    let mut s = String::from("x,u,v,theta\n");
    for i in 0..grid.n_nodes() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt(grid.node(i)),
            fmt(state.u.values()[i]),
            fmt(state.v.values()[i]),
            fmt(state.theta.values()[i])
        ));
    }
    s
}

/// Keeps the full state at every output-stride crossing (plus the initial
/// and final states) so `fields_<step>.csv` files can be emitted after the
/// run; also tracks the pointwise temperature minimum for the run summary.
pub struct StrideSampler {
    every: f64,
    kept: Vec<(usize, SimState)>,
    last: Option<(usize, SimState)>,
    pub min_theta: f64,
}

impl StrideSampler {
    pub fn new(every: f64) -> StrideSampler {
        StrideSampler {
            every,
            kept: Vec::new(),
            last: None,
            min_theta: f64::INFINITY,
        }
    }

    /// The sampled (step, state) sequence including the final state.
    pub fn samples(&self) -> Vec<(usize, &SimState)> {
        let mut out: Vec<(usize, &SimState)> =
            self.kept.iter().map(|(s, st)| (*s, st)).collect();
        if let Some((step, state)) = &self.last {
            if out.last().map(|(s, _)| *s) != Some(*step) {
                out.push((*step, state));
            }
        }
        out
    }

    /// Step indices of the samples, for selecting matching diagnostic rows.
    pub fn sampled_steps(&self) -> Vec<usize> {
        self.samples().iter().map(|(s, _)| *s).collect()
    }
}

impl Observer for StrideSampler {
    fn on_start(&mut self, state: &SimState, _params: &PhysParams) {
        self.min_theta = self.min_theta.min(state.theta.min());
        self.kept.push((0, state.clone()));
    }

    fn on_step(&mut self, prev: &SimState, next: &SimState, info: &StepInfo, _params: &PhysParams) {
        self.min_theta = self.min_theta.min(next.theta.min());
        if (prev.t / self.every).floor() < (next.t / self.every).floor() {
            self.kept.push((info.step, next.clone()));
        }
        self.last = Some((info.step, next.clone()));
    }
}
