//! Min-max delay allocation by alternating block minimization.
//!
//! Each outer iteration runs, in order, the upload block (time and energy
//! per device), the extraction block (β per device), and the rate block
//! (local clocks from the energy budget, then the server split that
//! equalizes every device's delay). The objective after the rate block is
//! appended to the trace.

mod extraction;
mod rates;
mod residuals;
mod transmit;

pub use extraction::optimal_beta;
pub use rates::{optimal_local_rate, remote_rate_bisection};
pub use residuals::{log_domain_residuals, ConstraintResiduals, DeviceResiduals};
pub use transmit::transmit_bisection;

pub(crate) use extraction::device_delay;
pub(crate) use residuals::residuals_with;

use crate::model::{
    deliverable_bits, delay_with, validate_inputs, Allocation, DelayBreakdown, DeviceAllocation,
    ModelError, SemanticParams, SystemConfig, TerminalDevice,
};
use transmit::upload_budget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FeasibilityCause {
    #[error("extraction leaves no energy for the upload")]
    ExtractionEnergyExceedsBudget,
    #[error("the channel cannot carry the payload within the energy budget")]
    RateCapTooLow,
    #[error("the inputs admit no consistent allocation")]
    InvalidScenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("device {device_index}: {cause}")]
pub struct FeasibilityError {
    pub device_index: usize,
    pub cause: FeasibilityCause,
}

impl FeasibilityCause {
    pub(crate) fn at(self, device_index: usize) -> FeasibilityError {
        FeasibilityError {
            device_index,
            cause: self,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error(transparent)]
    Infeasible(#[from] FeasibilityError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub allocation: Allocation,
    /// Epigraph value after initialization and after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Delay-constraint slack `t − T_n` per device at exit.
    pub tightness_residuals: Vec<f64>,
    pub delays: Vec<DelayBreakdown>,
}

impl SolverReport {
    pub fn objective(&self) -> f64 {
        self.allocation.t_epigraph
    }

    pub fn max_delay(&self) -> f64 {
        self.delays.iter().map(|d| d.total).fold(0.0, f64::max)
    }
}

/// Which parts of the model a run optimizes and charges for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Run the extraction block; otherwise β stays at 1.
    pub optimize_beta: bool,
    /// Charge the extraction workload `a·A/β^k`; otherwise it is zero.
    pub extraction_cost: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            optimize_beta: true,
            extraction_cost: true,
        }
    }
}

/// Solves the full semantic-aware problem.
pub fn solve(
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
    initial: Option<&Allocation>,
) -> Result<SolverReport, SolveError> {
    solve_with(tds, cfg, initial, SolveOptions::default())
}

pub fn solve_with(
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
    initial: Option<&Allocation>,
    options: SolveOptions,
) -> Result<SolverReport, SolveError> {
    validate_inputs(tds, cfg)?;
    let sems: Vec<SemanticParams> = tds
        .iter()
        .map(|td| {
            let s = td.semantics(cfg);
            if options.extraction_cost {
                s
            } else {
                s.without_extraction()
            }
        })
        .collect();
    let mut state = State {
        tds,
        sems: &sems,
        cfg,
        options,
        rows: Vec::new(),
        t: 0.0,
    };
    state.initialize(initial)?;

    let mut trace = vec![state.t];
    let mut converged = false;
    for _ in 0..cfg.max_outer_iters {
        state.upload_block()?;
        if options.optimize_beta {
            state.extraction_block()?;
        }
        state.rate_block()?;
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(state.t);
        if state.t == 0.0 || (state.t - previous).abs() <= cfg.eps_outer * state.t.abs() {
            converged = true;
            break;
        }
    }
    Ok(state.report(trace, converged)?)
}

struct State<'a> {
    tds: &'a [TerminalDevice],
    sems: &'a [SemanticParams],
    cfg: &'a SystemConfig,
    options: SolveOptions,
    rows: Vec<DeviceAllocation>,
    t: f64,
}

impl State<'_> {
    fn initialize(&mut self, initial: Option<&Allocation>) -> Result<(), SolveError> {
        self.rows = match initial {
            Some(alloc) => {
                if alloc.devices.len() != self.tds.len() {
                    return Err(ModelError::Invalid {
                        location: "initial allocation".into(),
                        field: "devices",
                        reason: format!(
                            "has {} rows for {} devices",
                            alloc.devices.len(),
                            self.tds.len()
                        ),
                    }
                    .into());
                }
                alloc
                    .devices
                    .iter()
                    .zip(self.tds)
                    .map(|(row, td)| DeviceAllocation {
                        beta: if self.options.optimize_beta {
                            row.beta.clamp(td.beta_min, 1.0)
                        } else {
                            1.0
                        },
                        ..*row
                    })
                    .collect()
            }
            None => {
                let mut rows = Vec::with_capacity(self.tds.len());
                for (i, (td, &s)) in self.tds.iter().zip(self.sems).enumerate() {
                    // Raw upload first; the smallest payload if that cannot fit.
                    let mut start = transmit::transmit_with(td, 1.0, td.f_local_max, s, self.cfg)
                        .map(|up| (1.0, up));
                    if start.is_err() && self.options.optimize_beta && td.beta_min < 1.0 {
                        start = transmit::transmit_with(td, td.beta_min, td.f_local_max, s, self.cfg)
                            .map(|up| (td.beta_min, up));
                    }
                    let (beta, (t_transmit, e_transmit)) = start.map_err(|c| c.at(i))?;
                    rows.push(DeviceAllocation {
                        f_local: td.f_local_max,
                        f_remote: 0.0,
                        t_transmit,
                        e_transmit,
                        beta,
                    });
                }
                rows
            }
        };
        if initial.is_some() {
            self.upload_block()?;
        }
        self.rate_block()
    }

    /// Whether a row's upload still fits the energy and rate constraints.
    fn upload_feasible(&self, i: usize, row: &DeviceAllocation) -> bool {
        let td = &self.tds[i];
        let budget = upload_budget(td, row.beta, row.f_local, self.sems[i]);
        row.e_transmit <= budget
            && row.e_transmit <= td.p_tx_max * row.t_transmit
            && deliverable_bits(td, row.e_transmit, row.t_transmit, self.cfg)
                >= row.beta * td.task_bits
    }

    fn upload_block(&mut self) -> Result<(), FeasibilityError> {
        for i in 0..self.rows.len() {
            let row = self.rows[i];
            let keep_ok = self.upload_feasible(i, &row);
            match transmit::transmit_with(&self.tds[i], row.beta, row.f_local, self.sems[i], self.cfg)
            {
                // The bisection answer is only ε₂-accurate; never trade a
                // feasible upload for a longer one.
                Ok((t, e)) if !(keep_ok && t >= row.t_transmit) => {
                    self.rows[i].t_transmit = t;
                    self.rows[i].e_transmit = e;
                }
                Ok(_) => {}
                Err(_) if keep_ok => {}
                Err(cause) => return Err(cause.at(i)),
            }
        }
        Ok(())
    }

    fn extraction_block(&mut self) -> Result<(), FeasibilityError> {
        for i in 0..self.rows.len() {
            let (td, s) = (&self.tds[i], self.sems[i]);
            if td.task_bits == 0.0 {
                continue;
            }
            if let Some(better) = extraction::joint_update(td, &self.rows[i], s, self.cfg) {
                self.rows[i] = better;
            }
            let row = self.rows[i];
            let beta = extraction::beta_with(
                td,
                row.f_local,
                row.f_remote,
                row.t_transmit,
                row.e_transmit,
                s,
                self.cfg,
            )
            .map_err(|c| c.at(i))?;
            let before = device_delay(td, row.beta, row.f_local, row.f_remote, row.t_transmit, s);
            let after = device_delay(td, beta, row.f_local, row.f_remote, row.t_transmit, s);
            if after <= before {
                self.rows[i].beta = beta;
            }
        }
        Ok(())
    }

    fn rate_block(&mut self) -> Result<(), SolveError> {
        for i in 0..self.rows.len() {
            let row = self.rows[i];
            self.rows[i].f_local =
                rates::local_rate_with(&self.tds[i], row.beta, row.e_transmit, self.sems[i])
                    .map_err(|c| c.at(i))?;
        }
        let beta: Vec<f64> = self.rows.iter().map(|r| r.beta).collect();
        let f_local: Vec<f64> = self.rows.iter().map(|r| r.f_local).collect();
        let t_transmit: Vec<f64> = self.rows.iter().map(|r| r.t_transmit).collect();
        let (t, f_remote) =
            rates::remote_with(self.tds, self.sems, &beta, &f_local, &t_transmit, self.cfg)?;
        for (row, f) in self.rows.iter_mut().zip(f_remote) {
            row.f_remote = f;
        }
        let worst = self.delays()?.iter().map(|d| d.total).fold(0.0, f64::max);
        self.t = t.max(worst);
        Ok(())
    }

    fn delays(&self) -> Result<Vec<DelayBreakdown>, ModelError> {
        self.tds
            .iter()
            .zip(&self.rows)
            .zip(self.sems)
            .map(|((td, row), &s)| delay_with(td, row, s))
            .collect()
    }

    fn report(self, trace: Vec<f64>, converged: bool) -> Result<SolverReport, ModelError> {
        let delays = self.delays()?;
        let tightness_residuals = delays.iter().map(|d| self.t - d.total).collect();
        Ok(SolverReport {
            allocation: Allocation {
                devices: self.rows,
                t_epigraph: self.t,
            },
            iterations: trace.len() - 1,
            objective_trace: trace,
            converged,
            tightness_residuals,
            delays,
        })
    }
}

/// Residuals of a report's allocation under the options it was solved with.
pub fn report_residuals(
    report: &SolverReport,
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
    options: SolveOptions,
) -> Result<ConstraintResiduals, ModelError> {
    let sems: Vec<_> = tds
        .iter()
        .map(|td| {
            let s = td.semantics(cfg);
            if options.extraction_cost {
                s
            } else {
                s.without_extraction()
            }
        })
        .collect();
    residuals_with(&report.allocation, tds, &sems, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_device, reference_scenario};

    #[test]
    fn reference_scenario_is_feasible_and_tight() {
        let (tds, cfg) = reference_scenario(10);
        let report = solve(&tds, &cfg, None).unwrap();
        assert!(report.converged);
        let r = log_domain_residuals(&report.allocation, &tds, &cfg).unwrap();
        assert!(r.is_feasible(1e-9), "{:?}", r);
        for d in &r.devices {
            assert!(d.delay <= cfg.eps_bisect_capacity + 1e-9);
            assert!(d.local_rate_bound_active(1e-12, 1e-12));
        }
        assert!(r.capacity <= cfg.f_mec_total * 1e-6);
        for w in report.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", report.objective_trace);
        }
    }

    #[test]
    fn single_device_moves_beta() {
        let cfg = SystemConfig {
            n_devices: 1,
            ..SystemConfig::default()
        };
        let tds = vec![reference_device(200.0)];
        let report = solve(&tds, &cfg, None).unwrap();
        let beta = report.allocation.devices[0].beta;
        assert!(beta < 1.0, "{beta}");
        let at_one = report.objective_trace[0];
        assert!(report.objective() < at_one);
    }

    #[test]
    fn forced_raw_upload_matches_fixed_beta_run() {
        let (mut tds, cfg) = reference_scenario(6);
        tds.iter_mut().for_each(|td| td.beta_min = 1.0);
        let semantic = solve(&tds, &cfg, None).unwrap();
        let fixed = solve_with(
            &tds,
            &cfg,
            None,
            SolveOptions {
                optimize_beta: false,
                extraction_cost: true,
            },
        )
        .unwrap();
        assert_eq!(semantic.objective(), fixed.objective());
    }

    #[test]
    fn zero_tasks_short_circuit() {
        let (mut tds, cfg) = reference_scenario(3);
        tds[1].task_bits = 0.0;
        let report = solve(&tds, &cfg, None).unwrap();
        assert_eq!(report.delays[1], DelayBreakdown::ZERO);
        assert_eq!(report.allocation.devices[1].f_remote, 0.0);
        tds.iter_mut().for_each(|td| td.task_bits = 0.0);
        let empty = solve(&tds, &cfg, None).unwrap();
        assert_eq!(empty.objective(), 0.0);
        assert!(empty.converged);
    }

    #[test]
    fn warm_start_reaches_same_objective() {
        let (tds, cfg) = reference_scenario(4);
        let cold = solve(&tds, &cfg, None).unwrap();
        let warm = solve(&tds, &cfg, Some(&cold.allocation)).unwrap();
        assert!((warm.objective() - cold.objective()).abs() <= 1e-9 * cold.objective());
    }

    #[test]
    fn infeasible_device_is_reported() {
        let (mut tds, cfg) = reference_scenario(3);
        tds[2].energy_budget = 1e-12;
        let err = solve(&tds, &cfg, None).unwrap_err();
        assert!(matches!(
            err,
            SolveError::Infeasible(FeasibilityError { device_index: 2, .. })
        ));
    }
}
