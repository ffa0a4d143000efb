//! Reference schemes: raw upload without extraction, and fully local
//! execution.

use crate::model::{validate_inputs, Allocation, DelayBreakdown, DeviceAllocation, SystemConfig, TerminalDevice};
use crate::solver::{solve_with, FeasibilityCause, SolveError, SolveOptions, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineKind {
    NoSemantic,
    LocalOnly,
}

pub fn solve_baseline(
    kind: BaselineKind,
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
) -> Result<SolverReport, SolveError> {
    match kind {
        BaselineKind::NoSemantic => solve_no_semantic(tds, cfg),
        BaselineKind::LocalOnly => solve_local_only(tds, cfg),
    }
}

/// Solver options for raw upload. With `retain_extraction` the `β = 1`
/// extraction pass `a·A` cycles is still charged.
pub fn no_semantic_options(retain_extraction: bool) -> SolveOptions {
    SolveOptions {
        optimize_beta: false,
        extraction_cost: retain_extraction,
    }
}

/// Every device uploads its raw data: `β = 1`, `G = 1`, no extraction.
pub fn solve_no_semantic(tds: &[TerminalDevice], cfg: &SystemConfig) -> Result<SolverReport, SolveError> {
    solve_with(tds, cfg, None, no_semantic_options(false))
}

/// Raw upload that still pays for the `β = 1` extraction pass.
pub fn solve_no_semantic_with_extraction(
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
) -> Result<SolverReport, SolveError> {
    solve_with(tds, cfg, None, no_semantic_options(true))
}

/// Every device runs its whole task locally at the fastest clock its
/// budget allows, `min{f_max, sqrt(E/(κ·A·I))}`.
pub fn solve_local_only(tds: &[TerminalDevice], cfg: &SystemConfig) -> Result<SolverReport, SolveError> {
    validate_inputs(tds, cfg)?;
    let mut rows = Vec::with_capacity(tds.len());
    let mut delays = Vec::with_capacity(tds.len());
    for (i, td) in tds.iter().enumerate() {
        let cycles = td.task_bits * td.intensity;
        if cycles == 0.0 {
            rows.push(local_row(td.f_local_max));
            delays.push(DelayBreakdown::ZERO);
            continue;
        }
        if !(td.energy_budget > 0.0) {
            return Err(FeasibilityCause::ExtractionEnergyExceedsBudget.at(i).into());
        }
        let f = td
            .f_local_max
            .min((td.energy_budget / (td.energy_coeff * cycles)).sqrt());
        rows.push(local_row(f));
        delays.push(DelayBreakdown::new(cycles / f, 0.0, 0.0));
    }
    let t = delays.iter().map(|d| d.total).fold(0.0, f64::max);
    Ok(SolverReport {
        allocation: Allocation {
            devices: rows,
            t_epigraph: t,
        },
        objective_trace: vec![t],
        iterations: 0,
        converged: true,
        tightness_residuals: delays.iter().map(|d| t - d.total).collect(),
        delays,
    })
}

fn local_row(f_local: f64) -> DeviceAllocation {
    DeviceAllocation {
        f_local,
        f_remote: 0.0,
        t_transmit: 0.0,
        e_transmit: 0.0,
        beta: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_device, reference_scenario};

    #[test]
    fn local_only_values() {
        let cfg = SystemConfig {
            n_devices: 1,
            ..SystemConfig::default()
        };
        let ample = TerminalDevice {
            energy_budget: 100.0,
            ..reference_device(150.0)
        };
        let r = solve_local_only(std::slice::from_ref(&ample), &cfg).unwrap();
        assert!((r.objective() - 0.21).abs() < 1e-15);

        // κ·f_max²·A·I = 2.1 J exactly reaches f_max.
        let boundary = TerminalDevice {
            energy_budget: 1e-26 * 1e18 * 3e6 * 70.0,
            ..ample.clone()
        };
        let r = solve_local_only(&[boundary], &cfg).unwrap();
        assert!((r.allocation.devices[0].f_local - 1e9).abs() <= 1e9 * 1e-12);

        let empty = TerminalDevice {
            task_bits: 0.0,
            ..ample
        };
        assert_eq!(solve_local_only(&[empty], &cfg).unwrap().objective(), 0.0);
    }

    #[test]
    fn raw_upload_delay_structure() {
        let (tds, cfg) = reference_scenario(10);
        let r = solve_no_semantic(&tds, &cfg).unwrap();
        let total: f64 = r.allocation.devices.iter().map(|d| d.f_remote).sum();
        assert!(total >= cfg.f_mec_total * (1.0 - 1e-6) && total <= cfg.f_mec_total);
        for (td, (row, d)) in tds.iter().zip(r.allocation.devices.iter().zip(&r.delays)) {
            assert_eq!(row.beta, 1.0);
            assert_eq!(d.t_local, 0.0);
            let expected = row.t_transmit + td.task_bits * td.intensity / row.f_remote;
            assert!((d.total - expected).abs() <= 1e-15 * expected);
        }
    }

    #[test]
    fn zero_tasks_give_zero() {
        let (mut tds, cfg) = reference_scenario(4);
        tds.iter_mut().for_each(|td| td.task_bits = 0.0);
        assert_eq!(solve_no_semantic(&tds, &cfg).unwrap().objective(), 0.0);
        assert_eq!(solve_local_only(&tds, &cfg).unwrap().objective(), 0.0);
    }

    #[test]
    fn ordering_on_reference_scenario() {
        let (tds, cfg) = reference_scenario(10);
        let semantic = crate::solver::solve(&tds, &cfg, None).unwrap().objective();
        let raw = solve_no_semantic_with_extraction(&tds, &cfg).unwrap().objective();
        let local = solve_local_only(&tds, &cfg).unwrap().objective();
        assert!(semantic <= raw + 1e-9, "{semantic} {raw}");
        assert!(raw <= local + 1e-9, "{raw} {local}");
    }
}
