//! Parameter sweeps and CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::scenario::Scenario;
use crate::baselines::{solve_local_only, solve_no_semantic};
use crate::model::{validate_inputs, DelayBreakdown, SemanticParams};
use crate::oracle::perturbation_certify;
use crate::solver::{solve, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Semantic,
    NoSemantic,
    LocalOnly,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Semantic, Algorithm::NoSemantic, Algorithm::LocalOnly];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Semantic => "semantic",
            Algorithm::NoSemantic => "no-semantic",
            Algorithm::LocalOnly => "local",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected semantic, no-semantic or local)"))
    }
}

/// Quantities a sweep can override, applied to every device at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    EnergyBudget,
    TaskBits,
    BetaMin,
    SemA,
    SemK,
    SemP,
    FMecTotal,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::EnergyBudget,
        SweepParam::TaskBits,
        SweepParam::BetaMin,
        SweepParam::SemA,
        SweepParam::SemK,
        SweepParam::SemP,
        SweepParam::FMecTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::EnergyBudget => "energy_budget",
            SweepParam::TaskBits => "task_bits",
            SweepParam::BetaMin => "beta_min",
            SweepParam::SemA => "sem_a",
            SweepParam::SemK => "sem_k",
            SweepParam::SemP => "sem_p",
            SweepParam::FMecTotal => "f_mec_total",
        }
    }

    /// The scenario with this parameter set to `value` everywhere.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Scenario {
        let mut s = scenario.clone();
        let set_sem = |sem: &mut SemanticParams| match self {
            SweepParam::SemA => sem.a = value,
            SweepParam::SemK => sem.k = value,
            SweepParam::SemP => sem.p = value,
            _ => {}
        };
        match self {
            SweepParam::FMecTotal => s.system.f_mec_total = value,
            SweepParam::SemA => s.system.sem_a = value,
            SweepParam::SemK => s.system.sem_k = value,
            SweepParam::SemP => s.system.sem_p = value,
            _ => {}
        }
        for td in &mut s.devices {
            match self {
                SweepParam::EnergyBudget => td.energy_budget = value,
                SweepParam::TaskBits => td.task_bits = value,
                SweepParam::BetaMin => td.beta_min = value,
                _ => {}
            }
            if let Some(sem) = td.semantics.as_mut() {
                set_sem(sem);
            }
        }
        s
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepParam::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            format!("unknown sweep parameter `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = String;

    /// `PARAM=v1,v2,...`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep `{s}` must look like PARAM=v1,v2,..."))?;
        let param = name.trim().parse()?;
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse::<f64>().map_err(|e| format!("sweep value `{v}`: {e}")))
            .collect::<Result<_, _>>()?;
        Ok(Sweep { param, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub swept_param: String,
    pub value: f64,
    pub algorithm: Algorithm,
    pub max_delay_s: f64,
    pub mean_delay_s: f64,
    pub per_device_breakdown: Vec<DelayBreakdown>,
    pub per_device_beta: Vec<f64>,
    pub iterations: usize,
}

impl SweepResult {
    fn from_report(param: SweepParam, value: f64, algorithm: Algorithm, report: &SolverReport) -> Self {
        let n = report.delays.len().max(1) as f64;
        Self {
            swept_param: param.name().to_string(),
            value,
            algorithm,
            max_delay_s: report.max_delay(),
            mean_delay_s: report.delays.iter().map(|d| d.total).sum::<f64>() / n,
            per_device_breakdown: report.delays.clone(),
            per_device_beta: report.allocation.devices.iter().map(|d| d.beta).collect(),
            iterations: report.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub swept_param: String,
    pub value: f64,
    pub algorithm: Algorithm,
    pub reason: String,
}

impl fmt::Display for CellFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={} {}: {}", self.swept_param, self.value, self.algorithm, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub results: Vec<SweepResult>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Certify every semantic solve with random feasible perturbations.
    pub verify: bool,
}

pub const VERIFY_PROBES: usize = 500;
pub const VERIFY_STEP: f64 = 1e-3;

/// Runs every (value, algorithm) cell. A seed replaces the scenario's
/// fading seed; scenarios without fading ignore it.
pub fn run_sweep(scenario: &Scenario, sweep: &Sweep, algorithms: &[Algorithm], seed: Option<u64>) -> SweepOutcome {
    run_sweep_with(scenario, sweep, algorithms, seed, SweepOptions::default())
}

pub fn run_sweep_with(
    scenario: &Scenario,
    sweep: &Sweep,
    algorithms: &[Algorithm],
    seed: Option<u64>,
    options: SweepOptions,
) -> SweepOutcome {
    let base = match seed.map(|s| scenario.with_fading_seed(s)) {
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            let failures = cells(sweep, algorithms)
                .map(|(value, algorithm)| CellFailure {
                    swept_param: sweep.param.name().into(),
                    value,
                    algorithm,
                    reason: e.to_string(),
                })
                .collect();
            return SweepOutcome {
                results: Vec::new(),
                failures,
            };
        }
        None => scenario.clone(),
    };

    let cells: Vec<(f64, Algorithm)> = cells(sweep, algorithms).collect();
    let mut outcomes: Vec<(f64, Algorithm, Result<SweepResult, String>)> = cells
        .par_iter()
        .map(|&(value, algorithm)| (value, algorithm, run_cell(&base, sweep.param, value, algorithm, options)))
        .collect();
    outcomes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out = SweepOutcome::default();
    for (value, algorithm, r) in outcomes {
        match r {
            Ok(row) => out.results.push(row),
            Err(reason) => out.failures.push(CellFailure {
                swept_param: sweep.param.name().into(),
                value,
                algorithm,
                reason,
            }),
        }
    }
    out
}

fn cells<'a>(sweep: &'a Sweep, algorithms: &'a [Algorithm]) -> impl Iterator<Item = (f64, Algorithm)> + 'a {
    sweep
        .values
        .iter()
        .flat_map(move |&v| algorithms.iter().map(move |&a| (v, a)))
}

fn run_cell(
    base: &Scenario,
    param: SweepParam,
    value: f64,
    algorithm: Algorithm,
    options: SweepOptions,
) -> Result<SweepResult, String> {
    let s = param.apply(base, value);
    validate_inputs(&s.devices, &s.system).map_err(|e| e.to_string())?;
    let report = match algorithm {
        Algorithm::Semantic => solve(&s.devices, &s.system, None),
        Algorithm::NoSemantic => solve_no_semantic(&s.devices, &s.system),
        Algorithm::LocalOnly => solve_local_only(&s.devices, &s.system),
    }
    .map_err(|e| e.to_string())?;
    if options.verify
        && algorithm == Algorithm::Semantic
        && !perturbation_certify(&report.allocation, &s.devices, &s.system, VERIFY_PROBES, VERIFY_STEP)
    {
        return Err("perturbation certification found an improving feasible move".into());
    }
    Ok(SweepResult::from_report(param, value, algorithm, &report))
}

pub const CSV_HEADER: [&str; 8] = [
    "swept_param",
    "value",
    "algorithm",
    "max_delay_s",
    "mean_delay_s",
    "per_device_breakdown",
    "per_device_beta",
    "iterations",
];

/// Writes the header and one row per result. Floats use the shortest
/// representation that parses back to the same value. Each breakdown is
/// `t_local:t_transmit:t_remote:total`, and devices are separated by `;`.
pub fn write_csv<W: Write>(results: &[SweepResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in results {
        let breakdown: Vec<String> = r
            .per_device_breakdown
            .iter()
            .map(|d| format!("{:?}:{:?}:{:?}:{:?}", d.t_local, d.t_transmit, d.t_remote, d.total))
            .collect();
        let beta: Vec<String> = r.per_device_beta.iter().map(|b| format!("{b:?}")).collect();
        w.write_record([
            r.swept_param.clone(),
            format!("{:?}", r.value),
            r.algorithm.to_string(),
            format!("{:?}", r.max_delay_s),
            format!("{:?}", r.mean_delay_s),
            breakdown.join(";"),
            beta.join(";"),
            r.iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(results: &[SweepResult], path: impl AsRef<Path>) -> csv::Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(results, std::io::BufWriter::new(file))
}
