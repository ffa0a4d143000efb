//! Independent checks of solver output.
//!
//! [`grid_optimum`] brute-forces tiny instances over a grid of the original
//! decision variables, checking the energy, power, rate and range
//! constraints straight from the physical formulas. [`perturbation_certify`]
//! probes random feasible moves around a candidate allocation and reports
//! whether any of them lowers the largest delay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::model::{
    linspace, shannon_rate, Allocation, DeviceAllocation, ModelError, SemanticParams, SystemConfig,
    TerminalDevice,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("no grid point satisfies every constraint")]
    NoFeasiblePoint,
    #[error("grid search supports at most 2 devices, got {0}")]
    TooManyDevices(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Smallest admissible number of intervals per axis.
pub const MIN_RESOLUTION: usize = 8;
/// Largest resolution accepted for two-device grids.
pub const MAX_RESOLUTION_TWO_DEVICES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBounds {
    pub lo: f64,
    pub hi: f64,
}

impl AxisBounds {
    fn check(&self, name: &str) -> Result<(), OracleError> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi {
            Ok(())
        } else {
            Err(OracleError::InvalidGrid(format!(
                "{name} bounds [{}, {}] must be finite and ordered",
                self.lo, self.hi
            )))
        }
    }

    fn linear(&self, intervals: usize) -> Vec<f64> {
        linspace(self.lo, self.hi, intervals + 1)
    }

    fn logarithmic(&self, intervals: usize) -> Vec<f64> {
        let mut pts: Vec<f64> = linspace(self.lo.ln(), self.hi.ln(), intervals + 1)
            .into_iter()
            .map(f64::exp)
            .collect();
        pts[0] = self.lo;
        pts[intervals] = self.hi;
        pts
    }
}

/// Box for one device: β, f_L on log axes; t_T, e_T on linear axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceBounds {
    pub beta: AxisBounds,
    pub f_local: AxisBounds,
    pub t_transmit: AxisBounds,
    pub e_transmit: AxisBounds,
}

/// Grid definition. Each axis carries `resolution_per_axis` intervals, so
/// doubling the resolution keeps every previous point on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub resolution_per_axis: usize,
    pub devices: Vec<DeviceBounds>,
    /// Server share of the first device (log axis); the second gets the rest.
    /// Only used with two devices.
    pub remote_first: Option<AxisBounds>,
}

impl GridSpec {
    /// Bounds derived from each device's physical limits.
    ///
    /// The upload-time axis runs from the fastest possible upload of the
    /// smallest payload to 1.25× the time needed for the raw payload with
    /// the whole energy budget.
    pub fn around(tds: &[TerminalDevice], cfg: &SystemConfig, resolution: usize) -> Self {
        let devices = tds.iter().map(|td| device_bounds(td, cfg)).collect();
        let remote_first = (tds.len() == 2).then_some(AxisBounds {
            lo: 0.02 * cfg.f_mec_total,
            hi: 0.98 * cfg.f_mec_total,
        });
        Self {
            resolution_per_axis: resolution,
            devices,
            remote_first,
        }
    }

    /// The same box with every β axis pinned to 1.
    pub fn raw_upload_plane(mut self) -> Self {
        for d in &mut self.devices {
            d.beta = AxisBounds { lo: 1.0, hi: 1.0 };
        }
        self
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        Self {
            resolution_per_axis: resolution,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.resolution_per_axis < MIN_RESOLUTION {
            return Err(OracleError::InvalidGrid(format!(
                "resolution {} is below {MIN_RESOLUTION}",
                self.resolution_per_axis
            )));
        }
        for d in &self.devices {
            d.beta.check("beta")?;
            d.f_local.check("f_local")?;
            d.t_transmit.check("t_transmit")?;
            d.e_transmit.check("e_transmit")?;
            if !(d.beta.lo > 0.0 && d.f_local.lo > 0.0) {
                return Err(OracleError::InvalidGrid(
                    "log axes need strictly positive lower bounds".into(),
                ));
            }
        }
        if let Some(r) = self.remote_first {
            r.check("remote share")?;
        }
        Ok(())
    }
}

fn device_bounds(td: &TerminalDevice, cfg: &SystemConfig) -> DeviceBounds {
    let peak_rate = shannon_rate(td.channel_gain, td.p_tx_max, cfg);
    let t_lo = td.beta_min * td.task_bits / peak_rate;
    let raw_feasible = |t: f64| {
        let e = td.energy_budget.min(td.p_tx_max * t);
        t * shannon_rate(td.channel_gain, e / t, cfg) >= td.task_bits
    };
    let mut t_raw = (td.task_bits / peak_rate).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if raw_feasible(t_raw) {
            break;
        }
        t_raw *= 1.1;
    }
    let t_hi = 1.25 * t_raw;
    DeviceBounds {
        beta: AxisBounds {
            lo: td.beta_min,
            hi: 1.0,
        },
        f_local: AxisBounds {
            lo: td.f_local_max * 1e-3,
            hi: td.f_local_max,
        },
        t_transmit: AxisBounds { lo: t_lo, hi: t_hi },
        e_transmit: AxisBounds {
            lo: 0.0,
            hi: td.energy_budget.min(td.p_tx_max * t_hi),
        },
    }
}

/// Best grid point for one device with a given server share.
fn device_grid_min(
    td: &TerminalDevice,
    s: SemanticParams,
    f_remote: f64,
    bounds: &DeviceBounds,
    intervals: usize,
    cfg: &SystemConfig,
) -> Option<(f64, DeviceAllocation)> {
    if td.task_bits == 0.0 {
        let row = DeviceAllocation {
            f_local: td.f_local_max,
            f_remote,
            t_transmit: 0.0,
            e_transmit: 0.0,
            beta: 1.0,
        };
        return (td.energy_budget >= 0.0).then_some((0.0, row));
    }
    let betas = bounds.beta.logarithmic(intervals);
    let clocks = bounds.f_local.logarithmic(intervals);
    let times = bounds.t_transmit.linear(intervals);
    let energies = bounds.e_transmit.linear(intervals);
    let noise = cfg.noise_power_w();

    let per_beta: Vec<Option<(f64, DeviceAllocation)>> = betas
        .par_iter()
        .map(|&beta| {
            // Extraction cycles and server-side delay.
            let cycles = s.a * td.task_bits / beta.powf(s.k);
            let g = 1.0 / beta.powf(s.p);
            let remote = td.task_bits * beta * td.intensity * g / f_remote;
            let payload = td.task_bits * beta;
            let mut best: Option<(f64, DeviceAllocation)> = None;
            for &f_local in &clocks {
                let t_local = cycles / f_local;
                let e_local = td.energy_coeff * f_local.powi(3) * t_local;
                for &t in &times {
                    let delay = t_local + t + remote;
                    if best.is_some_and(|(b, _)| delay >= b) {
                        break;
                    }
                    if t <= 0.0 {
                        continue;
                    }
                    // The rate grows with the upload energy, so the largest
                    // admissible grid energy settles feasibility.
                    let admissible = energies
                        .iter()
                        .rev()
                        .find(|&&e| e / t <= td.p_tx_max && e_local + e <= td.energy_budget);
                    let Some(&e) = admissible else { continue };
                    let rate = cfg.bandwidth_hz * (1.0 + td.channel_gain * (e / t) / noise).log2();
                    if t * rate >= payload {
                        best = Some((
                            delay,
                            DeviceAllocation {
                                f_local,
                                f_remote,
                                t_transmit: t,
                                e_transmit: e,
                                beta,
                            },
                        ));
                        break;
                    }
                }
            }
            best
        })
        .collect();

    per_beta
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, DeviceAllocation)>, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        })
}

/// Exhaustive min-max delay over the grid for one or two devices.
pub fn grid_optimum(
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
    grid: &GridSpec,
) -> Result<(f64, Allocation), OracleError> {
    grid.validate()?;
    if grid.devices.len() != tds.len() {
        return Err(OracleError::InvalidGrid(format!(
            "{} device boxes for {} devices",
            grid.devices.len(),
            tds.len()
        )));
    }
    let intervals = grid.resolution_per_axis;
    match tds {
        [td] => {
            let (obj, row) = device_grid_min(
                td,
                td.semantics(cfg),
                cfg.f_mec_total,
                &grid.devices[0],
                intervals,
                cfg,
            )
            .ok_or(OracleError::NoFeasiblePoint)?;
            Ok((
                obj,
                Allocation {
                    devices: vec![row],
                    t_epigraph: obj,
                },
            ))
        }
        [first, second] => {
            if intervals > MAX_RESOLUTION_TWO_DEVICES {
                return Err(OracleError::InvalidGrid(format!(
                    "two-device grids are capped at resolution {MAX_RESOLUTION_TWO_DEVICES}"
                )));
            }
            let split = grid
                .remote_first
                .ok_or_else(|| OracleError::InvalidGrid("missing remote share axis".into()))?;
            let mut best: Option<(f64, Allocation)> = None;
            for f1 in split.logarithmic(intervals) {
                let f2 = cfg.f_mec_total - f1;
                let a = device_grid_min(first, first.semantics(cfg), f1, &grid.devices[0], intervals, cfg);
                let b = device_grid_min(second, second.semantics(cfg), f2, &grid.devices[1], intervals, cfg);
                let (Some((da, ra)), Some((db, rb))) = (a, b) else { continue };
                let obj = da.max(db);
                if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                    best = Some((
                        obj,
                        Allocation {
                            devices: vec![ra, rb],
                            t_epigraph: obj,
                        },
                    ));
                }
            }
            best.ok_or(OracleError::NoFeasiblePoint)
        }
        _ => Err(OracleError::TooManyDevices(tds.len())),
    }
}

/// Largest device delay, or `None` when any constraint of the original
/// problem is violated.
fn feasible_objective(
    rows: &[DeviceAllocation],
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
) -> Option<f64> {
    let total_remote: f64 = rows.iter().map(|r| r.f_remote).sum();
    if total_remote > cfg.f_mec_total {
        return None;
    }
    let noise = cfg.noise_power_w();
    let mut worst = 0.0f64;
    for (td, r) in tds.iter().zip(rows) {
        if td.task_bits == 0.0 {
            continue;
        }
        let s = td.semantics(cfg);
        if !(r.beta >= td.beta_min && r.beta <= 1.0 && r.f_local <= td.f_local_max) {
            return None;
        }
        if !(r.t_transmit > 0.0 && r.f_local > 0.0 && r.f_remote > 0.0) {
            return None;
        }
        let power = r.e_transmit / r.t_transmit;
        if !(power >= 0.0 && power <= td.p_tx_max) {
            return None;
        }
        let t_local = s.a * td.task_bits / r.beta.powf(s.k) / r.f_local;
        let energy = td.energy_coeff * r.f_local.powi(3) * t_local + power * r.t_transmit;
        if energy > td.energy_budget {
            return None;
        }
        let rate = cfg.bandwidth_hz * (1.0 + td.channel_gain * power / noise).log2();
        if r.t_transmit * rate < r.beta * td.task_bits {
            return None;
        }
        let remote = td.task_bits * r.beta * td.intensity / r.beta.powf(s.p) / r.f_remote;
        worst = worst.max(t_local + r.t_transmit + remote);
    }
    Some(worst)
}

/// Seed of the probe generator.
const PROBE_SEED: u64 = 0x5eed_0f0c;
/// Draws allowed per requested feasible probe.
const ATTEMPTS_PER_PROBE: usize = 20;

/// Moves a perturbed point back into the feasible set: the server split is
/// scaled into capacity, the upload energy clipped to the power cap and the
/// budget, and the upload time stretched until the rate constraint holds.
fn repair(rows: &mut [DeviceAllocation], tds: &[TerminalDevice], cfg: &SystemConfig) -> bool {
    let total: f64 = rows.iter().map(|r| r.f_remote).sum();
    if total > cfg.f_mec_total {
        let scale = cfg.f_mec_total / total * (1.0 - 4.0 * f64::EPSILON);
        rows.iter_mut().for_each(|r| r.f_remote *= scale);
    }
    let noise = cfg.noise_power_w();
    for (td, r) in tds.iter().zip(rows.iter_mut()) {
        if td.task_bits == 0.0 {
            continue;
        }
        let s = td.semantics(cfg);
        let e_local = s.a * td.task_bits * td.energy_coeff * r.f_local * r.f_local / r.beta.powf(s.k);
        r.e_transmit = r
            .e_transmit
            .min(td.p_tx_max * r.t_transmit)
            .min(td.energy_budget - e_local);
        if !(r.e_transmit > 0.0) {
            return false;
        }
        let bits = r.beta * td.task_bits;
        let sent = |t: f64| t * cfg.bandwidth_hz * (1.0 + td.channel_gain * r.e_transmit / (t * noise)).log2();
        if sent(r.t_transmit) >= bits {
            continue;
        }
        if td.channel_gain * r.e_transmit * cfg.bandwidth_hz / (noise * std::f64::consts::LN_2) <= bits {
            return false;
        }
        let (mut lo, mut hi) = (r.t_transmit, 2.0 * r.t_transmit);
        while sent(hi) < bits {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sent(mid) >= bits {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        r.t_transmit = hi;
    }
    true
}

/// Samples random moves of length `step` in the logarithms of every
/// positive decision variable and projects each onto the feasible set.
/// Components that would leave a simple bound are reflected inward.
///
/// Returns `false` as soon as one of `n_probes` feasible probes lowers the
/// largest delay by more than `step²` times that delay. Probes that cannot
/// be made feasible are discarded and do not count.
pub fn perturbation_certify(
    alloc: &Allocation,
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
    n_probes: usize,
    step: f64,
) -> bool {
    if n_probes == 0 {
        return true;
    }
    let Some(base) = feasible_objective(&alloc.devices, tds, cfg) else {
        return true;
    };
    let threshold = step * step * base;
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let dims = 5 * alloc.devices.len();
    let mut direction = vec![0.0f64; dims];
    let mut accepted = 0;
    for _ in 0..n_probes * ATTEMPTS_PER_PROBE {
        if accepted == n_probes {
            break;
        }
        direction
            .iter_mut()
            .for_each(|d| *d = rng.sample::<f64, _>(StandardNormal));
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let scale = step / norm;
        let nudge = |x: f64, d: f64| if x > 0.0 { x * (scale * d).exp() } else { x };
        let mut probe: Vec<DeviceAllocation> = alloc
            .devices
            .iter()
            .zip(tds)
            .zip(direction.chunks_exact(5))
            .map(|((r, td), d)| {
                let f_dir = if r.f_local >= td.f_local_max { -d[0].abs() } else { d[0] };
                let b_dir = if r.beta >= 1.0 {
                    -d[4].abs()
                } else if r.beta <= td.beta_min {
                    d[4].abs()
                } else {
                    d[4]
                };
                DeviceAllocation {
                    f_local: nudge(r.f_local, f_dir),
                    f_remote: nudge(r.f_remote, d[1]),
                    t_transmit: nudge(r.t_transmit, d[2]),
                    e_transmit: nudge(r.e_transmit, d[3]),
                    beta: nudge(r.beta, b_dir).clamp(td.beta_min, 1.0),
                }
            })
            .collect();
        if !repair(&mut probe, tds, cfg) {
            continue;
        }
        let Some(obj) = feasible_objective(&probe, tds, cfg) else { continue };
        accepted += 1;
        if obj < base - threshold {
            return false;
        }
    }
    true
}
