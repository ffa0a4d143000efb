//! Extraction factor updates.
//!
//! [`optimal_beta`] is the closed-form minimizer of one device's delay over
//! β with every other variable held fixed. With upload time and energy
//! frozen, the admissible β range collapses onto the current β whenever the
//! upload is rate-tight, so the alternating loop also runs
//! [`joint_update`], which re-solves the upload for each candidate β.

use super::transmit::transmit_with;
use super::FeasibilityCause;
use crate::model::{deliverable_bits, DeviceAllocation, SemanticParams, SystemConfig, TerminalDevice};

/// Relative overshoot of `η₁` over `η₂` still read as a degenerate interval.
const INTERVAL_TOL: f64 = 1e-12;

/// Admissible extraction factors `[η₁, η₂]` for fixed local clock and upload.
pub(crate) fn beta_interval(
    td: &TerminalDevice,
    f_local: f64,
    t_transmit: f64,
    e_transmit: f64,
    s: SemanticParams,
    cfg: &SystemConfig,
) -> Result<(f64, f64), FeasibilityCause> {
    let mut eta1 = td.beta_min;
    let mut tol = INTERVAL_TOL;
    if s.a > 0.0 {
        let residual = td.energy_budget - e_transmit;
        if !(residual > 0.0) {
            return Err(FeasibilityCause::InvalidScenario);
        }
        let floor = (s.a * td.task_bits * td.energy_coeff * f_local * f_local / residual)
            .powf(1.0 / s.k);
        eta1 = eta1.max(floor);
        // The residual loses digits when the upload spends almost all of E.
        tol = tol.max(8.0 * f64::EPSILON * td.energy_budget / (residual * s.k));
    }
    let capacity = deliverable_bits(td, e_transmit, t_transmit, cfg);
    let mut eta2 = (capacity / td.task_bits).min(1.0);
    while eta2 > 0.0 && eta2 * td.task_bits > capacity {
        eta2 = eta2.next_down();
    }
    if eta1 > eta2 {
        if eta1 <= eta2 * (1.0 + tol) {
            eta1 = eta2;
        } else {
            return Err(FeasibilityCause::InvalidScenario);
        }
    }
    Ok((eta1, eta2))
}

/// Interior stationary point of the per-device delay when `p < 1`.
pub(crate) fn stationary_point(
    td: &TerminalDevice,
    f_local: f64,
    f_remote: f64,
    s: SemanticParams,
) -> f64 {
    (s.a * s.k * f_remote / (f_local * td.intensity * (1.0 - s.p))).powf(1.0 / (s.k + 1.0 - s.p))
}

/// Delay-minimizing β for fixed clocks, upload time and upload energy.
///
/// For `p ≥ 1` the delay falls as β grows, so the answer is the top of the
/// admissible interval. For `p < 1` the delay has a single stationary point
/// `μ`, clamped into the interval.
pub fn optimal_beta(
    td: &TerminalDevice,
    f_local: f64,
    f_remote: f64,
    t_transmit: f64,
    e_transmit: f64,
    cfg: &SystemConfig,
) -> Result<f64, FeasibilityCause> {
    beta_with(td, f_local, f_remote, t_transmit, e_transmit, td.semantics(cfg), cfg)
}

pub(crate) fn beta_with(
    td: &TerminalDevice,
    f_local: f64,
    f_remote: f64,
    t_transmit: f64,
    e_transmit: f64,
    s: SemanticParams,
    cfg: &SystemConfig,
) -> Result<f64, FeasibilityCause> {
    if td.task_bits == 0.0 {
        return Ok(1.0);
    }
    if !(f_local > 0.0 && f_remote > 0.0 && t_transmit > 0.0 && e_transmit > 0.0) {
        return Err(FeasibilityCause::InvalidScenario);
    }
    let (eta1, eta2) = beta_interval(td, f_local, t_transmit, e_transmit, s, cfg)?;
    if s.p >= 1.0 {
        return Ok(eta2);
    }
    let mu = stationary_point(td, f_local, f_remote, s);
    Ok(if mu <= eta1 {
        eta1
    } else if mu <= eta2 {
        mu
    } else {
        eta2
    })
}

/// One device's delay as a function of β with the clocks fixed.
pub(crate) fn device_delay(
    td: &TerminalDevice,
    beta: f64,
    f_local: f64,
    f_remote: f64,
    t_transmit: f64,
    s: SemanticParams,
) -> f64 {
    let extraction = if s.a == 0.0 {
        0.0
    } else {
        s.a * td.task_bits / (f_local * beta.powf(s.k))
    };
    extraction + t_transmit + td.task_bits * td.intensity * beta.powf(1.0 - s.p) / f_remote
}

/// Golden-section tolerance on `ln β`.
const LOG_BETA_TOL: f64 = 1e-10;

/// Minimizes one device's delay over β with the upload re-solved for every
/// candidate, local clock and server share held fixed.
///
/// The delay is convex in `ln β` once upload time and energy are minimized
/// out, so a golden-section search on `ln β` finds the minimum. Returns
/// `None` when no candidate beats `current`.
pub(crate) fn joint_update(
    td: &TerminalDevice,
    current: &DeviceAllocation,
    s: SemanticParams,
    cfg: &SystemConfig,
) -> Option<DeviceAllocation> {
    if td.task_bits == 0.0 {
        return None;
    }
    let f_local = current.f_local;
    let mut lo = td.beta_min;
    if s.a > 0.0 {
        let floor =
            (s.a * td.task_bits * td.energy_coeff * f_local * f_local / td.energy_budget).powf(1.0 / s.k);
        lo = lo.max(floor * (1.0 + 1e-9));
    }
    if lo >= 1.0 {
        return None;
    }

    let evaluate = |log_beta: f64| -> (f64, f64, f64, f64) {
        let beta = log_beta.exp().min(1.0);
        match transmit_with(td, beta, f_local, s, cfg) {
            Ok((t, e)) => (
                device_delay(td, beta, f_local, current.f_remote, t, s),
                beta,
                t,
                e,
            ),
            Err(_) => (f64::INFINITY, beta, 0.0, 0.0),
        }
    };

    let mut best = evaluate(0.0);
    let at_floor = evaluate(lo.ln());
    if at_floor.0 < best.0 {
        best = at_floor;
    }

    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), 0.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = evaluate(c);
    let mut fd = evaluate(d);
    while b - a > LOG_BETA_TOL {
        if fc.0 <= fd.0 {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = evaluate(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = evaluate(d);
        }
        for cand in [fc, fd] {
            if cand.0 < best.0 {
                best = cand;
            }
        }
    }

    let (delay, beta, t_transmit, e_transmit) = best;
    let now = device_delay(td, current.beta, f_local, current.f_remote, current.t_transmit, s);
    if delay.is_finite() && delay < now {
        Some(DeviceAllocation {
            beta,
            t_transmit,
            e_transmit,
            ..*current
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_device;
    use crate::solver::transmit::transmit_bisection;

    fn feasible_upload(td: &TerminalDevice, beta: f64, cfg: &SystemConfig) -> (f64, f64) {
        transmit_bisection(td, beta, 1e9, cfg).unwrap()
    }

    #[test]
    fn reference_constants_take_upper_end() {
        let cfg = SystemConfig::default();
        let td = reference_device(200.0);
        let (t, e) = feasible_upload(&td, 0.8, &cfg);
        let beta = optimal_beta(&td, 1e9, 1.3e9, t, e, &cfg).unwrap();
        let (_, eta2) = beta_interval(&td, 1e9, t, e, td.semantics(&cfg), &cfg).unwrap();
        assert_eq!(beta, eta2);
        assert!((0.8..0.8 + 1e-5).contains(&beta), "{beta}");
    }

    #[test]
    fn stationary_point_value() {
        let td = reference_device(200.0);
        let s = SemanticParams {
            a: 1e-5,
            k: 4.0,
            p: 0.5,
        };
        let mu = stationary_point(&td, 1e9, 1e9, s);
        // (4e-5 / 35)^(1/4.5) at 40 digits.
        assert!((mu - 0.047_813_855_641_074_93).abs() < 1e-15, "{mu}");
        let cfg = SystemConfig {
            sem_p: 0.5,
            ..SystemConfig::default()
        };
        let (t, e) = feasible_upload(&td, 0.9, &cfg);
        let beta = optimal_beta(&td, 1e9, 1e9, t, e, &cfg).unwrap();
        assert_eq!(beta, td.beta_min);
    }

    #[test]
    fn degenerate_interval_returns_endpoint() {
        let cfg = SystemConfig::default();
        let td = TerminalDevice {
            beta_min: 1.0,
            ..reference_device(150.0)
        };
        let (t, e) = feasible_upload(&td, 1.0, &cfg);
        assert_eq!(optimal_beta(&td, 1e9, 1e9, t, e, &cfg).unwrap(), 1.0);
        let cfg_low_p = SystemConfig {
            sem_p: 0.4,
            ..cfg
        };
        assert_eq!(optimal_beta(&td, 1e9, 1e9, t, e, &cfg_low_p).unwrap(), 1.0);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let cfg = SystemConfig::default();
        let td = reference_device(150.0);
        // An upload sized for β = 0.5 cannot satisfy β_min = 0.6.
        let (t, e) = feasible_upload(&td, 0.5, &cfg);
        assert_eq!(
            optimal_beta(&td, 1e9, 1e9, t, e, &cfg),
            Err(FeasibilityCause::InvalidScenario)
        );
    }

    #[test]
    fn joint_update_escapes_frozen_upload() {
        // One device with the whole server: reducing β trades cheap remote
        // cycles for a shorter upload.
        let cfg = SystemConfig {
            n_devices: 1,
            ..SystemConfig::default()
        };
        let td = reference_device(200.0);
        let s = td.semantics(&cfg);
        let (t, e) = feasible_upload(&td, 1.0, &cfg);
        let row = DeviceAllocation {
            f_local: 1e9,
            f_remote: cfg.f_mec_total,
            t_transmit: t,
            e_transmit: e,
            beta: 1.0,
        };
        // The closed form alone stays put.
        let stuck = optimal_beta(&td, 1e9, cfg.f_mec_total, t, e, &cfg).unwrap();
        assert!(stuck > 1.0 - 1e-6);
        let moved = joint_update(&td, &row, s, &cfg).expect("improvement exists");
        assert!(moved.beta < 0.99, "{}", moved.beta);
        let before = device_delay(&td, 1.0, 1e9, cfg.f_mec_total, t, s);
        let after = device_delay(&td, moved.beta, 1e9, cfg.f_mec_total, moved.t_transmit, s);
        assert!(after < before);
    }
}
