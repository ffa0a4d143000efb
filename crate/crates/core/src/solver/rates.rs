//! Local CPU frequency and server capacity split.

use super::{FeasibilityCause, FeasibilityError};
use crate::model::{SemanticParams, SystemConfig, TerminalDevice};

/// Relative gap between `F_MEC` and the assigned capacity below which the
/// capacity search stops refining once the bracket is below `ε₁`.
pub(crate) const CAPACITY_GAP: f64 = 1e-12;

/// Fastest local clock the energy budget allows once `e_transmit` is spent
/// on the upload: `min{f_max, sqrt(β^k·(E − e_T)/(a·A·κ))}`.
pub fn optimal_local_rate(
    td: &TerminalDevice,
    beta: f64,
    e_transmit: f64,
    cfg: &SystemConfig,
) -> Result<f64, FeasibilityCause> {
    local_rate_with(td, beta, e_transmit, td.semantics(cfg))
}

pub(crate) fn local_rate_with(
    td: &TerminalDevice,
    beta: f64,
    e_transmit: f64,
    s: SemanticParams,
) -> Result<f64, FeasibilityCause> {
    if !(beta > 0.0 && beta <= 1.0) || !(e_transmit >= 0.0) {
        return Err(FeasibilityCause::InvalidScenario);
    }
    let work = s.a * td.task_bits;
    if work == 0.0 {
        return Ok(td.f_local_max);
    }
    let residual = td.energy_budget - e_transmit;
    if residual <= 0.0 {
        return Err(FeasibilityCause::ExtractionEnergyExceedsBudget);
    }
    let unclamped = (beta.powf(s.k) * residual / (work * td.energy_coeff)).sqrt();
    Ok(unclamped.min(td.f_local_max))
}

/// Splits the server capacity so every device finishes at the same epigraph
/// value `t`, bisecting on `t` between the equal-split bound and the
/// whole-server bound.
///
/// Returns `t` and the per-device capacity. Devices with nothing to compute
/// remotely receive zero and do not enter the bracket.
pub fn remote_rate_bisection(
    tds: &[TerminalDevice],
    beta: &[f64],
    f_local: &[f64],
    t_transmit: &[f64],
    cfg: &SystemConfig,
) -> Result<(f64, Vec<f64>), FeasibilityError> {
    let sems: Vec<_> = tds.iter().map(|td| td.semantics(cfg)).collect();
    remote_with(tds, &sems, beta, f_local, t_transmit, cfg)
}

pub(crate) fn remote_with(
    tds: &[TerminalDevice],
    sems: &[SemanticParams],
    beta: &[f64],
    f_local: &[f64],
    t_transmit: &[f64],
    cfg: &SystemConfig,
) -> Result<(f64, Vec<f64>), FeasibilityError> {
    let n = tds.len();
    assert!(
        beta.len() == n && f_local.len() == n && t_transmit.len() == n && sems.len() == n,
        "per-device inputs must all have one entry per device"
    );
    let invalid = |i| FeasibilityError {
        device_index: i,
        cause: FeasibilityCause::InvalidScenario,
    };

    // Delay that does not depend on f_O, and the cycles executed remotely.
    let mut fixed = vec![0.0; n];
    let mut work = vec![0.0; n];
    for i in 0..n {
        let (td, s, b) = (&tds[i], sems[i], beta[i]);
        if td.task_bits == 0.0 {
            continue;
        }
        if !(b > 0.0 && b <= 1.0) {
            return Err(invalid(i));
        }
        let extraction = if s.a == 0.0 {
            0.0
        } else {
            s.a * td.task_bits / (b.powf(s.k) * f_local[i])
        };
        fixed[i] = extraction + t_transmit[i];
        work[i] = td.task_bits * td.intensity * b.powf(1.0 - s.p);
        if !(fixed[i].is_finite() && work[i].is_finite() && work[i] > 0.0) {
            return Err(invalid(i));
        }
    }
    let active: Vec<usize> = (0..n).filter(|&i| work[i] > 0.0).collect();
    let capacity = cfg.f_mec_total;
    if active.is_empty() {
        let t = fixed.iter().copied().fold(0.0, f64::max);
        return Ok((t, vec![0.0; n]));
    }

    let share = active.len() as f64;
    let upper = |i: usize| fixed[i] + work[i] * share / capacity;
    let lower = |i: usize| fixed[i] + work[i] / capacity;
    let mut t_hi = active.iter().map(|&i| upper(i)).fold(f64::MIN, f64::max);
    let mut t_lo = active.iter().map(|&i| lower(i)).fold(f64::MIN, f64::max);
    for &i in &active {
        if !(t_hi - fixed[i] > 0.0) {
            return Err(invalid(i));
        }
    }

    // Total capacity needed to finish everyone by `t`, or None when some
    // device cannot finish by `t` at all.
    let demand = |t: f64| -> Option<f64> {
        let guard = 1e-15 * t.abs().max(1.0);
        let mut total = 0.0;
        for &i in &active {
            let slack = t - fixed[i];
            if slack <= guard {
                return None;
            }
            total += work[i] / slack;
        }
        Some(total)
    };

    let mut demand_hi = demand(t_hi).ok_or_else(|| invalid(active[0]))?;
    for _ in 0..400 {
        let bracket_done = t_hi - t_lo <= cfg.eps_bisect_capacity;
        if bracket_done && capacity - demand_hi <= CAPACITY_GAP * capacity {
            break;
        }
        let mid = 0.5 * (t_lo + t_hi);
        if mid <= t_lo || mid >= t_hi {
            break;
        }
        match demand(mid) {
            Some(d) if d < capacity => {
                t_hi = mid;
                demand_hi = d;
            }
            _ => t_lo = mid,
        }
    }

    let mut f_remote = vec![0.0; n];
    for &i in &active {
        f_remote[i] = work[i] / (t_hi - fixed[i]);
    }
    clamp_to_capacity(&mut f_remote, capacity);
    Ok((t_hi, f_remote))
}

/// Scales down by the smallest factor that brings the sum within `capacity`.
fn clamp_to_capacity(f_remote: &mut [f64], capacity: f64) {
    let mut total: f64 = f_remote.iter().sum();
    if total <= capacity {
        return;
    }
    let mut scale = capacity / total;
    loop {
        f_remote.iter_mut().for_each(|f| *f *= scale);
        total = f_remote.iter().sum();
        if total <= capacity {
            return;
        }
        scale = 1.0 - 4.0 * f64::EPSILON;
    }
}
