//! Upload time and energy for a fixed extraction factor and local clock.

use super::FeasibilityCause;
use crate::model::{deliverable_bits, shannon_rate, SemanticParams, SystemConfig, TerminalDevice};

/// Largest factor by which the initial upper bracket may be doubled.
const MAX_BRACKET_GROWTH: f64 = (1u64 << 60) as f64;
/// Relative bracket width below which the search stops refining once the
/// bracket is below `ε₂`.
pub(crate) const TIME_RESOLUTION: f64 = 1e-13;

/// Shortest upload time (within `ε₂`) that delivers `β·A` bits, and the
/// energy spent doing so.
///
/// The energy allowed at time `t` is `ν(t) = min{E − a·A·κ·f_L²/β^k, p_max·t}`;
/// the returned energy is `ν` at the returned time.
pub fn transmit_bisection(
    td: &TerminalDevice,
    beta: f64,
    f_local: f64,
    cfg: &SystemConfig,
) -> Result<(f64, f64), FeasibilityCause> {
    transmit_with(td, beta, f_local, td.semantics(cfg), cfg)
}

/// Energy left for the upload after extraction.
pub(crate) fn upload_budget(td: &TerminalDevice, beta: f64, f_local: f64, s: SemanticParams) -> f64 {
    if s.a == 0.0 || td.task_bits == 0.0 {
        return td.energy_budget;
    }
    td.energy_budget
        - s.a * td.task_bits * td.energy_coeff * f_local * f_local / beta.powf(s.k)
}

pub(crate) fn transmit_with(
    td: &TerminalDevice,
    beta: f64,
    f_local: f64,
    s: SemanticParams,
    cfg: &SystemConfig,
) -> Result<(f64, f64), FeasibilityCause> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(FeasibilityCause::InvalidScenario);
    }
    let bits = beta * td.task_bits;
    if bits == 0.0 {
        return Ok((0.0, 0.0));
    }
    let budget = upload_budget(td, beta, f_local, s);
    if !(budget > 0.0) {
        return Err(FeasibilityCause::ExtractionEnergyExceedsBudget);
    }
    let energy_at = |t: f64| budget.min(td.p_tx_max * t);
    let delivers = |t: f64| deliverable_bits(td, energy_at(t), t, cfg) >= bits;

    // Time at the rate of a one-second burst of the allowed power.
    let first_guess = bits / shannon_rate(td.channel_gain, td.p_tx_max.min(budget), cfg);
    if !(first_guess.is_finite() && first_guess > 0.0) {
        return Err(FeasibilityCause::RateCapTooLow);
    }
    let mut ub = first_guess;
    while !delivers(ub) {
        ub *= 2.0;
        if ub > first_guess * MAX_BRACKET_GROWTH {
            return Err(FeasibilityCause::RateCapTooLow);
        }
    }

    let mut lb = 0.0;
    while ub - lb > cfg.eps_bisect_transmit || ub - lb > TIME_RESOLUTION * ub {
        let mid = 0.5 * (lb + ub);
        if mid <= lb || mid >= ub {
            break;
        }
        if delivers(mid) {
            ub = mid;
        } else {
            lb = mid;
        }
    }
    Ok((ub, energy_at(ub)))
}
