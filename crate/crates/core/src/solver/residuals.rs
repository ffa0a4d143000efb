//! Signed slack of every constraint of the log-domain convex program.
//!
//! Variables enter through `β̃ = ln β`, `f̃_L = ln f_L`, `f̃_O = ln f_O`.
//! Positive slack means satisfied. Where a constraint only uses `e^{x̃}` on
//! its own, the original variable is used directly so no ln/exp round trip
//! perturbs an active constraint.

use crate::model::{deliverable_bits, Allocation, ModelError, SemanticParams, SystemConfig, TerminalDevice};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceResiduals {
    /// `t − (a·A·e^{−kβ̃−f̃_L} + t_T + A·I·e^{(1−p)β̃−f̃_O})`, s.
    pub delay: f64,
    /// `E − a·A·κ·e^{2f̃_L−kβ̃} − e_T`, J.
    pub energy: f64,
    /// `t_T·B·log₂(1 + h·e_T/(t_T·σ²)) − β·A`, bits.
    pub rate: f64,
    /// `ln f_max − f̃_L`.
    pub local_rate_cap: f64,
    /// `e_T`, J.
    pub tx_energy_floor: f64,
    /// `p_max·t_T − e_T`, J.
    pub tx_power_cap: f64,
    /// `β̃ − ln β_min`.
    pub beta_floor: f64,
    /// `−β̃`.
    pub beta_cap: f64,
}

impl DeviceResiduals {
    fn as_array(&self) -> [f64; 8] {
        [
            self.delay,
            self.energy,
            self.rate,
            self.local_rate_cap,
            self.tx_energy_floor,
            self.tx_power_cap,
            self.beta_floor,
            self.beta_cap,
        ]
    }

    /// Whether the local clock sits on one of its two upper bounds.
    pub fn local_rate_bound_active(&self, tol_log: f64, tol_energy: f64) -> bool {
        self.local_rate_cap <= tol_log || self.energy <= tol_energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintResiduals {
    pub devices: Vec<DeviceResiduals>,
    /// `F_MEC − Σ e^{f̃_O}`, Hz.
    pub capacity: f64,
}

impl ConstraintResiduals {
    /// All residuals in device-major order, then capacity.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.devices.iter().flat_map(|d| d.as_array()).collect();
        out.push(self.capacity);
        out
    }

    pub fn min_slack(&self) -> f64 {
        self.to_vec().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }
}

fn ln_positive(quantity: &'static str, x: f64) -> Result<f64, ModelError> {
    if x > 0.0 && x.is_finite() {
        Ok(x.ln())
    } else {
        Err(ModelError::Domain {
            quantity,
            requirement: "strictly positive before taking its logarithm",
            value: x,
        })
    }
}

/// Residuals with each device's own semantic constants.
pub fn log_domain_residuals(
    alloc: &Allocation,
    tds: &[TerminalDevice],
    cfg: &SystemConfig,
) -> Result<ConstraintResiduals, ModelError> {
    let sems: Vec<_> = tds.iter().map(|td| td.semantics(cfg)).collect();
    residuals_with(alloc, tds, &sems, cfg)
}

pub(crate) fn residuals_with(
    alloc: &Allocation,
    tds: &[TerminalDevice],
    sems: &[SemanticParams],
    cfg: &SystemConfig,
) -> Result<ConstraintResiduals, ModelError> {
    if alloc.devices.len() != tds.len() {
        return Err(ModelError::Invalid {
            location: "allocation".into(),
            field: "devices",
            reason: format!("has {} rows for {} devices", alloc.devices.len(), tds.len()),
        });
    }
    let mut devices = Vec::with_capacity(tds.len());
    for ((td, row), s) in tds.iter().zip(&alloc.devices).zip(sems) {
        let log_beta = ln_positive("beta", row.beta)?;
        let log_fl = ln_positive("f_local", row.f_local)?;
        let a_bits = s.a * td.task_bits;
        let (extraction_delay, extraction_energy) = if a_bits == 0.0 {
            (0.0, 0.0)
        } else {
            (
                a_bits * (-s.k * log_beta - log_fl).exp(),
                a_bits * td.energy_coeff * (2.0 * log_fl - s.k * log_beta).exp(),
            )
        };
        let remote_delay = if td.task_bits == 0.0 {
            0.0
        } else {
            let log_fo = ln_positive("f_remote", row.f_remote)?;
            td.task_bits * td.intensity * ((1.0 - s.p) * log_beta - log_fo).exp()
        };
        devices.push(DeviceResiduals {
            delay: alloc.t_epigraph - (extraction_delay + row.t_transmit + remote_delay),
            energy: td.energy_budget - extraction_energy - row.e_transmit,
            rate: deliverable_bits(td, row.e_transmit, row.t_transmit, cfg)
                - row.beta * td.task_bits,
            local_rate_cap: td.f_local_max.ln() - log_fl,
            tx_energy_floor: row.e_transmit,
            tx_power_cap: td.p_tx_max * row.t_transmit - row.e_transmit,
            beta_floor: log_beta - td.beta_min.ln(),
            beta_cap: -log_beta,
        });
    }
    Ok(ConstraintResiduals {
        devices,
        capacity: cfg.f_mec_total - alloc.total_remote(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_device, DeviceAllocation};

    #[test]
    fn fabricated_tight_point_has_zero_slack() {
        let cfg = SystemConfig {
            n_devices: 1,
            ..SystemConfig::default()
        };
        let td = TerminalDevice {
            task_bits: 0.0,
            energy_budget: 0.0,
            beta_min: 1.0,
            ..reference_device(150.0)
        };
        let alloc = Allocation {
            devices: vec![DeviceAllocation {
                f_local: td.f_local_max,
                f_remote: cfg.f_mec_total,
                t_transmit: 0.0,
                e_transmit: 0.0,
                beta: 1.0,
            }],
            t_epigraph: 0.0,
        };
        let r = log_domain_residuals(&alloc, &[td], &cfg).unwrap();
        assert!(r.to_vec().iter().all(|&x| x == 0.0), "{:?}", r);
    }

    #[test]
    fn nonpositive_variables_are_domain_errors() {
        let cfg = SystemConfig {
            n_devices: 1,
            ..SystemConfig::default()
        };
        let td = reference_device(150.0);
        let row = DeviceAllocation {
            f_local: 1e9,
            f_remote: 0.0,
            t_transmit: 0.2,
            e_transmit: 0.2,
            beta: 1.0,
        };
        let alloc = Allocation {
            devices: vec![row],
            t_epigraph: 1.0,
        };
        assert!(matches!(
            log_domain_residuals(&alloc, std::slice::from_ref(&td), &cfg),
            Err(ModelError::Domain { quantity: "f_remote", .. })
        ));
        let alloc = Allocation {
            devices: vec![DeviceAllocation { beta: 0.0, ..row }],
            t_epigraph: 1.0,
        };
        assert!(log_domain_residuals(&alloc, &[td], &cfg).is_err());
    }
}
