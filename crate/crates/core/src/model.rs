//! System model: terminal devices, shared configuration, decision variables,
//! and the closed-form delay, energy and rate formulas they feed.
//!
//! Units are fixed by the types (bits, Hz, W, J, s). Nothing here converts
//! units implicitly except the noise power, which is derived from the noise
//! power spectral density and the sub-channel bandwidth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{quantity} must be {requirement}, got {value}")]
    Domain {
        quantity: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("division by zero: {quantity} is zero for a nonzero task")]
    DivisionByZero { quantity: &'static str },
    #[error("invalid {location}: {field} {reason}")]
    Invalid {
        location: String,
        field: &'static str,
        reason: String,
    },
}

fn domain(quantity: &'static str, requirement: &'static str, value: f64) -> ModelError {
    ModelError::Domain {
        quantity,
        requirement,
        value,
    }
}

/// Constants of the extraction workload `C = a·A/β^k` and the intensity
/// ratio `G = 1/β^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticParams {
    pub a: f64,
    pub k: f64,
    pub p: f64,
}

impl SemanticParams {
    /// Raw upload: no extraction pass, so `C = 0` for every β.
    pub(crate) fn without_extraction(self) -> Self {
        Self { a: 0.0, ..self }
    }
}

/// One terminal device with its task and hardware limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalDevice {
    /// Task size, bits.
    pub task_bits: f64,
    /// CPU cycles per raw-data bit.
    pub intensity: f64,
    /// Effective switched capacitance, J·s²/cycle³.
    pub energy_coeff: f64,
    /// Maximum local CPU frequency, Hz.
    pub f_local_max: f64,
    /// Maximum transmit power, W.
    pub p_tx_max: f64,
    /// Smallest admissible extraction factor.
    pub beta_min: f64,
    /// Energy budget, J.
    pub energy_budget: f64,
    /// Linear power gain to the base station.
    pub channel_gain: f64,
    /// Distance used to derive `channel_gain`, if any, in meters.
    pub distance: Option<f64>,
    /// Device-specific semantic constants; the system-wide ones apply when absent.
    pub semantics: Option<SemanticParams>,
}

impl TerminalDevice {
    pub fn semantics(&self, cfg: &SystemConfig) -> SemanticParams {
        self.semantics.unwrap_or_else(|| cfg.semantics())
    }

    /// Rejects anything violating the field invariants.
    pub fn validate(&self, index: usize) -> Result<(), ModelError> {
        let location = format!("device {index}");
        let positive = [
            ("intensity", self.intensity),
            ("energy_coeff", self.energy_coeff),
            ("f_local_max", self.f_local_max),
            ("p_tx_max", self.p_tx_max),
            ("energy_budget", self.energy_budget),
            ("channel_gain", self.channel_gain),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::Invalid {
                    location,
                    field,
                    reason: format!("must be finite and strictly positive, got {value}"),
                });
            }
        }
        if !(self.task_bits.is_finite() && self.task_bits >= 0.0) {
            return Err(ModelError::Invalid {
                location,
                field: "task_bits",
                reason: format!("must be finite and nonnegative, got {}", self.task_bits),
            });
        }
        if !(self.beta_min > 0.0 && self.beta_min <= 1.0) {
            return Err(ModelError::Invalid {
                location,
                field: "beta_min",
                reason: format!("must lie in (0, 1], got {}", self.beta_min),
            });
        }
        if let Some(d) = self.distance {
            if !(d.is_finite() && d > 0.0) {
                return Err(ModelError::Invalid {
                    location,
                    field: "distance",
                    reason: format!("must be strictly positive, got {d}"),
                });
            }
        }
        if let Some(s) = self.semantics {
            validate_semantics(&location, s)?;
        }
        Ok(())
    }
}

fn validate_semantics(location: &str, s: SemanticParams) -> Result<(), ModelError> {
    for (field, value) in [("sem_a", s.a), ("sem_k", s.k), ("sem_p", s.p)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::Invalid {
                location: location.to_string(),
                field,
                reason: format!("must be finite and strictly positive, got {value}"),
            });
        }
    }
    Ok(())
}

/// Parameters shared by all devices plus solver tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n_devices: usize,
    /// Bandwidth of one sub-channel, Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Total MEC server capacity, Hz.
    pub f_mec_total: f64,
    pub sem_a: f64,
    pub sem_k: f64,
    pub sem_p: f64,
    /// Bracket width at which the capacity bisection stops, s.
    pub eps_bisect_capacity: f64,
    /// Bracket width at which the transmit-time bisection stops, s.
    pub eps_bisect_transmit: f64,
    /// Relative objective change that ends the alternating loop.
    pub eps_outer: f64,
    pub max_outer_iters: usize,
}

impl Default for SystemConfig {
    /// The reference setup: 10 devices, 1 MHz sub-channels, -174 dBm/Hz,
    /// 13 GHz of server capacity, `a = 1e-5`, `k = 4`, `p = 3`.
    fn default() -> Self {
        Self {
            n_devices: 10,
            bandwidth_hz: 1e6,
            noise_psd_dbm_hz: -174.0,
            f_mec_total: 13e9,
            sem_a: 1e-5,
            sem_k: 4.0,
            sem_p: 3.0,
            eps_bisect_capacity: 1e-7,
            eps_bisect_transmit: 1e-7,
            eps_outer: 1e-6,
            max_outer_iters: 100,
        }
    }
}

impl SystemConfig {
    pub fn semantics(&self) -> SemanticParams {
        SemanticParams {
            a: self.sem_a,
            k: self.sem_k,
            p: self.sem_p,
        }
    }

    /// Noise power over one sub-channel, W.
    pub fn noise_power_w(&self) -> f64 {
        let dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10();
        10f64.powf(dbm / 10.0) / 1000.0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let location = "system".to_string();
        if self.n_devices == 0 {
            return Err(ModelError::Invalid {
                location,
                field: "n_devices",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_outer_iters == 0 {
            return Err(ModelError::Invalid {
                location,
                field: "max_outer_iters",
                reason: "must be at least 1".into(),
            });
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(ModelError::Invalid {
                location,
                field: "noise_psd_dbm_hz",
                reason: format!("must be finite, got {}", self.noise_psd_dbm_hz),
            });
        }
        let positive = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("f_mec_total", self.f_mec_total),
            ("eps_bisect_capacity", self.eps_bisect_capacity),
            ("eps_bisect_transmit", self.eps_bisect_transmit),
            ("eps_outer", self.eps_outer),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::Invalid {
                    location,
                    field,
                    reason: format!("must be finite and strictly positive, got {value}"),
                });
            }
        }
        validate_semantics(&location, self.semantics())
    }
}

/// Checks the system, every device, and that the device count matches.
pub fn validate_inputs(tds: &[TerminalDevice], cfg: &SystemConfig) -> Result<(), ModelError> {
    cfg.validate()?;
    if tds.len() != cfg.n_devices {
        return Err(ModelError::Invalid {
            location: "system".into(),
            field: "n_devices",
            reason: format!("is {} but {} devices were given", cfg.n_devices, tds.len()),
        });
    }
    tds.iter().enumerate().try_for_each(|(i, td)| td.validate(i))
}

/// Decision variables of a single device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceAllocation {
    /// Local CPU frequency, Hz.
    pub f_local: f64,
    /// Server capacity assigned to this device, Hz.
    pub f_remote: f64,
    /// Upload time, s.
    pub t_transmit: f64,
    /// Upload energy, J.
    pub e_transmit: f64,
    /// Extraction factor.
    pub beta: f64,
}

/// A complete decision vector plus the epigraph value bounding every delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub devices: Vec<DeviceAllocation>,
    pub t_epigraph: f64,
}

impl Allocation {
    pub fn total_remote(&self) -> f64 {
        self.devices.iter().map(|d| d.f_remote).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayBreakdown {
    pub t_local: f64,
    pub t_transmit: f64,
    pub t_remote: f64,
    pub total: f64,
}

impl DelayBreakdown {
    pub fn new(t_local: f64, t_transmit: f64, t_remote: f64) -> Self {
        Self {
            t_local,
            t_transmit,
            t_remote,
            total: t_local + t_transmit + t_remote,
        }
    }

    pub const ZERO: Self = Self {
        t_local: 0.0,
        t_transmit: 0.0,
        t_remote: 0.0,
        total: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub e_compute: f64,
    pub e_transmit: f64,
    pub total: f64,
}

fn check_beta(beta: f64) -> Result<(), ModelError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(domain("beta", "strictly positive", beta))
    }
}

/// Extraction workload in CPU cycles, `a·A/β^k`.
pub fn extraction_workload(
    td: &TerminalDevice,
    beta: f64,
    cfg: &SystemConfig,
) -> Result<f64, ModelError> {
    check_beta(beta)?;
    let s = td.semantics(cfg);
    Ok(s.a * td.task_bits / beta.powf(s.k))
}

/// Server-side intensity multiplier `1/β^p`.
pub fn intensity_ratio(beta: f64, cfg: &SystemConfig) -> Result<f64, ModelError> {
    check_beta(beta)?;
    Ok(beta.powf(-cfg.sem_p))
}

/// Shannon rate in bits/s at transmit power `p_tx`.
pub fn achievable_rate(
    td: &TerminalDevice,
    p_tx: f64,
    cfg: &SystemConfig,
) -> Result<f64, ModelError> {
    if !(p_tx >= 0.0) {
        return Err(domain("p_tx", "nonnegative", p_tx));
    }
    Ok(shannon_rate(td.channel_gain, p_tx, cfg))
}

pub(crate) fn shannon_rate(gain: f64, power: f64, cfg: &SystemConfig) -> f64 {
    let snr = gain * power / cfg.noise_power_w();
    cfg.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

/// Bits delivered in `t` seconds using `e` joules: `t·B·log₂(1 + h·e/(t·σ²))`.
///
/// This is the perspective of the rate function and is jointly concave in
/// `(e, t)`. Zero time delivers nothing.
pub fn deliverable_bits(td: &TerminalDevice, e: f64, t: f64, cfg: &SystemConfig) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t * shannon_rate(td.channel_gain, e / t, cfg)
}

/// Delay components for one device under one allocation row.
pub fn delay_breakdown(
    td: &TerminalDevice,
    row: &DeviceAllocation,
    cfg: &SystemConfig,
) -> Result<DelayBreakdown, ModelError> {
    delay_with(td, row, td.semantics(cfg))
}

pub(crate) fn delay_with(
    td: &TerminalDevice,
    row: &DeviceAllocation,
    s: SemanticParams,
) -> Result<DelayBreakdown, ModelError> {
    if td.task_bits == 0.0 {
        return Ok(DelayBreakdown::ZERO);
    }
    check_beta(row.beta)?;
    let t_local = if s.a == 0.0 {
        0.0
    } else if row.f_local == 0.0 {
        return Err(ModelError::DivisionByZero { quantity: "f_local" });
    } else {
        s.a * td.task_bits / (row.beta.powf(s.k) * row.f_local)
    };
    if row.f_remote == 0.0 {
        return Err(ModelError::DivisionByZero {
            quantity: "f_remote",
        });
    }
    let t_remote = td.task_bits * td.intensity * row.beta.powf(1.0 - s.p) / row.f_remote;
    Ok(DelayBreakdown::new(t_local, row.t_transmit, t_remote))
}

/// Energy spent on extraction and on the upload.
pub fn energy_breakdown(
    td: &TerminalDevice,
    row: &DeviceAllocation,
    cfg: &SystemConfig,
) -> Result<EnergyBreakdown, ModelError> {
    energy_with(td, row, td.semantics(cfg))
}

pub(crate) fn energy_with(
    td: &TerminalDevice,
    row: &DeviceAllocation,
    s: SemanticParams,
) -> Result<EnergyBreakdown, ModelError> {
    let e_compute = if td.task_bits == 0.0 || s.a == 0.0 {
        0.0
    } else {
        check_beta(row.beta)?;
        s.a * td.task_bits * td.energy_coeff * row.f_local * row.f_local / row.beta.powf(s.k)
    };
    Ok(EnergyBreakdown {
        e_compute,
        e_transmit: row.e_transmit,
        total: e_compute + row.e_transmit,
    })
}

/// Path loss in dB at `distance_m` meters: `128.1 + 37.6·log₁₀(d/1 km)`.
pub fn path_loss_db(distance_m: f64) -> f64 {
    128.1 + 37.6 * (distance_m / 1000.0).log10()
}

/// Linear channel gains from distances, optionally with unit-mean
/// exponential (Rayleigh power) fading drawn from a seeded generator.
pub fn generate_channel_gains(
    distances: &[f64],
    fading_seed: Option<u64>,
) -> Result<Vec<f64>, ModelError> {
    if let Some(&d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(domain("distance", "strictly positive", d));
    }
    let mut rng = fading_seed.map(ChaCha8Rng::seed_from_u64);
    Ok(distances
        .iter()
        .map(|&d| {
            let gain = 10f64.powf(-path_loss_db(d) / 10.0);
            match rng.as_mut() {
                Some(rng) => {
                    let fade: f64 = Exp1.sample(rng);
                    gain * fade
                }
                None => gain,
            }
        })
        .collect())
}

/// `n` equally spaced points from `lo` to `hi`, both included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// A device with the reference parameters: 3 Mbit task, 70 cycles/bit,
/// `κ = 1e-26`, 1 GHz, 1 W, `β_min = 0.6`, 0.5 J, at `distance_m`.
pub fn reference_device(distance_m: f64) -> TerminalDevice {
    TerminalDevice {
        task_bits: 3e6,
        intensity: 70.0,
        energy_coeff: 1e-26,
        f_local_max: 1e9,
        p_tx_max: 1.0,
        beta_min: 0.6,
        energy_budget: 0.5,
        channel_gain: 10f64.powf(-path_loss_db(distance_m) / 10.0),
        distance: Some(distance_m),
        semantics: None,
    }
}

/// The reference scenario: `n` devices evenly spaced over 120–255 m.
pub fn reference_scenario(n: usize) -> (Vec<TerminalDevice>, SystemConfig) {
    let cfg = SystemConfig {
        n_devices: n,
        ..SystemConfig::default()
    };
    let tds = linspace(120.0, 255.0, n)
        .into_iter()
        .map(reference_device)
        .collect();
    (tds, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn td() -> TerminalDevice {
        reference_device(150.0)
    }

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn workload_values() {
        let cfg = SystemConfig::default();
        assert!(rel_eq(extraction_workload(&td(), 1.0, &cfg).unwrap(), 30.0, 1e-15));
        // a·A/0.6⁴ evaluated at 40 digits.
        let c = extraction_workload(&td(), 0.6, &cfg).unwrap();
        assert!(rel_eq(c, 231.481_481_481_481_48, 1e-14));
        let empty = TerminalDevice {
            task_bits: 0.0,
            ..td()
        };
        assert_eq!(extraction_workload(&empty, 0.3, &cfg).unwrap(), 0.0);
        assert!(matches!(
            extraction_workload(&td(), 0.0, &cfg),
            Err(ModelError::Domain { .. })
        ));
        assert!(extraction_workload(&td(), -0.5, &cfg).is_err());
    }

    #[test]
    fn intensity_values() {
        let mut cfg = SystemConfig::default();
        assert_eq!(intensity_ratio(1.0, &cfg).unwrap(), 1.0);
        assert!(rel_eq(intensity_ratio(0.5, &cfg).unwrap(), 8.0, 1e-15));
        cfg.sem_p = 1.0;
        assert!(rel_eq(intensity_ratio(0.5, &cfg).unwrap(), 2.0, 1e-15));
        assert!(intensity_ratio(0.0, &cfg).is_err());
    }

    #[test]
    fn rate_values() {
        let cfg = SystemConfig::default();
        let sigma2 = cfg.noise_power_w();
        assert!(rel_eq(sigma2, 3.981_071_705_534_972e-15, 1e-12));
        let dev = TerminalDevice {
            channel_gain: sigma2,
            ..td()
        };
        assert_eq!(achievable_rate(&dev, 0.0, &cfg).unwrap(), 0.0);
        assert!(rel_eq(achievable_rate(&dev, 1.0, &cfg).unwrap(), 1e6, 1e-12));
        assert!(rel_eq(achievable_rate(&dev, 3.0, &cfg).unwrap(), 2e6, 1e-12));
        assert!(achievable_rate(&dev, -1.0, &cfg).is_err());
    }

    #[test]
    fn delay_values() {
        let cfg = SystemConfig::default();
        let row = DeviceAllocation {
            f_local: 1e9,
            f_remote: 1e9,
            t_transmit: 0.1,
            e_transmit: 0.1,
            beta: 1.0,
        };
        let d = delay_breakdown(&td(), &row, &cfg).unwrap();
        assert!(rel_eq(d.t_remote, 0.21, 1e-14));
        assert!(rel_eq(d.t_local, 3e-8, 1e-14));
        assert_eq!(d.t_transmit, 0.1);
        assert_eq!(d.total, d.t_local + d.t_transmit + d.t_remote);

        let empty = TerminalDevice {
            task_bits: 0.0,
            ..td()
        };
        let zero_row = DeviceAllocation {
            f_local: 0.0,
            f_remote: 0.0,
            t_transmit: 0.0,
            e_transmit: 0.0,
            beta: 1.0,
        };
        assert_eq!(
            delay_breakdown(&empty, &zero_row, &cfg).unwrap(),
            DelayBreakdown::ZERO
        );
        let no_local = DeviceAllocation {
            f_local: 0.0,
            ..row
        };
        assert_eq!(
            delay_breakdown(&td(), &no_local, &cfg),
            Err(ModelError::DivisionByZero { quantity: "f_local" })
        );
        let no_remote = DeviceAllocation {
            f_remote: 0.0,
            ..row
        };
        assert!(delay_breakdown(&td(), &no_remote, &cfg).is_err());
    }

    #[test]
    fn energy_values() {
        let cfg = SystemConfig::default();
        let row = DeviceAllocation {
            f_local: 1e9,
            f_remote: 1e9,
            t_transmit: 0.2,
            e_transmit: 0.1,
            beta: 1.0,
        };
        let e = energy_breakdown(&td(), &row, &cfg).unwrap();
        // a·A·κ·f_L² = 30 · 1e-26 · 1e18.
        assert!(rel_eq(e.e_compute, 3e-7, 1e-14));
        assert_eq!(e.e_transmit, 0.1);
        let empty = TerminalDevice {
            task_bits: 0.0,
            ..td()
        };
        assert_eq!(energy_breakdown(&empty, &row, &cfg).unwrap().e_compute, 0.0);
    }

    #[test]
    fn channel_gain_values() {
        let g = generate_channel_gains(&[1000.0, 100.0], None).unwrap();
        assert!(rel_eq(g[0], 1.548_816_618_912_481_3e-13, 1e-12));
        assert!(rel_eq(g[1], 8.912_509_381_337_455e-10, 1e-12));
        let a = generate_channel_gains(&[120.0, 200.0, 255.0], Some(7)).unwrap();
        let b = generate_channel_gains(&[120.0, 200.0, 255.0], Some(7)).unwrap();
        assert_eq!(a, b);
        let c = generate_channel_gains(&[120.0, 200.0, 255.0], Some(8)).unwrap();
        assert_ne!(a, c);
        assert!(generate_channel_gains(&[100.0, 0.0], None).is_err());
        assert!(generate_channel_gains(&[-3.0], Some(1)).is_err());
    }

    #[test]
    fn fading_has_unit_mean() {
        let n = 20_000;
        let g = generate_channel_gains(&vec![1000.0; n], Some(42)).unwrap();
        let base = 10f64.powf(-12.81);
        let mean = g.iter().sum::<f64>() / n as f64 / base;
        assert!((mean - 1.0).abs() < 0.03, "mean fade {mean}");
    }

    #[test]
    fn validation() {
        let (tds, cfg) = reference_scenario(10);
        validate_inputs(&tds, &cfg).unwrap();
        let mut bad = tds.clone();
        bad[3].beta_min = 1.5;
        let err = validate_inputs(&bad, &cfg).unwrap_err();
        assert!(err.to_string().contains("beta_min"), "{err}");
        assert!(validate_inputs(&tds[..9], &cfg).is_err());
        let cfg0 = SystemConfig {
            sem_p: 0.0,
            ..cfg.clone()
        };
        assert!(validate_inputs(&tds, &cfg0).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(120.0, 255.0, 10);
        assert_eq!(xs.len(), 10);
        assert_eq!(xs[0], 120.0);
        assert_eq!(xs[9], 255.0);
        assert!((xs[1] - 135.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn workload_strictly_decreasing(
            a in 1e-8f64..1.0, k in 0.1f64..8.0,
            b1 in 0.01f64..1.0, b2 in 0.01f64..1.0,
        ) {
            prop_assume!((b1 - b2).abs() > 1e-9);
            let cfg = SystemConfig { sem_a: a, sem_k: k, ..SystemConfig::default() };
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let c_lo = extraction_workload(&td(), lo, &cfg).unwrap();
            let c_hi = extraction_workload(&td(), hi, &cfg).unwrap();
            prop_assert!(c_lo > c_hi);
        }

        #[test]
        fn intensity_ratio_one_at_raw(p in 1e-3f64..10.0) {
            let cfg = SystemConfig { sem_p: p, ..SystemConfig::default() };
            prop_assert_eq!(intensity_ratio(1.0, &cfg).unwrap(), 1.0);
        }

        #[test]
        fn rate_concave_in_power(p1 in 0.0f64..2.0, p2 in 0.0f64..2.0) {
            let cfg = SystemConfig::default();
            let r = |p| achievable_rate(&td(), p, &cfg).unwrap();
            let scale = r(2.0);
            prop_assert!(r(0.5 * (p1 + p2)) >= 0.5 * (r(p1) + r(p2)) - 1e-12 * scale);
        }

        #[test]
        fn perspective_concave(
            e1 in 1e-4f64..1.0, t1 in 1e-3f64..2.0,
            e2 in 1e-4f64..1.0, t2 in 1e-3f64..2.0,
        ) {
            let cfg = SystemConfig::default();
            let f = |e, t| deliverable_bits(&td(), e, t, &cfg);
            let mid = f(0.5 * (e1 + e2), 0.5 * (t1 + t2));
            let chord = 0.5 * (f(e1, t1) + f(e2, t2));
            prop_assert!(mid >= chord - 1e-9 * mid.abs().max(1.0));
        }

        #[test]
        fn total_is_exact_sum(
            beta in 0.1f64..1.0, fl in 1e6f64..1e9, fo in 1e6f64..1e10, tt in 0.0f64..1.0,
        ) {
            let cfg = SystemConfig::default();
            let row = DeviceAllocation { f_local: fl, f_remote: fo, t_transmit: tt, e_transmit: 0.0, beta };
            let d = delay_breakdown(&td(), &row, &cfg).unwrap();
            prop_assert_eq!(d.total, d.t_local + d.t_transmit + d.t_remote);
        }
    }
}
