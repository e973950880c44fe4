//! Energy detection: per-(SU, band) accumulated RSS and 1-bit hard decisions.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sim::{self, PuState, ShadowField, Topology};

/// PU absent (`H0`) or present (`H1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn from_active(active: bool) -> Self {
        if active {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }

    /// Class index: 0 for `H0`, 1 for `H1`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Hypothesis::H0),
            1 => Some(Hypothesis::H1),
            _ => None,
        }
    }
}

/// Soft (raw energy) or hard (1-bit) reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReportMode {
    #[serde(rename = "SD")]
    Sd,
    #[serde(rename = "HD")]
    Hd,
}

impl ReportMode {
    pub fn name(self) -> &'static str {
        match self {
            ReportMode::Sd => "SD",
            ReportMode::Hd => "HD",
        }
    }
}

/// `n_su × n_bands` grid of sensing reports, row-major (one row per SU).
/// SD entries are linear powers in watts, HD entries are 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingMatrix {
    pub mode: ReportMode,
    pub n_su: usize,
    pub n_bands: usize,
    pub values: Vec<f64>,
}

impl SensingMatrix {
    pub fn new(mode: ReportMode, n_su: usize, n_bands: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_su * n_bands {
            return Err(Error::Shape(alloc::format!(
                "{} values for a {n_su}×{n_bands} matrix",
                values.len()
            )));
        }
        let m = Self { mode, n_su, n_bands, values };
        m.check()?;
        Ok(m)
    }

    /// Check the per-mode value domain.
    pub fn check(&self) -> Result<()> {
        let ok = match self.mode {
            ReportMode::Sd => self.values.iter().all(|v| v.is_finite() && *v > 0.0),
            ReportMode::Hd => self.values.iter().all(|v| *v == 0.0 || *v == 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!(
                "{} matrix holds values outside its domain",
                self.mode.name()
            )))
        }
    }

    pub fn get(&self, su: usize, band: usize) -> f64 {
        self.values[su * self.n_bands + band]
    }

    pub fn row(&self, su: usize) -> &[f64] {
        &self.values[su * self.n_bands..(su + 1) * self.n_bands]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_su, self.n_bands)
    }

    pub(crate) fn require(&self, mode: ReportMode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch { expected: mode.name(), found: self.mode.name() })
        }
    }
}

/// Average received energy `(1/N) Σ |y(m)|²`.
pub fn accumulate_energy(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let sum: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
    Ok(sum / samples.len() as f64)
}

/// Run energy detection on every band at every SU.
pub fn sense_snapshot<R: Rng + ?Sized>(
    topo: &Topology,
    pu: &PuState,
    shadow: &ShadowField,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<SensingMatrix> {
    let n_su = topo.n_su();
    if shadow.values_db.len() != n_su || pu.n_bands() != cfg.n_bands {
        return Err(Error::Shape("topology, shadowing and band plan disagree".into()));
    }
    let noise = cfg.noise_power_w();
    let mut values = Vec::with_capacity(n_su * cfg.n_bands);
    let mut buf = Vec::with_capacity(cfg.n_ed);
    for su in 0..n_su {
        for band in 0..cfg.n_bands {
            let signal = sim::band_signal_power(topo, pu, shadow, su, band, cfg);
            sim::fill_samples(signal, noise, cfg.n_ed, cfg.multipath, rng, &mut buf);
            values.push(accumulate_energy(&buf)?);
        }
    }
    Ok(SensingMatrix { mode: ReportMode::Sd, n_su, n_bands: cfg.n_bands, values })
}

/// Threshold an SD matrix: 1 where `γ ≤ T`, compared in watts.
pub fn hard_decision(sd: &SensingMatrix, gamma_dbm: f64) -> Result<SensingMatrix> {
    sd.require(ReportMode::Sd)?;
    let gamma = crate::math::dbm_to_watts(gamma_dbm);
    let values = sd.values.iter().map(|&t| if t >= gamma { 1.0 } else { 0.0 }).collect();
    Ok(SensingMatrix { mode: ReportMode::Hd, n_su: sd.n_su, n_bands: sd.n_bands, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::dbm_to_watts;
    use crate::rng::{stream, Lineage};
    use alloc::vec;

    #[test]
    fn energy_of_unit_samples() {
        let ones = vec![Complex64::new(1.0, 0.0); 17];
        assert_eq!(accumulate_energy(&ones).unwrap(), 1.0);
        let quad = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        assert_eq!(accumulate_energy(&quad).unwrap(), 1.0);
        assert_eq!(accumulate_energy(&[]), Err(Error::EmptySamples));
    }

    fn sd(values: Vec<f64>, n_su: usize, n_bands: usize) -> SensingMatrix {
        SensingMatrix::new(ReportMode::Sd, n_su, n_bands, values).unwrap()
    }

    #[test]
    fn threshold_direction_and_boundary() {
        let m = sd(vec![dbm_to_watts(-90.0), dbm_to_watts(-107.0), dbm_to_watts(-120.0)], 1, 3);
        let hd = hard_decision(&m, -107.0).unwrap();
        assert_eq!(hd.mode, ReportMode::Hd);
        assert_eq!(hd.values, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn infinite_thresholds() {
        let m = sd(vec![1e-20, 1e-3, 5.0, 1e-15], 2, 2);
        assert!(hard_decision(&m, f64::NEG_INFINITY).unwrap().values.iter().all(|&v| v == 1.0));
        assert!(hard_decision(&m, f64::INFINITY).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hd_input_rejected() {
        let m = SensingMatrix::new(ReportMode::Hd, 1, 2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(hard_decision(&m, -107.0), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn quiet_noise_gives_all_zero_bits() {
        // noise floor 20 dB below the threshold
        let cfg = ScenarioConfig {
            noise_psd_dbm_hz: -107.0 - 20.0 - 70.0,
            pu_active_prob: 0.0,
            ..Default::default()
        };
        let mut rng = stream(4, Lineage::Snapshot, 0);
        let topo = sim::init_topology(&cfg, &mut rng);
        let pu = sim::sample_pu_state(&cfg, &mut rng);
        let shadow = sim::sample_shadow_field(&topo.su_positions, &cfg, &mut rng).unwrap();
        let m = sense_snapshot(&topo, &pu, &shadow, &cfg, &mut rng).unwrap();
        assert_eq!((m.n_su, m.n_bands), (32, 16));
        let hd = hard_decision(&m, cfg.gamma_dbm).unwrap();
        assert!(hd.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn domain_checks() {
        assert!(SensingMatrix::new(ReportMode::Sd, 1, 2, vec![1.0, 0.0]).is_err());
        assert!(SensingMatrix::new(ReportMode::Hd, 1, 2, vec![1.0, 0.5]).is_err());
        assert!(SensingMatrix::new(ReportMode::Hd, 1, 2, vec![1.0]).is_err());
    }
}
