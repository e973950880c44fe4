use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::geometry::{Point, Topology};
use crate::config::{Multipath, ScenarioConfig};
use crate::error::{Error, Result};
use crate::math;

/// Linear power gain of the PU-to-SU path, `1 / (β·d^α)`.
pub fn path_gain(d_m: f64, cfg: &ScenarioConfig) -> Result<f64> {
    if !(d_m > 0.0) || !d_m.is_finite() {
        return Err(Error::NonPositiveDistance(d_m));
    }
    Ok(1.0 / (cfg.path_loss_constant * math::pow(d_m, cfg.path_loss_exponent)))
}

/// Mean received PU power, `κ² = P / (β d^α 10^(h/10))`, with distances
/// below 1 m clamped to 1 m.
pub fn kappa_squared(d_m: f64, shadow_db: f64, cfg: &ScenarioConfig) -> f64 {
    let d = if d_m < 1.0 { 1.0 } else { d_m };
    let gain = path_gain(d, cfg).expect("clamped distance is positive");
    cfg.pu_power_w() * gain * math::db_to_linear(-shadow_db)
}

/// `K[a][b] = exp(-dist(a, b) / d_ref)`, row-major `n × n`.
pub fn correlation_matrix(positions: &[Point], d_ref_m: f64) -> Vec<f64> {
    let n = positions.len();
    let mut k = vec![0.0; n * n];
    for a in 0..n {
        k[a * n + a] = 1.0;
        for b in (a + 1)..n {
            let v = math::exp(-positions[a].distance(&positions[b]) / d_ref_m);
            k[a * n + b] = v;
            k[b * n + a] = v;
        }
    }
    k
}

/// Diagonal loading tried in order until the correlation matrix factors.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Per-SU shadow fading towards the PU, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowField {
    pub values_db: Vec<f64>,
}

/// Draw spatially correlated log-normal shadowing: `k ~ N(0, K)` through a
/// Cholesky factor of `K + jitter·I`, then `h = σ·k`.
pub fn sample_shadow_field<R: Rng + ?Sized>(
    positions: &[Point],
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<ShadowField> {
    let n = positions.len();
    let mut k = correlation_matrix(positions, cfg.d_ref_m);
    let mut last = 0.0;
    let mut factor = None;
    for &jitter in &JITTER_LADDER {
        for i in 0..n {
            k[i * n + i] += jitter - last;
        }
        last = jitter;
        if let Some(l) = math::cholesky(&k, n) {
            factor = Some(l);
            break;
        }
    }
    let l = factor.ok_or(Error::CholeskyFailed { jitter: last })?;
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let values_db = (0..n)
        .map(|i| {
            let row = &l[i * n..i * n + i + 1];
            cfg.shadow_sigma_db * row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    Ok(ShadowField { values_db })
}

/// How a band relates to the PU transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandRole {
    Occupied,
    Adjacent,
    Vacant,
}

/// PU activity and the band sets it induces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuState {
    pub active: bool,
    pub occupied_bands: Vec<usize>,
    pub adjacent_bands: Vec<usize>,
    pub vacant_bands: Vec<usize>,
}

impl PuState {
    pub fn inactive(n_bands: usize) -> Self {
        Self {
            active: false,
            occupied_bands: Vec::new(),
            adjacent_bands: Vec::new(),
            vacant_bands: (0..n_bands).collect(),
        }
    }

    /// Active PU on bands `start..start + len`.
    pub fn active_run(start: usize, len: usize, n_bands: usize) -> Result<Self> {
        if len == 0 || start + len > n_bands {
            return Err(Error::InvalidArgument(alloc::format!(
                "band run {start}..{} does not fit in {n_bands} bands",
                start + len
            )));
        }
        let end = start + len;
        let occupied_bands: Vec<usize> = (start..end).collect();
        let mut adjacent_bands = Vec::new();
        if start > 0 {
            adjacent_bands.push(start - 1);
        }
        if end < n_bands {
            adjacent_bands.push(end);
        }
        let vacant_bands = (0..n_bands)
            .filter(|b| !(start..end).contains(b) && !adjacent_bands.contains(b))
            .collect();
        Ok(Self { active: true, occupied_bands, adjacent_bands, vacant_bands })
    }

    pub fn n_bands(&self) -> usize {
        self.occupied_bands.len() + self.adjacent_bands.len() + self.vacant_bands.len()
    }

    pub fn role(&self, band: usize) -> BandRole {
        if self.occupied_bands.contains(&band) {
            BandRole::Occupied
        } else if self.adjacent_bands.contains(&band) {
            BandRole::Adjacent
        } else {
            BandRole::Vacant
        }
    }
}

/// Draw the PU state for one snapshot: active with `pu_active_prob`, then a
/// uniform run length in `[n_bp_min, n_bp_max]` at a uniform valid start.
pub fn sample_pu_state<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> PuState {
    let active = rng.random::<f64>() < cfg.pu_active_prob;
    if !active {
        return PuState::inactive(cfg.n_bands);
    }
    let len = rng.random_range(cfg.n_bp_min..=cfg.n_bp_max);
    let start = rng.random_range(0..=cfg.n_bands - len);
    PuState::active_run(start, len, cfg.n_bands).expect("run drawn inside the band plan")
}

#[inline]
fn cscg<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

#[inline]
fn unit_symbol<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let phase = rng.random::<f64>() * TAU;
    Complex64::new(libm::cos(phase), libm::sin(phase))
}

/// Fill `out` with `n` samples of `a·g·x + w` where `a² = signal_power`,
/// `g` is unit CSCG multipath, `x` a unit-modulus symbol and `w` CSCG noise of
/// variance `noise_power`. No signal draws happen when `signal_power == 0`.
pub(crate) fn fill_samples<R: Rng + ?Sized>(
    signal_power: f64,
    noise_power: f64,
    n: usize,
    multipath: Multipath,
    rng: &mut R,
    out: &mut Vec<Complex64>,
) {
    out.clear();
    let amp = math::sqrt(signal_power);
    let noise_amp = math::sqrt(noise_power);
    let held = if signal_power > 0.0 && multipath == Multipath::PerAttempt {
        Some(cscg(rng))
    } else {
        None
    };
    for _ in 0..n {
        let mut y = cscg(rng) * noise_amp;
        if signal_power > 0.0 {
            let g = match held {
                Some(g) => g,
                None => cscg(rng),
            };
            y += g * unit_symbol(rng) * amp;
        }
        out.push(y);
    }
}

/// Mean received PU power at SU `su` on `band`, zero when the band carries no
/// PU energy.
pub(crate) fn band_signal_power(
    topo: &Topology,
    pu: &PuState,
    shadow: &ShadowField,
    su: usize,
    band: usize,
    cfg: &ScenarioConfig,
) -> f64 {
    if !pu.active {
        return 0.0;
    }
    let scale = match pu.role(band) {
        BandRole::Occupied => 1.0,
        BandRole::Adjacent => cfg.leakage_linear(),
        BandRole::Vacant => return 0.0,
    };
    scale * kappa_squared(topo.pu_distance(su), shadow.values_db[su], cfg)
}

/// `N_ED` complex baseband samples seen by SU `su` on `band`.
pub fn received_samples<R: Rng + ?Sized>(
    topo: &Topology,
    pu: &PuState,
    shadow: &ShadowField,
    su: usize,
    band: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if su >= topo.n_su() || su >= shadow.values_db.len() {
        return Err(Error::InvalidArgument(alloc::format!("SU index {su} out of range")));
    }
    if band >= cfg.n_bands || band >= pu.n_bands() {
        return Err(Error::InvalidArgument(alloc::format!("band index {band} out of range")));
    }
    let signal = band_signal_power(topo, pu, shadow, su, band, cfg);
    let mut out = Vec::with_capacity(cfg.n_ed);
    fill_samples(signal, cfg.noise_power_w(), cfg.n_ed, cfg.multipath, rng, &mut out);
    Ok(out)
}
