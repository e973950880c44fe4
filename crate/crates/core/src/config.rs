//! Scenario parameters: deployment geometry, band plan, radio powers and the
//! detector threshold. Defaults reproduce the reference desk-scale setup
//! (200 m square, 32 SUs, 16 bands of 10 MHz, ...).

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// How the multipath coefficient evolves within one sensing attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multipath {
    /// Fresh coefficient for every channel sample.
    #[default]
    PerSample,
    /// One coefficient held for the whole attempt.
    PerAttempt,
}

/// How consecutive snapshots relate to one another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deployment {
    /// Consecutive snapshots of one mobile trajectory.
    #[default]
    Trajectory,
    /// Every snapshot is an independent uniform redeployment.
    Redeploy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_side_m: f64,
    pub n_su: usize,
    pub n_bands: usize,
    pub band_width_hz: f64,
    pub n_bp_min: usize,
    pub n_bp_max: usize,
    #[serde(with = "extended_float")]
    pub pu_power_dbm: f64,
    #[serde(with = "extended_float")]
    pub leakage_db: f64,
    #[serde(with = "extended_float")]
    pub noise_psd_dbm_hz: f64,
    pub path_loss_exponent: f64,
    pub path_loss_constant: f64,
    /// Standard deviation of the shadow fading in dB.
    pub shadow_sigma_db: f64,
    pub d_ref_m: f64,
    pub velocity_mps: f64,
    pub sensing_period_s: f64,
    pub heading_jitter_deg: f64,
    pub n_ed: usize,
    #[serde(with = "extended_float")]
    pub gamma_dbm: f64,
    pub pu_active_prob: f64,
    pub multipath: Multipath,
    pub deployment: Deployment,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side_m: 200.0,
            n_su: 32,
            n_bands: 16,
            band_width_hz: 10e6,
            n_bp_min: 1,
            n_bp_max: 3,
            pu_power_dbm: 23.0,
            leakage_db: -20.0,
            noise_psd_dbm_hz: -174.0,
            path_loss_exponent: 3.8,
            path_loss_constant: math::pow(10.0, 3.453),
            shadow_sigma_db: 7.9,
            d_ref_m: 50.0,
            velocity_mps: 3.0 / 3.6,
            sensing_period_s: 2.0,
            heading_jitter_deg: 15.0,
            n_ed: 64,
            gamma_dbm: -107.0,
            pu_active_prob: 0.5,
            multipath: Multipath::PerSample,
            deployment: Deployment::Trajectory,
            seed: 1,
        }
    }
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(what.into()))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        check(finite_pos(self.area_side_m), "area_side_m must be positive")?;
        check(self.n_su >= 1, "n_su must be at least 1")?;
        check(self.n_bands >= 1, "n_bands must be at least 1")?;
        check(finite_pos(self.band_width_hz), "band_width_hz must be positive")?;
        check(
            1 <= self.n_bp_min && self.n_bp_min <= self.n_bp_max && self.n_bp_max <= self.n_bands,
            "need 1 <= n_bp_min <= n_bp_max <= n_bands",
        )?;
        // dB-valued powers may be -inf ("off"); +inf and NaN never make sense
        for (name, v) in [
            ("pu_power_dbm", self.pu_power_dbm),
            ("leakage_db", self.leakage_db),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
        ] {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::InvalidConfig(format!("{name} must be finite or -inf")));
            }
        }
        check(!self.gamma_dbm.is_nan(), "gamma_dbm must not be NaN")?;
        check(
            self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0,
            "path_loss_exponent must be finite and non-negative",
        )?;
        check(finite_pos(self.path_loss_constant), "path_loss_constant must be positive")?;
        check(
            self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0,
            "shadow_sigma_db must be finite and non-negative",
        )?;
        check(finite_pos(self.d_ref_m), "d_ref_m must be positive")?;
        check(
            self.velocity_mps.is_finite() && self.velocity_mps >= 0.0,
            "velocity_mps must be finite and non-negative",
        )?;
        check(
            self.sensing_period_s.is_finite() && self.sensing_period_s >= 0.0,
            "sensing_period_s must be finite and non-negative",
        )?;
        check(
            self.heading_jitter_deg.is_finite() && self.heading_jitter_deg >= 0.0,
            "heading_jitter_deg must be finite and non-negative",
        )?;
        check(self.n_ed >= 1, "n_ed must be at least 1")?;
        check(
            (0.0..=1.0).contains(&self.pu_active_prob),
            "pu_active_prob must lie in [0, 1]",
        )?;
        Ok(())
    }

    /// PU transmit power per band, watts.
    pub fn pu_power_w(&self) -> f64 {
        math::dbm_to_watts(self.pu_power_dbm)
    }

    /// Noise power per sample in one band (`N0·W`), watts.
    pub fn noise_power_w(&self) -> f64 {
        math::dbm_to_watts(self.noise_psd_dbm_hz) * self.band_width_hz
    }

    pub fn leakage_linear(&self) -> f64 {
        math::db_to_linear(self.leakage_db)
    }

    pub fn gamma_w(&self) -> f64 {
        math::dbm_to_watts(self.gamma_dbm)
    }

    /// Distance travelled per sensing period.
    pub fn step_distance_m(&self) -> f64 {
        self.velocity_mps * self.sensing_period_s
    }
}

/// Serde adapter for `f64` fields that may legitimately be infinite.
/// Finite values are plain JSON numbers; infinities use the strings
/// `"inf"` and `"-inf"`.
pub mod extended_float {
    use core::fmt;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    struct FloatVisitor;

    impl Visitor<'_> for FloatVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}
