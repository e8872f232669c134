//! Platform description and calibration files.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Per-die resources, memory system, and fitted model coefficients of the
/// target platform.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformSpec {
    pub dies: usize,
    pub dsp_per_die: f64,
    pub lut_per_die: f64,
    pub bram_per_die: f64,
    pub uram_per_die: f64,
    /// External memory bandwidth per die, bytes/s.
    pub bandwidth_bytes_per_sec: f64,
    pub freq_hz: f64,
    /// Bytes per feature element.
    pub feature_bytes: f64,
    /// Effective bandwidth ratio for sequential access.
    pub alpha_sequential: f64,
    /// Effective bandwidth ratio for random access.
    pub alpha_random: f64,
    /// DSP cost coefficients: `lambda.0 * m + lambda.1 * n <= N_DSP`.
    pub lambda: (f64, f64),
    /// LUT cost coefficients:
    /// `rho.0 * m + rho.1 * n + rho.2 * n * log2(n) <= N_LUT`.
    pub rho: (f64, f64, f64),
}

// Standard Xilinx block sizes: BRAM36 holds 36 Kbit, URAM holds 288 Kbit.
const BRAM_BYTES: f64 = 4608.0;
const URAM_BYTES: f64 = 36864.0;

impl PlatformSpec {
    /// Alveo-U250-like preset: 4 dies, one DDR channel each.
    ///
    /// Resource counts follow the public board tables (per-die shares);
    /// lambda/rho are fitted calibration values, not vendor data.
    pub fn u250_like() -> Self {
        Self {
            dies: 4,
            dsp_per_die: 3072.0,
            lut_per_die: 423_000.0,
            bram_per_die: 540.0,
            uram_per_die: 320.0,
            bandwidth_bytes_per_sec: 19.25e9,
            freq_hz: 300.0e6,
            feature_bytes: 4.0,
            alpha_sequential: 0.95,
            alpha_random: 0.25,
            lambda: (7.0, 89.6),
            rho: (600.0, 8000.0, 9000.0),
        }
    }

    /// Total on-chip bytes available per die for destination buffering.
    pub fn on_chip_bytes_per_die(&self) -> usize {
        (self.bram_per_die * BRAM_BYTES + self.uram_per_die * URAM_BYTES) as usize
    }

    pub fn alpha(&self, random: bool) -> f64 {
        if random {
            self.alpha_random
        } else {
            self.alpha_sequential
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("dies", self.dies as f64),
            ("dsp_per_die", self.dsp_per_die),
            ("lut_per_die", self.lut_per_die),
            ("bram_per_die", self.bram_per_die),
            ("uram_per_die", self.uram_per_die),
            ("bandwidth", self.bandwidth_bytes_per_sec),
            ("freq", self.freq_hz),
            ("feature_bytes", self.feature_bytes),
        ];
        for (name, v) in positives {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        for (name, a) in [
            ("alpha_sequential", self.alpha_sequential),
            ("alpha_random", self.alpha_random),
        ] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must be in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Reads a platform file (TOML key-value text); missing keys fall back
    /// to the U250-like preset.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: PlatformFile =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("platform file: {e}")))?;
        let mut spec = Self::u250_like();
        raw.apply(&mut spec);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformFile {
    dies: Option<usize>,
    dsp_per_die: Option<f64>,
    lut_per_die: Option<f64>,
    bram_per_die: Option<f64>,
    uram_per_die: Option<f64>,
    bandwidth_gb_per_sec: Option<f64>,
    frequency_mhz: Option<f64>,
    feature_bytes: Option<f64>,
    alpha_sequential: Option<f64>,
    alpha_random: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    rho1: Option<f64>,
    rho2: Option<f64>,
    rho3: Option<f64>,
}

impl PlatformFile {
    fn apply(&self, spec: &mut PlatformSpec) {
        if let Some(v) = self.dies {
            spec.dies = v;
        }
        if let Some(v) = self.dsp_per_die {
            spec.dsp_per_die = v;
        }
        if let Some(v) = self.lut_per_die {
            spec.lut_per_die = v;
        }
        if let Some(v) = self.bram_per_die {
            spec.bram_per_die = v;
        }
        if let Some(v) = self.uram_per_die {
            spec.uram_per_die = v;
        }
        if let Some(v) = self.bandwidth_gb_per_sec {
            spec.bandwidth_bytes_per_sec = v * 1e9;
        }
        if let Some(v) = self.frequency_mhz {
            spec.freq_hz = v * 1e6;
        }
        if let Some(v) = self.feature_bytes {
            spec.feature_bytes = v;
        }
        if let Some(v) = self.alpha_sequential {
            spec.alpha_sequential = v;
        }
        if let Some(v) = self.alpha_random {
            spec.alpha_random = v;
        }
        if let Some(v) = self.lambda1 {
            spec.lambda.0 = v;
        }
        if let Some(v) = self.lambda2 {
            spec.lambda.1 = v;
        }
        if let Some(v) = self.rho1 {
            spec.rho.0 = v;
        }
        if let Some(v) = self.rho2 {
            spec.rho.1 = v;
        }
        if let Some(v) = self.rho3 {
            spec.rho.2 = v;
        }
    }
}

/// Host-side calibration constants and model-coefficient overrides, read
/// from the same key-value text format as the platform file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub rho3: Option<f64>,
    pub alpha_sequential: Option<f64>,
    pub alpha_random: Option<f64>,
    /// Loss-calculation time on the host, seconds per iteration.
    pub t_lc_sec: Option<f64>,
    /// Weight-update time on the host, seconds per iteration.
    pub t_wu_sec: Option<f64>,
    /// Single-thread sampling time, seconds per batch.
    pub t_sampling_sec: Option<f64>,
    /// Per-PE feature lane width override for the timing model.
    pub lanes_per_pe: Option<usize>,
}

impl Calibration {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("calibration file: {e}")))
    }

    /// Folds coefficient overrides into a platform spec.
    pub fn apply_to_platform(&self, spec: &mut PlatformSpec) {
        if let Some(v) = self.lambda1 {
            spec.lambda.0 = v;
        }
        if let Some(v) = self.lambda2 {
            spec.lambda.1 = v;
        }
        if let Some(v) = self.rho1 {
            spec.rho.0 = v;
        }
        if let Some(v) = self.rho2 {
            spec.rho.1 = v;
        }
        if let Some(v) = self.rho3 {
            spec.rho.2 = v;
        }
        if let Some(v) = self.alpha_sequential {
            spec.alpha_sequential = v;
        }
        if let Some(v) = self.alpha_random {
            spec.alpha_random = v;
        }
    }

    pub fn t_lc(&self) -> f64 {
        self.t_lc_sec.unwrap_or(1.0e-3)
    }

    pub fn t_wu(&self) -> f64 {
        self.t_wu_sec.unwrap_or(5.0e-4)
    }

    pub fn t_sampling(&self) -> f64 {
        self.t_sampling_sec.unwrap_or(2.0e-2)
    }
}
