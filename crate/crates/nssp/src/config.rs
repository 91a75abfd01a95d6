//! Whole-pipeline configuration: published defaults, a flat `key = value`
//! override file format, and a canonical serialization used by the golden
//! config test.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::MetricsConfig;
use crate::phase::{NuScope, PhaseParams, PsiMode};
use crate::signal::{FrameLayout, WindowKind};
use crate::subtraction::SubtractionParams;
use crate::Scalar;

/// Everything the pipeline needs: sample rate, both enhancement steps, and
/// the metric framing.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancerConfig<S> {
    pub sample_rate_hz: u32,
    pub step1: SubtractionParams<S>,
    pub step2: PhaseParams<S>,
    pub metrics: MetricsConfig<S>,
}

impl<S: Scalar> Default for EnhancerConfig<S> {
    fn default() -> Self {
        EnhancerConfig {
            sample_rate_hz: 8000,
            step1: SubtractionParams::default(),
            step2: PhaseParams::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl<S: Scalar> EnhancerConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(Error::config("sample_rate_hz must be positive"));
        }
        self.step1.validate()?;
        self.step2.validate()?;
        self.metrics.validate()?;
        let nyquist = S::from(self.sample_rate_hz).unwrap() / S::from(2).unwrap();
        if self.step1.tracker.low_band_hz.1 > nyquist {
            return Err(Error::config(format!(
                "low_band_hi_hz {} exceeds the Nyquist frequency of sample_rate_hz {}",
                self.step1.tracker.low_band_hz.1.to_f64().unwrap_or(f64::NAN),
                self.sample_rate_hz
            )));
        }
        Ok(())
    }

    /// Canonical `(key, value)` pairs in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let t = &self.step1.tracker;
        vec![
            ("sample_rate_hz", self.sample_rate_hz.to_string()),
            ("step1_frame_len", self.step1.layout.frame_len().to_string()),
            ("step1_hop", self.step1.layout.hop().to_string()),
            ("step1_fft_len", self.step1.layout.fft_len().to_string()),
            ("step1_window", window_name(self.step1.layout.window()).into()),
            ("beta_floor", display_scalar(self.step1.beta_floor)),
            ("n_init_silence", t.n_init_silence.to_string()),
            ("forgetting", display_scalar(t.forgetting)),
            ("mu", display_scalar(t.mu)),
            ("low_band_lo_hz", display_scalar(t.low_band_hz.0)),
            ("low_band_hi_hz", display_scalar(t.low_band_hz.1)),
            ("vad_threshold_db", display_scalar(t.vad_threshold_db)),
            ("alpha_min", display_scalar(t.alpha_min)),
            ("alpha_max", display_scalar(t.alpha_max)),
            ("step2_frame_len", self.step2.layout.frame_len().to_string()),
            ("step2_hop", self.step2.layout.hop().to_string()),
            ("step2_fft_len", self.step2.layout.fft_len().to_string()),
            ("step2_window", window_name(self.step2.layout.window()).into()),
            ("psi_mode", psi_mode_name(self.step2.psi_mode)),
            ("psi_max", display_scalar(self.step2.psi_max)),
            ("nu_floor", display_scalar(self.step2.nu_floor)),
            ("nu_scope", nu_scope_name(self.step2.nu_scope).into()),
            ("metrics_frame_len", self.metrics.frame_len.to_string()),
            ("metrics_hop", self.metrics.hop.to_string()),
            ("segsnr_min_db", display_scalar(self.metrics.segsnr_min_db)),
            ("segsnr_max_db", display_scalar(self.metrics.segsnr_max_db)),
        ]
    }

    /// Canonical text form, one `key = value` line per field.
    pub fn serialize(&self) -> String {
        self.to_key_values()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Applies `key = value` lines on top of `self` and validates the
    /// result. Blank lines and `#` comments are skipped; unknown keys and
    /// invariant violations are errors. Later lines win on repeated keys.
    pub fn apply_overrides(&self, text: &str) -> Result<Self> {
        let mut cfg = self.clone();
        let mut s1 = LayoutParts::from(cfg.step1.layout);
        let mut s2 = LayoutParts::from(cfg.step2.layout);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    idx + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "sample_rate_hz" => cfg.sample_rate_hz = parse_int(key, value)?,
                "step1_frame_len" => s1.frame_len = parse_int(key, value)?,
                "step1_hop" => s1.hop = parse_int(key, value)?,
                "step1_fft_len" => s1.fft_len = parse_int(key, value)?,
                "step1_window" => s1.window = parse_window(key, value)?,
                "beta_floor" => cfg.step1.beta_floor = parse_scalar(key, value)?,
                "n_init_silence" => cfg.step1.tracker.n_init_silence = parse_int(key, value)?,
                "forgetting" => cfg.step1.tracker.forgetting = parse_scalar(key, value)?,
                "mu" => cfg.step1.tracker.mu = parse_scalar(key, value)?,
                "low_band_lo_hz" => cfg.step1.tracker.low_band_hz.0 = parse_scalar(key, value)?,
                "low_band_hi_hz" => cfg.step1.tracker.low_band_hz.1 = parse_scalar(key, value)?,
                "vad_threshold_db" => {
                    cfg.step1.tracker.vad_threshold_db = parse_scalar(key, value)?
                }
                "alpha_min" => cfg.step1.tracker.alpha_min = parse_scalar(key, value)?,
                "alpha_max" => cfg.step1.tracker.alpha_max = parse_scalar(key, value)?,
                "step2_frame_len" => s2.frame_len = parse_int(key, value)?,
                "step2_hop" => s2.hop = parse_int(key, value)?,
                "step2_fft_len" => s2.fft_len = parse_int(key, value)?,
                "step2_window" => s2.window = parse_window(key, value)?,
                "psi_mode" => cfg.step2.psi_mode = parse_psi_mode(value)?,
                "psi_max" => cfg.step2.psi_max = parse_scalar(key, value)?,
                "nu_floor" => cfg.step2.nu_floor = parse_scalar(key, value)?,
                "nu_scope" => cfg.step2.nu_scope = parse_nu_scope(key, value)?,
                "metrics_frame_len" => cfg.metrics.frame_len = parse_int(key, value)?,
                "metrics_hop" => cfg.metrics.hop = parse_int(key, value)?,
                "segsnr_min_db" => cfg.metrics.segsnr_min_db = parse_scalar(key, value)?,
                "segsnr_max_db" => cfg.metrics.segsnr_max_db = parse_scalar(key, value)?,
                _ => return Err(Error::config(format!("unknown config key `{key}`"))),
            }
        }
        cfg.step1.layout = s1.build("step1")?;
        cfg.step2.layout = s2.build("step2")?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Defaults when `path` is `None`, otherwise defaults overridden by the
/// file's `key = value` lines.
pub fn load_config<S: Scalar>(path: Option<&Path>) -> Result<EnhancerConfig<S>> {
    let defaults = EnhancerConfig::default();
    match path {
        None => Ok(defaults),
        Some(p) => defaults.apply_overrides(&fs::read_to_string(p)?),
    }
}

struct LayoutParts {
    frame_len: usize,
    hop: usize,
    fft_len: usize,
    window: WindowKind,
}

impl From<FrameLayout> for LayoutParts {
    fn from(layout: FrameLayout) -> Self {
        LayoutParts {
            frame_len: layout.frame_len(),
            hop: layout.hop(),
            fft_len: layout.fft_len(),
            window: layout.window(),
        }
    }
}

impl LayoutParts {
    fn build(&self, which: &str) -> Result<FrameLayout> {
        FrameLayout::new(self.frame_len, self.hop, self.fft_len, self.window)
            .map_err(|e| Error::config(format!("{which} framing: {e}")))
    }
}

fn display_scalar<S: Scalar>(x: S) -> String {
    x.to_f64().unwrap_or(f64::NAN).to_string()
}

fn window_name(window: WindowKind) -> &'static str {
    match window {
        WindowKind::Hamming => "hamming",
        WindowKind::GriffinLimModifiedHanning => "griffin_lim_modified_hanning",
        WindowKind::Rectangular => "rectangular",
    }
}

fn nu_scope_name(scope: NuScope) -> &'static str {
    match scope {
        NuScope::PerBin => "per_bin",
        NuScope::PerFrame => "per_frame",
    }
}

fn psi_mode_name<S: Scalar>(mode: PsiMode<S>) -> String {
    match mode {
        PsiMode::SnrDependent => "snr".into(),
        PsiMode::Constant(lambda) => format!("constant:{}", display_scalar(lambda)),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid integer for {key}: `{value}`")))
}

fn parse_scalar<S: Scalar>(key: &str, value: &str) -> Result<S> {
    let parsed: f64 = value
        .parse()
        .map_err(|_| Error::config(format!("invalid number for {key}: `{value}`")))?;
    S::from(parsed).ok_or_else(|| Error::config(format!("value out of range for {key}: `{value}`")))
}

fn parse_window(key: &str, value: &str) -> Result<WindowKind> {
    match value {
        "hamming" => Ok(WindowKind::Hamming),
        "griffin_lim_modified_hanning" => Ok(WindowKind::GriffinLimModifiedHanning),
        "rectangular" => Ok(WindowKind::Rectangular),
        _ => Err(Error::config(format!(
            "invalid window for {key}: `{value}` (expected hamming, \
             griffin_lim_modified_hanning, or rectangular)"
        ))),
    }
}

fn parse_nu_scope(key: &str, value: &str) -> Result<NuScope> {
    match value {
        "per_bin" => Ok(NuScope::PerBin),
        "per_frame" => Ok(NuScope::PerFrame),
        _ => Err(Error::config(format!(
            "invalid scope for {key}: `{value}` (expected per_bin or per_frame)"
        ))),
    }
}

/// Parses `snr` or `constant:<lambda>` with a nonnegative finite lambda.
pub fn parse_psi_mode<S: Scalar>(value: &str) -> Result<PsiMode<S>> {
    if value == "snr" {
        return Ok(PsiMode::SnrDependent);
    }
    if let Some(rest) = value.strip_prefix("constant:") {
        let lambda: S = parse_scalar("psi_mode", rest)?;
        if !(lambda >= S::zero()) || !lambda.is_finite() {
            return Err(Error::config(format!(
                "constant psi must be nonnegative and finite, got `{rest}`"
            )));
        }
        return Ok(PsiMode::Constant(lambda));
    }
    Err(Error::config(format!(
        "invalid psi_mode `{value}` (expected `snr` or `constant:<lambda>`)"
    )))
}
