//! Two-step speech enhancement for noisy single-channel recordings.
//!
//! The pipeline runs an analysis-modification-synthesis loop twice over the
//! input. Step one ([`enhance_step1`]) subtracts a tracked estimate of the
//! noise magnitude spectrum from each frame, with the subtraction factor
//! driven by the low-frequency band so that non-stationary noise is followed
//! frame by frame. Step two ([`enhance_step2`]) perturbs the phase of the
//! remaining spectrum in proportion to the per-bin SNR, pushing conjugate
//! bin pairs of noise-dominated bins out of phase so they cancel during
//! synthesis. The [`eval`] module provides mixing at exact SNR plus overall
//! and segmental SNR metrics, and [`wav`]/[`config`] cover the file formats
//! used by the `nssp` command-line tool.
//!
//! All signal processing is generic over the sample scalar; `f64` is used by
//! the CLI and is the type the documented tolerances are stated for.

use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};
use rustfft::FftNum;

pub mod config;
pub mod error;
pub mod eval;
pub mod noise;
pub mod phase;
pub mod signal;
pub mod subtraction;
pub mod wav;

pub use rustfft::num_complex::Complex;

pub use config::{load_config, parse_psi_mode, EnhancerConfig};
pub use error::{Error, Result};
pub use eval::{improvement_report, mix_at_snr, overall_snr, seg_snr, spectrogram};
pub use eval::{MetricsConfig, MetricsReport, SpectrogramMatrix};
pub use noise::{NoiseEstimate, NoiseTrackerConfig};
pub use phase::{compensate_spectrum, enhance_step2, lambda_weights, psi_per_bin, rms_magnitude};
pub use phase::{CompensationFrame, NuScope, PhaseParams, PsiMode};
pub use signal::{forward_spectrum, frame_signal, inverse_frame, make_window, overlap_add};
pub use signal::{FrameLayout, FrameSequence, Spectrum, Waveform, WindowKind};
pub use subtraction::{enhance_step1, recombine_with_noisy_phase, subtract_magnitude};
pub use subtraction::SubtractionParams;
pub use wav::{read_wav, write_wav};

/// Sample scalar the DSP routines are generic over.
///
/// Implemented for `f32` and `f64`. `f64` is the default throughout the CLI;
/// the tolerances quoted on individual operations assume it.
pub trait Scalar: Float + FloatConst + NumAssign + FftNum + Sum {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Runs both enhancement steps in order: spectral subtraction, then phase
/// compensation.
pub fn enhance<S: Scalar>(signal: &Waveform<S>, cfg: &EnhancerConfig<S>) -> Result<Waveform<S>> {
    let subtracted = enhance_step1(signal, &cfg.step1)?;
    enhance_step2(&subtracted, &cfg.step2)
}

pub type Waveform32 = Waveform<f32>;
pub type Waveform64 = Waveform<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type EnhancerConfig32 = EnhancerConfig<f32>;
pub type EnhancerConfig64 = EnhancerConfig<f64>;
