//! Noise magnitude-spectrum tracking: initialization from leading silence
//! frames, exponential updates during detected silence, and the low-band
//! tracking factor that scales the spectral subtraction.

use crate::error::{Error, Result};
use crate::signal::FrameLayout;
use crate::Scalar;

/// Guard added to denominators throughout noise tracking.
pub(crate) const EPS: f64 = 1e-12;

/// Parameters for noise tracking and the subtraction factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrackerConfig<S> {
    /// Number of leading frames unconditionally treated as silence.
    pub n_init_silence: usize,
    /// Forgetting factor of the silence update, in `[0, 1]`.
    pub forgetting: S,
    /// Scale of the subtraction factor, positive.
    pub mu: S,
    /// Inclusive band (Hz) whose bins drive the subtraction factor.
    pub low_band_hz: (S, S),
    /// Frames whose mean magnitude exceeds the noise mean by less than this
    /// many dB are classified as silence.
    pub vad_threshold_db: S,
    /// Clamp bounds applied to the subtraction factor.
    pub alpha_min: S,
    pub alpha_max: S,
}

impl<S: Scalar> Default for NoiseTrackerConfig<S> {
    fn default() -> Self {
        NoiseTrackerConfig {
            n_init_silence: 8,
            forgetting: S::from(0.167).unwrap(),
            mu: S::from(0.1).unwrap(),
            low_band_hz: (S::zero(), S::from(50.0).unwrap()),
            vad_threshold_db: S::from(3.0).unwrap(),
            alpha_min: S::zero(),
            alpha_max: S::from(10.0).unwrap(),
        }
    }
}

impl<S: Scalar> NoiseTrackerConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.n_init_silence == 0 {
            return Err(Error::config("n_init_silence must be positive"));
        }
        if !(self.forgetting >= S::zero() && self.forgetting <= S::one()) {
            return Err(Error::config("forgetting must lie in [0, 1]"));
        }
        if !(self.mu > S::zero()) || !self.mu.is_finite() {
            return Err(Error::config("mu must be positive and finite"));
        }
        let (lo, hi) = self.low_band_hz;
        if !(lo >= S::zero() && lo < hi) || !hi.is_finite() {
            return Err(Error::config("low_band_hz must satisfy 0 <= lo < hi"));
        }
        if !self.vad_threshold_db.is_finite() {
            return Err(Error::config("vad_threshold_db must be finite"));
        }
        if !(self.alpha_min >= S::zero() && self.alpha_min <= self.alpha_max) {
            return Err(Error::config(
                "alpha bounds must satisfy 0 <= alpha_min <= alpha_max",
            ));
        }
        Ok(())
    }
}

/// Running estimate of the noise magnitude spectrum, one value per DFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate<S> {
    mag: Vec<S>,
    frames_absorbed: usize,
    initialized: bool,
}

impl<S: Scalar> NoiseEstimate<S> {
    /// Uninitialized all-zero estimate over `fft_len` bins.
    pub fn new(fft_len: usize) -> Self {
        NoiseEstimate {
            mag: vec![S::zero(); fft_len],
            frames_absorbed: 0,
            initialized: false,
        }
    }

    pub fn mag(&self) -> &[S] {
        &self.mag
    }

    pub fn initialized(&self) -> bool {
        self.initialized
    }

    pub fn frames_absorbed(&self) -> usize {
        self.frames_absorbed
    }

    /// Initializes the estimate as the elementwise mean of exactly
    /// `cfg.n_init_silence` leading frame magnitude vectors.
    pub fn absorb_initial(
        &mut self,
        frame_mags: &[Vec<S>],
        cfg: &NoiseTrackerConfig<S>,
    ) -> Result<()> {
        if self.initialized {
            return Err(Error::invalid("noise estimate is already initialized"));
        }
        if frame_mags.len() != cfg.n_init_silence {
            return Err(Error::invalid(format!(
                "expected exactly {} initialization frames, got {}",
                cfg.n_init_silence,
                frame_mags.len()
            )));
        }
        for (i, mag) in frame_mags.iter().enumerate() {
            if mag.len() != self.mag.len() {
                return Err(Error::invalid(format!(
                    "initialization frame {i} has {} bins, expected {}",
                    mag.len(),
                    self.mag.len()
                )));
            }
            if mag.iter().any(|&m| m < S::zero()) {
                return Err(Error::invalid(format!(
                    "initialization frame {i} contains a negative magnitude"
                )));
            }
        }
        let count = S::from(frame_mags.len()).unwrap();
        for k in 0..self.mag.len() {
            let mut sum = S::zero();
            for mag in frame_mags {
                sum += mag[k];
            }
            self.mag[k] = sum / count;
        }
        self.frames_absorbed = frame_mags.len();
        self.initialized = true;
        Ok(())
    }

    /// Exponential update during a silence frame:
    /// `mag[k] = forgetting * mag[k] + (1 - forgetting) * silence_mag[k]`.
    pub fn update(&mut self, silence_mag: &[S], cfg: &NoiseTrackerConfig<S>) -> Result<()> {
        if !self.initialized {
            return Err(Error::invalid("noise estimate is not initialized"));
        }
        if silence_mag.len() != self.mag.len() {
            return Err(Error::invalid(format!(
                "silence frame has {} bins, expected {}",
                silence_mag.len(),
                self.mag.len()
            )));
        }
        if silence_mag.iter().any(|&m| m < S::zero()) {
            return Err(Error::invalid("silence frame contains a negative magnitude"));
        }
        let v = cfg.forgetting;
        let rest = S::one() - v;
        for (old, &new) in self.mag.iter_mut().zip(silence_mag) {
            *old = v * *old + rest * new;
        }
        self.frames_absorbed += 1;
        Ok(())
    }

    /// Energy-ratio voice activity decision: a frame is silence when its
    /// mean magnitude is less than `vad_threshold_db` above the estimate's
    /// mean. An uninitialized estimate classifies every frame as silence.
    pub fn is_silence(&self, frame_mag: &[S], cfg: &NoiseTrackerConfig<S>) -> bool {
        if !self.initialized {
            return true;
        }
        let frame_mean = mean(frame_mag);
        let noise_mean = mean(&self.mag).max(S::from(EPS).unwrap());
        let ratio_db = S::from(20.0).unwrap() * (frame_mean / noise_mean).log10();
        ratio_db < cfg.vad_threshold_db
    }

    /// Subtraction factor for one frame: `mu` times the ratio of noisy to
    /// estimated noise magnitude summed over the low band, clamped to
    /// `[alpha_min, alpha_max]`. The band holds every bin `k <= fft_len/2`
    /// whose center frequency `k * sample_rate / fft_len` lies inside
    /// `low_band_hz` (inclusive).
    pub fn tracking_factor(
        &self,
        noisy_mag: &[S],
        cfg: &NoiseTrackerConfig<S>,
        layout: FrameLayout,
        sample_rate_hz: u32,
    ) -> Result<S> {
        let fft_len = layout.fft_len();
        if noisy_mag.len() != fft_len || self.mag.len() != fft_len {
            return Err(Error::invalid(format!(
                "expected {} bins, got frame {} and estimate {}",
                fft_len,
                noisy_mag.len(),
                self.mag.len()
            )));
        }
        let (lo, hi) = cfg.low_band_hz;
        let sr = S::from(sample_rate_hz).unwrap();
        let nyquist = sr / S::from(2).unwrap();
        if hi > nyquist {
            return Err(Error::config(format!(
                "low_band_hz upper bound {} Hz exceeds the Nyquist frequency of a {} Hz signal",
                hi.to_f64().unwrap_or(f64::NAN),
                sample_rate_hz
            )));
        }
        let n = S::from(fft_len).unwrap();
        let mut sum_noisy = S::zero();
        let mut sum_noise = S::zero();
        let mut band_bins = 0usize;
        for k in 0..=fft_len / 2 {
            let center = S::from(k).unwrap() * sr / n;
            if center >= lo && center <= hi {
                sum_noisy += noisy_mag[k];
                sum_noise += self.mag[k];
                band_bins += 1;
            }
        }
        if band_bins == 0 {
            return Err(Error::config(format!(
                "band {}..{} Hz contains no bin center at {} Hz with fft_len {}",
                lo.to_f64().unwrap_or(f64::NAN),
                hi.to_f64().unwrap_or(f64::NAN),
                sample_rate_hz,
                fft_len
            )));
        }
        let alpha = cfg.mu * sum_noisy / sum_noise.max(S::from(EPS).unwrap());
        Ok(alpha.max(cfg.alpha_min).min(cfg.alpha_max))
    }
}

fn mean<S: Scalar>(values: &[S]) -> S {
    if values.is_empty() {
        return S::zero();
    }
    values.iter().copied().sum::<S>() / S::from(values.len()).unwrap()
}
