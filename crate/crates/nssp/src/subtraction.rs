//! Enhancement step one: magnitude spectral subtraction scaled by the
//! tracked noise estimate, recombined with the noisy phase.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::noise::{NoiseEstimate, NoiseTrackerConfig};
use crate::signal::{
    frame_signal, overlap_add, FftPair, FrameLayout, FrameSequence, Spectrum, Waveform,
    WindowKind,
};
use crate::Scalar;

/// Parameters for [`enhance_step1`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubtractionParams<S> {
    /// Fraction of the noisy magnitude kept when subtraction drives a bin
    /// nonpositive, in `[0, 1)`.
    pub beta_floor: S,
    pub tracker: NoiseTrackerConfig<S>,
    pub layout: FrameLayout,
}

impl<S: Scalar> Default for SubtractionParams<S> {
    fn default() -> Self {
        SubtractionParams {
            beta_floor: S::from(0.1).unwrap(),
            tracker: NoiseTrackerConfig::default(),
            layout: FrameLayout::new(96, 48, 256, WindowKind::Hamming)
                .expect("default layout is valid"),
        }
    }
}

impl<S: Scalar> SubtractionParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_floor >= S::zero() && self.beta_floor < S::one()) {
            return Err(Error::config("beta_floor must lie in [0, 1)"));
        }
        self.tracker.validate()
    }
}

/// Per-bin subtraction: `h = noisy - alpha * noise`, keeping `h` where it is
/// positive and falling back to `beta_floor * noisy` elsewhere.
pub fn subtract_magnitude<S: Scalar>(
    noisy_mag: &[S],
    noise_mag: &[S],
    alpha: S,
    beta_floor: S,
) -> Result<Vec<S>> {
    if noisy_mag.len() != noise_mag.len() {
        return Err(Error::invalid(format!(
            "magnitude vectors disagree in length: {} vs {}",
            noisy_mag.len(),
            noise_mag.len()
        )));
    }
    Ok(noisy_mag
        .iter()
        .zip(noise_mag)
        .map(|(&y, &d)| {
            let h = y - alpha * d;
            if h > S::zero() {
                h
            } else {
                beta_floor * y
            }
        })
        .collect())
}

/// Pairs the subtracted magnitudes with the phase of the noisy spectrum.
/// Bins whose noisy value is exactly zero get phase zero.
///
/// Panics if `z_mag` does not cover every bin of `noisy`.
pub fn recombine_with_noisy_phase<S: Scalar>(z_mag: &[S], noisy: &Spectrum<S>) -> Spectrum<S> {
    assert_eq!(
        z_mag.len(),
        noisy.bins().len(),
        "one magnitude per spectrum bin"
    );
    let bins = z_mag
        .iter()
        .zip(noisy.bins())
        .map(|(&m, y)| Complex::from_polar(m, y.arg()))
        .collect();
    Spectrum::new(bins, noisy.layout()).expect("bin count preserved")
}

/// Runs the full step-one fold over `noisy`: the first `n_init_silence`
/// frames initialize the noise estimate and pass through unmodified; every
/// later frame is classified by the VAD (silence frames update the
/// estimate), scaled subtraction is applied with the per-frame tracking
/// factor, and the result is resynthesized by weighted overlap-add.
pub fn enhance_step1<S: Scalar>(
    noisy: &Waveform<S>,
    params: &SubtractionParams<S>,
) -> Result<Waveform<S>> {
    params.validate()?;
    let layout = params.layout;
    let needed = params.tracker.n_init_silence * layout.hop() + layout.frame_len();
    if noisy.len() < needed {
        return Err(Error::TooShortInput {
            needed,
            got: noisy.len(),
        });
    }
    let frames = frame_signal(noisy, layout)?;
    let pair = FftPair::new(layout)?;
    let mut estimate = NoiseEstimate::new(layout.fft_len());
    let mut init_mags: Vec<Vec<S>> = Vec::with_capacity(params.tracker.n_init_silence);
    let mut out = Vec::with_capacity(frames.frames().len());
    for frame in frames.frames() {
        let spectrum = pair.forward(frame)?;
        let mag = spectrum.magnitudes();
        if !estimate.initialized() {
            init_mags.push(mag);
            out.push(pair.inverse(&spectrum));
            if init_mags.len() == params.tracker.n_init_silence {
                estimate.absorb_initial(&init_mags, &params.tracker)?;
            }
            continue;
        }
        if estimate.is_silence(&mag, &params.tracker) {
            estimate.update(&mag, &params.tracker)?;
        }
        let alpha =
            estimate.tracking_factor(&mag, &params.tracker, layout, noisy.sample_rate_hz())?;
        let z_mag = subtract_magnitude(&mag, estimate.mag(), alpha, params.beta_floor)?;
        let z = recombine_with_noisy_phase(&z_mag, &spectrum);
        out.push(pair.inverse(&z));
    }
    let seq = FrameSequence::new(out, layout, frames.original_len(), noisy.sample_rate_hz())?;
    overlap_add(&seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::forward_spectrum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn energy(samples: &[f64]) -> f64 {
        samples.iter().map(|&x| x * x).sum()
    }

    #[test]
    fn subtract_follows_both_branches() {
        let out = subtract_magnitude(&[3.0, 1.0], &[1.0, 1.0], 1.0, 0.1).unwrap();
        assert_eq!(out, vec![2.0, 0.1]);
    }

    #[test]
    fn subtract_with_zero_alpha_is_identity() {
        let noisy = vec![0.0, 0.5, 2.0, 1e-9];
        let noise = vec![1.0, 1.0, 1.0, 1.0];
        let out = subtract_magnitude(&noisy, &noise, 0.0, 0.1).unwrap();
        assert_eq!(out, noisy);
    }

    #[test]
    fn subtract_matches_scalar_loop() {
        let mut r = rng(3);
        for _ in 0..1000 {
            let n = r.random_range(1..64);
            let noisy: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let noise: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let alpha = r.random_range(0.0..10.0);
            let beta = r.random_range(0.0..1.0);
            let got = subtract_magnitude(&noisy, &noise, alpha, beta).unwrap();
            for k in 0..n {
                let h = noisy[k] - alpha * noise[k];
                let want = if h > 0.0 { h } else { beta * noisy[k] };
                assert!(got[k] == want, "bin {k}: {} vs {want}", got[k]);
            }
        }
    }

    #[test]
    fn subtract_output_is_nonnegative() {
        let mut r = rng(5);
        for _ in 0..200 {
            let n = r.random_range(1..64);
            let noisy: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let noise: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let out =
                subtract_magnitude(&noisy, &noise, r.random_range(0.0..10.0), 0.3).unwrap();
            assert!(out.iter().all(|&z| z >= 0.0));
        }
    }

    #[test]
    fn subtract_never_grows_through_positive_branch() {
        let mut r = rng(7);
        for _ in 0..200 {
            let n = 32;
            let noisy: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let noise: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
            let beta = 0.1;
            let a1 = r.random_range(0.0..5.0);
            let a2 = a1 + r.random_range(0.0..5.0);
            let out1 = subtract_magnitude(&noisy, &noise, a1, beta).unwrap();
            let out2 = subtract_magnitude(&noisy, &noise, a2, beta).unwrap();
            for k in 0..n {
                let floored = noisy[k] - a2 * noise[k] <= 0.0;
                if floored {
                    assert_eq!(out2[k], beta * noisy[k]);
                } else {
                    assert!(out2[k] <= out1[k]);
                }
            }
        }
    }

    #[test]
    fn subtract_rejects_length_mismatch() {
        assert!(subtract_magnitude(&[1.0, 2.0], &[1.0], 1.0, 0.1).is_err());
    }

    #[test]
    fn recombine_keeps_magnitude_and_noisy_phase() {
        let mut r = rng(9);
        let lay = FrameLayout::new(16, 8, 16, WindowKind::Rectangular).unwrap();
        let frame: Vec<f64> = (0..16).map(|_| r.random_range(-1.0..1.0)).collect();
        let noisy = forward_spectrum(&frame, lay).unwrap();
        let z_mag: Vec<f64> = (0..16).map(|_| r.random_range(0.0..3.0)).collect();
        let out = recombine_with_noisy_phase(&z_mag, &noisy);
        for k in 0..16 {
            assert!((out.bins()[k].norm() - z_mag[k]).abs() < 1e-12);
            if noisy.bins()[k].norm() > 0.0 {
                let got = out.bins()[k].arg();
                let want = noisy.bins()[k].arg();
                assert!((got - want).abs() < 1e-12, "bin {k}");
            }
        }
    }

    #[test]
    fn recombine_gives_zero_phase_to_zero_bins() {
        let lay = FrameLayout::new(4, 4, 4, WindowKind::Rectangular).unwrap();
        let zero = Spectrum::new(vec![Complex::new(0.0, 0.0); 4], lay).unwrap();
        let out = recombine_with_noisy_phase(&[2.0, 3.0, 0.0, 1.0], &zero);
        assert_eq!(out.bins()[0], Complex::new(2.0, 0.0));
        assert_eq!(out.bins()[1], Complex::new(3.0, 0.0));
        assert_eq!(out.bins()[2], Complex::new(0.0, 0.0));
    }

    #[test]
    fn params_validation_rejects_bad_beta() {
        let mut p = SubtractionParams::<f64>::default();
        p.beta_floor = 1.0;
        assert!(p.validate().is_err());
        p.beta_floor = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn enhance_reduces_stationary_noise_energy() {
        let params = SubtractionParams::<f64>::default();
        let mut wins = 0;
        for trial in 0..50u64 {
            let mut r = rng(100 + trial);
            let samples: Vec<f64> = (0..8000)
                .map(|_| r.sample::<f64, _>(StandardNormal) * 0.1)
                .collect();
            let noisy = Waveform::new(samples, 8000).unwrap();
            let out = enhance_step1(&noisy, &params).unwrap();
            if energy(out.samples()) < energy(noisy.samples()) {
                wins += 1;
            }
        }
        assert!(wins >= 48, "energy reduced in only {wins}/50 trials");
    }

    #[test]
    fn enhance_leaves_clean_tone_nearly_untouched() {
        let mut r = rng(33);
        let sr = 8000u32;
        let total = 22000usize;
        let samples: Vec<f64> = (0..total)
            .map(|i| {
                let floor: f64 = r.sample::<f64, _>(StandardNormal) * 1e-5;
                let tone = if i >= 6000 {
                    0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / sr as f64).sin()
                } else {
                    0.0
                };
                floor + tone
            })
            .collect();
        let noisy = Waveform::new(samples, sr).unwrap();
        let params = SubtractionParams::<f64>::default();
        let out = enhance_step1(&noisy, &params).unwrap();

        let lay = params.layout;
        let band_energy = |signal: &Waveform<f64>| -> f64 {
            let mut acc = 0.0;
            let mut tau = 8000 / 48;
            while tau * 48 + 96 <= 20000 {
                let frame = &signal.samples()[tau * 48..tau * 48 + 96];
                let spec = forward_spectrum(frame, lay).unwrap();
                for k in 26..=38 {
                    acc += spec.bins()[k].norm_sqr();
                }
                tau += 1;
            }
            acc
        };
        let before = band_energy(&noisy);
        let after = band_energy(&out);
        let drop_db = 10.0 * (before / after).log10();
        assert!(drop_db < 1.0, "tone band attenuated by {drop_db} dB");
    }

    #[test]
    fn enhance_zero_signal_stays_zero() {
        let noisy = Waveform::new(vec![0.0; 4000], 8000).unwrap();
        let out = enhance_step1(&noisy, &SubtractionParams::default()).unwrap();
        assert!(out.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn enhance_is_deterministic_and_length_preserving() {
        let mut r = rng(55);
        let samples: Vec<f64> = (0..6000).map(|_| r.random_range(-0.5..0.5)).collect();
        let noisy = Waveform::new(samples, 8000).unwrap();
        let params = SubtractionParams::<f64>::default();
        let a = enhance_step1(&noisy, &params).unwrap();
        let b = enhance_step1(&noisy, &params).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_eq!(a.len(), noisy.len());
        assert_eq!(a.sample_rate_hz(), 8000);
    }

    #[test]
    fn enhance_rejects_short_input() {
        let params = SubtractionParams::<f64>::default();
        let needed = 8 * 48 + 96;
        let noisy = Waveform::new(vec![0.1; needed - 1], 8000).unwrap();
        assert!(matches!(
            enhance_step1(&noisy, &params),
            Err(Error::TooShortInput { .. })
        ));
        let noisy = Waveform::new(vec![0.1; needed], 8000).unwrap();
        assert!(enhance_step1(&noisy, &params).is_ok());
    }
}
