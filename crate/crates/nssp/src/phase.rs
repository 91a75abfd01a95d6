//! Enhancement step two: SNR-dependent phase spectrum compensation.
//!
//! Each frame spectrum gets a real-valued, anti-symmetric offset added
//! before its phase is re-extracted: bins in the lower half-spectrum are
//! shifted by `+phi[k]`, their conjugate partners by `-phi[k]`, with the
//! offset magnitude growing as the bin's estimated SNR falls. Bin
//! magnitudes are kept, so a noise-dominated conjugate pair ends up nearly
//! out of phase and cancels when the frame is resynthesized from the real
//! part of the inverse transform.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::signal::{
    frame_signal, overlap_add, FftPair, FrameLayout, FrameSequence, Spectrum, Waveform,
    WindowKind,
};
use crate::Scalar;

/// How the compensation strength `psi` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiMode<S> {
    /// `psi[k] = min(pi^3 / nu[k], psi_max)` with `nu[k]` the bin's
    /// magnitude-squared over the frame's mean bin power.
    SnrDependent,
    /// Fixed strength for every bin, the classic non-adaptive variant.
    Constant(S),
}

/// Whether `nu` is estimated per bin or once per frame (as the mean of the
/// per-bin values).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuScope {
    PerBin,
    PerFrame,
}

/// Parameters for [`enhance_step2`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseParams<S> {
    pub layout: FrameLayout,
    /// Upper clamp on the SNR-dependent strength, `pi^3` by default.
    pub psi_max: S,
    /// Lower clamp on the SNR proxy `nu`.
    pub nu_floor: S,
    pub psi_mode: PsiMode<S>,
    pub nu_scope: NuScope,
}

impl<S: Scalar> Default for PhaseParams<S> {
    fn default() -> Self {
        PhaseParams {
            layout: FrameLayout::new(256, 192, 256, WindowKind::GriffinLimModifiedHanning)
                .expect("default layout is valid"),
            psi_max: S::PI().powi(3),
            nu_floor: S::from(1e-8).unwrap(),
            psi_mode: PsiMode::SnrDependent,
            nu_scope: NuScope::PerBin,
        }
    }
}

impl<S: Scalar> PhaseParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.psi_max > S::zero()) || !self.psi_max.is_finite() {
            return Err(Error::config("psi_max must be positive and finite"));
        }
        if !(self.nu_floor > S::zero()) || !self.nu_floor.is_finite() {
            return Err(Error::config("nu_floor must be positive and finite"));
        }
        if let PsiMode::Constant(lambda) = self.psi_mode {
            if !(lambda >= S::zero()) || !lambda.is_finite() {
                return Err(Error::config("constant psi must be nonnegative and finite"));
            }
        }
        Ok(())
    }
}

/// Anti-symmetric sign weights: zero at DC and Nyquist, `+1` strictly below
/// the Nyquist bin, `-1` strictly above.
pub fn lambda_weights<S: Scalar>(fft_len: usize) -> Result<Vec<S>> {
    if fft_len < 2 || fft_len % 2 != 0 {
        return Err(Error::invalid(format!(
            "fft_len must be even and at least 2, got {fft_len}"
        )));
    }
    let half = fft_len / 2;
    Ok((0..fft_len)
        .map(|k| {
            if k == 0 || k == half {
                S::zero()
            } else if k < half {
                S::one()
            } else {
                -S::one()
            }
        })
        .collect())
}

/// Root-mean-square bin magnitude, `sqrt(sum |bins[k]|^2 / fft_len)`.
pub fn rms_magnitude<S: Scalar>(spectrum: &Spectrum<S>) -> S {
    let n = S::from(spectrum.bins().len()).unwrap();
    (spectrum.bins().iter().map(|b| b.norm_sqr()).sum::<S>() / n).sqrt()
}

/// Compensation strength for each bin. In `SnrDependent` mode the SNR proxy
/// is `nu[k] = max(z_mag[k]^2 / max(v_rms^2, eps), nu_floor)` and
/// `psi[k] = min(pi^3 / nu[k], psi_max)`; `PerFrame` scope replaces every
/// `nu[k]` with their mean before the division.
pub fn psi_per_bin<S: Scalar>(z_mag: &[S], v_rms: S, params: &PhaseParams<S>) -> Vec<S> {
    let lambda = match params.psi_mode {
        PsiMode::Constant(lambda) => return vec![lambda; z_mag.len()],
        PsiMode::SnrDependent => S::PI().powi(3),
    };
    let eps = S::from(crate::noise::EPS).unwrap();
    let denom = (v_rms * v_rms).max(eps);
    let nu_of = |m: S| (m * m / denom).max(params.nu_floor);
    match params.nu_scope {
        NuScope::PerBin => z_mag
            .iter()
            .map(|&m| (lambda / nu_of(m)).min(params.psi_max))
            .collect(),
        NuScope::PerFrame => {
            let count = S::from(z_mag.len()).unwrap();
            let mean_nu = z_mag.iter().map(|&m| nu_of(m)).sum::<S>() / count;
            let psi = (lambda / mean_nu).min(params.psi_max);
            vec![psi; z_mag.len()]
        }
    }
}

/// The per-frame quantities of one compensation: sign weights, RMS
/// magnitude, strengths, and the real offsets `phi[k] = psi[k] * lambda[k]
/// * v_rms`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensationFrame<S> {
    pub lambda: Vec<S>,
    pub v_rms: S,
    pub psi: Vec<S>,
    pub phi: Vec<S>,
}

impl<S: Scalar> CompensationFrame<S> {
    pub fn build(z: &Spectrum<S>, params: &PhaseParams<S>) -> Self {
        let lambda: Vec<S> =
            lambda_weights(z.layout().fft_len()).expect("layout fft_len is even");
        let v_rms = rms_magnitude(z);
        let z_mag = z.magnitudes();
        let psi = psi_per_bin(&z_mag, v_rms, params);
        let phi = psi
            .iter()
            .zip(&lambda)
            .map(|(&p, &l)| p * l * v_rms)
            .collect();
        CompensationFrame {
            lambda,
            v_rms,
            psi,
            phi,
        }
    }
}

/// Adds the real offset `phi[k]` to each bin, keeps the perturbed angle,
/// and restores the original magnitude:
/// `out[k] = |z[k]| * exp(j * angle(z[k] + phi[k]))`.
/// Bins with `phi[k] == 0` (DC and Nyquist always, everything when the
/// offset vanishes) are copied unchanged.
pub fn compensate_spectrum<S: Scalar>(z: &Spectrum<S>, params: &PhaseParams<S>) -> Spectrum<S> {
    let comp = CompensationFrame::build(z, params);
    let bins = z
        .bins()
        .iter()
        .zip(&comp.phi)
        .map(|(&bin, &phi)| {
            if phi == S::zero() {
                bin
            } else {
                let shifted = Complex::new(bin.re + phi, bin.im);
                Complex::from_polar(bin.norm(), shifted.arg())
            }
        })
        .collect();
    Spectrum::new(bins, z.layout()).expect("bin count preserved")
}

/// Runs phase compensation over every frame of `z` and resynthesizes by
/// weighted overlap-add.
///
/// The signal is padded with one hop of silence before framing and trimmed
/// after synthesis. Without the pad the leading samples are touched only by
/// the shallow left edge of the first window, and dividing a modified frame
/// by that near-zero window power blows the head of the output up by orders
/// of magnitude; the pad gives every real sample interior-grade coverage
/// while leaving unmodified-spectrum reconstruction untouched.
pub fn enhance_step2<S: Scalar>(z: &Waveform<S>, params: &PhaseParams<S>) -> Result<Waveform<S>> {
    params.validate()?;
    if z.samples().is_empty() {
        return Err(Error::invalid("cannot enhance an empty signal"));
    }
    let layout = params.layout;
    let pad = layout.hop();
    let mut padded = vec![S::zero(); pad];
    padded.extend_from_slice(z.samples());
    let padded = Waveform::new(padded, z.sample_rate_hz())?;
    let frames = frame_signal(&padded, layout)?;
    let pair = FftPair::new(layout)?;
    let mut out = Vec::with_capacity(frames.frames().len());
    for frame in frames.frames() {
        let spectrum = pair.forward(frame)?;
        let compensated = compensate_spectrum(&spectrum, params);
        out.push(pair.inverse(&compensated));
    }
    let seq = FrameSequence::new(out, layout, frames.original_len(), z.sample_rate_hz())?;
    let synth = overlap_add(&seq)?;
    Waveform::new(synth.samples()[pad..].to_vec(), z.sample_rate_hz())
}
