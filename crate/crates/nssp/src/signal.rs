//! Analysis-modification-synthesis primitives: windows, framing, the DFT of
//! individual frames, and weighted overlap-add resynthesis.
//!
//! A signal is cut into frames of `frame_len` samples every `hop` samples,
//! each frame is windowed and zero-padded to `fft_len` before the forward
//! transform, and modified frames are windowed a second time on the way back
//! so that overlap-add can divide by the accumulated window power and
//! reconstruct the signal exactly wherever that power is non-negligible.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Scalar;

/// Floor under the accumulated window power; positions whose power never
/// exceeds it are left unnormalized by [`overlap_add`]. Kept well below the
/// squared edge value of every supported window so reconstruction divides by
/// the true power everywhere a window touches a sample.
pub const OLA_NORM_FLOOR: f64 = 1e-12;

/// Mono signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<S> {
    samples: Vec<S>,
    sample_rate_hz: u32,
}

impl<S: Scalar> Waveform<S> {
    /// Rejects a zero sample rate and non-finite samples.
    pub fn new(samples: Vec<S>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample_rate_hz must be positive"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Waveform {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }
}

/// Analysis/synthesis window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// `0.54 - 0.46 cos(2 pi n / (len - 1))`.
    Hamming,
    /// `c (0.5 - 0.5 cos(2 pi (n + 0.5) / len))` with `c = 2 / sqrt(1.5)`,
    /// the modified Hanning window of Griffin and Lim.
    GriffinLimModifiedHanning,
    Rectangular,
}

/// Frame geometry shared by framing, transforms, and overlap-add.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    frame_len: usize,
    hop: usize,
    fft_len: usize,
    window: WindowKind,
}

impl FrameLayout {
    /// Requires `1 <= hop <= frame_len <= fft_len`, `frame_len >= 2`, and an
    /// even `fft_len`.
    pub fn new(frame_len: usize, hop: usize, fft_len: usize, window: WindowKind) -> Result<Self> {
        if frame_len < 2 {
            return Err(Error::invalid(format!(
                "frame_len must be at least 2, got {frame_len}"
            )));
        }
        if hop == 0 || hop > frame_len {
            return Err(Error::invalid(format!(
                "hop must satisfy 0 < hop <= frame_len, got hop {hop} with frame_len {frame_len}"
            )));
        }
        if fft_len < frame_len {
            return Err(Error::invalid(format!(
                "fft_len {fft_len} must be at least frame_len {frame_len}"
            )));
        }
        if fft_len % 2 != 0 {
            return Err(Error::invalid(format!(
                "fft_len must be even, got {fft_len}"
            )));
        }
        Ok(FrameLayout {
            frame_len,
            hop,
            fft_len,
            window,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }
}

/// Frames cut from one signal, all of length `layout.frame_len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<S> {
    frames: Vec<Vec<S>>,
    layout: FrameLayout,
    original_len: usize,
    sample_rate_hz: u32,
}

impl<S: Scalar> FrameSequence<S> {
    /// Frame `tau` (zero-based) starts at source sample `tau * hop`; the
    /// sequence must be non-empty, every frame exactly `frame_len` long, and
    /// `original_len` consistent with the stride.
    pub fn new(
        frames: Vec<Vec<S>>,
        layout: FrameLayout,
        original_len: usize,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::invalid("frame list is empty"));
        }
        if let Some(bad) = frames.iter().position(|f| f.len() != layout.frame_len()) {
            return Err(Error::invalid(format!(
                "frame {bad} has length {}, expected {}",
                frames[bad].len(),
                layout.frame_len()
            )));
        }
        let last_start = (frames.len() - 1) * layout.hop();
        if original_len <= last_start || original_len > last_start + layout.frame_len() {
            return Err(Error::invalid(format!(
                "original_len {original_len} inconsistent with {} frames at hop {}",
                frames.len(),
                layout.hop()
            )));
        }
        Ok(FrameSequence {
            frames,
            layout,
            original_len,
            sample_rate_hz,
        })
    }

    pub fn frames(&self) -> &[Vec<S>] {
        &self.frames
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }
}

/// Complex spectrum of a single frame, `fft_len` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<S> {
    bins: Vec<Complex<S>>,
    layout: FrameLayout,
}

impl<S: Scalar> Spectrum<S> {
    pub fn new(bins: Vec<Complex<S>>, layout: FrameLayout) -> Result<Self> {
        if bins.len() != layout.fft_len() {
            return Err(Error::invalid(format!(
                "spectrum has {} bins, layout expects {}",
                bins.len(),
                layout.fft_len()
            )));
        }
        Ok(Spectrum { bins, layout })
    }

    pub fn bins(&self) -> &[Complex<S>] {
        &self.bins
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    /// Per-bin magnitudes `|bins[k]|`.
    pub fn magnitudes(&self) -> Vec<S> {
        self.bins.iter().map(|b| b.norm()).collect()
    }
}

/// Samples the window shape at `frame_len` points.
pub fn make_window<S: Scalar>(kind: WindowKind, frame_len: usize) -> Result<Vec<S>> {
    if frame_len < 2 {
        return Err(Error::invalid(format!(
            "window length must be at least 2, got {frame_len}"
        )));
    }
    let two_pi = S::PI() + S::PI();
    let half = S::from(0.5).unwrap();
    let w = match kind {
        WindowKind::Hamming => {
            let a = S::from(0.54).unwrap();
            let b = S::from(0.46).unwrap();
            let denom = S::from(frame_len - 1).unwrap();
            (0..frame_len)
                .map(|n| a - b * (two_pi * S::from(n).unwrap() / denom).cos())
                .collect()
        }
        WindowKind::GriffinLimModifiedHanning => {
            let scale = S::from(2.0).unwrap() / S::from(1.5).unwrap().sqrt();
            let denom = S::from(frame_len).unwrap();
            (0..frame_len)
                .map(|n| {
                    let x = two_pi * (S::from(n).unwrap() + half) / denom;
                    scale * (half - half * x.cos())
                })
                .collect()
        }
        WindowKind::Rectangular => vec![S::one(); frame_len],
    };
    Ok(w)
}

/// Cuts `signal` into frames starting at every multiple of `hop` below the
/// signal length; trailing frames are zero-padded. No window is applied.
pub fn frame_signal<S: Scalar>(signal: &Waveform<S>, layout: FrameLayout) -> Result<FrameSequence<S>> {
    let samples = signal.samples();
    if samples.is_empty() {
        return Err(Error::invalid("cannot frame an empty signal"));
    }
    let mut frames = Vec::with_capacity(samples.len().div_ceil(layout.hop()));
    let mut start = 0;
    while start < samples.len() {
        let mut frame = vec![S::zero(); layout.frame_len()];
        let end = usize::min(start + layout.frame_len(), samples.len());
        frame[..end - start].copy_from_slice(&samples[start..end]);
        frames.push(frame);
        start += layout.hop();
    }
    FrameSequence::new(frames, layout, samples.len(), signal.sample_rate_hz())
}

/// Windows the frame, zero-pads it to `fft_len`, and returns its DFT
/// (negative-exponent convention, unnormalized).
pub fn forward_spectrum<S: Scalar>(frame: &[S], layout: FrameLayout) -> Result<Spectrum<S>> {
    FftPair::new(layout)?.forward(frame)
}

/// Inverse DFT of the (possibly conjugate-asymmetric) spectrum, keeping the
/// real part and truncating to `frame_len` samples.
pub fn inverse_frame<S: Scalar>(spectrum: &Spectrum<S>) -> Vec<S> {
    FftPair::new(spectrum.layout())
        .expect("layout was validated on construction")
        .inverse(spectrum)
}

/// Weighted overlap-add: every frame is multiplied by the synthesis window
/// (same shape as analysis), frames are summed at stride `hop`, and the
/// result is divided pointwise by the accumulated squared window wherever
/// that sum exceeds [`OLA_NORM_FLOOR`], then truncated to `original_len`.
pub fn overlap_add<S: Scalar>(frames: &FrameSequence<S>) -> Result<Waveform<S>> {
    let layout = frames.layout();
    let window: Vec<S> = make_window(layout.window(), layout.frame_len())?;
    let count = frames.frames().len();
    let buf_len = (count - 1) * layout.hop() + layout.frame_len();
    let mut acc = vec![S::zero(); buf_len];
    let mut power = vec![S::zero(); buf_len];
    for (tau, frame) in frames.frames().iter().enumerate() {
        let off = tau * layout.hop();
        for (n, (&x, &w)) in frame.iter().zip(&window).enumerate() {
            acc[off + n] += x * w;
            power[off + n] += w * w;
        }
    }
    let floor = S::from(OLA_NORM_FLOOR).unwrap();
    for (a, &p) in acc.iter_mut().zip(&power) {
        if p > floor {
            *a = *a / p;
        }
    }
    acc.truncate(frames.original_len());
    Waveform::new(acc, frames.sample_rate_hz())
}

/// Reusable transform plans and window for one layout, so per-frame drivers
/// do not replan the FFT on every call.
pub(crate) struct FftPair<S: Scalar> {
    layout: FrameLayout,
    window: Vec<S>,
    forward: Arc<dyn Fft<S>>,
    inverse: Arc<dyn Fft<S>>,
}

impl<S: Scalar> FftPair<S> {
    pub(crate) fn new(layout: FrameLayout) -> Result<Self> {
        let window = make_window(layout.window(), layout.frame_len())?;
        let mut planner = FftPlanner::new();
        Ok(FftPair {
            layout,
            window,
            forward: planner.plan_fft_forward(layout.fft_len()),
            inverse: planner.plan_fft_inverse(layout.fft_len()),
        })
    }

    pub(crate) fn forward(&self, frame: &[S]) -> Result<Spectrum<S>> {
        if frame.len() != self.layout.frame_len() {
            return Err(Error::invalid(format!(
                "frame has {} samples, layout expects {}",
                frame.len(),
                self.layout.frame_len()
            )));
        }
        let mut buf = vec![Complex::new(S::zero(), S::zero()); self.layout.fft_len()];
        for (b, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
            b.re = x * w;
        }
        self.forward.process(&mut buf);
        Spectrum::new(buf, self.layout)
    }

    pub(crate) fn inverse(&self, spectrum: &Spectrum<S>) -> Vec<S> {
        let mut buf = spectrum.bins().to_vec();
        self.inverse.process(&mut buf);
        let scale = S::one() / S::from(self.layout.fft_len()).unwrap();
        buf.truncate(self.layout.frame_len());
        buf.into_iter().map(|c| c.re * scale).collect()
    }
}
