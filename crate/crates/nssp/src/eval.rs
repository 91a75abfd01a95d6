//! Objective evaluation: mixing noise at a prescribed SNR, segmental and
//! overall SNR improvement, and spectrogram export.

use crate::error::{Error, Result};
use crate::noise::EPS;
use crate::signal::{frame_signal, FftPair, FrameLayout, Waveform};
use crate::Scalar;

/// Framing and clamping used by the SNR metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig<S> {
    pub frame_len: usize,
    pub hop: usize,
    pub segsnr_min_db: S,
    pub segsnr_max_db: S,
}

impl<S: Scalar> Default for MetricsConfig<S> {
    fn default() -> Self {
        MetricsConfig {
            frame_len: 256,
            hop: 128,
            segsnr_min_db: S::from(-10).unwrap(),
            segsnr_max_db: S::from(35).unwrap(),
        }
    }
}

impl<S: Scalar> MetricsConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 {
            return Err(Error::config("metrics frame_len must be positive"));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::config(format!(
                "metrics hop must satisfy 1 <= hop <= frame_len, got hop {} frame_len {}",
                self.hop, self.frame_len
            )));
        }
        if !self.segsnr_min_db.is_finite() || !self.segsnr_max_db.is_finite() {
            return Err(Error::config("segmental SNR clamp bounds must be finite"));
        }
        if self.segsnr_min_db >= self.segsnr_max_db {
            return Err(Error::config(
                "segsnr_min_db must be strictly below segsnr_max_db",
            ));
        }
        Ok(())
    }
}

/// Both SNR metrics for a noisy and an enhanced signal against the same
/// clean reference. Improvements are `enhanced - noisy` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<S> {
    pub segsnr_noisy_db: S,
    pub segsnr_enhanced_db: S,
    pub segsnr_improvement_db: S,
    pub overall_snr_noisy_db: S,
    pub overall_snr_enhanced_db: S,
    pub overall_snr_improvement_db: S,
    /// Frames retained by the segmental metric (silent ones are skipped).
    pub n_frames: usize,
}

/// Spectrogram of one signal: `values[bin][frame]` in dB, one-sided bins
/// `0..=fft_len/2`, floored at the `db_floor` passed to [`spectrogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMatrix<S> {
    pub values: Vec<Vec<S>>,
    /// Width of one frequency bin in Hz.
    pub bin_hz: S,
    /// Time step between columns in seconds.
    pub hop_s: S,
}

impl<S: Scalar> SpectrogramMatrix<S> {
    pub fn n_bins(&self) -> usize {
        self.values.len()
    }

    pub fn n_frames(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// CSV with a metadata header line, then one line per bin (row) with
    /// one 6-decimal column per frame.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "bin_hz={},hop_s={}\n",
            fmt6(self.bin_hz),
            fmt6(self.hop_s)
        );
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|&v| fmt6(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn fmt6<S: Scalar>(x: S) -> String {
    format!("{:.6}", x.to_f64().unwrap_or(f64::NAN))
}

fn sum_sq<S: Scalar>(xs: &[S]) -> S {
    xs.iter().map(|&x| x * x).sum()
}

/// Adds a deterministically chosen segment of `noise` to `clean`, scaled so
/// the mixture's component SNR equals `snr_db`. `seed_offset` picks the
/// noise start sample as `seed_offset mod (noise_len - clean_len + 1)`.
pub fn mix_at_snr<S: Scalar>(
    clean: &Waveform<S>,
    noise: &Waveform<S>,
    snr_db: S,
    seed_offset: u64,
) -> Result<Waveform<S>> {
    if clean.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::invalid(format!(
            "sample rate mismatch: clean {} Hz, noise {} Hz",
            clean.sample_rate_hz(),
            noise.sample_rate_hz()
        )));
    }
    if clean.is_empty() {
        return Err(Error::invalid("clean signal is empty"));
    }
    if noise.len() < clean.len() {
        return Err(Error::invalid(format!(
            "noise ({} samples) is shorter than clean ({} samples)",
            noise.len(),
            clean.len()
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr_db must be finite"));
    }

    let span = (noise.len() - clean.len() + 1) as u64;
    let start = (seed_offset % span) as usize;
    let segment = &noise.samples()[start..start + clean.len()];

    let n = S::from(clean.len()).unwrap();
    let p_clean = sum_sq(clean.samples()) / n;
    let p_noise = sum_sq(segment) / n;
    if p_clean == S::zero() {
        return Err(Error::degenerate("clean signal has zero power"));
    }
    if p_noise == S::zero() {
        return Err(Error::degenerate("selected noise segment has zero power"));
    }

    let ten = S::from(10).unwrap();
    let gain = (p_clean / (p_noise * ten.powf(snr_db / ten))).sqrt();
    let noisy = clean
        .samples()
        .iter()
        .zip(segment)
        .map(|(&c, &d)| c + gain * d)
        .collect();
    Waveform::new(noisy, clean.sample_rate_hz())
}

/// Whole-signal SNR of `test` against `clean` in dB,
/// `10 log10(sum clean^2 / max(sum (clean - test)^2, eps))`, clamped above
/// at 99 dB.
pub fn overall_snr<S: Scalar>(clean: &Waveform<S>, test: &Waveform<S>) -> Result<S> {
    check_comparable(clean, test)?;
    let signal = sum_sq(clean.samples());
    if signal == S::zero() {
        return Err(Error::degenerate("clean signal has zero power"));
    }
    let error: S = clean
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(&c, &t)| (c - t) * (c - t))
        .sum();
    let eps = S::from(EPS).unwrap();
    let ten = S::from(10).unwrap();
    let snr = ten * (signal / error.max(eps)).log10();
    Ok(snr.min(S::from(99).unwrap()))
}

/// Mean per-frame SNR of `test` against `clean` in dB. Frames of
/// `cfg.frame_len` samples advance by `cfg.hop`; only full frames count,
/// frames with clean energy below 1e-10 are skipped, and each frame's SNR
/// is clamped to `[segsnr_min_db, segsnr_max_db]`.
pub fn seg_snr<S: Scalar>(
    clean: &Waveform<S>,
    test: &Waveform<S>,
    cfg: &MetricsConfig<S>,
) -> Result<S> {
    seg_snr_stats(clean, test, cfg).map(|(mean, _)| mean)
}

fn seg_snr_stats<S: Scalar>(
    clean: &Waveform<S>,
    test: &Waveform<S>,
    cfg: &MetricsConfig<S>,
) -> Result<(S, usize)> {
    cfg.validate()?;
    check_comparable(clean, test)?;
    let eps = S::from(EPS).unwrap();
    let energy_floor = S::from(1e-10).unwrap();
    let ten = S::from(10).unwrap();

    let mut total = S::zero();
    let mut retained = 0usize;
    let mut start = 0usize;
    while start + cfg.frame_len <= clean.len() {
        let c = &clean.samples()[start..start + cfg.frame_len];
        let t = &test.samples()[start..start + cfg.frame_len];
        let signal = sum_sq(c);
        if signal >= energy_floor {
            let error: S = c.iter().zip(t).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let snr = ten * (signal / error.max(eps)).log10();
            total += snr.max(cfg.segsnr_min_db).min(cfg.segsnr_max_db);
            retained += 1;
        }
        start += cfg.hop;
    }
    if retained == 0 {
        return Err(Error::degenerate(
            "no frames retained: input too short or clean signal silent throughout",
        ));
    }
    Ok((total / S::from(retained).unwrap(), retained))
}

fn check_comparable<S: Scalar>(clean: &Waveform<S>, test: &Waveform<S>) -> Result<()> {
    if clean.sample_rate_hz() != test.sample_rate_hz() {
        return Err(Error::invalid(format!(
            "sample rate mismatch: {} Hz vs {} Hz",
            clean.sample_rate_hz(),
            test.sample_rate_hz()
        )));
    }
    if clean.len() != test.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {} samples",
            clean.len(),
            test.len()
        )));
    }
    Ok(())
}

/// Computes both metrics for `noisy` and `enhanced` against `clean`.
pub fn improvement_report<S: Scalar>(
    clean: &Waveform<S>,
    noisy: &Waveform<S>,
    enhanced: &Waveform<S>,
    cfg: &MetricsConfig<S>,
) -> Result<MetricsReport<S>> {
    let (segsnr_noisy_db, n_frames) = seg_snr_stats(clean, noisy, cfg)?;
    let (segsnr_enhanced_db, _) = seg_snr_stats(clean, enhanced, cfg)?;
    let overall_snr_noisy_db = overall_snr(clean, noisy)?;
    let overall_snr_enhanced_db = overall_snr(clean, enhanced)?;
    Ok(MetricsReport {
        segsnr_noisy_db,
        segsnr_enhanced_db,
        segsnr_improvement_db: segsnr_enhanced_db - segsnr_noisy_db,
        overall_snr_noisy_db,
        overall_snr_enhanced_db,
        overall_snr_improvement_db: overall_snr_enhanced_db - overall_snr_noisy_db,
        n_frames,
    })
}

/// One-sided magnitude spectrogram in dB. Bins whose magnitude is at or
/// below `10^(db_floor/20)` take the value `db_floor` exactly.
pub fn spectrogram<S: Scalar>(
    signal: &Waveform<S>,
    layout: FrameLayout,
    db_floor: S,
) -> Result<SpectrogramMatrix<S>> {
    if !db_floor.is_finite() {
        return Err(Error::invalid("db_floor must be finite"));
    }
    if signal.len() < layout.frame_len() {
        return Err(Error::invalid(format!(
            "signal has {} samples but one frame needs {}",
            signal.len(),
            layout.frame_len()
        )));
    }
    let frames = frame_signal(signal, layout)?;
    let pair = FftPair::new(layout)?;
    let n_bins = layout.fft_len() / 2 + 1;
    let mut values = vec![Vec::with_capacity(frames.frames().len()); n_bins];
    let ten = S::from(10).unwrap();
    let twenty = S::from(20).unwrap();
    let floor_mag = ten.powf(db_floor / twenty);
    for frame in frames.frames() {
        let spectrum = pair.forward(frame)?;
        for (k, column) in values.iter_mut().enumerate() {
            let mag = spectrum.bins()[k].norm();
            column.push(if mag <= floor_mag {
                db_floor
            } else {
                twenty * mag.log10()
            });
        }
    }
    let rate = S::from(signal.sample_rate_hz()).unwrap();
    Ok(SpectrogramMatrix {
        values,
        bin_hz: rate / S::from(layout.fft_len()).unwrap(),
        hop_s: S::from(layout.hop()).unwrap() / rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::WindowKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn wave(samples: Vec<f64>) -> Waveform<f64> {
        Waveform::new(samples, 8000).unwrap()
    }

    fn random_wave(r: &mut ChaCha8Rng, len: usize) -> Waveform<f64> {
        wave((0..len).map(|_| r.random_range(-0.5..0.5)).collect())
    }

    #[test]
    fn mix_at_zero_db_with_equal_power_noise_has_unit_gain() {
        let mut r = rng(1);
        let clean = random_wave(&mut r, 500);
        let noise = wave(clean.samples().to_vec());
        let noisy = mix_at_snr(&clean, &noise, 0.0, 0).unwrap();
        for i in 0..500 {
            assert_eq!(noisy.samples()[i], clean.samples()[i] + clean.samples()[i]);
        }
    }

    #[test]
    fn mix_gain_is_half_for_quadruple_noise_power() {
        let mut r = rng(2);
        let clean = random_wave(&mut r, 400);
        let noise = wave(clean.samples().iter().map(|&c| 2.0 * c).collect());
        let noisy = mix_at_snr(&clean, &noise, 0.0, 0).unwrap();
        for i in 0..400 {
            assert_eq!(noisy.samples()[i], clean.samples()[i] + clean.samples()[i]);
        }
    }

    #[test]
    fn mix_hits_target_snr_within_1e9() {
        let mut r = rng(3);
        let clean = random_wave(&mut r, 1000);
        let noise = random_wave(&mut r, 3000);
        for &target in &[-20.0f64, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0] {
            let noisy = mix_at_snr(&clean, &noise, target, 17).unwrap();
            let d: Vec<f64> = noisy
                .samples()
                .iter()
                .zip(clean.samples())
                .map(|(y, c)| y - c)
                .collect();
            let measured =
                10.0 * (sum_sq(clean.samples()) / sum_sq(&d)).log10();
            assert!(
                (measured - target).abs() < 1e-9,
                "target {target}: measured {measured}"
            );
        }
    }

    #[test]
    fn mix_seed_offset_selects_segment_modulo_span() {
        let mut r = rng(4);
        let clean = random_wave(&mut r, 100);
        let noise = random_wave(&mut r, 250);
        let span = 250 - 100 + 1;
        let a = mix_at_snr(&clean, &noise, 0.0, 5).unwrap();
        let b = mix_at_snr(&clean, &noise, 0.0, 5 + span as u64).unwrap();
        let c = mix_at_snr(&clean, &noise, 0.0, 6).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn mix_rejects_bad_inputs() {
        let mut r = rng(5);
        let clean = random_wave(&mut r, 100);
        let noise = random_wave(&mut r, 200);

        let other_rate = Waveform::new(noise.samples().to_vec(), 16000).unwrap();
        assert!(matches!(
            mix_at_snr(&clean, &other_rate, 0.0, 0),
            Err(Error::InvalidArgument(_))
        ));

        let short = random_wave(&mut r, 99);
        assert!(matches!(
            mix_at_snr(&clean, &short, 0.0, 0),
            Err(Error::InvalidArgument(_))
        ));

        let empty = wave(vec![]);
        assert!(matches!(
            mix_at_snr(&empty, &noise, 0.0, 0),
            Err(Error::InvalidArgument(_))
        ));

        assert!(matches!(
            mix_at_snr(&clean, &noise, f64::NAN, 0),
            Err(Error::InvalidArgument(_))
        ));

        let silent = wave(vec![0.0; 100]);
        assert!(matches!(
            mix_at_snr(&silent, &noise, 0.0, 0),
            Err(Error::DegenerateInput(_))
        ));
        let silent_noise = wave(vec![0.0; 200]);
        assert!(matches!(
            mix_at_snr(&clean, &silent_noise, 0.0, 0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn mix_is_deterministic() {
        let mut r = rng(6);
        let clean = random_wave(&mut r, 300);
        let noise = random_wave(&mut r, 900);
        let a = mix_at_snr(&clean, &noise, -7.0, 42).unwrap();
        let b = mix_at_snr(&clean, &noise, -7.0, 42).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn overall_snr_of_identical_signals_clamps_at_99() {
        let mut r = rng(7);
        let clean = random_wave(&mut r, 1000);
        assert_eq!(overall_snr(&clean, &clean).unwrap(), 99.0);
    }

    #[test]
    fn overall_snr_of_negated_signal() {
        let mut r = rng(8);
        let clean = random_wave(&mut r, 1000);
        let test = wave(clean.samples().iter().map(|&c| -c).collect());
        let snr = overall_snr(&clean, &test).unwrap();
        assert!((snr - 10.0 * 0.25f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn overall_snr_matches_scalar_oracle() {
        let mut r = rng(9);
        for _ in 0..20 {
            let clean = random_wave(&mut r, 700);
            let test = random_wave(&mut r, 700);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..700 {
                num += clean.samples()[i] * clean.samples()[i];
                let d = clean.samples()[i] - test.samples()[i];
                den += d * d;
            }
            let expected = (10.0 * (num / den.max(1e-12)).log10()).min(99.0);
            assert!((overall_snr(&clean, &test).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn overall_snr_rejects_mismatch_and_silence() {
        let mut r = rng(10);
        let clean = random_wave(&mut r, 100);
        let longer = random_wave(&mut r, 101);
        assert!(matches!(
            overall_snr(&clean, &longer),
            Err(Error::InvalidArgument(_))
        ));

        let silent = wave(vec![0.0; 100]);
        let test = random_wave(&mut r, 100);
        assert!(matches!(
            overall_snr(&silent, &test),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn snr_metrics_are_scale_invariant() {
        let mut r = rng(11);
        let clean = random_wave(&mut r, 2000);
        let test = random_wave(&mut r, 2000);
        let cfg = MetricsConfig::default();

        let scale = |w: &Waveform<f64>, s: f64| {
            wave(w.samples().iter().map(|&x| s * x).collect())
        };
        assert_eq!(
            overall_snr(&clean, &test).unwrap(),
            overall_snr(&scale(&clean, 2.0), &scale(&test, 2.0)).unwrap()
        );
        assert_eq!(
            seg_snr(&clean, &test, &cfg).unwrap(),
            seg_snr(&scale(&clean, 2.0), &scale(&test, 2.0), &cfg).unwrap()
        );
        let a = overall_snr(&clean, &test).unwrap();
        let b = overall_snr(&scale(&clean, 3.0), &scale(&test, 3.0)).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn seg_snr_of_identical_signals_is_max_clamp() {
        let mut r = rng(12);
        let clean = random_wave(&mut r, 2000);
        let cfg = MetricsConfig::default();
        assert_eq!(seg_snr(&clean, &clean, &cfg).unwrap(), 35.0);
    }

    #[test]
    fn seg_snr_of_negated_signal() {
        let mut r = rng(13);
        let clean = random_wave(&mut r, 2048);
        let test = wave(clean.samples().iter().map(|&c| -c).collect());
        let cfg = MetricsConfig::default();
        let snr = seg_snr(&clean, &test, &cfg).unwrap();
        assert!((snr - 10.0 * 0.25f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn seg_snr_skips_silent_frames() {
        let cfg = MetricsConfig {
            frame_len: 4,
            hop: 4,
            ..MetricsConfig::default()
        };
        let mut clean = vec![0.5; 4];
        clean.extend_from_slice(&[0.0; 4]);
        clean.extend_from_slice(&[0.5; 4]);
        let test: Vec<f64> = clean.iter().map(|&c| c + 0.05).collect();
        let clean = wave(clean);
        let test = wave(test);

        let per_frame = 10.0 * (4.0 * 0.25 / (4.0 * 0.0025f64)).log10();
        let snr = seg_snr(&clean, &test, &cfg).unwrap();
        assert!((snr - per_frame).abs() < 1e-12);

        let silent = wave(vec![0.0; 12]);
        let any = wave(vec![0.1; 12]);
        assert!(matches!(
            seg_snr(&silent, &any, &cfg),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn seg_snr_matches_scalar_oracle() {
        let mut r = rng(14);
        let clean = random_wave(&mut r, 5000);
        let test = random_wave(&mut r, 5000);
        let cfg = MetricsConfig::default();

        let mut total = 0.0;
        let mut count = 0;
        let mut start = 0;
        while start + 256 <= 5000 {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in start..start + 256 {
                num += clean.samples()[i] * clean.samples()[i];
                let d = clean.samples()[i] - test.samples()[i];
                den += d * d;
            }
            if num >= 1e-10 {
                total += (10.0 * (num / den.max(1e-12)).log10()).clamp(-10.0, 35.0);
                count += 1;
            }
            start += 128;
        }
        let expected = total / count as f64;
        assert!((seg_snr(&clean, &test, &cfg).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn seg_snr_clamps_low() {
        let mut r = rng(15);
        let clean = random_wave(&mut r, 1024);
        let test = wave(
            clean
                .samples()
                .iter()
                .map(|&c| c + 100.0 * (1.0 + c))
                .collect(),
        );
        let cfg = MetricsConfig::default();
        assert_eq!(seg_snr(&clean, &test, &cfg).unwrap(), -10.0);
    }

    #[test]
    fn seg_snr_ignores_partial_tail_frame() {
        let mut r = rng(16);
        let cfg = MetricsConfig::default();
        let a = random_wave(&mut r, 256 + 128);
        let b = random_wave(&mut r, 256 + 128);
        let (_, count) = seg_snr_stats(&a, &b, &cfg).unwrap();
        assert_eq!(count, 2);
    }

    #[test]
    fn improvement_report_of_noisy_vs_noisy_is_zero() {
        let mut r = rng(17);
        let clean = random_wave(&mut r, 4000);
        let noisy = random_wave(&mut r, 4000);
        let cfg = MetricsConfig::default();
        let report = improvement_report(&clean, &noisy, &noisy, &cfg).unwrap();
        assert_eq!(report.segsnr_improvement_db, 0.0);
        assert_eq!(report.overall_snr_improvement_db, 0.0);
        assert_eq!(report.n_frames, (4000 - 256) / 128 + 1);
    }

    #[test]
    fn improvement_report_of_perfect_enhancement_hits_clamps() {
        let mut r = rng(18);
        let clean = random_wave(&mut r, 4000);
        let noisy = random_wave(&mut r, 4000);
        let cfg = MetricsConfig::default();
        let report = improvement_report(&clean, &noisy, &clean, &cfg).unwrap();
        assert_eq!(report.segsnr_enhanced_db, 35.0);
        assert_eq!(report.overall_snr_enhanced_db, 99.0);
        assert_eq!(
            report.segsnr_improvement_db,
            35.0 - report.segsnr_noisy_db
        );
        assert_eq!(
            report.overall_snr_improvement_db,
            99.0 - report.overall_snr_noisy_db
        );
    }

    fn spec_layout() -> FrameLayout {
        FrameLayout::new(256, 128, 256, WindowKind::Hamming).unwrap()
    }

    fn argmax(column: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in column.iter().enumerate() {
            if v > column[best] {
                best = i;
            }
        }
        best
    }

    fn column(m: &SpectrogramMatrix<f64>, frame: usize) -> Vec<f64> {
        m.values.iter().map(|row| row[frame]).collect()
    }

    #[test]
    fn spectrogram_of_tone_peaks_at_expected_bin() {
        let samples: Vec<f64> = (0..8192)
            .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 8000.0).sin())
            .collect();
        let m = spectrogram(&wave(samples), spec_layout(), -80.0).unwrap();
        for frame in 0..m.n_frames() {
            assert_eq!(argmax(&column(&m, frame)), 32, "frame {frame}");
        }
    }

    #[test]
    fn spectrogram_of_chirp_has_nondecreasing_argmax() {
        let n = 8192.0;
        let samples: Vec<f64> = (0..8192)
            .map(|i| {
                let t = i as f64;
                let phase = 2.0 * std::f64::consts::PI
                    * (200.0 * t + (3000.0 - 200.0) * t * t / (2.0 * n))
                    / 8000.0;
                phase.sin()
            })
            .collect();
        let m = spectrogram(&wave(samples), spec_layout(), -80.0).unwrap();
        let mut prev = 0;
        for frame in 0..m.n_frames() {
            let peak = argmax(&column(&m, frame));
            assert!(peak >= prev, "frame {frame}: {peak} < {prev}");
            prev = peak;
        }
        assert!(prev > 64);
    }

    #[test]
    fn spectrogram_of_silence_is_exactly_the_floor() {
        let m = spectrogram(&wave(vec![0.0; 512]), spec_layout(), -80.0).unwrap();
        for row in &m.values {
            for &v in row {
                assert_eq!(v, -80.0);
            }
        }
    }

    #[test]
    fn spectrogram_dimensions_and_metadata() {
        let mut r = rng(19);
        let m = spectrogram(&random_wave(&mut r, 1000), spec_layout(), -80.0).unwrap();
        assert_eq!(m.n_bins(), 129);
        assert_eq!(m.n_frames(), 8);
        assert_eq!(m.bin_hz, 31.25);
        assert_eq!(m.hop_s, 0.016);
    }

    #[test]
    fn spectrogram_rejects_short_input() {
        let mut r = rng(20);
        let short = random_wave(&mut r, 255);
        assert!(matches!(
            spectrogram(&short, spec_layout(), -80.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn spectrogram_csv_shape_and_determinism() {
        let mut r = rng(21);
        let signal = random_wave(&mut r, 1000);
        let m = spectrogram(&signal, spec_layout(), -80.0).unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 130);
        assert_eq!(lines[0], "bin_hz=31.250000,hop_s=0.016000");
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 8);
            for cell in line.split(',') {
                let (_, frac) = cell.split_once('.').unwrap();
                assert_eq!(frac.len(), 6);
            }
        }
        let again = spectrogram(&signal, spec_layout(), -80.0).unwrap().to_csv();
        assert_eq!(csv, again);
    }

    #[test]
    fn metrics_config_validation() {
        let mut cfg = MetricsConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.hop = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = MetricsConfig::<f64>::default();
        cfg.hop = 300;
        assert!(cfg.validate().is_err());

        let mut cfg = MetricsConfig::<f64>::default();
        cfg.segsnr_min_db = 40.0;
        assert!(cfg.validate().is_err());
    }
}
