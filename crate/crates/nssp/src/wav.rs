//! Minimal RIFF/WAVE reader and writer for the one format the toolkit
//! speaks: PCM, 16-bit little-endian, mono.
//!
//! Reading walks the chunk list (skipping unknown chunks, honoring the
//! odd-size pad byte) and scales samples to `[-1, 1)` by `1/32768`.
//! Writing quantizes by `round(s * 32768)` saturated to `[-32768, 32767]`
//! and emits a canonical 44-byte header, so values already on the 16-bit
//! grid round-trip bitwise.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Waveform;
use crate::Scalar;

/// Reads a PCM 16-bit mono WAV file.
pub fn read_wav<S: Scalar>(path: impl AsRef<Path>) -> Result<Waveform<S>> {
    let bytes = fs::read(path)?;
    let (samples, sample_rate_hz) = parse_wav(&bytes)?;
    let scale = S::one() / S::from(32768).unwrap();
    let samples = samples
        .into_iter()
        .map(|s| S::from(s).unwrap() * scale)
        .collect();
    Waveform::new(samples, sample_rate_hz)
}

/// Writes a PCM 16-bit mono WAV file, saturating out-of-range samples.
pub fn write_wav<S: Scalar>(path: impl AsRef<Path>, signal: &Waveform<S>) -> Result<()> {
    let quantized: Vec<i16> = signal
        .samples()
        .iter()
        .map(|&s| {
            let scaled = (s.to_f64().unwrap_or(0.0) * 32768.0).round();
            scaled.clamp(-32768.0, 32767.0) as i16
        })
        .collect();
    fs::write(path, encode_wav(&quantized, signal.sample_rate_hz()))?;
    Ok(())
}

fn need<'a>(bytes: &'a [u8], offset: usize, len: usize, what: &str) -> Result<&'a [u8]> {
    match offset.checked_add(len) {
        Some(end) if end <= bytes.len() => Ok(&bytes[offset..end]),
        _ => Err(Error::MalformedWav {
            offset,
            reason: format!("need {len} bytes for {what}, file has {}", bytes.len()),
        }),
    }
}

fn u16_le(bytes: &[u8]) -> u16 {
    u16::from_le_bytes([bytes[0], bytes[1]])
}

fn u32_le(bytes: &[u8]) -> u32 {
    u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]])
}

pub(crate) fn parse_wav(bytes: &[u8]) -> Result<(Vec<i16>, u32)> {
    if need(bytes, 0, 4, "RIFF magic")? != b"RIFF" {
        return Err(Error::MalformedWav {
            offset: 0,
            reason: "missing RIFF magic".into(),
        });
    }
    need(bytes, 4, 4, "RIFF size")?;
    if need(bytes, 8, 4, "WAVE magic")? != b"WAVE" {
        return Err(Error::MalformedWav {
            offset: 8,
            reason: "missing WAVE magic".into(),
        });
    }

    let mut pos = 12;
    let mut fmt: Option<(usize, &[u8])> = None;
    let mut data: Option<&[u8]> = None;
    while pos < bytes.len() {
        let header = need(bytes, pos, 8, "chunk header")?;
        let id: [u8; 4] = header[..4].try_into().unwrap();
        let size = u32_le(&header[4..8]) as usize;
        let body_offset = pos + 8;
        let body = need(bytes, body_offset, size, "chunk body")?;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::MalformedWav {
                        offset: body_offset,
                        reason: format!("fmt chunk must be at least 16 bytes, got {size}"),
                    });
                }
                fmt = Some((body_offset, body));
            }
            b"data" => {
                if size % 2 != 0 {
                    return Err(Error::MalformedWav {
                        offset: body_offset,
                        reason: format!("PCM16 data chunk has odd byte length {size}"),
                    });
                }
                data = Some(body);
            }
            _ => {}
        }
        pos = body_offset + size + size % 2;
    }

    let (fmt_offset, fmt) = fmt.ok_or_else(|| Error::MalformedWav {
        offset: bytes.len(),
        reason: "reached end of file without a fmt chunk".into(),
    })?;
    let audio_format = u16_le(&fmt[0..2]);
    if audio_format != 1 {
        return Err(Error::UnsupportedFormat {
            field: "audio_format",
            value: audio_format as u32,
            expected: "1 (PCM)",
        });
    }
    let num_channels = u16_le(&fmt[2..4]);
    if num_channels != 1 {
        return Err(Error::UnsupportedFormat {
            field: "num_channels",
            value: num_channels as u32,
            expected: "1 (mono)",
        });
    }
    let bits_per_sample = u16_le(&fmt[14..16]);
    if bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat {
            field: "bits_per_sample",
            value: bits_per_sample as u32,
            expected: "16",
        });
    }
    let sample_rate_hz = u32_le(&fmt[4..8]);
    if sample_rate_hz == 0 {
        return Err(Error::MalformedWav {
            offset: fmt_offset + 4,
            reason: "sample rate is zero".into(),
        });
    }

    let data = data.ok_or_else(|| Error::MalformedWav {
        offset: bytes.len(),
        reason: "reached end of file without a data chunk".into(),
    })?;
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok((samples, sample_rate_hz))
}

pub(crate) fn encode_wav(samples: &[i16], sample_rate_hz: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.saturating_mul(2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}
