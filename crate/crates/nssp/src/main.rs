//! Command-line front end: enhance WAV files, mix noise at exact SNR,
//! score enhancement runs, export spectrograms, and batch the whole
//! mix-enhance-eval loop over a manifest.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nssp::{
    enhance, improvement_report, load_config, mix_at_snr, parse_psi_mode, read_wav, spectrogram,
    write_wav, EnhancerConfig, Error, FrameLayout, Waveform, WindowKind,
};

#[derive(Parser)]
#[command(
    name = "nssp",
    version,
    about = "Two-step speech enhancement (spectral subtraction + phase compensation) \
             with an objective-evaluation harness"
)]
struct Cli {
    /// Configuration file of `key = value` overrides.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance a noisy WAV: spectral subtraction, then phase compensation.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        /// Phase compensation strength: `snr` or `constant:<lambda>`.
        #[arg(long, value_name = "MODE")]
        psi_mode: Option<String>,
    },
    /// Mix a noise segment into clean speech at a target SNR.
    Mix {
        clean: PathBuf,
        noise: PathBuf,
        #[arg(allow_negative_numbers = true)]
        snr_db: f64,
        output: PathBuf,
        /// Deterministic selector of the noise start sample.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Score noisy and enhanced WAVs against a clean reference.
    Eval {
        clean: PathBuf,
        noisy: PathBuf,
        enhanced: PathBuf,
        csv_out: PathBuf,
    },
    /// Export a one-sided dB magnitude spectrogram as CSV.
    Spectrogram {
        input: PathBuf,
        csv_out: PathBuf,
        /// Magnitudes at or below this level are floored, in dB.
        #[arg(long, default_value_t = -80.0, allow_negative_numbers = true)]
        db_floor: f64,
    },
    /// Run mix -> enhance -> eval for every manifest cell.
    Batch {
        manifest: PathBuf,
        csv_out: PathBuf,
        /// Phase compensation strength: `snr` or `constant:<lambda>`.
        #[arg(long, value_name = "MODE")]
        psi_mode: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("nssp: {err}");
            ExitCode::from(match err {
                Error::UnsupportedFormat { .. }
                | Error::MalformedWav { .. }
                | Error::Config(_)
                | Error::Io(_) => 3,
                Error::InvalidArgument(_)
                | Error::TooShortInput { .. }
                | Error::DegenerateInput(_) => 4,
            })
        }
    }
}

fn run(cli: Cli) -> nssp::Result<()> {
    let config = load_config::<f64>(cli.config.as_deref())?;
    match cli.command {
        Command::Enhance {
            input,
            output,
            psi_mode,
        } => {
            let cfg = with_psi_mode(config, psi_mode)?;
            let noisy = read_wav::<f64>(&input)?;
            let enhanced = enhance(&noisy, &cfg)?;
            write_wav(&output, &enhanced)
        }
        Command::Mix {
            clean,
            noise,
            snr_db,
            output,
            seed_offset,
        } => {
            let clean = read_wav::<f64>(&clean)?;
            let noise = read_wav::<f64>(&noise)?;
            let noisy = mix_at_snr(&clean, &noise, snr_db, seed_offset)?;
            write_wav(&output, &noisy)
        }
        Command::Eval {
            clean,
            noisy,
            enhanced,
            csv_out,
        } => {
            let clean = read_wav::<f64>(&clean)?;
            let noisy = read_wav::<f64>(&noisy)?;
            let enhanced = read_wav::<f64>(&enhanced)?;
            let r = improvement_report(&clean, &noisy, &enhanced, &config.metrics)?;
            let csv = format!(
                "segsnr_noisy_db,segsnr_enhanced_db,segsnr_impr_db,\
                 ovl_snr_noisy_db,ovl_snr_enhanced_db,ovl_snr_impr_db,n_frames\n\
                 {:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
                r.segsnr_noisy_db,
                r.segsnr_enhanced_db,
                r.segsnr_improvement_db,
                r.overall_snr_noisy_db,
                r.overall_snr_enhanced_db,
                r.overall_snr_improvement_db,
                r.n_frames
            );
            write_atomic(&csv_out, &csv)
        }
        Command::Spectrogram {
            input,
            csv_out,
            db_floor,
        } => {
            let signal = read_wav::<f64>(&input)?;
            let frame_len = config.metrics.frame_len;
            let layout = FrameLayout::new(
                frame_len,
                config.metrics.hop,
                frame_len + frame_len % 2,
                WindowKind::Hamming,
            )?;
            let matrix = spectrogram(&signal, layout, db_floor)?;
            write_atomic(&csv_out, &matrix.to_csv())
        }
        Command::Batch {
            manifest,
            csv_out,
            psi_mode,
        } => {
            let cfg = with_psi_mode(config, psi_mode)?;
            let csv = run_batch(&manifest, &cfg)?;
            write_atomic(&csv_out, &csv)
        }
    }
}

fn with_psi_mode(
    mut cfg: EnhancerConfig<f64>,
    mode: Option<String>,
) -> nssp::Result<EnhancerConfig<f64>> {
    if let Some(mode) = mode {
        cfg.step2.psi_mode = parse_psi_mode(&mode)?;
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Manifest lines are `clean_path noise_path snr1,snr2,...` (`#` starts a
/// comment); SNR values may also be separated by whitespace. Every cell is
/// mixed with seed offset 0, enhanced, and scored; rows keep manifest order.
fn run_batch(manifest: &Path, cfg: &EnhancerConfig<f64>) -> nssp::Result<String> {
    let text = std::fs::read_to_string(manifest)?;
    let mut csv =
        String::from("file_id,noise_id,snr_db,segsnr_impr_db,ovl_snr_impr_db,pesq_external\n");
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(Error::config(format!(
                "manifest line {}: expected `clean_path noise_path snr1,snr2,...`",
                idx + 1
            )));
        }
        let clean_path = Path::new(tokens[0]);
        let noise_path = Path::new(tokens[1]);
        let mut snrs = Vec::new();
        for token in &tokens[2..] {
            for piece in token.split(',').filter(|p| !p.is_empty()) {
                let snr: f64 = piece.parse().map_err(|_| {
                    Error::config(format!(
                        "manifest line {}: invalid SNR value `{piece}`",
                        idx + 1
                    ))
                })?;
                snrs.push(snr);
            }
        }

        let clean: Waveform<f64> = read_wav(clean_path)?;
        let noise: Waveform<f64> = read_wav(noise_path)?;
        let file_id = stem_of(clean_path);
        let noise_id = stem_of(noise_path);
        for snr in snrs {
            let noisy = mix_at_snr(&clean, &noise, snr, 0)?;
            let enhanced = enhance(&noisy, cfg)?;
            let report = improvement_report(&clean, &noisy, &enhanced, &cfg.metrics)?;
            csv.push_str(&format!(
                "{file_id},{noise_id},{snr:.6},{:.6},{:.6},\n",
                report.segsnr_improvement_db, report.overall_snr_improvement_db
            ));
        }
    }
    Ok(csv)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes via a sibling temp file and rename so a crash never leaves a
/// partial CSV behind.
fn write_atomic(path: &Path, contents: &str) -> nssp::Result<()> {
    let name = path.file_name().ok_or_else(|| {
        Error::invalid(format!("output path `{}` has no file name", path.display()))
    })?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
