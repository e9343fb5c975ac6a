//! `ooksim` — generate DFT-s-OFDM OOK waveforms and run link-level BER
//! scenarios from JSON scenario files or built-in presets.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 validation error. Errors
//! are emitted as one JSON object on stderr so scripts can parse them.

mod presets;

use clap::{Parser, Subcommand};
use ooksim_core::export::{
    self, write_envelope_csv, write_frame_csv, write_json, write_signal_csv,
    write_spectrum_csv,
};
use ooksim_core::harness::{
    concentration_modes, guard_sweep, BerReport, ConcentrationMode, ScenarioRuntime,
};
use ooksim_core::metrics::{self, envelope_metrics, BitEnsemble};
use ooksim_core::ofdm::{assemble_symbol, modulate_message};
use ooksim_core::precoder::coded_from_input;
use ooksim_core::receiver::envelope;
use ooksim_core::scenario::CheckedScenario;
use ooksim_core::selftest;
use ooksim_core::{Complex64, Scenario};
use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ooksim",
    version,
    about = "DFT-s-OFDM OOK wake-up-signal generator and link simulator"
)]
struct Cli {
    /// Scenario JSON file (mutually exclusive with --preset).
    #[arg(long, global = true, value_name = "FILE")]
    scenario: Option<PathBuf>,

    /// Built-in preset name; see `ooksim presets` for the list.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Master seed, overriding the scenario's `seed` field.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for output artifacts (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for Monte Carlo trials; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one noiseless message; write frame, waveform, envelope
    /// CSVs and a metrics JSON.
    Generate {
        /// Info bits as a 0/1 string (e.g. 10011010). Give one symbol's
        /// worth to repeat it, or bits for every symbol concatenated.
        /// Omitted: a seeded random draw.
        #[arg(long)]
        bits: Option<String>,
    },
    /// Monte Carlo BER curve; writes ber.json and ber.csv.
    Ber {
        /// Comma-separated SNR list in dB, overriding the scenario grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
        /// Trials per SNR point, overriding the scenario.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// BER over a grid of left/right guard-pulse counts at one SNR.
    SweepGuards {
        /// Comma-separated left guard-pulse counts.
        #[arg(long, value_delimiter = ',')]
        lgp: Vec<usize>,
        /// Comma-separated right guard-pulse counts.
        #[arg(long, value_delimiter = ',')]
        rgp: Vec<usize>,
        /// SNR in dB (default: first scenario SNR point).
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        /// Trials per grid cell, overriding the scenario.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Compare tx-only / rx-only / joint pulse concentration at one SNR.
    ConcentrationModes {
        /// Comma-separated concentration amounts in pulses per side.
        #[arg(long, value_delimiter = ',')]
        amounts: Vec<usize>,
        /// SNR in dB (default: first scenario SNR point).
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        /// Trials per cell, overriding the scenario.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Ensemble-averaged per-subcarrier power; writes spectrum.csv.
    Spectrum {
        /// Random bit-string draws; 0 picks exhaustive enumeration for
        /// narrow inputs and 1024 seeded draws otherwise.
        #[arg(long, default_value_t = 0)]
        draws: usize,
    },
    /// Run the fast analytical invariant suite and print each check.
    Selftest,
    /// List the built-in preset names.
    Presets,
}

#[derive(Debug)]
enum CliError {
    /// Bad input: unknown preset, malformed scenario, inconsistent flags.
    Validation(String),
    /// Failure while executing a valid request: IO, numerics, threading.
    Runtime(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

macro_rules! runtime_from {
    ($($ty:ty),+ $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )+};
}

runtime_from!(
    ooksim_core::harness::HarnessError,
    ooksim_core::ofdm::OfdmError,
    ooksim_core::precoder::PrecodeError,
    ooksim_core::metrics::MetricsError,
    export::ExportError,
    std::io::Error,
);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload =
                serde_json::json!({ "error": e.kind(), "message": e.message() });
            eprintln!("{payload}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool setup: {e}")))?;
    }
    match &cli.command {
        Command::Generate { bits } => cmd_generate(cli, bits.as_deref()),
        Command::Ber { snr, trials } => cmd_ber(cli, snr.as_deref(), *trials),
        Command::SweepGuards { lgp, rgp, snr, trials } => {
            cmd_sweep_guards(cli, lgp, rgp, *snr, *trials)
        }
        Command::ConcentrationModes { amounts, snr, trials } => {
            cmd_concentration(cli, amounts, *snr, *trials)
        }
        Command::Spectrum { draws } => cmd_spectrum(cli, *draws),
        Command::Selftest => cmd_selftest(),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

/// Resolves --scenario / --preset / --seed into a validated scenario.
fn load_scenario(cli: &Cli) -> Result<CheckedScenario, CliError> {
    let text = match (&cli.scenario, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err(validation("pass either --scenario or --preset, not both"))
        }
        (Some(path), None) => fs::read_to_string(path).map_err(|e| {
            validation(format!("cannot read scenario file {}: {e}", path.display()))
        })?,
        (None, Some(name)) => presets::lookup(name)
            .ok_or_else(|| {
                validation(format!(
                    "unknown preset {name:?}; available: {}",
                    presets::names().join(", ")
                ))
            })?
            .to_string(),
        (None, None) => {
            return Err(validation(
                "a scenario is required: pass --scenario <file> or --preset <name>",
            ))
        }
    };
    let mut sc = Scenario::from_json(&text)
        .map_err(|e| validation(format!("scenario parse error: {e}")))?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    sc.validate().map_err(|e| validation(format!("invalid scenario: {e}")))
}

/// Opens `name` inside the output directory, creating the directory.
fn create_artifact(out_dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", out_dir.display()))
    })?;
    let path = out_dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    eprintln!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn parse_bits(text: &str) -> Result<Vec<bool>, CliError> {
    if text.is_empty() {
        return Err(validation("--bits must not be empty"));
    }
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(validation(format!(
                "--bits accepts only 0 and 1, found {other:?}"
            ))),
        })
        .collect()
}

/// Splits the bits flag into per-symbol strings, or draws them.
fn resolve_bits(
    flag: Option<&str>,
    width: usize,
    symbols: usize,
    seed: u64,
) -> Result<Vec<Vec<bool>>, CliError> {
    match flag {
        Some(text) => {
            let bits = parse_bits(text)?;
            if bits.len() == width {
                Ok(vec![bits; symbols])
            } else if bits.len() == width * symbols {
                Ok(bits.chunks(width).map(<[bool]>::to_vec).collect())
            } else {
                Err(validation(format!(
                    "--bits must hold {width} bits (one symbol, repeated) or \
                     {} bits ({symbols} symbols); got {}",
                    width * symbols,
                    bits.len()
                )))
            }
        }
        None => {
            use rand::Rng;
            let mut rng = ooksim_core::rng::stream(seed, &[0, 0]);
            Ok((0..symbols)
                .map(|_| (0..width).map(|_| rng.gen()).collect())
                .collect())
        }
    }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Serialize)]
struct SymbolReport {
    bits: String,
    coded_bits: String,
    eta: f64,
    on_ripple: Option<f64>,
    off_leakage: Option<f64>,
    window_energy: Vec<f64>,
}

#[derive(Serialize)]
struct GenerateReport {
    scenario_id: String,
    sample_rate: f64,
    samples: usize,
    mean_power: f64,
    papr_db: f64,
    symbols: Vec<SymbolReport>,
}

fn cmd_generate(cli: &Cli, bits_flag: Option<&str>) -> Result<(), CliError> {
    let cs = load_scenario(cli)?;
    let rt = ScenarioRuntime::new(&cs)?;
    let cc = cs.cc();
    let plan = cs.band_plan();
    let width = cc.info_bits_per_symbol();
    let symbols = cs.symbols_per_trial;
    let per_symbol = resolve_bits(bits_flag, width, symbols, cs.seed)?;

    // Co-channel data stays silent for waveform artifacts; the WUS block
    // is what the plots show.
    let silence = vec![Complex64::new(0.0, 0.0); plan.data_indices().len()];
    let mut grids = Vec::with_capacity(symbols);
    let mut reports = Vec::with_capacity(symbols);
    for (s, bits) in per_symbol.iter().enumerate() {
        let wus = rt.wus_symbol(s, bits)?;
        let name = if symbols == 1 {
            "frame.csv".to_string()
        } else {
            format!("frame_{s}.csv")
        };
        write_frame_csv(
            create_artifact(&cli.out_dir, &name)?,
            &wus.coefficients,
            cc.wus_f0(),
        )?;
        grids.push(assemble_symbol(&wus.coefficients, &silence, &plan)?);
        reports.push((bits.clone(), wus.eta));
    }

    let tx = modulate_message(&grids, cc.n_cp, cc.sample_rate())?;
    write_signal_csv(create_artifact(&cli.out_dir, "waveform.csv")?, &tx)?;
    let env = envelope(&tx.samples);
    write_envelope_csv(create_artifact(&cli.out_dir, "envelope.csv")?, &env, tx.sample_rate)?;

    let mut symbol_reports = Vec::with_capacity(symbols);
    for (s, (bits, eta)) in reports.into_iter().enumerate() {
        let coded = coded_from_input(&bits, cc)?;
        let (on_ripple, off_leakage, window_energy) =
            match envelope_metrics(tx.body(s), &coded) {
                Ok(m) => (Some(m.on_ripple), Some(m.off_leakage), m.window_energy),
                // All-OFF symbols have no ON windows to rate.
                Err(_) => (None, None, Vec::new()),
            };
        symbol_reports.push(SymbolReport {
            bits: bit_string(&bits),
            coded_bits: bit_string(&coded.0),
            eta,
            on_ripple,
            off_leakage,
            window_energy,
        });
    }
    let mean_power =
        tx.samples.iter().map(Complex64::norm_sqr).sum::<f64>() / tx.samples.len() as f64;
    let peak_power = tx.samples.iter().map(Complex64::norm_sqr).fold(0.0, f64::max);
    let report = GenerateReport {
        scenario_id: cs.fingerprint(),
        sample_rate: tx.sample_rate,
        samples: tx.samples.len(),
        mean_power,
        papr_db: 10.0 * (peak_power / mean_power).log10(),
        symbols: symbol_reports,
    };
    write_json(create_artifact(&cli.out_dir, "metrics.json")?, &report)?;
    Ok(())
}

fn cmd_ber(
    cli: &Cli,
    snr_flag: Option<&[f64]>,
    trials_flag: Option<usize>,
) -> Result<(), CliError> {
    let cs = load_scenario(cli)?;
    let snr: Vec<f64> = match snr_flag {
        Some(list) => list.to_vec(),
        None => cs.snr_db.clone(),
    };
    if snr.is_empty() {
        return Err(validation(
            "no SNR points: pass --snr or set snr_db in the scenario",
        ));
    }
    let trials = trials_flag.unwrap_or(cs.trials);
    if trials == 0 {
        return Err(validation("trials must be positive"));
    }
    let rt = ScenarioRuntime::new(&cs)?;
    let master = cs.seed;
    eprintln!(
        "scenario {}: {} SNR points x {} trials, seed {}",
        cs.fingerprint(),
        snr.len(),
        trials,
        master
    );
    let mut points = Vec::with_capacity(snr.len());
    for (i, &db) in snr.iter().enumerate() {
        let point = rt.ber_point(master, i, db, trials)?;
        eprintln!(
            "  snr {:+6.2} dB: ber {:.4e} ({}/{} bit errors)",
            db, point.ber, point.bit_errors, point.bits
        );
        points.push(point);
    }
    let report = BerReport { fingerprint: cs.fingerprint(), master_seed: master, points };
    write_json(create_artifact(&cli.out_dir, "ber.json")?, &report)?;
    let mut csv = create_artifact(&cli.out_dir, "ber.csv")?;
    writeln!(csv, "snr_db,ber,ci_lo,ci_hi,scenario_id")?;
    for p in &report.points {
        writeln!(
            csv,
            "{},{:e},{:e},{:e},{}",
            p.snr_db, p.ber, p.ci95_low, p.ci95_high, report.fingerprint
        )?;
    }
    Ok(())
}

/// One SNR for a sweep: the flag if given, else the scenario's first point.
fn sweep_snr(cs: &CheckedScenario, flag: Option<f64>) -> Result<f64, CliError> {
    flag.or_else(|| cs.snr_db.first().copied()).ok_or_else(|| {
        validation("an SNR is required: pass --snr or set snr_db in the scenario")
    })
}

fn sweep_trials(cs: &CheckedScenario, flag: Option<usize>) -> Result<usize, CliError> {
    let trials = flag.unwrap_or(cs.trials);
    if trials == 0 {
        return Err(validation("trials must be positive"));
    }
    Ok(trials)
}

fn cmd_sweep_guards(
    cli: &Cli,
    lgp: &[usize],
    rgp: &[usize],
    snr_flag: Option<f64>,
    trials_flag: Option<usize>,
) -> Result<(), CliError> {
    if lgp.is_empty() || rgp.is_empty() {
        return Err(validation("--lgp and --rgp each need at least one value"));
    }
    let cs = load_scenario(cli)?;
    let snr = sweep_snr(&cs, snr_flag)?;
    let trials = sweep_trials(&cs, trials_flag)?;
    eprintln!(
        "guard sweep {}x{} cells at {snr} dB, {trials} trials each",
        lgp.len(),
        rgp.len()
    );
    let report = guard_sweep(&cs, lgp, rgp, snr, trials, cs.seed)?;
    write_json(create_artifact(&cli.out_dir, "guard_sweep.json")?, &report)?;
    let mut csv = create_artifact(&cli.out_dir, "guard_sweep.csv")?;
    writeln!(csv, "n_lgp,n_rgp,snr_db,ber,ci_lo,ci_hi,scenario_id")?;
    for cell in &report.cells {
        writeln!(
            csv,
            "{},{},{},{:e},{:e},{:e},{}",
            cell.n_lgp,
            cell.n_rgp,
            report.snr_db,
            cell.point.ber,
            cell.point.ci95_low,
            cell.point.ci95_high,
            report.fingerprint
        )?;
    }
    Ok(())
}

fn mode_label(mode: ConcentrationMode) -> &'static str {
    match mode {
        ConcentrationMode::TxOnly => "tx_only",
        ConcentrationMode::RxOnly => "rx_only",
        ConcentrationMode::Joint => "joint",
    }
}

fn cmd_concentration(
    cli: &Cli,
    amounts: &[usize],
    snr_flag: Option<f64>,
    trials_flag: Option<usize>,
) -> Result<(), CliError> {
    if amounts.is_empty() {
        return Err(validation("--amounts needs at least one value"));
    }
    let cs = load_scenario(cli)?;
    let snr = sweep_snr(&cs, snr_flag)?;
    let trials = sweep_trials(&cs, trials_flag)?;
    eprintln!(
        "concentration modes over {} amounts at {snr} dB, {trials} trials each",
        amounts.len()
    );
    let report = concentration_modes(&cs, amounts, snr, trials, cs.seed)?;
    write_json(create_artifact(&cli.out_dir, "concentration.json")?, &report)?;
    let mut csv = create_artifact(&cli.out_dir, "concentration.csv")?;
    writeln!(csv, "mode,pulses,snr_db,ber,ci_lo,ci_hi,scenario_id")?;
    for cell in &report.cells {
        writeln!(
            csv,
            "{},{},{},{:e},{:e},{:e},{}",
            mode_label(cell.mode),
            cell.pulses,
            report.snr_db,
            cell.point.ber,
            cell.point.ci95_low,
            cell.point.ci95_high,
            report.fingerprint
        )?;
    }
    Ok(())
}

fn cmd_spectrum(cli: &Cli, draws: usize) -> Result<(), CliError> {
    let cs = load_scenario(cli)?;
    let cc = cs.cc();
    let ensemble = if draws == 0 {
        metrics::default_ensemble(cc, cs.seed)
    } else {
        BitEnsemble::Random { draws, seed: cs.seed }
    };
    let power = metrics::average_spectrum(cc, &cs.fdss, &cs.spreading, ensemble)?;
    write_spectrum_csv(create_artifact(&cli.out_dir, "spectrum.csv")?, &power, cc.f_sc)?;
    Ok(())
}

fn cmd_selftest() -> Result<(), CliError> {
    let results = selftest::run_selftest();
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed == 0 {
        println!("selftest: all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "selftest: {failed} of {} checks failed",
            results.len()
        )))
    }
}
