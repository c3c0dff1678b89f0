//! `oscsys`: generate, verify and exercise oscillator signal systems.
//!
//! Exit codes: 0 success, 2 input error, 3 bound assertion failure,
//! 4 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oscillator_core::applications::{
    cdma_simulate, radar_simulate, ChannelMode, ChannelScenario, SignalSource, NOISE_MODEL,
};
use oscillator_core::heisenberg::heisenberg_system;
use oscillator_core::io;
use oscillator_core::metrics::{ambiguity, fourier_invariance_check, system_report};
use oscillator_core::oscillator::{build_system, extended_system, OscillatorFamily, TorusKind};
use oscillator_core::{Error, PrimeField, Signal, SignalLabel, SignalSystem, SystemKind};

#[derive(Parser)]
#[command(name = "oscsys", version, about = "Oscillator signal systems over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signal system and write it as JSON.
    Generate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        kind: SystemKind,
        /// System translated by `extended`.
        #[arg(long, default_value = "split")]
        base_kind: SystemKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check correlation bounds and Fourier invariance of a stored system.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Assert the proof-constant bounds (always on).
        #[arg(long)]
        assert_proof_bounds: bool,
        /// Also print the headline 2/sqrt(p) and 4/sqrt(p) comparisons.
        #[arg(long)]
        report_headline_bounds: bool,
    },
    /// Write the magnitude of an ambiguity grid as CSV.
    Ambiguity {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        signal: SignalLabel,
        /// Second signal for a cross-ambiguity grid.
        #[arg(long)]
        with: Option<SignalLabel>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Radar range and velocity estimation.
    Radar {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "0:0")]
        signal: SignalLabel,
        #[arg(long, default_value = "full")]
        scenario: ChannelMode,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Multi-user CDMA bit error rate.
    Cdma {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 3)]
        users: usize,
        #[arg(long, default_value = "full")]
        scenario: ChannelMode,
        /// Decode at the true distortions instead of estimating them.
        #[arg(long)]
        known_distortions: bool,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[command(flatten)]
        channel: ChannelArgs,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Read signals from a stored system instead of generating them.
    #[arg(long, conflicts_with = "p")]
    file: Option<PathBuf>,
    #[arg(long, required_unless_present = "file")]
    p: Option<u64>,
    #[arg(long, default_value = "nonsplit")]
    kind: SystemKind,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long, allow_negative_numbers = true, conflicts_with = "noiseless")]
    snr_db: Option<f64>,
    /// No noise (the default when no SNR is given).
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Input(String),
    Bounds(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ClusterAmbiguity { .. } | Error::Spectral(_) => Failure::Numerical(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CliResult = std::result::Result<String, Failure>;

enum Source {
    Stored(SignalSystem),
    Lazy(OscillatorFamily),
}

impl Source {
    fn open(args: &SourceArgs) -> std::result::Result<(PrimeField, Source), Failure> {
        if let Some(path) = &args.file {
            let s = io::load(path)?;
            return Ok((PrimeField::new(s.p)?, Source::Stored(s)));
        }
        let f = PrimeField::new(args.p.expect("clap requires --p without --file"))?;
        let src = match args.kind {
            SystemKind::Split | SystemKind::NonSplit => {
                Source::Lazy(OscillatorFamily::new(&f, TorusKind::try_from(args.kind)?)?)
            }
            SystemKind::Heisenberg => Source::Stored(heisenberg_system(&f)),
            SystemKind::Extended => return Err(Failure::Input("extended systems must be read with --file".into())),
        };
        Ok((f, src))
    }

    fn kind(&self) -> SystemKind {
        match self {
            Source::Stored(s) => s.kind,
            Source::Lazy(fam) => fam.kind().system_kind(),
        }
    }

    fn as_source(&self) -> &dyn SignalSource {
        match self {
            Source::Stored(s) => s,
            Source::Lazy(fam) => fam,
        }
    }

    fn lookup(&self, label: &SignalLabel) -> std::result::Result<Signal, Failure> {
        let found = match self {
            Source::Stored(s) => s.find(label).map(|ls| ls.signal.clone()),
            Source::Lazy(fam) => match fam.index_of(label) {
                Some(i) => Some(fam.signal(i)?.signal),
                None => None,
            },
        };
        found.ok_or_else(|| Failure::Input(Error::UnknownLabel(label.to_string()).to_string()))
    }
}

fn scenario(mode: ChannelMode, trials: usize, c: &ChannelArgs) -> ChannelScenario {
    ChannelScenario {
        mode,
        snr_db: if c.noiseless { None } else { c.snr_db },
        seed: c.seed,
        trials,
    }
}

fn channel_lines(sc: &ChannelScenario) -> String {
    let snr = sc.snr_db.map_or("none".to_string(), |s| format!("{s:?}"));
    let mut out = format!("scenario={}\nsnr_db={snr}\n", sc.mode);
    if sc.snr_db.is_some() {
        out.push_str(&format!("noise_model={NOISE_MODEL}\n"));
    }
    out.push_str(&format!("seed={}\n", sc.seed));
    out
}

fn generate(p: u64, kind: SystemKind, base_kind: SystemKind, out: &Path) -> CliResult {
    let f = PrimeField::new(p)?;
    let system = match kind {
        SystemKind::Split | SystemKind::NonSplit => build_system(&f, TorusKind::try_from(kind)?)?,
        SystemKind::Heisenberg => heisenberg_system(&f),
        SystemKind::Extended => {
            let base = match base_kind {
                SystemKind::Heisenberg => heisenberg_system(&f),
                SystemKind::Split | SystemKind::NonSplit => build_system(&f, TorusKind::try_from(base_kind)?)?,
                SystemKind::Extended => return Err(Failure::Input("base kind cannot be extended".into())),
            };
            extended_system(&f, &base)
        }
    };
    io::save(out, &f, &system)?;
    let mut lines = format!(
        "command=generate\np={p}\nkind={}\nsignals={}\nfamilies={}\n",
        system.kind,
        system.len(),
        system.family_count()
    );
    if let Some(b) = system.base_kind {
        lines.push_str(&format!("base_kind={b}\n"));
    }
    lines.push_str(&format!("out={}\n", out.display()));
    Ok(lines)
}

fn verify(file: &Path, headline: bool) -> CliResult {
    let system = io::load(file)?;
    let f = PrimeField::new(system.p)?;
    let report = system_report(&f, &system);
    let mut out = String::from("command=verify\n");
    out.push_str(&report.to_key_values(headline));
    let mut ok = report.passed();
    if system.kind.is_oscillator() {
        let fourier = fourier_invariance_check(&f, &system);
        out.push_str(&format!(
            "fourier.matched={}\nfourier.min_overlap={:?}\nfourier.failures={}\n",
            fourier.matches.len(),
            fourier.min_overlap(),
            fourier.failures.len()
        ));
        for (i, msg) in fourier.failures.iter().enumerate() {
            out.push_str(&format!("fourier.failure.{i}={msg}\n"));
        }
        ok &= fourier.passed();
    }
    if ok {
        Ok(out)
    } else {
        Err(Failure::Bounds(out))
    }
}

fn ambiguity_cmd(file: &Path, signal: &SignalLabel, with: Option<&SignalLabel>, out: &Path) -> CliResult {
    let system = io::load(file)?;
    let find = |l: &SignalLabel| {
        system
            .find(l)
            .map(|ls| ls.signal.clone())
            .ok_or_else(|| Failure::Input(Error::UnknownLabel(l.to_string()).to_string()))
    };
    let phi = find(signal)?;
    let other = with.map(find).transpose()?;
    let table = ambiguity(&phi, other.as_ref());
    std::fs::write(out, table.magnitude_csv()).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(format!(
        "command=ambiguity\np={}\nsignal={signal}\npeak={},{}\npeak_value={:?}\nmax_offcenter={:?}\nout={}\n",
        system.p,
        table.peak.0,
        table.peak.1,
        table.peak.2,
        table.max_offcenter,
        out.display()
    ))
}

fn radar(source: &SourceArgs, signal: &SignalLabel, mode: ChannelMode, trials: usize, c: &ChannelArgs) -> CliResult {
    let (f, src) = Source::open(source)?;
    let phi = src.lookup(signal)?;
    let sc = scenario(mode, trials, c);
    let result = radar_simulate(&phi, &sc)?;
    let mut out = format!("command=radar\np={}\nkind={}\nsignal={signal}\n", f.p(), src.kind());
    out.push_str(&channel_lines(&sc));
    out.push_str(&result.to_key_values("recovery_rate", true));
    Ok(out)
}

fn cdma(
    source: &SourceArgs,
    users: usize,
    mode: ChannelMode,
    known: bool,
    trials: usize,
    c: &ChannelArgs,
) -> CliResult {
    let (f, src) = Source::open(source)?;
    let sc = scenario(mode, trials, c);
    let result = cdma_simulate(src.as_source(), f.p(), users, known, &sc)?;
    let mut out = format!(
        "command=cdma\np={}\nkind={}\nusers={users}\nknown_distortions={known}\n",
        f.p(),
        src.kind()
    );
    out.push_str(&channel_lines(&sc));
    out.push_str(&result.to_key_values("ber", false));
    Ok(out)
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Generate {
            p,
            kind,
            base_kind,
            out,
        } => generate(*p, *kind, *base_kind, out),
        Command::Verify {
            file,
            report_headline_bounds,
            ..
        } => verify(file, *report_headline_bounds),
        Command::Ambiguity {
            file,
            signal,
            with,
            out,
        } => ambiguity_cmd(file, signal, with.as_ref(), out),
        Command::Radar {
            source,
            signal,
            scenario,
            trials,
            channel,
        } => radar(source, signal, *scenario, *trials, channel),
        Command::Cdma {
            source,
            users,
            scenario,
            known_distortions,
            trials,
            channel,
        } => cdma(source, *users, *scenario, *known_distortions, *trials, channel),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Bounds(report)) => {
            print!("{report}");
            eprintln!("error: bound assertions failed");
            ExitCode::from(3)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
