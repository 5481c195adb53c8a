use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use valid_ode::cases::{emit_enclosures, run_case, CaseConfig, CaseKind};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Case {
    MichelsonSymmetric,
    RosslerTrap,
    RosslerPeriodic,
    RosslerHorseshoe,
    BvpNakao,
    LorenzCoords,
    PendulumRepr,
}

impl From<Case> for CaseKind {
    fn from(c: Case) -> Self {
        match c {
            Case::MichelsonSymmetric => CaseKind::MichelsonSymmetric,
            Case::RosslerTrap => CaseKind::RosslerTrap,
            Case::RosslerPeriodic => CaseKind::RosslerPeriodic,
            Case::RosslerHorseshoe => CaseKind::RosslerHorseshoe,
            Case::BvpNakao => CaseKind::BvpNakao,
            Case::LorenzCoords => CaseKind::LorenzCoords,
            Case::PendulumRepr => CaseKind::PendulumRepr,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    CsvEnclosures,
}

/// Run one of the validated case studies and print its certificate.
///
/// Exit status: 0 when every check passed, 1 when some check failed,
/// 2 when an integration or I/O step aborted.
#[derive(Parser, Debug)]
#[command(name = "valid-ode", version)]
struct Cli {
    #[arg(value_enum)]
    case: Case,
    /// Taylor order.
    #[arg(long)]
    order: Option<usize>,
    /// Per-step tolerance on the Taylor coefficients.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Number of uniform pieces the initial sets are cut into.
    #[arg(long)]
    subdivisions: Option<usize>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = CaseKind::from(cli.case);
    let cfg = CaseConfig { case: kind, order: cli.order, tolerance: cli.tolerance, subdivisions: cli.subdivisions };
    let start = Instant::now();
    let outcome = match run_case(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{kind}: {e}");
            return ExitCode::from(2);
        }
    };
    for line in &outcome.report {
        eprintln!("{kind}: {line}");
    }
    for c in outcome.certificate.failures().take(10) {
        eprintln!("{kind}: FAILED {} (bound {}, needs {} {})", c.description, c.bound, if c.op == valid_ode::verify::Relation::Lt { "<" } else { ">" }, c.threshold);
    }
    eprintln!(
        "{kind}: {} in {:.2} s ({} checks)",
        if outcome.certificate.overall { "proved" } else { "not proved" },
        start.elapsed().as_secs_f64(),
        outcome.certificate.checks.len()
    );

    let mut sink: Box<dyn Write> = match &cli.output {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    let written = match cli.format {
        Format::Json => writeln!(sink, "{}", outcome.certificate.to_json()).map_err(valid_ode::Error::from),
        Format::CsvEnclosures => emit_enclosures(kind, &outcome.enclosures, &mut sink),
    };
    if let Err(e) = written.and_then(|_| sink.flush().map_err(valid_ode::Error::from)) {
        eprintln!("{kind}: {e}");
        return ExitCode::from(2);
    }
    if outcome.certificate.overall {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
