//! Command-line front end for the del Pezzo conic-fibration verifications.
//!
//! Exit codes: 0 — everything verified; 1 — a verification check failed
//! (including deliberately injected faults); 2 — usage or input errors.

use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use delpezzo::curves::{census_reference_x8, type_census, CurveKind, SurfaceData};
use delpezzo::hlog::{RankMethod, TauFamily};
use delpezzo::planegeom::{random_config, PointConfig, Q};
use delpezzo::report::{
    CensusReport, EnumerationReport, HlogReport, IdentityReport, Render, TypeCountRecord,
};
use delpezzo::verify::{
    identity_setup_pencils, identity_setup_x4, identity_setup_x5, run_identity, verify_hlog,
    IdentitySetup, VerifyError,
};

#[derive(Parser)]
#[command(
    name = "delpezzo",
    version,
    about = "Verify hyperlogarithm identities attached to conic fibrations on del Pezzo surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Lines,
    Conics,
}

#[derive(Subcommand)]
enum Command {
    /// Count the lines and conic fibration classes of X_r
    Enumerate {
        /// Number of blown-up points (3..=8)
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=8))]
        r: u8,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group classes by degree-multiplicity type and count each type
    Census {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=8))]
        r: u8,
        /// Which classes to tabulate
        #[arg(long, value_enum, default_value_t = What::Conics)]
        what: What,
        /// For r = 8, also check the table against the built-in reference
        #[arg(long)]
        check_reference: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact check: the residue vectors sum to zero and span a
    /// one-dimensional relation space
    VerifyHlog {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=8))]
        r: u8,
        /// Certify the relation space by exact rational elimination even for
        /// r = 8 (the default there is the pair-structure connectivity route)
        #[arg(long)]
        exact_rank: bool,
        /// Negate residue vector INDEX first; the check must then fail
        #[arg(long, value_name = "INDEX")]
        inject_tau_flip: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numeric check: the signed antisymmetrized hyperlogarithms of all
    /// conic fibrations sum to zero at sampled targets
    VerifyIdentity {
        /// Number of blown-up points (3..=6)
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=6))]
        r: u8,
        /// Seed for configuration, base-point and target sampling
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled targets
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Residual tolerance; defaults to 1e-10 / 1e-9 / 1e-8 / 1e-6 for
        /// r = 3 / 4 / 5 / 6
        #[arg(long)]
        tol: Option<f64>,
        /// First X_5 parameter as a rational, e.g. 3 or 22/7 (r = 5 only)
        #[arg(long)]
        a: Option<String>,
        /// Second X_5 parameter (r = 5 only)
        #[arg(long)]
        b: Option<String>,
        /// Run a 10x larger target sweep
        #[arg(long)]
        stretch: bool,
        /// Negate the sign of model INDEX first; the check must then fail
        #[arg(long, value_name = "INDEX")]
        inject_sign_flip: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Box<dyn Error>> {
    match command {
        Command::Enumerate { r, format, out } => {
            let data = SurfaceData::build(r as usize)?;
            let report = EnumerationReport {
                r: data.r,
                degree: 9 - data.r as i64,
                line_count: data.lines.len(),
                conic_count: data.conics.len(),
                fibers_per_conic: data.r - 1,
            };
            emit(&report, format, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Census { r, what, check_reference, format, out } => {
            let data = SurfaceData::build(r as usize)?;
            let kind = match what {
                What::Lines => CurveKind::Lines,
                What::Conics => CurveKind::Conics,
            };
            let census = type_census(&data, kind);
            if check_reference {
                if r != 8 {
                    return Err("--check-reference requires --r 8".into());
                }
                if census != census_reference_x8(kind) {
                    eprintln!("census differs from the built-in reference table");
                    return Ok(ExitCode::from(1));
                }
            }
            let report = CensusReport {
                r: data.r,
                kind: match what {
                    What::Lines => "lines".into(),
                    What::Conics => "conics".into(),
                },
                total: census.iter().map(|(_, n)| *n as u64).sum(),
                types: census
                    .iter()
                    .map(|(symbol, count)| TypeCountRecord {
                        symbol: symbol.compact(),
                        count: *count as u64,
                    })
                    .collect(),
            };
            emit(&report, format, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyHlog { r, exact_rank, inject_tau_flip, format, out } => {
            let method = if exact_rank || r <= 7 {
                RankMethod::ExactRational
            } else {
                RankMethod::GraphConnectivity
            };
            match verify_hlog(r as usize, method, inject_tau_flip) {
                Ok(summary) => {
                    let report = HlogReport::from(&summary);
                    emit(&report, format, out.as_deref())?;
                    Ok(if report.verified {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    })
                }
                Err(VerifyError::Hlog(e)) => {
                    eprintln!("verification failed: {e}");
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::VerifyIdentity {
            r,
            seed,
            points,
            tol,
            a,
            b,
            stretch,
            inject_sign_flip,
            format,
            out,
        } => {
            if (a.is_some() || b.is_some()) && r != 5 {
                return Err("--a/--b are parameters of the X_5 family; use --r 5".into());
            }
            let tolerance = tol.unwrap_or(match r {
                3 => 1e-10,
                4 => 1e-9,
                5 => 1e-8,
                _ => 1e-6,
            });
            let n_targets = points * if stretch { 10 } else { 1 };
            let data = SurfaceData::build(r as usize)?;
            let family = TauFamily::build(&data)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let setup = match build_setup(&data, &family, r, a, b, &mut rng) {
                Ok(setup) => setup,
                Err(VerifyError::Geom(e)) => return Err(e.into()),
                Err(e) => {
                    eprintln!("verification failed: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            let mut setup = setup;
            if let Some(i) = inject_sign_flip {
                setup.inject_sign_flip(i);
            }
            match run_identity(&setup, n_targets, 1e-13, &mut rng) {
                Ok(evaluations) => {
                    let report = IdentityReport::new(&setup, &evaluations, tolerance);
                    emit(&report, format, out.as_deref())?;
                    Ok(if report.verified {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    })
                }
                Err(e) => {
                    eprintln!("verification failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn build_setup(
    data: &SurfaceData,
    family: &TauFamily,
    r: u8,
    a: Option<String>,
    b: Option<String>,
    rng: &mut ChaCha12Rng,
) -> Result<IdentitySetup, VerifyError> {
    match r {
        3 => {
            let cfg = PointConfig::standard_with(3, &[]);
            identity_setup_pencils(data, family, &cfg, rng)
        }
        4 => identity_setup_x4(data, family),
        5 => {
            let (da, db) = delpezzo::planegeom::x5_default_parameters();
            let a = parse_rational_or(a, da);
            let b = parse_rational_or(b, db);
            identity_setup_x5(data, family, &a?, &b?, rng)
        }
        6 => {
            let cfg = random_config(6, rng)?;
            identity_setup_pencils(data, family, &cfg, rng)
        }
        _ => unreachable!("clap restricts r to 3..=6"),
    }
}

fn parse_rational_or(s: Option<String>, default: Q) -> Result<Q, VerifyError> {
    match s {
        None => Ok(default),
        Some(s) => s.trim().parse::<Q>().map_err(|_| {
            VerifyError::Geom(delpezzo::planegeom::GeomError::Degenerate(format!(
                "cannot parse rational parameter {s:?}"
            )))
        }),
    }
}

fn emit<R: Render + serde::Serialize>(
    report: &R,
    format: Format,
    out: Option<&std::path::Path>,
) -> std::io::Result<()> {
    let rendered = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
