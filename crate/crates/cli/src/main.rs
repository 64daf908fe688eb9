mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcurve_core::as3::{EigenSubstitution, Fiber};
use qcurve_core::quartic::{DistanceMetric, SequenceKind};
use qcurve_core::{Dims, Error, Result};

use commands::{Params, VerifySection};
use report::{Cell, Format, ReportDocument};

/// GJMS spectra, Q-curvature functionals and stability probes on S^1 x S^(n-1).
#[derive(Parser, Debug)]
#[command(name = "qcurve", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "QCURVE_JOBS")]
    jobs: Option<usize>,
    /// Bisection tolerance on tau0^-2.
    #[arg(long, global = true, env = "QCURVE_TOL", default_value_t = qcurve_core::spectral::DEFAULT_TAU0_TOL)]
    tol: f64,
    #[arg(long, global = true, env = "QCURVE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct DimsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
}

impl DimsArgs {
    fn dims(&self) -> Result<Dims> {
        Dims::new(self.n, self.k)
    }
}

/// `--n --k` for one point, `--n` alone for every k, otherwise all `2k < n <= n-max`.
#[derive(Args, Debug, Clone, Copy)]
struct SweepArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, requires = "n")]
    k: Option<u32>,
    #[arg(long, default_value_t = 20)]
    n_max: u32,
}

impl SweepArgs {
    fn grid(&self) -> Result<Vec<Dims>> {
        match (self.n, self.k) {
            (Some(n), Some(k)) => Ok(vec![Dims::new(n, k)?]),
            (Some(n), None) => {
                let all: Vec<Dims> = Dims::all_up_to(n)
                    .into_iter()
                    .filter(|d| d.n() == n)
                    .collect();
                if all.is_empty() {
                    Err(Error::domain(format!("no k >= 1 with 2k < n = {n}")))
                } else {
                    Ok(all)
                }
            }
            _ => Ok(Dims::all_up_to(self.n_max)),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FiberKind {
    Sphere,
    Cp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Substitution {
    Consistent,
    FlippedFirstOrder,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Degenerate,
    FirstMode,
    SecondMode,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Metric {
    EnergyDist,
    Dist,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scale tau0 solving P_k(tau0^-2) = ((n+2k)/(n-2k)) p_k0.
    Tau0(SweepArgs),
    /// Eigenvalue table alpha_{m,j}(tau0).
    Spectrum {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long, default_value_t = 10)]
        m_max: u32,
        #[arg(long, default_value_t = 10)]
        j_max: u32,
    },
    /// Second variation at u = 1 and its kernel.
    Hessian {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long, default_value_t = 6)]
        m_max: u32,
        #[arg(long, default_value_t = 6)]
        j_max: u32,
    },
    /// Quadratic in lambda on Einstein products S^m x F.
    As3 {
        #[arg(long, value_enum)]
        fiber: FiberKind,
        #[arg(long)]
        ell: u32,
        #[arg(long, default_value_t = 100)]
        m_min: u32,
        #[arg(long, default_value_t = 1000)]
        m_max: u32,
        #[arg(long, value_enum, default_value = "consistent")]
        substitution: Substitution,
    },
    /// Strict binding, Gamma-ratio and quartic-constant verdicts.
    Inequalities {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 50)]
        ell_max: u32,
    },
    /// Deficit against distance along a one-parameter family.
    Quartic {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long, value_enum, default_value = "degenerate")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "energy-dist")]
        metric: Metric,
        /// Write ln(distance) ln(deficit) pairs to this file.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Periodized Green's kernel on random point pairs.
    Greens {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 1)]
        truncation: u32,
        /// Circle radius; defaults to tau0.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Aggregate checks over a parameter sweep.
    Verify {
        /// Run every section (the default when none is named).
        #[arg(long)]
        all: bool,
        #[arg(long = "section", value_enum)]
        sections: Vec<VerifySection>,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
    },
}

fn run(cli: &Cli) -> Result<ReportDocument> {
    let mut params = Params::new();
    let sections = match &cli.command {
        Command::Tau0(sweep) => {
            let grid = sweep.grid()?;
            params = commands::dims_params(&grid);
            vec![commands::tau0(&grid, cli.tol)?]
        }
        Command::Spectrum { dims, m_max, j_max } => {
            let d = dims.dims()?;
            params = commands::dims_params(&[d]);
            commands::spectrum(d, *m_max, *j_max)?
        }
        Command::Hessian { dims, m_max, j_max } => {
            let d = dims.dims()?;
            params = commands::dims_params(&[d]);
            commands::hessian(d, *m_max, *j_max)?
        }
        Command::As3 {
            fiber,
            ell,
            m_min,
            m_max,
            substitution,
        } => {
            let f = match fiber {
                FiberKind::Sphere => Fiber::Sphere(*ell),
                FiberKind::Cp => Fiber::ComplexProjective(*ell),
            };
            let sub = match substitution {
                Substitution::Consistent => EigenSubstitution::Consistent,
                Substitution::FlippedFirstOrder => EigenSubstitution::FlippedFirstOrder,
            };
            params.insert("fiber".into(), f.name().into());
            params.insert("ell".into(), (*ell).into());
            params.insert("mMin".into(), (*m_min).into());
            params.insert("mMax".into(), (*m_max).into());
            params.insert("substitution".into(), format!("{sub:?}").into());
            commands::as3(f, *m_min, *m_max, sub)?
        }
        Command::Inequalities { sweep, ell_max } => {
            let grid = sweep.grid()?;
            params = commands::dims_params(&grid);
            params.insert("ellMax".into(), (*ell_max).into());
            commands::inequalities(&grid, *ell_max)?
        }
        Command::Quartic {
            dims,
            kind,
            metric,
            plot_data,
        } => {
            let d = dims.dims()?;
            let kind = match kind {
                Kind::Degenerate => SequenceKind::Degenerate,
                Kind::FirstMode => SequenceKind::FirstMode,
                Kind::SecondMode => SequenceKind::SecondMode,
            };
            let metric = match metric {
                Metric::EnergyDist => DistanceMetric::EnergyDist,
                Metric::Dist => DistanceMetric::Dist,
            };
            params = commands::dims_params(&[d]);
            params.insert("kind".into(), kind.name().into());
            commands::quartic(d, kind, metric, plot_data.as_deref())?
        }
        Command::Greens {
            dims,
            pairs,
            truncation,
            tau,
        } => {
            let d = dims.dims()?;
            params = commands::dims_params(&[d]);
            params.insert("pairs".into(), (*pairs).into());
            params.insert("seed".into(), Cell::Int(cli.seed as i64));
            commands::greens(d, *tau, *pairs, *truncation, cli.seed)?
        }
        Command::Verify {
            all,
            sections,
            n_max,
        } => {
            let chosen = if *all || sections.is_empty() {
                VerifySection::all()
            } else {
                let mut s = sections.clone();
                s.sort();
                s.dedup();
                s
            };
            params.insert("nMax".into(), (*n_max).into());
            params.insert("seed".into(), Cell::Int(cli.seed as i64));
            commands::verify(&chosen, *n_max, cli.tol, cli.seed)?
        }
    };
    Ok(ReportDocument::new(params, sections))
}

fn error_record(e: &Error, format: Format) -> String {
    match format {
        Format::Json => {
            let record =
                serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&record).unwrap_or_default()
            )
        }
        Format::Csv => format!(
            "kind,message\n{},\"{}\"\n",
            e.kind(),
            e.to_string().replace('"', "\"\"")
        ),
        Format::Human => format!("error ({}): {e}\n", e.kind()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build();
    let outcome = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(Error::internal(format!("thread pool: {e}"))),
    };
    match outcome.and_then(|doc| {
        report::render(&doc, cli.format)
            .map(|text| (doc.verdict_summary.fail, text))
            .map_err(Error::internal)
    }) {
        Ok((failures, text)) => {
            print!("{text}");
            if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            print!("{}", error_record(&e, cli.format));
            ExitCode::from(1)
        }
    }
}
