//! Subcommand grammar and dispatch.
//!
//! Results go to the output stream (or `--output` file); diagnostics go to
//! stderr. Exit codes: 0 success, 1 domain error (e.g. a tensor outside the
//! certified ball, an invalid certificate), 2 usage error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nnrank_core::census::{Distribution, ExperimentConfig};
use nnrank_core::generic::{generic_rank_with_trials, DEFAULT_TRIALS};
use nnrank_core::nonneg::{canonical_decomposition, nnrank_interval, NtfConfig};
use nnrank_core::tensor::Shape;
use nnrank_core::witness::{
    certify_max_rank, typical_rank_witness, verify_typicality_certificate, witness_tensor,
};
use nnrank_core::Error as CoreError;

use crate::formats;

/// Marker for post-parse usage errors; mapped to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

fn parse_shape_arg(s: &str) -> Result<Shape, String> {
    let dims: Result<Vec<usize>, _> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad dimension {p:?}: {e}")))
        .collect();
    Shape::new(dims?).map_err(|e| e.to_string())
}

fn parse_dist_arg(s: &str) -> Result<Distribution, String> {
    formats::parse_distribution(s).map_err(|e| format!("{e:#}"))
}

/// Nonnegative tensor rank bounds, generic-rank tests, and typicality
/// certificates for small dense tensors.
#[derive(Debug, Parser)]
#[command(name = "nnrank", version, about)]
pub struct Cli {
    /// Seed for every randomized step; fixed seed means byte-identical outputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of stdout (census: base path for .csv/.json).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; text is human-oriented and unstable, json/csv are the
    /// compatibility surface.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generic rank of a tensor format, with the confirming Jacobian report.
    Grank {
        /// Comma-separated dimensions, e.g. 2,2,2 (any order).
        #[arg(long, value_parser = parse_shape_arg)]
        shape: Shape,
        /// Random points per Jacobian rank test.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Certified interval on the nonnegative rank of a tensor file.
    Nnrank {
        /// Tensor JSON file ('-' for stdin).
        #[arg(long)]
        input: PathBuf,
        /// Factorization restarts per term count.
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Canonical fiber decomposition of a nonnegative tensor, as JSON.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
    /// The witness tensor of a format with its certified ball radius.
    Witness {
        #[arg(long, value_parser = parse_shape_arg)]
        shape: Shape,
    },
    /// Certify maximal nonnegative rank by membership in the witness ball.
    CertifyMax {
        #[arg(long)]
        input: PathBuf,
        /// Optional shape check against the file's dims.
        #[arg(long, value_parser = parse_shape_arg)]
        shape: Option<Shape>,
    },
    /// Generate a typicality certificate for rank r of a format.
    Typical {
        #[arg(long, value_parser = parse_shape_arg)]
        shape: Shape,
        #[arg(long)]
        r: usize,
    },
    /// Independently verify a typicality certificate file ('-' for stdin).
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Monte Carlo rank census over a random ensemble; writes CSV + JSON.
    Census {
        #[arg(long, value_parser = parse_shape_arg)]
        shape: Shape,
        #[arg(long)]
        samples: usize,
        /// uniform01 | exponential | indicator-noise(SIGMA)
        #[arg(long, value_parser = parse_dist_arg)]
        dist: Distribution,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn emit(payload: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, payload).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn reject_csv(format: Format) -> Result<()> {
    if format == Format::Csv {
        bail!(UsageError("csv format is only available for the census subcommand".into()));
    }
    Ok(())
}

fn domain_hint(err: &CoreError) -> &'static str {
    match err {
        CoreError::OutsideBall { .. } => "no certificate: the tensor is not inside the ball",
        CoreError::RankOutOfRange { .. } => "no certificate: rank outside the feasible range",
        _ => "",
    }
}

/// Run one parsed invocation. Errors of type [`UsageError`] map to exit 2,
/// everything else to exit 1.
pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    let output = cli.output.as_deref();
    match cli.command {
        Command::Grank { shape, trials } => {
            reject_csv(cli.format)?;
            if trials == 0 {
                bail!(UsageError("--trials must be at least 1".into()));
            }
            let (rank, report) = generic_rank_with_trials(&shape, trials, seed)?;
            let payload = match cli.format {
                Format::Json => formats::grank_to_json(&shape, rank, &report),
                _ => format!(
                    "{rank}\njacobian at r = {}: {} x {}, achieved rank {}, full row rank: {} (trials {}, seed {})\n",
                    report.r,
                    report.jac_rows,
                    report.jac_cols,
                    report.achieved_rank,
                    report.full_row_rank,
                    report.trials,
                    report.point_seed,
                ),
            };
            emit(&payload, output)
        }
        Command::Nnrank { input, restarts } => {
            reject_csv(cli.format)?;
            let t = formats::tensor_from_json(&read_input(&input)?, true)?;
            let mut cfg = NtfConfig::with_seed(seed);
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            let iv = nnrank_interval(&t, &cfg)?;
            let payload = match cli.format {
                Format::Json => formats::interval_to_json(t.shape(), &iv),
                _ => format!("{}\n", formats::interval_to_text(&iv)),
            };
            emit(&payload, output)
        }
        Command::Decompose { input } => {
            reject_csv(cli.format)?;
            let t = formats::tensor_from_json(&read_input(&input)?, true)?;
            let dec = canonical_decomposition(&t)?;
            emit(&formats::decomposition_to_json(&dec), output)
        }
        Command::Witness { shape } => {
            reject_csv(cli.format)?;
            let ball = witness_tensor(&shape);
            emit(&formats::witness_to_json(&ball), output)
        }
        Command::CertifyMax { input, shape } => {
            reject_csv(cli.format)?;
            let t = formats::tensor_from_json(&read_input(&input)?, true)?;
            if let Some(expected) = shape {
                if &expected != t.shape() {
                    bail!(
                        "shape {:?} does not match the file's dims {:?}",
                        expected.dims(),
                        t.shape().dims()
                    );
                }
            }
            let cert = certify_max_rank(&t).map_err(|e| anyhow!("{} ({e})", domain_hint(&e)))?;
            emit(&formats::max_rank_certificate_to_json(&cert), output)
        }
        Command::Typical { shape, r } => {
            reject_csv(cli.format)?;
            let cert = typical_rank_witness(&shape, r, seed)
                .map_err(|e| anyhow!("{} ({e})", domain_hint(&e)))?;
            emit(&formats::certificate_to_json(&cert), output)
        }
        Command::Verify { cert } => {
            reject_csv(cli.format)?;
            let cert = formats::certificate_from_json(&read_input(&cert)?)?;
            let outcome = verify_typicality_certificate(&cert);
            let payload = match cli.format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct VerifyFile {
                        valid: bool,
                        reasons: Vec<String>,
                    }
                    let mut s = serde_json::to_string_pretty(&VerifyFile {
                        valid: outcome.valid,
                        reasons: outcome.reasons.clone(),
                    })
                    .expect("serializable");
                    s.push('\n');
                    s
                }
                _ => {
                    if outcome.valid {
                        "true\n".to_string()
                    } else {
                        format!("false: {}\n", outcome.reasons.join("; "))
                    }
                }
            };
            emit(&payload, output)?;
            if !outcome.valid {
                bail!("certificate is invalid");
            }
            Ok(())
        }
        Command::Census { shape, samples, dist, restarts } => {
            let mut ntf = NtfConfig::with_seed(seed);
            if let Some(r) = restarts {
                ntf.restarts = r;
            }
            let cfg = ExperimentConfig {
                shape,
                samples,
                distribution: dist,
                seed,
                ntf,
            };
            let report = nnrank_core::census::run_census(&cfg)?;

            let base = output.unwrap_or_else(|| Path::new("census"));
            let csv_path = base.with_extension("csv");
            let json_path = base.with_extension("json");
            let json = formats::census_to_json(&report);
            let csv = formats::census_to_csv(&report)?;
            fs::write(&csv_path, &csv)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            fs::write(&json_path, &json)
                .with_context(|| format!("writing {}", json_path.display()))?;

            match cli.format {
                Format::Json => print!("{json}"),
                Format::Csv => print!("{csv}"),
                Format::Text => {
                    let cfg = &report.config;
                    println!(
                        "census: {} samples of shape {:?} ({}, seed {})",
                        cfg.samples,
                        cfg.shape.dims(),
                        formats::distribution_name(&cfg.distribution),
                        cfg.seed
                    );
                    println!(
                        "grank = {}, slice bound = {}, exact fraction = {}, range check = {}",
                        report.grank_used,
                        cfg.shape.slice_bound(),
                        report.exact_fraction,
                        report.range_check
                    );
                    let hist: Vec<String> = report
                        .histogram
                        .iter()
                        .map(|(&(lo, hi), &n)| {
                            if lo == hi {
                                format!("{lo} -> {n}")
                            } else {
                                format!("[{lo},{hi}] -> {n}")
                            }
                        })
                        .collect();
                    println!("histogram: {}", hist.join(", "));
                    println!("wrote {} and {}", csv_path.display(), json_path.display());
                }
            }
            Ok(())
        }
    }
}

/// Exit code for a finished run: 2 for usage errors, 1 for anything else.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}
