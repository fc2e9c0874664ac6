//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 a verification exceeded its tolerance,
//! 2 usage, parameter or I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use serde::Serialize;

use crate::classify::{
    empirical_scan, figure1_dataset, unboundedness_witness, Agreement, Axis, Figure1Row,
    ScanConfig,
};
use crate::error::{Error, Result};
use crate::families::{dense_truncation, entry, rank_two_residual, Family, FamilyParams};
use crate::fastops::{LinearOperatorHandle, SymOperator};
use crate::identities::{
    smith_determinant, toeplitz_symbol_range, verify_divisor_sum_zeta, verify_halfplane_poisson,
    verify_multiplier_gram, verify_poisson_circle, verify_quadform_a, verify_scaling,
    verify_tensor, CoefficientVector,
};
use crate::output::{to_csv, to_json, write_payload};
use crate::par;
use crate::report::{IdentityReport, Tolerance};
use crate::spectra::{eig_dense, lanczos, LanczosOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const THREADS_ENV: &str = "SPECTRAL_CORNERS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "spectral-corners",
    version,
    about = "Construct, verify and classify the A/B/C arithmetical matrix families"
)]
pub struct Cli {
    /// Worker threads (overrides SPECTRAL_CORNERS_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Base of family A (required for A, rejected otherwise).
    #[arg(long)]
    pub q: Option<f64>,
}

impl FamilyArgs {
    fn params(&self) -> Result<FamilyParams> {
        FamilyParams::new(self.family, self.tau, self.rho, self.q)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = -2.5, allow_negative_numbers = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 15)]
    pub tau_steps: usize,
    #[arg(long, default_value_t = -2.5, allow_negative_numbers = true)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 15)]
    pub rho_steps: usize,
    /// Truncation sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print one matrix entry.
    Entry {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Dense N x N truncation.
    Dense {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// All eigenvalues of the truncation (Jacobi).
    Eig {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Extreme eigenvalues through the structured matvec (Lanczos).
    Lanczos {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Structured matvec against the dense truncation on every basis
    /// vector and one random vector.
    MatvecCheck {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Two-sided identity checks.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Empirical growth scan over a (tau, rho) grid.
    Scan {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Region dataset (CSV) and diagram (SVG).
    Figure1 {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 15)]
        resolution: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Dataset path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the diagram here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Growth of the unboundedness witness across sizes.
    Witness {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
        sizes: Vec<usize>,
        /// Exponent of the power witness n^{-sigma} (family B).
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyKind {
    /// Fourier coefficient of the disc Poisson kernel.
    PoissonCircle {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quadratic form of A against a circle integral, random polynomials.
    QuadformA {
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Half-plane Poisson integral against the B kernel.
    Halfplane {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        truncation: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Divisor-parametrized zeta series.
    ZetaDivisor {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 100_000)]
        terms: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gram matrix of the multiplicative Toeplitz block against C(tau, 0).
    MultiplierGram {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 8)]
        size: usize,
        #[arg(long, default_value_t = 4096)]
        terms: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// M(tau) + M(-tau) as a rank-two matrix (A and B).
    RankTwo {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// C entries as products of prime-local A entries.
    Tensor {
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shift (A) or dilation (B, C) relation over the leading block.
    Scaling {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        k: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact gcd-matrix determinant against the totient product.
    Smith {
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Range of the Toeplitz symbol of A(tau, 0; q), optionally checked
    /// against the dense extremes at --size.
    SymbolRange {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        size: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(t) => Some(t),
                Err(_) => {
                    eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                    return EXIT_USAGE;
                }
            },
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        eprintln!("error: thread count must be positive");
        return EXIT_USAGE;
    }
    match par::with_threads(threads, || execute(cli.command)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit<T: Serialize + ?Sized>(value: &T, output: &OutputArgs) -> Result<()> {
    let payload = match output.format {
        Format::Json => to_json(value)?,
        other => {
            return Err(Error::invalid(format!(
                "format {other:?} is not available for this command; use json"
            )))
        }
    };
    write_payload(output.out.as_deref(), &payload)
}

fn emit_reports(reports: &[IdentityReport], output: &OutputArgs) -> Result<bool> {
    match output.format {
        Format::Json => write_payload(output.out.as_deref(), &to_json(reports)?)?,
        Format::Csv => {
            let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
            write_payload(output.out.as_deref(), &to_csv(&rows)?)?;
        }
        Format::Svg => return Err(Error::invalid("svg output is only available for figure1")),
    }
    Ok(reports.iter().all(IdentityReport::passed))
}

/// Flat CSV view of an [`IdentityReport`].
#[derive(Debug, Serialize)]
struct ReportRow {
    identity: String,
    lhs: f64,
    rhs: f64,
    abs_discrepancy: f64,
    rel_discrepancy: f64,
    tail_bound: f64,
    passed: bool,
    detail: String,
}

impl From<&IdentityReport> for ReportRow {
    fn from(r: &IdentityReport) -> Self {
        ReportRow {
            identity: r.notes.identity.clone(),
            lhs: r.lhs,
            rhs: r.rhs,
            abs_discrepancy: r.abs_discrepancy,
            rel_discrepancy: r.rel_discrepancy,
            tail_bound: r.tail_bound(),
            passed: r.passed(),
            detail: r.notes.detail.clone().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Serialize)]
struct DenseOut {
    family: Family,
    size: usize,
    origin: u64,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct SymbolRangeOut {
    low: f64,
    high: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_min: Option<f64>,
    inside: bool,
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Entry { family, n, m } => {
            let value = entry(&family.params()?, n, m)?;
            println!("{value}");
            Ok(true)
        }
        Command::Dense { family, size, output } => {
            let p = family.params()?;
            let d = dense_truncation(&p, size)?;
            let rows: Vec<Vec<f64>> = (0..size).map(|i| d.row(i).to_vec()).collect();
            match output.format {
                Format::Csv => {
                    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                    for row in &rows {
                        w.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
                    }
                    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
                    let text = String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))?;
                    write_payload(output.out.as_deref(), &text)?;
                }
                _ => emit(
                    &DenseOut {
                        family: p.family(),
                        size,
                        origin: p.origin(),
                        rows,
                    },
                    &output,
                )?,
            }
            Ok(true)
        }
        Command::Eig { family, size, output } => {
            let s = eig_dense(&dense_truncation(&family.params()?, size)?)?;
            emit(&s, &output)?;
            Ok(true)
        }
        Command::Lanczos {
            family,
            size,
            k,
            max_iter,
            seed,
            output,
        } => {
            let h = LinearOperatorHandle::new(&family.params()?, size)?;
            let r = lanczos(
                &h,
                &LanczosOptions {
                    k,
                    max_iter,
                    seed,
                    ..LanczosOptions::default()
                },
            )?;
            emit(&r, &output)?;
            Ok(true)
        }
        Command::MatvecCheck {
            family,
            size,
            seed,
            output,
        } => {
            let report = matvec_check(&family.params()?, size, seed)?;
            emit_reports(&[report], &output)
        }
        Command::Verify { kind } => verify(kind),
        Command::Scan {
            family,
            q,
            grid,
            seed,
            output,
        } => {
            let config = scan_config(family, q, &grid, seed)?;
            let verdicts = empirical_scan(&config)?;
            let a = Agreement::of(&verdicts);
            eprintln!(
                "{family}: agreement {}/{} ({:.1}%), {} inconclusive, {} in boundary band",
                a.agreed,
                a.compared,
                100.0 * a.fraction(),
                a.inconclusive,
                a.excluded
            );
            match output.format {
                Format::Json => write_payload(output.out.as_deref(), &to_json(&verdicts)?)?,
                Format::Csv => {
                    let rows: Vec<Figure1Row> = verdicts.iter().map(Figure1Row::from).collect();
                    write_payload(output.out.as_deref(), &to_csv(&rows)?)?
                }
                Format::Svg => return Err(Error::invalid("svg output is only available for figure1")),
            }
            Ok(true)
        }
        Command::Figure1 {
            family,
            q,
            resolution,
            sizes,
            format,
            out,
            svg,
        } => {
            let grid = GridArgs {
                tau_min: -2.5,
                tau_max: 2.5,
                tau_steps: resolution,
                rho_min: -2.5,
                rho_max: 2.5,
                rho_steps: resolution,
                sizes,
                max_iter: 200,
            };
            let base = scan_config(family, q, &grid, 0)?;
            let fig = figure1_dataset(family, resolution, &base)?;
            let payload = match format {
                Format::Csv => to_csv(&fig.rows)?,
                Format::Json => to_json(&fig.rows)?,
                Format::Svg => fig.svg.clone(),
            };
            write_payload(out.as_deref(), &payload)?;
            if let Some(path) = svg {
                write_file(&path, &fig.svg)?;
            }
            Ok(true)
        }
        Command::Witness {
            family,
            sizes,
            sigma,
            output,
        } => {
            let w = unboundedness_witness(&family.params()?, &sizes, sigma)?;
            emit(&w, &output)?;
            Ok(w.growing)
        }
    }
}

fn write_file(path: &Path, payload: &str) -> Result<()> {
    write_payload(Some(path), payload)
}

fn scan_config(family: Family, q: Option<f64>, grid: &GridArgs, seed: u64) -> Result<ScanConfig> {
    let q = match (family, q) {
        (Family::A, None) => Some(0.5),
        (_, q) => q,
    };
    // validates q against the family
    FamilyParams::new(family, 1.0, 1.0, q)?;
    Ok(ScanConfig {
        family,
        q,
        tau: Axis::new(grid.tau_min, grid.tau_max, grid.tau_steps)?,
        rho: Axis::new(grid.rho_min, grid.rho_max, grid.rho_steps)?,
        sizes: grid.sizes.clone(),
        max_iter: grid.max_iter,
        seed,
        ..ScanConfig::standard(family)
    })
}

/// Worst relative deviation of the structured matvec from the dense
/// product over all basis vectors and one seeded random vector.
pub fn matvec_check(p: &FamilyParams, size: usize, seed: u64) -> Result<IdentityReport> {
    let h = LinearOperatorHandle::new(p, size)?;
    let dense = dense_truncation(p, size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut worst: Option<IdentityReport> = None;
    for k in 0..=size {
        let x = if k < size {
            let mut e = vec![0.0; size];
            e[k] = 1.0;
            e
        } else {
            random.clone()
        };
        let fast = h.apply(&x)?;
        let slow = dense.matvec(&x)?;
        let scale = slow.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let (i, _) = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold((0, -1.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
        let label = if k < size { format!("e_{k}") } else { "random".to_string() };
        let r = IdentityReport::new("matvec", fast[i], slow[i], Tolerance::Relative(1e-12))
            .with_scale(scale)
            .with_detail(format!("{p}, N={size}, worst input {label}, row {i}"));
        worst = Some(match worst {
            None => r,
            Some(w) => w.worse(r),
        });
    }
    Ok(worst.expect("size >= 1"))
}

fn verify(kind: VerifyKind) -> Result<bool> {
    match kind {
        VerifyKind::PoissonCircle {
            q,
            tau,
            n,
            points,
            output,
        } => emit_reports(&[verify_poisson_circle(q, tau, n, points)?], &output),
        VerifyKind::QuadformA {
            tau,
            rho,
            q,
            degree,
            trials,
            points,
            seed,
            output,
        } => {
            let p = FamilyParams::a(tau, rho, q)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut reports = Vec::with_capacity(trials);
            for _ in 0..trials {
                let f = CoefficientVector::random(degree + 1, &mut rng)?;
                reports.push(verify_quadform_a(&p, &f, points)?);
            }
            emit_reports(&reports, &output)
        }
        VerifyKind::Halfplane {
            tau,
            n,
            m,
            truncation,
            output,
        } => emit_reports(&[verify_halfplane_poisson(tau, n, m, truncation, 0)?], &output),
        VerifyKind::ZetaDivisor {
            tau,
            n,
            m,
            terms,
            output,
        } => emit_reports(&[verify_divisor_sum_zeta(tau, n, m, terms)?], &output),
        VerifyKind::MultiplierGram {
            tau,
            size,
            terms,
            output,
        } => emit_reports(&[verify_multiplier_gram(tau, size, terms)?], &output),
        VerifyKind::RankTwo { family, size, output } => {
            emit_reports(&[rank_two_residual(&family.params()?, size)?], &output)
        }
        VerifyKind::Tensor {
            tau,
            rho,
            size,
            output,
        } => emit_reports(&[verify_tensor(&FamilyParams::c(tau, rho)?, size)?], &output),
        VerifyKind::Scaling {
            family,
            size,
            k,
            output,
        } => emit_reports(&[verify_scaling(&family.params()?, size, k)?], &output),
        VerifyKind::Smith { size, output } => {
            let s = smith_determinant(size)?;
            emit(&s, &output)?;
            Ok(s.equal())
        }
        VerifyKind::SymbolRange {
            tau,
            q,
            size,
            output,
        } => {
            let (low, high) = toeplitz_symbol_range(tau, q)?;
            let mut out = SymbolRangeOut {
                low,
                high,
                lambda_max: None,
                lambda_min: None,
                inside: true,
            };
            if let Some(n) = size {
                let s = eig_dense(&dense_truncation(&FamilyParams::a(tau, 0.0, q)?, n)?)?;
                out.lambda_max = Some(s.max());
                out.lambda_min = Some(s.min());
                out.inside = s.max() <= high && s.min() >= low;
            }
            emit(&out, &output)?;
            Ok(out.inside)
        }
    }
}
