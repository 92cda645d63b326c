//! Command-line driver behind the `mds-pir` binary: `run`, `verify` and
//! `sweep`.
//!
//! Exit codes: 0 on success, 1 when a retrieval or a report fails, 2 on bad
//! flags or parameters.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{self, format_rational, SuiteOptions, VerificationReport};
use crate::cluster::{Cluster, TransportMode};
use crate::error::{Error, Result};
use crate::instance::{dispatch, AnyScheme, SchemeChoice};
use crate::mds::MessageSet;
use crate::params::{SchemeTag, SystemParams};
use crate::scheme::Scheme;
use crate::scheme_a::SchemeA;
use crate::scheme_b::SchemeB;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    A,
    B,
    BHigh,
    BLow,
    K2,
    Auto,
}

impl From<SchemeArg> for SchemeChoice {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::A => SchemeChoice::A,
            SchemeArg::B => SchemeChoice::B,
            SchemeArg::BHigh => SchemeChoice::BHigh,
            SchemeArg::BLow => SchemeChoice::BLow,
            SchemeArg::K2 => SchemeChoice::K2,
            SchemeArg::Auto => SchemeChoice::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    InProcess,
    Wire,
}

#[derive(Parser, Debug)]
#[command(name = "mds-pir", version, about = "Private information retrieval over MDS-coded databases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run retrievals and compare the download with the capacity.
    Run(RunArgs),
    /// Run every verification report for one parameter point.
    Verify(VerifyArgs),
    /// Verify a grid of parameter points.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "auto")]
    scheme: SchemeArg,
    /// Field order: a power of two up to 2^16 or a prime below 2^16.
    #[arg(long, default_value_t = 256)]
    field: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report destination; `-` writes the report to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value = "in-process")]
    mode: ModeArg,
    /// Retrieve once for every (request, randomness) pair instead of
    /// sampling; the mean download is then exact.
    #[arg(long)]
    exhaustive: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Realizations for the structural checks when exhaustion is larger.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Report `ms` as 0 so identical seeds give identical files.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 4)]
    max_k: usize,
    #[arg(long, default_value_t = 256)]
    field: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    out: OutputArgs,
}

/// One retrieval experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub scheme: SchemeChoice,
    pub field: u32,
    pub seed: u64,
    pub trials: usize,
    pub mode: TransportMode,
    pub exhaustive: bool,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn new(n: usize, t: usize, k: usize, scheme: SchemeChoice) -> Self {
        RunConfig {
            n,
            t,
            k,
            scheme,
            field: 256,
            seed: 0,
            trials: 100,
            mode: TransportMode::InProcess,
            exhaustive: false,
            output: None,
            format: ReportFormat::Json,
        }
    }

    pub fn build(&self) -> Result<AnyScheme> {
        AnyScheme::build(self.n, self.t, self.k, self.field, self.scheme)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub params: SystemParams,
    pub scheme: String,
    pub mode: TransportMode,
    pub seed: u64,
    pub exhaustive: bool,
    pub retrievals: u64,
    pub failures: u64,
    pub downloaded_symbols: u64,
    /// Exact mean download in symbols; weighted by the randomness
    /// distribution when exhaustive.
    pub mean_download: String,
    pub predicted_download: String,
    pub observed_rate: String,
    pub capacity: String,
    pub mean_uploaded_bytes: String,
    pub upload_bound_bits: Option<f64>,
}

fn upload_bound(inst: &AnyScheme) -> Option<f64> {
    match inst {
        AnyScheme::A(a) => Some(SchemeA::upload_cost_bits(a.params())),
        AnyScheme::B(b) => Some(SchemeB::upload_cost_bits(b.params(), b.regime()).bits),
        AnyScheme::K2(_) => None,
    }
}

fn run_with<S: Scheme + Clone + 'static>(scheme: &S, cfg: &RunConfig) -> Result<(BigRational, BigRational, u64, u64, u64)> {
    let p = *scheme.params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let messages = MessageSet::random(p, &mut rng);
    let cluster = Cluster::new(scheme.clone(), messages, cfg.mode)?;
    let (mut download, mut upload) = (BigRational::zero(), BigRational::zero());
    let (mut count, mut failures, mut symbols) = (0u64, 0u64, 0u64);
    let mut record = |w: BigRational, res: Result<crate::cluster::RetrievalTranscript>| {
        count += 1;
        match res {
            Ok(tr) => {
                symbols += tr.downloaded_symbols;
                download += &w * BigInt::from(tr.downloaded_symbols);
                upload += &w * BigInt::from(tr.uploaded_bytes);
            }
            Err(e) => {
                failures += 1;
                eprintln!("retrieval failed: {e}");
            }
        }
    };
    if cfg.exhaustive {
        let all = scheme.enumerate_randomness()?;
        let per_request = BigRational::new(1.into(), BigInt::from(p.k));
        for k_star in 0..p.k {
            for (rand, w) in &all {
                record(w * &per_request, cluster.retrieve_with(k_star, rand));
            }
        }
    } else {
        if cfg.trials == 0 {
            return Err(Error::InvalidParams("trials must be positive".into()));
        }
        let w = BigRational::new(1.into(), BigInt::from(cfg.trials));
        for _ in 0..cfg.trials {
            let k_star = rng.random_range(0..p.k);
            record(w.clone(), cluster.retrieve(k_star, &mut rng));
        }
    }
    Ok((download, upload, count, failures, symbols))
}

pub fn run_report(cfg: &RunConfig) -> Result<RunReport> {
    let inst = cfg.build()?;
    let p = *inst.params();
    let (download, upload, retrievals, failures, symbols) = dispatch!(&inst, s => run_with(s, cfg))?;
    let observed_rate = if download.is_zero() {
        "undefined".into()
    } else {
        format_rational(&(BigRational::from_integer(BigInt::from(p.l)) / &download))
    };
    Ok(RunReport {
        params: p,
        scheme: inst.name(),
        mode: cfg.mode,
        seed: cfg.seed,
        exhaustive: cfg.exhaustive,
        retrievals,
        failures,
        downloaded_symbols: symbols,
        mean_download: format_rational(&download),
        predicted_download: format_rational(&analysis::predicted_download(&p)),
        observed_rate,
        capacity: format_rational(&analysis::capacity(p.n, p.t, p.k)?),
        mean_uploaded_bytes: format_rational(&upload),
        upload_bound_bits: upload_bound(&inst),
    })
}

fn write_output(output: &Option<PathBuf>, body: &str) -> Result<()> {
    match output {
        Some(path) if path.as_os_str() == "-" => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
        Some(path) => std::fs::write(path, body)?,
        None => {}
    }
    Ok(())
}

fn to_stdout(output: &Option<PathBuf>) -> bool {
    matches!(output, Some(p) if p.as_os_str() == "-")
}

/// Human-readable lines go to stderr when stdout carries the report.
fn say(output: &Option<PathBuf>, line: &str) {
    if to_stdout(output) {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn csv_body<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct ReportRow<'a> {
    claim: &'a str,
    scheme: SchemeTag,
    n: usize,
    t: usize,
    k: usize,
    q: u32,
    expected: &'a str,
    observed: &'a str,
    pass: bool,
    enumeration_size: u64,
    ms: f64,
}

pub fn render_reports(reports: &[VerificationReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(reports).expect("reports serialize") + "\n"),
        ReportFormat::Csv => csv_body(
            &reports
                .iter()
                .map(|r| ReportRow {
                    claim: &r.claim,
                    scheme: r.params.scheme,
                    n: r.params.n,
                    t: r.params.t,
                    k: r.params.k,
                    q: r.params.q,
                    expected: &r.expected,
                    observed: &r.observed,
                    pass: r.pass,
                    enumeration_size: r.enumeration_size,
                    ms: r.ms,
                })
                .collect::<Vec<_>>(),
        ),
    }
}

#[derive(Serialize)]
struct RunRow<'a> {
    scheme: &'a str,
    n: usize,
    t: usize,
    k: usize,
    q: u32,
    mode: TransportMode,
    seed: u64,
    exhaustive: bool,
    retrievals: u64,
    failures: u64,
    mean_download: &'a str,
    predicted_download: &'a str,
    observed_rate: &'a str,
    capacity: &'a str,
    mean_uploaded_bytes: &'a str,
}

pub fn render_run(r: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(r).expect("run reports serialize") + "\n"),
        ReportFormat::Csv => csv_body(&[RunRow {
            scheme: &r.scheme,
            n: r.params.n,
            t: r.params.t,
            k: r.params.k,
            q: r.params.q,
            mode: r.mode,
            seed: r.seed,
            exhaustive: r.exhaustive,
            retrievals: r.retrievals,
            failures: r.failures,
            mean_download: &r.mean_download,
            predicted_download: &r.predicted_download,
            observed_rate: &r.observed_rate,
            capacity: &r.capacity,
            mean_uploaded_bytes: &r.mean_uploaded_bytes,
        }]),
    }
}

fn usage_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::InvalidParams(_) | Error::UnsupportedField(_) | Error::WrongRegime { .. } | Error::FieldTooSmall { .. })
}

fn fail(e: &Error) -> i32 {
    if is_usage(e) {
        return usage_error(e);
    }
    eprintln!("error: {e}");
    EXIT_FAILED
}

pub fn cmd_run(cfg: &RunConfig) -> i32 {
    let report = match run_report(cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let summary = format!(
        "{} ({},{},{}) over GF({}): {} retrievals, {} failures, mean download {} (predicted {}), rate {} vs capacity {}",
        report.scheme,
        report.params.n,
        report.params.t,
        report.params.k,
        report.params.q,
        report.retrievals,
        report.failures,
        report.mean_download,
        report.predicted_download,
        report.observed_rate,
        report.capacity,
    );
    say(&cfg.output, &summary);
    if let Err(e) = render_run(&report, cfg.format).and_then(|body| write_output(&cfg.output, &body)) {
        return fail(&e);
    }
    if report.failures > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn summarize(reports: &[VerificationReport], output: &Option<PathBuf>) -> usize {
    let failed = reports.iter().filter(|r| !r.pass).count();
    for r in reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        say(output, &format!("{status} {} ({},{},{}) expected {} observed {}", r.claim, r.params.n, r.params.t, r.params.k, r.expected, r.observed));
    }
    say(output, &format!("{} reports, {} failed", reports.len(), failed));
    failed
}

pub fn cmd_verify(cfg: &RunConfig, samples: usize, timing: bool) -> i32 {
    let inst = match cfg.build() {
        Ok(i) => i,
        Err(e) => return fail(&e),
    };
    let opts = SuiteOptions { structural_samples: samples, seed: cfg.seed, timing };
    let reports = match analysis::verify_suite(&inst, opts) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let failed = summarize(&reports, &cfg.output);
    if let Err(e) = render_reports(&reports, cfg.format).and_then(|b| write_output(&cfg.output, &b)) {
        return fail(&e);
    }
    if failed > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

/// Grid for `sweep`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub max_n: usize,
    pub max_k: usize,
    pub field: u32,
    pub seed: u64,
    pub samples: usize,
    pub jobs: usize,
    pub timing: bool,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

/// Every (n, t, k, scheme) point of the grid: A everywhere, B in each
/// regime it supports, and the k2 scheme where it applies.
pub fn sweep_points(max_n: usize, max_k: usize) -> Vec<(usize, usize, usize, SchemeChoice)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for t in 1..n {
            for k in 1..=max_k {
                let probe = SystemParams::new(n, t, k, SchemeTag::A).expect("grid points are valid");
                out.push((n, t, k, SchemeChoice::A));
                if probe.s >= probe.r {
                    out.push((n, t, k, SchemeChoice::BHigh));
                }
                if probe.r >= probe.s {
                    out.push((n, t, k, SchemeChoice::BLow));
                }
                if k == 2 && 2 * t >= n {
                    out.push((n, t, k, SchemeChoice::K2));
                }
            }
        }
    }
    out
}

/// Runs the suite at every grid point on `jobs` workers. Reports come back
/// in grid order.
pub fn sweep_reports(cfg: &SweepConfig) -> Result<Vec<VerificationReport>> {
    if cfg.max_n < 2 || cfg.max_k == 0 {
        return Err(Error::InvalidParams("sweep needs max_n >= 2 and max_k >= 1".into()));
    }
    let points = sweep_points(cfg.max_n, cfg.max_k);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<VerificationReport>>>>> = Mutex::new(vec![None; points.len()]);
    let opts = SuiteOptions { structural_samples: cfg.samples, seed: cfg.seed, timing: cfg.timing };
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(n, t, k, choice)) = points.get(i) else { break };
                let res = AnyScheme::build(n, t, k, cfg.field, choice).and_then(|inst| analysis::verify_suite(&inst, opts));
                results.lock().expect("results lock")[i] = Some(res);
            });
        }
    });
    let mut out = Vec::new();
    for res in results.into_inner().expect("results lock") {
        out.extend(res.expect("every point ran")?);
    }
    Ok(out)
}

pub fn cmd_sweep(cfg: &SweepConfig) -> i32 {
    let reports = match sweep_reports(cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    for r in reports.iter().filter(|r| !r.pass) {
        say(&cfg.output, &format!("FAIL {} ({},{},{}) expected {} observed {}", r.claim, r.params.n, r.params.t, r.params.k, r.expected, r.observed));
    }
    let points = sweep_points(cfg.max_n, cfg.max_k).len();
    say(&cfg.output, &format!("{points} parameter points, {} reports, {failed} failed", reports.len()));
    if let Err(e) = render_reports(&reports, cfg.format).and_then(|b| write_output(&cfg.output, &b)) {
        return fail(&e);
    }
    if failed > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn point_config(p: &PointArgs, out: &OutputArgs) -> RunConfig {
    RunConfig {
        n: p.n,
        t: p.t,
        k: p.k,
        scheme: p.scheme.into(),
        field: p.field,
        seed: p.seed,
        trials: 0,
        mode: TransportMode::InProcess,
        exhaustive: false,
        output: out.output.clone(),
        format: out.format,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::Run(a) => {
            let mut cfg = point_config(&a.point, &a.out);
            cfg.trials = a.trials;
            cfg.exhaustive = a.exhaustive;
            cfg.mode = match a.mode {
                ModeArg::InProcess => TransportMode::InProcess,
                ModeArg::Wire => TransportMode::Wire,
            };
            cmd_run(&cfg)
        }
        Command::Verify(a) => cmd_verify(&point_config(&a.point, &a.out), a.samples, !a.no_timing),
        Command::Sweep(a) => cmd_sweep(&SweepConfig {
            max_n: a.max_n,
            max_k: a.max_k,
            field: a.field,
            seed: a.seed,
            samples: a.samples,
            jobs: a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            timing: !a.no_timing,
            output: a.out.output,
            format: a.out.format,
        }),
    }
}
