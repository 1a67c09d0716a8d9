//! `zonalpd` command-line tool.
//!
//! Exit codes: 0 on success, 2 when a sign could not be certified at the
//! requested precision, 1 on usage and domain errors.

mod args;
mod output;

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use zonalpd::energy::{
    energy_discrete, energy_perturbed, energy_uniform, DiscreteMeasure, EnergyMethod, EnergyReport, McEstimate,
    PerturbSpec,
};
use zonalpd::kernels::{Metric, KERNEL_GRAMMAR};
use zonalpd::posdef::{self, Classification, Mode, PdVerdict, ScanOptions, ScanResult, Table1Row};
use zonalpd::spaces::{read_points, read_weights};
use zonalpd::transform::{
    certify_with, poisson_closed, poisson_series, CertifyOptions, CoefficientReport, Method, DEFAULT_DIGITS,
    DEFAULT_MAX_LEVEL,
};
use zonalpd::{Kernel, Space};

use args::{
    ClassifyArgs, Cli, CoeffsArgs, Command, Common, EnergyArgs, Format, PoissonArgs, ScanArgs, Table1Args,
};
use output::{emit, opt, render, verify, Output, RunConfig, Table};

/// Environment variable overriding the default precision.
const DIGITS_ENV: &str = "ZONALPD_DEFAULT_DIGITS";

/// Standard errors allowed between a Monte Carlo estimate and its closed form.
const AGREEMENT_STDERRS: f64 = 3.0;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(zonalpd::Error),
    Io(std::io::Error),
    Verify(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Verify(m) => write!(f, "output verification failed: {m}"),
        }
    }
}

impl From<zonalpd::Error> for Failure {
    fn from(e: zonalpd::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Whether every sign needed by the command was certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Done,
    Undecided,
}

impl Status {
    fn from_undecided(undecided: bool) -> Status {
        if undecided {
            Status::Undecided
        } else {
            Status::Done
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Undecided) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Status, Failure> {
    match cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Poisson(a) => cmd_poisson(a),
    }
}

/// Requested precision, from the flag, then the environment, then the default.
fn resolve_digits(common: &Common) -> Result<u32, Failure> {
    if let Some(d) = common.digits {
        return Ok(d);
    }
    match std::env::var(DIGITS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .map_err(|_| Failure::Usage(format!("{DIGITS_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(DEFAULT_DIGITS),
    }
}

fn init_threads(common: &Common) -> Result<(), Failure> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn base_config(command: &str, common: &Common, digits: u32) -> RunConfig {
    let format = match common.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    RunConfig { command: command.into(), digits, format: format.into(), ..RunConfig::default() }
}

/// Renders, optionally verifies, and writes a result.
fn finish<T: Serialize + DeserializeOwned>(
    common: &Common,
    out: Output<T>,
    header: &[&'static str],
    rows: impl FnOnce(&T) -> Vec<Vec<String>>,
    status: Status,
) -> Result<Status, Failure> {
    let text = render(&out, common.format, |r| Table { header: header.to_vec(), rows: rows(r) });
    if common.verify {
        verify::<T>(&text, common.format, header).map_err(Failure::Verify)?;
    }
    emit(&text, common.out.as_deref())?;
    Ok(status)
}

const COEFF_HEADER: [&str; 6] = ["n", "value", "error", "sign", "m_n", "lambda_n"];

fn coeff_rows(report: &CoefficientReport) -> Vec<Vec<String>> {
    report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                e.value.to_decimal(40),
                format!("{:.6e}", e.error),
                e.sign.symbol().to_string(),
                e.m_n.to_string(),
                e.lambda_n.to_string(),
            ]
        })
        .collect()
}

/// Parses a kernel descriptor, adding the accepted grammar to parse errors.
fn parse_kernel(text: &str) -> Result<Kernel, Failure> {
    Kernel::parse(text).map_err(|e| match e {
        zonalpd::Error::Parse { .. } => Failure::Usage(format!("{e}\naccepted kernels: {KERNEL_GRAMMAR}")),
        other => Failure::Core(other),
    })
}

fn certify(space: &str, kernel: &str, nmax: usize, method: &str, digits: u32) -> Result<CoefficientReport, Failure> {
    let space = Space::parse(space)?;
    let kernel = parse_kernel(kernel)?;
    let opts = CertifyOptions { nmax, digits, method: Method::parse(method)?, max_level: DEFAULT_MAX_LEVEL };
    Ok(certify_with(&space, &kernel, &opts)?)
}

fn cmd_coeffs(a: CoeffsArgs) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let report = certify(&a.space, &a.kernel, a.nmax, &a.method, digits)?;
    let config = RunConfig {
        space: Some(a.space.clone()),
        kernel: Some(a.kernel.clone()),
        nmax: Some(a.nmax),
        method: Some(a.method.clone()),
        ..base_config("coeffs", &a.common, digits)
    };
    let status = Status::from_undecided(report.has_undecided());
    finish(&a.common, Output::new(config, report), &COEFF_HEADER, coeff_rows, status)
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifyResult {
    verdict: PdVerdict,
    report: CoefficientReport,
}

fn cmd_classify(a: ClassifyArgs) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let mode = Mode::parse(&a.mode)?;
    let report = certify(&a.space, &a.kernel, a.nmax, &a.method, digits)?;
    let verdict = posdef::classify(&report, mode);
    let config = RunConfig {
        space: Some(a.space.clone()),
        kernel: Some(a.kernel.clone()),
        nmax: Some(a.nmax),
        method: Some(a.method.clone()),
        mode: Some(a.mode.clone()),
        ..base_config("classify", &a.common, digits)
    };
    let status = Status::from_undecided(verdict.classification == Classification::Undecided);
    let header = ["space", "kernel", "mode", "classification", "witness", "n_checked"];
    let space = report.space.name.clone();
    let kernel = report.kernel.clone();
    finish(
        &a.common,
        Output::new(config, ClassifyResult { verdict, report }),
        &header,
        |r| {
            vec![vec![
                space,
                kernel,
                a.mode.clone(),
                r.verdict.classification.label().to_string(),
                opt(r.verdict.witness),
                r.verdict.n_checked.to_string(),
            ]]
        },
        status,
    )
}

fn parse_metric(kernel: &str) -> Result<Metric, Failure> {
    match kernel.trim() {
        "riesz-geodesic" => Ok(Metric::Geodesic),
        "riesz-chordal" => Ok(Metric::Chordal),
        other => Err(Failure::Usage(format!(
            "scan needs --kernel riesz-geodesic or riesz-chordal, got '{other}'"
        ))),
    }
}

fn cmd_scan(a: ScanArgs) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let space = Space::parse(&a.space)?;
    let metric = parse_metric(&a.kernel)?;
    let opts = ScanOptions {
        s_min: a.s_min,
        s_max: a.s_max,
        step: a.step,
        nmax: a.nmax,
        bisect_tol: a.bisect,
        digits,
    };
    let result = posdef::scan_riesz(&space, metric, &opts)?;
    let config = RunConfig {
        space: Some(a.space.clone()),
        kernel: Some(a.kernel.clone()),
        nmax: Some(a.nmax),
        s_min: Some(a.s_min),
        s_max: Some(a.s_max),
        step: Some(a.step),
        bisect: Some(a.bisect),
        ..base_config("scan", &a.common, digits)
    };
    let undecided = result
        .points
        .iter()
        .chain(&result.bisection)
        .any(|p| p.verdict == Classification::Undecided);
    finish(
        &a.common,
        Output::new(config, result),
        &["s", "verdict", "first_negative_n"],
        |r: &ScanResult| {
            let mut pts: Vec<_> = r.points.iter().chain(&r.bisection).collect();
            pts.sort_by(|x, y| x.s.total_cmp(&y.s));
            pts.iter()
                .map(|p| vec![p.s.to_string(), p.verdict.label().to_string(), opt(p.first_negative_n)])
                .collect()
        },
        Status::from_undecided(undecided),
    )
}

fn cmd_table1(a: Table1Args) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let rows = posdef::table1(a.nmax, digits)?;
    let config = RunConfig {
        kernel: Some("log-geodesic".into()),
        nmax: Some(a.nmax),
        mode: Some("pd".into()),
        ..base_config("table1", &a.common, digits)
    };
    let undecided = rows.iter().any(|r| r.verdict == Classification::Undecided);
    finish(
        &a.common,
        Output::new(config, rows),
        &["space", "alpha", "beta", "first_negative_n", "verdict"],
        |rows: &Vec<Table1Row>| {
            rows.iter()
                .map(|r| {
                    vec![
                        r.space.clone(),
                        r.alpha.to_string(),
                        r.beta.to_string(),
                        opt(r.first_negative_n),
                        r.verdict.label().to_string(),
                    ]
                })
                .collect()
        },
        Status::from_undecided(undecided),
    )
}

/// Energy result: the summary triple plus the checks behind it.
#[derive(Debug, Serialize, Deserialize)]
struct EnergyOutput {
    #[serde(flatten)]
    report: EnergyReport,
    /// uniform, discrete or perturbed.
    measure: String,
    /// Independent direct quadrature of the invariant-measure energy.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quadrature_check: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quadrature_check_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    include_diagonal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    base_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mc: Option<McEstimate>,
    /// Whether the Monte Carlo estimate is within three standard errors of the closed form.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mc_agrees: Option<bool>,
}

impl EnergyOutput {
    fn new(report: EnergyReport, measure: &str) -> Self {
        EnergyOutput {
            report,
            measure: measure.into(),
            quadrature_check: None,
            quadrature_check_error: None,
            include_diagonal: None,
            base_energy: None,
            mc: None,
            mc_agrees: None,
        }
    }
}

fn method_tag(m: EnergyMethod) -> &'static str {
    match m {
        EnergyMethod::Quadrature => "quadrature",
        EnergyMethod::Mc => "mc",
        EnergyMethod::ClosedForm => "closed-form",
    }
}

fn cmd_energy(a: EnergyArgs) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let kernel = parse_kernel(&a.kernel)?;
    let mut config = RunConfig { kernel: Some(a.kernel.clone()), ..base_config("energy", &a.common, digits) };
    config.space = a.space.clone();

    let result = if let Some(path) = &a.points {
        if a.perturb.is_some() {
            return Err(Failure::Usage("--points and --perturb are exclusive".into()));
        }
        let (space, points) = read_points(BufReader::new(File::open(path)?))?;
        if let Some(s) = &a.space {
            if Space::parse(s)?.name() != space.name() {
                return Err(Failure::Usage(format!("--space {s} does not match point file space {}", space.name())));
            }
        }
        let weights = match &a.weights {
            Some(w) => Some(read_weights(BufReader::new(File::open(w)?))?),
            None => None,
        };
        config.points = Some(path.display().to_string());
        config.weights = a.weights.as_ref().map(|w| w.display().to_string());
        let include_diagonal = !kernel.is_singular();
        let measure = DiscreteMeasure::new(space, points, weights)?;
        let energy = energy_discrete(&measure, &kernel, include_diagonal)?;
        let report = EnergyReport { energy, stderr: None, error: None, method: EnergyMethod::ClosedForm };
        EnergyOutput { include_diagonal: Some(include_diagonal), ..EnergyOutput::new(report, "discrete") }
    } else {
        let name = a.space.as_deref().ok_or_else(|| Failure::Usage("--space is required".into()))?;
        let space = Space::parse(name)?;
        if let Some(p) = &a.perturb {
            let spec = PerturbSpec::parse(p)?;
            let samples = if space.has_point_model() { a.samples } else { 0 };
            config.perturb = Some(p.clone());
            config.samples = Some(samples);
            config.seed = Some(a.seed);
            let e = energy_perturbed(&space, &kernel, spec, digits, samples, a.seed)?;
            let report = EnergyReport {
                energy: e.closed_form,
                stderr: None,
                error: Some(e.closed_form_error),
                method: EnergyMethod::ClosedForm,
            };
            EnergyOutput {
                base_energy: Some(e.base_energy),
                mc: e.mc,
                mc_agrees: e.mc.map(|m| m.agrees_with(e.closed_form, AGREEMENT_STDERRS)),
                ..EnergyOutput::new(report, "perturbed")
            }
        } else {
            let e = energy_uniform(&space, &kernel, digits)?;
            let report =
                EnergyReport { energy: e.energy, stderr: None, error: Some(e.error), method: EnergyMethod::Quadrature };
            EnergyOutput {
                quadrature_check: Some(e.quadrature),
                quadrature_check_error: Some(e.quadrature_error),
                ..EnergyOutput::new(report, "uniform")
            }
        }
    };
    finish(
        &a.common,
        Output::new(config, result),
        &["measure", "energy", "stderr", "error", "method"],
        |r: &EnergyOutput| {
            vec![vec![
                r.measure.clone(),
                r.report.energy.to_string(),
                opt(r.report.stderr),
                opt(r.report.error),
                method_tag(r.report.method).to_string(),
            ]]
        },
        Status::Done,
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct PoissonResult {
    r: f64,
    theta: f64,
    t: f64,
    closed_form: f64,
    series: f64,
    series_terms: usize,
}

fn cmd_poisson(a: PoissonArgs) -> Result<Status, Failure> {
    init_threads(&a.common)?;
    let digits = resolve_digits(&a.common)?;
    let space = Space::parse(&a.space)?;
    let t = space.t_from_theta(a.theta)?;
    let closed_form = poisson_closed::<f64>(&space, a.r, a.theta)?;
    let (series, series_terms) = poisson_series::<f64>(&space, a.r, a.theta)?;
    let config = RunConfig {
        space: Some(a.space.clone()),
        r: Some(a.r),
        theta: Some(a.theta),
        ..base_config("poisson", &a.common, digits)
    };
    let result = PoissonResult { r: a.r, theta: a.theta, t, closed_form, series, series_terms };
    finish(
        &a.common,
        Output::new(config, result),
        &["r", "theta", "t", "closed_form", "series", "series_terms"],
        |p: &PoissonResult| {
            vec![vec![
                p.r.to_string(),
                p.theta.to_string(),
                p.t.to_string(),
                p.closed_form.to_string(),
                p.series.to_string(),
                p.series_terms.to_string(),
            ]]
        },
        Status::Done,
    )
}
