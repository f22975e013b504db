//! Command-line front end: simulations, scans, spectra and the dense
//! state-vector cross-check, emitted as CSV or JSON tables.
//!
//! Exit codes: 0 success, 1 validation or I/O error, 2 numerical
//! degeneracy (ill-defined quantity at the requested parameters).

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pulsed_ising::analysis::{
    self, dft_spectrum, peak_frequencies, read_series_csv, ScanAxis, ScanMetric, SlowEstimator,
    Window,
};
use pulsed_ising::closed_form::{asymptote, asymptote_mz, omega_q, q_factor, quasienergy_spectrum};
use pulsed_ising::oracle;
use pulsed_ising::propagator::time_series;
use pulsed_ising::quadrature::KGrid;
use pulsed_ising::series::TimeSeries;
use pulsed_ising::{DriveParams, Error as CoreError};

#[derive(Parser)]
#[command(
    name = "pulsed-ising",
    version,
    about = "Transverse Ising chain under a square-wave field drive",
    long_about = "Simulates the coherent dynamics of a transverse-field Ising chain whose\n\
                  field flips between +gamma0 and -gamma0 every half period (J = hbar = 1):\n\
                  exact per-mode Floquet evolution, freezing diagnostics, slow-oscillation\n\
                  analysis, and a dense 2^N state-vector cross-check."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Floquet quasi-energy dispersion omega_k over the momentum grid (CSV: k,omega_k)
    Dispersion(DispersionArgs),
    /// Exact magnetization time series M_z(t) (CSV: t,mz)
    Simulate(SimulateArgs),
    /// Closed-form response: Q, omega_Q, long-time asymptote, optional stroboscopic series
    ClosedForm(ClosedFormArgs),
    /// Sweep a drive parameter and tabulate Q, omega_Q, T_Q or M_z(nT)
    Scan(ScanArgs),
    /// DFT magnitude spectrum of a simulated or loaded series (CSV: frequency,magnitude)
    Spectrum(SpectrumArgs),
    /// Validate the free-fermion pipeline against dense 2^N evolution (JSON report)
    OracleCompare(OracleArgs),
}

#[derive(Args)]
struct DriveArgs {
    /// Field amplitude gamma0 > 0
    #[arg(long)]
    gamma0: f64,
    #[command(flatten)]
    period: PeriodArg,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PeriodArg {
    /// Drive period T
    #[arg(long)]
    period: Option<f64>,
    /// Pulse ratio p = gamma0*T/pi (alternative to --period)
    #[arg(long)]
    p: Option<f64>,
}

impl DriveArgs {
    fn to_params(&self) -> Result<DriveParams, CoreError> {
        match (self.period.period, self.period.p) {
            (Some(t), None) => DriveParams::new(self.gamma0, t),
            (None, Some(p)) => DriveParams::from_pulse_ratio(self.gamma0, p),
            // clap's group guarantees exactly one.
            _ => unreachable!("period group"),
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Momentum modes N: grid k = (2n+1)*pi/N, N/2 positive-k nodes
    #[arg(long, default_value_t = 4096)]
    modes: usize,
    /// Use a mapped Gauss-Legendre rule with this many nodes instead
    #[arg(long)]
    gl_nodes: Option<usize>,
}

impl GridArgs {
    fn to_grid(&self) -> Result<KGrid, CoreError> {
        if self.modes < 8 {
            return Err(CoreError::InvalidModeCount(self.modes));
        }
        match self.gl_nodes {
            Some(nodes) => KGrid::gauss_legendre(nodes),
            None => KGrid::discrete(self.modes),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; the table goes to standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    drive: DriveArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    drive: DriveArgs,
    /// Number of full drive cycles
    #[arg(long, default_value_t = 1000)]
    cycles: usize,
    /// Samples per cycle (1 = stroboscopic)
    #[arg(long, default_value_t = 1)]
    samples_per_cycle: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ClosedFormArgs {
    #[command(flatten)]
    drive: DriveArgs,
    /// Also tabulate the closed-form stroboscopic series over this many cycles
    #[arg(long)]
    cycles: Option<usize>,
    /// With --cycles: tabulate the long-time form M0 + (a/sqrt(n))cos(n w_Q + d)
    /// instead of the exact mode sum (starts at n = 1)
    #[arg(long, requires = "cycles")]
    asymptote: bool,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    /// Field amplitude gamma0 (fixed unless scanning gamma0)
    #[arg(long, required_unless_present = "gamma0_from")]
    gamma0: Option<f64>,
    /// Drive period T (fixed; required when scanning gamma0)
    #[arg(long)]
    period: Option<f64>,
    /// Quantity tabulated per grid point
    #[arg(long, value_enum)]
    metric: Metric,
    /// Cycle count for the mz-after metric
    #[arg(long)]
    cycles: Option<u64>,

    #[arg(long)]
    p_from: Option<f64>,
    #[arg(long)]
    p_to: Option<f64>,
    #[arg(long)]
    p_step: Option<f64>,

    #[arg(long)]
    t_from: Option<f64>,
    #[arg(long)]
    t_to: Option<f64>,
    #[arg(long)]
    t_step: Option<f64>,

    #[arg(long)]
    gamma0_from: Option<f64>,
    #[arg(long)]
    gamma0_to: Option<f64>,
    #[arg(long)]
    gamma0_step: Option<f64>,

    /// Cross-check each point against a simulated series of this many cycles
    /// (adds a third column)
    #[arg(long)]
    cross_check: Option<usize>,

    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    /// Freezing factor Q
    Q,
    /// Slow frequency omega_Q (angular, per unit time)
    OmegaQ,
    /// Slow period T_Q = 2*pi/omega_Q
    TQ,
    /// Stroboscopic M_z after --cycles drive cycles
    MzAfter,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Analyze an existing t,mz CSV instead of simulating
    #[arg(long, conflicts_with_all = ["gamma0", "period", "p"])]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "input")]
    gamma0: Option<f64>,
    #[arg(long, group = "period_spec")]
    period: Option<f64>,
    #[arg(long, group = "period_spec")]
    p: Option<f64>,
    /// Cycles simulated for the spectral run
    #[arg(long, default_value_t = 4000)]
    cycles: usize,
    /// Samples per cycle for the spectral run
    #[arg(long, default_value_t = 20)]
    samples_per_cycle: usize,
    /// Taper applied before the DFT
    #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
    window: WindowArg,
    /// Number of refined peaks reported in the summary
    #[arg(long, default_value_t = 5)]
    peaks: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    Hann,
    Rectangular,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    drive: DriveArgs,
    /// Chain length N (even, 2..=12)
    #[arg(long, default_value_t = 8)]
    sites: usize,
    /// Drive cycles compared
    #[arg(long, default_value_t = 100)]
    cycles: usize,
    /// Samples per cycle (2 exercises both half-cycle branches)
    #[arg(long, default_value_t = 2)]
    samples_per_cycle: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure:#}");
            let degenerate = failure
                .downcast_ref::<CoreError>()
                .is_some_and(CoreError::is_degeneracy);
            ExitCode::from(if degenerate { 2 } else { 1 })
        }
    }
}

/// Optional THREADS variable caps internal parallelism (default: all cores).
fn configure_threads() {
    if let Ok(threads) = std::env::var("THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Dispersion(args) => dispersion(args),
        Command::Simulate(args) => simulate(args),
        Command::ClosedForm(args) => closed_form(args),
        Command::Scan(args) => scan_cmd(args),
        Command::Spectrum(args) => spectrum_cmd(args),
        Command::OracleCompare(args) => oracle_compare(args),
    }
}

/// 17 significant digits: round-trip safe for f64.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the artifact to --out (summary to stdout) or, without --out,
/// streams the artifact itself to stdout and the summary to stderr.
fn emit(output: &OutputArgs, artifact: &str, summary: &str) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, artifact)
                .map_err(|e| anyhow::anyhow!("cannot write '{}': {e}", path.display()))?;
            println!("{summary}");
        }
        None => {
            print!("{artifact}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn series_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 48 + 8);
    out.push_str("t,mz\n");
    for (i, v) in series.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_float(series.time_at(i)), fmt_float(*v));
    }
    out
}

fn series_json(series: &TimeSeries) -> String {
    let times: Vec<f64> = (0..series.len()).map(|i| series.time_at(i)).collect();
    let mut text = serde_json::to_string_pretty(&json!({
        "t": times,
        "mz": series.values,
    }))
    .expect("series serializes");
    text.push('\n');
    text
}

fn dispersion(args: DispersionArgs) -> anyhow::Result<()> {
    let params = args.drive.to_params()?;
    let grid = args.grid.to_grid()?;
    let spectrum = quasienergy_spectrum(&params, &grid);
    let artifact = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("k,omega_k\n");
            for p in &spectrum.points {
                let _ = writeln!(out, "{},{}", fmt_float(p.k), fmt_float(p.omega));
            }
            out
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&spectrum)?;
            text.push('\n');
            text
        }
    };
    let stationary: Vec<String> = spectrum
        .stationary_points
        .iter()
        .map(|(k, _)| format!("{k:.4}"))
        .collect();
    let summary = format!(
        "quasi-energy spread {:.6} per cycle over {} modes (gamma0 {}, p {:.6}); stationary omega_k at k = [{}]",
        spectrum.spread,
        grid.node_count(),
        params.gamma0(),
        params.pulse_ratio(),
        stationary.join(", ")
    );
    emit(&args.output, &artifact, &summary)
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let params = args.drive.to_params()?;
    let grid = args.grid.to_grid()?;
    let series = time_series(&params, args.cycles, args.samples_per_cycle, &grid)?;
    let artifact = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => series_csv(&series),
        Format::Json => series_json(&series),
    };
    let mean = series.values.iter().sum::<f64>() / series.len() as f64;
    let summary = format!(
        "simulated {} samples over {} cycles (gamma0 {}, T {:.6}, p {:.6}): M_z(0) = {:.6}, final = {:.6}, mean = {:.6}",
        series.len(),
        args.cycles,
        params.gamma0(),
        params.period(),
        params.pulse_ratio(),
        series.values.first().copied().unwrap_or(f64::NAN),
        series.values.last().copied().unwrap_or(f64::NAN),
        mean
    );
    emit(&args.output, &artifact, &summary)
}

fn closed_form(args: ClosedFormArgs) -> anyhow::Result<()> {
    let params = args.drive.to_params()?;
    let grid = args.grid.to_grid()?;
    let q = q_factor(&params, &grid);
    let wq = omega_q(&params);
    let form = asymptote(&params, &grid)?;
    let summary = format!(
        "Q = {:.9}, omega_Q = {:.6} per cycle ({:.6} angular), asymptote: M0 = {:.9}, a = {:.6}, delta = {:.6}, C = {:.6}",
        q, wq.per_cycle, wq.angular, form.m0, form.amplitude, form.delta_half_pi, form.curvature
    );
    let artifact = match args.cycles {
        Some(cycles) => {
            let series = if args.asymptote {
                let values: Vec<f64> =
                    (1..=cycles).map(|n| asymptote_mz(&form, n as u64)).collect();
                TimeSeries::new(params.period(), params.period(), values, true)?
            } else {
                pulsed_ising::closed_form::stroboscopic_series(&params, cycles, &grid)?
            };
            match args.output.format.unwrap_or(Format::Csv) {
                Format::Csv => series_csv(&series),
                Format::Json => series_json(&series),
            }
        }
        None => match args.output.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut out = String::from("quantity,value\n");
                for (name, value) in [
                    ("q", q),
                    ("omega_q_per_cycle", wq.per_cycle),
                    ("omega_q_angular", wq.angular),
                    ("m0", form.m0),
                    ("amplitude", form.amplitude),
                    ("delta_half_pi", form.delta_half_pi),
                    ("curvature", form.curvature),
                ] {
                    let _ = writeln!(out, "{name},{}", fmt_float(value));
                }
                out
            }
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&json!({
                    "q": q,
                    "omega_q": wq,
                    "asymptote": form,
                }))?;
                text.push('\n');
                text
            }
        },
    };
    emit(&args.output, &artifact, &summary)
}

struct ScanSpec {
    axis: ScanAxis,
    axis_name: &'static str,
    values: Vec<f64>,
    gamma0: f64,
    period: f64,
}

fn scan_spec(args: &ScanArgs) -> anyhow::Result<ScanSpec> {
    let triples = [
        (
            args.p_from,
            args.p_to,
            args.p_step,
            ScanAxis::PulseRatio,
            "p",
        ),
        (
            args.t_from,
            args.t_to,
            args.t_step,
            ScanAxis::Period,
            "period",
        ),
        (
            args.gamma0_from,
            args.gamma0_to,
            args.gamma0_step,
            ScanAxis::Gamma0,
            "gamma0",
        ),
    ];
    let mut chosen = None;
    for (from, to, step, axis, name) in triples {
        match (from, to, step) {
            (None, None, None) => continue,
            (Some(from), Some(to), Some(step)) => {
                if chosen.is_some() {
                    anyhow::bail!("conflicting flags: more than one scan axis given");
                }
                if step <= 0.0 || to < from {
                    anyhow::bail!("invalid scan range: need from <= to and step > 0");
                }
                chosen = Some((axis, name, from, to, step));
            }
            _ => anyhow::bail!(
                "incomplete scan axis: --{name}-from/--{name}-to/--{name}-step must be given together",
                name = name
            ),
        }
    }
    let (axis, axis_name, from, to, step) = chosen.ok_or_else(|| {
        anyhow::anyhow!(
            "no scan axis given (use --p-from/--p-to/--p-step, --t-from/..., or --gamma0-from/...)"
        )
    })?;
    let count = ((to - from) / step).round() as usize + 1;
    let values: Vec<f64> = (0..count)
        .map(|i| from + i as f64 * step)
        .filter(|v| *v <= to + 0.5 * step)
        .collect();

    let gamma0 = match axis {
        ScanAxis::Gamma0 => args.gamma0.unwrap_or(f64::NAN),
        _ => args
            .gamma0
            .ok_or_else(|| anyhow::anyhow!("--gamma0 is required for this scan axis"))?,
    };
    let period = match axis {
        ScanAxis::Gamma0 => args
            .period
            .ok_or_else(|| anyhow::anyhow!("--period is required when scanning gamma0"))?,
        _ => args.period.unwrap_or(f64::NAN),
    };
    Ok(ScanSpec {
        axis,
        axis_name,
        values,
        gamma0,
        period,
    })
}

fn scan_cmd(args: ScanArgs) -> anyhow::Result<()> {
    let spec = scan_spec(&args)?;
    let grid = args.grid.to_grid()?;
    let metric = match args.metric {
        Metric::Q => ScanMetric::QFactor,
        Metric::OmegaQ => ScanMetric::OmegaQ,
        Metric::TQ => ScanMetric::TQ,
        Metric::MzAfter => ScanMetric::MzAfter {
            cycles: args
                .cycles
                .ok_or_else(|| anyhow::anyhow!("--cycles is required for --metric mz-after"))?,
        },
    };
    let slow = args.cross_check.map(|cycles| SlowEstimator {
        cycles,
        burn_in_fraction: 0.0,
    });
    let points = analysis::scan(
        spec.gamma0,
        spec.period,
        spec.axis,
        &spec.values,
        metric,
        &grid,
        slow,
    )?;

    let metric_name = match metric {
        ScanMetric::QFactor => "q",
        ScanMetric::OmegaQ => "omega_q",
        ScanMetric::TQ => "t_q",
        ScanMetric::MzAfter { .. } => "mz",
    };
    let cell = |v: &Result<f64, CoreError>| match v {
        Ok(x) => fmt_float(*x),
        Err(_) => "nan".to_string(),
    };
    let artifact = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::new();
            if slow.is_some() {
                let _ = writeln!(
                    out,
                    "{},{},{}_slow",
                    spec.axis_name, metric_name, metric_name
                );
            } else {
                let _ = writeln!(out, "{},{}", spec.axis_name, metric_name);
            }
            for point in &points {
                let _ = write!(out, "{},{}", fmt_float(point.parameter), cell(&point.value));
                if let Some(slow_value) = &point.slow_value {
                    let _ = write!(out, ",{}", cell(slow_value));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = points
                .iter()
                .map(|point| {
                    json!({
                        spec.axis_name: point.parameter,
                        metric_name: point.value.as_ref().ok(),
                        "error": point.value.as_ref().err().map(|e| e.to_string()),
                        "slow": point.slow_value.as_ref().map(|v| v.as_ref().ok().copied()),
                    })
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows)?;
            text.push('\n');
            text
        }
    };

    let best = points
        .iter()
        .filter_map(|p| p.value.as_ref().ok().map(|v| (p.parameter, *v)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let failed = points.iter().filter(|p| p.value.is_err()).count();
    let summary = match best {
        Some((at, value)) => format!(
            "scanned {} points over {} ({} failed): max {} = {:.6} at {} = {:.6}",
            points.len(),
            spec.axis_name,
            failed,
            metric_name,
            value,
            spec.axis_name,
            at
        ),
        None => format!("scanned {} points; all failed", points.len()),
    };
    emit(&args.output, &artifact, &summary)
}

fn spectrum_cmd(args: SpectrumArgs) -> anyhow::Result<()> {
    let series = match &args.input {
        Some(path) => {
            let file = fs::File::open(path)
                .map_err(|e| anyhow::anyhow!("cannot read '{}': {e}", path.display()))?;
            read_series_csv(BufReader::new(file))?
        }
        None => {
            let gamma0 = args.gamma0.expect("clap enforces gamma0 without --input");
            let params = match (args.period, args.p) {
                (Some(t), None) => DriveParams::new(gamma0, t)?,
                (None, Some(p)) => DriveParams::from_pulse_ratio(gamma0, p)?,
                _ => anyhow::bail!("exactly one of --period or --p is required"),
            };
            let grid = args.grid.to_grid()?;
            time_series(&params, args.cycles, args.samples_per_cycle, &grid)?
        }
    };
    let window = match args.window {
        WindowArg::Hann => Window::Hann,
        WindowArg::Rectangular => Window::Rectangular,
    };
    let spectrum = dft_spectrum(&series, window)?;
    let peaks = peak_frequencies(&spectrum, args.peaks);
    let artifact = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("frequency,magnitude\n");
            for (f, m) in spectrum.frequencies.iter().zip(&spectrum.magnitudes) {
                let _ = writeln!(out, "{},{}", fmt_float(*f), fmt_float(*m));
            }
            out
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&json!({
                "window": spectrum.window.name(),
                "frequencies": spectrum.frequencies,
                "magnitudes": spectrum.magnitudes,
                "peaks": peaks
                    .iter()
                    .map(|p| json!({"frequency": p.frequency, "magnitude": p.magnitude}))
                    .collect::<Vec<_>>(),
            }))?;
            text.push('\n');
            text
        }
    };
    let listed: Vec<String> = peaks
        .iter()
        .map(|p| format!("{:.4} ({:.3e})", p.frequency, p.magnitude))
        .collect();
    let summary = format!(
        "{} bins ({} window), top peaks by magnitude: {}",
        spectrum.frequencies.len(),
        spectrum.window.name(),
        listed.join(", ")
    );
    emit(&args.output, &artifact, &summary)
}

fn oracle_compare(args: OracleArgs) -> anyhow::Result<()> {
    let params = args.drive.to_params()?;
    let report = oracle::compare(&params, args.sites, args.cycles, args.samples_per_cycle)?;
    let artifact = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = String::from("t,dense_mz,free_fermion_mz\n");
            for i in 0..report.times.len() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt_float(report.times[i]),
                    fmt_float(report.dense_mz[i]),
                    fmt_float(report.free_fermion_mz[i])
                );
            }
            out
        }
    };
    let summary = format!(
        "N = {} sites, {} cycles: max |dense - free-fermion| = {:.3e} (threshold {:.0e}) => {}",
        report.n_sites,
        report.cycles,
        report.max_abs_deviation,
        report.threshold,
        if report.pass { "pass" } else { "FAIL" }
    );
    emit(&args.output, &artifact, &summary)
}
