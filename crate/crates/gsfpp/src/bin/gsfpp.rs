//! Command-line front end: config ingestion, one subcommand per analytic
//! or simulation task, CSV/JSON artifacts suitable for external plotting.
//!
//! Exit statuses: 0 success, 1 validation error, 2 low-confidence numerical
//! result, 3 verification failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gsfpp::analytics::{
    hitting_cdf, levy_segment, pcf, pgf, pmf_convolution, pmf_series,
};
use gsfpp::config::{OutputFormat, RunConfig};
use gsfpp::montecarlo::{empirical_pmf, hitting_mc, simulate_gsfpp};
use gsfpp::verify::run_verification;
use gsfpp::Error;

#[derive(Parser)]
#[command(name = "gsfpp", version, about = "Variable-order stable subordinators and the space-fractional Poisson processes they drive")]
struct Cli {
    /// Path to a JSON run configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for tables and curves.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the pmf by the multinomial series and the convolution oracle.
    Pmf,
    /// Evaluate the probability generating function on a grid of u values.
    Pgf {
        /// Comma-separated u values in [0, 1].
        #[arg(long, value_delimiter = ',')]
        u_grid: Option<Vec<f64>>,
    },
    /// Evaluate the characteristic function on a grid of angles.
    Pcf {
        /// Comma-separated theta values.
        #[arg(long, value_delimiter = ',')]
        theta_grid: Option<Vec<f64>>,
    },
    /// Simulate the process and emit the empirical pmf.
    Simulate {
        /// Also emit raw counts, one per row.
        #[arg(long)]
        raw: bool,
    },
    /// Hitting-time CDF, analytic and Monte Carlo, on a time grid.
    Hitting {
        /// Hitting level k >= 1.
        #[arg(long, default_value_t = 1)]
        k: u64,
        /// Comma-separated grid times; defaults to 10 equal steps up to t.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Per-segment discrete Levy measure.
    Levy {
        /// Number of jump sizes per segment.
        #[arg(long, default_value_t = 200)]
        j: usize,
    },
    /// Run the full verification harness.
    Verify,
}

/// A table artifact with a fixed column order. Floats serialize with 17
/// significant digits so parsing the artifact reproduces them bit-exactly.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Clone)]
enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write(&self, out: &mut dyn Write, format: OutputFormat) -> gsfpp::Result<()> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)
                    .map_err(|e| Error::Domain(e.to_string()))?;
                for row in &self.rows {
                    let rendered: Vec<String> = row.iter().map(Cell::render).collect();
                    w.write_record(&rendered)
                        .map_err(|e| Error::Domain(e.to_string()))?;
                }
                w.flush()?;
            }
            OutputFormat::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        self.columns
                            .iter()
                            .zip(row)
                            .map(|(&c, cell)| {
                                let v = match cell {
                                    Cell::Int(i) => serde_json::json!(i),
                                    Cell::Float(f) => serde_json::json!(f),
                                    Cell::Text(s) => serde_json::json!(s),
                                };
                                (c.to_string(), v)
                            })
                            .collect::<serde_json::Map<_, _>>()
                            .into()
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &objects)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

fn load_config(cli: &Cli) -> gsfpp::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.rng.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.path = Some(out.clone());
    }
    if let Some(format) = cli.format {
        config.output.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    Ok(config)
}

fn emit(table: &Table, config: &RunConfig) -> gsfpp::Result<()> {
    match &config.output.path {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            table.write(&mut file, config.output.format)
        }
        None => {
            let stdout = std::io::stdout();
            table.write(&mut stdout.lock(), config.output.format)
        }
    }
}

fn cmd_pmf(config: &RunConfig) -> gsfpp::Result<u8> {
    config.validate()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let params = config.series;
    let mut table = Table::new(vec![
        "m",
        "pmf_series",
        "pmf_convolution",
        "abs_diff",
        "trunc_bound",
        "status",
    ]);
    if config.t == 0.0 {
        table.push(vec![
            Cell::Int(0),
            Cell::Float(1.0),
            Cell::Float(1.0),
            Cell::Float(0.0),
            Cell::Float(0.0),
            Cell::Text("ok".into()),
        ]);
        emit(&table, config)?;
        return Ok(0);
    }
    let conv = pmf_convolution(&schedule, lambda, config.t, &params)?;
    let status = if conv.low_confidence { "low-confidence" } else { "ok" };
    for m in 0..=params.m_max {
        let series = pmf_series(&schedule, lambda, config.t, m, &params)?;
        table.push(vec![
            Cell::Int(m as u64),
            Cell::Float(series),
            Cell::Float(conv.probs[m]),
            Cell::Float((series - conv.probs[m]).abs()),
            Cell::Float(conv.trunc_bound),
            Cell::Text(status.into()),
        ]);
    }
    emit(&table, config)?;
    Ok(if conv.low_confidence { 2 } else { 0 })
}

fn cmd_pgf(config: &RunConfig, u_grid: Option<Vec<f64>>) -> gsfpp::Result<u8> {
    config.validate()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let grid = u_grid.unwrap_or_else(|| (0..=20).map(|i| i as f64 / 20.0).collect());
    let mut table = Table::new(vec!["u", "psi"]);
    for u in grid {
        table.push(vec![
            Cell::Float(u),
            Cell::Float(pgf(&schedule, lambda, config.t, u)?),
        ]);
    }
    emit(&table, config)?;
    Ok(0)
}

fn cmd_pcf(config: &RunConfig, theta_grid: Option<Vec<f64>>) -> gsfpp::Result<u8> {
    config.validate()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let grid = theta_grid.unwrap_or_else(|| {
        (-20..=20)
            .map(|i| i as f64 * std::f64::consts::PI / 20.0)
            .collect()
    });
    let mut table = Table::new(vec!["theta", "re_phi", "im_phi", "abs_phi"]);
    for theta in grid {
        let phi = pcf(&schedule, lambda, config.t, theta)?;
        table.push(vec![
            Cell::Float(theta),
            Cell::Float(phi.re),
            Cell::Float(phi.im),
            Cell::Float(phi.norm()),
        ]);
    }
    emit(&table, config)?;
    Ok(0)
}

fn cmd_simulate(config: &RunConfig, raw: bool) -> gsfpp::Result<u8> {
    config.validate_statistical()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let batch = simulate_gsfpp(
        &schedule,
        lambda,
        config.t,
        config.mc.n,
        config.rng,
        config.mc.workers,
    )?;
    let empirical = empirical_pmf(&batch, config.series.m_max)?;
    let mut table = if raw {
        let mut t = Table::new(vec!["count"]);
        for &c in &batch.counts {
            t.push(vec![Cell::Int(c)]);
        }
        t
    } else {
        let mut t = Table::new(vec!["m", "frequency"]);
        for (m, &p) in empirical.probs.iter().enumerate() {
            t.push(vec![Cell::Int(m as u64), Cell::Float(p)]);
        }
        t
    };
    if !raw {
        table.push(vec![Cell::Text("tail".into()), Cell::Float(empirical.trunc_bound)]);
    }
    emit(&table, config)?;
    eprintln!(
        "simulate: n={} seed={} stream={} mean={:.6} overflow={}",
        config.mc.n,
        batch.rng.seed,
        batch.rng.stream_id,
        batch.mean(),
        batch.n_overflow
    );
    Ok(0)
}

fn cmd_hitting(config: &RunConfig, k: u64, t_grid: Option<Vec<f64>>) -> gsfpp::Result<u8> {
    config.validate_statistical()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let grid = t_grid
        .unwrap_or_else(|| (0..=10).map(|i| i as f64 * config.t / 10.0).collect());
    let mut table = Table::new(vec!["t", "analytic_cdf", "mc_estimate", "mc_se"]);
    // Monte Carlo runs on the strictly positive part of the grid; t = 0 is
    // exactly zero on both sides
    let positive: Vec<f64> = grid.iter().cloned().filter(|&t| t > 0.0).collect();
    let estimates = if positive.is_empty() {
        Vec::new()
    } else {
        hitting_mc(
            &schedule,
            lambda,
            &positive,
            k,
            config.mc.n,
            config.rng,
            config.mc.workers,
        )?
    };
    let mut est_iter = estimates.iter();
    for &t in &grid {
        let analytic = hitting_cdf(&schedule, lambda, t, k as usize, &config.series)?;
        let (mc, se) = if t > 0.0 {
            let e = est_iter.next().expect("one estimate per positive grid point");
            (e.estimate, e.standard_error)
        } else {
            (0.0, 0.0)
        };
        table.push(vec![
            Cell::Float(t),
            Cell::Float(analytic),
            Cell::Float(mc),
            Cell::Float(se),
        ]);
    }
    emit(&table, config)?;
    Ok(0)
}

fn cmd_levy(config: &RunConfig, j_max: usize) -> gsfpp::Result<u8> {
    config.validate()?;
    let schedule = config.schedule()?;
    let lambda = config.rate()?;
    let probe_u: f64 = 0.5;
    let mut table = Table::new(vec!["segment", "alpha", "j", "mass"]);
    for (idx, (len, alpha)) in schedule.clipped_segments(config.t)?.iter().enumerate() {
        let measure = levy_segment(*alpha, lambda, j_max)?;
        for (j, &mass) in measure.masses.iter().enumerate() {
            table.push(vec![
                Cell::Int(idx as u64),
                Cell::Float(*alpha),
                Cell::Int(j as u64 + 1),
                Cell::Float(mass),
            ]);
        }
        let exact = (-(len * lambda.get().powf(*alpha) * (1.0 - probe_u).powf(*alpha))).exp();
        let recon_err = (measure.reconstruct_pgf(*len, probe_u) - exact).abs();
        eprintln!(
            "levy segment {idx}: alpha={alpha} total_mass={:.12} reconstruction_error={:.3e} at u={probe_u}",
            measure.total_mass, recon_err
        );
    }
    emit(&table, config)?;
    Ok(0)
}

fn cmd_verify(config: &RunConfig) -> gsfpp::Result<u8> {
    let report = run_verification(config)?;
    for check in &report.checks {
        println!(
            "{} {:<32} statistic {:>13.6e}  threshold {:>9.2e}  {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.statistic,
            check.threshold,
            check.details
        );
    }
    let json = serde_json::to_string_pretty(&report)?;
    match &config.output.path {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(if report.all_pass() { 0 } else { 3 })
}

fn run(cli: Cli) -> gsfpp::Result<u8> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Pmf => cmd_pmf(&config),
        Command::Pgf { u_grid } => cmd_pgf(&config, u_grid),
        Command::Pcf { theta_grid } => cmd_pcf(&config, theta_grid),
        Command::Simulate { raw } => cmd_simulate(&config, raw),
        Command::Hitting { k, t_grid } => cmd_hitting(&config, k, t_grid),
        Command::Levy { j } => cmd_levy(&config, j),
        Command::Verify => cmd_verify(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Truncation { .. } => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
