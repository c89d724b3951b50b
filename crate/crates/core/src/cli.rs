//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] from flags and an optional flat
//! TOML file (flags win), runs, and writes CSV or JSON whose header records
//! the full configuration including the seed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{
    ccf_step_in_place, check_detailed_balance, dcf_step, empirical_counts, ewens_pmf_over,
    exact_kernel_capped, k_step_distribution, stationarity_violation, ExactDistribution,
};
use crate::coupling::{run_coupling, CouplingTrace};
use crate::diagnostics::{gem_moment_report, moment_sum};
use crate::partitions::{ContinuousPartition, CylinderSet, IntegerPartition, PartitionSet};
use crate::samplers::{sample_gem, RngStream};
use crate::spectral::{
    eigenrelation_violation, inner_product, return_probability, CharacterTable, SpectralModel,
    Spectrum,
};
use crate::{Error, Result, DEFAULT_EPSILON_TRUNC, DEFAULT_EXACT_CAP};

/// Largest `n` the `characters` subcommand prints.
pub const CHARACTER_TABLE_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run CCF replicas and report the final partitions.
    SimulateCcf,
    /// Run DCF(n) replicas and report empirical (or, with --exact, exact) k-step laws.
    SimulateDcf,
    /// Run the coupled CCF/DCF(n) construction from GEM draws.
    Couple,
    /// Eigenvalues of the DCF(n) kernel.
    Spectrum,
    /// The character table of S_n.
    Characters,
    /// Exact Δ_C(k) for k = 0..=steps.
    DeltaC,
    /// Exact return probabilities to the n-cycle class at even times.
    ReturnProb,
    /// GEM moment sums Σ p_i^α.
    Moments,
    /// Run the exact invariant suite; exits 1 on any failure.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SimulateCcf => "simulate-ccf",
            Command::SimulateDcf => "simulate-dcf",
            Command::Couple => "couple",
            Command::Spectrum => "spectrum",
            Command::Characters => "characters",
            Command::DeltaC => "delta-c",
            Command::ReturnProb => "return-prob",
            Command::Moments => "moments",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "splitmerge", version, about = "Split-merge chains on partitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Flags shared by all subcommands; unset values fall back to the config file, then defaults.
#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated exponents.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Cylinder set as `a1,b1;a2,b2;...`.
    #[arg(long, global = true)]
    pub cylinder: Option<String>,
    #[arg(long, global = true)]
    pub epsilon_trunc: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default)]
    pub exact: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Starting partition: integer parts for DCF, masses for CCF.
    #[arg(long, global = true)]
    pub start: Option<String>,
    /// Flat TOML file with any of the keys above.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// The fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<usize>,
    pub steps: usize,
    pub replicas: u64,
    pub seed: u64,
    pub alpha: Vec<f64>,
    pub cylinder: Option<CylinderSet>,
    pub epsilon_trunc: f64,
    pub exact: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub start: Option<String>,
}

impl RunConfig {
    /// Merges flags over the config file named by `--config`, then applies defaults.
    pub fn resolve(command: Command, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str::<Flags>(&text)
                    .map_err(|e| Error::Usage(format!("config file {}: {e}", path.display())))?
            }
            None => Flags::default(),
        };
        let cylinder = flags
            .cylinder
            .or(file.cylinder)
            .map(|spec| CylinderSet::parse(&spec))
            .transpose()
            .map_err(|e| Error::Usage(e.to_string()))?;
        let config = Self {
            command,
            n: flags.n.or(file.n),
            steps: flags.steps.or(file.steps).unwrap_or(1),
            replicas: flags.replicas.or(file.replicas).unwrap_or(1000),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            alpha: flags.alpha.or(file.alpha).unwrap_or_else(|| vec![0.6]),
            cylinder,
            epsilon_trunc: flags
                .epsilon_trunc
                .or(file.epsilon_trunc)
                .unwrap_or(DEFAULT_EPSILON_TRUNC),
            exact: flags.exact || file.exact,
            out: flags.out.or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            start: flags.start.or(file.start),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Usage("--replicas must be at least 1".into()));
        }
        if !(self.epsilon_trunc > 0.0 && self.epsilon_trunc < 1.0) {
            return Err(Error::Usage("--epsilon-trunc must lie in (0, 1)".into()));
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|&a| a.is_nan() || a <= 0.0) {
            return Err(Error::Usage("--alpha values must be positive".into()));
        }
        if self.n == Some(0) {
            return Err(Error::Usage("--n must be at least 1".into()));
        }
        Ok(())
    }

    fn require_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::Usage(format!("{} needs --n", self.command.name())))
    }

    fn require_exact_n(&self, min: usize) -> Result<usize> {
        let n = self.require_n()?;
        if n < min {
            return Err(Error::Usage(format!("{} needs --n >= {min}", self.command.name())));
        }
        if n > DEFAULT_EXACT_CAP {
            return Err(Error::Capacity {
                n,
                cap: DEFAULT_EXACT_CAP,
            });
        }
        Ok(n)
    }
}

/// A table ready to be written as CSV or JSON.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Extra JSON payload replacing the row list, for nested results.
    json: Option<serde_json::Value>,
}

impl Table {
    fn new(header: Vec<&str>) -> Self {
        Self {
            header: header.into_iter().map(String::from).collect(),
            rows: Vec::new(),
            json: None,
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn write_output(config: &RunConfig, table: &Table) -> Result<()> {
    let sink: Box<dyn Write> = match &config.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    write_table(config, table, sink)
}

fn write_table(config: &RunConfig, table: &Table, mut sink: impl Write) -> Result<()> {
    match config.format {
        Format::Csv => {
            writeln!(sink, "# splitmerge {}", serde_json::to_string(config)?)?;
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let data = match &table.json {
                Some(v) => v.clone(),
                None => {
                    let rows: Vec<serde_json::Value> = table
                        .rows
                        .iter()
                        .map(|row| {
                            let obj: serde_json::Map<String, serde_json::Value> = table
                                .header
                                .iter()
                                .zip(row)
                                .map(|(h, v)| (h.clone(), serde_json::Value::String(v.clone())))
                                .collect();
                            serde_json::Value::Object(obj)
                        })
                        .collect();
                    serde_json::Value::Array(rows)
                }
            };
            let doc = serde_json::json!({ "config": config, "data": data });
            serde_json::to_writer_pretty(&mut sink, &doc)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn parse_integer_start(spec: &str, n: usize) -> Result<IntegerPartition> {
    let parts = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Usage(format!("--start {spec:?}: {e}")))?;
    let p = IntegerPartition::from_unsorted(&parts);
    if p.n() != n {
        return Err(Error::Usage(format!("--start {spec:?} is not a partition of {n}")));
    }
    Ok(p)
}

fn parse_continuous_start(spec: &str) -> Result<ContinuousPartition> {
    let masses = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Usage(format!("--start {spec:?}: {e}")))?;
    let dust = (1.0 - masses.iter().sum::<f64>()).max(0.0);
    ContinuousPartition::from_masses(&masses, dust).map_err(|e| Error::Usage(e.to_string()))
}

fn fraction(q: &BigRational) -> [String; 2] {
    [q.numer().to_string(), q.denom().to_string()]
}

fn simulate_ccf(config: &RunConfig) -> Result<Table> {
    let start = match &config.start {
        Some(spec) => parse_continuous_start(spec)?,
        None => ContinuousPartition::unit(),
    };
    let finals = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(config.seed, r);
            let mut p = start.clone();
            for _ in 0..config.steps {
                ccf_step_in_place(&mut p, &mut rng);
            }
            p
        })
        .collect::<Vec<_>>();
    let mut table = Table::new(vec!["replica", "num_parts", "p1", "p2", "p3"]);
    table
        .header
        .extend(config.alpha.iter().map(|a| format!("moment_{a}")));
    for (r, p) in finals.iter().enumerate() {
        let mut row = vec![r.to_string(), p.len().to_string()];
        row.extend((1..=3).map(|i| p.part(i).to_string()));
        for &a in &config.alpha {
            row.push(moment_sum(p, a)?.to_string());
        }
        table.push(row);
    }
    Ok(table)
}

fn simulate_dcf(config: &RunConfig) -> Result<Table> {
    let n = config.require_n()?;
    if n < 2 {
        return Err(Error::Usage("simulate-dcf needs --n >= 2".into()));
    }
    let start = match &config.start {
        Some(spec) => parse_integer_start(spec, n)?,
        None => IntegerPartition::single(n),
    };
    if config.exact {
        let n = config.require_exact_n(2)?;
        let kernel = exact_kernel_capped(n, DEFAULT_EXACT_CAP)?;
        let mu0 = ExactDistribution::point_mass(Arc::clone(kernel.states()), &start)?;
        let law = k_step_distribution(&mu0, &kernel, config.steps)?;
        let mut table = Table::new(vec!["partition", "probability_num", "probability_den"]);
        for (p, q) in law.states().iter().zip(law.weights()) {
            let [num, den] = fraction(q);
            table.push(vec![p.to_string(), num, den]);
        }
        return Ok(table);
    }
    if n > DEFAULT_EXACT_CAP {
        return Err(Error::Capacity {
            n,
            cap: DEFAULT_EXACT_CAP,
        });
    }
    let (states, counts) =
        empirical_counts(dcf_step, &start, config.steps, config.replicas, config.seed)?;
    let mut table = Table::new(vec!["partition", "count", "frequency"]);
    for (p, &c) in states.iter().zip(&counts) {
        table.push(vec![
            p.to_string(),
            c.to_string(),
            (c as f64 / config.replicas as f64).to_string(),
        ]);
    }
    Ok(table)
}

fn couple(config: &RunConfig) -> Result<(Table, Vec<CouplingTrace>)> {
    let n = config.require_n()?;
    if n < 2 {
        return Err(Error::Usage("couple needs --n >= 2".into()));
    }
    let start = config.start.as_deref().map(parse_continuous_start).transpose()?;
    let traces = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(config.seed, r);
            let p = match &start {
                Some(p) => p.clone(),
                None => sample_gem(&mut rng, config.epsilon_trunc)?,
            };
            run_coupling(&p, n, config.steps, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(vec!["replica", "k", "rho", "e", "l1_gap"]);
    for t in &traces {
        for rec in &t.records {
            table.push(vec![
                t.stream_id.to_string(),
                rec.k.to_string(),
                rec.rho.to_string(),
                u8::from(rec.e).to_string(),
                rec.l1_gap.to_string(),
            ]);
        }
    }
    table.json = Some(coupling_summary(&traces));
    Ok((table, traces))
}

fn coupling_summary(traces: &[CouplingTrace]) -> serde_json::Value {
    let replicas: Vec<serde_json::Value> = traces
        .iter()
        .map(|t| {
            let rho: Vec<f64> = t.records.iter().map(|r| r.rho).collect();
            serde_json::json!({
                "replica": t.stream_id,
                "seed": t.seed,
                "stream_id": t.stream_id,
                "tau": t.tau,
                "initial_parts": t.initial_parts,
                "rho": rho,
            })
        })
        .collect();
    serde_json::json!({ "replicas": replicas })
}

fn spectrum(config: &RunConfig) -> Result<Table> {
    let n = config.require_exact_n(2)?;
    let spectrum = Spectrum::new(n)?;
    let mut table = Table::new(vec!["lambda", "theta_num", "theta_den"]);
    for (lambda, theta) in spectrum.states().iter().zip(spectrum.eigenvalues()) {
        let [num, den] = fraction(theta);
        table.push(vec![lambda.to_string(), num, den]);
    }
    Ok(table)
}

fn characters(config: &RunConfig) -> Result<Table> {
    let n = config.require_n()?;
    if n > CHARACTER_TABLE_CAP {
        return Err(Error::Capacity {
            n,
            cap: CHARACTER_TABLE_CAP,
        });
    }
    let table = CharacterTable::build(n)?;
    let mut out = Table::new(vec!["lambda", "gamma", "chi"]);
    for (i, lambda) in table.states().iter().enumerate() {
        for (j, gamma) in table.states().iter().enumerate() {
            out.push(vec![lambda.to_string(), gamma.to_string(), table.row(i)[j].to_string()]);
        }
    }
    Ok(out)
}

fn delta_c(config: &RunConfig) -> Result<Table> {
    let n = config.require_exact_n(2)?;
    let cylinder = config
        .cylinder
        .clone()
        .ok_or_else(|| Error::Usage("delta-c needs --cylinder".into()))?;
    let start = match &config.start {
        Some(spec) => parse_integer_start(spec, n)?,
        None => IntegerPartition::single(n),
    };
    let model = SpectralModel::new(n)?;
    let mu0 = ExactDistribution::point_mass(Arc::clone(model.states()), &start)?;
    let seq = model.delta_c_sequence(&mu0, &cylinder, config.steps as u32)?;
    let mut table = Table::new(vec!["k", "delta_num", "delta_den"]);
    for (k, d) in seq.iter().enumerate() {
        let [num, den] = fraction(d);
        table.push(vec![k.to_string(), num, den]);
    }
    Ok(table)
}

fn return_prob(config: &RunConfig) -> Result<Table> {
    let n = config.require_n()?;
    if n < 2 || config.steps < 1 {
        return Err(Error::Usage("return-prob needs --n >= 2 and --steps >= 1".into()));
    }
    let mut table = Table::new(vec!["n", "k", "p_num", "p_den"]);
    for k in 1..=config.steps {
        let [num, den] = fraction(&return_probability(n, k as u32)?);
        table.push(vec![n.to_string(), k.to_string(), num, den]);
    }
    Ok(table)
}

fn moments(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(vec!["alpha", "mean", "stderr", "replicas", "dust_bound"]);
    for &alpha in &config.alpha {
        let r = gem_moment_report(alpha, config.replicas, config.seed, config.epsilon_trunc)?;
        table.push(vec![
            alpha.to_string(),
            r.sample_mean.to_string(),
            r.std_error.to_string(),
            r.replicas.to_string(),
            r.dust_bound.to_string(),
        ]);
    }
    Ok(table)
}

/// One line of the `verify` report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub n: usize,
    pub passed: bool,
}

/// The exact invariant suite for every `n` in `2..=max_n` (orthonormality up to 8).
pub fn verify_suite(max_n: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut rng = RngStream::new(seed, 0);
    for n in 2..=max_n {
        let kernel = exact_kernel_capped(n, DEFAULT_EXACT_CAP)?;
        let states = Arc::clone(kernel.states());
        checks.push(Check {
            name: "detailed-balance",
            n,
            passed: check_detailed_balance(&kernel)?.is_zero(),
        });
        checks.push(Check {
            name: "stationarity",
            n,
            passed: stationarity_violation(&kernel)?.is_zero(),
        });
        let model = SpectralModel::over(Arc::clone(&states))?;
        checks.push(Check {
            name: "eigen-relation",
            n,
            passed: eigenrelation_violation(&kernel, model.table(), model.spectrum().eigenvalues())?
                .is_zero(),
        });
        if n <= 8 {
            checks.push(Check {
                name: "orthonormality",
                n,
                passed: orthonormal(model.table(), &ewens_pmf_over(Arc::clone(&states))?)?,
            });
        }
        checks.push(Check {
            name: "spectral-vs-matrix-power",
            n,
            passed: spectral_matches_power(&model, &kernel, &states, &mut rng)?,
        });
        let top = IntegerPartition::single(n);
        let start = ExactDistribution::point_mass(Arc::clone(&states), &top)?;
        let mask: Vec<bool> = states.iter().map(|g| *g == top).collect();
        let mut passed = true;
        for k in 1..=5u32 {
            passed &= return_probability(n, k)? == model.event_probability(&start, &mask, 2 * k)?;
        }
        checks.push(Check {
            name: "return-probability",
            n,
            passed,
        });
    }
    Ok(checks)
}

fn orthonormal(table: &CharacterTable, pi: &ExactDistribution) -> Result<bool> {
    let size = table.states().len();
    for a in 0..size {
        for b in a..size {
            let ip = inner_product(&table.class_function(a), &table.class_function(b), pi)?;
            let expected = if a == b { 1 } else { 0 };
            if ip != BigRational::from_integer(expected.into()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn spectral_matches_power(
    model: &SpectralModel,
    kernel: &crate::chains::ExactKernel,
    states: &Arc<PartitionSet>,
    rng: &mut RngStream,
) -> Result<bool> {
    for _ in 0..3 {
        let start = states.get(rng.below(states.len())).clone();
        let mu0 = ExactDistribution::point_mass(Arc::clone(states), &start)?;
        let mask: Vec<bool> = (0..states.len()).map(|_| rng.below(2) == 1).collect();
        let mut mu = mu0.clone();
        for k in 0..=10u32 {
            if model.event_probability(&mu0, &mask, k)? != mu.mass_of(&mask) {
                return Ok(false);
            }
            mu = kernel.push_forward(&mu)?;
        }
    }
    Ok(true)
}

fn verify(config: &RunConfig) -> Result<(Table, bool)> {
    let max_n = config.n.unwrap_or(8);
    if max_n > DEFAULT_EXACT_CAP {
        return Err(Error::Capacity {
            n: max_n,
            cap: DEFAULT_EXACT_CAP,
        });
    }
    let checks = verify_suite(max_n, config.seed)?;
    let mut table = Table::new(vec!["check", "n", "status"]);
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        let status = if c.passed { "pass" } else { "FAIL" };
        table.push(vec![c.name.to_string(), c.n.to_string(), status.to_string()]);
    }
    Ok((table, all))
}

/// Runs one resolved configuration; returns the process exit status.
pub fn run(config: &RunConfig) -> Result<i32> {
    let mut status = 0;
    let table = match config.command {
        Command::SimulateCcf => simulate_ccf(config)?,
        Command::SimulateDcf => simulate_dcf(config)?,
        Command::Couple => {
            let (table, traces) = couple(config)?;
            if let (Some(out), Format::Csv) = (&config.out, config.format) {
                let summary = Table {
                    header: Vec::new(),
                    rows: Vec::new(),
                    json: Some(coupling_summary(&traces)),
                };
                let json_config = RunConfig {
                    format: Format::Json,
                    out: Some(summary_path(out)),
                    ..config.clone()
                };
                write_output(&json_config, &summary)?;
            }
            table
        }
        Command::Spectrum => spectrum(config)?,
        Command::Characters => characters(config)?,
        Command::DeltaC => delta_c(config)?,
        Command::ReturnProb => return_prob(config)?,
        Command::Moments => moments(config)?,
        Command::Verify => {
            let (table, ok) = verify(config)?;
            if !ok {
                status = 1;
            }
            table
        }
    };
    write_output(config, &table)?;
    Ok(status)
}

/// `out.csv` gets its summary at `out.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// Exit status for an error: usage 2, capacity 3, I/O 4, anything else 1.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Domain(_) => 2,
        Error::Capacity { .. } => 3,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        Error::Consistency(_) => 1,
    }
}

/// Caps the global worker pool from `SPLITMERGE_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("SPLITMERGE_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| Error::Usage(format!("SPLITMERGE_THREADS={value:?} is not a count")))?;
        // a pool may already exist when embedded in a larger program
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Parses `args`, runs, and reports errors on stderr; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = configure_threads()
        .and_then(|_| RunConfig::resolve(cli.command, cli.flags))
        .and_then(|config| run(&config));
    match outcome {
        Ok(status) => status,
        Err(e) => {
            eprintln!("splitmerge: {e}");
            exit_code(&e)
        }
    }
}
