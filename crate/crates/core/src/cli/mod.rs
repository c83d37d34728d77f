//! The `finpop` command line.
//!
//! Every random quantity derives from one master seed: the simulated
//! population uses `derive_seed(seed, 1)`, the variance simulation for
//! sample size `n` uses `derive_seed(derive_seed(seed, 2), n)` and the
//! distribution simulation uses `derive_seed(derive_seed(seed, 3), n)`.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

pub use config::{
    parse_weights, read_config_file, Cli, Command, Options, OutputFormat, PopulationSource, RunConfig,
    SigmaChoice, WeightsSpec, DEFAULT_QUANTILES, DEFAULT_SEED,
};

use crate::edgeworth::{
    charfn_sup, linear_moments, normal_cdf, normal_quantile, sigma_tilde, write_cdf_grid, EdgeworthModel,
    SigmaMode, DEFAULT_SIGMA_REPLICATES,
};
use crate::error::{Error, Result};
use crate::kernels::{expected_l, write_g1_csv, write_g2_csv, KernelSet};
use crate::montecarlo::{simulate_cdf, simulate_statistic, write_quantile_csv, write_realizations, SimulationPlan};
use crate::population::Population;
use crate::rng::derive_seed;
use crate::weights::WeightScheme;

const TAG_POPULATION: u64 = 1;
const TAG_SIGMA: u64 = 2;
const TAG_SIMULATION: u64 = 3;

pub fn population_seed(master: u64) -> u64 {
    derive_seed(master, TAG_POPULATION)
}

pub fn sigma_seed(master: u64, n: usize) -> u64 {
    derive_seed(derive_seed(master, TAG_SIGMA), n as u64)
}

pub fn simulation_seed(master: u64, n: usize) -> u64 {
    derive_seed(derive_seed(master, TAG_SIMULATION), n as u64)
}

/// Process exit code for an error: 2 for input problems, 3 for numeric
/// domain failures, 4 for capacity guards.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Invalid(_) | Error::Io(_) => 2,
        Error::Domain(_) | Error::Degenerate(_) => 3,
        Error::Capacity(_) => 4,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = RunConfig::resolve(&cli.options).and_then(|cfg| run(cli.command, &cfg));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("finpop: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a command on a worker pool of the configured size.
pub fn run(command: Command, cfg: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Invalid(format!("cannot start workers: {e}")))?;
    pool.install(|| {
        let mut sink = Sink::new(cfg)?;
        match command {
            Command::Kernels => kernels(cfg, &mut sink),
            Command::Edgeworth => edgeworth(cfg, &mut sink),
            Command::Simulate => simulate(cfg, &mut sink),
            Command::Table1 => table1(cfg, &mut sink),
            Command::Diagnose => diagnose(cfg, &mut sink),
        }
    })
}

/// Named outputs go to files under `--out`, or to standard output.
struct Sink {
    dir: Option<std::path::PathBuf>,
}

impl Sink {
    fn new(cfg: &RunConfig) -> Result<Self> {
        if let Some(dir) = &cfg.out {
            fs::create_dir_all(dir)?;
        }
        Ok(Self { dir: cfg.out.clone() })
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        match &self.dir {
            Some(dir) => fs::write(dir.join(name), bytes)?,
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

fn load_population(cfg: &RunConfig) -> Result<Population> {
    match &cfg.population {
        PopulationSource::File(path) => Population::load(path),
        PopulationSource::Logistic { size } => Population::simulate_logistic(*size, population_seed(cfg.seed)),
    }
}

/// One weight scheme per requested sample size.
fn weight_schemes(cfg: &RunConfig, explicit_n: bool) -> Result<Vec<WeightScheme>> {
    match &cfg.weights {
        WeightsSpec::Score(kind) => {
            cfg.sample_sizes.iter().map(|&n| WeightScheme::from_score(kind.clone(), n)).collect()
        }
        WeightsSpec::File(path) => {
            let w = WeightScheme::from_reader(fs::File::open(path)?)?;
            if explicit_n && cfg.sample_sizes != [w.n()] && cfg.sample_sizes != config::DEFAULT_SAMPLE_SIZES {
                return Err(Error::Invalid(format!(
                    "weights file fixes n = {}, but sample sizes {:?} were requested",
                    w.n(),
                    cfg.sample_sizes
                )));
            }
            Ok(vec![w])
        }
    }
}

fn sigma_mode(cfg: &RunConfig, size: usize, n: usize) -> SigmaMode {
    let seed = sigma_seed(cfg.seed, n);
    match cfg.sigma_mode {
        Some(SigmaChoice::Exact) => SigmaMode::Exact,
        Some(SigmaChoice::Mc) => SigmaMode::MonteCarlo { replicates: DEFAULT_SIGMA_REPLICATES.min(cfg.replicates.max(10_000)), seed },
        Some(SigmaChoice::Linear) => SigmaMode::Linear,
        None => match SigmaMode::auto(size, n, seed) {
            SigmaMode::MonteCarlo { seed, .. } => SigmaMode::MonteCarlo {
                replicates: DEFAULT_SIGMA_REPLICATES.min(cfg.replicates.max(10_000)),
                seed,
            },
            other => other,
        },
    }
}

/// Fixed three-decimal rendering without a negative zero.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn kernels(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let pop = load_population(cfg)?;
    for w in weight_schemes(cfg, true)? {
        let n = w.n();
        let set = KernelSet::new(&pop, &w)?;
        let mut g1 = Vec::new();
        match cfg.format {
            OutputFormat::Csv => write_g1_csv(&mut g1, set.g1())?,
            OutputFormat::Text => {
                writeln!(g1, "{:>6} {:>10}", "k", "g1")?;
                for (k, v) in set.g1().iter().enumerate() {
                    writeln!(g1, "{:>6} {:>10}", k + 1, fmt3(*v))?;
                }
            }
        }
        sink.emit(&format!("g1_n{n}.{}", extension(cfg)), &g1)?;
        if set.has_g2() {
            let table = set.g2_table()?;
            let mut g2 = Vec::new();
            match cfg.format {
                OutputFormat::Csv => write_g2_csv(&mut g2, &table)?,
                OutputFormat::Text => {
                    writeln!(g2, "{:>6} {:>6} {:>10}", "k", "l", "g2")?;
                    for (k, l, v) in table.iter() {
                        writeln!(g2, "{:>6} {:>6} {:>10}", k + 1, l + 1, fmt3(v))?;
                    }
                }
            }
            sink.emit(&format!("g2_n{n}.{}", extension(cfg)), &g2)?;
        }
    }
    Ok(())
}

fn extension(cfg: &RunConfig) -> &'static str {
    match cfg.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Text => "txt",
    }
}

fn grid_points(cfg: &RunConfig) -> Vec<f64> {
    let (lo, hi, step) = cfg.grid;
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|j| lo + j as f64 * step).collect()
}

fn edgeworth(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let pop = load_population(cfg)?;
    for w in weight_schemes(cfg, true)? {
        let n = w.n();
        let model = EdgeworthModel::build(&pop, &w, sigma_mode(cfg, pop.len(), n))?;
        sink.emit(&format!("edgeworth_n{n}.txt"), model.to_report().as_bytes())?;
        let mut grid = Vec::new();
        match cfg.format {
            OutputFormat::Csv => write_cdf_grid(&mut grid, &model.expansion(), &grid_points(cfg))?,
            OutputFormat::Text => {
                writeln!(grid, "{:>8} {:>8} {:>8}", "x", "Phi", "G")?;
                for x in grid_points(cfg) {
                    writeln!(grid, "{:>8} {:>8} {:>8}", fmt3(x), fmt3(normal_cdf(x)), fmt3(model.cdf(x)))?;
                }
            }
        }
        sink.emit(&format!("cdf_n{n}.{}", extension(cfg)), &grid)?;
    }
    Ok(())
}

/// `E L_n` and `σ̃_n` for the simulation commands.
fn normalization(cfg: &RunConfig, pop: &Population, w: &WeightScheme) -> Result<(f64, f64)> {
    let mean_l = expected_l(pop, w)?;
    let mode = sigma_mode(cfg, pop.len(), w.n());
    let sigma1 = match mode {
        SigmaMode::Linear => linear_moments(KernelSet::new(pop, w)?.g1())?.0,
        _ => 0.0,
    };
    let est = sigma_tilde(pop, w, mode, mean_l, sigma1)?;
    if !(est.variance > 0.0) {
        return Err(Error::Degenerate("Var S_n = 0: the statistic is constant over samples".into()));
    }
    Ok((mean_l, est.sigma()))
}

fn simulate(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let pop = load_population(cfg)?;
    let mut rows = Vec::new();
    for w in weight_schemes(cfg, true)? {
        let n = w.n();
        let (mean_l, sigma) = normalization(cfg, &pop, &w)?;
        let plan = SimulationPlan { replicates: cfg.replicates, seed: simulation_seed(cfg.seed, n), mean_l, sigma_tilde: sigma };
        let ecdf = simulate_cdf(&pop, &w, &plan)?;
        rows.extend(cfg.quantiles.iter().map(|&q| (n, q, ecdf.quantile(q))));
        if cfg.dump {
            let dir = cfg.out.as_ref().ok_or_else(|| Error::Invalid("--dump needs --out".into()))?;
            let raw = simulate_statistic(&pop, &w, cfg.replicates, plan.seed)?;
            write_realizations(&dir.join(format!("realizations_n{n}.bin")), &raw, plan.seed)?;
        }
    }
    let mut buf = Vec::new();
    match cfg.format {
        OutputFormat::Csv => write_quantile_csv(&mut buf, &rows)?,
        OutputFormat::Text => {
            writeln!(buf, "{:>6} {:>8} {:>8}", "n", "q", "value")?;
            for (n, q, v) in &rows {
                writeln!(buf, "{n:>6} {q:>8} {:>8}", fmt3(*v))?;
            }
        }
    }
    sink.emit(&format!("quantiles.{}", extension(cfg)), &buf)
}

/// Quantile rows of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub quantiles: Vec<f64>,
    /// `(n, empirical quantiles, Edgeworth quantiles, model)` per sample size.
    pub rows: Vec<(usize, Vec<f64>, Vec<f64>, EdgeworthModel)>,
    pub normal: Vec<f64>,
}

impl Table1 {
    pub fn compute(cfg: &RunConfig) -> Result<Self> {
        let normal = cfg.quantiles.iter().map(|&q| normal_quantile(q)).collect();
        let pop = load_population(cfg)?;
        let mut rows = Vec::new();
        for w in weight_schemes(cfg, true)? {
            let n = w.n();
            let model = EdgeworthModel::build(&pop, &w, sigma_mode(cfg, pop.len(), n))?;
            let plan = SimulationPlan {
                replicates: cfg.replicates,
                seed: simulation_seed(cfg.seed, n),
                mean_l: model.mean_l,
                sigma_tilde: model.sigma_tilde(),
            };
            let ecdf = simulate_cdf(&pop, &w, &plan)?;
            let empirical = cfg.quantiles.iter().map(|&q| ecdf.quantile(q)).collect();
            let edgeworth = cfg.quantiles.iter().map(|&q| model.quantile(q)).collect::<Result<_>>()?;
            rows.push((n, empirical, edgeworth, model));
        }
        Ok(Self { quantiles: cfg.quantiles.clone(), rows, normal })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,n");
        for q in &self.quantiles {
            let _ = write!(s, ",{q}");
        }
        s.push('\n');
        let mut line = |label: &str, n: String, values: &[f64]| {
            let _ = write!(s, "{label},{n}");
            for v in values {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        };
        for (n, emp, edg, _) in &self.rows {
            line("empirical", n.to_string(), emp);
            line("edgeworth", n.to_string(), edg);
        }
        line("normal", String::new(), &self.normal);
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<16}", "q =");
        for q in &self.quantiles {
            let _ = write!(s, "{q:>8}");
        }
        s.push('\n');
        let mut line = |label: String, values: &[f64]| {
            let _ = write!(s, "{label:<16}");
            for v in values {
                let _ = write!(s, "{:>8}", fmt3(*v));
            }
            s.push('\n');
        };
        for (n, emp, edg, _) in &self.rows {
            line(format!("F~_{n}^-1(q)"), emp);
            line(format!("G_{n}^-1(q)"), edg);
        }
        line("Phi^-1(q)".into(), &self.normal);
        s
    }

    /// Expansion parameters behind each row as CSV.
    pub fn parameters_csv(&self) -> String {
        let mut s = String::from("n,mean_l,sigma1,alpha,kappa,tau,e_coeff,sigma_tilde,sigma_mode,sigma_std_error\n");
        for (n, _, _, m) in &self.rows {
            let _ = writeln!(
                s,
                "{n},{},{},{},{},{},{},{},{},{}",
                m.mean_l,
                m.sigma1,
                m.alpha,
                m.kappa,
                m.tau,
                m.e_coeff,
                m.sigma_tilde(),
                m.sigma.mode.name(),
                m.sigma.std_error
            );
        }
        s
    }
}

fn table1(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let table = Table1::compute(cfg)?;
    match cfg.format {
        OutputFormat::Csv => sink.emit("table1.csv", table.to_csv().as_bytes())?,
        OutputFormat::Text => sink.emit("table1.txt", table.to_text().as_bytes())?,
    }
    if cfg.out.is_some() {
        sink.emit("table1_parameters.csv", table.parameters_csv().as_bytes())?;
    }
    Ok(())
}

fn diagnose(cfg: &RunConfig, sink: &mut Sink) -> Result<()> {
    let pop = load_population(cfg)?;
    let mut s = String::from("n,a,b,c,d,sigma1,tau,sup_eps_b,sup_eps_tau\n");
    for w in weight_schemes(cfg, true)? {
        let n = w.n();
        let smooth = w.smoothness_constants();
        let set = KernelSet::new(&pop, &w)?;
        let (sigma1, _) = linear_moments(set.g1())?;
        let size = pop.len() as f64;
        let p = n as f64 / size;
        let tau = (size * p * (1.0 - p)).sqrt();
        let sup_b = charfn_sup(set.g1(), sigma1, (cfg.epsilon, cfg.band_limit), cfg.grid_step)?;
        let sup_tau = if tau > cfg.epsilon {
            charfn_sup(set.g1(), sigma1, (cfg.epsilon, tau), cfg.grid_step)?
        } else {
            f64::NAN
        };
        let _ = writeln!(
            s,
            "{n},{},{},{},{},{sigma1},{tau},{sup_b},{sup_tau}",
            smooth.a, smooth.b, smooth.c, smooth.d
        );
    }
    sink.emit("diagnose.csv", s.as_bytes())
}
