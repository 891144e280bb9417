mod figures;
mod manifest;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scs_core::analytic::{
    build_lookup_table, k_constant, lookup, tail_ci, tail_ci_closed, tail_cin, FewBsParams, LookupTable, Method,
    TailCurve,
};
use scs_core::montecarlo::{empirical_tail_ci, empirical_tail_cin};
use scs_core::network::{
    canonicalize, reduce, sigma_db_to_natural, Dimension, FadingSpec, NetworkSpec, PowerPmf,
};

use manifest::{sha256_hex, Recorder};

const VALID_PAIRS: &str = "valid --metric/--method pairs:\n  \
    ci  exact\n  \
    ci  closed   (every eta >= 1)\n  \
    ci  fewbs    (one tier, constant power, no sectoring, no fading)\n  \
    ci  mc\n  \
    cin exact\n  \
    cin mc\n  \
    cin lookup   (needs --table)";

/// Signal-quality tails of Poisson cellular networks.
#[derive(Debug, Parser)]
#[command(name = "scs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a network to its canonical system and print the chain.
    Reduce {
        #[command(flatten)]
        spec: SpecArgs,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Tail probabilities of C/I or C/(I+N) on a threshold grid.
    Tail(TailArgs),
    /// Build a lookup table of P(C/(I+N) > eta).
    Table(TableArgs),
    /// Read tail probabilities for a network from a lookup table.
    Lookup {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        etas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data series of the standard figures.
    Figures(FiguresArgs),
}

/// A spec file plus optional dB-scale overrides.
#[derive(Debug, Args)]
struct SpecArgs {
    /// Network spec (JSON).
    spec: PathBuf,
    /// Log-normal shadowing standard deviation in dB; replaces the spec's fading.
    #[arg(long, allow_negative_numbers = true)]
    sigma_db: Option<f64>,
    /// Per-tier transmit powers in dBm, comma separated, one per tier.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    power_dbm: Vec<f64>,
    /// Noise power in dBm; replaces the spec's noise.
    #[arg(long, allow_negative_numbers = true)]
    noise_dbm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Ci,
    Cin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TailMethod {
    Exact,
    Closed,
    Fewbs,
    Mc,
    Lookup,
}

#[derive(Debug, Args)]
struct TailArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum)]
    metric: Metric,
    #[arg(long, value_enum)]
    method: TailMethod,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    etas: Vec<f64>,
    /// Monte Carlo realizations.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lookup table for `--method lookup`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, default_value_t = 2)]
    l: u8,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    nprimes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    All,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    #[arg(long, value_enum)]
    which: Figure,
    #[arg(long)]
    out_dir: PathBuf,
    /// Realizations per simulated curve (fig1).
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Bad flag combination; exits with status 2 like a clap error.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

struct LoadedSpec {
    spec: NetworkSpec,
    digest: String,
}

impl SpecArgs {
    fn load(&self) -> Result<LoadedSpec> {
        let bytes = fs::read(&self.spec).with_context(|| format!("reading {}", self.spec.display()))?;
        let text = String::from_utf8(bytes.clone())
            .with_context(|| format!("{} is not UTF-8", self.spec.display()))?;
        let mut spec = NetworkSpec::from_json(&text)
            .with_context(|| format!("invalid network spec {}", self.spec.display()))?;
        if let Some(s) = self.sigma_db {
            spec.fading = FadingSpec::LogNormal {
                sigma: sigma_db_to_natural(s),
            };
        }
        if !self.power_dbm.is_empty() {
            if self.power_dbm.len() != spec.tiers.len() {
                return Err(usage(format!(
                    "--power-dbm has {} values but the spec has {} tiers",
                    self.power_dbm.len(),
                    spec.tiers.len()
                )));
            }
            for (t, &p) in spec.tiers.iter_mut().zip(&self.power_dbm) {
                t.power = dbm_to_linear(p);
            }
        }
        if let Some(n) = self.noise_dbm {
            spec.noise = dbm_to_linear(n);
        }
        spec.validate()
            .with_context(|| format!("invalid network spec {} after dB overrides", self.spec.display()))?;
        Ok(LoadedSpec {
            spec,
            digest: sha256_hex(&bytes),
        })
    }
}

/// Writes to `out` with a manifest, or to stdout without one.
fn emit(rec: &mut Recorder, out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => rec.write(path, content),
        None => {
            io::stdout().lock().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct ReduceReport<'a> {
    l: u8,
    epsilon: f64,
    a: f64,
    total_density: f64,
    pmf: &'a PowerPmf,
    power_moment: f64,
    fading_moment: f64,
    effective_density: f64,
    noise: f64,
    nprime: f64,
    /// `N′` of the first tier on its own, for multi-tier specs.
    first_tier_nprime: Option<f64>,
    /// `N′ / N′(first tier alone)`.
    noise_ratio: Option<f64>,
}

fn cmd_reduce(args: &SpecArgs, json: bool) -> Result<()> {
    let loaded = args.load()?;
    let spec = &loaded.spec;
    let r = reduce(spec)?;
    let first = if spec.tiers.len() > 1 {
        let mut alone = spec.clone();
        alone.tiers.truncate(1);
        Some(canonicalize(&alone)?.nprime)
    } else {
        None
    };
    let report = ReduceReport {
        l: spec.dim.l(),
        epsilon: spec.epsilon,
        a: r.canonical.a,
        total_density: r.total_density,
        pmf: &r.pmf,
        power_moment: r.power_moment,
        fading_moment: r.fading_moment,
        effective_density: r.effective_density,
        noise: spec.noise,
        nprime: r.canonical.nprime,
        first_tier_nprime: first,
        noise_ratio: first.filter(|&n1| n1 > 0.0).map(|n1| r.canonical.nprime / n1),
    };
    let mut out = io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    let mut rows = vec![
        ("l", report.l.to_string()),
        ("epsilon", report.epsilon.to_string()),
        ("a = l/epsilon", report.a.to_string()),
        ("total density", report.total_density.to_string()),
        ("E[K^a]", report.power_moment.to_string()),
        ("E[Psi^a]", report.fading_moment.to_string()),
        ("lambda_eff", report.effective_density.to_string()),
        ("noise N", report.noise.to_string()),
        ("N'", report.nprime.to_string()),
    ];
    if let Some(n1) = report.first_tier_nprime {
        rows.push(("N' (tier 0 alone)", n1.to_string()));
    }
    if let Some(q) = report.noise_ratio {
        rows.push(("N' / N' (tier 0 alone)", q.to_string()));
    }
    for (name, value) in rows {
        writeln!(out, "{name:<24}{value}")?;
    }
    Ok(())
}

fn closed_form_setting(spec: &NetworkSpec) -> bool {
    spec.tiers.len() == 1 && spec.tiers[0].sector.is_none() && spec.fading == FadingSpec::None
}

fn cmd_tail(args: &TailArgs) -> Result<()> {
    let mut rec = Recorder::start();
    let loaded = args.spec.load()?;
    let spec = &loaded.spec;
    rec.spec_digest = Some(loaded.digest.clone());
    rec.grid("etas", &args.etas);
    let canon = canonicalize(spec)?;
    let ratio = canon.ratio();
    let etas = &args.etas;

    let csv = match (args.metric, args.method) {
        (Metric::Ci, TailMethod::Exact) => {
            let mut meta = canon;
            meta.nprime = 0.0;
            TailCurve::evaluate(etas, Method::ExactInversion, meta, |e| tail_ci(ratio, e))?.to_csv()
        }
        (Metric::Ci, TailMethod::Closed) => {
            if let Some(e) = etas.iter().find(|&&e| !(e >= 1.0)) {
                return Err(usage(format!(
                    "--method closed needs every eta >= 1 (got {e})\n{VALID_PAIRS}"
                )));
            }
            let k = k_constant(ratio)?;
            let mut meta = canon;
            meta.nprime = 0.0;
            TailCurve::evaluate(etas, Method::ClosedForm, meta, |e| tail_ci_closed(ratio, e, k))?.to_csv()
        }
        (Metric::Ci, TailMethod::Fewbs) => {
            if !closed_form_setting(spec) {
                return Err(usage(format!(
                    "--method fewbs needs one tier with no sectoring and no fading\n{VALID_PAIRS}"
                )));
            }
            let params = FewBsParams::new(ratio)?;
            let mut meta = canon;
            meta.nprime = 0.0;
            TailCurve::evaluate(etas, Method::FewBs, meta, |e| params.tail(e))?.to_csv()
        }
        (Metric::Ci, TailMethod::Mc) => {
            rec.seed = Some(args.seed);
            empirical_tail_ci(spec, etas, args.n, args.seed)?.to_csv()
        }
        (Metric::Cin, TailMethod::Exact) => {
            TailCurve::evaluate(etas, Method::ExactInversion, canon, |e| tail_cin(&canon, e))?.to_csv()
        }
        (Metric::Cin, TailMethod::Mc) => {
            rec.seed = Some(args.seed);
            empirical_tail_cin(spec, etas, args.n, args.seed)?.to_csv()
        }
        (Metric::Cin, TailMethod::Lookup) => {
            let Some(path) = &args.table else {
                return Err(usage(format!("--method lookup needs --table\n{VALID_PAIRS}")));
            };
            let table = read_table(path)?;
            TailCurve::evaluate(etas, Method::Lookup, canon, |e| lookup(&table, spec, e))?.to_csv()
        }
        (metric, method) => {
            return Err(usage(format!(
                "--metric {} does not support --method {}\n{VALID_PAIRS}",
                metric.to_possible_value().expect("plain variant").get_name(),
                method.to_possible_value().expect("plain variant").get_name(),
            )));
        }
    };
    emit(&mut rec, args.out.as_deref(), &csv)
}

fn read_table(path: &Path) -> Result<LookupTable> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    LookupTable::read_csv(io::BufReader::new(file)).with_context(|| format!("reading table {}", path.display()))
}

fn cmd_table(args: &TableArgs) -> Result<()> {
    let mut rec = Recorder::start();
    let dim = Dimension::new(args.l)?;
    let (default_eps, default_np, default_etas) = LookupTable::default_grids();
    let epsilons = args.epsilons.clone().unwrap_or(default_eps);
    let nprimes = args.nprimes.clone().unwrap_or(default_np);
    let etas = args.etas.clone().unwrap_or(default_etas);
    rec.grid("l", &[dim.as_f64()]);
    rec.grid("epsilons", &epsilons);
    rec.grid("nprimes", &nprimes);
    rec.grid("etas", &etas);
    let table = build_lookup_table(dim, &epsilons, &nprimes, &etas)?;
    emit(&mut rec, args.out.as_deref(), &table.to_csv_string())
}

fn cmd_lookup(args: &SpecArgs, table_path: &Path, etas: &[f64], out: Option<&Path>) -> Result<()> {
    let mut rec = Recorder::start();
    let loaded = args.load()?;
    rec.spec_digest = Some(loaded.digest.clone());
    rec.grid("etas", etas);
    let table = read_table(table_path)?;
    let canon = canonicalize(&loaded.spec)?;
    let curve = TailCurve::evaluate(etas, Method::Lookup, canon, |e| lookup(&table, &loaded.spec, e))?;
    emit(&mut rec, out, &curve.to_csv())
}

fn cmd_figures(args: &FiguresArgs) -> Result<()> {
    let which: &[Figure] = match args.which {
        Figure::All => &[Figure::Fig1, Figure::Fig2, Figure::Fig3],
        ref one => std::slice::from_ref(one),
    };
    for &fig in which {
        let mut rec = Recorder::start();
        let (name, csv) = match fig {
            Figure::Fig1 => {
                rec.seed = Some(args.seed);
                rec.grid("l", &[1.0, 2.0, 3.0]);
                rec.grid("densities", &figures::FIG1_DENSITIES);
                rec.grid("etas", &figures::fig1_etas());
                ("fig1.csv", figures::fig1(args.n, args.seed)?)
            }
            Figure::Fig2 => {
                rec.grid("etas", &figures::fig2_etas());
                ("fig2.csv", figures::fig2()?)
            }
            Figure::Fig3 => {
                rec.grid("epsilons", &figures::FIG3_EPSILONS);
                rec.grid("nprimes", &figures::fig3_nprimes());
                ("fig3.csv", figures::fig3()?)
            }
            Figure::All => unreachable!("expanded above"),
        };
        rec.write(&args.out_dir.join(name), &csv)?;
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("SCS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| usage(format!("SCS_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Reduce { spec, json } => cmd_reduce(spec, *json),
        Command::Tail(args) => cmd_tail(args),
        Command::Table(args) => cmd_table(args),
        Command::Lookup { spec, table, etas, out } => cmd_lookup(spec, table, etas, out.as_deref()),
        Command::Figures(args) => cmd_figures(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
