use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rna_rainbow::asymptotics::{nb_limit_distribution, singular_constants};
use rna_rainbow::dist::{ExactDistribution, LimitDistribution};
use rna_rainbow::experiments::{self, CsvTable, ExperimentConfig};
use rna_rainbow::hpreal::HpReal;
use rna_rainbow::sampler::{sample_many, SpectrumStats};
use rna_rainbow::structures::{parse_dotbracket_document, DotBracketOptions};
use rna_rainbow::{Error, Execution, Params};

mod cache;

const EXIT_USAGE: u8 = 2;
const EXIT_COMPUTE: u8 = 3;
const EXIT_PARSE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rainbow",
    version,
    about = "Rainbow spectra of RNA secondary structures"
)]
struct Cli {
    /// Directory for cached count tables.
    #[arg(long, global = true, env = "RAINBOW_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of structures (or irreducible structures) of length n.
    Count(CountArgs),
    /// Exact or limiting distribution tables.
    Dist(DistArgs),
    /// Dominant singularity and limit-law constants as JSON.
    Asym(AsymArgs),
    /// Uniformly sampled structures in dot-bracket notation.
    Sample(SampleArgs),
    /// Rainbow spectra of structures read from a dot-bracket file.
    Spectrum(SpectrumArgs),
    /// Named experiment tables combining theory and simulation.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Minimum stack length.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    r: u32,
    /// Minimum arc length.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    lambda: u32,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params {
            r: self.r as usize,
            lambda: self.lambda as usize,
        }
    }
}

#[derive(Args, Clone)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, required_unless_present = "n_list")]
    n: Option<usize>,
    /// Comma-separated lengths; prints one row per length.
    #[arg(long, value_delimiter = ',', conflicts_with = "n")]
    n_list: Option<Vec<usize>>,
    /// Count irreducible structures instead.
    #[arg(long)]
    irreducible: bool,
    /// Only count structures whose rainbows all have length at most m.
    #[arg(long, conflicts_with = "irreducible")]
    m: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum DistTarget {
    /// Length of the longest rainbow.
    Longest,
    /// Number of rainbows of length k.
    Krainbow,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["exact", "limit"])))]
struct DistArgs {
    #[arg(value_enum)]
    target: DistTarget,
    #[command(flatten)]
    params: ParamArgs,
    /// Exact law at length n.
    #[arg(long)]
    exact: bool,
    /// Limit law as n grows; `longest` outcomes are k = n - Y_n.
    #[arg(long)]
    limit: bool,
    #[arg(long)]
    n: Option<usize>,
    /// Rainbow length for `krainbow`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Largest k listed by `longest --limit`.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    kmax: u64,
    /// Largest count listed by `krainbow --limit`.
    #[arg(long, default_value_t = 10)]
    bmax: usize,
    /// Decimal places in probability columns.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AsymArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Decimal places of the reported constants.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Rainbow lengths counted in the statistics file.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Dot-bracket output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample spectrum statistics as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Dot-bracket input file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Treat lines of nucleotide letters as sequences and skip them.
    #[arg(long)]
    skip_sequences: bool,
    /// Rainbow lengths counted per structure.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Emit the long-rainbow table P(Y >= n - k) for these k instead of
    /// per-structure rows, next to the uniform limit for --r/--lambda.
    #[arg(long, value_delimiter = ',')]
    tail_k: Option<Vec<usize>>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of fig4, fig6, fig9, fig12, table1-uniform.
    name: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    r: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    lambda: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
    #[command(flatten)]
    output: Output,
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Parse { .. }) => EXIT_PARSE,
            Some(Error::InvalidParams(_))
            | Some(Error::InvalidArgument(_))
            | Some(Error::OutOfHorizon { .. })
            | Some(Error::EnumerationCap { .. }) => EXIT_USAGE,
            _ => EXIT_COMPUTE,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache = cache::TableCache::new(cli.cache_dir.clone());
    let result = match cli.command {
        Command::Count(a) => cmd_count(&cache, a),
        Command::Dist(a) => cmd_dist(&cache, a),
        Command::Asym(a) => cmd_asym(a),
        Command::Sample(a) => cmd_sample(&cache, a),
        Command::Spectrum(a) => cmd_spectrum(&cache, a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .context("writing to standard output")?;
            Ok(())
        }
    }
}

fn cmd_count(cache: &cache::TableCache, a: CountArgs) -> CmdResult {
    let ns = match (&a.n_list, a.n) {
        (Some(list), _) => list.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => unreachable!("clap requires --n or --n-list"),
    };
    let horizon = ns.iter().copied().max().unwrap_or(0);
    let table = cache.load(a.params.params(), horizon)?;
    let mut values = Vec::with_capacity(ns.len());
    for &n in &ns {
        let v = if a.irreducible {
            table.count_irreducible(n)?.clone()
        } else if let Some(m) = a.m {
            table.bounded_count_at(m, n)?
        } else {
            table.count_structures(n)?.clone()
        };
        values.push((n, v));
    }
    let text = match (a.output.format, a.n_list.is_some()) {
        (Format::Json, _) => {
            let rows: Vec<_> = values
                .iter()
                .map(|(n, v)| serde_json::json!({ "n": n, "count": v.to_string() }))
                .collect();
            let doc = serde_json::json!({
                "r": a.params.r,
                "lambda": a.params.lambda,
                "irreducible": a.irreducible,
                "m": a.m,
                "counts": rows,
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )
        }
        (Format::Csv, false) => format!("{}\n", values[0].1),
        (Format::Csv, true) => {
            let mut s = String::from("n,count\n");
            for (n, v) in &values {
                s.push_str(&format!("{n},{v}\n"));
            }
            s
        }
    };
    emit(&a.output.out, &text)
}

fn exact_table(dist: &ExactDistribution, digits: u32, format: Format) -> String {
    let prec = digits + 10;
    let rows: Vec<[String; 5]> = dist
        .cumulative()
        .into_iter()
        .map(|(o, cum)| {
            let p = dist.prob(o);
            [
                o.to_string(),
                HpReal::from_rational(&p, prec).to_fixed_string(digits),
                HpReal::from_rational(&cum, prec).to_fixed_string(digits),
                p.numer().to_string(),
                p.denom().to_string(),
            ]
        })
        .collect();
    let header = [
        "outcome",
        "probability",
        "cumulative",
        "numerator",
        "denominator",
    ];
    render_rows(&header, rows.iter().map(|r| r.to_vec()), format)
}

fn limit_table(dist: &LimitDistribution, digits: u32, format: Format) -> String {
    let mut acc: Option<HpReal> = None;
    let rows: Vec<Vec<String>> = dist
        .iter()
        .map(|(o, p)| {
            let cum = match &acc {
                Some(a) => a.add(p),
                None => p.clone(),
            };
            acc = Some(cum.clone());
            vec![
                o.to_string(),
                p.to_fixed_string(digits),
                cum.to_fixed_string(digits),
            ]
        })
        .collect();
    render_rows(
        &["outcome", "probability", "cumulative"],
        rows.into_iter(),
        format,
    )
}

fn render_rows(header: &[&str], rows: impl Iterator<Item = Vec<String>>, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .map(|r| {
                    serde_json::Value::Object(
                        header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.to_string(), serde_json::Value::String(v)))
                            .collect(),
                    )
                })
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&objs).expect("serializable")
            )
        }
    }
}

fn cmd_dist(cache: &cache::TableCache, a: DistArgs) -> CmdResult {
    let params = a.params.params();
    let text = if a.exact {
        let Some(n) = a.n else {
            return Err(usage("--exact needs --n"));
        };
        let table = cache.load(params, n)?;
        let dist = match a.target {
            DistTarget::Longest => table.exact_longest_pmf(n)?,
            DistTarget::Krainbow => {
                let Some(k) = a.k else {
                    return Err(usage("krainbow needs --k"));
                };
                table.exact_k_rainbow_pmf(n, k as usize)?
            }
        };
        exact_table(&dist, a.digits, a.output.format)
    } else {
        if a.n.is_some() {
            eprintln!("warning: --n is ignored in limit mode");
        }
        let constants = singular_constants(&params, a.digits)?;
        let dist = match a.target {
            DistTarget::Longest => {
                let kmax = a.kmax as usize;
                let table = cache.load(params, kmax + 1)?;
                constants.limit_longest_distribution(&table, kmax)?
            }
            DistTarget::Krainbow => {
                let Some(k) = a.k else {
                    return Err(usage("krainbow needs --k"));
                };
                let k = k as usize;
                let table = cache.load(params, k + 1)?;
                let t = constants.nb_parameter(table.count_irreducible(k + 1)?, k)?;
                nb_limit_distribution(&t, a.bmax)
            }
        };
        limit_table(&dist, a.digits, a.output.format)
    };
    emit(&a.output.out, &text)
}

fn usage(msg: &str) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!(msg.to_string()),
    }
}

fn cmd_asym(a: AsymArgs) -> CmdResult {
    let constants = singular_constants(&a.params.params(), a.digits)?;
    emit(&a.out, &format!("{}\n", constants.to_json_pretty()))
}

fn cmd_sample(cache: &cache::TableCache, a: SampleArgs) -> CmdResult {
    let table = cache.load(a.params.params(), a.n)?;
    let structures = sample_many(&table, a.n, a.count as usize, a.seed, Execution::Parallel)?;
    let mut text = String::with_capacity(structures.len() * (a.n + 1));
    for s in &structures {
        text.push_str(&s.to_dotbracket());
        text.push('\n');
    }
    if let Some(path) = &a.stats {
        let stats = SpectrumStats::from_structures(a.n, &a.k, &structures);
        fs::write(path, stats.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&a.out, &text)
}

fn cmd_spectrum(cache: &cache::TableCache, a: SpectrumArgs) -> CmdResult {
    let text = fs::read_to_string(&a.input).map_err(|e| Failure {
        code: EXIT_PARSE,
        error: anyhow::Error::new(e).context(format!("reading {}", a.input.display())),
    })?;
    let options = DotBracketOptions {
        skip_sequence_lines: a.skip_sequences,
    };
    let parsed = parse_dotbracket_document(&text, options)
        .with_context(|| format!("parsing {}", a.input.display()))?;
    if parsed.is_empty() {
        return Err(Failure {
            code: EXIT_PARSE,
            error: anyhow::anyhow!("{} contains no structures", a.input.display()),
        });
    }

    let out = match &a.tail_k {
        Some(ks) => tail_table(cache, &a, ks, &parsed)?,
        None => {
            let mut header = vec![
                "line",
                "n",
                "longest",
                "second_longest",
                "third_longest",
                "n_rainbows",
                "external_unpaired",
                "five_three_distance",
                "rainbow_lengths",
            ]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
            header.extend(a.k.iter().map(|k| format!("x_{k}")));
            let rows = parsed.iter().map(|(line, s)| {
                let sp = s.rainbow_spectrum();
                let lengths: Vec<String> =
                    sp.rainbow_lengths.iter().map(|l| l.to_string()).collect();
                let mut row = vec![
                    line.to_string(),
                    s.len().to_string(),
                    sp.nth_longest(1).to_string(),
                    sp.nth_longest(2).to_string(),
                    sp.nth_longest(3).to_string(),
                    sp.rainbow_count().to_string(),
                    sp.external_unpaired.to_string(),
                    sp.five_prime_three_prime_distance().to_string(),
                    lengths.join(";"),
                ];
                row.extend(a.k.iter().map(|&k| sp.count_of_length(k).to_string()));
                row
            });
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            render_rows(&header, rows, a.output.format)
        }
    };
    emit(&a.output.out, &out)
}

/// Empirical `P(Y >= n - k)` over the input structures next to the uniform
/// limit for the requested parameters.
fn tail_table(
    cache: &cache::TableCache,
    a: &SpectrumArgs,
    ks: &[usize],
    parsed: &[(usize, rna_rainbow::SecondaryStructure)],
) -> Result<String, Failure> {
    if ks.contains(&0) {
        return Err(usage("--tail-k values must be >= 1"));
    }
    let params = a.params.params();
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let table = cache.load(params, kmax + 1)?;
    let constants = singular_constants(&params, 12)?;
    let limit = constants.limit_longest_cdf_many(&table, ks)?;
    let total = parsed.len() as f64;
    let rows = ks.iter().zip(limit).map(|(&k, lim)| {
        let hits = parsed
            .iter()
            .filter(|(_, s)| s.rainbow_spectrum().longest() + k >= s.len())
            .count();
        vec![
            k.to_string(),
            format!("{:.6}", hits as f64 / total),
            lim.to_fixed_string(6),
            parsed.len().to_string(),
        ]
    });
    Ok(render_rows(
        &["k", "empirical", "uniform_limit", "structures"],
        rows,
        a.output.format,
    ))
}

fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    if !experiments::EXPERIMENTS.contains(&a.name.as_str()) {
        return Err(usage(&format!(
            "unknown experiment '{}'; available: {}",
            a.name,
            experiments::EXPERIMENTS.join(", ")
        )));
    }
    let params = match (a.r, a.lambda) {
        (None, None) => None,
        (r, lambda) => {
            if r.is_none() || lambda.is_none() {
                return Err(usage("give both --r and --lambda, or neither"));
            }
            Some(Params::new(r.unwrap() as usize, lambda.unwrap() as usize)?)
        }
    };
    let config = ExperimentConfig {
        params,
        n: a.n,
        n_list: a.n_list,
        k_list: a.k,
        kmax: a.kmax,
        count: a.count,
        seed: a.seed,
        digits: a.digits,
        exec: Execution::Parallel,
    };
    let table = experiments::run(&a.name, &config)?;
    emit(&a.output.out, &render_experiment(&table, a.output.format))
}

fn render_experiment(table: &CsvTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let doc = serde_json::json!({
                "schema": table.name,
                "version": table.version,
                "columns": table.header,
                "rows": table.rows,
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )
        }
    }
}
