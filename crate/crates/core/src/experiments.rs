//! Named experiments that put theoretical curves next to Monte Carlo
//! estimates in one CSV table each.
//!
//! | name | default params | columns |
//! |------|----------------|---------|
//! | `fig4` | r=1, λ=1, n=100..400 | longest rainbow: leading-order, exact and sampled mean/sd |
//! | `fig6` | r=1, λ=1, n=400 | `P(Y_n = n-k)`: limit, exact, sampled, standard error |
//! | `fig9` | r=1, λ=1, n=100..400 | second and third longest rainbow: exact and sampled, against `alpha sqrt(n)` |
//! | `fig12` | r=4, λ=4, n=1000 | expected number of rainbows of length k: limit vs sampled |
//! | `table1-uniform` | r=4, λ=4, k=100..500 | limit `P(Y_n >= n-k)` |

use num_bigint::BigUint;

use crate::asymptotics::{singular_constants, AsymptoticConstants, DEFAULT_DIGITS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hpreal::HpReal;
use crate::params::Params;
use crate::sampler::{sample_batch, MeanSd};
use crate::series::CountTable;

pub const EXPERIMENTS: &[&str] = &["fig4", "fig6", "fig9", "fig12", "table1-uniform"];

/// Schema version written into every experiment table.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_SAMPLES: usize = 10_000;

/// Inputs shared by all experiments. `None` fields fall back to the
/// experiment's own defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: Option<Params>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub k_list: Option<Vec<usize>>,
    pub kmax: Option<usize>,
    pub count: Option<usize>,
    pub seed: u64,
    pub digits: u32,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: None,
            n: None,
            n_list: None,
            k_list: None,
            kmax: None,
            count: None,
            seed: 1,
            digits: DEFAULT_DIGITS,
            exec: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    fn params_or(&self, r: usize, lambda: usize) -> Params {
        self.params.unwrap_or(Params { r, lambda })
    }

    fn n_list_or(&self, default: &[usize]) -> Vec<usize> {
        match (&self.n_list, self.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => default.to_vec(),
        }
    }

    fn count(&self) -> usize {
        self.count.unwrap_or(DEFAULT_SAMPLES)
    }
}

/// A named CSV table. The first line of [`CsvTable::to_csv`] is a
/// `# schema: <name> v<version>` comment, followed by the header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub version: u32,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(name: &str, header: &[&str]) -> Self {
        CsvTable {
            name: name.to_string(),
            version: SCHEMA_VERSION,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|v| v.parse().ok())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: {} v{}\n", self.name, self.version);
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.10}")
}

fn hp(x: &HpReal) -> String {
    x.to_fixed_string(10)
}

fn setup(params: Params, horizon: usize, digits: u32) -> Result<(CountTable, AsymptoticConstants)> {
    let table = CountTable::build(params, horizon)?;
    let constants = singular_constants(&params, digits)?;
    Ok((table, constants))
}

pub fn run(name: &str, config: &ExperimentConfig) -> Result<CsvTable> {
    match name {
        "fig4" => fig4(config),
        "fig6" => fig6(config),
        "fig9" => fig9(config),
        "fig12" => fig12(config),
        "table1-uniform" => table1_uniform(config),
        other => Err(Error::InvalidArgument(format!(
            "unknown experiment '{other}'; available: {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

/// Longest rainbow across `n`: leading-order `n - alpha sqrt(n)` and
/// `sqrt(beta n^(3/2))`, the exact mean and sd, and the sample mean and sd.
pub fn fig4(config: &ExperimentConfig) -> Result<CsvTable> {
    let params = config.params_or(1, 1);
    let ns = config.n_list_or(&[100, 200, 300, 400]);
    let horizon = ns.iter().copied().max().unwrap_or(1);
    let (table, constants) = setup(params, horizon, config.digits)?;
    let count = config.count();
    let mut out = CsvTable::new(
        "fig4",
        &[
            "n",
            "theory_mean",
            "theory_sd",
            "exact_mean",
            "exact_sd",
            "sample_mean",
            "sample_sd",
            "sample_stderr",
        ],
    );
    for &n in &ns {
        let (mean, var) = constants.leading_moments(n)?;
        let exact = table.exact_longest_pmf_with(n, config.exec)?;
        let exact_mean = HpReal::from_rational(&exact.mean(), 40).to_f64();
        let exact_sd = HpReal::from_rational(&exact.variance(), 40).to_f64().sqrt();
        let stats = sample_batch(&table, n, count, &[], config.seed, config.exec)?;
        let longest = stats.summary().longest;
        out.push(vec![
            n.to_string(),
            hp(&mean),
            hp(&var.sqrt()),
            fmt(exact_mean),
            fmt(exact_sd),
            fmt(longest.mean),
            fmt(longest.stddev),
            fmt(longest.std_error(count)),
        ]);
    }
    Ok(out)
}

/// `P(Y_n = n - k)` for `k = 1..=kmax`: limit law, exact value at `n`, and
/// the sampled frequency with its binomial standard error.
pub fn fig6(config: &ExperimentConfig) -> Result<CsvTable> {
    let params = config.params_or(1, 1);
    let n = config.n.unwrap_or(400);
    let kmax = config.kmax.unwrap_or(20);
    if kmax == 0 || kmax >= n {
        return Err(Error::InvalidArgument(format!("kmax must be in 1..{n}")));
    }
    let (table, constants) = setup(params, n.max(kmax + 1), config.digits)?;
    let count = config.count();
    let limit = constants.limit_longest_distribution(&table, kmax)?;
    let exact = table.exact_longest_pmf_with(n, config.exec)?;
    let stats = sample_batch(&table, n, count, &[], config.seed, config.exec)?;
    let freq = stats.longest_gap_frequencies(kmax);
    let mut out = CsvTable::new(
        "fig6",
        &["k", "limit", "exact", "empirical", "std_error", "z_score"],
    );
    for k in 1..=kmax {
        let p_limit = limit.outcomes[&k].to_f64();
        let p_exact = HpReal::from_rational(&exact.prob(n - k), 40).to_f64();
        let se = (p_limit * (1.0 - p_limit) / count as f64).sqrt();
        let z = if se > 0.0 {
            (freq[k - 1] - p_limit) / se
        } else {
            0.0
        };
        out.push(vec![
            k.to_string(),
            fmt(p_limit),
            fmt(p_exact),
            fmt(freq[k - 1]),
            fmt(se),
            format!("{z:.4}"),
        ]);
    }
    Ok(out)
}

/// Second and third longest rainbows, and the combined length of the two
/// longest, compared with `alpha sqrt(n)`. The exact second-longest mean is
/// included because the ratio to `alpha sqrt(n)` converges slowly.
pub fn fig9(config: &ExperimentConfig) -> Result<CsvTable> {
    let params = config.params_or(1, 1);
    let ns = config.n_list_or(&[100, 200, 300, 400]);
    let horizon = ns.iter().copied().max().unwrap_or(1);
    let (table, constants) = setup(params, horizon, config.digits)?;
    let count = config.count();
    let alpha = constants.alpha.to_f64();
    let mut out = CsvTable::new(
        "fig9",
        &[
            "n",
            "alpha_sqrt_n",
            "exact_second_mean",
            "exact_second_sd",
            "exact_ratio",
            "second_mean",
            "second_sd",
            "third_mean",
            "third_sd",
            "top_two_mean",
            "top_two_sd",
            "second_ratio",
        ],
    );
    for &n in &ns {
        let stats = sample_batch(&table, n, count, &[], config.seed, config.exec)?;
        let sum = stats.summary();
        let top_two = MeanSd::of(
            stats
                .records
                .iter()
                .map(|r| (r.longest + r.second_longest) as f64),
        );
        let scale = alpha * (n as f64).sqrt();
        let exact = table.exact_second_longest_pmf_with(n, config.exec)?;
        let exact_mean = HpReal::from_rational(&exact.mean(), 40).to_f64();
        let exact_sd = HpReal::from_rational(&exact.variance(), 40).to_f64().sqrt();
        out.push(vec![
            n.to_string(),
            fmt(scale),
            fmt(exact_mean),
            fmt(exact_sd),
            fmt(exact_mean / scale),
            fmt(sum.second_longest.mean),
            fmt(sum.second_longest.stddev),
            fmt(sum.third_longest.mean),
            fmt(sum.third_longest.stddev),
            fmt(top_two.mean),
            fmt(top_two.stddev),
            fmt(sum.second_longest.mean / scale),
        ]);
    }
    Ok(out)
}

/// Expected number of rainbows of length `k`: limit mean and variance of
/// `NB(2, t)` against the sample mean and sd at length `n`. With
/// `count = 0` only the theory columns are filled.
pub fn fig12(config: &ExperimentConfig) -> Result<CsvTable> {
    let params = config.params_or(4, 4);
    let n = config.n.unwrap_or(1000);
    let k_list = match &config.k_list {
        Some(list) => list.clone(),
        None => (1..=config.kmax.unwrap_or(100)).collect(),
    };
    if k_list.contains(&0) {
        return Err(Error::InvalidArgument(
            "rainbow length k must be >= 1".into(),
        ));
    }
    let kmax = k_list.iter().copied().max().unwrap_or(1);
    let (table, constants) = setup(params, n.max(kmax + 1), config.digits)?;
    let count = config.count();
    let stats = if count > 0 {
        Some(sample_batch(&table, n, count, &k_list, config.seed, config.exec)?.summary())
    } else {
        None
    };
    let mut out = CsvTable::new(
        "fig12",
        &[
            "k",
            "nb_t",
            "limit_mean",
            "limit_sd",
            "sample_mean",
            "sample_sd",
        ],
    );
    for (idx, &k) in k_list.iter().enumerate() {
        let f_k1: &BigUint = table.count_irreducible(k + 1)?;
        let t = constants.nb_parameter(f_k1, k)?;
        let (mean, var) = constants.expected_rainbows_k(f_k1, k)?;
        let (sm, ss) = match &stats {
            Some(s) => (fmt(s.x_k[idx].1.mean), fmt(s.x_k[idx].1.stddev)),
            None => (String::new(), String::new()),
        };
        out.push(vec![
            k.to_string(),
            hp(&t),
            hp(&mean),
            hp(&var.sqrt()),
            sm,
            ss,
        ]);
    }
    Ok(out)
}

/// Limit probability of a long rainbow, `P(Y_n >= n - k)`.
pub fn table1_uniform(config: &ExperimentConfig) -> Result<CsvTable> {
    let params = config.params_or(4, 4);
    let ks = config
        .k_list
        .clone()
        .unwrap_or_else(|| vec![100, 200, 300, 400, 500]);
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let (table, constants) = setup(params, kmax + 1, config.digits)?;
    let cdf = constants.limit_longest_cdf_many(&table, &ks)?;
    let mut out = CsvTable::new("table1-uniform", &["k", "probability"]);
    for (k, p) in ks.iter().zip(cdf) {
        out.push(vec![k.to_string(), p.to_fixed_string(8)]);
    }
    Ok(out)
}
