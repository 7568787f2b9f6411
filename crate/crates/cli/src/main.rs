mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use boolean_rmt::boolean_model::EntryModel;
use boolean_rmt::matrix_moments::{
    closed_form_count, count_tuples_blockwise, count_tuples_brute, limit_permuted, limit_selfadjoint,
    trace_moment_exact, trace_moment_selfadjoint_exact, MixedWordSpec, MomentRecord, SelfAdjointMethod, TraceMethod,
    DEFAULT_BUDGET,
};
use boolean_rmt::partitions::{enumerate_alt, enumerate_partitions};
use boolean_rmt::permutations::{theta_sweep, PermutationSpec, ThetaVariant};
use boolean_rmt::scalar::{format_scalar, parse_scalar, to_f64, Scalar};
use boolean_rmt::verify::{run_suite, VerifyOptions, SUITES};
use boolean_rmt::{IntervalPartition, LabelTuple, SignPattern};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use output::{float, write_output, Format, Report};

/// Boolean cumulants and trace moments of random matrices with Boolean
/// independent entries.
#[derive(Parser)]
#[command(name = "boolean-rmt", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest number of index tuples a brute-force enumeration may visit.
    #[arg(long, global = true, env = "BOOLEAN_RMT_BUDGET")]
    budget: Option<u128>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the interval partitions of {1..n}, or alt(xi) when --xi is given.
    Partitions {
        n: usize,
        #[arg(long)]
        xi: Option<String>,
    },
    /// Limit of a trace moment.
    Limit {
        #[command(flatten)]
        word: WordArgs,
    },
    /// Exact trace moments across matrix sizes, with the distance to the limit.
    Converge {
        #[command(flatten)]
        word: WordArgs,
        /// Comma-separated matrix sizes.
        #[arg(long)]
        sizes: String,
        /// brute or partition; brute or closed with --selfadjoint.
        #[arg(long)]
        method: Option<String>,
        /// Semicolon-separated permutations, one per letter: identity,
        /// transpose, partial:M,N, with an optional trailing '*'.
        #[arg(long)]
        perm: Option<String>,
    },
    /// Number of index tuples i with iota(xi, i) = sigma.
    Count {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        xi: String,
        #[arg(long = "N")]
        size: usize,
        #[arg(long, value_enum, default_value_t = CountArg::Blockwise)]
        method: CountArg,
    },
    /// Run a self-check suite.
    Verify {
        /// One of the suite names, or "all".
        suite: String,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long = "N-max")]
        size_max: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Triple counts of a permutation family against N^theta.
    Theta {
        /// identity, transpose, or partial:M (M blocks of growing size).
        #[arg(long)]
        perm: String,
        /// Comma-separated grid sides.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Swapped)]
        variant: VariantArg,
    },
}

#[derive(Args)]
struct WordArgs {
    /// Sign pattern such as "xx*xx*".
    #[arg(long)]
    xi: Option<String>,
    /// Comma-separated matrix labels, one per letter.
    #[arg(long)]
    labels: Option<String>,
    /// Comma-separated determining sequence alpha_1, alpha_2, ...
    #[arg(long, default_value = "0")]
    alpha: String,
    /// Comma-separated determining sequence beta_1, beta_2, ...
    #[arg(long, default_value = "0")]
    beta: String,
    /// Entry model for one label from a JSON file, as LABEL=PATH.
    #[arg(long)]
    model: Vec<String>,
    /// Self-adjoint entries with off-diagonal parameters alpha, beta.
    #[arg(long)]
    selfadjoint: bool,
    /// Word length for --selfadjoint.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountArg {
    Brute,
    Blockwise,
    Closed,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Swapped,
    RowCol,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => match report.render(cli.format).and_then(|text| write_output(&text, cli.out.as_deref())) {
            Ok(()) if report.passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    match &cli.command {
        Command::Partitions { n, xi } => partitions(*n, xi.as_deref()),
        Command::Limit { word } => limit(word),
        Command::Converge { word, sizes, method, perm } => {
            converge(word, sizes, method.as_deref(), perm.as_deref(), budget)
        }
        Command::Count { sigma, xi, size, method } => count(sigma, xi, *size, *method, budget),
        Command::Verify { suite, n_max, size_max, order, cases } => {
            let d = VerifyOptions::default();
            let opts = VerifyOptions {
                n_max: n_max.unwrap_or(d.n_max),
                size_max: size_max.unwrap_or(d.size_max),
                order: order.unwrap_or(d.order),
                cases: cases.unwrap_or(d.cases),
                seed: cli.seed,
            };
            verify(suite, &opts)
        }
        Command::Theta { perm, sizes, theta, variant } => theta_report(perm, sizes, *theta, *variant),
    }
}

fn parse_list<T>(text: &str, what: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect::<Result<_>>()
        .with_context(|| format!("invalid {what} {text:?}"))?;
    if items.is_empty() {
        bail!("empty {what}");
    }
    Ok(items)
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let sizes = parse_list(text, "size list", |s| Ok(s.parse::<usize>()?))?;
    if sizes.contains(&0) || sizes.windows(2).any(|w| w[1] <= w[0]) {
        bail!("sizes must be positive and increasing: {text:?}");
    }
    Ok(sizes)
}

fn scalars(text: &str) -> Result<Vec<Scalar>> {
    parse_list(text, "rational list", |s| Ok(parse_scalar(s)?))
}

fn scalar_cell(x: &Scalar) -> Value {
    Value::String(format_scalar(x))
}

fn count_cell(c: u128) -> Value {
    u64::try_from(c).map(Value::from).unwrap_or_else(|_| Value::String(c.to_string()))
}

fn partitions(n: usize, xi: Option<&str>) -> Result<Report> {
    let mut report = Report::new("partitions", &["partition"]);
    report.text_params = false;
    report.param("n", n);
    let list: Vec<IntervalPartition> = match xi {
        Some(text) => {
            let xi: SignPattern = text.parse()?;
            if xi.len() != n {
                bail!("xi {text:?} has {} letters, expected {n}", xi.len());
            }
            report.param("xi", xi.to_string());
            enumerate_alt(&xi).collect()
        }
        None => enumerate_partitions(n)?.collect(),
    };
    for p in list {
        report.row(vec![p.to_string().into()]);
    }
    Ok(report)
}

struct Word {
    spec: Option<MixedWordSpec>,
    selfadjoint: Option<(EntryModel, Scalar, Scalar, usize)>,
}

fn build_word(args: &WordArgs) -> Result<Word> {
    let alpha = scalars(&args.alpha)?;
    let beta = scalars(&args.beta)?;
    if args.selfadjoint {
        if alpha.len() != 1 || beta.len() != 1 {
            bail!("--selfadjoint takes a single alpha and beta");
        }
        let n = match (args.n, &args.xi) {
            (Some(n), _) => n,
            (None, Some(xi)) => xi.parse::<SignPattern>()?.len(),
            (None, None) => bail!("--selfadjoint needs --n"),
        };
        if n == 0 {
            bail!("--n must be positive");
        }
        let model = EntryModel::selfadjoint(alpha[0].clone(), beta[0].clone());
        return Ok(Word { spec: None, selfadjoint: Some((model, alpha[0].clone(), beta[0].clone(), n)) });
    }
    let xi: SignPattern = args.xi.as_deref().ok_or_else(|| anyhow!("--xi is required"))?.parse()?;
    let labels = match &args.labels {
        Some(text) => LabelTuple::new(parse_list(text, "label list", |s| Ok(s.parse::<usize>()?))?)?,
        None => LabelTuple::constant(0, xi.len())?,
    };
    let mut files = BTreeMap::new();
    for m in &args.model {
        let (label, path) = m.split_once('=').ok_or_else(|| anyhow!("--model expects LABEL=PATH, got {m:?}"))?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        files.insert(label.trim().parse::<usize>()?, EntryModel::from_json(&text)?);
    }
    let models = labels
        .labels()
        .iter()
        .map(|&k| (k, files.get(&k).cloned().unwrap_or_else(|| EntryModel::bdiag(alpha.clone(), beta.clone()))))
        .collect();
    Ok(Word { spec: Some(MixedWordSpec::new(labels, xi, models)?), selfadjoint: None })
}

fn limit(args: &WordArgs) -> Result<Report> {
    let word = build_word(args)?;
    let mut report = Report::new("limit", &["word", "limit", "value"]);
    let (name, value) = match (&word.spec, &word.selfadjoint) {
        (Some(spec), _) => (spec.describe(), limit_permuted(spec)?),
        (None, Some((_, a, b, n))) => (format!("selfadjoint n={n}"), limit_selfadjoint(a, b, *n)?),
        _ => unreachable!(),
    };
    report.row(vec![name.into(), scalar_cell(&value), float(to_f64(&value))]);
    Ok(report)
}

fn converge(args: &WordArgs, sizes: &str, method: Option<&str>, perm: Option<&str>, budget: u128) -> Result<Report> {
    let sizes = parse_sizes(sizes)?;
    let word = build_word(args)?;
    let mut report = Report::new("converge", &["word", "N", "exact", "limit", "abs_error", "N_abs_error"]);
    let mut records = Vec::new();
    if let Some((model, a, b, n)) = &word.selfadjoint {
        if perm.is_some() {
            bail!("--perm does not apply to --selfadjoint");
        }
        let method: SelfAdjointMethod = method.unwrap_or("closed").parse()?;
        report.param("method", format!("{method:?}").to_lowercase());
        let limit = limit_selfadjoint(a, b, *n)?;
        for &size in &sizes {
            let exact = trace_moment_selfadjoint_exact(model, *n, size, method, budget)?;
            records.push(MomentRecord::new(format!("selfadjoint n={n}"), size, exact, limit.clone()));
        }
    } else {
        let spec = word.spec.expect("non-selfadjoint word");
        let method: TraceMethod = method.unwrap_or("partition").parse()?;
        report.param("method", format!("{method:?}").to_lowercase());
        for &size in &sizes {
            let spec = match perm {
                Some(p) => {
                    let names: Vec<&str> = p.split(';').map(str::trim).collect();
                    let perms =
                        names.iter().map(|s| PermutationSpec::builtin(s, size)).collect::<Result<Vec<_>, _>>()?;
                    spec.clone().with_permutations(perms)?
                }
                None => spec.clone(),
            };
            let exact = trace_moment_exact(&spec, size, method, budget)?;
            records.push(MomentRecord::new(spec.describe(), size, exact, limit_permuted(&spec)?));
        }
    }
    for r in records {
        let scaled = r.abs_error * r.size as f64;
        report.row(vec![
            r.word.clone().into(),
            r.size.into(),
            scalar_cell(&r.exact),
            scalar_cell(&r.limit),
            float(r.abs_error),
            float(scaled),
        ]);
    }
    Ok(report)
}

fn count(sigma: &str, xi: &str, size: usize, method: CountArg, budget: u128) -> Result<Report> {
    let sigma: IntervalPartition = sigma.parse()?;
    let xi: SignPattern = xi.parse()?;
    let result = match method {
        CountArg::Brute => count_tuples_brute(&sigma, &xi, size, budget)?,
        CountArg::Blockwise => count_tuples_blockwise(&sigma, &xi, size)?,
        CountArg::Closed => closed_form_count(&sigma, &xi, size)?
            .ok_or_else(|| anyhow!("{sigma} is not xi-alternating for {xi}; the closed form does not apply"))?,
    };
    let mut report = Report::new("count", &["sigma", "xi", "N", "count", "method"]);
    report.row(vec![
        result.sigma.to_string().into(),
        result.xi.to_string().into(),
        result.size.into(),
        count_cell(result.count),
        format!("{:?}", result.method).to_lowercase().into(),
    ]);
    Ok(report)
}

fn verify(suite: &str, opts: &VerifyOptions) -> Result<Report> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut report = Report::new("verify", &["suite", "check", "status", "detail"]);
    report.param("n_max", opts.n_max);
    report.param("N_max", opts.size_max);
    report.param("order", opts.order);
    report.param("cases", opts.cases);
    report.param("seed", opts.seed);
    for name in names {
        let r = run_suite(name, opts)?;
        report.passed &= r.passed;
        for c in r.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            report.row(vec![name.into(), c.name.into(), status.into(), c.detail.into()]);
        }
        report.notes.extend(r.notes.into_iter().map(|n| format!("{name}: {n}")));
        report.notes.push(format!("{name}: {}", if r.passed { "PASS" } else { "FAIL" }));
    }
    Ok(report)
}

fn theta_report(perm: &str, sizes: &str, theta: f64, variant: VariantArg) -> Result<Report> {
    let sides = parse_sizes(sizes)?;
    let perm = perm.trim().to_string();
    let family = |s: usize| -> boolean_rmt::Result<PermutationSpec> {
        match perm.strip_prefix("partial:") {
            Some(m) => {
                let m = m.trim().parse::<usize>().map_err(|e| boolean_rmt::Error::Parse(e.to_string()))?;
                PermutationSpec::partial_transpose(m, s)
            }
            None => PermutationSpec::builtin(&perm, s),
        }
    };
    let variant = match variant {
        VariantArg::Swapped => ThetaVariant::Swapped,
        VariantArg::RowCol => ThetaVariant::RowCol,
    };
    let mut report = Report::new("theta", &["N", "count", "ratio"]);
    report.param("perm", perm.clone());
    report.param("theta", float(theta));
    report.param("variant", format!("{variant:?}").to_lowercase());
    for p in theta_sweep(family, &sides, theta, variant)? {
        report.row(vec![p.size.into(), count_cell(p.count), float(p.ratio)]);
    }
    Ok(report)
}
