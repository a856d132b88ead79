//! The slate-forge command line: data generation and ingestion, SVD
//! embeddings, index builds, training, evaluation and the benchmark
//! suites. All randomness flows from --seed; identical invocations
//! produce identical artifacts (timing columns aside).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use slate_forge::bench::{self, Scenario};
use slate_forge::data::{generate_synthetic, load_interactions, save_interactions, split_sessions};
use slate_forge::formats;
use slate_forge::svd::truncated_svd;
use slate_forge::train::{
    evaluate_deterministic, train, Budget, Method, PolicyShape, SigmaSpec, TrainConfig,
};
use slate_forge::{pool, ForgeError};

use slate_core::mips::{build_approx, measure_recall, ApproxIndex, ExactIndex};
use slate_core::{LatentVector, RngStream};

const USAGE: &str = "\
slate-forge: offline optimization of slate decision systems

USAGE:
  slate-forge <COMMAND> [FLAGS]

COMMANDS:
  gen-data       synthesize an interaction CSV
                 --users N --actions N --density F [--rank N] [--seed N] --out FILE
  embed          truncated-SVD action embeddings from interactions
                 --data FILE --dim N [--iters N] [--full-matrix]
                 [--split-ratio F] [--split-seed N] [--seed N] --out FILE
  build-index    small-world graph index over embeddings
                 --embeddings FILE [--max-degree N] [--beam N] [--seed N] --out FILE
  train          optimize a policy
                 --data FILE --embeddings FILE [--index FILE] --estimator NAME
                 [--policy linear|two-layer] [--k N] [--s N] [--sigma auto|norm|F]
                 [--lr F | --lr-grid F,F,...] [--batch-size N]
                 (--budget-seconds F | --budget-iters N) [--intervals N]
                 [--split-ratio F] [--split-seed N] [--val-fraction F]
                 [--config FILE] [--seed N] --out DIR
  eval           deterministic validation reward of saved parameters
                 --data FILE --embeddings FILE --params FILE [--k N]
                 [--split-ratio F] [--split-seed N] [--val-fraction F]
  recall         approximate-index recall against the exact index
                 --embeddings FILE --index FILE [--queries N] [--k N] [--seed N]
  bench-time     equal wall-clock budget comparison
                 [--scenario small|medium|large] [--methods a,b,...]
                 [--budget-seconds F] [--seeds N] --out DIR
  bench-iter     equal iteration-count comparison
                 [--scenario ...] [--methods ...] --iters N [--seeds N] --out DIR
  bench-variance gradient variance versus slate size
                 [--scenario ...] [--methods ...] [--k-list 2,5,10]
                 [--trials N] [--seeds N] --out DIR
  bench-beta     fixed versus learned embeddings study
                 [--scenario ...] [--iters N] [--probe-trials N] [--seed N] --out DIR

Global: --threads N caps the worker pool (or SLATE_FORGE_THREADS).
Estimators: pl-pg, pl-cov, pl-rank, lgp, lgp-mips.
";

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!();
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(ForgeError),
}

impl From<ForgeError> for CliError {
    fn from(e: ForgeError) -> Self {
        // Configuration mistakes are usage errors; IO and data problems
        // are runtime failures.
        match e {
            ForgeError::Config(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other),
        }
    }
}

impl From<slate_core::Error> for CliError {
    fn from(e: slate_core::Error) -> Self {
        CliError::Runtime(ForgeError::Core(e))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parsed `--key value` flags plus boolean switches.
struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

impl Flags {
    fn parse(args: &[String], bool_flags: &[&str]) -> CliResult<Flags> {
        let mut values = BTreeMap::new();
        let mut switches = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let Some(name) = arg.strip_prefix("--") else {
                return Err(CliError::Usage(format!("unexpected argument '{arg}'")));
            };
            if let Some((k, v)) = name.split_once('=') {
                values.insert(k.to_string(), v.to_string());
                i += 1;
                continue;
            }
            if bool_flags.contains(&name) {
                switches.push(name.to_string());
                i += 1;
                continue;
            }
            let Some(value) = args.get(i + 1) else {
                return Err(CliError::Usage(format!("flag --{name} needs a value")));
            };
            values.insert(name.to_string(), value.clone());
            i += 2;
        }
        Ok(Flags { values, switches })
    }

    fn reject_unknown(&self, known: &[&str]) -> CliResult<()> {
        for k in self.values.keys().chain(self.switches.iter()) {
            if !known.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("unknown flag --{k}")));
            }
        }
        Ok(())
    }

    fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn required(&self, name: &str) -> CliResult<&str> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, name: &str, default: T) -> CliResult<T> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("flag --{name}: cannot parse '{v}'"))),
        }
    }

    fn required_num<T: std::str::FromStr>(&self, name: &str) -> CliResult<T> {
        let v = self.required(name)?;
        v.parse::<T>()
            .map_err(|_| CliError::Usage(format!("flag --{name}: cannot parse '{v}'")))
    }
}

fn run(argv: Vec<String>) -> CliResult<()> {
    let Some(command) = argv.first() else {
        return Err(CliError::Usage("no command given".into()));
    };
    let rest = &argv[1..];
    match command.as_str() {
        "gen-data" => cmd_gen_data(rest),
        "embed" => cmd_embed(rest),
        "build-index" => cmd_build_index(rest),
        "train" => cmd_train(rest),
        "eval" => cmd_eval(rest),
        "recall" => cmd_recall(rest),
        "bench-time" => cmd_bench_time(rest),
        "bench-iter" => cmd_bench_iter(rest),
        "bench-variance" => cmd_bench_variance(rest),
        "bench-beta" => cmd_bench_beta(rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

fn apply_threads(flags: &Flags) -> CliResult<()> {
    if let Some(v) = flags.get("threads") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("--threads: cannot parse '{v}'")))?;
        pool::set_threads(n);
    }
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, settings: serde_json::Value) -> CliResult<()> {
    let manifest = serde_json::json!({
        "tool": "slate-forge",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "settings": settings,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| CliError::Runtime(ForgeError::Io { path, source: e }))?;
    Ok(())
}

fn cmd_gen_data(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["users", "actions", "rank", "density", "seed", "out", "threads"])?;
    let users: usize = flags.required_num("users")?;
    let actions: usize = flags.required_num("actions")?;
    let rank: usize = flags.parse_num("rank", 8)?;
    let density: f64 = flags.required_num("density")?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let out = PathBuf::from(flags.required("out")?);
    let ds = generate_synthetic(users, actions, rank, density, seed)?;
    save_interactions(&ds, &out)?;
    println!(
        "wrote {} interactions ({} users x {} actions, density {:.4}%) to {}",
        ds.num_interactions(),
        ds.num_users(),
        ds.num_actions(),
        100.0 * ds.density(),
        out.display()
    );
    Ok(())
}

struct SplitFlags {
    ratio: f64,
    seed: u64,
    val_fraction: f64,
}

fn split_flags(flags: &Flags) -> CliResult<SplitFlags> {
    Ok(SplitFlags {
        ratio: flags.parse_num("split-ratio", 0.5)?,
        seed: flags.parse_num("split-seed", 42)?,
        val_fraction: flags.parse_num("val-fraction", 0.1)?,
    })
}

fn cmd_embed(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &["full-matrix"])?;
    flags.reject_unknown(&[
        "data", "dim", "iters", "seed", "out", "split-ratio", "split-seed", "val-fraction",
        "full-matrix", "threads",
    ])?;
    apply_threads(&flags)?;
    let data = PathBuf::from(flags.required("data")?);
    let dim: usize = flags.required_num("dim")?;
    let iters: usize = flags.parse_num("iters", 7)?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let out = PathBuf::from(flags.required("out")?);
    let ds = load_interactions(&data)?;
    // Default: factorize only the observed halves so hidden items never
    // leak into the features; --full-matrix uses whole sessions.
    let (beta, singular) = if flags.has("full-matrix") {
        truncated_svd(ds.users(), ds.num_actions(), dim, iters, seed)?
    } else {
        let sf = split_flags(&flags)?;
        let split = split_sessions(&ds, sf.ratio, sf.val_fraction, sf.seed)?;
        truncated_svd(&split.observed, ds.num_actions(), dim, iters, seed)?
    };
    formats::write_embeddings(&beta, &out)?;
    println!(
        "wrote {}x{} embeddings to {} (leading singular values: {})",
        beta.dim(),
        beta.num_actions(),
        out.display(),
        singular
            .iter()
            .take(4)
            .map(|s| format!("{s:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn cmd_build_index(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["embeddings", "max-degree", "beam", "seed", "out", "threads"])?;
    let emb = PathBuf::from(flags.required("embeddings")?);
    let max_degree: usize = flags.parse_num("max-degree", 32)?;
    let beam: usize = flags.parse_num("beam", 128)?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let out = PathBuf::from(flags.required("out")?);
    let beta = formats::read_embeddings(&emb)?;
    let mut rng = RngStream::new(seed);
    let index = build_approx(&beta, max_degree, beam, &mut rng)?;
    formats::write_index(index.graph(), &out)?;
    println!(
        "built index over {} actions (max degree {max_degree}, beam {beam}) at {}",
        beta.num_actions(),
        out.display()
    );
    Ok(())
}

/// Merges `key = value` lines from --config under the command line.
fn merge_config_file(flags: &mut Flags) -> CliResult<()> {
    let Some(path) = flags.get("config").map(PathBuf::from) else {
        return Ok(());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Runtime(ForgeError::Io { path: path.clone(), source: e }))?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Runtime(ForgeError::Parse {
                path: path.clone(),
                line: idx + 1,
                msg: format!("expected 'key = value', found '{line}'"),
            }));
        };
        let key = k.trim().to_string();
        let value = v.trim().trim_matches('"').to_string();
        // Command line wins over the file.
        flags.values.entry(key).or_insert(value);
    }
    Ok(())
}

fn cmd_train(args: &[String]) -> CliResult<()> {
    let mut flags = Flags::parse(args, &[])?;
    merge_config_file(&mut flags)?;
    flags.reject_unknown(&[
        "data", "embeddings", "index", "estimator", "policy", "k", "s", "sigma", "lr",
        "lr-grid", "batch-size", "budget-seconds", "budget-iters", "intervals", "seed",
        "split-ratio", "split-seed", "val-fraction", "config", "out", "threads",
    ])?;
    apply_threads(&flags)?;
    let data = PathBuf::from(flags.required("data")?);
    let emb = PathBuf::from(flags.required("embeddings")?);
    let out_dir = PathBuf::from(flags.required("out")?);
    let method = Method::parse(flags.required("estimator")?)?;
    let policy = PolicyShape::parse(flags.get("policy").unwrap_or("linear"))?;
    let k: usize = flags.parse_num("k", 5)?;
    let samples: u32 = flags.parse_num("s", 10)?;
    let sigma = SigmaSpec::parse(flags.get("sigma").unwrap_or("auto"))?;
    let batch_size: usize = flags.parse_num("batch-size", 32)?;
    let intervals: usize = flags.parse_num("intervals", 10)?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let budget = match (flags.get("budget-seconds"), flags.get("budget-iters")) {
        (Some(s), None) => Budget::WallClockSecs(s.parse().map_err(|_| {
            CliError::Usage(format!("--budget-seconds: cannot parse '{s}'"))
        })?),
        (None, Some(t)) => Budget::Iterations(t.parse().map_err(|_| {
            CliError::Usage(format!("--budget-iters: cannot parse '{t}'"))
        })?),
        _ => {
            return Err(CliError::Usage(
                "specify exactly one of --budget-seconds or --budget-iters".into(),
            ))
        }
    };
    let lr_candidates: Vec<f64> = if let Some(grid) = flags.get("lr-grid") {
        grid.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("--lr-grid: cannot parse '{v}'")))
            })
            .collect::<CliResult<_>>()?
    } else {
        vec![flags.parse_num("lr", 1e-2)?]
    };

    let ds = load_interactions(&data)?;
    let sf = split_flags(&flags)?;
    let split = split_sessions(&ds, sf.ratio, sf.val_fraction, sf.seed)?;
    let beta = formats::read_embeddings(&emb)?;
    if beta.num_actions() < ds.num_actions() {
        return Err(CliError::Runtime(ForgeError::Validation(format!(
            "embeddings cover {} actions but the dataset references {}",
            beta.num_actions(),
            ds.num_actions()
        ))));
    }
    let graph = flags
        .get("index")
        .map(|p| formats::read_index(Path::new(p)))
        .transpose()?;
    let approx = graph
        .map(|g| ApproxIndex::attach(&beta, g))
        .transpose()
        .map_err(ForgeError::Core)?;

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(ForgeError::Io { path: out_dir.clone(), source: e }))?;

    let mut best: Option<(f64, f64, slate_core::PolicyParams, slate_forge::train::TrainLog)> =
        None;
    let mut sweep = Vec::new();
    for &lr in &lr_candidates {
        let config = TrainConfig {
            method,
            policy,
            k,
            samples,
            sigma,
            learning_rate: lr,
            batch_size,
            budget,
            intervals,
            seed,
        };
        let (params, log) = train(&config, &split, &beta, approx.as_ref())?;
        let final_val = log.final_val_reward();
        sweep.push(serde_json::json!({ "lr": lr, "val_reward": final_val }));
        if lr_candidates.len() > 1 {
            println!("lr {lr:>10}: final validation reward {final_val:.4}");
        }
        if best.as_ref().is_none_or(|(b, _, _, _)| final_val > *b) {
            best = Some((final_val, lr, params, log));
        }
    }
    let (final_val, lr, params, log) = best.expect("at least one learning rate");

    let params_path = out_dir.join("params.slpr");
    formats::write_params(&params, &params_path)?;
    let csv_path = out_dir.join("log.csv");
    std::fs::write(&csv_path, log.to_csv())
        .map_err(|e| CliError::Runtime(ForgeError::Io { path: csv_path, source: e }))?;
    let json_path = out_dir.join("log.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&log).unwrap())
        .map_err(|e| CliError::Runtime(ForgeError::Io { path: json_path, source: e }))?;
    write_manifest(
        &out_dir,
        "train",
        serde_json::json!({
            "data": data.display().to_string(),
            "embeddings": emb.display().to_string(),
            "estimator": method.name(),
            "k": k, "s": samples,
            "sigma": format!("{sigma:?}"),
            "learning_rate": lr,
            "lr_sweep": sweep,
            "batch_size": batch_size,
            "budget": format!("{budget:?}"),
            "seed": seed,
            "split": { "ratio": sf.ratio, "seed": sf.seed, "val_fraction": sf.val_fraction },
        }),
    )?;
    println!(
        "final validation reward {final_val:.4}; params and logs in {}",
        out_dir.display()
    );
    Ok(())
}

fn cmd_eval(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&[
        "data", "embeddings", "params", "k", "split-ratio", "split-seed", "val-fraction",
        "threads",
    ])?;
    let ds = load_interactions(Path::new(flags.required("data")?))?;
    let beta = formats::read_embeddings(Path::new(flags.required("embeddings")?))?;
    let params = formats::read_params(Path::new(flags.required("params")?))?;
    let k: usize = flags.parse_num("k", 5)?;
    let sf = split_flags(&flags)?;
    let split = split_sessions(&ds, sf.ratio, sf.val_fraction, sf.seed)?;
    let reward = evaluate_deterministic(&params, &beta, &split, &split.val_users, k)?;
    println!("{reward}");
    Ok(())
}

fn cmd_recall(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["embeddings", "index", "queries", "k", "seed", "threads"])?;
    let beta = formats::read_embeddings(Path::new(flags.required("embeddings")?))?;
    let graph = formats::read_index(Path::new(flags.required("index")?))?;
    let approx = ApproxIndex::attach(&beta, graph).map_err(ForgeError::Core)?;
    let exact = ExactIndex::new(&beta);
    let queries: usize = flags.parse_num("queries", 100)?;
    let k: usize = flags.parse_num("k", 10)?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let mut rng = RngStream::new(seed);
    let qs: Vec<LatentVector> = (0..queries)
        .map(|_| {
            LatentVector::new((0..beta.dim()).map(|_| rng.standard_normal()).collect())
                .expect("finite")
        })
        .collect();
    let report = measure_recall(&approx, &exact, &qs, k).map_err(ForgeError::Core)?;
    println!("{}", report.recall);
    Ok(())
}

fn parse_methods(flags: &Flags, default: &str) -> CliResult<Vec<Method>> {
    flags
        .get("methods")
        .unwrap_or(default)
        .split(',')
        .map(|name| Method::parse(name.trim()).map_err(CliError::from))
        .collect()
}

fn seeds_from(flags: &Flags) -> CliResult<Vec<u64>> {
    let count: u64 = flags.parse_num("seeds", 6)?;
    if count == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    Ok((0..count).collect())
}

fn cmd_bench_time(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&[
        "scenario", "methods", "budget-seconds", "seeds", "out", "threads",
    ])?;
    apply_threads(&flags)?;
    let scenario = Scenario::parse(flags.get("scenario").unwrap_or("medium"))?;
    let methods = parse_methods(&flags, "lgp-mips,lgp,pl-pg")?;
    let budget: f64 = flags.parse_num("budget-seconds", 120.0)?;
    let seeds = seeds_from(&flags)?;
    let out = PathBuf::from(flags.required("out")?);
    let report = bench::bench_time_budget(&scenario, &methods, budget, &seeds)?;
    report.write(&out, "bench_time")?;
    write_manifest(&out, "bench-time", serde_json::to_value(&report.fingerprint).unwrap())?;
    for m in &methods {
        let (mean, se) = report.final_mean_se(m.name());
        println!("{:>10}: final validation reward {mean:.4} +/- {se:.4}", m.name());
    }
    Ok(())
}

fn cmd_bench_iter(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["scenario", "methods", "iters", "seeds", "out", "threads"])?;
    apply_threads(&flags)?;
    let scenario = Scenario::parse(flags.get("scenario").unwrap_or("small"))?;
    let methods = parse_methods(&flags, "lgp-mips,lgp,pl-rank,pl-pg")?;
    let iters: u64 = flags.required_num("iters")?;
    let seeds = seeds_from(&flags)?;
    let out = PathBuf::from(flags.required("out")?);
    let report = bench::bench_iteration_budget(&scenario, &methods, iters, &seeds)?;
    report.write(&out, "bench_iter")?;
    write_manifest(&out, "bench-iter", serde_json::to_value(&report.fingerprint).unwrap())?;
    for m in &methods {
        let (mean, se) = report.final_mean_se(m.name());
        println!("{:>10}: final training reward {mean:.4} +/- {se:.4}", m.name());
    }
    Ok(())
}

fn cmd_bench_variance(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&[
        "scenario", "methods", "k-list", "trials", "seeds", "out", "threads",
    ])?;
    apply_threads(&flags)?;
    let scenario = Scenario::parse(flags.get("scenario").unwrap_or("small"))?;
    let methods = parse_methods(&flags, "pl-pg,lgp")?;
    let k_list: Vec<usize> = flags
        .get("k-list")
        .unwrap_or("2,5,10")
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--k-list: cannot parse '{v}'")))
        })
        .collect::<CliResult<_>>()?;
    let trials: u32 = flags.parse_num("trials", 10_000)?;
    let seeds = seeds_from(&flags)?;
    let out = PathBuf::from(flags.required("out")?);
    let report = bench::bench_variance_vs_k(&scenario, &methods, &k_list, trials, &seeds)?;
    report.write(&out, "bench_variance")?;
    write_manifest(&out, "bench-variance", serde_json::to_value(&report.fingerprint).unwrap())?;
    for m in &methods {
        for &k in &k_list {
            println!(
                "{:>10} K={k:<3}: log10 variance {:.3}",
                m.name(),
                bench::mean_log_variance(&report, *m, k)
            );
        }
    }
    Ok(())
}

fn cmd_bench_beta(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["scenario", "iters", "probe-trials", "seed", "out", "threads"])?;
    apply_threads(&flags)?;
    let scenario = Scenario::parse(flags.get("scenario").unwrap_or("small"))?;
    let iters: u64 = flags.parse_num("iters", 600)?;
    let probe_trials: u32 = flags.parse_num("probe-trials", 300)?;
    let seed: u64 = flags.parse_num("seed", 0)?;
    let out = PathBuf::from(flags.required("out")?);
    let outcome = bench::bench_fixed_beta(&scenario, iters, probe_trials, seed)?;
    outcome.report.write(&out, "bench_beta")?;
    write_manifest(
        &out,
        "bench-beta",
        serde_json::to_value(&outcome.report.fingerprint).unwrap(),
    )?;
    println!(
        "learn-theta: {:.6} s/iter, learn-beta: {:.6} s/iter (ratio {:.2})",
        outcome.theta_iter_seconds,
        outcome.beta_iter_seconds,
        outcome.theta_iter_seconds / outcome.beta_iter_seconds
    );
    for (i, (t, b)) in outcome
        .theta_variances
        .iter()
        .zip(&outcome.beta_variances)
        .enumerate()
    {
        println!("interval {:>2}: variance learn-theta {t:.4e}, learn-beta {b:.4e}", i + 1);
    }
    Ok(())
}
