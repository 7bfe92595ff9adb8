//! File-based command-line surface: fit, select, simulate, compare, and
//! evaluate. Every run writes a manifest sufficient to reproduce its
//! primary outputs bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::baselines::{kmeans, robust_sparse_kmeans, sparse_kmeans, trimmed_kmeans, TrimConfig};
use crate::csvio::read_matrix;
use crate::error::Error;
use crate::eval::{evaluate, EvalReport};
use crate::fit::fit;
use crate::gap::{default_s_grid, gap_table, select_k, GapParams};
use crate::model::{ClusterModel, FitConfig};
use crate::rng::derive_seed;
use crate::simgen::{generate, GroupSizes, OutlierKind, SimConfig, SimDataset};
use crate::DataMatrix;

#[derive(Debug)]
pub enum CliError {
    /// Unparseable or inconsistent input (exit code 2).
    Input(String),
    /// The algorithm itself failed (exit code 3).
    Algorithm(Error),
    /// Output could not be written (exit code 3).
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Algorithm(_) | CliError::Output(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Algorithm(e) => write!(f, "algorithm error: {e}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

fn input_err(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

fn algo_err(e: Error) -> CliError {
    CliError::Algorithm(e)
}

fn out_err(context: &str) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("{context}: {e}"))
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "wrsk", version, about = "Robust and sparse k-means clustering toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Base seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for independent grid cells (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory receiving all outputs.
    #[arg(long, global = true, default_value = "wrsk-out")]
    pub out_dir: PathBuf,

    /// Print progress to stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit one model with fixed k and s to a CSV matrix.
    Fit {
        /// Input CSV (rows = observations; header auto-detected).
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Sparsity bound in (1, sqrt(p)].
        #[arg(long)]
        s: f64,
        /// LOF neighborhood size.
        #[arg(long, default_value_t = 10)]
        q: usize,
        /// Biweight truncation point.
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Observation-weight cutoff for outlier flags.
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
        #[arg(long, default_value_t = 15)]
        lloyd_max_iter: usize,
        #[arg(long, default_value_t = 20)]
        outer_max_iter: usize,
    },
    /// Select k and s jointly by the weight-adjusted gap statistic.
    Select {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 7)]
        k_max: usize,
        /// Comma-separated sparsity grid (default: 1.1 step 0.5 up to sqrt(p)).
        #[arg(long)]
        s_grid: Option<String>,
        /// Permuted datasets per grid cell.
        #[arg(long, default_value_t = 10)]
        permutations: usize,
    },
    /// Generate benchmark datasets, run the pipeline, and aggregate a summary.
    Simulate {
        /// Built-in study design (1, 2, or 3).
        #[arg(long, conflicts_with = "config")]
        study: Option<u8>,
        /// Custom generator config (JSON SimConfig).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        replicates: usize,
        /// Shrink group sizes and dimensionality proportionally.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 10)]
        permutations: usize,
    },
    /// Compare methods on one dataset with ground truth.
    Compare {
        /// Dataset directory written by `simulate`.
        #[arg(long, conflicts_with = "sim_config")]
        data: Option<PathBuf>,
        /// Generate the dataset from this SimConfig JSON.
        #[arg(long)]
        sim_config: Option<PathBuf>,
        /// Comma-separated subset of wrsk,kc,tkc,skc,rskc.
        #[arg(long, default_value = "wrsk,kc,tkc,skc,rskc")]
        methods: String,
        /// Trimming level; default is the true outlier fraction, or 0.10.
        #[arg(long)]
        alpha: Option<f64>,
        /// Number of clusters; default is the true group count.
        #[arg(long)]
        k: Option<usize>,
        /// Sparsity bound; default selects s per method by oracle CER.
        #[arg(long)]
        s: Option<f64>,
    },
    /// Metrics for a saved model against a dataset directory with truth.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: String,
    seed: u64,
    jobs: Option<usize>,
    inputs: Vec<String>,
    out_dir: String,
    config: serde_json::Value,
    duration_seconds: f64,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    seed: u64,
    jobs: Option<usize>,
    inputs: Vec<String>,
    config: serde_json::Value,
    started: Instant,
) -> CliResult<()> {
    let manifest = RunManifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        jobs,
        inputs,
        out_dir: out_dir.display().to_string(),
        config,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Output(format!("manifest: {e}")))?;
    fs::write(out_dir.join("manifest.json"), body).map_err(out_err("manifest.json"))?;
    Ok(())
}

fn write_model_files(out_dir: &Path, model: &ClusterModel) -> CliResult<()> {
    let body = serde_json::to_string_pretty(model)
        .map_err(|e| CliError::Output(format!("model.json: {e}")))?;
    fs::write(out_dir.join("model.json"), body).map_err(out_err("model.json"))?;

    let mut obs = String::from("row,assignment,v,outlier\n");
    for i in 0..model.assignment.len() {
        obs.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            model.assignment[i],
            model.v[i],
            model.outlier_flags[i] as u8
        ));
    }
    fs::write(out_dir.join("weights.csv"), obs).map_err(out_err("weights.csv"))?;

    let mut vars = String::from("variable,w\n");
    for (j, w) in model.w.iter().enumerate() {
        vars.push_str(&format!("{},{}\n", j + 1, w));
    }
    fs::write(out_dir.join("variable_weights.csv"), vars)
        .map_err(out_err("variable_weights.csv"))?;
    Ok(())
}

/// Parse and dispatch; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wrsk: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.jobs {
        Some(jobs) if jobs >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Input(format!("--jobs: {e}")))?
            .install(|| dispatch(&cli)),
        Some(_) => Err(CliError::Input("--jobs must be at least 1".into())),
        None => dispatch(&cli),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    fs::create_dir_all(&cli.out_dir).map_err(out_err("out-dir"))?;
    match &cli.command {
        Command::Fit {
            input,
            k,
            s,
            q,
            c,
            cutoff,
            lloyd_max_iter,
            outer_max_iter,
        } => cmd_fit(cli, input, *k, *s, *q, *c, *cutoff, *lloyd_max_iter, *outer_max_iter),
        Command::Select {
            input,
            k_min,
            k_max,
            s_grid,
            permutations,
        } => cmd_select(cli, input, *k_min, *k_max, s_grid.as_deref(), *permutations),
        Command::Simulate {
            study,
            config,
            replicates,
            scale,
            permutations,
        } => cmd_simulate(cli, *study, config.as_deref(), *replicates, *scale, *permutations),
        Command::Compare {
            data,
            sim_config,
            methods,
            alpha,
            k,
            s,
        } => cmd_compare(cli, data.as_deref(), sim_config.as_deref(), methods, *alpha, *k, *s),
        Command::Evaluate { model, truth } => cmd_evaluate(cli, model, truth),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    cli: &Cli,
    input: &Path,
    k: usize,
    s: f64,
    q: usize,
    c: f64,
    cutoff: f64,
    lloyd_max_iter: usize,
    outer_max_iter: usize,
) -> CliResult<()> {
    let started = Instant::now();
    let x = read_matrix(input).map_err(input_err)?;
    let mut config = FitConfig::new(k, s).with_seed(cli.seed);
    config.lof_params.q = q;
    config.lof_params.c = c;
    config.robin_params.q = q;
    config.outlier_cutoff = cutoff;
    config.lloyd_max_iter = lloyd_max_iter;
    config.outer_max_iter = outer_max_iter;

    let model = fit(x.view(), &config).map_err(algo_err)?;
    write_model_files(&cli.out_dir, &model)?;
    write_manifest(
        &cli.out_dir,
        "fit",
        cli.seed,
        cli.jobs,
        vec![input.display().to_string()],
        serde_json::to_value(&config).unwrap_or_default(),
        started,
    )?;
    if cli.verbose {
        eprintln!(
            "fit: n={} p={} objective={:.6} outliers={}",
            x.nrows(),
            x.ncols(),
            model.objective,
            model.n_outliers()
        );
    }
    Ok(())
}

fn parse_s_grid(spec: &str, p: usize) -> CliResult<Vec<f64>> {
    let sqrt_p = (p as f64).sqrt();
    let mut grid = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let s: f64 = tok
            .parse()
            .map_err(|_| CliError::Input(format!("--s-grid: cannot parse '{tok}'")))?;
        if !(s > 1.0 && s <= sqrt_p + 1e-12) {
            return Err(CliError::Input(format!(
                "--s-grid: s={s} outside (1, sqrt(p)] = (1, {sqrt_p:.4}]"
            )));
        }
        grid.push(s);
    }
    if grid.is_empty() {
        return Err(CliError::Input("--s-grid: empty grid".into()));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(grid)
}

fn cmd_select(
    cli: &Cli,
    input: &Path,
    k_min: usize,
    k_max: usize,
    s_grid: Option<&str>,
    permutations: usize,
) -> CliResult<()> {
    let started = Instant::now();
    let x = read_matrix(input).map_err(input_err)?;
    if k_min < 1 || k_max < k_min {
        return Err(CliError::Input(format!(
            "--k-min/--k-max: invalid range {k_min}..{k_max}"
        )));
    }
    let k_grid: Vec<usize> = (k_min..=k_max).collect();
    let s_grid = match s_grid {
        Some(spec) => parse_s_grid(spec, x.ncols())?,
        None => default_s_grid(x.ncols()),
    };
    let params = GapParams {
        permutations,
        se_inflation: true,
    };
    let base = FitConfig::new(k_grid[0], s_grid[0]).with_seed(cli.seed);

    let table = gap_table(x.view(), &k_grid, &s_grid, &params, &base).map_err(algo_err)?;
    fs::write(cli.out_dir.join("gap_table.csv"), table.to_csv())
        .map_err(out_err("gap_table.csv"))?;
    fs::write(
        cli.out_dir.join("gap_table.json"),
        serde_json::to_string_pretty(&table)
            .map_err(|e| CliError::Output(format!("gap_table.json: {e}")))?,
    )
    .map_err(out_err("gap_table.json"))?;

    let best = select_k(&table);
    let best_json = serde_json::json!({
        "k": best.k,
        "s": best.s,
        "gap": best.gap,
        "se": best.se,
    });
    fs::write(
        cli.out_dir.join("best.json"),
        serde_json::to_string_pretty(&best_json).expect("static json"),
    )
    .map_err(out_err("best.json"))?;

    let mut config = FitConfig::new(best.k, best.s).with_seed(cli.seed);
    config.seed = derive_seed(cli.seed, &[best.k as u64, crate::rng::tag_f64(best.s)]);
    let model = fit(x.view(), &config).map_err(algo_err)?;
    write_model_files(&cli.out_dir, &model)?;

    write_manifest(
        &cli.out_dir,
        "select",
        cli.seed,
        cli.jobs,
        vec![input.display().to_string()],
        serde_json::json!({
            "k_grid": k_grid,
            "s_grid": s_grid,
            "permutations": permutations,
            "se_inflation": true,
        }),
        started,
    )?;
    if cli.verbose {
        eprintln!("select: best k={} s={} gap={:.4}", best.k, best.s, best.gap);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Wrsk,
    Kc,
    Tkc,
    Skc,
    Rskc,
}

impl Method {
    pub fn parse_list(spec: &str) -> CliResult<Vec<Method>> {
        let mut out = Vec::new();
        for tok in spec.split(',') {
            let tok = tok.trim().to_lowercase();
            if tok.is_empty() {
                continue;
            }
            out.push(match tok.as_str() {
                "wrsk" => Method::Wrsk,
                "kc" | "kmeans" => Method::Kc,
                "tkc" => Method::Tkc,
                "skc" => Method::Skc,
                "rskc" => Method::Rskc,
                other => {
                    return Err(CliError::Input(format!(
                        "--methods: unknown method '{other}' (expected wrsk,kc,tkc,skc,rskc)"
                    )))
                }
            });
        }
        if out.is_empty() {
            return Err(CliError::Input("--methods: empty list".into()));
        }
        Ok(out)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Wrsk => "wrsk",
            Method::Kc => "kc",
            Method::Tkc => "tkc",
            Method::Skc => "skc",
            Method::Rskc => "rskc",
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Method::Wrsk | Method::Skc | Method::Rskc)
    }
}

/// Fit one method with fixed parameters.
fn fit_one(
    method: Method,
    x: &DataMatrix,
    k: usize,
    s: f64,
    alpha: f64,
    seed: u64,
) -> crate::error::Result<ClusterModel> {
    match method {
        Method::Wrsk => fit(x.view(), &FitConfig::new(k, s).with_seed(seed)),
        Method::Kc => kmeans(x.view(), k, None, 100),
        Method::Tkc => trimmed_kmeans(x.view(), k, TrimConfig::new(alpha), 100),
        Method::Skc => sparse_kmeans(x.view(), k, s, 100),
        Method::Rskc => robust_sparse_kmeans(x.view(), k, s, TrimConfig::new(alpha), 100),
    }
}

/// Oracle sparsity selection: fit over the grid and keep the s with the
/// lowest CER against the true labels (ties toward smaller s).
fn oracle_s_fit(
    method: Method,
    x: &DataMatrix,
    truth: &SimDataset,
    k: usize,
    grid: &[f64],
    alpha: f64,
    seed: u64,
) -> crate::error::Result<(f64, ClusterModel)> {
    use rayon::prelude::*;
    let fits: crate::error::Result<Vec<(f64, ClusterModel, f64)>> = grid
        .par_iter()
        .map(|&s| {
            let m = fit_one(method, x, k, s, alpha, derive_seed(seed, &[crate::rng::tag_f64(s)]))?;
            let c = crate::eval::cer(&truth.labels, &m.assignment)?;
            Ok((s, m, c))
        })
        .collect();
    let mut fits = fits?;
    fits.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));
    let (s, model, _) = fits.into_iter().next().expect("nonempty oracle grid");
    Ok((s, model))
}

fn cmd_compare(
    cli: &Cli,
    data: Option<&Path>,
    sim_config: Option<&Path>,
    methods_spec: &str,
    alpha: Option<f64>,
    k: Option<usize>,
    s: Option<f64>,
) -> CliResult<()> {
    let started = Instant::now();
    let methods = Method::parse_list(methods_spec)?;

    let truth: SimDataset = match (data, sim_config) {
        (Some(dir), None) => SimDataset::load_dir(dir).map_err(input_err)?,
        (None, Some(cfg_path)) => {
            let body = fs::read_to_string(cfg_path)
                .map_err(|e| CliError::Input(format!("{}: {e}", cfg_path.display())))?;
            let mut config: SimConfig = serde_json::from_str(&body)
                .map_err(|e| CliError::Input(format!("{}: {e}", cfg_path.display())))?;
            if cli.seed != 0 {
                config.seed = cli.seed;
            }
            generate(&config).map_err(input_err)?
        }
        _ => {
            return Err(CliError::Input(
                "compare: supply exactly one of --data or --sim-config".into(),
            ))
        }
    };

    let x = truth.x.clone();
    let k = k.unwrap_or(truth.config.g);
    let true_frac = truth.outlier_flags().iter().filter(|&&f| f).count() as f64
        / truth.n() as f64;
    let alpha = alpha.unwrap_or(if true_frac > 0.0 { true_frac } else { 0.10 });
    let grid = default_s_grid(x.ncols());

    let mut rows = vec![EvalReport::CSV_HEADER.to_string()];
    for method in methods {
        let seed = derive_seed(cli.seed, &[method as u64]);
        let (s_used, model) = match (method.is_sparse(), s) {
            (true, Some(s)) => (s, fit_one(method, &x, k, s, alpha, seed).map_err(algo_err)?),
            (true, None) => oracle_s_fit(method, &x, &truth, k, &grid, alpha, seed)
                .map_err(algo_err)?,
            (false, _) => {
                let sqrt_p = (x.ncols() as f64).sqrt();
                (sqrt_p, fit_one(method, &x, k, sqrt_p, alpha, seed).map_err(algo_err)?)
            }
        };
        let mut report = evaluate(&model, &truth).map_err(algo_err)?;
        report.selected_k = Some(k);
        report.selected_s = method.is_sparse().then_some(s_used);
        rows.push(report.csv_row());
        if cli.verbose {
            eprintln!("compare: {} cer={:.4}", method.name(), report.cer);
        }
    }
    fs::write(cli.out_dir.join("comparison.csv"), rows.join("\n") + "\n")
        .map_err(out_err("comparison.csv"))?;

    write_manifest(
        &cli.out_dir,
        "compare",
        cli.seed,
        cli.jobs,
        data.iter()
            .chain(sim_config.iter())
            .map(|p| p.display().to_string())
            .collect(),
        serde_json::json!({
            "methods": methods_spec,
            "alpha": alpha,
            "k": k,
            "s": s,
        }),
        started,
    )?;
    Ok(())
}

fn cmd_evaluate(cli: &Cli, model_path: &Path, truth_dir: &Path) -> CliResult<()> {
    let started = Instant::now();
    let body = fs::read_to_string(model_path)
        .map_err(|e| CliError::Input(format!("{}: {e}", model_path.display())))?;
    let model: ClusterModel = serde_json::from_str(&body)
        .map_err(|e| CliError::Input(format!("{}: {e}", model_path.display())))?;
    let truth = SimDataset::load_dir(truth_dir).map_err(input_err)?;

    let report = evaluate(&model, &truth).map_err(algo_err)?;
    fs::write(
        cli.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Output(format!("report.json: {e}")))?,
    )
    .map_err(out_err("report.json"))?;
    fs::write(
        cli.out_dir.join("report.csv"),
        format!("{}\n{}\n", EvalReport::CSV_HEADER, report.csv_row()),
    )
    .map_err(out_err("report.csv"))?;
    write_manifest(
        &cli.out_dir,
        "evaluate",
        cli.seed,
        cli.jobs,
        vec![model_path.display().to_string(), truth_dir.display().to_string()],
        serde_json::Value::Null,
        started,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate: built-in study designs
// ---------------------------------------------------------------------------

fn scaled(v: usize, scale: f64, floor: usize) -> usize {
    ((v as f64 * scale).ceil() as usize).max(floor)
}

struct StudySetting {
    name: String,
    config: SimConfig,
    /// k grid for gap-based selection; `None` runs with the true k instead.
    k_grid: Option<Vec<usize>>,
    methods: Vec<Method>,
    alpha: f64,
}

fn study_settings(study: u8, scale: f64, seed: u64) -> CliResult<Vec<StudySetting>> {
    let mut out = Vec::new();
    match study {
        1 => {
            for g in [3usize, 4, 5] {
                out.push(StudySetting {
                    name: format!("g{g}"),
                    config: SimConfig {
                        g,
                        group_sizes: GroupSizes::Range {
                            min: scaled(50, scale, 8),
                            max: scaled(150, scale, 12),
                        },
                        p_inf: scaled(50, scale, g),
                        p_noise: scaled(750, scale, 10),
                        mu_range: (3.0, 6.0),
                        rho_range: (0.1, 0.9),
                        sigma_range: (3.0, 10.0),
                        outlier_frac_inf: 0.10,
                        outlier_frac_noise: 0.10,
                        noise_contam_var_frac: 0.10,
                        outlier_kind_inf: OutlierKind::Scattered,
                        uniform_literal_interval: false,
                        seed,
                    },
                    k_grid: Some((2..=7).collect()),
                    methods: vec![Method::Wrsk],
                    alpha: 0.0,
                });
            }
        }
        2 => {
            // contamination ladder: (informative %, noise %)
            let ladder: [(f64, f64); 7] = [
                (0.0, 0.0),
                (0.05, 0.0),
                (0.10, 0.10),
                (0.15, 0.10),
                (0.20, 0.10),
                (0.30, 0.10),
                (0.40, 0.10),
            ];
            for (fi, fnz) in ladder {
                out.push(StudySetting {
                    name: format!("c{:02.0}_{:02.0}", fi * 100.0, fnz * 100.0),
                    config: SimConfig {
                        g: 3,
                        group_sizes: GroupSizes::Range {
                            min: scaled(50, scale, 8),
                            max: scaled(150, scale, 12),
                        },
                        p_inf: scaled(170, scale, 3),
                        p_noise: scaled(830, scale, 10),
                        mu_range: (3.0, 6.0),
                        rho_range: (0.1, 0.9),
                        sigma_range: (3.0, 10.0),
                        outlier_frac_inf: fi,
                        outlier_frac_noise: fnz,
                        noise_contam_var_frac: 0.10,
                        outlier_kind_inf: OutlierKind::Scattered,
                        uniform_literal_interval: false,
                        seed,
                    },
                    k_grid: Some((2..=6).collect()),
                    methods: vec![Method::Wrsk],
                    alpha: 0.0,
                });
            }
        }
        3 => {
            for pct in [1usize, 2, 5] {
                let p = scaled(4000, scale, 50);
                let p_inf = ((p * pct) as f64 / 100.0).ceil() as usize;
                out.push(StudySetting {
                    name: format!("pinf{pct}pct"),
                    config: SimConfig {
                        g: 4,
                        group_sizes: GroupSizes::Range {
                            min: scaled(15, scale, 6),
                            max: scaled(150, scale, 10),
                        },
                        p_inf: p_inf.max(4),
                        p_noise: p - p_inf.max(4),
                        mu_range: (3.0, 6.0),
                        rho_range: (0.1, 0.9),
                        sigma_range: (3.0, 10.0),
                        outlier_frac_inf: 0.20,
                        outlier_frac_noise: 0.10,
                        noise_contam_var_frac: 0.20,
                        outlier_kind_inf: OutlierKind::Uniform,
                        uniform_literal_interval: false,
                        seed,
                    },
                    k_grid: None,
                    methods: vec![Method::Wrsk, Method::Kc, Method::Tkc, Method::Skc, Method::Rskc],
                    alpha: 0.30,
                });
            }
        }
        other => {
            return Err(CliError::Input(format!(
                "--study must be 1, 2, or 3 (got {other})"
            )))
        }
    }
    Ok(out)
}

fn cmd_simulate(
    cli: &Cli,
    study: Option<u8>,
    config: Option<&Path>,
    replicates: usize,
    scale: f64,
    permutations: usize,
) -> CliResult<()> {
    let started = Instant::now();
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(CliError::Input("--scale must lie in (0, 1]".into()));
    }
    let settings: Vec<StudySetting> = match (study, config) {
        (Some(study), None) => study_settings(study, scale, cli.seed)?,
        (None, Some(path)) => {
            let body = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let config: SimConfig = serde_json::from_str(&body)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let g = config.g;
            vec![StudySetting {
                name: "custom".into(),
                config,
                k_grid: Some((2..=(g + 2).max(3)).collect()),
                methods: vec![Method::Wrsk],
                alpha: 0.0,
            }]
        }
        _ => {
            return Err(CliError::Input(
                "simulate: supply exactly one of --study or --config".into(),
            ))
        }
    };

    let gap_params = GapParams {
        permutations,
        se_inflation: true,
    };
    let mut summary = vec![
        "study,setting,replicate,seed,method,selected_k,selected_s,cer,tpr,fpr,v_bar_out,v_bar_nonout,w_bar_inf,w_bar_non0,w_bar_noise"
            .to_string(),
    ];
    let study_tag = study.unwrap_or(0);

    for rep in 0..replicates {
        for (si, setting) in settings.iter().enumerate() {
            let seed = derive_seed(cli.seed, &[study_tag as u64, si as u64, rep as u64]);
            let mut config = setting.config.clone();
            config.seed = seed;
            let ds = generate(&config).map_err(algo_err)?;
            let dir = cli
                .out_dir
                .join(format!("rep_{rep:03}"))
                .join(&setting.name);
            ds.save_dir(&dir).map_err(out_err("dataset directory"))?;

            for &method in &setting.methods {
                let (model, selected_k, selected_s) = match &setting.k_grid {
                    Some(k_grid) => {
                        // full pipeline: joint (k, s) selection, then refit
                        let s_grid = default_s_grid(ds.p());
                        let base = FitConfig::new(k_grid[0], s_grid[0]).with_seed(seed);
                        let table = gap_table(ds.x.view(), k_grid, &s_grid, &gap_params, &base)
                            .map_err(algo_err)?;
                        let best = select_k(&table);
                        let cfg = FitConfig::new(best.k, best.s)
                            .with_seed(derive_seed(seed, &[best.k as u64]));
                        let model = fit(ds.x.view(), &cfg).map_err(algo_err)?;
                        (model, best.k, best.s)
                    }
                    None => {
                        let k = config.g;
                        let grid = default_s_grid(ds.p());
                        let (s_used, model) = if method.is_sparse() {
                            oracle_s_fit(method, &ds.x, &ds, k, &grid, setting.alpha, seed)
                                .map_err(algo_err)?
                        } else {
                            let sqrt_p = (ds.p() as f64).sqrt();
                            (
                                sqrt_p,
                                fit_one(method, &ds.x, k, sqrt_p, setting.alpha, seed)
                                    .map_err(algo_err)?,
                            )
                        };
                        (model, k, s_used)
                    }
                };
                let report = evaluate(&model, &ds).map_err(algo_err)?;
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                summary.push(format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    study_tag,
                    setting.name,
                    rep,
                    seed,
                    method.name(),
                    selected_k,
                    selected_s,
                    report.cer,
                    opt(report.tpr),
                    opt(report.fpr),
                    opt(report.v_bar_out),
                    opt(report.v_bar_nonout),
                    opt(report.w_bar_inf),
                    opt(report.w_bar_non0),
                    opt(report.w_bar_noise),
                ));
                if cli.verbose {
                    eprintln!(
                        "simulate: rep={rep} setting={} method={} k={selected_k} cer={:.4}",
                        setting.name,
                        method.name(),
                        report.cer
                    );
                }
            }
        }
    }

    fs::write(cli.out_dir.join("summary.csv"), summary.join("\n") + "\n")
        .map_err(out_err("summary.csv"))?;
    write_manifest(
        &cli.out_dir,
        "simulate",
        cli.seed,
        cli.jobs,
        config.iter().map(|p| p.display().to_string()).collect(),
        serde_json::json!({
            "study": study,
            "replicates": replicates,
            "scale": scale,
            "permutations": permutations,
        }),
        started,
    )?;
    Ok(())
}
