//! Command line front end; see `tree-qaoa --help`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treeqaoa::anneal::{linear_schedule, Schedule};
use treeqaoa::experiments::{
    cmd_anneal, cmd_concentration, cmd_evaluate, cmd_gen, cmd_tree_train, cmd_vanilla_train, default_out_dir,
    fitted_from_tree, load_instances, tree_spec_for, GeneratorSpec, TreeParamsFile, VanillaOptions,
};
use treeqaoa::instance::Family;
use treeqaoa::optimizer::{Method, TrainOptions};
use treeqaoa::statevector::DisorderMode;
use treeqaoa::{Error, Result};

#[derive(Parser)]
#[command(name = "tree-qaoa", version, about = "QAOA parameters from tree tensor networks, plus the experiments to check them")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "TREEQAOA_THREADS")]
    threads: Option<usize>,
    /// Memory cap for contraction intermediates, in GiB.
    #[arg(long = "mem-cap", global = true, default_value_t = 8.0)]
    mem_cap: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: runs/<command>-<time>-s<seed>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
        /// Number of instances.
        #[arg(long = "M", default_value_t = 100)]
        m: usize,
    },
    /// Optimize tree-QAOA angles for p = 1..p_max.
    TreeTrain {
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long = "p-max")]
        p_max: usize,
        /// Coupling convention of the tree (maxcut3reg: 1/2, others: +1).
        #[arg(long)]
        family: Option<Family>,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Evaluate tree parameters on instances, optionally with disorder.
    Evaluate {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        params: PathBuf,
        /// Depths to evaluate (default: all in the parameter file).
        #[arg(long, value_delimiter = ',')]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        /// Redraw the disorder offsets in every block.
        #[arg(long)]
        per_block: bool,
    },
    /// Train QAOA on every instance separately.
    VanillaTrain {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        optim: OptimArgs,
        #[command(flatten)]
        starts: StartArgs,
    },
    /// Anneal every instance with the given schedules over a time grid.
    Anneal {
        #[arg(long)]
        instances: PathBuf,
        /// `linear`, `fitted` (needs --params) or a schedule JSON file.
        #[arg(long, value_delimiter = ',', default_values_t = ["linear".to_string(), "fitted".to_string()])]
        schedule: Vec<String>,
        /// Tree parameter file to fit the schedule to.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long = "T-grid", value_delimiter = ',')]
        t_grid: Vec<f64>,
        /// Fixed integration step count (default: at least max(2000, 200 T), more
        /// where needed to keep the norm drift below 5e-9).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Spread of optimal angles across instance sizes.
    Concentration {
        #[arg(long, default_value = "glass4reg")]
        family: Family,
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 10, 12, 14])]
        n: Vec<usize>,
        #[arg(long = "M", default_value_t = 30)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[command(flatten)]
        optim: OptimArgs,
        #[command(flatten)]
        starts: StartArgs,
    },
}

#[derive(Args)]
struct OptimArgs {
    /// `adam` or `bfgs`.
    #[arg(long, default_value = "bfgs")]
    method: Method,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Args)]
struct StartArgs {
    #[arg(long, default_value_t = 1)]
    random_starts: usize,
    /// Also start from a small-angle annealing-like point.
    #[arg(long)]
    annealing_start: bool,
}

impl OptimArgs {
    fn options(&self, mem_cap_gib: f64) -> TrainOptions {
        let mut o = TrainOptions::with_method(self.method);
        if let Some(k) = self.max_iters {
            o.adam.stop.max_iters = k;
            o.lbfgs.stop.max_iters = k;
        }
        if let Some(lr) = self.lr {
            o.adam.lr = lr;
        }
        o.planner.memory_cap_bytes = (mem_cap_gib * (1u64 << 30) as f64) as usize;
        o
    }
}

impl StartArgs {
    fn options(&self, train: TrainOptions) -> VanillaOptions {
        VanillaOptions { train, random_starts: self.random_starts, annealing_start: self.annealing_start }
    }
}

fn load_schedules(names: &[String], params: Option<&Path>) -> Result<Vec<Schedule>> {
    names
        .iter()
        .map(|name| match name.as_str() {
            "linear" => Ok(linear_schedule()),
            "fitted" => match params {
                Some(p) => fitted_from_tree(&TreeParamsFile::load(p)?),
                None => Err(Error::Input("the fitted schedule needs --params".into())),
            },
            path => Schedule::load_json(path),
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    }
    if !(cli.mem_cap > 0.0) {
        return Err(Error::Input(format!("--mem-cap must be positive, got {}", cli.mem_cap)));
    }
    let seed = cli.seed;
    let out = |name: &str| cli.out.clone().unwrap_or_else(|| default_out_dir(name, seed));
    match &cli.command {
        Command::Gen { family, n, rows, cols, degree, m } => {
            let spec = GeneratorSpec { family: *family, n: *n, rows: *rows, cols: *cols, degree: *degree };
            let dir = out("gen");
            let paths = cmd_gen(&spec, *m, seed, &dir)?;
            println!("wrote {} instances to {}", paths.len(), dir.display());
        }
        Command::TreeTrain { degree, p_max, family, optim } => {
            let dir = out("tree-train");
            let spec = tree_spec_for(*degree, *family)?;
            let file = cmd_tree_train(&spec, *p_max, &optim.options(cli.mem_cap), seed, &dir)?;
            for s in &file.stages {
                println!("p={} qubits={} e_g={:.12} peak_rank={}", s.p, s.qubits, s.e_g, s.plan.peak_rank);
            }
            println!("wrote {}", dir.join("tree_params.json").display());
        }
        Command::Evaluate { instances, params, p, sigma, per_block } => {
            let dir = out("evaluate");
            let mode = if *per_block { DisorderMode::PerBlock } else { DisorderMode::PerTerm };
            let rows = cmd_evaluate(&load_instances(instances)?, &TreeParamsFile::load(params)?, p, sigma, mode, seed, &dir)?;
            println!("wrote {} rows to {}", rows.len(), dir.join("evaluate.csv").display());
        }
        Command::VanillaTrain { instances, p, optim, starts } => {
            let dir = out("vanilla-train");
            let opts = starts.options(optim.options(cli.mem_cap));
            let rows = cmd_vanilla_train(&load_instances(instances)?, *p, &opts, seed, &dir)?;
            let mean = rows.iter().map(|r| r.residual_energy).sum::<f64>() / rows.len() as f64;
            println!("mean residual energy {mean:.6}; wrote {}", dir.join("vanilla.csv").display());
        }
        Command::Anneal { instances, schedule, params, t_grid, steps } => {
            let dir = out("anneal");
            let schedules = load_schedules(schedule, params.as_deref())?;
            let rows = cmd_anneal(&load_instances(instances)?, &schedules, t_grid, *steps, seed, &dir)?;
            println!("wrote {} rows to {}", rows.len(), dir.join("anneal.csv").display());
        }
        Command::Concentration { family, n, m, p, optim, starts } => {
            let dir = out("concentration");
            let opts = starts.options(optim.options(cli.mem_cap));
            for s in cmd_concentration(*family, n, *m, *p, &opts, seed, &dir)? {
                println!("n={:>3} M={} gamma_1 mean={:.4} var={:.4e}", s.n, s.instances, s.mean_gamma_1, s.var_gamma_1);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
