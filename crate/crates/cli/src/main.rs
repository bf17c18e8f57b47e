mod campaign;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use erwlab::exact::slit_table;
use erwlab::experiments::{glasser_zucker_constant, run_experiment, ExperimentConfig, ExperimentOutput};
use erwlab::{BiasParams, RngStream, Stepper, WalkState};
use serde_json::json;

/// Exit status for a failure, split the way scripts need it.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or campaign file: exit 2.
    Invalid(String),
    /// Anything that went wrong while running or writing: exit 3.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "erwlab", version, about = "Excited random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Debug)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to ERWLAB_WORKERS, then the core count.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the artifact selected by --format here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// One walk, one row per step.
    Simulate {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, visible_alias = "n", default_value_t = 1000)]
        steps: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Probability that the site at offset (-x,-y) from the start is tan.
    TanProb {
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long, allow_hyphen_values = true)]
        y: i64,
        /// Resolved trials for `squares`, total trials for `direct`.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value = "squares")]
        method: String,
        /// Step cap for the direct method.
        #[arg(long, visible_alias = "n")]
        steps: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Tan points collected while crossing horizontal bands.
    Band {
        /// Repeat for several heights; three or more also fit the exponent.
        #[arg(long = "height", num_args = 1.., default_values_t = vec![8i64, 16, 32, 64, 128])]
        heights: Vec<i64>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Position of the planar walk at checkpoints, scaled by n^{3/4}/log^{5/4} n.
    Drift {
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long = "n", visible_alias = "steps", num_args = 1.., default_values_t = vec![10_000u64, 100_000, 1_000_000])]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Range of simple random walk divided by n.
    Range {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, visible_alias = "steps", default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Speed X_n/n of the excited walk in d >= 4.
    Speed {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, visible_alias = "steps", default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// One-dimensional excited walk: returns and conditional advances.
    Recurrence {
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        #[arg(long, visible_alias = "n", default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 30)]
        x_max: i64,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact slit-plane walk counts.
    ExactTable {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Escape probability constant of the cubic lattice walk.
    GzConstant,
    /// Run every experiment of a campaign file.
    Campaign {
        path: PathBuf,
        /// Overrides the file's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// `--workers`, else ERWLAB_WORKERS, else the machine's parallelism.
pub fn default_workers(flag: Option<usize>) -> Result<usize, Failure> {
    let w = match flag {
        Some(w) => w,
        None => match std::env::var("ERWLAB_WORKERS") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Failure::Invalid(format!("ERWLAB_WORKERS: not a worker count: {s:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if w == 0 {
        return Err(Failure::Invalid("workers: must be at least 1".into()));
    }
    Ok(w)
}

pub fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Summary document shared by subcommands and campaigns.
pub fn summary_json(cfg: &ExperimentConfig, out: &ExperimentOutput, seed: u64, wall_ms: u128) -> String {
    let doc = json!({
        "experiment": cfg.name,
        "kind": out.kind.as_str(),
        "config": cfg,
        "summary": out.summary,
        "wall_time_ms": wall_ms as u64,
        "seed": seed,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn run_config(cfg: ExperimentConfig, common: &Common) -> Result<(), Failure> {
    cfg.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    let workers = default_workers(common.workers)?;
    let t = Instant::now();
    let out = run_experiment(&cfg, common.seed, workers).map_err(|e| Failure::Runtime(e.to_string()))?;
    let wall = t.elapsed().as_millis();
    println!("{}", out.headline);
    if let Some(path) = &common.out {
        let body = match common.format {
            Format::Csv => out.table.to_csv(),
            Format::Json => summary_json(&cfg, &out, common.seed, wall),
        };
        write_file(path, &body)?;
    }
    Ok(())
}

fn simulate(dim: usize, epsilon: f64, steps: u64, common: &Common) -> Result<(), Failure> {
    let bias = BiasParams::new(epsilon, dim).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut walk = WalkState::at_origin(bias);
    let mut rng = RngStream::new(common.seed, 0);
    let axes: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let mut csv = format!("step,fresh,{}\n", axes.join(","));
    let row = |w: &WalkState, fresh: bool, csv: &mut String| {
        let coords: Vec<String> = w.position().iter().map(|c| c.to_string()).collect();
        csv.push_str(&format!("{},{},{}\n", w.steps(), fresh, coords.join(",")));
    };
    row(&walk, true, &mut csv);
    for _ in 0..steps {
        walk.step(Stepper::Excited, &mut rng);
        let fresh = walk.is_at_first_visit();
        row(&walk, fresh, &mut csv);
    }
    println!(
        "simulate d={dim} eps={epsilon} n={steps}: final position {:?}, range {}",
        walk.position(),
        walk.range_count()
    );
    match (&common.out, common.format) {
        (Some(path), Format::Csv) => write_file(path, &csv)?,
        (Some(path), Format::Json) => {
            let doc = json!({
                "dim": dim,
                "epsilon": epsilon,
                "steps": steps,
                "seed": common.seed,
                "final_position": walk.position(),
                "range": walk.range_count(),
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            write_file(path, &s)?;
        }
        (None, _) => {}
    }
    Ok(())
}

fn exact_table(n: usize, out: Option<&Path>) -> Result<(), Failure> {
    let rows = slit_table(n).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut csv = String::from("n,a_n,a_n/4^n,ratio\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.n, r.a_n, r.survival, r.ratio));
    }
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            let last = rows.last().expect("row for n = 0");
            println!("exact-table n={}: a_n={} ratio={}", last.n, last.a_n, last.ratio);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn config(name: &str, kind: &str, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        kind: kind.into(),
        trials,
        ..Default::default()
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { dim, epsilon, steps, common } => simulate(dim, epsilon, steps, &common),
        Command::TanProb { x, y, trials, method, steps, dim, common } => {
            let mut c = config("tan-prob", "tanprob", trials);
            c.x = Some(x);
            c.y = Some(y);
            c.method = Some(method);
            c.step_cap = steps;
            if let Some(d) = dim.filter(|&d| d != 2) {
                return Err(Failure::Invalid(format!("dim: tan-prob is planar, got {d}")));
            }
            run_config(c, &common)
        }
        Command::Band { heights, trials, dim, common } => {
            let mut c = config("band", "band", trials);
            c.heights = Some(heights);
            c.dim = dim;
            run_config(c, &common)
        }
        Command::Drift { epsilon, n, trials, dim, common } => {
            let mut c = config("drift", "drift", trials);
            c.epsilon = Some(epsilon);
            c.n_list = Some(n);
            c.dim = dim;
            run_config(c, &common)
        }
        Command::Range { dim, n, trials, common } => {
            let mut c = config("range", "range", trials);
            c.dim = Some(dim);
            c.n = Some(n);
            run_config(c, &common)
        }
        Command::Speed { dim, epsilon, n, trials, common } => {
            let mut c = config("speed", "speed", trials);
            c.dim = Some(dim);
            c.epsilon = Some(epsilon);
            c.n = Some(n);
            run_config(c, &common)
        }
        Command::Recurrence { p, steps, trials, x_max, dim, common } => {
            let mut c = config("recurrence", "recurrence1d", trials);
            c.p = Some(p);
            c.step_cap = Some(steps);
            c.x_max = Some(x_max);
            c.dim = dim;
            run_config(c, &common)
        }
        Command::ExactTable { n, out } => exact_table(n, out.as_deref()),
        Command::GzConstant => {
            println!("{}", glasser_zucker_constant());
            Ok(())
        }
        Command::Campaign { path, workers } => campaign::run_campaign(&path, workers),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("erwlab: invalid input: {m}"),
                Failure::Runtime(m) => eprintln!("erwlab: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
