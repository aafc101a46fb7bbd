use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::value::{Error as DeError, StrDeserializer};
use serde::de::DeserializeOwned;

use bfe::harness::{compare_runs, run_experiment, summarize, CompareFile, HarnessError, RunConfig};
use bfe::trace::read_trace;

#[derive(Parser)]
#[command(name = "bfe", version, about = "Run and compare learning-rate search experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one optimizer on one problem and write its trace.
    Optimize(Box<OptimizeArgs>),
    /// Run every `[[run]]` table of a TOML file and print a steps-to-threshold table.
    Compare {
        file: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Summarize an existing trace file.
    Summary {
        trace: PathBuf,
        #[arg(long)]
        threshold: f64,
    },
}

#[derive(Args)]
struct OptimizeArgs {
    /// TOML file with a base configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    epsilon_v_policy: Option<String>,
    #[arg(long)]
    commit_policy: Option<String>,
    #[arg(long)]
    reset_policy: Option<String>,
    #[arg(long)]
    base: Option<u32>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    angle_threshold_deg: Option<f64>,
    #[arg(long)]
    threshold_mode: Option<String>,
    #[arg(long)]
    zoom_out_exit: Option<String>,
    #[arg(long)]
    pre_halve: bool,
    #[arg(long)]
    force_zoom_in: bool,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    lim_zero: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    normalize: bool,
    /// Comma-separated diagonal of the quadratic problem.
    #[arg(long, value_delimiter = ',')]
    curvatures: Option<Vec<f64>>,
    #[arg(long)]
    loss_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Accepts `half-step`, `half_step` and `HALF_STEP` alike.
fn parse_name<T: DeserializeOwned>(flag: &str, s: &str) -> Result<T, HarnessError> {
    let norm = s.trim().to_ascii_lowercase().replace('_', "-");
    T::deserialize(StrDeserializer::<DeError>::new(&norm))
        .map_err(|e| HarnessError::Config(format!("--{flag} {s}: {e}")))
}

macro_rules! set {
    ($cfg:ident . $field:ident, $v:expr) => {
        if let Some(v) = $v {
            $cfg.$field = v;
        }
    };
}

impl OptimizeArgs {
    fn into_config(self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = &self.optimizer {
            cfg.optimizer = parse_name("optimizer", s)?;
        }
        if let Some(s) = &self.problem {
            cfg.problem = parse_name("problem", s)?;
        }
        if let Some(s) = &self.epsilon_v_policy {
            cfg.epsilon_v_policy = parse_name("epsilon-v-policy", s)?;
        }
        if let Some(s) = &self.commit_policy {
            cfg.commit_policy = parse_name("commit-policy", s)?;
        }
        if let Some(s) = &self.reset_policy {
            cfg.reset_policy = parse_name("reset-policy", s)?;
        }
        if let Some(s) = &self.threshold_mode {
            cfg.threshold_mode = parse_name("threshold-mode", s)?;
        }
        if let Some(s) = &self.zoom_out_exit {
            cfg.zoom_out_exit = parse_name("zoom-out-exit", s)?;
        }
        set!(cfg.eta0, self.eta0);
        set!(cfg.epsilon, self.epsilon);
        set!(cfg.base, self.base);
        set!(cfg.max_inner, self.max_inner);
        set!(cfg.angle_threshold_deg, self.angle_threshold_deg);
        set!(cfg.batch_size, self.batch_size);
        set!(cfg.seed, self.seed);
        set!(cfg.max_steps, self.max_steps);
        set!(cfg.lim_zero, self.lim_zero);
        set!(cfg.beta, self.beta);
        set!(cfg.alpha, self.alpha);
        set!(cfg.w0, self.w0);
        set!(cfg.b0, self.b0);
        set!(cfg.noise_std, self.noise_std);
        set!(cfg.n_samples, self.n_samples);
        set!(cfg.curvatures, self.curvatures);
        cfg.pre_halve |= self.pre_halve;
        cfg.force_zoom_in |= self.force_zoom_in;
        cfg.normalize |= self.normalize;
        if self.loss_threshold.is_some() {
            cfg.loss_threshold = self.loss_threshold;
        }
        if self.out.is_some() {
            cfg.output_path = self.out;
        }
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), HarnessError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| HarnessError::Config(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Optimize(args) => {
            let cfg = args.into_config()?;
            let res = run_experiment(&cfg)?;
            print_json(&res.summary)
        }
        Cmd::Compare { file, threshold } => {
            let text = fs::read_to_string(&file)?;
            let cf: CompareFile =
                toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", file.display())))?;
            let threshold = threshold
                .or(cf.loss_threshold)
                .or_else(|| cf.runs.first().map(|c| c.resolved_loss_threshold()))
                .ok_or_else(|| HarnessError::Config("no runs in comparison file".into()))?;
            let table = compare_runs(&cf.runs, threshold)?;
            table.write_csv(io::stdout().lock()).map_err(|e| HarnessError::Io(io::Error::other(e)))
        }
        Cmd::Summary { trace, threshold } => {
            let t = read_trace(BufReader::new(File::open(&trace)?))?;
            print_json(&summarize(&t.records, threshold))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
