//! Command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use groupcart::cli::{
    cmd_compare, cmd_evaluate, cmd_sweep, cmd_synth, cmd_train, load_dataset, objective_from_name,
    ConfigDraft, Method,
};
use groupcart::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "groupcart",
    version,
    about = "Fairness-aware decision-tree ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Configuration file ([section] headers, key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV dataset path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Target column name.
    #[arg(long)]
    target: Option<String>,
    /// Raw target value mapped to the favorable label 1.
    #[arg(long)]
    favorable: Option<String>,
    /// Protected attribute as name=privileged:unprivileged (repeatable).
    #[arg(long = "protected", value_name = "NAME=PRIV:UNPRIV")]
    protected: Vec<String>,
    /// Ensemble pool size N.
    #[arg(long = "ensemble-size")]
    ensemble_size: Option<usize>,
    /// Training mode.
    #[arg(long, value_parser = ["plain", "adaboost"])]
    mode: Option<String>,
    /// Domination relation for frontier selection.
    #[arg(long, value_parser = ["binary", "continuous"])]
    domination: Option<String>,
    /// Objective metrics, comma separated.
    #[arg(long)]
    objectives: Option<String>,
    /// Number of repeats.
    #[arg(long)]
    repeats: Option<usize>,
    /// Base random seed (falls back to GROUPCART_SEED, then 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Share of the IGS budget per protected attribute, comma separated.
    #[arg(long = "pa-proportions")]
    pa_proportions: Option<String>,
    /// Synthetic data source: number of rows.
    #[arg(long = "synthetic-rows")]
    synthetic_rows: Option<usize>,
    /// Synthetic data source: label bias strength in `[0,1]`.
    #[arg(long = "synthetic-bias")]
    synthetic_bias: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an ensemble and write the model bundle plus frontier export.
    Train(CommonArgs),
    /// Evaluate a stored model bundle on a dataset.
    Evaluate {
        /// Model bundle written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare methods over repeated shared splits with Scott-Knott ranks.
    Compare {
        /// Methods: cart, groupcart, groupcart_adaboost (comma separated).
        #[arg(long, default_value = "cart,groupcart")]
        methods: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train at several ensemble sizes and report flip rate and d2h.
    Sweep {
        /// Ascending ensemble sizes, comma separated.
        #[arg(long, default_value = "5,10,20")]
        sizes: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic biased dataset as CSV.
    Synth {
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = 0.4)]
        bias: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn draft_from(common: &CommonArgs) -> Result<ConfigDraft> {
    let mut draft = ConfigDraft {
        data_path: common.data.clone(),
        synthetic_rows: common.synthetic_rows,
        synthetic_bias: common.synthetic_bias,
        target: common.target.clone(),
        favorable: common.favorable.clone(),
        seed: common.seed,
        repeats: common.repeats,
        size: common.ensemble_size,
        out_dir: common.out.clone(),
        ..ConfigDraft::default()
    };
    for decl in &common.protected {
        let (name, value) = decl.split_once('=').ok_or_else(|| {
            Error::Config(format!("--protected {decl:?} is not NAME=PRIV:UNPRIV"))
        })?;
        let (privileged, unprivileged) = value.split_once(':').ok_or_else(|| {
            Error::Config(format!("--protected {decl:?} is not NAME=PRIV:UNPRIV"))
        })?;
        draft.protected.push(groupcart::data::ProtectedSpec::new(
            name,
            privileged,
            unprivileged,
        )?);
    }
    if let Some(mode) = &common.mode {
        draft.mode = Some(mode.parse()?);
    }
    if let Some(dom) = &common.domination {
        draft.domination = Some(dom.parse()?);
    }
    if let Some(objectives) = &common.objectives {
        draft.objectives = Some(
            objectives
                .split(',')
                .map(|n| objective_from_name(n.trim()))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if let Some(props) = &common.pa_proportions {
        draft.pa_proportions = Some(
            props
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad proportion {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        draft.merge_file(&text)?;
    }
    Ok(draft)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(common) => {
            let cfg = draft_from(&common)?.finalize()?;
            let out = cmd_train(&cfg)?;
            println!("model bundle: {}", out.model_path.display());
            println!("frontier:     {}", out.frontier_path.display());
            println!(
                "members {} frontier {}",
                out.model.members.len(),
                out.model.frontier.len()
            );
        }
        Command::Evaluate { model, common } => {
            let cfg = draft_from(&common)?.finalize()?;
            let data = load_dataset(&cfg)?;
            let out = cmd_evaluate(&model, &data, &cfg.out_dir, cfg.report_decimals)?;
            print!("{}", out.text);
            println!("report: {}", out.report_path.display());
        }
        Command::Compare { methods, common } => {
            let cfg = draft_from(&common)?.finalize()?;
            let methods: Vec<(String, Method)> = methods
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    Ok((name.to_string(), name.parse::<Method>()?))
                })
                .collect::<Result<Vec<_>>>()?;
            let out = cmd_compare(&cfg, &methods)?;
            for pa in &out.report.pa_names {
                print!("{}", out.report.render_text(pa)?);
            }
            for file in &out.files {
                println!("wrote {}", file.display());
            }
        }
        Command::Sweep { sizes, common } => {
            let cfg = draft_from(&common)?.finalize()?;
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad ensemble size {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let out = cmd_sweep(&cfg, &sizes)?;
            print!("{}", out.text);
            for file in &out.files {
                println!("wrote {}", file.display());
            }
        }
        Command::Synth {
            rows,
            bias,
            seed,
            out,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => match std::env::var("GROUPCART_SEED") {
                    Ok(v) => v.parse().map_err(|_| {
                        Error::Config(format!("GROUPCART_SEED={v:?} is not a number"))
                    })?,
                    Err(_) => 42,
                },
            };
            cmd_synth(rows, bias, seed, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("groupcart: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
