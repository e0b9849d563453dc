use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use careerpath::pipeline::{self, Layout};
use careerpath::predict::predict_response;
use careerpath::server::{self, ServiceState};
use careerpath::survey::write_survey;
use careerpath::synth::{synthetic_survey, SynthConfig};
use careerpath::{AppError, AppResult, PipelineConfig};
use careerpath_core::corpus::MasterFieldTaxonomy;
use careerpath_core::model::ModelKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "careerpath",
    version,
    about = "Predict a career field from a list of skills"
)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "careerpath.toml")]
    config: PathBuf,
    /// Overrides the train/test split seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean the survey, split it and train models.
    Train {
        /// Restrict to these kinds (repeatable); defaults to the config's list.
        #[arg(long = "model")]
        models: Vec<ModelKind>,
    },
    /// Score saved artifacts on the held-out split and write reports.
    Evaluate,
    /// Print the comparison table of the saved reports.
    Compare,
    /// Rank the six career fields for a skill list.
    Predict {
        #[arg(long)]
        skills: String,
        #[arg(long)]
        model: Option<ModelKind>,
        /// Print the JSON response instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Serve predictions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Survey summary, label distribution and model comparison.
    Report,
    /// Write a synthetic survey file for trying the pipeline out.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        rows: usize,
        /// Distinct pseudo-tool names to draw noise skills from.
        #[arg(long, default_value_t = 400)]
        noise_pool: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> AppResult<()> {
    if let Command::Synth {
        out,
        rows,
        noise_pool,
    } = &cli.command
    {
        let cfg = SynthConfig {
            rows: *rows,
            noise_pool: *noise_pool,
            seed: cli.seed.unwrap_or(SynthConfig::default().seed),
            ..SynthConfig::default()
        };
        let records = synthetic_survey(&MasterFieldTaxonomy::bundled(), &cfg);
        write_survey(out, &records)?;
        println!(
            "wrote {} synthetic records to {}",
            records.len(),
            out.display()
        );
        return Ok(());
    }
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.split.seed = seed;
    }
    let layout = Layout::new(&cfg.output_dir);
    match cli.command {
        Command::Train { models } => {
            let kinds = if models.is_empty() {
                cfg.kinds()
            } else {
                models
            };
            let outcomes = pipeline::cmd_train(&cfg, &kinds)?;
            println!(
                "{:<6}{:>12}{:>10}  artifact",
                "model", "train acc", "seconds"
            );
            for o in &outcomes {
                println!(
                    "{:<6}{:>11.2}%{:>10.1}  {}",
                    o.kind.name(),
                    o.train_accuracy * 100.0,
                    o.elapsed.as_secs_f64(),
                    layout.artifact(o.kind).display()
                );
            }
        }
        Command::Evaluate => {
            let reports = pipeline::cmd_evaluate(&cfg)?;
            for r in &reports {
                println!("{}", r.to_text());
            }
            println!(
                "{}",
                pipeline::Comparison::from_reports(&reports).to_table()
            );
        }
        Command::Compare => print!("{}", pipeline::cmd_compare(&cfg)?.to_table()),
        Command::Predict {
            skills,
            model,
            json,
        } => {
            let kind = model.unwrap_or(server::DEFAULT_MODEL);
            let path = layout.artifact(kind);
            if !path.is_file() {
                return Err(AppError::ModelNotLoaded(kind));
            }
            let artifact = careerpath::ModelArtifact::load(&path)?;
            let response = predict_response(&artifact, &skills)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&response).expect("response serializes")
                );
            } else {
                print!("{response}");
            }
        }
        Command::Serve { bind } => {
            let state = ServiceState::new(
                pipeline::load_artifacts(&layout)?,
                pipeline::load_reports(&layout)?,
                cfg.load_taxonomy()?,
            )?;
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| AppError::io("tokio runtime", e))?;
            runtime.block_on(server::serve(Arc::new(state), &bind))?;
        }
        Command::Report => print!("{}", pipeline::cmd_report(&cfg)?),
        Command::Synth { .. } => unreachable!("handled before the config is read"),
    }
    Ok(())
}
