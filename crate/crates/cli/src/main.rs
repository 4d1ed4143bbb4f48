use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distractor_cli::{cmd_eval, cmd_generate, EvalArgs, GenerateArgs, EXIT_INPUT, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "distractors",
    version,
    about = "Generate and evaluate MCQ distractors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate three distractors per question-answer pair.
    Generate {
        #[arg(long)]
        articles: PathBuf,
        #[arg(long)]
        qaps: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        lexgraph: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute adequacy metrics from labelled MCQs.
    Eval {
        #[arg(long)]
        mcqs: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Generate {
            articles,
            qaps,
            vectors,
            lexgraph,
            kb,
            config,
            seed,
            out: out_path,
        } => {
            let args = GenerateArgs {
                articles,
                qaps,
                vectors,
                lexgraph,
                kb,
                config,
                seed,
                out: out_path,
            };
            cmd_generate(&args, &mut out, &mut err)
        }
        Command::Eval {
            mcqs,
            labels,
            out: out_path,
        } => cmd_eval(
            &EvalArgs {
                mcqs,
                labels,
                out: out_path,
            },
            &mut out,
            &mut err,
        ),
    };
    ExitCode::from(code)
}
