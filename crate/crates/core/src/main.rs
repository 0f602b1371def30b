use std::process::ExitCode;

use clap::Parser;
use mvmr_fs::cli::{self, Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MVMR_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Select(args) => cli::cmd_select(args).map(|r| {
            println!(
                "selected {} feature(s): {} (score {:.6}, avg acc {:.4})",
                r.selected_names.len(),
                r.selected_names.join(", "),
                r.mvmr_score,
                r.evaluation.avg_acc
            );
            true
        }),
        Command::Matrix(args) => cli::cmd_matrix(args).map(|_| true),
        Command::ReproduceIris(args) => cli::cmd_reproduce_iris(args).map(|r| r.all_passed()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
