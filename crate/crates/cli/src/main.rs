mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };

    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("panelcheck: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }

    let echo = output::command_echo(std::env::args_os().skip(1));
    let result = commands::run(&cli.common, &cli.command, echo).and_then(|outcome| {
        outcome.artifacts.commit(cli.common.out.as_deref(), &outcome.primary)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => match e.downcast_ref::<panelcheck::Error>() {
            // library errors already name their cause
            Some(err) => {
                eprintln!("panelcheck: {err}");
                ExitCode::from(if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT })
            }
            None => {
                eprintln!("panelcheck: {e:#}");
                ExitCode::from(EXIT_INPUT)
            }
        },
    }
}
