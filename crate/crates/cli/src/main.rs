use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use parclust::{bench, run, validate, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = validate(&cli.command) {
        let mut app = Cli::command();
        app.build();
        let sub = app
            .find_subcommand_mut(cli.command.name())
            .expect("known subcommand");
        sub.error(ErrorKind::ArgumentConflict, msg).exit();
    }
    let result = match &cli.command {
        Command::Bench(args) => bench(args, &mut std::io::stdout().lock()),
        cmd => run(cmd).map(|w| {
            for f in w.files {
                println!("{}", f.display());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
