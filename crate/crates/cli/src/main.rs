mod analyze;
mod args;
mod evaluate;
mod exit;
mod manual_cmd;
mod pipeline;
mod settings;

use clap::error::ErrorKind;
use clap::Parser;

use args::{AnalyzeCommand, Cli, Command, ManualCommand};
use exit::{CliResult, ExitCode};

fn run(cli: Cli) -> CliResult<()> {
    let config = settings::resolve(&cli.overrides)?;
    match cli.command {
        Command::Manual(ManualCommand::Validate) => manual_cmd::validate(&config),
        Command::Manual(ManualCommand::Score { format }) => manual_cmd::score(&config, format),
        Command::Sample(a) => pipeline::sample(&config, &a),
        Command::BuildPrompts(a) => pipeline::build_prompts(&config, &a),
        Command::Classify(a) => pipeline::classify(&config, &a),
        Command::Evaluate(a) => evaluate::evaluate(&config, &a),
        Command::Analyze(AnalyzeCommand::Strategy(a)) => analyze::strategy(&config, &a),
        Command::Analyze(AnalyzeCommand::Brackets(a)) => analyze::brackets(&config, &a),
        Command::Report(a) => analyze::report(&config, &a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => ExitCode::Usage as i32,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(failure) = run(cli) {
        eprintln!("error: {:#}", failure.error);
        std::process::exit(failure.code as i32);
    }
}
