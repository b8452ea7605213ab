//! Experiment runner: parse a config, dispatch to the library, persist CSV
//! artifacts plus a digest manifest.
//!
//! ```text
//! limsup-lab <command> --config <file> [--seed N] [--out DIR]
//! limsup-lab fixtures [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 hypothesis/precondition failure, 3 budget
//! exhaustion, 1 anything else.

use limsup_lab::config::{parse_config, Command};
use limsup_lab::{fixtures, run};
use std::path::PathBuf;
use std::process::ExitCode;

struct Args {
    command: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
}

fn usage() -> ! {
    eprintln!(
        "usage: limsup-lab <command> --config <file> [--seed N] [--out DIR]\n\
         commands: dim_eval dim_search solve certify measure_scan box_dim series ubiquity fixtures"
    );
    std::process::exit(1)
}

fn parse_args() -> Args {
    let mut argv = std::env::args().skip(1);
    let Some(command) = argv.next() else { usage() };
    let mut args =
        Args { command, config: None, seed: None, out: PathBuf::from(".") };
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(argv.next().unwrap_or_else(|| usage()))),
            "--seed" => {
                let v = argv.next().unwrap_or_else(|| usage());
                match v.parse() {
                    Ok(s) => args.seed = Some(s),
                    Err(_) => usage(),
                }
            }
            "--out" => args.out = PathBuf::from(argv.next().unwrap_or_else(|| usage())),
            _ => usage(),
        }
    }
    args
}

fn main() -> ExitCode {
    let args = parse_args();

    if args.command == "fixtures" {
        return match fixtures::emit_fixture_suite(&args.out) {
            Ok(paths) => {
                println!("wrote {} fixture files under {}", paths.len(), args.out.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    let Some(cmd) = Command::from_token(&args.command) else {
        eprintln!("error: unknown command `{}`", args.command);
        return ExitCode::from(1);
    };
    let Some(config_path) = args.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(1);
    };
    let mut text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };
    // a --seed flag overrides the config seed before parsing, so the manifest
    // hash always reflects the seed that actually ran
    if let Some(seed) = args.seed {
        text = text
            .lines()
            .filter(|l| l.split_once('=').map(|(k, _)| k.trim() != "seed").unwrap_or(true))
            .collect::<Vec<_>>()
            .join("\n");
        text.push_str(&format!("\nseed={seed}\n"));
    }
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if config.command != cmd {
        eprintln!(
            "error: config says `{}` but the command line says `{}`",
            config.command.token(),
            args.command
        );
        return ExitCode::from(1);
    }

    match run::run(&config, &args.out) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for a in &outcome.artifacts {
                println!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
