mod commands;
mod config;
mod table;

use std::hash::{BuildHasher, RandomState};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use commands::Failure;
use config::{Cli, Echo, Format};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;

fn fresh_seed() -> u64 {
    let t = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    // Keep seeds exactly representable as JSON numbers in other tools.
    RandomState::new().hash_one((t, std::process::id())) >> 11
}

fn sibling_config(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(argv: Vec<String>) -> Result<(), Failure> {
    let argv = config::merge_argv(argv).map_err(Failure::Usage)?;
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version come through here with exit code 0.
            return if e.exit_code() == 0 { Ok(()) } else { Err(Failure::Usage(String::new())) };
        }
    };
    if cli.global.seed.is_none() {
        let s = fresh_seed();
        eprintln!("trapspectra: no seed given, using {s}");
        cli.global.seed = Some(s);
    }
    commands::resolve(&mut cli);
    if cli.global.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.workers)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let table = commands::run(&cli)?;
    let echo = Echo::new(&cli);
    match cli.global.format {
        Format::Json => {
            let text = table.to_json(echo.to_value());
            match &cli.global.out {
                Some(p) => write_file(p, &text)?,
                None => print!("{text}"),
            }
        }
        Format::Csv => {
            let mut conf = serde_json::to_string_pretty(&echo).expect("config serializes");
            conf.push('\n');
            match &cli.global.out {
                Some(p) => {
                    write_file(p, &table.to_csv())?;
                    write_file(&sibling_config(p), &conf)?;
                }
                None => {
                    print!("{}", table.to_csv());
                    eprint!("{conf}");
                }
            }
        }
    }
    std::io::stdout().flush().map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            if !msg.is_empty() {
                eprintln!("trapspectra: {msg}");
            }
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("trapspectra: {msg}");
            ExitCode::from(EXIT_OTHER)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("trapspectra: {e}");
            let code = if e.is_numeric_guard() {
                EXIT_GUARD
            } else if matches!(e, trapspectra::Error::InvalidParameter(_) | trapspectra::Error::Parse(_)) {
                EXIT_USAGE
            } else {
                EXIT_OTHER
            };
            ExitCode::from(code)
        }
    }
}
