use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use sentlex::commands::{exit_code, expand_config_args, run, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<sentlex::error::Error>())
                .map_or(1, exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let args = expand_config_args(std::env::args().collect()).context("reading --config")?;
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap renders help and version through the error path too.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    run(&config)?;
    Ok(())
}
