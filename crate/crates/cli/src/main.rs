mod args;
mod commands;
mod error;
mod output;
mod spec;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Context;
use crate::error::{CliError, CliResult};

fn resolve(cli: Cli) -> CliResult<Context> {
    match cli.command {
        Command::Rerun(r) => {
            let (mut invocation, threads) = commands::load_manifest(&r.manifest)?;
            if let Some(out) = r.out {
                invocation.set_out(out);
            }
            Ok(Context { invocation, threads: cli.threads.or(threads) })
        }
        invocation => Ok(Context { invocation, threads: cli.threads }),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let ctx = resolve(cli)?;
    if let Some(threads) = ctx.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    }
    commands::run(&ctx)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
