//! The `egs` command-line tool.
//!
//! Exit status: 0 on success, 2 for usage and input errors, 3 when a
//! numerical stage fails and 4 when no spectral gap is found.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use egs_core::Error;

use crate::args::{Cli, Command};
use crate::manifest::RunManifest;

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match core {
        Some(Error::NoSpectralGap) => 4,
        Some(
            Error::Unnormalized { .. }
            | Error::NonConvergence { .. }
            | Error::QuadratureOverflow { .. }
            | Error::SearchFailed
            | Error::OutOfDomain(_),
        ) => 3,
        _ => 2,
    }
}

fn run(command: Command, argv: Vec<String>) -> Result<()> {
    let name = argv.first().cloned().unwrap_or_default();
    let manifest = RunManifest::new(&name, argv.clone());
    match command {
        Command::Spectrum(a) => commands::spectrum(&a, manifest),
        Command::Clusters(a) => commands::clusters(&a, manifest),
        Command::Similarity(a) => commands::similarity(&a, manifest),
        Command::CompareBaseline(a) => commands::compare_baseline(&a, manifest),
        Command::Generate(a) => commands::generate_graph(&a, manifest),
        Command::Infer(a) => commands::infer(&a, manifest),
        Command::Classify(a) => commands::classify(&a, manifest),
        Command::Replay(a) => {
            let argv = commands::replay_argv(&a.manifest, a.out.as_deref())?;
            let full = std::iter::once("egs".to_string()).chain(argv.iter().cloned());
            let cli = Cli::try_parse_from(full)?;
            run(cli.command, argv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    // Global flags are left out so a replay does not depend on them.
    let argv = replayable_argv(std::env::args().skip(1).collect());
    match run(cli.command, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn replayable_argv(args: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--threads" {
            it.next();
        } else if !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}
