use std::path::{Path, PathBuf};

use clap::Parser;

use crate::{run, Cli, Failure};

pub fn run_args(args: &[&str]) -> Result<(), Failure> {
    let cli = Cli::try_parse_from(std::iter::once("rolemodel").chain(args.iter().copied()))
        .map_err(|e| Failure::input(e.to_string()))?;
    run(cli)
}

/// A small synthetic setup that runs every subcommand in well under a second.
pub const SMALL: &str = r#"
seed = 3
[model]
states = 3
topics = 4
[sampler]
sweeps = 20
burn_in = 10
[synth]
sequences = 30
length = 4
vocab_size = 40
discussions = 12
per_user = 4
[recommend]
epochs = 30
"#;

pub fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, body).unwrap();
    p
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
