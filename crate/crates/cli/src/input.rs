use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ncgsat::{parse_dimacs, parse_formula, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Infix formula text.
    Bool,
    /// DIMACS CNF.
    Cnf,
}

impl Format {
    fn detect(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "cnf" | "dimacs" => Some(Format::Cnf),
            "bool" => Some(Format::Bool),
            _ => None,
        }
    }
}

/// Reads and parses `path` (`-` for stdin), picking the format from the
/// extension unless `format` is given.
pub fn load(path: &Path, format: Option<Format>) -> Result<Formula> {
    let format = match format.or_else(|| Format::detect(path)) {
        Some(f) => f,
        None => bail!("cannot tell the format of {} from its extension; pass --format bool|cnf", path.display()),
    };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let parsed = match format {
        Format::Bool => parse_formula(&text).map_err(anyhow::Error::from),
        Format::Cnf => parse_dimacs(&text).map_err(anyhow::Error::from),
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}
