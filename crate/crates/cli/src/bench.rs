use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ncgsat::gen::{random_formula, random_kcnf, FormulaParams, OpWeights};
use ncgsat::{gsat_run, Backend, Formula, SearchConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::input::{self, Format};

/// A sweep over instance families, variants, walk probabilities and
/// backends. Every combination is run `runs` times.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default = "default_tries")]
    pub max_tries: u32,
    #[serde(default = "default_flips")]
    pub max_flips: u32,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_walk_probs")]
    pub walk_probs: Vec<f64>,
    #[serde(default = "default_backends")]
    pub backends: Vec<Backend>,
    #[serde(default, rename = "family")]
    pub families: Vec<Family>,
}

fn default_runs() -> u32 {
    10
}

fn default_tries() -> u32 {
    10
}

fn default_flips() -> u32 {
    100
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Gsat]
}

fn default_walk_probs() -> Vec<f64> {
    vec![0.0]
}

fn default_backends() -> Vec<Backend> {
    vec![Backend::NonClausal]
}

#[derive(Debug, Deserialize)]
pub struct Family {
    pub name: String,
    /// Distinct generated instances; run `r` uses instance `r % instances`.
    #[serde(default = "default_instances")]
    pub instances: u32,
    #[serde(flatten)]
    pub source: Source,
}

fn default_instances() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Kcnf {
        vars: usize,
        clauses: usize,
        width: usize,
    },
    Formula {
        depth: usize,
        arity: usize,
        vars: usize,
        #[serde(default)]
        weights: OpWeights,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub family: String,
    pub variant: Variant,
    pub walk_prob: f64,
    pub backend: Backend,
    pub runs: u32,
    pub successes: u32,
    pub success_rate: f64,
    pub mean_flips: f64,
    pub mean_work_per_flip: f64,
    pub wall_ms: f64,
}

pub const COLUMNS: [&str; 10] = [
    "family",
    "variant",
    "walk_prob",
    "backend",
    "runs",
    "successes",
    "success_rate",
    "mean_flips",
    "mean_work_per_flip",
    "wall_ms",
];

pub fn load_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn instances(family: &Family, base_dir: &Path, seed: u64) -> Result<Vec<Formula>> {
    let count = family.instances.max(1);
    match &family.source {
        Source::Kcnf { vars, clauses, width } => {
            (0..count).map(|i| Ok(random_kcnf(*vars, *clauses, *width, seed.wrapping_add(u64::from(i)))?)).collect()
        }
        Source::Formula { depth, arity, vars, weights } => {
            let params = FormulaParams { depth: *depth, arity: *arity, vars: *vars, weights: *weights };
            (0..count).map(|i| Ok(random_formula(&params, seed.wrapping_add(u64::from(i)))?)).collect()
        }
        Source::File { path } => {
            let path = base_dir.join(path);
            let format = if path.extension().is_some_and(|e| e == "cnf") { Format::Cnf } else { Format::Bool };
            Ok(vec![input::load(&path, Some(format))?])
        }
    }
}

/// Runs the sweep. Paths of file families are relative to `base_dir`.
pub fn run(cfg: &BenchConfig, base_dir: &Path) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for family in &cfg.families {
        let formulas =
            instances(family, base_dir, cfg.seed).with_context(|| format!("building family `{}`", family.name))?;
        for &variant in &cfg.variants {
            for &walk_prob in &cfg.walk_probs {
                for &backend in &cfg.backends {
                    let start = Instant::now();
                    let (mut successes, mut flips, mut work) = (0u32, 0u64, 0u64);
                    for r in 0..cfg.runs {
                        let f = &formulas[r as usize % formulas.len()];
                        let search = SearchConfig {
                            max_tries: cfg.max_tries,
                            max_flips: cfg.max_flips,
                            variant,
                            walk_probability: walk_prob,
                            seed: cfg.seed.wrapping_add(u64::from(r)),
                            backend,
                            ..Default::default()
                        };
                        let result =
                            gsat_run(f, &search).with_context(|| format!("family `{}`, run {r}", family.name))?;
                        successes += u32::from(result.model().is_some());
                        flips += result.flips_used;
                        work += result.update_work;
                    }
                    let runs = f64::from(cfg.runs.max(1));
                    rows.push(Row {
                        family: family.name.clone(),
                        variant,
                        walk_prob,
                        backend,
                        runs: cfg.runs,
                        successes,
                        success_rate: f64::from(successes) / runs,
                        mean_flips: flips as f64 / runs,
                        mean_work_per_flip: if flips == 0 { 0.0 } else { work as f64 / flips as f64 },
                        wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
