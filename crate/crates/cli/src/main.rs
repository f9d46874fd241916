mod bench;
mod input;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ncgsat::cnf::{cnf_standard_with_guard, CnfError, DEFAULT_CLAUSE_GUARD};
use ncgsat::gen::{random_formula, random_kcnf, FormulaParams, OpWeights};
use ncgsat::oracle::{enumerate, MAX_ENUMERATION_VARS};
use ncgsat::search::random_assignment;
use ncgsat::{
    cnf_definitional, cnf_standard, count_false_clauses, eval_scores, gsat_run, Assignment, Backend, Formula,
    SearchConfig, Variant,
};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use input::Format;

const EXIT_SAT: u8 = 10;
const EXIT_EXHAUSTED: u8 = 20;
const EXIT_ERROR: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "ncgsat", version, about = "GSAT local search on non-clausal propositional formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a model. Exits 10 when one is found, 20 when the tries run out.
    Solve(SolveArgs),
    /// Convert to DIMACS CNF, reporting the size of the result on stderr.
    Convert(ConvertArgs),
    /// Generate a random instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Cross-check the score engine against brute force on one input.
    Check(CheckArgs),
    /// Run a benchmark sweep described by a TOML file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input file (`.bool` formula text or `.cnf` DIMACS), or `-` for stdin.
    path: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum, env = "NCGSAT_FORMAT")]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10, env = "NCGSAT_MAX_TRIES")]
    max_tries: u32,
    #[arg(long, default_value_t = 100, env = "NCGSAT_MAX_FLIPS")]
    max_flips: u32,
    /// One of gsat, csat, dsat, rsat, msat.
    #[arg(long, default_value = "gsat", env = "NCGSAT_VARIANT")]
    variant: Variant,
    /// Probability of a random-walk step instead of hill climbing.
    #[arg(long, default_value_t = 0.0, env = "NCGSAT_WALK_PROB")]
    walk_prob: f64,
    /// Seed later tries with the agreement of the last two tries' best assignments.
    #[arg(long, env = "NCGSAT_AVERAGING_IN")]
    averaging_in: bool,
    #[arg(long, default_value_t = 0, env = "NCGSAT_SEED")]
    seed: u64,
    /// `nc` scores the formula tree; `clausal` runs plain GSAT on its standard CNF.
    #[arg(long, default_value = "nc", env = "NCGSAT_BACKEND")]
    backend: Backend,
    /// Print the JSON stats record instead of the model.
    #[arg(long, env = "NCGSAT_JSON")]
    json: bool,
    /// Record the flipped variables (in the JSON record, or on stderr).
    #[arg(long, env = "NCGSAT_TRACE")]
    trace: bool,
    /// Run tries on this many threads.
    #[arg(long, default_value_t = 0, env = "NCGSAT_PARALLEL_TRIES")]
    parallel_tries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Standard,
    Definitional,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "standard", env = "NCGSAT_MODE")]
    mode: Mode,
    /// Definitional mode: define subformulas only in the polarities they occur in.
    #[arg(long, env = "NCGSAT_POLARITY")]
    polarity: bool,
    /// Definitional mode: write the fresh-variable map as JSON to this file.
    #[arg(long)]
    name_map: Option<PathBuf>,
    /// Clause limit for the standard conversion.
    #[arg(long, default_value_t = DEFAULT_CLAUSE_GUARD, env = "NCGSAT_CLAUSE_GUARD")]
    guard: u64,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Uniform random k-CNF in DIMACS.
    Kcnf {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 0, env = "NCGSAT_SEED")]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random formula tree in infix text.
    Formula {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long)]
        vars: usize,
        /// Node kind weights as `kind=weight` pairs, e.g. `and=1,or=1,iff=0`.
        #[arg(long, value_parser = parse_weights)]
        weights: Option<OpWeights>,
        #[arg(long, default_value_t = 0, env = "NCGSAT_SEED")]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Also compare scores under every assignment and count models.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0, env = "NCGSAT_SEED")]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    output_format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<OpWeights, String> {
    let mut w = OpWeights { leaf: 0.0, not: 0.0, and: 0.0, or: 0.0, implies: 0.0, iff: 0.0 };
    for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair.split_once('=').ok_or_else(|| format!("`{pair}` is not kind=weight"))?;
        let value: f64 = value.trim().parse().map_err(|_| format!("bad weight in `{pair}`"))?;
        let slot = match key.trim() {
            "leaf" => &mut w.leaf,
            "not" => &mut w.not,
            "and" => &mut w.and,
            "or" => &mut w.or,
            "implies" => &mut w.implies,
            "iff" => &mut w.iff,
            other => return Err(format!("unknown node kind `{other}`")),
        };
        *slot = value;
    }
    Ok(w)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn model_lines(f: &Formula, model: &Assignment) -> String {
    f.names().iter().zip(model.values()).map(|(name, &b)| format!("{name}={}\n", u8::from(b))).collect()
}

fn solve(args: SolveArgs) -> Result<u8> {
    let f = input::load(&args.input.path, args.input.format)?;
    let cfg = SearchConfig {
        max_tries: args.max_tries,
        max_flips: args.max_flips,
        variant: args.variant,
        walk_probability: args.walk_prob,
        averaging_in: args.averaging_in,
        seed: args.seed,
        backend: args.backend,
        record_trace: args.trace,
        parallel_tries: args.parallel_tries,
    };
    let start = Instant::now();
    let result = gsat_run(&f, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    if args.json {
        let record = result.stats_record(&f, &cfg, elapsed);
        println!("{}", serde_json::to_string(&record)?);
    } else {
        if let Some(trace) = &result.trace {
            for (t, flips) in trace.iter().enumerate() {
                let names: Vec<&str> = flips.iter().map(|&v| f.name(v)).collect();
                eprintln!("try {}: {}", t + 1, names.join(" "));
            }
        }
        match result.model() {
            Some(m) => print!("{}", model_lines(&f, m)),
            None => println!("no satisfying assignment found"),
        }
    }
    Ok(if result.model().is_some() { EXIT_SAT } else { EXIT_EXHAUSTED })
}

fn convert(args: ConvertArgs) -> Result<u8> {
    let f = input::load(&args.input.path, args.input.format)?;
    let source = args.input.path.display().to_string();
    let (clauses, fresh, comments) = match args.mode {
        Mode::Standard => {
            let cs = cnf_standard_with_guard(&f, args.guard).map_err(|e| match e {
                CnfError::GuardExceeded { .. } => {
                    anyhow::anyhow!("{e}; the definitional mode or the non-clausal solver avoids this blowup")
                }
                other => other.into(),
            })?;
            (cs, 0, vec![format!("standard conversion of {source}")])
        }
        Mode::Definitional => {
            let d = cnf_definitional(&f, args.polarity);
            let map = d.name_map(&f);
            if let Some(path) = &args.name_map {
                fs::write(path, serde_json::to_string_pretty(&map)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let mut comments = vec![format!(
                "definitional conversion of {source}{}",
                if args.polarity { " (polarity optimized)" } else { "" }
            )];
            comments.extend(map.iter().map(|(k, v)| format!("{k} := {v}")));
            (d.clauses, d.fresh.len(), comments)
        }
    };
    print!("{}", clauses.to_dimacs(&comments));
    eprintln!(
        "clauses: {}, variables: {}, fresh variables: {}, literals: {}, formula size: {}",
        clauses.len(),
        clauses.num_vars(),
        fresh,
        clauses.num_literals(),
        f.size()
    );
    Ok(0)
}

fn gen(cmd: GenCommand) -> Result<u8> {
    match cmd {
        GenCommand::Kcnf { vars, clauses, width, seed, output } => {
            let f = random_kcnf(vars, clauses, width, seed)?;
            let cs = cnf_standard(&f)?;
            let header = [format!("ncgsat gen kcnf vars={vars} clauses={clauses} width={width} seed={seed}")];
            write_output(output.as_deref(), &cs.to_dimacs(&header))?;
        }
        GenCommand::Formula { depth, arity, vars, weights, seed, output } => {
            let weights = weights.unwrap_or_default();
            let f = random_formula(&FormulaParams { depth, arity, vars, weights }, seed)?;
            let w = weights;
            let text = format!(
                "# ncgsat gen formula depth={depth} arity={arity} vars={vars} seed={seed}\n\
                 # weights leaf={} not={} and={} or={} implies={} iff={}\n{}\n",
                w.leaf,
                w.not,
                w.and,
                w.or,
                w.implies,
                w.iff,
                f.render()
            );
            write_output(output.as_deref(), &text)?;
        }
    }
    Ok(0)
}

fn check(args: CheckArgs) -> Result<u8> {
    let f = input::load(&args.input.path, args.input.format)?;
    let n = f.num_vars();
    println!("variables: {n}, size: {}", f.size());
    let cs = match cnf_standard(&f) {
        Ok(cs) => cs,
        Err(e) => {
            println!("REFUSED: {e}");
            return Ok(EXIT_ERROR);
        }
    };
    let mut failures = 0;
    let mut compare = |t: &Assignment| -> Result<BigUint> {
        let score = eval_scores(&f, t)?.pos;
        let reference = BigUint::from(count_false_clauses(&cs, t)?);
        if score != reference || score.is_zero() != f.evaluate(t) {
            failures += 1;
            println!("mismatch at {:?}: engine {score}, clauses {reference}", t.values());
        }
        Ok(score)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let all_true = compare(&Assignment::all(n, true))?;
    compare(&Assignment::all(n, false))?;
    for _ in 0..32 {
        compare(&random_assignment(n, &mut rng))?;
    }
    println!("score under all-true: {all_true}");
    println!("spot checks: 34 assignments");

    if args.exhaustive {
        if n > MAX_ENUMERATION_VARS {
            println!("REFUSED: {n} variables exceed the enumeration limit of {MAX_ENUMERATION_VARS}");
            return Ok(EXIT_ERROR);
        }
        for index in 0..1u64 << n {
            compare(&Assignment::from_index(n, index))?;
        }
        let e = enumerate(&f)?;
        println!("satisfiable: {}, models: {}", e.satisfiable, e.model_count);
        if let Some(m) = &e.first_model {
            let bits: String = m.values().iter().map(|&b| if b { '1' } else { '0' }).collect();
            println!("first model: {bits}");
        }
    }
    if failures == 0 {
        println!("PASS");
        Ok(0)
    } else {
        println!("FAIL ({failures} mismatches)");
        Ok(EXIT_ERROR)
    }
}

fn run_bench(args: BenchArgs) -> Result<u8> {
    let cfg = bench::load_config(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let rows = bench::run(&cfg, base)?;
    let text = match args.output_format {
        TableFormat::Csv => bench::to_csv(&rows)?,
        TableFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Convert(a) => convert(a),
        Command::Gen(c) => gen(c),
        Command::Check(a) => check(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
