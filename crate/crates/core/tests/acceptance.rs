//! Acceptance suite: one PASS/FAIL line per criterion. Pass a substring of a
//! criterion name to run only the matching ones.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ncgsat::gen::random_kcnf;
use ncgsat::oracle::{delta_table_brute, enumerate, enumerate_clauses, score_by_definition};
use ncgsat::score::eval_all;
use ncgsat::search::{averaging_in_initial, hill_climb, pick, ClauseEngine, Engine};
use ncgsat::{
    cnf_definitional, cnf_standard, eval_scores, gsat_run, parse_formula, Assignment, Backend, Node, ScoreState,
    SearchConfig, Var, Variant,
};
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{assignments, corpus, dpll, operators_seen, or_of_ands, scaled_formula};

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Check {
    let formulas = corpus(500, 8, 30, 1);
    ensure(operators_seen(&formulas) == [true; 6], || "corpus misses an operator".into())?;
    let mut checked = 0u64;
    for (i, f) in formulas.iter().enumerate() {
        for t in assignments(f.num_vars()) {
            let s = eval_scores(f, &t).unwrap().pos;
            let reference = score_by_definition(f, &t).map_err(|e| e.to_string())?;
            ensure(s == BigUint::from(reference), || {
                format!("formula {i} `{}` under {:?}: {s} vs {reference}", f.render(), t.values())
            })?;
            checked += 1;
        }
    }
    Ok(format!("{} formulas, {checked} assignments, all scores equal", formulas.len()))
}

fn worked_example() -> Check {
    let f = parse_formula("(!a & !b & c) | !d | (!e & !f)").unwrap();
    let mut st = ScoreState::new(&f, Assignment::all(6, true)).unwrap();
    let before = st.score().clone();
    ensure(before == BigUint::from(4u32), || format!("score {before}, expected 4"))?;
    let d = f.names().iter().position(|n| n == "d").unwrap();
    st.flip_and_update(Var(d as u32)).unwrap();
    let after = st.score().clone();
    ensure(after == BigUint::from(0u32), || format!("score after flipping d is {after}"))?;
    Ok("score 4 under all-true, 0 after flipping d".into())
}

fn trace_equivalence() -> Check {
    let formulas: Vec<_> = corpus(400, 6, 25, 3)
        .into_iter()
        .filter(|f| cnf_standard(f).is_ok_and(|cs| cs.len() <= 200))
        .take(100)
        .collect();
    ensure(formulas.len() == 100, || "not enough formulas".into())?;
    let mut flips = 0;
    let mut solved = 0;
    for (i, f) in formulas.iter().enumerate() {
        let cfg = SearchConfig {
            max_tries: 10,
            max_flips: 100,
            variant: Variant::Gsat,
            seed: i as u64,
            record_trace: true,
            ..Default::default()
        };
        let nc = gsat_run(f, &cfg).unwrap();
        let cl = gsat_run(f, &SearchConfig { backend: Backend::Clausal, ..cfg }).unwrap();
        ensure(nc.trace == cl.trace, || format!("formula {i} `{}`: traces differ", f.render()))?;
        ensure(nc.outcome == cl.outcome && nc.tries_used == cl.tries_used && nc.flips_used == cl.flips_used, || {
            format!("formula {i}: outcomes differ")
        })?;
        flips += nc.flips_used;
        solved += usize::from(nc.model().is_some());
    }
    Ok(format!("100 formulas, {flips} flips, {solved} solved, traces identical"))
}

/// Per-node nanoseconds of a full evaluation, best of several batches.
fn ns_per_node(f: &ncgsat::Formula, rng: &mut ChaCha8Rng) -> f64 {
    let t: Vec<Assignment> = (0..8).map(|_| ncgsat::search::random_assignment(f.num_vars(), rng)).collect();
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let start = Instant::now();
        let mut runs = 0;
        while start.elapsed() < Duration::from_millis(40) {
            std::hint::black_box(eval_scores(f, &t[runs % t.len()]).unwrap());
            runs += 1;
        }
        best = best.min(start.elapsed().as_nanos() as f64 / (runs * f.size()) as f64);
    }
    best
}

fn linearity() -> Check {
    for f in corpus(500, 8, 60, 4) {
        let visits = eval_all(&f, &Assignment::all(f.num_vars(), true)).unwrap().visits;
        ensure(visits <= f.size(), || format!("{visits} visits for size {}", f.size()))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rows = Vec::new();
    for target in [1_000, 10_000, 100_000] {
        let mut parts = target / 20;
        let f = loop {
            let f = scaled_formula(parts, 7);
            if f.size() >= target {
                break f;
            }
            parts = parts * 5 / 4 + 1;
        };
        let visits = eval_all(&f, &Assignment::all(f.num_vars(), false)).unwrap().visits;
        ensure(visits <= f.size(), || format!("{visits} visits for size {}", f.size()))?;
        rows.push((f.size(), ns_per_node(&f, &mut rng)));
    }
    let lo = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let table = rows.iter().map(|(n, t)| format!("{n}: {t:.1} ns/node")).collect::<Vec<_>>().join(", ");
    ensure(hi <= 2.0 * lo, || format!("per-node time varies more than 2x: {table}"))?;
    Ok(format!("visits <= size everywhere; {table}; spread {:.2}x", hi / lo))
}

fn locality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut flips = 0;
    for i in 0..50 {
        let n = rng.gen_range(4..30);
        let k = rng.gen_range(2..=4.min(n));
        let m = rng.gen_range(2..120);
        let f = random_kcnf(n, m, k, i).unwrap();
        let Node::And(clauses) = f.node(f.root()) else {
            return Err(format!("instance {i} is not a conjunction"));
        };
        let occurrences = f.occurrences();
        let mut st = ScoreState::new(&f, ncgsat::search::random_assignment(n, &mut rng)).unwrap();
        for _ in 0..100 {
            let v = Var(rng.gen_range(0..n as u32));
            let leaves = occurrences[v.index()].len();
            if leaves == 0 {
                continue;
            }
            let containing = clauses
                .iter()
                .filter(|&&c| {
                    f.children(c).any(|l| f.node(l) == &Node::Lit(v.lit(true)) || f.node(l) == &Node::Lit(v.lit(false)))
                })
                .count();
            let report = st.flip_and_update(v).unwrap();
            let expected = 1 + containing + leaves;
            ensure(report.recomputed == expected, || {
                format!("instance {i}, {v}: recomputed {} nodes, bound {expected}", report.recomputed)
            })?;
            flips += 1;
        }
    }
    Ok(format!("50 CNFs, {flips} flips, recomputed = 1 + clauses(v) + leaves(v) exactly"))
}

fn blowup_contrast() -> Check {
    let mut rows = Vec::new();
    for k in 8..=12 {
        let f = or_of_ands(k);
        let size = f.size();
        let cs = cnf_standard(&f).unwrap();
        ensure(cs.len() > 10 * size, || format!("k={k}: {} clauses for size {size}", cs.len()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let start = ncgsat::search::random_assignment(f.num_vars(), &mut rng);
        let mut st = ScoreState::new(&f, start.clone()).unwrap();
        let mut engine = ClauseEngine::new(&cs);
        engine.reset(start);
        let (mut nc_max, mut nc_total, mut scans) = (0, 0, 0);
        let flips = 200;
        for _ in 0..flips {
            let v = Var(rng.gen_range(0..f.num_vars() as u32));
            let report = st.flip_and_update(v).unwrap();
            nc_max = nc_max.max(report.recomputed);
            nc_total += report.recomputed;
            scans += engine.flip_var(v);
        }
        ensure(nc_max <= size, || format!("k={k}: {nc_max} nodes recomputed in one flip, size {size}"))?;
        let ratio = scans as f64 / flips as f64 / size as f64;
        ensure(ratio >= 5.0, || format!("k={k}: clause scans per flip / size = {ratio:.2}"))?;
        rows.push(format!(
            "k={k} |f|={size} clauses={} nc/flip={:.1} scans/flip={:.0} ratio={ratio:.1}",
            cs.len(),
            nc_total as f64 / flips as f64,
            scans as f64 / flips as f64
        ));
    }
    Ok(rows.join("; "))
}

fn incremental_correctness() -> Check {
    let formulas = corpus(200, 8, 40, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (i, f) in formulas.iter().enumerate() {
        let n = f.num_vars();
        let mut st = ScoreState::new(f, ncgsat::search::random_assignment(n, &mut rng)).unwrap();
        for step in 0..100 {
            let v = Var(rng.gen_range(0..n as u32));
            st.flip_and_update(v).unwrap();
            let fresh = eval_all(f, st.assignment()).unwrap();
            ensure(st.pairs() == fresh.pairs.as_slice(), || format!("formula {i} step {step}: caches diverge"))?;
            let brute: Vec<BigInt> =
                delta_table_brute(f, st.assignment()).unwrap().into_iter().map(BigInt::from).collect();
            ensure(st.deltas() == brute.as_slice(), || {
                format!("formula {i} `{}` step {step}: deltas {:?} vs {:?}", f.render(), st.deltas(), brute)
            })?;
        }
    }
    Ok("200 episodes x 100 flips, caches and deltas exact".into())
}

fn efficacy() -> Check {
    let small: Vec<_> =
        corpus(400, 6, 40, 8).into_iter().filter(|f| enumerate(f).unwrap().satisfiable).take(100).collect();
    ensure(small.len() == 100, || "not enough satisfiable formulas".into())?;
    let solved = small
        .iter()
        .enumerate()
        .filter(|(i, f)| {
            let cfg = SearchConfig { max_tries: 10, max_flips: 50, seed: *i as u64, ..Default::default() };
            gsat_run(f, &cfg).unwrap().model().is_some()
        })
        .count();
    ensure(solved >= 95, || format!("small formulas: {solved}/100 solved"))?;

    let mut certified = 0;
    let mut solved3 = 0;
    let mut seed = 0;
    while certified < 20 {
        let f = random_kcnf(50, 200, 3, seed).unwrap();
        seed += 1;
        if dpll(&cnf_standard(&f).unwrap()).is_none() {
            continue;
        }
        certified += 1;
        let cfg = SearchConfig { max_tries: 20, max_flips: 500, walk_probability: 0.5, seed, ..Default::default() };
        solved3 += usize::from(gsat_run(&f, &cfg).unwrap().model().is_some());
    }
    ensure(2 * solved3 > certified, || format!("3-SAT: {solved3}/{certified} solved"))?;
    Ok(format!("small formulas {solved}/100; 3-SAT n=50 m=200 {solved3}/{certified} ({} generated)", seed))
}

fn variant_contracts() -> Check {
    let formulas = corpus(60, 6, 30, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // csat: the improving set, or the minimal set when nothing improves.
    // rsat: every variable.
    let mut csat_fallbacks = 0;
    for f in &formulas {
        let t = ncgsat::search::random_assignment(f.num_vars(), &mut rng);
        let st = ScoreState::new(f, t.clone()).unwrap();
        let brute = delta_table_brute(f, &t).unwrap();
        let ids = |pred: &dyn Fn(i64) -> bool| -> Vec<Var> {
            brute.iter().enumerate().filter(|(_, &d)| pred(d)).map(|(i, _)| Var(i as u32)).collect()
        };
        let min = *brute.iter().min().unwrap();
        let improving = ids(&|d| d < 0);
        let expected = if improving.is_empty() {
            csat_fallbacks += 1;
            ids(&|d| d == min)
        } else {
            improving
        };
        ensure(hill_climb(st.deltas(), Variant::Csat) == expected, || format!("csat set for `{}`", f.render()))?;
        ensure(hill_climb(st.deltas(), Variant::Rsat) == ids(&|_| true), || "rsat set".into())?;
        for v in [Variant::Gsat, Variant::Dsat, Variant::Msat] {
            ensure(hill_climb(st.deltas(), v) == ids(&|d| d == min), || format!("{v} set"))?;
        }
    }
    ensure(csat_fallbacks > 0, || "csat fallback never exercised".into())?;

    // dsat: the smallest id, whatever the seed.
    for trial in 0..200u64 {
        let mut cands: Vec<Var> = (0..rng.gen_range(1..8)).map(|_| Var(rng.gen_range(0..20))).collect();
        cands.sort();
        cands.dedup();
        let lowest = cands[0];
        for seed in 0..10 {
            let got = pick(&cands, Variant::Dsat, &mut ChaCha8Rng::seed_from_u64(seed ^ trial), None);
            ensure(got == lowest, || format!("dsat picked {got} from {cands:?}"))?;
        }
    }

    // rsat and gsat picks are uniform over the candidates.
    let cands = [Var(2), Var(4), Var(9)];
    let mut counts = [0usize; 3];
    for seed in 0..3000 {
        let v = pick(&cands, Variant::Rsat, &mut ChaCha8Rng::seed_from_u64(seed), None);
        counts[cands.iter().position(|&c| c == v).unwrap()] += 1;
    }
    ensure(counts.iter().all(|&c| (850..1150).contains(&c)), || format!("rsat pick counts {counts:?}"))?;

    // msat: never repeats the last flip while another candidate exists.
    let mut avoided = 0;
    for f in &formulas {
        let mut st = ScoreState::new(f, ncgsat::search::random_assignment(f.num_vars(), &mut rng)).unwrap();
        let mut last = None;
        for _ in 0..50 {
            let cands = hill_climb(st.deltas(), Variant::Msat);
            let v = pick(&cands, Variant::Msat, &mut rng, last);
            if cands.len() > 1 && last.is_some_and(|l| cands.contains(&l)) {
                avoided += 1;
            }
            ensure(Some(v) != last || cands == vec![v], || format!("msat repeated {v} with {cands:?}"))?;
            st.flip_and_update(v).unwrap();
            last = Some(v);
        }
    }
    ensure(avoided > 0, || "msat exclusion never exercised".into())?;

    // averaging-in: agreed bits copied, the rest fair coins.
    let a = Assignment::new(vec![true, false, true, false, true, true]);
    let b = Assignment::new(vec![true, true, false, true, false, false]);
    let complement = Assignment::new(a.values().iter().map(|x| !x).collect());
    let mut ones = [0usize; 6];
    let mut ones_c = [0usize; 6];
    for seed in 0..1000 {
        ensure(averaging_in_initial(&a, &a, &mut ChaCha8Rng::seed_from_u64(seed)) == a, || "identical inputs".into())?;
        let out = averaging_in_initial(&a, &b, &mut ChaCha8Rng::seed_from_u64(seed));
        ensure(out.get(Var(0)), || "agreed bit not copied".into())?;
        let out_c = averaging_in_initial(&a, &complement, &mut ChaCha8Rng::seed_from_u64(seed));
        for j in 0..6 {
            ones[j] += usize::from(out.values()[j]);
            ones_c[j] += usize::from(out_c.values()[j]);
        }
    }
    let fair = |c: usize| (430..=570).contains(&c);
    ensure(ones[1..].iter().all(|&c| fair(c)), || format!("disagreeing bits {ones:?}"))?;
    ensure(ones_c.iter().all(|&c| fair(c)), || format!("complementary inputs {ones_c:?}"))?;

    // Every variant, with and without averaging-in, still returns real models.
    let hard =
        parse_formula("(a | b | !c) & (!a | c | d) & (b <-> !d) & (c -> (a & !b)) & (d | e) & !(e & a)").unwrap();
    for v in Variant::ALL {
        for averaging_in in [false, true] {
            let cfg =
                SearchConfig { variant: v, averaging_in, max_tries: 30, max_flips: 30, seed: 11, ..Default::default() };
            let r = gsat_run(&hard, &cfg).unwrap();
            if let Some(m) = r.model() {
                ensure(hard.evaluate(m), || format!("{v} returned a non-model"))?;
            }
        }
    }
    Ok(format!("csat ({csat_fallbacks} fallbacks), dsat, rsat, msat ({avoided} exclusions), averaging-in hold"))
}

fn definitional_conversion() -> Check {
    let formulas = corpus(200, 6, 20, 10);
    let mut max_vars = 0;
    for (i, f) in formulas.iter().enumerate() {
        let models: BTreeSet<Vec<bool>> =
            assignments(f.num_vars()).filter(|t| f.evaluate(t)).map(|t| t.values().to_vec()).collect();
        for polarity in [true, false] {
            let d = cnf_definitional(f, polarity);
            max_vars = max_vars.max(d.clauses.num_vars());
            let psi = enumerate_clauses(&d.clauses).map_err(|e| e.to_string())?;
            ensure(psi.models.is_empty() == models.is_empty(), || {
                format!("formula {i} `{}` (polarity {polarity}): equisatisfiability fails", f.render())
            })?;
            let projected: BTreeSet<Vec<bool>> =
                psi.models.iter().map(|m| m.prefix(d.num_original).values().to_vec()).collect();
            ensure(projected.is_subset(&models), || {
                format!("formula {i} `{}` (polarity {polarity}): a projected model falsifies it", f.render())
            })?;
            ensure(projected == models, || {
                format!("formula {i} `{}` (polarity {polarity}): some model does not extend", f.render())
            })?;
        }
    }
    Ok(format!("200 formulas, both polarity modes, up to {max_vars} variables after conversion"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("worked example", worked_example),
        ("trace equivalence", trace_equivalence),
        ("linearity", linearity),
        ("locality", locality),
        ("blowup contrast", blowup_contrast),
        ("incremental correctness", incremental_correctness),
        ("solver efficacy", efficacy),
        ("variant contracts", variant_contracts),
        ("definitional conversion", definitional_conversion),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
