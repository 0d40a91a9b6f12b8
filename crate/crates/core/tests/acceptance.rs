//! Acceptance suite: one PASS/FAIL line per criterion, with the runtime
//! against its budget. Tolerances are exact rational equality throughout.
//!
//! Criterion 9 is recorded rather than asserted: its line reports honestly
//! but does not affect the exit status.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sclkit::checks::{random_chain, run_checks, CheckConfig};
use sclkit::gluing::{build_closed_surface, certify, witness_scan, GlueOutcome};
use sclkit::graph::{unit_ball_2d, GraphOfGroups, DEFAULT_DEPTH};
use sclkit::oracle::{corpus_check, enumerate_cyclic_words, oracle_scl, DEFAULT_LIMIT};
use sclkit::scl::{build_encoding, compute, scl, solve_scl, SclValue};
use sclkit::surface::{assemble, boundary_degrees, CombinatorialSurface, CoverSpec};
use sclkit::words::{cyclic_reduce, parse_chain, parse_word, Alphabet, Chain, CyclicWord};
use sclkit::Rational;

const DOUBLE: &str = include_str!("../../../graphs/double.gg");
const CHAIN3: &str = include_str!("../../../graphs/chain3.gg");
const BS12: &str = include_str!("../../../graphs/bs12.gg");
const ZZ: &str = include_str!("../../../graphs/zz.gg");

const CORPUS_SEED: u64 = 2;
const COVER_SEED: u64 = 8;
const CHECK_SEED: u64 = 1;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn ab() -> Alphabet {
    Alphabet::parse("a,b").unwrap()
}

fn cyclic(text: &str) -> CyclicWord {
    cyclic_reduce(&parse_word(text, &ab()).unwrap()).unwrap().0
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Formal terms (unmerged) compared between the LP and the oracle at `n = 1`.
fn lp_and_oracle(words: &[&str]) -> Result<(Option<Rational>, Option<Rational>), String> {
    let terms: Vec<(CyclicWord, BigInt)> = words.iter().map(|w| (cyclic(w), BigInt::one())).collect();
    let oracle = oracle_scl(&terms, 1, DEFAULT_LIMIT).map_err(|e| e.to_string())?.bound;
    let lp = match build_encoding(&ab(), &terms) {
        Ok(p) => Some(solve_scl(&p).map_err(|e| e.to_string())?.value),
        Err(_) => None,
    };
    Ok((lp, oracle))
}

fn criterion_exact_values() -> Outcome {
    let cases: [(&str, &[&str], Option<Rational>); 4] = [
        ("abAB", &["abAB"], Some(q(1, 2))),
        ("a + A", &["a", "A"], Some(q(0, 1))),
        ("ab + B + A", &["ab", "B", "A"], Some(q(1, 2))),
        ("a", &["a"], None),
    ];
    let mut parts = Vec::new();
    for (text, words, expected) in cases {
        let start = Instant::now();
        let (lp, oracle) = lp_and_oracle(words)?;
        ensure(oracle == expected, || format!("{text}: oracle gives {oracle:?}, expected {expected:?}"))?;
        ensure(lp == expected, || format!("{text}: LP gives {lp:?}, oracle {oracle:?}"))?;
        let value = scl(&parse_chain(text, &ab()).unwrap());
        let want = match &expected {
            Some(x) => SclValue::Finite(x.clone()),
            None => SclValue::Infinite,
        };
        ensure(value == want, || format!("{text}: scl returns {value:?}"))?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(1), || format!("{text}: {took:?} exceeds 1 s"))?;
        parts.push(format!("{text} = {}", expected.map_or("infinity".to_string(), |x| x.to_string())));
    }
    Ok(parts.join(", "))
}

fn total_length(c: &Chain) -> BigInt {
    let (terms, _) = c.integral_terms();
    terms.iter().map(|(w, k)| BigInt::from(w.len()) * k).sum()
}

/// Fixed 50-chain corpus over ⟨a, b⟩ of total length at most 8.
fn rationality_corpus() -> Vec<Chain> {
    let al = ab();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < 50 {
        let c = random_chain(&mut rng, &al, 4);
        if total_length(&c) <= BigInt::from(8) && seen.insert(c.render()) {
            out.push(c);
        }
    }
    out
}

fn extremal_surface(c: &Chain) -> Result<(CombinatorialSurface, BigInt, BigInt), String> {
    let comp = compute(c).map_err(|e| format!("{}: {e}", c.render()))?;
    let surface = assemble(&comp.problem, &comp.result.extremal).map_err(|e| format!("{}: {e}", c.render()))?;
    Ok((surface, comp.result.extremal.degree.clone(), comp.denominator.clone()))
}

fn criterion_rationality(corpus: &[Chain]) -> Result<(String, Vec<CombinatorialSurface>), String> {
    let mut surfaces = Vec::new();
    let mut values = BTreeSet::new();
    for c in corpus {
        let value = match scl(c) {
            SclValue::Finite(x) => x,
            SclValue::Infinite => return Err(format!("{}: infinite", c.render())),
        };
        let (surface, n, denominator) = extremal_surface(c)?;
        surface.validate().map_err(|e| format!("{}: {e}", c.render()))?;
        ensure(n.is_positive(), || format!("{}: degree {n}", c.render()))?;
        let (terms, _) = c.integral_terms();
        let degrees = boundary_degrees(&surface);
        for (i, (_, k)) in terms.iter().enumerate() {
            ensure(BigInt::from(degrees[i]) == &n * k, || {
                format!("{}: boundary wraps term {i} {} times, expected {}", c.render(), degrees[i], &n * k)
            })?;
        }
        let from_surface = Rational::new(BigInt::from(-surface.chi_minus()), BigInt::from(2) * &n * &denominator);
        ensure(from_surface == value, || {
            format!("{}: -chi-/(2n) = {from_surface}, scl = {value}", c.render())
        })?;
        values.insert(value.to_string());
        surfaces.push(surface);
    }
    let values: Vec<String> = values.into_iter().collect();
    Ok((format!("50 chains, values {{{}}}", values.join(", ")), surfaces))
}

fn criterion_invariance() -> Outcome {
    let config = CheckConfig { seed: CHECK_SEED, size: 25, ..CheckConfig::default() };
    let report = run_checks(&config, &scl);
    let names: Vec<&str> = report.suites.iter().map(|s| s.name).collect();
    for required in ["homogeneity", "conjugacy", "inverse", "subadditivity"] {
        ensure(names.contains(&required), || format!("suite {required} missing"))?;
    }
    ensure(report.passed(), || report.render().trim_end().replace('\n', "; "))?;
    Ok(format!("25 chains, seed {CHECK_SEED}, suites {}", names.join(", ")))
}

fn oracle_corpus() -> Vec<Chain> {
    let al = ab();
    enumerate_cyclic_words(&al, 6, true)
        .into_iter()
        .map(|w| {
            let mut c = Chain::empty(al.clone());
            c.add_term(&w, &Rational::one());
            c
        })
        .collect()
}

fn criterion_oracle(corpus: &[Chain]) -> Result<(String, Vec<Rational>), String> {
    let report = corpus_check(corpus, &[1, 2], DEFAULT_LIMIT).map_err(|e| e.to_string())?;
    if let Some(bad) = report.entries.iter().find(|e| !e.dominated()) {
        return Err(format!("{} has an oracle bound below the LP value {}", bad.chain, bad.lp));
    }
    let attained: Vec<&str> = report.attained().map(|e| e.chain.as_str()).collect();
    ensure(attained.contains(&"abAB"), || "abAB is not in the equality subset".into())?;
    let values = report.entries.iter().map(|e| e.lp.clone()).collect();
    Ok((format!("{} words, {} attained at n <= 2, abAB among them", report.entries.len(), attained.len()), values))
}

fn criterion_double() -> Outcome {
    let g = GraphOfGroups::parse(DOUBLE).map_err(|e| e.to_string())?;
    let basis = g.h2_lattice();
    ensure(basis.len() == 1, || format!("H2 rank {}", basis.len()))?;
    let a = &basis[0];
    let norm = g.gt_norm(a).map_err(|e| e.to_string())?;
    ensure(norm == q(4, 1), || format!("norm {norm}"))?;
    match build_closed_surface(&g, a).map_err(|e| e.to_string())? {
        GlueOutcome::Closed(r) => {
            ensure(r.genera == vec![2], || format!("genera {:?}", r.genera))?;
            ensure(r.multiple == BigInt::one(), || format!("n = {}", r.multiple))?;
            let cert = Rational::new(BigInt::from(-2 * r.chi_minus), r.multiple.clone());
            ensure(cert == q(4, 1), || format!("-2chi-/n = {cert}"))?;
            ensure(certify(&r, &g, a), || "certificate rejected".into())?;
            Ok("H2 rank 1, norm 4, genus 2, n = 1, -2chi-/n = 4".into())
        }
        other => Err(format!("unexpected outcome: {}", sclkit::gluing::summary(&other))),
    }
}

fn criterion_hexagon() -> Outcome {
    let g = GraphOfGroups::parse(CHAIN3).map_err(|e| e.to_string())?;
    let basis = g.h2_lattice();
    ensure(basis.len() == 2, || format!("H2 rank {}", basis.len()))?;
    let fan = unit_ball_2d(&g, &basis[0], &basis[1], DEFAULT_DEPTH).map_err(|e| e.to_string())?;
    let expected = vec![
        (q(1, 4), q(0, 1)),
        (q(0, 1), q(1, 4)),
        (q(-1, 4), q(1, 4)),
        (q(-1, 4), q(0, 1)),
        (q(0, 1), q(-1, 4)),
        (q(1, 4), q(-1, 4)),
    ];
    ensure(fan.vertices == expected, || format!("vertices {:?}", fan.vertices))?;
    // Independent recomputation of every cone's additivity certificate.
    let norm_at = |r: &(BigInt, BigInt)| -> Result<Rational, String> {
        let class = basis[0]
            .scale(&Rational::from_integer(r.0.clone()))
            .add(&basis[1].scale(&Rational::from_integer(r.1.clone())));
        g.gt_norm(&class).map_err(|e| e.to_string())
    };
    for cone in &fan.cones {
        let sum = (&cone.from.0 + &cone.to.0, &cone.from.1 + &cone.to.1);
        let (nf, nt, ns) = (norm_at(&cone.from)?, norm_at(&cone.to)?, norm_at(&sum)?);
        ensure(ns == &nf + &nt, || format!("cone {:?}..{:?} is not additive", cone.from, cone.to))?;
        for (r, v) in [(&cone.from, &nf), (&cone.to, &nt)] {
            let linear = &cone.functional.0 * Rational::from_integer(r.0.clone())
                + &cone.functional.1 * Rational::from_integer(r.1.clone());
            ensure(&linear == v, || format!("functional of cone {:?}..{:?} misses {r:?}", cone.from, cone.to))?;
        }
    }
    for (x, y) in &fan.vertices {
        let class = basis[0].scale(x).add(&basis[1].scale(y));
        let n = g.gt_norm(&class).map_err(|e| e.to_string())?;
        ensure(n.is_one(), || format!("vertex ({x}, {y}) has norm {n}"))?;
    }
    Ok(format!("hexagon, {} cones certified", fan.cones.len()))
}

fn criterion_witnesses() -> Outcome {
    let bs = GraphOfGroups::parse(BS12).map_err(|e| e.to_string())?;
    let w = witness_scan(&bs).ok_or("no witness for t a t^-1 = a^2")?;
    ensure((w.p.abs(), w.q.abs()) == (1, 2) && !w.is_zxz(), || format!("BS case gives {w}"))?;
    let zz = GraphOfGroups::parse(ZZ).map_err(|e| e.to_string())?;
    let w2 = witness_scan(&zz).ok_or("no witness for t a t^-1 = a")?;
    ensure(w2.is_zxz(), || format!("Z+Z case gives {w2}"))?;
    for a in zz.h2_lattice() {
        match build_closed_surface(&zz, &a).map_err(|e| e.to_string())? {
            GlueOutcome::Witness { witness, .. } => ensure(witness.is_zxz(), || format!("glue gives {witness}"))?,
            other => return Err(format!("glue on Z+Z: {}", sclkit::gluing::summary(&other))),
        }
    }
    Ok(format!("{w}; {w2}"))
}

fn order_in(phi: i64, n: i64) -> i64 {
    n / phi.rem_euclid(n).gcd(&n)
}

fn criterion_covers(surfaces: &[CombinatorialSurface]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(COVER_SEED);
    let pool: Vec<&CombinatorialSurface> = surfaces.iter().filter(|s| !s.is_closed()).collect();
    ensure(!pool.is_empty(), || "no surfaces with boundary".into())?;
    let mut nontrivial = 0;
    for case in 0..20 {
        let s = pool[rng.gen_range(0..pool.len())];
        let n = rng.gen_range(2..=6i64);
        let boundary = s.boundary_components();
        let mut phi: Vec<i64> = boundary.iter().map(|_| rng.gen_range(0..n)).collect();
        // balance each component on its last boundary circle
        let ncomp = s.num_components();
        for c in 0..ncomp {
            let idx: Vec<usize> = (0..boundary.len()).filter(|&i| boundary[i].component == c).collect();
            if let Some((&last, rest)) = idx.split_last() {
                let sum: i64 = rest.iter().map(|&i| phi[i]).sum();
                phi[last] = (-sum).rem_euclid(n);
            }
        }
        nontrivial += phi.iter().any(|&p| p != 0) as usize;
        let spec = CoverSpec { modulus: n as u64, phi: phi.clone() };
        let cover = s.cyclic_cover(&spec).map_err(|e| format!("case {case}: {e}"))?;
        cover.validate().map_err(|e| format!("case {case}: {e}"))?;
        ensure(cover.euler_characteristic() == n * s.euler_characteristic(), || {
            format!("case {case}: chi {} vs {} x {}", cover.euler_characteristic(), n, s.euler_characteristic())
        })?;
        let ns = s.sides().len();
        let lifted = cover.boundary_components();
        for (i, b) in boundary.iter().enumerate() {
            let ord = order_in(phi[i], n);
            let preimages: Vec<_> = lifted.iter().filter(|l| b.sides.contains(&(l.sides[0] % ns))).collect();
            ensure(preimages.len() as i64 * ord == n, || {
                format!("case {case}: boundary {i} has {} preimages, order {ord}, N = {n}", preimages.len())
            })?;
            for l in preimages {
                ensure(l.degree as i64 == b.degree as i64 * ord, || {
                    format!("case {case}: preimage degree {} vs {} x {ord}", l.degree, b.degree)
                })?;
            }
        }
    }
    Ok(format!("20 covers, {nontrivial} with nonzero boundary values"))
}

fn is_power_of_two(d: &BigInt) -> bool {
    d.is_positive() && (d & (d - BigInt::one())).is_zero()
}

fn criterion_denominators(values: &[Rational]) -> Outcome {
    let distinct: BTreeSet<String> = values.iter().map(|v| v.to_string()).collect();
    let listed = distinct.into_iter().collect::<Vec<_>>().join(", ");
    match values.iter().find(|v| !is_power_of_two(v.denom())) {
        Some(v) => Ok(format!("scl value {v} in the corpus")),
        None => Err(format!("corpus values are {{{listed}}}, all with power-of-two denominators")),
    }
}

struct Line {
    number: usize,
    name: &'static str,
    budget: Duration,
    recorded: bool,
}

fn report(line: &Line, started: Instant, outcome: &Outcome) -> bool {
    let took = started.elapsed();
    let over = took > line.budget;
    let pass = outcome.is_ok() && !over;
    let detail = match outcome {
        Ok(d) if over => format!("{d}; over budget"),
        Ok(d) => d.clone(),
        Err(e) => e.clone(),
    };
    let tag = if pass { "PASS" } else { "FAIL" };
    let note = if line.recorded && !pass { " [recorded]" } else { "" };
    println!(
        "criterion {} {:<22} {tag}{note}  {:.2}s / {}s  {detail}",
        line.number,
        line.name,
        took.as_secs_f64(),
        line.budget.as_secs()
    );
    pass || line.recorded
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;

    let l = Line { number: 1, name: "exact values", budget: secs(4), recorded: false };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_exact_values());

    let l = Line { number: 2, name: "rationality", budget: secs(60), recorded: false };
    let t = Instant::now();
    let corpus = rationality_corpus();
    let (outcome, surfaces) = match criterion_rationality(&corpus) {
        Ok((d, s)) => (Ok(d), s),
        Err(e) => (Err(e), Vec::new()),
    };
    ok &= report(&l, t, &outcome);

    let l = Line { number: 3, name: "invariance", budget: secs(120), recorded: false };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_invariance());

    let l = Line { number: 4, name: "oracle dominance", budget: secs(600), recorded: false };
    let t = Instant::now();
    let (outcome, values) = match criterion_oracle(&oracle_corpus()) {
        Ok((d, v)) => (Ok(d), v),
        Err(e) => (Err(e), Vec::new()),
    };
    ok &= report(&l, t, &outcome);

    let l = Line { number: 5, name: "double", budget: secs(5), recorded: false };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_double());

    let l = Line { number: 6, name: "polyhedral ball", budget: secs(30), recorded: false };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_hexagon());

    let l = Line { number: 7, name: "witnesses", budget: secs(1), recorded: false };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_witnesses());

    let l = Line { number: 8, name: "cover contract", budget: secs(60), recorded: false };
    let t = Instant::now();
    let outcome = if surfaces.is_empty() { Err("no surfaces from criterion 2".into()) } else { criterion_covers(&surfaces) };
    ok &= report(&l, t, &outcome);

    let l = Line { number: 9, name: "odd denominators", budget: secs(600), recorded: true };
    let t = Instant::now();
    ok &= report(&l, t, &criterion_denominators(&values));

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
