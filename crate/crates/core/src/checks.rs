//! Seeded randomized property suites for scl: homogeneity, invariance under
//! conjugation and inversion, subadditivity, and domination by the
//! brute-force oracle.
//!
//! The scl function is injected so a deliberately broken implementation can
//! be run through the same suites.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::oracle_chain;
use crate::scl::SclValue;
use crate::words::{parse_chain, Alphabet, Chain, CyclicWord, Letter};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Number of random chains per suite; zero runs nothing.
    pub size: usize,
    /// Longest random word.
    pub max_len: usize,
    /// Oracle enumeration cap.
    pub oracle_limit: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: 1, size: 25, max_len: 5, oracle_limit: crate::oracle::DEFAULT_LIMIT }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    /// Rendered description of the first violation, if any.
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            match &s.failure {
                None => out.push_str(&format!("{:<16} PASS ({} cases)\n", s.name, s.cases)),
                Some(f) => out.push_str(&format!("{:<16} FAIL: {f}\n", s.name)),
            }
        }
        out
    }
}

fn random_word(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> Vec<Letter> {
    let len = rng.gen_range(1..=max_len);
    loop {
        let mut w: Vec<Letter> = Vec::with_capacity(len);
        while w.len() < len {
            let l = Letter::new(rng.gen_range(0..rank as u16), rng.gen_bool(0.5));
            if w.last().is_none_or(|&p| p != l.inv()) {
                w.push(l);
            }
        }
        if w.len() == 1 || w[0] != w[len - 1].inv() {
            return w;
        }
    }
}

/// One or two random words, corrected by powers of the generators so the
/// chain is null-homologous and nonzero.
pub fn random_chain(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max_len: usize) -> Chain {
    loop {
        let c = random_chain_once(rng, alphabet, max_len);
        if !c.is_empty() {
            return c;
        }
    }
}

fn random_chain_once(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max_len: usize) -> Chain {
    let rank = alphabet.rank();
    let mut c = Chain::empty(alphabet.clone());
    let words = rng.gen_range(1..=2);
    for _ in 0..words {
        let w = random_word(rng, rank, max_len);
        c.add_term(&CyclicWord::new(&w).unwrap(), &Rational::from_integer(rng.gen_range(1..=2).into()));
    }
    let mut sums = vec![Rational::zero(); rank];
    for (w, k) in c.terms() {
        for (g, e) in w.exponent_sums(rank).into_iter().enumerate() {
            sums[g] += k * Rational::from_integer(e.into());
        }
    }
    for (g, s) in sums.iter().enumerate() {
        if !s.is_zero() {
            let gen = CyclicWord::new(&[Letter::new(g as u16, false)]).unwrap();
            c.add_term(&gen, &-s.clone());
        }
    }
    c
}

fn conjugate_text(c: &Chain, rng: &mut ChaCha8Rng) -> String {
    let al = c.alphabet();
    let names = al.names();
    let mut text = String::new();
    for (w, k) in c.terms() {
        let g = names[rng.gen_range(0..names.len())];
        let h = if rng.gen_bool(0.5) { g.to_ascii_uppercase() } else { g };
        let hinv = if h.is_ascii_uppercase() { h.to_ascii_lowercase() } else { h.to_ascii_uppercase() };
        let sign = if k < &Rational::zero() { " - " } else { " + " };
        text.push_str(&format!("{sign}{}*{h}{}{hinv}", k.abs(), w.render(al)));
    }
    text
}

fn finite(v: SclValue, what: &str) -> Result<Rational, String> {
    match v {
        SclValue::Finite(x) => Ok(x),
        SclValue::Infinite => Err(format!("{what} is infinite")),
    }
}

struct Suite<'a, F> {
    rng: ChaCha8Rng,
    chains: Vec<Chain>,
    scl: &'a F,
}

/// Runs every suite on `config.size` random chains over `⟨a, b⟩`.
pub fn run_checks<F>(config: &CheckConfig, scl_fn: &F) -> CheckReport
where
    F: Fn(&Chain) -> SclValue + Sync,
{
    if config.size == 0 {
        return CheckReport { suites: Vec::new() };
    }
    let al = Alphabet::parse("a,b").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let chains: Vec<Chain> = (0..config.size).map(|_| random_chain(&mut rng, &al, config.max_len)).collect();
    let mut s = Suite { rng, chains, scl: scl_fn };
    let mut suites = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut Suite<'_, F>, usize) -> Result<(), String>| {
        let cases = s.chains.len();
        let failure = (0..cases).find_map(|i| f(&mut s, i).err().map(|e| format!("{}: {e}", s.chains[i].render())));
        suites.push(SuiteResult { name, cases, failure });
    };
    run("homogeneity", &mut |s, i| {
        let c = &s.chains[i];
        let base = finite((s.scl)(c), "scl")?;
        for k in [2, 3] {
            let kq = Rational::from_integer(k.into());
            let got = finite((s.scl)(&c.scale(&kq)), "scl of multiple")?;
            if got != &base * &kq {
                return Err(format!("scl({k}c) = {got}, {k}·scl(c) = {}", &base * &kq));
            }
        }
        Ok(())
    });
    run("conjugacy", &mut |s, i| {
        let c = s.chains[i].clone();
        let text = conjugate_text(&c, &mut s.rng);
        let conj = parse_chain(&text, c.alphabet()).map_err(|e| e.to_string())?;
        let (x, y) = (finite((s.scl)(&c), "scl")?, finite((s.scl)(&conj), "scl of conjugate")?);
        if x != y {
            return Err(format!("conjugate {text} has scl {y}, expected {x}"));
        }
        Ok(())
    });
    run("inverse", &mut |s, i| {
        let c = &s.chains[i];
        let (x, y) = (finite((s.scl)(c), "scl")?, finite((s.scl)(&c.inverse()), "scl of inverse")?);
        if x != y {
            return Err(format!("inverse has scl {y}, expected {x}"));
        }
        Ok(())
    });
    run("subadditivity", &mut |s, i| {
        let n = s.chains.len();
        let j = s.rng.gen_range(0..n);
        let (c, d) = (&s.chains[i], &s.chains[j]);
        let sum = finite((s.scl)(&c.add(d)), "scl of sum")?;
        let (x, y) = (finite((s.scl)(c), "scl")?, finite((s.scl)(d), "scl")?);
        if sum > &x + &y {
            return Err(format!("scl(c + d) = {sum} exceeds {x} + {y} with d = {}", d.render()));
        }
        Ok(())
    });
    let limit = config.oracle_limit;
    run("oracle", &mut |s, i| {
        let c = &s.chains[i];
        let letters: BigInt = {
            let (terms, _) = c.integral_terms();
            terms.iter().map(|(w, k)| BigInt::from(w.len()) * k).sum()
        };
        if letters > BigInt::from(10) {
            return Ok(());
        }
        let x = finite((s.scl)(c), "scl")?;
        match oracle_chain(c, 1, limit) {
            Ok(Some(bound)) if bound < x => Err(format!("oracle bound {bound} below scl {x}")),
            Ok(_) => Ok(()),
            Err(e) => Err(e.to_string()),
        }
    });
    CheckReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scl::scl;

    fn small() -> CheckConfig {
        CheckConfig { seed: 7, size: 6, max_len: 4, ..CheckConfig::default() }
    }

    #[test]
    fn suites_pass_on_the_engine() {
        let report = run_checks(&small(), &scl);
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.suites.len(), 5);
    }

    #[test]
    fn corrupted_engine_is_caught() {
        let broken = |c: &Chain| match scl(c) {
            SclValue::Finite(x) => SclValue::Finite(x + Rational::new(1.into(), 7.into())),
            v => v,
        };
        assert!(!run_checks(&small(), &broken).passed());
    }

    #[test]
    fn zero_size_is_a_no_op() {
        let report = run_checks(&CheckConfig { size: 0, ..small() }, &|_: &Chain| unreachable!());
        assert!(report.passed());
        assert!(report.suites.is_empty());
    }

    #[test]
    fn deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let al = Alphabet::parse("a,b").unwrap();
        for _ in 0..10 {
            let c = random_chain(&mut r1, &al, 5);
            assert!(c.is_null_homologous());
            assert_eq!(c, random_chain(&mut r2, &al, 5));
        }
    }
}
