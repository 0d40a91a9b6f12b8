//! Brute-force upper bounds for scl: enumerate every way of pairing the
//! letters of `n` copies of a chain into rectangles and count the polygons
//! each pairing closes up.
//!
//! Deliberately independent of the LP encoding: only [`Position`] is shared.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::scl::Position;
use crate::words::{Alphabet, Chain, CyclicWord, Letter};
use crate::Rational;

pub const DEFAULT_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("more than {0} pairings")]
    LimitExceeded(u64),
    #[error("coefficients must be positive integers")]
    NonPositiveCoefficient,
    #[error("degree must be at least 1")]
    ZeroDegree,
}

/// Letter slot in the `copy`-th copy of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub position: Position,
    pub copy: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// `min (#rectangles − #polygons) / 2n`; `None` when no pairing exists.
    pub bound: Option<Rational>,
    /// `partner[s]` for the best pairing, over the slots listed in `slots`.
    pub partner: Vec<usize>,
    pub slots: Vec<Slot>,
    pub examined: u64,
}

impl OracleResult {
    /// Euler characteristic of the best pairing's surface.
    pub fn euler_characteristic(&self) -> Option<i64> {
        self.bound.as_ref()?;
        let rect = self.partner.len() as i64 / 2;
        Some(count_cycles(&self.partner, &successor_table(&self.slots)) as i64 - rect)
    }
}

fn successor_table(slots: &[Slot]) -> Vec<usize> {
    // slots are laid out copy by copy, each copy a contiguous run of its word
    let mut next = vec![0; slots.len()];
    let mut start = 0;
    while start < slots.len() {
        let mut end = start;
        while end < slots.len()
            && slots[end].copy == slots[start].copy
            && slots[end].position.word == slots[start].position.word
        {
            end += 1;
        }
        for s in start..end {
            next[s] = if s + 1 == end { start } else { s + 1 };
        }
        start = end;
    }
    next
}

/// Cycles of `s ↦ σ(next(s))`.
fn count_cycles(partner: &[usize], next: &[usize]) -> usize {
    let mut seen = vec![false; partner.len()];
    let mut cycles = 0;
    for s in 0..partner.len() {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = partner[next[x]];
        }
    }
    cycles
}

struct Search<'a> {
    letters: &'a [Letter],
    next: &'a [usize],
    limit: u64,
    examined: &'a AtomicU64,
    stop: &'a AtomicBool,
}

impl Search<'_> {
    fn run(&self, partner: &mut Vec<usize>, best: &mut Option<(usize, Vec<usize>)>) {
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        let Some(s) = partner.iter().position(|&p| p == usize::MAX) else {
            if self.examined.fetch_add(1, Ordering::Relaxed) >= self.limit {
                self.stop.store(true, Ordering::Relaxed);
                return;
            }
            let cycles = count_cycles(partner, self.next);
            if best.as_ref().is_none_or(|(c, _)| cycles > *c) {
                *best = Some((cycles, partner.clone()));
            }
            return;
        };
        let want = self.letters[s].inv();
        for t in s + 1..partner.len() {
            if partner[t] == usize::MAX && self.letters[t] == want {
                partner[s] = t;
                partner[t] = s;
                self.run(partner, best);
                partner[s] = usize::MAX;
                partner[t] = usize::MAX;
            }
        }
    }
}

/// Exhaustive search over all pairings of `n` copies of a positive integral chain.
pub fn oracle_scl(terms: &[(CyclicWord, BigInt)], n: usize, limit: u64) -> Result<OracleResult, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroDegree);
    }
    let mut slots = Vec::new();
    let mut letters = Vec::new();
    for (i, (w, c)) in terms.iter().enumerate() {
        let c = match c.to_usize() {
            Some(c) if c > 0 => c,
            _ => return Err(OracleError::NonPositiveCoefficient),
        };
        for copy in 0..c * n {
            for j in 0..w.len() {
                slots.push(Slot { position: Position { word: i, index: j }, copy });
                letters.push(w.letter(j));
            }
        }
    }
    let next = successor_table(&slots);
    let examined = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let search = Search { letters: &letters, next: &next, limit, examined: &examined, stop: &stop };
    let total = slots.len();
    let unpaired = vec![usize::MAX; total];
    let best = if total == 0 {
        Some((0, Vec::new()))
    } else {
        let want = letters[0].inv();
        let firsts: Vec<usize> = (1..total).filter(|&t| letters[t] == want).collect();
        firsts
            .par_iter()
            .map(|&t| {
                let mut partner = unpaired.clone();
                partner[0] = t;
                partner[t] = 0;
                let mut best = None;
                search.run(&mut partner, &mut best);
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            // exact max over cycle counts; earlier first choice wins ties
            .fold(None, |acc: Option<(usize, Vec<usize>)>, cand| match acc {
                Some(a) if a.0 >= cand.0 => Some(a),
                _ => Some(cand),
            })
    };
    if stop.load(Ordering::Relaxed) {
        return Err(OracleError::LimitExceeded(limit));
    }
    let examined = examined.load(Ordering::Relaxed);
    Ok(match best {
        Some((cycles, partner)) => {
            let rect = total / 2;
            let bound = Rational::new(BigInt::from(rect) - BigInt::from(cycles), BigInt::from(2 * n));
            OracleResult { bound: Some(bound), partner, slots, examined }
        }
        None => OracleResult { bound: None, partner: Vec::new(), slots, examined },
    })
}

/// Oracle bound for a rational chain: the chain is inverse-normalized and
/// cleared of denominators `D`, and the bound divided by `D`.
pub fn oracle_chain(c: &Chain, n: usize, limit: u64) -> Result<Option<Rational>, OracleError> {
    let (terms, d) = c.integral_terms();
    let r = oracle_scl(&terms, n, limit)?;
    Ok(r.bound.map(|b| b / Rational::from_integer(d)))
}

/// Canonical representatives of all conjugacy classes of cyclically reduced
/// words of length `1..=max_len`, optionally only the null-homologous ones.
pub fn enumerate_cyclic_words(alphabet: &Alphabet, max_len: usize, null_homologous: bool) -> Vec<CyclicWord> {
    let rank = alphabet.rank();
    let all: Vec<Letter> =
        (0..rank as u16).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)]).collect();
    let mut out = BTreeSet::new();
    let mut word: Vec<Letter> = Vec::new();
    fn extend(
        word: &mut Vec<Letter>,
        all: &[Letter],
        max_len: usize,
        rank: usize,
        null_homologous: bool,
        out: &mut BTreeSet<CyclicWord>,
    ) {
        if !word.is_empty() && word[0] != word[word.len() - 1].inv() {
            let sums_zero = {
                let mut sums = vec![0i64; rank];
                for l in word.iter() {
                    sums[l.generator as usize] += l.exponent();
                }
                sums.iter().all(|s| *s == 0)
            };
            if !null_homologous || sums_zero {
                if let Ok(c) = CyclicWord::new(word) {
                    if c.len() == word.len() {
                        out.insert(c);
                    }
                }
            }
        }
        if word.len() == max_len {
            return;
        }
        for &l in all {
            if word.last().is_some_and(|&p| p == l.inv()) {
                continue;
            }
            word.push(l);
            extend(word, all, max_len, rank, null_homologous, out);
            word.pop();
        }
    }
    extend(&mut word, &all, max_len, rank, null_homologous, &mut out);
    out.into_iter().collect()
}

/// One chain's comparison between an LP value and oracle bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub chain: String,
    pub lp: Rational,
    pub bounds: Vec<(usize, Option<Rational>)>,
}

impl CorpusEntry {
    pub fn dominated(&self) -> bool {
        self.bounds.iter().all(|(_, b)| b.as_ref().is_none_or(|b| *b >= self.lp))
    }

    pub fn attained(&self) -> bool {
        self.bounds.iter().any(|(_, b)| b.as_ref() == Some(&self.lp))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusReport {
    pub fn all_dominated(&self) -> bool {
        self.entries.iter().all(CorpusEntry::dominated)
    }

    pub fn attained(&self) -> impl Iterator<Item = &CorpusEntry> {
        self.entries.iter().filter(|e| e.attained())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let bounds: Vec<String> = e
                .bounds
                .iter()
                .map(|(n, b)| match b {
                    Some(b) => format!("n={n}: {b}"),
                    None => format!("n={n}: none"),
                })
                .collect();
            let tag = match (e.dominated(), e.attained()) {
                (false, _) => "VIOLATION",
                (true, true) => "equal",
                (true, false) => "bounded",
            };
            out.push_str(&format!("{}  lp={}  {}  [{}]\n", e.chain, e.lp, bounds.join(", "), tag));
        }
        out
    }
}

/// Compares `scl_fn` against the oracle at each degree in `degrees`.
pub fn corpus_check_with<F>(chains: &[Chain], degrees: &[usize], limit: u64, scl_fn: F) -> Result<CorpusReport, OracleError>
where
    F: Fn(&Chain) -> Rational + Sync,
{
    let entries = chains
        .par_iter()
        .map(|c| {
            let lp = scl_fn(c);
            let bounds = degrees
                .iter()
                .map(|&n| oracle_chain(c, n, limit).map(|b| (n, b)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CorpusEntry { chain: c.render(), lp, bounds })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(CorpusReport { entries })
}

/// Compares the LP engine with the oracle; chains must be null-homologous.
pub fn corpus_check(chains: &[Chain], degrees: &[usize], limit: u64) -> Result<CorpusReport, OracleError> {
    corpus_check_with(chains, degrees, limit, |c| {
        crate::scl::scl(c).finite().cloned().unwrap_or_else(Rational::zero)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_chain;

    fn terms(text: &str) -> Vec<(CyclicWord, BigInt)> {
        let al = Alphabet::parse("a,b").unwrap();
        let mut out = Vec::new();
        for w in text.split('+') {
            let word = crate::words::parse_word(w.trim(), &al).unwrap();
            out.push((crate::words::cyclic_reduce(&word).unwrap().0, BigInt::from(1)));
        }
        out
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn commutator_has_one_pairing() {
        let r = oracle_scl(&terms("abAB"), 1, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.bound, Some(q(1, 2)));
        assert_eq!(r.examined, 1);
        assert_eq!(r.euler_characteristic(), Some(-1));
    }

    #[test]
    fn annulus_and_pants() {
        assert_eq!(oracle_scl(&terms("a + A"), 1, DEFAULT_LIMIT).unwrap().bound, Some(q(0, 1)));
        let pants = oracle_scl(&terms("ab + B + A"), 1, DEFAULT_LIMIT).unwrap();
        assert_eq!(pants.bound, Some(q(1, 2)));
        assert_eq!(pants.examined, 1);
    }

    #[test]
    fn limit_is_enforced() {
        assert_eq!(
            oracle_scl(&terms("abAB"), 3, 2).unwrap_err(),
            OracleError::LimitExceeded(2)
        );
    }

    #[test]
    fn word_enumeration_counts() {
        let al = Alphabet::parse("a,b").unwrap();
        // conjugacy classes of cyclically reduced words of length 1 and 2 in F₂
        let words = enumerate_cyclic_words(&al, 2, false);
        assert_eq!(words.len(), 4 + 8);
        let nh = enumerate_cyclic_words(&al, 4, true);
        assert!(nh.iter().any(|w| w.render(&al) == "abAB"));
        assert!(nh.iter().all(|w| w.len() == 4));
    }

    #[test]
    fn corpus_on_commutator() {
        let al = Alphabet::parse("a,b").unwrap();
        let report = corpus_check(&[parse_chain("abAB", &al).unwrap()], &[1], DEFAULT_LIMIT).unwrap();
        assert!(report.all_dominated());
        assert_eq!(report.attained().count(), 1);
    }
}
