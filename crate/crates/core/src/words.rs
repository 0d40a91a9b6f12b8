//! Free-group words, conjugacy classes and rational chains.
//!
//! Generators are single lowercase letters; the uppercase letter denotes the
//! inverse. Chains are stored over conjugacy classes, so conjugation is
//! already quotiented out; powers and inverses are folded into coefficients
//! when a chain is canonicalized.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(char),
    #[error("word reduces to the identity")]
    EmptyWord,
    #[error("term {0:?} is trivial in the free group")]
    TrivialWord(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("malformed chain expression: {0}")]
    Syntax(String),
}

/// A generator or its inverse. Ordered by generator index, with `x < x⁻¹`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u16, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    pub fn new(names: &[char]) -> Result<Self, WordError> {
        if names.is_empty() {
            return Err(WordError::InvalidAlphabet("no generators".into()));
        }
        for (i, &c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() {
                return Err(WordError::InvalidAlphabet(format!("{c:?} is not a lowercase letter")));
            }
            if names[..i].contains(&c) {
                return Err(WordError::InvalidAlphabet(format!("duplicate generator {c:?}")));
            }
        }
        Ok(Alphabet { names: names.to_vec() })
    }

    /// `a, b, c, ...` of the given rank.
    pub fn standard(rank: usize) -> Self {
        assert!((1..=26).contains(&rank), "rank must be between 1 and 26");
        Alphabet { names: (0..rank as u8).map(|i| (b'a' + i) as char).collect() }
    }

    /// Parses a comma-separated generator list such as `a,b`.
    pub fn parse(list: &str) -> Result<Self, WordError> {
        let mut names = Vec::new();
        for part in list.split(',') {
            let part = part.trim();
            let mut chars = part.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => names.push(c),
                _ => return Err(WordError::InvalidAlphabet(format!("bad generator {part:?}"))),
            }
        }
        Alphabet::new(&names)
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn letter(&self, symbol: char) -> Result<Letter, WordError> {
        let lower = symbol.to_ascii_lowercase();
        match self.names.iter().position(|&c| c == lower) {
            Some(i) => Ok(Letter::new(i as u16, symbol.is_ascii_uppercase())),
            None => Err(WordError::UnknownSymbol(symbol)),
        }
    }

    pub fn symbol(&self, letter: Letter) -> char {
        let c = self.names[letter.generator as usize];
        if letter.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn render(&self, letters: &[Letter]) -> String {
        letters.iter().map(|&l| self.symbol(l)).collect()
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn pow(&self, k: usize) -> Word {
        Word::from_letters(std::iter::repeat_n(self.letters.iter().copied(), k).flatten())
    }

    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        exponent_sums(&self.letters, rank)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        alphabet.render(&self.letters)
    }
}

fn exponent_sums(letters: &[Letter], rank: usize) -> Vec<i64> {
    let mut sums = vec![0i64; rank];
    for l in letters {
        sums[l.generator as usize] += l.exponent();
    }
    sums
}

pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word, WordError> {
    let letters = text.chars().map(|c| alphabet.letter(c)).collect::<Result<Vec<_>, _>>()?;
    Ok(Word::from_letters(letters))
}

/// Nonempty cyclically reduced word stored in its lexicographically minimal
/// rotation; the canonical representative of a conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// Builds the canonical representative of the conjugacy class of `letters`.
    pub fn new(letters: &[Letter]) -> Result<Self, WordError> {
        cyclic_reduce(&Word::from_letters(letters.iter().copied())).map(|(c, _)| c)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, i: usize) -> Letter {
        self.letters[i % self.letters.len()]
    }

    pub fn as_word(&self) -> Word {
        Word { letters: self.letters.clone() }
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.letters.iter().rev().map(|l| l.inv()).collect();
        CyclicWord { letters: min_rotation(&inv) }
    }

    /// Returns `(root, k)` with `self = root^k` and `root` primitive.
    pub fn root(&self) -> (CyclicWord, usize) {
        let n = self.letters.len();
        let period = primitive_period(&self.letters);
        (CyclicWord { letters: self.letters[..period].to_vec() }, n / period)
    }

    pub fn pow(&self, k: usize) -> CyclicWord {
        assert!(k >= 1);
        CyclicWord { letters: self.letters.repeat(k) }
    }

    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        exponent_sums(&self.letters, rank)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        alphabet.render(&self.letters)
    }
}

fn min_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    let rotation = |s: usize| letters[s..].iter().chain(letters[..s].iter());
    let best = (0..n)
        .min_by(|&s, &t| rotation(s).cmp(rotation(t)).then(s.cmp(&t)))
        .unwrap_or(0);
    rotation(best).copied().collect()
}

/// Smallest shift `k ≥ 1` at which `w` occurs in `ww`.
fn primitive_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    let doubled: Vec<Letter> = letters.iter().chain(letters.iter()).copied().collect();
    (1..=n).find(|&k| doubled[k..k + n] == *letters).unwrap_or(n)
}

/// Writes `w = conjugator · c · conjugator⁻¹` with `c` cyclically reduced and canonical.
pub fn cyclic_reduce(w: &Word) -> Result<(CyclicWord, Word), WordError> {
    let letters = w.letters();
    if letters.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let (mut lo, mut hi) = (0usize, letters.len());
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inv() {
        lo += 1;
        hi -= 1;
    }
    let core = &letters[lo..hi];
    let n = core.len();
    let rotation = |s: usize| core[s..].iter().chain(core[..s].iter());
    let shift = (0..n).min_by(|&s, &t| rotation(s).cmp(rotation(t)).then(s.cmp(&t))).unwrap_or(0);
    let canonical: Vec<Letter> = rotation(shift).copied().collect();
    // core = X · canonical · X⁻¹ with X = core[..shift]
    let prefix = Word::from_letters(letters[..lo].iter().copied());
    let conjugator = prefix.mul(&Word::from_letters(core[..shift].iter().copied()));
    Ok((CyclicWord { letters: canonical }, conjugator))
}

/// A finite rational combination of conjugacy classes.
///
/// Keys are primitive; a class and its inverse never both occur.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    alphabet: Alphabet,
    terms: BTreeMap<CyclicWord, Rational>,
}

impl Chain {
    pub fn empty(alphabet: Alphabet) -> Self {
        Chain { alphabet, terms: BTreeMap::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CyclicWord, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &CyclicWord) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `coeff · w`, extracting powers and folding inverses into existing keys.
    pub fn add_term(&mut self, w: &CyclicWord, coeff: &Rational) {
        let (root, k) = w.root();
        let coeff = coeff * Rational::from_integer(BigInt::from(k));
        if coeff.is_zero() {
            return;
        }
        let inv = root.inverse();
        let (key, c) = if self.terms.contains_key(&root) {
            (root, coeff)
        } else if self.terms.contains_key(&inv) || inv < root {
            (inv, -coeff)
        } else {
            (root, coeff)
        };
        let entry = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w, c);
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Chain {
        let mut out = Chain::empty(self.alphabet.clone());
        if k.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect();
        out
    }

    /// Replaces every class by its inverse.
    pub fn inverse(&self) -> Chain {
        let mut out = Chain::empty(self.alphabet.clone());
        out.terms = self.terms.iter().map(|(w, c)| (w.inverse(), c.clone())).collect();
        out
    }

    /// True iff the image in the abelianization vanishes.
    pub fn is_null_homologous(&self) -> bool {
        let rank = self.alphabet.rank();
        let mut sums = vec![Rational::zero(); rank];
        for (w, c) in &self.terms {
            for (g, e) in w.exponent_sums(rank).into_iter().enumerate() {
                if e != 0 {
                    sums[g] += c * Rational::from_integer(BigInt::from(e));
                }
            }
        }
        sums.iter().all(Zero::is_zero)
    }

    /// Every coefficient made positive by moving negative terms to the inverse class.
    pub fn inverse_normalized(&self) -> Chain {
        let mut out = Chain::empty(self.alphabet.clone());
        for (w, c) in &self.terms {
            if c.is_negative() {
                out.terms.insert(w.inverse(), -c.clone());
            } else {
                out.terms.insert(w.clone(), c.clone());
            }
        }
        out
    }

    /// Positive integral terms `D · c` after inverse normalization, together with `D`.
    pub fn integral_terms(&self) -> (Vec<(CyclicWord, BigInt)>, BigInt) {
        let pos = self.inverse_normalized();
        let denom = pos
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms = pos
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), (c * Rational::from_integer(denom.clone())).to_integer()))
            .collect();
        (terms, denom)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let word = w.render(&self.alphabet);
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            if mag.is_one() {
                out.push_str(&word);
            } else {
                out.push_str(&format!("{mag}*{word}"));
            }
        }
        out
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Canonical chain of a list of `(word, coefficient)` pairs modulo conjugation,
/// `gⁿ − n·g` and `g⁻¹ + g`.
pub fn canonicalize_chain<S: AsRef<str>>(
    raw: &[(S, Rational)],
    alphabet: &Alphabet,
) -> Result<Chain, WordError> {
    let mut chain = Chain::empty(alphabet.clone());
    for (text, coeff) in raw {
        let word = parse_word(text.as_ref(), alphabet)?;
        let (cyc, _) = cyclic_reduce(&word).map_err(|_| WordError::TrivialWord(text.as_ref().to_string()))?;
        chain.add_term(&cyc, coeff);
    }
    Ok(chain)
}

pub fn is_null_homologous(c: &Chain) -> bool {
    c.is_null_homologous()
}

pub fn chain_inverse_normalize(c: &Chain) -> Chain {
    c.inverse_normalized()
}

/// Parses `term (± term)*` with `term = [coeff '*'] word`, e.g. `abAB + 1/2*bb - aB`.
pub fn parse_chain_terms(text: &str) -> Result<Vec<(String, Rational)>, WordError> {
    let mut rest = text.trim();
    if rest.is_empty() {
        return Err(WordError::Syntax("empty expression".into()));
    }
    let mut sign = Rational::one();
    if let Some(r) = rest.strip_prefix('-') {
        sign = -sign;
        rest = r;
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r;
    }
    let mut terms = Vec::new();
    loop {
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let body = rest[..end].trim();
        if body.is_empty() {
            return Err(WordError::Syntax("missing term".into()));
        }
        let (coeff, word) = match body.split_once('*') {
            Some((c, w)) => (parse_rational(c.trim())?, w.trim()),
            None => (Rational::one(), body),
        };
        if word.is_empty() || !word.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(WordError::Syntax(format!("bad word {word:?}")));
        }
        terms.push((word.to_string(), sign * coeff));
        rest = &rest[end..];
        match rest.chars().next() {
            None => break,
            Some(op) => {
                sign = if op == '-' { -Rational::one() } else { Rational::one() };
                rest = &rest[1..];
            }
        }
    }
    Ok(terms)
}

pub fn parse_rational(text: &str) -> Result<Rational, WordError> {
    let bad = || WordError::Syntax(format!("bad coefficient {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Parses and canonicalizes a chain expression.
pub fn parse_chain(text: &str, alphabet: &Alphabet) -> Result<Chain, WordError> {
    let terms = parse_chain_terms(text)?;
    canonicalize_chain(&terms, alphabet)
}

/// Total order on chains used for deterministic corpora: by total length, then keys.
pub fn chain_cmp(a: &Chain, b: &Chain) -> Ordering {
    let len = |c: &Chain| c.terms.keys().map(CyclicWord::len).sum::<usize>();
    len(a).cmp(&len(b)).then_with(|| a.terms.iter().cmp(b.terms.iter()))
}
