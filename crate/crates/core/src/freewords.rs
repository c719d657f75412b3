//! Reduced words in free groups, stored as syllables with arbitrary-precision
//! exponents.
//!
//! Generator 0 is `a` and generator 1 is `b` for two-letter relators;
//! presentation words reuse the same type over larger generator sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub const GEN_A: u32 = 0;
pub const GEN_B: u32 = 1;

/// Syllable counts above this are refused when expanding powers of
/// non-syllable words.
const MAX_EXPANDED_SYLLABLES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero exponent literal at byte {pos}")]
    ZeroExponent { pos: usize },
    #[error("unknown letter '{ch}' at byte {pos}")]
    UnknownLetter { ch: char, pos: usize },
    #[error("degenerate word: {0}")]
    Degenerate(String),
    #[error("no assignment for generator {0}")]
    MissingAssignment(u32),
    #[error("word too large to expand")]
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub gen: u32,
    pub exp: BigInt,
}

/// A freely reduced word: no zero exponents, no two adjacent syllables on
/// the same generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Self {
        Word { syllables: Vec::new() }
    }

    pub fn gen_power(gen: u32, exp: impl Into<BigInt>) -> Self {
        let exp = exp.into();
        if exp.is_zero() {
            return Word::identity();
        }
        Word { syllables: vec![Syllable { gen, exp }] }
    }

    pub fn generator(gen: u32) -> Self {
        Word::gen_power(gen, 1)
    }

    /// Builds a word from arbitrary syllables, reducing as it goes.
    pub fn from_syllables<I>(iter: I) -> Self
    where
        I: IntoIterator<Item = (u32, BigInt)>,
    {
        let mut w = Word::identity();
        for (gen, exp) in iter {
            w.push(gen, exp);
        }
        w
    }

    /// Builds a word from letters `(generator, +1 | -1)`.
    pub fn from_letters<I>(iter: I) -> Self
    where
        I: IntoIterator<Item = (u32, i8)>,
    {
        Word::from_syllables(iter.into_iter().map(|(g, s)| (g, BigInt::from(s))))
    }

    fn push(&mut self, gen: u32, exp: BigInt) {
        if exp.is_zero() {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.gen == gen {
                last.exp += exp;
                if last.exp.is_zero() {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push(Syllable { gen, exp });
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    /// Total number of letters, `sum |exp|`.
    pub fn letter_length(&self) -> BigInt {
        self.syllables.iter().map(|s| s.exp.abs()).sum()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push(s.gen, s.exp.clone());
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable { gen: s.gen, exp: -&s.exp })
                .collect(),
        }
    }

    pub fn pow(&self, k: &BigInt) -> Result<Word, WordError> {
        if k.is_zero() || self.is_identity() {
            return Ok(Word::identity());
        }
        if k.is_negative() {
            return self.inverse().pow(&-k);
        }
        // w = u v u^-1 with v cyclically reduced, so w^k = u v^k u^-1.
        let (conj, core) = self.split_conjugate();
        if core.syllables.len() == 1 {
            let s = &core.syllables[0];
            let powered = Word::gen_power(s.gen, &s.exp * k);
            return Ok(conj.mul(&powered).mul(&conj.inverse()));
        }
        let reps = k.to_usize().ok_or(WordError::TooLarge)?;
        if reps.saturating_mul(core.syllables.len()) > MAX_EXPANDED_SYLLABLES {
            return Err(WordError::TooLarge);
        }
        let mut body = Word::identity();
        for _ in 0..reps {
            body = body.mul(&core);
        }
        Ok(conj.mul(&body).mul(&conj.inverse()))
    }

    /// Splits `self = u * core * u^-1` with `core` cyclically reduced
    /// (no rotation applied).
    fn split_conjugate(&self) -> (Word, Word) {
        let mut syl = self.syllables.clone();
        let mut prefix: Vec<Syllable> = Vec::new();
        loop {
            if syl.len() < 2 {
                break;
            }
            let first_gen = syl[0].gen;
            let last_gen = syl[syl.len() - 1].gen;
            if first_gen != last_gen {
                break;
            }
            let last = syl.pop().unwrap();
            let e1 = syl[0].exp.clone();
            let e2 = last.exp;
            let sum = &e1 + &e2;
            // w = g^e1 .. g^e2 = g^-e2 (g^(e1+e2) ..) g^e2
            prefix.push(Syllable { gen: first_gen, exp: -&e2 });
            if sum.is_zero() {
                syl.remove(0);
            } else {
                syl[0].exp = sum;
            }
        }
        let u = Word::from_syllables(prefix.into_iter().map(|s| (s.gen, s.exp)));
        (u, Word { syllables: syl })
    }

    pub fn exponent_sum(&self, gen: u32) -> BigInt {
        self.syllables.iter().filter(|s| s.gen == gen).map(|s| s.exp.clone()).sum()
    }

    pub fn generators(&self) -> BTreeSet<u32> {
        self.syllables.iter().map(|s| s.gen).collect()
    }

    pub fn involves(&self, gen: u32) -> bool {
        self.syllables.iter().any(|s| s.gen == gen)
    }

    /// Expands into unit letters; `None` when longer than `max_len`.
    pub fn letters(&self, max_len: usize) -> Option<Vec<(u32, i8)>> {
        let mut out = Vec::new();
        for s in &self.syllables {
            let n = s.exp.abs().to_usize()?;
            if out.len() + n > max_len {
                return None;
            }
            let sign = if s.exp.is_positive() { 1 } else { -1 };
            out.extend(std::iter::repeat((s.gen, sign)).take(n));
        }
        Some(out)
    }

    /// Applies `f` to every generator id. The result is re-reduced, so
    /// non-injective maps are allowed.
    pub fn map_generators(&self, f: impl Fn(u32) -> u32) -> Word {
        Word::from_syllables(self.syllables.iter().map(|s| (f(s.gen), s.exp.clone())))
    }

    /// Writes the word with the given generator names, e.g. `x1^2 x2^-1`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        NamedWord { word: self, names }
    }
}

struct NamedWord<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for NamedWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return write!(f, "1");
        }
        for (i, s) in self.word.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match self.names.get(s.gen as usize) {
                Some(n) => write!(f, "{n}")?,
                None => write!(f, "g{}", s.gen)?,
            }
            if !s.exp.is_one() {
                write!(f, "^{}", s.exp)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    /// Two-letter words print over `a`, `b`; other generators as `g<id>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["a".to_string(), "b".to_string()];
        let shown = self.display_with(&names).to_string();
        f.write_str(&shown)
    }
}

fn syllable_key(s: &Syllable) -> (u32, BigInt, bool) {
    (s.gen, s.exp.abs(), s.exp.is_negative())
}

fn syllables_cmp(x: &[Syllable], y: &[Syllable]) -> std::cmp::Ordering {
    x.iter().map(syllable_key).cmp(y.iter().map(syllable_key))
}

/// Cyclically reduces `w` and rotates it to its least rotation, comparing
/// syllables by generator, then absolute exponent, then positive before
/// negative. Words over `{a, b}` therefore start with an `a`-syllable.
pub fn cyclic_reduce(w: &Word) -> Word {
    let (_, core) = w.split_conjugate();
    let k = core.syllables.len();
    if k <= 1 {
        return core;
    }
    let mut best: Option<Vec<Syllable>> = None;
    for r in 0..k {
        let rot: Vec<Syllable> =
            core.syllables[r..].iter().chain(core.syllables[..r].iter()).cloned().collect();
        match &best {
            Some(b) if syllables_cmp(&rot, b) != std::cmp::Ordering::Less => {}
            _ => best = Some(rot),
        }
    }
    Word { syllables: best.unwrap() }
}

/// True when `w` is cyclically reduced (but not necessarily rotated).
pub fn is_cyclically_reduced(w: &Word) -> bool {
    let s = &w.syllables;
    s.len() < 2 || s[0].gen != s[s.len() - 1].gen
}

/// Exponent data of a two-letter relator, with `beta` the NEGATIVE of the
/// exponent sum of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentProfile {
    pub alpha: BigInt,
    pub beta: BigInt,
    pub t: usize,
    pub alpha_list: Vec<BigInt>,
    pub beta_list: Vec<BigInt>,
    pub delta_a: BigInt,
    pub delta_b: BigInt,
    pub involves_a: bool,
    pub involves_b: bool,
}

pub fn exponent_profile(w: &Word) -> Result<ExponentProfile, WordError> {
    let gens = w.generators();
    if gens.iter().any(|&g| g > GEN_B) {
        return Err(WordError::Degenerate("word uses letters other than a, b".into()));
    }
    let r = cyclic_reduce(w);
    if !r.involves(GEN_A) || !r.involves(GEN_B) {
        return Err(WordError::Degenerate(
            "cyclic reduction does not involve both a and b".into(),
        ));
    }
    let mut alpha_list = Vec::new();
    let mut beta_list = Vec::new();
    for s in &r.syllables {
        if s.gen == GEN_A {
            alpha_list.push(s.exp.clone());
        } else {
            beta_list.push(s.exp.clone());
        }
    }
    debug_assert_eq!(alpha_list.len(), beta_list.len());
    let alpha: BigInt = alpha_list.iter().sum();
    let beta: BigInt = -beta_list.iter().sum::<BigInt>();
    let delta_a = alpha_list.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let delta_b = beta_list.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    Ok(ExponentProfile {
        alpha,
        beta,
        t: alpha_list.len(),
        alpha_list,
        beta_list,
        delta_a,
        delta_b,
        involves_a: true,
        involves_b: true,
    })
}

/// Swaps `a` and `b` and inverts every letter, keeping letter order.
pub fn reflect_word(w: &Word) -> Word {
    Word::from_syllables(w.syllables.iter().map(|s| {
        let gen = match s.gen {
            GEN_A => GEN_B,
            GEN_B => GEN_A,
            g => g,
        };
        (gen, -&s.exp)
    }))
}

pub fn substitute(w: &Word, assignment: &BTreeMap<u32, Word>) -> Result<Word, WordError> {
    let mut out = Word::identity();
    for s in &w.syllables {
        let image = assignment.get(&s.gen).ok_or(WordError::MissingAssignment(s.gen))?;
        out = out.mul(&image.pow(&s.exp)?);
    }
    Ok(out)
}

pub fn parse_word(text: &str) -> Result<Word, WordError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let w = p.sequence()?;
    p.skip_separators();
    if p.pos < p.src.len() {
        let ch = p.src[p.pos] as char;
        return Err(WordError::Syntax { pos: p.pos, msg: format!("unexpected '{ch}'") });
    }
    Ok(w)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_separators(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() || c == b'*' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_separators();
        self.src.get(self.pos).copied()
    }

    fn sequence(&mut self) -> Result<Word, WordError> {
        let mut w = Word::identity();
        while let Some(c) = self.peek() {
            if c == b')' {
                break;
            }
            let atom = self.atom()?;
            let item = if self.peek() == Some(b'^') {
                self.pos += 1;
                let k = self.exponent()?;
                atom.pow(&k)?
            } else {
                atom
            };
            w = w.mul(&item);
        }
        Ok(w)
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        let pos = self.pos;
        let c = self.src[pos];
        self.pos += 1;
        match c {
            b'a' => Ok(Word::gen_power(GEN_A, 1)),
            b'b' => Ok(Word::gen_power(GEN_B, 1)),
            b'A' => Ok(Word::gen_power(GEN_A, -1)),
            b'B' => Ok(Word::gen_power(GEN_B, -1)),
            b'(' => {
                let inner = self.sequence()?;
                if self.peek() != Some(b')') {
                    return Err(WordError::Syntax { pos: self.pos, msg: "missing ')'".into() });
                }
                self.pos += 1;
                Ok(inner)
            }
            b'^' | b')' | b'0'..=b'9' | b'-' | b'+' => {
                Err(WordError::Syntax { pos, msg: format!("unexpected '{}'", c as char) })
            }
            _ => {
                let ch = text_char_at(self.src, pos);
                Err(WordError::UnknownLetter { ch, pos })
            }
        }
    }

    fn exponent(&mut self) -> Result<BigInt, WordError> {
        self.skip_separators();
        let start = self.pos;
        let mut end = self.pos;
        if end < self.src.len() && (self.src[end] == b'-' || self.src[end] == b'+') {
            end += 1;
        }
        let digits_start = end;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits_start {
            return Err(WordError::Syntax { pos: start, msg: "expected integer after '^'".into() });
        }
        let text = std::str::from_utf8(&self.src[start..end]).expect("ascii");
        let k: BigInt = text.parse().map_err(|_| WordError::Syntax {
            pos: start,
            msg: format!("bad integer '{text}'"),
        })?;
        if k.is_zero() {
            return Err(WordError::ZeroExponent { pos: start });
        }
        self.pos = end;
        Ok(k)
    }
}

fn text_char_at(src: &[u8], pos: usize) -> char {
    std::str::from_utf8(&src[pos..])
        .ok()
        .and_then(|s| s.chars().next())
        .unwrap_or(src[pos] as char)
}

/// Least positive `p` with `p * x ≡ 1 (mod m)`; `None` when `gcd(x, m) ≠ 1`.
/// For `m = 0` the congruence is an equation and needs `x = ±1`.
pub fn inverse_mod(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let m = m.abs();
    if m.is_zero() {
        return if x.abs().is_one() { Some(x.clone()) } else { None };
    }
    if m.is_one() {
        return Some(BigInt::one());
    }
    let e = x.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let p = e.x.mod_floor(&m);
    Some(if p.is_zero() { m } else { p })
}
