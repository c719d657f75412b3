//! Group presentations over numbered generators, the generator-elimination
//! move for relators `R(x_i, x_j)` next to a power relator, killing
//! generators, Smith normal form, and the case-by-case simplification plans
//! that reduce a digraph presentation to a cyclic group or to a quotient of
//! `K = <a, b | R>`.
//!
//! Every elimination here is only valid when `a^alpha = b^beta` holds in `K`;
//! callers establish that with the oracle first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{self, Digraph, PruneKind, Shape};
use crate::freewords::{
    exponent_profile, inverse_mod, substitute, ExponentProfile, Word, WordError, GEN_A, GEN_B,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Digraph(#[from] digraph::DigraphError),
    #[error("gcd condition fails: gcd({coef}, {gamma}) != 1")]
    Gcd { coef: BigInt, gamma: BigInt },
    #[error("relator {index} is not of the required form: {msg}")]
    BadRelator { index: usize, msg: String },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("no simplification plan: {0}")]
    NoPlan(String),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

type Result<T> = std::result::Result<T, PresentationError>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Presentation {
    generators: BTreeMap<u32, String>,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators must only use the listed generator ids.
    pub fn new(generators: Vec<(u32, String)>, relators: Vec<Word>) -> Self {
        let p = Presentation { generators: generators.into_iter().collect(), relators };
        debug_assert!(p.relators.iter().all(|r| r.generators().iter().all(|g| p.generators.contains_key(g))));
        p
    }

    pub fn generator_ids(&self) -> Vec<u32> {
        self.generators.keys().copied().collect()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.generators.get(&id).map(String::as_str)
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.generators.iter().find(|(_, n)| n.as_str() == name).map(|(&id, _)| id)
    }

    fn require(&self, name: &str) -> Result<u32> {
        self.id_of(name).ok_or_else(|| PresentationError::UnknownGenerator(name.to_string()))
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn push_relator(&mut self, w: Word) {
        self.relators.push(w);
    }

    /// Renders a word with this presentation's generator names.
    pub fn word_to_string(&self, w: &Word) -> String {
        let max = self.generators.keys().next_back().map_or(0, |&m| m as usize + 1);
        let mut names = vec![String::new(); max.max(2)];
        for (&id, n) in &self.generators {
            names[id as usize] = n.clone();
        }
        let shown = w.display_with(&names).to_string();
        shown
    }

    /// Exponent-sum matrix, rows = relators, columns = generators by id.
    pub fn relation_matrix(&self) -> Vec<Vec<BigInt>> {
        let ids = self.generator_ids();
        self.relators.iter().map(|r| ids.iter().map(|&g| r.exponent_sum(g)).collect()).collect()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self.generators.values().map(String::as_str).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| self.word_to_string(r)).collect();
        write!(f, "< {} | {} >", gens.join(", "), rels.join(", "))
    }
}

/// `R(x_u, x_v)` as a word over generator ids.
pub fn relator_on(relator: &Word, u: u32, v: u32) -> Word {
    relator.map_generators(|g| if g == GEN_A { u } else { v })
}

fn check_relator(relator: &Word) -> Result<ExponentProfile> {
    let prof = exponent_profile(relator)?;
    if !crate::freewords::is_cyclically_reduced(relator) {
        return Err(WordError::Degenerate("relator is not cyclically reduced".into()).into());
    }
    Ok(prof)
}

/// One generator `x<label>` per vertex (id = vertex index), one relator
/// `R(x_u, x_v)` per arc in sorted arc order.
pub fn instantiate(g: &Digraph, relator: &Word) -> Result<Presentation> {
    check_relator(relator)?;
    let generators =
        (0..g.vertex_count()).map(|v| (v as u32, format!("x{}", g.label(v)))).collect();
    let relators = g.arcs().map(|(u, v)| relator_on(relator, u as u32, v as u32)).collect();
    Ok(Presentation::new(generators, relators))
}

pub fn kill_generators(p: &Presentation, victims: &BTreeSet<u32>) -> Presentation {
    let generators: Vec<(u32, String)> = p
        .generators
        .iter()
        .filter(|(id, _)| !victims.contains(id))
        .map(|(&id, n)| (id, n.clone()))
        .collect();
    let relators = p
        .relators
        .iter()
        .map(|r| {
            Word::from_syllables(
                r.syllables().iter().filter(|s| !victims.contains(&s.gen)).map(|s| (s.gen, s.exp.clone())),
            )
        })
        .filter(|r| !r.is_identity())
        .collect();
    Presentation::new(generators, relators)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Removes the first argument of `R(x_i, x_j)`.
    A,
    /// Removes the second argument.
    B,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub removed: String,
    pub kept: String,
    pub relator_index: usize,
    /// `None` for the unit move (`gamma = 0`, needs `|alpha| = 1` or `|beta| = 1`).
    pub power_index: Option<usize>,
    pub side: Side,
    #[serde(with = "crate::bigstr")]
    pub gamma: BigInt,
    #[serde(with = "crate::bigstr")]
    pub p: BigInt,
    #[serde(with = "crate::bigstr")]
    pub q: BigInt,
    #[serde(with = "crate::bigstr")]
    pub r: BigInt,
    /// `removed -> kept^exponent`.
    #[serde(with = "crate::bigstr")]
    pub substitution_exponent: BigInt,
}

/// Single-syllable relator `x^e`, as `(x, e)`.
fn as_power(w: &Word) -> Option<(u32, BigInt)> {
    match w.syllables() {
        [s] => Some((s.gen, s.exp.clone())),
        _ => None,
    }
}

/// The generator-elimination move.
///
/// Side `a` removes `x_i` from `R(x_i, x_j)` using `x_i^gamma`, with
/// `p * alpha ≡ 1 (mod gamma)`: `x_i` becomes `x_j^(p beta)` and
/// `x_j^(beta gamma)` is adjoined. Side `b` is the mirror image. The removed
/// relators are dropped and the adjoined power goes last.
pub fn eliminate_generator(
    pres: &Presentation,
    relator: &Word,
    relator_index: usize,
    power_index: Option<usize>,
    side: Side,
    p_override: Option<BigInt>,
) -> Result<(Presentation, EliminationStep)> {
    let prof = check_relator(relator)?;
    let rel = pres.relators.get(relator_index).ok_or_else(|| PresentationError::BadRelator {
        index: relator_index,
        msg: "index out of range".into(),
    })?;
    let gens: Vec<u32> = rel.generators().into_iter().collect();
    let (i, j) = match gens.as_slice() {
        [x, y] if relator_on(relator, *x, *y) == *rel => (*x, *y),
        [x, y] if relator_on(relator, *y, *x) == *rel => (*y, *x),
        _ => {
            return Err(PresentationError::BadRelator {
                index: relator_index,
                msg: format!("{} is not R(x_i, x_j)", pres.word_to_string(rel)),
            })
        }
    };
    let (removed, kept, coef, other) = match side {
        Side::A => (i, j, &prof.alpha, &prof.beta),
        Side::B => (j, i, &prof.beta, &prof.alpha),
    };
    let gamma = match power_index {
        None => BigInt::zero(),
        Some(k) => {
            if k == relator_index {
                return Err(PresentationError::BadRelator { index: k, msg: "power index equals relator index".into() });
            }
            let w = pres.relators.get(k).ok_or_else(|| PresentationError::BadRelator {
                index: k,
                msg: "index out of range".into(),
            })?;
            match as_power(w) {
                Some((g, e)) if g == removed => e,
                _ => {
                    return Err(PresentationError::BadRelator {
                        index: k,
                        msg: format!("expected a power of {}", pres.name(removed).unwrap_or("?")),
                    })
                }
            }
        }
    };
    if !coef.gcd(&gamma).is_one() {
        return Err(PresentationError::Gcd { coef: coef.clone(), gamma });
    }
    let p = match p_override {
        Some(p) => p,
        None => inverse_mod(coef, &gamma).expect("gcd checked"),
    };
    let residue = BigInt::one() - &p * coef;
    let q = if gamma.is_zero() {
        if !residue.is_zero() {
            return Err(PresentationError::Replay(format!("p = {p} does not invert {coef}")));
        }
        BigInt::zero()
    } else {
        if !residue.is_multiple_of(&gamma) {
            return Err(PresentationError::Replay(format!("p = {p} does not invert {coef} mod {gamma}")));
        }
        &residue / &gamma
    };
    let subst_exp = &p * other;
    let adjoined = other * &gamma;
    let mut assignment: BTreeMap<u32, Word> =
        pres.generators.keys().map(|&g| (g, Word::generator(g))).collect();
    assignment.insert(removed, Word::gen_power(kept, subst_exp.clone()));
    let mut relators = Vec::new();
    for (k, w) in pres.relators.iter().enumerate() {
        if k == relator_index || Some(k) == power_index {
            continue;
        }
        relators.push(substitute(w, &assignment)?);
    }
    if !adjoined.is_zero() {
        relators.push(Word::gen_power(kept, adjoined.clone()));
    }
    let mut generators = pres.generators.clone();
    let removed_name = generators.remove(&removed).unwrap();
    let step = EliminationStep {
        removed: removed_name,
        kept: pres.generators[&kept].clone(),
        relator_index,
        power_index,
        side,
        gamma,
        p,
        q,
        r: adjoined.abs(),
        substitution_exponent: subst_exp,
    };
    Ok((Presentation { generators, relators }, step))
}

/// Replaces all pure-power relators on `generator` by one power whose
/// exponent is their gcd, and drops identity relators. Returns the exponent.
pub fn subsume_powers(pres: &Presentation, generator: u32) -> (Presentation, BigInt) {
    let mut exponent = BigInt::zero();
    let mut relators = Vec::new();
    for w in &pres.relators {
        match as_power(w) {
            Some((g, e)) if g == generator => exponent = exponent.gcd(&e),
            _ if w.is_identity() => {}
            _ => relators.push(w.clone()),
        }
    }
    if !exponent.is_zero() {
        relators.push(Word::gen_power(generator, exponent.clone()));
    }
    (Presentation { generators: pres.generators.clone(), relators }, exponent)
}

/// Arcs along which a power relator is derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PowerChain {
    /// Generator names `c_1 .. c_n` with relators `R(c_k, c_{k+1})` and
    /// `R(c_n, c_1)` (a directed cycle).
    Cycle { vertices: Vec<String> },
    /// Source `s`, long path `s -> l_1 -> .. -> t` and short path
    /// `s -> h_1 -> .. -> t`; the power lands on `l_1`.
    TwoPath { long: Vec<String>, short: Vec<String> },
}

/// Returns `x^gamma` on the chain's start generator, which holds in the group
/// whenever `a^alpha = b^beta` in `K`.
///
/// Cycle of length `n`: `gamma = alpha^n - beta^n` on `c_1`. Two paths with
/// `L` and `d` arcs (`L > d`): `gamma = alpha^(L-1) - alpha^(d-1) beta^(L-d)`
/// on the first long-path vertex after the source.
pub fn derive_power_relator(
    pres: &Presentation,
    relator: &Word,
    chain: &PowerChain,
) -> Result<Word> {
    let prof = check_relator(relator)?;
    let (alpha, beta) = (&prof.alpha, &prof.beta);
    let has = |u: &str, v: &str| -> Result<bool> {
        let (iu, iv) = (pres.require(u)?, pres.require(v)?);
        Ok(pres.relators.contains(&relator_on(relator, iu, iv)))
    };
    let bad = |m: String| PresentationError::BadRelator { index: 0, msg: m };
    match chain {
        PowerChain::Cycle { vertices } => {
            let n = vertices.len();
            if n < 2 {
                return Err(bad("cycle chain needs two vertices".into()));
            }
            for k in 0..n {
                let (u, v) = (&vertices[k], &vertices[(k + 1) % n]);
                if !has(u, v)? {
                    return Err(bad(format!("missing R({u}, {v})")));
                }
            }
            let gamma = num_traits::pow(alpha.clone(), n) - num_traits::pow(beta.clone(), n);
            Ok(Word::gen_power(pres.require(&vertices[0])?, gamma))
        }
        PowerChain::TwoPath { long, short } => {
            // Both lists run from the source to the sink inclusive.
            let (l, d) = (long.len().saturating_sub(1), short.len().saturating_sub(1));
            if d == 0 || l <= d || long[0] != short[0] || long[l] != short[d] {
                return Err(bad("two-path chain needs 1 <= d < L with shared ends".into()));
            }
            for path in [long, short] {
                for w in path.windows(2) {
                    if !has(&w[0], &w[1])? {
                        return Err(bad(format!("missing R({}, {})", w[0], w[1])));
                    }
                }
            }
            let gamma = num_traits::pow(alpha.clone(), l - 1)
                - num_traits::pow(alpha.clone(), d - 1) * num_traits::pow(beta.clone(), l - d);
            Ok(Word::gen_power(pres.require(&long[1])?, gamma))
        }
    }
}

/// Invariant factors `d_1 | d_2 | ..` of length `min(rows, cols)`, 0 for an
/// infinite factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    #[serde(with = "crate::bigstr::vec")]
    pub invariant_factors: Vec<BigInt>,
}

pub fn smith_normal_form(matrix: &[Vec<BigInt>]) -> SnfResult {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut factors = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // Pivot on the least nonzero |entry| of the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                factors.resize(rows.min(cols), BigInt::zero());
                return SnfResult { invariant_factors: factors };
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    let (upper, lower) = a.split_at_mut(i);
                    for (x, p) in lower[0][t..].iter_mut().zip(&upper[t][t..]) {
                        *x -= &q * p;
                    }
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a[t..].iter_mut() {
                        let v = &q * &row[t];
                        row[j] -= v;
                    }
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: fold a non-multiple row into the pivot row.
            let bad_row = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match bad_row {
                Some(i) => {
                    let (upper, lower) = a.split_at_mut(i);
                    for (p, x) in upper[t][t..].iter_mut().zip(&lower[0][t..]) {
                        *p += x;
                    }
                }
                None => break,
            }
        }
        factors.push(a[t][t].abs());
    }
    SnfResult { invariant_factors: factors }
}

/// Invariant factors of the abelianization with 1s dropped; one 0 per free
/// rank.
pub fn abelian_invariants(pres: &Presentation) -> Vec<BigInt> {
    let m = pres.relation_matrix();
    let gens = pres.generator_count();
    let mut factors = if m.is_empty() { Vec::new() } else { smith_normal_form(&m).invariant_factors };
    factors.resize(gens, BigInt::zero());
    factors.retain(|f| !f.is_one());
    // Zeros last, matching the divisibility chain.
    factors.sort_by(|x, y| match (x.is_zero(), y.is_zero()) {
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => x.cmp(y),
    });
    factors
}

/// Order of the abelianization, `None` when infinite.
pub fn abelian_order(pres: &Presentation) -> Option<BigInt> {
    let f = abelian_invariants(pres);
    if f.iter().any(Zero::is_zero) {
        None
    } else {
        Some(f.iter().product())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum TraceStep {
    Derive {
        generator: String,
        chain: PowerChain,
        #[serde(with = "crate::bigstr")]
        gamma: BigInt,
    },
    Eliminate(EliminationStep),
    Subsume {
        generator: String,
        #[serde(with = "crate::bigstr")]
        exponent: BigInt,
    },
    /// Two generators `a`, `b` with relators `b^e`, `R(a, b)`, `R(a, b^k)`
    /// (`beta | e`, `beta | k`) become `R(a, b)`, `a^r` using
    /// `b^beta = a^alpha`.
    KRewrite {
        a: String,
        b: String,
        #[serde(with = "crate::bigstr")]
        exponent: BigInt,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimplifyOutcome {
    /// `<x | x^order>`; order 0 means infinite cyclic.
    Cyclic {
        generator: String,
        #[serde(with = "crate::bigstr")]
        order: BigInt,
    },
    /// `<a, b | R(a, b), power>` with the power on `a` or `b`.
    KQuotient {
        a: String,
        b: String,
        power_on: Side,
        #[serde(with = "crate::bigstr")]
        exponent: BigInt,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplification {
    pub trace: Vec<TraceStep>,
    pub outcome: SimplifyOutcome,
    pub final_presentation: Presentation,
}

#[derive(Debug, Clone)]
enum Planned {
    Derive(PowerChain),
    /// `(removed, kept)` pairs along which one `p` serves every step.
    PowerChain(Side, Vec<(String, String)>),
    Unit(Side, String, String),
    Subsume(String),
    KRewrite(String, String),
}

/// Finds `R(x_u, x_v)` where `{u, v} = {removed, kept}` oriented by `side`.
fn find_relator(pres: &Presentation, relator: &Word, side: Side, removed: u32, kept: u32) -> Result<usize> {
    let want = match side {
        Side::A => relator_on(relator, removed, kept),
        Side::B => relator_on(relator, kept, removed),
    };
    pres.relators.iter().position(|w| *w == want).ok_or_else(|| {
        PresentationError::NoPlan(format!(
            "relator {} not present",
            pres.word_to_string(&want)
        ))
    })
}

fn find_power(pres: &Presentation, gen: u32) -> Result<usize> {
    let hits: Vec<usize> = (0..pres.relators.len())
        .filter(|&k| matches!(as_power(&pres.relators[k]), Some((g, _)) if g == gen))
        .collect();
    match hits.as_slice() {
        [k] => Ok(*k),
        _ => Err(PresentationError::NoPlan(format!(
            "expected one power relator on {}, found {}",
            pres.name(gen).unwrap_or("?"),
            hits.len()
        ))),
    }
}

fn run_plan(
    start: Presentation,
    relator: &Word,
    prof: &ExponentProfile,
    plan: &[Planned],
) -> Result<(Presentation, Vec<TraceStep>)> {
    let mut pres = start;
    let mut trace = Vec::new();
    for step in plan {
        match step {
            Planned::Derive(chain) => {
                let w = derive_power_relator(&pres, relator, chain)?;
                let (gen, gamma) = as_power(&w).ok_or_else(|| {
                    PresentationError::NoPlan("derived power relator is trivial".into())
                })?;
                pres.push_relator(w);
                trace.push(TraceStep::Derive {
                    generator: pres.name(gen).unwrap().to_string(),
                    chain: chain.clone(),
                    gamma,
                });
            }
            Planned::PowerChain(side, pairs) => {
                let Some((first, _)) = pairs.first() else { continue };
                let first_id = pres.require(first)?;
                let gamma0 = as_power(&pres.relators[find_power(&pres, first_id)?]).unwrap().1;
                let (coef, other) = match side {
                    Side::A => (&prof.alpha, &prof.beta),
                    Side::B => (&prof.beta, &prof.alpha),
                };
                // One p for the whole chain: invert modulo the last gamma.
                let modulus = gamma0 * num_traits::pow(other.clone(), pairs.len() - 1);
                let p = inverse_mod(coef, &modulus)
                    .ok_or_else(|| PresentationError::Gcd { coef: coef.clone(), gamma: modulus.clone() })?;
                for (removed, kept) in pairs {
                    let (r, k) = (pres.require(removed)?, pres.require(kept)?);
                    let ri = find_relator(&pres, relator, *side, r, k)?;
                    let pi = find_power(&pres, r)?;
                    let (next, rec) = eliminate_generator(&pres, relator, ri, Some(pi), *side, Some(p.clone()))?;
                    pres = next;
                    trace.push(TraceStep::Eliminate(rec));
                }
            }
            Planned::Unit(side, removed, kept) => {
                let (r, k) = (pres.require(removed)?, pres.require(kept)?);
                let ri = find_relator(&pres, relator, *side, r, k)?;
                let (next, rec) = eliminate_generator(&pres, relator, ri, None, *side, None)?;
                pres = next;
                trace.push(TraceStep::Eliminate(rec));
            }
            Planned::Subsume(name) => {
                let g = pres.require(name)?;
                let (next, exponent) = subsume_powers(&pres, g);
                pres = next;
                trace.push(TraceStep::Subsume { generator: name.clone(), exponent });
            }
            Planned::KRewrite(a, b) => {
                let (next, exponent) = k_rewrite(&pres, relator, prof, a, b)?;
                pres = next;
                trace.push(TraceStep::KRewrite { a: a.clone(), b: b.clone(), exponent });
            }
        }
    }
    Ok((pres, trace))
}

fn k_rewrite(
    pres: &Presentation,
    relator: &Word,
    prof: &ExponentProfile,
    a: &str,
    b: &str,
) -> Result<(Presentation, BigInt)> {
    let (ia, ib) = (pres.require(a)?, pres.require(b)?);
    let bad = |m: &str| PresentationError::NoPlan(format!("k-rewrite: {m}"));
    if pres.generator_count() != 2 || pres.relators.len() != 3 {
        return Err(bad("expected two generators and three relators"));
    }
    let base = relator_on(relator, ia, ib);
    let mut power_e = None;
    let mut shifted_k = None;
    let mut saw_base = false;
    for w in &pres.relators {
        if *w == base {
            saw_base = true;
        } else if let Some((g, e)) = as_power(w).filter(|(g, _)| *g == ib) {
            let _ = g;
            power_e = Some(e);
        } else {
            // R(a, b^k): recover k from the exponent sum of b.
            let sb = w.exponent_sum(ib);
            if !sb.is_multiple_of(&prof.beta) {
                return Err(bad("third relator has the wrong b exponent"));
            }
            let k = -(&sb / &prof.beta);
            let expected = substitute(
                relator,
                &BTreeMap::from([(GEN_A, Word::generator(ia)), (GEN_B, Word::gen_power(ib, k.clone()))]),
            )?;
            if expected != *w {
                return Err(bad("third relator is not R(a, b^k)"));
            }
            shifted_k = Some(k);
        }
    }
    let (Some(e), Some(k), true) = (power_e, shifted_k, saw_base) else {
        return Err(bad("relators not of the form b^e, R(a, b), R(a, b^k)"));
    };
    if !e.is_multiple_of(&prof.beta) || !k.is_multiple_of(&prof.beta) {
        return Err(bad("beta does not divide the b exponents"));
    }
    let alpha = &prof.alpha;
    let from_power = alpha * (&e / &prof.beta);
    let from_shift = alpha - alpha * (&k / &prof.beta) * &prof.beta;
    let r = from_power.gcd(&from_shift);
    let out = Presentation {
        generators: pres.generators.clone(),
        relators: vec![base, Word::gen_power(ia, r.clone())],
    };
    Ok((out, r))
}

fn template_name(witness: &[String], t: usize) -> String {
    format!("x{}", witness[t - 1])
}

/// Plan for the shapes reduced through a power relator on a directed cycle:
/// `L(n)`, `L(n;out m)`, `L(n;in m)`, `L(n;out m,in l)`, `L(n;in m,out l)`.
fn cycle_plan(shape: Shape, v: &dyn Fn(usize) -> String, prof: &ExponentProfile) -> Result<(Vec<Planned>, SimplifyOutcome)> {
    let (n, _, m, l) = shape.params();
    let mut plan = vec![Planned::Derive(PowerChain::Cycle { vertices: (1..=n).map(v).collect() })];
    plan.push(Planned::PowerChain(Side::A, (1..n).map(|k| (v(k), v(k + 1))).collect()));
    plan.push(Planned::Subsume(v(n)));
    let unit_alpha = prof.alpha.abs().is_one();
    let unit_beta = prof.beta.abs().is_one();
    let chain_out = |from: usize, to: usize| -> Vec<(String, String)> {
        let mut verts = vec![from];
        verts.extend(n + 1..=to);
        verts.windows(2).map(|w| (v(w[0]), v(w[1]))).collect()
    };
    let last = match shape {
        Shape::Cycle { .. } => n,
        Shape::Out { m, .. } => {
            plan.push(Planned::PowerChain(Side::A, chain_out(n, n + m)));
            n + m
        }
        Shape::In { m, .. } => {
            plan.push(Planned::PowerChain(Side::B, chain_out(n, n + m)));
            n + m
        }
        Shape::OutIn { m, l, .. } => {
            plan.push(Planned::PowerChain(Side::A, chain_out(n, n + m)));
            let tail: Vec<(String, String)> = (n + m..n + m + l).map(|k| (v(k), v(k + 1))).collect();
            if unit_beta {
                plan.push(Planned::PowerChain(Side::B, tail));
                n + m + l
            } else if l == 1 {
                let outcome = SimplifyOutcome::KQuotient {
                    a: v(n + m + 1),
                    b: v(n + m),
                    power_on: Side::B,
                    exponent: BigInt::zero(),
                };
                return Ok((plan, outcome));
            } else {
                return Err(PresentationError::NoPlan(format!("{shape} with |beta| >= 2")));
            }
        }
        Shape::InOut { m, l, .. } => {
            plan.push(Planned::PowerChain(Side::B, chain_out(n, n + m)));
            let tail: Vec<(String, String)> = (n + m..n + m + l).map(|k| (v(k), v(k + 1))).collect();
            if unit_alpha {
                plan.push(Planned::PowerChain(Side::A, tail));
                n + m + l
            } else if l == 1 {
                let outcome = SimplifyOutcome::KQuotient {
                    a: v(n + m),
                    b: v(n + m + 1),
                    power_on: Side::A,
                    exponent: BigInt::zero(),
                };
                return Ok((plan, outcome));
            } else {
                return Err(PresentationError::NoPlan(format!("{shape} with |alpha| >= 2")));
            }
        }
        _ => unreachable!("cycle_plan on a two-path shape"),
    };
    let _ = (m, l);
    Ok((plan, SimplifyOutcome::Cyclic { generator: v(last), order: BigInt::zero() }))
}

/// Unit-move plan for `L(n,d)`, `L(n,d;out m)` (`|alpha| = 1`) and
/// `L(n,d)`, `L(n,d;in m)` (`|beta| = 1`).
fn two_path_unit_plan(shape: Shape, v: &dyn Fn(usize) -> String, side: Side) -> Result<(Vec<Planned>, SimplifyOutcome)> {
    let (n, d, m, _) = shape.params();
    let d = d.expect("two-path shape");
    let sink = n - d;
    let mut plan = Vec::new();
    // Long path n -> 1 -> .. -> sink, short path n -> n-1 -> .. -> sink.
    let mut long = vec![n];
    long.extend(1..=sink);
    let short: Vec<usize> = (sink..=n).rev().collect();
    let last = match side {
        Side::A => {
            for w in long.windows(2) {
                plan.push(Planned::Unit(Side::A, v(w[0]), v(w[1])));
            }
            for w in short.windows(2).skip(1) {
                plan.push(Planned::Unit(Side::A, v(w[0]), v(w[1])));
            }
            match (shape, m) {
                (Shape::TwoPath { .. }, None) => sink,
                (Shape::TwoPathOut { .. }, Some(m)) => {
                    let mut tail = vec![sink];
                    tail.extend(n + 1..=n + m);
                    for w in tail.windows(2) {
                        plan.push(Planned::Unit(Side::A, v(w[0]), v(w[1])));
                    }
                    n + m
                }
                _ => return Err(PresentationError::NoPlan(format!("{shape} with |alpha| = 1"))),
            }
        }
        Side::B => {
            for w in long.windows(2).rev() {
                plan.push(Planned::Unit(Side::B, v(w[1]), v(w[0])));
            }
            for w in short.windows(2).rev().skip(1) {
                plan.push(Planned::Unit(Side::B, v(w[1]), v(w[0])));
            }
            match (shape, m) {
                (Shape::TwoPath { .. }, None) => n,
                (Shape::TwoPathIn { .. }, Some(m)) => {
                    let mut tail = vec![n];
                    tail.extend(n + 1..=n + m);
                    for w in tail.windows(2) {
                        plan.push(Planned::Unit(Side::B, v(w[0]), v(w[1])));
                    }
                    n + m
                }
                _ => return Err(PresentationError::NoPlan(format!("{shape} with |beta| = 1"))),
            }
        }
    };
    plan.push(Planned::Subsume(v(last)));
    Ok((plan, SimplifyOutcome::Cyclic { generator: v(last), order: BigInt::zero() }))
}

/// Unit moves removing pruned leaves: source leaves on side `a`, sink leaves
/// on side `b`.
fn prune_plan(g: &Digraph, kind: PruneKind) -> (Digraph, Vec<Planned>) {
    let pr = digraph::prune(g, kind);
    let plan = pr
        .removed
        .iter()
        .map(|r| {
            let (u, w) = (&r.arc.0, &r.arc.1);
            if *u == r.vertex {
                Planned::Unit(Side::A, format!("x{u}"), format!("x{w}"))
            } else {
                Planned::Unit(Side::B, format!("x{w}"), format!("x{u}"))
            }
        })
        .collect();
    (pr.result, plan)
}

/// Reduces `P_g(R)` along the plan matching its shape. Assumes
/// `gcd(alpha, beta) = 1` and `a^alpha = b^beta` in `K`; the caller is
/// responsible for the latter.
pub fn simplify_to_cyclic(g: &Digraph, relator: &Word) -> Result<Simplification> {
    let prof = check_relator(relator)?;
    if prof.alpha.is_zero() || prof.beta.is_zero() || !prof.alpha.gcd(&prof.beta).is_one() {
        return Err(PresentationError::NoPlan("needs alpha, beta nonzero and coprime".into()));
    }
    if digraph::components(g).len() != 1 || g.vertex_count() != g.arc_count() {
        return Err(PresentationError::NoPlan("needs a connected balanced digraph".into()));
    }
    let unit_alpha = prof.alpha.abs().is_one();
    let unit_beta = prof.beta.abs().is_one();
    let start = instantiate(g, relator)?;

    let (plan, outcome) = if unit_alpha && unit_beta {
        let (core, mut plan) = prune_plan(g, PruneKind::Both);
        let cycle = digraph::cycle_order(&core)
            .ok_or_else(|| PresentationError::NoPlan("pruned digraph is not a cycle".into()))?;
        let name = |i: usize| format!("x{}", core.label(cycle[i]));
        for k in 0..cycle.len() - 1 {
            let side = if core.has_arc(cycle[k], cycle[k + 1]) { Side::A } else { Side::B };
            plan.push(Planned::Unit(side, name(k), name(k + 1)));
        }
        let last = name(cycle.len() - 1);
        plan.push(Planned::Subsume(last.clone()));
        (plan, SimplifyOutcome::Cyclic { generator: last, order: BigInt::zero() })
    } else {
        let kind = if unit_alpha {
            Some(PruneKind::Source)
        } else if unit_beta {
            Some(PruneKind::Sink)
        } else {
            None
        };
        let (core, mut plan) = match kind {
            Some(k) => prune_plan(g, k),
            None => (g.clone(), Vec::new()),
        };
        let matched = digraph::recognize_shape(&core)?;
        let shape = matched
            .shape
            .ok_or_else(|| PresentationError::NoPlan("digraph matches no template".into()))?;
        let witness = matched.witness.clone();
        let v = move |t: usize| template_name(&witness, t);
        let (tail_plan, outcome) = match shape {
            Shape::TwoPath { n, d } if !unit_alpha && !unit_beta => {
                if d != 1 {
                    return Err(PresentationError::NoPlan(format!("{shape} with |alpha|, |beta| >= 2")));
                }
                let long: Vec<String> = std::iter::once(n).chain(1..n).map(&v).collect();
                let short = vec![v(n), v(n - 1)];
                let mut p = vec![Planned::Derive(PowerChain::TwoPath { long, short })];
                p.push(Planned::PowerChain(Side::A, (1..n - 1).map(|k| (v(k), v(k + 1))).collect()));
                p.push(Planned::KRewrite(v(n), v(n - 1)));
                let outcome = SimplifyOutcome::KQuotient {
                    a: v(n),
                    b: v(n - 1),
                    power_on: Side::A,
                    exponent: BigInt::zero(),
                };
                (p, outcome)
            }
            Shape::TwoPath { .. } | Shape::TwoPathOut { .. } | Shape::TwoPathIn { .. } => {
                let side = if unit_alpha {
                    Side::A
                } else if unit_beta {
                    Side::B
                } else {
                    return Err(PresentationError::NoPlan(format!("{shape} with |alpha|, |beta| >= 2")));
                };
                two_path_unit_plan(shape, &v, side)?
            }
            _ => cycle_plan(shape, &v, &prof)?,
        };
        plan.extend(tail_plan);
        (plan, outcome)
    };

    let (final_presentation, trace) = run_plan(start, relator, &prof, &plan)?;
    let outcome = read_outcome(&final_presentation, relator, outcome)?;
    Ok(Simplification { trace, outcome, final_presentation })
}

/// Fills in the exponent of the planned outcome from the final presentation.
fn read_outcome(pres: &Presentation, relator: &Word, planned: SimplifyOutcome) -> Result<SimplifyOutcome> {
    let bad = |m: String| PresentationError::NoPlan(format!("unexpected final presentation {pres}: {m}"));
    match planned {
        SimplifyOutcome::Cyclic { generator, .. } => {
            let id = pres.require(&generator)?;
            if pres.generator_count() != 1 {
                return Err(bad("more than one generator left".into()));
            }
            let order = match pres.relators.as_slice() {
                [] => BigInt::zero(),
                [w] => match as_power(w) {
                    Some((g, e)) if g == id => e.abs(),
                    _ => return Err(bad("relator is not a power".into())),
                },
                _ => return Err(bad("more than one relator".into())),
            };
            Ok(SimplifyOutcome::Cyclic { generator, order })
        }
        SimplifyOutcome::KQuotient { a, b, power_on, .. } => {
            let (ia, ib) = (pres.require(&a)?, pres.require(&b)?);
            let base = relator_on(relator, ia, ib);
            let target = if power_on == Side::A { ia } else { ib };
            let mut exponent = None;
            let mut saw_base = false;
            for w in &pres.relators {
                if *w == base {
                    saw_base = true;
                } else {
                    match as_power(w) {
                        Some((g, e)) if g == target && exponent.is_none() => exponent = Some(e),
                        _ => return Err(bad("extra relator".into())),
                    }
                }
            }
            match (exponent, saw_base, pres.generator_count()) {
                (Some(exponent), true, 2) => Ok(SimplifyOutcome::KQuotient { a, b, power_on, exponent }),
                _ => Err(bad("not of the form R(a, b), power".into())),
            }
        }
    }
}

/// Re-applies a recorded trace to `P_g(R)`, checking every recorded value.
pub fn replay_trace(g: &Digraph, relator: &Word, trace: &[TraceStep]) -> Result<Presentation> {
    let prof = check_relator(relator)?;
    let mut pres = instantiate(g, relator)?;
    for (k, step) in trace.iter().enumerate() {
        let mismatch = |what: &str| PresentationError::Replay(format!("step {k}: {what}"));
        match step {
            TraceStep::Derive { generator, chain, gamma } => {
                let w = derive_power_relator(&pres, relator, chain)?;
                if as_power(&w) != Some((pres.require(generator)?, gamma.clone())) {
                    return Err(mismatch("derived power differs"));
                }
                pres.push_relator(w);
            }
            TraceStep::Eliminate(rec) => {
                let (next, again) = eliminate_generator(
                    &pres,
                    relator,
                    rec.relator_index,
                    rec.power_index,
                    rec.side,
                    Some(rec.p.clone()),
                )?;
                if again != *rec {
                    return Err(mismatch("elimination record differs"));
                }
                pres = next;
            }
            TraceStep::Subsume { generator, exponent } => {
                let (next, e) = subsume_powers(&pres, pres.require(generator)?);
                if e != *exponent {
                    return Err(mismatch("subsumed exponent differs"));
                }
                pres = next;
            }
            TraceStep::KRewrite { a, b, exponent } => {
                let (next, e) = k_rewrite(&pres, relator, &prof, a, b)?;
                if e != *exponent {
                    return Err(mismatch("rewritten exponent differs"));
                }
                pres = next;
            }
        }
    }
    Ok(pres)
}
