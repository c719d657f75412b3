//! Three-valued decision of `a^α = b^β` in `K = <a, b | R>`, where `α` is the
//! exponent sum of `a` in `R` and `-β` that of `b`.
//!
//! Every `Yes` and `No` carries evidence that [`verify_evidence`] re-checks
//! with syllable arithmetic from [`crate::freewords`], independent of the
//! letter-level searches that produced it. `Unknown` reports the bounds used.
//!
//! Layers, first definitive answer wins:
//! 1. `α = 0` or `β = 0`: No.
//! 2. one syllable pair: `R` is literally `a^α b^-β`, Yes.
//! 3. a permutation representation separating `R` from `a^α b^-β`: No.
//! 4. `K` proved infinite cyclic: Yes.
//! 5. bounded Knuth-Bendix rewriting of `a^α b^-β` to the identity: Yes.
//! 6. a product of at most three conjugates of `R^{±1}`: Yes.
//!
//! Yes and No are exclusive for sound evidence, so running the cheap
//! quotient search before the Yes searches never changes the answer.
//! The relator is first replaced by the lesser of its cyclic normal form and
//! that of its reflection, so reflected inputs get identical searches.

mod conjugates;
mod letters;
mod probe;
mod quotients;
mod rewriting;

use std::cell::OnceCell;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freewords::{
    cyclic_reduce, exponent_profile, parse_word, reflect_word, Word, WordError, GEN_A, GEN_B,
};
use conjugates::ConjugacyIndex;
use letters::Letter;
use rewriting::{Factor, Proof, RewriteLimits, Rewriter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("degenerate relator: {0}")]
    Degenerate(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_rules: usize,
    pub max_rule_len: usize,
    pub max_completion_steps: usize,
    pub max_proof_factors: usize,
    pub max_conjugate_factors: usize,
    pub max_conjugator_len: usize,
    pub max_degree: usize,
    pub probe_max_generator_len: usize,
    /// Relators longer than this, in letters, skip every search layer.
    pub max_relator_letters: usize,
    pub parallel: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_rules: 5000,
            max_rule_len: 64,
            max_completion_steps: 5000,
            max_proof_factors: 256,
            max_conjugate_factors: 3,
            max_conjugator_len: 6,
            max_degree: 5,
            probe_max_generator_len: 4,
            max_relator_letters: 256,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl OracleConfig {
    pub fn quick() -> Self {
        OracleConfig {
            max_rules: 500,
            max_completion_steps: 500,
            max_conjugator_len: 3,
            probe_max_generator_len: 3,
            ..OracleConfig::default()
        }
    }

    pub fn deep() -> Self {
        OracleConfig {
            max_rules: 20_000,
            max_rule_len: 96,
            max_completion_steps: 40_000,
            max_proof_factors: 1024,
            max_conjugator_len: 7,
            max_degree: 6,
            probe_max_generator_len: 6,
            ..OracleConfig::default()
        }
    }

    /// Preset by name: `quick`, `default` or `deep`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "quick" => Some(Self::quick()),
            "default" => Some(Self::default()),
            "deep" => Some(Self::deep()),
            _ => None,
        }
    }

    fn limits(&self) -> RewriteLimits {
        RewriteLimits {
            max_rules: self.max_rules,
            max_rule_len: self.max_rule_len,
            max_steps: self.max_completion_steps,
            max_proof_factors: self.max_proof_factors,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// The conjugate `c R^sign c^-1`, with `c` in letter text (`A`, `B` invert).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub conjugator: String,
    pub sign: i8,
}

/// Images of `a` and `b` as permutations of `1..=degree`, acting on the right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientCertificate {
    pub degree: usize,
    pub image_a: Vec<u32>,
    pub image_b: Vec<u32>,
}

/// `a = w^s` and `b = w^u` in `K`, each with a conjugate-product proof of
/// `a w^-s` and `b w^-u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicCertificate {
    pub s: i64,
    pub u: i64,
    pub generator: String,
    pub proof_a: Vec<FactorRecord>,
    pub proof_b: Vec<FactorRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub completion_steps: usize,
    pub rules: usize,
    pub confluent: bool,
    pub max_conjugate_factors: usize,
    pub max_conjugator_len: usize,
    pub max_degree: usize,
    pub probe_max_generator_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    ExponentDegenerate {
        #[serde(with = "crate::bigstr")]
        alpha: BigInt,
        #[serde(with = "crate::bigstr")]
        beta: BigInt,
    },
    SingleSyllablePair,
    CyclicK(CyclicCertificate),
    RewriteTrace { factors: Vec<FactorRecord> },
    ConjugateProduct { factors: Vec<FactorRecord> },
    Quotient(QuotientCertificate),
    Bounds(BoundReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub answer: Answer,
    /// The relator the evidence refers to: the normal form of the input or
    /// of its reflection.
    pub relator: String,
    pub reflected: bool,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum KProbeResult {
    InfiniteCyclic(CyclicCertificate),
    Inconclusive,
}

/// Shared search state for one relator; completion runs at most once.
pub(crate) struct Session {
    relator: Vec<Letter>,
    config: OracleConfig,
    index: ConjugacyIndex,
    rewriter: OnceCell<Rewriter>,
}

impl Session {
    fn new(relator: Vec<Letter>, config: &OracleConfig) -> Self {
        let index = ConjugacyIndex::new(&relator);
        Session { relator, config: config.clone(), index, rewriter: OnceCell::new() }
    }

    fn rewriter(&self) -> &Rewriter {
        self.rewriter.get_or_init(|| Rewriter::complete(&self.relator, self.config.limits()))
    }

    /// Proof that the reduced word `goal` is trivial in `K`.
    fn prove_trivial(&self, goal: &[Letter]) -> Option<Proof> {
        if goal.is_empty() {
            return Some(Proof::new());
        }
        for sign in [1, -1] {
            if let Some(f) = self.index.as_conjugate(goal, sign) {
                return Some(vec![f]);
            }
        }
        match self.rewriter().reduce(goal) {
            Some((nf, proof)) if nf.is_empty() => Some(proof),
            _ => None,
        }
    }

    fn bounds(&self, note: Option<String>) -> BoundReport {
        let (steps, rules, confluent) = match self.rewriter.get() {
            Some(rw) => (rw.steps(), rw.rule_count(), rw.is_confluent()),
            None => (0, 0, false),
        };
        bound_report(&self.config, steps, rules, confluent, note)
    }
}

fn bound_report(cfg: &OracleConfig, steps: usize, rules: usize, confluent: bool, note: Option<String>) -> BoundReport {
    BoundReport {
        completion_steps: steps,
        rules,
        confluent,
        max_conjugate_factors: cfg.max_conjugate_factors,
        max_conjugator_len: cfg.max_conjugator_len,
        max_degree: cfg.max_degree,
        probe_max_generator_len: cfg.probe_max_generator_len,
        note,
    }
}

fn records(p: &[Factor]) -> Vec<FactorRecord> {
    p.iter().map(|f| FactorRecord { conjugator: letters::to_text(&f.conjugator), sign: f.sign }).collect()
}

fn cyclic_certificate(c: probe::CyclicProof) -> CyclicCertificate {
    CyclicCertificate {
        s: c.s,
        u: c.u,
        generator: letters::to_text(&c.generator),
        proof_a: records(&c.proof_a),
        proof_b: records(&c.proof_b),
    }
}

/// The lesser (by text) of the normal forms of `r` and of its reflection,
/// and whether the reflection was taken.
pub fn canonical_relator(r: &Word) -> Result<(Word, bool), OracleError> {
    exponent_profile(r)?;
    let own = cyclic_reduce(r);
    let mirrored = cyclic_reduce(&reflect_word(r));
    let key = |w: &Word| {
        let s = w.to_string();
        (s.len(), s)
    };
    Ok(if key(&mirrored) < key(&own) { (mirrored, true) } else { (own, false) })
}

/// `a^α b^-β` for the relator `r`.
pub fn power_target(r: &Word) -> Result<Word, OracleError> {
    let p = exponent_profile(r)?;
    Ok(Word::gen_power(GEN_A, p.alpha).mul(&Word::gen_power(GEN_B, -p.beta)))
}

/// Decides `a^α = b^β` in `<a, b | R>` within the configured bounds.
pub fn check_power_equality(r: &Word, config: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    let (w, reflected) = canonical_relator(r)?;
    let verdict = |answer, evidence| OracleVerdict { answer, relator: w.to_string(), reflected, evidence };
    let p = exponent_profile(&w)?;
    if p.alpha.is_zero() || p.beta.is_zero() {
        return Ok(verdict(Answer::No, Evidence::ExponentDegenerate { alpha: p.alpha, beta: p.beta }));
    }
    if p.t == 1 {
        return Ok(verdict(Answer::Yes, Evidence::SingleSyllablePair));
    }
    let target = power_target(&w)?;
    let limit = config.max_relator_letters;
    let (Some(rel), Some(tgt)) = (letters::from_word(&w, limit), letters::from_word(&target, 2 * limit)) else {
        let note = format!("relator longer than {limit} letters; searches skipped");
        return Ok(verdict(Answer::Unknown, Evidence::Bounds(bound_report(config, 0, 0, false, Some(note)))));
    };
    if let Some((degree, pa, pb)) = quotients::separating_quotient(&rel, &tgt, config.max_degree, config.parallel) {
        let one_based = |p: &[u8]| p.iter().map(|&x| u32::from(x) + 1).collect();
        let cert = QuotientCertificate { degree, image_a: one_based(&pa), image_b: one_based(&pb) };
        return Ok(verdict(Answer::No, Evidence::Quotient(cert)));
    }
    let session = Session::new(rel, config);
    if let Some(c) = probe::probe(&session) {
        return Ok(verdict(Answer::Yes, Evidence::CyclicK(cyclic_certificate(c))));
    }
    if let Some((nf, proof)) = session.rewriter().reduce(&tgt) {
        if nf.is_empty() {
            return Ok(verdict(Answer::Yes, Evidence::RewriteTrace { factors: records(&proof) }));
        }
    }
    if let Some(proof) = conjugates::search(
        &session.index,
        &tgt,
        config.max_conjugate_factors,
        config.max_conjugator_len,
        config.parallel,
    ) {
        return Ok(verdict(Answer::Yes, Evidence::ConjugateProduct { factors: records(&proof) }));
    }
    Ok(verdict(Answer::Unknown, Evidence::Bounds(session.bounds(None))))
}

/// The exceptional-intersection condition `<a> ∩ <b> ≠ 1` in `K` with
/// `α, β ≠ 0` is the same question; this is [`check_power_equality`].
pub fn exceptional_intersection(r: &Word, config: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    check_power_equality(r, config)
}

/// Tries to prove `K` infinite cyclic. Runs on `r` as given, after cyclic
/// reduction; never claims anything weaker.
pub fn probe_k_structure(r: &Word, config: &OracleConfig) -> KProbeResult {
    if exponent_profile(r).is_err() {
        return KProbeResult::Inconclusive;
    }
    let w = cyclic_reduce(r);
    let Some(rel) = letters::from_word(&w, config.max_relator_letters) else {
        return KProbeResult::Inconclusive;
    };
    match probe::probe(&Session::new(rel, config)) {
        Some(c) => KProbeResult::InfiniteCyclic(cyclic_certificate(c)),
        None => KProbeResult::Inconclusive,
    }
}

/// Re-checks `v` against `r` by free-group and permutation arithmetic.
/// `Unknown` verdicts have nothing to check and return false.
pub fn verify_evidence(r: &Word, v: &OracleVerdict) -> bool {
    let Ok(w) = parse_word(&v.relator) else { return false };
    let w = cyclic_reduce(&w);
    let matches_input = if v.reflected {
        w == cyclic_reduce(&reflect_word(r))
    } else {
        w == cyclic_reduce(r)
    };
    if !matches_input {
        return false;
    }
    let Ok(p) = exponent_profile(&w) else { return false };
    match (&v.answer, &v.evidence) {
        (Answer::No, Evidence::ExponentDegenerate { alpha, beta }) => {
            (p.alpha.is_zero() || p.beta.is_zero()) && *alpha == p.alpha && *beta == p.beta
        }
        (Answer::Yes, Evidence::SingleSyllablePair) => p.t == 1,
        (Answer::Yes, Evidence::CyclicK(c)) => verify_cyclic(&w, c),
        (Answer::Yes, Evidence::RewriteTrace { factors } | Evidence::ConjugateProduct { factors }) => {
            let Ok(target) = power_target(&w) else { return false };
            conjugate_product(&w, factors).is_some_and(|x| x == target)
        }
        (Answer::No, Evidence::Quotient(q)) => {
            let Ok(target) = power_target(&w) else { return false };
            verify_quotient(&w, &target, q)
        }
        _ => false,
    }
}

/// Checks a cyclic certificate for the relator `w` (as a freewords word).
pub fn verify_cyclic(w: &Word, c: &CyclicCertificate) -> bool {
    let Ok(p) = exponent_profile(w) else { return false };
    let sum_b = -&p.beta;
    let (s, u) = (BigInt::from(c.s), BigInt::from(c.u));
    // the map a -> s, b -> u kills R, and K^ab = Z
    if !(&s * &p.alpha + &u * &sum_b).is_zero() || !p.alpha.gcd(&sum_b).is_one() {
        return false;
    }
    let Ok(gen) = parse_word(&c.generator) else { return false };
    if (&s * gen.exponent_sum(GEN_A) + &u * gen.exponent_sum(GEN_B)) != BigInt::one() {
        return false;
    }
    let goal = |letter: u32, k: &BigInt| -> Option<Word> {
        Some(Word::generator(letter).mul(&gen.pow(&-k).ok()?))
    };
    let (Some(ga), Some(gb)) = (goal(GEN_A, &s), goal(GEN_B, &u)) else { return false };
    conjugate_product(w, &c.proof_a).is_some_and(|x| x == ga)
        && conjugate_product(w, &c.proof_b).is_some_and(|x| x == gb)
}

fn conjugate_product(w: &Word, factors: &[FactorRecord]) -> Option<Word> {
    let mut acc = Word::identity();
    for f in factors {
        let c = parse_word(&f.conjugator).ok()?;
        let body = match f.sign {
            1 => w.clone(),
            -1 => w.inverse(),
            _ => return None,
        };
        acc = acc.mul(&c).mul(&body).mul(&c.inverse());
    }
    Some(acc)
}

fn verify_quotient(w: &Word, target: &Word, q: &QuotientCertificate) -> bool {
    let as_perm = |img: &[u32]| -> Option<Vec<usize>> {
        let mut seen = vec![false; q.degree];
        let mut out = Vec::with_capacity(q.degree);
        for &x in img {
            let i = (x as usize).checked_sub(1).filter(|&i| i < q.degree)?;
            if std::mem::replace(&mut seen[i], true) {
                return None;
            }
            out.push(i);
        }
        (out.len() == q.degree).then_some(out)
    };
    let (Some(pa), Some(pb)) = (as_perm(&q.image_a), as_perm(&q.image_b)) else { return false };
    let image = |word: &Word| perm_image(word, &pa, &pb);
    let identity: Vec<usize> = (0..q.degree).collect();
    image(w) == identity && image(target) != identity
}

/// Image of `word` with syllable powers reduced modulo permutation order.
fn perm_image(word: &Word, pa: &[usize], pb: &[usize]) -> Vec<usize> {
    let n = pa.len();
    let mut acc: Vec<usize> = (0..n).collect();
    for syl in word.syllables() {
        let base = if syl.gen == GEN_A { pa } else { pb };
        let mut order = 1usize;
        let mut cur = base.to_vec();
        while cur.iter().enumerate().any(|(i, &j)| i != j) {
            cur = cur.iter().map(|&i| base[i]).collect();
            order += 1;
        }
        let k = syl.exp.mod_floor(&BigInt::from(order)).to_usize().expect("below order");
        for _ in 0..k {
            acc = acc.iter().map(|&i| base[i]).collect();
        }
    }
    acc
}
