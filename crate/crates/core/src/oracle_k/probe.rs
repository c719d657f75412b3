//! Proves `<a, b | R>` infinite cyclic by exhibiting `w` with `a = w^s` and
//! `b = w^u` in the group.

use super::letters::{self, Letter, A, B};
use super::rewriting::Proof;
use super::Session;

pub(crate) struct CyclicProof {
    pub s: i64,
    pub u: i64,
    pub generator: Vec<Letter>,
    pub proof_a: Proof,
    pub proof_b: Proof,
}

/// Exponents `(s, u)` of the map `a -> s`, `b -> u` that kills `R`, scaled to
/// be coprime with `s > 0` (or `s = 0`, `u > 0`).
pub(crate) fn target_exponents(sum_a: i64, sum_b: i64) -> (i64, i64) {
    let (s, u) = (sum_b, -sum_a);
    if s < 0 || (s == 0 && u < 0) {
        (-s, -u)
    } else {
        (s, u)
    }
}

fn gcd(x: i64, y: i64) -> i64 {
    let (mut x, mut y) = (x.abs(), y.abs());
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

pub(crate) fn probe(session: &Session) -> Option<CyclicProof> {
    let (sum_a, sum_b) = letters::exponent_sums(&session.relator);
    // a cyclic group with abelianization Z ⊕ Z/g needs g = 1
    if gcd(sum_a, sum_b) != 1 {
        return None;
    }
    let cfg = &session.config;
    let probe_degree = cfg.max_degree.min(4);
    if super::quotients::nonabelian_quotient(&session.relator, probe_degree, cfg.parallel).is_some() {
        return None;
    }
    let (s, u) = target_exponents(sum_a, sum_b);
    for w in letters::reduced_words(cfg.probe_max_generator_len) {
        let (ea, eb) = letters::exponent_sums(&w);
        if s * ea + u * eb != 1 {
            continue;
        }
        let goal_a = letters::product(&[&[A], &letters::word_power(&w, -s)]);
        let Some(proof_a) = session.prove_trivial(&goal_a) else { continue };
        let goal_b = letters::product(&[&[B], &letters::word_power(&w, -u)]);
        let Some(proof_b) = session.prove_trivial(&goal_b) else { continue };
        return Some(CyclicProof { s, u, generator: w, proof_a, proof_b });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_normalization() {
        // (ab)^2 b: a -> 3, b -> -2
        assert_eq!(target_exponents(2, 3), (3, -2));
        // a b^-1: a -> 1, b -> 1
        assert_eq!(target_exponents(1, -1), (1, 1));
        assert_eq!(gcd(-6, 4), 2);
    }
}
