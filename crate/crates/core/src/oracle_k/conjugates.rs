//! Expresses a word as a short product of conjugates of `R^{±1}`.

use std::collections::HashMap;

use super::letters::{self, Letter};
use super::rewriting::{Factor, Proof};
use crate::par;

/// Recognizes conjugates of `R` and `R^-1` by their cyclically reduced core.
pub struct ConjugacyIndex {
    relator: Vec<Letter>,
    /// Rotation of `R^sign` to `(sign, offset)`.
    rotations: HashMap<Vec<Letter>, Vec<(i8, usize)>>,
}

impl ConjugacyIndex {
    /// `relator` must be cyclically reduced.
    pub fn new(relator: &[Letter]) -> Self {
        let mut rotations: HashMap<Vec<Letter>, Vec<(i8, usize)>> = HashMap::new();
        let inv = letters::inverse(relator);
        for (body, sign) in [(relator, 1i8), (&inv[..], -1i8)] {
            for k in 0..body.len() {
                let rot: Vec<Letter> = body[k..].iter().chain(&body[..k]).copied().collect();
                let entry = rotations.entry(rot).or_default();
                if !entry.iter().any(|&(s, _)| s == sign) {
                    entry.push((sign, k));
                }
            }
        }
        ConjugacyIndex { relator: relator.to_vec(), rotations }
    }

    /// Writes reduced `w` as `c R^sign c^-1`.
    pub fn as_conjugate(&self, w: &[Letter], sign: i8) -> Option<Factor> {
        let (head, core) = letters::split_conjugate(w);
        let &(_, k) = self.rotations.get(core)?.iter().find(|&&(s, _)| s == sign)?;
        // core = y^-1 R^sign y with y = R^sign[..k]
        let body = if sign > 0 { self.relator.clone() } else { letters::inverse(&self.relator) };
        let conjugator = letters::product(&[head, &letters::inverse(&body[..k])]);
        Some(Factor { conjugator, sign })
    }

    pub fn conjugate(&self, c: &[Letter], sign: i8) -> Vec<Letter> {
        let body = if sign > 0 { self.relator.clone() } else { letters::inverse(&self.relator) };
        letters::product(&[c, &body, &letters::inverse(c)])
    }
}

/// Proof that `target` is a product of at most `max_factors` conjugates with
/// conjugators of length at most `max_len`. Only odd counts 1 and 3 are
/// tried since exponent sums force the signs to add up to one.
pub fn search(
    index: &ConjugacyIndex,
    target: &[Letter],
    max_factors: usize,
    max_len: usize,
    parallel: bool,
) -> Option<Proof> {
    if max_factors == 0 {
        return None;
    }
    if let Some(f) = index.as_conjugate(target, 1) {
        return Some(vec![f]);
    }
    if max_factors < 3 {
        return None;
    }
    let words = letters::reduced_words(max_len);
    // inverses of c R^s c^-1 for every conjugator and sign
    let inv_conj: Vec<[Vec<Letter>; 2]> = words
        .iter()
        .map(|c| [letters::inverse(&index.conjugate(c, 1)), letters::inverse(&index.conjugate(c, -1))])
        .collect();
    // target * (c3 R^s3 c3^-1)^-1 for every conjugator and sign
    let heads: Vec<[Vec<Letter>; 2]> =
        inv_conj.iter().map(|p| [letters::product(&[target, &p[0]]), letters::product(&[target, &p[1]])]).collect();
    let slots: Vec<usize> = (0..words.len()).collect();
    par::find_first(&slots, parallel, |&i2| {
        let mut f1: Vec<Letter> = Vec::new();
        for (s2, s3) in [(1i8, -1i8), (-1, 1), (1, 1)] {
            let s1 = 1 - s2 - s3;
            let f2_inv = &inv_conj[i2][usize::from(s2 < 0)];
            for (i3, head) in heads.iter().enumerate() {
                f1.clear();
                f1.extend_from_slice(&head[usize::from(s3 < 0)]);
                for &x in f2_inv {
                    if f1.last() == Some(&letters::inv(x)) {
                        f1.pop();
                    } else {
                        f1.push(x);
                    }
                }
                if f1.len() < index.relator.len() {
                    continue;
                }
                if let Some(first) = index.as_conjugate(&f1, s1) {
                    return Some(vec![
                        first,
                        Factor { conjugator: words[i2].clone(), sign: s2 },
                        Factor { conjugator: words[i3].clone(), sign: s3 },
                    ]);
                }
            }
        }
        None
    })
}
