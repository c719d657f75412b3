//! Two-generator words as letter vectors: `a = 0`, `b = 1`, `A = 2`, `B = 3`.
//!
//! The inverse of letter `x` is `x ^ 2`. Shortlex comparison ranks letters
//! `a < A < b < B`, under which free abelian groups complete finitely.

use std::cmp::Ordering;

use crate::freewords::{Word, GEN_A, GEN_B};

pub type Letter = u8;

pub const A: Letter = 0;
pub const B: Letter = 1;

#[inline]
pub fn inv(x: Letter) -> Letter {
    x ^ 2
}

pub fn from_word(w: &Word, max_len: usize) -> Option<Vec<Letter>> {
    let letters = w.letters(max_len)?;
    letters
        .into_iter()
        .map(|(g, s)| match (g, s > 0) {
            (GEN_A, true) => Some(0),
            (GEN_B, true) => Some(1),
            (GEN_A, false) => Some(2),
            (GEN_B, false) => Some(3),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
pub fn to_word(w: &[Letter]) -> Word {
    Word::from_letters(w.iter().map(|&x| {
        let gen = if x & 1 == 0 { GEN_A } else { GEN_B };
        (gen, if x < 2 { 1 } else { -1 })
    }))
}

/// Text form accepted by the word parser; the identity is the empty string.
pub fn to_text(w: &[Letter]) -> String {
    w.iter().map(|&x| b"abAB"[x as usize] as char).collect()
}

#[cfg(test)]
pub fn reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&inv(x)) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&x| inv(x)).collect()
}

/// Freely reduced product of the given pieces.
pub fn product(parts: &[&[Letter]]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for part in parts {
        for &x in *part {
            if out.last() == Some(&inv(x)) {
                out.pop();
            } else {
                out.push(x);
            }
        }
    }
    out
}

/// `w^k` for a freely reduced `w`, freely reduced.
pub fn word_power(w: &[Letter], k: i64) -> Vec<Letter> {
    let base = if k >= 0 { w.to_vec() } else { inverse(w) };
    let parts: Vec<&[Letter]> = std::iter::repeat(base.as_slice()).take(k.unsigned_abs() as usize).collect();
    product(&parts)
}

/// Splits a reduced word as `u * core * u^-1` with `core` cyclically reduced.
pub fn split_conjugate(w: &[Letter]) -> (&[Letter], &[Letter]) {
    if w.is_empty() {
        return (w, w);
    }
    let mut i = 0;
    while i + 1 < w.len() - i && w[i] == inv(w[w.len() - 1 - i]) {
        i += 1;
    }
    (&w[..i], &w[i..w.len() - i])
}

const RANK: [u8; 4] = [0, 2, 1, 3];

pub fn shortlex(x: &[Letter], y: &[Letter]) -> Ordering {
    x.len().cmp(&y.len()).then_with(|| x.iter().map(|&c| RANK[c as usize]).cmp(y.iter().map(|&c| RANK[c as usize])))
}

/// Exponent sums of `a` and `b`.
pub fn exponent_sums(w: &[Letter]) -> (i64, i64) {
    let mut sums = [0i64; 2];
    for &x in w {
        sums[(x & 1) as usize] += if x < 2 { 1 } else { -1 };
    }
    (sums[0], sums[1])
}

/// All freely reduced words of length at most `max_len`, shortest first.
pub fn reduced_words(max_len: usize) -> Vec<Vec<Letter>> {
    let mut all = vec![Vec::new()];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for x in 0..4u8 {
                if w.last() != Some(&inv(x)) {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freewords::parse_word;

    #[test]
    fn word_round_trip() {
        let w = parse_word("a^2 B a b^-3").unwrap();
        let l = from_word(&w, 100).unwrap();
        assert_eq!(to_text(&l), "aaBaBBB");
        assert_eq!(to_word(&l), w);
        assert_eq!(parse_word(&to_text(&l)).unwrap(), w);
        assert!(from_word(&w, 3).is_none());
    }

    #[test]
    fn reduction_and_conjugate_split() {
        assert_eq!(reduce(&[0, 1, 3, 2, 1]), vec![1]);
        assert_eq!(product(&[&[0, 1], &inverse(&[0, 1])]), Vec::<Letter>::new());
        let w = [1, 0, 0, 3];
        assert_eq!(split_conjugate(&w), (&w[..1], &w[1..3]));
        assert_eq!(split_conjugate(&[0]), (&[][..], &[0u8][..]));
    }

    #[test]
    fn reduced_word_counts() {
        // 1 + 4 + 12 + 36
        assert_eq!(reduced_words(3).len(), 53);
        let ws = reduced_words(3);
        assert_eq!(shortlex(&[2], &[1]), Ordering::Less);
        assert_eq!(shortlex(&[3], &[0, 0]), Ordering::Less);
        assert_eq!(ws.len(), ws.iter().collect::<std::collections::BTreeSet<_>>().len());
    }
}
