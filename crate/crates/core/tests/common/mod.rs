//! Random instances shared by the property suites.

#![allow(dead_code)]

use digraph_groups::digraph::Digraph;
use digraph_groups::freewords::{Word, GEN_A, GEN_B};
use num_bigint::BigInt;
use rand::Rng;

fn nonzero<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> i64 {
    let x = rng.gen_range(1..=bound);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// A cycle of length `cycle` with random arc orientations and `extra` tree
/// vertices hung off random earlier vertices, each tree arc randomly oriented.
pub fn unicyclic(rng: &mut impl Rng, cycle: usize, extra: usize) -> Digraph {
    let mut g = Digraph::new();
    let arc = |g: &mut Digraph, u: usize, v: usize, flip: bool| {
        let (x, y) = if flip { (v, u) } else { (u, v) };
        g.add_arc(&format!("v{x}"), &format!("v{y}")).unwrap();
    };
    for i in 0..cycle {
        let flip = rng.gen_bool(0.5);
        arc(&mut g, i, (i + 1) % cycle, flip);
    }
    for k in 0..extra {
        let new = cycle + k;
        let host = rng.gen_range(0..new);
        let flip = rng.gen_bool(0.5);
        arc(&mut g, host, new, flip);
    }
    g
}

/// A directed cycle with random tree attachments.
pub fn directed_unicyclic(rng: &mut impl Rng, cycle: usize, extra: usize) -> Digraph {
    let mut g = Digraph::new();
    for i in 0..cycle {
        g.add_arc(&format!("v{i}"), &format!("v{}", (i + 1) % cycle)).unwrap();
    }
    for k in 0..extra {
        let new = cycle + k;
        let host = rng.gen_range(0..new);
        let (x, y) = if rng.gen_bool(0.5) { (host, new) } else { (new, host) };
        g.add_arc(&format!("v{x}"), &format!("v{y}")).unwrap();
    }
    g
}

/// `a^x1 b^y1 ... a^xt b^yt` with nonzero exponents bounded by `bound`.
pub fn relator(rng: &mut impl Rng, syllable_pairs: usize, bound: i64) -> Word {
    let mut parts = Vec::new();
    for _ in 0..syllable_pairs {
        parts.push((GEN_A, BigInt::from(nonzero(rng, bound))));
        parts.push((GEN_B, BigInt::from(nonzero(rng, bound))));
    }
    Word::from_syllables(parts)
}

/// A relator whose `a` exponents sum to `±1`.
pub fn unit_alpha_relator(rng: &mut impl Rng, bound: i64) -> Word {
    let target = nonzero(rng, 1);
    if rng.gen_bool(0.4) {
        return Word::from_syllables([(GEN_A, BigInt::from(target)), (GEN_B, BigInt::from(nonzero(rng, bound)))]);
    }
    loop {
        let x1 = nonzero(rng, 3);
        let x2 = target - x1;
        if x2 != 0 {
            return Word::from_syllables([
                (GEN_A, BigInt::from(x1)),
                (GEN_B, BigInt::from(nonzero(rng, bound))),
                (GEN_A, BigInt::from(x2)),
                (GEN_B, BigInt::from(nonzero(rng, bound))),
            ]);
        }
    }
}
