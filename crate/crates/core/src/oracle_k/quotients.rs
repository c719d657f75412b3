//! Search for permutation representations of `<a, b | R>`.
//!
//! Permutations act on the right on `0..degree`; `a` ranges over cycle-type
//! representatives because simultaneous conjugation preserves every check.

use super::letters::Letter;
use crate::par;

pub type Perm = Vec<u8>;

/// `p` then `q`.
pub fn compose(p: &[u8], q: &[u8]) -> Perm {
    p.iter().map(|&i| q[i as usize]).collect()
}

pub fn invert(p: &[u8]) -> Perm {
    let mut out = vec![0u8; p.len()];
    for (i, &j) in p.iter().enumerate() {
        out[j as usize] = i as u8;
    }
    out
}

pub fn is_identity(p: &[u8]) -> bool {
    p.iter().enumerate().all(|(i, &j)| i == j as usize)
}

/// Image of a letter word under `a -> pa`, `b -> pb`.
pub fn evaluate(w: &[Letter], images: &[Perm; 4]) -> Perm {
    let degree = images[0].len();
    let mut point: Perm = (0..degree as u8).collect();
    for &x in w {
        point = compose(&point, &images[x as usize]);
    }
    point
}

pub fn images(pa: &[u8], pb: &[u8]) -> [Perm; 4] {
    [pa.to_vec(), pb.to_vec(), invert(pa), invert(pb)]
}

/// All permutations of `0..degree` in lexicographic order.
pub fn all_perms(degree: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Perm = (0..degree as u8).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..degree).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..degree).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// One permutation per cycle type, cycles on consecutive points.
pub fn cycle_type_reps(degree: usize) -> Vec<Perm> {
    fn partitions(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            partitions(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut parts = Vec::new();
    partitions(degree, degree, &mut Vec::new(), &mut parts);
    parts
        .into_iter()
        .map(|cycle_lengths| {
            let mut p: Perm = (0..degree as u8).collect();
            let mut start = 0;
            for len in cycle_lengths {
                for k in 0..len {
                    p[start + k] = (start + (k + 1) % len) as u8;
                }
                start += len;
            }
            p
        })
        .collect()
}

/// First pair `(degree, a, b)` in search order accepted by `keep`, over
/// representations with `R -> 1`.
fn search<F>(relator: &[Letter], max_degree: usize, parallel: bool, keep: F) -> Option<(usize, Perm, Perm)>
where
    F: Fn(&[Perm; 4]) -> bool + Sync + Send,
{
    for degree in 2..=max_degree {
        let bs = all_perms(degree);
        let found = par::find_first(&cycle_type_reps(degree), parallel, |pa| {
            bs.iter().find_map(|pb| {
                let im = images(pa, pb);
                (is_identity(&evaluate(relator, &im)) && keep(&im)).then(|| (pa.clone(), pb.clone()))
            })
        });
        if let Some((pa, pb)) = found {
            return Some((degree, pa, pb));
        }
    }
    None
}

/// A representation killing `relator` but not `target`.
pub fn separating_quotient(
    relator: &[Letter],
    target: &[Letter],
    max_degree: usize,
    parallel: bool,
) -> Option<(usize, Perm, Perm)> {
    search(relator, max_degree, parallel, |im| !is_identity(&evaluate(target, im)))
}

/// A representation killing `relator` whose image is non-abelian.
pub fn nonabelian_quotient(relator: &[Letter], max_degree: usize, parallel: bool) -> Option<(usize, Perm, Perm)> {
    search(relator, max_degree, parallel, |im| compose(&im[0], &im[1]) != compose(&im[1], &im[0]))
}
