//! Felsch-style Todd–Coxeter enumeration over the trivial subgroup.
//!
//! Cosets are numbered from 1, 0 marks an undefined entry. Column `2g` is
//! generator `g` (in sorted id order) and `2g + 1` its inverse. Definitions
//! fill the lowest undefined entry of the lowest live coset, except that
//! entries which would close a relator cycle (a gap of length one left by a
//! scan) are defined first. Runs are deterministic.
//!
//! Before enumerating, exponents of a generator `x` with a power relator
//! `x^k` are reduced mod `k` in the other relators, a Tietze move that keeps
//! the group and shortens relators like `x^112 y^-3` next to `x^40`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freewords::{cyclic_reduce, Word};
use crate::presentation::Presentation;

pub const DEFAULT_MAX_COSETS: usize = 1_000_000;

/// Relators longer than this after expansion into letters are refused.
pub const MAX_RELATOR_LETTERS: usize = 1 << 16;

/// Bound on queued preferred definitions; the oldest entry is dropped first.
const PREFERRED_CAP: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CosetError {
    #[error("relator {0} is too long to enumerate ({MAX_RELATOR_LETTERS} letter cap)")]
    RelatorTooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum EnumResult {
    Order {
        #[serde(with = "crate::bigstr")]
        order: BigInt,
    },
    Exceeded { limit: usize },
}

impl EnumResult {
    pub fn order(&self) -> Option<&BigInt> {
        match self {
            EnumResult::Order { order } => Some(order),
            EnumResult::Exceeded { .. } => None,
        }
    }
}

/// A closed coset table with ids `1..=len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    columns: usize,
    /// Row-major, row `c - 1` holds coset `c`.
    entries: Vec<u32>,
}

impl CosetTable {
    pub fn len(&self) -> usize {
        self.entries.len().checked_div(self.columns).unwrap_or(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn generator_count(&self) -> usize {
        self.columns / 2
    }

    /// Image of `coset` under generator `gen` (or its inverse).
    pub fn get(&self, coset: u32, gen: usize, inverse: bool) -> u32 {
        self.entries[(coset as usize - 1) * self.columns + 2 * gen + inverse as usize]
    }

    pub fn set(&mut self, coset: u32, gen: usize, inverse: bool, target: u32) {
        self.entries[(coset as usize - 1) * self.columns + 2 * gen + inverse as usize] = target;
    }

    /// `row<TAB>gen<TAB>target` lines; inverse columns carry a `^-1` suffix.
    pub fn to_tsv(&self, names: &[String]) -> String {
        let mut out = String::new();
        for c in 1..=self.len() as u32 {
            for g in 0..self.generator_count() {
                for inv in [false, true] {
                    let name = names.get(g).cloned().unwrap_or_else(|| format!("g{g}"));
                    let suffix = if inv { "^-1" } else { "" };
                    let _ = writeln!(out, "{c}\t{name}{suffix}\t{}", self.get(c, g, inv));
                }
            }
        }
        out
    }
}

/// Residue of `e` mod `k` nearest zero, ties towards the positive side.
fn symmetric_residue(e: &BigInt, k: &BigInt) -> BigInt {
    let r = e.mod_floor(k);
    if BigInt::from(2) * &r > *k {
        r - k
    } else {
        r
    }
}

/// One power relator `x^k` per generator (`k` the gcd of all of them), then
/// the remaining relators with `x` exponents reduced mod `k`.
fn reduce_by_powers(p: &Presentation) -> Vec<Word> {
    let reduced: Vec<Word> = p.relators().iter().map(cyclic_reduce).filter(|r| !r.is_identity()).collect();
    let mut moduli: BTreeMap<u32, BigInt> = BTreeMap::new();
    for r in &reduced {
        if let [s] = r.syllables() {
            let k = moduli.entry(s.gen).or_insert_with(BigInt::zero);
            *k = k.gcd(&s.exp);
        }
    }
    let mut out: Vec<Word> = moduli.iter().map(|(&g, k)| Word::gen_power(g, k.clone())).collect();
    for r in reduced {
        if r.syllables().len() == 1 {
            continue;
        }
        let w = cyclic_reduce(&Word::from_syllables(r.syllables().iter().map(|s| {
            let exp = match moduli.get(&s.gen) {
                Some(k) => symmetric_residue(&s.exp, k),
                None => s.exp.clone(),
            };
            (s.gen, exp)
        })));
        if !w.is_identity() {
            out.push(w);
        }
    }
    out
}

/// Relators as column sequences over the presentation's sorted generators.
fn relator_columns(p: &Presentation) -> Result<Vec<Vec<usize>>, CosetError> {
    let ids = p.generator_ids();
    let mut out = Vec::new();
    for (k, r) in reduce_by_powers(p).into_iter().enumerate() {
        let letters = r.letters(MAX_RELATOR_LETTERS).ok_or(CosetError::RelatorTooLong(k))?;
        out.push(
            letters
                .into_iter()
                .map(|(g, s)| 2 * ids.binary_search(&g).expect("declared generator") + (s < 0) as usize)
                .collect(),
        );
    }
    Ok(out)
}

struct Enumerator {
    cols: usize,
    table: Vec<u32>,
    /// Union-find parent; `parent[c] == c` for live cosets.
    parent: Vec<u32>,
    /// Cyclic conjugates of every relator and its inverse, by first column.
    cycles: Vec<Vec<Vec<usize>>>,
    deductions: Vec<(u32, usize)>,
    preferred: VecDeque<(u32, usize)>,
    limit: usize,
    allocated: usize,
}

impl Enumerator {
    fn new(cols: usize, relators: &[Vec<usize>], limit: usize) -> Self {
        let mut cycles: Vec<Vec<Vec<usize>>> = vec![Vec::new(); cols];
        for r in relators {
            let inv: Vec<usize> = r.iter().rev().map(|&x| x ^ 1).collect();
            for w in [r, &inv] {
                for s in 0..w.len() {
                    let rot: Vec<usize> = w[s..].iter().chain(&w[..s]).copied().collect();
                    if !cycles[rot[0]].contains(&rot) {
                        cycles[rot[0]].push(rot);
                    }
                }
            }
        }
        let mut e = Enumerator {
            cols,
            table: vec![0; 2 * cols],
            parent: vec![0, 1],
            cycles,
            deductions: Vec::new(),
            preferred: VecDeque::new(),
            limit,
            allocated: 1,
        };
        e.table.truncate(2 * cols);
        e
    }

    #[inline]
    fn at(&self, c: u32, x: usize) -> u32 {
        self.table[c as usize * self.cols + x]
    }

    #[inline]
    fn put(&mut self, c: u32, x: usize, v: u32) {
        self.table[c as usize * self.cols + x] = v;
    }

    fn live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn define(&mut self, c: u32, x: usize) -> bool {
        if self.allocated >= self.limit {
            return false;
        }
        self.allocated += 1;
        let d = self.parent.len() as u32;
        self.parent.push(d);
        self.table.extend(std::iter::repeat(0).take(self.cols));
        self.put(c, x, d);
        self.put(d, x ^ 1, c);
        self.deductions.push((c, x));
        true
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = c;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut Vec<u32>) {
        let (ra, rb) = (self.rep(a), self.rep(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let g = queue[i];
            i += 1;
            for x in 0..self.cols {
                let d = self.at(g, x);
                if d == 0 {
                    continue;
                }
                self.put(d, x ^ 1, 0);
                let (mu, nu) = (self.rep(g), self.rep(d));
                if self.at(mu, x) != 0 {
                    let t = self.at(mu, x);
                    self.merge(nu, t, &mut queue);
                } else if self.at(nu, x ^ 1) != 0 {
                    let t = self.at(nu, x ^ 1);
                    self.merge(mu, t, &mut queue);
                } else {
                    self.put(mu, x, nu);
                    self.put(nu, x ^ 1, mu);
                    self.deductions.push((mu, x));
                }
            }
        }
    }

    /// Scans `w` from `c` in both directions; fills a single gap or reports
    /// a coincidence, never defines new cosets.
    fn scan(&mut self, c: u32, w: &[usize]) {
        let (mut f, mut b) = (c, c);
        let (mut i, mut j) = (0usize, w.len() as isize - 1);
        while (i as isize) <= j && self.at(f, w[i]) != 0 {
            f = self.at(f, w[i]);
            i += 1;
        }
        if (i as isize) > j {
            if f != c {
                self.coincidence(f, c);
            }
            return;
        }
        while j >= i as isize && self.at(b, w[j as usize] ^ 1) != 0 {
            b = self.at(b, w[j as usize] ^ 1);
            j -= 1;
        }
        if j < i as isize {
            self.coincidence(f, b);
        } else if j == i as isize + 1 {
            if self.preferred.len() == PREFERRED_CAP {
                self.preferred.pop_front();
            }
            self.preferred.push_back((f, w[i]));
        } else if j == i as isize {
            let x = w[i];
            self.put(f, x, b);
            self.put(b, x ^ 1, f);
            self.deductions.push((f, x));
        }
    }

    fn process_deductions(&mut self) {
        while let Some((c, x)) = self.deductions.pop() {
            if !self.live(c) {
                continue;
            }
            for k in 0..self.cycles[x].len() {
                let w = std::mem::take(&mut self.cycles[x][k]);
                self.scan(c, &w);
                self.cycles[x][k] = w;
                if !self.live(c) {
                    break;
                }
            }
            let d = self.at(c, x);
            if d != 0 && self.live(d) {
                let y = x ^ 1;
                for k in 0..self.cycles[y].len() {
                    let w = std::mem::take(&mut self.cycles[y][k]);
                    self.scan(d, &w);
                    self.cycles[y][k] = w;
                    if !self.live(d) {
                        break;
                    }
                }
            }
        }
    }

    /// Scans every relator cycle from every live coset; returns false when
    /// something changed.
    fn full_check(&mut self) -> bool {
        let before = (self.table.clone(), self.parent.clone());
        let n = self.parent.len() as u32;
        for c in 1..n {
            for x in 0..self.cols {
                if !self.live(c) {
                    break;
                }
                for k in 0..self.cycles[x].len() {
                    let w = std::mem::take(&mut self.cycles[x][k]);
                    self.scan(c, &w);
                    self.cycles[x][k] = w;
                    if !self.live(c) {
                        break;
                    }
                }
                self.process_deductions();
            }
        }
        (self.table.clone(), self.parent.clone()) == before
    }

    /// Makes the queued definitions that would close a scan at once. Only
    /// entries queued before the call are taken, so the pointer still advances.
    fn drain_preferred(&mut self) -> bool {
        for _ in 0..self.preferred.len() {
            let Some((c, x)) = self.preferred.pop_front() else { break };
            if self.live(c) && self.at(c, x) == 0 {
                if !self.define(c, x) {
                    return false;
                }
                self.process_deductions();
            }
        }
        true
    }

    fn run(&mut self) -> bool {
        loop {
            let mut c = 1u32;
            while (c as usize) < self.parent.len() {
                if self.live(c) {
                    for x in 0..self.cols {
                        if !self.live(c) {
                            break;
                        }
                        if self.at(c, x) == 0 {
                            if !self.drain_preferred() {
                                return false;
                            }
                            if !self.live(c) {
                                break;
                            }
                            if self.at(c, x) != 0 {
                                continue;
                            }
                            if !self.define(c, x) {
                                return false;
                            }
                            self.process_deductions();
                        }
                    }
                }
                c += 1;
            }
            if self.full_check() {
                return true;
            }
        }
    }

    fn compact(&self) -> CosetTable {
        let n = self.parent.len();
        let mut new_id = vec![0u32; n];
        let mut next = 0u32;
        for c in 1..n as u32 {
            if self.live(c) {
                next += 1;
                new_id[c as usize] = next;
            }
        }
        let mut entries = Vec::with_capacity(next as usize * self.cols);
        for c in 1..n as u32 {
            if self.live(c) {
                for x in 0..self.cols {
                    entries.push(new_id[self.at(c, x) as usize]);
                }
            }
        }
        CosetTable { columns: self.cols, entries }
    }
}

/// Enumerates and returns the closed table, or `None` when more than
/// `max_cosets` cosets would be allocated.
pub fn enumerate_table(p: &Presentation, max_cosets: usize) -> Result<Option<CosetTable>, CosetError> {
    let rels = relator_columns(p)?;
    let cols = 2 * p.generator_count();
    if cols == 0 {
        return Ok(Some(CosetTable { columns: 0, entries: Vec::new() }));
    }
    let mut e = Enumerator::new(cols, &rels, max_cosets.max(1));
    Ok(e.run().then(|| e.compact()))
}

pub fn enumerate_cosets(p: &Presentation, max_cosets: usize) -> Result<EnumResult, CosetError> {
    Ok(match enumerate_table(p, max_cosets)? {
        Some(t) => EnumResult::Order { order: BigInt::from(t.len()) },
        None => EnumResult::Exceeded { limit: max_cosets },
    })
}

/// Checks that the table is total, that inverse columns are mutually
/// inverse, and that every relator closes at every coset.
pub fn validate_table(t: &CosetTable, p: &Presentation) -> bool {
    if t.generator_count() != p.generator_count() {
        return false;
    }
    let Ok(rels) = relator_columns(p) else { return false };
    let n = t.len() as u32;
    if t.columns == 0 {
        return rels.is_empty();
    }
    let at = |c: u32, x: usize| t.entries[(c as usize - 1) * t.columns + x];
    for c in 1..=n {
        for x in 0..t.columns {
            let d = at(c, x);
            if d == 0 || d > n || at(d, x ^ 1) != c {
                return false;
            }
        }
    }
    for c in 1..=n {
        for r in &rels {
            let end = r.iter().fold(c, |cur, &x| at(cur, x));
            if end != c {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{build_template, parse_template};
    use crate::freewords::{parse_word, Word};
    use crate::presentation::instantiate;
    use proptest::prelude::*;

    fn cyclic(n: i64) -> Presentation {
        Presentation::new(vec![(0, "a".into())], vec![Word::gen_power(0, n)])
    }

    fn digraph_pres(t: &str, r: &str) -> Presentation {
        instantiate(&build_template(&parse_template(t).unwrap()).unwrap(), &parse_word(r).unwrap()).unwrap()
    }

    fn order(p: &Presentation) -> Option<usize> {
        enumerate_cosets(p, DEFAULT_MAX_COSETS).unwrap().order().map(|o| o.try_into().unwrap())
    }

    #[test]
    fn spec_examples() {
        assert_eq!(order(&cyclic(5)), Some(5));
        assert_eq!(order(&digraph_pres("L(4)", "ab^-2")), Some(15));
        assert_eq!(order(&digraph_pres("L(5)", "ab")), Some(2));
        let p = digraph_pres("L(4)", "a^2b^-3");
        let t = enumerate_table(&p, DEFAULT_MAX_COSETS).unwrap().unwrap();
        assert_eq!(t.len(), 65);
        assert!(validate_table(&t, &p));
    }

    #[test]
    fn digraph_group_orders() {
        let cases: &[(&str, &str, usize)] = &[
            ("L(5)", "ab^-2", 31),
            ("L(5)", "a^2b^-3", 211),
            ("L(6)", "a^2b^-3", 665),
            ("L(4;out=1)", "ab^-2", 30),
            ("L(5,2)", "ab^-2", 4),
            ("L(4,1;out=1)", "ab^-2", 12),
            ("L(4;in=1,out=1)", "ab^-2", 30),
            ("L(4,1)", "abab^2", 30),
            ("L(4;out=1,in=1)", "abab^2", 390),
            ("L(4;in=1,out=1)", "abab^2", 390),
            ("L(4,1)", "ababab^2", 84),
            ("L(4;out=1,in=1)", "ababab^2", 2100),
        ];
        for &(t, r, n) in cases {
            let start = std::time::Instant::now();
            let p = digraph_pres(t, r);
            let tab = enumerate_table(&p, DEFAULT_MAX_COSETS).unwrap().unwrap();
            assert_eq!(tab.len(), n, "{t} {r}");
            assert!(validate_table(&tab, &p));
            eprintln!("{t} {r}: {n} in {:?}", start.elapsed());
        }
    }

    #[test]
    fn validate_detects_corruption() {
        let p = cyclic(5);
        let mut t = enumerate_table(&p, 100).unwrap().unwrap();
        assert!(validate_table(&t, &p));
        let old = t.get(2, 0, false);
        t.set(2, 0, false, if old == 1 { 2 } else { 1 });
        assert!(!validate_table(&t, &p));
    }

    #[test]
    fn small_groups() {
        let s3 = Presentation::new(
            vec![(0, "a".into()), (1, "b".into())],
            vec![parse_word("a^2").unwrap(), parse_word("b^3").unwrap(), parse_word("abab").unwrap()],
        );
        assert_eq!(order(&s3), Some(6));
        // Quaternion group.
        let q8 = Presentation::new(
            vec![(0, "a".into()), (1, "b".into())],
            vec![parse_word("a^4").unwrap(), parse_word("a^2 B^2").unwrap(), parse_word("b a B a").unwrap()],
        );
        assert_eq!(order(&q8), Some(8));
        // Trivial group and the group with no generators.
        let triv = Presentation::new(vec![(0, "a".into())], vec![parse_word("a").unwrap()]);
        assert_eq!(order(&triv), Some(1));
        assert_eq!(order(&Presentation::default()), Some(1));
        // Infinite group hits the limit.
        let z = Presentation::new(vec![(0, "a".into())], vec![]);
        assert_eq!(enumerate_cosets(&z, 50).unwrap(), EnumResult::Exceeded { limit: 50 });
    }

    #[test]
    fn tsv_dump() {
        let t = enumerate_table(&cyclic(2), 10).unwrap().unwrap();
        assert_eq!(t.to_tsv(&["a".into()]), "1\ta\t2\n1\ta^-1\t2\n2\ta\t1\n2\ta^-1\t1\n");
    }

    #[test]
    fn huge_relator_is_refused() {
        let p = Presentation::new(vec![(0, "a".into())], vec![Word::gen_power(0, 1i64 << 40)]);
        assert!(enumerate_cosets(&p, 10).is_err());
    }

    /// Order of the abelian group `Z_m x Z_n` with presentation over two
    /// commuting generators.
    fn abelian2(m: i64, n: i64) -> Presentation {
        Presentation::new(
            vec![(0, "a".into()), (1, "b".into())],
            vec![Word::gen_power(0, m), Word::gen_power(1, n), parse_word("abAB").unwrap()],
        )
    }

    proptest! {
        #[test]
        fn cyclic_and_abelian_orders(m in 1i64..30, n in 1i64..30) {
            prop_assert_eq!(order(&cyclic(m)), Some(m as usize));
            let p = abelian2(m, n);
            let t = enumerate_table(&p, DEFAULT_MAX_COSETS).unwrap().unwrap();
            prop_assert_eq!(t.len(), (m * n) as usize);
            prop_assert!(validate_table(&t, &p));
        }

        #[test]
        fn dihedral_orders(n in 2i64..40) {
            let p = Presentation::new(
                vec![(0, "r".into()), (1, "s".into())],
                vec![Word::gen_power(0, n), Word::gen_power(1, 2), parse_word("abab").unwrap()],
            );
            prop_assert_eq!(order(&p), Some(2 * n as usize));
        }

        #[test]
        fn deterministic_and_monotone(n in 3i64..30, slack in 0usize..50) {
            let p = abelian2(n, 2);
            let a = enumerate_table(&p, DEFAULT_MAX_COSETS).unwrap();
            let b = enumerate_table(&p, DEFAULT_MAX_COSETS).unwrap();
            prop_assert_eq!(&a, &b);
            let mut lo = 1usize;
            while enumerate_cosets(&p, lo).unwrap().order().is_none() {
                lo += 1;
            }
            prop_assert_eq!(enumerate_cosets(&p, lo + slack).unwrap(), enumerate_cosets(&p, lo).unwrap());
        }
    }
}
