//! Bounded Knuth-Bendix completion for `<a, b | R>` as a monoid with
//! shortlex order. Every rule `lhs -> rhs` carries a proof: a list of
//! conjugates of `R^{±1}` whose free product equals `lhs * rhs^-1`.
//!
//! Truncation only loses confluence. Reductions stay sound, so a word that
//! reduces to the identity is trivial in the group with the proof to show it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::letters::{self, inv, Letter};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub conjugator: Vec<Letter>,
    pub sign: i8,
}

pub type Proof = Vec<Factor>;

/// Appends `f`, cancelling it against an inverse factor at the end.
fn push_factor(p: &mut Proof, f: Factor) {
    if let Some(last) = p.last() {
        if last.conjugator == f.conjugator && last.sign == -f.sign {
            p.pop();
            return;
        }
    }
    p.push(f);
}

fn extend(p: &mut Proof, q: impl IntoIterator<Item = Factor>) {
    for f in q {
        push_factor(p, f);
    }
}

pub fn inverse_proof(p: &[Factor]) -> Proof {
    let mut out = Vec::with_capacity(p.len());
    extend(&mut out, p.iter().rev().map(|f| Factor { conjugator: f.conjugator.clone(), sign: -f.sign }));
    out
}

/// Proof of `x u x^-1 = x v x^-1` from a proof of `u = v`.
pub fn conjugate_proof(x: &[Letter], p: &[Factor]) -> Proof {
    if x.is_empty() {
        return p.to_vec();
    }
    p.iter()
        .map(|f| Factor { conjugator: letters::product(&[x, &f.conjugator]), sign: f.sign })
        .collect()
}

/// Free reduction of the product of the proof's conjugates.
#[cfg(test)]
pub fn proof_value(relator: &[Letter], p: &[Factor]) -> Vec<Letter> {
    let rel_inv = letters::inverse(relator);
    let mut out = Vec::new();
    for f in p {
        let body: &[Letter] = if f.sign > 0 { relator } else { &rel_inv };
        out = letters::product(&[&out, &f.conjugator, body, &letters::inverse(&f.conjugator)]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteLimits {
    pub max_rules: usize,
    pub max_rule_len: usize,
    pub max_steps: usize,
    pub max_proof_factors: usize,
}

#[derive(Debug, Clone)]
struct Rule {
    lhs: Vec<Letter>,
    rhs: Vec<Letter>,
    proof: Proof,
    live: bool,
}

/// An equation `u = v` whose proof has value `u * v^-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Equation {
    u: Vec<Letter>,
    v: Vec<Letter>,
    proof: Proof,
}

/// A queued equation. Overlaps are built from the rules when popped; rule
/// proofs track right-side updates, so the result stays valid.
#[derive(Debug, Clone)]
enum Pending {
    Given(Equation),
    /// A suffix of length `len` of rule `i`'s left side starts rule `j`'s.
    Overlap { i: usize, j: usize, len: usize },
}

pub struct Rewriter {
    rules: Vec<Rule>,
    index: HashMap<Vec<Letter>, usize>,
    max_lhs: usize,
    limits: RewriteLimits,
    pending: BinaryHeap<(Reverse<usize>, Reverse<u64>)>,
    queue: HashMap<u64, Pending>,
    next_seq: u64,
    truncated: bool,
    steps: usize,
}

impl Rewriter {
    /// Runs completion for the relator `r` (cyclically reduced letters).
    pub fn complete(r: &[Letter], limits: RewriteLimits) -> Self {
        let mut rw = Rewriter {
            rules: Vec::new(),
            index: HashMap::new(),
            max_lhs: 0,
            limits,
            pending: BinaryHeap::new(),
            queue: HashMap::new(),
            next_seq: 0,
            truncated: false,
            steps: 0,
        };
        for x in 0..4u8 {
            rw.add_rule(vec![x, inv(x)], Vec::new(), Vec::new());
        }
        let r_inv = letters::inverse(r);
        for (body, sign) in [(r, 1i8), (&r_inv[..], -1i8)] {
            for k in 0..body.len() {
                // body[k..] body[..k] = head^-1 body head with head = body[..k]
                let rot: Vec<Letter> = body[k..].iter().chain(&body[..k]).copied().collect();
                let conjugator = letters::inverse(&body[..k]);
                rw.push(Pending::Given(Equation { u: rot, v: Vec::new(), proof: vec![Factor { conjugator, sign }] }));
            }
        }
        rw.run();
        rw
    }

    /// True when completion finished with nothing dropped.
    pub fn is_confluent(&self) -> bool {
        !self.truncated && self.pending.is_empty()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().filter(|r| r.live).count()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Normal form of `w` with a proof of `w = normal form`, or `None` once
    /// the proof outgrows its cap.
    pub fn reduce(&self, w: &[Letter]) -> Option<(Vec<Letter>, Proof)> {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        let mut todo: Vec<Letter> = w.iter().rev().copied().collect();
        let mut proof = Proof::new();
        while let Some(x) = todo.pop() {
            out.push(x);
            for len in 1..=self.max_lhs.min(out.len()) {
                let start = out.len() - len;
                if let Some(&ri) = self.index.get(&out[start..]) {
                    let rule = &self.rules[ri];
                    extend(&mut proof, conjugate_proof(&out[..start], &rule.proof));
                    if proof.len() > self.limits.max_proof_factors {
                        return None;
                    }
                    out.truncate(start);
                    todo.extend(rule.rhs.iter().rev());
                    break;
                }
            }
        }
        Some((out, proof))
    }

    fn push(&mut self, e: Pending) {
        let key = match &e {
            Pending::Given(e) => e.u.len().max(e.v.len()),
            Pending::Overlap { i, j, len } => {
                let (r1, r2) = (&self.rules[*i], &self.rules[*j]);
                (r1.rhs.len() + r2.lhs.len() - len).max(r1.lhs.len() - len + r2.rhs.len())
            }
        };
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.push((Reverse(key), Reverse(seq)));
        self.queue.insert(seq, e);
    }

    fn add_rule(&mut self, lhs: Vec<Letter>, rhs: Vec<Letter>, proof: Proof) -> usize {
        self.max_lhs = self.max_lhs.max(lhs.len());
        let id = self.rules.len();
        self.index.insert(lhs.clone(), id);
        self.rules.push(Rule { lhs, rhs, proof, live: true });
        id
    }

    fn run(&mut self) {
        while let Some((_, Reverse(seq))) = self.pending.pop() {
            if self.steps >= self.limits.max_steps {
                self.truncated = true;
                return;
            }
            self.steps += 1;
            let e = match self.queue.remove(&seq).expect("queued equation") {
                Pending::Given(e) => e,
                Pending::Overlap { i, j, len } => self.overlap_equation(i, j, len),
            };
            if !self.process(e) {
                return;
            }
        }
    }

    /// Orients one equation into a rule; false once the rule cap is hit.
    fn process(&mut self, e: Equation) -> bool {
        let (Some((u, q1)), Some((v, q2))) = (self.reduce(&e.u), self.reduce(&e.v)) else {
            self.truncated = true;
            return true;
        };
        if u == v {
            return true;
        }
        let mut proof = inverse_proof(&q1);
        extend(&mut proof, e.proof);
        extend(&mut proof, q2);
        let (lhs, rhs, proof) = if letters::shortlex(&u, &v).is_gt() {
            (u, v, proof)
        } else {
            (v, u, inverse_proof(&proof))
        };
        if lhs.len() > self.limits.max_rule_len || proof.len() > self.limits.max_proof_factors {
            self.truncated = true;
            return true;
        }
        if self.rule_count() >= self.limits.max_rules {
            self.truncated = true;
            return false;
        }
        let k = self.add_rule(lhs, rhs, proof);
        self.interreduce(k);
        self.critical_pairs(k);
        true
    }

    /// Retires rules whose left side contains the new one and normalizes
    /// right sides.
    fn interreduce(&mut self, k: usize) {
        let new_lhs = self.rules[k].lhs.clone();
        for j in 0..self.rules.len() {
            if j == k || !self.rules[j].live {
                continue;
            }
            if contains(&self.rules[j].lhs, &new_lhs) {
                self.rules[j].live = false;
                self.index.remove(&self.rules[j].lhs);
                let r = self.rules[j].clone();
                self.push(Pending::Given(Equation { u: r.lhs, v: r.rhs, proof: r.proof }));
            } else if contains(&self.rules[j].rhs, &new_lhs) {
                match self.reduce(&self.rules[j].rhs) {
                    Some((rhs, q)) => {
                        let rule = &mut self.rules[j];
                        extend(&mut rule.proof, q);
                        rule.rhs = rhs;
                    }
                    None => self.truncated = true,
                }
            }
        }
    }

    fn critical_pairs(&mut self, k: usize) {
        let live: Vec<usize> = (0..self.rules.len()).filter(|&j| self.rules[j].live).collect();
        for &j in &live {
            self.overlaps(k, j);
            if j != k {
                self.overlaps(j, k);
            }
        }
    }

    /// Queues overlaps where a proper suffix of `lhs_i` is a proper prefix
    /// of `lhs_j`.
    fn overlaps(&mut self, i: usize, j: usize) {
        let (l1, l2) = (&self.rules[i].lhs, &self.rules[j].lhs);
        let found: Vec<usize> = (1..l1.len().min(l2.len())).filter(|&len| l1[l1.len() - len..] == l2[..len]).collect();
        for len in found {
            self.push(Pending::Overlap { i, j, len });
        }
    }

    /// With `lhs_i = x y` and `lhs_j = y z`: `rhs_i z = x rhs_j`.
    fn overlap_equation(&self, i: usize, j: usize, len: usize) -> Equation {
        let (r1, r2) = (&self.rules[i], &self.rules[j]);
        let x = &r1.lhs[..r1.lhs.len() - len];
        let z = &r2.lhs[len..];
        let u: Vec<Letter> = r1.rhs.iter().chain(z).copied().collect();
        let v: Vec<Letter> = x.iter().chain(&r2.rhs).copied().collect();
        let mut proof = inverse_proof(&r1.proof);
        extend(&mut proof, conjugate_proof(x, &r2.proof));
        Equation { u, v, proof }
    }
}

fn contains(hay: &[Letter], needle: &[Letter]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}
