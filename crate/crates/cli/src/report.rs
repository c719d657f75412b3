//! Report types for `classify` and `corpus --run`, with their text forms.

use std::fmt::Write as _;

use digraph_groups::classifier::{classify, cross_verify, Certificate, ClassifierConfig, CrossReport, Verdict};
use digraph_groups::freewords::parse_word;
use digraph_groups::oracle_k::{Evidence, KProbeResult, OracleVerdict};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusEntry;
use crate::load_graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub classify: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<f64>,
}

/// The verdict's fields at top level, plus the optional cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<CrossReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Timings>,
}

/// `Z^2 x Z_3 x Z_5` style; the trivial group prints as `1`.
pub fn invariants_text(invariants: &[BigInt]) -> String {
    let free = invariants.iter().filter(|d| d.sign() == num_bigint::Sign::NoSign).count();
    let mut parts = Vec::new();
    match free {
        0 => {}
        1 => parts.push("Z".to_string()),
        k => parts.push(format!("Z^{k}")),
    }
    parts.extend(invariants.iter().filter(|d| d.sign() != num_bigint::Sign::NoSign).map(|d| format!("Z_{d}")));
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" x ")
    }
}

fn evidence_text(e: &Evidence) -> String {
    match e {
        Evidence::ExponentDegenerate { alpha, beta } => format!("exponent-degenerate (alpha {alpha}, beta {beta})"),
        Evidence::SingleSyllablePair => "single syllable pair".into(),
        Evidence::CyclicK(c) => format!("K cyclic on {} with a = w^{}, b = w^{}", c.generator, c.s, c.u),
        Evidence::RewriteTrace { factors } => format!("rewrite trace, {} conjugate factors", factors.len()),
        Evidence::ConjugateProduct { factors } => format!("conjugate product, {} factors", factors.len()),
        Evidence::Quotient(q) => format!("separating permutation quotient of degree {}", q.degree),
        Evidence::Bounds(b) => format!(
            "bounds exhausted: {} completion steps, {} rules, degree {}",
            b.completion_steps, b.rules, b.max_degree
        ),
    }
}

fn oracle_text(o: &OracleVerdict) -> String {
    let reflected = if o.reflected { ", reflected" } else { "" };
    let answer = format!("{:?}", o.answer).to_lowercase();
    format!("{answer} on {}{reflected}: {}", o.relator, evidence_text(&o.evidence))
}

fn certificate_text(c: &Certificate) -> String {
    match c {
        Certificate::W1Infinite { oracle } => format!("w1-infinite: {}", oracle_text(oracle)),
        Certificate::FreeProductSurjection { surjection: s } => {
            format!("free-product-surjection onto Z_{} * Z_{} via {}, {}", s.p, s.q, s.kept[0], s.kept[1])
        }
        Certificate::DeltaObstruction { letter, delta, surjection: s } => format!(
            "delta-obstruction: delta_{letter} = {delta}, onto Z_{} * Z_{} via {}, {}",
            s.p, s.q, s.kept[0], s.kept[1]
        ),
        Certificate::ShapeExclusion { reason, surjection: s, .. } => {
            format!("shape-exclusion: {reason}, onto Z_{} * Z_{} via {}, {}", s.p, s.q, s.kept[0], s.kept[1])
        }
        Certificate::ZeroOrder { reason, weights } => {
            let w: Vec<String> = weights.iter().map(|w| format!("{}={}", w.vertex, w.weight)).collect();
            format!("zero-order: {reason}; weights {}", w.join(" "))
        }
        Certificate::DisconnectedFreeProduct { components } => {
            format!("disconnected-free-product of {} components", components.len())
        }
        Certificate::Deficiency { component, vertices, arcs } => {
            format!("deficiency: component {{{}}} has {vertices} vertices and {arcs} arcs", component.join(", "))
        }
    }
}

pub fn render_text(r: &Report) -> String {
    let v = &r.verdict;
    let mut s = String::new();
    let _ = writeln!(s, "status: {}", v.status);
    if let Some(case) = v.case {
        let _ = writeln!(s, "case: {case}");
    }
    if let Some(order) = &v.order {
        let _ = writeln!(s, "order: {order}");
    }
    if let Some(ab) = &v.ab_order {
        let _ = writeln!(s, "abelianization order: {ab}");
    }
    if let Some(p) = &v.power_word {
        let _ = writeln!(s, "adjoined power: {p}");
    }
    if !v.rank_bound.is_empty() {
        let ranks: Vec<String> = v.rank_bound.iter().map(u8::to_string).collect();
        let _ = writeln!(s, "rank in {{{}}}", ranks.join(", "));
    }
    if let Some(reason) = &v.reason {
        let _ = writeln!(s, "reason: {reason}");
    }
    if let Some(shape) = &v.shape {
        match shape.shape {
            Some(t) => {
                let _ = writeln!(s, "shape: {t} witness {}", shape.witness.join(" "));
            }
            None => {
                let _ = writeln!(s, "shape: NoMatch");
            }
        }
    }
    if let Some(p) = &v.pruned {
        if !p.removed.is_empty() {
            let gone: Vec<&str> = p.removed.iter().map(|x| x.vertex.as_str()).collect();
            let _ = writeln!(s, "pruned ({:?}): {}", p.kind, gone.join(" "));
        }
    }
    if let Some(o) = &v.oracle {
        let _ = writeln!(s, "oracle: {}", oracle_text(o));
    }
    if let Some(KProbeResult::InfiniteCyclic(c)) = &v.k_probe {
        let _ = writeln!(s, "k-probe: K infinite cyclic on {}", c.generator);
    }
    for c in &v.certificates {
        let _ = writeln!(s, "certificate: {}", certificate_text(c));
    }
    if let Some(h) = &v.hypothetical {
        let order = h.order.as_ref().map(|o| format!(" of order {o}")).unwrap_or_default();
        let _ = writeln!(s, "if {}: {}{order}", h.requires, h.status);
    }
    if let Some(report) = &r.verification {
        for c in &report.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "verify {mark} {}: {}", c.name, c.detail);
        }
    }
    if let Some(t) = &r.timings_ms {
        let verify = t.verify.map(|x| format!(", verify {x:.1} ms")).unwrap_or_default();
        let _ = writeln!(s, "time: classify {:.1} ms{verify}", t.classify);
    }
    s
}

/// One corpus instance classified, cross-checked and compared.
#[derive(Debug, Clone, Serialize)]
pub struct EntryResult {
    pub name: String,
    pub verdict: Verdict,
    pub verification: CrossReport,
    pub mismatches: Vec<String>,
}

impl EntryResult {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.verification.passed()
    }

    pub fn line(&self) -> String {
        let mark = if self.passed() { "ok  " } else { "FAIL" };
        let order = self.verdict.order.as_ref().map(|o| format!(" {o}")).unwrap_or_default();
        let case = self.verdict.case.map(|c| format!(" case {c}")).unwrap_or_default();
        let mut line = format!("{mark} {:<26} {}{order}{case}", self.name, self.verdict.status);
        for m in &self.mismatches {
            let _ = write!(line, "; {m}");
        }
        for c in self.verification.checks.iter().filter(|c| !c.passed) {
            let _ = write!(line, "; check {} failed: {}", c.name, c.detail);
        }
        line
    }
}

pub fn run_entry(e: &CorpusEntry, config: &ClassifierConfig) -> Result<EntryResult, String> {
    let g = load_graph(e.digraph)?;
    let r = parse_word(e.relator).map_err(|err| format!("{}: {err}", e.name))?;
    let verdict = classify(&g, &r, config);
    let verification = cross_verify(&g, &r, &verdict, config);
    let mismatches = e.expected.mismatches(&verdict);
    Ok(EntryResult { name: e.name.to_string(), verdict, verification, mismatches })
}
