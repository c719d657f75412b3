//! Decision procedure for `G_Λ(R)` over balanced digraphs of girth at least
//! four, with certificates that re-verify against the original input.
//!
//! Finite verdicts come from the order formulas. Infinite verdicts carry one
//! of: a surjection onto a free product `Z_p ∗ Z_q` (checked by killing
//! generators and reducing every relator there), a homomorphism onto a
//! nontrivial subgroup of `Z` (checked arc by arc), oracle evidence that
//! `a^α ≠ b^β` in `K`, or a component count.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coset_enum::{enumerate_cosets, DEFAULT_MAX_COSETS};
use crate::digraph::{
    analyze, census, prune, recognize_shape, reflect_digraph, sinks, sources, DegreeCensus,
    Digraph, PruneKind, PruneResult, Removal, Shape, ShapeMatch,
};
use crate::freewords::{cyclic_reduce, exponent_profile, reflect_word, ExponentProfile, Word};
use crate::oracle_k::{self, Answer, Evidence, KProbeResult, OracleConfig, OracleVerdict};
use crate::presentation::{
    abelian_invariants, abelian_order, instantiate, kill_generators, simplify_to_cyclic, Side,
    SimplifyOutcome,
};
use crate::{bigstr, par};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("case {case} needs parameter {name}")]
    MissingParameter { case: Case, name: &'static str },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("unknown case label {0}")]
    UnknownCase(String),
}

/// Case labels of the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "1a")]
    C1a,
    #[serde(rename = "1b")]
    C1b,
    #[serde(rename = "1c")]
    C1c,
    #[serde(rename = "1d")]
    C1d,
    #[serde(rename = "1e")]
    C1e,
    #[serde(rename = "1f")]
    C1f,
    #[serde(rename = "2a")]
    C2a,
    #[serde(rename = "2b")]
    C2b,
    #[serde(rename = "2c")]
    C2c,
    #[serde(rename = "2d")]
    C2d,
    #[serde(rename = "2e")]
    C2e,
    #[serde(rename = "3a")]
    C3a,
    #[serde(rename = "3b")]
    C3b,
    #[serde(rename = "3c")]
    C3c,
    #[serde(rename = "3d")]
    C3d,
    #[serde(rename = "3e")]
    C3e,
    #[serde(rename = "4")]
    C4,
}

impl Case {
    pub const ALL: [Case; 17] = [
        Case::C1a,
        Case::C1b,
        Case::C1c,
        Case::C1d,
        Case::C1e,
        Case::C1f,
        Case::C2a,
        Case::C2b,
        Case::C2c,
        Case::C2d,
        Case::C2e,
        Case::C3a,
        Case::C3b,
        Case::C3c,
        Case::C3d,
        Case::C3e,
        Case::C4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Case::C1a => "1a",
            Case::C1b => "1b",
            Case::C1c => "1c",
            Case::C1d => "1d",
            Case::C1e => "1e",
            Case::C1f => "1f",
            Case::C2a => "2a",
            Case::C2b => "2b",
            Case::C2c => "2c",
            Case::C2d => "2d",
            Case::C2e => "2e",
            Case::C3a => "3a",
            Case::C3b => "3b",
            Case::C3c => "3c",
            Case::C3d => "3d",
            Case::C3e => "3e",
            Case::C4 => "4",
        }
    }

    /// The label the same input gets after reversing arcs and reflecting `R`.
    pub fn reflect(self) -> Case {
        match self {
            Case::C1b => Case::C1c,
            Case::C1c => Case::C1b,
            Case::C1e => Case::C1f,
            Case::C1f => Case::C1e,
            Case::C2a => Case::C3a,
            Case::C2b => Case::C3b,
            Case::C2c => Case::C3c,
            Case::C2d => Case::C3d,
            Case::C2e => Case::C3e,
            Case::C3a => Case::C2a,
            Case::C3b => Case::C2b,
            Case::C3c => Case::C2c,
            Case::C3d => Case::C2d,
            Case::C3e => Case::C2e,
            c => c,
        }
    }

    /// Cases whose finiteness hinges on the structure of `K`.
    pub fn is_conditional(self) -> bool {
        matches!(self, Case::C1d | Case::C1e | Case::C1f)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Case {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Case::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| ClassifierError::UnknownCase(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Infinite,
    FiniteCyclic,
    ConditionalKQuotient,
    Unknown,
    OutOfScope,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A recognized shape flattened to `{class, n, d, m, l}`; no class is NoMatch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeReport {
    #[serde(flatten)]
    pub shape: Option<Shape>,
    pub witness: Vec<String>,
}

impl From<ShapeMatch> for ShapeReport {
    fn from(m: ShapeMatch) -> Self {
        ShapeReport { shape: m.shape, witness: m.witness }
    }
}

impl ShapeReport {
    pub fn to_match(&self) -> ShapeMatch {
        ShapeMatch { shape: self.shape, witness: self.witness.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub kind: PruneKind,
    pub removed: Vec<Removal>,
}

impl PruneReport {
    fn new(kind: PruneKind, p: &PruneResult) -> Self {
        PruneReport { kind, removed: p.removed.clone() }
    }
}

/// Homomorphism `x_v -> a^p` or `b^q` onto `Z_p ∗ Z_q` for the two kept
/// vertices, every other generator sent to the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Surjection {
    #[serde(with = "bigstr")]
    pub p: BigInt,
    #[serde(with = "bigstr")]
    pub q: BigInt,
    pub kept: [String; 2],
    pub killed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weight {
    pub vertex: String,
    #[serde(with = "bigstr")]
    pub weight: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// `a^α ≠ b^β` in `K`, so `G` is infinite.
    #[serde(rename = "w1-infinite")]
    W1Infinite { oracle: OracleVerdict },
    /// Onto `Z_g ∗ Z_g` with `g = gcd(α, β)` through two non-adjacent vertices.
    FreeProductSurjection { surjection: Surjection },
    /// Onto `Z_{δ_a} ∗ Z_{|β|}` or `Z_{|α|} ∗ Z_{δ_b}`.
    DeltaObstruction {
        letter: char,
        #[serde(with = "bigstr")]
        delta: BigInt,
        surjection: Surjection,
    },
    /// Two sources, two sinks, or a non-adjacent source and sink.
    ShapeExclusion { census: DegreeCensus, reason: String, surjection: Surjection },
    /// `x_v -> weight_v` kills every relator and is nonzero.
    ZeroOrder { reason: String, weights: Vec<Weight> },
    /// At least two weak components, each balanced with girth at least four.
    DisconnectedFreeProduct { components: Vec<Vec<String>> },
    /// A weak component with more generators than relators.
    Deficiency { component: Vec<String>, vertices: usize, arcs: usize },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::W1Infinite { .. } => "w1-infinite",
            Certificate::FreeProductSurjection { .. } => "free-product-surjection",
            Certificate::DeltaObstruction { .. } => "delta-obstruction",
            Certificate::ShapeExclusion { .. } => "shape-exclusion",
            Certificate::ZeroOrder { .. } => "zero-order",
            Certificate::DisconnectedFreeProduct { .. } => "disconnected-free-product",
            Certificate::Deficiency { .. } => "deficiency",
        }
    }
}

/// What the verdict would be if the oracle had answered Yes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothetical {
    pub status: Status,
    pub case: Option<Case>,
    #[serde(with = "bigstr::opt")]
    pub order: Option<BigInt>,
    #[serde(with = "bigstr::opt")]
    pub ab_order: Option<BigInt>,
    pub power_word: Option<String>,
    pub requires: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub case: Option<Case>,
    #[serde(with = "bigstr::opt")]
    pub order: Option<BigInt>,
    #[serde(with = "bigstr::opt")]
    pub ab_order: Option<BigInt>,
    /// The power of `a` or `b` adjoined to `K` in the conditional cases.
    pub power_word: Option<String>,
    pub rank_bound: Vec<u8>,
    pub reason: Option<String>,
    pub shape: Option<ShapeReport>,
    pub oracle: Option<OracleVerdict>,
    pub k_probe: Option<KProbeResult>,
    pub certificates: Vec<Certificate>,
    pub pruned: Option<PruneReport>,
    pub hypothetical: Option<Hypothetical>,
}

impl Verdict {
    fn new(status: Status) -> Self {
        Verdict {
            status,
            case: None,
            order: None,
            ab_order: None,
            power_word: None,
            rank_bound: Vec::new(),
            reason: None,
            shape: None,
            oracle: None,
            k_probe: None,
            certificates: Vec::new(),
            pruned: None,
            hypothetical: None,
        }
    }

    fn out_of_scope(reason: impl Into<String>) -> Self {
        Verdict { reason: Some(reason.into()), ..Verdict::new(Status::OutOfScope) }
    }

    fn unknown(reason: impl Into<String>) -> Self {
        Verdict { reason: Some(reason.into()), ..Verdict::new(Status::Unknown) }
    }

    fn infinite(certificate: Certificate, reason: impl Into<String>) -> Self {
        Verdict {
            reason: Some(reason.into()),
            certificates: vec![certificate],
            ..Verdict::new(Status::Infinite)
        }
    }

    fn set_infinite(&mut self, certificate: Certificate, reason: impl Into<String>) {
        self.status = Status::Infinite;
        self.reason = Some(reason.into());
        self.certificates.push(certificate);
    }

    fn set_finite(&mut self, case: Case, order: BigInt) {
        self.case = Some(case);
        if order < BigInt::from(2) {
            // the group is nontrivial, so a formula giving 0 or 1 here is a bug
            self.status = Status::Unknown;
            self.reason = Some(format!("order formula for case {case} gave {order}"));
            return;
        }
        self.status = Status::FiniteCyclic;
        self.order = Some(order);
        self.rank_bound = vec![1];
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub oracle: OracleConfig,
    /// Largest finite order that [`cross_verify`] confirms by coset enumeration.
    pub verify_cap: u64,
    pub max_cosets: usize,
    pub parallel: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            oracle: OracleConfig::default(),
            verify_cap: 10_000,
            max_cosets: DEFAULT_MAX_COSETS,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl ClassifierConfig {
    pub fn with_oracle(oracle: OracleConfig) -> Self {
        ClassifierConfig { oracle, ..ClassifierConfig::default() }
    }
}

fn pow(x: &BigInt, e: usize) -> Result<BigInt, ClassifierError> {
    let e = u32::try_from(e).map_err(|_| ClassifierError::Range(format!("exponent {e}")))?;
    Ok(x.pow(e))
}

/// `|α^n - β^n|`-style order of the group for `case`; for 1d/1e/1f the order
/// of its abelianization.
pub fn order_formula(
    case: Case,
    alpha: &BigInt,
    beta: &BigInt,
    n: usize,
    d: Option<usize>,
    m: Option<usize>,
    l: Option<usize>,
) -> Result<BigInt, ClassifierError> {
    let need = |v: Option<usize>, name| v.ok_or(ClassifierError::MissingParameter { case, name });
    if n < 2 {
        return Err(ClassifierError::Range(format!("cycle length {n}")));
    }
    let cyclic = || -> Result<BigInt, ClassifierError> { Ok(pow(alpha, n)? - pow(beta, n)?) };
    let two_path = || -> Result<BigInt, ClassifierError> {
        let d = need(d, "d")?;
        if d == 0 || d >= n {
            return Err(ClassifierError::Range(format!("d = {d} with n = {n}")));
        }
        let ab = alpha * beta;
        Ok(pow(&ab, n - d)? - pow(&ab, d)?)
    };
    let value = match case {
        Case::C1a | Case::C2a | Case::C3a => cyclic()?,
        Case::C1b | Case::C2b => pow(beta, need(m, "m")?)? * cyclic()?,
        Case::C1c | Case::C3b => pow(alpha, need(m, "m")?)? * cyclic()?,
        Case::C2c | Case::C3c => two_path()?,
        Case::C2d => pow(beta, need(m, "m")?)? * two_path()?,
        Case::C3d => pow(alpha, need(m, "m")?)? * two_path()?,
        Case::C2e => pow(beta, need(l, "l")?)? * cyclic()?,
        Case::C3e => pow(alpha, need(l, "l")?)? * cyclic()?,
        Case::C4 => BigInt::from(2),
        Case::C1d => alpha * beta * (pow(alpha, n - 2)? - pow(beta, n - 2)?),
        Case::C1e => alpha * pow(beta, need(m, "m")?)? * cyclic()?,
        Case::C1f => pow(alpha, need(m, "m")?)? * beta * cyclic()?,
    };
    Ok(value.abs())
}

/// The generator and exponent adjoined to `K` in cases 1d/1e/1f.
fn power_word(case: Case, alpha: &BigInt, beta: &BigInt, n: usize, m: usize) -> Result<(char, BigInt), ClassifierError> {
    let cyclic = pow(alpha, n)? - pow(beta, n)?;
    Ok(match case {
        Case::C1d => ('a', alpha * (pow(alpha, n - 2)? - pow(beta, n - 2)?)),
        Case::C1e => ('b', pow(beta, m)? * cyclic),
        Case::C1f => ('a', pow(alpha, m)? * cyclic),
        _ => return Err(ClassifierError::Range(format!("case {case} has no power word"))),
    })
}

/// Decides the group of `(g, relator)`; never fails, hypothesis failures
/// become OutOfScope.
pub fn classify(g: &Digraph, relator: &Word, config: &ClassifierConfig) -> Verdict {
    if g.vertex_count() == 0 {
        return Verdict::out_of_scope("empty digraph");
    }
    if g.vertex_count() == 1 {
        return Verdict::out_of_scope("single-vertex digraph");
    }
    let r = cyclic_reduce(relator);
    let prof = match exponent_profile(&r) {
        Ok(p) => p,
        Err(e) => return Verdict::out_of_scope(e.to_string()),
    };
    let analysis = analyze(g);
    if let Some(c) = analysis.components.iter().find(|c| c.vertices.len() > c.arcs) {
        let component = c.vertices.iter().map(|&v| g.label(v).to_string()).collect();
        let cert = Certificate::Deficiency { component, vertices: c.vertices.len(), arcs: c.arcs };
        return Verdict::infinite(cert, "a component has more vertices than arcs");
    }
    if !analysis.balanced {
        return Verdict::out_of_scope("more arcs than vertices");
    }
    if analysis.components.len() >= 2 {
        if analysis.components.iter().all(|c| c.girth.is_some_and(|x| x >= 4)) {
            let components = analysis
                .components
                .iter()
                .map(|c| c.vertices.iter().map(|&v| g.label(v).to_string()).collect())
                .collect();
            let cert = Certificate::DisconnectedFreeProduct { components };
            return Verdict::infinite(cert, "free product of nontrivial groups");
        }
        return Verdict::out_of_scope("disconnected with a component of girth < 4");
    }
    match analysis.girth {
        Some(x) if x >= 4 => {}
        Some(x) => return Verdict::out_of_scope(format!("girth {x}")),
        None => return Verdict::out_of_scope("no cycle"),
    }
    let oracle = match oracle_k::check_power_equality(&r, &config.oracle) {
        Ok(o) => o,
        Err(e) => return Verdict::out_of_scope(e.to_string()),
    };
    if oracle.answer == Answer::No {
        let mut v = Verdict::infinite(
            Certificate::W1Infinite { oracle: oracle.clone() },
            "a^alpha != b^beta in K",
        );
        v.oracle = Some(oracle);
        return v;
    }
    let mut v = decide(g, &r, &prof, &oracle, config);
    v.oracle = Some(oracle.clone());
    if oracle.answer == Answer::Unknown {
        if v.status == Status::Infinite {
            v.reason = v.reason.map(|s| format!("{s}; certified without the inconclusive oracle"));
        } else {
            v = hypothetical(v);
        }
    }
    v
}

fn hypothetical(v: Verdict) -> Verdict {
    let h = Hypothetical {
        status: v.status,
        case: v.case,
        order: v.order.clone(),
        ab_order: v.ab_order.clone(),
        power_word: v.power_word.clone(),
        requires: "a^alpha = b^beta in K".to_string(),
    };
    Verdict {
        status: Status::Unknown,
        case: None,
        order: None,
        ab_order: None,
        power_word: None,
        rank_bound: Vec::new(),
        reason: Some("oracle inconclusive within its bounds".to_string()),
        hypothetical: Some(h),
        ..v
    }
}

/// Classifies many inputs, in parallel when `config.parallel` is set.
pub fn classify_batch(inputs: &[(Digraph, Word)], config: &ClassifierConfig) -> Vec<Verdict> {
    par::map(inputs, config.parallel, |(g, r)| classify(g, r, config))
}

/// Steps after the oracle: gcd, then the case split on `|α|` and `|β|`.
fn decide(g: &Digraph, r: &Word, prof: &ExponentProfile, oracle: &OracleVerdict, config: &ClassifierConfig) -> Verdict {
    let common = prof.alpha.gcd(&prof.beta);
    if !common.is_one() {
        let Some((u, v)) = non_adjacent_pair(g) else {
            return Verdict::unknown("no non-adjacent vertex pair for the gcd surjection");
        };
        let surjection = surjection(g, [u, v], common.clone(), common.clone());
        return Verdict::infinite(
            Certificate::FreeProductSurjection { surjection },
            format!("gcd(alpha, beta) = {common}"),
        );
    }
    match (prof.alpha.abs().is_one(), prof.beta.abs().is_one()) {
        (false, false) => case_one(g, r, prof, oracle, config),
        (true, false) => case_two(g, prof),
        (false, true) => case_three(g, r),
        (true, true) => case_four(g, prof),
    }
}

fn non_adjacent_pair(g: &Digraph) -> Option<(usize, usize)> {
    let n = g.vertex_count();
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .find(|&(u, v)| !g.has_arc(u, v) && !g.has_arc(v, u))
}

fn surjection(g: &Digraph, kept: [usize; 2], p: BigInt, q: BigInt) -> Surjection {
    let killed = (0..g.vertex_count()).filter(|v| !kept.contains(v)).map(|v| g.label(v).to_string()).collect();
    Surjection { p, q, kept: kept.map(|v| g.label(v).to_string()), killed }
}

fn case_one(g: &Digraph, r: &Word, prof: &ExponentProfile, oracle: &OracleVerdict, config: &ClassifierConfig) -> Verdict {
    let (abs_a, abs_b) = (prof.alpha.abs(), prof.beta.abs());
    let (srcs, snks) = (sources(g), sinks(g));
    let exclusion = if srcs.len() >= 2 {
        Some(([srcs[0], srcs[1]], abs_a.clone(), abs_a.clone(), "two sources"))
    } else if snks.len() >= 2 {
        Some(([snks[0], snks[1]], abs_b.clone(), abs_b.clone(), "two sinks"))
    } else {
        srcs.iter()
            .flat_map(|&s| snks.iter().map(move |&t| (s, t)))
            .find(|&(s, t)| !g.has_arc(s, t))
            .map(|(s, t)| ([s, t], abs_a.clone(), abs_b.clone(), "a non-adjacent source and sink"))
    };
    if let Some((kept, p, q, reason)) = exclusion {
        let surjection = surjection(g, kept, p, q);
        let cert = Certificate::ShapeExclusion { census: census(g), reason: reason.to_string(), surjection };
        return Verdict::infinite(cert, format!("shape excluded: {reason}"));
    }
    let sm = match recognize_shape(g) {
        Ok(m) => m,
        Err(e) => return Verdict::unknown(e.to_string()),
    };
    let mut v = Verdict::new(Status::Unknown);
    v.shape = Some(sm.clone().into());
    let case = match sm.shape {
        Some(Shape::Cycle { .. }) => Case::C1a,
        Some(Shape::Out { .. }) => Case::C1b,
        Some(Shape::In { .. }) => Case::C1c,
        Some(Shape::TwoPath { d: 1, .. }) => Case::C1d,
        Some(Shape::OutIn { l: 1, .. }) => Case::C1e,
        Some(Shape::InOut { l: 1, .. }) => Case::C1f,
        _ => {
            v.reason = Some("shape outside the list but no obstruction found".to_string());
            return v;
        }
    };
    let shape = sm.shape.expect("matched above");
    let (n, d, m, l) = shape.params();
    let order = match order_formula(case, &prof.alpha, &prof.beta, n, d, m, l) {
        Ok(x) => x,
        Err(e) => {
            v.reason = Some(e.to_string());
            return v;
        }
    };
    if !case.is_conditional() {
        v.set_finite(case, order);
        return v;
    }
    v.case = Some(case);
    let delta = if !prof.delta_a.is_one() {
        Some(('a', prof.delta_a.clone()))
    } else if !prof.delta_b.is_one() {
        Some(('b', prof.delta_b.clone()))
    } else {
        None
    };
    if let Some((letter, delta)) = delta {
        let m = m.unwrap_or(0);
        // template vertices: the source-like end first, the sink-like end second
        let (first, second) = match case {
            Case::C1d => (n, n - 1),
            Case::C1e => (n + m + 1, n + m),
            _ => (n + m, n + m + 1),
        };
        let kept = [first, second].map(|t| g.vertex(sm.vertex(t)).expect("witness is a vertex"));
        let (p, q) = if letter == 'a' { (delta.clone(), abs_b) } else { (abs_a, delta.clone()) };
        let surjection = surjection(g, kept, p, q);
        v.set_infinite(
            Certificate::DeltaObstruction { letter, delta: delta.clone(), surjection },
            format!("delta_{letter} = {delta}"),
        );
        return v;
    }
    let (letter, exponent) = power_word(case, &prof.alpha, &prof.beta, n, m.unwrap_or(0)).expect("conditional case");
    v.power_word = Some(format!("{letter}^{exponent}"));
    v.ab_order = Some(order.clone());
    v.k_probe = match (&oracle.answer, &oracle.evidence) {
        (_, Evidence::CyclicK(c)) => Some(KProbeResult::InfiniteCyclic(c.clone())),
        (Answer::Yes, _) => {
            let canonical = oracle_k::canonical_relator(r).map(|(w, _)| w).unwrap_or_else(|_| r.clone());
            Some(oracle_k::probe_k_structure(&canonical, &config.oracle))
        }
        _ => None,
    };
    if matches!(v.k_probe, Some(KProbeResult::InfiniteCyclic(_))) {
        v.set_finite(case, order);
        v.reason = Some("K is infinite cyclic".to_string());
    } else {
        v.status = Status::ConditionalKQuotient;
        v.rank_bound = vec![1, 2];
        v.reason = Some("finiteness depends on K".to_string());
    }
    v
}

fn case_two(g: &Digraph, prof: &ExponentProfile) -> Verdict {
    let pruned = prune(g, PruneKind::Source);
    let mut v = Verdict::new(Status::Unknown);
    v.pruned = Some(PruneReport::new(PruneKind::Source, &pruned));
    let core = &pruned.result;
    let sm = match recognize_shape(core) {
        Ok(m) => m,
        Err(e) => {
            v.reason = Some(e.to_string());
            return v;
        }
    };
    v.shape = Some(sm.clone().into());
    let case = match sm.shape {
        Some(Shape::Cycle { .. }) => Case::C2a,
        Some(Shape::Out { .. }) => Case::C2b,
        Some(Shape::TwoPath { .. }) => Case::C2c,
        Some(Shape::TwoPathOut { .. }) => Case::C2d,
        Some(Shape::InOut { .. }) => Case::C2e,
        _ => {
            let core_sinks = sinks(core);
            if core_sinks.len() < 2 {
                v.reason = Some("shape outside the list but fewer than two sinks".to_string());
                return v;
            }
            // sinks survive source pruning, so they are sinks of the input
            let kept = [core_sinks[0], core_sinks[1]].map(|t| g.vertex(core.label(t)).expect("pruned subgraph"));
            let b = prof.beta.abs();
            let surjection = surjection(g, kept, b.clone(), b);
            let cert = Certificate::ShapeExclusion {
                census: census(core),
                reason: "two sinks after pruning source leaves".to_string(),
                surjection,
            };
            v.set_infinite(cert, "shape excluded: two sinks");
            return v;
        }
    };
    let (n, d, m, l) = sm.shape.expect("matched above").params();
    let order = match order_formula(case, &prof.alpha, &prof.beta, n, d, m, l) {
        Ok(x) => x,
        Err(e) => {
            v.reason = Some(e.to_string());
            return v;
        }
    };
    if order.is_zero() {
        v.case = Some(case);
        match zero_weights(g, &prof.alpha, &prof.beta) {
            Some(weights) => v.set_infinite(
                Certificate::ZeroOrder { reason: format!("d = n/2 = {}", n / 2), weights },
                "abelianization has a free part",
            ),
            None => v.reason = Some("zero order without a consistent weighting".to_string()),
        }
        return v;
    }
    v.set_finite(case, order);
    v
}

/// `|β| = 1`: classify the reflection, then report shape and pruning on the
/// input itself, where they come from pruning sink leaves.
fn case_three(g: &Digraph, r: &Word) -> Verdict {
    let mirror = reflect_digraph(g);
    let Ok(prof) = exponent_profile(&reflect_word(r)) else {
        return Verdict::unknown("reflection lost a letter");
    };
    let mut v = case_two(&mirror, &prof);
    v.case = v.case.map(Case::reflect);
    let pruned = prune(g, PruneKind::Sink);
    v.pruned = Some(PruneReport::new(PruneKind::Sink, &pruned));
    v.shape = recognize_shape(&pruned.result).ok().map(ShapeReport::from);
    if let Some(Certificate::ShapeExclusion { reason, census: c, .. }) = v.certificates.last_mut() {
        *reason = "two sources after pruning sink leaves".to_string();
        *c = census(&pruned.result);
    }
    v
}

fn case_four(g: &Digraph, prof: &ExponentProfile) -> Verdict {
    let pruned = prune(g, PruneKind::Both);
    let mut v = Verdict::new(Status::Unknown);
    v.pruned = Some(PruneReport::new(PruneKind::Both, &pruned));
    v.shape = recognize_shape(&pruned.result).ok().map(ShapeReport::from);
    let n = pruned.result.vertex_count();
    v.case = Some(Case::C4);
    let product = &prof.alpha * &prof.beta;
    if product.is_one() || n % 2 == 0 {
        let reason = if product.is_one() { "alpha * beta = 1" } else { "alpha * beta = -1 on an even cycle" };
        match zero_weights(g, &prof.alpha, &prof.beta) {
            Some(weights) => {
                v.set_infinite(Certificate::ZeroOrder { reason: reason.to_string(), weights }, reason)
            }
            None => v.reason = Some("no consistent weighting".to_string()),
        }
        return v;
    }
    v.set_finite(Case::C4, BigInt::from(2));
    v
}

/// Integer weights with `α e_u = β e_v` on every arc `(u, v)`, primitive and
/// not all zero, or `None` if the cycle conditions fail.
fn zero_weights(g: &Digraph, alpha: &BigInt, beta: &BigInt) -> Option<Vec<Weight>> {
    if alpha.is_zero() || beta.is_zero() {
        return None;
    }
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
    for (u, v) in g.arcs() {
        // e_v = (α / β) e_u
        let ratio = BigRational::new(alpha.clone(), beta.clone());
        adj[v].push((u, ratio.recip()));
        adj[u].push((v, ratio));
    }
    let mut value: Vec<Option<BigRational>> = vec![None; n];
    for root in 0..n {
        if value[root].is_some() {
            continue;
        }
        value[root] = Some(BigRational::one());
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let vx = value[x].clone().expect("queued vertices are assigned");
            for (y, ratio) in &adj[x] {
                let want = &vx * ratio;
                match &value[*y] {
                    Some(vy) if *vy != want => return None,
                    Some(_) => {}
                    None => {
                        value[*y] = Some(want);
                        queue.push_back(*y);
                    }
                }
            }
        }
    }
    let values: Vec<BigRational> = value.into_iter().map(|x| x.expect("every vertex reached")).collect();
    let denominators = values.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = values.iter().map(|x| (x * &denominators).to_integer()).collect();
    let common = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Some(
        scaled
            .into_iter()
            .enumerate()
            .map(|(v, w)| Weight { vertex: g.label(v).to_string(), weight: w / &common })
            .collect(),
    )
}

/// Re-checks `cert` for `(g, relator)` without trusting the classifier.
pub fn verify_certificate(g: &Digraph, relator: &Word, cert: &Certificate) -> bool {
    let r = cyclic_reduce(relator);
    let Ok(prof) = exponent_profile(&r) else { return false };
    match cert {
        Certificate::W1Infinite { oracle } => {
            oracle.answer == Answer::No && oracle_k::verify_evidence(&r, oracle)
        }
        Certificate::FreeProductSurjection { surjection } => verify_surjection(g, &r, surjection),
        Certificate::DeltaObstruction { letter, delta, surjection } => {
            let actual = match letter {
                'a' => &prof.delta_a,
                'b' => &prof.delta_b,
                _ => return false,
            };
            actual == delta
                && (surjection.p == *delta || surjection.q == *delta)
                && verify_surjection(g, &r, surjection)
        }
        Certificate::ShapeExclusion { surjection, .. } => verify_surjection(g, &r, surjection),
        Certificate::ZeroOrder { weights, .. } => verify_weights(g, &prof, weights),
        Certificate::DisconnectedFreeProduct { components } => verify_components(g, components),
        Certificate::Deficiency { component, vertices, arcs } => {
            let Some(set) = closed_component(g, component) else { return false };
            let inside = g.arcs().filter(|(u, _)| set.contains(u)).count();
            set.len() == *vertices && inside == *arcs && vertices > arcs
        }
    }
}

/// Vertex set of `labels` if it is a union of weak components of `g`.
fn closed_component(g: &Digraph, labels: &[String]) -> Option<BTreeSet<usize>> {
    let set: BTreeSet<usize> = labels.iter().map(|l| g.vertex(l)).collect::<Option<_>>()?;
    if set.len() != labels.len() || set.is_empty() {
        return None;
    }
    g.arcs().all(|(u, v)| set.contains(&u) == set.contains(&v)).then_some(set)
}

fn verify_components(g: &Digraph, components: &[Vec<String>]) -> bool {
    if components.len() < 2 {
        return false;
    }
    let mut seen = BTreeSet::new();
    for labels in components {
        let Some(set) = closed_component(g, labels) else { return false };
        if !set.iter().all(|&v| seen.insert(v)) {
            return false;
        }
        let part = analyze(&g.induced(&set));
        if part.components.len() != 1 || !part.balanced || !part.girth.is_some_and(|x| x >= 4) {
            return false;
        }
    }
    seen.len() == g.vertex_count()
}

fn verify_weights(g: &Digraph, prof: &ExponentProfile, weights: &[Weight]) -> bool {
    if weights.len() != g.vertex_count() || weights.iter().all(|w| w.weight.is_zero()) {
        return false;
    }
    let mut e = vec![None; g.vertex_count()];
    for w in weights {
        match g.vertex(&w.vertex) {
            Some(v) if e[v].is_none() => e[v] = Some(w.weight.clone()),
            _ => return false,
        }
    }
    let e: Vec<BigInt> = e.into_iter().map(|x| x.expect("all assigned")).collect();
    // R(x_u, x_v) has exponent sums α on x_u and -β on x_v
    g.arcs().all(|(u, v)| (&prof.alpha * &e[u] - &prof.beta * &e[v]).is_zero())
}

fn verify_surjection(g: &Digraph, r: &Word, s: &Surjection) -> bool {
    let two = BigInt::from(2);
    if s.p < two || s.q < two || s.kept[0] == s.kept[1] {
        return false;
    }
    let (Some(x), Some(y)) = (g.vertex(&s.kept[0]), g.vertex(&s.kept[1])) else { return false };
    let killed: Option<BTreeSet<u32>> = s.killed.iter().map(|l| g.vertex(l).map(|v| v as u32)).collect();
    let Some(killed) = killed else { return false };
    if killed.len() != s.killed.len()
        || killed.len() + 2 != g.vertex_count()
        || killed.contains(&(x as u32))
        || killed.contains(&(y as u32))
    {
        return false;
    }
    let Ok(pres) = instantiate(g, r) else { return false };
    let quotient = kill_generators(&pres, &killed);
    let moduli = [(x as u32, &s.p), (y as u32, &s.q)];
    quotient.relators().iter().all(|w| trivial_in_free_product(w, &moduli))
}

/// Whether `w` is trivial in `Z_p ∗ Z_q` generated by the two listed ids.
/// The stack holds the reduced alternating form of the prefix read so far.
fn trivial_in_free_product(w: &Word, moduli: &[(u32, &BigInt); 2]) -> bool {
    let mut stack: Vec<(u32, BigInt)> = Vec::new();
    for s in w.syllables() {
        let Some(&(_, modulus)) = moduli.iter().find(|&&(g, _)| g == s.gen) else { return false };
        let carried = match stack.last() {
            Some((g, e)) if *g == s.gen => {
                let e = e.clone();
                stack.pop();
                e
            }
            _ => BigInt::zero(),
        };
        let e = (carried + &s.exp).mod_floor(modulus);
        if !e.is_zero() {
            stack.push((s.gen, e));
        }
    }
    stack.is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CrossReport {
    pub checks: Vec<Check>,
}

impl CrossReport {
    /// True when every check ran and passed; an empty report passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }
}

/// Confirms `v` by routes independent of the order formulas: coset
/// enumeration, Smith normal form, Tietze simplification, certificate and
/// oracle re-checks.
pub fn cross_verify(g: &Digraph, relator: &Word, v: &Verdict, config: &ClassifierConfig) -> CrossReport {
    let mut report = CrossReport::default();
    let r = cyclic_reduce(relator);
    let pres = instantiate(g, &r).ok();
    let joined = |xs: &[BigInt]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match (v.status, &v.order, &pres) {
        (Status::FiniteCyclic, Some(order), Some(p)) => {
            let invariants = abelian_invariants(p);
            report.push(
                "abelian-invariants",
                invariants.len() == 1 && invariants[0] == *order,
                format!("({})", joined(&invariants)),
            );
            if *order <= BigInt::from(config.verify_cap) {
                match enumerate_cosets(p, config.max_cosets) {
                    Ok(res) => match res.order() {
                        Some(found) => report.push("coset-enumeration", found == order, format!("{found} cosets")),
                        None => report.push("coset-enumeration", false, "coset limit exceeded"),
                    },
                    Err(e) => report.push("coset-enumeration", false, e.to_string()),
                }
            }
            if let Ok(s) = simplify_to_cyclic(g, &r) {
                if let SimplifyOutcome::Cyclic { order: found, .. } = &s.outcome {
                    report.push("simplification", found.abs() == *order, format!("cyclic of order {}", found.abs()));
                }
            }
        }
        (Status::FiniteCyclic, None, _) => report.push("order", false, "finite verdict without an order"),
        _ => {}
    }
    if v.status == Status::ConditionalKQuotient {
        if let (Some(ab), Some(p)) = (&v.ab_order, &pres) {
            let found = abelian_order(p);
            report.push(
                "ab-order",
                found.as_ref() == Some(ab),
                found.map_or("infinite".to_string(), |x| x.to_string()),
            );
        }
        if let (Some(word), Ok(s)) = (&v.power_word, simplify_to_cyclic(g, &r)) {
            if let SimplifyOutcome::KQuotient { power_on, exponent, .. } = &s.outcome {
                let letter = if *power_on == Side::A { 'a' } else { 'b' };
                let expected = format!("{letter}^{exponent}");
                report.push("power-word", *word == expected, expected);
            }
        }
    }
    if v.status == Status::Infinite && v.certificates.is_empty() {
        report.push("certificate", false, "infinite verdict without a certificate");
    }
    for cert in &v.certificates {
        report.push(cert.kind(), verify_certificate(g, &r, cert), "re-verified from the input");
    }
    if let Some(o) = &v.oracle {
        if o.answer != Answer::Unknown {
            report.push("oracle-evidence", oracle_k::verify_evidence(&r, o), format!("{:?}", o.answer));
        }
    }
    if let Some(KProbeResult::InfiniteCyclic(c)) = &v.k_probe {
        let ok = oracle_k::canonical_relator(&r).is_ok_and(|(w, _)| oracle_k::verify_cyclic(&w, c));
        report.push("k-probe", ok, "K infinite cyclic");
    }
    if let Some(s) = &v.shape {
        if s.shape.is_some() {
            let target = match &v.pruned {
                Some(p) => crate::digraph::prune(g, p.kind).result,
                None => g.clone(),
            };
            report.push("shape-witness", s.to_match().verify(&target), "template isomorphism");
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{build_template, parse_template, parse_template_union};
    use crate::freewords::parse_word;

    fn input(template: &str, word: &str) -> (Digraph, Word) {
        (build_template(&parse_template(template).unwrap()).unwrap(), parse_word(word).unwrap())
    }

    fn run(template: &str, word: &str) -> Verdict {
        let (g, r) = input(template, word);
        classify(&g, &r, &ClassifierConfig::default())
    }

    fn verified(template: &str, word: &str) -> Verdict {
        let (g, r) = input(template, word);
        let config = ClassifierConfig::default();
        let v = classify(&g, &r, &config);
        let report = cross_verify(&g, &r, &v, &config);
        assert!(report.passed(), "{template} {word}: {report:?}");
        v
    }

    #[test]
    fn higman_is_infinite_by_oracle() {
        let v = verified("L(4)", "a^-1 b a b^-2");
        assert_eq!(v.status, Status::Infinite);
        assert_eq!(v.certificates[0].kind(), "w1-infinite");
    }

    #[test]
    fn cycle_with_unit_alpha() {
        let v = verified("L(4)", "a b^-2");
        assert_eq!((v.status, v.case), (Status::FiniteCyclic, Some(Case::C2a)));
        assert_eq!(v.order, Some(15.into()));
        assert_eq!(v.rank_bound, vec![1]);
    }

    #[test]
    fn conditional_case_upgraded_by_probe() {
        let v = verified("L(4,1)", "(ab)^2 b");
        assert_eq!((v.status, v.case), (Status::FiniteCyclic, Some(Case::C1d)));
        assert_eq!(v.order, Some(30.into()));
        assert_eq!(v.ab_order, Some(30.into()));
        assert_eq!(v.power_word.as_deref(), Some("a^-10"));
        assert!(matches!(v.k_probe, Some(KProbeResult::InfiniteCyclic(_))));
    }

    #[test]
    fn girth_three_is_out_of_scope() {
        let v = run("L(3)", "a^-1 b a b^-3");
        assert_eq!(v.status, Status::OutOfScope);
        assert_eq!(v.reason.as_deref(), Some("girth 3"));
    }

    #[test]
    fn balanced_two_path_is_infinite() {
        let v = verified("L(4,2)", "a b^-2");
        assert_eq!((v.status, v.case), (Status::Infinite, Some(Case::C2c)));
        assert_eq!(v.certificates[0].kind(), "zero-order");
    }

    #[test]
    fn delta_obstruction() {
        let v = verified("L(4,1)", "a^2 b^-3");
        assert_eq!(v.status, Status::Infinite);
        let Certificate::DeltaObstruction { letter, delta, surjection } = &v.certificates[0] else {
            panic!("{v:?}")
        };
        assert_eq!((*letter, delta.clone()), ('a', 2.into()));
        assert_eq!((surjection.p.clone(), surjection.q.clone()), (2.into(), 3.into()));
    }

    #[test]
    fn disconnected_and_deficient() {
        let g = parse_template_union("L(4) + L(4)").unwrap();
        let r = parse_word("a b^-2").unwrap();
        let config = ClassifierConfig::default();
        let v = classify(&g, &r, &config);
        assert_eq!(v.status, Status::Infinite);
        assert!(cross_verify(&g, &r, &v, &config).passed());
        let mut g = build_template(&Shape::Cycle { n: 4 }).unwrap();
        g.add_vertex("lonely");
        let v = classify(&g, &r, &config);
        assert_eq!(v.certificates[0].kind(), "deficiency");
        assert!(cross_verify(&g, &r, &v, &config).passed());
    }

    #[test]
    fn order_formula_examples() {
        let f = |case, a: i64, b: i64, n, d| order_formula(case, &a.into(), &b.into(), n, d, None, None).unwrap();
        assert_eq!(f(Case::C1a, 2, 3, 4, None), 65.into());
        assert_eq!(f(Case::C2c, 1, 2, 5, Some(2)), 4.into());
        assert_eq!(f(Case::C4, 1, -1, 5, None), 2.into());
        assert!(order_formula(Case::C1b, &2.into(), &3.into(), 4, None, None, None).is_err());
    }

    #[test]
    fn tampered_order_fails() {
        let (g, r) = input("L(4)", "a b^-2");
        let config = ClassifierConfig::default();
        let mut v = classify(&g, &r, &config);
        v.order = Some(16.into());
        let report = cross_verify(&g, &r, &v, &config);
        assert!(!report.passed());
    }

    #[test]
    fn tampered_certificate_fails() {
        let (g, r) = input("L(4,1)", "a^2 b^-3");
        let v = classify(&g, &r, &ClassifierConfig::default());
        let Certificate::DeltaObstruction { letter, delta, mut surjection } = v.certificates[0].clone() else {
            panic!()
        };
        surjection.q = 2.into();
        assert!(!verify_certificate(&g, &r, &Certificate::DeltaObstruction { letter, delta, surjection }));
    }

    #[test]
    fn free_product_normal_form() {
        let (x, y) = (BigInt::from(2), BigInt::from(3));
        let m = [(0u32, &x), (1u32, &y)];
        assert!(trivial_in_free_product(&parse_word("a^2 b^3 a^4").unwrap(), &m));
        assert!(trivial_in_free_product(&parse_word("a b^3 a").unwrap(), &m));
        assert!(!trivial_in_free_product(&parse_word("a b a^-1 b^-1").unwrap(), &m));
        assert!(!trivial_in_free_product(&parse_word("a b^3").unwrap(), &m));
    }

    #[test]
    fn json_round_trip() {
        for (t, w) in [("L(4)", "a b^-2"), ("L(4,1)", "a^2 b^-3"), ("L(4;in=1)", "a^2 b^-1"), ("L(3)", "ab")] {
            let v = run(t, w);
            let text = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<Verdict>(&text).unwrap(), v, "{text}");
        }
    }
}
