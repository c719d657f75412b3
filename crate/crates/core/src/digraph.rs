//! Finite simple digraphs, structural analysis, leaf pruning and recognition
//! of the unicyclic template classes `L(...)`.
//!
//! Template labelling (all vertices are `1..=N`):
//! - `L(n)`: arcs `i -> i+1` and `n -> 1`.
//! - `L(n,d)`: source `n`, sink `n-d`; long path `n -> 1 -> 2 -> .. -> n-d`,
//!   short path `n -> n-1 -> .. -> n-d` of `d` arcs.
//! - tails are numbered `n+1, n+2, ..` walking away from the cycle and hang
//!   from vertex `n` (or from the sink `n-d` for `L(n,d;out m)`).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: loop at vertex {vertex}")]
    Loop { line: usize, vertex: String },
    #[error("line {line}: duplicate arc {from} -> {to}")]
    DuplicateArc { line: usize, from: String, to: String },
    #[error("bad template: {0}")]
    Template(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Digraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    arcs: BTreeSet<(usize, usize)>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `label`, declaring it if new.
    pub fn add_vertex(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    pub fn add_arc(&mut self, from: &str, to: &str) -> Result<(), DigraphError> {
        if from == to {
            return Err(DigraphError::Loop { line: 0, vertex: from.to_string() });
        }
        let u = self.add_vertex(from);
        let v = self.add_vertex(to);
        if !self.arcs.insert((u, v)) {
            return Err(DigraphError::DuplicateArc {
                line: 0,
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        Ok(())
    }

    pub fn from_arcs(arcs: &[(&str, &str)]) -> Result<Self, DigraphError> {
        let mut g = Digraph::new();
        for (u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Arcs as index pairs in sorted order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.arcs.contains(&(u, v))
    }

    pub fn has_arc_labels(&self, u: &str, v: &str) -> bool {
        match (self.vertex(u), self.vertex(v)) {
            (Some(a), Some(b)) => self.has_arc(a, b),
            _ => false,
        }
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.arcs.range((v, 0)..(v + 1, 0)).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.arcs.iter().filter(|&&(_, w)| w == v).count()
    }

    fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut outd = vec![0; self.vertex_count()];
        let mut ind = vec![0; self.vertex_count()];
        for &(u, v) in &self.arcs {
            outd[u] += 1;
            ind[v] += 1;
        }
        (outd, ind)
    }

    /// Undirected neighbour lists; antiparallel arcs give a repeated entry.
    fn undirected(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.arcs {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Subgraph induced on `keep`, labels and relative order preserved.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Digraph {
        let mut g = Digraph::new();
        for &v in keep {
            g.add_vertex(&self.labels[v]);
        }
        for &(u, v) in &self.arcs {
            if keep.contains(&u) && keep.contains(&v) {
                let (a, b) = (g.index[&self.labels[u]], g.index[&self.labels[v]]);
                g.arcs.insert((a, b));
            }
        }
        g
    }

    /// Disjoint union; vertices of `other` are relabelled by `relabel`.
    pub fn disjoint_union(
        &self,
        other: &Digraph,
        relabel: impl Fn(&str) -> String,
    ) -> Result<Digraph, DigraphError> {
        let mut g = self.clone();
        for l in &other.labels {
            let nl = relabel(l);
            if g.index.contains_key(&nl) {
                return Err(DigraphError::Precondition(format!("label clash on {nl}")));
            }
            g.add_vertex(&nl);
        }
        for (u, v) in other.arcs() {
            g.add_arc(&relabel(other.label(u)), &relabel(other.label(v)))?;
        }
        Ok(g)
    }

    /// Edge-list text accepted by [`parse_digraph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let (outd, ind) = self.degrees();
        for v in 0..self.vertex_count() {
            if outd[v] + ind[v] == 0 {
                out.push_str(&format!("vertex {}\n", self.labels[v]));
            }
        }
        for &(u, v) in &self.arcs {
            out.push_str(&format!("{} {}\n", self.labels[u], self.labels[v]));
        }
        out
    }
}

fn is_vertex_token(t: &str) -> bool {
    !t.is_empty() && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_digraph(text: &str) -> Result<Digraph, DigraphError> {
    let mut g = Digraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let bad = |msg: String| DigraphError::Parse { line, msg };
        match toks.as_slice() {
            ["vertex", v] => {
                if !is_vertex_token(v) {
                    return Err(bad(format!("bad vertex token '{v}'")));
                }
                g.add_vertex(v);
            }
            [u, v] => {
                for t in [u, v] {
                    if !is_vertex_token(t) {
                        return Err(bad(format!("bad vertex token '{t}'")));
                    }
                }
                g.add_arc(u, v).map_err(|e| match e {
                    DigraphError::Loop { vertex, .. } => DigraphError::Loop { line, vertex },
                    DigraphError::DuplicateArc { from, to, .. } => {
                        DigraphError::DuplicateArc { line, from, to }
                    }
                    other => other,
                })?;
            }
            _ => return Err(bad(format!("expected 'u v' or 'vertex v', got '{content}'"))),
        }
    }
    Ok(g)
}

/// A template class with its parameters. `l` is the second tail length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum Shape {
    #[serde(rename = "L(n)")]
    Cycle { n: usize },
    #[serde(rename = "L(n,d)")]
    TwoPath { n: usize, d: usize },
    #[serde(rename = "L(n;out m)")]
    Out { n: usize, m: usize },
    #[serde(rename = "L(n;in m)")]
    In { n: usize, m: usize },
    #[serde(rename = "L(n;out m,in l)")]
    OutIn { n: usize, m: usize, l: usize },
    #[serde(rename = "L(n;in m,out l)")]
    InOut { n: usize, m: usize, l: usize },
    #[serde(rename = "L(n,d;out m)")]
    TwoPathOut { n: usize, d: usize, m: usize },
    #[serde(rename = "L(n,d;in m)")]
    TwoPathIn { n: usize, d: usize, m: usize },
}

impl Shape {
    pub fn class_name(&self) -> &'static str {
        match self {
            Shape::Cycle { .. } => "L(n)",
            Shape::TwoPath { .. } => "L(n,d)",
            Shape::Out { .. } => "L(n;out m)",
            Shape::In { .. } => "L(n;in m)",
            Shape::OutIn { .. } => "L(n;out m,in l)",
            Shape::InOut { .. } => "L(n;in m,out l)",
            Shape::TwoPathOut { .. } => "L(n,d;out m)",
            Shape::TwoPathIn { .. } => "L(n,d;in m)",
        }
    }

    /// `(n, d, m, l)` with `None` for parameters the class does not have.
    pub fn params(&self) -> (usize, Option<usize>, Option<usize>, Option<usize>) {
        match *self {
            Shape::Cycle { n } => (n, None, None, None),
            Shape::TwoPath { n, d } => (n, Some(d), None, None),
            Shape::Out { n, m } | Shape::In { n, m } => (n, None, Some(m), None),
            Shape::OutIn { n, m, l } | Shape::InOut { n, m, l } => (n, None, Some(m), Some(l)),
            Shape::TwoPathOut { n, d, m } | Shape::TwoPathIn { n, d, m } => {
                (n, Some(d), Some(m), None)
            }
        }
    }

    pub fn cycle_length(&self) -> usize {
        self.params().0
    }

    pub fn vertex_count(&self) -> usize {
        let (n, _, m, l) = self.params();
        n + m.unwrap_or(0) + l.unwrap_or(0)
    }

    /// Shape of the arc-reversed template.
    pub fn reflect(&self) -> Shape {
        match *self {
            Shape::Cycle { n } => Shape::Cycle { n },
            Shape::TwoPath { n, d } => Shape::TwoPath { n, d },
            Shape::Out { n, m } => Shape::In { n, m },
            Shape::In { n, m } => Shape::Out { n, m },
            Shape::OutIn { n, m, l } => Shape::InOut { n, m, l },
            Shape::InOut { n, m, l } => Shape::OutIn { n, m, l },
            Shape::TwoPathOut { n, d, m } => Shape::TwoPathIn { n, d, m },
            Shape::TwoPathIn { n, d, m } => Shape::TwoPathOut { n, d, m },
        }
    }

    pub fn validate(&self) -> Result<(), DigraphError> {
        let (n, d, m, l) = self.params();
        let err = |s: String| Err(DigraphError::Template(s));
        if n < 3 {
            return err(format!("cycle length {n} < 3"));
        }
        if let Some(d) = d {
            if d < 1 || 2 * d > n {
                return err(format!("d = {d} outside 1..={}", n / 2));
            }
        }
        for (name, v) in [("m", m), ("l", l)] {
            if v == Some(0) {
                return err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    /// Arcs of the canonical instance over labels `1..=vertex_count()`.
    pub fn template_arcs(&self) -> Vec<(usize, usize)> {
        let (n, d, _, _) = self.params();
        let mut arcs = Vec::new();
        match d {
            None => {
                for i in 1..n {
                    arcs.push((i, i + 1));
                }
                arcs.push((n, 1));
            }
            Some(d) => {
                let sink = n - d;
                arcs.push((n, 1));
                for i in 1..sink {
                    arcs.push((i, i + 1));
                }
                for i in (sink + 1..=n).rev() {
                    arcs.push((i, i - 1));
                }
            }
        }
        // `out` walks away from its anchor, `in` walks towards it.
        let mut chain = |anchor: usize, start: usize, len: usize, outward: bool| {
            let mut prev = anchor;
            for k in 0..len {
                let v = start + k;
                arcs.push(if outward { (prev, v) } else { (v, prev) });
                prev = v;
            }
        };
        match *self {
            Shape::Cycle { .. } | Shape::TwoPath { .. } => {}
            Shape::Out { n, m } => chain(n, n + 1, m, true),
            Shape::In { n, m } => chain(n, n + 1, m, false),
            Shape::OutIn { n, m, l } => {
                chain(n, n + 1, m, true);
                chain(n + m, n + m + 1, l, false);
            }
            Shape::InOut { n, m, l } => {
                chain(n, n + 1, m, false);
                chain(n + m, n + m + 1, l, true);
            }
            Shape::TwoPathOut { n, d, m } => chain(n - d, n + 1, m, true),
            Shape::TwoPathIn { n, m, .. } => chain(n, n + 1, m, false),
        }
        arcs.sort_unstable();
        arcs
    }

    /// Descriptor in the CLI mini-language, e.g. `L(4,1;out=2)`.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Cycle { n } => write!(f, "L({n})"),
            Shape::TwoPath { n, d } => write!(f, "L({n},{d})"),
            Shape::Out { n, m } => write!(f, "L({n};out={m})"),
            Shape::In { n, m } => write!(f, "L({n};in={m})"),
            Shape::OutIn { n, m, l } => write!(f, "L({n};out={m},in={l})"),
            Shape::InOut { n, m, l } => write!(f, "L({n};in={m},out={l})"),
            Shape::TwoPathOut { n, d, m } => write!(f, "L({n},{d};out={m})"),
            Shape::TwoPathIn { n, d, m } => write!(f, "L({n},{d};in={m})"),
        }
    }
}

pub fn build_template(shape: &Shape) -> Result<Digraph, DigraphError> {
    shape.validate()?;
    let mut g = Digraph::new();
    for v in 1..=shape.vertex_count() {
        g.add_vertex(&v.to_string());
    }
    for (u, v) in shape.template_arcs() {
        g.add_arc(&u.to_string(), &v.to_string())?;
    }
    Ok(g)
}

/// Parses one descriptor such as `L(4)`, `L(5,2)`, `L(4;in=1,out=2)` or
/// `L(4,1;out 1)`.
pub fn parse_template(text: &str) -> Result<Shape, DigraphError> {
    let bad = |m: &str| DigraphError::Template(format!("{m} in '{}'", text.trim()));
    let t: String = text.chars().filter(|c| !c.is_whitespace() || *c == ' ').collect();
    let t = t.trim();
    let body = t
        .strip_prefix("L(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad("expected L(...)"))?;
    let (head, tail) = match body.split_once(';') {
        Some((h, tl)) => (h, Some(tl)),
        None => (body, None),
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("bad number"));
    let mut hp = head.split(',');
    let n = num(hp.next().ok_or_else(|| bad("missing n"))?)?;
    let d = hp.next().map(num).transpose()?;
    if hp.next().is_some() {
        return Err(bad("too many cycle parameters"));
    }
    let mut tails: Vec<(bool, usize)> = Vec::new();
    if let Some(tl) = tail {
        for part in tl.split(',') {
            let part = part.trim();
            let (kw, rest) = if let Some(r) = part.strip_prefix("out") {
                (true, r)
            } else if let Some(r) = part.strip_prefix("in") {
                (false, r)
            } else {
                return Err(bad("expected 'out' or 'in'"));
            };
            let rest = rest.trim();
            let rest = rest.strip_prefix('=').unwrap_or(rest);
            tails.push((kw, num(rest)?));
        }
    }
    let shape = match (d, tails.as_slice()) {
        (None, []) => Shape::Cycle { n },
        (Some(d), []) => Shape::TwoPath { n, d },
        (None, [(true, m)]) => Shape::Out { n, m: *m },
        (None, [(false, m)]) => Shape::In { n, m: *m },
        (None, [(true, m), (false, l)]) => Shape::OutIn { n, m: *m, l: *l },
        (None, [(false, m), (true, l)]) => Shape::InOut { n, m: *m, l: *l },
        (Some(d), [(true, m)]) => Shape::TwoPathOut { n, d, m: *m },
        (Some(d), [(false, m)]) => Shape::TwoPathIn { n, d, m: *m },
        _ => return Err(bad("unsupported tail combination")),
    };
    shape.validate()?;
    Ok(shape)
}

/// Parses `T1 + T2 + ...`: a disjoint union of templates, later copies
/// renumbered after earlier ones.
pub fn parse_template_union(text: &str) -> Result<Digraph, DigraphError> {
    let mut g = Digraph::new();
    let mut offset = 0usize;
    for part in text.split('+') {
        let shape = parse_template(part)?;
        let h = build_template(&shape)?;
        g = g.disjoint_union(&h, |l| (l.parse::<usize>().unwrap() + offset).to_string())?;
        offset += shape.vertex_count();
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegreeCensus {
    pub sigma: usize,
    pub tau: usize,
    pub sigma1: usize,
    pub tau1: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub arcs: usize,
    pub girth: Option<usize>,
}

impl Component {
    pub fn balanced(&self) -> bool {
        self.vertices.len() == self.arcs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    /// `None` for forests.
    pub girth: Option<usize>,
    pub components: Vec<Component>,
    pub census: DegreeCensus,
    pub balanced: bool,
}

pub fn sources(g: &Digraph) -> Vec<usize> {
    let (outd, ind) = g.degrees();
    (0..g.vertex_count()).filter(|&v| ind[v] == 0 && outd[v] > 0).collect()
}

pub fn sinks(g: &Digraph) -> Vec<usize> {
    let (outd, ind) = g.degrees();
    (0..g.vertex_count()).filter(|&v| outd[v] == 0 && ind[v] > 0).collect()
}

pub fn census(g: &Digraph) -> DegreeCensus {
    let (outd, ind) = g.degrees();
    let mut c = DegreeCensus::default();
    for v in 0..g.vertex_count() {
        match (ind[v], outd[v]) {
            (0, o) if o > 0 => {
                c.sigma += 1;
                if o == 1 {
                    c.sigma1 += 1;
                }
            }
            (i, 0) if i > 0 => {
                c.tau += 1;
                if i == 1 {
                    c.tau1 += 1;
                }
            }
            _ => {}
        }
    }
    c
}

/// Weakly connected components, each listed in increasing vertex order.
pub fn components(g: &Digraph) -> Vec<Vec<usize>> {
    let adj = g.undirected();
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::new();
    for s in 0..g.vertex_count() {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Shortest cycle of the underlying undirected multigraph restricted to
/// `within` (antiparallel arcs form a 2-cycle).
fn girth_of(g: &Digraph, within: &[usize]) -> Option<usize> {
    let inside: BTreeSet<usize> = within.iter().copied().collect();
    for &(u, v) in &g.arcs {
        if inside.contains(&u) && g.arcs.contains(&(v, u)) {
            return Some(2);
        }
    }
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(u, v) in &g.arcs {
        if inside.contains(&u) {
            adj.entry(u).or_default().insert(v);
            adj.entry(v).or_default().insert(u);
        }
    }
    let mut best: Option<usize> = None;
    for &root in within {
        let mut dist: HashMap<usize, usize> = HashMap::new();
        let mut parent: HashMap<usize, usize> = HashMap::new();
        dist.insert(root, 0);
        let mut q = VecDeque::from([root]);
        while let Some(x) = q.pop_front() {
            let dx = dist[&x];
            for &y in adj.get(&x).into_iter().flatten() {
                if parent.get(&x) == Some(&y) {
                    continue;
                }
                match dist.get(&y) {
                    None => {
                        dist.insert(y, dx + 1);
                        parent.insert(y, x);
                        q.push_back(y);
                    }
                    Some(&dy) => {
                        let len = dx + dy + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
    }
    best
}

pub fn analyze(g: &Digraph) -> Analysis {
    let comps = components(g);
    let mut components = Vec::new();
    for c in comps {
        let set: BTreeSet<usize> = c.iter().copied().collect();
        let arcs = g.arcs.iter().filter(|(u, _)| set.contains(u)).count();
        let girth = girth_of(g, &c);
        components.push(Component { vertices: c, arcs, girth });
    }
    let girth = components.iter().filter_map(|c| c.girth).min();
    Analysis {
        girth,
        components,
        census: census(g),
        balanced: g.vertex_count() == g.arc_count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneKind {
    Source,
    Sink,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub vertex: String,
    pub arc: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneResult {
    #[serde(skip)]
    pub result: Digraph,
    pub removed: Vec<Removal>,
}

fn prunable(g: &Digraph, alive: &[bool], v: usize, kind: PruneKind) -> Option<(usize, usize)> {
    let mut arc = None;
    let mut count = 0;
    for &(a, b) in &g.arcs {
        if (a == v || b == v) && alive[a] && alive[b] {
            count += 1;
            arc = Some((a, b));
        }
    }
    let (a, b) = arc?;
    if count != 1 {
        return None;
    }
    let source_leaf = a == v;
    match kind {
        PruneKind::Source if source_leaf => Some((a, b)),
        PruneKind::Sink if !source_leaf => Some((a, b)),
        PruneKind::Both => Some((a, b)),
        _ => None,
    }
}

/// Repeatedly removes leaves of the given kind, lowest vertex first.
/// Any removal order gives the same result, except for `Both` on a tree
/// component, where the surviving vertex depends on the order.
pub fn prune(g: &Digraph, kind: PruneKind) -> PruneResult {
    let mut alive = vec![true; g.vertex_count()];
    let mut removed = Vec::new();
    loop {
        let next = (0..g.vertex_count())
            .filter(|&v| alive[v])
            .find_map(|v| prunable(g, &alive, v, kind).map(|arc| (v, arc)));
        let Some((v, (a, b))) = next else { break };
        alive[v] = false;
        removed.push(Removal {
            vertex: g.label(v).to_string(),
            arc: (g.label(a).to_string(), g.label(b).to_string()),
        });
    }
    let keep: BTreeSet<usize> = (0..g.vertex_count()).filter(|&v| alive[v]).collect();
    PruneResult { result: g.induced(&keep), removed }
}

impl PruneResult {
    /// Re-applies the recorded removals to `input`, checking each one.
    pub fn replay(&self, input: &Digraph, kind: PruneKind) -> Result<Digraph, DigraphError> {
        let mut alive = vec![true; input.vertex_count()];
        for r in &self.removed {
            let v = input
                .vertex(&r.vertex)
                .ok_or_else(|| DigraphError::Precondition(format!("unknown vertex {}", r.vertex)))?;
            let arc = prunable(input, &alive, v, kind).ok_or_else(|| {
                DigraphError::Precondition(format!("{} is not a prunable leaf", r.vertex))
            })?;
            let labels = (input.label(arc.0), input.label(arc.1));
            if labels != (r.arc.0.as_str(), r.arc.1.as_str()) {
                return Err(DigraphError::Precondition(format!("arc mismatch at {}", r.vertex)));
            }
            alive[v] = false;
        }
        let keep: BTreeSet<usize> = (0..input.vertex_count()).filter(|&v| alive[v]).collect();
        Ok(input.induced(&keep))
    }
}

pub fn reflect_digraph(g: &Digraph) -> Digraph {
    let mut h = Digraph::new();
    for l in &g.labels {
        h.add_vertex(l);
    }
    h.arcs = g.arcs.iter().map(|&(u, v)| (v, u)).collect();
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeMatch {
    /// `None` is NoMatch.
    pub shape: Option<Shape>,
    /// `witness[i]` is the input vertex playing template vertex `i + 1`.
    pub witness: Vec<String>,
}

impl ShapeMatch {
    fn no_match() -> Self {
        ShapeMatch { shape: None, witness: Vec::new() }
    }

    /// Input vertex label for template vertex `t` (1-based).
    pub fn vertex(&self, t: usize) -> &str {
        &self.witness[t - 1]
    }

    /// Checks that the witness is a digraph isomorphism from the template
    /// onto `g`.
    pub fn verify(&self, g: &Digraph) -> bool {
        let Some(shape) = self.shape else { return self.witness.is_empty() };
        if shape.validate().is_err() || self.witness.len() != shape.vertex_count() {
            return false;
        }
        if g.vertex_count() != self.witness.len() {
            return false;
        }
        let distinct: BTreeSet<&String> = self.witness.iter().collect();
        if distinct.len() != self.witness.len() {
            return false;
        }
        let arcs = shape.template_arcs();
        arcs.len() == g.arc_count()
            && arcs.iter().all(|&(u, v)| g.has_arc_labels(self.vertex(u), self.vertex(v)))
    }
}

/// Vertices of the unique cycle of a connected unicyclic graph, in cyclic
/// order starting from the lowest index. `None` if the cycle is a 2-cycle.
pub fn cycle_order(g: &Digraph) -> Option<Vec<usize>> {
    let adj = g.undirected();
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut removed = vec![false; g.vertex_count()];
    let mut q: VecDeque<usize> = (0..g.vertex_count()).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = q.pop_front() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &w in &adj[v] {
            if !removed[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    q.push_back(w);
                }
            }
        }
    }
    let on_cycle: Vec<usize> = (0..g.vertex_count()).filter(|&v| !removed[v]).collect();
    if on_cycle.len() < 3 {
        return None;
    }
    let start = on_cycle[0];
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = adj[cur].iter().copied().filter(|&w| !removed[w] && w != prev).min()?;
        if next == start {
            break;
        }
        order.push(next);
        prev = cur;
        cur = next;
        if order.len() > on_cycle.len() {
            return None;
        }
    }
    (order.len() == on_cycle.len()).then_some(order)
}

pub fn recognize_shape(g: &Digraph) -> Result<ShapeMatch, DigraphError> {
    if components(g).len() != 1 || g.vertex_count() != g.arc_count() {
        return Err(DigraphError::Precondition(
            "shape recognition needs a connected digraph with |V| = |A|".into(),
        ));
    }
    let Some(cycle) = cycle_order(g) else { return Ok(ShapeMatch::no_match()) };
    let n = cycle.len();
    let on_cycle: BTreeSet<usize> = cycle.iter().copied().collect();
    let adj = g.undirected();

    // At most one attachment, and it must be a path.
    let roots: Vec<usize> =
        cycle.iter().copied().filter(|&v| adj[v].iter().any(|w| !on_cycle.contains(w))).collect();
    let mut tail: Vec<usize> = Vec::new();
    let mut tail_out: Vec<bool> = Vec::new();
    let root = match roots.as_slice() {
        [] => None,
        [r] => {
            let off: Vec<usize> =
                adj[*r].iter().copied().filter(|w| !on_cycle.contains(w)).collect();
            if off.len() != 1 {
                return Ok(ShapeMatch::no_match());
            }
            let mut prev = *r;
            let mut cur = off[0];
            loop {
                tail.push(cur);
                tail_out.push(g.has_arc(prev, cur));
                let next: Vec<usize> = adj[cur].iter().copied().filter(|&w| w != prev).collect();
                match next.as_slice() {
                    [] => break,
                    [w] => {
                        prev = cur;
                        cur = *w;
                    }
                    _ => return Ok(ShapeMatch::no_match()),
                }
            }
            Some(*r)
        }
        _ => return Ok(ShapeMatch::no_match()),
    };
    if on_cycle.len() + tail.len() != g.vertex_count() {
        return Ok(ShapeMatch::no_match());
    }

    // Tail pattern: Out^m, In^m, Out^m In^l, In^m Out^l.
    let runs: Vec<(bool, usize)> = tail_out.iter().fold(Vec::new(), |mut acc, &o| {
        match acc.last_mut() {
            Some((dir, len)) if *dir == o => *len += 1,
            _ => acc.push((o, 1)),
        }
        acc
    });
    if runs.len() > 2 {
        return Ok(ShapeMatch::no_match());
    }

    let forward: Vec<bool> = (0..n).map(|i| g.has_arc(cycle[i], cycle[(i + 1) % n])).collect();
    let directed = forward.iter().all(|&f| f) || forward.iter().all(|&f| !f);
    let mut witness: Vec<usize> = Vec::new();

    let shape = if directed {
        // Orient so that arcs run c1 -> c2 -> .. -> cn -> c1 with cn the root.
        let mut order = cycle.clone();
        if !forward[0] {
            order.reverse();
        }
        let anchor = root.unwrap_or(order[order.len() - 1]);
        let pos = order.iter().position(|&v| v == anchor).unwrap();
        order.rotate_left((pos + 1) % n);
        witness.extend(order);
        match runs.as_slice() {
            [] => Shape::Cycle { n },
            [(true, m)] => Shape::Out { n, m: *m },
            [(false, m)] => Shape::In { n, m: *m },
            [(true, m), (false, l)] => Shape::OutIn { n, m: *m, l: *l },
            [(false, m), (true, l)] => Shape::InOut { n, m: *m, l: *l },
            _ => unreachable!(),
        }
    } else {
        let src: Vec<usize> = (0..n).filter(|&i| forward[i] && !forward[(i + n - 1) % n]).collect();
        let snk: Vec<usize> = (0..n).filter(|&i| !forward[i] && forward[(i + n - 1) % n]).collect();
        if src.len() != 1 || snk.len() != 1 {
            return Ok(ShapeMatch::no_match());
        }
        let (s, t) = (src[0], snk[0]);
        // Paths from the source to the sink in both directions around the cycle.
        let fwd_path: Vec<usize> = (0..n).map(|k| (s + k) % n).take_while(|&i| i != t).collect();
        let bwd_path: Vec<usize> = (0..n).map(|k| (s + n - k) % n).take_while(|&i| i != t).collect();
        let (la, lb) = (fwd_path.len(), bwd_path.len());
        let d = la.min(lb);
        let first_fwd = cycle[(s + 1) % n];
        let first_bwd = cycle[(s + n - 1) % n];
        // The short path is the shorter one; ties go to the lower first vertex.
        let fwd_is_short = la < lb || (la == lb && first_fwd < first_bwd);
        let (long, short) = if fwd_is_short { (bwd_path, fwd_path) } else { (fwd_path, bwd_path) };
        let mut map = vec![0usize; n];
        map[n - 1] = cycle[s];
        for (k, &i) in long.iter().enumerate().skip(1) {
            map[k - 1] = cycle[i];
        }
        map[n - d - 1] = cycle[t];
        for (k, &i) in short.iter().enumerate().skip(1) {
            map[n - 1 - k] = cycle[i];
        }
        witness.extend(map);
        let anchored_at = |v: usize| root == Some(cycle[v]);
        match runs.as_slice() {
            [] => Shape::TwoPath { n, d },
            [(true, m)] if anchored_at(t) => Shape::TwoPathOut { n, d, m: *m },
            [(false, m)] if anchored_at(s) => Shape::TwoPathIn { n, d, m: *m },
            _ => return Ok(ShapeMatch::no_match()),
        }
    };
    if shape.validate().is_err() {
        return Ok(ShapeMatch::no_match());
    }
    witness.extend(tail);
    let m = ShapeMatch { shape: Some(shape), witness: witness.iter().map(|&v| g.label(v).to_string()).collect() };
    debug_assert!(m.verify(g), "witness for {shape} failed on {:?}", g.to_edge_list());
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arcs_of(g: &Digraph) -> BTreeSet<(String, String)> {
        g.arcs().map(|(u, v)| (g.label(u).to_string(), g.label(v).to_string())).collect()
    }

    fn set(v: &[(u32, u32)]) -> BTreeSet<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn parse_examples() {
        let g = parse_digraph("1 2\n2 3\n3 1").unwrap();
        assert_eq!(arcs_of(&g), set(&[(1, 2), (2, 3), (3, 1)]));
        assert!(matches!(parse_digraph("1 1"), Err(DigraphError::Loop { line: 1, .. })));
        assert!(matches!(
            parse_digraph("1 2\n1 2"),
            Err(DigraphError::DuplicateArc { line: 2, .. })
        ));
        let g = parse_digraph("# comment\nvertex z\n a b # trailing\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.arc_count(), 1);
        assert!(parse_digraph("1 2 3").is_err());
        assert!(parse_digraph("1 -2").is_err());
        let back = parse_digraph(&g.to_edge_list()).unwrap();
        assert_eq!(arcs_of(&back), arcs_of(&g));
        assert_eq!(back.vertex_count(), 3);
    }

    #[test]
    fn template_examples() {
        let g = build_template(&Shape::Cycle { n: 4 }).unwrap();
        assert_eq!(arcs_of(&g), set(&[(1, 2), (2, 3), (3, 4), (4, 1)]));
        let g = build_template(&Shape::TwoPath { n: 4, d: 1 }).unwrap();
        assert_eq!(arcs_of(&g), set(&[(1, 2), (2, 3), (4, 3), (4, 1)]));
        let g = build_template(&Shape::InOut { n: 4, m: 1, l: 2 }).unwrap();
        assert_eq!(
            arcs_of(&g),
            set(&[(1, 2), (2, 3), (3, 4), (4, 1), (5, 4), (5, 6), (6, 7)])
        );
        let g = build_template(&Shape::OutIn { n: 4, m: 2, l: 1 }).unwrap();
        assert_eq!(
            arcs_of(&g),
            set(&[(1, 2), (2, 3), (3, 4), (4, 1), (4, 5), (5, 6), (7, 6)])
        );
        let g = build_template(&Shape::TwoPathOut { n: 4, d: 1, m: 1 }).unwrap();
        assert_eq!(arcs_of(&g), set(&[(1, 2), (2, 3), (4, 3), (4, 1), (3, 5)]));
        assert!(build_template(&Shape::Cycle { n: 2 }).is_err());
        assert!(build_template(&Shape::TwoPath { n: 5, d: 3 }).is_err());
        assert!(build_template(&Shape::Out { n: 4, m: 0 }).is_err());
    }

    #[test]
    fn descriptor_roundtrip() {
        for s in [
            "L(4)", "L(5,2)", "L(4;out=2)", "L(4;in=3)", "L(4;out=1,in=2)", "L(4;in=1,out=2)",
            "L(4,1;out=2)", "L(6,3;in=1)",
        ] {
            let shape = parse_template(s).unwrap();
            assert_eq!(shape.to_string(), s);
        }
        assert_eq!(parse_template("L(4,1;out 1)").unwrap(), Shape::TwoPathOut { n: 4, d: 1, m: 1 });
        assert_eq!(parse_template(" L( 4 ; in 1 , out 2 ) ").unwrap(), Shape::InOut { n: 4, m: 1, l: 2 });
        assert!(parse_template("L(4;up=1)").is_err());
        assert!(parse_template("K(4)").is_err());
        let g = parse_template_union("L(4) + L(4)").unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(components(&g).len(), 2);
    }

    #[test]
    fn analyze_examples() {
        let a = analyze(&build_template(&Shape::Cycle { n: 5 }).unwrap());
        assert_eq!(a.girth, Some(5));
        assert_eq!(a.components.len(), 1);
        assert_eq!(a.census, DegreeCensus::default());
        assert!(a.balanced);
        let a = analyze(&build_template(&Shape::Out { n: 4, m: 2 }).unwrap());
        assert_eq!(a.girth, Some(4));
        assert!(a.balanced);
        assert_eq!(a.census, DegreeCensus { sigma: 0, tau: 1, sigma1: 0, tau1: 1 });
        let a = analyze(&parse_template_union("L(4)+L(4)").unwrap());
        assert_eq!(a.girth, Some(4));
        assert_eq!(a.components.len(), 2);
        assert!(a.components.iter().all(|c| c.balanced()));
        let a = analyze(&parse_digraph("1 2\n2 1\n2 3").unwrap());
        assert_eq!(a.girth, Some(2));
        let a = analyze(&parse_digraph("1 2\n2 3").unwrap());
        assert_eq!(a.girth, None);
    }

    #[test]
    fn prune_examples() {
        let g = build_template(&Shape::In { n: 4, m: 2 }).unwrap();
        let p = prune(&g, PruneKind::Source);
        assert_eq!(p.removed.len(), 2);
        assert_eq!(arcs_of(&p.result), set(&[(1, 2), (2, 3), (3, 4), (4, 1)]));
        assert_eq!(p.replay(&g, PruneKind::Source).unwrap(), p.result);
        let c4 = build_template(&Shape::Cycle { n: 4 }).unwrap();
        assert!(prune(&c4, PruneKind::Source).removed.is_empty());
        let g = build_template(&Shape::Out { n: 4, m: 3 }).unwrap();
        let p = prune(&g, PruneKind::Source);
        assert!(p.removed.is_empty());
        assert_eq!(p.result, g);
        let p = prune(&g, PruneKind::Sink);
        assert_eq!(p.removed.len(), 3);
    }

    #[test]
    fn recognize_examples() {
        let g = parse_digraph("1 2\n2 3\n3 4\n4 1").unwrap();
        assert_eq!(recognize_shape(&g).unwrap().shape, Some(Shape::Cycle { n: 4 }));
        let g = parse_digraph("1 2\n2 3\n4 3\n4 1").unwrap();
        assert_eq!(recognize_shape(&g).unwrap().shape, Some(Shape::TwoPath { n: 4, d: 1 }));
        let g = parse_digraph("1 2\n2 3\n3 4\n4 1\n4 5\n5 6").unwrap();
        let m = recognize_shape(&g).unwrap();
        assert_eq!(m.shape, Some(Shape::Out { n: 4, m: 2 }));
        assert!(m.verify(&g));
        assert!(recognize_shape(&parse_digraph("1 2\n2 3").unwrap()).is_err());
        // Two attachments.
        let g = parse_digraph("1 2\n2 3\n3 4\n4 1\n1 5\n3 6").unwrap();
        assert_eq!(recognize_shape(&g).unwrap().shape, None);
        // Two sources on the cycle.
        let g = parse_digraph("1 2\n3 2\n3 4\n5 4\n5 6\n1 6").unwrap();
        assert_eq!(recognize_shape(&g).unwrap().shape, None);
    }

    #[test]
    fn every_template_recognizes_itself() {
        let mut shapes = Vec::new();
        for n in 3..8 {
            shapes.push(Shape::Cycle { n });
            for d in 1..=n / 2 {
                shapes.push(Shape::TwoPath { n, d });
                for m in 1..4 {
                    shapes.push(Shape::TwoPathOut { n, d, m });
                    shapes.push(Shape::TwoPathIn { n, d, m });
                }
            }
            for m in 1..4 {
                shapes.push(Shape::Out { n, m });
                shapes.push(Shape::In { n, m });
                for l in 1..4 {
                    shapes.push(Shape::OutIn { n, m, l });
                    shapes.push(Shape::InOut { n, m, l });
                }
            }
        }
        for s in shapes {
            let g = build_template(&s).unwrap();
            let m = recognize_shape(&g).unwrap();
            assert_eq!(m.shape, Some(s), "{s}");
            assert!(m.verify(&g));
            let r = recognize_shape(&reflect_digraph(&g)).unwrap();
            assert_eq!(r.shape, Some(s.reflect()), "reflection of {s}");
        }
    }

    /// Random connected unicyclic digraph: a cycle of length `n` with random
    /// trees attached, random orientation, shuffled labels.
    pub(crate) fn random_unicyclic(seed: u64, n: usize, extra: usize) -> Digraph {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let total = n + extra;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        for v in n..total {
            edges.push((rng.gen_range(0..v), v));
        }
        let mut labels: Vec<usize> = (0..total).collect();
        labels.shuffle(&mut rng);
        let mut g = Digraph::new();
        for (u, v) in edges {
            let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
            g.add_arc(&format!("v{}", labels[a]), &format!("v{}", labels[b])).unwrap();
        }
        g
    }

    /// Shortest simple cycle by exhaustive DFS; valid for graphs without
    /// antiparallel arcs.
    fn brute_girth(g: &Digraph) -> Option<usize> {
        fn dfs(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, best: &mut Option<usize>) {
            let cur = *path.last().unwrap();
            for &w in &adj[cur] {
                if w == start && path.len() >= 3 {
                    *best = Some(best.map_or(path.len(), |b| b.min(path.len())));
                } else if !path.contains(&w) {
                    path.push(w);
                    dfs(adj, start, path, best);
                    path.pop();
                }
            }
        }
        let adj = g.undirected();
        let mut best = None;
        for s in 0..g.vertex_count() {
            dfs(&adj, s, &mut vec![s], &mut best);
        }
        best
    }

    proptest! {
        #[test]
        fn unicyclic_girth_matches_brute_force(seed in any::<u64>(), n in 3usize..8, extra in 0usize..5) {
            let g = random_unicyclic(seed, n, extra);
            let a = analyze(&g);
            prop_assert!(a.balanced);
            prop_assert_eq!(a.components.len(), 1);
            prop_assert_eq!(a.girth, Some(n));
            prop_assert_eq!(brute_girth(&g), Some(n));
            prop_assert_eq!(cycle_order(&g).map(|c| c.len()), Some(n));
        }

        #[test]
        fn prune_is_confluent_and_preserves_deficiency(seed in any::<u64>(), n in 3usize..7, extra in 0usize..6) {
            use rand::{seq::SliceRandom, SeedableRng};
            let g = random_unicyclic(seed, n, extra);
            for kind in [PruneKind::Source, PruneKind::Sink, PruneKind::Both] {
                let p = prune(&g, kind);
                prop_assert_eq!(p.replay(&g, kind).unwrap(), p.result.clone());
                prop_assert_eq!(
                    g.vertex_count() as i64 - g.arc_count() as i64,
                    p.result.vertex_count() as i64 - p.result.arc_count() as i64
                );
                // Random admissible order reaches the same vertex set.
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
                let mut alive = vec![true; g.vertex_count()];
                loop {
                    let mut cands: Vec<usize> = (0..g.vertex_count())
                        .filter(|&v| alive[v] && prunable(&g, &alive, v, kind).is_some())
                        .collect();
                    cands.shuffle(&mut rng);
                    match cands.first() {
                        Some(&v) => alive[v] = false,
                        None => break,
                    }
                }
                let keep: BTreeSet<usize> = (0..g.vertex_count()).filter(|&v| alive[v]).collect();
                prop_assert_eq!(g.induced(&keep), p.result.clone());
                let c = census(&p.result);
                match kind {
                    PruneKind::Source => prop_assert_eq!(c.sigma1, 0),
                    PruneKind::Sink => prop_assert_eq!(c.tau1, 0),
                    PruneKind::Both => prop_assert_eq!(c.sigma1 + c.tau1, 0),
                }
            }
        }

        #[test]
        fn recognition_commutes_with_reflection(seed in any::<u64>(), n in 3usize..8, extra in 0usize..5) {
            let g = random_unicyclic(seed, n, extra);
            let m = recognize_shape(&g).unwrap();
            prop_assert!(m.verify(&g));
            let r = recognize_shape(&reflect_digraph(&g)).unwrap();
            prop_assert_eq!(r.shape, m.shape.map(|s| s.reflect()));
            prop_assert_eq!(reflect_digraph(&reflect_digraph(&g)), g);
        }
    }
}
