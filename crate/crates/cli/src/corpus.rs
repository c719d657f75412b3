//! Built-in instances with their expected verdicts. Together they touch every
//! case label at least once.

use digraph_groups::classifier::{Case, Status, Verdict};
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    pub status: Status,
    pub case: Option<Case>,
    /// Order for finite verdicts.
    pub order: Option<u64>,
    pub certificate: Option<&'static str>,
}

impl Expected {
    /// Fields of `v` that disagree with the expectation, empty on a match.
    pub fn mismatches(&self, v: &Verdict) -> Vec<String> {
        let mut out = Vec::new();
        if v.status != self.status {
            out.push(format!("status {} != {}", v.status, self.status));
        }
        if self.case.is_some() && v.case != self.case {
            out.push(format!("case {:?} != {:?}", v.case, self.case));
        }
        if let Some(order) = self.order {
            if v.order != Some(BigInt::from(order)) {
                out.push(format!("order {:?} != {order}", v.order.as_ref().map(|x| x.to_string())));
            }
        }
        if let Some(kind) = self.certificate {
            if !v.certificates.iter().any(|c| c.kind() == kind) {
                out.push(format!("no {kind} certificate"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    /// Template descriptor (a `+`-separated union allowed) or edge list.
    pub digraph: &'static str,
    pub relator: &'static str,
    pub expected: Expected,
    pub note: &'static str,
}

const fn finite(case: Case, order: u64) -> Expected {
    Expected { status: Status::FiniteCyclic, case: Some(case), order: Some(order), certificate: None }
}

const fn infinite(case: Option<Case>, certificate: &'static str) -> Expected {
    Expected { status: Status::Infinite, case, order: None, certificate: Some(certificate) }
}

const OUT_OF_SCOPE: Expected = Expected { status: Status::OutOfScope, case: None, order: None, certificate: None };

const fn entry(
    name: &'static str,
    digraph: &'static str,
    relator: &'static str,
    expected: Expected,
    note: &'static str,
) -> CorpusEntry {
    CorpusEntry { name, digraph, relator, expected, note }
}

/// Entries sorted by name.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut entries = vec![
        entry("case1a-pride-L4", "L(4)", "a^2b^-3", finite(Case::C1a, 65), "cyclic presentation, |2^4 - 3^4|"),
        entry("case1a-pride-L5", "L(5)", "a^2b^-3", finite(Case::C1a, 211), "cyclic presentation, |2^5 - 3^5|"),
        entry("case1a-pride-L6", "L(6)", "a^2b^-3", finite(Case::C1a, 665), "cyclic presentation, |2^6 - 3^6|"),
        entry("case1b-out-tail", "L(4;out=1)", "a^2b^-3", finite(Case::C1b, 195), "3 * 65"),
        entry("case1c-in-tail", "L(4;in=1)", "a^2b^-3", finite(Case::C1c, 130), "2 * 65"),
        entry("case1d-abab-b", "L(4,1)", "(ab)^2b", finite(Case::C1d, 30), "K infinite cyclic, power a^-10"),
        entry("case1d-ababab-b", "L(4,1)", "(ab)^3b", finite(Case::C1d, 84), "K infinite cyclic"),
        entry("case1d-delta-obstruction", "L(4,1)", "a^2b^-3", infinite(Some(Case::C1d), "delta-obstruction"), "onto Z_2 * Z_3"),
        entry("case1e-abab-b", "L(4;out=1,in=1)", "(ab)^2b", finite(Case::C1e, 390), "|2 (-3) (16 - 81)|"),
        entry("case1e-ababab-b", "L(4;out=1,in=1)", "(ab)^3b", finite(Case::C1e, 2100), "K infinite cyclic"),
        entry("case1f-abab-b", "L(4;in=1,out=1)", "(ab)^2b", finite(Case::C1f, 390), "|2 (-3) (16 - 81)|"),
        entry("case1f-ababab-b", "L(4;in=1,out=1)", "(ab)^3b", finite(Case::C1f, 2100), "K infinite cyclic"),
        entry("case2a-L4", "L(4)", "ab^-2", finite(Case::C2a, 15), "|1 - 2^4|"),
        entry("case2a-L5", "L(5)", "ab^-2", finite(Case::C2a, 31), "|1 - 2^5|"),
        entry("case2b-out-tail", "L(4;out=1)", "ab^-2", finite(Case::C2b, 30), "2 * 15"),
        entry("case2c-L5-2", "L(5,2)", "ab^-2", finite(Case::C2c, 4), "|2^3 - 2^2|"),
        entry("case2c-zero-order", "L(4,2)", "ab^-2", infinite(Some(Case::C2c), "zero-order"), "d = n/2"),
        entry("case2d-out-1", "L(4,1;out=1)", "ab^-2", finite(Case::C2d, 12), "2 * |2^3 - 2|"),
        entry("case2d-out-2", "L(4,1;out=2)", "ab^-2", finite(Case::C2d, 24), "4 * |2^3 - 2|"),
        entry("case2e-in-1-out-1", "L(4;in=1,out=1)", "ab^-2", finite(Case::C2e, 30), "2 * 15"),
        entry("case2e-in-2-out-1", "L(4;in=2,out=1)", "ab^-2", finite(Case::C2e, 30), "2 * 15"),
        entry("case3a-L4", "L(4)", "a^2b^-1", finite(Case::C3a, 15), "reflection of case2a-L4"),
        entry("case3b-in-tail", "L(4;in=1)", "a^2b^-1", finite(Case::C3b, 30), "2 * 15"),
        entry("case3c-L5-2", "L(5,2)", "a^2b^-1", finite(Case::C3c, 4), "|2^3 - 2^2|"),
        entry("case3d-in-2", "L(4,1;in=2)", "a^2b^-1", finite(Case::C3d, 24), "4 * |2^3 - 2|"),
        entry("case3e-out-1-in-2", "L(4;out=1,in=2)", "a^2b^-1", finite(Case::C3e, 60), "4 * 15"),
        entry("case4-L5", "L(5)", "ab", finite(Case::C4, 2), "odd cycle, alpha beta = -1"),
        entry("disconnected-L4-L4", "L(4) + L(4)", "ab^-2", infinite(None, "disconnected-free-product"), "Z_15 * Z_15"),
        entry("higman-L4", "L(4)", "a^-1bab^-2", infinite(None, "w1-infinite"), "Higman's group, alpha = 0"),
        entry("johnson-J222-L3", "L(3)", "BaB^3a", OUT_OF_SCOPE, "girth 3"),
        entry("mennicke-M222-L3", "L(3)", "a^-1bab^-2", OUT_OF_SCOPE, "girth 3"),
        entry("mennicke-M333-L3", "L(3)", "a^-1bab^-3", OUT_OF_SCOPE, "girth 3"),
    ];
    entries.sort_by_key(|e| e.name);
    entries
}

pub fn find(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name == name)
}
