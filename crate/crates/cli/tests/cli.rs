use digraph_groups::classifier::{Case, Status, Verdict};
use digraph_groups_cli::report::Report;
use digraph_groups_cli::{corpus, run_command, EXIT_INPUT, EXIT_OK, EXIT_RESOURCE};
use num_bigint::BigInt;
use std::io::Write;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("digraph-groups").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> Report {
    let (code, out, err) = run(args);
    assert!(code == EXIT_OK || code == EXIT_RESOURCE, "{code}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn classify_with_verification_reports_fifteen() {
    let (code, out, _) = run(&["classify", "--graph", "L(4)", "--word", "ab^-2", "--verify"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("status: FiniteCyclic") && out.contains("order: 15"), "{out}");
    assert!(out.contains("verify PASS coset-enumeration: 15 cosets"), "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn girth_three_is_out_of_scope_with_exit_zero() {
    let (code, out, _) = run(&["classify", "--graph", "L(3)", "--word", "AbaB^2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("status: OutOfScope") && out.contains("reason: girth 3"), "{out}");
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["classify", "--graph", "missing.txt", "--word", "ab"][..],
        &["classify", "--graph", "L(4)", "--word", "ac"],
        &["classify", "--graph", "L(2)", "--word", "ab"],
        &["classify", "--graph", "L(4)"],
        &["prune", "--graph", "L(4)", "--kind", "leaves"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_INPUT, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, err) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("classify") && err.is_empty());
}

#[test]
fn edge_list_files_are_accepted() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# L(4) written out\nu v\nv w\nw x\nx u").unwrap();
    let path = file.path().to_str().unwrap();
    let r = report(&["classify", "--graph", path, "--word", "ab^-2", "--json", "--stable"]);
    assert_eq!(r.verdict.order, Some(BigInt::from(15)));
    assert_eq!(r.verdict.shape.unwrap().witness, ["u", "v", "w", "x"]);
}

#[test]
fn pride_json_has_order_string_and_rank_one() {
    let (_, out, _) = run(&["classify", "--graph", "L(4)", "--word", "a^2b^-3", "--json", "--stable"]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["order"], "65");
    assert_eq!(json["rank_bound"], serde_json::json!([1]));
    assert_eq!(json["shape"]["class"], "L(n)");
    assert_eq!(json["shape"]["n"], 4);
    assert!(json.get("timings_ms").is_none());
}

#[test]
fn timings_appear_without_stable() {
    let (_, out, _) = run(&["classify", "--graph", "L(4)", "--word", "ab^-2", "--json"]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(json["timings_ms"]["classify"].is_number());
}

#[test]
fn higman_text_shows_the_oracle_no_evidence() {
    let (code, out, _) = run(&["classify", "--graph", "L(4)", "--word", "a^-1bab^-2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("status: Infinite"), "{out}");
    assert!(out.contains("certificate: w1-infinite: no on"), "{out}");
}

#[test]
fn conditional_verdict_serializes_null_order() {
    let mut v: Verdict = report(&["classify", "--graph", "L(4,1)", "--word", "(ab)^2b", "--json", "--stable"]).verdict;
    assert_eq!(v.case, Some(Case::C1d));
    v.status = Status::ConditionalKQuotient;
    v.order = None;
    v.k_probe = None;
    let json = serde_json::to_value(&v).unwrap();
    assert_eq!(json["status"], "ConditionalKQuotient");
    assert!(json["order"].is_null());
    assert_eq!(json["ab_order"], "30");
}

#[test]
fn json_round_trips_for_every_corpus_entry() {
    for e in corpus::corpus() {
        let args = ["classify", "--graph", e.digraph, "--word", e.relator, "--json", "--verify"];
        let (_, out, err) = run(&args);
        let parsed: Report = serde_json::from_str(&out).unwrap_or_else(|x| panic!("{}: {x} {err}", e.name));
        assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", out, "{}", e.name);
    }
}

#[test]
fn stable_output_is_byte_identical() {
    for e in corpus::corpus() {
        let args = ["classify", "--graph", e.digraph, "--word", e.relator, "--json", "--stable"];
        assert_eq!(run(&args), run(&args), "{}", e.name);
    }
}

#[test]
fn corpus_run_matches_every_expectation() {
    let (code, out, _) = run(&["corpus", "--run"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let names: Vec<&str> = out.lines().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted);
    assert_eq!(names.len(), corpus::corpus().len());
}

#[test]
fn corpus_touches_every_case_label() {
    let cases: Vec<Case> = corpus::corpus().iter().filter_map(|e| e.expected.case).collect();
    for case in Case::ALL {
        assert!(cases.contains(&case), "{case}");
    }
    assert!(corpus::find("higman-L4").is_some());
}

#[test]
fn coset_limit_exhaustion_exits_three() {
    let (code, out, _) = run(&["verify", "--graph", "L(6)", "--word", "a^2b^-3", "--max-cosets", "50"]);
    assert_eq!(code, EXIT_RESOURCE);
    assert!(out.contains("exceeded"), "{out}");
    let (code, out, _) = run(&["verify", "--graph", "L(6)", "--word", "a^2b^-3"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "order: 665\n"));
}

#[test]
fn auxiliary_commands() {
    let (_, out, _) = run(&["abelianize", "--graph", "L(4)", "--word", "a^2b^-3"]);
    assert_eq!(out, "Z_65\n");
    let (_, out, _) = run(&["shape", "--graph", "L(4,1;out=2)"]);
    assert!(out.starts_with("L(4,1;out=2)\n"), "{out}");
    let (_, out, _) = run(&["prune", "--graph", "L(4;out=2)", "--kind", "sink"]);
    assert!(out.starts_with("# removed 6") && out.contains("# removed 5"), "{out}");
    let (_, out, _) = run(&["reflect", "--graph", "L(4)", "--word", "a^2b^-3"]);
    assert!(out.contains("2 1\n") && out.ends_with("# word: b^-2 a^3\n"), "{out}");
    let (_, out, _) = run(&["simplify", "--graph", "L(5)", "--word", "ab^-2", "--json"]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["outcome"]["order"], "31");
}
