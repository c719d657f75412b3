//! Command-line front end: input parsing, command dispatch and reports.
//!
//! Exit codes: 0 when a verdict or result is produced, 1 when a requested
//! verification or corpus check fails, 2 on input errors, 3 when a resource
//! bound was hit (an Unknown verdict or an exhausted coset limit).

pub mod corpus;
pub mod report;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use digraph_groups::classifier::{classify, cross_verify, ClassifierConfig, Status};
use digraph_groups::coset_enum::{enumerate_cosets, DEFAULT_MAX_COSETS};
use digraph_groups::digraph::{
    parse_digraph, parse_template_union, prune, recognize_shape, reflect_digraph, Digraph, PruneKind,
};
use digraph_groups::freewords::{cyclic_reduce, parse_word, reflect_word, Word};
use digraph_groups::oracle_k::OracleConfig;
use digraph_groups::par;
use digraph_groups::presentation::{abelian_invariants, instantiate, simplify_to_cyclic};

use report::{Report, Timings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Overrides the default coset limit when set to a positive integer.
pub const MAX_COSETS_ENV: &str = "DIGRAPH_GROUPS_MAX_COSETS";

#[derive(Parser, Debug)]
#[command(name = "digraph-groups", version, about = "Classify digraph groups G(R) of balanced digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Edge-list file, or a template such as `L(4,1;out=2)` or `L(4) + L(4)`.
    #[arg(long)]
    graph: String,
    /// Relator in a and b, e.g. `ab^-2`, `(ab)^2b`, `AbaB^2`.
    #[arg(long)]
    word: String,
}

#[derive(clap::Args, Debug)]
struct Output {
    #[arg(long)]
    json: bool,
    /// Omit timings so that repeated runs are byte-identical.
    #[arg(long)]
    stable: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Depth {
    Quick,
    Default,
    Deep,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Source,
    Sink,
    Both,
}

impl From<Kind> for PruneKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Source => PruneKind::Source,
            Kind::Sink => PruneKind::Sink,
            Kind::Both => PruneKind::Both,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify G(R) for a digraph and relator.
    Classify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        /// Cross-check with coset enumeration, Smith normal form and certificate replay.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        max_cosets: Option<usize>,
        #[arg(long, value_enum, default_value = "default")]
        oracle_depth: Depth,
    },
    /// Order of G(R) by coset enumeration alone.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        max_cosets: Option<usize>,
    },
    /// Abelian invariants of G(R).
    Abelianize {
        #[command(flatten)]
        input: Input,
    },
    /// Recognize the digraph among the template classes.
    Shape {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        json: bool,
    },
    /// Remove leaves of the given kind, repeatedly.
    Prune {
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        json: bool,
    },
    /// Tietze simplification of G(R) to a cyclic group or a K-quotient.
    Simplify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Reverse every arc and reflect the relator.
    Reflect {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        word: Option<String>,
    },
    /// List the built-in instances, or classify and check them all.
    Corpus {
        #[arg(long)]
        run: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value = "default")]
        oracle_depth: Depth,
    },
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

/// Reads an edge-list file if `arg` names one, else parses it as templates.
pub fn load_graph(arg: &str) -> Result<Digraph, String> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"))?;
        return parse_digraph(&text).map_err(|e| format!("{arg}: {e}"));
    }
    if arg.trim_start().starts_with("L(") {
        return parse_template_union(arg).map_err(|e| e.to_string());
    }
    Err(format!("{arg}: no such file and not a template"))
}

fn oracle_config(depth: Depth) -> OracleConfig {
    match depth {
        Depth::Quick => OracleConfig::quick(),
        Depth::Default => OracleConfig::default(),
        Depth::Deep => OracleConfig::deep(),
    }
}

fn max_cosets(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(MAX_COSETS_ENV).ok()?.parse().ok().filter(|&n| n > 0))
        .unwrap_or(DEFAULT_MAX_COSETS)
}

/// Elapsed milliseconds at microsecond resolution.
fn millis(started: Instant) -> f64 {
    (started.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn input(i: &Input) -> Result<(Digraph, Word), InputError> {
    Ok((load_graph(&i.graph).map_err(InputError)?, parse_word(&i.word)?))
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`; returns the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), InputError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, InputError> {
    match command {
        Command::Classify { input: i, output, verify, max_cosets: limit, oracle_depth } => {
            let (g, r) = input(&i)?;
            let config = ClassifierConfig {
                max_cosets: max_cosets(limit),
                ..ClassifierConfig::with_oracle(oracle_config(oracle_depth))
            };
            let started = Instant::now();
            let verdict = classify(&g, &r, &config);
            let mut timings = Timings { classify: millis(started), verify: None };
            let verification = verify.then(|| {
                let started = Instant::now();
                let report = cross_verify(&g, &r, &verdict, &config);
                timings.verify = Some(millis(started));
                report
            });
            let failed = verification.as_ref().is_some_and(|v| !v.passed());
            let unknown = verdict.status == Status::Unknown;
            let report = Report { verdict, verification, timings_ms: (!output.stable).then_some(timings) };
            if output.json {
                json_line(out, &report)?;
            } else {
                write!(out, "{}", report::render_text(&report))?;
            }
            Ok(if failed {
                EXIT_CHECK_FAILED
            } else if unknown {
                EXIT_RESOURCE
            } else {
                EXIT_OK
            })
        }
        Command::Verify { input: i, max_cosets: limit } => {
            let (g, r) = input(&i)?;
            let p = instantiate(&g, &cyclic_reduce(&r))?;
            let limit = max_cosets(limit);
            match enumerate_cosets(&p, limit)?.order() {
                Some(order) => {
                    writeln!(out, "order: {order}")?;
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(out, "coset limit {limit} exceeded")?;
                    Ok(EXIT_RESOURCE)
                }
            }
        }
        Command::Abelianize { input: i } => {
            let (g, r) = input(&i)?;
            let p = instantiate(&g, &cyclic_reduce(&r))?;
            writeln!(out, "{}", report::invariants_text(&abelian_invariants(&p)))?;
            Ok(EXIT_OK)
        }
        Command::Shape { graph, json } => {
            let g = load_graph(&graph).map_err(InputError)?;
            let m = recognize_shape(&g)?;
            if json {
                json_line(out, &m)?;
            } else {
                match m.shape {
                    Some(s) => writeln!(out, "{s}\nwitness: {}", m.witness.join(" "))?,
                    None => writeln!(out, "NoMatch")?,
                }
            }
            Ok(EXIT_OK)
        }
        Command::Prune { graph, kind, json } => {
            let g = load_graph(&graph).map_err(InputError)?;
            let p = prune(&g, kind.into());
            if json {
                json_line(out, &p)?;
            } else {
                for r in &p.removed {
                    writeln!(out, "# removed {} ({} -> {})", r.vertex, r.arc.0, r.arc.1)?;
                }
                write!(out, "{}", p.result.to_edge_list())?;
            }
            Ok(EXIT_OK)
        }
        Command::Simplify { input: i, json } => {
            let (g, r) = input(&i)?;
            let s = simplify_to_cyclic(&g, &cyclic_reduce(&r))?;
            if json {
                json_line(out, &serde_json::json!({ "trace": s.trace, "outcome": s.outcome }))?;
            } else {
                for step in &s.trace {
                    writeln!(out, "{}", serde_json::to_string(step)?)?;
                }
                writeln!(out, "outcome: {}", serde_json::to_string(&s.outcome)?)?;
                let p = &s.final_presentation;
                let rels: Vec<String> = p.relators().iter().map(|w| p.word_to_string(w)).collect();
                let gens: Vec<&str> = p.generator_ids().into_iter().filter_map(|id| p.name(id)).collect();
                writeln!(out, "presentation: <{} | {}>", gens.join(", "), rels.join(", "))?;
            }
            Ok(EXIT_OK)
        }
        Command::Reflect { graph, word } => {
            let g = load_graph(&graph).map_err(InputError)?;
            write!(out, "{}", reflect_digraph(&g).to_edge_list())?;
            if let Some(w) = word {
                writeln!(out, "# word: {}", reflect_word(&parse_word(&w)?))?;
            }
            Ok(EXIT_OK)
        }
        Command::Corpus { run, json, oracle_depth } => {
            let entries = corpus::corpus();
            if !run {
                if json {
                    json_line(out, &entries)?;
                } else {
                    for e in &entries {
                        writeln!(out, "{:<26} {:<18} {:<12} {}", e.name, e.digraph, e.relator, e.note)?;
                    }
                }
                return Ok(EXIT_OK);
            }
            let config = ClassifierConfig::with_oracle(oracle_config(oracle_depth));
            let results = par::map(&entries, config.parallel, |e| report::run_entry(e, &config));
            let results = results.into_iter().collect::<Result<Vec<_>, String>>().map_err(InputError)?;
            if json {
                json_line(out, &results)?;
            } else {
                for r in &results {
                    writeln!(out, "{}", r.line())?;
                }
            }
            Ok(if results.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}
