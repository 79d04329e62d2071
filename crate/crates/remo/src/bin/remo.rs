//! Command-line surface over the rewriting-modulo library.
//!
//! Every report starts with a header block echoing the tool version, the
//! input digest, and the effective bounds, so identical invocations produce
//! byte-identical `records` output.

use clap::{Args, Parser, Subcommand};
use remo::branching::{self, ConfluenceVariant, CriticalLeg, PairKind, Verdict};
use remo::coherence;
use remo::completion::{self, CompletionStatus, CompletionVariant, Limits};
use remo::eclass::{Bounds, Session};
use remo::order::{self, Compatibility};
use remo::parse::{parse_presentation, parse_word, serialize_presentation};
use remo::presentation::{Mode, OrderKind, PolygraphModulo, Word};
use remo::records::{Block, OutputFormat, Report};
use remo::rewrite::{self, NormalizeStatus};
use sha2::{Digest, Sha256};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "remo",
    version,
    about = "string rewriting modulo unoriented relations"
)]
struct Cli {
    /// Presentation file
    #[arg(short, long, global = true)]
    input: Option<String>,

    /// Override the rewriting mode (R, ER, RE, ERE)
    #[arg(long, global = true)]
    mode: Option<String>,

    /// Override the termination order (deglex, cdeglex)
    #[arg(long, global = true)]
    order: Option<String>,

    /// Output format
    #[arg(long, global = true, default_value = "records")]
    format: String,

    /// E-class size bound
    #[arg(long, global = true, default_value_t = 20_000)]
    max_class: usize,

    /// Degree headroom for E-classes of degree-changing systems
    #[arg(long, global = true, default_value_t = 0)]
    max_degree_delta: usize,

    /// Normalization depth bound
    #[arg(long, global = true, default_value_t = 64)]
    max_depth: usize,

    /// Candidate bound for searches
    #[arg(long, global = true, default_value_t = 10_000)]
    max_candidates: usize,

    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the presentation and echo its canonical form
    Parse,
    /// Normalize a word (space-separated generator names, `1` for empty)
    Normalize(WordArgs),
    /// Print the E-class of a word
    Eclass(EclassArgs),
    /// Check the termination order against the rules modulo E
    Orders,
    /// List branchings and optionally decide their confluence modulo
    Branchings(BranchingsArgs),
    /// Run completion modulo E (or plain Knuth-Bendix)
    Complete(CompleteArgs),
    /// Emit the coherent completion: one square per critical branching
    Cohere,
    /// Quotient the coherent completion to globular 3-cells
    Quotient,
    /// Empirical Newman-modulo check on pseudo-random words
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct WordArgs {
    /// The word, one generator name per argument
    word: Vec<String>,
    /// Print the full step list
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EclassArgs {
    word: Vec<String>,
    /// Also print a witness path per member
    #[arg(long)]
    paths: bool,
}

#[derive(Args)]
struct BranchingsArgs {
    /// Restrict to critical branchings (currently the only enumeration)
    #[arg(long)]
    critical: bool,
    /// Decide confluence modulo: huet, jk, jk-coherence
    #[arg(long)]
    check: Option<String>,
    /// Which family: s-vs-r or s-vs-e
    #[arg(long, default_value = "s-vs-r")]
    pairs: String,
}

#[derive(Args)]
struct CompleteArgs {
    /// er, ere or plain
    #[arg(long, default_value = "ere")]
    variant: String,
    #[arg(long, default_value_t = 64)]
    max_rules: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Print the inference-event trace
    #[arg(long)]
    trace: bool,
    /// Write the completed presentation here instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 8)]
    max_degree: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("remo: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Canonical display of a word: for commutation systems the letters are
/// sorted greatest-precedence first, so every class member prints alike.
fn display(p: &PolygraphModulo, w: &Word) -> String {
    if !p.e_rules.is_empty() && p.e_is_commutation() {
        p.display_word(&order::canonical_desc(p, w))
    } else {
        p.display_word(w)
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let input = cli.input.clone().ok_or("missing --input <file>")?;
    let text = std::fs::read_to_string(&input).map_err(|e| format!("{input}: {e}"))?;
    let mut poly = parse_presentation(&text).map_err(|e| format!("{input}: {e}"))?;
    if let Some(m) = &cli.mode {
        poly.mode = Mode::parse(m).ok_or_else(|| format!("unknown mode {m}"))?;
    }
    if let Some(o) = &cli.order {
        poly.order.kind = match o.as_str() {
            "deglex" => OrderKind::Deglex,
            "cdeglex" => OrderKind::CanonicalDeglex,
            other => return Err(format!("unknown order {other}")),
        };
    }
    let format =
        OutputFormat::parse(&cli.format).ok_or_else(|| format!("unknown format {}", cli.format))?;
    let bounds = Bounds {
        max_class_size: cli.max_class,
        max_degree_delta: cli.max_degree_delta,
        max_depth: cli.max_depth,
        max_candidates: cli.max_candidates,
    };

    let mut report = Report::new();
    let digest = {
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    };
    let command_name = match &cli.command {
        Command::Parse => "parse",
        Command::Normalize(_) => "normalize",
        Command::Eclass(_) => "eclass",
        Command::Orders => "orders",
        Command::Branchings(_) => "branchings",
        Command::Complete(_) => "complete",
        Command::Cohere => "cohere",
        Command::Quotient => "quotient",
        Command::Fuzz(_) => "fuzz",
    };
    report.add(
        Block::new()
            .push("tool", "remo")
            .push("version", env!("CARGO_PKG_VERSION"))
            .push("command", command_name)
            .push("input", &input)
            .push("digest", digest)
            .push("mode", poly.mode.as_str())
            .push("order", poly.order.kind.as_str())
            .push("max-class", cli.max_class.to_string())
            .push("max-degree-delta", cli.max_degree_delta.to_string())
            .push("max-depth", cli.max_depth.to_string())
            .push("max-candidates", cli.max_candidates.to_string())
            .push("seed", cli.seed.to_string()),
    );

    let session = Session::new(&poly, bounds.clone());
    let mut exit = ExitCode::SUCCESS;
    let mut trailer: Option<String> = None;

    match &cli.command {
        Command::Parse => {
            report.add(
                Block::new()
                    .push("generators", poly.generators.len().to_string())
                    .push("primary-rules", poly.r_rules.len().to_string())
                    .push("modulo-rules", poly.e_rules.len().to_string()),
            );
            trailer = Some(serialize_presentation(&poly));
        }
        Command::Normalize(args) => {
            let w = parse_word(&poly, &args.word.join(" ")).map_err(|e| e.to_string())?;
            let r = rewrite::normalize(&session, &w).map_err(|e| e.to_string())?;
            let mut b = Block::new()
                .push("word", poly.display_word(&w))
                .push("normal-form", display(&poly, &r.normal_form))
                .push("representative", poly.display_word(&r.normal_form))
                .push("steps", r.path.size(&poly).to_string())
                .push(
                    "status",
                    match r.status {
                        NormalizeStatus::Complete => "complete",
                        NormalizeStatus::DepthExceeded => "depth-exceeded",
                    },
                );
            if args.trace {
                b = b.push("trace", r.path.display(&poly));
            }
            report.add(b);
            if r.status == NormalizeStatus::DepthExceeded {
                exit = ExitCode::from(1);
            }
        }
        Command::Eclass(args) => {
            let w = parse_word(&poly, &args.word.join(" ")).map_err(|e| e.to_string())?;
            let class = session.e_class(&w);
            report.add(
                Block::new()
                    .push("word", poly.display_word(&w))
                    .push("size", class.members.len().to_string())
                    .push("complete", class.complete.to_string()),
            );
            for m in &class.members {
                let mut b = Block::new().push("member", poly.display_word(m));
                if args.paths {
                    let path = class.witness(m).expect("member has witness");
                    b = b.push("path", path.display(&poly));
                }
                report.add(b);
            }
        }
        Command::Orders => {
            let o = order::order_for(&poly.order, &poly).map_err(|e| e.to_string())?;
            let rep = order::check_compatibility(o.as_ref(), &poly, &bounds);
            let mut b = Block::new().push("order", rep.order).push(
                "verdict",
                match &rep.verdict {
                    Compatibility::Compatible => "compatible",
                    Compatibility::Incompatible { .. } => "incompatible",
                    Compatibility::Inconclusive { .. } => "inconclusive",
                },
            );
            match &rep.verdict {
                Compatibility::Incompatible { rule, witness } => {
                    b = b
                        .push("rule", rule)
                        .push("witness-left", poly.display_word(&witness.0))
                        .push("witness-right", poly.display_word(&witness.1));
                    exit = ExitCode::from(1);
                }
                Compatibility::Inconclusive { rule } => {
                    b = b.push("rule", rule);
                    exit = ExitCode::from(1);
                }
                Compatibility::Compatible => {}
            }
            report.add(b.push("rules-checked", rep.rules_checked.to_string()));
        }
        Command::Branchings(args) => {
            let kind = match args.pairs.as_str() {
                "s-vs-r" => PairKind::SvsR,
                "s-vs-e" => PairKind::SvsE,
                other => return Err(format!("unknown pair kind {other}")),
            };
            let variant = match &args.check {
                None => None,
                Some(v) => Some(
                    ConfluenceVariant::parse(v)
                        .ok_or_else(|| format!("unknown check variant {v}"))?,
                ),
            };
            let rep = branching::critical_branchings(&session, kind);
            report.add(
                Block::new()
                    .push("critical-branchings", rep.branchings.len().to_string())
                    .push("incomplete", rep.incomplete.to_string()),
            );
            for c in &rep.branchings {
                let b = c.branching(&poly);
                let kind_tag = branching::classify_local(&poly, &b)
                    .map(|k| match k {
                        branching::BranchingKind::Aspherical => "aspherical",
                        branching::BranchingKind::Peiffer => "peiffer",
                        branching::BranchingKind::PeifferModulo => "peiffer-modulo",
                        branching::BranchingKind::Overlap => "overlap",
                        branching::BranchingKind::OverlapModulo => "overlap-modulo",
                    })
                    .unwrap_or("non-local");
                let mut blk = Block::new()
                    .push("source", poly.display_word(&c.source))
                    .push("class", poly.display_word(&c.class_key))
                    .push("kind", kind_tag)
                    .push("rules", format!("{} {}", c.rule_ids.0, c.rule_ids.1));
                if let CriticalLeg::Modulo(e) = &c.leg {
                    blk = blk.push("modulo-step", e.display(&poly));
                }
                if let Some(v) = variant {
                    let cw = branching::check_confluence_modulo(&session, &b, v);
                    blk = blk.push(
                        "verdict",
                        match &cw.verdict {
                            Verdict::Confluent => "confluent".to_string(),
                            Verdict::NotConfluent(a, c) => format!(
                                "not-confluent {} | {}",
                                poly.display_word(a),
                                poly.display_word(c)
                            ),
                            Verdict::Unknown => "unknown".to_string(),
                        },
                    );
                    if cw.verdict == Verdict::Confluent {
                        blk = blk
                            .push("top", b.f.then(&poly, &cw.f_ext).unwrap().display(&poly))
                            .push("bottom", b.g.then(&poly, &cw.g_ext).unwrap().display(&poly))
                            .push("join", cw.e_join.display(&poly));
                    }
                }
                report.add(blk);
            }
        }
        Command::Complete(args) => {
            let variant = CompletionVariant::parse(&args.variant)
                .ok_or_else(|| format!("unknown completion variant {}", args.variant))?;
            let o = order::order_for(&poly.order, &poly).map_err(|e| e.to_string())?;
            let limits = Limits {
                max_rules: args.max_rules,
                max_iterations: args.max_iterations,
            };
            let result = completion::complete(&poly, o.as_ref(), variant, limits, &bounds)
                .map_err(|e| e.to_string())?;
            report.add(
                Block::new()
                    .push("variant", variant.as_str())
                    .push(
                        "status",
                        match result.status {
                            CompletionStatus::Success => "success",
                            CompletionStatus::LimitReached => "limit-reached",
                            CompletionStatus::Unorientable => "unorientable",
                        },
                    )
                    .push("added-rules", result.added.len().to_string()),
            );
            for r in &result.added {
                report.add(Block::new().push(
                    "added",
                    format!(
                        "{}: {} => {}",
                        r.id,
                        display(&result.completed, &r.lhs),
                        display(&result.completed, &r.rhs)
                    ),
                ));
            }
            if let Some((l, r)) = &result.blocked {
                report.add(
                    Block::new()
                        .push("unorientable-left", poly.display_word(l))
                        .push("unorientable-right", poly.display_word(r)),
                );
            }
            if args.trace {
                for ev in &result.trace {
                    let cp = &result.completed;
                    let blk = match ev {
                        completion::CompletionEvent::BranchingProcessed { source } => Block::new()
                            .push("event", "branching-processed")
                            .push("source", cp.display_word(source)),
                        completion::CompletionEvent::AddConsequence { left, right } => Block::new()
                            .push("event", "add-consequence")
                            .push("left", cp.display_word(left))
                            .push("right", cp.display_word(right)),
                        completion::CompletionEvent::SimplifyEquation { left, right } => {
                            Block::new()
                                .push("event", "simplify-equation")
                                .push("left", cp.display_word(left))
                                .push("right", cp.display_word(right))
                        }
                        completion::CompletionEvent::DeleteEquation { left, right } => Block::new()
                            .push("event", "delete-equation")
                            .push("left", cp.display_word(left))
                            .push("right", cp.display_word(right)),
                        completion::CompletionEvent::Orient { lhs, rhs } => Block::new()
                            .push("event", "orient")
                            .push("lhs", cp.display_word(lhs))
                            .push("rhs", cp.display_word(rhs)),
                        completion::CompletionEvent::NewRule { id, lhs, rhs } => Block::new()
                            .push("event", "new-rule")
                            .push("id", id)
                            .push("lhs", cp.display_word(lhs))
                            .push("rhs", cp.display_word(rhs)),
                    };
                    report.add(blk);
                }
            }
            if result.status == CompletionStatus::Success {
                let serialized = serialize_presentation(&result.completed);
                match &args.out {
                    Some(path) => std::fs::write(path, serialized).map_err(|e| e.to_string())?,
                    None => trailer = Some(serialized),
                }
            } else {
                exit = ExitCode::from(1);
            }
        }
        Command::Cohere => match coherence::coherent_completion(&session) {
            Err(e) => {
                report.add(Block::new().push("error", e.to_string()));
                exit = ExitCode::from(1);
            }
            Ok(cells) => {
                report.add(Block::new().push("cells", cells.len().to_string()));
                for c in &cells {
                    report.add(
                        Block::new()
                            .push("label", &c.label)
                            .push("origin", c.origin.as_str())
                            .push("source", poly.display_word(&c.top.source))
                            .push("top", c.top.display(&poly))
                            .push("left", c.left.display(&poly))
                            .push("bottom", c.bottom.display(&poly))
                            .push("right", c.right.display(&poly)),
                    );
                }
            }
        },
        Command::Quotient => {
            let out = coherence::coherent_completion(&session)
                .and_then(|gamma| coherence::quotient_globular(&session, &gamma));
            match out {
                Err(e) => {
                    report.add(Block::new().push("error", e.to_string()));
                    exit = ExitCode::from(1);
                }
                Ok(g) => {
                    report.add(
                        Block::new()
                            .push("generators", g.generators.join(" "))
                            .push("congruence-rules", g.congruence.len().to_string())
                            .push("class-rules", g.class_rules.len().to_string())
                            .push("cells", g.cells3.len().to_string()),
                    );
                    for r in &g.class_rules {
                        report.add(Block::new().push(
                            "class-rule",
                            format!(
                                "{}: {} => {}",
                                r.id,
                                poly.display_word(&r.source),
                                poly.display_word(&r.target)
                            ),
                        ));
                    }
                    for c in &g.cells3 {
                        report.add(
                            Block::new()
                                .push("cell3", "")
                                .push("source-path", c.source_2path.join(" . "))
                                .push("target-path", c.target_2path.join(" . "))
                                .push("source-class", poly.display_word(&c.source_class))
                                .push("target-class", poly.display_word(&c.target_class)),
                        );
                    }
                }
            }
        }
        Command::Fuzz(args) => {
            let r = coherence::newman_fuzz(&session, args.samples, args.max_degree, cli.seed);
            let mut b = Block::new()
                .push("samples", r.samples.to_string())
                .push("branchings-checked", r.branchings_checked.to_string())
                .push("confluence-failures", r.confluence_failures.to_string())
                .push("nf-failures", r.nf_failures.to_string())
                .push("unknowns", r.unknowns.to_string());
            if let Some(f) = &r.first_failure {
                b = b.push("first-failure", f);
                exit = ExitCode::from(1);
            }
            report.add(b);
        }
    }

    print!("{}", report.render(format));
    if let Some(t) = trailer {
        println!();
        print!("{t}");
    }
    Ok(exit)
}
