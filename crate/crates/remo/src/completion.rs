//! Knuth-Bendix-style completion modulo E, with the plain completion as a
//! degenerate case (commutations folded into the rule set, empty E).
//!
//! The loop seeds a queue with the critical branchings, normalizes both
//! legs of each, and when the normal forms are not E-equivalent orients the
//! pair by the termination order and adds the rule. Added rules never
//! replace existing ones; there is no interreduction. Every decision is
//! recorded as an inference-rule event so a trace can be replayed.

use crate::branching::{critical_branchings, CriticalBranching, PairKind};
use crate::eclass::{Bounds, Session};
use crate::order::{self, Compatibility, TerminationOrder};
use crate::presentation::{Mode, PolygraphModulo, Rule, RuleKind, Word};
use crate::rewrite::{self, NormalizeStatus};
use std::cmp::Ordering;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionVariant {
    Er,
    Ere,
    Plain,
}

impl CompletionVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "er" => Some(CompletionVariant::Er),
            "ere" => Some(CompletionVariant::Ere),
            "plain" => Some(CompletionVariant::Plain),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CompletionVariant::Er => "er",
            CompletionVariant::Ere => "ere",
            CompletionVariant::Plain => "plain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_rules: usize,
    pub max_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_rules: 64,
            max_iterations: 10_000,
        }
    }
}

/// Bachmair-Dershowitz-style inference events, in execution order.
#[derive(Debug, Clone, PartialEq)]
pub enum CompletionEvent {
    BranchingProcessed { source: Word },
    AddConsequence { left: Word, right: Word },
    SimplifyEquation { left: Word, right: Word },
    DeleteEquation { left: Word, right: Word },
    Orient { lhs: Word, rhs: Word },
    NewRule { id: String, lhs: Word, rhs: Word },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionStatus {
    Success,
    LimitReached,
    Unorientable,
}

#[derive(Debug)]
pub struct CompletionResult {
    pub completed: PolygraphModulo,
    pub added: Vec<Rule>,
    pub status: CompletionStatus,
    pub trace: Vec<CompletionEvent>,
    /// The unorientable pair, when status says so.
    pub blocked: Option<(Word, Word)>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum CompletionError {
    #[error("termination order is not compatible with the rules modulo E (rule {0})")]
    IncompatibleOrder(String),
    #[error("termination order check was inconclusive (rule {0})")]
    InconclusiveOrder(String),
}

fn dedup_key(c: &CriticalBranching) -> String {
    format!("{:?}|{}|{}", c.class_key, c.rule_ids.0, c.rule_ids.1)
}

/// Runs completion on a copy of the presentation set to the variant's mode.
///
/// The ERE variant replaces each added rule's right-hand side by its
/// E-normal form; the plain variant folds the modulo rules into R first and
/// always orients with the plain deglex order.
pub fn complete(
    p: &PolygraphModulo,
    order: &dyn TerminationOrder,
    variant: CompletionVariant,
    limits: Limits,
    bounds: &Bounds,
) -> Result<CompletionResult, CompletionError> {
    let mut poly = p.clone();
    let plain_order;
    let order: &dyn TerminationOrder = match variant {
        CompletionVariant::Er => {
            poly.mode = Mode::Er;
            order
        }
        CompletionVariant::Ere => {
            poly.mode = Mode::Ere;
            order
        }
        CompletionVariant::Plain => {
            for e in std::mem::take(&mut poly.e_rules) {
                poly.r_rules.push(Rule {
                    kind: RuleKind::Primary,
                    ..e
                });
            }
            poly.commutation_e = false;
            poly.mode = Mode::R;
            plain_order = order::order_by_name("deglex", &poly).expect("deglex always registered");
            plain_order.as_ref()
        }
    };

    match order::check_compatibility(order, &poly, bounds).verdict {
        Compatibility::Compatible => {}
        Compatibility::Incompatible { rule, .. } => {
            return Err(CompletionError::IncompatibleOrder(rule))
        }
        Compatibility::Inconclusive { rule } => {
            return Err(CompletionError::InconclusiveOrder(rule))
        }
    }

    let mut trace = Vec::new();
    let mut added: Vec<Rule> = Vec::new();
    let mut processed: BTreeSet<String> = BTreeSet::new();
    let mut status = CompletionStatus::Success;
    let mut blocked = None;
    let mut iterations = 0usize;

    'outer: loop {
        // enumerate against the current rule set and keep the unprocessed
        let queue: Vec<CriticalBranching> = {
            let session = Session::new(&poly, bounds.clone());
            critical_branchings(&session, PairKind::SvsR)
                .branchings
                .into_iter()
                .filter(|c| !processed.contains(&dedup_key(c)))
                .collect()
        };
        if queue.is_empty() {
            break;
        }
        for c in queue {
            iterations += 1;
            if iterations > limits.max_iterations {
                status = CompletionStatus::LimitReached;
                break 'outer;
            }
            processed.insert(dedup_key(&c));
            trace.push(CompletionEvent::BranchingProcessed {
                source: c.source.clone(),
            });

            let session = Session::new(&poly, bounds.clone());
            let b = c.branching(&poly);
            let v = b.f.target(&poly);
            let w = b.g.target(&poly);
            trace.push(CompletionEvent::AddConsequence {
                left: v.clone(),
                right: w.clone(),
            });

            let (Ok(nv), Ok(nw)) = (
                rewrite::normalize(&session, &v),
                rewrite::normalize(&session, &w),
            ) else {
                status = CompletionStatus::LimitReached;
                break 'outer;
            };
            if nv.status != NormalizeStatus::Complete || nw.status != NormalizeStatus::Complete {
                status = CompletionStatus::LimitReached;
                break 'outer;
            }
            if nv.normal_form != v || nw.normal_form != w {
                trace.push(CompletionEvent::SimplifyEquation {
                    left: nv.normal_form.clone(),
                    right: nw.normal_form.clone(),
                });
            }
            let (vh, wh) = (nv.normal_form, nw.normal_form);
            if session.e_equivalent(&vh, &wh).is_yes() {
                trace.push(CompletionEvent::DeleteEquation {
                    left: vh,
                    right: wh,
                });
                continue;
            }
            let (lhs, rhs) = match order.compare(&vh, &wh) {
                Ordering::Greater => (vh, wh),
                Ordering::Less => (wh, vh),
                Ordering::Equal => {
                    status = CompletionStatus::Unorientable;
                    blocked = Some((vh, wh));
                    break 'outer;
                }
            };
            let rhs = if variant == CompletionVariant::Ere {
                session.e_normal_form(&rhs).map(|(nf, _)| nf).unwrap_or(rhs)
            } else {
                rhs
            };
            let id = format!("d{}", added.len());
            trace.push(CompletionEvent::Orient {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            });
            trace.push(CompletionEvent::NewRule {
                id: id.clone(),
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            });
            let rule = Rule {
                id,
                kind: RuleKind::Primary,
                lhs,
                rhs,
            };
            poly.r_rules.push(rule.clone());
            added.push(rule);
            if added.len() >= limits.max_rules {
                status = CompletionStatus::LimitReached;
                break 'outer;
            }
            // the new rule changes the critical set; re-enumerate
            break;
        }
    }

    Ok(CompletionResult {
        completed: poly,
        added,
        status,
        trace,
        blocked,
    })
}

/// Classical completion: commutations become ordinary rules and E is empty.
pub fn complete_plain_kb(
    p: &PolygraphModulo,
    order: &dyn TerminationOrder,
    limits: Limits,
    bounds: &Bounds,
) -> Result<CompletionResult, CompletionError> {
    complete(p, order, CompletionVariant::Plain, limits, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{check_confluence_modulo, ConfluenceVariant, Verdict};
    use crate::parse::{parse_presentation, parse_word};
    use crate::test_fixtures::{COMPLETED_62, GOLDEN_62};

    fn run_ere(text: &str) -> CompletionResult {
        let p = parse_presentation(text).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        complete(
            &p,
            o.as_ref(),
            CompletionVariant::Ere,
            Limits::default(),
            &Bounds::default(),
        )
        .unwrap()
    }

    #[test]
    fn golden_completion_adds_exactly_d0() {
        let r = run_ere(GOLDEN_62);
        assert_eq!(r.status, CompletionStatus::Success);
        assert_eq!(r.added.len(), 1);
        let p = &r.completed;
        let d0 = &r.added[0];
        let s = Session::new(p, Bounds::default());
        // lhs/rhs classes match delta: x2x2x4 => x2x4
        assert!(s
            .e_class(&parse_word(p, "x2 x2 x4").unwrap())
            .contains(&d0.lhs));
        assert!(s
            .e_class(&parse_word(p, "x2 x4").unwrap())
            .contains(&d0.rhs));
    }

    #[test]
    fn completed_input_adds_nothing() {
        let r = run_ere(COMPLETED_62);
        assert_eq!(r.status, CompletionStatus::Success);
        assert!(r.added.is_empty());
    }

    #[test]
    fn success_implies_all_criticals_confluent() {
        let r = run_ere(GOLDEN_62);
        let p = &r.completed;
        let s = Session::new(p, Bounds::default());
        for c in critical_branchings(&s, PairKind::SvsR).branchings {
            let cw = check_confluence_modulo(&s, &c.branching(p), ConfluenceVariant::Huet);
            assert_eq!(cw.verdict, Verdict::Confluent);
        }
    }

    #[test]
    fn every_new_rule_orients_downward_and_follows_orient() {
        let r = run_ere(GOLDEN_62);
        let p = parse_presentation(GOLDEN_62).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let mut last_orient: Option<(Word, Word)> = None;
        for ev in &r.trace {
            match ev {
                CompletionEvent::Orient { lhs, rhs } => {
                    assert_eq!(o.compare(lhs, rhs), Ordering::Greater);
                    last_orient = Some((lhs.clone(), rhs.clone()));
                }
                CompletionEvent::NewRule { lhs, rhs, .. } => {
                    // ERE may descend to an E-variant of the oriented rhs
                    let (ol, or) = last_orient.clone().expect("Orient precedes NewRule");
                    assert_eq!(&ol, lhs);
                    let s = Session::new(&r.completed, Bounds::default());
                    assert!(s.e_class(&or).contains(rhs));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn trace_replay_reproduces_rule_set() {
        let r = run_ere(GOLDEN_62);
        let base = parse_presentation(GOLDEN_62).unwrap();
        let mut replayed = base.r_rules.clone();
        for ev in &r.trace {
            if let CompletionEvent::NewRule { id, lhs, rhs } = ev {
                replayed.push(Rule {
                    id: id.clone(),
                    kind: RuleKind::Primary,
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                });
            }
        }
        assert_eq!(replayed, r.completed.r_rules);
    }

    #[test]
    fn plain_kb_on_golden_hits_limit_with_epsilon_family() {
        let p = parse_presentation(GOLDEN_62).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let r = complete_plain_kb(
            &p,
            o.as_ref(),
            Limits {
                max_rules: 12,
                ..Default::default()
            },
            &Bounds::default(),
        )
        .unwrap();
        assert_eq!(r.status, CompletionStatus::LimitReached);
        let cp = &r.completed;
        let has = |l: &str, rr: &str| {
            let lw = parse_word(cp, l).unwrap();
            let rw = parse_word(cp, rr).unwrap();
            r.added.iter().any(|rule| rule.lhs == lw && rule.rhs == rw)
        };
        assert!(
            has("x4 x2 x2", "x4 x2"),
            "missing epsilon_0; added: {:?}",
            r.added
                .iter()
                .map(|x| (cp.display_word(&x.lhs), cp.display_word(&x.rhs)))
                .collect::<Vec<_>>()
        );
        assert!(has("x4 x3 x2 x2", "x4 x3 x2"), "missing epsilon_1");
        assert!(has("x4 x3 x3 x2 x2", "x4 x3 x3 x2"), "missing epsilon_2");
    }

    #[test]
    fn plain_kb_on_convergent_toy_succeeds_without_additions() {
        let p = parse_presentation("generators: a b\nmode: R\nrule r0: a b => a\n").unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let r = complete_plain_kb(&p, o.as_ref(), Limits::default(), &Bounds::default()).unwrap();
        assert_eq!(r.status, CompletionStatus::Success);
        assert!(r.added.is_empty());
    }

    #[test]
    fn plain_variant_equals_premerged_run() {
        // running plain on the modulo presentation equals running it on the
        // hand-merged rule set
        let p = parse_presentation(GOLDEN_62).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let limits = Limits {
            max_rules: 6,
            ..Default::default()
        };
        let a = complete(
            &p,
            o.as_ref(),
            CompletionVariant::Plain,
            limits,
            &Bounds::default(),
        )
        .unwrap();

        let mut merged = p.clone();
        for e in std::mem::take(&mut merged.e_rules) {
            merged.r_rules.push(Rule {
                kind: RuleKind::Primary,
                ..e
            });
        }
        merged.commutation_e = false;
        merged.mode = Mode::R;
        let o2 = order::order_by_name("deglex", &merged).unwrap();
        let b = complete(
            &merged,
            o2.as_ref(),
            CompletionVariant::Plain,
            limits,
            &Bounds::default(),
        )
        .unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.added, b.added);
    }

    #[test]
    fn incompatible_order_is_reported() {
        // reversing the precedence makes beta increase under cdeglex
        let text = "generators: x1 x2 x3 x4\norder: deglex x4 > x3 > x2 > x1\nmode: ERE\n\
                    rule beta: x1 x3 => x2 x4\nrule gamma: x1 x2 => x1\nmodulo commutation\n";
        let p = parse_presentation(text).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let err = complete(
            &p,
            o.as_ref(),
            CompletionVariant::Ere,
            Limits::default(),
            &Bounds::default(),
        )
        .unwrap_err();
        assert_eq!(err, CompletionError::IncompatibleOrder("beta".into()));
    }

    #[test]
    fn orientation_follows_the_order_on_equal_degrees() {
        // two-letter alphabet where the critical pair sides have equal
        // degree, so precedence alone decides the orientation
        let t1 = "generators: a b c\nmode: R\nrule r0: a b => c a\nrule r1: b c => c b\n";
        let p = parse_presentation(t1).unwrap();
        let o = order::order_for(&p.order, &p).unwrap();
        let r = complete(
            &p,
            o.as_ref(),
            CompletionVariant::Plain,
            Limits::default(),
            &Bounds::default(),
        );
        if let Ok(res) = r {
            for rule in &res.added {
                assert_eq!(o.compare(&rule.lhs, &rule.rhs), Ordering::Greater);
            }
        }
    }
}
