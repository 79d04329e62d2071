//! Termination orders and the compatibility check modulo E.
//!
//! Each order variant lives behind the [`TerminationOrder`] trait and is
//! registered by name, so the CLI can swap orders at runtime (`--order`).
//! Two variants are provided: plain degree-lexicographic, and deglex on
//! canonical representatives, which is invariant under commutation E and is
//! the default whenever the presentation carries `modulo commutation`.

use crate::eclass::{Bounds, Session};
use crate::presentation::{OrderKind, OrderSpec, PolygraphModulo, Word};
use std::cmp::Ordering;

/// A strict total word order used to orient rules.
pub trait TerminationOrder: Send + Sync {
    fn name(&self) -> &'static str;

    /// Greater means the first argument is heavier (rewrites toward Less).
    fn compare(&self, u: &Word, v: &Word) -> Ordering;

    /// Whether the comparison is unchanged when either side is replaced by
    /// an E-equivalent word (true for the canonical variant over
    /// commutations).
    fn e_invariant(&self) -> bool;
}

/// rank[letter] = position in the precedence list; 0 is the greatest.
fn ranks(precedence: &[u32]) -> Vec<usize> {
    let mut r = vec![0usize; precedence.len()];
    for (pos, &g) in precedence.iter().enumerate() {
        r[g as usize] = pos;
    }
    r
}

fn deglex_by_rank(rank: &[usize], u: &Word, v: &Word) -> Ordering {
    match u.degree().cmp(&v.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    for (&a, &b) in u.letters().iter().zip(v.letters()) {
        // smaller rank = greater letter
        match rank[b as usize].cmp(&rank[a as usize]) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// Degree first, then left-to-right by precedence.
pub struct Deglex {
    rank: Vec<usize>,
}

impl TerminationOrder for Deglex {
    fn name(&self) -> &'static str {
        "deglex"
    }

    fn compare(&self, u: &Word, v: &Word) -> Ordering {
        deglex_by_rank(&self.rank, u, v)
    }

    fn e_invariant(&self) -> bool {
        false
    }
}

/// Deglex on canonical representatives. The canonical form of a word sorts
/// its letters by descending precedence, so commutation-equivalent words
/// share it; this is the usual commutative monomial order.
pub struct CanonicalDeglex {
    rank: Vec<usize>,
}

impl CanonicalDeglex {
    pub fn canonical(&self, w: &Word) -> Word {
        let mut letters = w.letters().to_vec();
        letters.sort_by_key(|&l| self.rank[l as usize]);
        Word(letters)
    }
}

impl TerminationOrder for CanonicalDeglex {
    fn name(&self) -> &'static str {
        "cdeglex"
    }

    fn compare(&self, u: &Word, v: &Word) -> Ordering {
        deglex_by_rank(&self.rank, &self.canonical(u), &self.canonical(v))
    }

    fn e_invariant(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OrderError {
    #[error("unknown order {0}; registered orders: deglex, cdeglex")]
    Unknown(String),
    #[error("cdeglex requires every modulo rule to be a commutation")]
    NonCommutationE,
}

/// Builds the order registered under `name` for this presentation.
pub fn order_by_name(
    name: &str,
    p: &PolygraphModulo,
) -> Result<Box<dyn TerminationOrder>, OrderError> {
    let rank = ranks(&p.order.precedence);
    match name {
        "deglex" => Ok(Box::new(Deglex { rank })),
        "cdeglex" => {
            if !p.e_rules.is_empty() && !p.e_is_commutation() {
                return Err(OrderError::NonCommutationE);
            }
            Ok(Box::new(CanonicalDeglex { rank }))
        }
        other => Err(OrderError::Unknown(other.to_string())),
    }
}

/// The order the presentation itself declares.
pub fn order_for(
    spec: &OrderSpec,
    p: &PolygraphModulo,
) -> Result<Box<dyn TerminationOrder>, OrderError> {
    match spec.kind {
        OrderKind::Deglex => order_by_name("deglex", p),
        OrderKind::CanonicalDeglex => order_by_name("cdeglex", p),
    }
}

/// Sorted-by-descending-precedence form; used for canonical display of a
/// commutation class and as the cdeglex representative.
pub fn canonical_desc(p: &PolygraphModulo, w: &Word) -> Word {
    let rank = ranks(&p.order.precedence);
    let mut letters = w.letters().to_vec();
    letters.sort_by_key(|&l| rank[l as usize]);
    Word(letters)
}

/// Outcome of the compatibility check of an order with S modulo E.
#[derive(Debug, Clone, PartialEq)]
pub enum Compatibility {
    Compatible,
    /// A primary rule together with an E-variant pair that fails to decrease.
    Incompatible {
        rule: String,
        witness: (Word, Word),
    },
    /// A class enumeration hit its bound before the check could conclude.
    Inconclusive {
        rule: String,
    },
}

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub order: &'static str,
    pub verdict: Compatibility,
    pub rules_checked: usize,
}

/// Checks that every primary rule decreases the order on all E-variants of
/// its two sides. For an E-invariant order one comparison per rule suffices.
pub fn check_compatibility(
    order: &dyn TerminationOrder,
    p: &PolygraphModulo,
    bounds: &Bounds,
) -> CompatibilityReport {
    let session = Session::new(p, bounds.clone());
    let mut checked = 0;
    for rule in &p.r_rules {
        checked += 1;
        if order.e_invariant() || p.e_rules.is_empty() {
            if order.compare(&rule.lhs, &rule.rhs) != Ordering::Greater {
                return CompatibilityReport {
                    order: order.name(),
                    verdict: Compatibility::Incompatible {
                        rule: rule.id.clone(),
                        witness: (rule.lhs.clone(), rule.rhs.clone()),
                    },
                    rules_checked: checked,
                };
            }
            continue;
        }
        let lc = session.e_class(&rule.lhs);
        let rc = session.e_class(&rule.rhs);
        if !lc.complete || !rc.complete {
            return CompatibilityReport {
                order: order.name(),
                verdict: Compatibility::Inconclusive {
                    rule: rule.id.clone(),
                },
                rules_checked: checked,
            };
        }
        for l in &lc.members {
            for r in &rc.members {
                if order.compare(l, r) != Ordering::Greater {
                    return CompatibilityReport {
                        order: order.name(),
                        verdict: Compatibility::Incompatible {
                            rule: rule.id.clone(),
                            witness: (l.clone(), r.clone()),
                        },
                        rules_checked: checked,
                    };
                }
            }
        }
    }
    CompatibilityReport {
        order: order.name(),
        verdict: Compatibility::Compatible,
        rules_checked: checked,
    }
}
