//! Mode-aware step enumeration, normalization, irreducibility and the
//! E-normalization check.
//!
//! A step of the polygraph modulo is an [`SStep`]: E-steps, one primary
//! step, E-steps. In modes ER and ERE the leading E-steps realize matching
//! through the E-class; trailing E is kept lazy (steps end at the primary
//! step's target) and E-joins happen at comparison points instead, so that
//! the infinitely many E-continuations never have to be enumerated.

use crate::eclass::Session;
use crate::presentation::{Mode, Path, RewriteStep, RuleRef, SStep, Word};
use std::collections::HashMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RewriteError {
    #[error("E-class of {0} exceeded its size bound; enumeration incomplete")]
    ClassOverflow(String),
}

/// Plain primary redexes of `w`, ordered by (position, rule index).
fn plain_redexes(session: &Session, w: &Word) -> Vec<RewriteStep> {
    let p = session.p;
    let mut out = Vec::new();
    for pos in 0..=w.degree() {
        for (i, rule) in p.r_rules.iter().enumerate() {
            if w.has_factor_at(&rule.lhs, pos) {
                out.push(RewriteStep::forward(
                    w.slice(0, pos),
                    RuleRef::R(i),
                    w.slice(pos + rule.lhs.degree(), w.degree()),
                ));
            }
        }
    }
    out
}

/// All S-steps out of `w` for the presentation's mode, in deterministic
/// order: class member (deglex ascending), then position, then rule index.
/// `limit` caps the number of steps materialized.
pub fn enumerate_steps_limited(
    session: &Session,
    w: &Word,
    limit: usize,
) -> Result<Vec<SStep>, RewriteError> {
    let p = session.p;
    match p.mode {
        Mode::R | Mode::Re => {
            // RE: any E-continuation after the primary step is legal; the
            // canonical step ends at the primary target (lazy e2)
            Ok(plain_redexes(session, w)
                .into_iter()
                .take(limit)
                .map(SStep::plain)
                .collect())
        }
        Mode::Er | Mode::Ere => {
            let class = session.e_class(w);
            if !class.complete {
                return Err(RewriteError::ClassOverflow(p.display_word(w)));
            }
            let mut out = Vec::new();
            for member in &class.members {
                if out.len() >= limit {
                    break;
                }
                let redexes = plain_redexes(session, member);
                if redexes.is_empty() {
                    continue;
                }
                let witness = class.witness(member).expect("member has witness");
                for r in redexes {
                    if out.len() >= limit {
                        break;
                    }
                    out.push(SStep {
                        e1: witness.steps.clone(),
                        r,
                        e2: Vec::new(),
                    });
                }
            }
            Ok(out)
        }
    }
}

pub fn enumerate_steps(session: &Session, w: &Word) -> Result<Vec<SStep>, RewriteError> {
    enumerate_steps_limited(session, w, usize::MAX)
}

/// The first step in enumeration order, without materializing the rest.
pub fn first_step(session: &Session, w: &Word) -> Result<Option<SStep>, RewriteError> {
    Ok(enumerate_steps_limited(session, w, 1)?.into_iter().next())
}

/// How a normalization run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeStatus {
    Complete,
    DepthExceeded,
}

#[derive(Debug, Clone)]
pub struct NormalizeResult {
    pub normal_form: Word,
    pub path: Path,
    pub status: NormalizeStatus,
}

/// Deterministic normalization: repeatedly apply the first enumerated step.
pub fn normalize(session: &Session, w: &Word) -> Result<NormalizeResult, RewriteError> {
    let p = session.p;
    let mut at = w.clone();
    let mut steps = Vec::new();
    for _ in 0..session.bounds.max_depth {
        let Some(step) = first_step(session, &at)? else {
            return Ok(NormalizeResult {
                normal_form: at.clone(),
                path: Path::new(w.clone(), steps),
                status: NormalizeStatus::Complete,
            });
        };
        steps.extend(step.e1.iter().cloned());
        steps.push(step.r.clone());
        at = step.r.target(p);
    }
    Ok(NormalizeResult {
        normal_form: at,
        path: Path::new(w.clone(), steps),
        status: NormalizeStatus::DepthExceeded,
    })
}

/// Normal-form word only, memoized in the session along the whole chain.
pub fn nf_word(session: &Session, w: &Word) -> Result<Word, RewriteError> {
    let p = session.p;
    let mut chain = Vec::new();
    let mut at = w.clone();
    let nf = loop {
        if let Some(nf) = session.nf_cache_get(&at) {
            break nf;
        }
        if chain.len() > session.bounds.max_depth {
            return Ok(at);
        }
        match first_step(session, &at)? {
            None => break at.clone(),
            Some(step) => {
                chain.push(at.clone());
                at = step.r.target(p);
            }
        }
    };
    for word in chain {
        session.nf_cache_put(word, nf.clone());
    }
    session.nf_cache_put(at, nf.clone());
    Ok(nf)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Irreducibility {
    Yes,
    No(Box<SStep>),
    Unknown,
}

pub fn is_irreducible(session: &Session, w: &Word) -> Irreducibility {
    match enumerate_steps(session, w) {
        Ok(steps) => match steps.into_iter().next() {
            None => Irreducibility::Yes,
            Some(s) => Irreducibility::No(Box::new(s)),
        },
        Err(_) => Irreducibility::Unknown,
    }
}

/// All S-normal forms reachable from `w` by any step choices, each with one
/// witnessing path; bounded by `max_candidates` visited words.
pub fn reachable_normal_forms(
    session: &Session,
    w: &Word,
) -> Result<(Vec<(Word, Path)>, bool), RewriteError> {
    let p = session.p;
    let mut parents: HashMap<Word, (Word, SStep)> = HashMap::new();
    let mut stack = vec![w.clone()];
    let mut seen = std::collections::HashSet::new();
    seen.insert(w.clone());
    let mut nfs = Vec::new();
    let mut complete = true;
    while let Some(cur) = stack.pop() {
        let steps = enumerate_steps(session, &cur)?;
        if steps.is_empty() {
            nfs.push(cur);
            continue;
        }
        for s in steps {
            let tgt = s.target(p);
            if seen.contains(&tgt) {
                continue;
            }
            if seen.len() >= session.bounds.max_candidates {
                complete = false;
                continue;
            }
            seen.insert(tgt.clone());
            parents.insert(tgt.clone(), (cur.clone(), s));
            stack.push(tgt);
        }
    }
    nfs.sort_by(|a, b| session.deglex_cmp(a, b));
    let mut out = Vec::new();
    for nf in nfs {
        let mut segs: Vec<SStep> = Vec::new();
        let mut at = nf.clone();
        while at != *w {
            let (prev, step) = parents.get(&at).expect("reachable word has parent");
            segs.push(step.clone());
            at = prev.clone();
        }
        segs.reverse();
        let mut steps = Vec::new();
        for s in segs {
            steps.extend(s.e1.iter().cloned());
            steps.push(s.r.clone());
            steps.extend(s.e2.iter().cloned());
        }
        out.push((nf, Path::new(w.clone(), steps)));
    }
    Ok((out, complete))
}

/// Per-word verdict of the E-normalization check.
#[derive(Debug, Clone, PartialEq)]
pub enum ENormVerdict {
    Yes,
    /// No S-normal form of the word lies in Irr(E); carries the normal
    /// forms that were found.
    No(Vec<Word>),
    Unknown,
}

#[derive(Debug, Clone)]
pub struct ENormReport {
    pub per_word: Vec<(Word, ENormVerdict)>,
    /// `Yes` iff every word verdict is `Yes`.
    pub all_normalizing: ENormVerdict,
}

/// Words to test: an explicit list or everything up to a degree.
pub enum TestSet {
    Words(Vec<Word>),
    DegreeAtMost(usize),
}

pub fn words_up_to_degree(n_generators: usize, max_degree: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for w in &layer {
            for g in 0..n_generators as u32 {
                let mut v = w.0.clone();
                v.push(g);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Checks that the test words each have some S-normal form lying in Irr(E)
/// (the oriented-E irreducibles).
///
/// In modes with trailing E (RE, ERE) a normal form counts through any
/// member of its E-class, since the trailing E-steps are legal
/// continuations of the last S-step; in modes R and ER the reached word
/// itself must be E-irreducible.
pub fn check_e_normalizing(session: &Session, test_set: &TestSet) -> ENormReport {
    let words = match test_set {
        TestSet::Words(w) => w.clone(),
        TestSet::DegreeAtMost(d) => words_up_to_degree(session.p.generators.len(), *d),
    };
    let through_class = session.p.mode.allows_trailing_e();
    let hits_irr = |nf: &Word| -> bool {
        if session.is_e_irreducible(nf) {
            return true;
        }
        through_class
            && session
                .e_class(nf)
                .members
                .iter()
                .any(|m| session.is_e_irreducible(m))
    };
    let mut per_word = Vec::new();
    let mut all = ENormVerdict::Yes;
    for w in words {
        let verdict = match reachable_normal_forms(session, &w) {
            Err(_) => ENormVerdict::Unknown,
            Ok((nfs, complete)) => {
                if nfs.iter().any(|(nf, _)| hits_irr(nf)) {
                    ENormVerdict::Yes
                } else if complete {
                    ENormVerdict::No(nfs.into_iter().map(|(nf, _)| nf).collect())
                } else {
                    ENormVerdict::Unknown
                }
            }
        };
        match (&all, &verdict) {
            (_, ENormVerdict::Yes) => {}
            (ENormVerdict::Yes, v) => all = v.clone(),
            _ => {}
        }
        per_word.push((w, verdict));
    }
    ENormReport {
        per_word,
        all_normalizing: all,
    }
}
