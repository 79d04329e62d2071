//! Square cells witnessing confluence modulo, the biaction of E-paths on
//! them, coherent completion, acyclic-extension assembly, weak commutation
//! of normalization strategies, an empirical Newman-modulo fuzzer, and the
//! quotient to a globular coherent presentation of the presented monoid.

use crate::branching::{
    check_confluence_modulo, critical_branchings, ConfluenceVariant, PairKind, Verdict,
};
use crate::eclass::{EConvergence, Session};
use crate::order::{self, Compatibility};
use crate::presentation::{Path, PolygraphModulo, Word};
use crate::rewrite::{self, ENormVerdict, TestSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Where a square came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Confluence of a critical branching (f, g).
    AfG,
    /// Confluence of a critical branching (f, e).
    BfE,
    /// Chosen confluence of a critical branching of E itself.
    ConfE,
    /// Weak-commutation square of the two normalization strategies.
    NSigmaRho,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::AfG => "A",
            Origin::BfE => "B",
            Origin::ConfE => "confE",
            Origin::NSigmaRho => "N",
        }
    }
}

/// A confluence-modulo witness with boundary (top, left, bottom, right):
/// horizontal edges are S-paths, vertical edges are E-paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareCell {
    pub top: Path,
    pub left: Path,
    pub bottom: Path,
    pub right: Path,
    pub label: String,
    pub origin: Origin,
}

impl SquareCell {
    /// Corner chaining plus the rule-family constraints on the edges.
    pub fn validate(&self, p: &PolygraphModulo) -> bool {
        use crate::presentation::{validate_path, PathCheck};
        self.top.source == self.left.source
            && self.top.target(p) == self.right.source
            && self.left.target(p) == self.bottom.source
            && self.bottom.target(p) == self.right.target(p)
            && self.left.uses_only_e(p)
            && self.right.uses_only_e(p)
            && [&self.top, &self.left, &self.bottom, &self.right]
                .iter()
                .all(|path| validate_path(p, path) == PathCheck::Ok)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum CoherenceError {
    #[error("system is not confluent modulo E; unresolved branchings at: {0}")]
    NonConfluentSystem(String),
    #[error("oriented E polygraph is not convergent")]
    NotConvergentE,
}

/// One square per critical branching, filled by the confluence search:
/// A-cells for the (f, g) family and B-cells for the (f, e) family.
pub fn coherent_completion(session: &Session) -> Result<Vec<SquareCell>, CoherenceError> {
    let p = session.p;
    let mut cells = Vec::new();
    let mut failures = Vec::new();

    let svr = critical_branchings(session, PairKind::SvsR);
    for (i, c) in svr.branchings.iter().enumerate() {
        let b = c.branching(p);
        let cw = check_confluence_modulo(session, &b, ConfluenceVariant::Huet);
        if cw.verdict != Verdict::Confluent {
            failures.push(p.display_word(&c.source));
            continue;
        }
        cells.push(SquareCell {
            top: b.f.then(p, &cw.f_ext).expect("witness chains"),
            left: b.e.clone(),
            bottom: b.g.then(p, &cw.g_ext).expect("witness chains"),
            right: cw.e_join,
            label: format!("A{i}"),
            origin: Origin::AfG,
        });
    }

    let sve = critical_branchings(session, PairKind::SvsE);
    for (i, c) in sve.branchings.iter().enumerate() {
        let b = c.branching(p);
        let cw = check_confluence_modulo(session, &b, ConfluenceVariant::JkCoherence);
        if cw.verdict != Verdict::Confluent {
            failures.push(p.display_word(&c.source));
            continue;
        }
        cells.push(SquareCell {
            top: b.f.then(p, &cw.f_ext).expect("witness chains"),
            left: b.e.clone(),
            bottom: b.g.then(p, &cw.g_ext).expect("witness chains"),
            right: cw.e_join,
            label: format!("B{i}"),
            origin: Origin::BfE,
        });
    }

    if !failures.is_empty() {
        return Err(CoherenceError::NonConfluentSystem(failures.join(", ")));
    }
    Ok(cells)
}

/// conf(E) as squares: identity horizontal edges, the two normalizing legs
/// as vertical edges.
pub fn conf_e_cells(session: &Session) -> Result<Vec<SquareCell>, CoherenceError> {
    let p = session.p;
    let confs = session
        .e_critical_branchings()
        .map_err(|_| CoherenceError::NotConvergentE)?;
    Ok(confs
        .into_iter()
        .enumerate()
        .map(|(i, c)| SquareCell {
            top: Path::identity(c.source.clone()),
            left: c.left.clone(),
            bottom: Path::identity(c.left.target(p)),
            right: c.right,
            label: format!("E{i}"),
            origin: Origin::ConfE,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiactionCondition {
    TargetOfE1,
    SourceOfE2,
    TopStaysInS,
    BottomStaysInS,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("biaction precondition violated: {0:?}")]
pub struct BiactionError(pub BiactionCondition);

/// The action `^{e1}_{e2} A`: extend the top by `e1`, the left column by
/// `e1 · e · e2`, and the bottom by `e2^-`; the right edge is unchanged.
pub fn biaction(
    p: &PolygraphModulo,
    e1: &Path,
    e2: &Path,
    a: &SquareCell,
) -> Result<SquareCell, BiactionError> {
    if !e1.uses_only_e(p) || e1.target(p) != a.top.source {
        return Err(BiactionError(BiactionCondition::TargetOfE1));
    }
    if !e2.uses_only_e(p) || e2.source != a.left.target(p) {
        return Err(BiactionError(BiactionCondition::SourceOfE2));
    }
    if !e1.is_identity() && !(p.mode.allows_leading_e() && a.top.size(p) >= 1) {
        return Err(BiactionError(BiactionCondition::TopStaysInS));
    }
    if !e2.is_identity() && !(p.mode.allows_leading_e() && a.bottom.size(p) >= 1) {
        return Err(BiactionError(BiactionCondition::BottomStaysInS));
    }
    let top = e1.then(p, &a.top).expect("condition i");
    let left = e1
        .then(p, &a.left)
        .and_then(|x| x.then(p, e2))
        .expect("condition ii");
    let e2inv = e2.inverse_e(p).expect("e2 is an E-path");
    let bottom = e2inv.then(p, &a.bottom).expect("condition ii");
    Ok(SquareCell {
        top,
        left,
        bottom,
        right: a.right.clone(),
        label: a.label.clone(),
        origin: a.origin,
    })
}

/// Stacks two squares vertically: the bottom of `a` must equal the top of
/// `b`; left and right columns concatenate.
pub fn vertical_compose(p: &PolygraphModulo, a: &SquareCell, b: &SquareCell) -> Option<SquareCell> {
    if a.bottom != b.top {
        return None;
    }
    Some(SquareCell {
        top: a.top.clone(),
        left: a.left.then(p, &b.left)?,
        bottom: b.bottom.clone(),
        right: a.right.then(p, &b.right)?,
        label: format!("{}*{}", a.label, b.label),
        origin: a.origin,
    })
}

/// Pastes two squares side by side: the right column of `a` must equal the
/// left column of `b`; top and bottom rows concatenate.
pub fn horizontal_compose(
    p: &PolygraphModulo,
    a: &SquareCell,
    b: &SquareCell,
) -> Option<SquareCell> {
    if a.right != b.left {
        return None;
    }
    Some(SquareCell {
        top: a.top.then(p, &b.top)?,
        left: a.left.clone(),
        bottom: a.bottom.then(p, &b.bottom)?,
        right: b.right.clone(),
        label: format!("{}*{}", a.label, b.label),
        origin: a.origin,
    })
}

/// Three-valued verdicts for the theorem hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub enum TriVerdict {
    Holds,
    Fails(String),
    Unknown(String),
}

impl TriVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            TriVerdict::Holds => "holds",
            TriVerdict::Fails(_) => "fails",
            TriVerdict::Unknown(_) => "unknown",
        }
    }
}

/// The infinite Peiffer square family ships as a descriptor, never
/// enumerated: only its existence matters for the extension.
#[derive(Debug, Clone)]
pub struct PeifferSchema {
    pub description: &'static str,
}

impl Default for PeifferSchema {
    fn default() -> Self {
        PeifferSchema {
            description: "squares commuting one S-step past one E-step with disjoint supports, \
                          closed under all whisker contexts",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checklist {
    pub terminating: TriVerdict,
    pub gamma_confluent: TriVerdict,
    pub e_convergent: TriVerdict,
    pub e_normalizing: TriVerdict,
}

/// The pieces of the acyclic square extension together with the theorem
/// hypotheses that make it acyclic. Acyclicity itself is theorem-backed,
/// never decided here; `conditional` flags any unknown hypothesis.
pub struct ExtensionBundle {
    pub gamma: Vec<SquareCell>,
    pub conf_e: Vec<SquareCell>,
    pub peiffer: PeifferSchema,
    pub n_cells: Option<Vec<SquareCell>>,
    pub checklist: Checklist,
    pub conditional: bool,
}

/// Assembles Gamma + conf(E) + Peiffer (+ optional N(sigma, rho)) and
/// evaluates the hypothesis checklist over words up to `test_degree`.
pub fn assemble_acyclic_extension(session: &Session, test_degree: usize) -> ExtensionBundle {
    let p = session.p;
    let terminating = match order::order_for(&p.order, p) {
        Err(e) => TriVerdict::Unknown(e.to_string()),
        Ok(o) => match order::check_compatibility(o.as_ref(), p, &session.bounds).verdict {
            Compatibility::Compatible => TriVerdict::Holds,
            Compatibility::Incompatible { rule, .. } => TriVerdict::Fails(format!("rule {rule}")),
            Compatibility::Inconclusive { rule } => TriVerdict::Unknown(format!("rule {rule}")),
        },
    };
    let (gamma, gamma_confluent) = match coherent_completion(session) {
        Ok(cells) => (cells, TriVerdict::Holds),
        Err(e) => (Vec::new(), TriVerdict::Fails(e.to_string())),
    };
    let (conf_e, e_convergent) = match session.e_convergence() {
        EConvergence::Convergent => (conf_e_cells(session).unwrap_or_default(), TriVerdict::Holds),
        EConvergence::NotConvergent(w) => (Vec::new(), TriVerdict::Fails(p.display_word(&w))),
        EConvergence::Unknown => (Vec::new(), TriVerdict::Unknown("bounded check".into())),
    };
    let norm_report = rewrite::check_e_normalizing(session, &TestSet::DegreeAtMost(test_degree));
    let mut n_cells = None;
    let e_normalizing = match &norm_report.all_normalizing {
        ENormVerdict::Yes => TriVerdict::Holds,
        other => {
            // fall back to weak commutation, which also suffices
            match check_weak_commutation(session, &TestSet::DegreeAtMost(test_degree)) {
                WeakCommutation::Commuting => TriVerdict::Holds,
                WeakCommutation::WeaklyCommuting(cells) => {
                    n_cells = Some(cells);
                    TriVerdict::Holds
                }
                _ => match other {
                    ENormVerdict::No(nfs) => TriVerdict::Fails(
                        nfs.first().map(|w| p.display_word(w)).unwrap_or_default(),
                    ),
                    _ => TriVerdict::Unknown("bounds".into()),
                },
            }
        }
    };
    let checklist = Checklist {
        terminating,
        gamma_confluent,
        e_convergent,
        e_normalizing,
    };
    let conditional = [
        &checklist.terminating,
        &checklist.gamma_confluent,
        &checklist.e_convergent,
        &checklist.e_normalizing,
    ]
    .iter()
    .any(|v| !matches!(v, TriVerdict::Holds));
    ExtensionBundle {
        gamma,
        conf_e,
        peiffer: PeifferSchema::default(),
        n_cells,
        checklist,
        conditional,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeakCommutation {
    Commuting,
    WeaklyCommuting(Vec<SquareCell>),
    Counterexample(Word),
    Unknown,
}

/// Bounded breadth-first search for an S-path between two words. In modes
/// with trailing E a path may end at any E-equivalent of the target; the
/// final E-steps are absorbed into the last S-step.
fn search_s_path(session: &Session, from: &Word, to: &Word) -> Option<Option<Path>> {
    use std::collections::{HashMap, VecDeque};
    let p = session.p;
    if from == to {
        return Some(Some(Path::identity(from.clone())));
    }
    let trailing = p.mode.allows_trailing_e();
    let mut parents: HashMap<Word, (Word, crate::presentation::SStep)> = HashMap::new();
    let mut q = VecDeque::new();
    let mut seen = HashSet::new();
    q.push_back(from.clone());
    seen.insert(from.clone());
    let mut complete = true;
    while let Some(cur) = q.pop_front() {
        let Ok(steps) = rewrite::enumerate_steps(session, &cur) else {
            complete = false;
            continue;
        };
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
            let e_tail = if tgt == *to {
                Some(Path::identity(tgt.clone()))
            } else if trailing {
                match session.e_equivalent(&tgt, to) {
                    crate::eclass::EquivResult::Yes(e) => Some(e),
                    _ => None,
                }
            } else {
                None
            };
            if let Some(tail) = e_tail {
                let mut steps_out: Vec<crate::presentation::RewriteStep> = tail.steps;
                let mut at = tgt.clone();
                while at != *from {
                    let (prev, st) = parents.get(&at).unwrap();
                    let mut chunk = st.e1.clone();
                    chunk.push(st.r.clone());
                    chunk.extend(st.e2.iter().cloned());
                    chunk.extend(steps_out);
                    steps_out = chunk;
                    at = prev.clone();
                }
                return Some(Some(Path::new(from.clone(), steps_out)));
            }
            q.push_back(tgt);
        }
    }
    if complete {
        Some(None)
    } else {
        None
    }
}

/// Checks weak commutation of the S-normalization strategy with the
/// oriented-E normalization over a test set, collecting N(sigma, rho)
/// squares when the strategies only weakly commute.
pub fn check_weak_commutation(session: &Session, test_set: &TestSet) -> WeakCommutation {
    let p = session.p;
    if p.e_rules.is_empty() {
        return WeakCommutation::Commuting;
    }
    let words = match test_set {
        TestSet::Words(w) => w.clone(),
        TestSet::DegreeAtMost(d) => rewrite::words_up_to_degree(p.generators.len(), *d),
    };
    let mut squares = Vec::new();
    let mut commuting = true;
    for u in words {
        let Ok(sigma) = rewrite::normalize(session, &u) else {
            return WeakCommutation::Unknown;
        };
        let Ok((tilde_u, rho_u)) = session.e_normal_form(&u) else {
            return WeakCommutation::Unknown;
        };
        let Ok((tilde_hat, rho_hat)) = session.e_normal_form(&sigma.normal_form) else {
            return WeakCommutation::Unknown;
        };
        // eta: an S-path from the E-normal form to rho(sigma(u))
        match search_s_path(session, &tilde_u, &tilde_hat) {
            None => return WeakCommutation::Unknown,
            Some(None) => return WeakCommutation::Counterexample(u),
            Some(Some(eta)) => {
                let Ok(hat_of_tilde) = rewrite::normalize(session, &tilde_u) else {
                    return WeakCommutation::Unknown;
                };
                let Ok((dnf2, _)) = session.e_normal_form(&hat_of_tilde.normal_form) else {
                    return WeakCommutation::Unknown;
                };
                if dnf2 != tilde_hat {
                    commuting = false;
                }
                squares.push(SquareCell {
                    top: sigma.path,
                    left: rho_u,
                    bottom: eta,
                    right: rho_hat,
                    label: format!("N_{}", p.display_word(&u)),
                    origin: Origin::NSigmaRho,
                });
            }
        }
    }
    if commuting {
        WeakCommutation::Commuting
    } else {
        WeakCommutation::WeaklyCommuting(squares)
    }
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub samples: usize,
    pub branchings_checked: usize,
    pub confluence_failures: usize,
    pub nf_failures: usize,
    pub unknowns: usize,
    pub first_failure: Option<String>,
}

/// Empirical Newman-modulo check: at pseudo-random words, every local
/// branching must be confluent modulo E, and the S-normal forms sampled
/// from all one-step departures of the word must be pairwise E-equivalent.
///
/// Per word, the branching list is the deterministic prefix of all
/// (S-step, S-step) and (S-step, E-step) pairs; a confluence failure is
/// certified by the full reachable-normal-form sweep before it is counted.
pub fn newman_fuzz(session: &Session, samples: usize, max_degree: usize, seed: u64) -> FuzzReport {
    let p = session.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport {
        samples,
        ..Default::default()
    };
    let n = p.generators.len() as u32;
    // caps keep the quadratic pair count per word in check; prefixes of the
    // deterministic enumeration keep reruns byte-identical
    let max_steps_per_word = 24usize;
    let max_pairs_per_word = 200usize;
    for _ in 0..samples {
        let degree = rng.gen_range(1..=max_degree.max(1));
        let letters: Vec<u32> = (0..degree).map(|_| rng.gen_range(0..n)).collect();
        let w = Word(letters);

        let Ok(steps) = rewrite::enumerate_steps_limited(session, &w, max_steps_per_word) else {
            report.unknowns += 1;
            continue;
        };

        // cheap verdicts first: deterministic normal forms of both targets
        let verdict_of = |b: &crate::branching::Branching, report: &mut FuzzReport| {
            let (tf, tg) = (b.f.target(p), b.g.target(p));
            match (
                rewrite::nf_word(session, &tf),
                rewrite::nf_word(session, &tg),
            ) {
                (Ok(a), Ok(c)) => match session.e_equivalent(&a, &c) {
                    crate::eclass::EquivResult::Yes(_) => {}
                    crate::eclass::EquivResult::Unknown => report.unknowns += 1,
                    crate::eclass::EquivResult::No => {
                        // certify through the full search before counting
                        let cw = check_confluence_modulo(session, b, ConfluenceVariant::Huet);
                        match cw.verdict {
                            Verdict::Confluent => {}
                            Verdict::Unknown => report.unknowns += 1,
                            Verdict::NotConfluent(a, c) => {
                                report.confluence_failures += 1;
                                report.first_failure.get_or_insert(format!(
                                    "branching at {} with normal forms {} / {}",
                                    p.display_word(&b.f.source),
                                    p.display_word(&a),
                                    p.display_word(&c)
                                ));
                            }
                        }
                    }
                },
                _ => report.unknowns += 1,
            }
        };

        let mut pairs = 0usize;
        'pairs: for i in 0..steps.len() {
            for j in i + 1..steps.len() {
                if pairs >= max_pairs_per_word {
                    break 'pairs;
                }
                pairs += 1;
                report.branchings_checked += 1;
                let b =
                    crate::branching::Branching::plain(steps[i].as_path(p), steps[j].as_path(p));
                verdict_of(&b, &mut report);
            }
        }
        'modulo: for s in &steps {
            for (estep, tgt) in session.e_neighbors(&w) {
                if pairs >= 2 * max_pairs_per_word {
                    break 'modulo;
                }
                pairs += 1;
                report.branchings_checked += 1;
                let e = Path::new(w.clone(), vec![estep]);
                let g = Path::identity(tgt);
                let b = crate::branching::Branching {
                    f: s.as_path(p),
                    e,
                    g,
                };
                verdict_of(&b, &mut report);
            }
        }

        // sampled normal forms: one per first-level departure plus the
        // deterministic one; all must land in a single E-class
        let mut nfs: Vec<Word> = Vec::new();
        if let Ok(nf) = rewrite::nf_word(session, &w) {
            nfs.push(nf);
        }
        for s in &steps {
            if let Ok(nf) = rewrite::nf_word(session, &s.target(p)) {
                nfs.push(nf);
            }
        }
        nfs.sort();
        nfs.dedup();
        for i in 0..nfs.len() {
            for j in i + 1..nfs.len() {
                match session.e_equivalent(&nfs[i], &nfs[j]) {
                    crate::eclass::EquivResult::Yes(_) => {}
                    crate::eclass::EquivResult::No => {
                        report.nf_failures += 1;
                        report.first_failure.get_or_insert(format!(
                            "word {} has non-equivalent normal forms {} / {}",
                            p.display_word(&w),
                            p.display_word(&nfs[i]),
                            p.display_word(&nfs[j])
                        ));
                    }
                    crate::eclass::EquivResult::Unknown => report.unknowns += 1,
                }
            }
        }
    }
    report
}

/// A 3-cell over the quotient monoid: two parallel sequences of quotient
/// rule applications between the same E-classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobularCell {
    pub source_2path: Vec<String>,
    pub target_2path: Vec<String>,
    pub source_class: Word,
    pub target_class: Word,
}

#[derive(Debug, Clone)]
pub struct ClassRule {
    pub id: String,
    pub source: Word,
    pub target: Word,
}

/// Globular coherent presentation of the quotient monoid: the congruence
/// layer (E), the rules over classes, and the quotiented 3-cells.
#[derive(Debug, Clone)]
pub struct GlobularPresentation {
    pub generators: Vec<String>,
    pub congruence: Vec<ClassRule>,
    pub class_rules: Vec<ClassRule>,
    pub cells3: Vec<GlobularCell>,
}

/// Quotients the square extension to globular data: endpoints become
/// E-normal forms, S-paths become their primary-rule sequences, B- and
/// conf(E)-origin squares collapse to identities and are omitted, squares
/// in one biaction orbit collapse to a single cell.
pub fn quotient_globular(
    session: &Session,
    gamma: &[SquareCell],
) -> Result<GlobularPresentation, CoherenceError> {
    let p = session.p;
    if session.e_convergence() != EConvergence::Convergent {
        return Err(CoherenceError::NotConvergentE);
    }
    let nf = |w: &Word| -> Result<Word, CoherenceError> {
        session
            .e_normal_form(w)
            .map(|(x, _)| x)
            .map_err(|_| CoherenceError::NotConvergentE)
    };
    let congruence = p
        .e_rules
        .iter()
        .map(|r| ClassRule {
            id: r.id.clone(),
            source: r.lhs.clone(),
            target: r.rhs.clone(),
        })
        .collect();
    let mut class_rules = Vec::new();
    for r in &p.r_rules {
        class_rules.push(ClassRule {
            id: r.id.clone(),
            source: nf(&r.lhs)?,
            target: nf(&r.rhs)?,
        });
    }
    let mut cells3 = Vec::new();
    let mut seen = HashSet::new();
    for sq in gamma {
        if sq.origin != Origin::AfG {
            continue;
        }
        let cell = GlobularCell {
            source_2path: sq.top.primary_rule_ids(p),
            target_2path: sq.bottom.primary_rule_ids(p),
            source_class: nf(&sq.top.source)?,
            target_class: nf(&sq.top.target(p))?,
        };
        let key = format!("{cell:?}");
        if seen.insert(key) {
            cells3.push(cell);
        }
    }
    Ok(GlobularPresentation {
        generators: p.generators.iter().map(|g| g.name.clone()).collect(),
        congruence,
        class_rules,
        cells3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eclass::Bounds;
    use crate::parse::{parse_presentation, parse_word};
    use crate::test_fixtures::{COMPLETED_62, GOLDEN_62, SQUIER_TOY};

    fn completed() -> PolygraphModulo {
        parse_presentation(COMPLETED_62).unwrap()
    }

    #[test]
    fn gamma_of_completed_system_has_three_validated_cells() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        assert_eq!(cells.len(), 3);
        for c in &cells {
            assert!(c.validate(&p), "cell {} does not validate", c.label);
            assert_eq!(c.origin, Origin::AfG);
        }
    }

    #[test]
    fn precompletion_system_is_rejected() {
        let p = parse_presentation(GOLDEN_62).unwrap();
        let s = Session::new(&p, Bounds::default());
        match coherent_completion(&s) {
            Err(CoherenceError::NonConfluentSystem(msg)) => assert!(msg.contains("x1 x2 x3")),
            other => panic!(
                "expected NonConfluentSystem, got {:?}",
                other.map(|c| c.len())
            ),
        }
    }

    #[test]
    fn squier_toy_gamma_matches_classic_critical_pairs() {
        let p = parse_presentation(SQUIER_TOY).unwrap();
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        // two classic overlaps: aba and bab
        assert_eq!(cells.len(), 2);
        let sources: Vec<Word> = cells.iter().map(|c| c.top.source.clone()).collect();
        assert!(sources.contains(&parse_word(&p, "a b a").unwrap()));
        assert!(sources.contains(&parse_word(&p, "b a b").unwrap()));
        for c in &cells {
            assert!(c.validate(&p));
            assert!(c.left.is_identity() && c.right.is_identity());
        }
    }

    #[test]
    fn conf_e_cells_validate() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let cells = conf_e_cells(&s).unwrap();
        assert_eq!(cells.len(), 4);
        for c in &cells {
            assert!(c.validate(&p));
        }
    }

    #[test]
    fn biaction_identity_is_identity() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        for a in &cells {
            let e1 = Path::identity(a.top.source.clone());
            let e2 = Path::identity(a.left.target(&p));
            let acted = biaction(&p, &e1, &e2, a).unwrap();
            assert_eq!(&acted, a);
        }
    }

    #[test]
    fn biaction_composes() {
        // nested actions equal the composed action, as boundaries
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        let a = &cells[0];
        let class = s.e_class(&a.top.source);
        for member in class.members.iter().take(4) {
            let e1full = class.witness(member).unwrap().inverse_e(&p).unwrap();
            if e1full.steps.len() < 2 {
                continue;
            }
            let k = e1full.steps.len() / 2;
            let e1b = Path::new(e1full.source.clone(), e1full.steps[..k].to_vec());
            let e1a = Path::new(e1b.target(&p), e1full.steps[k..].to_vec());
            let e2 = Path::identity(a.left.target(&p));
            let inner = biaction(&p, &e1a, &e2, a).unwrap();
            let nested = biaction(&p, &e1b, &e2, &inner).unwrap();
            let composed = biaction(&p, &e1full, &e2, a).unwrap();
            assert_eq!(nested, composed);
        }
    }

    #[test]
    fn biaction_precondition_violations_are_named() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        let a = &cells[0];
        // an e1 that does not end at the top-left corner
        let w = parse_word(&p, "x1 x1").unwrap();
        let e1 = Path::identity(w);
        let e2 = Path::identity(a.left.target(&p));
        assert_eq!(
            biaction(&p, &e1, &e2, a).unwrap_err(),
            BiactionError(BiactionCondition::TargetOfE1)
        );
    }

    #[test]
    fn quotient_of_completed_system() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let gamma = coherent_completion(&s).unwrap();
        let g = quotient_globular(&s, &gamma).unwrap();
        assert_eq!(g.cells3.len(), 3);
        let paths: Vec<(Vec<String>, Vec<String>)> = g
            .cells3
            .iter()
            .map(|c| (c.source_2path.clone(), c.target_2path.clone()))
            .collect();
        let has = |a: &[&str], b: &[&str]| {
            paths.iter().any(|(x, y)| {
                x.iter().map(String::as_str).collect::<Vec<_>>() == a
                    && y.iter().map(String::as_str).collect::<Vec<_>>() == b
            })
        };
        assert!(has(&["beta", "d0"], &["gamma", "beta"]), "paths: {paths:?}");
        assert!(has(&["d0", "gamma"], &["d0", "gamma"]));
        assert!(has(&["d0", "d0"], &["d0", "d0"]));
    }

    #[test]
    fn quotient_collapses_biaction_orbit() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let gamma = coherent_completion(&s).unwrap();
        let a = &gamma[0];
        let class = s.e_class(&a.top.source);
        let member = class.members.first().unwrap();
        let e1 = class.witness(member).unwrap().inverse_e(&p).unwrap();
        let e2 = Path::identity(a.left.target(&p));
        let acted = biaction(&p, &e1, &e2, a).unwrap();
        let mut both = gamma.clone();
        both.push(acted);
        let g = quotient_globular(&s, &both).unwrap();
        assert_eq!(
            g.cells3.len(),
            3,
            "orbit member must collapse onto the same cell"
        );
    }

    #[test]
    fn quotient_squier_toy_one_cell_per_critical_pair() {
        let p = parse_presentation(SQUIER_TOY).unwrap();
        let s = Session::new(&p, Bounds::default());
        let gamma = coherent_completion(&s).unwrap();
        let g = quotient_globular(&s, &gamma).unwrap();
        assert_eq!(g.cells3.len(), 2);
        assert!(g.congruence.is_empty());
    }

    #[test]
    fn empty_gamma_quotient_is_empty() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let g = quotient_globular(&s, &[]).unwrap();
        assert!(g.cells3.is_empty());
    }

    #[test]
    fn bundle_for_completed_system_is_unconditional() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let bundle = assemble_acyclic_extension(&s, 4);
        assert_eq!(bundle.gamma.len(), 3);
        assert_eq!(bundle.conf_e.len(), 4);
        assert!(!bundle.conditional, "checklist: {:?}", bundle.checklist);
    }

    #[test]
    fn bundle_for_squier_toy_has_no_conf_e() {
        let p = parse_presentation(SQUIER_TOY).unwrap();
        let s = Session::new(&p, Bounds::default());
        let bundle = assemble_acyclic_extension(&s, 4);
        assert_eq!(bundle.gamma.len(), 2);
        assert!(bundle.conf_e.is_empty());
        assert!(!bundle.conditional);
    }

    #[test]
    fn bundle_flags_non_normalizing_system() {
        let p = parse_presentation(crate::test_fixtures::NON_E_NORMALIZING).unwrap();
        let s = Session::new(&p, Bounds::default());
        let bundle = assemble_acyclic_extension(&s, 3);
        assert!(bundle.conditional);
        assert!(matches!(
            bundle.checklist.e_normalizing,
            TriVerdict::Fails(_)
        ));
    }

    #[test]
    fn er_mode_gamma_includes_b_cells() {
        let mut p = completed();
        p.mode = crate::presentation::Mode::Er;
        let s = Session::new(&p, Bounds::default());
        let cells = coherent_completion(&s).unwrap();
        let b_cells: Vec<&SquareCell> = cells.iter().filter(|c| c.origin == Origin::BfE).collect();
        assert!(!b_cells.is_empty());
        for c in &b_cells {
            assert!(c.validate(&p));
            // trivial closure: identity right edge, nonempty bottom
            assert!(c.right.is_identity());
            assert!(c.bottom.size(&p) >= 1);
        }
        // B-origin squares never survive the quotient
        let q = quotient_globular(&s, &cells).unwrap();
        assert_eq!(
            q.cells3.len(),
            cells.iter().filter(|c| c.origin == Origin::AfG).count()
        );
    }

    #[test]
    fn quotient_cells_apply_over_classes() {
        // independent check: replaying a cell's rule sequence on letter
        // multisets connects its endpoint classes
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let gamma = coherent_completion(&s).unwrap();
        let g = quotient_globular(&s, &gamma).unwrap();
        let apply_seq = |start: &Word, seq: &[String]| -> Option<Vec<u32>> {
            let mut ms = start.sorted_letters();
            for id in seq {
                let rule = p.r_rules.iter().find(|r| &r.id == id)?;
                for l in rule.lhs.sorted_letters() {
                    let i = ms.iter().position(|&x| x == l)?;
                    ms.remove(i);
                }
                ms.extend(rule.rhs.sorted_letters());
                ms.sort_unstable();
            }
            Some(ms)
        };
        for cell in &g.cells3 {
            let end = cell.target_class.sorted_letters();
            assert_eq!(
                apply_seq(&cell.source_class, &cell.source_2path),
                Some(end.clone())
            );
            assert_eq!(apply_seq(&cell.source_class, &cell.target_2path), Some(end));
        }
    }

    #[test]
    fn weak_commutation_counterexample_on_crafted_system() {
        let p = parse_presentation(crate::test_fixtures::NON_E_NORMALIZING).unwrap();
        let s = Session::new(&p, Bounds::default());
        let w = crate::parse::parse_word(&p, "a b").unwrap();
        let r = check_weak_commutation(&s, &TestSet::Words(vec![w.clone()]));
        assert_eq!(r, WeakCommutation::Counterexample(w));
    }

    #[test]
    fn weak_commutation_on_completed_system() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let r = check_weak_commutation(&s, &TestSet::DegreeAtMost(4));
        assert_eq!(r, WeakCommutation::Commuting);
    }

    #[test]
    fn weak_commutation_with_empty_e_is_trivial() {
        let p = parse_presentation(SQUIER_TOY).unwrap();
        let s = Session::new(&p, Bounds::default());
        assert_eq!(
            check_weak_commutation(&s, &TestSet::DegreeAtMost(3)),
            WeakCommutation::Commuting
        );
    }

    #[test]
    fn fuzz_completed_system_clean() {
        let p = completed();
        let s = Session::new(&p, Bounds::default());
        let r = newman_fuzz(&s, 60, 6, 42);
        assert_eq!(r.confluence_failures, 0, "{:?}", r.first_failure);
        assert_eq!(r.nf_failures, 0, "{:?}", r.first_failure);
    }

    #[test]
    fn fuzz_precompletion_system_finds_failure() {
        let p = parse_presentation(GOLDEN_62).unwrap();
        let s = Session::new(&p, Bounds::default());
        let r = newman_fuzz(&s, 150, 5, 7);
        assert!(r.confluence_failures + r.nf_failures > 0);
    }

    #[test]
    fn fuzz_empty_r_vacuous() {
        let p = parse_presentation("generators: a b\nmode: ERE\nmodulo commutation\n").unwrap();
        let s = Session::new(&p, Bounds::default());
        let r = newman_fuzz(&s, 50, 5, 1);
        assert_eq!(r.confluence_failures, 0);
        assert_eq!(r.nf_failures, 0);
    }
}
