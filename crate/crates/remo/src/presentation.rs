//! Core data model for string rewriting modulo a set of unoriented relations.
//!
//! A presentation modulo splits its relations into two parts: oriented
//! *primary* rules (the set R) and unoriented *modulo* rules (the set E).
//! Rewriting acts on [`Word`]s, finite sequences of generator indices, and a
//! [`RewriteStep`] records one rule application inside a whisker context
//! `left · lhs · right`. The mode (R, ER, RE, ERE) controls where E-steps may
//! appear around the primary step of an [`SStep`].

use std::fmt;

/// A generating symbol. Its index is its declaration position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
}

/// A word over the generators, stored as indices for O(1) letter comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    /// `true` if `factor` occurs at position `pos`.
    pub fn has_factor_at(&self, factor: &Word, pos: usize) -> bool {
        pos + factor.degree() <= self.degree() && self.0[pos..pos + factor.degree()] == factor.0[..]
    }

    /// All positions at which `factor` occurs.
    pub fn factor_positions(&self, factor: &Word) -> Vec<usize> {
        if factor.is_empty() || factor.degree() > self.degree() {
            return Vec::new();
        }
        (0..=self.degree() - factor.degree())
            .filter(|&p| self.has_factor_at(factor, p))
            .collect()
    }

    pub fn concat(parts: &[&Word]) -> Word {
        let mut v = Vec::new();
        for p in parts {
            v.extend_from_slice(&p.0);
        }
        Word(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    /// Letter multiset as sorted indices; two words are letter-equivalent
    /// under full commutation iff these agree.
    pub fn sorted_letters(&self) -> Vec<u32> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

/// Primary rules are oriented; modulo rules are used in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Primary,
    Modulo,
}

/// An oriented pair of words. For modulo rules the stored orientation only
/// fixes Irr(E); rewriting may traverse them backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
    pub lhs: Word,
    pub rhs: Word,
}

/// Which of the two rule families a step refers to, by position in the
/// polygraph's `r_rules` / `e_rules` list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleRef {
    R(usize),
    E(usize),
}

/// Legal shapes of one rewriting step: plain R, E-steps then R, R then
/// E-steps, or E-steps on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    R,
    Er,
    Re,
    Ere,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::R => "R",
            Mode::Er => "ER",
            Mode::Re => "RE",
            Mode::Ere => "ERE",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "R" => Some(Mode::R),
            "ER" => Some(Mode::Er),
            "RE" => Some(Mode::Re),
            "ERE" => Some(Mode::Ere),
            _ => None,
        }
    }

    /// Leading E-steps allowed (E-matching on the source side).
    pub fn allows_leading_e(&self) -> bool {
        matches!(self, Mode::Er | Mode::Ere)
    }

    pub fn allows_trailing_e(&self) -> bool {
        matches!(self, Mode::Re | Mode::Ere)
    }
}

/// Which termination order the presentation declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// Degree, then left-to-right by precedence.
    Deglex,
    /// Deglex on canonical (descending-precedence-sorted) representatives;
    /// invariant under commutation E.
    CanonicalDeglex,
}

impl OrderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderKind::Deglex => "deglex",
            OrderKind::CanonicalDeglex => "cdeglex",
        }
    }
}

/// Order declaration: kind plus a precedence permutation of the generators,
/// position 0 being the greatest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSpec {
    pub kind: OrderKind,
    pub precedence: Vec<u32>,
}

/// A 2-polygraph modulo: generators, primary rules R, modulo rules E, the
/// rewriting mode, and the declared termination order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygraphModulo {
    pub generators: Vec<Generator>,
    pub r_rules: Vec<Rule>,
    pub e_rules: Vec<Rule>,
    pub mode: Mode,
    pub order: OrderSpec,
    /// Set when the modulo block came from `modulo commutation`.
    pub commutation_e: bool,
}

/// Errors raised when building or applying the data model.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("rule {rule}: word does not contain the expected factor at position {pos}")]
    FactorMismatch { rule: String, pos: usize },
    #[error("backward direction is only legal for modulo rules (rule {0})")]
    BackwardPrimary(String),
    #[error("unknown rule reference")]
    UnknownRule,
    #[error("step shape not allowed in mode {0}")]
    ModeShape(&'static str),
}

impl PolygraphModulo {
    pub fn rule(&self, r: RuleRef) -> &Rule {
        match r {
            RuleRef::R(i) => &self.r_rules[i],
            RuleRef::E(i) => &self.e_rules[i],
        }
    }

    pub fn generator_index(&self, name: &str) -> Option<u32> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u32)
    }

    pub fn display_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.0.iter()
            .map(|&i| self.generators[i as usize].name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// True when every modulo rule swaps two distinct adjacent letters.
    pub fn e_is_commutation(&self) -> bool {
        self.e_rules.iter().all(|r| {
            r.lhs.degree() == 2
                && r.rhs.degree() == 2
                && r.lhs.0[0] == r.rhs.0[1]
                && r.lhs.0[1] == r.rhs.0[0]
                && r.lhs.0[0] != r.lhs.0[1]
        })
    }

    /// True when every modulo rule preserves word degree.
    pub fn e_preserves_degree(&self) -> bool {
        self.e_rules
            .iter()
            .all(|r| r.lhs.degree() == r.rhs.degree())
    }
}

/// Forward applies lhs -> rhs; backward applies rhs -> lhs and is only legal
/// for modulo rules, whose cells are invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// One rule application in context: `left · (lhs or rhs) · right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub left: Word,
    pub rule: RuleRef,
    pub right: Word,
    pub direction: Direction,
}

impl RewriteStep {
    pub fn forward(left: Word, rule: RuleRef, right: Word) -> Self {
        RewriteStep {
            left,
            rule,
            right,
            direction: Direction::Forward,
        }
    }

    /// The pattern consumed at the step's position.
    pub fn pattern<'p>(&self, p: &'p PolygraphModulo) -> &'p Word {
        let rule = p.rule(self.rule);
        match self.direction {
            Direction::Forward => &rule.lhs,
            Direction::Backward => &rule.rhs,
        }
    }

    /// The word produced at the step's position.
    pub fn replacement<'p>(&self, p: &'p PolygraphModulo) -> &'p Word {
        let rule = p.rule(self.rule);
        match self.direction {
            Direction::Forward => &rule.rhs,
            Direction::Backward => &rule.lhs,
        }
    }

    pub fn source(&self, p: &PolygraphModulo) -> Word {
        Word::concat(&[&self.left, self.pattern(p), &self.right])
    }

    pub fn target(&self, p: &PolygraphModulo) -> Word {
        Word::concat(&[&self.left, self.replacement(p), &self.right])
    }

    pub fn position(&self) -> usize {
        self.left.degree()
    }

    pub fn is_primary(&self, p: &PolygraphModulo) -> bool {
        p.rule(self.rule).kind == RuleKind::Primary
    }

    /// Same step with the direction flipped; its source is our target.
    pub fn inverse(&self) -> RewriteStep {
        RewriteStep {
            left: self.left.clone(),
            rule: self.rule,
            right: self.right.clone(),
            direction: match self.direction {
                Direction::Forward => Direction::Backward,
                Direction::Backward => Direction::Forward,
            },
        }
    }

    /// Checks the direction invariant and that `w` matches the step.
    pub fn check(&self, p: &PolygraphModulo, w: &Word) -> Result<(), ModelError> {
        let rule = p.rule(self.rule);
        if self.direction == Direction::Backward && rule.kind == RuleKind::Primary {
            return Err(ModelError::BackwardPrimary(rule.id.clone()));
        }
        if &self.source(p) != w {
            return Err(ModelError::FactorMismatch {
                rule: rule.id.clone(),
                pos: self.position(),
            });
        }
        Ok(())
    }

    pub fn display(&self, p: &PolygraphModulo) -> String {
        let rule = p.rule(self.rule);
        let tick = match self.direction {
            Direction::Forward => "",
            Direction::Backward => "^-",
        };
        format!("{}{}@{}", rule.id, tick, self.position())
    }
}

/// Applies one step to a word.
///
/// The word must factor as `left · pattern · right`; the result swaps the
/// pattern for the replacement.
pub fn apply_step(p: &PolygraphModulo, w: &Word, s: &RewriteStep) -> Result<Word, ModelError> {
    s.check(p, w)?;
    Ok(s.target(p))
}

/// A composable sequence of steps with explicit endpoints, so that identity
/// paths are first-class (branchings with a trivial leg need them).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub source: Word,
    pub steps: Vec<RewriteStep>,
}

impl Path {
    pub fn identity(at: Word) -> Self {
        Path {
            source: at,
            steps: Vec::new(),
        }
    }

    pub fn new(source: Word, steps: Vec<RewriteStep>) -> Self {
        Path { source, steps }
    }

    pub fn target(&self, p: &PolygraphModulo) -> Word {
        match self.steps.last() {
            Some(s) => s.target(p),
            None => self.source.clone(),
        }
    }

    /// Number of primary steps; E-steps do not count.
    pub fn size(&self, p: &PolygraphModulo) -> usize {
        self.steps.iter().filter(|s| s.is_primary(p)).count()
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// `self` then `other`; endpoints must chain.
    pub fn then(&self, p: &PolygraphModulo, other: &Path) -> Option<Path> {
        if self.target(p) != other.source {
            return None;
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Some(Path {
            source: self.source.clone(),
            steps,
        })
    }

    /// Reverses an E-path (every step must be over a modulo rule).
    pub fn inverse_e(&self, p: &PolygraphModulo) -> Option<Path> {
        if self.steps.iter().any(|s| s.is_primary(p)) {
            return None;
        }
        let target = self.target(p);
        let steps = self.steps.iter().rev().map(|s| s.inverse()).collect();
        Some(Path {
            source: target,
            steps,
        })
    }

    pub fn uses_only_e(&self, p: &PolygraphModulo) -> bool {
        self.steps.iter().all(|s| !s.is_primary(p))
    }

    pub fn rule_ids(&self, p: &PolygraphModulo) -> Vec<String> {
        self.steps
            .iter()
            .map(|s| p.rule(s.rule).id.clone())
            .collect()
    }

    /// Ids of the primary steps only, in order.
    pub fn primary_rule_ids(&self, p: &PolygraphModulo) -> Vec<String> {
        self.steps
            .iter()
            .filter(|s| s.is_primary(p))
            .map(|s| p.rule(s.rule).id.clone())
            .collect()
    }

    pub fn display(&self, p: &PolygraphModulo) -> String {
        if self.steps.is_empty() {
            return format!("1_{}", p.display_word(&self.source));
        }
        self.steps
            .iter()
            .map(|s| s.display(p))
            .collect::<Vec<_>>()
            .join(" . ")
    }
}

/// Path validation outcome; a violation carries the index of the first step
/// that fails to chain or apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathCheck {
    Ok,
    Violation(usize),
}

/// Checks that each step applies and that consecutive endpoints chain.
pub fn validate_path(p: &PolygraphModulo, path: &Path) -> PathCheck {
    let mut at = path.source.clone();
    for (i, s) in path.steps.iter().enumerate() {
        match apply_step(p, &at, s) {
            Ok(next) => at = next,
            Err(_) => return PathCheck::Violation(i),
        }
    }
    PathCheck::Ok
}

/// One mode-aware S-step: optional E-steps, one forward primary step, then
/// optional E-steps, chained end to end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SStep {
    pub e1: Vec<RewriteStep>,
    pub r: RewriteStep,
    pub e2: Vec<RewriteStep>,
}

impl SStep {
    pub fn plain(r: RewriteStep) -> Self {
        SStep {
            e1: Vec::new(),
            r,
            e2: Vec::new(),
        }
    }

    pub fn source(&self, p: &PolygraphModulo) -> Word {
        match self.e1.first() {
            Some(s) => s.source(p),
            None => self.r.source(p),
        }
    }

    pub fn target(&self, p: &PolygraphModulo) -> Word {
        match self.e2.last() {
            Some(s) => s.target(p),
            None => self.r.target(p),
        }
    }

    pub fn as_path(&self, p: &PolygraphModulo) -> Path {
        let mut steps = self.e1.clone();
        steps.push(self.r.clone());
        steps.extend(self.e2.iter().cloned());
        Path::new(self.source(p), steps)
    }

    /// Mode-shape invariant plus chaining and per-step checks.
    pub fn validate(&self, p: &PolygraphModulo) -> Result<(), ModelError> {
        match p.mode {
            Mode::R if !(self.e1.is_empty() && self.e2.is_empty()) => {
                return Err(ModelError::ModeShape("mode R forbids E-steps"));
            }
            Mode::Er if !self.e2.is_empty() => {
                return Err(ModelError::ModeShape("mode ER forbids trailing E-steps"));
            }
            Mode::Re if !self.e1.is_empty() => {
                return Err(ModelError::ModeShape("mode RE forbids leading E-steps"));
            }
            _ => {}
        }
        if !self.r.is_primary(p) || self.r.direction != Direction::Forward {
            return Err(ModelError::ModeShape(
                "middle step must be a forward primary step",
            ));
        }
        if self
            .e1
            .iter()
            .chain(self.e2.iter())
            .any(|s| s.is_primary(p))
        {
            return Err(ModelError::ModeShape("outer steps must be modulo steps"));
        }
        match validate_path(p, &self.as_path(p)) {
            PathCheck::Ok => Ok(()),
            PathCheck::Violation(_) => Err(ModelError::FactorMismatch {
                rule: p.rule(self.r.rule).id.clone(),
                pos: self.r.position(),
            }),
        }
    }

    pub fn display(&self, p: &PolygraphModulo) -> String {
        self.as_path(p).display(p)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|i| format!("#{i}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_presentation;

    fn golden() -> PolygraphModulo {
        parse_presentation(crate::test_fixtures::GOLDEN_62).unwrap()
    }

    fn w(p: &PolygraphModulo, s: &str) -> Word {
        crate::parse::parse_word(p, s).unwrap()
    }

    #[test]
    fn apply_gamma_at_front() {
        let p = golden();
        // x1x2x3 under gamma with empty left whisker and right whisker x3
        let step = RewriteStep::forward(Word::empty(), RuleRef::R(1), w(&p, "x3"));
        let out = apply_step(&p, &w(&p, "x1 x2 x3"), &step).unwrap();
        assert_eq!(out, w(&p, "x1 x3"));
    }

    #[test]
    fn apply_beta_with_right_whisker() {
        let p = golden();
        let step = RewriteStep::forward(Word::empty(), RuleRef::R(0), w(&p, "x2"));
        let out = apply_step(&p, &w(&p, "x1 x3 x2"), &step).unwrap();
        assert_eq!(out, w(&p, "x2 x4 x2"));
    }

    #[test]
    fn apply_mismatch_reports_position() {
        let p = golden();
        let step = RewriteStep::forward(w(&p, "x4"), RuleRef::R(0), Word::empty());
        let err = apply_step(&p, &w(&p, "x4 x2 x2"), &step).unwrap_err();
        assert_eq!(
            err,
            ModelError::FactorMismatch {
                rule: "beta".into(),
                pos: 1
            }
        );
    }

    #[test]
    fn backward_e_step_cancels_forward() {
        let p = golden();
        // alpha_{2,3} swaps x2 x3; applying it then its inverse is the identity
        let e = p
            .e_rules
            .iter()
            .position(|r| r.lhs == w(&p, "x2 x3"))
            .unwrap();
        let fwd = RewriteStep::forward(w(&p, "x1"), RuleRef::E(e), Word::empty());
        let src = w(&p, "x1 x2 x3");
        let mid = apply_step(&p, &src, &fwd).unwrap();
        let back = fwd.inverse();
        assert_eq!(apply_step(&p, &mid, &back).unwrap(), src);
    }

    #[test]
    fn backward_primary_rejected() {
        let p = golden();
        let step = RewriteStep {
            left: Word::empty(),
            rule: RuleRef::R(0),
            right: Word::empty(),
            direction: Direction::Backward,
        };
        assert!(matches!(
            apply_step(&p, &w(&p, "x2 x4"), &step),
            Err(ModelError::BackwardPrimary(_))
        ));
    }

    #[test]
    fn primary_step_reversal_via_constructed_witness() {
        // apply_step rejects backward primary steps; the reversal is only
        // usable as a raw boundary computation, as here
        let p = golden();
        let step = RewriteStep::forward(Word::empty(), RuleRef::R(0), w(&p, "x2"));
        let src = w(&p, "x1 x3 x2");
        let tgt = apply_step(&p, &src, &step).unwrap();
        let back = step.inverse();
        assert_eq!(back.source(&p), tgt);
        assert_eq!(back.target(&p), src);
    }

    #[test]
    fn empty_path_is_ok_and_identity() {
        let p = golden();
        let path = Path::identity(w(&p, "x1 x2"));
        assert_eq!(validate_path(&p, &path), PathCheck::Ok);
        assert_eq!(path.target(&p), w(&p, "x1 x2"));
        assert_eq!(path.size(&p), 0);
    }

    #[test]
    fn golden_bottom_path_validates() {
        let p = golden();
        // gamma at 0, then beta at 0: x1x2x3 => x1x3 => x2x4
        let path = Path::new(
            w(&p, "x1 x2 x3"),
            vec![
                RewriteStep::forward(Word::empty(), RuleRef::R(1), w(&p, "x3")),
                RewriteStep::forward(Word::empty(), RuleRef::R(0), Word::empty()),
            ],
        );
        assert_eq!(validate_path(&p, &path), PathCheck::Ok);
        assert_eq!(path.target(&p), w(&p, "x2 x4"));
        assert_eq!(path.size(&p), 2);
    }

    #[test]
    fn bad_chaining_reports_first_violation() {
        let p = golden();
        let path = Path::new(
            w(&p, "x1 x2 x3"),
            vec![
                RewriteStep::forward(Word::empty(), RuleRef::R(1), w(&p, "x3")),
                // source would be x1x2x3 again, but we are at x1x3
                RewriteStep::forward(Word::empty(), RuleRef::R(1), w(&p, "x3")),
            ],
        );
        assert_eq!(validate_path(&p, &path), PathCheck::Violation(1));
    }

    #[test]
    fn path_size_additive_under_concatenation() {
        let p = golden();
        let a = Path::new(
            w(&p, "x1 x2 x3"),
            vec![RewriteStep::forward(
                Word::empty(),
                RuleRef::R(1),
                w(&p, "x3"),
            )],
        );
        let b = Path::new(
            w(&p, "x1 x3"),
            vec![RewriteStep::forward(
                Word::empty(),
                RuleRef::R(0),
                Word::empty(),
            )],
        );
        let ab = a.then(&p, &b).unwrap();
        assert_eq!(ab.size(&p), a.size(&p) + b.size(&p));
    }
}
