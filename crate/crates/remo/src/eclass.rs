//! The modulo polygraph E on its own: equivalence classes, E-normal forms
//! under the stored orientation, E's critical branchings and their chosen
//! confluences (conf(E)).
//!
//! Classes are computed by breadth-first closure under all modulo rules in
//! both directions and are memoized per queried word for the lifetime of a
//! [`Session`]. All closures are bounded; a bound hit never turns into a
//! wrong answer, only into an `Unknown`/incomplete flag.

use crate::presentation::{Direction, Path, PolygraphModulo, RewriteStep, RuleRef, Word};
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};

/// Search limits shared by every bounded operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub max_class_size: usize,
    pub max_degree_delta: usize,
    pub max_depth: usize,
    pub max_candidates: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_class_size: 20_000,
            max_degree_delta: 0,
            max_depth: 64,
            max_candidates: 10_000,
        }
    }
}

/// One E-equivalence class rooted at the queried word. Members are ordered
/// deglex-ascending; witnesses are E-paths from the root.
#[derive(Debug)]
pub struct EClass {
    pub representative: Word,
    pub members: Vec<Word>,
    parent: HashMap<Word, (Word, RewriteStep)>,
    pub complete: bool,
}

impl EClass {
    pub fn contains(&self, w: &Word) -> bool {
        self.parent.contains_key(w) || *w == self.representative
    }

    /// E-path from the root to `member`.
    pub fn witness(&self, member: &Word) -> Option<Path> {
        if !self.contains(member) {
            return None;
        }
        let mut steps = Vec::new();
        let mut at = member.clone();
        while at != self.representative {
            let (prev, step) = self.parent.get(&at)?;
            steps.push(step.clone());
            at = prev.clone();
        }
        steps.reverse();
        Some(Path::new(self.representative.clone(), steps))
    }
}

/// Verdict of a bounded E-equivalence query.
#[derive(Debug, Clone, PartialEq)]
pub enum EquivResult {
    Yes(Path),
    No,
    Unknown,
}

impl EquivResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, EquivResult::Yes(_))
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EClassError {
    #[error("oriented E system not known to be convergent; normal form undefined")]
    NotConvergent,
}

/// Convergence status of the oriented modulo polygraph.
#[derive(Debug, Clone, PartialEq)]
pub enum EConvergence {
    Convergent,
    NotConvergent(Word),
    Unknown,
}

/// Superposition datum: the overlap word and the two (rule, position)
/// redexes creating it.
type ESource = (Word, (usize, usize), (usize, usize));

/// A critical branching of the oriented E polygraph with its chosen
/// confluence: both legs normalize to the shared E-normal form.
#[derive(Debug, Clone)]
pub struct EConfluence {
    pub source: Word,
    pub left: Path,
    pub right: Path,
    pub rules: (usize, usize),
}

/// Catalogue of E-class queries over one presentation, with memoization.
pub struct Session<'p> {
    pub p: &'p PolygraphModulo,
    pub bounds: Bounds,
    classes: Mutex<HashMap<Word, Arc<EClass>>>,
    nf_words: Mutex<HashMap<Word, Word>>,
}

impl<'p> Session<'p> {
    pub fn new(p: &'p PolygraphModulo, bounds: Bounds) -> Self {
        Session {
            p,
            bounds,
            classes: Mutex::new(HashMap::new()),
            nf_words: Mutex::new(HashMap::new()),
        }
    }

    fn rank(&self) -> Vec<usize> {
        let mut r = vec![0usize; self.p.generators.len()];
        for (pos, &g) in self.p.order.precedence.iter().enumerate() {
            r[g as usize] = pos;
        }
        r
    }

    /// Plain deglex against the declared precedence; used for deterministic
    /// member ordering everywhere.
    pub fn deglex_cmp(&self, u: &Word, v: &Word) -> std::cmp::Ordering {
        let rank = self.rank();
        match u.degree().cmp(&v.degree()) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        for (&a, &b) in u.letters().iter().zip(v.letters()) {
            match rank[b as usize].cmp(&rank[a as usize]) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// All single E-steps out of `w`, both directions, all positions.
    pub fn e_neighbors(&self, w: &Word) -> Vec<(RewriteStep, Word)> {
        let mut out = Vec::new();
        for (i, rule) in self.p.e_rules.iter().enumerate() {
            for (dir, pat) in [
                (Direction::Forward, &rule.lhs),
                (Direction::Backward, &rule.rhs),
            ] {
                for pos in w.factor_positions(pat) {
                    let step = RewriteStep {
                        left: w.slice(0, pos),
                        rule: RuleRef::E(i),
                        right: w.slice(pos + pat.degree(), w.degree()),
                        direction: dir,
                    };
                    let tgt = step.target(self.p);
                    out.push((step, tgt));
                }
            }
        }
        out
    }

    /// Breadth-first closure of `{w}` under E, both directions, restricted to
    /// degree at most `deg(w) + max_degree_delta`.
    pub fn e_class(&self, w: &Word) -> Arc<EClass> {
        if let Some(c) = self.classes.lock().unwrap().get(w) {
            return c.clone();
        }
        let max_degree = w.degree() + self.bounds.max_degree_delta;
        let mut parent: HashMap<Word, (Word, RewriteStep)> = HashMap::new();
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue = VecDeque::new();
        let mut complete = true;
        seen.insert(w.clone());
        queue.push_back(w.clone());
        while let Some(cur) = queue.pop_front() {
            for (step, tgt) in self.e_neighbors(&cur) {
                if tgt.degree() > max_degree || seen.contains(&tgt) {
                    continue;
                }
                if seen.len() >= self.bounds.max_class_size {
                    complete = false;
                    queue.clear();
                    break;
                }
                seen.insert(tgt.clone());
                parent.insert(tgt.clone(), (cur.clone(), step));
                queue.push_back(tgt);
            }
        }
        let mut members: Vec<Word> = seen.into_iter().collect();
        members.sort_by(|a, b| self.deglex_cmp(a, b));
        let class = Arc::new(EClass {
            representative: w.clone(),
            members,
            parent,
            complete,
        });
        self.classes
            .lock()
            .unwrap()
            .insert(w.clone(), class.clone());
        class
    }

    /// Bidirectional bounded E-equivalence test. `No` is only reported when
    /// a closure completed without meeting the other word.
    pub fn e_equivalent(&self, u: &Word, v: &Word) -> EquivResult {
        if u == v {
            return EquivResult::Yes(Path::identity(u.clone()));
        }
        let cu = self.e_class(u);
        if cu.contains(v) {
            return EquivResult::Yes(cu.witness(v).expect("member has witness"));
        }
        if cu.complete {
            return EquivResult::No;
        }
        let cv = self.e_class(v);
        if cv.contains(u) {
            let back = cv.witness(u).expect("member has witness");
            return EquivResult::Yes(back.inverse_e(self.p).expect("E-path inverts"));
        }
        if cv.complete {
            return EquivResult::No;
        }
        // both truncated: meet in the middle on the explored frontiers
        for m in &cu.members {
            if cv.contains(m) {
                let a = cu.witness(m).unwrap();
                let b = cv.witness(m).unwrap().inverse_e(self.p).unwrap();
                return EquivResult::Yes(a.then(self.p, &b).unwrap());
            }
        }
        EquivResult::Unknown
    }

    /// Leftmost-outermost rewriting with the stored (forward) orientation.
    fn oriented_e_step(&self, w: &Word) -> Option<RewriteStep> {
        let mut best: Option<RewriteStep> = None;
        for (i, rule) in self.p.e_rules.iter().enumerate() {
            if let Some(&pos) = w.factor_positions(&rule.lhs).first() {
                let better = match &best {
                    None => true,
                    Some(b) => pos < b.position(),
                };
                if better {
                    best = Some(RewriteStep {
                        left: w.slice(0, pos),
                        rule: RuleRef::E(i),
                        right: w.slice(pos + rule.lhs.degree(), w.degree()),
                        direction: Direction::Forward,
                    });
                }
            }
        }
        best
    }

    /// Unique E-normal form via oriented steps. Requires a convergent
    /// oriented E (guaranteed for `modulo commutation`).
    pub fn e_normal_form(&self, w: &Word) -> Result<(Word, Path), EClassError> {
        let mut at = w.clone();
        let mut steps = Vec::new();
        let mut fuel = self.bounds.max_depth.max(w.degree() * w.degree() + 4);
        while let Some(step) = self.oriented_e_step(&at) {
            if fuel == 0 {
                if self.e_convergence() == EConvergence::Convergent {
                    // convergent systems may still need more fuel than the
                    // default depth; keep going up to the class bound
                    fuel = self.bounds.max_class_size;
                    continue;
                }
                return Err(EClassError::NotConvergent);
            }
            fuel -= 1;
            at = step.target(self.p);
            steps.push(step);
        }
        Ok((at.clone(), Path::new(w.clone(), steps)))
    }

    /// Word irreducible for the oriented E polygraph.
    pub fn is_e_irreducible(&self, w: &Word) -> bool {
        self.oriented_e_step(w).is_none()
    }

    /// Convergence of the oriented E system. Commutation systems oriented by
    /// a total precedence are always convergent; anything else gets a
    /// bounded critical-pair check.
    pub fn e_convergence(&self) -> EConvergence {
        if self.p.e_rules.is_empty() || self.p.e_is_commutation() {
            return EConvergence::Convergent;
        }
        // termination is not decided here; report Unknown unless a critical
        // pair visibly fails to join within bounds
        for c in self.oriented_e_overlaps() {
            let l = self.bounded_oriented_nf(&c.0);
            let r = self.bounded_oriented_nf(&c.1);
            match (l, r) {
                (Some(a), Some(b)) if a != b => return EConvergence::NotConvergent(a),
                (Some(_), Some(_)) => {}
                _ => return EConvergence::Unknown,
            }
        }
        EConvergence::Unknown
    }

    fn bounded_oriented_nf(&self, w: &Word) -> Option<Word> {
        let mut at = w.clone();
        for _ in 0..self.bounds.max_depth {
            match self.oriented_e_step(&at) {
                Some(s) => at = s.target(self.p),
                None => return Some(at),
            }
        }
        None
    }

    /// Raw one-step targets of each oriented E critical pair.
    fn oriented_e_overlaps(&self) -> Vec<(Word, Word)> {
        self.e_critical_sources()
            .into_iter()
            .map(|(w, (i, pi), (j, pj))| {
                let li = &self.p.e_rules[i];
                let lj = &self.p.e_rules[j];
                let a = Word::concat(&[
                    &w.slice(0, pi),
                    &li.rhs,
                    &w.slice(pi + li.lhs.degree(), w.degree()),
                ]);
                let b = Word::concat(&[
                    &w.slice(0, pj),
                    &lj.rhs,
                    &w.slice(pj + lj.lhs.degree(), w.degree()),
                ]);
                (a, b)
            })
            .collect()
    }

    /// Minimal superposition words of the oriented E rules: two redexes with
    /// intersecting spans covering the whole word.
    fn e_critical_sources(&self) -> Vec<ESource> {
        let mut out = Vec::new();
        let rules = &self.p.e_rules;
        for i in 0..rules.len() {
            for j in i..rules.len() {
                let li = &rules[i].lhs;
                let lj = &rules[j].lhs;
                let lo = -(lj.degree() as isize) + 1;
                let hi = li.degree() as isize - 1;
                for o in lo..=hi {
                    if i == j && o <= 0 {
                        // o = 0 is the aspherical pair; o < 0 mirrors o > 0
                        continue;
                    }
                    if let Some((w, pi, pj)) = superpose(li, lj, o) {
                        out.push((w, (i, pi), (j, pj)));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        out.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2 == b.2);
        out
    }

    /// conf(E): every critical branching of oriented E paired with its
    /// chosen confluence, the leftmost normalization of both legs.
    pub fn e_critical_branchings(&self) -> Result<Vec<EConfluence>, EClassError> {
        if self.e_convergence() == EConvergence::NotConvergent(Word::empty()) {
            return Err(EClassError::NotConvergent);
        }
        let mut out = Vec::new();
        for (w, (i, pi), (j, pj)) in self.e_critical_sources() {
            let mk_leg = |rule_idx: usize, pos: usize| -> Result<Path, EClassError> {
                let rule = &self.p.e_rules[rule_idx];
                let first = RewriteStep {
                    left: w.slice(0, pos),
                    rule: RuleRef::E(rule_idx),
                    right: w.slice(pos + rule.lhs.degree(), w.degree()),
                    direction: Direction::Forward,
                };
                let mid = first.target(self.p);
                let (_, rest) = self.e_normal_form(&mid)?;
                let mut steps = vec![first];
                steps.extend(rest.steps);
                Ok(Path::new(w.clone(), steps))
            };
            let left = mk_leg(i, pi)?;
            let right = mk_leg(j, pj)?;
            if left.target(self.p) != right.target(self.p) {
                return Err(EClassError::NotConvergent);
            }
            out.push(EConfluence {
                source: w.clone(),
                left,
                right,
                rules: (i, j),
            });
        }
        Ok(out)
    }

    /// Memoized S-normal-form words live here so confluence checks across
    /// modules share them; filled in by the rewrite engine.
    pub(crate) fn nf_cache_get(&self, w: &Word) -> Option<Word> {
        self.nf_words.lock().unwrap().get(w).cloned()
    }

    pub(crate) fn nf_cache_put(&self, w: Word, nf: Word) {
        self.nf_words.lock().unwrap().insert(w, nf);
    }
}

/// Places `lj` at offset `o` relative to `li` at 0; returns the overlap word
/// and both positions when the letters agree on a nonempty intersection.
pub fn superpose(li: &Word, lj: &Word, o: isize) -> Option<(Word, usize, usize)> {
    let start = 0isize.min(o);
    let end = (li.degree() as isize).max(o + lj.degree() as isize);
    let inter_lo = 0isize.max(o);
    let inter_hi = (li.degree() as isize).min(o + lj.degree() as isize);
    if inter_lo >= inter_hi {
        return None;
    }
    let mut letters = Vec::with_capacity((end - start) as usize);
    for pos in start..end {
        let from_i = (0..li.degree() as isize)
            .contains(&pos)
            .then(|| li.0[pos as usize]);
        let from_j = (o..o + lj.degree() as isize)
            .contains(&pos)
            .then(|| lj.0[(pos - o) as usize]);
        match (from_i, from_j) {
            (Some(a), Some(b)) if a != b => return None,
            (Some(a), _) => letters.push(a),
            (_, Some(b)) => letters.push(b),
            (None, None) => unreachable!("gap inside superposition"),
        }
    }
    let pi = (0 - start) as usize;
    let pj = (o - start) as usize;
    Some((Word(letters), pi, pj))
}
