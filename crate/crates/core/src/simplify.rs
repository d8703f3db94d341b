//! Relation-driven reduction of legged polynomials.
//!
//! Two kinds of rules are applied to a polynomial in leg-sorted normal form:
//!
//! * rewrites `w -> rhs` on a fixed window of letters (isometry rules
//!   `S*[i] S[j] -> δ` and phase commutations `x y -> c y x`), applied at the
//!   leftmost redex;
//! * contractions of a declared relation `Σ c_t m_t = r`, applied only when
//!   every term `λ c_t a m_t b` of the group is present with exactly that
//!   coefficient, in which case the group collapses to `λ r a b`.
//!
//! Each applied step subtracts `λ · a · (relation) · b` from the polynomial,
//! which is what the trace records and what [`replay_trace`] re-applies.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{unitarity_relations, Degree, GradedPoly, Index, Letter, Symbol};
use crate::braided::{render_legged_word, LegLayout, LeggedLetter, LeggedPoly};
use crate::matrix::Matrix;
use crate::scalars::{Scalar, ZetaSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplifyError {
    #[error("relation `{0}` is not homogeneous")]
    Inhomogeneous(String),
    #[error("relation `{0}` declared twice")]
    Duplicate(String),
    #[error("trace names unknown relation `{0}`")]
    UnknownRelation(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RuleKind {
    /// `lhs -> rhs`.
    Rewrite { lhs: Vec<Letter>, rhs: GradedPoly },
    /// `Σ c_t m_t = constant`, all `m_t` of the same length.
    Contraction {
        terms: Vec<(Vec<Letter>, Scalar)>,
        constant: Scalar,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rule {
    name: String,
    kind: RuleKind,
    /// The relation as a polynomial that vanishes in the algebra.
    relation: GradedPoly,
}

/// Declared relations, compiled into rewrite and contraction rules.
#[derive(Clone, Debug, Default)]
pub struct RelationSet {
    pub cuntz_families: Vec<(Symbol, Vec<i64>)>,
    pub unitary_matrices: Vec<(String, Matrix<GradedPoly>)>,
    pub commutation_pairs: Vec<(Letter, Letter, Scalar)>,
    rules: Vec<Rule>,
    by_name: HashMap<String, usize>,
    rewrites_by_window: HashMap<Vec<Letter>, usize>,
    /// Window word -> (rule, term index), largest group first.
    contractions_by_window: HashMap<Vec<Letter>, Vec<(usize, usize)>>,
    window_lengths: Vec<usize>,
}

impl RelationSet {
    pub fn new() -> Self {
        RelationSet::default()
    }

    fn push_rule(&mut self, rule: Rule) -> Result<(), SimplifyError> {
        if self.by_name.contains_key(&rule.name) {
            return Err(SimplifyError::Duplicate(rule.name));
        }
        if !is_homogeneous(&rule.relation) {
            return Err(SimplifyError::Inhomogeneous(rule.name));
        }
        let idx = self.rules.len();
        self.by_name.insert(rule.name.clone(), idx);
        match &rule.kind {
            RuleKind::Rewrite { lhs, .. } => {
                self.rewrites_by_window.entry(lhs.clone()).or_insert(idx);
                self.note_len(lhs.len());
            }
            RuleKind::Contraction { terms, .. } => {
                for (t, (w, _)) in terms.iter().enumerate() {
                    let slot = self.contractions_by_window.entry(w.clone()).or_default();
                    slot.push((idx, t));
                    self.note_len(w.len());
                }
            }
        }
        self.rules.push(rule);
        let rules = &self.rules;
        for slot in self.contractions_by_window.values_mut() {
            slot.sort_by_key(|&(r, t)| {
                let size = match &rules[r].kind {
                    RuleKind::Contraction { terms, .. } => terms.len(),
                    _ => 0,
                };
                (std::cmp::Reverse(size), r, t)
            });
        }
        Ok(())
    }

    fn note_len(&mut self, l: usize) {
        if !self.window_lengths.contains(&l) {
            self.window_lengths.push(l);
            self.window_lengths.sort_unstable();
        }
    }

    /// Declares `v` unitary: `v* v = 1 = v v*` entrywise.
    pub fn add_unitary(&mut self, name: &str, v: &Matrix<GradedPoly>) -> Result<(), SimplifyError> {
        for (i, j, x) in v.entries() {
            if x.degree() == Degree::NotHomogeneous {
                return Err(SimplifyError::Inhomogeneous(format!(
                    "{name}[{},{}]",
                    i + 1,
                    j + 1
                )));
            }
        }
        for r in unitarity_relations(name, v) {
            self.add_contraction(&r.name, &r.poly, &r.constant)?;
        }
        self.unitary_matrices.push((name.to_string(), v.clone()));
        Ok(())
    }

    /// Declares `poly = constant` as a contraction rule; `poly` must have
    /// words of one common length.
    pub fn add_contraction(
        &mut self,
        name: &str,
        poly: &GradedPoly,
        constant: &Scalar,
    ) -> Result<(), SimplifyError> {
        let terms: Vec<(Vec<Letter>, Scalar)> =
            poly.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
        let relation = poly.minus(&GradedPoly::constant(constant.clone()));
        if terms.is_empty()
            || terms
                .iter()
                .any(|(w, _)| w.len() != terms[0].0.len() || w.is_empty())
        {
            return Err(SimplifyError::Inhomogeneous(name.to_string()));
        }
        self.push_rule(Rule {
            name: name.to_string(),
            kind: RuleKind::Contraction {
                terms,
                constant: constant.clone(),
            },
            relation,
        })
    }

    pub fn add_rewrite(
        &mut self,
        name: &str,
        lhs: Vec<Letter>,
        rhs: GradedPoly,
    ) -> Result<(), SimplifyError> {
        let relation = GradedPoly::term(lhs.clone(), Scalar::one()).minus(&rhs);
        self.push_rule(Rule {
            name: name.to_string(),
            kind: RuleKind::Rewrite { lhs, rhs },
            relation,
        })
    }

    /// Isometries `family[1..=n]` with degrees `degrees`:
    /// `S*[i] S[j] -> δ_ij` and the contraction `Σ S[i] S*[i] = 1`.
    pub fn add_cuntz_family(&mut self, family: &str, degrees: &[i64]) -> Result<(), SimplifyError> {
        let n = degrees.len();
        let s = |i: usize| Letter::new(family, Index::One(i as u32 + 1), degrees[i]);
        for i in 0..n {
            for j in 0..n {
                let rhs = if i == j {
                    GradedPoly::one()
                } else {
                    GradedPoly::zero()
                };
                self.add_rewrite(
                    &format!("{family}:iso({},{})", i + 1, j + 1),
                    vec![s(i).star(), s(j)],
                    rhs,
                )?;
            }
        }
        let mut sum = GradedPoly::zero();
        for i in 0..n {
            sum.add_term(vec![s(i), s(i).star()], Scalar::one());
        }
        self.add_contraction(&format!("{family}:sum"), &sum, &Scalar::one())?;
        self.cuntz_families
            .push((Symbol::new(family), degrees.to_vec()));
        Ok(())
    }

    /// `x y = c y x`, oriented as the rewrite `x y -> c y x`.
    pub fn add_commutation(
        &mut self,
        x: Letter,
        y: Letter,
        c: Scalar,
    ) -> Result<(), SimplifyError> {
        self.add_rewrite(
            &format!("comm({x},{y})"),
            vec![x, y],
            GradedPoly::term(vec![y, x], c.clone()),
        )?;
        self.commutation_pairs.push((x, y, c));
        Ok(())
    }

    pub fn rule_names(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.name.as_str())
    }

    /// The relation polynomial (vanishing in the algebra) named `name`.
    pub fn relation(&self, name: &str) -> Option<&GradedPoly> {
        self.by_name.get(name).map(|&i| &self.rules[i].relation)
    }

    /// Whether `name` is a rewrite rule (as opposed to a contraction).
    pub fn is_rewrite(&self, name: &str) -> bool {
        self.by_name
            .get(name)
            .is_some_and(|&i| matches!(self.rules[i].kind, RuleKind::Rewrite { .. }))
    }

    /// Contraction families, as `(name, terms, constant)`.
    pub fn contraction_families(&self) -> Vec<(String, GradedPoly, Scalar)> {
        self.rules
            .iter()
            .filter_map(|r| match &r.kind {
                RuleKind::Contraction { terms, constant } => {
                    let mut p = GradedPoly::zero();
                    for (w, c) in terms {
                        p.add_term(w.clone(), c.clone());
                    }
                    Some((r.name.clone(), p, constant.clone()))
                }
                _ => None,
            })
            .collect()
    }
}

fn is_homogeneous(p: &GradedPoly) -> bool {
    p.degree() != Degree::NotHomogeneous
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    Unverified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Verified => write!(f, "Verified"),
            Verdict::Unverified => write!(f, "Unverified"),
        }
    }
}

/// One applied rule instance: the polynomial decreased by
/// `lambda * prefix * j_leg(relation) * suffix`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub leg: u8,
    pub prefix: Vec<LeggedLetter>,
    pub suffix: Vec<LeggedLetter>,
    pub lambda: Scalar,
    pub monomial: String,
    pub result: String,
}

impl TraceStep {
    pub fn render(&self, k: usize) -> String {
        format!(
            "step {k}: rule {} at monomial {} -> {}",
            self.rule, self.monomial, self.result
        )
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub residual: LeggedPoly,
    pub trace: Vec<TraceStep>,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn render_trace(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.trace.iter().enumerate() {
            out.push_str(&s.render(k + 1));
            out.push('\n');
        }
        out
    }
}

/// Reduction engine over one relation set and one phase interpretation.
pub struct Reducer<'a> {
    rels: &'a RelationSet,
    spec: ZetaSpec,
    pub trace: Vec<TraceStep>,
    record: bool,
}

fn tag(leg: u8, w: &[Letter]) -> impl Iterator<Item = LeggedLetter> + '_ {
    w.iter().map(move |l| LeggedLetter { leg, letter: *l })
}

fn same_leg(window: &[LeggedLetter]) -> Option<u8> {
    let leg = window.first()?.leg;
    window.iter().all(|l| l.leg == leg).then_some(leg)
}

impl<'a> Reducer<'a> {
    pub fn new(rels: &'a RelationSet, spec: ZetaSpec) -> Self {
        Reducer {
            rels,
            spec,
            trace: Vec::new(),
            record: true,
        }
    }

    /// Disables trace recording (for bulk normalization).
    pub fn quiet(mut self) -> Self {
        self.record = false;
        self
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(
        &mut self,
        p: &mut LeggedPoly,
        rule_idx: usize,
        leg: u8,
        word: &[LeggedLetter],
        pos: usize,
        len: usize,
        lambda: Scalar,
        group: Option<&[(Vec<Letter>, Scalar)]>,
    ) {
        let rule = &self.rels.rules[rule_idx];
        let prefix = &word[..pos];
        let suffix = &word[pos + len..];
        let mut added = LeggedPoly::zero(p.layout());
        let rhs_part: GradedPoly = match &rule.kind {
            RuleKind::Rewrite { rhs, .. } => rhs.clone(),
            RuleKind::Contraction { constant, .. } => GradedPoly::constant(constant.clone()),
        };
        let mut delta = LeggedPoly::zero(p.layout());
        for (w, c) in rule.relation.terms() {
            let full: Vec<LeggedLetter> = prefix
                .iter()
                .copied()
                .chain(tag(leg, w))
                .chain(suffix.iter().copied())
                .collect();
            delta.add_sorted_word(full, (c * &lambda).specialize(self.spec));
        }
        if self.record {
            for (w, c) in rhs_part.terms() {
                let full: Vec<LeggedLetter> = prefix
                    .iter()
                    .copied()
                    .chain(tag(leg, w))
                    .chain(suffix.iter().copied())
                    .collect();
                added.add_sorted_word(full, (c * &lambda).specialize(self.spec));
            }
            let monomial = match group {
                Some(g) if g.len() > 1 => {
                    let mut m = LeggedPoly::zero(p.layout());
                    for (w, c) in g {
                        let full: Vec<LeggedLetter> = prefix
                            .iter()
                            .copied()
                            .chain(tag(leg, w))
                            .chain(suffix.iter().copied())
                            .collect();
                        m.add_sorted_word(full, (c * &lambda).specialize(self.spec));
                    }
                    m.to_string()
                }
                _ => render_legged_word(word),
            };
            self.trace.push(TraceStep {
                rule: rule.name.clone(),
                leg,
                prefix: prefix.to_vec(),
                suffix: suffix.to_vec(),
                lambda: lambda.clone(),
                monomial,
                result: added.to_string(),
            });
        }
        p.add_assign_scaled(&delta, &Scalar::from_int(-1));
    }

    /// Leftmost rewrite redex of `word`, if any.
    fn find_rewrite(&self, word: &[LeggedLetter]) -> Option<(usize, usize, usize, u8)> {
        if self.rels.rewrites_by_window.is_empty() {
            return None;
        }
        for pos in 0..word.len() {
            for &len in &self.rels.window_lengths {
                if pos + len > word.len() {
                    break;
                }
                let window = &word[pos..pos + len];
                let Some(leg) = same_leg(window) else {
                    continue;
                };
                let key: Vec<Letter> = window.iter().map(|l| l.letter).collect();
                if let Some(&r) = self.rels.rewrites_by_window.get(&key) {
                    return Some((r, pos, len, leg));
                }
            }
        }
        None
    }

    /// Applies rewrites to fixpoint, one pass over a snapshot at a time.
    pub fn rewrite_fixpoint(&mut self, p: &mut LeggedPoly) -> bool {
        let mut any = false;
        loop {
            let snapshot: Vec<Vec<LeggedLetter>> = p.terms().map(|(w, _)| w.clone()).collect();
            let mut changed = false;
            for w in snapshot {
                let Some(c) = p.coefficient(&w).cloned() else {
                    continue;
                };
                if let Some((r, pos, len, leg)) = self.find_rewrite(&w) {
                    self.apply(p, r, leg, &w, pos, len, c, None);
                    changed = true;
                }
            }
            if !changed {
                return any;
            }
            any = true;
        }
    }

    /// Finds a complete contraction group containing `word`.
    fn find_contraction(
        &self,
        p: &LeggedPoly,
        word: &[LeggedLetter],
        coeff: &Scalar,
    ) -> Option<(usize, usize, usize, u8, Scalar)> {
        for pos in 0..word.len() {
            for &len in &self.rels.window_lengths {
                if pos + len > word.len() {
                    break;
                }
                let window = &word[pos..pos + len];
                let Some(leg) = same_leg(window) else {
                    continue;
                };
                let key: Vec<Letter> = window.iter().map(|l| l.letter).collect();
                let Some(cands) = self.rels.contractions_by_window.get(&key) else {
                    continue;
                };
                'cand: for &(r, t) in cands {
                    let RuleKind::Contraction { terms, .. } = &self.rels.rules[r].kind else {
                        continue;
                    };
                    let Some(inv) = terms[t].1.inverse() else {
                        continue;
                    };
                    let lambda = (coeff * &inv).specialize(self.spec);
                    let mut probe: Vec<LeggedLetter> = Vec::with_capacity(word.len());
                    for (s, (m, c)) in terms.iter().enumerate() {
                        if s == t {
                            continue;
                        }
                        probe.clear();
                        probe.extend_from_slice(&word[..pos]);
                        probe.extend(tag(leg, m));
                        probe.extend_from_slice(&word[pos + len..]);
                        let want = (c * &lambda).specialize(self.spec);
                        match p.coefficient(&probe) {
                            Some(have) if *have == want => {}
                            _ => continue 'cand,
                        }
                    }
                    return Some((r, pos, len, leg, lambda));
                }
            }
        }
        None
    }

    /// One pass of contractions over a snapshot; returns whether any applied.
    pub fn contraction_pass(&mut self, p: &mut LeggedPoly) -> bool {
        let snapshot: Vec<Vec<LeggedLetter>> = p.terms().map(|(w, _)| w.clone()).collect();
        let mut changed = false;
        for w in snapshot {
            let Some(c) = p.coefficient(&w).cloned() else {
                continue;
            };
            if let Some((r, pos, len, leg, lambda)) = self.find_contraction(p, &w, &c) {
                let group = match &self.rels.rules[r].kind {
                    RuleKind::Contraction { terms, .. } => Some(terms.clone()),
                    _ => None,
                };
                self.apply(p, r, leg, &w, pos, len, lambda, group.as_deref());
                changed = true;
            }
        }
        changed
    }

    /// Rewrites and contractions to fixpoint.
    pub fn reduce(&mut self, p: &LeggedPoly) -> LeggedPoly {
        let mut p = p.specialize(self.spec);
        loop {
            self.rewrite_fixpoint(&mut p);
            if !self.contraction_pass(&mut p) {
                return p;
            }
        }
    }
}

/// Exhaustive `S*[i] S[j] -> δ_ij` rewriting; every monomial of the result has
/// its family letters in the form `S_α S*_β` on each leg.
pub fn cuntz_reduce(p: &LeggedPoly, family: &str, n: usize) -> LeggedPoly {
    let degrees = family_degrees(p, family, n);
    let mut rels = RelationSet::new();
    for i in 0..n {
        for j in 0..n {
            let s = |k: usize| Letter::new(family, Index::One(k as u32 + 1), degrees[k]);
            let rhs = if i == j {
                GradedPoly::one()
            } else {
                GradedPoly::zero()
            };
            rels.add_rewrite(
                &format!("{family}:iso({},{})", i + 1, j + 1),
                vec![s(i).star(), s(j)],
                rhs,
            )
            .expect("fresh relation set");
        }
    }
    let mut red = Reducer::new(&rels, ZetaSpec::Formal).quiet();
    let mut q = p.clone();
    red.rewrite_fixpoint(&mut q);
    q
}

fn family_degrees(p: &LeggedPoly, family: &str, n: usize) -> Vec<i64> {
    let mut degrees = vec![0i64; n];
    for (w, _) in p.terms() {
        for l in w {
            if l.letter.family.as_str() == family {
                if let Index::One(i) = l.letter.index {
                    if (i as usize) <= n && i >= 1 {
                        degrees[i as usize - 1] = l.letter.base().degree;
                    }
                }
            }
        }
    }
    degrees
}

/// Contractions only, to fixpoint.
pub fn contract_sums(p: &LeggedPoly, rels: &RelationSet) -> LeggedPoly {
    let mut red = Reducer::new(rels, ZetaSpec::Formal).quiet();
    let mut q = p.clone();
    while red.contraction_pass(&mut q) {}
    q
}

pub fn verify_identity(
    lhs: &LeggedPoly,
    rhs: &LeggedPoly,
    rels: &RelationSet,
) -> VerificationReport {
    verify_identity_in(lhs, rhs, rels, ZetaSpec::Formal)
}

pub fn verify_identity_in(
    lhs: &LeggedPoly,
    rhs: &LeggedPoly,
    rels: &RelationSet,
    spec: ZetaSpec,
) -> VerificationReport {
    let start = lhs.minus(rhs);
    let mut red = Reducer::new(rels, spec);
    let residual = red.reduce(&start);
    VerificationReport {
        verdict: if residual.is_zero() {
            Verdict::Verified
        } else {
            Verdict::Unverified
        },
        residual,
        trace: red.trace,
    }
}

/// Re-applies a trace to `start`, checking each step names a declared relation.
pub fn replay_trace(
    start: &LeggedPoly,
    trace: &[TraceStep],
    rels: &RelationSet,
    spec: ZetaSpec,
) -> Result<LeggedPoly, SimplifyError> {
    let mut p = start.specialize(spec);
    for step in trace {
        let rel = rels
            .relation(&step.rule)
            .ok_or_else(|| SimplifyError::UnknownRelation(step.rule.clone()))?;
        let mut delta = LeggedPoly::zero(p.layout());
        for (w, c) in rel.terms() {
            let full: Vec<LeggedLetter> = step
                .prefix
                .iter()
                .copied()
                .chain(tag(step.leg, w))
                .chain(step.suffix.iter().copied())
                .collect();
            delta.add_word(full, (c * &step.lambda).specialize(spec));
        }
        p = p.minus(&delta);
    }
    Ok(p)
}

/// Named results of several identity checks.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub title: String,
    pub checks: Vec<(String, VerificationReport)>,
}

impl SuiteReport {
    pub fn new(title: impl Into<String>) -> Self {
        SuiteReport {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, r: VerificationReport) {
        self.checks.push((name.into(), r));
    }

    /// A check that is decided outright rather than by reduction.
    pub fn push_bool(&mut self, name: impl Into<String>, ok: bool, layout: &LegLayout) {
        self.checks.push((
            name.into(),
            VerificationReport {
                verdict: if ok {
                    Verdict::Verified
                } else {
                    Verdict::Unverified
                },
                residual: LeggedPoly::zero(layout),
                trace: Vec::new(),
            },
        ));
    }

    pub fn extend(&mut self, other: SuiteReport) {
        for (name, r) in other.checks {
            self.checks.push((format!("{}/{}", other.title, name), r));
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.checks.iter().all(|(_, r)| r.is_verified()) {
            Verdict::Verified
        } else {
            Verdict::Unverified
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verdict() == Verdict::Verified
    }

    pub fn total_steps(&self) -> usize {
        self.checks.iter().map(|(_, r)| r.trace.len()).sum()
    }

    /// Line-oriented report; traces included when `with_trace`.
    pub fn render(&self, with_trace: bool) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.title));
        for (name, r) in &self.checks {
            out.push_str(&format!(
                "{}: {} ({} steps)\n",
                name,
                r.verdict,
                r.trace.len()
            ));
            if !r.is_verified() {
                out.push_str(&format!("  residual: {}\n", r.residual));
            }
            if with_trace {
                for (k, s) in r.trace.iter().enumerate() {
                    out.push_str("  ");
                    out.push_str(&s.render(k + 1));
                    out.push('\n');
                }
            }
        }
        out.push_str(&format!(
            "verdict: {} ({} checks, {} steps)\n",
            self.verdict(),
            self.checks.len(),
            self.total_steps()
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generator_matrix;

    fn s(i: u32) -> Letter {
        Letter::new("S", Index::One(i), 0)
    }

    fn one_leg() -> LegLayout {
        LegLayout::braided(1)
    }

    fn word(ls: &[Letter]) -> LeggedPoly {
        LeggedPoly::from_words(
            &one_leg(),
            [(
                ls.iter().map(|l| LeggedLetter::new(1, *l)).collect(),
                Scalar::one(),
            )],
        )
    }

    #[test]
    fn cuntz_examples() {
        assert_eq!(
            cuntz_reduce(&word(&[s(1).star(), s(1)]), "S", 2),
            LeggedPoly::one(&one_leg())
        );
        assert!(cuntz_reduce(&word(&[s(1).star(), s(2)]), "S", 2).is_zero());
        assert_eq!(
            cuntz_reduce(&word(&[s(1), s(2).star(), s(2), s(3).star()]), "S", 3),
            word(&[s(1), s(3).star()])
        );
    }

    #[test]
    fn unitary_contractions() {
        for n in 1..=4usize {
            let d = vec![0i64; n];
            let u = generator_matrix("u", &d);
            let mut rels = RelationSet::new();
            rels.add_unitary("u", &u).unwrap();
            let l = |i: usize, j: usize| Letter::new("u", Index::Two(i as u32, j as u32), 0);
            let mut diag = LeggedPoly::zero(&one_leg());
            let mut off = LeggedPoly::zero(&one_leg());
            for k in 1..=n {
                diag = diag.plus(&word(&[l(k, 1).star(), l(k, 1)]));
                if n > 1 {
                    off = off.plus(&word(&[l(k, 1).star(), l(k, 2)]));
                }
            }
            assert_eq!(contract_sums(&diag, &rels), LeggedPoly::one(&one_leg()));
            assert!(contract_sums(&off, &rels).is_zero());
        }
    }

    #[test]
    fn cuntz_sum_inside_product() {
        let mut rels = RelationSet::new();
        rels.add_cuntz_family("S", &[0, 0]).unwrap();
        let a = Letter::new("a", Index::None, 0);
        let b = Letter::new("b", Index::None, 0);
        let p = word(&[a, s(1), s(1).star(), b]).plus(&word(&[a, s(2), s(2).star(), b]));
        assert_eq!(contract_sums(&p, &rels), word(&[a, b]));
    }

    #[test]
    fn verify_examples() {
        let rels = RelationSet::new();
        let u12 = Letter::new("u", Index::Two(1, 2), 0);
        let u21 = Letter::new("u", Index::Two(2, 1), 0);
        let r = verify_identity(&word(&[u12]), &word(&[u12]), &rels);
        assert!(r.is_verified());
        assert!(r.trace.is_empty());
        let r = verify_identity(&word(&[u12]), &word(&[u21]), &rels);
        assert_eq!(r.verdict, Verdict::Unverified);
        assert_eq!(r.residual, word(&[u12]).minus(&word(&[u21])));
    }

    #[test]
    fn trace_lines_and_replay() {
        let mut rels = RelationSet::new();
        rels.add_cuntz_family("S", &[0, 0]).unwrap();
        let lay = one_leg();
        let p = word(&[s(1).star(), s(1)])
            .plus(&word(&[s(2), s(1).star(), s(1), s(2).star()]))
            .plus(&word(&[s(1), s(1).star()]));
        let r = verify_identity(&p, &LeggedPoly::constant(Scalar::from_int(2), &lay), &rels);
        assert!(r.is_verified(), "{}", r.residual);
        assert!(r.render_trace().starts_with("step 1: rule S:iso"));
        let start = p.minus(&LeggedPoly::constant(Scalar::from_int(2), &lay));
        let replayed = replay_trace(&start, &r.trace, &rels, ZetaSpec::Formal).unwrap();
        assert_eq!(replayed, r.residual);
    }
}
