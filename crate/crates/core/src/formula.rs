//! Disjunctions of disequations and height predicates over a 1-or-n
//! automaton: construction from a pattern and its subsumers, the rewrite
//! calculus that brings them into final form, and solution extraction.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::constraints::{InstanceConstraint, RestrictedConstraint, StateInfo};
use crate::dta::{Dta, LanguageSampler, StateId};
use crate::error::{Error, Result};
use crate::subsume::structurally_subsumes;
use crate::term::{Signature, Substitution, SymbolId, Term, Var, VarTable};

/// A term with the state of every subterm attached. Ordering, equality and
/// hashing only look at the term.
#[derive(Clone, Debug)]
pub struct ATerm(Arc<ANode>);

#[derive(Debug)]
struct ANode {
    term: Term,
    state: StateId,
    children: Vec<ATerm>,
}

impl ATerm {
    pub fn new(t: &Term, a: &Dta, c: &BTreeMap<Var, StateId>) -> Result<ATerm> {
        match t {
            Term::Var(v) => {
                let state = *c
                    .get(v)
                    .ok_or_else(|| Error::UnconstrainedVariable(format!("#{}", v.0)))?;
                Ok(ATerm(Arc::new(ANode {
                    term: t.clone(),
                    state,
                    children: vec![],
                })))
            }
            Term::App(f, cs) => {
                let children = cs.iter().map(|c2| ATerm::new(c2, a, c)).collect::<Result<Vec<_>>>()?;
                let qs: Vec<StateId> = children.iter().map(|c| c.state()).collect();
                let state = a
                    .step(*f, &qs)
                    .ok_or_else(|| Error::UndefinedState(a.signature().name(*f).to_string()))?;
                Ok(ATerm(Arc::new(ANode {
                    term: t.clone(),
                    state,
                    children,
                })))
            }
        }
    }

    pub fn term(&self) -> &Term {
        &self.0.term
    }

    pub fn state(&self) -> StateId {
        self.0.state
    }

    pub fn children(&self) -> &[ATerm] {
        &self.0.children
    }

    pub fn as_var(&self) -> Option<Var> {
        self.0.term.as_var()
    }

    pub fn symbol(&self) -> Option<SymbolId> {
        self.0.term.symbol()
    }
}

impl PartialEq for ATerm {
    fn eq(&self, other: &Self) -> bool {
        self.0.term == other.0.term
    }
}

impl Eq for ATerm {}

impl std::hash::Hash for ATerm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.term.hash(state)
    }
}

impl PartialOrd for ATerm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ATerm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.term.cmp(&other.0.term)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    /// Sides ordered by the term order, so variables come first.
    Neq(ATerm, ATerm),
    HeightGt(ATerm, usize),
}

impl Predicate {
    pub fn neq(a: ATerm, b: ATerm) -> Self {
        if a <= b {
            Predicate::Neq(a, b)
        } else {
            Predicate::Neq(b, a)
        }
    }

    /// Truth value under `φ`, when `φ` grounds the predicate.
    pub fn eval(&self, phi: &Substitution) -> Option<bool> {
        match self {
            Predicate::Neq(a, b) => {
                let (x, y) = (phi.apply(a.term()), phi.apply(b.term()));
                (x.is_ground() && y.is_ground()).then(|| x != y)
            }
            Predicate::HeightGt(t, h) => {
                let x = phi.apply(t.term());
                x.is_ground().then(|| x.height() > *h)
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        match self {
            Predicate::Neq(a, b) => a.term().vars().union(&b.term().vars()).copied().collect(),
            Predicate::HeightGt(t, _) => t.term().vars(),
        }
    }
}

/// A set of predicates, kept sorted and duplicate-free. Empty means TRUE.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunction(Vec<Predicate>);

impl Conjunction {
    pub fn new(mut preds: Vec<Predicate>) -> Self {
        preds.sort();
        preds.dedup();
        Conjunction(preds)
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn without(&self, i: usize) -> Vec<Predicate> {
        let mut rest = self.0.clone();
        rest.remove(i);
        rest
    }

    fn replacing(&self, i: usize, p: Predicate) -> Conjunction {
        let mut rest = self.without(i);
        rest.push(p);
        Conjunction::new(rest)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0.iter().flat_map(|p| p.vars()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Rule {
    RemoveInsat1,
    RemoveInsat2,
    RemoveSat1,
    RemoveSat2,
    Decompose,
    DecreaseHeight,
    RemoveHeight,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::RemoveInsat1,
        Rule::RemoveInsat2,
        Rule::RemoveSat1,
        Rule::RemoveSat2,
        Rule::Decompose,
        Rule::DecreaseHeight,
        Rule::RemoveHeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::RemoveInsat1 => "Remove-insat1",
            Rule::RemoveInsat2 => "Remove-insat2",
            Rule::RemoveSat1 => "Remove-sat1",
            Rule::RemoveSat2 => "Remove-sat2",
            Rule::Decompose => "Decompose",
            Rule::DecreaseHeight => "Decrease-height",
            Rule::RemoveHeight => "Remove-height",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `⟨F, A, C⟩` of order `n`. An empty disjunct set means FALSE.
#[derive(Clone, Debug)]
pub struct ConstrainedFormula {
    pub disjuncts: BTreeSet<Conjunction>,
    dta: Arc<Dta>,
    info: Arc<StateInfo>,
    c: BTreeMap<Var, StateId>,
    vars: VarTable,
    order: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ReduceStats {
    pub applications: BTreeMap<String, usize>,
    pub conjunctions_processed: usize,
    pub memo_hits: usize,
    pub early_true: bool,
}

impl ReduceStats {
    pub fn total(&self) -> usize {
        self.applications.values().sum()
    }

    pub fn merge(&mut self, other: &ReduceStats) {
        for (k, v) in &other.applications {
            *self.applications.entry(k.clone()).or_default() += v;
        }
        self.conjunctions_processed += other.conjunctions_processed;
        self.memo_hits += other.memo_hits;
        self.early_true |= other.early_true;
    }
}

impl ConstrainedFormula {
    /// An empty formula over `c`; add disjuncts with [`Self::push`].
    pub fn new(dta: Arc<Dta>, info: Arc<StateInfo>, vars: VarTable, c: BTreeMap<Var, StateId>, order: usize) -> Self {
        ConstrainedFormula {
            disjuncts: BTreeSet::new(),
            dta,
            info,
            c,
            vars,
            order,
        }
    }

    pub fn dta(&self) -> &Dta {
        &self.dta
    }

    pub fn info(&self) -> &StateInfo {
        &self.info
    }

    pub fn map(&self) -> &BTreeMap<Var, StateId> {
        &self.c
    }

    pub fn var_table(&self) -> &VarTable {
        &self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.disjuncts.iter().any(|c| c.is_true())
    }

    pub fn annotate(&self, t: &Term) -> Result<ATerm> {
        ATerm::new(t, &self.dta, &self.c)
    }

    pub fn neq(&self, s: &Term, t: &Term) -> Result<Predicate> {
        Ok(Predicate::neq(self.annotate(s)?, self.annotate(t)?))
    }

    /// `height(t) > h`; requires `h ≥ |Q| + height(t)`.
    pub fn height_gt(&self, t: &Term, h: usize) -> Result<Predicate> {
        if h < self.dta.num_states() + t.height() {
            return Err(Error::pre(format!(
                "height bound {h} below |Q| + height = {}",
                self.dta.num_states() + t.height()
            )));
        }
        Ok(Predicate::HeightGt(self.annotate(t)?, h))
    }

    pub fn push(&mut self, preds: Vec<Predicate>) -> Result<()> {
        let conj = Conjunction::new(preds);
        if conj.len() > self.order {
            return Err(Error::pre(format!(
                "conjunction of {} predicates in a formula of order {}",
                conj.len(),
                self.order
            )));
        }
        self.disjuncts.insert(conj);
        Ok(())
    }

    fn with_disjuncts(&self, disjuncts: BTreeSet<Conjunction>) -> Self {
        ConstrainedFormula {
            disjuncts,
            dta: self.dta.clone(),
            info: self.info.clone(),
            c: self.c.clone(),
            vars: self.vars.clone(),
            order: self.order,
        }
    }

    /// The first rule applicable to `conj`, with its result conjunctions.
    /// Whole-conjunction removals are tried first, then predicate removals,
    /// then the splitting rules.
    pub fn step(&self, conj: &Conjunction) -> Option<(Rule, Vec<Conjunction>)> {
        let nq = self.dta.num_states();
        let preds = conj.predicates();
        for p in preds {
            match p {
                Predicate::Neq(a, b) if a == b => return Some((Rule::RemoveInsat1, vec![])),
                Predicate::Neq(a, b) if a.state() == b.state() && self.info.is_singleton(a.state()) => {
                    return Some((Rule::RemoveInsat2, vec![]))
                }
                Predicate::HeightGt(t, h) if !self.info.is_infinite(t.state()) && *h >= nq => {
                    return Some((Rule::RemoveHeight, vec![]))
                }
                _ => {}
            }
        }
        for (i, p) in preds.iter().enumerate() {
            if let Predicate::Neq(a, b) = p {
                let roots_differ = matches!((a.symbol(), b.symbol()), (Some(f), Some(g)) if f != g);
                if a.state() != b.state() || roots_differ {
                    return Some((Rule::RemoveSat1, vec![Conjunction::new(conj.without(i))]));
                }
                let occurs = |x: &ATerm, t: &ATerm| x.as_var().is_some_and(|v| x != t && t.term().contains_var(v));
                if occurs(a, b) || occurs(b, a) {
                    return Some((Rule::RemoveSat2, vec![Conjunction::new(conj.without(i))]));
                }
            }
        }
        for (i, p) in preds.iter().enumerate() {
            match p {
                Predicate::Neq(a, b) if a.symbol().is_some() && a.symbol() == b.symbol() => {
                    assert!(!a.children().is_empty(), "equal constants are removed first");
                    let out = a
                        .children()
                        .iter()
                        .zip(b.children())
                        .map(|(x, y)| conj.replacing(i, Predicate::neq(x.clone(), y.clone())))
                        .collect();
                    return Some((Rule::Decompose, out));
                }
                // A constant has height 0, so with no children the
                // conjunction simply disappears.
                Predicate::HeightGt(t, h)
                    if t.symbol().is_some()
                        && self.info.is_infinite(t.state())
                        && (*h > nq || t.children().is_empty()) =>
                {
                    let out = t
                        .children()
                        .iter()
                        .map(|c| conj.replacing(i, Predicate::HeightGt(c.clone(), h - 1)))
                        .collect();
                    return Some((Rule::DecreaseHeight, out));
                }
                _ => {}
            }
        }
        None
    }

    /// Applies the rules until none applies. Each distinct conjunction is
    /// processed once; a TRUE disjunct ends the run.
    pub fn reduce(&self, max_conjunctions: usize, mut trace: Option<&mut Vec<String>>) -> Result<(Self, ReduceStats)> {
        let mut stats = ReduceStats::default();
        let mut seen: HashSet<Conjunction> = HashSet::new();
        let mut queue: VecDeque<Conjunction> = VecDeque::new();
        let mut finals = BTreeSet::new();
        if self.is_true() {
            stats.early_true = true;
            return Ok((self.with_disjuncts(BTreeSet::from([Conjunction::default()])), stats));
        }
        for c in &self.disjuncts {
            if seen.insert(c.clone()) {
                queue.push_back(c.clone());
            }
        }
        while let Some(conj) = queue.pop_front() {
            stats.conjunctions_processed += 1;
            if stats.conjunctions_processed > max_conjunctions {
                return Err(Error::limit("formula conjunctions", max_conjunctions));
            }
            let Some((rule, out)) = self.step(&conj) else {
                finals.insert(conj);
                continue;
            };
            *stats.applications.entry(rule.name().to_string()).or_default() += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(format!(
                    "RULE {} : {} ⇒ {}",
                    rule.name(),
                    self.show_conjunction(&conj),
                    self.show_disjunction(out.iter())
                ));
            }
            for c in out {
                if c.is_true() {
                    stats.early_true = true;
                    return Ok((self.with_disjuncts(BTreeSet::from([c])), stats));
                }
                if seen.insert(c.clone()) {
                    queue.push_back(c);
                } else {
                    stats.memo_hits += 1;
                }
            }
        }
        Ok((self.with_disjuncts(finals), stats))
    }

    /// Shape test for final formulas: every disequation is `x ≠ t` with
    /// `x ∉ Vars(t)`, equal states and `|L(A,C(x))| > n`; every height
    /// predicate constrains a variable with an infinite language.
    pub fn is_final(&self) -> bool {
        self.disjuncts.iter().all(|c| self.is_final_conjunction(c))
    }

    pub fn is_final_conjunction(&self, conj: &Conjunction) -> bool {
        let n = self.order;
        conj.len() <= n
            && conj.predicates().iter().all(|p| match p {
                Predicate::Neq(a, b) => {
                    let ok = |x: &ATerm, t: &ATerm| {
                        x.as_var().is_some_and(|v| {
                            !t.term().contains_var(v)
                                && x.state() == t.state()
                                && self.info.exceeds(x.state(), n)
                        })
                    };
                    ok(a, b) || ok(b, a)
                }
                Predicate::HeightGt(t, _) => t.as_var().is_some() && self.info.is_infinite(t.state()),
            })
    }

    /// Whether `φ` is a solution: states match `C` on its domain and some
    /// conjunction holds.
    pub fn is_solution(&self, phi: &Substitution) -> bool {
        self.c
            .iter()
            .all(|(v, q)| phi.get(*v).is_some_and(|t| self.dta.run(t) == Some(*q)))
            && self
                .disjuncts
                .iter()
                .any(|c| c.predicates().iter().all(|p| p.eval(phi) == Some(true)))
    }

    /// A solution of a final formula, or `None` when it is FALSE.
    pub fn solve(&self) -> Result<Option<Substitution>> {
        self.solve_avoiding(None)
    }

    /// Like [`Self::solve`], with `x` kept away from the listed values.
    pub fn solve_avoiding(&self, avoid: Option<(Var, &[Term])>) -> Result<Option<Substitution>> {
        if !self.is_final() {
            return Err(Error::pre("solve needs a final formula"));
        }
        let Some(conj) = self.disjuncts.iter().next() else {
            return Ok(None);
        };
        self.solve_conjunction(conj, avoid).map(Some)
    }

    fn solve_conjunction(&self, conj: &Conjunction, avoid: Option<(Var, &[Term])>) -> Result<Substitution> {
        let nq = self.dta.num_states();
        let avoid_len = avoid.map_or(0, |(_, a)| a.len());
        let limit = self.order + avoid_len + 2;
        let horizon = 4 * (nq + 1) * (limit + 2);
        let mut sampler = LanguageSampler::new(&self.dta, limit);

        let mut scope: BTreeSet<Var> = self.c.keys().copied().collect();
        scope.extend(conj.vars());
        let mut min_height: BTreeMap<Var, usize> = BTreeMap::new();
        let mut neqs: Vec<(Term, Term)> = Vec::new();
        for p in conj.predicates() {
            match p {
                Predicate::Neq(a, b) => neqs.push((a.term().clone(), b.term().clone())),
                Predicate::HeightGt(t, h) => {
                    let v = t.as_var().expect("final height predicates are on variables");
                    let e = min_height.entry(v).or_default();
                    *e = (*e).max(h + 1);
                }
            }
        }
        let state = |v: Var| -> Result<StateId> {
            self.c
                .get(&v)
                .copied()
                .ok_or_else(|| Error::UnconstrainedVariable(self.vars.name(v).to_string()))
        };

        let mut phi = Substitution::new();
        let assign = |phi: &mut Substitution, neqs: &mut Vec<(Term, Term)>, x: Var, t: Term| {
            let one = Substitution(BTreeMap::from([(x, t.clone())]));
            for (a, b) in neqs.iter_mut() {
                *a = one.apply(a);
                *b = one.apply(b);
            }
            phi.insert(x, t);
        };

        // Singleton languages leave no choice.
        for &v in &scope {
            let q = state(v)?;
            if self.info.is_singleton(q) {
                if avoid.is_some_and(|(x, _)| x == v) {
                    return Err(Error::pre(format!("{} has a single value", self.vars.name(v))));
                }
                let t = sampler.upto(q, nq).first().cloned().ok_or_else(|| {
                    Error::Invariant(format!("singleton state {q} has no term below height {nq}"))
                })?;
                assign(&mut phi, &mut neqs, v, t);
            }
        }
        for (a, b) in &neqs {
            if !a.is_var() && !b.is_var() {
                return Err(Error::Invariant(format!(
                    "disequation {} ≠ {} lost its variable side",
                    a.display(self.dta.signature(), Some(&self.vars)),
                    b.display(self.dta.signature(), Some(&self.vars))
                )));
            }
        }

        let pick = |x: Var, neqs: &[(Term, Term)], sampler: &mut LanguageSampler| -> Result<Term> {
            let q = state(x)?;
            let lo = min_height.get(&x).copied().unwrap_or(0);
            let relevant: Vec<&(Term, Term)> = neqs
                .iter()
                .filter(|(a, b)| {
                    let vs: BTreeSet<Var> = a.vars().union(&b.vars()).copied().collect();
                    vs.len() == 1 && vs.contains(&x)
                })
                .collect();
            let avoided = avoid.filter(|(v, _)| *v == x).map_or(&[][..], |(_, a)| a);
            sampler
                .pick(q, lo, horizon, |t| {
                    if avoided.contains(t) {
                        return false;
                    }
                    let one = Substitution(BTreeMap::from([(x, t.clone())]));
                    relevant.iter().all(|(a, b)| one.apply(a) != one.apply(b))
                })
                .ok_or_else(|| Error::Invariant(format!("no admissible value for {}", self.vars.name(x))))
        };

        loop {
            let open: Vec<BTreeSet<Var>> = neqs
                .iter()
                .map(|(a, b)| a.vars().union(&b.vars()).copied().collect::<BTreeSet<_>>())
                .filter(|vs| !vs.is_empty())
                .collect();
            if open.is_empty() {
                break;
            }
            // (b) when some disequation has a single variable, else (a).
            let x = match open.iter().find(|vs| vs.len() == 1) {
                Some(vs) => *vs.iter().next().unwrap(),
                None => *open.iter().flatten().min().unwrap(),
            };
            let t = pick(x, &neqs, &mut sampler)?;
            assign(&mut phi, &mut neqs, x, t);
        }
        // (c) everything left.
        for &v in &scope {
            if phi.get(v).is_none() {
                let t = pick(v, &neqs, &mut sampler)?;
                assign(&mut phi, &mut neqs, v, t);
            }
        }

        let single = self.with_disjuncts(BTreeSet::from([conj.clone()]));
        if !single.is_solution(&phi) {
            return Err(Error::Invariant("constructed assignment is not a solution".into()));
        }
        Ok(phi)
    }

    /// `count` solutions pairwise distinct on `x`.
    pub fn enumerate_witnesses(&self, x: Var, count: usize) -> Result<Vec<Substitution>> {
        if self.is_false() {
            return Err(Error::pre("formula has no solution"));
        }
        let q = self
            .c
            .get(&x)
            .copied()
            .ok_or_else(|| Error::UnconstrainedVariable(self.vars.name(x).to_string()))?;
        if !self.info.is_infinite(q) {
            return Err(Error::pre(format!("{} has a finite language", self.vars.name(x))));
        }
        let mut out = Vec::with_capacity(count);
        let mut seen: Vec<Term> = Vec::new();
        for _ in 0..count {
            let phi = self
                .solve_avoiding(Some((x, &seen)))?
                .ok_or_else(|| Error::Invariant("final formula lost its solutions".into()))?;
            let v = phi.get(x).cloned().expect("solve assigns every variable");
            if seen.contains(&v) {
                return Err(Error::Invariant("repeated witness value".into()));
            }
            seen.push(v);
            out.push(phi);
        }
        Ok(out)
    }

    pub fn show_predicate(&self, p: &Predicate) -> String {
        let sig: &Signature = self.dta.signature();
        match p {
            Predicate::Neq(a, b) => format!(
                "{} ≠ {}",
                a.term().display(sig, Some(&self.vars)),
                b.term().display(sig, Some(&self.vars))
            ),
            Predicate::HeightGt(t, h) => format!("height({}) > {h}", t.term().display(sig, Some(&self.vars))),
        }
    }

    pub fn show_conjunction(&self, c: &Conjunction) -> String {
        if c.is_true() {
            return "⊤".into();
        }
        c.predicates()
            .iter()
            .map(|p| self.show_predicate(p))
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }

    fn show_disjunction<'a>(&self, cs: impl Iterator<Item = &'a Conjunction>) -> String {
        let parts: Vec<String> = cs.map(|c| format!("({})", self.show_conjunction(c))).collect();
        if parts.is_empty() {
            "⊥".into()
        } else {
            parts.join(" ∨ ")
        }
    }
}

impl fmt::Display for ConstrainedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.show_disjunction(self.disjuncts.iter()))
    }
}

/// `F(s, S, W, h)`: the instances of `s` not covered by `subsumers` under
/// `r`, as a disjunction over the ways each subsumer can fail to match.
pub fn build_formula(
    s: &Term,
    subsumers: &[Term],
    r: &RestrictedConstraint,
    max_disjuncts: usize,
) -> Result<ConstrainedFormula> {
    let n = subsumers.len();
    let nq = r.dta().num_states();
    let info = r.info();
    if s.vars().iter().any(|x| r.w().contains(x)) {
        return Err(Error::pre("pattern has height-capped variables"));
    }
    if r.h() < nq + s.height() {
        return Err(Error::pre(format!("h = {} below |Q| + height(s) = {}", r.h(), nq + s.height())));
    }
    if !r.dta().states().all(|q| info.is_empty(q) || info.is_singleton(q) || info.exceeds(q, n)) {
        return Err(Error::pre(format!("automaton is not 1-or-{}", n + 1)));
    }
    for t in subsumers {
        if !structurally_subsumes(t, s, r) {
            return Err(Error::pre("every term must structurally subsume the pattern"));
        }
    }
    let c: BTreeMap<Var, StateId> = s
        .vars()
        .into_iter()
        .map(|v| r.state_of_var(v).map(|q| (v, q)).ok_or_else(|| Error::UnconstrainedVariable(r.vars().name(v).to_string())))
        .collect::<Result<_>>()?;
    let mut f = ConstrainedFormula::new(
        r.single().dta_arc().clone(),
        Arc::new(info.clone()),
        r.vars().clone(),
        c,
        n,
    );

    // For each subsumer: a pair of positions sharing a variable, or a
    // position of a height-capped variable.
    let mut options: Vec<Vec<Predicate>> = Vec::with_capacity(n);
    for t in subsumers {
        let mut opts = Vec::new();
        let vpos = t.var_positions();
        for (i, (p, x)) in vpos.iter().enumerate() {
            for (u, y) in &vpos[i + 1..] {
                if x == y {
                    opts.push(f.neq(s.subterm(p)?, s.subterm(u)?)?);
                }
            }
        }
        for (p, x) in &vpos {
            if r.w().contains(x) {
                opts.push(f.height_gt(s.subterm(p)?, r.h())?);
            }
        }
        opts.sort();
        opts.dedup();
        options.push(opts);
    }
    let total = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
    if total.is_none_or(|t| t > max_disjuncts) {
        return Err(Error::limit("formula disjuncts", max_disjuncts));
    }
    let mut combos: Vec<Vec<Predicate>> = vec![vec![]];
    for opts in &options {
        let mut next = Vec::with_capacity(combos.len() * opts.len());
        for prefix in &combos {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        combos = next;
    }
    for preds in combos {
        f.push(preds)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::SingleConstraint;
    use crate::dta::StateLabel;
    use crate::term::parse_term;

    struct Fx {
        sig: Arc<Signature>,
        vars: VarTable,
        dta: Arc<Dta>,
        info: Arc<StateInfo>,
    }

    /// States: qa (a), qb (b), qs (every other term, infinite).
    fn fixture() -> Fx {
        let sig = Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap());
        let mut a = Dta::new(sig.clone()).unwrap();
        let qa = a.add_state(StateLabel::Named("qa".into()));
        let qb = a.add_state(StateLabel::Named("qb".into()));
        let qs = a.add_state(StateLabel::Named("qs".into()));
        a.add_transition(sig.lookup("a").unwrap(), &[], qa).unwrap();
        a.add_transition(sig.lookup("b").unwrap(), &[], qb).unwrap();
        for l in [qa, qb, qs] {
            for r in [qa, qb, qs] {
                a.add_transition(sig.lookup("f").unwrap(), &[l, r], qs).unwrap();
            }
        }
        let mut vars = VarTable::new();
        for v in ["x", "y", "z"] {
            vars.declare(v);
        }
        let info = Arc::new(StateInfo::of(&a));
        Fx {
            sig,
            vars,
            dta: Arc::new(a),
            info,
        }
    }

    impl Fx {
        fn t(&self, s: &str) -> Term {
            parse_term(s, &self.sig, &self.vars).unwrap()
        }
        fn v(&self, s: &str) -> Var {
            self.vars.lookup(s).unwrap()
        }
        fn formula(&self, c: &[(&str, u32)], order: usize) -> ConstrainedFormula {
            let c = c.iter().map(|(v, q)| (self.v(v), StateId(*q))).collect();
            ConstrainedFormula::new(self.dta.clone(), self.info.clone(), self.vars.clone(), c, order)
        }
    }

    #[test]
    fn insat_rules_empty_the_formula() {
        let fx = fixture();
        let mut f = fx.formula(&[("x", 0), ("y", 0)], 1);
        f.push(vec![f.neq(&fx.t("a"), &fx.t("a")).unwrap()]).unwrap();
        f.push(vec![f.neq(&fx.t("x"), &fx.t("y")).unwrap()]).unwrap();
        let (g, stats) = f.reduce(1000, None).unwrap();
        assert!(g.is_false());
        assert_eq!(stats.applications["Remove-insat1"], 1);
        assert_eq!(stats.applications["Remove-insat2"], 1);
        assert_eq!(g.solve().unwrap(), None);
    }

    #[test]
    fn decompose_then_sat1_gives_true() {
        let fx = fixture();
        let mut f = fx.formula(&[("x", 2), ("y", 2)], 1);
        f.push(vec![f.neq(&fx.t("f(x,a)"), &fx.t("f(y,b)")).unwrap()]).unwrap();
        let mut trace = Vec::new();
        let (g, _) = f.reduce(1000, Some(&mut trace)).unwrap();
        assert!(g.is_true());
        assert!(trace[0].starts_with("RULE Decompose : f(x,a) ≠ f(y,b) ⇒ "));
        assert!(g.solve().unwrap().is_some());
    }

    #[test]
    fn decrease_height_splits_on_children() {
        let fx = fixture();
        let f0 = fx.formula(&[("x", 2), ("y", 2)], 1);
        let h = 3 + 1 + 2;
        let mut f = f0.clone();
        f.push(vec![f.height_gt(&fx.t("f(x,y)"), h).unwrap()]).unwrap();
        let (rule, out) = f.step(f.disjuncts.iter().next().unwrap()).unwrap();
        assert_eq!(rule, Rule::DecreaseHeight);
        let shown: Vec<String> = out.iter().map(|c| f.show_conjunction(c)).collect();
        assert_eq!(shown, vec![format!("height(x) > {}", h - 1), format!("height(y) > {}", h - 1)]);
        assert!(f0.height_gt(&fx.t("f(x,y)"), 3).is_err());
    }

    #[test]
    fn final_shape_and_solution() {
        let fx = fixture();
        let mut f = fx.formula(&[("x", 2), ("y", 2)], 1);
        f.push(vec![f.neq(&fx.t("x"), &fx.t("y")).unwrap()]).unwrap();
        assert!(f.is_final());
        let phi = f.solve().unwrap().unwrap();
        assert_ne!(phi.get(fx.v("x")), phi.get(fx.v("y")));
        assert!(f.is_solution(&phi));
        let ws = f.enumerate_witnesses(fx.v("x"), 10).unwrap();
        let xs: BTreeSet<&Term> = ws.iter().map(|p| p.get(fx.v("x")).unwrap()).collect();
        assert_eq!(xs.len(), 10);
        assert!(ws.iter().all(|p| f.is_solution(p)));
    }

    #[test]
    fn occurs_check_satisfies() {
        let fx = fixture();
        let mut f = fx.formula(&[("x", 2), ("y", 2)], 1);
        f.push(vec![f.neq(&fx.t("x"), &fx.t("f(x,y)")).unwrap()]).unwrap();
        let (g, stats) = f.reduce(100, None).unwrap();
        assert!(g.is_true());
        assert_eq!(stats.applications["Remove-sat2"], 1);
    }

    #[test]
    fn height_on_variable_is_final() {
        let fx = fixture();
        let mut f = fx.formula(&[("x", 2)], 1);
        f.push(vec![f.height_gt(&fx.t("x"), 5).unwrap()]).unwrap();
        assert!(f.is_final());
        let phi = f.solve().unwrap().unwrap();
        assert!(phi.get(fx.v("x")).unwrap().height() > 5);
    }

    #[test]
    fn build_from_subsumer() {
        let fx = fixture();
        let (x, y, z) = (fx.v("x"), fx.v("y"), fx.v("z"));
        let single = SingleConstraint::with_info(
            fx.dta.clone(),
            fx.info.clone(),
            fx.vars.clone(),
            BTreeMap::from([(x, StateId(2)), (y, StateId(2)), (z, StateId(2))]),
        )
        .unwrap();
        let r = single.restrict(BTreeSet::new(), 3 + 1);
        let s = fx.t("f(x,y)");
        let f = build_formula(&s, &[fx.t("f(z,z)")], &r, 100).unwrap();
        assert_eq!(f.to_string(), "(x ≠ y)");
        let rw = single.restrict(BTreeSet::from([z]), 3 + 1);
        let f = build_formula(&s, &[fx.t("f(z,z)")], &rw, 100).unwrap();
        assert_eq!(f.to_string(), "(x ≠ y) ∨ (height(x) > 4) ∨ (height(y) > 4)");
        let empty = build_formula(&s, &[], &r, 100).unwrap();
        assert!(empty.is_true());
        // f(x,x) covered by f(z,z).
        let g = build_formula(&fx.t("f(x,x)"), &[fx.t("f(z,z)")], &r, 100).unwrap();
        assert!(g.reduce(100, None).unwrap().0.is_false());
    }
}
