//! Constraint systems on pattern variables and the reduction from one
//! automaton per variable to a single 1-or-n automaton.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use crate::dta::{Dta, StateId, StateLabel};
use crate::error::{Error, Result};
use crate::subsume::canonical_key;
use crate::term::{Position, Signature, Term, Var, VarOrigin, VarTable};

/// Language-size facts about every state of an automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    nonempty: Vec<bool>,
    infinite: Vec<bool>,
    /// `min(|L(A,q)|, usize::MAX)`.
    size: Vec<usize>,
}

impl StateInfo {
    pub fn of(a: &Dta) -> Self {
        let n = a.num_states();
        let mut nonempty = vec![false; n];
        for q in a.non_empty_states() {
            nonempty[q.index()] = true;
        }
        let mut infinite = vec![false; n];
        for q in a.infinite_states() {
            infinite[q.index()] = true;
        }
        StateInfo {
            nonempty,
            infinite,
            size: a.count_upto(usize::MAX),
        }
    }

    pub fn is_empty(&self, q: StateId) -> bool {
        !self.nonempty[q.index()]
    }

    pub fn is_infinite(&self, q: StateId) -> bool {
        self.infinite[q.index()]
    }

    pub fn is_singleton(&self, q: StateId) -> bool {
        self.size[q.index()] == 1 && !self.infinite[q.index()]
    }

    /// `|L(A,q)| > n`.
    pub fn exceeds(&self, q: StateId, n: usize) -> bool {
        self.infinite[q.index()] || self.size[q.index()] > n
    }

    /// Exact size for finite languages (saturating), `None` when infinite.
    pub fn size(&self, q: StateId) -> Option<usize> {
        (!self.infinite[q.index()]).then_some(self.size[q.index()])
    }
}

/// Common view of single and restricted constraints.
pub trait InstanceConstraint {
    fn dta(&self) -> &Dta;
    fn info(&self) -> &StateInfo;
    fn vars(&self) -> &VarTable;
    fn state_of_var(&self, v: Var) -> Option<StateId>;

    /// Height cap on instantiations of `v`, if any.
    fn height_cap(&self, _v: Var) -> Option<usize> {
        None
    }

    /// `C(s) = A(s[x ← C(x)])`.
    fn state_of(&self, s: &Term) -> Option<StateId> {
        self.dta().run_with(s, &|v| self.state_of_var(v))
    }
}

#[derive(Clone, Debug)]
pub struct SingleConstraint {
    dta: Arc<Dta>,
    info: Arc<StateInfo>,
    vars: VarTable,
    c: BTreeMap<Var, StateId>,
}

impl SingleConstraint {
    pub fn new(dta: Dta, vars: VarTable, c: BTreeMap<Var, StateId>) -> Result<Self> {
        let info = Arc::new(StateInfo::of(&dta));
        Self::with_info(Arc::new(dta), info, vars, c)
    }

    pub fn with_info(dta: Arc<Dta>, info: Arc<StateInfo>, vars: VarTable, c: BTreeMap<Var, StateId>) -> Result<Self> {
        if !dta.is_complete() {
            return Err(Error::pre("single constraints need a complete automaton"));
        }
        for (v, q) in &c {
            if q.index() >= dta.num_states() {
                return Err(Error::UnknownState(format!("{q} for variable {}", vars.name(*v))));
            }
        }
        Ok(SingleConstraint { dta, info, vars, c })
    }

    pub fn map(&self) -> &BTreeMap<Var, StateId> {
        &self.c
    }

    pub fn dta_arc(&self) -> &Arc<Dta> {
        &self.dta
    }

    pub fn restrict(&self, w: BTreeSet<Var>, h: usize) -> RestrictedConstraint {
        RestrictedConstraint {
            base: self.clone(),
            w,
            h,
        }
    }
}

impl InstanceConstraint for SingleConstraint {
    fn dta(&self) -> &Dta {
        &self.dta
    }
    fn info(&self) -> &StateInfo {
        &self.info
    }
    fn vars(&self) -> &VarTable {
        &self.vars
    }
    fn state_of_var(&self, v: Var) -> Option<StateId> {
        self.c.get(&v).copied()
    }
}

/// `⟨A, V, C, W, h⟩`: a single constraint whose `W`-variables only take
/// values of height at most `h`.
#[derive(Clone, Debug)]
pub struct RestrictedConstraint {
    base: SingleConstraint,
    w: BTreeSet<Var>,
    h: usize,
}

impl RestrictedConstraint {
    pub fn single(&self) -> &SingleConstraint {
        &self.base
    }

    pub fn w(&self) -> &BTreeSet<Var> {
        &self.w
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn map(&self) -> &BTreeMap<Var, StateId> {
        &self.base.c
    }

    pub fn add_to_w(&mut self, vars: impl IntoIterator<Item = Var>) {
        self.w.extend(vars);
    }

    /// Declares a fresh variable in state `q`.
    pub fn fresh(&mut self, hint: Var, origin: VarOrigin, q: StateId) -> Var {
        let name = self.base.vars.name(hint).to_string();
        let v = self.base.vars.fresh(&name, origin);
        self.base.c.insert(v, q);
        v
    }
}

impl InstanceConstraint for RestrictedConstraint {
    fn dta(&self) -> &Dta {
        &self.base.dta
    }
    fn info(&self) -> &StateInfo {
        &self.base.info
    }
    fn vars(&self) -> &VarTable {
        &self.base.vars
    }
    fn state_of_var(&self, v: Var) -> Option<StateId> {
        self.base.c.get(&v).copied()
    }
    fn height_cap(&self, v: Var) -> Option<usize> {
        self.w.contains(&v).then_some(self.h)
    }
}

/// `C(s/p)` for every position of `s`, bottom-up.
pub fn annotate(s: &Term, r: &impl InstanceConstraint) -> Result<BTreeMap<Position, StateId>> {
    fn go(
        s: &Term,
        at: &mut Position,
        r: &impl InstanceConstraint,
        out: &mut BTreeMap<Position, StateId>,
    ) -> Result<StateId> {
        let q = match s {
            Term::Var(v) => r
                .state_of_var(*v)
                .ok_or_else(|| Error::UnconstrainedVariable(r.vars().name(*v).to_string()))?,
            Term::App(f, cs) => {
                let mut qs = Vec::with_capacity(cs.len());
                for (i, c) in cs.iter().enumerate() {
                    at.0.push(i as u32 + 1);
                    qs.push(go(c, at, r, out)?);
                    at.0.pop();
                }
                r.dta()
                    .step(*f, &qs)
                    .ok_or_else(|| Error::UndefinedState(format!("position {at}")))?
            }
        };
        out.insert(at.clone(), q);
        Ok(q)
    }
    let mut out = BTreeMap::new();
    go(s, &mut Position::root(), r, &mut out)?;
    Ok(out)
}

/// Every variable occurring twice or more has a finite language or lies in `W`.
pub fn is_regular_term(s: &Term, r: &RestrictedConstraint) -> bool {
    s.duplicated_vars().into_iter().all(|x| {
        r.w.contains(&x) || r.state_of_var(x).is_some_and(|q| !r.info().is_infinite(q))
    })
}

/// Whether ground `t` is `φ(s)` for some solution `φ` of `r`.
pub fn match_instance(t: &Term, s: &Term, r: &impl InstanceConstraint) -> bool {
    let mut binding: BTreeMap<Var, &Term> = BTreeMap::new();
    if !bind(t, s, &mut binding) {
        return false;
    }
    binding.into_iter().all(|(x, u)| {
        let Some(q) = r.state_of_var(x) else {
            return false;
        };
        r.dta().run(u) == Some(q) && r.height_cap(x).is_none_or(|h| u.height() <= h)
    })
}

/// Positional matching with consistent bindings for repeated variables.
pub(crate) fn bind<'a>(t: &'a Term, s: &Term, binding: &mut BTreeMap<Var, &'a Term>) -> bool {
    match s {
        Term::Var(x) => match binding.get(x) {
            Some(prev) => *prev == t,
            None => {
                binding.insert(*x, t);
                true
            }
        },
        Term::App(f, ss) => match t {
            Term::App(g, ts) if f == g && ts.len() == ss.len() => {
                ts.iter().zip(ss.iter()).all(|(a, b)| bind(a, b, binding))
            }
            _ => false,
        },
    }
}

/// A named automaton with an accepting set.
#[derive(Clone, Debug)]
pub struct NamedDta {
    pub name: String,
    pub dta: Dta,
}

/// `⟨S, M⟩`: patterns whose variables are each constrained by an automaton.
#[derive(Clone, Debug)]
pub struct RegularConstraintProblem {
    pub sig: Arc<Signature>,
    pub vars: VarTable,
    pub patterns: Vec<Term>,
    pub automata: Vec<NamedDta>,
    /// Variable to index into `automata`.
    pub assignment: BTreeMap<Var, usize>,
}

impl RegularConstraintProblem {
    pub fn validate(&self) -> Result<()> {
        self.sig.validate()?;
        if self.sig.max_arity() > 2 {
            return Err(Error::pre("problem signature must be binary"));
        }
        for a in &self.automata {
            if a.dta.signature() != &self.sig {
                return Err(Error::SignatureMismatch);
            }
            if a.dta.accepting().is_none() {
                return Err(Error::MissingAccepting);
            }
        }
        for s in &self.patterns {
            for v in s.vars() {
                match self.assignment.get(&v) {
                    Some(&i) if i < self.automata.len() => {}
                    _ => return Err(Error::UnconstrainedVariable(self.vars.name(v).to_string())),
                }
            }
        }
        Ok(())
    }

    /// Whether ground `t` is an instance of some pattern under `M`.
    pub fn is_instance(&self, t: &Term) -> bool {
        self.patterns.iter().any(|s| self.is_instance_of(t, s))
    }

    pub fn is_instance_of(&self, t: &Term, s: &Term) -> bool {
        let mut binding = BTreeMap::new();
        bind(t, s, &mut binding)
            && binding
                .into_iter()
                .all(|(x, u)| self.assignment.get(&x).is_some_and(|&i| self.automata[i].dta.accepts(u)))
    }

    /// Distinct patterns in first-occurrence order.
    pub fn distinct_patterns(&self) -> Vec<Term> {
        let mut seen = HashSet::new();
        self.patterns.iter().filter(|s| seen.insert((*s).clone())).cloned().collect()
    }

    /// Variables of the patterns, sorted.
    pub fn pattern_vars(&self) -> BTreeSet<Var> {
        self.patterns.iter().flat_map(|s| s.vars()).collect()
    }

    /// `|M|`: constrained variables occurring in the patterns.
    pub fn num_constraints(&self) -> usize {
        self.pattern_vars().len()
    }

    /// `∥M∥`: sum over constrained variables of `|Q| + |δ| + 1`.
    pub fn constraint_size(&self) -> usize {
        self.pattern_vars()
            .iter()
            .map(|x| {
                let a = &self.automata[self.assignment[x]].dta;
                a.num_states() + a.num_transitions() + 1
            })
            .sum()
    }
}

/// Result of moving to a single constraint.
#[derive(Clone, Debug)]
pub struct SingleInstance {
    pub patterns: Vec<Term>,
    /// Index of the input pattern each output pattern instantiates.
    pub sources: Vec<usize>,
    pub constraint: SingleConstraint,
    pub stats: TransformStats,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct TransformStats {
    /// `|S|` after removing duplicates; also the `n` of the 1-or-n split.
    pub input_patterns: usize,
    pub product_states: usize,
    pub states: usize,
    pub transitions: usize,
    /// Instantiations considered before deduplication.
    pub instantiations: usize,
    pub output_patterns: usize,
}

/// Splits every state whose language has fewer than `n` terms into one copy
/// per term, so each remaining state has exactly one term or at least `n`.
///
/// Returns the new automaton and, for each new state, the state it came from.
/// Empty states disappear.
pub fn split_one_or_n(a: &Dta, n: usize, counts: &[usize]) -> Result<(Dta, Vec<StateId>)> {
    if !a.is_complete() {
        return Err(Error::pre("split needs a complete automaton"));
    }
    if n == 0 {
        return Err(Error::pre("split needs n >= 1"));
    }
    if counts != a.count_upto(n).as_slice() {
        return Err(Error::pre("counts do not match the automaton"));
    }
    let mut out = Dta::new(a.signature().clone())?;
    let mut copies: Vec<Vec<StateId>> = Vec::with_capacity(a.num_states());
    let mut flatten = Vec::new();
    for q in a.states() {
        let c = counts[q.index()];
        let mut ids = Vec::new();
        if c == n {
            ids.push(out.add_state(a.label(q).clone()));
            flatten.push(q);
        } else {
            for i in 1..=c {
                ids.push(out.add_state(StateLabel::Copy(Box::new(a.label(q).clone()), i)));
                flatten.push(q);
            }
        }
        copies.push(ids);
    }
    let transitions = a.transitions();
    for q in a.states() {
        let c = counts[q.index()];
        if c == 0 {
            continue;
        }
        let mut counter = 0usize;
        for t in transitions.iter().filter(|t| t.target == q) {
            let choices: Vec<&[StateId]> = t.args.iter().map(|p| copies[p.index()].as_slice()).collect();
            for combo in cartesian(&choices) {
                let target = if c == n {
                    copies[q.index()][0]
                } else {
                    let Some(&target) = copies[q.index()].get(counter) else {
                        return Err(Error::Invariant(format!(
                            "state {} has more than {c} terms",
                            a.label(q)
                        )));
                    };
                    counter += 1;
                    target
                };
                out.add_transition(t.symbol, &combo, target)?;
            }
        }
    }
    // Every argument tuple over non-empty states reaches a non-empty state.
    if !out.is_complete() {
        return Err(Error::Invariant("split automaton is incomplete".into()));
    }
    Ok((out, flatten))
}

fn cartesian(choices: &[&[StateId]]) -> Vec<Vec<StateId>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &o in options.iter() {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Whether every state has one term or at least `n`. Empty states are
/// ignored.
pub fn is_one_or_n(a: &Dta, n: usize) -> bool {
    let info = StateInfo::of(a);
    a.states()
        .filter(|q| !info.is_empty(*q))
        .all(|q| info.is_singleton(q) || info.exceeds(q, n.saturating_sub(1)))
}

/// Moves `⟨S, M⟩` to `⟨S', ⟨A, C⟩⟩` with a complete 1-or-|S| automaton `A`.
///
/// `max_patterns` caps the number of instantiations examined.
pub fn to_single(prob: &RegularConstraintProblem, max_patterns: usize) -> Result<SingleInstance> {
    prob.validate()?;
    let patterns = prob.distinct_patterns();
    let n = patterns.len().max(1);
    let used: Vec<usize> = prob
        .pattern_vars()
        .iter()
        .map(|x| prob.assignment[x])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let completed: Vec<Dta> = if used.is_empty() {
        vec![Dta::universal(prob.sig.clone())?]
    } else {
        used.iter().map(|&i| prob.automata[i].dta.complete()).collect()
    };
    let refs: Vec<&Dta> = completed.iter().collect();
    let (product, product_tuples) = Dta::accessible_product(&refs)?;
    if !product.is_complete() {
        return Err(Error::Invariant("product of complete automata is incomplete".into()));
    }
    let counts = product.count_upto(n);
    let (a, flatten) = split_one_or_n(&product, n, &counts)?;

    // V(x): split states whose component for M(x) is accepting.
    let component = |x: Var| used.iter().position(|&i| i == prob.assignment[&x]).expect("used");
    let mut families: BTreeMap<Var, Vec<StateId>> = BTreeMap::new();
    for x in prob.pattern_vars() {
        let k = component(x);
        let states = a
            .states()
            .filter(|q| {
                let origin = flatten[q.index()];
                completed[k].is_accepting(product_tuples[origin.index()][k])
            })
            .collect();
        families.insert(x, states);
    }

    let mut vars = prob.vars.clone();
    let mut c = BTreeMap::new();
    let mut out = Vec::new();
    let mut sources = Vec::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut instantiations = 0usize;
    for (si, s) in patterns.iter().enumerate() {
        let xs: Vec<Var> = s.vars().into_iter().collect();
        let choices: Vec<&[StateId]> = xs.iter().map(|x| families[x].as_slice()).collect();
        for combo in cartesian(&choices) {
            instantiations += 1;
            if instantiations > max_patterns {
                return Err(Error::limit("instantiations while moving to a single automaton", max_patterns));
            }
            let choice: BTreeMap<Var, StateId> = xs.iter().copied().zip(combo).collect();
            let key = canonical_key(s, Some(&|v| choice.get(&v).copied()));
            if !seen.insert(key) {
                continue;
            }
            let index = out.len();
            let renaming: BTreeMap<Var, Var> = xs
                .iter()
                .map(|&x| {
                    let name = prob.vars.name(x).to_string();
                    let v = vars.fresh(&name, VarOrigin::Renamed { source: x, pattern: index });
                    c.insert(v, choice[&x]);
                    (x, v)
                })
                .collect();
            out.push(s.rename(&|v| renaming[&v]));
            sources.push(si);
        }
    }

    let stats = TransformStats {
        input_patterns: patterns.len(),
        product_states: product.num_states(),
        states: a.num_states(),
        transitions: a.num_transitions(),
        instantiations,
        output_patterns: out.len(),
    };
    let m = prob.num_constraints() as u32;
    let norm = prob.constraint_size().max(1);
    let q_bound = norm.saturating_pow(m).saturating_mul(patterns.len().max(1));
    if a.num_states() > q_bound {
        return Err(Error::Invariant(format!("|Q| = {} exceeds {q_bound}", a.num_states())));
    }
    let s_bound = patterns.len().saturating_mul(a.num_states().saturating_pow(m));
    if out.len() > s_bound {
        return Err(Error::Invariant(format!("|S'| = {} exceeds {s_bound}", out.len())));
    }
    let constraint = SingleConstraint::new(a, vars, c)?;
    Ok(SingleInstance {
        patterns: out,
        sources,
        constraint,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse_ground, parse_term};

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap())
    }

    /// q: a, b; everything else goes to the sink.
    fn ab(sig: &Arc<Signature>) -> Dta {
        let mut a = Dta::new(sig.clone()).unwrap();
        let q = a.add_state(StateLabel::Named("q".into()));
        a.add_transition(sig.lookup("a").unwrap(), &[], q).unwrap();
        a.add_transition(sig.lookup("b").unwrap(), &[], q).unwrap();
        a.set_accepting([q]);
        a.complete()
    }

    #[test]
    fn split_two_constants() {
        let sig = sig();
        let a = ab(&sig);
        let counts = a.count_upto(3);
        let (b, flatten) = split_one_or_n(&a, 3, &counts).unwrap();
        assert!(b.is_complete());
        assert_eq!(b.num_states(), 3);
        let qa = b.run(&parse_ground("a", &sig).unwrap()).unwrap();
        let qb = b.run(&parse_ground("b", &sig).unwrap()).unwrap();
        assert_ne!(qa, qb);
        assert_eq!(flatten[qa.index()], flatten[qb.index()]);
        assert_eq!(b.label(qa).to_string(), "q^1");
        assert_eq!(b.label(qb).to_string(), "q^2");
        assert!(is_one_or_n(&b, 3));
        assert!(!is_one_or_n(&a, 3));
        assert!(split_one_or_n(&a, 3, &[1, 3]).is_err());
    }

    #[test]
    fn split_is_identity_when_nothing_to_do() {
        let sig = sig();
        let u = Dta::universal(sig.clone()).unwrap();
        let (b, flatten) = split_one_or_n(&u, 4, &u.count_upto(4)).unwrap();
        assert_eq!(b.num_states(), 1);
        assert_eq!(flatten, vec![StateId(0)]);
    }

    #[test]
    fn annotate_and_match() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let a = ab(&sig);
        let q = StateId(0);
        let r = SingleConstraint::new(a, vars.clone(), BTreeMap::from([(x, q)])).unwrap();
        let s = parse_term("f(x,a)", &sig, &vars).unwrap();
        let ann = annotate(&s, &r).unwrap();
        assert_eq!(ann[&Position(vec![1])], q);
        assert_eq!(ann[&Position(vec![2])], q);
        let fx = parse_term("f(x,x)", &sig, &vars).unwrap();
        let g = |t| parse_ground(t, &sig).unwrap();
        assert!(match_instance(&g("f(a,a)"), &fx, &r));
        assert!(!match_instance(&g("f(a,b)"), &fx, &r));
        assert!(!match_instance(&g("f(f(a,a),f(a,a))"), &fx, &r));
        let restricted = r.restrict(BTreeSet::from([x]), 0);
        assert!(match_instance(&g("f(b,b)"), &fx, &restricted));
        assert!(is_regular_term(&fx, &restricted));
    }

    #[test]
    fn to_single_on_singleton_language() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let mut only_a = Dta::new(sig.clone()).unwrap();
        let qa = only_a.add_state(StateLabel::Named("qa".into()));
        only_a.add_transition(sig.lookup("a").unwrap(), &[], qa).unwrap();
        only_a.set_accepting([qa]);
        let prob = RegularConstraintProblem {
            sig: sig.clone(),
            vars: vars.clone(),
            patterns: vec![Term::var(x)],
            automata: vec![NamedDta {
                name: "A".into(),
                dta: only_a,
            }],
            assignment: BTreeMap::from([(x, 0)]),
        };
        let single = to_single(&prob, 1000).unwrap();
        assert_eq!(single.patterns.len(), 1);
        let r = &single.constraint;
        for t in ["a", "b", "f(a,a)"] {
            let t = parse_ground(t, &sig).unwrap();
            assert_eq!(match_instance(&t, &single.patterns[0], r), t == parse_ground("a", &sig).unwrap());
        }
    }

    #[test]
    fn missing_constraint_is_reported() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let prob = RegularConstraintProblem {
            sig,
            vars,
            patterns: vec![Term::var(x)],
            automata: vec![],
            assignment: BTreeMap::new(),
        };
        assert_eq!(to_single(&prob, 10).unwrap_err(), Error::UnconstrainedVariable("x".into()));
    }
}
