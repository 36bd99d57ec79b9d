//! Brute-force checks at bounded height, kept apart from the decision path.
//!
//! [`TermArena`] lists every ground term up to a height once, children
//! before parents, so automaton runs and pattern matching become table
//! lookups. Within a height layer nodes are sorted by symbol and then by
//! child ids, which makes [`TermArena::locate`] a binary search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::constraints::{InstanceConstraint, NamedDta, RegularConstraintProblem, RestrictedConstraint};
use crate::dta::{Dta, StateId, StateLabel};
use crate::subsume::shape_key;
use crate::error::{Error, Result};
use crate::term::{Signature, Substitution, SymbolId, Term, Var, VarTable};

#[derive(Clone, Debug)]
pub struct TermArena {
    sig: Arc<Signature>,
    symbol: Vec<SymbolId>,
    offset: Vec<u32>,
    children: Vec<u32>,
    /// `layers[h]` is the id range of terms of height exactly `h`.
    layers: Vec<std::ops::Range<u32>>,
}

impl TermArena {
    pub fn new(sig: Arc<Signature>, max_height: usize, cap: usize) -> Result<Self> {
        let mut a = TermArena {
            sig: sig.clone(),
            symbol: Vec::new(),
            offset: vec![0],
            children: Vec::new(),
            layers: Vec::new(),
        };
        for f in sig.constants() {
            a.push(f, &[]);
        }
        a.layers.push(0..a.symbol.len() as u32);
        for h in 1..=max_height {
            let start = a.symbol.len() as u32;
            let prev = a.layers[h - 1].clone();
            for (f, info) in sig.symbols() {
                let k = info.arity;
                if k == 0 {
                    continue;
                }
                // Odometer over [0, prev.end)^k keeping tuples that touch
                // the previous layer.
                let mut tuple = vec![0u32; k];
                'outer: loop {
                    if tuple.iter().any(|&c| c >= prev.start) {
                        if a.symbol.len() >= cap {
                            return Err(Error::limit("term arena", cap));
                        }
                        a.push(f, &tuple);
                    }
                    for i in (0..k).rev() {
                        tuple[i] += 1;
                        if tuple[i] < prev.end {
                            continue 'outer;
                        }
                        tuple[i] = 0;
                    }
                    break;
                }
            }
            a.layers.push(start..a.symbol.len() as u32);
        }
        Ok(a)
    }

    fn push(&mut self, f: SymbolId, cs: &[u32]) {
        self.symbol.push(f);
        self.children.extend_from_slice(cs);
        self.offset.push(self.children.len() as u32);
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbol.is_empty()
    }

    pub fn max_height(&self) -> usize {
        self.layers.len() - 1
    }

    /// Number of terms of height at most `h`.
    pub fn count_upto(&self, h: usize) -> usize {
        self.layers[h.min(self.max_height())].end as usize
    }

    pub fn symbol(&self, id: u32) -> SymbolId {
        self.symbol[id as usize]
    }

    pub fn children(&self, id: u32) -> &[u32] {
        let i = id as usize;
        &self.children[self.offset[i] as usize..self.offset[i + 1] as usize]
    }

    pub fn height(&self, id: u32) -> usize {
        self.layers.partition_point(|r| r.end <= id)
    }

    pub fn term(&self, id: u32) -> Term {
        let cs = self.children(id).iter().map(|&c| self.term(c)).collect();
        Term::app(self.symbol(id), cs)
    }

    /// Id of a ground term, if it is in the arena.
    pub fn locate(&self, t: &Term) -> Option<u32> {
        let Term::App(f, cs) = t else { return None };
        let ids = cs.iter().map(|c| self.locate(c)).collect::<Option<Vec<u32>>>()?;
        let h = ids.iter().map(|&c| self.height(c) + 1).max().unwrap_or(0);
        let range = self.layers.get(h)?;
        let key = (f.0, ids.as_slice());
        let mut lo = range.start;
        let mut hi = range.end;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let here = (self.symbol(mid).0, self.children(mid));
            match here.cmp(&key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// State of every term under `a`.
    pub fn run(&self, a: &Dta) -> Vec<Option<StateId>> {
        let mut out: Vec<Option<StateId>> = Vec::with_capacity(self.len());
        let mut args = Vec::with_capacity(2);
        for id in 0..self.len() as u32 {
            args.clear();
            let mut defined = true;
            for &c in self.children(id) {
                match out[c as usize] {
                    Some(q) => args.push(q),
                    None => defined = false,
                }
            }
            out.push(if defined { a.step(self.symbol(id), &args) } else { None });
        }
        out
    }

    pub fn dta_mask(&self, a: &Dta) -> Vec<bool> {
        self.run(a).into_iter().map(|q| q.is_some_and(|q| a.is_accepting(q))).collect()
    }

    /// Terms that are instances of some pattern under `r`.
    pub fn instance_mask(&self, patterns: &[Term], r: &impl InstanceConstraint) -> Vec<bool> {
        let states = self.run(r.dta());
        let index = PatternIndex::new(patterns, r);
        (0..self.len() as u32).map(|id| index.matches(self, &states, id)).collect()
    }

    /// Terms that are instances of the problem.
    pub fn problem_mask(&self, prob: &RegularConstraintProblem) -> Vec<bool> {
        let runs: Vec<Vec<Option<StateId>>> = prob.automata.iter().map(|a| self.run(&a.dta)).collect();
        let ok = |x: Var, id: u32| {
            prob.assignment.get(&x).is_some_and(|&i| {
                runs[i][id as usize].is_some_and(|q| prob.automata[i].dta.is_accepting(q))
            })
        };
        let patterns = prob.distinct_patterns();
        (0..self.len() as u32)
            .map(|id| patterns.iter().any(|s| self.matches(id, s, &ok)))
            .collect()
    }

    pub fn set_mask(&self, terms: &BTreeSet<Term>) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        for t in terms {
            if let Some(id) = self.locate(t) {
                out[id as usize] = true;
            }
        }
        out
    }

    /// Whether term `id` is `φ(s)` with `ok(x, φ(x))` for every variable.
    pub fn matches(&self, id: u32, s: &Term, ok: &impl Fn(Var, u32) -> bool) -> bool {
        let mut binding = Vec::new();
        self.bind(id, s, &mut binding) && binding.into_iter().all(|(x, t)| ok(x, t))
    }

    pub(crate) fn bind(&self, id: u32, s: &Term, binding: &mut Vec<(Var, u32)>) -> bool {
        match s {
            // Ids are unique per term, so equal ids mean equal terms.
            Term::Var(x) => match binding.iter().find(|(y, _)| y == x) {
                Some(&(_, prev)) => prev == id,
                None => {
                    binding.push((*x, id));
                    true
                }
            },
            Term::App(f, ss) => {
                *f == self.symbol(id)
                    && ss.len() == self.children(id).len()
                    && ss.iter().zip(self.children(id)).all(|(s, &c)| self.bind(c, s, binding))
            }
        }
    }

    /// Smallest term on which the masks differ, among heights ≤ `h`.
    pub fn first_difference(&self, a: &[bool], b: &[bool], h: usize) -> Option<Term> {
        (0..self.count_upto(h)).find(|&i| a[i] != b[i]).map(|i| self.term(i as u32))
    }
}

type Scratch = (Vec<(Var, u32)>, Vec<Option<StateId>>);
type Caps = Vec<Option<usize>>;

/// Patterns grouped by shape: terms are matched once per shape and the
/// variable states are then looked up among the group's members.
#[derive(Debug)]
pub struct PatternIndex {
    groups: Vec<ShapeGroup>,
    /// Groups compatible with a root symbol and the first two child symbols
    /// (or their absence, coded as `width - 1`).
    heads: Vec<Vec<usize>>,
    width: usize,
    all: Vec<usize>,
    scratch: std::cell::RefCell<Scratch>,
}

#[derive(Debug)]
struct ShapeGroup {
    rep: Term,
    /// Variables of `rep` by first occurrence.
    order: Vec<Var>,
    /// Allowed state vectors, each with its patterns and their height caps.
    members: HashMap<Vec<Option<StateId>>, Vec<(usize, Caps)>>,
}

impl PatternIndex {
    pub fn new(patterns: &[Term], r: &impl InstanceConstraint) -> Self {
        let mut groups: Vec<ShapeGroup> = Vec::new();
        let mut by_shape: HashMap<Vec<u32>, usize> = HashMap::new();
        for (i, s) in patterns.iter().enumerate() {
            let order = first_occurrence(s);
            let gi = *by_shape.entry(shape_key(s)).or_insert_with(|| {
                groups.push(ShapeGroup {
                    rep: s.clone(),
                    order: order.clone(),
                    members: HashMap::new(),
                });
                groups.len() - 1
            });
            let key = order.iter().map(|&x| r.state_of_var(x)).collect();
            let caps = order.iter().map(|&x| r.height_cap(x)).collect();
            groups[gi].members.entry(key).or_default().push((i, caps));
        }
        let symbols = r.dta().signature().len();
        let width = symbols + 1;
        let fits = |t: &Term, want: usize| match t {
            Term::Var(_) => true,
            Term::App(f, _) => f.index() == want,
        };
        let mut heads = Vec::new();
        if symbols <= 32 {
            for key in 0..symbols * width * width {
                let (root, c0, c1) = (key / (width * width), key / width % width, key % width);
                heads.push(
                    groups
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| {
                            fits(&g.rep, root)
                                && g.rep.children().iter().zip([c0, c1]).all(|(c, want)| fits(c, want))
                        })
                        .map(|(i, _)| i)
                        .collect(),
                );
            }
        }
        PatternIndex {
            all: (0..groups.len()).collect(),
            groups,
            heads,
            width,
            scratch: Default::default(),
        }
    }

    /// Number of distinct pattern shapes.
    pub fn shapes(&self) -> usize {
        self.groups.len()
    }

    fn candidates(&self, arena: &TermArena, id: u32) -> &[usize] {
        if self.heads.is_empty() {
            return &self.all;
        }
        let cs = arena.children(id);
        let sym = |i: usize| cs.get(i).map_or(self.width - 1, |&c| arena.symbol(c).index());
        &self.heads[(arena.symbol(id).index() * self.width + sym(0)) * self.width + sym(1)]
    }

    /// Whether term `id` is an instance; `states` is the run of the
    /// constraint automaton on `arena`.
    pub fn matches(&self, arena: &TermArena, states: &[Option<StateId>], id: u32) -> bool {
        self.scan(arena, states, id, &mut |_| true)
    }

    /// Indices of the patterns that term `id` is an instance of.
    pub fn matching(&self, arena: &TermArena, states: &[Option<StateId>], id: u32, out: &mut Vec<usize>) {
        out.clear();
        self.scan(arena, states, id, &mut |i| {
            out.push(i);
            false
        });
    }

    /// Calls `hit` on matched patterns until it returns true.
    fn scan(
        &self,
        arena: &TermArena,
        states: &[Option<StateId>],
        id: u32,
        hit: &mut impl FnMut(usize) -> bool,
    ) -> bool {
        let mut scratch = self.scratch.borrow_mut();
        let (binding, key) = &mut *scratch;
        for g in self.candidates(arena, id).iter().map(|&g| &self.groups[g]) {
            binding.clear();
            if !arena.bind(id, &g.rep, binding) {
                continue;
            }
            key.clear();
            key.extend(g.order.iter().map(|x| states[lookup(binding, *x) as usize]));
            let Some(members) = g.members.get(key.as_slice()) else {
                continue;
            };
            for (i, caps) in members {
                let capped = g
                    .order
                    .iter()
                    .zip(caps)
                    .all(|(x, c)| c.is_none_or(|h| arena.height(lookup(binding, *x)) <= h));
                if capped && hit(*i) {
                    return true;
                }
            }
        }
        false
    }
}

fn lookup(binding: &[(Var, u32)], x: Var) -> u32 {
    binding.iter().find(|(y, _)| *y == x).expect("bound").1
}

fn first_occurrence(s: &Term) -> Vec<Var> {
    let mut out = Vec::new();
    s.visit(&mut crate::term::Position::root(), &mut |_, t| {
        if let Some(x) = t.as_var() {
            if !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out
}

/// `{t | height(t) ≤ max_height, t instance of some s ∈ patterns under r}`.
pub fn enumerate_instances(
    patterns: &[Term],
    r: &impl InstanceConstraint,
    max_height: usize,
    cap: usize,
) -> Result<BTreeSet<Term>> {
    let arena = TermArena::new(r.dta().signature().clone(), max_height, cap)?;
    let mask = arena.instance_mask(patterns, r);
    Ok(mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| arena.term(i as u32))
        .collect())
}

/// One side of a bounded comparison.
#[derive(Clone, Copy)]
pub enum Slice<'a> {
    Dta(&'a Dta),
    Terms(&'a BTreeSet<Term>),
    Instances(&'a [Term], &'a RestrictedConstraint),
    Problem(&'a RegularConstraintProblem),
}

impl Slice<'_> {
    pub fn mask(&self, arena: &TermArena) -> Vec<bool> {
        match self {
            Slice::Dta(a) => arena.dta_mask(a),
            Slice::Terms(ts) => arena.set_mask(ts),
            Slice::Instances(ps, r) => arena.instance_mask(ps, *r),
            Slice::Problem(p) => arena.problem_mask(p),
        }
    }

    fn signature(&self) -> Option<&Arc<Signature>> {
        match self {
            Slice::Dta(a) => Some(a.signature()),
            Slice::Terms(_) => None,
            Slice::Instances(_, r) => Some(r.dta().signature()),
            Slice::Problem(p) => Some(&p.sig),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedComparison {
    pub equal: bool,
    /// Smallest term in exactly one of the two slices.
    pub counterexample: Option<Term>,
    pub compared: usize,
}

pub fn bounded_equal(a: Slice<'_>, b: Slice<'_>, max_height: usize, cap: usize) -> Result<BoundedComparison> {
    let sig = a
        .signature()
        .or(b.signature())
        .ok_or_else(|| Error::pre("at least one side must carry a signature"))?;
    if let (Some(x), Some(y)) = (a.signature(), b.signature()) {
        if x != y {
            return Err(Error::SignatureMismatch);
        }
    }
    let arena = TermArena::new(sig.clone(), max_height, cap)?;
    Ok(bounded_equal_in(&arena, a, b))
}

pub fn bounded_equal_in(arena: &TermArena, a: Slice<'_>, b: Slice<'_>) -> BoundedComparison {
    let (ma, mb) = (a.mask(arena), b.mask(arena));
    let counterexample = arena.first_difference(&ma, &mb, arena.max_height());
    BoundedComparison {
        equal: counterexample.is_none(),
        counterexample,
        compared: arena.len(),
    }
}

/// An automaton for the instances of `patterns` under `r`, all of which
/// must be regular terms: every duplicated variable has a finite language
/// or a height cap.
///
/// Duplicated variables are replaced by each of their finitely many values.
/// The remaining linear patterns are recognised by running `A` alongside
/// the set of pattern subterms the input matches.
///
/// With `slice = Some(k)`, height-capped variables are only expanded up to
/// height `k - 1`. A duplicated variable sits below the root, so the result
/// still agrees with the instance set on every term of height at most `k`,
/// while the full expansion over heights up to `h` is usually out of reach.
pub fn witness_dta(patterns: &[Term], r: &RestrictedConstraint, slice: Option<usize>, max_patterns: usize) -> Result<Dta> {
    let a = r.dta();
    let info = r.info();
    let nq = a.num_states();

    let mut linear: Vec<Term> = Vec::new();
    for s in patterns {
        let dup: Vec<Var> = s.duplicated_vars().into_iter().collect();
        let mut values: Vec<Vec<Term>> = Vec::with_capacity(dup.len());
        for &x in &dup {
            let q = r
                .state_of_var(x)
                .ok_or_else(|| Error::UnconstrainedVariable(r.vars().name(x).to_string()))?;
            let bound = match r.height_cap(x) {
                Some(h) => slice.map_or(h, |k| h.min(k.saturating_sub(1))),
                None if !info.is_infinite(q) => nq,
                None => {
                    return Err(Error::pre(format!(
                        "{} is duplicated with an infinite language",
                        r.vars().name(x)
                    )))
                }
            };
            let mut vs = a.enumerate_language(q, bound, max_patterns)?;
            vs.truncate(max_patterns + 1);
            values.push(vs);
        }
        let mut combos: Vec<Substitution> = vec![Substitution::new()];
        for (x, vs) in dup.iter().zip(&values) {
            let mut next = Vec::new();
            for phi in &combos {
                for v in vs {
                    let mut p = phi.clone();
                    p.insert(*x, v.clone());
                    next.push(p);
                    if linear.len() + next.len() > max_patterns {
                        return Err(Error::limit("witness automaton patterns", max_patterns));
                    }
                }
            }
            combos = next;
        }
        linear.extend(combos.iter().map(|phi| phi.apply(s)));
    }
    compile_linear(&linear, r)
}

/// Subterms of linear patterns, each matched node-by-node.
enum Sub {
    Var(StateId, Option<usize>),
    App(SymbolId, Vec<usize>),
}

fn compile_linear(patterns: &[Term], r: &RestrictedConstraint) -> Result<Dta> {
    let a = r.dta();
    let sig = a.signature().clone();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut subs: Vec<Sub> = Vec::new();
    fn intern(
        t: &Term,
        r: &RestrictedConstraint,
        index: &mut HashMap<Term, usize>,
        subs: &mut Vec<Sub>,
    ) -> Result<usize> {
        if let Some(&i) = index.get(t) {
            return Ok(i);
        }
        let sub = match t {
            Term::Var(x) => Sub::Var(
                r.state_of_var(*x)
                    .ok_or_else(|| Error::UnconstrainedVariable(r.vars().name(*x).to_string()))?,
                r.height_cap(*x),
            ),
            Term::App(f, cs) => Sub::App(
                *f,
                cs.iter().map(|c| intern(c, r, index, subs)).collect::<Result<_>>()?,
            ),
        };
        subs.push(sub);
        index.insert(t.clone(), subs.len() - 1);
        Ok(subs.len() - 1)
    }
    let roots: BTreeSet<usize> = patterns
        .iter()
        .map(|p| intern(p, r, &mut index, &mut subs))
        .collect::<Result<_>>()?;
    // Heights only matter up to the largest cap.
    let track = subs
        .iter()
        .filter_map(|s| match s {
            Sub::Var(_, cap) => *cap,
            _ => None,
        })
        .max()
        .map(|h| h + 1);

    type Key = (StateId, Vec<usize>, usize);
    let mut out = Dta::new(sig.clone())?;
    let mut keys: Vec<Key> = Vec::new();
    let mut ids: HashMap<Key, StateId> = HashMap::new();
    let mut intern_state = |key: Key, out: &mut Dta, keys: &mut Vec<Key>| -> StateId {
        *ids.entry(key.clone()).or_insert_with(|| {
            let label = format!(
                "{}{{{}}}{}",
                a.label(key.0),
                key.1.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                if track.is_some() { format!("h{}", key.2) } else { String::new() }
            );
            keys.push(key);
            out.add_state(StateLabel::Named(label))
        })
    };
    let target = |f: SymbolId, args: &[&Key]| -> Option<Key> {
        let qs: Vec<StateId> = args.iter().map(|k| k.0).collect();
        let q = a.step(f, &qs)?;
        let height = args.iter().map(|k| k.2 + 1).max().unwrap_or(0);
        let height = track.map_or(0, |t| height.min(t));
        let matched = subs
            .iter()
            .enumerate()
            .filter(|(_, s)| match s {
                Sub::Var(qx, cap) => *qx == q && cap.is_none_or(|c| height <= c),
                Sub::App(g, us) => {
                    *g == f && us.len() == args.len() && us.iter().zip(args).all(|(u, k)| k.1.binary_search(u).is_ok())
                }
            })
            .map(|(i, _)| i)
            .collect();
        Some((q, matched, height))
    };

    let mut done = 0usize;
    for f in sig.constants() {
        if let Some(k) = target(f, &[]) {
            let s = intern_state(k, &mut out, &mut keys);
            out.add_transition(f, &[], s)?;
        }
    }
    while done < keys.len() {
        let k = done;
        done += 1;
        for (f, info) in sig.symbols() {
            let tuples: Vec<Vec<usize>> = match info.arity {
                0 => continue,
                1 => vec![vec![k]],
                2 => (0..=k).flat_map(|j| if j == k { vec![vec![k, k]] } else { vec![vec![k, j], vec![j, k]] }).collect(),
                _ => return Err(Error::pre("witness automata need a binary signature")),
            };
            for tuple in tuples {
                let args: Vec<Key> = tuple.iter().map(|&i| keys[i].clone()).collect();
                let refs: Vec<&Key> = args.iter().collect();
                if let Some(key) = target(f, &refs) {
                    let s = intern_state(key, &mut out, &mut keys);
                    let from: Vec<StateId> = tuple.iter().map(|&i| StateId(i as u32)).collect();
                    out.add_transition(f, &from, s)?;
                }
            }
        }
    }
    let accepting: Vec<StateId> = keys
        .iter()
        .enumerate()
        .filter(|(_, k)| k.1.iter().any(|i| roots.contains(i)))
        .map(|(i, _)| StateId(i as u32))
        .collect();
    out.set_accepting(accepting);
    Ok(out)
}

/// `⟨S, M⟩` with `S = {f(f(x,x),y), f(u1,x1), …, f(un,xn)}`, where `xi`
/// ranges over `L(Ai)` and every other variable over all terms. Its
/// instance set is regular iff the `L(Ai)` cover every term.
pub fn gen_hardness_instance(automata: &[NamedDta]) -> Result<RegularConstraintProblem> {
    let first = automata.first().ok_or_else(|| Error::pre("need at least one automaton"))?;
    let sig = first.dta.signature().clone();
    let f = sig
        .binary_symbol()
        .ok_or_else(|| Error::pre("signature has no binary symbol"))?;
    let mut any = Dta::universal(sig.clone())?;
    any.set_accepting(any.states().collect::<Vec<_>>());
    let mut all = vec![NamedDta {
        name: "any".into(),
        dta: any,
    }];
    let mut vars = VarTable::new();
    let x = vars.declare("x");
    let y = vars.declare("y");
    let mut assignment = BTreeMap::from([(x, 0), (y, 0)]);
    let (tx, ty) = (Term::var(x), Term::var(y));
    let mut patterns = vec![Term::app(f, vec![Term::app(f, vec![tx.clone(), tx]), ty])];
    for (i, a) in automata.iter().enumerate() {
        if a.dta.signature() != &sig {
            return Err(Error::SignatureMismatch);
        }
        let u = vars.declare(&format!("u{}", i + 1));
        let xi = vars.declare(&format!("x{}", i + 1));
        all.push(a.clone());
        assignment.insert(u, 0);
        assignment.insert(xi, i + 1);
        patterns.push(Term::app(f, vec![Term::var(u), Term::var(xi)]));
    }
    let prob = RegularConstraintProblem {
        sig,
        vars,
        patterns,
        automata: all,
        assignment,
    };
    prob.validate()?;
    Ok(prob)
}

/// Whether `L(A1) ∪ … ∪ L(An)` is every ground term: the intersection of
/// the complements has no reachable accepting state.
pub fn union_is_universal(automata: &[&Dta]) -> Result<bool> {
    if automata.is_empty() {
        return Ok(false);
    }
    let comps = automata.iter().map(|a| a.complement()).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Dta> = comps.iter().collect();
    let both = Dta::intersection(&refs)?;
    let nonempty = both.non_empty_states();
    Ok(!nonempty.iter().any(|q| both.is_accepting(*q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::SingleConstraint;
    use crate::term::{parse_ground, parse_term};

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap())
    }

    #[test]
    fn arena_sizes_and_lookup() {
        let sig = sig();
        let arena = TermArena::new(sig.clone(), 3, 10_000).unwrap();
        // 2, 2 + 4 = 6, 2 + 36 = 38, 2 + 38^2 = 1446.
        assert_eq!(arena.count_upto(0), 2);
        assert_eq!(arena.count_upto(1), 6);
        assert_eq!(arena.count_upto(2), 38);
        assert_eq!(arena.len(), 1446);
        for id in [0u32, 5, 37, 700, 1445] {
            assert_eq!(arena.locate(&arena.term(id)), Some(id));
            assert_eq!(arena.term(id).height(), arena.height(id));
        }
        assert!(TermArena::new(sig, 4, 1000).is_err());
    }

    #[test]
    fn diagonal_instances() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let u = Dta::universal(sig.clone()).unwrap();
        let r = SingleConstraint::new(u, vars.clone(), BTreeMap::from([(x, StateId(0))])).unwrap();
        let s = parse_term("f(x,x)", &sig, &vars).unwrap();
        let got = enumerate_instances(&[s], &r, 2, 10_000).unwrap();
        assert_eq!(got.len(), 6);
        assert!(got.contains(&parse_ground("f(f(a,b),f(a,b))", &sig).unwrap()));
        assert!(enumerate_instances(&[], &r, 2, 10_000).unwrap().is_empty());
    }

    #[test]
    fn witness_for_linear_and_finite() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let y = vars.declare("y");
        let mut a = Dta::new(sig.clone()).unwrap();
        let qa = a.add_state(StateLabel::Named("qa".into()));
        let qs = a.add_state(StateLabel::Named("qs".into()));
        a.add_transition(sig.lookup("a").unwrap(), &[], qa).unwrap();
        a.add_transition(sig.lookup("b").unwrap(), &[], qs).unwrap();
        for l in [qa, qs] {
            for r in [qa, qs] {
                a.add_transition(sig.lookup("f").unwrap(), &[l, r], qs).unwrap();
            }
        }
        let r = SingleConstraint::new(a, vars.clone(), BTreeMap::from([(x, qs), (y, qa)]))
            .unwrap()
            .restrict(BTreeSet::new(), 4);
        let lin = parse_term("f(x,y)", &sig, &vars).unwrap();
        let fin = parse_term("f(y,y)", &sig, &vars).unwrap();
        for ps in [vec![lin.clone()], vec![fin.clone()], vec![lin, fin], vec![]] {
            let w = witness_dta(&ps, &r, None, 1000).unwrap();
            let cmp = bounded_equal(Slice::Dta(&w), Slice::Instances(&ps, &r), 3, 100_000).unwrap();
            assert!(cmp.equal, "{:?}", cmp.counterexample);
        }
        let diag = parse_term("f(x,x)", &sig, &vars).unwrap();
        assert!(witness_dta(std::slice::from_ref(&diag), &r, None, 1000).is_err());
        // Capped at height 1, f(x,x) has finitely many instances.
        let mut rw = r.clone();
        rw.add_to_w([x]);
        let rw1 = rw.single().restrict(BTreeSet::from([x]), 1);
        let w = witness_dta(std::slice::from_ref(&diag), &rw1, None, 1000).unwrap();
        let cmp = bounded_equal(Slice::Dta(&w), Slice::Instances(&[diag], &rw1), 3, 100_000).unwrap();
        assert!(cmp.equal, "{:?}", cmp.counterexample);
    }

    #[test]
    fn counterexample_is_smallest() {
        let sig = sig();
        let mut empty = Dta::universal(sig.clone()).unwrap();
        empty.set_accepting([]);
        let a = parse_ground("a", &sig).unwrap();
        let set = BTreeSet::from([a.clone()]);
        let cmp = bounded_equal(Slice::Dta(&empty), Slice::Terms(&set), 1, 1000).unwrap();
        assert!(!cmp.equal);
        assert_eq!(cmp.counterexample, Some(a));
    }

    #[test]
    fn hardness_universality() {
        let sig = sig();
        let mut all = Dta::universal(sig.clone()).unwrap();
        all.set_accepting([StateId(0)]);
        let mut none = all.clone();
        none.set_accepting([]);
        assert!(union_is_universal(&[&all]).unwrap());
        assert!(!union_is_universal(&[&none]).unwrap());
        let p = gen_hardness_instance(&[NamedDta {
            name: "A1".into(),
            dta: all,
        }])
        .unwrap();
        assert_eq!(p.patterns.len(), 2);
        assert_eq!(p.patterns[0].display(&sig, Some(&p.vars)).to_string(), "f(f(x,x),y)");
    }
}
