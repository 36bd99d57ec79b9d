//! Deterministic bottom-up tree automata over signatures of arity at most 2.
//!
//! Transition tables are dense per symbol, so lookups never allocate. State
//! ids are dense indices; each state carries a structured label recording
//! how it was built (named input state, product tuple, split copy, sink).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::{Signature, SymbolId, Term, Var};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Provenance of a state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateLabel {
    Named(String),
    Tuple(Vec<StateLabel>),
    /// The `i`-th copy (1-based) of a state split by cardinality.
    Copy(Box<StateLabel>, usize),
    Sink,
    /// Partial argument list of a symbol with arity above 2, used by the
    /// binary encoding of automata.
    Spine(String, Vec<StateLabel>),
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Named(n) => write!(f, "{n}"),
            StateLabel::Tuple(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
            StateLabel::Copy(base, i) => write!(f, "{base}^{i}"),
            StateLabel::Sink => write!(f, "sink"),
            StateLabel::Spine(sym, parts) => {
                write!(f, "{sym}[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Table {
    Nullary(u32),
    Unary(Vec<u32>),
    Binary(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub symbol: SymbolId,
    pub args: Vec<StateId>,
    pub target: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dta {
    sig: Arc<Signature>,
    labels: Vec<StateLabel>,
    tables: Vec<Table>,
    accepting: Option<BTreeSet<StateId>>,
    sink: Option<StateId>,
    num_transitions: usize,
}

impl Dta {
    pub fn new(sig: Arc<Signature>) -> Result<Self> {
        let mut tables = Vec::with_capacity(sig.len());
        for (_, info) in sig.symbols() {
            tables.push(match info.arity {
                0 => Table::Nullary(NONE),
                1 => Table::Unary(Vec::new()),
                2 => Table::Binary(Vec::new()),
                arity => {
                    return Err(Error::ArityTooLarge {
                        symbol: info.name.clone(),
                        arity,
                    })
                }
            });
        }
        Ok(Dta {
            sig,
            labels: Vec::new(),
            tables,
            accepting: None,
            sink: None,
            num_transitions: 0,
        })
    }

    /// The one-state complete automaton accepting every ground term.
    pub fn universal(sig: Arc<Signature>) -> Result<Self> {
        let mut a = Dta::new(sig.clone())?;
        let q = a.add_state(StateLabel::Named("all".into()));
        for (f, info) in sig.symbols() {
            a.add_transition(f, &vec![q; info.arity], q)?;
        }
        a.set_accepting([q]);
        Ok(a)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn add_state(&mut self, label: StateLabel) -> StateId {
        let id = StateId(self.labels.len() as u32);
        self.labels.push(label);
        let n = self.labels.len();
        for table in &mut self.tables {
            match table {
                Table::Nullary(_) => {}
                Table::Unary(row) => row.push(NONE),
                Table::Binary(rows) => {
                    for row in rows.iter_mut() {
                        row.push(NONE);
                    }
                    rows.push(vec![NONE; n]);
                }
            }
        }
        id
    }

    fn check_state(&self, q: StateId) -> Result<()> {
        if q.index() < self.labels.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(q.to_string()))
        }
    }

    pub fn add_transition(&mut self, sym: SymbolId, args: &[StateId], target: StateId) -> Result<()> {
        if !self.sig.contains(sym) {
            return Err(Error::SignatureMismatch);
        }
        let arity = self.sig.arity(sym);
        if args.len() != arity {
            return Err(Error::ArityMismatch {
                symbol: self.sig.name(sym).to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        for &q in args.iter().chain([&target]) {
            self.check_state(q)?;
        }
        let slot = match &mut self.tables[sym.index()] {
            Table::Nullary(t) => t,
            Table::Unary(row) => &mut row[args[0].index()],
            Table::Binary(rows) => &mut rows[args[0].index()][args[1].index()],
        };
        if *slot != NONE {
            let lhs = describe_lhs(&self.sig, &self.labels, sym, args);
            return Err(Error::Nondeterministic(format!(
                "{lhs} -> {} and {lhs} -> {}",
                self.labels[*slot as usize], self.labels[target.index()]
            )));
        }
        *slot = target.0;
        self.num_transitions += 1;
        Ok(())
    }

    #[inline]
    pub fn step(&self, sym: SymbolId, args: &[StateId]) -> Option<StateId> {
        let raw = match &self.tables[sym.index()] {
            Table::Nullary(t) => *t,
            Table::Unary(row) => row[args[0].index()],
            Table::Binary(rows) => rows[args[0].index()][args[1].index()],
        };
        (raw != NONE).then_some(StateId(raw))
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.num_transitions
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.labels.len() as u32).map(StateId)
    }

    pub fn label(&self, q: StateId) -> &StateLabel {
        &self.labels[q.index()]
    }

    pub fn state_by_label(&self, label: &StateLabel) -> Option<StateId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| StateId(i as u32))
    }

    pub fn sink(&self) -> Option<StateId> {
        self.sink
    }

    pub fn mark_sink(&mut self, q: StateId) {
        self.sink = Some(q);
    }

    pub fn accepting(&self) -> Option<&BTreeSet<StateId>> {
        self.accepting.as_ref()
    }

    pub fn set_accepting(&mut self, states: impl IntoIterator<Item = StateId>) {
        self.accepting = Some(states.into_iter().collect());
    }

    pub fn clear_accepting(&mut self) {
        self.accepting = None;
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.as_ref().is_some_and(|f| f.contains(&q))
    }

    /// All transitions, sorted by symbol then argument tuple.
    pub fn transitions(&self) -> Vec<Transition> {
        let mut out = Vec::with_capacity(self.num_transitions);
        for (i, table) in self.tables.iter().enumerate() {
            let symbol = SymbolId(i as u32);
            match table {
                Table::Nullary(t) if *t != NONE => out.push(Transition {
                    symbol,
                    args: vec![],
                    target: StateId(*t),
                }),
                Table::Nullary(_) => {}
                Table::Unary(row) => {
                    for (q, &t) in row.iter().enumerate() {
                        if t != NONE {
                            out.push(Transition {
                                symbol,
                                args: vec![StateId(q as u32)],
                                target: StateId(t),
                            });
                        }
                    }
                }
                Table::Binary(rows) => {
                    for (q1, row) in rows.iter().enumerate() {
                        for (q2, &t) in row.iter().enumerate() {
                            if t != NONE {
                                out.push(Transition {
                                    symbol,
                                    args: vec![StateId(q1 as u32), StateId(q2 as u32)],
                                    target: StateId(t),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn transitions_into(&self, q: StateId) -> Vec<Transition> {
        self.transitions().into_iter().filter(|t| t.target == q).collect()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.num_states();
        self.sig
            .symbols()
            .map(|(_, info)| n.pow(info.arity as u32))
            .sum::<usize>()
            == self.num_transitions
    }

    /// `A(t)` for ground `t`; absent when a transition is missing or `t`
    /// contains a variable.
    pub fn run(&self, t: &Term) -> Option<StateId> {
        self.run_with(t, &|_| None)
    }

    /// Runs on a term whose variable leaves evaluate to the given states,
    /// i.e. on a term over `Σ ∪ Q`.
    pub fn run_with(&self, t: &Term, leaf: &impl Fn(Var) -> Option<StateId>) -> Option<StateId> {
        match t {
            Term::Var(v) => leaf(*v),
            Term::App(f, cs) => {
                if !self.sig.contains(*f) {
                    return None;
                }
                match cs.len() {
                    0 => self.step(*f, &[]),
                    1 => {
                        let q = self.run_with(&cs[0], leaf)?;
                        self.step(*f, &[q])
                    }
                    _ => {
                        let q1 = self.run_with(&cs[0], leaf)?;
                        let q2 = self.run_with(&cs[1], leaf)?;
                        self.step(*f, &[q1, q2])
                    }
                }
            }
        }
    }

    pub fn accepts(&self, t: &Term) -> bool {
        self.run(t).is_some_and(|q| self.is_accepting(q))
    }

    /// Adds a sink state for every missing transition. Complete inputs are
    /// returned unchanged.
    pub fn complete(&self) -> Dta {
        if self.is_complete() {
            return self.clone();
        }
        let mut out = self.clone();
        let sink = out.add_state(StateLabel::Sink);
        out.sink = Some(sink);
        let states: Vec<StateId> = out.states().collect();
        for (f, info) in self.sig.symbols() {
            for args in tuples(&states, info.arity) {
                if out.step(f, &args).is_none() {
                    out.add_transition(f, &args, sink).expect("slot is free");
                }
            }
        }
        out
    }

    /// Completes, then flips the accepting set.
    pub fn complement(&self) -> Result<Dta> {
        let Some(accepting) = &self.accepting else {
            return Err(Error::MissingAccepting);
        };
        let mut out = self.complete();
        let flipped: Vec<StateId> = out.states().filter(|q| !accepting.contains(q)).collect();
        out.set_accepting(flipped);
        Ok(out)
    }

    /// Full cartesian product of complete automata, without accepting states.
    pub fn product(automata: &[&Dta]) -> Result<Dta> {
        let Some(first) = automata.first() else {
            return Err(Error::pre("product of zero automata"));
        };
        let sig = first.sig.clone();
        for a in automata {
            if a.sig != sig {
                return Err(Error::SignatureMismatch);
            }
            if !a.is_complete() {
                return Err(Error::pre("product requires complete automata"));
            }
        }
        let dims: Vec<usize> = automata.iter().map(|a| a.num_states()).collect();
        let total: usize = dims.iter().product();
        let decode = |mut idx: usize| -> Vec<StateId> {
            let mut out = vec![StateId(0); dims.len()];
            for i in (0..dims.len()).rev() {
                out[i] = StateId((idx % dims[i]) as u32);
                idx /= dims[i];
            }
            out
        };
        let encode = |tuple: &[StateId]| -> StateId {
            let mut idx = 0;
            for (i, q) in tuple.iter().enumerate() {
                idx = idx * dims[i] + q.index();
            }
            StateId(idx as u32)
        };
        let mut out = Dta::new(sig.clone())?;
        let all: Vec<Vec<StateId>> = (0..total).map(decode).collect();
        for tuple in &all {
            out.add_state(tuple_label(automata, tuple));
        }
        let ids: Vec<StateId> = out.states().collect();
        for (f, info) in sig.symbols() {
            for args in tuples(&ids, info.arity) {
                let target: Vec<StateId> = automata
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let comp: Vec<StateId> = args.iter().map(|q| all[q.index()][i]).collect();
                        a.step(f, &comp).expect("complete")
                    })
                    .collect();
                out.add_transition(f, &args, encode(&target))?;
            }
        }
        Ok(out)
    }

    /// Product restricted to tuples reachable from some ground term.
    ///
    /// Returns the product and the component tuple of each product state.
    /// Missing component transitions leave the product transition undefined.
    pub fn accessible_product(automata: &[&Dta]) -> Result<(Dta, Vec<Vec<StateId>>)> {
        let Some(first) = automata.first() else {
            return Err(Error::pre("product of zero automata"));
        };
        let sig = first.sig.clone();
        if automata.iter().any(|a| a.sig != sig) {
            return Err(Error::SignatureMismatch);
        }
        let mut out = Dta::new(sig.clone())?;
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut tuples_of: Vec<Vec<StateId>> = Vec::new();
        let mut pending: Vec<(SymbolId, Vec<StateId>, Vec<StateId>)> = Vec::new();

        let target_of = |f: SymbolId, args: &[&Vec<StateId>]| -> Option<Vec<StateId>> {
            automata
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let comp: Vec<StateId> = args.iter().map(|t| t[i]).collect();
                    a.step(f, &comp)
                })
                .collect()
        };

        // Saturate: process each new state against all known states.
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut intern = |tuple: Vec<StateId>,
                          out: &mut Dta,
                          tuples_of: &mut Vec<Vec<StateId>>,
                          queue: &mut VecDeque<usize>|
         -> StateId {
            if let Some(&q) = index.get(&tuple) {
                return q;
            }
            let q = out.add_state(tuple_label(automata, &tuple));
            index.insert(tuple.clone(), q);
            tuples_of.push(tuple);
            queue.push_back(q.index());
            q
        };
        for f in sig.constants() {
            if let Some(t) = target_of(f, &[]) {
                let q = intern(t, &mut out, &mut tuples_of, &mut queue);
                pending.push((f, vec![], vec![q]));
            }
        }
        while let Some(new) = queue.pop_front() {
            for (f, info) in sig.symbols() {
                match info.arity {
                    1 => {
                        let tup = tuples_of[new].clone();
                        if let Some(t) = target_of(f, &[&tup]) {
                            let q = intern(t, &mut out, &mut tuples_of, &mut queue);
                            pending.push((f, vec![StateId(new as u32)], vec![q]));
                        }
                    }
                    2 => {
                        let known = tuples_of.len();
                        for other in 0..known {
                            for (l, r) in [(new, other), (other, new)] {
                                if l == r && other != new {
                                    continue;
                                }
                                let (tl, tr) = (tuples_of[l].clone(), tuples_of[r].clone());
                                if let Some(t) = target_of(f, &[&tl, &tr]) {
                                    let q = intern(t, &mut out, &mut tuples_of, &mut queue);
                                    pending.push((f, vec![StateId(l as u32), StateId(r as u32)], vec![q]));
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for (f, args, target) in pending {
            if out.step(f, &args).is_none() {
                out.add_transition(f, &args, target[0])?;
            }
        }
        Ok((out, tuples_of))
    }

    /// Accessible product accepting tuples whose components are all accepting.
    pub fn intersection(automata: &[&Dta]) -> Result<Dta> {
        if automata.iter().any(|a| a.accepting.is_none()) {
            return Err(Error::MissingAccepting);
        }
        let (mut out, tuples) = Dta::accessible_product(automata)?;
        let acc: Vec<StateId> = tuples
            .iter()
            .enumerate()
            .filter(|(_, t)| t.iter().zip(automata).all(|(q, a)| a.is_accepting(*q)))
            .map(|(i, _)| StateId(i as u32))
            .collect();
        out.set_accepting(acc);
        Ok(out)
    }

    /// `{q | L(A,q) ≠ ∅}` by least-fixpoint saturation.
    pub fn non_empty_states(&self) -> BTreeSet<StateId> {
        let trans = self.transitions();
        let mut nonempty = vec![false; self.num_states()];
        let mut changed = true;
        while changed {
            changed = false;
            for t in &trans {
                if !nonempty[t.target.index()] && t.args.iter().all(|q| nonempty[q.index()]) {
                    nonempty[t.target.index()] = true;
                    changed = true;
                }
            }
        }
        collect_flags(&nonempty)
    }

    /// `{q | L(A,q) is infinite}`: states reachable from a cycle of the
    /// graph with an edge `qi → q` for every transition whose argument states
    /// are all non-empty.
    pub fn infinite_states(&self) -> BTreeSet<StateId> {
        let n = self.num_states();
        let nonempty = self.non_empty_states();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for t in self.transitions() {
            if t.args.iter().all(|q| nonempty.contains(q)) {
                for q in &t.args {
                    succ[q.index()].insert(t.target.index());
                }
            }
        }
        let reach_from = |start: usize| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = succ[start].iter().copied().collect();
            while let Some(u) = stack.pop() {
                if !seen[u] {
                    seen[u] = true;
                    stack.extend(succ[u].iter().copied());
                }
            }
            seen
        };
        let mut infinite = vec![false; n];
        for q in 0..n {
            let r = reach_from(q);
            if r[q] {
                infinite[q] = true;
                for (u, hit) in r.iter().enumerate() {
                    if *hit {
                        infinite[u] = true;
                    }
                }
            }
        }
        collect_flags(&infinite)
    }

    /// `q ↦ min(|L(A,q)|, k)` for every state, indexed by state id.
    pub fn count_upto(&self, k: usize) -> Vec<usize> {
        let n = self.num_states();
        let nonempty = self.non_empty_states();
        let infinite = self.infinite_states();
        let trans = self.transitions();
        let mut count: Vec<Option<usize>> = vec![None; n];
        for q in self.states() {
            if !nonempty.contains(&q) {
                count[q.index()] = Some(0);
            } else if infinite.contains(&q) {
                count[q.index()] = Some(k);
            }
        }
        // Remaining states are finite and non-empty; their useful transitions
        // only mention finite states, so the dependency graph is acyclic.
        loop {
            let mut progress = false;
            for q in 0..n {
                if count[q].is_some() {
                    continue;
                }
                let incoming: Vec<&Transition> = trans
                    .iter()
                    .filter(|t| t.target.index() == q && t.args.iter().all(|a| nonempty.contains(a)))
                    .collect();
                if incoming.iter().all(|t| t.args.iter().all(|a| count[a.index()].is_some())) {
                    let total = incoming.iter().fold(0usize, |acc, t| {
                        let prod = t
                            .args
                            .iter()
                            .fold(1usize, |p, a| p.saturating_mul(count[a.index()].unwrap()).min(k));
                        acc.saturating_add(prod).min(k)
                    });
                    count[q] = Some(total.min(k));
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        count
            .into_iter()
            .map(|c| c.expect("finite states form a DAG"))
            .collect()
    }

    /// All terms of height at most `max_height`, grouped by exact height and
    /// state: `layers[h][q]`.
    pub fn language_layers(&self, max_height: usize, cap: usize) -> Result<Vec<Vec<Vec<Term>>>> {
        self.layers_within(&vec![true; self.num_states()], max_height, cap)
    }

    /// Like [`Self::language_layers`], leaving states outside `keep` empty.
    /// `keep` must be closed under taking argument states.
    fn layers_within(&self, keep: &[bool], max_height: usize, cap: usize) -> Result<Vec<Vec<Vec<Term>>>> {
        let n = self.num_states();
        let mut layers: Vec<Vec<Vec<Term>>> = Vec::new();
        let mut total = 0usize;
        let mut base = vec![Vec::new(); n];
        for f in self.sig.constants() {
            if let Some(q) = self.step(f, &[]).filter(|q| keep[q.index()]) {
                base[q.index()].push(Term::constant(f));
                total += 1;
            }
        }
        layers.push(base);
        for h in 1..=max_height {
            let mut layer = vec![Vec::new(); n];
            for (f, info) in self.sig.symbols() {
                match info.arity {
                    1 => {
                        for (q, below) in layers[h - 1].iter().enumerate() {
                            if let Some(target) = self.step(f, &[StateId(q as u32)]).filter(|t| keep[t.index()]) {
                                for t in below {
                                    layer[target.index()].push(Term::app(f, vec![t.clone()]));
                                    total += 1;
                                }
                            }
                        }
                    }
                    2 => {
                        for q1 in 0..n {
                            for q2 in 0..n {
                                let Some(target) = self
                                    .step(f, &[StateId(q1 as u32), StateId(q2 as u32)])
                                    .filter(|t| keep[t.index()])
                                else {
                                    continue;
                                };
                                // max(height) = h - 1: left exact, right below; or right exact.
                                for (lh, rh) in height_splits(h - 1) {
                                    for l in lh.iter().flat_map(|&i| &layers[i][q1]) {
                                        for r in rh.iter().flat_map(|&i| &layers[i][q2]) {
                                            layer[target.index()].push(Term::app(f, vec![l.clone(), r.clone()]));
                                            total += 1;
                                            if total > cap {
                                                return Err(Error::limit("language enumeration", cap));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    _ => {}
                }
                if total > cap {
                    return Err(Error::limit("language enumeration", cap));
                }
            }
            layers.push(layer);
        }
        Ok(layers)
    }

    /// `{t | A(t) = q, height(t) ≤ max_height}` in order of height.
    pub fn enumerate_language(&self, q: StateId, max_height: usize, cap: usize) -> Result<Vec<Term>> {
        self.check_state(q)?;
        // Only non-empty states that occur below `q` matter.
        let nonempty = self.non_empty_states();
        let mut keep = vec![false; self.num_states()];
        keep[q.index()] = true;
        let trans = self.transitions();
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for t in trans
                .iter()
                .filter(|t| t.target == p && t.args.iter().all(|a| nonempty.contains(a)))
            {
                for a in &t.args {
                    if !keep[a.index()] {
                        keep[a.index()] = true;
                        stack.push(*a);
                    }
                }
            }
        }
        let layers = self.layers_within(&keep, max_height, cap)?;
        Ok(layers.into_iter().flat_map(|mut l| l.swap_remove(q.index())).collect())
    }

    pub fn display(&self) -> DtaDisplay<'_> {
        DtaDisplay {
            dta: self,
            name: None,
            hide_sink: false,
        }
    }

    /// Canonical block in the problem-file syntax.
    pub fn block<'a>(&'a self, name: &'a str) -> DtaDisplay<'a> {
        DtaDisplay {
            dta: self,
            name: Some(name),
            hide_sink: false,
        }
    }

    /// Printable identifier for each state: the label when it is a plain
    /// identifier and unique, else `q<id>`.
    pub fn state_names(&self) -> Vec<String> {
        let mut seen = HashMap::new();
        for l in &self.labels {
            *seen.entry(l.to_string()).or_insert(0) += 1;
        }
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let s = l.to_string();
                let ident = s
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
                if ident && seen[&s] == 1 && !(s.starts_with('q') && s[1..].parse::<u32>().is_ok()) {
                    s
                } else {
                    format!("q{i}")
                }
            })
            .collect()
    }
}

fn collect_flags(flags: &[bool]) -> BTreeSet<StateId> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| StateId(i as u32))
        .collect()
}

/// For a binary node whose tallest child has height `m`: (left heights,
/// right heights) pairs covering every combination exactly once.
fn height_splits(m: usize) -> [(Vec<usize>, Vec<usize>); 2] {
    [((m..=m).collect(), (0..=m).collect()), ((0..m).collect(), (m..=m).collect())]
}

pub(crate) fn tuples(states: &[StateId], arity: usize) -> Vec<Vec<StateId>> {
    match arity {
        0 => vec![vec![]],
        1 => states.iter().map(|&q| vec![q]).collect(),
        _ => {
            let mut out = Vec::with_capacity(states.len() * states.len());
            for &a in states {
                for &b in states {
                    out.push(vec![a, b]);
                }
            }
            out
        }
    }
}

fn tuple_label(automata: &[&Dta], tuple: &[StateId]) -> StateLabel {
    StateLabel::Tuple(
        tuple
            .iter()
            .zip(automata)
            .map(|(q, a)| a.label(*q).clone())
            .collect(),
    )
}

fn describe_lhs(sig: &Signature, labels: &[StateLabel], sym: SymbolId, args: &[StateId]) -> String {
    if args.is_empty() {
        return sig.name(sym).to_string();
    }
    let args: Vec<String> = args.iter().map(|q| labels[q.index()].to_string()).collect();
    format!("{}({})", sig.name(sym), args.join(","))
}

pub struct DtaDisplay<'a> {
    dta: &'a Dta,
    name: Option<&'a str>,
    hide_sink: bool,
}

impl DtaDisplay<'_> {
    pub fn hide_sink(mut self) -> Self {
        self.hide_sink = true;
        self
    }
}

impl fmt::Display for DtaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.dta;
        let names = a.state_names();
        let hidden = |q: StateId| self.hide_sink && a.sink == Some(q);
        writeln!(f, "automaton {}", self.name.unwrap_or("A"))?;
        let states: Vec<&str> = a
            .states()
            .filter(|q| !hidden(*q))
            .map(|q| names[q.index()].as_str())
            .collect();
        writeln!(f, "  states {}", states.join(" "))?;
        if let Some(acc) = &a.accepting {
            let fin: Vec<&str> = acc.iter().map(|q| names[q.index()].as_str()).collect();
            writeln!(f, "  final {}", fin.join(" "))?;
        }
        for t in a.transitions() {
            if hidden(t.target) || t.args.iter().any(|q| hidden(*q)) {
                continue;
            }
            let sym = a.sig.name(t.symbol);
            if t.args.is_empty() {
                writeln!(f, "  {sym} -> {}", names[t.target.index()])?;
            } else {
                let args: Vec<&str> = t.args.iter().map(|q| names[q.index()].as_str()).collect();
                writeln!(f, "  {sym}({}) -> {}", args.join(","), names[t.target.index()])?;
            }
        }
        write!(f, "end")
    }
}

/// Lazily enumerates `L(A,q)` by exact height, keeping at most `limit`
/// terms per `(state, height)` in a fixed generation order (transition
/// order, then argument order).
pub struct LanguageSampler<'a> {
    dta: std::marker::PhantomData<&'a Dta>,
    limit: usize,
    by_target: Vec<Vec<Transition>>,
    exact: HashMap<(StateId, usize), Arc<Vec<Term>>>,
    upto: HashMap<(StateId, usize), Arc<Vec<Term>>>,
}

impl<'a> LanguageSampler<'a> {
    pub fn new(dta: &'a Dta, limit: usize) -> Self {
        let mut by_target = vec![Vec::new(); dta.num_states()];
        for t in dta.transitions() {
            by_target[t.target.index()].push(t);
        }
        LanguageSampler {
            dta: std::marker::PhantomData,
            limit: limit.max(1),
            by_target,
            exact: HashMap::new(),
            upto: HashMap::new(),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// First `limit` terms of exact height `k` in `L(A,q)`.
    pub fn exact(&mut self, q: StateId, k: usize) -> Arc<Vec<Term>> {
        if let Some(v) = self.exact.get(&(q, k)) {
            return v.clone();
        }
        let mut out = Vec::new();
        let trans = self.by_target[q.index()].clone();
        'outer: for t in &trans {
            match (t.args.len(), k) {
                (0, 0) => out.push(Term::constant(t.symbol)),
                (0, _) | (_, 0) => {}
                (1, _) => {
                    let kids = self.exact(t.args[0], k - 1);
                    for c in kids.iter() {
                        out.push(Term::app(t.symbol, vec![c.clone()]));
                        if out.len() >= self.limit {
                            break 'outer;
                        }
                    }
                }
                _ => {
                    let l_exact = self.exact(t.args[0], k - 1);
                    let r_upto = self.upto(t.args[1], k - 1);
                    for l in l_exact.iter() {
                        for r in r_upto.iter() {
                            out.push(Term::app(t.symbol, vec![l.clone(), r.clone()]));
                            if out.len() >= self.limit {
                                break 'outer;
                            }
                        }
                    }
                    if k >= 2 {
                        let l_below = self.upto(t.args[0], k - 2);
                        let r_exact = self.exact(t.args[1], k - 1);
                        for l in l_below.iter() {
                            for r in r_exact.iter() {
                                out.push(Term::app(t.symbol, vec![l.clone(), r.clone()]));
                                if out.len() >= self.limit {
                                    break 'outer;
                                }
                            }
                        }
                    } else {
                        // k == 1: both children are constants, already covered above.
                    }
                }
            }
            if out.len() >= self.limit {
                break;
            }
        }
        let out = Arc::new(out);
        self.exact.insert((q, k), out.clone());
        out
    }

    /// First `limit` terms of height at most `k`, lower heights first.
    pub fn upto(&mut self, q: StateId, k: usize) -> Arc<Vec<Term>> {
        if let Some(v) = self.upto.get(&(q, k)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for h in 0..=k {
            let layer = self.exact(q, h);
            for t in layer.iter() {
                if out.len() >= self.limit {
                    break;
                }
                out.push(t.clone());
            }
            if out.len() >= self.limit {
                break;
            }
        }
        let out = Arc::new(out);
        self.upto.insert((q, k), out.clone());
        out
    }

    /// The first term of `L(A,q)` with height at least `min_height` (in
    /// height order, then generation order) accepted by `accept`. Gives up
    /// after `horizon` heights without a hit.
    pub fn pick(
        &mut self,
        q: StateId,
        min_height: usize,
        horizon: usize,
        mut accept: impl FnMut(&Term) -> bool,
    ) -> Option<Term> {
        for k in min_height..=min_height + horizon {
            let layer = self.exact(q, k);
            if let Some(t) = layer.iter().find(|t| accept(t)) {
                return Some(t.clone());
            }
        }
        None
    }
}
