#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use termreg::constraints::{NamedDta, RegularConstraintProblem};
use termreg::term::{Signature, Term, Var, VarTable};
use termreg::{Dta, StateId, StateLabel};

pub fn sig() -> Arc<Signature> {
    Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap())
}

/// Random automaton over `{f/2, a, b}`; each transition is present with
/// probability `density`.
pub fn random_dta(rng: &mut impl Rng, sig: &Arc<Signature>, states: usize, density: f64) -> Dta {
    let mut d = Dta::new(sig.clone()).unwrap();
    let qs: Vec<StateId> = (0..states)
        .map(|i| d.add_state(StateLabel::Named(format!("q{i}"))))
        .collect();
    for (f, info) in sig.symbols() {
        let tuples: Vec<Vec<StateId>> = match info.arity {
            0 => vec![vec![]],
            _ => qs.iter().flat_map(|&l| qs.iter().map(move |&r| vec![l, r])).collect(),
        };
        for args in tuples {
            if rng.gen_bool(density) {
                let q = *qs.choose(rng).unwrap();
                d.add_transition(f, &args, q).unwrap();
            }
        }
    }
    let acc: Vec<StateId> = qs.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if acc.is_empty() {
        d.set_accepting([*qs.choose(rng).unwrap()]);
    } else {
        d.set_accepting(acc);
    }
    d
}

pub fn random_pattern(rng: &mut impl Rng, sig: &Signature, vars: &[Var], depth: usize) -> Term {
    let leaf = |rng: &mut dyn rand::RngCore| {
        if rng.gen_bool(0.7) {
            Term::var(*vars.choose(rng).unwrap())
        } else {
            let c = if rng.gen_bool(0.5) { "a" } else { "b" };
            Term::constant(sig.lookup(c).unwrap())
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let f = sig.lookup("f").unwrap();
    Term::app(
        f,
        vec![
            random_pattern(rng, sig, vars, depth - 1),
            random_pattern(rng, sig, vars, depth - 1),
        ],
    )
}

pub struct ProblemShape {
    pub max_automata: usize,
    pub max_states: usize,
    pub max_patterns: usize,
    pub max_height: usize,
    pub linear: bool,
}

impl Default for ProblemShape {
    fn default() -> Self {
        ProblemShape {
            max_automata: 2,
            max_states: 3,
            max_patterns: 3,
            max_height: 2,
            linear: false,
        }
    }
}

/// Random problem over variables `x`, `y`, `z` (linear shapes use more).
pub fn random_problem(rng: &mut impl Rng, shape: &ProblemShape) -> RegularConstraintProblem {
    let sig = sig();
    let mut vars = VarTable::new();
    let pool: Vec<Var> = if shape.linear {
        (0..8).map(|i| vars.declare(&format!("x{i}"))).collect()
    } else {
        ["x", "y", "z"].iter().map(|v| vars.declare(v)).collect()
    };
    let n_automata = rng.gen_range(1..=shape.max_automata);
    let automata: Vec<NamedDta> = (0..n_automata)
        .map(|i| {
            let states = rng.gen_range(1..=shape.max_states);
            let density = if rng.gen_bool(0.5) { 1.0 } else { 0.8 };
            NamedDta {
                name: format!("A{i}"),
                dta: random_dta(rng, &sig, states, density),
            }
        })
        .collect();
    let assignment: BTreeMap<Var, usize> = pool.iter().map(|&v| (v, rng.gen_range(0..n_automata))).collect();
    let n_patterns = rng.gen_range(1..=shape.max_patterns);
    let patterns = (0..n_patterns)
        .map(|_| {
            if shape.linear {
                let mut next = pool.iter().copied();
                linearize(&random_pattern(rng, &sig, &pool, shape.max_height), &mut next)
            } else {
                random_pattern(rng, &sig, &pool, shape.max_height)
            }
        })
        .collect();
    RegularConstraintProblem {
        sig,
        vars,
        patterns,
        automata,
        assignment,
    }
}

fn linearize(t: &Term, next: &mut impl Iterator<Item = Var>) -> Term {
    match t {
        Term::Var(_) => Term::var(next.next().expect("enough variables")),
        Term::App(f, cs) => Term::app(*f, cs.iter().map(|c| linearize(c, next)).collect()),
    }
}

/// Binds `s` against ground `t`, or `None` when `t` is not an instance of
/// the shape of `s`.
pub fn bind(t: &Term, s: &Term, out: &mut BTreeMap<Var, Term>) -> bool {
    match s {
        Term::Var(x) => match out.get(x) {
            Some(u) => u == t,
            None => {
                out.insert(*x, t.clone());
                true
            }
        },
        Term::App(f, ss) => {
            t.symbol() == Some(*f)
                && t.children().len() == ss.len()
                && ss.iter().zip(t.children()).all(|(s, c)| bind(c, s, out))
        }
    }
}
