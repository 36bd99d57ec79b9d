//! Structural similarity, structural equality and structural subsumption.

use std::collections::{BTreeSet, HashMap};

use crate::constraints::InstanceConstraint;
use crate::dta::StateId;
use crate::term::{Term, Var};

const APP: u32 = 0;
const VAR: u32 = 1;
const NO_STATE: u32 = u32::MAX;

/// Canonical token stream of `t`: variables are renumbered by first
/// occurrence and, when `state` is given, tagged with their state. Two terms
/// are structurally similar iff their untagged keys match, and structurally
/// equal iff their tagged keys match.
pub fn canonical_key(t: &Term, state: Option<&dyn Fn(Var) -> Option<StateId>>) -> Vec<u32> {
    let mut out = Vec::with_capacity(2 * t.size());
    let mut seen: HashMap<Var, u32> = HashMap::new();
    fn go(
        t: &Term,
        state: Option<&dyn Fn(Var) -> Option<StateId>>,
        seen: &mut HashMap<Var, u32>,
        out: &mut Vec<u32>,
    ) {
        match t {
            Term::Var(v) => {
                let next = seen.len() as u32;
                let idx = *seen.entry(*v).or_insert(next);
                out.push(VAR);
                out.push(idx);
                if let Some(st) = state {
                    out.push(st(*v).map_or(NO_STATE, |q| q.0));
                }
            }
            Term::App(f, cs) => {
                out.push(APP);
                out.push(f.0);
                for c in cs.iter() {
                    go(c, state, seen, out);
                }
            }
        }
    }
    go(t, state, &mut seen, &mut out);
    out
}

pub fn shape_key(t: &Term) -> Vec<u32> {
    canonical_key(t, None)
}

pub fn equality_key(t: &Term, r: &impl InstanceConstraint) -> Vec<u32> {
    canonical_key(t, Some(&|v| r.state_of_var(v)))
}

/// `t = ρ(s)` for an injective renaming `ρ`.
pub fn structurally_similar(s: &Term, t: &Term) -> bool {
    shape_key(s) == shape_key(t)
}

/// Structurally similar, with equal states at every variable position.
pub fn structurally_equal(s: &Term, t: &Term, r: &impl InstanceConstraint) -> bool {
    equality_key(s, r) == equality_key(t, r)
}

/// Whether `t` structurally subsumes `s`: `t` and `s` agree on every
/// non-variable position of `t`, and on the state of every subterm at a
/// position of `t`.
pub fn structurally_subsumes(t: &Term, s: &Term, r: &impl InstanceConstraint) -> bool {
    fn go(t: &Term, s: &Term, r: &impl InstanceConstraint) -> Option<(StateId, StateId, bool)> {
        match (t, s) {
            (Term::Var(x), _) => {
                let qt = r.state_of_var(*x)?;
                let qs = r.state_of(s)?;
                Some((qt, qs, qt == qs))
            }
            (Term::App(..), Term::Var(y)) => Some((r.state_of(t)?, r.state_of_var(*y)?, false)),
            (Term::App(f, ts), Term::App(g, ss)) => {
                if f != g || ts.len() != ss.len() {
                    return Some((r.state_of(t)?, r.state_of(s)?, false));
                }
                let mut qt = Vec::with_capacity(ts.len());
                let mut qs = Vec::with_capacity(ss.len());
                let mut ok = true;
                for (a, b) in ts.iter().zip(ss.iter()) {
                    let (x, y, k) = go(a, b, r)?;
                    qt.push(x);
                    qs.push(y);
                    ok &= k;
                }
                let at = r.dta().step(*f, &qt)?;
                let as_ = r.dta().step(*g, &qs)?;
                Some((at, as_, ok && at == as_))
            }
        }
    }
    go(t, s, r).is_some_and(|(_, _, ok)| ok)
}

/// Size of a largest pairwise non-similar subset: the number of similarity
/// classes.
pub fn struct_diff<'a>(terms: impl IntoIterator<Item = &'a Term>) -> usize {
    terms.into_iter().map(shape_key).collect::<BTreeSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::SingleConstraint;
    use crate::dta::{Dta, StateLabel};
    use crate::term::{parse_term, Signature, VarTable};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn setup() -> (Arc<Signature>, VarTable) {
        let sig = Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap());
        let mut vars = VarTable::new();
        for v in ["x", "y", "z"] {
            vars.declare(v);
        }
        (sig, vars)
    }

    fn t(s: &str, sig: &Signature, vars: &VarTable) -> Term {
        parse_term(s, sig, vars).unwrap()
    }

    /// One-state universal automaton, all variables in its state.
    fn universal(sig: &Arc<Signature>, vars: &VarTable) -> SingleConstraint {
        let a = Dta::universal(sig.clone()).unwrap();
        let c = (0..vars.len() as u32).map(|i| (Var(i), StateId(0))).collect();
        SingleConstraint::new(a, vars.clone(), c).unwrap()
    }

    #[test]
    fn similarity() {
        let (sig, vars) = setup();
        let p = |s| t(s, &sig, &vars);
        assert!(structurally_similar(&p("f(x,x)"), &p("f(y,y)")));
        assert!(!structurally_similar(&p("f(x,x)"), &p("f(x,y)")));
        assert!(structurally_similar(&p("f(x,y)"), &p("f(y,x)")));
        assert_eq!(struct_diff(&[p("f(x,x)"), p("f(y,y)")]), 1);
        assert_eq!(struct_diff(&[p("f(x,x)"), p("f(x,y)")]), 2);
        assert_eq!(struct_diff(&[]), 0);
    }

    #[test]
    fn equality_tracks_states() {
        let (sig, vars) = setup();
        let p = |s| t(s, &sig, &vars);
        let mut a = Dta::new(sig.clone()).unwrap();
        let q0 = a.add_state(StateLabel::Named("q0".into()));
        let q1 = a.add_state(StateLabel::Named("q1".into()));
        let a_ = sig.lookup("a").unwrap();
        let b_ = sig.lookup("b").unwrap();
        let f_ = sig.lookup("f").unwrap();
        a.add_transition(a_, &[], q0).unwrap();
        a.add_transition(b_, &[], q1).unwrap();
        for l in [q0, q1] {
            for r in [q0, q1] {
                a.add_transition(f_, &[l, r], q1).unwrap();
            }
        }
        let x = vars.lookup("x").unwrap();
        let y = vars.lookup("y").unwrap();
        let z = vars.lookup("z").unwrap();
        let same = SingleConstraint::new(a.clone(), vars.clone(), BTreeMap::from([(x, q1), (y, q1), (z, q0)])).unwrap();
        let diff = SingleConstraint::new(a, vars.clone(), BTreeMap::from([(x, q1), (y, q0), (z, q0)])).unwrap();
        assert!(structurally_equal(&p("f(x,x)"), &p("f(y,y)"), &same));
        assert!(!structurally_equal(&p("f(x,x)"), &p("f(y,y)"), &diff));
        // f(x,a) does not subsume f(z,y) when y's state differs from a's.
        assert!(!structurally_subsumes(&p("f(x,a)"), &p("f(z,y)"), &same));
    }

    #[test]
    fn subsumption_examples() {
        let (sig, vars) = setup();
        let p = |s| t(s, &sig, &vars);
        let r = universal(&sig, &vars);
        assert!(structurally_subsumes(&p("f(x,x)"), &p("f(a,b)"), &r));
        assert!(!structurally_subsumes(&p("f(x,a)"), &p("f(a,y)"), &r));
        assert!(structurally_subsumes(&p("f(x,y)"), &p("f(z,y)"), &r));
        assert!(structurally_subsumes(&p("x"), &p("f(a,f(y,b))"), &r));
    }
}
