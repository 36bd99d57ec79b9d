//! Instantiating a pattern until its symbols at a set of positions are fixed.

use std::collections::{BTreeSet, HashSet};

use crate::constraints::{InstanceConstraint, RestrictedConstraint};
use crate::error::{Error, Result};
use crate::subsume::equality_key;
use crate::term::{prefixes, Position, Substitution, Term, VarOrigin};

/// `p ∈ Posnv(s)`, or some prefix of `p` carries a constant.
pub fn is_determined(s: &Term, p: &Position) -> bool {
    let mut cur = s;
    for &i in &p.0 {
        match cur {
            Term::Var(_) => return false,
            Term::App(_, cs) if cs.is_empty() => return true,
            Term::App(_, cs) => match cs.get(i as usize - 1) {
                Some(c) => cur = c,
                None => return false,
            },
        }
    }
    !cur.is_var()
}

/// No prefix of `p` (including `p`) is a variable position of `s`: every
/// instance of `s` has the same symbol at `p`, or none.
pub fn is_fixed_at(s: &Term, p: &Position) -> bool {
    let mut cur = s;
    for &i in &p.0 {
        match cur {
            Term::Var(_) => return false,
            Term::App(_, cs) => match cs.get(i as usize - 1) {
                Some(c) => cur = c,
                None => return true,
            },
        }
    }
    !cur.is_var()
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub term: Term,
    /// Maps variables of the input pattern to their expansion.
    pub substitution: Substitution,
}

#[derive(Clone, Debug)]
pub struct DeterminationResult {
    /// The input constraint extended with the fresh variables.
    pub constraint: RestrictedConstraint,
    pub branches: Vec<Branch>,
    pub expansions: usize,
    pub pruned: usize,
    pub duplicates: usize,
    /// One line per expansion step.
    pub log: Vec<String>,
}

/// Splits `s` into branches determined at `positions` whose instances
/// together are exactly those of `s`.
///
/// Undetermined variable positions in `Prefixes(positions)` are expanded in
/// length-then-lexicographic order, one branch per transition into the
/// variable's state. Branches containing an empty-language variable are
/// dropped; structurally equal branches are merged.
pub fn determine(
    s: &Term,
    positions: &BTreeSet<Position>,
    r: &RestrictedConstraint,
    max_branches: usize,
) -> Result<DeterminationResult> {
    if let Some(x) = s.vars().into_iter().find(|x| r.w().contains(x)) {
        return Err(Error::pre(format!(
            "cannot determine a pattern with height-capped variable {}",
            r.vars().name(x)
        )));
    }
    let mut r = r.clone();
    let targets = prefixes(positions);
    let transitions = r.dta().transitions();
    let info = r.info().clone();
    let sig = r.dta().signature().clone();

    let is_empty_branch = |t: &Term, r: &RestrictedConstraint| {
        t.vars().into_iter().any(|v| r.state_of_var(v).is_none_or(|q| info.is_empty(q)))
    };

    let mut log = Vec::new();
    let mut done: Vec<Branch> = Vec::new();
    let mut pruned = 0;
    let mut expansions = 0;
    let mut stack = Vec::new();
    if is_empty_branch(s, &r) {
        pruned += 1;
    } else {
        stack.push(Branch {
            term: s.clone(),
            substitution: Substitution::new(),
        });
    }
    while let Some(b) = stack.pop() {
        let hole = targets.iter().find_map(|p| match b.term.get(p) {
            Some(Term::Var(y)) => Some((p.clone(), *y)),
            _ => None,
        });
        let Some((p, y)) = hole else {
            done.push(b);
            continue;
        };
        expansions += 1;
        let q = r.state_of_var(y).expect("branch variables are constrained");
        let mut children = Vec::new();
        for t in transitions.iter().filter(|t| t.target == q) {
            if t.args.iter().any(|a| info.is_empty(*a)) {
                pruned += 1;
                continue;
            }
            let zs: Vec<Term> = t
                .args
                .iter()
                .map(|&qa| Term::var(r.fresh(y, VarOrigin::Expanded { parent: y, step: expansions }, qa)))
                .collect();
            let gamma = Substitution(std::iter::once((y, Term::app(t.symbol, zs))).collect());
            children.push(Branch {
                term: gamma.apply(&b.term),
                substitution: gamma.compose(&b.substitution),
            });
        }
        log.push(format!(
            "EXPAND {} at {p} : {} ⇒ {} branches",
            r.vars().name(y),
            b.term.display(&sig, Some(r.vars())),
            children.len()
        ));
        if done.len() + stack.len() + children.len() > max_branches {
            return Err(Error::limit("determination branches", max_branches));
        }
        stack.extend(children.into_iter().rev());
    }

    let mut seen = HashSet::new();
    let before = done.len();
    let branches: Vec<Branch> = done.into_iter().filter(|b| seen.insert(equality_key(&b.term, &r))).collect();
    let duplicates = before - branches.len();

    let k_bound = r
        .dta()
        .num_transitions()
        .max(1)
        .saturating_pow(targets.len() as u32);
    if branches.len() > k_bound {
        return Err(Error::Invariant(format!("{} branches exceed {k_bound}", branches.len())));
    }
    let size_bound = 3 * targets.len().max(1) * s.size();
    for b in &branches {
        if b.term.size() > size_bound {
            return Err(Error::Invariant(format!(
                "branch of size {} exceeds {size_bound}",
                b.term.size()
            )));
        }
        if let Some(p) = positions.iter().find(|p| !is_fixed_at(&b.term, p)) {
            return Err(Error::Invariant(format!("branch not determined at {p}")));
        }
    }
    Ok(DeterminationResult {
        constraint: r,
        branches,
        expansions,
        pruned,
        duplicates,
        log,
    })
}
