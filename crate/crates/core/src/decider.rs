//! The decision procedure.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{
    is_regular_term, match_instance, to_single, InstanceConstraint, RegularConstraintProblem, RestrictedConstraint,
    SingleInstance, TransformStats,
};
use crate::determine::determine;
use crate::error::{Error, Result};
use crate::formula::{build_formula, ConstrainedFormula, ReduceStats};
use crate::subsume::{equality_key, structurally_subsumes};
use crate::term::{Position, Term, Var, VarTable};

/// Order in which the patterns of the single-constraint instance are visited.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ProcessingOrder {
    #[default]
    Canonical,
    /// The canonical order shuffled with a seeded generator.
    Seeded(u64),
    /// Explicit permutation of pattern indices.
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub witnesses: usize,
    pub max_patterns: usize,
    pub max_branches: usize,
    pub max_disjuncts: usize,
    pub max_conjunctions: usize,
    pub order: ProcessingOrder,
    pub trace: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            witnesses: 10,
            max_patterns: 200_000,
            max_branches: 200_000,
            max_disjuncts: 200_000,
            max_conjunctions: 2_000_000,
            order: ProcessingOrder::Canonical,
            trace: false,
        }
    }
}

/// Evidence for non-regularity: a branch of a pattern with infinitely many
/// uncovered instances that differ on a duplicated variable.
#[derive(Clone, Debug)]
pub struct Refutation {
    /// Index into the single-constraint patterns.
    pub pattern: usize,
    /// Index of the input pattern it came from.
    pub source: usize,
    pub branch: Term,
    pub var: Var,
    pub formula: String,
    pub witnesses: Vec<Term>,
    /// Names for the variables of `branch`.
    pub vars: VarTable,
}

/// Regular patterns whose union is the instance set: the untouched
/// patterns plus the uncovered branches of every pattern that was checked.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub patterns: Vec<Term>,
    pub constraint: RestrictedConstraint,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Regular(Certificate),
    NotRegular(Refutation),
}

impl Verdict {
    pub fn is_regular(&self) -> bool {
        matches!(self, Verdict::Regular(_))
    }
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct DecideStats {
    pub transform: TransformStats,
    /// `|Q|` of the 1-or-n automaton.
    pub states: usize,
    /// Maximum height of the input patterns.
    pub max_height: usize,
    /// `h = |Q| + 2H`.
    pub h: usize,
    pub patterns: usize,
    pub nonregular_patterns: usize,
    pub determined_positions: usize,
    pub branches: usize,
    pub expansions: usize,
    pub pruned: usize,
    pub formulas: usize,
    pub disjuncts: usize,
    pub max_subsumers: usize,
    pub reduce: ReduceStats,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub single: SingleInstance,
    pub stats: DecideStats,
    pub trace: Vec<String>,
}

/// Outcome of the infinite-instances check on one branch.
#[derive(Clone, Debug)]
pub struct InstancesCheck {
    pub formula: ConstrainedFormula,
    pub reduced: ConstrainedFormula,
    pub stats: ReduceStats,
    /// A duplicated variable of the branch with an infinite language.
    pub duplicated: Option<Var>,
}

impl InstancesCheck {
    pub fn holds(&self) -> bool {
        !self.reduced.is_false() && self.duplicated.is_some()
    }
}

pub fn infinite_instances(
    s: &Term,
    subsumers: &[Term],
    r: &RestrictedConstraint,
    opts: &DecideOptions,
    trace: Option<&mut Vec<String>>,
) -> Result<InstancesCheck> {
    let formula = build_formula(s, subsumers, r, opts.max_disjuncts)?;
    let (reduced, stats) = formula.reduce(opts.max_conjunctions, trace)?;
    if !reduced.is_final() {
        return Err(Error::Invariant("reduced formula is not final".into()));
    }
    let duplicated = s
        .duplicated_vars()
        .into_iter()
        .find(|&x| r.state_of_var(x).is_some_and(|q| r.info().is_infinite(q)));
    Ok(InstancesCheck {
        formula,
        reduced,
        stats,
        duplicated,
    })
}

fn processing_order(patterns: &[Term], r: &RestrictedConstraint, order: &ProcessingOrder) -> Result<Vec<usize>> {
    let mut canonical: Vec<usize> = (0..patterns.len()).collect();
    canonical.sort_by_cached_key(|&i| (equality_key(&patterns[i], r), i));
    match order {
        ProcessingOrder::Canonical => Ok(canonical),
        ProcessingOrder::Seeded(seed) => {
            canonical.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            Ok(canonical)
        }
        ProcessingOrder::Explicit(p) => {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != (0..patterns.len()).collect::<Vec<_>>() {
                return Err(Error::pre(format!("order is not a permutation of 0..{}", patterns.len())));
            }
            Ok(p.clone())
        }
    }
}

/// Decides whether the instance set of `prob` is regular. The signature
/// must be binary.
pub fn decide(prob: &RegularConstraintProblem, opts: &DecideOptions) -> Result<Decision> {
    let single = to_single(prob, opts.max_patterns)?;
    let s2 = single.patterns.clone();
    let max_height = prob.distinct_patterns().iter().map(Term::height).max().unwrap_or(0);
    let nq = single.constraint.dta().num_states();
    let h = nq + 2 * max_height;
    let mut r = single.constraint.restrict(BTreeSet::new(), h);
    let sig = r.dta().signature().clone();

    let positions: BTreeSet<Position> = s2.iter().flat_map(|s| s.nonvar_positions()).collect();
    let mut stats = DecideStats {
        transform: single.stats.clone(),
        states: nq,
        max_height,
        h,
        patterns: s2.len(),
        determined_positions: positions.len(),
        ..Default::default()
    };
    let mut trace = Vec::new();
    let log = |line: String, trace: &mut Vec<String>| {
        if opts.trace {
            trace.push(line);
        }
    };
    log(
        format!("SINGLE |S2| = {}, |Q| = {nq}, H = {max_height}, h = {h}", s2.len()),
        &mut trace,
    );

    let order = processing_order(&s2, &r, &opts.order)?;
    let mut certificate: Vec<Term> = Vec::new();
    for &idx in &order {
        let s = &s2[idx];
        let shown = s.display(&sig, Some(r.vars())).to_string();
        if is_regular_term(s, &r) {
            log(format!("PATTERN {shown} : regular"), &mut trace);
            certificate.push(s.clone());
            continue;
        }
        if s.vars().iter().any(|x| r.w().contains(x)) {
            return Err(Error::Invariant(format!("pattern {shown} shares variables with W")));
        }
        stats.nonregular_patterns += 1;
        log(format!("PATTERN {shown} : checking"), &mut trace);

        let det = determine(s, &positions, &r, opts.max_branches)?;
        stats.expansions += det.expansions;
        stats.pruned += det.pruned;
        stats.branches += det.branches.len();
        for line in &det.log {
            log(line.clone(), &mut trace);
        }
        let r2 = det.constraint;
        let mut branches: Vec<&Term> = det.branches.iter().map(|b| &b.term).collect();
        branches.sort_by_cached_key(|t| equality_key(t, &r2));

        for si in branches {
            let si_shown = si.display(&sig, Some(r2.vars())).to_string();
            let s3: Vec<Term> = s2
                .iter()
                .enumerate()
                .filter(|&(j, t)| j != idx && structurally_subsumes(t, si, &r2))
                .map(|(_, t)| t.clone())
                .collect();
            stats.max_subsumers = stats.max_subsumers.max(s3.len());
            stats.formulas += 1;
            log(
                format!(
                    "BRANCH {si_shown} : S3 = {{{}}}",
                    s3.iter()
                        .map(|t| t.display(&sig, Some(r2.vars())).to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                &mut trace,
            );
            let mut rules = Vec::new();
            let check = infinite_instances(si, &s3, &r2, opts, opts.trace.then_some(&mut rules))?;
            stats.disjuncts += check.formula.disjuncts.len();
            stats.reduce.merge(&check.stats);
            log(format!("FORMULA {}", check.formula), &mut trace);
            for line in rules {
                log(line, &mut trace);
            }
            log(format!("REDUCED {}", check.reduced), &mut trace);
            if check.holds() {
                let x = check.duplicated.expect("holds");
                let witnesses = collect_witnesses(&check.reduced, si, x, s, idx, &s2, &s3, &r2, opts.witnesses)?;
                log(
                    format!("NOT-REGULAR {si_shown} on {}", r2.vars().name(x)),
                    &mut trace,
                );
                let refutation = Refutation {
                    pattern: idx,
                    source: single.sources[idx],
                    branch: si.clone(),
                    var: x,
                    formula: check.reduced.to_string(),
                    witnesses,
                    vars: r2.vars().clone(),
                };
                return Ok(Decision {
                    verdict: Verdict::NotRegular(refutation),
                    single,
                    stats,
                    trace,
                });
            }
            if !check.reduced.is_false() {
                certificate.push(si.clone());
            }
        }
        r = r2;
        let dup = s.duplicated_vars();
        log(
            format!(
                "W += {{{}}}",
                dup.iter().map(|x| r.vars().name(*x).to_string()).collect::<Vec<_>>().join(", ")
            ),
            &mut trace,
        );
        r.add_to_w(dup);
    }
    log("REGULAR".into(), &mut trace);
    Ok(Decision {
        verdict: Verdict::Regular(Certificate {
            patterns: certificate,
            constraint: r,
        }),
        single,
        stats,
        trace,
    })
}

/// Ground instances of `si` from distinct solutions, each checked against
/// the other patterns.
#[allow(clippy::too_many_arguments)]
fn collect_witnesses(
    reduced: &ConstrainedFormula,
    si: &Term,
    x: Var,
    s: &Term,
    idx: usize,
    s2: &[Term],
    s3: &[Term],
    r: &RestrictedConstraint,
    count: usize,
) -> Result<Vec<Term>> {
    let sols = reduced.enumerate_witnesses(x, count)?;
    let mut out = Vec::with_capacity(sols.len());
    let mut seen: BTreeMap<Term, ()> = BTreeMap::new();
    for phi in sols {
        let t = phi.apply(si);
        let xv = phi.get(x).cloned().expect("solutions cover the branch");
        let ok = t.is_ground()
            && match_instance(&t, si, r)
            && match_instance(&t, s, r)
            && s3.iter().all(|u| !match_instance(&t, u, r))
            && s2.iter().enumerate().all(|(j, u)| j == idx || !match_instance(&t, u, r))
            && seen.insert(xv, ()).is_none();
        if !ok {
            return Err(Error::Invariant("witness failed verification".into()));
        }
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::NamedDta;
    use crate::dta::{Dta, StateLabel};
    use crate::term::{parse_term, Signature};
    use std::sync::Arc;

    fn problem(patterns: &[&str], automata: Vec<NamedDta>, assign: &[(&str, usize)]) -> RegularConstraintProblem {
        let sig = automata
            .first()
            .map(|a| a.dta.signature().clone())
            .unwrap_or_else(|| Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap()));
        let mut vars = VarTable::new();
        for (v, _) in assign {
            vars.declare(v);
        }
        let patterns = patterns.iter().map(|p| parse_term(p, &sig, &vars).unwrap()).collect();
        let assignment = assign.iter().map(|(v, i)| (vars.lookup(v).unwrap(), *i)).collect();
        RegularConstraintProblem {
            sig,
            vars,
            patterns,
            automata,
            assignment,
        }
    }

    fn any() -> NamedDta {
        let sig = Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap());
        let mut d = Dta::universal(sig).unwrap();
        d.set_accepting(d.states().collect::<Vec<_>>());
        NamedDta {
            name: "any".into(),
            dta: d,
        }
    }

    fn only_a() -> NamedDta {
        let sig = Arc::new(Signature::from_symbols([("f", 2), ("a", 0), ("b", 0)]).unwrap());
        let mut d = Dta::new(sig.clone()).unwrap();
        let q = d.add_state(StateLabel::Named("qa".into()));
        d.add_transition(sig.lookup("a").unwrap(), &[], q).unwrap();
        d.set_accepting([q]);
        NamedDta {
            name: "onlya".into(),
            dta: d,
        }
    }

    #[test]
    fn linear_is_regular() {
        let p = problem(&["f(x,y)"], vec![any()], &[("x", 0), ("y", 0)]);
        let d = decide(&p, &DecideOptions::default()).unwrap();
        assert!(d.verdict.is_regular());
    }

    #[test]
    fn diagonal_is_not_regular() {
        let p = problem(&["f(x,x)"], vec![any()], &[("x", 0)]);
        let d = decide(&p, &DecideOptions::default()).unwrap();
        let Verdict::NotRegular(r) = &d.verdict else {
            panic!("expected not regular")
        };
        assert_eq!(r.witnesses.len(), 10);
        let distinct: BTreeSet<&Term> = r.witnesses.iter().collect();
        assert_eq!(distinct.len(), 10);
        for w in &r.witnesses {
            assert!(p.is_instance(w));
            assert_eq!(w.children()[0], w.children()[1]);
        }
    }

    #[test]
    fn finite_diagonal_is_regular() {
        let p = problem(&["f(x,x)"], vec![only_a()], &[("x", 0)]);
        assert!(decide(&p, &DecideOptions::default()).unwrap().verdict.is_regular());
    }

    #[test]
    fn covered_diagonal_is_regular() {
        let p = problem(&["f(x,x)", "f(y,z)"], vec![any()], &[("x", 0), ("y", 0), ("z", 0)]);
        assert!(decide(&p, &DecideOptions::default()).unwrap().verdict.is_regular());
    }

    #[test]
    fn partly_covered_diagonal() {
        let p = problem(&["f(x,x)", "f(a,y)"], vec![any()], &[("x", 0), ("y", 0)]);
        let d = decide(&p, &DecideOptions::default()).unwrap();
        let Verdict::NotRegular(r) = &d.verdict else {
            panic!("expected not regular")
        };
        let sig = p.sig.clone();
        for w in &r.witnesses {
            assert!(p.is_instance(w));
            assert!(!p.is_instance_of(w, &p.patterns[1]), "{}", w.display(&sig, None));
        }
    }

    #[test]
    fn order_does_not_change_verdict() {
        let p = problem(&["f(x,x)", "f(y,z)", "f(a,u)"], vec![any()], &[("x", 0), ("y", 0), ("z", 0), ("u", 0)]);
        for seed in 0..5 {
            let opts = DecideOptions {
                order: ProcessingOrder::Seeded(seed),
                ..Default::default()
            };
            assert!(decide(&p, &opts).unwrap().verdict.is_regular());
        }
        let bad = DecideOptions {
            order: ProcessingOrder::Explicit(vec![0, 0]),
            ..Default::default()
        };
        assert!(decide(&p, &bad).is_err());
    }

    #[test]
    fn trace_is_recorded() {
        let p = problem(&["f(x,x)"], vec![any()], &[("x", 0)]);
        let opts = DecideOptions {
            trace: true,
            ..Default::default()
        };
        let d = decide(&p, &opts).unwrap();
        assert!(d.trace[0].starts_with("SINGLE"));
        assert!(d.trace.iter().any(|l| l.starts_with("NOT-REGULAR")));
    }
}
