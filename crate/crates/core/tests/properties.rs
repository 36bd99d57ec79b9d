mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use termreg::constraints::{match_instance, to_single};
use termreg::decider::{decide, DecideOptions, ProcessingOrder};
use termreg::problem::ProblemFile;
use termreg::{BinaryEncoding, Signature, Term};

use common::{random_problem, ProblemShape};

fn ground(rng: &mut impl Rng, sig: &Signature, depth: usize) -> Term {
    let symbols: Vec<_> = sig
        .symbols()
        .filter(|(_, i)| depth > 0 || i.arity == 0)
        .map(|(f, i)| (f, i.arity))
        .collect();
    let &(f, arity) = symbols.choose(rng).unwrap();
    Term::app(f, (0..arity).map(|_| ground(rng, sig, depth - 1)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_coding_round_trips(seed in any::<u64>()) {
        let sig = Arc::new(Signature::from_symbols([("h", 4), ("g", 3), ("f", 2), ("n", 1), ("a", 0)]).unwrap());
        let enc = BinaryEncoding::new(sig.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ground(&mut rng, &sig, 4);
        let coded = enc.encode(&t);
        prop_assert!(enc.target().max_arity() <= 2);
        prop_assert_eq!(enc.decode(&coded).unwrap(), t);
    }

    #[test]
    fn problem_text_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, &ProblemShape::default());
        let text = ProblemFile::from_problem(&p).unwrap().to_text();
        let again = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(again.to_text(), text);
        let compiled = again.compile().unwrap().problem;
        for _ in 0..50 {
            let t = ground(&mut rng, &p.sig, 3);
            prop_assert_eq!(compiled.is_instance(&t), p.is_instance(&t));
        }
    }

    #[test]
    fn single_constraint_keeps_membership(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, &ProblemShape::default());
        let single = to_single(&p, 1_000_000).unwrap();
        for _ in 0..200 {
            let depth = rng.gen_range(0..5);
            let t = ground(&mut rng, &p.sig, depth);
            let after = single.patterns.iter().any(|s| match_instance(&t, s, &single.constraint));
            prop_assert_eq!(after, p.is_instance(&t));
        }
    }

    #[test]
    fn verdict_ignores_processing_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, &ProblemShape::default());
        let base = decide(&p, &DecideOptions::default()).unwrap();
        let mut perm: Vec<usize> = (0..base.single.patterns.len()).collect();
        perm.shuffle(&mut rng);
        let opts = DecideOptions { order: ProcessingOrder::Explicit(perm), ..Default::default() };
        let other = decide(&p, &opts).unwrap();
        prop_assert_eq!(base.verdict.is_regular(), other.verdict.is_regular());
    }

    #[test]
    fn refutation_witnesses_are_instances(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, &ProblemShape::default());
        let d = decide(&p, &DecideOptions::default()).unwrap();
        if let termreg::decider::Verdict::NotRegular(r) = &d.verdict {
            prop_assert_eq!(r.witnesses.len(), 10);
            for w in &r.witnesses {
                prop_assert!(p.is_instance(w));
            }
        }
    }
}
