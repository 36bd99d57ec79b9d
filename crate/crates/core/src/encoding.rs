//! Binary coding of ranked terms and automata.
//!
//! Symbols of arity at most 2 are kept. A symbol `f` of arity `k ≥ 3`
//! becomes a binary head `f` plus binary spine symbols `f@2 .. f@(k-1)`:
//!
//! ```text
//! f(t1, t2, ..., tk) ↦ f(t1, f@2(t2, f@3(t3, ... f@(k-1)(t(k-1), tk))))
//! ```
//!
//! Variables stay leaves, so the coding commutes with substitution and
//! patterns can be encoded independently of their instances.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::dta::{Dta, StateId, StateLabel};
use crate::error::{Error, Result};
use crate::term::{Signature, SymbolId, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Role {
    /// Original symbol `source` of the given arity.
    Head(SymbolId),
    /// Spine cell `i` (2-based) of `source`.
    Spine(SymbolId, usize),
}

#[derive(Clone, Debug)]
pub struct BinaryEncoding {
    source: Arc<Signature>,
    target: Arc<Signature>,
    head: Vec<SymbolId>,
    spine: HashMap<(SymbolId, usize), SymbolId>,
    role: Vec<Role>,
}

impl BinaryEncoding {
    pub fn new(source: Arc<Signature>) -> Result<Self> {
        let mut target = Signature::new();
        let mut head = Vec::new();
        let mut spine = HashMap::new();
        let mut role = Vec::new();
        for (f, info) in source.symbols() {
            let id = target.add(&info.name, info.arity.min(2))?;
            head.push(id);
            role.push(Role::Head(f));
        }
        for (f, info) in source.symbols() {
            for i in 2..info.arity.max(2) {
                let id = target.add(&format!("{}@{}", info.name, i), 2)?;
                spine.insert((f, i), id);
                role.push(Role::Spine(f, i));
            }
        }
        Ok(BinaryEncoding {
            source,
            target: Arc::new(target),
            head,
            spine,
            role,
        })
    }

    pub fn source(&self) -> &Arc<Signature> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Signature> {
        &self.target
    }

    /// True when no symbol needed re-coding.
    pub fn is_identity(&self) -> bool {
        self.spine.is_empty()
    }

    /// Symbols whose arity exceeds 2, by name.
    pub fn recoded_symbols(&self) -> Vec<(String, usize)> {
        self.source
            .symbols()
            .filter(|(_, i)| i.arity > 2)
            .map(|(_, i)| (i.name.clone(), i.arity))
            .collect()
    }

    pub fn encode(&self, t: &Term) -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::App(f, cs) => {
                let enc: Vec<Term> = cs.iter().map(|c| self.encode(c)).collect();
                self.encode_node(*f, enc)
            }
        }
    }

    fn encode_node(&self, f: SymbolId, mut args: Vec<Term>) -> Term {
        let k = args.len();
        if k <= 2 {
            return Term::app(self.head[f.index()], args);
        }
        let mut acc = args.pop().expect("k >= 3");
        for i in (2..k).rev() {
            let arg = args.pop().expect("k >= 3");
            acc = Term::app(self.spine[&(f, i)], vec![arg, acc]);
        }
        let first = args.pop().expect("k >= 3");
        Term::app(self.head[f.index()], vec![first, acc])
    }

    pub fn decode(&self, t: &Term) -> Result<Term> {
        match t {
            Term::Var(_) => Ok(t.clone()),
            Term::App(g, cs) => {
                let Some(Role::Head(f)) = self.role.get(g.index()) else {
                    return Err(self.malformed(t));
                };
                let k = self.source.arity(*f);
                if k <= 2 {
                    let cs = cs.iter().map(|c| self.decode(c)).collect::<Result<Vec<_>>>()?;
                    return Ok(Term::app(*f, cs));
                }
                let mut out = vec![self.decode(&cs[0])?];
                let mut cur = &cs[1];
                for i in 2..k {
                    match cur {
                        Term::App(s, sc) if self.role.get(s.index()) == Some(&Role::Spine(*f, i)) => {
                            out.push(self.decode(&sc[0])?);
                            cur = &sc[1];
                        }
                        _ => return Err(self.malformed(t)),
                    }
                }
                out.push(self.decode(cur)?);
                Ok(Term::app(*f, out))
            }
        }
    }

    fn malformed(&self, t: &Term) -> Error {
        Error::pre(format!(
            "term {} is not in the image of the binary coding",
            t.display(&self.target, None)
        ))
    }

    /// Encodes an automaton given over the source signature.
    pub fn encode_dta(&self, raw: &RawDta) -> Result<Dta> {
        let mut out = Dta::new(self.target.clone())?;
        for name in &raw.states {
            out.add_state(StateLabel::Named(name.clone()));
        }
        let mut spine_states: HashMap<(SymbolId, Vec<usize>), StateId> = HashMap::new();
        for (f, args, target) in &raw.transitions {
            let k = args.len();
            let target = StateId(*target as u32);
            let ids: Vec<StateId> = args.iter().map(|&q| StateId(q as u32)).collect();
            if k <= 2 {
                out.add_transition(self.head[f.index()], &ids, target)?;
                continue;
            }
            // Spine cells are keyed by the argument suffix they have read.
            let mut acc = ids[k - 1];
            for i in (2..k).rev() {
                let key = (*f, args[i - 1..].to_vec());
                let state = match spine_states.get(&key) {
                    Some(&s) => s,
                    None => {
                        let label = StateLabel::Spine(
                            self.source.name(*f).to_string(),
                            key.1.iter().map(|&q| StateLabel::Named(raw.states[q].clone())).collect(),
                        );
                        let s = out.add_state(label);
                        out.add_transition(self.spine[&(*f, i)], &[ids[i - 1], acc], s)?;
                        spine_states.insert(key, s);
                        s
                    }
                };
                acc = state;
            }
            out.add_transition(self.head[f.index()], &[ids[0], acc], target)?;
        }
        if let Some(fin) = &raw.accepting {
            out.set_accepting(fin.iter().map(|&q| StateId(q as u32)));
        }
        Ok(out)
    }
}

/// An automaton over a signature of any arity, as read from a problem file.
/// States are indices into `states`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDta {
    pub states: Vec<String>,
    pub accepting: Option<BTreeSet<usize>>,
    pub transitions: Vec<(SymbolId, Vec<usize>, usize)>,
}

impl RawDta {
    /// One state `all` with every transition: accepts every ground term.
    pub fn universal(sig: &Signature) -> Self {
        RawDta {
            states: vec!["all".into()],
            accepting: Some(BTreeSet::from([0])),
            transitions: sig
                .symbols()
                .map(|(f, info)| (f, vec![0; info.arity], 0))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_ground;

    fn sig3() -> Arc<Signature> {
        Arc::new(Signature::from_symbols([("g", 3), ("h", 4), ("f", 2), ("a", 0), ("b", 0)]).unwrap())
    }

    #[test]
    fn passthrough_for_binary_signatures() {
        let sig = Arc::new(Signature::from_symbols([("f", 2), ("a", 0)]).unwrap());
        let enc = BinaryEncoding::new(sig.clone()).unwrap();
        assert!(enc.is_identity());
        let t = parse_ground("f(a,f(a,a))", &sig).unwrap();
        assert_eq!(enc.encode(&t), t);
        assert_eq!(enc.decode(&t).unwrap(), t);
    }

    #[test]
    fn ternary_round_trip() {
        let sig = sig3();
        let enc = BinaryEncoding::new(sig.clone()).unwrap();
        let t = parse_ground("g(a,b,h(a,b,a,f(a,b)))", &sig).unwrap();
        let e = enc.encode(&t);
        assert_eq!(
            e.display(enc.target(), None).to_string(),
            "g(a,g@2(b,h(a,h@2(b,h@3(a,f(a,b))))))"
        );
        assert!(e.size() <= 2 * t.size());
        assert_eq!(enc.decode(&e).unwrap(), t);
        let t2 = enc.target();
        let spine = t2.lookup("g@2").unwrap();
        let a = Term::constant(t2.lookup("a").unwrap());
        let bad = Term::app(spine, vec![a.clone(), a]);
        assert!(enc.decode(&bad).is_err());
    }

    #[test]
    fn encoded_automaton_accepts_encoded_terms() {
        let sig = sig3();
        let enc = BinaryEncoding::new(sig.clone()).unwrap();
        // qa: a; qb: b; g(qa,qb,qa) -> qa.
        let raw = RawDta {
            states: vec!["qa".into(), "qb".into()],
            accepting: Some(BTreeSet::from([0])),
            transitions: vec![
                (sig.lookup("a").unwrap(), vec![], 0),
                (sig.lookup("b").unwrap(), vec![], 1),
                (sig.lookup("g").unwrap(), vec![0, 1, 0], 0),
            ],
        };
        let a = enc.encode_dta(&raw).unwrap();
        let yes = parse_ground("g(g(a,b,a),b,a)", &sig).unwrap();
        let no = parse_ground("g(a,a,a)", &sig).unwrap();
        assert!(a.accepts(&enc.encode(&yes)));
        assert!(!a.accepts(&enc.encode(&no)));
        let u = enc.encode_dta(&RawDta::universal(&sig)).unwrap();
        assert!(u.accepts(&enc.encode(&yes)));
    }
}
