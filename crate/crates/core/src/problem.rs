//! Text format for problems.
//!
//! ```text
//! # comment
//! signature f/2 a/0 b/0
//! automaton Even
//!   states e o
//!   final e
//!   a -> e
//!   b -> o
//!   f(e,e) -> e
//! end
//! var x y : Even
//! var z : any
//! pattern f(x, f(y, x))
//! ```
//!
//! `any` names a built-in automaton accepting every ground term. Symbols of
//! arity above 2 are allowed; [`ProblemFile::compile`] moves everything to
//! a binary signature.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::constraints::{NamedDta, RegularConstraintProblem};
use crate::encoding::{BinaryEncoding, RawDta};
use crate::error::{Error, Result};
use crate::term::{Signature, Term, TermParser, Var, VarTable};

pub const ANY: &str = "any";

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub sig: Arc<Signature>,
    pub automata: Vec<(String, RawDta)>,
    pub vars: VarTable,
    /// Variable to automaton name.
    pub constraints: BTreeMap<Var, String>,
    pub patterns: Vec<Term>,
}

/// A problem over the binary signature, with the coding used to get there.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub problem: RegularConstraintProblem,
    pub encoding: BinaryEncoding,
    pub notices: Vec<String>,
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        Lines { lines, next: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.next).copied();
        self.next += 1;
        l
    }
}

fn column_of(line: &str, part: &str) -> usize {
    (part.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let mut sig: Option<Arc<Signature>> = None;
        let mut automata: Vec<(String, RawDta)> = Vec::new();
        let mut vars = VarTable::new();
        let mut constraints = BTreeMap::new();
        let mut patterns = Vec::new();

        while let Some((ln, line)) = lines.next() {
            let trimmed = line.trim_start();
            let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
            match kw {
                "signature" => {
                    if sig.is_some() {
                        return Err(syntax(ln, 1, "second signature line"));
                    }
                    let mut s = Signature::new();
                    for item in rest.split_whitespace() {
                        let col = column_of(line, item);
                        let (name, arity) = item
                            .split_once('/')
                            .ok_or_else(|| syntax(ln, col, format!("expected name/arity, found `{item}`")))?;
                        if !is_ident(name) {
                            return Err(syntax(ln, col, format!("`{name}` is not an identifier")));
                        }
                        let arity: usize = arity
                            .parse()
                            .map_err(|_| syntax(ln, col, format!("bad arity in `{item}`")))?;
                        s.add(name, arity).map_err(|e| e.at(ln))?;
                    }
                    s.validate().map_err(|e| e.at(ln))?;
                    sig = Some(Arc::new(s));
                }
                "automaton" => {
                    let sig = sig.as_ref().ok_or_else(|| syntax(ln, 1, "automaton before signature"))?;
                    let name = rest.trim();
                    if !is_ident(name) {
                        return Err(syntax(ln, column_of(line, rest), "expected automaton name"));
                    }
                    if name == ANY {
                        return Err(syntax(ln, column_of(line, rest), "`any` is built in"));
                    }
                    if automata.iter().any(|(n, _)| n == name) {
                        return Err(syntax(ln, column_of(line, rest), format!("automaton `{name}` declared twice")));
                    }
                    let raw = parse_automaton(&mut lines, sig, ln)?;
                    automata.push((name.to_string(), raw));
                }
                "var" => {
                    let (names, automaton) = rest
                        .split_once(':')
                        .ok_or_else(|| syntax(ln, 1, "expected `var NAMES : AUTOMATON`"))?;
                    let automaton = automaton.trim();
                    if automaton != ANY && !automata.iter().any(|(n, _)| n == automaton) {
                        return Err(syntax(
                            ln,
                            column_of(line, automaton),
                            format!("unknown automaton `{automaton}`"),
                        ));
                    }
                    for name in names.split_whitespace() {
                        let col = column_of(line, name);
                        if !is_ident(name) {
                            return Err(syntax(ln, col, format!("`{name}` is not an identifier")));
                        }
                        if vars.lookup(name).is_some() {
                            return Err(syntax(ln, col, format!("variable `{name}` declared twice")));
                        }
                        if sig.as_ref().is_some_and(|s| s.lookup(name).is_some()) {
                            return Err(syntax(ln, col, format!("`{name}` is already a symbol")));
                        }
                        let v = vars.declare(name);
                        constraints.insert(v, automaton.to_string());
                    }
                }
                "pattern" => {
                    let sig = sig.as_ref().ok_or_else(|| syntax(ln, 1, "pattern before signature"))?;
                    let t = TermParser::new(rest, sig, |n| vars.lookup(n))
                        .at_line(ln, column_of(line, rest) - 1)
                        .parse_complete()?;
                    patterns.push(t);
                }
                "end" => return Err(syntax(ln, column_of(line, kw), "`end` without automaton")),
                _ => return Err(syntax(ln, column_of(line, kw), format!("unknown keyword `{kw}`"))),
            }
        }
        let sig = sig.ok_or_else(|| syntax(1, 1, "missing signature line"))?;
        Ok(ProblemFile {
            sig,
            automata,
            vars,
            constraints,
            patterns,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let syms: Vec<String> = self.sig.symbols().map(|(_, i)| format!("{}/{}", i.name, i.arity)).collect();
        writeln!(out, "signature {}", syms.join(" ")).unwrap();
        for (name, raw) in &self.automata {
            writeln!(out, "automaton {name}").unwrap();
            writeln!(out, "  states {}", raw.states.join(" ")).unwrap();
            let fin: Vec<&str> = raw
                .accepting
                .iter()
                .flatten()
                .map(|&q| raw.states[q].as_str())
                .collect();
            writeln!(out, "  final {}", fin.join(" ")).unwrap();
            for (f, args, target) in &raw.transitions {
                let lhs = if args.is_empty() {
                    self.sig.name(*f).to_string()
                } else {
                    let a: Vec<&str> = args.iter().map(|&q| raw.states[q].as_str()).collect();
                    format!("{}({})", self.sig.name(*f), a.join(","))
                };
                writeln!(out, "  {lhs} -> {}", raw.states[*target]).unwrap();
            }
            writeln!(out, "end").unwrap();
        }
        // One line per automaton, variables in declaration order.
        let mut groups: Vec<(&str, Vec<&str>)> = Vec::new();
        for (v, a) in &self.constraints {
            match groups.iter_mut().find(|(n, _)| n == a) {
                Some((_, vs)) => vs.push(self.vars.name(*v)),
                None => groups.push((a, vec![self.vars.name(*v)])),
            }
        }
        for (a, vs) in groups {
            writeln!(out, "var {} : {a}", vs.join(" ")).unwrap();
        }
        for p in &self.patterns {
            writeln!(out, "pattern {}", p.display(&self.sig, Some(&self.vars))).unwrap();
        }
        out
    }

    /// The problem over the binary signature. Only automata referenced by
    /// some variable are kept.
    pub fn compile(&self) -> Result<Compiled> {
        let encoding = BinaryEncoding::new(self.sig.clone())?;
        let mut notices = Vec::new();
        let recoded = encoding.recoded_symbols();
        if !recoded.is_empty() {
            let list: Vec<String> = recoded.iter().map(|(n, k)| format!("{n}/{k}")).collect();
            notices.push(format!(
                "binarized symbols of arity above 2: {}; witnesses are decoded back",
                list.join(", ")
            ));
        }
        let used: BTreeSet<&str> = self.constraints.values().map(String::as_str).collect();
        let mut automata = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (name, raw) in &self.automata {
            if used.contains(name.as_str()) {
                index.insert(name, automata.len());
                automata.push(NamedDta {
                    name: name.clone(),
                    dta: encoding.encode_dta(raw)?,
                });
            }
        }
        if used.contains(ANY) {
            index.insert(ANY, automata.len());
            automata.push(NamedDta {
                name: ANY.into(),
                dta: encoding.encode_dta(&RawDta::universal(&self.sig))?,
            });
        }
        let assignment = self.constraints.iter().map(|(v, a)| (*v, index[a.as_str()])).collect();
        let problem = RegularConstraintProblem {
            sig: encoding.target().clone(),
            vars: self.vars.clone(),
            patterns: self.patterns.iter().map(|p| encoding.encode(p)).collect(),
            automata,
            assignment,
        };
        problem.validate()?;
        Ok(Compiled {
            problem,
            encoding,
            notices,
        })
    }

    /// Every declared automaton, over the binary signature.
    pub fn compiled_automata(&self) -> Result<Vec<NamedDta>> {
        let encoding = BinaryEncoding::new(self.sig.clone())?;
        self.automata
            .iter()
            .map(|(name, raw)| {
                Ok(NamedDta {
                    name: name.clone(),
                    dta: encoding.encode_dta(raw)?,
                })
            })
            .collect()
    }

    /// A file for a problem over a binary signature.
    pub fn from_problem(prob: &RegularConstraintProblem) -> Result<Self> {
        let mut automata = Vec::new();
        for a in &prob.automata {
            let states = a.dta.state_names();
            let raw = RawDta {
                states,
                accepting: a.dta.accepting().map(|f| f.iter().map(|q| q.index()).collect()),
                transitions: a
                    .dta
                    .transitions()
                    .into_iter()
                    .map(|t| (t.symbol, t.args.iter().map(|q| q.index()).collect(), t.target.index()))
                    .collect(),
            };
            let name = if a.name == ANY || !is_ident(&a.name) {
                format!("A{}", automata.len())
            } else {
                a.name.clone()
            };
            automata.push((name, raw));
        }
        let mut constraints = BTreeMap::new();
        for (v, &i) in &prob.assignment {
            constraints.insert(*v, automata[i].0.clone());
        }
        Ok(ProblemFile {
            sig: prob.sig.clone(),
            automata,
            vars: prob.vars.clone(),
            constraints,
            patterns: prob.patterns.clone(),
        })
    }
}

fn parse_automaton(lines: &mut Lines<'_>, sig: &Signature, start: usize) -> Result<RawDta> {
    let mut states: Vec<String> = Vec::new();
    let mut accepting: Option<BTreeSet<usize>> = None;
    let mut transitions = Vec::new();
    let mut seen: HashMap<(crate::term::SymbolId, Vec<usize>), (usize, usize)> = HashMap::new();
    loop {
        let Some((ln, line)) = lines.next() else {
            return Err(syntax(start, 1, "automaton block without `end`"));
        };
        let trimmed = line.trim();
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let state_of = |name: &str, states: &[String]| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::UnknownState(name.to_string()).at(ln))
        };
        match kw {
            "end" => break,
            "states" => {
                for name in rest.split_whitespace() {
                    if !is_ident(name) {
                        return Err(syntax(ln, column_of(line, name), format!("`{name}` is not a state name")));
                    }
                    if states.iter().any(|s| s == name) {
                        return Err(syntax(ln, column_of(line, name), format!("state `{name}` declared twice")));
                    }
                    states.push(name.to_string());
                }
            }
            "final" => {
                let set = accepting.get_or_insert_with(BTreeSet::new);
                for name in rest.split_whitespace() {
                    set.insert(state_of(name, &states)?);
                }
            }
            _ => {
                let (lhs, rhs) = trimmed
                    .split_once("->")
                    .ok_or_else(|| syntax(ln, column_of(line, trimmed), "expected `lhs -> state`"))?;
                let target = state_of(rhs.trim(), &states)?;
                let lhs = lhs.trim();
                let (name, args) = match lhs.split_once('(') {
                    Some((n, a)) => {
                        let a = a
                            .strip_suffix(')')
                            .ok_or_else(|| syntax(ln, column_of(line, lhs), "missing `)`"))?;
                        let args = a
                            .split(',')
                            .map(|s| state_of(s.trim(), &states))
                            .collect::<Result<Vec<_>>>()?;
                        (n.trim(), args)
                    }
                    None => (lhs, vec![]),
                };
                let f = sig
                    .lookup(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.to_string()).at(ln))?;
                if sig.arity(f) != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: name.to_string(),
                        expected: sig.arity(f),
                        found: args.len(),
                    }
                    .at(ln));
                }
                if let Some((prev_line, prev)) = seen.insert((f, args.clone()), (ln, target)) {
                    return Err(Error::Nondeterministic(format!(
                        "{lhs} -> {} (line {prev_line}) and {lhs} -> {} (line {ln})",
                        states[prev], states[target]
                    ))
                    .at(ln));
                }
                transitions.push((f, args, target));
            }
        }
    }
    if accepting.is_none() {
        return Err(Error::MissingAccepting.at(start));
    }
    Ok(RawDta {
        states,
        accepting,
        transitions,
    })
}
