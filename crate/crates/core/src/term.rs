//! Terms over a ranked signature with leaf variables.
//!
//! Terms are immutable values with structural equality. Children are shared
//! behind an `Arc`, so cloning a term is cheap and terms can be sent across
//! threads. Positions are 1-based child index sequences; the root is `ε`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub name: String,
    pub arity: usize,
}

/// A ranked alphabet. Symbol ids are dense and assigned in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<SymbolInfo>,
    by_name: HashMap<String, SymbolId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from `(name, arity)` pairs.
    pub fn from_symbols<'a>(symbols: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut sig = Signature::new();
        for (name, arity) in symbols {
            sig.add(name, arity)?;
        }
        Ok(sig)
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<SymbolId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolInfo {
            name: name.to_string(),
            arity,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn arity(&self, sym: SymbolId) -> usize {
        self.symbols[sym.index()].arity
    }

    pub fn name(&self, sym: SymbolId) -> &str {
        &self.symbols[sym.index()].name
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, sym: SymbolId) -> bool {
        sym.index() < self.symbols.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &SymbolInfo)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, info)| (SymbolId(i as u32), info))
    }

    pub fn constants(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols()
            .filter(|(_, info)| info.arity == 0)
            .map(|(id, _)| id)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// First symbol of arity 2, if any.
    pub fn binary_symbol(&self) -> Option<SymbolId> {
        self.symbols().find(|(_, s)| s.arity == 2).map(|(id, _)| id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.constants().next().is_none() {
            return Err(Error::NoConstant);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// Where a variable came from. Generated variables keep a link to the
/// variable they were derived from for diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarOrigin {
    Input,
    /// Renamed copy of `source` created for pattern `pattern` while moving
    /// to a single automaton.
    Renamed { source: Var, pattern: usize },
    /// Fresh child variable created when expanding `parent` during
    /// determination.
    Expanded { parent: Var, step: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub origin: VarOrigin,
}

/// Registry of variable names. Ids come from a monotone counter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    vars: Vec<VarInfo>,
    by_name: HashMap<String, Var>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares an input variable. Returns the existing id if the name is taken.
    pub fn declare(&mut self, name: &str) -> Var {
        if let Some(&v) = self.by_name.get(name) {
            return v;
        }
        self.push(name.to_string(), VarOrigin::Input)
    }

    pub fn fresh(&mut self, hint: &str, origin: VarOrigin) -> Var {
        let base = hint.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
        let base = if base.is_empty() { "z" } else { base };
        let mut name = format!("{}_{}", base, self.vars.len());
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        self.push(name, origin)
    }

    fn push(&mut self, name: String, origin: VarOrigin) -> Var {
        let v = Var(self.vars.len() as u32);
        self.by_name.insert(name.clone(), v);
        self.vars.push(VarInfo { name, origin });
        v
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.vars[v.0 as usize].name
    }

    pub fn info(&self, v: Var) -> &VarInfo {
        &self.vars[v.0 as usize]
    }

    /// Follows origin links back to the input variable.
    pub fn root_origin(&self, mut v: Var) -> Var {
        loop {
            match self.info(v).origin {
                VarOrigin::Input => return v,
                VarOrigin::Renamed { source, .. } => v = source,
                VarOrigin::Expanded { parent, .. } => v = parent,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// A position: a sequence of 1-based child indices. The empty sequence is
/// the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: u32) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All prefixes, from the root up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (0..=self.0.len()).map(move |k| Position(self.0[..k].to_vec()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "e" {
            return Ok(Position::root());
        }
        text.split('.')
            .map(|part| {
                part.parse::<u32>()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| Error::Syntax {
                        line: 1,
                        column: 1,
                        message: format!("bad position component `{part}`"),
                    })
            })
            .collect::<Result<Vec<_>>>()
            .map(Position)
    }
}

/// Length first, then lexicographic. Prefixes always sort before extensions.
impl Ord for Position {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// `{p | ∃p′: p.p′ ∈ P}`.
pub fn prefixes<'a>(positions: impl IntoIterator<Item = &'a Position>) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    for p in positions {
        out.extend(p.prefixes());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(SymbolId, Arc<[Term]>),
}

/// Size, height and position sets of a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    pub size: usize,
    pub height: usize,
    pub positions: BTreeSet<Position>,
    pub var_positions: BTreeSet<Position>,
    pub nonvar_positions: BTreeSet<Position>,
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn constant(sym: SymbolId) -> Self {
        Term::App(sym, Arc::from(Vec::new()))
    }

    pub fn app(sym: SymbolId, children: Vec<Term>) -> Self {
        Term::App(sym, Arc::from(children))
    }

    pub fn children(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, cs) => cs,
        }
    }

    pub fn symbol(&self) -> Option<SymbolId> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(*f),
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, cs) => cs.iter().map(|c| c.height() + 1).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, cs) => cs.iter().all(Term::is_ground),
        }
    }

    pub fn measure(&self) -> Measure {
        let mut m = Measure {
            size: self.size(),
            height: self.height(),
            positions: BTreeSet::new(),
            var_positions: BTreeSet::new(),
            nonvar_positions: BTreeSet::new(),
        };
        self.visit(&mut Position::root(), &mut |p, t| {
            m.positions.insert(p.clone());
            if t.is_var() {
                m.var_positions.insert(p.clone());
            } else {
                m.nonvar_positions.insert(p.clone());
            }
        });
        m
    }

    /// Pre-order traversal with positions.
    pub fn visit(&self, at: &mut Position, f: &mut impl FnMut(&Position, &Term)) {
        f(at, self);
        for (i, c) in self.children().iter().enumerate() {
            at.0.push(i as u32 + 1);
            c.visit(at, f);
            at.0.pop();
        }
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.visit(&mut Position::root(), &mut |p, _| out.push(p.clone()));
        out
    }

    pub fn var_positions(&self) -> Vec<(Position, Var)> {
        let mut out = Vec::new();
        self.visit(&mut Position::root(), &mut |p, t| {
            if let Term::Var(v) = t {
                out.push((p.clone(), *v));
            }
        });
        out
    }

    pub fn nonvar_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.visit(&mut Position::root(), &mut |p, t| {
            if !t.is_var() {
                out.push(p.clone());
            }
        });
        out
    }

    pub fn get(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &p.0 {
            t = t.children().get((i as usize).checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn subterm(&self, p: &Position) -> Result<&Term> {
        self.get(p).ok_or_else(|| Error::InvalidPosition {
            position: p.to_string(),
            term: format!("{self:?}"),
        })
    }

    /// `t[p ← u]`.
    pub fn replace(&self, p: &Position, u: Term) -> Result<Term> {
        self.replace_from(&p.0, u).ok_or_else(|| Error::InvalidPosition {
            position: p.to_string(),
            term: format!("{self:?}"),
        })
    }

    fn replace_from(&self, path: &[u32], u: Term) -> Option<Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(u);
        };
        let Term::App(f, cs) = self else { return None };
        let idx = (i as usize).checked_sub(1)?;
        let new_child = cs.get(idx)?.replace_from(rest, u)?;
        let mut children = cs.to_vec();
        children[idx] = new_child;
        Some(Term::app(*f, children))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, cs) => cs.iter().any(|c| c.contains_var(v)),
        }
    }

    /// Number of occurrences of each variable.
    pub fn var_occurrences(&self) -> BTreeMap<Var, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut Position::root(), &mut |_, t| {
            if let Term::Var(v) = t {
                *out.entry(*v).or_insert(0) += 1;
            }
        });
        out
    }

    /// Variables with at least two occurrences.
    pub fn duplicated_vars(&self) -> BTreeSet<Var> {
        self.var_occurrences()
            .into_iter()
            .filter(|&(_, n)| n >= 2)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn is_linear(&self) -> bool {
        self.duplicated_vars().is_empty()
    }

    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(*v)),
            Term::App(g, cs) => Term::app(*g, cs.iter().map(|c| c.rename(f)).collect()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature, vars: Option<&'a VarTable>) -> TermDisplay<'a> {
        TermDisplay {
            term: self,
            sig,
            vars,
        }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
    vars: Option<&'a VarTable>,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.sig, self.vars)
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    t: &Term,
    sig: &Signature,
    vars: Option<&VarTable>,
) -> fmt::Result {
    match t {
        Term::Var(v) => match vars {
            Some(table) if (v.0 as usize) < table.len() => write!(f, "{}", table.name(*v)),
            _ => write!(f, "?{}", v.0),
        },
        Term::App(g, cs) => {
            write!(f, "{}", sig.name(*g))?;
            if !cs.is_empty() {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_term(f, c, sig, vars)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

/// Finite map from variables to terms, applied homomorphically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(pub BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.0.insert(v, t);
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.0.get(&v)
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(_, cs) if cs.is_empty() => t.clone(),
            Term::App(g, cs) => Term::app(*g, cs.iter().map(|c| self.apply(c)).collect()),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = other
            .0
            .iter()
            .map(|(v, t)| (*v, self.apply(t)))
            .collect();
        for (v, t) in &self.0 {
            out.entry(*v).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Recursive-descent parser for `f(g(a,x),b)` syntax.
///
/// Identifiers resolve to variables through `resolve_var` first and to
/// signature symbols otherwise. Columns in errors are 1-based offsets into
/// `text` shifted by `column_offset`.
pub struct TermParser<'a, F> {
    chars: Vec<char>,
    pos: usize,
    sig: &'a Signature,
    resolve_var: F,
    line: usize,
    column_offset: usize,
}

impl<'a, F: FnMut(&str) -> Option<Var>> TermParser<'a, F> {
    pub fn new(text: &str, sig: &'a Signature, resolve_var: F) -> Self {
        TermParser {
            chars: text.chars().collect(),
            pos: 0,
            sig,
            resolve_var,
            line: 1,
            column_offset: 0,
        }
    }

    pub fn at_line(mut self, line: usize, column_offset: usize) -> Self {
        self.line = line;
        self.column_offset = column_offset;
        self
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column_offset + self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            _ => return Err(self.error("expected identifier")),
        }
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    pub fn parse_complete(mut self) -> Result<Term> {
        let t = self.term()?;
        self.skip_ws();
        if self.pos != self.chars.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(t)
    }

    fn term(&mut self) -> Result<Term> {
        let start = self.pos;
        let name = self.ident()?;
        self.skip_ws();
        let has_args = self.peek() == Some('(');
        if !has_args {
            if let Some(v) = (self.resolve_var)(&name) {
                return Ok(Term::Var(v));
            }
        }
        let Some(sym) = self.sig.lookup(&name) else {
            self.pos = start;
            self.skip_ws();
            return Err(self.error(format!("unknown symbol or variable `{name}`")));
        };
        let mut children = Vec::new();
        if has_args {
            self.pos += 1;
            loop {
                children.push(self.term()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        let expected = self.sig.arity(sym);
        if children.len() != expected {
            self.pos = start;
            self.skip_ws();
            return Err(self.error(format!(
                "symbol `{name}` has arity {expected}, found {} arguments",
                children.len()
            )));
        }
        Ok(Term::app(sym, children))
    }
}

/// Parses a ground term.
pub fn parse_ground(text: &str, sig: &Signature) -> Result<Term> {
    TermParser::new(text, sig, |_| None).parse_complete()
}

/// Parses a term, resolving identifiers against `vars` before symbols.
pub fn parse_term(text: &str, sig: &Signature, vars: &VarTable) -> Result<Term> {
    TermParser::new(text, sig, |name| vars.lookup(name)).parse_complete()
}

/// All distinct subterms, in no particular order.
pub fn subterms(t: &Term) -> HashSet<Term> {
    let mut out = HashSet::new();
    t.visit(&mut Position::root(), &mut |_, s| {
        out.insert(s.clone());
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::from_symbols([("f", 2), ("g", 2), ("h", 1), ("a", 0), ("b", 0), ("c", 0)]).unwrap()
    }

    fn pos(s: &str) -> Position {
        Position::parse(s).unwrap()
    }

    #[test]
    fn measure_constant_and_binary() {
        let sig = sig();
        let a = parse_ground("a", &sig).unwrap();
        let m = a.measure();
        assert_eq!((m.size, m.height), (1, 0));
        assert_eq!(m.positions, BTreeSet::from([Position::root()]));
        assert!(m.var_positions.is_empty());
        assert_eq!(m.nonvar_positions, m.positions);

        let t = parse_ground("f(a,b)", &sig).unwrap();
        let m = t.measure();
        assert_eq!((m.size, m.height), (3, 1));
        assert_eq!(m.positions, BTreeSet::from([pos("ε"), pos("1"), pos("2")]));
        assert!(m.var_positions.is_empty());
    }

    #[test]
    fn subterm_lookup() {
        let sig = sig();
        let s = parse_ground("g(f(a,b),c)", &sig).unwrap();
        assert_eq!(s.subterm(&pos("1")).unwrap(), &parse_ground("f(a,b)", &sig).unwrap());
        let b = sig.lookup("b").unwrap();
        assert_eq!(s.subterm(&pos("1.2")).unwrap().symbol(), Some(b));
        assert_eq!(s.subterm(&Position::root()).unwrap(), &s);
        let t = parse_ground("f(a,b)", &sig).unwrap();
        assert!(matches!(t.subterm(&pos("2.1")), Err(Error::InvalidPosition { .. })));
    }

    #[test]
    fn replace_subterm() {
        let sig = sig();
        let t = parse_ground("f(f(a,a),a)", &sig).unwrap();
        let a = parse_ground("a", &sig).unwrap();
        assert_eq!(t.replace(&pos("1"), a.clone()).unwrap(), parse_ground("f(a,a)", &sig).unwrap());
        assert_eq!(t.replace(&Position::root(), a.clone()).unwrap(), a);
        let u = parse_ground("f(a,b)", &sig).unwrap();
        assert_eq!(u.replace(&pos("2"), a.clone()).unwrap(), parse_ground("f(a,a)", &sig).unwrap());
        assert!(u.replace(&pos("3"), a).is_err());
    }

    #[test]
    fn prefix_closure() {
        assert_eq!(prefixes(&[pos("1.2")]), BTreeSet::from([pos("ε"), pos("1"), pos("1.2")]));
        assert!(prefixes(&[]).is_empty());
        assert_eq!(
            prefixes(&[pos("1"), pos("2.1")]),
            BTreeSet::from([pos("ε"), pos("1"), pos("2"), pos("2.1")])
        );
    }

    #[test]
    fn substitution_is_homomorphic() {
        let sig = sig();
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        let fxx = parse_term("f(x,x)", &sig, &vars).unwrap();
        let mut phi = Substitution::new();
        phi.insert(x, parse_ground("a", &sig).unwrap());
        assert_eq!(phi.apply(&fxx), parse_ground("f(a,a)", &sig).unwrap());

        let ground = parse_ground("f(a,b)", &sig).unwrap();
        assert_eq!(Substitution::new().apply(&ground), ground);

        let mut psi = Substitution::new();
        psi.insert(x, parse_ground("f(a,b)", &sig).unwrap());
        let fxa = parse_term("f(x,a)", &sig, &vars).unwrap();
        assert_eq!(psi.apply(&fxa), parse_ground("f(f(a,b),a)", &sig).unwrap());
    }

    #[test]
    fn parse_print_round_trip() {
        let sig = sig();
        let mut vars = VarTable::new();
        vars.declare("x");
        for text in ["f(g(a,x),b)", "h(h(x))", "c", "x"] {
            let t = parse_term(text, &sig, &vars).unwrap();
            assert_eq!(t.display(&sig, Some(&vars)).to_string(), text);
        }
    }

    #[test]
    fn parse_errors_are_positioned() {
        let sig = sig();
        let err = parse_ground("f(a, zz)", &sig).unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 1,
                column: 6,
                message: "unknown symbol or variable `zz`".into()
            }
        );
        assert!(matches!(parse_ground("f(a)", &sig), Err(Error::Syntax { .. })));
        assert!(matches!(parse_ground("f(a,b) c", &sig), Err(Error::Syntax { .. })));
    }

    #[test]
    fn fresh_names_do_not_collide() {
        let mut vars = VarTable::new();
        let x = vars.declare("x");
        vars.declare("x_1");
        let y = vars.fresh("x", VarOrigin::Renamed { source: x, pattern: 0 });
        assert_ne!(vars.name(y), "x_1");
        assert_eq!(vars.root_origin(y), x);
    }

    #[test]
    fn position_order_is_length_then_lex() {
        let mut ps = vec![pos("2"), pos("1.1"), pos("ε"), pos("1")];
        ps.sort();
        assert_eq!(ps, vec![pos("ε"), pos("1"), pos("2"), pos("1.1")]);
    }
}
