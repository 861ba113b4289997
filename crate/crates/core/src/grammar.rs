//! Regular tree grammars, semantic rules, and partial programs.
//!
//! A `Grammar` owns the nonterminal declarations and productions; terms
//! reference both through numeric ids. Terms are immutable and share
//! subtrees via `Rc`: expanding a hole copies only the spine above it,
//! which keeps the enumeration queue cheap.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::expr::Expr;
use crate::value::{SemType, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProdId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonterminalDecl {
    pub name: String,
    pub input_type: SemType,
    pub output_type: SemType,
}

/// One semantic rule of a production: wiring expressions that compute each
/// child's input (left-to-right; expression i may mention child outputs
/// 1..i-1 only) and an output expression over the input and all child
/// outputs. The optional guard ranges over the input alone; when a
/// production carries several rules the first one whose guard holds applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChcRule {
    pub guard: Option<Expr>,
    pub child_inputs: Vec<Expr>,
    pub output: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub lhs: NtId,
    pub operator: String,
    pub children: Vec<NtId>,
    pub rules: Vec<ChcRule>,
    /// While-style production: two children (Boolean guard, body); the body
    /// output feeds back as the production input until the guard fails.
    pub recursive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub nonterminals: Vec<NonterminalDecl>,
    pub start: NtId,
    pub productions: Vec<Production>,
}

impl Grammar {
    pub fn nt(&self, id: NtId) -> &NonterminalDecl {
        &self.nonterminals[id.0 as usize]
    }

    pub fn prod(&self, id: ProdId) -> &Production {
        &self.productions[id.0 as usize]
    }

    pub fn nt_by_name(&self, name: &str) -> Option<NtId> {
        self.nonterminals.iter().position(|d| d.name == name).map(|i| NtId(i as u32))
    }

    pub fn prod_by_operator(&self, lhs: NtId, op: &str) -> Option<ProdId> {
        self.productions
            .iter()
            .position(|p| p.lhs == lhs && p.operator == op)
            .map(|i| ProdId(i as u32))
    }

    /// Production ids with the given left-hand side, in declaration order.
    pub fn productions_of(&self, nt: NtId) -> impl Iterator<Item = ProdId> + '_ {
        self.productions
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.lhs == nt)
            .map(|(i, _)| ProdId(i as u32))
    }

    pub fn prod_ids(&self) -> impl Iterator<Item = ProdId> {
        (0..self.productions.len() as u32).map(ProdId)
    }

    /// Structural well-formedness of a complete or partial term: every node's
    /// production exists and each child's root nonterminal matches the
    /// production signature.
    pub fn is_well_formed(&self, t: &Term, expected: NtId) -> bool {
        match t {
            Term::Hole(nt) => *nt == expected,
            Term::Node { prod, children, .. } => {
                let p = &self.productions[prod.0 as usize];
                p.lhs == expected
                    && p.children.len() == children.len()
                    && p.children.iter().zip(children).all(|(nt, c)| self.is_well_formed(c, *nt))
            }
        }
    }
}

/// A partial program: a tree over productions where unexpanded positions are
/// holes tagged with their nonterminal. Node sizes are cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Hole(NtId),
    Node { prod: ProdId, size: u32, complete: bool, children: Vec<Rc<Term>> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("term has no hole")]
    NoHole,
    #[error("leftmost hole is tagged {hole:?}, production builds {prod:?}")]
    NonterminalMismatch { hole: NtId, prod: NtId },
}

impl Term {
    pub fn hole(nt: NtId) -> Term {
        Term::Hole(nt)
    }

    pub fn node(prod: ProdId, children: Vec<Rc<Term>>) -> Term {
        let size = 1 + children.iter().map(|c| c.size()).sum::<u32>();
        let complete = children.iter().all(|c| c.is_complete());
        Term::Node { prod, size, complete, children }
    }

    pub fn size(&self) -> u32 {
        match self {
            Term::Hole(_) => 1,
            Term::Node { size, .. } => *size,
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            Term::Hole(_) => 1,
            Term::Node { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        match self {
            Term::Hole(_) => false,
            Term::Node { complete, .. } => *complete,
        }
    }

    /// Depth-first-leftmost hole: its path (child indices from the root) and
    /// nonterminal tag. `None` iff the term is complete.
    pub fn leftmost_hole(&self) -> Option<(Vec<usize>, NtId)> {
        match self {
            Term::Hole(nt) => Some((vec![], *nt)),
            Term::Node { children, complete, .. } => {
                if *complete {
                    return None;
                }
                for (i, c) in children.iter().enumerate() {
                    if c.is_complete() {
                        continue;
                    }
                    if let Some((mut path, nt)) = c.leftmost_hole() {
                        path.insert(0, i);
                        return Some((path, nt));
                    }
                }
                None
            }
        }
    }

    /// Replace the leftmost hole with `prod` applied to fresh holes. The
    /// original term is untouched; unaffected subtrees are shared.
    pub fn expand(self: &Rc<Term>, g: &Grammar, prod: ProdId) -> Result<Rc<Term>, ExpandError> {
        let p = g.prod(prod);
        match self.as_ref() {
            Term::Hole(nt) => {
                if *nt != p.lhs {
                    return Err(ExpandError::NonterminalMismatch { hole: *nt, prod: p.lhs });
                }
                let children = p.children.iter().map(|c| Rc::new(Term::Hole(*c))).collect();
                Ok(Rc::new(Term::node(prod, children)))
            }
            Term::Node { prod: my_prod, children, .. } => {
                for (i, c) in children.iter().enumerate() {
                    if !c.is_complete() {
                        let replaced = c.expand(g, prod)?;
                        let mut new_children = children.clone();
                        new_children[i] = replaced;
                        return Ok(Rc::new(Term::node(*my_prod, new_children)));
                    }
                }
                Err(ExpandError::NoHole)
            }
        }
    }

    /// Root nonterminal of the (sub)term.
    pub fn root_nt(&self, g: &Grammar) -> NtId {
        match self {
            Term::Hole(nt) => *nt,
            Term::Node { prod, .. } => g.prod(*prod).lhs,
        }
    }

    pub fn display<'a>(&'a self, g: &'a Grammar) -> TermDisplay<'a> {
        TermDisplay { term: self, grammar: g }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    grammar: &'a Grammar,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Hole(nt) => write!(f, "?{}", self.grammar.nt(*nt).name),
            Term::Node { prod, children, .. } => {
                let p = self.grammar.prod(*prod);
                if children.is_empty() {
                    write!(f, "{}", p.operator)
                } else {
                    write!(f, "({}", p.operator)?;
                    for c in children {
                        write!(f, " {}", c.display(self.grammar))?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

/// Parse a term from its printed form against a grammar. Holes print as
/// `?Nt`. Used by tests and the CLI round trip.
pub fn parse_term(g: &Grammar, text: &str, expected: NtId) -> Result<Rc<Term>, String> {
    let sexp = crate::sexpr::parse_one(text).map_err(|e| e.to_string())?;
    term_from_sexpr(g, &sexp, expected)
}

fn term_from_sexpr(
    g: &Grammar,
    s: &crate::sexpr::Sexpr,
    expected: NtId,
) -> Result<Rc<Term>, String> {
    use crate::sexpr::Sexpr;
    let (op, args): (&str, &[Sexpr]) = if let Some(a) = s.atom() {
        (a, &[])
    } else if let Some(items) = s.list() {
        match items.split_first() {
            Some((head, rest)) if head.atom().is_some() => (head.atom().unwrap(), rest),
            _ => return Err("term operator must be an atom".into()),
        }
    } else {
        return Err("term operator must be an atom".into());
    };
    if let Some(nt_name) = op.strip_prefix('?') {
        let nt = g.nt_by_name(nt_name).ok_or_else(|| format!("unknown nonterminal {nt_name}"))?;
        if nt != expected {
            return Err(format!("hole {op} where {} expected", g.nt(expected).name));
        }
        return Ok(Rc::new(Term::Hole(nt)));
    }
    let prod = g
        .prod_by_operator(expected, op)
        .ok_or_else(|| format!("no production {op} for nonterminal {}", g.nt(expected).name))?;
    let p = g.prod(prod);
    if p.children.len() != args.len() {
        return Err(format!("operator {op} expects {} children", p.children.len()));
    }
    let children = p
        .children
        .iter()
        .zip(args)
        .map(|(nt, a)| term_from_sexpr(g, a, *nt))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Rc::new(Term::node(prod, children)))
}

/// Reconstruct the leftmost derivation chain of `t` from a bare hole:
/// every partial program the enumerator would pass through, ending with
/// `t` itself.
pub fn derivation_chain(g: &Grammar, t: &Rc<Term>) -> Vec<Rc<Term>> {
    let start: Rc<Term> = Rc::new(Term::Hole(t.root_nt(g)));
    let mut chain = vec![start.clone()];
    let mut current = start;
    while let Some((path, _)) = current.leftmost_hole() {
        // production used at `path` in the target term
        let mut target: &Term = t;
        for &i in &path {
            match target {
                Term::Node { children, .. } => target = &children[i],
                Term::Hole(_) => unreachable!("derivation path hit a hole in the target"),
            }
        }
        let prod = match target {
            Term::Node { prod, .. } => *prod,
            Term::Hole(_) => unreachable!("target term must be complete along the path"),
        };
        current = current.expand(g, prod).expect("derivation replay");
        chain.push(current.clone());
    }
    chain
}

/// All complete terms of `nt` with exactly `size` nodes.
pub fn terms_of_size(g: &Grammar, nt: NtId, size: u32) -> Vec<Rc<Term>> {
    let mut memo = std::collections::HashMap::new();
    enumerate_terms(g, nt, size, &mut memo)
}

/// All complete terms of `nt` with at most `max_size` nodes, ascending size.
pub fn terms_up_to(g: &Grammar, nt: NtId, max_size: u32) -> Vec<Rc<Term>> {
    let mut memo = std::collections::HashMap::new();
    (1..=max_size).flat_map(|s| enumerate_terms(g, nt, s, &mut memo)).collect()
}

fn enumerate_terms(
    g: &Grammar,
    nt: NtId,
    size: u32,
    memo: &mut std::collections::HashMap<(NtId, u32), Vec<Rc<Term>>>,
) -> Vec<Rc<Term>> {
    if let Some(v) = memo.get(&(nt, size)) {
        return v.clone();
    }
    let mut out = Vec::new();
    for pid in g.productions_of(nt) {
        let p = g.prod(pid);
        if size < 1 + p.children.len() as u32 {
            continue;
        }
        let budget = size - 1;
        let mut stack: Vec<(usize, u32, Vec<Rc<Term>>)> = vec![(0, budget, vec![])];
        while let Some((i, left, kids)) = stack.pop() {
            if i == p.children.len() {
                if left == 0 {
                    out.push(Rc::new(Term::node(pid, kids.clone())));
                }
                continue;
            }
            let remaining_children = (p.children.len() - i - 1) as u32;
            for s in 1..=left.saturating_sub(remaining_children) {
                for t in enumerate_terms(g, p.children[i], s, memo) {
                    let mut kids2 = kids.clone();
                    kids2.push(t);
                    stack.push((i + 1, left - s, kids2));
                }
            }
        }
    }
    memo.insert((nt, size), out.clone());
    out
}

/// Number of complete terms of `nt` with exactly `size` nodes (counting
/// oracle for enumeration completeness).
pub fn count_terms(g: &Grammar, nt: NtId, size: u32) -> u64 {
    let mut memo = std::collections::HashMap::new();
    count_rec(g, nt, size, &mut memo)
}

fn count_rec(
    g: &Grammar,
    nt: NtId,
    size: u32,
    memo: &mut std::collections::HashMap<(NtId, u32), u64>,
) -> u64 {
    if let Some(v) = memo.get(&(nt, size)) {
        return *v;
    }
    let mut total = 0u64;
    for pid in g.productions_of(nt) {
        let p = g.prod(pid);
        let n = p.children.len() as u32;
        if size < 1 + n {
            continue;
        }
        // distribute size-1 over n children, each at least 1
        fn distribute(
            g: &Grammar,
            kids: &[NtId],
            left: u32,
            memo: &mut std::collections::HashMap<(NtId, u32), u64>,
        ) -> u64 {
            match kids {
                [] => u64::from(left == 0),
                [only] => count_rec(g, *only, left, memo),
                [first, rest @ ..] => {
                    let mut acc = 0;
                    for s in 1..=left.saturating_sub(rest.len() as u32) {
                        let c = count_rec(g, *first, s, memo);
                        if c > 0 {
                            acc += c * distribute(g, rest, left - s, memo);
                        }
                    }
                    acc
                }
            }
        }
        total += distribute(g, &p.children, size - 1, memo);
    }
    memo.insert((nt, size), total);
    total
}

/// An input/output example over the start nonterminal's sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub input: Value,
    pub output: Value,
}
