//! Problem files: grammar + semantic rules + examples in a textual
//! s-expression format, with a printer that round-trips.
//!
//! ```text
//! (problem
//!   (name "imp_swap")
//!   (nonterminal S (tuple int int) (tuple int int))
//!   (nonterminal E (tuple int int) int)
//!   (start S)
//!   (production S seq (S S)
//!     (rule (inputs input (child 1)) (output (child 2))))
//!   (production E 0 ()
//!     (rule (inputs) (output 0)))
//!   (example (tuple 4 2) (tuple 2 4)))
//! ```
//!
//! Problems over string inputs declare an `(alphabet "...")`; their examples
//! write inputs as `(str "...")`, which load as one Boolean matrix per
//! alphabet character (dimension = string length + 1), and nonterminals use
//! the sort shorthand `charmats` for that tuple-of-matrices input sort.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::expr::{infer_type, Expr, TypeCtx};
use crate::grammar::{ChcRule, Example, Grammar, NonterminalDecl, NtId, Production};
use crate::sexpr::{parse_one, ParseError, Sexpr};
use crate::value::{BoolMatrix, SemType, Value};

/// Example literal as written in the file; strings compile per the alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExampleLiteral {
    Value(Value),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawExample {
    pub input: ExampleLiteral,
    pub output: ExampleLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub grammar: Grammar,
    pub alphabet: Vec<char>,
    pub raw_examples: Vec<RawExample>,
    /// Compiled examples (strings expanded to character-matrix tuples).
    pub examples: Vec<Example>,
    /// Optional per-base-sort order hints: sort shape name -> order name.
    pub order_hints: BTreeMap<String, String>,
}

impl Problem {
    /// Input sort shared by string problems: one matrix per alphabet char.
    pub fn charmats_sort(&self) -> SemType {
        SemType::Tuple(vec![SemType::BoolMatrix; self.alphabet.len().max(1)])
    }

    pub fn alphabet_index(&self, c: char) -> Option<usize> {
        self.alphabet.iter().position(|&a| a == c)
    }

    /// Compile a string into the tuple of per-character matrices.
    pub fn compile_str(&self, s: &str) -> Value {
        let chars: Vec<char> = s.chars().collect();
        Value::Tuple(
            self.alphabet.iter().map(|&c| Value::matrix(BoolMatrix::char_matrix(&chars, c))).collect(),
        )
    }

    fn compile_literal(&self, lit: &ExampleLiteral) -> Value {
        match lit {
            ExampleLiteral::Value(v) => v.clone(),
            ExampleLiteral::Str(s) => self.compile_str(s),
        }
    }

    /// Recompute `examples` from `raw_examples`.
    pub fn recompile_examples(&mut self) {
        self.examples = self
            .raw_examples
            .iter()
            .map(|re| Example {
                input: self.compile_literal(&re.input),
                output: self.compile_literal(&re.output),
            })
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    fn new(message: impl Into<String>) -> Diagnostic {
        Diagnostic { message: message.into() }
    }
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

fn err(s: &Sexpr, msg: impl Into<String>) -> ParseError {
    ParseError::at(s, msg)
}

pub fn parse_sort(s: &Sexpr, alphabet_len: usize) -> Result<SemType, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "int" => Ok(SemType::Int),
            "bool" => Ok(SemType::Bool),
            "boolmatrix" => Ok(SemType::BoolMatrix),
            "charmats" => {
                if alphabet_len == 0 {
                    Err(err(s, "charmats sort requires an (alphabet ...) declaration"))
                } else {
                    Ok(SemType::Tuple(vec![SemType::BoolMatrix; alphabet_len]))
                }
            }
            other => Err(err(s, format!("unknown sort {other}"))),
        };
    }
    if let Some(items) = s.tagged("bitvec") {
        let w = items
            .first()
            .and_then(|x| x.atom())
            .and_then(|a| a.parse::<u32>().ok())
            .ok_or_else(|| err(s, "bitvec needs a width"))?;
        if !(1..=64).contains(&w) {
            return Err(err(s, "bitvec width must be in 1..=64"));
        }
        return Ok(SemType::BitVec(w));
    }
    if let Some(items) = s.tagged("tuple") {
        if items.is_empty() {
            return Err(err(s, "tuple sort must be nonempty"));
        }
        return Ok(SemType::Tuple(
            items.iter().map(|t| parse_sort(t, alphabet_len)).collect::<Result<_, _>>()?,
        ));
    }
    Err(err(s, "unknown sort"))
}

pub fn print_sort(t: &SemType, alphabet_len: usize) -> String {
    if alphabet_len > 0 {
        if let SemType::Tuple(ts) = t {
            if ts.len() == alphabet_len && ts.iter().all(|x| *x == SemType::BoolMatrix) {
                return "charmats".to_string();
            }
        }
    }
    match t {
        SemType::Tuple(ts) => {
            let inner: Vec<String> = ts.iter().map(|x| print_sort(x, 0)).collect();
            format!("(tuple {})", inner.join(" "))
        }
        other => other.to_string(),
    }
}

fn parse_usize(s: &Sexpr, what: &str) -> Result<usize, ParseError> {
    s.atom()
        .and_then(|a| a.parse::<usize>().ok())
        .ok_or_else(|| err(s, format!("expected {what}")))
}

pub fn parse_expr(s: &Sexpr, alphabet: &[char]) -> Result<Expr, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "input" => Ok(Expr::Input),
            "true" => Ok(Expr::BoolConst(true)),
            "false" => Ok(Expr::BoolConst(false)),
            "mzero" => Ok(Expr::MZero),
            "mid" => Ok(Expr::MId),
            "mones" => Ok(Expr::MOnes),
            _ => a
                .parse::<i64>()
                .map(Expr::IntConst)
                .map_err(|_| err(s, format!("unknown expression atom {a}"))),
        };
    }
    let items = s.list().ok_or_else(|| err(s, "expected expression"))?;
    let (head, args) = match items.split_first() {
        Some((h, rest)) if h.atom().is_some() => (h.atom().unwrap(), rest),
        _ => return Err(err(s, "expression head must be an operator atom")),
    };
    let unary = |args: &[Sexpr]| -> Result<Box<Expr>, ParseError> {
        if args.len() != 1 {
            return Err(err(s, format!("{head} takes 1 argument")));
        }
        Ok(Box::new(parse_expr(&args[0], alphabet)?))
    };
    let binary = |args: &[Sexpr]| -> Result<(Box<Expr>, Box<Expr>), ParseError> {
        if args.len() != 2 {
            return Err(err(s, format!("{head} takes 2 arguments")));
        }
        Ok((
            Box::new(parse_expr(&args[0], alphabet)?),
            Box::new(parse_expr(&args[1], alphabet)?),
        ))
    };
    match head {
        "child" => {
            let i = parse_usize(&args[0], "child index")?;
            if i == 0 {
                return Err(err(s, "child indices are 1-based"));
            }
            Ok(Expr::ChildOut(i))
        }
        "bv" => {
            if args.len() != 2 {
                return Err(err(s, "bv takes width and bits"));
            }
            let w = parse_usize(&args[0], "bitvec width")? as u32;
            let bits = args[1]
                .atom()
                .and_then(|a| a.parse::<u64>().ok())
                .ok_or_else(|| err(s, "expected bitvec bits"))?;
            Ok(Expr::BvConst { width: w, bits })
        }
        "tuple" => {
            if args.is_empty() {
                return Err(err(s, "tuple takes at least one element"));
            }
            Ok(Expr::MkTuple(
                args.iter().map(|a| parse_expr(a, alphabet)).collect::<Result<_, _>>()?,
            ))
        }
        "proj" => {
            if args.len() != 2 {
                return Err(err(s, "proj takes expression and index"));
            }
            Ok(Expr::Proj(
                Box::new(parse_expr(&args[0], alphabet)?),
                parse_usize(&args[1], "projection index")?,
            ))
        }
        "+" => binary(args).map(|(a, b)| Expr::Add(a, b)),
        "-" => binary(args).map(|(a, b)| Expr::Sub(a, b)),
        "*" => binary(args).map(|(a, b)| Expr::Mul(a, b)),
        "min" => binary(args).map(|(a, b)| Expr::Min(a, b)),
        "max" => binary(args).map(|(a, b)| Expr::Max(a, b)),
        "ite" => {
            if args.len() != 3 {
                return Err(err(s, "ite takes 3 arguments"));
            }
            Ok(Expr::Ite(
                Box::new(parse_expr(&args[0], alphabet)?),
                Box::new(parse_expr(&args[1], alphabet)?),
                Box::new(parse_expr(&args[2], alphabet)?),
            ))
        }
        "=" => binary(args).map(|(a, b)| Expr::Eq(a, b)),
        "<=" => binary(args).map(|(a, b)| Expr::Le(a, b)),
        "<" => binary(args).map(|(a, b)| Expr::Lt(a, b)),
        "and" => binary(args).map(|(a, b)| Expr::And(a, b)),
        "or" => binary(args).map(|(a, b)| Expr::Or(a, b)),
        "not" => unary(args).map(Expr::Not),
        "=>" => binary(args).map(|(a, b)| Expr::Implies(a, b)),
        "bvand" => binary(args).map(|(a, b)| Expr::BvAnd(a, b)),
        "bvor" => binary(args).map(|(a, b)| Expr::BvOr(a, b)),
        "bvxor" => binary(args).map(|(a, b)| Expr::BvXor(a, b)),
        "bvnot" => unary(args).map(Expr::BvNot),
        "bvadd" => binary(args).map(|(a, b)| Expr::BvAdd(a, b)),
        "bvadd-sat" => binary(args).map(|(a, b)| Expr::BvAddSat(a, b)),
        "charmat" => {
            let lit = args
                .first()
                .and_then(|a| a.string())
                .ok_or_else(|| err(s, "charmat takes a one-character string"))?;
            let mut chars = lit.chars();
            let (ch, extra) = (chars.next(), chars.next());
            let ch = match (ch, extra) {
                (Some(c), None) => c,
                _ => return Err(err(s, "charmat takes exactly one character")),
            };
            let index = alphabet
                .iter()
                .position(|&a| a == ch)
                .ok_or_else(|| err(s, format!("character {ch:?} not in alphabet")))?;
            Ok(Expr::CharMat { ch, index })
        }
        "madd" => binary(args).map(|(a, b)| Expr::MAdd(a, b)),
        "mmul" => binary(args).map(|(a, b)| Expr::MMul(a, b)),
        "mclosure" => unary(args).map(Expr::MClosure),
        "mcomplement" => unary(args).map(Expr::MComplement),
        "maccept" => unary(args).map(Expr::MAccept),
        other => Err(err(s, format!("unknown operator {other}"))),
    }
}

fn parse_value(s: &Sexpr) -> Result<Value, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => a
                .parse::<i64>()
                .map(Value::int)
                .map_err(|_| err(s, format!("unknown value atom {a}"))),
        };
    }
    if let Some(items) = s.tagged("bv") {
        if items.len() != 2 {
            return Err(err(s, "bv takes width and bits"));
        }
        let w = parse_usize(&items[0], "bitvec width")? as u32;
        let bits = items[1]
            .atom()
            .and_then(|a| a.parse::<u64>().ok())
            .ok_or_else(|| err(s, "expected bitvec bits"))?;
        return Ok(Value::bitvec(w, bits));
    }
    if let Some(items) = s.tagged("tuple") {
        if items.is_empty() {
            return Err(err(s, "tuple value must be nonempty"));
        }
        return Ok(Value::Tuple(items.iter().map(parse_value).collect::<Result<_, _>>()?));
    }
    Err(err(s, "unknown value literal"))
}

fn parse_example_literal(s: &Sexpr) -> Result<ExampleLiteral, ParseError> {
    if let Some(items) = s.tagged("str") {
        let text = items
            .first()
            .and_then(|x| x.string())
            .ok_or_else(|| err(s, "str takes a string literal"))?;
        return Ok(ExampleLiteral::Str(text.to_string()));
    }
    Ok(ExampleLiteral::Value(parse_value(s)?))
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let top = parse_one(text)?;
    let items = top
        .tagged("problem")
        .ok_or_else(|| err(&top, "expected (problem ...)"))?;

    let mut name = String::new();
    let mut alphabet: Vec<char> = Vec::new();
    let mut nts: Vec<NonterminalDecl> = Vec::new();
    let mut start_name: Option<(String, Sexpr)> = None;
    let mut order_hints = BTreeMap::new();

    // First pass: name/alphabet/nonterminals/start/orders, so that sorts and
    // charmat indices resolve while reading productions.
    for item in items {
        if let Some(args) = item.tagged("name") {
            name = args
                .first()
                .and_then(|a| a.string())
                .ok_or_else(|| err(item, "name takes a string"))?
                .to_string();
        } else if let Some(args) = item.tagged("alphabet") {
            let text = args
                .first()
                .and_then(|a| a.string())
                .ok_or_else(|| err(item, "alphabet takes a string"))?;
            alphabet = text.chars().collect();
        } else if let Some(args) = item.tagged("orders") {
            for hint in args {
                let pair = hint.list().ok_or_else(|| err(hint, "order hint must be a pair"))?;
                if pair.len() != 2 || pair[0].atom().is_none() || pair[1].atom().is_none() {
                    return Err(err(hint, "order hint must be (sort order)"));
                }
                order_hints
                    .insert(pair[0].atom().unwrap().to_string(), pair[1].atom().unwrap().to_string());
            }
        } else if let Some(args) = item.tagged("start") {
            let n = args
                .first()
                .and_then(|a| a.atom())
                .ok_or_else(|| err(item, "start takes a nonterminal name"))?;
            start_name = Some((n.to_string(), item.clone()));
        }
    }
    for item in items {
        if let Some(args) = item.tagged("nonterminal") {
            if args.len() != 3 {
                return Err(err(item, "nonterminal takes name, input sort, output sort"));
            }
            let nt_name = args[0]
                .atom()
                .ok_or_else(|| err(&args[0], "nonterminal name must be an atom"))?;
            nts.push(NonterminalDecl {
                name: nt_name.to_string(),
                input_type: parse_sort(&args[1], alphabet.len())?,
                output_type: parse_sort(&args[2], alphabet.len())?,
            });
        }
    }

    let nt_id = |n: &str, at: &Sexpr| -> Result<NtId, ParseError> {
        nts.iter()
            .position(|d| d.name == n)
            .map(|i| NtId(i as u32))
            .ok_or_else(|| err(at, format!("undeclared nonterminal {n}")))
    };

    let mut productions: Vec<Production> = Vec::new();
    let mut raw_examples: Vec<RawExample> = Vec::new();
    for item in items {
        if let Some(args) = item.tagged("production") {
            if args.len() < 4 {
                return Err(err(item, "production takes lhs, operator, children, rules"));
            }
            let lhs = nt_id(
                args[0].atom().ok_or_else(|| err(&args[0], "lhs must be an atom"))?,
                &args[0],
            )?;
            let operator = args[1]
                .atom()
                .ok_or_else(|| err(&args[1], "operator must be an atom"))?
                .to_string();
            let child_list = args[2]
                .list()
                .ok_or_else(|| err(&args[2], "children must be a list of nonterminals"))?;
            let children = child_list
                .iter()
                .map(|c| {
                    nt_id(c.atom().ok_or_else(|| err(c, "child must be a nonterminal name"))?, c)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut rest = &args[3..];
            let mut recursive = false;
            if rest.first().and_then(|x| x.atom()) == Some("recursive") {
                recursive = true;
                rest = &rest[1..];
            }
            let mut rules = Vec::new();
            for r in rest {
                let rule_items =
                    r.tagged("rule").ok_or_else(|| err(r, "expected (rule ...)"))?;
                let mut guard = None;
                let mut child_inputs = None;
                let mut output = None;
                for ri in rule_items {
                    if let Some(gs) = ri.tagged("guard") {
                        if gs.len() != 1 {
                            return Err(err(ri, "guard takes one expression"));
                        }
                        guard = Some(parse_expr(&gs[0], &alphabet)?);
                    } else if let Some(ins) = ri.tagged("inputs") {
                        child_inputs = Some(
                            ins.iter()
                                .map(|e| parse_expr(e, &alphabet))
                                .collect::<Result<Vec<_>, _>>()?,
                        );
                    } else if let Some(os) = ri.tagged("output") {
                        if os.len() != 1 {
                            return Err(err(ri, "output takes one expression"));
                        }
                        output = Some(parse_expr(&os[0], &alphabet)?);
                    } else {
                        return Err(err(ri, "rule parts are guard, inputs, output"));
                    }
                }
                rules.push(ChcRule {
                    guard,
                    child_inputs: child_inputs
                        .ok_or_else(|| err(r, "rule is missing (inputs ...)"))?,
                    output: output.ok_or_else(|| err(r, "rule is missing (output ...)"))?,
                });
            }
            if rules.is_empty() {
                return Err(err(item, "production needs at least one rule"));
            }
            productions.push(Production { lhs, operator, children, rules, recursive });
        } else if let Some(args) = item.tagged("example") {
            if args.len() != 2 {
                return Err(err(item, "example takes input and output"));
            }
            raw_examples.push(RawExample {
                input: parse_example_literal(&args[0])?,
                output: parse_example_literal(&args[1])?,
            });
        } else if item.tagged("name").is_some()
            || item.tagged("alphabet").is_some()
            || item.tagged("orders").is_some()
            || item.tagged("start").is_some()
            || item.tagged("nonterminal").is_some()
        {
            // handled in the first pass
        } else {
            return Err(err(item, "unknown problem item"));
        }
    }

    let (start_name, start_at) =
        start_name.ok_or_else(|| err(&top, "problem is missing (start ...)"))?;
    let start = nt_id(&start_name, &start_at)?;

    let grammar = Grammar { nonterminals: nts, start, productions };
    let mut problem =
        Problem { name, grammar, alphabet, raw_examples, examples: vec![], order_hints };
    problem.recompile_examples();
    Ok(problem)
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

fn print_value(v: &Value) -> String {
    v.to_string()
}

fn print_example_literal(lit: &ExampleLiteral) -> String {
    match lit {
        ExampleLiteral::Value(v) => print_value(v),
        ExampleLiteral::Str(s) => format!("(str \"{s}\")"),
    }
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let al = p.alphabet.len();
    let _ = writeln!(out, "(problem");
    let _ = writeln!(out, "  (name \"{}\")", p.name);
    if al > 0 {
        let text: String = p.alphabet.iter().collect();
        let _ = writeln!(out, "  (alphabet \"{text}\")");
    }
    for d in &p.grammar.nonterminals {
        let _ = writeln!(
            out,
            "  (nonterminal {} {} {})",
            d.name,
            print_sort(&d.input_type, al),
            print_sort(&d.output_type, al)
        );
    }
    let _ = writeln!(out, "  (start {})", p.grammar.nt(p.grammar.start).name);
    for prod in &p.grammar.productions {
        let kids: Vec<&str> =
            prod.children.iter().map(|c| p.grammar.nt(*c).name.as_str()).collect();
        let rec = if prod.recursive { " recursive" } else { "" };
        let _ = writeln!(
            out,
            "  (production {} {} ({}){rec}",
            p.grammar.nt(prod.lhs).name,
            prod.operator,
            kids.join(" ")
        );
        for (i, rule) in prod.rules.iter().enumerate() {
            let mut line = String::from("    (rule ");
            if let Some(g) = &rule.guard {
                let _ = write!(line, "(guard {g}) ");
            }
            let ins: Vec<String> = rule.child_inputs.iter().map(|e| e.to_string()).collect();
            let _ = write!(line, "(inputs{}{})", if ins.is_empty() { "" } else { " " }, ins.join(" "));
            let _ = write!(line, " (output {})", rule.output);
            let _ = write!(line, ")");
            if i + 1 == prod.rules.len() {
                line.push(')');
            }
            let _ = writeln!(out, "{line}");
        }
    }
    for re in &p.raw_examples {
        let _ = writeln!(
            out,
            "  (example {} {})",
            print_example_literal(&re.input),
            print_example_literal(&re.output)
        );
    }
    for (sort, order) in &p.order_hints {
        let _ = writeln!(out, "  (orders ({sort} {order}))");
    }
    out.push_str(")\n");
    out
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

/// Full static validation. An empty result means the problem is well-formed;
/// the evaluator, analyses, and search all assume that.
pub fn validate(p: &Problem) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let g = &p.grammar;

    for d in &g.nonterminals {
        if !d.input_type.is_valid() || !d.output_type.is_valid() {
            diags.push(Diagnostic::new(format!("nonterminal {}: invalid sort", d.name)));
        }
    }
    {
        let mut seen = std::collections::HashSet::new();
        for d in &g.nonterminals {
            if !seen.insert(&d.name) {
                diags.push(Diagnostic::new(format!("duplicate nonterminal {}", d.name)));
            }
        }
    }
    {
        let mut seen = std::collections::HashSet::new();
        for prod in &g.productions {
            if !seen.insert((prod.lhs, prod.operator.clone())) {
                diags.push(Diagnostic::new(format!(
                    "duplicate operator {} for nonterminal {}",
                    prod.operator,
                    g.nt(prod.lhs).name
                )));
            }
        }
    }

    for prod in &g.productions {
        let pname = format!("{}::{}", g.nt(prod.lhs).name, prod.operator);
        let input_ty = &g.nt(prod.lhs).input_type;
        let output_ty = &g.nt(prod.lhs).output_type;
        let child_out_tys: Vec<SemType> =
            prod.children.iter().map(|c| g.nt(*c).output_type.clone()).collect();

        if prod.recursive {
            if prod.children.len() != 2 {
                diags.push(Diagnostic::new(format!(
                    "{pname}: recursive productions take exactly two children (guard, body)"
                )));
                continue;
            }
            let guard_out = &g.nt(prod.children[0]).output_type;
            if *guard_out != SemType::Bool {
                diags.push(Diagnostic::new(format!(
                    "{pname}: recursive guard child must output bool"
                )));
            }
            let body = prod.children[1];
            if g.nt(body).output_type != *input_ty || *output_ty != *input_ty {
                diags.push(Diagnostic::new(format!(
                    "{pname}: recursive body and production must map the input sort to itself"
                )));
            }
        }

        for (ri, rule) in prod.rules.iter().enumerate() {
            let rname = format!("{pname} rule {ri}");
            if rule.child_inputs.len() != prod.children.len() {
                diags.push(Diagnostic::new(format!(
                    "{rname}: {} child inputs for {} children",
                    rule.child_inputs.len(),
                    prod.children.len()
                )));
                continue;
            }
            if let Some(guard) = &rule.guard {
                if guard.max_child_ref() > 0 {
                    diags.push(Diagnostic::new(format!(
                        "{rname}: guard may only reference input"
                    )));
                }
                let ctx = TypeCtx { input: input_ty, child_outs: &[] };
                match infer_type(guard, &ctx) {
                    Ok(SemType::Bool) => {}
                    Ok(t) => diags
                        .push(Diagnostic::new(format!("{rname}: guard has sort {t}, not bool"))),
                    Err(e) => diags.push(Diagnostic::new(format!("{rname}: guard: {e}"))),
                }
            }
            for (i, ci) in rule.child_inputs.iter().enumerate() {
                // expression i may use child outputs 1..=i only
                if ci.max_child_ref() > i {
                    diags.push(Diagnostic::new(format!(
                        "{rname}: input of child {} references child output {} (dataflow is left-to-right)",
                        i + 1,
                        ci.max_child_ref()
                    )));
                    continue;
                }
                let visible = &child_out_tys[..i];
                let ctx = TypeCtx { input: input_ty, child_outs: visible };
                let want = &g.nt(prod.children[i]).input_type;
                match infer_type(ci, &ctx) {
                    Ok(t) if t == *want => {}
                    Ok(t) => diags.push(Diagnostic::new(format!(
                        "{rname}: input of child {} has sort {t}, expected {want}",
                        i + 1
                    ))),
                    Err(e) => diags
                        .push(Diagnostic::new(format!("{rname}: input of child {}: {e}", i + 1))),
                }
            }
            let ctx = TypeCtx { input: input_ty, child_outs: &child_out_tys };
            match infer_type(&rule.output, &ctx) {
                Ok(t) if t == *output_ty => {}
                Ok(t) => diags.push(Diagnostic::new(format!(
                    "{rname}: output has sort {t}, expected {output_ty}"
                ))),
                Err(e) => diags.push(Diagnostic::new(format!("{rname}: output: {e}"))),
            }
        }

        // unguarded rules are catch-alls; anything after one is unreachable
        if let Some(pos) = prod.rules.iter().position(|r| r.guard.is_none()) {
            if pos + 1 < prod.rules.len() {
                diags.push(Diagnostic::new(format!(
                    "{pname}: rules after the unguarded rule {pos} are unreachable"
                )));
            }
        }
    }

    let start = g.nt(g.start);
    for (i, ex) in p.examples.iter().enumerate() {
        if !ex.input.has_sort(&start.input_type) {
            diags.push(Diagnostic::new(format!(
                "example {i}: input sort mismatch (expected {})",
                start.input_type
            )));
        }
        if !ex.output.has_sort(&start.output_type) {
            diags.push(Diagnostic::new(format!(
                "example {i}: output sort mismatch (expected {})",
                start.output_type
            )));
        }
        if !ex.input.is_finite() || !ex.output.is_finite() {
            diags.push(Diagnostic::new(format!("example {i}: values must be finite")));
        }
    }

    // guard overlap, checked on the example inputs that reach each production
    // with identity wiring (start-level inputs are the only ones known here)
    for prod in &g.productions {
        if prod.rules.iter().filter(|r| r.guard.is_some()).count() < 2 {
            continue;
        }
        let input_ty = &g.nt(prod.lhs).input_type;
        for (i, ex) in p.examples.iter().enumerate() {
            if !ex.input.has_sort(input_ty) {
                continue;
            }
            let env =
                crate::expr::Env { input: &ex.input, child_outs: &[], dim: ex.input.matrix_dim().unwrap_or(0) };
            let holding = prod
                .rules
                .iter()
                .filter_map(|r| r.guard.as_ref())
                .filter(|guard| {
                    matches!(crate::expr::eval_expr(guard, &env), Ok(Value::Bool(true)))
                })
                .count();
            if holding > 1 {
                diags.push(Diagnostic::new(format!(
                    "{}::{}: {holding} guards hold on example {i}",
                    g.nt(prod.lhs).name,
                    prod.operator
                )));
            }
        }
    }

    diags
}
