//! The total expression language used in semantic rules.
//!
//! Every rule of a production is built from these operators over the
//! production input (`Input`) and the child outputs (`ChildOut(i)`, 1-based).
//! Evaluation is deterministic and total on well-typed finite inputs; the
//! only failures are type confusion (a bug signal once a problem validated)
//! and the indeterminate extended-integer form, which only arises on
//! interval endpoints.

use std::fmt;

use thiserror::Error;

use crate::value::{BoolMatrix, ExtInt, SemType, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    IntConst(i64),
    BoolConst(bool),
    BvConst { width: u32, bits: u64 },
    /// The production input x.
    Input,
    /// Output of the i-th child (1-based).
    ChildOut(usize),
    MkTuple(Vec<Expr>),
    /// 0-based tuple projection.
    Proj(Box<Expr>, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    BvAnd(Box<Expr>, Box<Expr>),
    BvOr(Box<Expr>, Box<Expr>),
    BvXor(Box<Expr>, Box<Expr>),
    BvNot(Box<Expr>),
    /// Wrapping addition.
    BvAdd(Box<Expr>, Box<Expr>),
    /// Addition saturating at 2^w - 1.
    BvAddSat(Box<Expr>, Box<Expr>),
    MZero,
    MId,
    MOnes,
    /// Matrix of one alphabet character against the current example string;
    /// resolved to a projection of the input tuple at load time.
    CharMat { ch: char, index: usize },
    MAdd(Box<Expr>, Box<Expr>),
    MMul(Box<Expr>, Box<Expr>),
    MClosure(Box<Expr>),
    MComplement(Box<Expr>),
    /// Top-right entry of a matrix: whether the whole string is accepted.
    MAccept(Box<Expr>),
}

impl Expr {
    pub fn children(&self) -> Vec<&Expr> {
        use Expr::*;
        match self {
            IntConst(_) | BoolConst(_) | BvConst { .. } | Input | ChildOut(_) | MZero | MId
            | MOnes | CharMat { .. } => vec![],
            MkTuple(es) => es.iter().collect(),
            Proj(a, _) | Not(a) | BvNot(a) | MClosure(a) | MComplement(a) | MAccept(a) => {
                vec![a]
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Min(a, b) | Max(a, b) | Eq(a, b) | Le(a, b)
            | Lt(a, b) | And(a, b) | Or(a, b) | Implies(a, b) | BvAnd(a, b) | BvOr(a, b)
            | BvXor(a, b) | BvAdd(a, b) | BvAddSat(a, b) | MAdd(a, b) | MMul(a, b) => {
                vec![a, b]
            }
            Ite(c, t, e) => vec![c, t, e],
        }
    }

    /// Does the expression mention `Input` (arg 0) or `ChildOut(arg)` (arg >= 1)?
    pub fn references_arg(&self, arg: usize) -> bool {
        match (self, arg) {
            (Expr::Input, 0) => true,
            (Expr::CharMat { .. }, 0) => true,
            (Expr::ChildOut(i), a) if a >= 1 => *i == a,
            _ => self.children().iter().any(|c| c.references_arg(arg)),
        }
    }

    /// Largest child index mentioned, 0 if none.
    pub fn max_child_ref(&self) -> usize {
        let own = if let Expr::ChildOut(i) = self { *i } else { 0 };
        self.children().iter().map(|c| c.max_child_ref()).fold(own, usize::max)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(String),
    #[error("indeterminate endpoint arithmetic (inf - inf)")]
    Indeterminate,
    #[error("integer overflow outside interval endpoints")]
    Overflow,
    #[error("evaluation fuel exhausted")]
    FuelExhausted,
    #[error("term contains holes")]
    Incomplete,
    #[error("no semantic rule applies")]
    NoRuleApplies,
}

/// Environment for one rule-expression evaluation.
pub struct Env<'a> {
    pub input: &'a Value,
    pub child_outs: &'a [&'a Value],
    /// Matrix dimension for this evaluation (0 when the problem has none).
    pub dim: u32,
}

fn as_int(v: &Value) -> Result<ExtInt, EvalError> {
    match v {
        Value::Int(x) => Ok(*x),
        other => Err(EvalError::Type(format!("expected int, got {other}"))),
    }
}

fn as_bool(v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(EvalError::Type(format!("expected bool, got {other}"))),
    }
}

fn as_bv(v: &Value) -> Result<(u32, u64), EvalError> {
    match v {
        Value::BitVec { width, bits } => Ok((*width, *bits)),
        other => Err(EvalError::Type(format!("expected bitvec, got {other}"))),
    }
}

fn as_matrix(v: &Value) -> Result<&BoolMatrix, EvalError> {
    match v {
        Value::Matrix(m) => Ok(m),
        other => Err(EvalError::Type(format!("expected matrix, got {other}"))),
    }
}

fn bv_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    use Expr::*;
    Ok(match e {
        IntConst(v) => Value::int(*v),
        BoolConst(b) => Value::Bool(*b),
        BvConst { width, bits } => Value::bitvec(*width, *bits),
        Input => env.input.clone(),
        ChildOut(i) => env
            .child_outs
            .get(i - 1)
            .map(|v| (*v).clone())
            .ok_or_else(|| EvalError::Type(format!("child output {i} not available")))?,
        MkTuple(es) => match es.as_slice() {
            [a, b] => Value::pair_of(eval_expr(a, env)?, eval_expr(b, env)?),
            _ => Value::tuple(
                es.iter().map(|e| eval_expr(e, env)).collect::<Result<Vec<_>, _>>()?,
            ),
        },
        Proj(a, i) => match eval_expr(a, env)? {
            Value::Tuple(vs) if *i < vs.len() => vs[*i].clone(),
            other => return Err(EvalError::Type(format!("bad projection {i} of {other}"))),
        },
        Add(a, b) => Value::Int(
            as_int(&eval_expr(a, env)?)?
                .add(as_int(&eval_expr(b, env)?)?)
                .map_err(|_| EvalError::Indeterminate)?,
        ),
        Sub(a, b) => Value::Int(
            as_int(&eval_expr(a, env)?)?
                .sub(as_int(&eval_expr(b, env)?)?)
                .map_err(|_| EvalError::Indeterminate)?,
        ),
        Mul(a, b) => Value::Int(as_int(&eval_expr(a, env)?)?.mul(as_int(&eval_expr(b, env)?)?)),
        Min(a, b) => Value::Int(as_int(&eval_expr(a, env)?)?.min(as_int(&eval_expr(b, env)?)?)),
        Max(a, b) => Value::Int(as_int(&eval_expr(a, env)?)?.max(as_int(&eval_expr(b, env)?)?)),
        Ite(c, t, f) => {
            if as_bool(&eval_expr(c, env)?)? {
                eval_expr(t, env)?
            } else {
                eval_expr(f, env)?
            }
        }
        Eq(a, b) => Value::Bool(eval_expr(a, env)? == eval_expr(b, env)?),
        Le(a, b) => Value::Bool(as_int(&eval_expr(a, env)?)? <= as_int(&eval_expr(b, env)?)?),
        Lt(a, b) => Value::Bool(as_int(&eval_expr(a, env)?)? < as_int(&eval_expr(b, env)?)?),
        And(a, b) => Value::Bool(as_bool(&eval_expr(a, env)?)? & as_bool(&eval_expr(b, env)?)?),
        Or(a, b) => Value::Bool(as_bool(&eval_expr(a, env)?)? | as_bool(&eval_expr(b, env)?)?),
        Not(a) => Value::Bool(!as_bool(&eval_expr(a, env)?)?),
        Implies(a, b) => {
            Value::Bool(!as_bool(&eval_expr(a, env)?)? | as_bool(&eval_expr(b, env)?)?)
        }
        BvAnd(a, b) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            let (_, y) = as_bv(&eval_expr(b, env)?)?;
            Value::bitvec(w, x & y)
        }
        BvOr(a, b) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            let (_, y) = as_bv(&eval_expr(b, env)?)?;
            Value::bitvec(w, x | y)
        }
        BvXor(a, b) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            let (_, y) = as_bv(&eval_expr(b, env)?)?;
            Value::bitvec(w, x ^ y)
        }
        BvNot(a) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            Value::bitvec(w, !x)
        }
        BvAdd(a, b) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            let (_, y) = as_bv(&eval_expr(b, env)?)?;
            Value::bitvec(w, x.wrapping_add(y))
        }
        BvAddSat(a, b) => {
            let (w, x) = as_bv(&eval_expr(a, env)?)?;
            let (_, y) = as_bv(&eval_expr(b, env)?)?;
            let sum = (x as u128) + (y as u128);
            let max = bv_mask(w) as u128;
            Value::bitvec(w, sum.min(max) as u64)
        }
        MZero => Value::matrix(BoolMatrix::zero(env.dim.max(1))),
        MId => Value::matrix(BoolMatrix::identity(env.dim.max(1))),
        MOnes => Value::matrix(BoolMatrix::ones(env.dim.max(1))),
        CharMat { index, .. } => match env.input {
            Value::Tuple(vs) if *index < vs.len() => vs[*index].clone(),
            other => {
                return Err(EvalError::Type(format!("charmat over non-alphabet input {other}")))
            }
        },
        MAdd(a, b) => Value::matrix(
            as_matrix(&eval_expr(a, env)?)?.add(as_matrix(&eval_expr(b, env)?)?),
        ),
        MMul(a, b) => Value::matrix(
            as_matrix(&eval_expr(a, env)?)?.mul(as_matrix(&eval_expr(b, env)?)?),
        ),
        MClosure(a) => Value::matrix(as_matrix(&eval_expr(a, env)?)?.closure()),
        MComplement(a) => Value::matrix(as_matrix(&eval_expr(a, env)?)?.complement()),
        MAccept(a) => {
            let m = eval_expr(a, env)?;
            let m = as_matrix(&m)?;
            Value::Bool(m.get(0, m.dim() - 1))
        }
    })
}

/// Static typing context: the input sort and the child output sorts
/// visible to the expression.
pub struct TypeCtx<'a> {
    pub input: &'a SemType,
    pub child_outs: &'a [SemType],
}

pub fn infer_type(e: &Expr, ctx: &TypeCtx) -> Result<SemType, String> {
    use Expr::*;
    let int2 = |a: &Expr, b: &Expr, ctx: &TypeCtx| -> Result<SemType, String> {
        expect(a, SemType::Int, ctx)?;
        expect(b, SemType::Int, ctx)?;
        Ok(SemType::Int)
    };
    let bool2 = |a: &Expr, b: &Expr, ctx: &TypeCtx| -> Result<SemType, String> {
        expect(a, SemType::Bool, ctx)?;
        expect(b, SemType::Bool, ctx)?;
        Ok(SemType::Bool)
    };
    let mat2 = |a: &Expr, b: &Expr, ctx: &TypeCtx| -> Result<SemType, String> {
        expect(a, SemType::BoolMatrix, ctx)?;
        expect(b, SemType::BoolMatrix, ctx)?;
        Ok(SemType::BoolMatrix)
    };
    match e {
        IntConst(_) => Ok(SemType::Int),
        BoolConst(_) => Ok(SemType::Bool),
        BvConst { width, .. } => Ok(SemType::BitVec(*width)),
        Input => Ok(ctx.input.clone()),
        ChildOut(i) => {
            if *i == 0 || *i > ctx.child_outs.len() {
                Err(format!("child output {i} out of range (arity {})", ctx.child_outs.len()))
            } else {
                Ok(ctx.child_outs[i - 1].clone())
            }
        }
        MkTuple(es) => {
            if es.is_empty() {
                return Err("empty tuple".into());
            }
            Ok(SemType::Tuple(es.iter().map(|e| infer_type(e, ctx)).collect::<Result<_, _>>()?))
        }
        Proj(a, i) => match infer_type(a, ctx)? {
            SemType::Tuple(ts) if *i < ts.len() => Ok(ts[*i].clone()),
            t => Err(format!("projection {i} of non-tuple or short tuple {t}")),
        },
        Add(a, b) | Sub(a, b) | Mul(a, b) | Min(a, b) | Max(a, b) => int2(a, b, ctx),
        Ite(c, t, f) => {
            expect(c, SemType::Bool, ctx)?;
            let tt = infer_type(t, ctx)?;
            let ft = infer_type(f, ctx)?;
            if tt == ft {
                Ok(tt)
            } else {
                Err(format!("ite branches disagree: {tt} vs {ft}"))
            }
        }
        Eq(a, b) => {
            let ta = infer_type(a, ctx)?;
            let tb = infer_type(b, ctx)?;
            if ta == tb {
                Ok(SemType::Bool)
            } else {
                Err(format!("= operands disagree: {ta} vs {tb}"))
            }
        }
        Le(a, b) | Lt(a, b) => {
            expect(a, SemType::Int, ctx)?;
            expect(b, SemType::Int, ctx)?;
            Ok(SemType::Bool)
        }
        And(a, b) | Or(a, b) | Implies(a, b) => bool2(a, b, ctx),
        Not(a) => {
            expect(a, SemType::Bool, ctx)?;
            Ok(SemType::Bool)
        }
        BvAnd(a, b) | BvOr(a, b) | BvXor(a, b) | BvAdd(a, b) | BvAddSat(a, b) => {
            let ta = infer_type(a, ctx)?;
            let tb = infer_type(b, ctx)?;
            match (&ta, &tb) {
                (SemType::BitVec(w1), SemType::BitVec(w2)) if w1 == w2 => Ok(ta),
                _ => Err(format!("bitvec operands disagree: {ta} vs {tb}")),
            }
        }
        BvNot(a) => match infer_type(a, ctx)? {
            t @ SemType::BitVec(_) => Ok(t),
            t => Err(format!("bvnot over {t}")),
        },
        MZero | MId | MOnes | CharMat { .. } => Ok(SemType::BoolMatrix),
        MAdd(a, b) | MMul(a, b) => mat2(a, b, ctx),
        MClosure(a) | MComplement(a) => {
            expect(a, SemType::BoolMatrix, ctx)?;
            Ok(SemType::BoolMatrix)
        }
        MAccept(a) => {
            expect(a, SemType::BoolMatrix, ctx)?;
            Ok(SemType::Bool)
        }
    }
}

fn expect(e: &Expr, want: SemType, ctx: &TypeCtx) -> Result<(), String> {
    let got = infer_type(e, ctx)?;
    if got == want {
        Ok(())
    } else {
        Err(format!("expected {want}, got {got}"))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            IntConst(v) => write!(f, "{v}"),
            BoolConst(b) => write!(f, "{b}"),
            BvConst { width, bits } => write!(f, "(bv {width} {bits})"),
            Input => write!(f, "input"),
            ChildOut(i) => write!(f, "(child {i})"),
            MkTuple(es) => {
                write!(f, "(tuple")?;
                for e in es {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
            Proj(a, i) => write!(f, "(proj {a} {i})"),
            Add(a, b) => write!(f, "(+ {a} {b})"),
            Sub(a, b) => write!(f, "(- {a} {b})"),
            Mul(a, b) => write!(f, "(* {a} {b})"),
            Min(a, b) => write!(f, "(min {a} {b})"),
            Max(a, b) => write!(f, "(max {a} {b})"),
            Ite(c, t, e) => write!(f, "(ite {c} {t} {e})"),
            Eq(a, b) => write!(f, "(= {a} {b})"),
            Le(a, b) => write!(f, "(<= {a} {b})"),
            Lt(a, b) => write!(f, "(< {a} {b})"),
            And(a, b) => write!(f, "(and {a} {b})"),
            Or(a, b) => write!(f, "(or {a} {b})"),
            Not(a) => write!(f, "(not {a})"),
            Implies(a, b) => write!(f, "(=> {a} {b})"),
            BvAnd(a, b) => write!(f, "(bvand {a} {b})"),
            BvOr(a, b) => write!(f, "(bvor {a} {b})"),
            BvXor(a, b) => write!(f, "(bvxor {a} {b})"),
            BvNot(a) => write!(f, "(bvnot {a})"),
            BvAdd(a, b) => write!(f, "(bvadd {a} {b})"),
            BvAddSat(a, b) => write!(f, "(bvadd-sat {a} {b})"),
            MZero => write!(f, "mzero"),
            MId => write!(f, "mid"),
            MOnes => write!(f, "mones"),
            CharMat { ch, .. } => write!(f, "(charmat \"{ch}\")"),
            MAdd(a, b) => write!(f, "(madd {a} {b})"),
            MMul(a, b) => write!(f, "(mmul {a} {b})"),
            MClosure(a) => write!(f, "(mclosure {a})"),
            MComplement(a) => write!(f, "(mcomplement {a})"),
            MAccept(a) => write!(f, "(maccept {a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env<'a>(input: &'a Value, outs: &'a [&'a Value], dim: u32) -> Env<'a> {
        Env { input, child_outs: outs, dim }
    }

    #[test]
    fn subtraction_of_child_outputs() {
        // f_Minus((x,y), v1, v2) = v1 - v2 on input (4,2) with children [4,2].
        let e = Expr::Sub(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let input = Value::pair(4, 2);
        let four = Value::int(4);
        let two = Value::int(2);
        let outs = [&four, &two];
        assert_eq!(eval_expr(&e, &env(&input, &outs, 0)).unwrap(), Value::int(2));
    }

    #[test]
    fn saturating_bitvec_add() {
        let e = Expr::BvAddSat(
            Box::new(Expr::BvConst { width: 8, bits: 250 }),
            Box::new(Expr::BvConst { width: 8, bits: 10 }),
        );
        let input = Value::int(0);
        assert_eq!(eval_expr(&e, &env(&input, &[], 0)).unwrap(), Value::bitvec(8, 255));
    }

    #[test]
    fn complement_of_identity() {
        let e = Expr::MComplement(Box::new(Expr::MId));
        let input = Value::int(0);
        let v = eval_expr(&e, &env(&input, &[], 3)).unwrap();
        let m = match v {
            Value::Matrix(m) => m,
            _ => panic!(),
        };
        assert!(!m.get(0, 0) && m.get(0, 1) && m.get(0, 2) && !m.get(1, 1));
    }

    #[test]
    fn type_checking_rejects_misuse() {
        let ctx = TypeCtx { input: &SemType::Int, child_outs: &[SemType::Bool] };
        let bad = Expr::Add(Box::new(Expr::Input), Box::new(Expr::ChildOut(1)));
        assert!(infer_type(&bad, &ctx).is_err());
        let overrun = Expr::ChildOut(2);
        assert!(infer_type(&overrun, &ctx).is_err());
        let ok = Expr::Ite(
            Box::new(Expr::ChildOut(1)),
            Box::new(Expr::Input),
            Box::new(Expr::IntConst(0)),
        );
        assert_eq!(infer_type(&ok, &ctx).unwrap(), SemType::Int);
    }

    #[test]
    fn references_and_child_refs() {
        let e = Expr::Add(Box::new(Expr::ChildOut(2)), Box::new(Expr::IntConst(1)));
        assert!(e.references_arg(2));
        assert!(!e.references_arg(1));
        assert!(!e.references_arg(0));
        assert_eq!(e.max_child_ref(), 2);
    }
}
