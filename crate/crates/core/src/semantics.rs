//! Concrete evaluation of complete programs.
//!
//! Structural recursion over the term: for the applicable rule of the root
//! production, child inputs are computed left-to-right, children evaluated,
//! then the output expression. While-style recursive productions re-enter
//! themselves on the body output and burn fuel on each iteration; running
//! out of fuel conservatively fails the example.

use log::debug;

use crate::expr::{eval_expr, Env, EvalError};
use crate::grammar::{Example, Grammar, Production, Term};
use crate::value::Value;

pub const DEFAULT_FUEL: u32 = 512;

fn select_rule<'a>(p: &'a Production, input: &Value, dim: u32) -> Result<&'a crate::grammar::ChcRule, EvalError> {
    for rule in &p.rules {
        match &rule.guard {
            None => return Ok(rule),
            Some(g) => {
                let env = Env { input, child_outs: &[], dim };
                if let Value::Bool(true) = eval_expr(g, &env)? {
                    return Ok(rule);
                }
            }
        }
    }
    Err(EvalError::NoRuleApplies)
}

/// Evaluate a complete term on `input`. `fuel` bounds the total number of
/// loop iterations across the whole run.
pub fn eval(g: &Grammar, t: &Term, input: &Value, fuel: u32) -> Result<Value, EvalError> {
    let dim = input.matrix_dim().unwrap_or(0);
    let mut fuel = fuel;
    let out = eval_rec(g, t, input, dim, &mut fuel)?;
    if !out.is_finite() {
        return Err(EvalError::Overflow);
    }
    Ok(out)
}

fn eval_rec(
    g: &Grammar,
    t: &Term,
    input: &Value,
    dim: u32,
    fuel: &mut u32,
) -> Result<Value, EvalError> {
    match t {
        Term::Hole(_) => Err(EvalError::Incomplete),
        Term::Node { prod, children, .. } => {
            let p = g.prod(*prod);
            if p.recursive {
                return eval_loop(g, p, children, input, dim, fuel);
            }
            let rule = select_rule(p, input, dim)?;
            let mut outs: arrayvec::ArrayVec<Value, 8> = arrayvec::ArrayVec::new();
            for (i, child) in children.iter().enumerate() {
                let refs: arrayvec::ArrayVec<&Value, 8> = outs.iter().collect();
                let env = Env { input, child_outs: &refs, dim };
                let child_input = eval_expr(&rule.child_inputs[i], &env)?;
                drop(refs);
                outs.push(eval_rec(g, child, &child_input, dim, fuel)?);
            }
            let refs: arrayvec::ArrayVec<&Value, 8> = outs.iter().collect();
            let env = Env { input, child_outs: &refs, dim };
            eval_expr(&rule.output, &env)
        }
    }
}

fn eval_loop(
    g: &Grammar,
    p: &Production,
    children: &[std::rc::Rc<Term>],
    input: &Value,
    dim: u32,
    fuel: &mut u32,
) -> Result<Value, EvalError> {
    debug_assert_eq!(children.len(), 2);
    let rule = &p.rules[0];
    let mut state = input.clone();
    loop {
        let env = Env { input: &state, child_outs: &[], dim };
        let guard_input = eval_expr(&rule.child_inputs[0], &env)?;
        let guard = match eval_rec(g, &children[0], &guard_input, dim, fuel)? {
            Value::Bool(b) => b,
            other => return Err(EvalError::Type(format!("loop guard produced {other}"))),
        };
        if !guard {
            return Ok(state);
        }
        if *fuel == 0 {
            return Err(EvalError::FuelExhausted);
        }
        *fuel -= 1;
        let env = Env { input: &state, child_outs: &[], dim };
        let body_input = eval_expr(&rule.child_inputs[1], &env)?;
        state = eval_rec(g, &children[1], &body_input, dim, fuel)?;
    }
}

/// Does `t` map every example input to its expected output? Evaluation
/// errors (fuel, overflow, missing rule) count as failure.
pub fn check_examples(g: &Grammar, t: &Term, examples: &[Example], fuel: u32) -> bool {
    examples.iter().all(|ex| match eval(g, t, &ex.input, fuel) {
        Ok(v) => v == ex.output,
        Err(e) => {
            debug!("evaluation failed on example: {e}");
            false
        }
    })
}
