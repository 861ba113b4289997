//! Enumerative program synthesis from grammar + executable semantics +
//! examples, with automatically derived interval abstractions for pruning.
//!
//! The pipeline: load a problem (grammar, per-production semantic rules,
//! examples), pick orders under which the semantics is monotone, lift the
//! rules to interval transformers by evaluating at endpoints, tighten
//! per-nonterminal hole abstractions by a grammar-flow fixpoint, then run
//! top-down enumeration that prunes any partial program whose abstract
//! output interval misses an expected output.

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

pub mod absint;
pub mod artifact;
pub mod bench;
pub mod builders;
pub mod cli;
pub mod expr;
pub mod generators;
pub mod gfa;
pub mod grammar;
pub mod interval;
pub mod order;
pub mod problem;
pub mod focused;
pub mod search;
pub mod semantics;
pub mod sexpr;
pub mod smt;
pub mod value;

pub use expr::{eval_expr, Expr};
pub use grammar::{Example, Grammar, NtId, ProdId, Term};
// pub use interval::Interval;
pub use problem::{parse_problem, print_problem, validate, Problem};
pub use value::{BoolMatrix, ExtInt, SemType, Value};
