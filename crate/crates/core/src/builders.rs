//! Canonical built-in problems.
//!
//! Each builder assembles the textual form and runs it through the parser,
//! so every bundled problem exercises the frontend and round-trips by
//! construction. Seeded generators on top of these live in `generators`.

use std::fmt::Write as _;
use std::rc::Rc;

use crate::grammar::{Grammar, NtId, Term};
use crate::problem::{parse_problem, Problem};

fn must_parse(text: &str) -> Problem {
    match parse_problem(text) {
        Ok(p) => {
            let diags = crate::problem::validate(&p);
            assert!(diags.is_empty(), "built-in problem failed validation: {diags:?}\n{text}");
            p
        }
        Err(e) => panic!("built-in problem failed to parse: {e}\n{text}"),
    }
}

/// Imperative swap problem: two integer variables, assignments, sequencing,
/// and +/- expressions; examples demand swapping x and y.
pub fn imp_fig1() -> Problem {
    must_parse(
        r#"(problem
  (name "imp_swap")
  (nonterminal S (tuple int int) (tuple int int))
  (nonterminal E (tuple int int) int)
  (start S)
  (production S assign-x (E)
    (rule (inputs input) (output (tuple (child 1) (proj input 1)))))
  (production S assign-y (E)
    (rule (inputs input) (output (tuple (proj input 0) (child 1)))))
  (production S seq (S S)
    (rule (inputs input (child 1)) (output (child 2))))
  (production E 0 ()
    (rule (inputs) (output 0)))
  (production E 1 ()
    (rule (inputs) (output 1)))
  (production E x ()
    (rule (inputs) (output (proj input 0))))
  (production E y ()
    (rule (inputs) (output (proj input 1))))
  (production E add (E E)
    (rule (inputs input input) (output (+ (child 1) (child 2)))))
  (production E sub (E E)
    (rule (inputs input input) (output (- (child 1) (child 2)))))
  (example (tuple 4 2) (tuple 2 4))
  (example (tuple 3 3) (tuple 3 3)))
"#,
    )
}

/// The swap program over `imp_fig1`'s grammar.
pub fn imp_swap_term(g: &Grammar) -> Rc<Term> {
    crate::grammar::parse_term(
        g,
        "(seq (seq (assign-x (sub x y)) (assign-y (add x y))) (assign-x (sub y x)))",
        g.start,
    )
    .expect("swap term")
}

/// Subtraction-free expression grammar: hole abstractions stay one-sided
/// because every derivable term is built from nonnegative-looking parts.
pub fn imp_plus() -> Problem {
    must_parse(
        r#"(problem
  (name "imp_plus")
  (nonterminal E (tuple int int) int)
  (start E)
  (production E 0 ()
    (rule (inputs) (output 0)))
  (production E 1 ()
    (rule (inputs) (output 1)))
  (production E x ()
    (rule (inputs) (output (proj input 0))))
  (production E y ()
    (rule (inputs) (output (proj input 1))))
  (production E add (E E)
    (rule (inputs input input) (output (+ (child 1) (child 2)))))
  (example (tuple 1 2) 3)
  (example (tuple 0 4) 4))
"#,
    )
}

/// Integer maximum via if-then-else: the guard argument is non-monotone but
/// Boolean, so its abstract rule enumerates both guard values.
pub fn imp_ite() -> Problem {
    must_parse(
        r#"(problem
  (name "imp_max2")
  (nonterminal M (tuple int int) int)
  (nonterminal B (tuple int int) bool)
  (start M)
  (production M 0 ()
    (rule (inputs) (output 0)))
  (production M x ()
    (rule (inputs) (output (proj input 0))))
  (production M y ()
    (rule (inputs) (output (proj input 1))))
  (production M if (B M M)
    (rule (inputs input input input) (output (ite (child 1) (child 2) (child 3)))))
  (production B le (M M)
    (rule (inputs input input) (output (<= (child 1) (child 2)))))
  (example (tuple 1 2) 2)
  (example (tuple 5 3) 5)
  (example (tuple 2 2) 2))
"#,
    )
}

/// Unrealizable counting grammar: every derivable term is nonnegative but
/// the example demands -1.
pub fn imp_unreal() -> Problem {
    must_parse(
        r#"(problem
  (name "imp_unreal")
  (nonterminal E int int)
  (start E)
  (production E 0 ()
    (rule (inputs) (output 0)))
  (production E succ (E)
    (rule (inputs input) (output (+ 1 (child 1)))))
  (example 0 -1))
"#,
    )
}

/// Countdown loop: exercises while-style recursive productions and fuel.
pub fn imp_loop() -> Problem {
    must_parse(
        r#"(problem
  (name "imp_loop")
  (nonterminal S int int)
  (nonterminal B int bool)
  (nonterminal D int int)
  (start S)
  (production S done ()
    (rule (inputs) (output input)))
  (production S while (B D) recursive
    (rule (inputs input input) (output input)))
  (production B pos ()
    (rule (inputs) (output (< 0 input))))
  (production D dec ()
    (rule (inputs) (output (- input 1))))
  (example 5 0)
  (example 0 0))
"#,
    )
}

fn regex_grammar_body() -> &'static str {
    r#"  (production S accepts (R)
    (rule (inputs input) (output (maccept (child 1)))))
  (production R 0 ()
    (rule (inputs) (output (charmat "0"))))
  (production R 1 ()
    (rule (inputs) (output (charmat "1"))))
  (production R eps ()
    (rule (inputs) (output mid)))
  (production R empty ()
    (rule (inputs) (output mzero)))
  (production R union (R R)
    (rule (inputs input input) (output (madd (child 1) (child 2)))))
  (production R concat (R R)
    (rule (inputs input input) (output (mmul (child 1) (child 2)))))
  (production R star (R)
    (rule (inputs input) (output (mclosure (child 1)))))
  (production R neg (R)
    (rule (inputs input) (output (mcomplement (child 1)))))
"#
}

/// Regular-expression synthesis over {0,1} with the Boolean-matrix
/// semantics; examples ask for "odd positions are 1".
pub fn regex_fig5() -> Problem {
    let mut text = String::from(
        r#"(problem
  (name "regex_odd_ones")
  (alphabet "01")
  (nonterminal S charmats bool)
  (nonterminal R charmats boolmatrix)
  (start S)
"#,
    );
    text.push_str(regex_grammar_body());
    text.push_str(
        r#"  (example (str "1") true)
  (example (str "10") true)
  (example (str "111") true)
  (example (str "0") false)
  (example (str "00") false)
  (example (str "100") false))
"#,
    );
    must_parse(&text)
}

/// Tiny regex problem with a two-node solution; used where exhaustive
/// oracles need a nonempty consistent set at small sizes.
pub fn regex_tiny() -> Problem {
    let mut text = String::from(
        r#"(problem
  (name "regex_tiny")
  (alphabet "01")
  (nonterminal S charmats bool)
  (nonterminal R charmats boolmatrix)
  (start S)
"#,
    );
    text.push_str(regex_grammar_body());
    text.push_str(
        r#"  (example (str "1") true)
  (example (str "0") false))
"#,
    );
    must_parse(&text)
}

pub const CSV_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz0123456789, ";

/// CSV row-schema synthesis: rows are comma-separated alphabetic or numeric
/// entries. The separator matches the two-character ", " so the canonical
/// example "303, name" is derivable.
pub fn csv_row(examples: &[(&str, bool)]) -> Problem {
    let mut text = String::from("(problem\n  (name \"csv_row\")\n");
    let _ = writeln!(text, "  (alphabet \"{CSV_ALPHABET}\")");
    text.push_str(
        r#"  (nonterminal S charmats bool)
  (nonterminal Row charmats boolmatrix)
  (nonterminal Alpha charmats boolmatrix)
  (nonterminal Num charmats boolmatrix)
  (start S)
  (production S accepts (Row)
    (rule (inputs input) (output (maccept (child 1)))))
  (production Row row-alpha (Alpha)
    (rule (inputs input) (output (child 1))))
  (production Row row-num (Num)
    (rule (inputs input) (output (child 1))))
  (production Row row-alpha-sep (Alpha Row)
    (rule (inputs input input) (output (mmul (child 1) (mmul (mmul (charmat ",") (charmat " ")) (child 2))))))
  (production Row row-num-sep (Num Row)
    (rule (inputs input input) (output (mmul (child 1) (mmul (mmul (charmat ",") (charmat " ")) (child 2))))))
"#,
    );
    for c in 'a'..='z' {
        let _ = writeln!(
            text,
            "  (production Alpha {c} ()\n    (rule (inputs) (output (charmat \"{c}\"))))"
        );
    }
    text.push_str(
        r#"  (production Alpha alpha-concat (Alpha Alpha)
    (rule (inputs input input) (output (mmul (child 1) (child 2)))))
  (production Alpha alpha-union (Alpha Alpha)
    (rule (inputs input input) (output (madd (child 1) (child 2)))))
  (production Alpha alpha-star (Alpha)
    (rule (inputs input) (output (mclosure (child 1)))))
"#,
    );
    for c in '0'..='9' {
        let _ = writeln!(
            text,
            "  (production Num {c} ()\n    (rule (inputs) (output (charmat \"{c}\"))))"
        );
    }
    text.push_str(
        r#"  (production Num num-concat (Num Num)
    (rule (inputs input input) (output (mmul (child 1) (child 2)))))
  (production Num num-union (Num Num)
    (rule (inputs input input) (output (madd (child 1) (child 2)))))
  (production Num num-star (Num)
    (rule (inputs input) (output (mclosure (child 1)))))
"#,
    );
    for (s, accept) in examples {
        let _ = writeln!(text, "  (example (str \"{s}\") {accept})");
    }
    text.push(')');
    text.push('\n');
    must_parse(&text)
}

pub fn csv_canonical() -> Problem {
    csv_row(&[("303, name", true)])
}

/// Operator-only bitvector grammar for order comparison: bitwise-and,
/// bitwise-or, and saturating addition over width-8 vectors. Under the
/// bitwise order the two lattice operators are monotone; under unsigned-<=
/// only the saturating addition is.
pub fn bitvec_order_toy() -> Problem {
    must_parse(
        r#"(problem
  (name "bitvec_order_toy")
  (nonterminal B (bitvec 8) (bitvec 8))
  (start B)
  (production B bvand (B B)
    (rule (inputs input input) (output (bvand (child 1) (child 2)))))
  (production B bvor (B B)
    (rule (inputs input input) (output (bvor (child 1) (child 2)))))
  (production B bvadd (B B)
    (rule (inputs input input) (output (bvadd-sat (child 1) (child 2)))))
)
"#,
    )
}

/// Width-8 bitvector grammar with leaves; `saturating` selects the
/// saturating addition semantics, otherwise addition wraps.
pub fn bitvec_with_leaves(name: &str, saturating: bool, examples: &[(u64, u64)]) -> Problem {
    let add = if saturating { "bvadd-sat" } else { "bvadd" };
    let mut text = format!("(problem\n  (name \"{name}\")\n");
    text.push_str(
        r#"  (nonterminal B (bitvec 8) (bitvec 8))
  (start B)
  (production B x ()
    (rule (inputs) (output input)))
  (production B c15 ()
    (rule (inputs) (output (bv 8 15))))
  (production B c240 ()
    (rule (inputs) (output (bv 8 240))))
  (production B bvand (B B)
    (rule (inputs input input) (output (bvand (child 1) (child 2)))))
  (production B bvor (B B)
    (rule (inputs input input) (output (bvor (child 1) (child 2)))))
"#,
    );
    let _ = writeln!(
        text,
        "  (production B bvadd (B B)\n    (rule (inputs input input) (output ({add} (child 1) (child 2)))))"
    );
    for (i, o) in examples {
        let _ = writeln!(text, "  (example (bv 8 {i}) (bv 8 {o}))");
    }
    text.push(')');
    text.push('\n');
    must_parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanStyle {
    Cube,
    Cnf,
    Dnf,
}

impl BooleanStyle {
    pub fn label(self) -> &'static str {
        match self {
            BooleanStyle::Cube => "cube",
            BooleanStyle::Cnf => "cnf",
            BooleanStyle::Dnf => "dnf",
        }
    }
}

/// Boolean-formula grammar in the given style over `vars` variables;
/// examples must be supplied (typically a full truth table).
pub fn boolean_problem(
    name: &str,
    style: BooleanStyle,
    vars: usize,
    examples: &[(Vec<bool>, bool)],
) -> Problem {
    assert!((1..=5).contains(&vars));
    let input_sort = format!("(tuple {})", vec!["bool"; vars].join(" "));
    let mut text = format!("(problem\n  (name \"{name}\")\n");
    match style {
        BooleanStyle::Cube => {
            let _ = writeln!(text, "  (nonterminal Cube {input_sort} bool)");
            let _ = writeln!(text, "  (nonterminal Lit {input_sort} bool)");
            text.push_str("  (start Cube)\n");
            text.push_str(
                "  (production Cube just (Lit)\n    (rule (inputs input) (output (child 1))))\n",
            );
            text.push_str(
                "  (production Cube and (Lit Cube)\n    (rule (inputs input input) (output (and (child 1) (child 2)))))\n",
            );
        }
        BooleanStyle::Cnf => {
            let _ = writeln!(text, "  (nonterminal Cnf {input_sort} bool)");
            let _ = writeln!(text, "  (nonterminal Clause {input_sort} bool)");
            let _ = writeln!(text, "  (nonterminal Lit {input_sort} bool)");
            text.push_str("  (start Cnf)\n");
            text.push_str(
                "  (production Cnf just (Clause)\n    (rule (inputs input) (output (child 1))))\n",
            );
            text.push_str(
                "  (production Cnf and (Clause Cnf)\n    (rule (inputs input input) (output (and (child 1) (child 2)))))\n",
            );
            text.push_str(
                "  (production Clause just (Lit)\n    (rule (inputs input) (output (child 1))))\n",
            );
            text.push_str(
                "  (production Clause or (Lit Clause)\n    (rule (inputs input input) (output (or (child 1) (child 2)))))\n",
            );
        }
        BooleanStyle::Dnf => {
            let _ = writeln!(text, "  (nonterminal Dnf {input_sort} bool)");
            let _ = writeln!(text, "  (nonterminal Cube {input_sort} bool)");
            let _ = writeln!(text, "  (nonterminal Lit {input_sort} bool)");
            text.push_str("  (start Dnf)\n");
            text.push_str(
                "  (production Dnf just (Cube)\n    (rule (inputs input) (output (child 1))))\n",
            );
            text.push_str(
                "  (production Dnf or (Cube Dnf)\n    (rule (inputs input input) (output (or (child 1) (child 2)))))\n",
            );
            text.push_str(
                "  (production Cube just (Lit)\n    (rule (inputs input) (output (child 1))))\n",
            );
            text.push_str(
                "  (production Cube and (Lit Cube)\n    (rule (inputs input input) (output (and (child 1) (child 2)))))\n",
            );
        }
    }
    for i in 0..vars {
        let _ = writeln!(
            text,
            "  (production Lit x{i} ()\n    (rule (inputs) (output (proj input {i}))))"
        );
        let _ = writeln!(
            text,
            "  (production Lit not-x{i} ()\n    (rule (inputs) (output (not (proj input {i})))))"
        );
    }
    for (input, output) in examples {
        let vals: Vec<&str> = input.iter().map(|b| if *b { "true" } else { "false" }).collect();
        let _ = writeln!(text, "  (example (tuple {}) {})", vals.join(" "), output);
    }
    text.push(')');
    text.push('\n');
    must_parse(&text)
}

/// Hole of the start nonterminal, the enumeration seed.
pub fn start_hole(g: &Grammar) -> Rc<Term> {
    Rc::new(Term::hole(g.start))
}

pub fn nt(g: &Grammar, name: &str) -> NtId {
    g.nt_by_name(name).unwrap_or_else(|| panic!("no nonterminal {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate;

    #[test]
    fn all_builders_validate() {
        for p in [
            imp_fig1(),
            imp_plus(),
            imp_ite(),
            imp_unreal(),
            imp_loop(),
            regex_fig5(),
            regex_tiny(),
            csv_canonical(),
            bitvec_order_toy(),
            bitvec_with_leaves("bv_std", false, &[(7, 7)]),
            boolean_problem("bool_cube", BooleanStyle::Cube, 2, &[(vec![true, false], true)]),
        ] {
            assert!(validate(&p).is_empty(), "{}: {:?}", p.name, validate(&p));
        }
    }

    #[test]
    fn fig1_has_nine_productions() {
        let p = imp_fig1();
        assert_eq!(p.grammar.productions.len(), 9);
    }

    #[test]
    fn csv_example_compiles_to_dim_ten() {
        let p = csv_canonical();
        assert_eq!(p.examples[0].input.matrix_dim(), Some(10));
        assert_eq!(p.grammar.productions.len(), 5 + 26 + 3 + 10 + 3);
    }
}
