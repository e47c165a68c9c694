//! Direct LTL semantics on ultimately periodic words.
//!
//! Evaluates formulas by fixpoint iteration over the finitely many
//! distinct positions of `prefix · cycle^ω`, with no automaton involved;
//! serves as the independent reference for translation tests.

use super::ast::LtlAst;
use super::symbols::{ApSet, Symbol};

/// Truth of `ast` at position 0 of the word `prefix · cycle^ω`.
///
/// Supports up to 64 distinct positions, which covers every bounded
/// corpus the tests enumerate.
pub fn holds_on_lasso(ast: &LtlAst, ap: &ApSet, prefix: &[Symbol], cycle: &[Symbol]) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
    let m = prefix.len();
    let t = m + cycle.len();
    assert!(t <= 64, "at most 64 lasso positions are supported");
    let syms: Vec<Symbol> = prefix.iter().chain(cycle.iter()).copied().collect();
    let succ: Vec<usize> = (0..t).map(|i| if i + 1 < t { i + 1 } else { m }).collect();
    let full: u64 = if t == 64 { !0 } else { (1u64 << t) - 1 };
    eval(ast, ap, &syms, &succ, full) & 1 == 1
}

// Bit i of the result holds the truth value at position i.
fn eval(ast: &LtlAst, ap: &ApSet, syms: &[Symbol], succ: &[usize], full: u64) -> u64 {
    let t = syms.len();
    let shift = |v: u64| -> u64 {
        let mut out = 0u64;
        for (i, &s) in succ.iter().enumerate() {
            if v >> s & 1 == 1 {
                out |= 1 << i;
            }
        }
        out
    };
    match ast {
        LtlAst::True => full,
        LtlAst::Atom(name) => {
            let idx = ap
                .index_of(name)
                .unwrap_or_else(|| panic!("atom {name:?} missing from the AP set"));
            let mut v = 0u64;
            for (i, s) in syms.iter().enumerate() {
                if s.contains(idx) {
                    v |= 1 << i;
                }
            }
            v
        }
        LtlAst::Not(a) => !eval(a, ap, syms, succ, full) & full,
        LtlAst::And(a, b) => eval(a, ap, syms, succ, full) & eval(b, ap, syms, succ, full),
        LtlAst::Or(a, b) => eval(a, ap, syms, succ, full) | eval(b, ap, syms, succ, full),
        LtlAst::Implies(a, b) => {
            (!eval(a, ap, syms, succ, full) | eval(b, ap, syms, succ, full)) & full
        }
        LtlAst::Next(a) => shift(eval(a, ap, syms, succ, full)),
        LtlAst::Until(a, b) => {
            let va = eval(a, ap, syms, succ, full);
            let vb = eval(b, ap, syms, succ, full);
            // Least fixpoint of  U = b | (a & X U).
            let mut v = vb;
            for _ in 0..t {
                v = vb | (va & shift(v));
            }
            v
        }
        LtlAst::Eventually(a) => {
            let va = eval(a, ap, syms, succ, full);
            let mut v = va;
            for _ in 0..t {
                v = va | shift(v);
            }
            v
        }
        LtlAst::Always(a) => {
            let va = eval(a, ap, syms, succ, full);
            // Greatest fixpoint of  G = a & X G.
            let mut v = va;
            for _ in 0..t {
                v = va & shift(v);
            }
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_ltl_free;
    use super::*;

    fn ap3() -> ApSet {
        ApSet::from_strs(&["a", "b", "c"])
    }

    fn holds(src: &str, prefix: &[&[&str]], cycle: &[&[&str]]) -> bool {
        let ap = ap3();
        let ast = parse_ltl_free(src).unwrap();
        let p: Vec<Symbol> = prefix.iter().map(|s| ap.symbol(s)).collect();
        let c: Vec<Symbol> = cycle.iter().map(|s| ap.symbol(s)).collect();
        holds_on_lasso(&ast, &ap, &p, &c)
    }

    #[test]
    fn eventually_looks_past_the_prefix() {
        assert!(holds("<>a", &[&[], &[]], &[&["a"]]));
        assert!(holds("<>a", &[&["a"]], &[&[]]));
        assert!(!holds("<>a", &[&["b"]], &[&["c"]]));
    }

    #[test]
    fn always_needs_the_whole_cycle() {
        assert!(holds("[]a", &[&["a"]], &[&["a"], &["a", "b"]]));
        assert!(!holds("[]a", &[&["a"]], &[&["a"], &["b"]]));
        assert!(!holds("[]a", &[&[]], &[&["a"]]));
    }

    #[test]
    fn until_requires_the_goal_to_arrive() {
        assert!(holds("a U b", &[&["a"], &["a", "b"]], &[&[]]));
        assert!(!holds("a U b", &[&["a"]], &[&["a"]]));
        // b immediately satisfies the until with no a needed
        assert!(holds("a U b", &[&["b"]], &[&[]]));
    }

    #[test]
    fn next_steps_once() {
        assert!(holds("X a", &[&[], &["a"]], &[&[]]));
        assert!(!holds("X a", &[&["a"], &[]], &[&[]]));
        // with an empty prefix, X wraps into the cycle
        assert!(holds("X a", &[], &[&[], &["a"]]));
    }

    #[test]
    fn infinitely_often_ignores_finite_noise() {
        assert!(holds("[]<>a", &[&[], &[], &[]], &[&["a"], &[]]));
        assert!(!holds("[]<>a", &[&["a"], &["a"]], &[&[]]));
    }

    #[test]
    fn release_dual_through_negation() {
        // !(true U !a) == []a
        assert_eq!(
            holds("!(true U !a)", &[&["a"]], &[&["a"]]),
            holds("[]a", &[&["a"]], &[&["a"]]),
        );
        assert!(!holds("!(true U !a)", &[&["a"]], &[&["b"]]));
    }
}
