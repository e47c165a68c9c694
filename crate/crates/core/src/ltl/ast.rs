//! LTL formula syntax tree.

use std::fmt;

/// LTL formula over a declared set of atomic propositions.
///
/// Temporal operators follow the usual ASCII conventions: `X` (next),
/// `U` (until), `<>` (eventually), `[]` (always).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlAst {
    True,
    Atom(String),
    Not(Box<LtlAst>),
    And(Box<LtlAst>, Box<LtlAst>),
    Or(Box<LtlAst>, Box<LtlAst>),
    Implies(Box<LtlAst>, Box<LtlAst>),
    Next(Box<LtlAst>),
    Until(Box<LtlAst>, Box<LtlAst>),
    Eventually(Box<LtlAst>),
    Always(Box<LtlAst>),
}

impl LtlAst {
    pub fn not(a: LtlAst) -> Self {
        LtlAst::Not(Box::new(a))
    }
    pub fn and(a: LtlAst, b: LtlAst) -> Self {
        LtlAst::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: LtlAst, b: LtlAst) -> Self {
        LtlAst::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: LtlAst, b: LtlAst) -> Self {
        LtlAst::Implies(Box::new(a), Box::new(b))
    }
    pub fn next(a: LtlAst) -> Self {
        LtlAst::Next(Box::new(a))
    }
    pub fn until(a: LtlAst, b: LtlAst) -> Self {
        LtlAst::Until(Box::new(a), Box::new(b))
    }
    pub fn eventually(a: LtlAst) -> Self {
        LtlAst::Eventually(Box::new(a))
    }
    pub fn always(a: LtlAst) -> Self {
        LtlAst::Always(Box::new(a))
    }
    pub fn atom(name: impl Into<String>) -> Self {
        LtlAst::Atom(name.into())
    }

    /// True if the formula contains the next operator anywhere.
    pub fn contains_next(&self) -> bool {
        match self {
            LtlAst::True | LtlAst::Atom(_) => false,
            LtlAst::Not(a) | LtlAst::Eventually(a) | LtlAst::Always(a) => a.contains_next(),
            LtlAst::Next(_) => true,
            LtlAst::And(a, b) | LtlAst::Or(a, b) | LtlAst::Implies(a, b) | LtlAst::Until(a, b) => {
                a.contains_next() || b.contains_next()
            }
        }
    }

    /// Names of all atoms occurring in the formula, first occurrence first.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            LtlAst::True => {}
            LtlAst::Atom(name) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            LtlAst::Not(a) | LtlAst::Next(a) | LtlAst::Eventually(a) | LtlAst::Always(a) => {
                a.collect_atoms(out)
            }
            LtlAst::And(a, b) | LtlAst::Or(a, b) | LtlAst::Implies(a, b) | LtlAst::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for LtlAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized except for atoms; round-trips through the parser.
        match self {
            LtlAst::True => write!(f, "true"),
            LtlAst::Atom(name) => write!(f, "{name}"),
            LtlAst::Not(a) => write!(f, "!({a})"),
            LtlAst::And(a, b) => write!(f, "({a} && {b})"),
            LtlAst::Or(a, b) => write!(f, "({a} || {b})"),
            LtlAst::Implies(a, b) => write!(f, "({a} -> {b})"),
            LtlAst::Next(a) => write!(f, "X ({a})"),
            LtlAst::Until(a, b) => write!(f, "({a} U {b})"),
            LtlAst::Eventually(a) => write!(f, "<> ({a})"),
            LtlAst::Always(a) => write!(f, "[] ({a})"),
        }
    }
}
