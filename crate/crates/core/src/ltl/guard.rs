//! Propositional guards on automaton edges and the violation distance.

use super::ast::LtlAst;
use super::symbols::{ApSet, Symbol};
use std::fmt;
use thiserror::Error;

/// Propositional formula over atom indices of an [`ApSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardFormula {
    True,
    False,
    Atom(usize),
    Not(Box<GuardFormula>),
    And(Box<GuardFormula>, Box<GuardFormula>),
    Or(Box<GuardFormula>, Box<GuardFormula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GuardError {
    #[error("temporal operator {0} is not allowed in a guard")]
    TemporalOperator(&'static str),
    #[error("atom {0:?} is not among the declared propositions")]
    UnknownAtom(String),
}

impl GuardFormula {
    pub fn atom(idx: usize) -> Self {
        GuardFormula::Atom(idx)
    }

    pub fn literal(idx: usize, negated: bool) -> Self {
        let a = GuardFormula::Atom(idx);
        if negated {
            GuardFormula::Not(Box::new(a))
        } else {
            a
        }
    }

    /// Conjunction that collapses `True`/`False` units.
    pub fn and(a: GuardFormula, b: GuardFormula) -> Self {
        match (a, b) {
            (GuardFormula::False, _) | (_, GuardFormula::False) => GuardFormula::False,
            (GuardFormula::True, b) => b,
            (a, GuardFormula::True) => a,
            (a, b) => GuardFormula::And(Box::new(a), Box::new(b)),
        }
    }

    /// Disjunction that collapses `True`/`False` units.
    pub fn or(a: GuardFormula, b: GuardFormula) -> Self {
        match (a, b) {
            (GuardFormula::True, _) | (_, GuardFormula::True) => GuardFormula::True,
            (GuardFormula::False, b) => b,
            (a, GuardFormula::False) => a,
            (a, b) => GuardFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    /// Conjunction of literals; the empty conjunction is `True`.
    pub fn conjunction(literals: impl IntoIterator<Item = (usize, bool)>) -> Self {
        let mut g = GuardFormula::True;
        for (idx, negated) in literals {
            g = GuardFormula::and(g, GuardFormula::literal(idx, negated));
        }
        g
    }

    /// Truth of the guard on one symbol.
    pub fn satisfied_by(&self, sym: Symbol) -> bool {
        match self {
            GuardFormula::True => true,
            GuardFormula::False => false,
            GuardFormula::Atom(i) => sym.contains(*i),
            GuardFormula::Not(a) => !a.satisfied_by(sym),
            GuardFormula::And(a, b) => a.satisfied_by(sym) && b.satisfied_by(sym),
            GuardFormula::Or(a, b) => a.satisfied_by(sym) || b.satisfied_by(sym),
        }
    }

    /// Bitmask of atoms that occur in the guard.
    pub fn atom_mask(&self) -> u32 {
        match self {
            GuardFormula::True | GuardFormula::False => 0,
            GuardFormula::Atom(i) => 1 << i,
            GuardFormula::Not(a) => a.atom_mask(),
            GuardFormula::And(a, b) | GuardFormula::Or(a, b) => a.atom_mask() | b.atom_mask(),
        }
    }

    /// Satisfying assignments restricted to the guard's own atoms, as
    /// `(values, care)` where `care` is [`Self::atom_mask`].
    pub fn satisfying_terms(&self) -> SatTerms {
        let care = self.atom_mask();
        let bits: Vec<u32> = (0..32).filter(|i| care & (1 << i) != 0).collect();
        let mut values = Vec::new();
        for combo in 0u32..(1 << bits.len()) {
            let mut sym = 0u32;
            for (j, bit) in bits.iter().enumerate() {
                if combo & (1 << j) != 0 {
                    sym |= 1 << bit;
                }
            }
            if self.satisfied_by(Symbol(sym)) {
                values.push(sym);
            }
        }
        SatTerms { care, values }
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.satisfying_terms().values.is_empty()
    }

    /// Build a guard from a propositional AST; temporal operators are
    /// rejected and `Implies` is rewritten as a disjunction.
    pub fn from_ast(ast: &LtlAst, ap: &ApSet) -> Result<Self, GuardError> {
        match ast {
            LtlAst::True => Ok(GuardFormula::True),
            LtlAst::Atom(name) => ap
                .index_of(name)
                .map(GuardFormula::Atom)
                .ok_or_else(|| GuardError::UnknownAtom(name.clone())),
            LtlAst::Not(a) => Ok(GuardFormula::Not(Box::new(Self::from_ast(a, ap)?))),
            LtlAst::And(a, b) => Ok(GuardFormula::And(
                Box::new(Self::from_ast(a, ap)?),
                Box::new(Self::from_ast(b, ap)?),
            )),
            LtlAst::Or(a, b) => Ok(GuardFormula::Or(
                Box::new(Self::from_ast(a, ap)?),
                Box::new(Self::from_ast(b, ap)?),
            )),
            LtlAst::Implies(a, b) => Ok(GuardFormula::Or(
                Box::new(GuardFormula::Not(Box::new(Self::from_ast(a, ap)?))),
                Box::new(Self::from_ast(b, ap)?),
            )),
            LtlAst::Next(_) => Err(GuardError::TemporalOperator("X")),
            LtlAst::Until(_, _) => Err(GuardError::TemporalOperator("U")),
            LtlAst::Eventually(_) => Err(GuardError::TemporalOperator("<>")),
            LtlAst::Always(_) => Err(GuardError::TemporalOperator("[]")),
        }
    }

    pub fn display<'a>(&'a self, ap: &'a ApSet) -> GuardDisplay<'a> {
        GuardDisplay { guard: self, ap }
    }
}

/// Precomputed satisfying-assignment table of a guard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatTerms {
    pub care: u32,
    pub values: Vec<u32>,
}

impl SatTerms {
    /// Minimum Hamming distance from `sym` to a satisfying symbol, or
    /// `None` when the guard is unsatisfiable.
    pub fn distance(&self, sym: Symbol) -> Option<u32> {
        self.values
            .iter()
            .map(|v| ((sym.0 ^ v) & self.care).count_ones())
            .min()
    }
}

/// Minimum number of atom flips taking `sym` to a symbol that satisfies
/// `guard`; `None` when no symbol satisfies it.
///
/// Atoms outside the guard never need flipping, so only assignments over
/// the guard's own atoms are enumerated. The result equals the exhaustive
/// minimum of [`rho`](super::symbols::rho) over all satisfying symbols.
pub fn violation_distance(sym: Symbol, guard: &GuardFormula) -> Option<u32> {
    guard.satisfying_terms().distance(sym)
}

pub struct GuardDisplay<'a> {
    guard: &'a GuardFormula,
    ap: &'a ApSet,
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_guard(f, self.guard, self.ap, 0)
    }
}

// prec: 0 or-level, 1 and-level, 2 unary
fn write_guard(
    f: &mut fmt::Formatter<'_>,
    g: &GuardFormula,
    ap: &ApSet,
    prec: u8,
) -> fmt::Result {
    match g {
        GuardFormula::True => write!(f, "true"),
        GuardFormula::False => write!(f, "!true"),
        GuardFormula::Atom(i) => write!(f, "{}", ap.name(*i)),
        GuardFormula::Not(a) => {
            write!(f, "!")?;
            match **a {
                GuardFormula::And(_, _) | GuardFormula::Or(_, _) => {
                    write!(f, "(")?;
                    write_guard(f, a, ap, 0)?;
                    write!(f, ")")
                }
                _ => write_guard(f, a, ap, 2),
            }
        }
        GuardFormula::And(a, b) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            write_guard(f, a, ap, 2)?;
            write!(f, " && ")?;
            write_guard(f, b, ap, 2)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        GuardFormula::Or(a, b) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            write_guard(f, a, ap, 1)?;
            write!(f, " || ")?;
            write_guard(f, b, ap, 1)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}
