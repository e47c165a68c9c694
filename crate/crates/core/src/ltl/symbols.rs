//! Alphabet symbols as subsets of the atomic propositions.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Maximum number of atomic propositions per automaton.
pub const MAX_ATOMS: usize = 24;

/// Ordered set of atomic proposition names; declaration order fixes the
/// bit layout of every [`Symbol`] built against it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApSet {
    names: Vec<String>,
}

impl ApSet {
    pub fn new(names: Vec<String>) -> Self {
        assert!(
            names.len() <= MAX_ATOMS,
            "at most {MAX_ATOMS} atomic propositions are supported, got {}",
            names.len()
        );
        for (i, a) in names.iter().enumerate() {
            assert!(
                !names[..i].contains(a),
                "duplicate atomic proposition {a:?}"
            );
        }
        ApSet { names }
    }

    pub fn from_strs(names: &[&str]) -> Self {
        Self::new(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Symbol containing exactly the named atoms.
    ///
    /// Panics on a name outside the set; inputs here come from code, not users.
    pub fn symbol(&self, names: &[&str]) -> Symbol {
        let mut bits = 0u32;
        for n in names {
            let idx = self
                .index_of(n)
                .unwrap_or_else(|| panic!("unknown atomic proposition {n:?}"));
            bits |= 1 << idx;
        }
        Symbol(bits)
    }

    /// All `2^M` symbols in increasing bit order.
    pub fn all_symbols(&self) -> impl Iterator<Item = Symbol> {
        (0u32..(1u32 << self.len())).map(Symbol)
    }
}

/// One alphabet letter: the subset of atoms true at an instant, packed as a
/// bitmask in [`ApSet`] declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Symbol(pub u32);

impl Symbol {
    pub const EMPTY: Symbol = Symbol(0);

    pub fn contains(self, atom_idx: usize) -> bool {
        self.0 & (1 << atom_idx) != 0
    }

    pub fn with(self, atom_idx: usize) -> Symbol {
        Symbol(self.0 | (1 << atom_idx))
    }

    pub fn without(self, atom_idx: usize) -> Symbol {
        Symbol(self.0 & !(1 << atom_idx))
    }

    /// Number of atoms in the symbol.
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn display<'a>(self, ap: &'a ApSet) -> SymbolDisplay<'a> {
        SymbolDisplay { sym: self, ap }
    }
}

pub struct SymbolDisplay<'a> {
    sym: Symbol,
    ap: &'a ApSet,
}

impl fmt::Display for SymbolDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in 0..self.ap.len() {
            if self.sym.contains(i) {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.ap.name(i))?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}

/// Bit-vector of a symbol in AP declaration order: entry `i` is 1 iff the
/// `i`-th proposition holds.
pub fn eval_symbol(sym: Symbol, ap: &ApSet) -> Vec<u8> {
    (0..ap.len()).map(|i| sym.contains(i) as u8).collect()
}

/// Symmetric-difference distance between two symbols, equal to the L1
/// distance between their bit-vectors.
pub fn rho(a: Symbol, b: Symbol) -> u32 {
    (a.0 ^ b.0).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_symbol_follows_declaration_order() {
        let ap = ApSet::from_strs(&["O", "G1", "G2"]);
        let sym = ap.symbol(&["G2", "O"]);
        assert_eq!(eval_symbol(sym, &ap), vec![1, 0, 1]);
        assert_eq!(eval_symbol(Symbol::EMPTY, &ap), vec![0, 0, 0]);
    }

    #[test]
    fn rho_counts_symmetric_difference() {
        let ap = ApSet::from_strs(&["a", "b", "c"]);
        let s1 = ap.symbol(&["a", "b"]);
        let s2 = ap.symbol(&["b", "c"]);
        assert_eq!(rho(s1, s2), 2);
        assert_eq!(rho(s1, s1), 0);
        assert_eq!(rho(Symbol::EMPTY, ap.symbol(&["a", "b", "c"])), 3);
    }

    #[test]
    #[should_panic(expected = "duplicate")]
    fn duplicate_atoms_rejected() {
        ApSet::from_strs(&["a", "a"]);
    }

    proptest! {
        #[test]
        fn rho_is_a_metric(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
            let (a, b, c) = (Symbol(a), Symbol(b), Symbol(c));
            prop_assert_eq!(rho(a, b), rho(b, a));
            prop_assert_eq!(rho(a, b) == 0, a == b);
            prop_assert!(rho(a, c) <= rho(a, b) + rho(b, c));
        }

        #[test]
        fn rho_matches_bitvector_l1(a in 0u32..256, b in 0u32..256) {
            let ap = ApSet::from_strs(&["p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"]);
            let va = eval_symbol(Symbol(a), &ap);
            let vb = eval_symbol(Symbol(b), &ap);
            let l1: u32 = va.iter().zip(&vb).map(|(x, y)| (*x as i32 - *y as i32).unsigned_abs()).sum();
            prop_assert_eq!(rho(Symbol(a), Symbol(b)), l1);
        }
    }
}
