//! LTL frontend: parsing, Büchi translation, and violation machinery.

pub mod ast;
pub mod guard;
pub mod nba;
pub mod parser;
pub mod semantics;
pub mod symbols;
mod tableau;

pub use ast::LtlAst;
pub use guard::{violation_distance, GuardError, GuardFormula};
pub use nba::{Nba, NbaEdge, StateId};
pub use parser::{parse_ltl, parse_ltl_free, LtlParseError};
pub use symbols::{eval_symbol, rho, ApSet, Symbol, MAX_ATOMS};
pub use tableau::translate;

/// Frontend warnings for a parsed formula. The next operator is accepted
/// but makes little sense against continuous trajectories, so its use is
/// reported rather than rejected.
pub fn formula_warnings(ast: &LtlAst) -> Vec<String> {
    let mut w = Vec::new();
    if ast.contains_next() {
        w.push(
            "formula uses the next operator X; its single-step semantics is kept \
             as-is, which rarely matches continuous-time intent"
                .to_string(),
        );
    }
    w
}
