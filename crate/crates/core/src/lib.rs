//! Minimum-violation LTL planning and reach-avoid control synthesis.
//!
//! The pipeline: parse an LTL mission into a Büchi automaton, plan a
//! lasso path through the automaton-workspace product while charging a
//! violation cost for infeasible guards, decompose the lasso into
//! reach-avoid sub-tasks, and train per-task controllers whose
//! concatenation tracks the plan.

pub mod cli;
pub mod decomposition;
pub mod environment;
pub mod ltl;
pub mod planner;
pub mod policy_search;
pub mod workspace;
