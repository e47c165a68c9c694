//! Nondeterministic Büchi automata over atomic-proposition symbols.

use super::guard::{GuardFormula, SatTerms};
use super::symbols::{ApSet, Symbol};
use serde_json::json;
use std::collections::VecDeque;

pub type StateId = usize;

/// Automaton edge; the satisfying-assignment table is precomputed so the
/// planner can score violation distances without re-enumerating.
#[derive(Debug, Clone)]
pub struct NbaEdge {
    pub src: StateId,
    pub dst: StateId,
    pub guard: GuardFormula,
    terms: SatTerms,
}

impl NbaEdge {
    /// True when the guard holds of `sym`.
    pub fn enabled(&self, sym: Symbol) -> bool {
        self.violation(sym) == 0
    }

    /// Violation distance of firing this edge under `sym`.
    pub fn violation(&self, sym: Symbol) -> u32 {
        self.terms
            .distance(sym)
            .expect("unsatisfiable guards are dropped at construction")
    }
}

/// Nondeterministic Büchi automaton. Edges with unsatisfiable guards are
/// dropped and parallel edges merged at construction; states are expected
/// to be reachable when built through [`translate`](super::translate).
#[derive(Debug, Clone)]
pub struct Nba {
    ap: ApSet,
    n_states: usize,
    initial: Vec<StateId>,
    accepting: Vec<bool>,
    edges: Vec<NbaEdge>,
    out: Vec<Vec<usize>>,
    into: Vec<Vec<usize>>,
}

impl Nba {
    pub fn new(
        ap: ApSet,
        n_states: usize,
        initial: Vec<StateId>,
        accepting: Vec<StateId>,
        edges: Vec<(StateId, StateId, GuardFormula)>,
    ) -> Nba {
        assert!(!initial.is_empty(), "automaton needs an initial state");
        for &q in initial.iter().chain(accepting.iter()) {
            assert!(q < n_states, "state {q} out of range {n_states}");
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        let mut acc = vec![false; n_states];
        for &q in &accepting {
            acc[q] = true;
        }

        let mut merged: Vec<Option<GuardFormula>> = Vec::new();
        let mut slot: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        for (src, dst, guard) in edges {
            assert!(src < n_states && dst < n_states, "edge out of range");
            match slot.get(&(src, dst)) {
                Some(&i) => {
                    let prev = merged[i].take().unwrap();
                    merged[i] = Some(GuardFormula::or(prev, guard));
                }
                None => {
                    slot.insert((src, dst), merged.len());
                    order.push((src, dst));
                    merged.push(Some(guard));
                }
            }
        }
        let mut final_edges: Vec<NbaEdge> = Vec::new();
        for ((src, dst), guard) in order.into_iter().zip(merged) {
            let guard = guard.unwrap();
            let terms = guard.satisfying_terms();
            if terms.values.is_empty() {
                continue;
            }
            final_edges.push(NbaEdge {
                src,
                dst,
                guard,
                terms,
            });
        }
        final_edges.sort_by_key(|e| (e.src, e.dst));
        let mut out = vec![Vec::new(); n_states];
        let mut into = vec![Vec::new(); n_states];
        for (i, e) in final_edges.iter().enumerate() {
            out[e.src].push(i);
            into[e.dst].push(i);
        }
        Nba {
            ap,
            n_states,
            initial,
            accepting: acc,
            edges: final_edges,
            out,
            into,
        }
    }

    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<StateId> {
        (0..self.n_states).filter(|&q| self.accepting[q]).collect()
    }

    pub fn edges(&self) -> &[NbaEdge] {
        &self.edges
    }

    /// Indices into [`edges`](Self::edges) of edges leaving `q`.
    pub fn out_edges(&self, q: StateId) -> &[usize] {
        &self.out[q]
    }

    /// Indices into [`edges`](Self::edges) of edges entering `q`.
    pub fn in_edges(&self, q: StateId) -> &[usize] {
        &self.into[q]
    }

    /// Edges leaving `q`.
    pub fn edges_from(&self, q: StateId) -> impl Iterator<Item = &NbaEdge> {
        self.out[q].iter().map(|&i| &self.edges[i])
    }

    /// The edge `q -> q'`, if present.
    pub fn edge_between(&self, q: StateId, q2: StateId) -> Option<&NbaEdge> {
        self.out[q]
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.dst == q2)
    }

    /// States reachable from `q` in one step under `sym`.
    pub fn successors(&self, q: StateId, sym: Symbol) -> impl Iterator<Item = StateId> + '_ {
        self.out[q]
            .iter()
            .map(|&i| &self.edges[i])
            .filter(move |e| e.enabled(sym))
            .map(|e| e.dst)
    }

    /// Whether the automaton accepts the ω-word `prefix · cycle^ω`.
    ///
    /// Checked on the product of the automaton with the lasso positions: a
    /// reachable accepting product node inside the cycle that can return
    /// to itself witnesses an accepting run.
    pub fn accepts_lasso(&self, prefix: &[Symbol], cycle: &[Symbol]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let m = prefix.len();
        let t = m + cycle.len();
        let sym = |i: usize| {
            if i < m {
                prefix[i]
            } else {
                cycle[i - m]
            }
        };
        let succ = |i: usize| if i + 1 < t { i + 1 } else { m };
        let idx = |q: usize, i: usize| q * t + i;

        let mut reach = vec![false; self.n_states * t];
        let mut queue = VecDeque::new();
        for &q0 in &self.initial {
            reach[idx(q0, 0)] = true;
            queue.push_back((q0, 0));
        }
        while let Some((q, i)) = queue.pop_front() {
            for d in self.successors(q, sym(i)) {
                let j = succ(i);
                if !reach[idx(d, j)] {
                    reach[idx(d, j)] = true;
                    queue.push_back((d, j));
                }
            }
        }

        for q in 0..self.n_states {
            if !self.accepting[q] {
                continue;
            }
            for i in m..t {
                if !reach[idx(q, i)] {
                    continue;
                }
                if self.product_node_on_cycle(q, i, m, t, &sym, &succ) {
                    return true;
                }
            }
        }
        false
    }

    fn product_node_on_cycle(
        &self,
        q0: usize,
        i0: usize,
        _m: usize,
        t: usize,
        sym: &dyn Fn(usize) -> Symbol,
        succ: &dyn Fn(usize) -> usize,
    ) -> bool {
        let idx = |q: usize, i: usize| q * t + i;
        let mut seen = vec![false; self.n_states * t];
        let mut stack: Vec<(usize, usize)> = self
            .successors(q0, sym(i0))
            .map(|d| (d, succ(i0)))
            .collect();
        while let Some((q, i)) = stack.pop() {
            if q == q0 && i == i0 {
                return true;
            }
            if seen[idx(q, i)] {
                continue;
            }
            seen[idx(q, i)] = true;
            stack.extend(self.successors(q, sym(i)).map(|d| (d, succ(i))));
        }
        false
    }

    /// Export with guards rendered in the ASCII formula syntax.
    pub fn to_json(&self, formula: &str) -> serde_json::Value {
        json!({
            "formula": formula,
            "atoms": self.ap.names(),
            "states": self.n_states,
            "initial": self.initial,
            "accepting": self.accepting_states(),
            "edges": self.edges.iter().map(|e| json!({
                "src": e.src,
                "guard": e.guard.display(&self.ap).to_string(),
                "dst": e.dst,
            })).collect::<Vec<_>>(),
        })
    }
}
