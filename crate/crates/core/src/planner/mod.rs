//! Sampling-based search for minimum-violation lasso plans over the
//! relaxed product of a labeled workspace and a Buchi automaton.

mod oracle;
mod tree;

pub use oracle::grid_oracle_plan;
pub use tree::{GridIndex, Tree, TreeNode};

use crate::ltl::{Nba, StateId};
use crate::workspace::{Point, Workspace};
use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// State of the relaxed product: a workspace point plus an automaton state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductState {
    pub x: Point,
    pub q: StateId,
}

impl ProductState {
    pub fn new(x: Point, q: StateId) -> ProductState {
        ProductState { x, q }
    }
}

/// Cost of one product transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    pub geom: f64,
    pub viol: u32,
}

/// Checks a single relaxed-product transition. Returns `None` when the
/// geometric move fails the workspace transition relation or the automaton
/// has no edge between the two states. The violation is charged against
/// the label of the source point.
pub fn product_edge(
    from: ProductState,
    to: ProductState,
    nba: &Nba,
    ws: &Workspace,
    eta: f64,
) -> Option<EdgeCost> {
    if !ws.gwts_transition(from.x, to.x, eta) {
        return None;
    }
    let edge = nba.edge_between(from.q, to.q)?;
    let label = ws.label_of(from.x).ok()?;
    Some(EdgeCost {
        geom: from.x.dist(to.x),
        viol: edge.violation(label),
    })
}

/// Search parameters for `plan_lasso`.
#[derive(Debug, Clone, Copy)]
pub struct PlanParams {
    /// Step bound of the workspace transition system.
    pub eta: f64,
    /// Weight multiplying suffix violation in tree weights.
    pub beta: f64,
    /// Iteration budget for the prefix tree; each suffix tree receives
    /// a `1/N_ROOTS` share.
    pub max_iters: usize,
    pub seed: u64,
    /// Radius for closing the suffix cycle back onto its root.
    pub goal_tolerance: f64,
    /// Reject every product transition with positive violation, turning
    /// the search into a hard-constraint planner that fails on infeasible
    /// specifications instead of relaxing them.
    pub forbid_violation: bool,
}

const N_ROOTS: usize = 3;
const GOAL_BIAS: f64 = 0.1;

impl PlanParams {
    /// Parameters with the default weighting and closure tolerance for
    /// the given workspace.
    pub fn for_workspace(ws: &Workspace, eta: f64, max_iters: usize, seed: u64) -> PlanParams {
        PlanParams {
            eta,
            beta: 1e4 * ws.diameter(),
            max_iters,
            seed,
            goal_tolerance: eta / 10.0,
            forbid_violation: false,
        }
    }
}

/// A lasso over the product: a finite prefix from the initial state to an
/// accepting state, then a cycle. The suffix list holds the states after
/// the accepting state; its last element is the accepting state itself,
/// and the first element is revisited after the last.
#[derive(Debug, Clone)]
pub struct LassoPlan {
    pub prefix: Vec<ProductState>,
    pub suffix: Vec<ProductState>,
    pub prefix_violation: u64,
    pub suffix_violation: u64,
    pub prefix_length: f64,
    pub suffix_length: f64,
    pub seed: Option<u64>,
    pub iters: usize,
}

impl LassoPlan {
    /// Aggregate violation with the suffix weighted by `beta`.
    pub fn total_violation(&self, beta: f64) -> f64 {
        self.prefix_violation as f64 + beta * self.suffix_violation as f64
    }

    /// Key for comparing plans: suffix violation, then prefix violation,
    /// then total geometric length. For any sufficiently large weighting
    /// this matches the aggregate-violation order.
    pub fn order_key(&self) -> (u64, u64, f64) {
        (
            self.suffix_violation,
            self.prefix_violation,
            self.prefix_length + self.suffix_length,
        )
    }

    /// Replays every transition and the stored costs; errors describe the
    /// first inconsistency found.
    pub fn validate(&self, ws: &Workspace, nba: &Nba, eta: f64) -> Result<(), String> {
        if self.prefix.is_empty() {
            return Err("empty prefix".into());
        }
        if self.suffix.is_empty() {
            return Err("empty suffix".into());
        }
        let first = self.prefix[0];
        if !nba.initial().contains(&first.q) {
            return Err(format!("prefix starts at non-initial automaton state {}", first.q));
        }
        if first.x.dist(ws.init()) > 1e-9 {
            return Err("prefix does not start at the workspace initial point".into());
        }
        let root = *self.prefix.last().unwrap();
        if !nba.is_accepting(root.q) {
            return Err(format!("prefix ends at non-accepting automaton state {}", root.q));
        }
        let back = *self.suffix.last().unwrap();
        if back != root {
            return Err("suffix does not end at the accepting prefix state".into());
        }
        let mut pv: u64 = 0;
        let mut pl = 0.0;
        for w in self.prefix.windows(2) {
            let c = product_edge(w[0], w[1], nba, ws, eta)
                .ok_or_else(|| format!("invalid prefix transition at q={}", w[0].q))?;
            pv += c.viol as u64;
            pl += c.geom;
        }
        let mut sv: u64 = 0;
        let mut sl = 0.0;
        for w in self.suffix.windows(2) {
            let c = product_edge(w[0], w[1], nba, ws, eta)
                .ok_or_else(|| format!("invalid suffix transition at q={}", w[0].q))?;
            sv += c.viol as u64;
            sl += c.geom;
        }
        let wrap = product_edge(back, self.suffix[0], nba, ws, eta)
            .ok_or("invalid cycle-closing transition")?;
        sv += wrap.viol as u64;
        sl += wrap.geom;
        if pv != self.prefix_violation {
            return Err(format!(
                "prefix violation mismatch: stored {} recomputed {}",
                self.prefix_violation, pv
            ));
        }
        if sv != self.suffix_violation {
            return Err(format!(
                "suffix violation mismatch: stored {} recomputed {}",
                self.suffix_violation, sv
            ));
        }
        if (pl - self.prefix_length).abs() > 1e-6 * (1.0 + pl) {
            return Err("prefix length mismatch".into());
        }
        if (sl - self.suffix_length).abs() > 1e-6 * (1.0 + sl) {
            return Err("suffix length mismatch".into());
        }
        Ok(())
    }

    pub fn to_json(&self, dim: usize) -> serde_json::Value {
        let state = |s: &ProductState| {
            serde_json::json!({
                "x": s.x.coords(dim),
                "q": s.q,
            })
        };
        serde_json::json!({
            "prefix": self.prefix.iter().map(state).collect::<Vec<_>>(),
            "suffix": self.suffix.iter().map(state).collect::<Vec<_>>(),
            "violation": {"prefix": self.prefix_violation, "suffix": self.suffix_violation},
            "length": {"prefix": self.prefix_length, "suffix": self.suffix_length},
            "seed": self.seed,
            "iters": self.iters,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<LassoPlan, String> {
        let states = |key: &str| -> Result<Vec<ProductState>, String> {
            v.get(key)
                .and_then(|s| s.as_array())
                .ok_or_else(|| format!("missing {key}"))?
                .iter()
                .map(|s| {
                    let xs = s
                        .get("x")
                        .and_then(|x| x.as_array())
                        .ok_or("state missing x")?;
                    if xs.len() < 2 || xs.len() > 3 {
                        return Err("state x must have 2 or 3 coordinates".into());
                    }
                    let mut c = [0.0; 3];
                    for (i, xv) in xs.iter().enumerate() {
                        c[i] = xv.as_f64().ok_or("non-numeric coordinate")?;
                    }
                    let q = s
                        .get("q")
                        .and_then(|q| q.as_u64())
                        .ok_or("state missing q")? as StateId;
                    Ok(ProductState::new(Point(c), q))
                })
                .collect()
        };
        let num = |a: &str, b: &str| -> Result<f64, String> {
            v.get(a)
                .and_then(|o| o.get(b))
                .and_then(|n| n.as_f64())
                .ok_or_else(|| format!("missing {a}.{b}"))
        };
        Ok(LassoPlan {
            prefix: states("prefix")?,
            suffix: states("suffix")?,
            prefix_violation: num("violation", "prefix")? as u64,
            suffix_violation: num("violation", "suffix")? as u64,
            prefix_length: num("length", "prefix")?,
            suffix_length: num("length", "suffix")?,
            seed: v.get("seed").and_then(|s| s.as_u64()),
            iters: v.get("iters").and_then(|s| s.as_u64()).unwrap_or(0) as usize,
        })
    }
}

/// Failure modes of `plan_lasso`.
#[derive(Debug, Clone, thiserror::Error)]
pub enum PlanError {
    #[error("no accepting automaton state reached; states reached: {reached:?}")]
    NoPlan { reached: Vec<StateId> },
    #[error("no suffix cycle closed from accepting states {roots:?}")]
    NoCycle { roots: Vec<StateId> },
    #[error("workspace rejected the initial state: {0}")]
    BadStart(String),
}

/// Grows a violation-weighted random tree over the product and extracts
/// the best lasso found. Deterministic for a fixed seed.
pub fn plan_lasso(ws: &Workspace, nba: &Nba, params: &PlanParams) -> Result<LassoPlan, PlanError> {
    assert!(params.eta > 0.0, "eta must be positive");
    assert!(params.beta > 0.0, "beta must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init_label = ws
        .label_of(ws.init())
        .map_err(|e| PlanError::BadStart(e.to_string()))?;

    let mut prefix_tree = Tree::new(params.eta, Point(ws.bounds().0 .0), ws.dimension(), params.beta);
    for &q0 in nba.initial() {
        prefix_tree.add_root(ProductState::new(ws.init(), q0), init_label);
    }
    seed_stationary(&mut prefix_tree, ws, nba, params.eta, params.forbid_violation);
    grow_tree(&mut prefix_tree, ws, nba, params, &mut rng, params.max_iters, None);

    let mut accepting: Vec<usize> = (0..prefix_tree.nodes.len())
        .filter(|&i| nba.is_accepting(prefix_tree.nodes[i].state.q))
        .collect();
    if accepting.is_empty() {
        let mut reached: Vec<StateId> = prefix_tree.nodes.iter().map(|n| n.state.q).collect();
        reached.sort_unstable();
        reached.dedup();
        return Err(PlanError::NoPlan { reached });
    }
    accepting.sort_by(|&a, &b| {
        let na = &prefix_tree.nodes[a];
        let nb = &prefix_tree.nodes[b];
        na.viol_cost
            .total_cmp(&nb.viol_cost)
            .then(na.geom_cost.total_cmp(&nb.geom_cost))
            .then(a.cmp(&b))
    });
    accepting.truncate(N_ROOTS);

    let suffix_budget = params.max_iters.div_ceil(N_ROOTS);
    let mut best: Option<LassoPlan> = None;
    let mut root_qs = Vec::new();
    for &root_id in &accepting {
        let root = prefix_tree.nodes[root_id].state;
        root_qs.push(root.q);
        let root_label = prefix_tree.nodes[root_id].label;
        let mut suffix_tree =
            Tree::new(params.eta, Point(ws.bounds().0 .0), ws.dimension(), params.beta);
        suffix_tree.add_root(root, root_label);
        let seeds =
            seed_stationary(&mut suffix_tree, ws, nba, params.eta, params.forbid_violation);
        let mut closers: Vec<usize> =
            grow_tree(&mut suffix_tree, ws, nba, params, &mut rng, suffix_budget, Some(root));
        // The root and its stationary chain close trivially when the
        // automaton allows it; product_edge below decides that.
        closers.push(0);
        closers.extend(seeds);
        closers.sort_unstable();
        closers.dedup();

        let mut best_close: Option<(u64, f64, usize, EdgeCost)> = None;
        for &cid in &closers {
            let node = &suffix_tree.nodes[cid];
            if node.state.x.dist(root.x) > params.goal_tolerance {
                continue;
            }
            let Some(edge) = product_edge(node.state, root, nba, ws, params.eta) else {
                continue;
            };
            if params.forbid_violation && edge.viol > 0 {
                continue;
            }
            let cv = to_violation_units(node.viol_cost) + edge.viol as u64;
            let cl = node.geom_cost + edge.geom;
            let better = match &best_close {
                None => true,
                Some((bv, bl, bid, _)) => {
                    (cv, cl).0 < *bv
                        || (cv == *bv && cl < *bl - 1e-12)
                        || (cv == *bv && (cl - bl).abs() <= 1e-12 && cid < *bid)
                }
            };
            if better {
                best_close = Some((cv, cl, cid, edge));
            }
        }
        let Some((cycle_viol, cycle_len, close_id, close_edge)) = best_close else {
            continue;
        };

        let prefix = prefix_tree.path_to(root_id);
        let mut suffix = suffix_tree.path_to(close_id);
        suffix.remove(0);
        suffix.push(root);
        let plan = LassoPlan {
            prefix,
            suffix,
            prefix_violation: to_violation_units(prefix_tree.nodes[root_id].viol_cost),
            suffix_violation: cycle_viol,
            prefix_length: prefix_tree.nodes[root_id].geom_cost,
            suffix_length: cycle_len,
            seed: Some(params.seed),
            iters: params.max_iters,
        };
        debug_assert_eq!(close_edge.viol as u64 + to_violation_units(suffix_tree.nodes[close_id].viol_cost), plan.suffix_violation);
        let replace = match &best {
            None => true,
            Some(b) => lex_less(plan.order_key(), b.order_key()),
        };
        if replace {
            best = Some(plan);
        }
    }

    match best {
        Some(plan) => {
            debug_assert!(plan.validate(ws, nba, params.eta).is_ok());
            Ok(plan)
        }
        None => {
            root_qs.sort_unstable();
            root_qs.dedup();
            Err(PlanError::NoCycle { roots: root_qs })
        }
    }
}

fn lex_less(a: (u64, u64, f64), b: (u64, u64, f64)) -> bool {
    a.0 < b.0
        || (a.0 == b.0 && a.1 < b.1)
        || (a.0 == b.0 && a.1 == b.1 && a.2 < b.2 - 1e-12 * (1.0 + b.2.abs()))
}

/// Violation sums are integral by construction; recover the integer.
fn to_violation_units(v: f64) -> u64 {
    let r = v.round();
    debug_assert!((v - r).abs() < 1e-6, "violation sum drifted from integer: {v}");
    r as u64
}

/// Adds nodes for every automaton state reachable from the tree roots by
/// transitions that stay at the root point, each with its cheapest
/// violation chain. Covers plans that switch automaton states without
/// moving, which sampling alone cannot produce.
fn seed_stationary(
    tree: &mut Tree,
    ws: &Workspace,
    nba: &Nba,
    eta: f64,
    forbid_violation: bool,
) -> Vec<usize> {
    let x = tree.nodes[0].state.x;
    if !ws.gwts_transition(x, x, eta) {
        return Vec::new();
    }
    let label = tree.nodes[0].label;
    let mut owner: std::collections::BTreeMap<StateId, usize> = tree
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.state.q, i))
        .collect();

    // Cheapest stationary violation to every automaton state.
    let mut dist: std::collections::BTreeMap<StateId, u64> =
        owner.keys().map(|&q| (q, 0u64)).collect();
    let mut pred: std::collections::BTreeMap<StateId, StateId> = Default::default();
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, StateId)>> =
        owner.keys().map(|&q| std::cmp::Reverse((0u64, q))).collect();
    let mut settled = Vec::new();
    while let Some(std::cmp::Reverse((viol, q))) = heap.pop() {
        if dist.get(&q) != Some(&viol) {
            continue;
        }
        settled.push(q);
        for e in nba.edges_from(q) {
            let step_viol = e.violation(label);
            if forbid_violation && step_viol > 0 {
                continue;
            }
            let nv = viol + step_viol as u64;
            if dist.get(&e.dst).is_none_or(|&cur| nv < cur) {
                dist.insert(e.dst, nv);
                pred.insert(e.dst, q);
                heap.push(std::cmp::Reverse((nv, e.dst)));
            }
        }
    }

    let mut added = Vec::new();
    for q in settled {
        if owner.contains_key(&q) {
            continue;
        }
        let p = pred[&q];
        let parent = owner[&p];
        let id = tree.add_node(
            ProductState::new(x, q),
            label,
            Some(parent),
            tree.nodes[parent].geom_cost,
            dist[&q] as f64,
        );
        owner.insert(q, id);
        added.push(id);
    }
    added
}

/// Runs `iters` extension rounds. With `cycle_root` set, samples are also
/// biased toward the root point and the returned list holds ids of nodes
/// that landed within the closure tolerance of it.
fn grow_tree(
    tree: &mut Tree,
    ws: &Workspace,
    nba: &Nba,
    params: &PlanParams,
    rng: &mut ChaCha8Rng,
    iters: usize,
    cycle_root: Option<ProductState>,
) -> Vec<usize> {
    let dims = ws.dimension();
    let diam = ws.diameter();
    let regions: Vec<crate::workspace::Shape> =
        ws.regions().map(|(_, s)| s.clone()).collect();
    let mut closers = Vec::new();

    // With violating edges forbidden, an automaton state's subtree can only
    // advance when a sample lands inside its near-radius: the globally
    // nearest node almost always sits in the layer that already covers the
    // space, so later layers crawl instead of being steered. Give each layer
    // its own index and steer a randomly chosen one per iteration.
    let mut layers: Option<std::collections::BTreeMap<StateId, (GridIndex, Vec<usize>)>> =
        params.forbid_violation.then(|| {
            let origin = ws.bounds().0;
            let mut by_q: std::collections::BTreeMap<StateId, (GridIndex, Vec<usize>)> =
                std::collections::BTreeMap::new();
            for (id, node) in tree.nodes.iter().enumerate() {
                let (idx, ids) = by_q
                    .entry(node.state.q)
                    .or_insert_with(|| (GridIndex::new(params.eta, origin, dims), Vec::new()));
                idx.insert(node.state.x);
                ids.push(id);
            }
            by_q
        });

    for _ in 0..iters {
        let x_rand = sample_point(ws, &regions, cycle_root, rng);
        let nearest = match &layers {
            Some(by_q) => {
                let (idx, ids) = by_q
                    .values()
                    .nth(rng.random_range(0..by_q.len()))
                    .expect("tree roots populate at least one layer");
                let Some(local) = idx.nearest(x_rand) else {
                    continue;
                };
                ids[local]
            }
            None => {
                let Some(id) = tree.index.nearest(x_rand) else {
                    continue;
                };
                id
            }
        };
        let x_near = tree.nodes[nearest].state.x;
        let d = x_near.dist(x_rand);
        let x_new = if d <= params.eta {
            x_rand
        } else {
            x_near.lerp(x_rand, params.eta / d)
        };
        if x_new.dist(x_near) <= 1e-12 {
            continue;
        }

        let n = tree.nodes.len() as f64;
        let radius = if n > 1.0 {
            (2.0 * diam * ((n.ln()) / n).powf(1.0 / dims as f64)).min(params.eta)
        } else {
            0.0
        };
        let mut near = tree.index.near(x_new, radius);
        if !near.contains(&nearest) {
            near.push(nearest);
        }

        // Best parent per target automaton state, over all near nodes and
        // all automaton edges out of their states. The workspace transition
        // relation is symmetric, so passing nodes are kept for the rewire
        // pass below instead of re-testing every pair.
        let mut per_q: std::collections::BTreeMap<StateId, (f64, usize, f64, u32)> =
            std::collections::BTreeMap::new();
        let mut passable: Vec<(usize, f64)> = Vec::with_capacity(near.len());
        for &m in &near {
            let mn = &tree.nodes[m];
            if !ws.gwts_transition(mn.state.x, x_new, params.eta) {
                continue;
            }
            let step = mn.state.x.dist(x_new);
            passable.push((m, step));
            for e in nba.edges_from(mn.state.q) {
                let viol = e.violation(mn.label);
                if params.forbid_violation && viol > 0 {
                    continue;
                }
                let weight = mn.weight + step + tree.beta * viol as f64;
                let cand = (weight, m, step, viol);
                per_q
                    .entry(e.dst)
                    .and_modify(|cur| {
                        if weight < cur.0 - 1e-12 * (1.0 + cur.0)
                            || ((weight - cur.0).abs() <= 1e-12 * (1.0 + cur.0) && m < cur.1)
                        {
                            *cur = cand;
                        }
                    })
                    .or_insert(cand);
            }
        }
        if per_q.is_empty() {
            continue;
        }

        let Ok(new_label) = ws.label_of(x_new) else {
            continue;
        };
        let mut added = Vec::new();
        for (q, (_, parent, step, viol)) in &per_q {
            let pg = tree.nodes[*parent].geom_cost;
            let pv = tree.nodes[*parent].viol_cost;
            let id = tree.add_node(
                ProductState::new(x_new, *q),
                new_label,
                Some(*parent),
                pg + step,
                pv + *viol as f64,
            );
            added.push(id);
            if let Some(by_q) = &mut layers {
                let (idx, ids) = by_q
                    .entry(*q)
                    .or_insert_with(|| (GridIndex::new(params.eta, ws.bounds().0, dims), Vec::new()));
                idx.insert(x_new);
                ids.push(id);
            }
            if let Some(root) = cycle_root {
                if x_new.dist(root.x) <= params.goal_tolerance
                    && nba.edge_between(*q, root.q).is_some()
                {
                    closers.push(id);
                }
            }
        }

        // Rewire: try each fresh node as a parent for the near set. Fresh
        // nodes all sit at x_new, so the geometric checks done above cover
        // every pair here.
        for &w in &added {
            let wn_state = tree.nodes[w].state;
            let wn_label = tree.nodes[w].label;
            let wn_weight = tree.nodes[w].weight;
            for &(m, step) in &passable {
                if m == w {
                    continue;
                }
                let m_state = tree.nodes[m].state;
                let Some(e) = nba.edge_between(wn_state.q, m_state.q) else {
                    continue;
                };
                let viol = e.violation(wn_label);
                if params.forbid_violation && viol > 0 {
                    continue;
                }
                let cand = wn_weight + step + tree.beta * viol as f64;
                if cand < tree.nodes[m].weight - 1e-9 * (1.0 + tree.nodes[m].weight) {
                    tree.rewire(m, w, step, viol as f64, nba, ws, params.eta);
                }
            }
        }
    }
    closers
}

fn sample_point(
    ws: &Workspace,
    regions: &[crate::workspace::Shape],
    cycle_root: Option<ProductState>,
    rng: &mut ChaCha8Rng,
) -> Point {
    let roll: f64 = rng.random();
    if let Some(root) = cycle_root {
        if roll < GOAL_BIAS {
            return root.x;
        }
        if roll < 2.0 * GOAL_BIAS && !regions.is_empty() {
            let shape = regions.choose(rng).expect("non-empty region list");
            return shape.sample(ws.dimension(), rng);
        }
        return ws.sample_bounds(rng);
    }
    if roll < GOAL_BIAS && !regions.is_empty() {
        let shape = regions.choose(rng).expect("non-empty region list");
        return shape.sample(ws.dimension(), rng);
    }
    ws.sample_bounds(rng)
}
