//! Exhaustive lasso search on a lattice discretization of the workspace.
//! Serves as a reference answer for the sampling planner on small scenes.

use super::{LassoPlan, PlanError, ProductState};
use crate::ltl::{Nba, StateId, Symbol};
use crate::workspace::{Point, Workspace};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    viol: u64,
    len: f64,
}

impl Cost {
    const ZERO: Cost = Cost { viol: 0, len: 0.0 };

    fn plus(self, viol: u32, len: f64) -> Cost {
        Cost {
            viol: self.viol + viol as u64,
            len: self.len + len,
        }
    }

    fn cmp_lex(&self, o: &Cost) -> Ordering {
        self.viol.cmp(&o.viol).then(self.len.total_cmp(&o.len))
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: Cost,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so the binary heap pops the smallest cost first.
        other
            .cost
            .cmp_lex(&self.cost)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Product graph over lattice cell centers plus the exact initial point.
struct ProductGrid<'a> {
    nba: &'a Nba,
    nq: usize,
    points: Vec<Point>,
    labels: Vec<Symbol>,
    /// Outgoing geometric moves per node, self-move first with length 0.
    geom_out: Vec<Vec<(usize, f64)>>,
    /// Incoming geometric moves per node.
    geom_in: Vec<Vec<(usize, f64)>>,
    init_node: usize,
}

impl<'a> ProductGrid<'a> {
    fn pid(&self, g: usize, q: StateId) -> usize {
        g * self.nq + q
    }

    fn n_product(&self) -> usize {
        self.points.len() * self.nq
    }

    /// Lexicographic Dijkstra from the given sources. Stops early once the
    /// frontier cost alone rules out improving on `budget`.
    fn dijkstra(
        &self,
        sources: &[usize],
        budget: Option<&dyn Fn(&Cost) -> bool>,
    ) -> (Vec<Option<Cost>>, Vec<Option<usize>>) {
        let mut dist: Vec<Option<Cost>> = vec![None; self.n_product()];
        let mut pred: Vec<Option<usize>> = vec![None; self.n_product()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = Some(Cost::ZERO);
            heap.push(HeapEntry {
                cost: Cost::ZERO,
                node: s,
            });
        }
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            match dist[node] {
                Some(d) if d.cmp_lex(&cost) == Ordering::Less => continue,
                _ => {}
            }
            if let Some(exceeds) = budget {
                if exceeds(&cost) {
                    break;
                }
            }
            let g = node / self.nq;
            let q = node % self.nq;
            let label = self.labels[g];
            for &(v, step) in &self.geom_out[g] {
                for e in self.nba.edges_from(q) {
                    if v == g && e.dst == q {
                        continue;
                    }
                    let nd = cost.plus(e.violation(label), step);
                    let t = self.pid(v, e.dst);
                    let improves = match dist[t] {
                        None => true,
                        Some(cur) => nd.cmp_lex(&cur) == Ordering::Less,
                    };
                    if improves {
                        dist[t] = Some(nd);
                        pred[t] = Some(node);
                        heap.push(HeapEntry { cost: nd, node: t });
                    }
                }
            }
        }
        (dist, pred)
    }

    /// Cheapest single transition closing onto `a` from a settled node.
    fn best_closing(
        &self,
        a: usize,
        dist_a: &[Option<Cost>],
    ) -> Option<(Cost, usize)> {
        let g_a = a / self.nq;
        let q_a = a % self.nq;
        let mut best: Option<(Cost, usize)> = None;
        for &(v, step) in &self.geom_in[g_a] {
            let label = self.labels[v];
            for q_v in 0..self.nq {
                let Some(e) = self.nba.edge_between(q_v, q_a) else {
                    continue;
                };
                let src = self.pid(v, q_v);
                let Some(d) = dist_a[src] else { continue };
                let total = d.plus(e.violation(label), step);
                let better = match &best {
                    None => true,
                    Some((bc, bs)) => match total.cmp_lex(bc) {
                        Ordering::Less => true,
                        Ordering::Equal => src < *bs,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((total, src));
                }
            }
        }
        best
    }

    fn path(&self, pred: &[Option<usize>], end: usize) -> Vec<ProductState> {
        let mut path = Vec::new();
        let mut cur = Some(end);
        while let Some(n) = cur {
            path.push(ProductState::new(self.points[n / self.nq], n % self.nq));
            cur = pred[n];
        }
        path.reverse();
        path
    }
}

/// Builds the lattice product graph. Every cell-to-cell move, including
/// diagonals, must respect the workspace transition bound.
fn build_grid<'a>(
    ws: &Workspace,
    nba: &'a Nba,
    eta: f64,
    step: f64,
) -> Result<ProductGrid<'a>, PlanError> {
    let dims = ws.dimension();
    assert!(step > 0.0, "grid step must be positive");
    assert!(
        step * (dims as f64).sqrt() <= eta * (1.0 + 1e-9),
        "grid step too coarse for the transition bound"
    );
    let (lo, hi) = ws.bounds();
    let mut n = [1usize; 3];
    for i in 0..dims {
        n[i] = (((hi.0[i] - lo.0[i]) / step).ceil() as usize).max(1);
    }
    let n_cells = n[0] * n[1] * n[2];
    let cell_point = |idx: usize| -> Point {
        let ix = idx % n[0];
        let iy = (idx / n[0]) % n[1];
        let iz = idx / (n[0] * n[1]);
        let mut c = [0.0; 3];
        for (i, ii) in [(0, ix), (1, iy), (2, iz)] {
            if i < dims {
                c[i] = (lo.0[i] + (ii as f64 + 0.5) * step).min(hi.0[i]);
            }
        }
        Point(c)
    };

    let mut points: Vec<Point> = (0..n_cells).map(cell_point).collect();
    let init_node = points.len();
    points.push(ws.init());

    let labels: Vec<Symbol> = points
        .iter()
        .map(|&p| {
            ws.label_of(p)
                .expect("lattice points stay inside the workspace bounds")
        })
        .collect();

    let mut offsets = Vec::new();
    let zs: &[i64] = if dims == 3 { &[-1, 0, 1] } else { &[0] };
    for dx in [-1i64, 0, 1] {
        for dy in [-1i64, 0, 1] {
            for &dz in zs {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                offsets.push([dx, dy, dz]);
            }
        }
    }

    let mut geom_out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); points.len()];
    let mut geom_in: Vec<Vec<(usize, f64)>> = vec![Vec::new(); points.len()];
    for idx in 0..n_cells {
        let p = points[idx];
        if ws.gwts_transition(p, p, eta) {
            geom_out[idx].push((idx, 0.0));
            geom_in[idx].push((idx, 0.0));
        }
        let ix = (idx % n[0]) as i64;
        let iy = ((idx / n[0]) % n[1]) as i64;
        let iz = (idx / (n[0] * n[1])) as i64;
        for off in &offsets {
            let (jx, jy, jz) = (ix + off[0], iy + off[1], iz + off[2]);
            if jx < 0
                || jy < 0
                || jz < 0
                || jx >= n[0] as i64
                || jy >= n[1] as i64
                || jz >= n[2] as i64
            {
                continue;
            }
            let j = (jx + jy * n[0] as i64 + jz * (n[0] * n[1]) as i64) as usize;
            let pj = points[j];
            if ws.gwts_transition(p, pj, eta) {
                geom_out[idx].push((j, p.dist(pj)));
                geom_in[j].push((idx, p.dist(pj)));
            }
        }
    }
    // The exact initial point joins the lattice one-directionally; cycles
    // through it stay at it.
    let x0 = ws.init();
    if ws.gwts_transition(x0, x0, eta) {
        geom_out[init_node].push((init_node, 0.0));
        geom_in[init_node].push((init_node, 0.0));
    }
    for idx in 0..n_cells {
        let pj = points[idx];
        if x0.dist(pj) <= eta && x0.dist(pj) > 0.0 && ws.gwts_transition(x0, pj, eta) {
            geom_out[init_node].push((idx, x0.dist(pj)));
            geom_in[idx].push((init_node, x0.dist(pj)));
        }
    }

    Ok(ProductGrid {
        nba,
        nq: nba.n_states(),
        points,
        labels,
        geom_out,
        geom_in,
        init_node,
    })
}

/// Exact lexicographic-minimum lasso on the lattice product: violation
/// first, then geometric length, with the cycle violation dominating the
/// prefix violation in the final choice.
pub fn grid_oracle_plan(
    ws: &Workspace,
    nba: &Nba,
    eta: f64,
    step: f64,
) -> Result<LassoPlan, PlanError> {
    let grid = build_grid(ws, nba, eta, step)?;
    let sources: Vec<usize> = nba
        .initial()
        .iter()
        .map(|&q0| grid.pid(grid.init_node, q0))
        .collect();
    let (pre_dist, pre_pred) = grid.dijkstra(&sources, None);

    let mut accepting: Vec<(Cost, usize)> = (0..grid.n_product())
        .filter(|&p| nba.is_accepting(p % grid.nq))
        .filter_map(|p| pre_dist[p].map(|c| (c, p)))
        .collect();
    if accepting.is_empty() {
        let mut reached: Vec<StateId> = (0..grid.n_product())
            .filter(|&p| pre_dist[p].is_some())
            .map(|p| p % grid.nq)
            .collect();
        reached.sort_unstable();
        reached.dedup();
        return Err(PlanError::NoPlan { reached });
    }
    accepting.sort_by(|a, b| a.0.cmp_lex(&b.0).then(a.1.cmp(&b.1)));

    // Best lasso key: (cycle violation, prefix violation, total length).
    let mut best: Option<((u64, u64, f64), usize)> = None;
    for &(pcost, a) in &accepting {
        if let Some((bk, _)) = &best {
            // Even a free cycle cannot beat the best once the prefix alone
            // is out of range.
            if lex3_ge(&(0, pcost.viol, pcost.len), bk) {
                continue;
            }
        }
        let budget = best.as_ref().map(|(bk, _)| *bk);
        let exceeds = |c: &Cost| -> bool {
            match &budget {
                None => false,
                Some(bk) => lex3_ge(&(c.viol, pcost.viol, pcost.len + c.len), bk),
            }
        };
        let (dist_a, _) = grid.dijkstra(&[a], Some(&exceeds));
        let Some((ccost, _)) = grid.best_closing(a, &dist_a) else {
            continue;
        };
        let key = (ccost.viol, pcost.viol, pcost.len + ccost.len);
        let better = match &best {
            None => true,
            Some((bk, ba)) => lex3_lt(&key, bk) || (key == *bk && a < *ba),
        };
        if better {
            best = Some((key, a));
        }
    }

    let Some((_, a_star)) = best else {
        let mut roots: Vec<StateId> = accepting.iter().map(|&(_, p)| p % grid.nq).collect();
        roots.sort_unstable();
        roots.dedup();
        return Err(PlanError::NoCycle { roots });
    };

    // Rebuild the winning cycle with predecessors recorded.
    let (dist_a, pred_a) = grid.dijkstra(&[a_star], None);
    let (ccost, close_src) = grid
        .best_closing(a_star, &dist_a)
        .expect("winning cycle vanished on recomputation");
    let pcost = pre_dist[a_star].expect("winner must be prefix-reachable");

    let prefix = grid.path(&pre_pred, a_star);
    let mut suffix = grid.path(&pred_a, close_src);
    let root_state = *prefix.last().expect("prefix never empty");
    suffix.remove(0);
    suffix.push(root_state);

    let plan = LassoPlan {
        prefix,
        suffix,
        prefix_violation: pcost.viol,
        suffix_violation: ccost.viol,
        prefix_length: pcost.len,
        suffix_length: ccost.len,
        seed: None,
        iters: 0,
    };
    debug_assert!(
        plan.validate(ws, nba, eta).is_ok(),
        "oracle lasso failed replay: {:?}",
        plan.validate(ws, nba, eta)
    );
    Ok(plan)
}

fn lex3_lt(a: &(u64, u64, f64), b: &(u64, u64, f64)) -> bool {
    a.0.cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.total_cmp(&b.2))
        == Ordering::Less
}

fn lex3_ge(a: &(u64, u64, f64), b: &(u64, u64, f64)) -> bool {
    !lex3_lt(a, b)
}
