//! Random tree over the relaxed product, with a uniform-grid point index.

use super::{product_edge, ProductState};
use crate::ltl::{Nba, Symbol};
use crate::workspace::{Point, Workspace};

/// Uniform-grid point index; all queries are deterministic, returning ids
/// in insertion order within a cell and scanning cells in fixed order.
pub struct GridIndex {
    cell: f64,
    origin: Point,
    dims: usize,
    buckets: std::collections::HashMap<[i64; 3], Vec<usize>>,
    points: Vec<Point>,
}

impl GridIndex {
    pub fn new(cell: f64, origin: Point, dims: usize) -> GridIndex {
        assert!(cell > 0.0);
        GridIndex {
            cell,
            origin,
            dims,
            buckets: std::collections::HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point) -> [i64; 3] {
        let mut k = [0i64; 3];
        for i in 0..self.dims {
            k[i] = ((p.0[i] - self.origin.0[i]) / self.cell).floor() as i64;
        }
        k
    }

    pub fn insert(&mut self, p: Point) -> usize {
        let id = self.points.len();
        self.points.push(p);
        self.buckets.entry(self.key(p)).or_default().push(id);
        id
    }

    /// Ids within `radius` of `p`, ordered by (distance, id).
    pub fn near(&self, p: Point, radius: f64) -> Vec<usize> {
        let lo = self.key(Point([
            p.0[0] - radius,
            p.0[1] - radius,
            p.0[2] - radius,
        ]));
        let hi = self.key(Point([
            p.0[0] + radius,
            p.0[1] + radius,
            p.0[2] + radius,
        ]));
        let mut out: Vec<(f64, usize)> = Vec::new();
        let zrange = if self.dims == 3 { (lo[2], hi[2]) } else { (0, 0) };
        for kx in lo[0]..=hi[0] {
            for ky in lo[1]..=hi[1] {
                for kz in zrange.0..=zrange.1 {
                    if let Some(ids) = self.buckets.get(&[kx, ky, kz]) {
                        for &id in ids {
                            let d = self.points[id].dist(p);
                            if d <= radius {
                                out.push((d, id));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.into_iter().map(|(_, id)| id).collect()
    }

    /// Closest id to `p` (ties to the lower id); `None` when empty.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let center = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        let mut ring = 0i64;
        loop {
            // Cells at Chebyshev distance `ring` from the center cell.
            let mut any_cell = false;
            for kx in center[0] - ring..=center[0] + ring {
                for ky in center[1] - ring..=center[1] + ring {
                    let zr = if self.dims == 3 {
                        (center[2] - ring, center[2] + ring)
                    } else {
                        (0, 0)
                    };
                    for kz in zr.0..=zr.1 {
                        let cheb = (kx - center[0])
                            .abs()
                            .max((ky - center[1]).abs())
                            .max((kz - center[2]).abs());
                        if cheb != ring {
                            continue;
                        }
                        any_cell = true;
                        if let Some(ids) = self.buckets.get(&[kx, ky, kz]) {
                            for &id in ids {
                                let d = self.points[id].dist(p);
                                let better = match best {
                                    None => true,
                                    Some((bd, bi)) => {
                                        d < bd || (d == bd && id < bi)
                                    }
                                };
                                if better {
                                    best = Some((d, id));
                                }
                            }
                        }
                    }
                }
            }
            // Nothing closer can appear once the ring's nearest possible
            // distance exceeds the best found.
            if let Some((bd, _)) = best {
                let ring_floor = (ring as f64) * self.cell;
                if ring_floor > bd {
                    break;
                }
            }
            if !any_cell && ring as usize > self.points.len() + 4 {
                break;
            }
            ring += 1;
            if ring > 1_000_000 {
                break;
            }
        }
        best.map(|(_, id)| id)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Node of the product tree.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: ProductState,
    pub label: Symbol,
    pub parent: Option<usize>,
    pub geom_cost: f64,
    pub viol_cost: f64,
    pub weight: f64,
}

/// Tree over product states, weighted by geometric length plus
/// beta-scaled violation.
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub children: Vec<Vec<usize>>,
    pub index: GridIndex,
    pub beta: f64,
}

impl Tree {
    pub fn new(cell: f64, origin: Point, dims: usize, beta: f64) -> Tree {
        Tree {
            nodes: Vec::new(),
            children: Vec::new(),
            index: GridIndex::new(cell, origin, dims),
            beta,
        }
    }

    pub fn add_root(&mut self, state: ProductState, label: Symbol) -> usize {
        self.add_node(state, label, None, 0.0, 0.0)
    }

    pub fn add_node(
        &mut self,
        state: ProductState,
        label: Symbol,
        parent: Option<usize>,
        geom_cost: f64,
        viol_cost: f64,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            state,
            label,
            parent,
            geom_cost,
            viol_cost,
            weight: geom_cost + self.beta * viol_cost,
        });
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        let gid = self.index.insert(state.x);
        debug_assert_eq!(gid, id);
        id
    }

    /// Reparent `node` under `new_parent` with the given edge costs and
    /// push the cost change through its subtree.
    pub fn rewire(
        &mut self,
        node: usize,
        new_parent: usize,
        edge_geom: f64,
        edge_viol: f64,
        nba: &Nba,
        ws: &Workspace,
        eta: f64,
    ) {
        if let Some(old) = self.nodes[node].parent {
            self.children[old].retain(|&c| c != node);
        }
        self.nodes[node].parent = Some(new_parent);
        self.children[new_parent].push(node);
        let g = self.nodes[new_parent].geom_cost + edge_geom;
        let v = self.nodes[new_parent].viol_cost + edge_viol;
        self.set_costs_recursive(node, g, v);
        if cfg!(debug_assertions) {
            self.audit_subtree(node, nba, ws, eta);
        }
    }

    fn set_costs_recursive(&mut self, node: usize, geom: f64, viol: f64) {
        let dg = geom - self.nodes[node].geom_cost;
        let dv = viol - self.nodes[node].viol_cost;
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            self.nodes[n].geom_cost += dg;
            self.nodes[n].viol_cost += dv;
            self.nodes[n].weight = self.nodes[n].geom_cost + self.beta * self.nodes[n].viol_cost;
            stack.extend(self.children[n].iter().copied());
        }
    }

    /// Recompute edge costs along the subtree and compare with the stored
    /// accumulations; debug builds run this after every rewire.
    pub fn audit_subtree(&self, root: usize, nba: &Nba, ws: &Workspace, eta: f64) {
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            assert!(
                (node.weight - (node.geom_cost + self.beta * node.viol_cost)).abs()
                    <= 1e-6 * (1.0 + node.weight.abs()),
                "weight identity broken at node {n}"
            );
            if let Some(p) = node.parent {
                let parent = &self.nodes[p];
                let edge = product_edge(parent.state, node.state, nba, ws, eta)
                    .expect("tree edge must be a valid product transition");
                assert!(
                    (parent.geom_cost + edge.geom - node.geom_cost).abs() <= 1e-6 * (1.0 + node.geom_cost.abs()),
                    "geometric cost mismatch at node {n}"
                );
                assert!(
                    (parent.viol_cost + edge.viol as f64 - node.viol_cost).abs() <= 1e-9,
                    "violation cost mismatch at node {n}"
                );
            }
            stack.extend(self.children[n].iter().copied());
        }
    }

    /// Product-state path from the tree root down to `node`.
    pub fn path_to(&self, node: usize) -> Vec<ProductState> {
        let mut path = Vec::new();
        let mut cur = Some(node);
        while let Some(n) = cur {
            path.push(self.nodes[n].state);
            cur = self.nodes[n].parent;
        }
        path.reverse();
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_near_returns_sorted_hits() {
        let mut g = GridIndex::new(1.0, Point::new2(0.0, 0.0), 2);
        let a = g.insert(Point::new2(1.0, 1.0));
        let b = g.insert(Point::new2(1.4, 1.0));
        let c = g.insert(Point::new2(3.0, 3.0));
        let hits = g.near(Point::new2(1.0, 1.0), 1.0);
        assert_eq!(hits, vec![a, b]);
        let hits = g.near(Point::new2(3.1, 3.0), 0.5);
        assert_eq!(hits, vec![c]);
    }

    #[test]
    fn grid_nearest_crosses_cells() {
        let mut g = GridIndex::new(0.5, Point::new2(0.0, 0.0), 2);
        assert_eq!(g.nearest(Point::new2(1.0, 1.0)), None);
        let a = g.insert(Point::new2(9.0, 9.0));
        assert_eq!(g.nearest(Point::new2(1.0, 1.0)), Some(a));
        let b = g.insert(Point::new2(2.0, 1.0));
        assert_eq!(g.nearest(Point::new2(1.0, 1.0)), Some(b));
    }

    #[test]
    fn grid_nearest_breaks_ties_by_id() {
        let mut g = GridIndex::new(1.0, Point::new2(0.0, 0.0), 2);
        let a = g.insert(Point::new2(2.0, 1.0));
        let _b = g.insert(Point::new2(0.0, 1.0));
        assert_eq!(g.nearest(Point::new2(1.0, 1.0)), Some(a));
    }
}
