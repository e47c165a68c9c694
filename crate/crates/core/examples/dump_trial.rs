use minviol::ltl::{parse_ltl, translate};
use minviol::planner::{product_edge, ProductState, Tree};
use minviol::workspace::{Point, Workspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let ws = minviol::cli::study::generate_trial(9158593612772766390, 12);
    std::fs::write(
        "/tmp/trial0.json",
        serde_json::to_string_pretty(&ws.to_json()).unwrap(),
    )
    .unwrap();
    let ast = parse_ltl("<>(G1 && <>G2)", ws.ap().names()).unwrap();
    let nba = translate(&ast, ws.ap());
    let eta = 0.5;
    let beta = 1e4 * ws.diameter();
    let forbid = true;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tree = Tree::new(eta, Point(ws.bounds().0 .0), ws.dimension(), beta);
    let init_label = ws.label_of(ws.init()).unwrap();
    for &q0 in nba.initial() {
        tree.add_root(ProductState::new(ws.init(), q0), init_label);
    }

    let dims = ws.dimension();
    let diam = ws.diameter();
    let regions: Vec<minviol::workspace::Shape> = ws.regions().map(|(_, s)| s.clone()).collect();
    let (lo, hi) = ws.bounds();

    for it in 0..20000usize {
        let x_rand = if rng.random::<f64>() < 0.1 && !regions.is_empty() {
            let shape = &regions[rng.random_range(0..regions.len())];
            match shape {
                minviol::workspace::Shape::Ball { center, radius } => {
                    let a = rng.random_range(0.0..std::f64::consts::TAU);
                    let r = radius * rng.random::<f64>().sqrt();
                    Point::new2(center.0[0] + r * a.cos(), center.0[1] + r * a.sin())
                }
                minviol::workspace::Shape::Box { min, max } => Point::new2(
                    rng.random_range(min.0[0]..max.0[0]),
                    rng.random_range(min.0[1]..max.0[1]),
                ),
            }
        } else {
            Point::new2(
                rng.random_range(lo.0[0]..hi.0[0]),
                rng.random_range(lo.0[1]..hi.0[1]),
            )
        };
        let Some(nearest) = tree.index.nearest(x_rand) else {
            continue;
        };
        let x_near = tree.nodes[nearest].state.x;
        let d = x_near.dist(x_rand);
        let x_new = if d <= eta {
            x_rand
        } else {
            x_near.lerp(x_rand, eta / d)
        };
        if x_new.dist(x_near) <= 1e-12 {
            continue;
        }
        let n = tree.nodes.len() as f64;
        let radius = if n > 1.0 {
            (2.0 * diam * ((n.ln()) / n).powf(1.0 / dims as f64)).min(eta)
        } else {
            0.0
        };
        let mut near = tree.index.near(x_new, radius);
        if !near.contains(&nearest) {
            near.push(nearest);
        }
        let mut per_q: std::collections::BTreeMap<usize, (f64, usize, f64, u32)> =
            std::collections::BTreeMap::new();
        for &m in &near {
            let mn = &tree.nodes[m];
            if !ws.gwts_transition(mn.state.x, x_new, eta) {
                continue;
            }
            let step = mn.state.x.dist(x_new);
            for e in nba.edges_from(mn.state.q) {
                let viol = e.violation(mn.label);
                if forbid && viol > 0 {
                    continue;
                }
                let weight = mn.weight + step + beta * viol as f64;
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
        for (q, (_, parent, step, viol)) in &per_q {
            let pg = tree.nodes[*parent].geom_cost;
            let pv = tree.nodes[*parent].viol_cost;
            tree.add_node(
                ProductState::new(x_new, *q),
                new_label,
                Some(*parent),
                pg + step,
                pv + *viol as f64,
            );
        }
        let _ = product_edge;

        if it % 2000 == 0 || it == 19999 {
            let mut count = std::collections::BTreeMap::new();
            let mut q1_bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
            for node in &tree.nodes {
                *count.entry(node.state.q).or_insert(0usize) += 1;
                if node.state.q == 1 {
                    q1_bbox[0] = q1_bbox[0].min(node.state.x.0[0]);
                    q1_bbox[1] = q1_bbox[1].min(node.state.x.0[1]);
                    q1_bbox[2] = q1_bbox[2].max(node.state.x.0[0]);
                    q1_bbox[3] = q1_bbox[3].max(node.state.x.0[1]);
                }
            }
            println!("iter {it}: counts {count:?} q1 bbox {q1_bbox:?}");
        }
    }
    for (i, (_, s)) in ws.regions().enumerate() {
        if let minviol::workspace::Shape::Ball { center, radius } = s {
            if i < 2 {
                println!("G{} at {:?} r {}", i + 1, &center.0[..2], radius);
            }
        }
    }
}
