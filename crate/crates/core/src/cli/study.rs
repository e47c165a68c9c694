//! Random multi-goal planning study: seeded scenario generation, an
//! enclosure certificate for goals sealed off by obstacles, and the
//! relaxed vs. hard-constraint planner comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StudyMode;
use crate::planner::{plan_lasso, PlanParams};
use crate::policy_search::mix_seed;
use crate::workspace::{Point, Shape, Workspace, WorkspaceBuilder};

const SIDE: f64 = 20.0;
const ETA: f64 = 0.5;
const GOAL_RADIUS: f64 = 2.0 * ETA;
const COVERAGE: f64 = 0.15;

/// One planner run of the study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub mode: &'static str,
    pub seed: u64,
    pub planned: bool,
    pub violation: u64,
    /// Goals certified unreachable from the initial point.
    pub enclosed: usize,
}

/// Sequential-visit specification over `n` goal regions:
/// `<>(G1 && <>(G2 && ... <>Gn))`.
pub fn chain_formula(n: usize) -> String {
    assert!(n >= 1);
    let mut f = format!("<>G{n}");
    for i in (1..n).rev() {
        f = format!("<>(G{i} && {f})");
    }
    f
}

/// Deterministic scenario for one trial: 20-40 axis-aligned boxes scaled
/// to ~15% summed area coverage, `n_goals` obstacle-free goal balls, and
/// in half the trials a four-wall ring sealing one goal.
pub fn generate_trial(seed: u64, n_goals: usize) -> Workspace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seal = rng.random_bool(0.5);
    let n_boxes = rng.random_range(20..=40usize);
    let sealed_goal = seal.then(|| rng.random_range(0..n_goals));

    // A sealed goal's ring corners reach sqrt(2)*1.6 from its center, so
    // neighbors must stay far enough out that no wall buries their ball.
    let seal_sep = std::f64::consts::SQRT_2 * 1.6 + GOAL_RADIUS + 0.1;

    // Goal centers keep enough margin for a sealing ring and some mutual
    // separation; the separation relaxes if rejection stalls.
    let mut centers: Vec<(f64, f64)> = Vec::new();
    let mut min_sep = 2.5;
    while centers.len() < n_goals {
        let mut placed = false;
        for _ in 0..200 {
            let c = (rng.random_range(1.8..SIDE - 1.8), rng.random_range(1.8..SIDE - 1.8));
            let i = centers.len();
            let ok = centers.iter().enumerate().all(|(o, &p)| {
                let sep = if sealed_goal == Some(o) || sealed_goal == Some(i) {
                    seal_sep.max(min_sep)
                } else {
                    min_sep
                };
                dist2(c, p) >= sep * sep
            });
            if ok {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            min_sep *= 0.8;
        }
    }

    let mut boxes: Vec<[f64; 4]> = Vec::new();
    let mut area_budget = COVERAGE * SIDE * SIDE;
    let ring_bbox = sealed_goal.map(|g| {
        let (cx, cy) = centers[g];
        // Walls of thickness 0.4 leave a free annulus outside the goal
        // ball (radius 1.0, ring inner half-width 1.2).
        boxes.push([cx - 1.6, cy - 1.6, cx + 1.6, cy - 1.2]);
        boxes.push([cx - 1.6, cy + 1.2, cx + 1.6, cy + 1.6]);
        boxes.push([cx - 1.6, cy - 1.2, cx - 1.2, cy + 1.2]);
        boxes.push([cx + 1.2, cy - 1.2, cx + 1.6, cy + 1.2]);
        area_budget -= boxes.iter().map(|b| (b[2] - b[0]) * (b[3] - b[1])).sum::<f64>();
        [cx - 1.6, cy - 1.6, cx + 1.6, cy + 1.6]
    });

    let n_random = n_boxes - if seal { 4 } else { 0 };
    let mut sides: Vec<(f64, f64)> = (0..n_random)
        .map(|_| (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)))
        .collect();
    let raw_area: f64 = sides.iter().map(|(w, h)| w * h).sum();
    let scale = (area_budget.max(1.0) / raw_area).sqrt();
    for s in &mut sides {
        s.0 = (s.0 * scale).clamp(0.2, 4.0);
        s.1 = (s.1 * scale).clamp(0.2, 4.0);
    }

    for (w, h) in sides {
        // Boxes may overlap each other but never a goal ball, keeping
        // every goal region obstacle-free.
        for _ in 0..200 {
            let x = rng.random_range(0.0..SIDE - w);
            let y = rng.random_range(0.0..SIDE - h);
            let b = [x, y, x + w, y + h];
            let clear = centers.iter().all(|&(cx, cy)| {
                let px = cx.clamp(b[0], b[2]);
                let py = cy.clamp(b[1], b[3]);
                dist2((px, py), (cx, cy)) > (GOAL_RADIUS + 0.05) * (GOAL_RADIUS + 0.05)
            });
            if clear {
                boxes.push(b);
                break;
            }
        }
    }

    let init = 'found: {
        for _ in 0..1000 {
            let p = (rng.random_range(0.2..SIDE - 0.2), rng.random_range(0.2..SIDE - 0.2));
            let in_ring = ring_bbox
                .is_some_and(|r| r[0] <= p.0 && p.0 <= r[2] && r[1] <= p.1 && p.1 <= r[3]);
            if !in_ring
                && boxes.iter().all(|b| !(b[0] <= p.0 && p.0 <= b[2] && b[1] <= p.1 && p.1 <= b[3]))
            {
                break 'found p;
            }
        }
        // Goal balls are obstacle-free by construction, so an unsealed
        // goal center always works as a fallback.
        let g = (0..n_goals).find(|i| sealed_goal != Some(*i)).unwrap_or(0);
        centers[g]
    };

    let mut builder = WorkspaceBuilder::new(2, &[0.0, 0.0], &[SIDE, SIDE]).init(&[init.0, init.1]);
    for (i, &(cx, cy)) in centers.iter().enumerate() {
        builder = builder.region_ball(&format!("G{}", i + 1), &[cx, cy], GOAL_RADIUS);
    }
    for b in &boxes {
        builder = builder.obstacle_box(&[b[0], b[1]], &[b[2], b[3]]);
    }
    builder.build().expect("generated scenario is well-formed")
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Indices of goal regions with no obstacle-free lattice path from the
/// initial point, on a fine 4-connected grid. Cells are free whenever
/// their center is outside every obstacle, which over-approximates the
/// reachable set for any path of clearance above the cell diagonal: an
/// `enclosed` verdict certifies that even this permissive graph is cut.
pub fn enclosed_goals(ws: &Workspace) -> Vec<usize> {
    let step = 0.05;
    let (lo, hi) = ws.bounds();
    let nx = ((hi.0[0] - lo.0[0]) / step).round() as usize + 1;
    let ny = ((hi.0[1] - lo.0[1]) / step).round() as usize + 1;
    let cell = |p: Point| -> usize {
        let ix = (((p.0[0] - lo.0[0]) / step).round() as usize).min(nx - 1);
        let iy = (((p.0[1] - lo.0[1]) / step).round() as usize).min(ny - 1);
        iy * nx + ix
    };
    let center = |idx: usize| -> Point {
        Point::new2(
            lo.0[0] + (idx % nx) as f64 * step,
            lo.0[1] + (idx / nx) as f64 * step,
        )
    };

    let mut free = vec![false; nx * ny];
    for (idx, f) in free.iter_mut().enumerate() {
        *f = !ws.point_in_obstacle(center(idx));
    }

    let mut reached = vec![false; nx * ny];
    let start = cell(ws.init());
    let mut queue = std::collections::VecDeque::new();
    if free[start] {
        reached[start] = true;
        queue.push_back(start);
    }
    while let Some(c) = queue.pop_front() {
        let (ix, iy) = (c % nx, c / nx);
        let mut push = |n: usize| {
            if free[n] && !reached[n] {
                reached[n] = true;
                queue.push_back(n);
            }
        };
        if ix > 0 {
            push(c - 1);
        }
        if ix + 1 < nx {
            push(c + 1);
        }
        if iy > 0 {
            push(c - nx);
        }
        if iy + 1 < ny {
            push(c + nx);
        }
    }

    let mut sealed = Vec::new();
    for (i, (_, shape)) in ws.regions().enumerate() {
        let c = match shape {
            Shape::Ball { center, .. } => *center,
            Shape::Box { min, max } => Point::new2(
                0.5 * (min.0[0] + max.0[0]),
                0.5 * (min.0[1] + max.0[1]),
            ),
        };
        if !reached[cell(c)] {
            sealed.push(i);
        }
    }
    sealed
}

/// Runs the study: per trial one scenario, the enclosure certificate,
/// and a planner run per requested mode.
pub fn run_study(
    master_seed: u64,
    trials: usize,
    n_goals: usize,
    iters: usize,
    mode: StudyMode,
) -> Vec<StudyRow> {
    let formula = chain_formula(n_goals);
    let mut rows = Vec::new();
    for trial in 0..trials {
        let seed = mix_seed(master_seed, 0xA11D, trial as u64);
        let ws = generate_trial(seed, n_goals);
        let enclosed = enclosed_goals(&ws).len();
        let ast = crate::ltl::parse_ltl(&formula, ws.ap().names())
            .expect("chain formula parses against generated atoms");
        let nba = crate::ltl::translate(&ast, ws.ap());

        let mut run_mode = |label: &'static str, forbid: bool| {
            let mut params = PlanParams::for_workspace(&ws, ETA, iters, seed);
            params.forbid_violation = forbid;
            let outcome = plan_lasso(&ws, &nba, &params);
            let (planned, violation) = match outcome {
                Ok(p) => (true, p.prefix_violation + p.suffix_violation),
                Err(_) => (false, 0),
            };
            rows.push(StudyRow { mode: label, seed, planned, violation, enclosed });
        };
        if matches!(mode, StudyMode::Relaxed | StudyMode::Both) {
            run_mode("relaxed", false);
        }
        if matches!(mode, StudyMode::FeasibleOnly | StudyMode::Both) {
            run_mode("feasible-only", true);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_formula_nests_eventualities() {
        assert_eq!(chain_formula(1), "<>G1");
        assert_eq!(chain_formula(3), "<>(G1 && <>(G2 && <>G3))");
    }

    #[test]
    fn generated_scenarios_are_valid_and_deterministic() {
        for seed in [3u64, 11, 42] {
            let a = generate_trial(seed, 12);
            let b = generate_trial(seed, 12);
            assert_eq!(a.to_json(), b.to_json());
            assert_eq!(a.ap().names().len(), 12);
            assert!(!a.point_in_obstacle(a.init()), "init must be collision-free");
            // Goal balls stay entirely obstacle-free, sealing rings
            // included.
            for (name, shape) in a.regions() {
                let Shape::Ball { center, radius } = shape else {
                    panic!("study goals are balls");
                };
                for ob in a.obstacles() {
                    let Shape::Box { min, max } = ob else {
                        panic!("study obstacles are boxes");
                    };
                    let px = center.0[0].clamp(min.0[0], max.0[0]);
                    let py = center.0[1].clamp(min.0[1], max.0[1]);
                    let d2 = dist2((px, py), (center.0[0], center.0[1]));
                    assert!(
                        d2 > radius * radius,
                        "seed {seed}: obstacle {min:?}-{max:?} cuts into {name}"
                    );
                }
            }
        }
    }

    #[test]
    fn sealed_goals_are_certified_enclosed() {
        // A hand-built ring around one goal must be detected.
        let ws = WorkspaceBuilder::new(2, &[0.0, 0.0], &[20.0, 20.0])
            .init(&[1.0, 1.0])
            .region_ball("G1", &[10.0, 10.0], 1.0)
            .region_ball("G2", &[17.0, 17.0], 1.0)
            .obstacle_box(&[8.4, 8.4], &[11.6, 8.8])
            .obstacle_box(&[8.4, 11.2], &[11.6, 11.6])
            .obstacle_box(&[8.4, 8.8], &[8.8, 11.2])
            .obstacle_box(&[11.2, 8.8], &[11.6, 11.2])
            .build()
            .unwrap();
        assert_eq!(enclosed_goals(&ws), vec![0]);
    }

    #[test]
    fn study_rows_cover_modes_and_agree_on_enclosure() {
        let rows = run_study(9, 3, 4, 1500, StudyMode::Both);
        assert_eq!(rows.len(), 6);
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].mode, "relaxed");
            assert_eq!(pair[1].mode, "feasible-only");
            assert_eq!(pair[0].enclosed, pair[1].enclosed);
            assert!(pair[0].planned, "relaxed planning always succeeds");
            if pair[1].enclosed > 0 {
                assert!(!pair[1].planned);
            }
        }
    }
}
