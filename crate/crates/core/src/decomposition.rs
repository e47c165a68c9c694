//! Segmentation of a lasso plan into reach-avoid sub-tasks, one per
//! maximal constant-automaton-state stretch, with cost-to-go attached.

use crate::ltl::{Nba, StateId};
use crate::planner::{LassoPlan, ProductState};
use crate::workspace::{Point, Workspace};

/// One reach-avoid sub-task: drive through the waypoints to the goal
/// point while the automaton sits in state `q`.
#[derive(Debug, Clone)]
pub struct ReachAvoidTask {
    pub index: usize,
    pub q: StateId,
    pub waypoints: Vec<Point>,
    pub goal_point: Point,
    pub ball_radius: f64,
    pub dist_to_go: Vec<f64>,
    pub is_suffix: bool,
    /// Violation paid by the plan transitions this task covers; filled by
    /// [`attach_boundary_violations`], zero until then.
    pub boundary_violation: u64,
}

impl ReachAvoidTask {
    /// Asserts the structural invariants; used by tests and debug builds.
    pub fn check(&self, ws: &Workspace, eta: f64) -> Result<(), String> {
        if self.waypoints.is_empty() {
            return Err("task has no waypoints".into());
        }
        if self.goal_point != *self.waypoints.last().unwrap() {
            return Err("goal point must be the last waypoint".into());
        }
        if self.dist_to_go.len() != self.waypoints.len() {
            return Err("dist_to_go length mismatch".into());
        }
        if *self.dist_to_go.last().unwrap() != 0.0 {
            return Err("dist_to_go must end at 0".into());
        }
        for d in self.dist_to_go.windows(2) {
            if d[1] > d[0] + 1e-9 {
                return Err("dist_to_go must be nonincreasing".into());
            }
        }
        for w in self.waypoints.windows(2) {
            if !ws.gwts_transition(w[0], w[1], eta) {
                return Err("consecutive waypoints break the transition relation".into());
            }
        }
        Ok(())
    }

    pub fn to_json(&self, dim: usize) -> serde_json::Value {
        serde_json::json!({
            "index": self.index,
            "q": self.q,
            "waypoints": self.waypoints.iter().map(|p| p.coords(dim)).collect::<Vec<_>>(),
            "goal": self.goal_point.coords(dim),
            "r": self.ball_radius,
            "dist_to_go": self.dist_to_go,
            "is_suffix": self.is_suffix,
            "boundary_violation": self.boundary_violation,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<ReachAvoidTask, String> {
        let field = |k: &str| v.get(k).ok_or_else(|| format!("task missing field `{k}`"));
        let point = |w: &serde_json::Value| -> Result<Point, String> {
            let c: Vec<f64> = serde_json::from_value(w.clone())
                .map_err(|e| format!("bad waypoint: {e}"))?;
            if c.is_empty() || c.len() > 3 {
                return Err(format!("waypoint must have 1-3 coordinates, got {}", c.len()));
            }
            Ok(Point::from_coords(&c))
        };
        let waypoints = field("waypoints")?
            .as_array()
            .ok_or("`waypoints` must be an array")?
            .iter()
            .map(point)
            .collect::<Result<Vec<_>, _>>()?;
        let task = ReachAvoidTask {
            index: field("index")?.as_u64().ok_or("`index` must be an integer")? as usize,
            q: field("q")?.as_u64().ok_or("`q` must be an integer")? as StateId,
            goal_point: point(field("goal")?)?,
            ball_radius: field("r")?.as_f64().ok_or("`r` must be a number")?,
            dist_to_go: serde_json::from_value(field("dist_to_go")?.clone())
                .map_err(|e| format!("bad dist_to_go: {e}"))?,
            is_suffix: field("is_suffix")?.as_bool().ok_or("`is_suffix` must be a bool")?,
            boundary_violation: field("boundary_violation")?
                .as_u64()
                .ok_or("`boundary_violation` must be an integer")?,
            waypoints,
        };
        if task.waypoints.is_empty() {
            return Err("task has no waypoints".into());
        }
        if task.dist_to_go.len() != task.waypoints.len() {
            return Err("dist_to_go length mismatch".into());
        }
        Ok(task)
    }
}

/// The plan split into prefix tasks followed by endlessly repeated
/// suffix tasks.
#[derive(Debug, Clone)]
pub struct TaskLasso {
    pub prefix_tasks: Vec<ReachAvoidTask>,
    pub suffix_tasks: Vec<ReachAvoidTask>,
}

impl TaskLasso {
    /// Chains task waypoints back into polylines: the prefix path and one
    /// closed suffix period (ending where the period restarts).
    pub fn flatten(&self) -> (Vec<Point>, Vec<Point>) {
        let chain = |tasks: &[ReachAvoidTask]| {
            let mut out: Vec<Point> = Vec::new();
            for t in tasks {
                for &w in &t.waypoints {
                    if out.last() != Some(&w) {
                        out.push(w);
                    }
                }
            }
            out
        };
        (chain(&self.prefix_tasks), chain(&self.suffix_tasks))
    }

    pub fn to_json(&self, dim: usize) -> serde_json::Value {
        serde_json::json!({
            "prefix_tasks": self.prefix_tasks.iter().map(|t| t.to_json(dim)).collect::<Vec<_>>(),
            "suffix_tasks": self.suffix_tasks.iter().map(|t| t.to_json(dim)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TaskLasso, String> {
        let list = |k: &str| -> Result<Vec<ReachAvoidTask>, String> {
            v.get(k)
                .and_then(|a| a.as_array())
                .ok_or_else(|| format!("missing task array `{k}`"))?
                .iter()
                .map(ReachAvoidTask::from_json)
                .collect()
        };
        Ok(TaskLasso {
            prefix_tasks: list("prefix_tasks")?,
            suffix_tasks: list("suffix_tasks")?,
        })
    }
}

/// Recomputes the cost-to-go column: path length from each waypoint to
/// the segment end.
pub fn attach_dist(mut task: ReachAvoidTask) -> ReachAvoidTask {
    let n = task.waypoints.len();
    let mut dist = vec![0.0; n];
    for j in (0..n.saturating_sub(1)).rev() {
        dist[j] = dist[j + 1] + task.waypoints[j].dist(task.waypoints[j + 1]);
    }
    task.dist_to_go = dist;
    task
}

/// Splits the plan into reach-avoid tasks. Maximal runs of plan states
/// sharing one automaton state become one task each; the state where the
/// automaton switches terminates the earlier task and provides its goal.
/// The final prefix state only terminates the last prefix task, and
/// suffix runs wrap around the cycle.
pub fn decompose(plan: &LassoPlan, r: f64) -> TaskLasso {
    assert!(r > 0.0, "task ball radius must be positive");
    let mut index = 0;

    let mut prefix_tasks = Vec::new();
    if plan.prefix.len() == 1 {
        prefix_tasks.push(make_task(
            index,
            plan.prefix[0].q,
            vec![plan.prefix[0].x],
            r,
            false,
        ));
        index += 1;
    } else {
        let body = &plan.prefix[..plan.prefix.len() - 1];
        let terminal = plan.prefix.last().unwrap().x;
        for run in runs_with_goals(body, terminal) {
            prefix_tasks.push(make_task(index, run.q, run.waypoints, r, false));
            index += 1;
        }
    }

    let mut suffix_tasks = Vec::new();
    let wrap_goal = plan.suffix[0].x;
    for run in runs_with_goals(&plan.suffix, wrap_goal) {
        suffix_tasks.push(make_task(index, run.q, run.waypoints, r, true));
        index += 1;
    }

    TaskLasso {
        prefix_tasks,
        suffix_tasks,
    }
}

struct Run {
    q: StateId,
    waypoints: Vec<Point>,
    /// Transition indices this run covers: step i goes from state i to i+1
    /// (the step at states.len()-1 wraps for suffix sequences).
    span: (usize, usize),
}

/// Run-length groups over the states; each run's waypoint list carries
/// the next run's first point (or `terminal` for the last run) as goal.
fn runs_with_goals(states: &[ProductState], terminal: Point) -> Vec<Run> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < states.len() {
        let q = states[start].q;
        let mut end = start + 1;
        while end < states.len() && states[end].q == q {
            end += 1;
        }
        let goal = if end < states.len() {
            states[end].x
        } else {
            terminal
        };
        let mut wps: Vec<Point> = states[start..end].iter().map(|s| s.x).collect();
        wps.push(goal);
        out.push(Run {
            q,
            waypoints: wps,
            span: (start, end),
        });
        start = end;
    }
    out
}

fn make_task(
    index: usize,
    q: StateId,
    waypoints: Vec<Point>,
    r: f64,
    is_suffix: bool,
) -> ReachAvoidTask {
    let mut dedup: Vec<Point> = Vec::new();
    for w in waypoints {
        if dedup.last() != Some(&w) {
            dedup.push(w);
        }
    }
    let goal_point = *dedup.last().expect("tasks keep at least one waypoint");
    attach_dist(ReachAvoidTask {
        index,
        q,
        waypoints: dedup,
        goal_point,
        ball_radius: r,
        dist_to_go: Vec::new(),
        is_suffix,
        boundary_violation: 0,
    })
}

/// Distributes the plan's violation over the tasks: each task is charged
/// the violation of the plan transitions it covers, so prefix tasks sum
/// to the plan's prefix violation and suffix tasks to its suffix
/// violation (the cycle-closing transition lands on the last suffix
/// task). Requires `tasks == decompose(plan, r)` for some r.
pub fn attach_boundary_violations(
    tasks: &mut TaskLasso,
    plan: &LassoPlan,
    nba: &Nba,
    ws: &Workspace,
) {
    let step_viol = |from: ProductState, to: ProductState| -> u64 {
        let edge = nba
            .edge_between(from.q, to.q)
            .expect("plan transitions follow automaton edges");
        let label = ws
            .label_of(from.x)
            .expect("plan states stay inside the workspace");
        edge.violation(label) as u64
    };

    if plan.prefix.len() > 1 {
        let body = &plan.prefix[..plan.prefix.len() - 1];
        let runs = runs_with_goals(body, plan.prefix.last().unwrap().x);
        assert_eq!(runs.len(), tasks.prefix_tasks.len(), "tasks match the plan");
        for (task, run) in tasks.prefix_tasks.iter_mut().zip(&runs) {
            task.boundary_violation = (run.span.0..run.span.1)
                .map(|i| step_viol(plan.prefix[i], plan.prefix[i + 1]))
                .sum();
        }
    }

    let runs = runs_with_goals(&plan.suffix, plan.suffix[0].x);
    assert_eq!(runs.len(), tasks.suffix_tasks.len(), "tasks match the plan");
    let last = plan.suffix.len() - 1;
    for (task, run) in tasks.suffix_tasks.iter_mut().zip(&runs) {
        task.boundary_violation = (run.span.0..run.span.1)
            .map(|i| {
                let to = if i == last {
                    plan.suffix[0]
                } else {
                    plan.suffix[i + 1]
                };
                step_viol(plan.suffix[i], to)
            })
            .sum();
    }
}

/// One automaton switch along the plan, with the violation charged at
/// the transition's source point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchViolation {
    pub at: Point,
    pub from_q: StateId,
    pub to_q: StateId,
    pub viol: u32,
    pub is_suffix: bool,
}

/// Violation cost at every boundary the plan fires: automaton switches
/// inside the prefix and suffix, the cycle-closing transition, plus any
/// self-loop step that carries positive cost (a stationary cycle pays
/// its guard without changing state). Zero-cost self-loop steps are
/// omitted, so the listed costs sum to the plan's reported violations.
pub fn segment_violations(plan: &LassoPlan, nba: &Nba, ws: &Workspace) -> Vec<SwitchViolation> {
    let mut out = Vec::new();
    let mut push = |from: ProductState, to: ProductState, is_suffix: bool| {
        let edge = nba
            .edge_between(from.q, to.q)
            .expect("plan transitions follow automaton edges");
        let label = ws
            .label_of(from.x)
            .expect("plan states stay inside the workspace");
        let viol = edge.violation(label);
        if from.q == to.q && viol == 0 {
            return;
        }
        out.push(SwitchViolation {
            at: from.x,
            from_q: from.q,
            to_q: to.q,
            viol,
            is_suffix,
        });
    };
    for w in plan.prefix.windows(2) {
        push(w[0], w[1], false);
    }
    for w in plan.suffix.windows(2) {
        push(w[0], w[1], true);
    }
    push(*plan.suffix.last().unwrap(), plan.suffix[0], true);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{grid_oracle_plan, plan_lasso, PlanParams};

    fn ps(x: f64, y: f64, q: StateId) -> ProductState {
        ProductState::new(Point::new2(x, y), q)
    }

    fn toy_plan(prefix: Vec<ProductState>, suffix: Vec<ProductState>) -> LassoPlan {
        LassoPlan {
            prefix,
            suffix,
            prefix_violation: 0,
            suffix_violation: 0,
            prefix_length: 0.0,
            suffix_length: 0.0,
            seed: None,
            iters: 0,
        }
    }

    #[test]
    fn run_length_segmentation_matches_the_q_sequence() {
        // q-sequence q0 q0 q0 q1 q1 [q2 q2 q3]^w.
        let plan = toy_plan(
            vec![
                ps(0.0, 0.0, 0),
                ps(1.0, 0.0, 0),
                ps(2.0, 0.0, 0),
                ps(3.0, 0.0, 1),
                ps(4.0, 0.0, 1),
            ],
            vec![ps(5.0, 0.0, 2), ps(6.0, 0.0, 2), ps(7.0, 0.0, 3)],
        );
        let tasks = decompose(&plan, 0.5);
        assert_eq!(tasks.prefix_tasks.len(), 2);
        assert_eq!(tasks.suffix_tasks.len(), 2);

        let t0 = &tasks.prefix_tasks[0];
        assert_eq!(t0.q, 0);
        assert_eq!(
            t0.waypoints,
            vec![
                Point::new2(0.0, 0.0),
                Point::new2(1.0, 0.0),
                Point::new2(2.0, 0.0),
                Point::new2(3.0, 0.0)
            ]
        );
        let t1 = &tasks.prefix_tasks[1];
        assert_eq!(t1.q, 1);
        assert_eq!(t1.waypoints, vec![Point::new2(3.0, 0.0), Point::new2(4.0, 0.0)]);

        let s0 = &tasks.suffix_tasks[0];
        assert_eq!(s0.q, 2);
        assert_eq!(
            s0.waypoints,
            vec![
                Point::new2(5.0, 0.0),
                Point::new2(6.0, 0.0),
                Point::new2(7.0, 0.0)
            ]
        );
        let s1 = &tasks.suffix_tasks[1];
        assert_eq!(s1.q, 3);
        assert_eq!(s1.waypoints, vec![Point::new2(7.0, 0.0), Point::new2(5.0, 0.0)]);
        assert!(s1.is_suffix && s0.is_suffix);
        assert!(!t0.is_suffix);
    }

    #[test]
    fn single_q_reach_plan_gives_one_prefix_task() {
        let plan = toy_plan(
            vec![ps(0.0, 0.0, 0), ps(1.0, 0.0, 0), ps(2.0, 0.0, 0)],
            vec![ps(2.0, 0.0, 0)],
        );
        let tasks = decompose(&plan, 0.5);
        assert_eq!(tasks.prefix_tasks.len(), 1);
        assert_eq!(tasks.prefix_tasks[0].waypoints.len(), 3);
        // Stationary cycle collapses to a single waypoint.
        assert_eq!(tasks.suffix_tasks.len(), 1);
        assert_eq!(tasks.suffix_tasks[0].waypoints, vec![Point::new2(2.0, 0.0)]);
        assert_eq!(tasks.suffix_tasks[0].dist_to_go, vec![0.0]);
    }

    #[test]
    fn dist_to_go_is_path_cost_to_go() {
        let task = ReachAvoidTask {
            index: 0,
            q: 0,
            waypoints: vec![
                Point::new2(0.0, 0.0),
                Point::new2(1.0, 0.0),
                Point::new2(2.0, 0.0),
                Point::new2(3.0, 0.0),
            ],
            goal_point: Point::new2(3.0, 0.0),
            ball_radius: 0.5,
            dist_to_go: Vec::new(),
            is_suffix: false,
            boundary_violation: 0,
        };
        assert_eq!(attach_dist(task).dist_to_go, vec![3.0, 2.0, 1.0, 0.0]);

        let task = ReachAvoidTask {
            index: 0,
            q: 0,
            waypoints: vec![
                Point::new2(0.0, 0.0),
                Point::new2(2.0, 0.0),
                Point::new2(3.0, 0.0),
            ],
            goal_point: Point::new2(3.0, 0.0),
            ball_radius: 0.5,
            dist_to_go: Vec::new(),
            is_suffix: false,
            boundary_violation: 0,
        };
        assert_eq!(attach_dist(task).dist_to_go, vec![3.0, 1.0, 0.0]);

        let task = ReachAvoidTask {
            index: 0,
            q: 0,
            waypoints: vec![Point::new2(5.0, 5.0)],
            goal_point: Point::new2(5.0, 5.0),
            ball_radius: 0.5,
            dist_to_go: Vec::new(),
            is_suffix: false,
            boundary_violation: 0,
        };
        assert_eq!(attach_dist(task).dist_to_go, vec![0.0]);
    }

    #[test]
    fn planner_output_round_trips_through_tasks() {
        let ws = crate::planner::tests::scenario("s2_one_blocked");
        let nba = crate::planner::tests::nba_for(&ws, "[]!O && <>(G1 && <>G2)");
        let params = PlanParams::for_workspace(&ws, 1.0, 4000, 11);
        let plan = plan_lasso(&ws, &nba, &params).expect("plan");
        let tasks = decompose(&plan, 2.0);

        let collapse = |pts: Vec<Point>| {
            let mut out: Vec<Point> = Vec::new();
            for p in pts {
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
            out
        };
        let (fp, fs) = tasks.flatten();
        let want_prefix = collapse(plan.prefix.iter().map(|s| s.x).collect());
        let mut want_suffix: Vec<Point> = plan.suffix.iter().map(|s| s.x).collect();
        want_suffix.push(plan.suffix[0].x);
        let want_suffix = collapse(want_suffix);
        assert_eq!(fp, want_prefix);
        assert_eq!(fs, want_suffix);

        for t in tasks.prefix_tasks.iter().chain(&tasks.suffix_tasks) {
            t.check(&ws, 1.0).expect("task invariants hold");
        }
    }

    #[test]
    fn switch_violations_reproduce_planner_totals() {
        for (scene, formula) in [
            ("s2_one_blocked", "[]!O && <>(G1 && <>G2)"),
            ("s3_two_blocked", "[]!O && <>G1 && <>G2 && <>G3"),
            ("s4_recurrent_blocked", "[]!O && []<>G1 && <>G2"),
        ] {
            let ws = crate::planner::tests::scenario(scene);
            let nba = crate::planner::tests::nba_for(&ws, formula);
            let params = PlanParams::for_workspace(&ws, 1.0, 5000, 23);
            let plan = plan_lasso(&ws, &nba, &params).expect("plan");
            let switches = segment_violations(&plan, &nba, &ws);
            let prefix_sum: u64 = switches
                .iter()
                .filter(|s| !s.is_suffix)
                .map(|s| s.viol as u64)
                .sum();
            let suffix_sum: u64 = switches
                .iter()
                .filter(|s| s.is_suffix)
                .map(|s| s.viol as u64)
                .sum();
            assert_eq!(prefix_sum, plan.prefix_violation, "prefix sums on {scene}");
            assert_eq!(suffix_sum, plan.suffix_violation, "suffix sums on {scene}");
        }
    }

    #[test]
    fn blocked_recurrent_goal_pays_once_per_cycle() {
        let ws = crate::planner::tests::scenario("s4_recurrent_blocked");
        let nba = crate::planner::tests::nba_for(&ws, "[]!O && []<>G1 && <>G2");
        let plan = grid_oracle_plan(&ws, &nba, 1.0, 0.5).expect("oracle plan");
        let switches = segment_violations(&plan, &nba, &ws);
        let unit_suffix: Vec<_> = switches
            .iter()
            .filter(|s| s.is_suffix && s.viol > 0)
            .collect();
        assert_eq!(unit_suffix.len(), 1, "one violating boundary per cycle");
        assert_eq!(unit_suffix[0].viol, 1);
        assert_eq!(plan.suffix_violation, 1);
    }

    #[test]
    fn zero_violation_plan_has_all_zero_switches() {
        let ws = crate::planner::tests::scenario("s1_corridor");
        let nba = crate::planner::tests::nba_for(&ws, "[]!O && <>G1");
        let plan = grid_oracle_plan(&ws, &nba, 1.0, 0.5).expect("oracle plan");
        let switches = segment_violations(&plan, &nba, &ws);
        assert!(switches.iter().all(|s| s.viol == 0));
    }

    #[test]
    fn boundary_violations_partition_plan_totals() {
        for (scene, formula) in [
            ("s2_one_blocked", "[]!O && <>(G1 && <>G2)"),
            ("s4_recurrent_blocked", "[]!O && []<>G1 && <>G2"),
        ] {
            let ws = crate::planner::tests::scenario(scene);
            let nba = crate::planner::tests::nba_for(&ws, formula);
            let plan = grid_oracle_plan(&ws, &nba, 1.0, 0.5).expect("oracle plan");
            let mut tasks = decompose(&plan, 2.0);
            attach_boundary_violations(&mut tasks, &plan, &nba, &ws);
            let pv: u64 = tasks.prefix_tasks.iter().map(|t| t.boundary_violation).sum();
            let sv: u64 = tasks.suffix_tasks.iter().map(|t| t.boundary_violation).sum();
            assert_eq!(pv, plan.prefix_violation, "prefix partition on {scene}");
            assert_eq!(sv, plan.suffix_violation, "suffix partition on {scene}");
        }
    }

    #[test]
    fn task_json_exports_required_fields() {
        let plan = toy_plan(
            vec![ps(0.0, 0.0, 0), ps(1.0, 0.0, 0), ps(2.0, 0.0, 1)],
            vec![ps(2.0, 0.0, 1)],
        );
        let tasks = decompose(&plan, 2.0);
        let v = tasks.to_json(2);
        let t = &v["prefix_tasks"][0];
        assert_eq!(t["q"], 0);
        assert_eq!(t["r"], 2.0);
        assert_eq!(t["is_suffix"], false);
        assert!(t["waypoints"].is_array());
        assert!(t["dist_to_go"].is_array());

        let back = TaskLasso::from_json(&v).unwrap();
        assert_eq!(back.prefix_tasks.len(), tasks.prefix_tasks.len());
        assert_eq!(back.suffix_tasks.len(), tasks.suffix_tasks.len());
        for (a, b) in back.prefix_tasks.iter().zip(&tasks.prefix_tasks) {
            assert_eq!(a.waypoints, b.waypoints);
            assert_eq!(a.dist_to_go, b.dist_to_go);
            assert_eq!(a.q, b.q);
        }
    }
}
