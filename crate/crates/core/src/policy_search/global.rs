//! The switched global controller: prefix policies once, suffix policies
//! forever, advancing whenever the active task's progression hits zero.

use super::{mix_seed, observe, Policy};
use crate::decomposition::{ReachAvoidTask, TaskLasso};
use crate::environment::{DynState, DynamicsModel, Episode, EpisodeParams, Event, RewardSpec};
use crate::workspace::Workspace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct GlobalPolicy {
    pub tasks: TaskLasso,
    /// Aligned with prefix tasks then suffix tasks.
    pub policies: Vec<Policy>,
}

/// Pairs one policy per task, in prefix-then-suffix order.
pub fn concatenate(tasks: TaskLasso, policies: Vec<Policy>) -> Result<GlobalPolicy, String> {
    let want = tasks.prefix_tasks.len() + tasks.suffix_tasks.len();
    if policies.len() != want {
        return Err(format!(
            "need {want} policies (one per task), got {}",
            policies.len()
        ));
    }
    Ok(GlobalPolicy { tasks, policies })
}

impl GlobalPolicy {
    fn prefix_pairs(&self) -> impl Iterator<Item = (&ReachAvoidTask, &Policy)> {
        self.tasks.prefix_tasks.iter().zip(&self.policies)
    }

    fn suffix_pairs(&self) -> impl Iterator<Item = (&ReachAvoidTask, &Policy)> {
        self.tasks
            .suffix_tasks
            .iter()
            .zip(&self.policies[self.tasks.prefix_tasks.len()..])
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalMetrics {
    pub episodes: usize,
    /// Fraction of episodes completing the prefix and every requested
    /// suffix cycle.
    pub success_rate: f64,
    /// Mean realized violation per suffix cycle over successful episodes.
    pub mean_violation_per_cycle: f64,
    pub mean_return: f64,
    pub collision_rate: f64,
    /// Episodes that stalled at a hand-off (timeout without collision).
    pub handoff_failure_rate: f64,
}

struct TaskRun {
    reached: bool,
    collided: bool,
    switched_at_zero: bool,
}

/// Drives one task episode from the current dynamic state; rewards are
/// discounted from the global step count.
fn run_task(
    ws: &Workspace,
    task: &ReachAvoidTask,
    policy: &Policy,
    spec: &RewardSpec,
    model: &DynamicsModel,
    s: &mut DynState,
    global_t: &mut usize,
    ret: &mut f64,
    rng: &mut ChaCha8Rng,
) -> TaskRun {
    let mut params = EpisodeParams::for_task(task, model);
    params.boundary_violation = task.boundary_violation;
    let mut ep = Episode::new(ws, task, spec, model, params, *s);
    let mut out = TaskRun {
        reached: false,
        collided: false,
        switched_at_zero: true,
    };
    while !ep.state.done {
        let obs = observe(task, model, &ep.state);
        let a = policy.act(&obs[..policy.obs_dim], model);
        let step = ep.step(a, rng);
        *ret += spec.gamma.powi(*global_t as i32) * step.reward;
        *global_t += 1;
        match step.event {
            Event::Goal => {
                out.reached = true;
                out.switched_at_zero = step.d == 0.0;
            }
            Event::Collision => out.collided = true,
            _ => {}
        }
    }
    *s = ep.state.s;
    out
}

/// Monte-Carlo evaluation over randomized initial conditions; metrics
/// are deterministic for a fixed seed.
pub fn evaluate(
    gp: &GlobalPolicy,
    ws: &Workspace,
    spec: &RewardSpec,
    model: &DynamicsModel,
    episodes: usize,
    horizon_cycles: usize,
    seed: u64,
) -> EvalMetrics {
    #[derive(Default)]
    struct Tally {
        success: usize,
        collided: usize,
        handoff: usize,
        viol_cycles: Vec<f64>,
        returns: f64,
    }

    let per: Vec<(bool, bool, bool, Option<f64>, f64)> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xE7A1, i as u64));
            let mut s = model.initial_state(ws.init(), &mut rng);
            let mut global_t = 0usize;
            let mut ret = 0.0;
            let mut collided = false;
            let mut stalled = false;
            let mut cycles_done = 0usize;
            let mut viol_sum = 0u64;

            'run: {
                for (task, policy) in gp.prefix_pairs() {
                    let r = run_task(ws, task, policy, spec, model, &mut s, &mut global_t, &mut ret, &mut rng);
                    debug_assert!(r.reached <= r.switched_at_zero);
                    if !r.reached {
                        collided = r.collided;
                        stalled = !r.collided;
                        break 'run;
                    }
                }
                for _ in 0..horizon_cycles {
                    if gp.tasks.suffix_tasks.is_empty() {
                        break;
                    }
                    let mut cycle_viol = 0u64;
                    for (task, policy) in gp.suffix_pairs() {
                        let r = run_task(ws, task, policy, spec, model, &mut s, &mut global_t, &mut ret, &mut rng);
                        if !r.reached {
                            collided = r.collided;
                            stalled = !r.collided;
                            break 'run;
                        }
                        cycle_viol += task.boundary_violation;
                    }
                    cycles_done += 1;
                    viol_sum += cycle_viol;
                }
            }

            let success = !collided && !stalled;
            let per_cycle = if success && cycles_done > 0 {
                Some(viol_sum as f64 / cycles_done as f64)
            } else if success {
                Some(0.0)
            } else {
                None
            };
            (success, collided, stalled, per_cycle, ret)
        })
        .collect();

    let mut t = Tally::default();
    for (success, collided, stalled, per_cycle, ret) in per {
        t.success += success as usize;
        t.collided += collided as usize;
        t.handoff += stalled as usize;
        if let Some(v) = per_cycle {
            t.viol_cycles.push(v);
        }
        t.returns += ret;
    }

    let n = episodes.max(1) as f64;
    EvalMetrics {
        episodes,
        success_rate: t.success as f64 / n,
        mean_violation_per_cycle: if t.viol_cycles.is_empty() {
            f64::NAN
        } else {
            t.viol_cycles.iter().sum::<f64>() / t.viol_cycles.len() as f64
        },
        mean_return: t.returns / n,
        collision_rate: t.collided as f64 / n,
        handoff_failure_rate: t.handoff as f64 / n,
    }
}

impl EvalMetrics {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "episodes": self.episodes,
            "success_rate": self.success_rate,
            "mean_violation_per_cycle": if self.mean_violation_per_cycle.is_nan() {
                serde_json::Value::Null
            } else {
                serde_json::json!(self.mean_violation_per_cycle)
            },
            "mean_return": self.mean_return,
            "collision_rate": self.collision_rate,
            "handoff_failure_rate": self.handoff_failure_rate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::attach_dist;
    use crate::policy_search::{success_rate, train_subtask, Budget};
    use crate::workspace::{Point, WorkspaceBuilder};

    fn straight_task(idx: usize, from: Point, to: Point, suffix: bool) -> ReachAvoidTask {
        let mid = from.lerp(to, 0.5);
        attach_dist(ReachAvoidTask {
            index: idx,
            q: idx,
            waypoints: vec![from, mid, to],
            goal_point: to,
            ball_radius: 2.0,
            dist_to_go: Vec::new(),
            is_suffix: suffix,
            boundary_violation: 0,
        })
    }

    #[test]
    fn concatenate_enforces_one_policy_per_task() {
        let tasks = TaskLasso {
            prefix_tasks: vec![straight_task(
                0,
                Point::new2(1.0, 5.0),
                Point::new2(5.0, 5.0),
                false,
            )],
            suffix_tasks: vec![straight_task(
                1,
                Point::new2(5.0, 5.0),
                Point::new2(9.0, 5.0),
                true,
            )],
        };
        let model = DynamicsModel::dubins(1.0, 1.0, 0.1);
        assert!(concatenate(tasks.clone(), vec![Policy::zeros(&model)]).is_err());
        assert!(concatenate(
            tasks,
            vec![Policy::zeros(&model), Policy::zeros(&model)]
        )
        .is_ok());
    }

    #[test]
    fn trained_lasso_patrols_and_reports_violations() {
        let ws = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[2.0, 5.0])
            .build()
            .unwrap();
        let model = DynamicsModel::dubins(1.0, 1.0, 0.1);
        let spec = RewardSpec::auto(-10.0, 1.0, 0.99, 2.0, 3, 120).unwrap();

        // Prefix: drive east; suffix: shuttle between two stations.
        let prefix = straight_task(0, Point::new2(2.0, 5.0), Point::new2(5.0, 5.0), false);
        let mut s1 = straight_task(1, Point::new2(5.0, 5.0), Point::new2(8.0, 5.0), true);
        let mut s2 = straight_task(2, Point::new2(8.0, 5.0), Point::new2(5.0, 5.0), true);
        s1.boundary_violation = 1;
        s2.boundary_violation = 0;

        let budget = Budget {
            pop: 32,
            elites: 6,
            generations: 15,
            episodes_per_candidate: 3,
            seed: 11,
        };
        let mut policies = Vec::new();
        for task in [&prefix, &s1, &s2] {
            let out = train_subtask(&ws, task, &spec, &model, &budget);
            let sr = success_rate(&ws, task, &spec, &model, &out.policy, 30, 42);
            assert!(sr >= 0.9, "task {} success {sr}", task.index);
            policies.push(out.policy);
        }
        let gp = concatenate(
            TaskLasso {
                prefix_tasks: vec![prefix],
                suffix_tasks: vec![s1, s2],
            },
            policies,
        )
        .unwrap();

        let m = evaluate(&gp, &ws, &spec, &model, 20, 2, 77);
        assert!(m.success_rate >= 0.8, "lasso success {}", m.success_rate);
        // Realized violation per cycle equals the attached boundary sum.
        assert!((m.mean_violation_per_cycle - 1.0).abs() < 1e-9);
        assert_eq!(m.episodes, 20);

        let m2 = evaluate(&gp, &ws, &spec, &model, 20, 2, 77);
        assert_eq!(m.success_rate, m2.success_rate);
        assert_eq!(m.mean_return, m2.mean_return);
    }

    #[test]
    fn empty_suffix_runs_prefix_only() {
        let ws = WorkspaceBuilder::new(2, &[0.0, 0.0], &[10.0, 10.0])
            .init(&[5.0, 5.0])
            .build()
            .unwrap();
        let model = DynamicsModel::dubins(1.0, 1.0, 0.1);
        let spec = RewardSpec::auto(-10.0, 1.0, 0.99, 2.0, 1, 10).unwrap();
        let task = attach_dist(ReachAvoidTask {
            index: 0,
            q: 0,
            waypoints: vec![Point::new2(5.0, 5.0)],
            goal_point: Point::new2(5.0, 5.0),
            ball_radius: 2.0,
            dist_to_go: Vec::new(),
            is_suffix: false,
            boundary_violation: 0,
        });
        let gp = concatenate(
            TaskLasso {
                prefix_tasks: vec![task],
                suffix_tasks: vec![],
            },
            vec![Policy::zeros(&model)],
        )
        .unwrap();
        let m = evaluate(&gp, &ws, &spec, &model, 10, 3, 5);
        assert_eq!(m.success_rate, 1.0);
        assert_eq!(m.mean_violation_per_cycle, 0.0);
    }
}
