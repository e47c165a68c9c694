//! Cross-entropy training of one sub-task controller: sample parameter
//! candidates, score them on simulated episodes, refit to the elites.

use super::{mix_seed, observe, Policy};
use crate::decomposition::ReachAvoidTask;
use crate::environment::{
    discounted_return, DynState, DynamicsModel, Episode, EpisodeParams, Event, RewardSpec,
};
use crate::workspace::Workspace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub pop: usize,
    pub elites: usize,
    pub generations: usize,
    pub episodes_per_candidate: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            pop: 48,
            elites: 8,
            generations: 40,
            episodes_per_candidate: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenStat {
    pub gen: usize,
    pub mean: f64,
    pub max: f64,
    pub elite_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingLog {
    pub stats: Vec<GenStat>,
    /// Whether any training episode reached the task goal; false flags a
    /// budget-exhausted-without-goal outcome.
    pub reached_goal: bool,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,mean,max,elite-threshold\n");
        for s in &self.stats {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.gen, s.mean, s.max, s.elite_threshold
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: Policy,
    pub log: TrainingLog,
}

const SIGMA_FLOOR: f64 = 0.05;

/// Start state for one training or evaluation episode: position jittered
/// inside the first guidance ball, heading and velocity randomized.
fn start_state(
    ws: &Workspace,
    task: &ReachAvoidTask,
    model: &DynamicsModel,
    rng: &mut impl Rng,
) -> DynState {
    let w0 = task.waypoints[0];
    let dim = ws.dimension();
    let mut pos = w0;
    for _ in 0..10 {
        let mut cand = w0;
        for i in 0..dim {
            cand.0[i] += rng.random_range(-0.5..0.5) * task.ball_radius;
        }
        if cand.dist(w0) <= task.ball_radius / 2.0
            && ws.in_bounds(cand)
            && !ws.point_in_obstacle(cand)
        {
            pos = cand;
            break;
        }
    }
    model.initial_state(pos, rng)
}

/// Runs one episode under the policy; returns the discounted return and
/// whether the goal was reached.
fn rollout(
    ws: &Workspace,
    task: &ReachAvoidTask,
    spec: &RewardSpec,
    model: &DynamicsModel,
    policy: &Policy,
    params: EpisodeParams,
    rng: &mut impl Rng,
) -> (f64, bool) {
    let s0 = start_state(ws, task, model, rng);
    let mut ep = Episode::new(ws, task, spec, model, params, s0);
    let mut rewards = Vec::new();
    let mut reached = false;
    while !ep.state.done {
        let obs = observe(task, model, &ep.state);
        let a = policy.act(&obs[..policy.obs_dim], model);
        let out = ep.step(a, rng);
        rewards.push(out.reward);
        if out.event == Event::Goal {
            reached = true;
        }
    }
    (discounted_return(rewards, spec.gamma), reached)
}

/// Cross-entropy search over policy parameters. Candidate scores within
/// a generation share episode seeds, so the comparison is paired and the
/// whole run is deterministic for a fixed budget.
pub fn train_subtask(
    ws: &Workspace,
    task: &ReachAvoidTask,
    spec: &RewardSpec,
    model: &DynamicsModel,
    budget: &Budget,
) -> TrainOutcome {
    assert!(budget.elites >= 1 && budget.elites <= budget.pop);
    let params = EpisodeParams::for_task(task, model);
    let template = Policy::zeros(model);
    let dim = template.theta.len();
    let mut mu = vec![0.0; dim];
    let mut sigma = vec![1.0; dim];
    let mut best_theta = mu.clone();
    let mut best_score = f64::NEG_INFINITY;
    let mut stats = Vec::new();
    let mut reached_goal = false;

    for gen in 0..budget.generations {
        let mut gen_rng = ChaCha8Rng::seed_from_u64(mix_seed(budget.seed, 0xC311, gen as u64));
        let thetas: Vec<Vec<f64>> = (0..budget.pop)
            .map(|_| {
                (0..dim)
                    .map(|j| mu[j] + sigma[j] * gauss(&mut gen_rng))
                    .collect()
            })
            .collect();

        let scored: Vec<(f64, bool)> = thetas
            .par_iter()
            .map(|theta| {
                let policy = Policy::with_theta(model, theta.clone());
                let mut total = 0.0;
                let mut saw_goal = false;
                for e in 0..budget.episodes_per_candidate {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
                        budget.seed,
                        gen as u64,
                        0x1000 + e as u64,
                    ));
                    let (ret, reached) = rollout(ws, task, spec, model, &policy, params, &mut rng);
                    total += ret;
                    saw_goal |= reached;
                }
                (total / budget.episodes_per_candidate as f64, saw_goal)
            })
            .collect();

        reached_goal |= scored.iter().any(|s| s.1);
        let mut order: Vec<usize> = (0..budget.pop).collect();
        order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0).then(a.cmp(&b)));
        let elites = &order[..budget.elites];
        let threshold = scored[*elites.last().unwrap()].0;
        let mean = scored.iter().map(|s| s.0).sum::<f64>() / budget.pop as f64;
        let max = scored[order[0]].0;
        stats.push(GenStat {
            gen,
            mean,
            max,
            elite_threshold: threshold,
        });
        if max > best_score {
            best_score = max;
            best_theta = thetas[order[0]].clone();
        }

        for j in 0..dim {
            let m = elites.iter().map(|&i| thetas[i][j]).sum::<f64>() / budget.elites as f64;
            let var = elites
                .iter()
                .map(|&i| (thetas[i][j] - m).powi(2))
                .sum::<f64>()
                / budget.elites as f64;
            mu[j] = m;
            sigma[j] = var.sqrt().max(SIGMA_FLOOR);
        }
    }

    let mut policy = Policy::with_theta(model, best_theta);
    policy.explore_std = sigma;
    TrainOutcome {
        policy,
        log: TrainingLog {
            stats,
            reached_goal,
        },
    }
}

/// Fraction of fresh episodes in which the policy reaches the task goal.
pub fn success_rate(
    ws: &Workspace,
    task: &ReachAvoidTask,
    spec: &RewardSpec,
    model: &DynamicsModel,
    policy: &Policy,
    episodes: usize,
    seed: u64,
) -> f64 {
    let params = EpisodeParams::for_task(task, model);
    let wins: usize = (0..episodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5CCE, e as u64));
            let (_, reached) = rollout(ws, task, spec, model, policy, params, &mut rng);
            reached as usize
        })
        .sum();
    wins as f64 / episodes as f64
}

/// Standard normal via Box-Muller on the given generator.
fn gauss(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}
