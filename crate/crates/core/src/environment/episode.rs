//! Episode simulation: progression function, prioritized reward, and the
//! Markovian bookkeeping that makes the running minimum a state variable.

use super::dynamics::{Action, DynState, DynamicsModel};
use super::RewardSpec;
use crate::decomposition::ReachAvoidTask;
use crate::workspace::{Point, Workspace};
use rand::Rng;

/// Progression value at `x`: the smallest dist_to_go among waypoints
/// whose guidance ball contains `x`, infinite outside every ball.
pub fn progression_d(x: Point, task: &ReachAvoidTask) -> f64 {
    progression_with_index(x, task).0
}

/// Progression value plus the index of the waypoint attaining it.
pub fn progression_with_index(x: Point, task: &ReachAvoidTask) -> (f64, Option<usize>) {
    let mut best = f64::INFINITY;
    let mut idx = None;
    for (j, w) in task.waypoints.iter().enumerate() {
        if x.dist(*w) <= task.ball_radius && task.dist_to_go[j] < best {
            best = task.dist_to_go[j];
            idx = Some(j);
        }
    }
    (best, idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    None,
    Progress,
    Goal,
    Collision,
    Timeout,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::None => "",
            Event::Progress => "progress",
            Event::Goal => "goal",
            Event::Collision => "collision",
            Event::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EpisodeParams {
    pub t_max: usize,
    /// Keep running after the goal (absorbing, repeated r_++) instead of
    /// terminating on first arrival.
    pub absorb_at_goal: bool,
    /// Violation charged once when the episode first reaches the goal.
    pub boundary_violation: u64,
}

impl EpisodeParams {
    /// Default horizon: n_bar steps to the goal with slack, capped at
    /// 4 x n_bar per episode.
    pub fn for_task(task: &ReachAvoidTask, model: &DynamicsModel) -> EpisodeParams {
        let n_bar = n_bar_for(task, model);
        EpisodeParams {
            t_max: 4 * n_bar,
            absorb_at_goal: false,
            boundary_violation: 0,
        }
    }
}

/// Max steps to the goal: 1.5 x segment length at full speed, at least 1.
pub fn n_bar_for(task: &ReachAvoidTask, model: &DynamicsModel) -> usize {
    let len = task.dist_to_go.first().copied().unwrap_or(0.0);
    ((1.5 * len / (model.v_max() * model.dt)).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy)]
pub struct EpisodeState {
    pub s: DynState,
    pub t: usize,
    pub d_min: f64,
    pub closest_waypoint: Option<usize>,
    pub violation: u64,
    pub reached_goal: bool,
    pub done: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct StepOut {
    pub reward: f64,
    pub done: bool,
    pub event: Event,
    pub d: f64,
}

/// One simulation bound to a task; owns its episode state, shares the
/// scene and spec read-only.
pub struct Episode<'a> {
    pub ws: &'a Workspace,
    pub task: &'a ReachAvoidTask,
    pub spec: &'a RewardSpec,
    pub model: &'a DynamicsModel,
    pub params: EpisodeParams,
    pub state: EpisodeState,
}

impl<'a> Episode<'a> {
    pub fn new(
        ws: &'a Workspace,
        task: &'a ReachAvoidTask,
        spec: &'a RewardSpec,
        model: &'a DynamicsModel,
        params: EpisodeParams,
        s0: DynState,
    ) -> Episode<'a> {
        let x0 = model.project(&s0);
        let (d0, idx) = progression_with_index(x0, task);
        Episode {
            ws,
            task,
            spec,
            model,
            params,
            state: EpisodeState {
                s: s0,
                t: 0,
                d_min: d0,
                closest_waypoint: idx,
                violation: 0,
                reached_goal: false,
                done: false,
            },
        }
    }

    fn collides(&self, s: &DynState) -> bool {
        let x = self.model.project(s);
        !self.ws.in_bounds(x) || self.ws.point_in_obstacle(x)
    }

    /// Advances one control period and applies the prioritized reward:
    /// collision beats goal beats progress beats nothing.
    pub fn step(&mut self, a: Action, rng: &mut impl Rng) -> StepOut {
        assert!(!self.state.done, "episode already finished");
        let a = self.model.clamp_action(self.model.perturb(a, rng));
        let (mid, next) = self.model.integrate(&self.state.s, &a);
        self.state.s = next;
        self.state.t += 1;

        let mut out = if self.collides(&mid) || self.collides(&next) {
            StepOut {
                reward: self.spec.r_minus,
                done: true,
                event: Event::Collision,
                d: f64::INFINITY,
            }
        } else {
            let x = self.model.project(&next);
            let (d, idx) = progression_with_index(x, self.task);
            let step = if d == 0.0 {
                if !self.state.reached_goal {
                    self.state.reached_goal = true;
                    self.state.violation += self.params.boundary_violation;
                }
                StepOut {
                    reward: self.spec.r_plusplus,
                    done: !self.params.absorb_at_goal,
                    event: Event::Goal,
                    d,
                }
            } else if d < self.state.d_min {
                StepOut {
                    reward: self.spec.r_plus,
                    done: false,
                    event: Event::Progress,
                    d,
                }
            } else {
                StepOut {
                    reward: 0.0,
                    done: false,
                    event: Event::None,
                    d,
                }
            };
            if d < self.state.d_min {
                self.state.d_min = d;
                self.state.closest_waypoint = idx;
            }
            step
        };

        if !out.done && self.state.t >= self.params.t_max {
            out.done = true;
            if out.event == Event::None {
                out.event = Event::Timeout;
            }
        }
        self.state.done = out.done;
        out
    }
}
