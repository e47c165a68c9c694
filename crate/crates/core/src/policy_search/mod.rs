//! Controller synthesis per reach-avoid task: linear policies over
//! task-relative features, cross-entropy training, concatenation into
//! the global switched policy, and Monte-Carlo evaluation.

mod cem;
mod global;

pub use cem::{success_rate, train_subtask, Budget, GenStat, TrainOutcome, TrainingLog};
pub use global::{concatenate, evaluate, EvalMetrics, GlobalPolicy};

use crate::decomposition::ReachAvoidTask;
use crate::environment::{Action, DynKind, DynamicsModel, EpisodeState};
use serde::{Deserialize, Serialize};

pub const OBS_MAX: usize = 8;

/// Affine controller: one weight row per actuator over the observation
/// features, squashed into the actuator bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Policy {
    /// Feature map identifier; fixed per dynamics kind.
    pub features: String,
    pub obs_dim: usize,
    pub act_dim: usize,
    /// Row-major act_dim x obs_dim weights.
    pub theta: Vec<f64>,
    /// Final sampling std per parameter, kept for reproducibility.
    pub explore_std: Vec<f64>,
}

impl Policy {
    pub fn zeros(model: &DynamicsModel) -> Policy {
        let obs_dim = obs_dim_for(model);
        let act_dim = model.action_dim();
        Policy {
            features: feature_name(model).to_string(),
            obs_dim,
            act_dim,
            theta: vec![0.0; obs_dim * act_dim],
            explore_std: vec![1.0; obs_dim * act_dim],
        }
    }

    pub fn with_theta(model: &DynamicsModel, theta: Vec<f64>) -> Policy {
        let mut p = Policy::zeros(model);
        assert_eq!(theta.len(), p.theta.len());
        p.theta = theta;
        p
    }

    /// Maps features to a bounded action: speed through a sigmoid, turn
    /// rate and accelerations through tanh.
    pub fn act(&self, obs: &[f64], model: &DynamicsModel) -> Action {
        let row = |i: usize| -> f64 {
            self.theta[i * self.obs_dim..(i + 1) * self.obs_dim]
                .iter()
                .zip(obs)
                .map(|(w, o)| w * o)
                .sum()
        };
        let mut a = Action::default();
        match model.kind {
            DynKind::Dubins { v_max, omega_max } => {
                a.0[0] = v_max * sigmoid(row(0));
                a.0[1] = omega_max * row(1).tanh();
            }
            DynKind::KinematicQuad { a_max, .. } => {
                for i in 0..3 {
                    a.0[i] = a_max * row(i).tanh();
                }
            }
        }
        a
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("policy serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Policy, String> {
        let p: Policy = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        if p.theta.len() != p.obs_dim * p.act_dim {
            return Err("theta length does not match obs_dim x act_dim".into());
        }
        Ok(p)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn feature_name(model: &DynamicsModel) -> &'static str {
    match model.kind {
        DynKind::Dubins { .. } => "dubins-bearing-carrot",
        DynKind::KinematicQuad { .. } => "quad-delta-velocity",
    }
}

pub fn obs_dim_for(model: &DynamicsModel) -> usize {
    match model.kind {
        DynKind::Dubins { .. } => 4,
        DynKind::KinematicQuad { .. } => 7,
    }
}

/// Guidance target: the waypoint after the closest visited one, so the
/// controller always chases the next ball along the tube.
pub fn carrot_index(task: &ReachAvoidTask, es: &EpisodeState) -> usize {
    let last = task.waypoints.len() - 1;
    match es.closest_waypoint {
        None => 0,
        Some(j) => (j + 1).min(last),
    }
}

/// Task-relative observation; see `feature_name` for the layout.
pub fn observe(task: &ReachAvoidTask, model: &DynamicsModel, es: &EpisodeState) -> [f64; OBS_MAX] {
    let mut obs = [0.0; OBS_MAX];
    let target = task.waypoints[carrot_index(task, es)];
    let scale = 4.0 * task.ball_radius;
    match model.kind {
        DynKind::Dubins { .. } => {
            let (dx, dy) = (target.x() - es.s.0[0], target.y() - es.s.0[1]);
            let d = (dx * dx + dy * dy).sqrt();
            let bearing = dy.atan2(dx) - es.s.0[2];
            obs[0] = bearing.cos();
            obs[1] = bearing.sin();
            obs[2] = (d / scale).min(1.0);
            obs[3] = 1.0;
            if d < 1e-9 {
                obs[0] = 1.0;
                obs[1] = 0.0;
            }
        }
        DynKind::KinematicQuad { v_max, .. } => {
            let mut d = 0.0;
            let mut delta = [0.0; 3];
            for i in 0..3 {
                delta[i] = target.0[i] - es.s.0[i];
                d += delta[i] * delta[i];
            }
            let d = d.sqrt();
            let f = if d < 1e-9 { 0.0 } else { (d / scale).min(1.0) / d };
            for i in 0..3 {
                obs[i] = delta[i] * f;
                obs[3 + i] = es.s.0[3 + i] / v_max;
            }
            obs[6] = 1.0;
        }
    }
    obs
}

pub(crate) fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    let mut x = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ c.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
