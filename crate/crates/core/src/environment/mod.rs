//! Simulated continuous environment: nonlinear dynamics, workspace
//! projection, the prioritized progression reward, and episode traces.

mod dynamics;
mod episode;
mod trace;

pub use dynamics::{Action, DynKind, DynState, DynamicsModel, MAX_ACTION, MAX_STATE};
pub use episode::{
    n_bar_for, progression_d, progression_with_index, Episode, EpisodeParams, EpisodeState, Event,
    StepOut,
};
pub use trace::{discounted_return, Trace, TraceRow};

use serde::{Deserialize, Serialize};

/// Reward constants of the prioritized scheme, validated against the
/// sufficiency bound so goal-reaching always beats ball-chaining.
#[derive(Debug, Clone, Copy)]
pub struct RewardSpec {
    pub r_minus: f64,
    pub r_plus: f64,
    pub r_plusplus: f64,
    pub gamma: f64,
    pub ball_radius: f64,
}

impl RewardSpec {
    /// Validates signs, the discount range, and the sufficiency bound
    /// `r_plusplus >= r_plus (1 - gamma^N) / gamma^n_bar` for `n`
    /// waypoints and `n_bar` max steps to the goal.
    pub fn new(
        r_minus: f64,
        r_plus: f64,
        r_plusplus: f64,
        gamma: f64,
        ball_radius: f64,
        n: usize,
        n_bar: usize,
    ) -> Result<RewardSpec, String> {
        if !(r_minus < 0.0) {
            return Err(format!("r_minus must be negative, got {r_minus}"));
        }
        if !(r_plus > 0.0) {
            return Err(format!("r_plus must be positive, got {r_plus}"));
        }
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(format!("gamma must lie in (0,1), got {gamma}"));
        }
        if !(ball_radius > 0.0) {
            return Err(format!("ball radius must be positive, got {ball_radius}"));
        }
        if !(r_plusplus > 0.0) {
            return Err(format!("r_plusplus must be positive, got {r_plusplus}"));
        }
        let bound = reward_bound(gamma, n, n_bar, r_plus);
        // Relative slack absorbs ULP-level drift between call sites.
        if r_plusplus < bound * (1.0 - 1e-9) {
            return Err(format!(
                "r_plusplus {r_plusplus} below the sufficiency bound {bound} \
                 (n={n}, n_bar={n_bar}, gamma={gamma})"
            ));
        }
        Ok(RewardSpec {
            r_minus,
            r_plus,
            r_plusplus,
            gamma,
            ball_radius,
        })
    }

    /// Sets `r_plusplus` to exactly the sufficiency bound.
    pub fn auto(
        r_minus: f64,
        r_plus: f64,
        gamma: f64,
        ball_radius: f64,
        n: usize,
        n_bar: usize,
    ) -> Result<RewardSpec, String> {
        let b = reward_bound(gamma, n, n_bar, r_plus);
        RewardSpec::new(r_minus, r_plus, b, gamma, ball_radius, n, n_bar)
    }
}

/// Sufficiency threshold for the goal reward:
/// `r_plus * (1 - gamma^n) / gamma^n_bar`.
pub fn reward_bound(gamma: f64, n: usize, n_bar: usize, r_plus: f64) -> f64 {
    r_plus * (1.0 - gamma.powi(n as i32)) / gamma.powi(n_bar as i32)
}

/// Serializable environment configuration; `r_plusplus` is either the
/// literal `"auto"` or an explicit value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    /// `"dubins"` or `"quad"`; unset picks by workspace dimension.
    #[serde(default)]
    pub dynamics: Option<String>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_one")]
    pub v_max: f64,
    #[serde(default = "default_one")]
    pub omega_max: f64,
    #[serde(default = "default_one")]
    pub a_max: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_r_minus")]
    pub r_minus: f64,
    #[serde(default = "default_one")]
    pub r_plus: f64,
    #[serde(default)]
    pub r_plusplus: RPlusPlus,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RPlusPlus {
    Value(f64),
    Keyword(String),
}

impl Default for RPlusPlus {
    fn default() -> Self {
        RPlusPlus::Keyword("auto".into())
    }
}

impl RPlusPlus {
    /// Resolves to a concrete value; `"auto"` takes the sufficiency bound.
    pub fn resolve(&self, gamma: f64, n: usize, n_bar: usize, r_plus: f64) -> Result<f64, String> {
        match self {
            RPlusPlus::Value(v) => Ok(*v),
            RPlusPlus::Keyword(k) if k == "auto" => Ok(reward_bound(gamma, n, n_bar, r_plus)),
            RPlusPlus::Keyword(k) => Err(format!("r_plusplus must be a number or \"auto\", got {k:?}")),
        }
    }
}

impl EnvConfig {
    /// Builds the dynamics model this config describes; without an
    /// explicit `dynamics` entry a planar workspace gets the Dubins car
    /// and a spatial one the kinematic quadrotor.
    pub fn model(&self, workspace_dim: usize) -> Result<DynamicsModel, String> {
        let kind = match self.dynamics.as_deref() {
            Some(k) => k.to_string(),
            None => if workspace_dim >= 3 { "quad" } else { "dubins" }.to_string(),
        };
        let mut m = match kind.as_str() {
            "dubins" => {
                if workspace_dim >= 3 {
                    return Err("dubins dynamics need a planar workspace".into());
                }
                DynamicsModel::dubins(self.v_max, self.omega_max, self.dt)
            }
            "quad" => DynamicsModel::quad(self.a_max, self.v_max, self.dt),
            other => return Err(format!("unknown dynamics {other:?}; use \"dubins\" or \"quad\"")),
        };
        m.noise_std = self.noise_std;
        Ok(m)
    }

    /// Resolves the reward constants for a task with `n` waypoints and a
    /// goal deadline of `n_bar` steps.
    pub fn reward_spec(&self, ball_radius: f64, n: usize, n_bar: usize) -> Result<RewardSpec, String> {
        let rpp = self.r_plusplus.resolve(self.gamma, n, n_bar, self.r_plus)?;
        RewardSpec::new(self.r_minus, self.r_plus, rpp, self.gamma, ball_radius, n, n_bar)
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dynamics: None,
            dt: default_dt(),
            v_max: 1.0,
            omega_max: 1.0,
            a_max: 1.0,
            gamma: default_gamma(),
            r_minus: default_r_minus(),
            r_plus: 1.0,
            r_plusplus: RPlusPlus::default(),
            noise_std: 0.0,
            seed: 0,
        }
    }
}

fn default_dt() -> f64 {
    0.1
}
fn default_one() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    0.99
}
fn default_r_minus() -> f64 {
    -10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_bound_matches_the_frozen_oracle_value() {
        // (1 - 0.99^10) / 0.99^100, frozen from an exact rational
        // evaluation.
        let v = reward_bound(0.99, 10, 100, 1.0);
        assert!(
            (v - 0.261228077985109768).abs() < 1e-12,
            "bound came out {v}"
        );
        // N = 0: no intermediate reward attainable.
        assert_eq!(reward_bound(0.99, 0, 50, 1.0), 0.0);
        // gamma 0.5, N = 1, n_bar = 1.
        assert_eq!(reward_bound(0.5, 1, 1, 1.0), 1.0);
    }

    #[test]
    fn spec_constructor_rejects_bound_breakers() {
        assert!(RewardSpec::new(-1.0, 1.0, 10.0, 0.99, 1.0, 10, 100).is_ok());
        let below = reward_bound(0.99, 10, 100, 1.0) * 0.99;
        assert!(RewardSpec::new(-1.0, 1.0, below, 0.99, 1.0, 10, 100).is_err());
        assert!(RewardSpec::new(1.0, 1.0, 10.0, 0.99, 1.0, 10, 100).is_err());
        assert!(RewardSpec::new(-1.0, -1.0, 10.0, 0.99, 1.0, 10, 100).is_err());
        assert!(RewardSpec::new(-1.0, 1.0, 10.0, 1.5, 1.0, 10, 100).is_err());
        let auto = RewardSpec::auto(-1.0, 1.0, 0.99, 1.0, 10, 100).unwrap();
        assert!((auto.r_plusplus - reward_bound(0.99, 10, 100, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn env_config_parses_auto_and_value_forms() {
        let c: EnvConfig = serde_json::from_str(r#"{"r_plusplus": "auto"}"#).unwrap();
        assert!(matches!(&c.r_plusplus, RPlusPlus::Keyword(k) if k == "auto"));
        assert_eq!(c.dt, 0.1);
        let c: EnvConfig = serde_json::from_str(r#"{"r_plusplus": 42.0, "seed": 7}"#).unwrap();
        assert_eq!(c.r_plusplus.resolve(0.99, 1, 1, 1.0).unwrap(), 42.0);
        assert_eq!(c.seed, 7);
        let c: EnvConfig = serde_json::from_str(r#"{"r_plusplus": "bogus"}"#).unwrap();
        assert!(c.r_plusplus.resolve(0.99, 1, 1, 1.0).is_err());
        assert!(serde_json::from_str::<EnvConfig>(r#"{"typo_key": 1}"#).is_err());
    }
}
