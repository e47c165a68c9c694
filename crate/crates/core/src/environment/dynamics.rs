//! Continuous dynamics: a Dubins car and a kinematic quad, integrated
//! with fixed-step RK4 under zero-order-hold controls.

use crate::workspace::Point;
use rand::Rng;

pub const MAX_STATE: usize = 6;
pub const MAX_ACTION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynKind {
    /// State (x, y, theta); controls (v in [0, v_max], omega in [-omega_max, omega_max]).
    Dubins { v_max: f64, omega_max: f64 },
    /// State (position, velocity) in R^3; control acceleration per axis in
    /// [-a_max, a_max]. Speed is clamped to v_max after each step so the
    /// max-steps-to-goal horizon stays finite.
    KinematicQuad { a_max: f64, v_max: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicsModel {
    pub kind: DynKind,
    pub dt: f64,
    /// Std of the Gaussian perturbation added to each control; 0 keeps the
    /// dynamics deterministic.
    pub noise_std: f64,
}

/// Dense state vector; entries beyond the model's dimension stay 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DynState(pub [f64; MAX_STATE]);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action(pub [f64; MAX_ACTION]);

impl DynamicsModel {
    pub fn dubins(v_max: f64, omega_max: f64, dt: f64) -> DynamicsModel {
        assert!(dt > 0.0 && v_max > 0.0 && omega_max > 0.0);
        DynamicsModel {
            kind: DynKind::Dubins { v_max, omega_max },
            dt,
            noise_std: 0.0,
        }
    }

    pub fn quad(a_max: f64, v_max: f64, dt: f64) -> DynamicsModel {
        assert!(dt > 0.0 && a_max > 0.0 && v_max > 0.0);
        DynamicsModel {
            kind: DynKind::KinematicQuad { a_max, v_max },
            dt,
            noise_std: 0.0,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self.kind {
            DynKind::Dubins { .. } => 3,
            DynKind::KinematicQuad { .. } => 6,
        }
    }

    pub fn action_dim(&self) -> usize {
        match self.kind {
            DynKind::Dubins { .. } => 2,
            DynKind::KinematicQuad { .. } => 3,
        }
    }

    pub fn v_max(&self) -> f64 {
        match self.kind {
            DynKind::Dubins { v_max, .. } => v_max,
            DynKind::KinematicQuad { v_max, .. } => v_max,
        }
    }

    /// Workspace position of a dynamic state: Dubins drops the heading,
    /// the quad drops the velocity.
    pub fn project(&self, s: &DynState) -> Point {
        Point([s.0[0], s.0[1], if self.state_dim() == 6 { s.0[2] } else { 0.0 }])
    }

    pub fn clamp_action(&self, a: Action) -> Action {
        let mut out = Action::default();
        match self.kind {
            DynKind::Dubins { v_max, omega_max } => {
                out.0[0] = a.0[0].clamp(0.0, v_max);
                out.0[1] = a.0[1].clamp(-omega_max, omega_max);
            }
            DynKind::KinematicQuad { a_max, .. } => {
                for i in 0..3 {
                    out.0[i] = a.0[i].clamp(-a_max, a_max);
                }
            }
        }
        out
    }

    fn deriv(&self, s: &DynState, a: &Action) -> [f64; MAX_STATE] {
        let mut d = [0.0; MAX_STATE];
        match self.kind {
            DynKind::Dubins { .. } => {
                let (v, w) = (a.0[0], a.0[1]);
                d[0] = v * s.0[2].cos();
                d[1] = v * s.0[2].sin();
                d[2] = w;
            }
            DynKind::KinematicQuad { .. } => {
                d[0] = s.0[3];
                d[1] = s.0[4];
                d[2] = s.0[5];
                d[3] = a.0[0];
                d[4] = a.0[1];
                d[5] = a.0[2];
            }
        }
        d
    }

    /// One RK4 step of length `h` with the control held constant.
    pub fn rk4(&self, s: &DynState, a: &Action, h: f64) -> DynState {
        let add = |s: &DynState, k: &[f64; MAX_STATE], c: f64| {
            let mut out = *s;
            for i in 0..MAX_STATE {
                out.0[i] += c * k[i];
            }
            out
        };
        let k1 = self.deriv(s, a);
        let k2 = self.deriv(&add(s, &k1, h / 2.0), a);
        let k3 = self.deriv(&add(s, &k2, h / 2.0), a);
        let k4 = self.deriv(&add(s, &k3, h), a);
        let mut out = *s;
        for i in 0..MAX_STATE {
            out.0[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.post_step(out)
    }

    /// Integrates one `dt`, also returning the midpoint used for collision
    /// probing.
    pub fn integrate(&self, s: &DynState, a: &Action) -> (DynState, DynState) {
        let half = self.rk4(s, a, self.dt / 2.0);
        let full = self.rk4(&half, a, self.dt / 2.0);
        (half, full)
    }

    fn post_step(&self, mut s: DynState) -> DynState {
        if let DynKind::KinematicQuad { v_max, .. } = self.kind {
            let speed = (s.0[3] * s.0[3] + s.0[4] * s.0[4] + s.0[5] * s.0[5]).sqrt();
            if speed > v_max {
                let f = v_max / speed;
                for v in &mut s.0[3..6] {
                    *v *= f;
                }
            }
        }
        s
    }

    /// Exact Dubins solution at time `t` under constant controls; panics
    /// for the quad.
    pub fn dubins_closed_form(&self, s: &DynState, a: &Action, t: f64) -> DynState {
        assert!(matches!(self.kind, DynKind::Dubins { .. }));
        let (v, w) = (a.0[0], a.0[1]);
        let th = s.0[2];
        let mut out = *s;
        if w.abs() < 1e-12 {
            out.0[0] = s.0[0] + v * t * th.cos();
            out.0[1] = s.0[1] + v * t * th.sin();
        } else {
            out.0[0] = s.0[0] + v / w * ((th + w * t).sin() - th.sin());
            out.0[1] = s.0[1] - v / w * ((th + w * t).cos() - th.cos());
            out.0[2] = th + w * t;
        }
        out
    }

    /// Dynamic state at workspace point `x` with randomized heading
    /// (Dubins) or velocity (quad) so trained controllers tolerate
    /// arbitrary hand-off conditions.
    pub fn initial_state(&self, x: Point, rng: &mut impl Rng) -> DynState {
        let mut s = DynState::default();
        match self.kind {
            DynKind::Dubins { .. } => {
                s.0[0] = x.x();
                s.0[1] = x.y();
                s.0[2] = rng.random_range(0.0..std::f64::consts::TAU);
            }
            DynKind::KinematicQuad { v_max, .. } => {
                s.0[0] = x.x();
                s.0[1] = x.y();
                s.0[2] = x.z();
                let speed = rng.random_range(0.0..v_max / 2.0);
                let az = rng.random_range(0.0..std::f64::consts::TAU);
                let el = rng.random_range(-1.0f64..1.0);
                let c = (1.0 - el * el).sqrt();
                s.0[3] = speed * c * az.cos();
                s.0[4] = speed * c * az.sin();
                s.0[5] = speed * el;
            }
        }
        s
    }

    /// Perturbs each control channel with Gaussian noise of the model's
    /// std; identity when the std is 0.
    pub fn perturb(&self, a: Action, rng: &mut impl Rng) -> Action {
        if self.noise_std == 0.0 {
            return a;
        }
        let normal = rand_distr::Normal::new(0.0, self.noise_std).expect("finite std");
        let mut out = a;
        for v in &mut out.0[..self.action_dim()] {
            *v += rng.sample(normal);
        }
        out
    }
}
