//! Step-by-step episode records: discounted return, violation totals,
//! and CSV export.

use super::episode::Event;

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: usize,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub d: f64,
    pub d_min: f64,
    pub event: Event,
    /// Violation charged at this step (nonzero only on first goal arrival).
    pub viol: u64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub gamma: f64,
}

impl Trace {
    pub fn new(gamma: f64) -> Trace {
        Trace {
            rows: Vec::new(),
            gamma,
        }
    }

    /// Sum of gamma^k R_k over the rows, k starting at 0.
    pub fn discounted_return(&self) -> f64 {
        discounted_return(self.rows.iter().map(|r| r.reward), self.gamma)
    }

    /// Undiscounted sum of the boundary violations the trace incurred.
    pub fn violation_total(&self) -> u64 {
        self.rows.iter().map(|r| r.viol).sum()
    }

    /// Discounted variant of the violation sum, reported alongside the
    /// canonical undiscounted one.
    pub fn discounted_violation(&self) -> f64 {
        discounted_return(self.rows.iter().map(|r| r.viol as f64), self.gamma)
    }

    /// One row per step: `t, s..., a..., reward, D, d_min, event`.
    pub fn to_csv(&self, state_dim: usize, action_dim: usize) -> String {
        let mut out = String::new();
        let s_cols: Vec<String> = (0..state_dim).map(|i| format!("s{i}")).collect();
        let a_cols: Vec<String> = (0..action_dim).map(|i| format!("a{i}")).collect();
        out.push_str(&format!(
            "t,{},{},reward,D,d_min,event\n",
            s_cols.join(","),
            a_cols.join(",")
        ));
        for r in &self.rows {
            let s: Vec<String> = r.state[..state_dim].iter().map(|v| v.to_string()).collect();
            let a: Vec<String> = r.action[..action_dim]
                .iter()
                .map(|v| v.to_string())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.t,
                s.join(","),
                a.join(","),
                r.reward,
                r.d,
                r.d_min,
                r.event.as_str()
            ));
        }
        out
    }
}

pub fn discounted_return(rewards: impl IntoIterator<Item = f64>, gamma: f64) -> f64 {
    let mut acc = 0.0;
    let mut g = 1.0;
    for r in rewards {
        acc += g * r;
        g *= gamma;
    }
    acc
}
