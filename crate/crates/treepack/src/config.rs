//! The parameter hierarchy as concrete numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All tunable constants. `n` is the scale the exponents refer to: the host
/// order in a pipeline run, the tree order when a tree is classified alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamConfig {
    pub n: usize,
    pub p: f64,
    pub xi: f64,
    pub xi_prime: f64,
    pub c: f64,
    pub c_prime: f64,
    /// Overrides `n^c` when set.
    pub big_delta: Option<f64>,
    /// Overrides `n^(1-c)` when set.
    pub big_lambda: Option<f64>,
    #[serde(rename = "D")]
    pub big_d: f64,
    pub delta: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub eps: f64,
    pub p0: f64,
    pub eta_minus: f64,
    pub p_minus: f64,
    pub eta_plus: f64,
    pub p_plus: f64,
    #[serde(rename = "K")]
    pub big_k: usize,
    pub d: usize,
    pub s: usize,
    /// Bite probability scale for the nibble.
    pub bite: f64,
    /// Nibble rounds; `0` means `ceil(30 / bite)`.
    pub rounds: usize,
    /// Switching-chain proposals per `n log n`.
    pub mix_factor: f64,
    /// Randomized-loop budget per `n log n`.
    pub budget_factor: f64,
    /// Edge cap for the exact oracles.
    pub oracle_cap: usize,
    /// Node budget for the exact oracles.
    pub oracle_nodes: u64,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            n: 1000,
            p: 0.5,
            xi: 0.004,
            xi_prime: 0.006,
            c: 0.25,
            c_prime: 0.1,
            big_delta: None,
            big_lambda: None,
            big_d: 128.0,
            delta: 0.01,
            p_min: 0.012,
            p_max: 0.05,
            eps: 0.06,
            p0: 0.1,
            eta_minus: 0.12,
            p_minus: 0.15,
            eta_plus: 0.18,
            p_plus: 0.2,
            big_k: 4,
            d: 4,
            s: 4,
            bite: 0.1,
            rounds: 0,
            mix_factor: 50.0,
            budget_factor: 100.0,
            oracle_cap: 60,
            oracle_nodes: 50_000_000,
        }
    }
}

impl ParamConfig {
    pub fn with_scale(n: usize, p: f64) -> Self {
        ParamConfig {
            n,
            p,
            ..Default::default()
        }
    }

    /// `Δ = n^c` unless overridden.
    pub fn big_delta(&self) -> f64 {
        self.big_delta
            .unwrap_or_else(|| (self.n.max(1) as f64).powf(self.c))
    }

    /// `Λ = n^(1-c)` unless overridden.
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
            .unwrap_or_else(|| (self.n.max(1) as f64).powf(1.0 - self.c))
    }

    /// `i+ = ceil(7 ln(1/ε))`.
    pub fn i_plus(&self) -> usize {
        (7.0 * (1.0 / self.eps).ln()).ceil() as usize
    }

    /// Geometric ladder strictly between `p_min` and `p_max`, `i ∈ [1, i+]`.
    pub fn eps_i(&self, i: usize) -> f64 {
        let ip = self.i_plus() as f64;
        self.p_min * (self.p_max / self.p_min).powf(i as f64 / (ip + 1.0))
    }

    pub fn eta(&self, case_p: bool) -> f64 {
        if case_p {
            self.eta_plus
        } else {
            self.eta_minus
        }
    }

    pub fn nibble_rounds(&self) -> usize {
        if self.rounds > 0 {
            self.rounds
        } else {
            (30.0 / self.bite).ceil() as usize
        }
    }

    /// `δ_j = δ^(0.1 j + 0.6)`.
    pub fn delta_j(&self, j: usize) -> f64 {
        self.delta.powf(0.1 * j as f64 + 0.6)
    }

    /// `100 n log n`-style move budget.
    pub fn budget(&self, n: usize) -> usize {
        let n = n.max(2) as f64;
        (self.budget_factor * n * n.ln()).ceil() as usize
    }

    pub fn mixing_steps(&self, n: usize) -> usize {
        let n = n.max(2) as f64;
        (self.mix_factor * n * n.ln()).ceil() as usize
    }

    /// Checks the strict ordering of the hierarchy.
    pub fn validate(&self) -> Result<()> {
        let ip = self.i_plus();
        let mut chain: Vec<(&str, f64)> = vec![
            ("xi", self.xi),
            ("xi'", self.xi_prime),
            ("1/D", 1.0 / self.big_d),
            ("delta", self.delta),
            ("p_min", self.p_min),
        ];
        let names: Vec<String> = (1..=ip).map(|i| format!("eps_{i}")).collect();
        for (i, nm) in names.iter().enumerate() {
            chain.push((nm.as_str(), self.eps_i(i + 1)));
        }
        chain.extend([
            ("p_max", self.p_max),
            ("eps", self.eps),
            ("p0", self.p0),
            ("eta-", self.eta_minus),
        ]);
        chain.extend([
            ("p-", self.p_minus),
            ("eta+", self.eta_plus),
            ("p+", self.p_plus),
            ("p", self.p),
        ]);
        if !(self.xi > 0.0) {
            return Err(Error::Config("xi must be positive".into()));
        }
        for w in chain.windows(2) {
            if !(w[0].1 < w[1].1) {
                return Err(Error::Config(format!(
                    "hierarchy violated: need {} ({}) < {} ({})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        if self.p > 1.0 {
            return Err(Error::Config(format!("p = {} exceeds 1", self.p)));
        }
        if self.s == 0 || !(self.eta_plus < 1.0 / self.s as f64) {
            return Err(Error::Config(format!(
                "need eta+ ({}) < 1/s ({})",
                self.eta_plus, self.s
            )));
        }
        if !(0.0 < self.c_prime && self.c_prime < self.c && self.c < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < c' ({}) < c ({}) < 1",
                self.c_prime, self.c
            )));
        }
        if self.big_k == 0 || self.d == 0 {
            return Err(Error::Config("K and d must be positive".into()));
        }
        if !(self.bite > 0.0 && self.bite <= 1.0) {
            return Err(Error::Config(format!("bite {} outside (0, 1]", self.bite)));
        }
        Ok(())
    }

    /// Relations the paper asks for that cannot hold at desk scale. Reported,
    /// never enforced.
    pub fn scale_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (k, d) = (self.big_k as f64, self.d as f64);
        if !(self.xi_prime < 1.0 / k && k > d && d > self.big_d) {
            out.push(format!(
                "case P chain xi' < 1/K < 1/d < 1/D fails (K = {}, d = {}, D = {})",
                self.big_k, self.d, self.big_d
            ));
        }
        if !(1.0 / (self.n.max(1) as f64) < self.xi) {
            out.push(format!(
                "1/n = {:.3e} is not below xi = {}",
                1.0 / self.n.max(1) as f64,
                self.xi
            ));
        }
        let span = (2 * self.s) as f64;
        if d < span.powi(2 * self.s as i32) {
            out.push(format!(
                "interval levels d/(2s)^(i-1) collapse below 2 (d = {})",
                self.d
            ));
        }
        out
    }

    /// Applies `key=value` overrides (the last layer of configuration).
    pub fn apply_overrides(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut v = serde_json::to_value(&*self)?;
        let obj = v.as_object_mut().expect("config serializes to an object");
        for (k, val) in pairs {
            if !obj.contains_key(k) {
                return Err(Error::Config(format!("unknown config key {k:?}")));
            }
            let parsed: serde_json::Value = serde_json::from_str(val)
                .unwrap_or_else(|_| serde_json::Value::String(val.clone()));
            obj.insert(k.clone(), parsed);
        }
        *self = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Merges a JSON object over `self`.
    pub fn merge_json(&mut self, text: &str) -> Result<()> {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        let obj = patch
            .as_object()
            .ok_or_else(|| Error::Config("config file must be a JSON object".into()))?;
        let pairs: Vec<(String, String)> = obj
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        self.apply_overrides(&pairs)
    }
}
