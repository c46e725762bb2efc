//! The staged embedding pipeline and its shared state.
//!
//! Every stage extends the partial maps `φ_w` (one per `w ∈ W`, `|W| = n`)
//! and records each consumed host edge in `used`. The audit recomputes
//! everything from `phi` and compares.

pub mod a0;
pub mod approx;
pub mod digraph;
pub mod high;
pub mod intervals;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::ParamConfig;
use crate::error::{Error, Result};
use crate::graph::{CyclicOrder, Graph};
use crate::matching::{match_sample_with, BipartiteInstance, MatchOptions};
use crate::partition::{label_scheme, LabelScheme, Part, TreePartition};
use crate::rng::Rng;
use crate::tree::{Case, Tree};

pub use digraph::{DigraphState, GRes, JRes};
pub use intervals::IntervalState;

/// Checkpoints of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimeMarker {
    Start,
    HighDegrees,
    Intervals,
    EmbedA0,
    Digraph,
    /// After the nibble matching of layer `i`.
    Approx(usize),
    /// After the leftover MATCH of layer `i`.
    Leftover(usize),
    Exact,
    Done,
}

impl fmt::Display for TimeMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeMarker::Start => write!(f, "start"),
            TimeMarker::HighDegrees => write!(f, "high"),
            TimeMarker::Intervals => write!(f, "intervals"),
            TimeMarker::EmbedA0 => write!(f, "a0"),
            TimeMarker::Digraph => write!(f, "digraph"),
            TimeMarker::Approx(i) => write!(f, "approx{i}"),
            TimeMarker::Leftover(i) => write!(f, "leftover{i}"),
            TimeMarker::Exact => write!(f, "exact"),
            TimeMarker::Done => write!(f, "done"),
        }
    }
}

impl std::str::FromStr for TimeMarker {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let num = |p: &str| -> Option<usize> { s.strip_prefix(p)?.parse().ok() };
        Ok(match s {
            "start" => TimeMarker::Start,
            "high" => TimeMarker::HighDegrees,
            "intervals" => TimeMarker::Intervals,
            "a0" => TimeMarker::EmbedA0,
            "digraph" => TimeMarker::Digraph,
            "exact" => TimeMarker::Exact,
            "done" => TimeMarker::Done,
            _ => {
                if let Some(i) = num("approx") {
                    TimeMarker::Approx(i)
                } else if let Some(i) = num("leftover") {
                    TimeMarker::Leftover(i)
                } else {
                    return Err(Error::Input(format!("unknown time marker '{s}'")));
                }
            }
        })
    }
}

/// Who consumed a host edge: copy `w`, tree edge `uv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Owner {
    pub w: usize,
    pub u: usize,
    pub v: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub time: String,
    pub metric: String,
    pub value: f64,
}

/// `V_0, V_{v*}` and `W_0, W_{w*}`; `None` marks the `0` part.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub n0: usize,
    pub n_star: usize,
    pub v_block: Vec<Option<usize>>,
    pub w_block: Vec<Option<usize>>,
}

/// Map-with-tuple-keys as a list of pairs, since JSON keys are strings.
pub(crate) mod pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<K, V, S>(m: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let v: Vec<(K, V)> = Vec::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingState {
    pub host: Graph,
    pub order: CyclicOrder,
    pub tree: Tree,
    pub tp: TreePartition,
    pub labels: LabelScheme,
    pub cfg: ParamConfig,
    /// `phi[w][u]`.
    pub phi: Vec<Vec<Option<usize>>>,
    #[serde(with = "pairs")]
    pub used: BTreeMap<(usize, usize), Owner>,
    pub shifts: BTreeMap<usize, usize>,
    pub blocks: Blocks,
    /// `X_w` as vertex lists (empty in Case S).
    pub x_w: Vec<Vec<usize>>,
    pub pbar: Vec<f64>,
    pub intervals: Option<IntervalState>,
    pub g0: BTreeSet<(usize, usize)>,
    /// `N_{J_0}(w)`.
    pub j0: Vec<BTreeSet<usize>>,
    pub dg: Option<DigraphState>,
    pub clock: TimeMarker,
    pub metrics: Vec<Metric>,
    #[serde(skip)]
    inv: Vec<Vec<Option<usize>>>,
    #[serde(skip)]
    xbar: Vec<Vec<bool>>,
}

pub(crate) fn key(x: usize, y: usize) -> (usize, usize) {
    (x.min(y), x.max(y))
}

impl EmbeddingState {
    /// Host vertices are identified with `[n]` through a random cyclic order.
    pub fn new(host: Graph, tree: Tree, tp: TreePartition, cfg: ParamConfig, rng: &mut Rng) -> Result<Self> {
        let n = host.n();
        if n == 0 {
            return Err(Error::Input("empty host graph".into()));
        }
        if tp.pos.len() != tree.n() {
            return Err(Error::Input("tree partition does not match the tree".into()));
        }
        let order = CyclicOrder::random(n, rng);
        let labels = label_scheme(&tp);
        let t = tree.n();
        let mut s = EmbeddingState {
            host,
            order,
            tree,
            tp,
            labels,
            cfg,
            phi: vec![vec![None; t]; n],
            used: BTreeMap::new(),
            shifts: BTreeMap::new(),
            blocks: Blocks::default(),
            x_w: vec![Vec::new(); n],
            pbar: vec![1.0; n],
            intervals: None,
            g0: BTreeSet::new(),
            j0: vec![BTreeSet::new(); n],
            dg: None,
            clock: TimeMarker::Start,
            metrics: Vec::new(),
            inv: Vec::new(),
            xbar: Vec::new(),
        };
        s.reindex();
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.host.n()
    }

    /// Rebuilds the derived indexes (after deserialising a snapshot).
    pub fn reindex(&mut self) {
        let n = self.n();
        self.inv = vec![vec![None; n]; n];
        for (w, row) in self.phi.iter().enumerate() {
            for (u, x) in row.iter().enumerate() {
                if let Some(x) = *x {
                    self.inv[w][x] = Some(u);
                }
            }
        }
        self.refresh_xbar();
    }

    /// `X̄_w = V ∖ (φ_w(A*) ∪ X_w ∪ X_w^+)`.
    pub(crate) fn refresh_xbar(&mut self) {
        let n = self.n();
        self.xbar = vec![vec![true; n]; n];
        for w in 0..n {
            for &a in &self.tp.a_star {
                if let Some(x) = self.phi[w][a] {
                    self.xbar[w][x] = false;
                }
            }
            for &x in &self.x_w[w] {
                self.xbar[w][x] = false;
                self.xbar[w][self.order.succ(x)] = false;
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: EmbeddingState = serde_json::from_str(text)?;
        s.reindex();
        Ok(s)
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("state serialises")
    }

    pub fn in_xbar(&self, w: usize, x: usize) -> bool {
        self.xbar[w][x]
    }

    pub fn phi(&self, w: usize, u: usize) -> Option<usize> {
        self.phi[w][u]
    }

    /// Which tree vertex copy `w` put at `x`.
    pub fn preimage(&self, w: usize, x: usize) -> Option<usize> {
        self.inv[w][x]
    }

    pub fn is_used(&self, x: usize, y: usize) -> bool {
        self.used.contains_key(&key(x, y))
    }

    /// Tree neighbours of `u` already embedded in copy `w`.
    pub fn embedded_neighbors(&self, w: usize, u: usize) -> Vec<usize> {
        self.tree
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&v| self.phi[w][v].is_some())
            .collect()
    }

    /// Sets `φ_w(u) = x` and consumes the host edges to every embedded tree
    /// neighbour of `u`. Returns the number of edges consumed.
    pub fn set_phi(&mut self, w: usize, u: usize, x: usize) -> Result<usize> {
        if self.phi[w][u].is_some() {
            return Err(Error::Internal(format!("copy {w}: tree vertex {u} embedded twice")));
        }
        if let Some(u2) = self.inv[w][x] {
            return Err(Error::Internal(format!(
                "copy {w}: host vertex {x} already holds tree vertex {u2}, wanted {u}"
            )));
        }
        let nb = self.embedded_neighbors(w, u);
        for &v in &nb {
            let y = self.phi[w][v].expect("filtered");
            if !self.host.has_edge(x, y) {
                return Err(Error::Internal(format!("copy {w}: tree edge {u}{v} maps to non-edge {x}{y}")));
            }
            if let Some(o) = self.used.get(&key(x, y)) {
                return Err(Error::Internal(format!(
                    "host edge {x}{y} wanted by copy {w} but used by copy {}",
                    o.w
                )));
            }
        }
        for &v in &nb {
            let y = self.phi[w][v].expect("filtered");
            self.used.insert(key(x, y), Owner { w, u, v });
        }
        self.phi[w][u] = Some(x);
        self.inv[w][x] = Some(u);
        Ok(nb.len())
    }

    /// True when copy `w` can take `φ_w(u) = x` without clashing.
    pub fn can_place(&self, w: usize, u: usize, x: usize) -> bool {
        if self.phi[w][u].is_some() || self.inv[w][x].is_some() {
            return false;
        }
        self.tree.neighbors(u).iter().all(|&v| match self.phi[w][v] {
            None => true,
            Some(y) => self.host.has_edge(x, y) && !self.is_used(x, y),
        })
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric {
            time: self.clock.to_string(),
            metric: name.to_string(),
            value,
        });
    }

    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("time,metric,value\n");
        for m in &self.metrics {
            s.push_str(&format!("{},{},{}\n", m.time, m.metric, m.value));
        }
        s
    }

    pub fn case(&self) -> Case {
        self.tp.case
    }

    /// Vertices of `T` in `≺` order restricted to a part.
    pub fn in_order(&self, pred: impl Fn(Part) -> bool) -> Vec<usize> {
        self.tp.order.iter().copied().filter(|&u| pred(self.tp.part[u])).collect()
    }

    /// Full consistency audit; an empty list means clean.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n();
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut embedded_edges = 0usize;
        for w in 0..n {
            let mut img = BTreeMap::new();
            for (u, x) in self.phi[w].iter().enumerate() {
                if let Some(x) = *x {
                    if let Some(u2) = img.insert(x, u) {
                        out.push(format!("copy {w} not injective: {u2} and {u} both at {x}"));
                    }
                    if self.inv[w][x] != Some(u) {
                        out.push(format!("copy {w}: inverse index stale at {x}"));
                    }
                }
            }
            for &(u, v) in self.tree.edges() {
                if let (Some(x), Some(y)) = (self.phi[w][u], self.phi[w][v]) {
                    embedded_edges += 1;
                    if !self.host.has_edge(x, y) {
                        out.push(format!("copy {w}: tree edge {u}{v} at non-edge {x}{y}"));
                    }
                    let c = seen.entry(key(x, y)).or_insert(0);
                    *c += 1;
                    if *c == 2 {
                        out.push(format!("host edge {x}{y} used twice"));
                    }
                    match self.used.get(&key(x, y)) {
                        Some(o) if o.w == w => {}
                        Some(o) => out.push(format!("edge {x}{y} recorded for copy {} not {w}", o.w)),
                        None => out.push(format!("edge {x}{y} of copy {w} not recorded as used")),
                    }
                }
            }
        }
        if embedded_edges != self.used.len() {
            out.push(format!(
                "{} embedded edges but {} recorded as used",
                embedded_edges,
                self.used.len()
            ))
        }
        if let Some(iv) = &self.intervals {
            out.extend(iv.audit(n));
        }
        if let Some(dg) = &self.dg {
            out.extend(dg.audit(&self.j0));
        }
        out
    }

    /// MATCH over the copies `ws` (one side) and host vertices `vs`. `allowed`
    /// decides `vw ∈ B`; `z` lists `(v, w)` pairs. Returns `(w, v)` pairs.
    pub(crate) fn match_copies(
        &self,
        ws: &[usize],
        vs: &[usize],
        allowed: impl Fn(usize, usize) -> bool,
        z: &[(usize, usize)],
        rng: &mut Rng,
        blocked: bool,
    ) -> Result<Vec<(usize, usize)>> {
        let k = ws.len();
        if vs.len() != k {
            return Err(Error::Internal(format!("MATCH sides differ: {} vs {}", k, vs.len())));
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let n = self.n();
        let mut wi = vec![usize::MAX; n];
        let mut vi = vec![usize::MAX; n];
        for (i, &w) in ws.iter().enumerate() {
            wi[w] = i;
        }
        for (i, &v) in vs.iter().enumerate() {
            vi[v] = i;
        }
        let mut b = Vec::new();
        for (i, &w) in ws.iter().enumerate() {
            for (j, &v) in vs.iter().enumerate() {
                if allowed(v, w) {
                    b.push((i, j));
                }
            }
        }
        let zz: Vec<(usize, usize)> = z
            .iter()
            .filter(|&&(v, w)| wi[w] != usize::MAX && vi[v] != usize::MAX)
            .map(|&(v, w)| (wi[w], vi[v]))
            .collect();
        let inst = BipartiteInstance::new(k, k, b, zz)?;
        let opts = MatchOptions {
            blocked,
            ..MatchOptions::new(self.cfg.mixing_steps(k), self.cfg.budget(k))
        };
        let out = match_sample_with(&inst, rng, opts)?;
        Ok(out.mate.iter().enumerate().map(|(i, &j)| (ws[i], vs[j])).collect())
    }
}

/// Turns a MATCH failure into an abort naming the stage and the object.
pub(crate) fn abort_on(stage: &str, what: String, e: Error) -> Error {
    match e {
        Error::Infeasible { violator, neighbours } => Error::abort(
            stage,
            format!(
                "{what}: no perfect matching (Hall violator of {} copies with {neighbours} candidates)",
                violator.len()
            ),
        ),
        Error::Stuck { what: w2, moves } => Error::abort(stage, format!("{what}: {w2} after {moves} moves")),
        other => other,
    }
}
