//! MATCH(B, Z): random perfect matchings avoiding MZMZ patterns, plus the
//! pair-condition diagnostic and rainbow matchings.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::exact_perfect_matching;
use crate::rng::Rng;

/// Allowed edges `b` and forbidden-pattern edges `z`, both inside `X × Y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteInstance {
    pub x_size: usize,
    pub y_size: usize,
    pub b: Vec<(usize, usize)>,
    pub z: Vec<(usize, usize)>,
}

impl BipartiteInstance {
    pub fn new(x_size: usize, y_size: usize, b: Vec<(usize, usize)>, z: Vec<(usize, usize)>) -> Result<Self> {
        let check = |e: &[(usize, usize)], what: &str| -> Result<Vec<(usize, usize)>> {
            if let Some(&(x, y)) = e.iter().find(|&&(x, y)| x >= x_size || y >= y_size) {
                return Err(Error::Input(format!("{what} edge ({x}, {y}) out of range")));
            }
            let mut v = e.to_vec();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        };
        Ok(BipartiteInstance { x_size, y_size, b: check(&b, "b")?, z: check(&z, "z")? })
    }

    pub fn complete(n: usize) -> Self {
        let b = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        BipartiteInstance { x_size: n, y_size: n, b, z: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct J {
            x_size: usize,
            y_size: usize,
            b: Vec<[usize; 2]>,
            #[serde(default)]
            z: Vec<[usize; 2]>,
        }
        let j: J = serde_json::from_str(text)?;
        let conv = |v: Vec<[usize; 2]>| v.into_iter().map(|e| (e[0], e[1])).collect();
        BipartiteInstance::new(j.x_size, j.y_size, conv(j.b), conv(j.z))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let conv = |v: &[(usize, usize)]| v.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>();
        serde_json::json!({ "x_size": self.x_size, "y_size": self.y_size, "b": conv(&self.b), "z": conv(&self.z) })
    }

    pub fn b_adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.x_size];
        for &(x, y) in &self.b {
            adj[x].push(y);
        }
        adj
    }

    pub fn z_max_degree(&self) -> usize {
        let mut dx = vec![0usize; self.x_size];
        let mut dy = vec![0usize; self.y_size];
        for &(x, y) in &self.z {
            dx[x] += 1;
            dy[y] += 1;
        }
        dx.into_iter().chain(dy).max().unwrap_or(0)
    }

    /// Soft check of the `Δ(Z) < n^0.4` hypothesis.
    pub fn z_degree_warning(&self) -> Option<String> {
        let bound = (self.y_size.max(1) as f64).powf(0.4);
        let d = self.z_max_degree();
        (d as f64 >= bound).then(|| format!("Z has maximum degree {d} ≥ n^0.4 = {bound:.2}"))
    }

    /// Density of `b` in `X × Y`.
    pub fn density(&self) -> f64 {
        if self.x_size * self.y_size == 0 {
            return 0.0;
        }
        self.b.len() as f64 / (self.x_size * self.y_size) as f64
    }
}

/// Number of MZMZ 4-cycles of the perfect matching `mate` (`mate[x] = y`).
pub fn count_mzmz(inst: &BipartiteInstance, mate: &[usize]) -> usize {
    let z = ZIndex::new(inst);
    let mut c = 0;
    for (x, &y) in mate.iter().enumerate() {
        for &x2 in &z.by_y[y] {
            if x2 != x && z.has(x, mate[x2]) {
                c += 1;
            }
        }
    }
    c / 2
}

struct ZIndex {
    by_x: Vec<Vec<usize>>,
    by_y: Vec<Vec<usize>>,
}

impl ZIndex {
    fn new(inst: &BipartiteInstance) -> Self {
        let mut by_x = vec![Vec::new(); inst.x_size];
        let mut by_y = vec![Vec::new(); inst.y_size];
        for &(x, y) in &inst.z {
            by_x[x].push(y);
            by_y[y].push(x);
        }
        ZIndex { by_x, by_y }
    }

    fn has(&self, x: usize, y: usize) -> bool {
        self.by_x[x].binary_search(&y).is_ok()
    }
}

/// Options for one MATCH call.
#[derive(Debug, Clone, Copy)]
pub struct MatchOptions {
    /// Mixing proposals after the repair phase.
    pub steps: usize,
    /// Proposal budget for the repair phase.
    pub repair_budget: usize,
    /// Sample independent `√n` blocks and take the union.
    pub blocked: bool,
}

impl MatchOptions {
    pub fn new(steps: usize, repair_budget: usize) -> Self {
        MatchOptions { steps, repair_budget, blocked: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// `mate[x] = y`.
    pub mate: Vec<usize>,
    pub accepted: usize,
    pub repair_moves: usize,
}

/// State of the switching chain on perfect matchings of `b`.
pub struct SwitchChain {
    b_adj: Vec<Vec<usize>>,
    /// `X`-neighbours of each `y`, for targeted repair proposals.
    b_col: Vec<Vec<usize>>,
    z: ZIndex,
    mate: Vec<usize>,
    mate_y: Vec<usize>,
    pub accepted: usize,
    pub proposals: usize,
}

impl SwitchChain {
    /// Starts from an exact perfect matching; infeasible instances return the
    /// Hall violator.
    pub fn new(inst: &BipartiteInstance) -> Result<Self> {
        if inst.x_size != inst.y_size {
            return Err(Error::Input(format!("parts differ: {} vs {}", inst.x_size, inst.y_size)));
        }
        let pm = exact_perfect_matching(inst);
        if !pm.perfect {
            return Err(Error::Infeasible { violator: pm.hall_violator.clone(), neighbours: pm.violator_neighbours });
        }
        let mate: Vec<usize> = pm.mate_x.iter().map(|m| m.expect("perfect")).collect();
        let mut mate_y = vec![0; inst.y_size];
        for (x, &y) in mate.iter().enumerate() {
            mate_y[y] = x;
        }
        let mut b_adj = inst.b_adj();
        for a in b_adj.iter_mut() {
            a.sort_unstable();
        }
        let mut b_col = vec![Vec::new(); inst.y_size];
        for (x, ys) in b_adj.iter().enumerate() {
            for &y in ys {
                b_col[y].push(x);
            }
        }
        Ok(SwitchChain { b_adj, b_col, z: ZIndex::new(inst), mate, mate_y, accepted: 0, proposals: 0 })
    }

    pub fn mate(&self) -> &[usize] {
        &self.mate
    }

    fn in_b(&self, x: usize, y: usize) -> bool {
        self.b_adj[x].binary_search(&y).is_ok()
    }

    /// True if edge `(x, y)` of the current matching lies in an MZMZ.
    fn edge_in_mzmz(&self, x: usize) -> bool {
        let y = self.mate[x];
        self.z.by_y[y].iter().any(|&x2| x2 != x && self.z.has(x, self.mate[x2]))
    }

    pub fn mzmz(&self) -> usize {
        let c: usize = (0..self.mate.len())
            .map(|x| {
                let y = self.mate[x];
                self.z.by_y[y].iter().filter(|&&x2| x2 != x && self.z.has(x, self.mate[x2])).count()
            })
            .sum();
        c / 2
    }

    /// Applies `mate[xs[k]] = ys[k]`, keeping it only if no new edge closes an
    /// MZMZ. The targets must be a permutation of the current partners.
    fn try_switch(&mut self, xs: &[usize], ys: &[usize]) -> bool {
        if xs.iter().zip(ys).any(|(&x, &y)| !self.in_b(x, y)) {
            return false;
        }
        let old: Vec<usize> = xs.iter().map(|&x| self.mate[x]).collect();
        for (&x, &y) in xs.iter().zip(ys) {
            self.mate[x] = y;
            self.mate_y[y] = x;
        }
        if xs.iter().any(|&x| self.edge_in_mzmz(x)) {
            for (&x, &y) in xs.iter().zip(&old) {
                self.mate[x] = y;
                self.mate_y[y] = x;
            }
            return false;
        }
        self.accepted += 1;
        true
    }

    /// One proposal: an alternating 4-cycle or 6-cycle through uniformly
    /// chosen distinct `X` vertices, half the time each.
    pub fn step(&mut self, rng: &mut Rng) -> bool {
        let n = self.mate.len();
        self.proposals += 1;
        if n < 2 {
            return false;
        }
        let six = n >= 3 && rng.gen_bool(0.5);
        if six {
            let x1 = rng.gen_range(0..n);
            let mut x2 = rng.gen_range(0..n - 1);
            if x2 >= x1 {
                x2 += 1;
            }
            let mut x3 = rng.gen_range(0..n - 2);
            for lo in [x1.min(x2), x1.max(x2)] {
                if x3 >= lo {
                    x3 += 1;
                }
            }
            let (y1, y2, y3) = (self.mate[x1], self.mate[x2], self.mate[x3]);
            self.try_switch(&[x2, x3, x1], &[y1, y2, y3])
        } else {
            let x1 = rng.gen_range(0..n);
            let mut x2 = rng.gen_range(0..n - 1);
            if x2 >= x1 {
                x2 += 1;
            }
            let (y1, y2) = (self.mate[x1], self.mate[x2]);
            self.try_switch(&[x1, x2], &[y2, y1])
        }
    }

    /// Drives MZMZ to zero. Proposals always remove an edge that lies in an
    /// MZMZ and never create one, so the count never increases.
    pub fn repair(&mut self, rng: &mut Rng, budget: usize) -> Result<usize> {
        let n = self.mate.len();
        let mut moves = 0;
        let mut current = self.mzmz();
        let mut tries = 0;
        while current > 0 {
            if tries >= budget || n < 2 {
                let low = (0..n).filter(|&x| self.edge_in_mzmz(x)).map(|x| self.b_adj[x].len()).min().unwrap_or(0);
                return Err(Error::Stuck {
                    what: format!("MZMZ repair left {current} patterns (least B-degree on them {low})"),
                    moves,
                });
            }
            // re-pick the bad edge on every try so one stubborn row cannot eat the budget
            let bad: Vec<usize> = (0..n).filter(|&x| self.edge_in_mzmz(x)).collect();
            loop {
                tries += 1;
                let x1 = *bad.choose(rng).expect("positive count has a bad edge");
                // half the time hand y1 to one of its own B-neighbours; mixing
                // is not at stake here, only reaching zero
                let x2 = match self.b_col[self.mate[x1]].choose(rng) {
                    Some(&x) if x != x1 && rng.gen_bool(0.5) => x,
                    _ => {
                        let x = rng.gen_range(0..n - 1);
                        x + usize::from(x >= x1)
                    }
                };
                let ok = if n >= 3 && rng.gen_bool(0.5) {
                    let x3 = match self.b_col[self.mate[x2]].choose(rng) {
                        Some(&x) if x != x1 && x != x2 && rng.gen_bool(0.5) => x,
                        _ => {
                            let mut x3 = rng.gen_range(0..n - 2);
                            for lo in [x1.min(x2), x1.max(x2)] {
                                if x3 >= lo {
                                    x3 += 1;
                                }
                            }
                            x3
                        }
                    };
                    let (y1, y2, y3) = (self.mate[x1], self.mate[x2], self.mate[x3]);
                    self.try_switch(&[x2, x3, x1], &[y1, y2, y3])
                } else {
                    let (y1, y2) = (self.mate[x1], self.mate[x2]);
                    self.try_switch(&[x1, x2], &[y2, y1])
                };
                if ok {
                    moves += 1;
                    let next = self.mzmz();
                    if next >= current {
                        return Err(Error::Internal(format!("MZMZ rose from {current} to {next}")));
                    }
                    current = next;
                    break;
                }
                if tries >= budget {
                    break;
                }
            }
        }
        Ok(moves)
    }

    pub fn run(&mut self, rng: &mut Rng, steps: usize) {
        for _ in 0..steps {
            self.step(rng);
        }
    }
}

/// MATCH(B, Z): a perfect matching of `b` with no MZMZ.
pub fn match_sample(inst: &BipartiteInstance, rng: &mut Rng, steps: usize) -> Result<MatchOutcome> {
    let budget = 100 * steps.max(inst.x_size.max(2) * 10);
    match_sample_with(inst, rng, MatchOptions::new(steps, budget))
}

pub fn match_sample_with(inst: &BipartiteInstance, rng: &mut Rng, opts: MatchOptions) -> Result<MatchOutcome> {
    if opts.blocked && inst.x_size >= 16 {
        return blocked_sample(inst, rng, opts);
    }
    let mut chain = SwitchChain::new(inst)?;
    let repair_moves = chain.repair(rng, opts.repair_budget)?;
    let before = chain.accepted;
    chain.run(rng, opts.steps);
    Ok(MatchOutcome { mate: chain.mate.clone(), accepted: chain.accepted - before, repair_moves })
}

/// Union of independent chains on `√n` random blocks, followed by a global
/// repair for patterns that straddle blocks.
fn blocked_sample(inst: &BipartiteInstance, rng: &mut Rng, opts: MatchOptions) -> Result<MatchOutcome> {
    let n = inst.x_size;
    let k = (n as f64).sqrt().round().max(1.0) as usize;
    let mut xs: Vec<usize> = (0..n).collect();
    let mut ys: Vec<usize> = (0..n).collect();
    xs.shuffle(rng);
    ys.shuffle(rng);
    let mut block_x = vec![0; n];
    let mut block_y = vec![0; n];
    let mut local_x = vec![0; n];
    let mut local_y = vec![0; n];
    let mut members_x: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut members_y: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (r, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        let blk = r % k;
        block_x[x] = blk;
        block_y[y] = blk;
        local_x[x] = members_x[blk].len();
        local_y[y] = members_y[blk].len();
        members_x[blk].push(x);
        members_y[blk].push(y);
    }
    let mut mate = vec![usize::MAX; n];
    let mut accepted = 0;
    let mut repair_moves = 0;
    for blk in 0..k {
        let sub = |e: &[(usize, usize)]| -> Vec<(usize, usize)> {
            e.iter()
                .filter(|&&(x, y)| block_x[x] == blk && block_y[y] == blk)
                .map(|&(x, y)| (local_x[x], local_y[y]))
                .collect()
        };
        let size = members_x[blk].len();
        let bi = BipartiteInstance::new(size, size, sub(&inst.b), sub(&inst.z))?;
        let o = match match_sample_with(&bi, rng, MatchOptions { blocked: false, ..opts }) {
            Ok(o) => o,
            // a random block can lack a perfect matching, or trap an MZMZ,
            // even when the whole instance is fine; fall back to one global chain
            Err(Error::Infeasible { .. } | Error::Stuck { .. }) => {
                return match_sample_with(inst, rng, MatchOptions { blocked: false, ..opts })
            }
            Err(e) => return Err(e),
        };
        accepted += o.accepted;
        repair_moves += o.repair_moves;
        for (lx, ly) in o.mate.into_iter().enumerate() {
            mate[members_x[blk][lx]] = members_y[blk][ly];
        }
    }
    let mut chain = SwitchChain::new(inst)?;
    for (x, &y) in mate.iter().enumerate() {
        chain.mate[x] = y;
        chain.mate_y[y] = x;
    }
    repair_moves += chain.repair(rng, opts.repair_budget)?;
    Ok(MatchOutcome { mate: chain.mate.clone(), accepted, repair_moves })
}

/// Empirical edge marginals against the band `(1 ± α^0.98)(d(B) n)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReport {
    pub samples: usize,
    pub freq: BTreeMap<(usize, usize), f64>,
    pub band: (f64, f64),
    pub out_of_band: Vec<(usize, usize)>,
    pub accepted: usize,
}

impl MarginalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,freq,in_band\n");
        for (&(x, y), &f) in &self.freq {
            let ok = f >= self.band.0 && f <= self.band.1;
            s.push_str(&format!("{x},{y},{f:.6},{ok}\n"));
        }
        s
    }

    pub fn max_deviation(&self, exact: &BTreeMap<(usize, usize), f64>) -> f64 {
        exact.iter().map(|(e, &p)| (self.freq.get(e).copied().unwrap_or(0.0) - p).abs()).fold(0.0, f64::max)
    }
}

/// Samples are read off one chain every `thin` proposals after a burn-in of
/// the usual mixing budget.
pub fn match_marginal_report(
    inst: &BipartiteInstance,
    rng: &mut Rng,
    samples: usize,
    thin: usize,
    alpha: f64,
) -> Result<MarginalReport> {
    let mut chain = SwitchChain::new(inst)?;
    let n = inst.x_size;
    chain.repair(rng, 1000 * n.max(2) * n.max(2))?;
    let burn = 50 * n.max(2) * ((n.max(2) as f64).ln().ceil() as usize).max(1);
    chain.run(rng, burn);
    let mut counts: BTreeMap<(usize, usize), usize> = inst.b.iter().map(|&e| (e, 0)).collect();
    for _ in 0..samples {
        chain.run(rng, thin);
        for (x, &y) in chain.mate().iter().enumerate() {
            *counts.get_mut(&(x, y)).expect("matching edges lie in b") += 1;
        }
    }
    let freq: BTreeMap<(usize, usize), f64> =
        counts.into_iter().map(|(e, c)| (e, c as f64 / samples.max(1) as f64)).collect();
    let centre = 1.0 / (inst.density() * n as f64);
    let w = alpha.powf(0.98);
    let band = ((1.0 - w) * centre, (1.0 + w) * centre);
    let out_of_band = freq.iter().filter(|(_, &f)| f < band.0 || f > band.1).map(|(&e, _)| e).collect();
    Ok(MarginalReport { samples, freq, band, out_of_band, accepted: chain.accepted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub pass: bool,
    pub min_degree_ok: bool,
    pub min_degree: usize,
    /// Ordered pairs `x ≠ x'` with codegree at least `(d + ε)² m`.
    pub bad_pairs: usize,
    pub allowed_pairs: f64,
}

/// The two hypotheses of the pair condition on `X`.
pub fn pair_condition_check(b: &BipartiteInstance, eps: f64, d: f64) -> Result<PairCheck> {
    if b.x_size != b.y_size {
        return Err(Error::Input("pair condition needs |X| = |Y|".into()));
    }
    let m = b.x_size;
    let adj = b.b_adj();
    let min_degree = adj.iter().map(|a| a.len()).min().unwrap_or(0);
    let min_degree_ok = min_degree as f64 > (d - eps) * m as f64;
    let thr = (d + eps).powi(2) * m as f64;
    let mut rows: Vec<Vec<bool>> = vec![vec![false; m]; m];
    for (x, a) in adj.iter().enumerate() {
        for &y in a {
            rows[x][y] = true;
        }
    }
    let mut bad = 0;
    for x in 0..m {
        for x2 in 0..m {
            if x != x2 {
                let co = (0..m).filter(|&y| rows[x][y] && rows[x2][y]).count();
                if co as f64 >= thr {
                    bad += 1;
                }
            }
        }
    }
    let allowed = 2.0 * eps * (m * m) as f64;
    Ok(PairCheck { pass: min_degree_ok && bad as f64 <= allowed, min_degree_ok, min_degree, bad_pairs: bad, allowed_pairs: allowed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledEdge {
    pub x: usize,
    pub y: usize,
    pub label: usize,
}

/// Bipartite multigraph whose label classes are matchings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMultigraph {
    pub x_size: usize,
    pub y_size: usize,
    pub edges: Vec<LabeledEdge>,
}

impl LabeledMultigraph {
    /// Every label class must be a matching.
    pub fn validate(&self) -> Result<()> {
        let mut seen: BTreeSet<(usize, bool, usize)> = BTreeSet::new();
        for e in &self.edges {
            if e.x >= self.x_size || e.y >= self.y_size {
                return Err(Error::Input(format!("edge ({}, {}) out of range", e.x, e.y)));
            }
            if !seen.insert((e.label, false, e.x)) || !seen.insert((e.label, true, e.y)) {
                return Err(Error::Input(format!("label {} is not a matching", e.label)));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> BTreeSet<usize> {
        self.edges.iter().map(|e| e.label).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RainbowMatching {
    pub edges: Vec<LabeledEdge>,
    /// Number of labels left unused.
    pub deficit: usize,
    /// `deficit ≤ m^0.51`, reported but not enforced.
    pub within_soft_bound: bool,
}

struct Rainbow<'a> {
    by_label: BTreeMap<usize, Vec<LabeledEdge>>,
    x_used: Vec<Option<usize>>,
    y_used: Vec<Option<usize>>,
    chosen: BTreeMap<usize, LabeledEdge>,
    _g: &'a LabeledMultigraph,
}

impl Rainbow<'_> {
    fn put(&mut self, e: LabeledEdge) {
        self.x_used[e.x] = Some(e.label);
        self.y_used[e.y] = Some(e.label);
        self.chosen.insert(e.label, e);
    }

    fn take(&mut self, label: usize) -> LabeledEdge {
        let e = self.chosen.remove(&label).expect("label is placed");
        self.x_used[e.x] = None;
        self.y_used[e.y] = None;
        e
    }

    /// Places `label`, displacing at most one placed label per level.
    fn augment(&mut self, label: usize, depth: usize, visiting: &mut BTreeSet<usize>) -> bool {
        visiting.insert(label);
        let edges = self.by_label[&label].clone();
        for &e in &edges {
            if self.x_used[e.x].is_none() && self.y_used[e.y].is_none() {
                self.put(e);
                return true;
            }
        }
        if depth == 0 {
            return false;
        }
        for &e in &edges {
            let blocker = match (self.x_used[e.x], self.y_used[e.y]) {
                (Some(l), None) | (None, Some(l)) => l,
                (Some(l), Some(l2)) if l == l2 => l,
                _ => continue,
            };
            if visiting.contains(&blocker) {
                continue;
            }
            let old = self.take(blocker);
            self.put(e);
            if self.augment(blocker, depth - 1, visiting) {
                return true;
            }
            self.take(label);
            self.put(old);
        }
        false
    }
}

/// Greedy rainbow matching followed by augmenting exchanges.
pub fn rainbow_matching(mg: &LabeledMultigraph) -> Result<RainbowMatching> {
    mg.validate()?;
    let mut by_label: BTreeMap<usize, Vec<LabeledEdge>> = BTreeMap::new();
    for &e in &mg.edges {
        by_label.entry(e.label).or_default().push(e);
    }
    let mut r = Rainbow {
        by_label,
        x_used: vec![None; mg.x_size],
        y_used: vec![None; mg.y_size],
        chosen: BTreeMap::new(),
        _g: mg,
    };
    let labels: Vec<usize> = r.by_label.keys().copied().collect();
    for &l in &labels {
        let e = r.by_label[&l].iter().copied().find(|e| r.x_used[e.x].is_none() && r.y_used[e.y].is_none());
        if let Some(e) = e {
            r.put(e);
        }
    }
    let mut improved = true;
    while improved {
        improved = false;
        for &l in &labels {
            if !r.chosen.contains_key(&l) && r.augment(l, 6, &mut BTreeSet::new()) {
                improved = true;
            }
        }
    }
    let m = labels.len();
    let deficit = m - r.chosen.len();
    Ok(RainbowMatching {
        edges: r.chosen.values().copied().collect(),
        deficit,
        within_soft_bound: deficit as f64 <= (m as f64).powf(0.51),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_perfect_matchings, perfect_matching_marginals};
    use crate::rng::{seeded, Rng};
    use proptest::prelude::*;

    fn random_instance(n: usize, p: f64, zdeg: usize, rng: &mut Rng) -> BipartiteInstance {
        let b: Vec<(usize, usize)> =
            (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|_| rng.gen_bool(p)).collect();
        let mut z = Vec::new();
        for x in 0..n {
            for _ in 0..zdeg {
                z.push((x, rng.gen_range(0..n)));
            }
        }
        BipartiteInstance::new(n, n, b, z).unwrap()
    }

    #[test]
    fn unique_matching_is_returned() {
        let inst = BipartiteInstance::new(4, 4, (0..4).map(|i| (i, i)).collect(), vec![]).unwrap();
        let o = match_sample(&inst, &mut seeded(0), 1000).unwrap();
        assert_eq!(o.mate, vec![0, 1, 2, 3]);
        assert_eq!(o.accepted, 0);
    }

    #[test]
    fn infeasible_reports_hall_violator() {
        let inst = BipartiteInstance::new(3, 3, vec![(0, 0), (0, 1), (0, 2)], vec![]).unwrap();
        match match_sample(&inst, &mut seeded(0), 10) {
            Err(Error::Infeasible { violator, neighbours }) => {
                assert_eq!(violator, vec![1, 2]);
                assert_eq!(neighbours, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn k33_marginals() {
        let inst = BipartiteInstance::complete(3);
        let r = match_marginal_report(&inst, &mut seeded(5), 100_000, 10, 0.1).unwrap();
        for (_, &f) in &r.freq {
            assert!((f - 1.0 / 3.0).abs() <= 0.02, "{f}");
        }
    }

    #[test]
    fn k44_minus_edge_marginals_match_enumeration() {
        let mut inst = BipartiteInstance::complete(4);
        inst.b.retain(|&e| e != (0, 0));
        let all = enumerate_perfect_matchings(&inst, 1000);
        assert_eq!(all.len(), 18);
        let exact = perfect_matching_marginals(&inst);
        // edges at the two depleted vertices rise above 1/4
        assert!((exact[&(0, 1)] - 6.0 / 18.0).abs() < 1e-12);
        let r = match_marginal_report(&inst, &mut seeded(2), 60_000, 10, 0.1).unwrap();
        assert!(r.max_deviation(&exact) < 0.02, "{}", r.max_deviation(&exact));
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 16);
    }

    #[test]
    fn g12_marginals_match_exact_counts() {
        let mut rng = seeded(11);
        let inst = random_instance(12, 0.7, 0, &mut rng);
        let exact = perfect_matching_marginals(&inst);
        let r = match_marginal_report(&inst, &mut rng, 100_000, 20, 0.1).unwrap();
        let dev = r.max_deviation(&exact);
        assert!(dev <= 0.03, "{dev}");
    }

    #[test]
    fn repair_reaches_zero_and_never_increases() {
        for seed in 0..30 {
            let mut rng = seeded(seed);
            let inst = random_instance(20, 0.8, 2, &mut rng);
            let mut chain = match SwitchChain::new(&inst) {
                Ok(c) => c,
                Err(_) => continue,
            };
            chain.repair(&mut rng, 200_000).unwrap();
            assert_eq!(chain.mzmz(), 0);
            for _ in 0..2000 {
                chain.step(&mut rng);
                assert_eq!(chain.mzmz(), 0);
            }
        }
    }

    #[test]
    fn blocked_mode_returns_valid_matching() {
        let mut rng = seeded(3);
        let inst = random_instance(36, 0.9, 1, &mut rng);
        let opts = MatchOptions { steps: 2000, repair_budget: 1_000_000, blocked: true };
        let o = match_sample_with(&inst, &mut rng, opts).unwrap();
        let ys: BTreeSet<usize> = o.mate.iter().copied().collect();
        assert_eq!(ys.len(), 36);
        assert_eq!(count_mzmz(&inst, &o.mate), 0);
    }

    #[test]
    fn pair_condition_examples() {
        let k = BipartiteInstance::complete(10);
        assert!(pair_condition_check(&k, 0.01, 1.0).unwrap().pass);

        let mut km = BipartiteInstance::complete(20);
        km.b.retain(|&(x, y)| x != y);
        let r = pair_condition_check(&km, 0.1, 0.95).unwrap();
        assert!(r.pass, "{r:?}");

        let b: Vec<(usize, usize)> =
            (0..20).flat_map(|x| (0..20).map(move |y| (x, y))).filter(|&(x, y)| (x < 10) == (y < 10)).collect();
        let two = BipartiteInstance::new(20, 20, b, vec![]).unwrap();
        let r = pair_condition_check(&two, 0.05, 0.5).unwrap();
        assert!(!r.pass);
        assert_eq!(r.bad_pairs, 180);
    }

    fn cyclic_labels(m: usize) -> LabeledMultigraph {
        let edges = (0..m).flat_map(|j| (0..m).map(move |x| LabeledEdge { x, y: (x + j) % m, label: j })).collect();
        LabeledMultigraph { x_size: m, y_size: m, edges }
    }

    #[test]
    fn rainbow_examples() {
        let one = LabeledMultigraph { x_size: 1, y_size: 1, edges: vec![LabeledEdge { x: 0, y: 0, label: 0 }] };
        let r = rainbow_matching(&one).unwrap();
        assert_eq!((r.edges.len(), r.deficit), (1, 0));

        for m in [3, 5, 7, 9] {
            let r = rainbow_matching(&cyclic_labels(m)).unwrap();
            assert_eq!(r.deficit, 0, "m = {m}");
        }

        // greedy in label order gives (0,0) to label 0, which starves label 1
        let e = |x, y, label| LabeledEdge { x, y, label };
        let adv = LabeledMultigraph {
            x_size: 3,
            y_size: 3,
            edges: vec![e(0, 0, 0), e(1, 1, 0), e(0, 0, 1), e(2, 2, 2)],
        };
        let r = rainbow_matching(&adv).unwrap();
        assert_eq!(r.deficit, 0);
        let bad = LabeledMultigraph { x_size: 2, y_size: 2, edges: vec![e(0, 0, 0), e(0, 1, 0)] };
        assert!(rainbow_matching(&bad).is_err());
    }

    /// Largest rainbow matching by exhaustive search.
    fn brute_rainbow(mg: &LabeledMultigraph) -> usize {
        fn go(k: usize, labels: &[Vec<LabeledEdge>], xs: &mut Vec<bool>, ys: &mut Vec<bool>) -> usize {
            if k == labels.len() {
                return 0;
            }
            let mut best = go(k + 1, labels, xs, ys);
            for e in &labels[k] {
                if !xs[e.x] && !ys[e.y] {
                    xs[e.x] = true;
                    ys[e.y] = true;
                    best = best.max(1 + go(k + 1, labels, xs, ys));
                    xs[e.x] = false;
                    ys[e.y] = false;
                }
            }
            best
        }
        let mut by: BTreeMap<usize, Vec<LabeledEdge>> = BTreeMap::new();
        for &e in &mg.edges {
            by.entry(e.label).or_default().push(e);
        }
        let labels: Vec<Vec<LabeledEdge>> = by.into_values().collect();
        go(0, &labels, &mut vec![false; mg.x_size], &mut vec![false; mg.y_size])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn samples_are_valid(n in 1usize..14, p in 0.5f64..1.0, zdeg in 0usize..3, seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let inst = random_instance(n, p, zdeg, &mut rng);
            if let Ok(o) = match_sample(&inst, &mut rng, 500) {
                let ys: BTreeSet<usize> = o.mate.iter().copied().collect();
                prop_assert_eq!(ys.len(), n);
                for (x, &y) in o.mate.iter().enumerate() {
                    prop_assert!(inst.b.binary_search(&(x, y)).is_ok());
                }
                prop_assert_eq!(count_mzmz(&inst, &o.mate), 0);
            }
        }

        #[test]
        fn rainbow_is_valid_and_near_optimal(m in 1usize..5, seed in any::<u64>(), labels in 1usize..5) {
            let mut rng = seeded(seed);
            let mut edges = Vec::new();
            for l in 0..labels {
                let mut ys: Vec<usize> = (0..m).collect();
                ys.shuffle(&mut rng);
                for x in 0..m {
                    if rng.gen_bool(0.7) {
                        edges.push(LabeledEdge { x, y: ys[x], label: l });
                    }
                }
            }
            let mg = LabeledMultigraph { x_size: m, y_size: m, edges };
            let r = rainbow_matching(&mg).unwrap();
            let xs: BTreeSet<usize> = r.edges.iter().map(|e| e.x).collect();
            let ys: BTreeSet<usize> = r.edges.iter().map(|e| e.y).collect();
            let ls: BTreeSet<usize> = r.edges.iter().map(|e| e.label).collect();
            prop_assert_eq!(xs.len(), r.edges.len());
            prop_assert_eq!(ys.len(), r.edges.len());
            prop_assert_eq!(ls.len(), r.edges.len());
            prop_assert!(r.edges.len() + 1 >= brute_rainbow(&mg));
        }
    }
}
