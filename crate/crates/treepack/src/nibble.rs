//! Weighted hypergraph matchings by random bites.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedHypergraph {
    n: usize,
    r: usize,
    edges: Vec<Vec<usize>>,
    w: Vec<f64>,
    inc: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct HyperJson {
    r: usize,
    vertices: usize,
    edges: Vec<HyperEdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct HyperEdgeJson {
    verts: Vec<usize>,
    w: f64,
}

impl WeightedHypergraph {
    pub fn new(n: usize, r: usize, edges: Vec<Vec<usize>>, w: Vec<f64>) -> Result<Self> {
        if edges.len() != w.len() {
            return Err(Error::Input(format!("{} edges but {} weights", edges.len(), w.len())));
        }
        let mut inc = vec![Vec::new(); n];
        let mut norm = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() || e.len() > r {
                return Err(Error::Input(format!("edge {i} has {} vertices, rank is {r}", e.len())));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::Input(format!("edge {i} has vertex {v} outside [{n}]")));
            }
            if !(w[i] > 0.0 && w[i].is_finite()) {
                return Err(Error::Input(format!("edge {i} has weight {}", w[i])));
            }
            for &v in &e {
                inc[v].push(i);
            }
            norm.push(e);
        }
        Ok(WeightedHypergraph { n, r, edges: norm, w, inc })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: HyperJson = serde_json::from_str(text)?;
        let (edges, w) = j.edges.into_iter().map(|e| (e.verts, e.w)).unzip();
        WeightedHypergraph::new(j.vertices, j.r, edges, w)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let edges =
            self.edges.iter().zip(&self.w).map(|(e, &w)| HyperEdgeJson { verts: e.clone(), w }).collect();
        serde_json::to_value(HyperJson { r: self.r, vertices: self.n, edges }).expect("plain data")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, i: usize) -> &[usize] {
        &self.edges[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.inc[v].iter().map(|&i| self.w[i]).sum()
    }

    pub fn weighted_codegree(&self, u: usize, v: usize) -> f64 {
        self.inc[u].iter().filter(|&&i| self.edges[i].binary_search(&v).is_ok()).map(|&i| self.w[i]).sum()
    }

    /// Vertices lying in at least one edge.
    pub fn coverable(&self) -> usize {
        self.inc.iter().filter(|i| !i.is_empty()).count()
    }

    /// Checks `ω(e) ≥ 1/C`, `ω(H[v]) ≤ 1` and `ω(H[uv]) < C^{-β}`.
    pub fn check_load(&self, c: f64, beta: f64) -> Result<()> {
        if let Some(i) = (0..self.edges.len()).find(|&i| self.w[i] < 1.0 / c - SLACK) {
            return Err(Error::Input(format!("edge {i} has weight {} < 1/C", self.w[i])));
        }
        for v in 0..self.n {
            let d = self.weighted_degree(v);
            if d > 1.0 + SLACK {
                return Err(Error::Input(format!("vertex {v} has weighted degree {d} > 1")));
            }
        }
        let cap = c.powf(-beta);
        for u in 0..self.n {
            let mut co: HashMap<usize, f64> = HashMap::new();
            for &i in &self.inc[u] {
                for &v in &self.edges[i] {
                    if v > u {
                        *co.entry(v).or_default() += self.w[i];
                    }
                }
            }
            let mut over: Vec<(usize, f64)> = co.into_iter().filter(|&(_, x)| x >= cap).collect();
            over.sort_by_key(|&(v, _)| v);
            if let Some(&(v, x)) = over.first() {
                return Err(Error::Input(format!("pair ({u}, {v}) has weighted codegree {x} ≥ C^-β = {cap}")));
            }
        }
        Ok(())
    }

    fn disjoint(&self, a: usize, b: usize) -> bool {
        let (ea, eb) = (&self.edges[a], &self.edges[b]);
        let (mut i, mut j) = (0, 0);
        while i < ea.len() && j < eb.len() {
            match ea[i].cmp(&eb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

/// A clean test function of order at most two: `f(I) = Σ a(e) + Σ b(e, e')`
/// over the edges and pairs of `I` when `I` is a matching, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanFunction {
    pub name: String,
    singles: BTreeMap<usize, f64>,
    pairs: BTreeMap<(usize, usize), f64>,
}

impl CleanFunction {
    pub fn new(name: &str) -> Self {
        CleanFunction { name: name.into(), singles: BTreeMap::new(), pairs: BTreeMap::new() }
    }

    /// `f(M) = |M|`.
    pub fn size(h: &WeightedHypergraph) -> Self {
        let mut f = CleanFunction::new("size");
        for i in 0..h.edge_count() {
            f.add_single(i, 1.0);
        }
        f
    }

    /// Number of vertices of `set` covered by `M`.
    pub fn covers(h: &WeightedHypergraph, name: &str, set: &[usize]) -> Self {
        let mut f = CleanFunction::new(name);
        for &v in set {
            for &i in h.incident(v) {
                f.add_single(i, 1.0);
            }
        }
        f
    }

    pub fn add_single(&mut self, e: usize, a: f64) {
        assert!(a >= 0.0, "clean functions are nonnegative");
        *self.singles.entry(e).or_default() += a;
    }

    pub fn add_pair(&mut self, e: usize, e2: usize, b: f64) {
        assert!(b >= 0.0 && e != e2, "clean functions are nonnegative");
        *self.pairs.entry((e.min(e2), e.max(e2))).or_default() += b;
    }

    pub fn order(&self) -> usize {
        if self.pairs.is_empty() {
            1
        } else {
            2
        }
    }

    /// `f(H, ω)`: the expectation under independent inclusion with
    /// probability `ω`.
    pub fn expectation(&self, h: &WeightedHypergraph) -> f64 {
        let s: f64 = self.singles.iter().map(|(&e, &a)| a * h.weight(e)).sum();
        let p: f64 = self
            .pairs
            .iter()
            .filter(|(&(a, b), _)| h.disjoint(a, b))
            .map(|(&(a, b), &c)| c * h.weight(a) * h.weight(b))
            .sum();
        s + p
    }

    /// Contribution of terms with an edge through `v`.
    pub fn restricted(&self, h: &WeightedHypergraph, v: usize) -> f64 {
        let has = |e: usize| h.edge(e).binary_search(&v).is_ok();
        let s: f64 = self.singles.iter().filter(|(&e, _)| has(e)).map(|(&e, &a)| a * h.weight(e)).sum();
        let p: f64 = self
            .pairs
            .iter()
            .filter(|(&(a, b), _)| (has(a) || has(b)) && h.disjoint(a, b))
            .map(|(&(a, b), &c)| c * h.weight(a) * h.weight(b))
            .sum();
        s + p
    }

    /// Evaluated from scratch on an edge list.
    pub fn eval(&self, h: &WeightedHypergraph, m: &[usize]) -> f64 {
        for (k, &a) in m.iter().enumerate() {
            if m[..k].iter().any(|&b| !h.disjoint(a, b)) {
                return 0.0;
            }
        }
        let mut total = 0.0;
        for (k, &e) in m.iter().enumerate() {
            total += self.singles.get(&e).copied().unwrap_or(0.0);
            for &e2 in &m[..k] {
                total += self.pairs.get(&(e.min(e2), e.max(e2))).copied().unwrap_or(0.0);
            }
        }
        total
    }
}

/// Sampled vertices `v` with `f_v(H, ω) > C^{-β} f(H, ω)`.
pub fn spread_violations(
    h: &WeightedHypergraph,
    f: &CleanFunction,
    c: f64,
    beta: f64,
    samples: usize,
    rng: &mut Rng,
) -> Vec<usize> {
    if h.n() == 0 {
        return Vec::new();
    }
    let total = f.expectation(h);
    let cap = c.powf(-beta) * total;
    let mut bad: Vec<usize> = (0..samples)
        .map(|_| rng.gen_range(0..h.n()))
        .filter(|&v| f.restricted(h, v) > cap + SLACK)
        .collect();
    bad.sort_unstable();
    bad.dedup();
    bad
}

#[derive(Debug, Clone, PartialEq)]
pub struct FReport {
    pub name: String,
    pub f_m: f64,
    pub f_expect: f64,
    pub rel_dev: f64,
    pub incremental: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NibbleOutcome {
    /// Edge indices, in the order they joined.
    pub matching: Vec<usize>,
    pub covered: usize,
    /// Covered vertices after each round, then after the greedy pass.
    pub coverage: Vec<usize>,
    pub greedy_added: usize,
    /// Improving exchanges after the greedy pass.
    pub swaps: usize,
    pub reports: Vec<FReport>,
}

impl NibbleOutcome {
    pub fn report_csv(&self) -> String {
        let mut s = String::from("f_name,f_M,f_expect,rel_dev\n");
        for r in &self.reports {
            s.push_str(&format!("{},{},{},{}\n", r.name, r.f_m, r.f_expect, r.rel_dev));
        }
        s
    }
}

struct Tracker<'a> {
    f: &'a CleanFunction,
    partners: HashMap<usize, Vec<(usize, f64)>>,
    value: f64,
}

impl<'a> Tracker<'a> {
    fn new(f: &'a CleanFunction) -> Self {
        let mut partners: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        for (&(a, b), &c) in &f.pairs {
            partners.entry(a).or_default().push((b, c));
            partners.entry(b).or_default().push((a, c));
        }
        Tracker { f, partners, value: 0.0 }
    }

    fn add(&mut self, e: usize, in_m: &[bool]) {
        self.value += self.f.singles.get(&e).copied().unwrap_or(0.0);
        if let Some(ps) = self.partners.get(&e) {
            self.value += ps.iter().filter(|&&(o, _)| in_m[o]).map(|&(_, c)| c).sum::<f64>();
        }
    }
}

/// Random bites with activation probability `bite·ω(e)`; clashing activated
/// edges are dropped. A greedy pass in order of fewest live conflicts and a
/// local exchange pass finish.
pub fn nibble_match(
    h: &WeightedHypergraph,
    fs: &[CleanFunction],
    rng: &mut Rng,
    rounds: usize,
    bite: f64,
) -> Result<NibbleOutcome> {
    if !(bite > 0.0 && bite <= 1.0) {
        return Err(Error::Config(format!("bite {bite} outside (0, 1]")));
    }
    let mut covered = vec![false; h.n()];
    let mut in_m = vec![false; h.edge_count()];
    let mut matching = Vec::new();
    let mut trackers: Vec<Tracker> = fs.iter().map(Tracker::new).collect();
    let mut coverage = Vec::with_capacity(rounds + 1);
    let mut count = 0;
    let mut alive: Vec<usize> = (0..h.edge_count()).collect();
    let mut hits = vec![0u32; h.n()];
    let join = |e: usize,
                covered: &mut Vec<bool>,
                in_m: &mut Vec<bool>,
                count: &mut usize,
                matching: &mut Vec<usize>,
                trackers: &mut Vec<Tracker>| {
        for &v in h.edge(e) {
            covered[v] = true;
        }
        *count += h.edge(e).len();
        for t in trackers.iter_mut() {
            t.add(e, in_m);
        }
        in_m[e] = true;
        matching.push(e);
    };
    for _ in 0..rounds {
        alive.retain(|&e| h.edge(e).iter().all(|&v| !covered[v]));
        let active: Vec<usize> =
            alive.iter().copied().filter(|&e| rng.gen_bool((bite * h.weight(e)).min(1.0))).collect();
        for &e in &active {
            for &v in h.edge(e) {
                hits[v] += 1;
            }
        }
        for &e in &active {
            if h.edge(e).iter().all(|&v| hits[v] == 1) {
                join(e, &mut covered, &mut in_m, &mut count, &mut matching, &mut trackers);
            }
        }
        for &e in &active {
            for &v in h.edge(e) {
                hits[v] = 0;
            }
        }
        coverage.push(count);
    }
    alive.retain(|&e| h.edge(e).iter().all(|&v| !covered[v]));
    let mut conflicts: Vec<(usize, usize)> = alive
        .iter()
        .map(|&e| {
            let c = h.edge(e).iter().map(|&v| h.incident(v).len()).sum::<usize>();
            (c, e)
        })
        .collect();
    conflicts.shuffle(rng);
    conflicts.sort_by_key(|&(c, _)| c);
    let before = matching.len();
    for (_, e) in conflicts {
        if h.edge(e).iter().all(|&v| !covered[v]) {
            join(e, &mut covered, &mut in_m, &mut count, &mut matching, &mut trackers);
        }
    }
    let greedy_added = matching.len() - before;
    let swaps = improve(h, &mut matching, &mut covered, &mut in_m);
    if swaps > 0 {
        for e in 0..h.edge_count() {
            if !in_m[e] && h.edge(e).iter().all(|&v| !covered[v]) {
                for &v in h.edge(e) {
                    covered[v] = true;
                }
                in_m[e] = true;
                matching.push(e);
            }
        }
    }
    count = covered.iter().filter(|&&c| c).count();
    if swaps > 0 {
        for t in trackers.iter_mut() {
            t.value = 0.0;
            let mut seen = vec![false; h.edge_count()];
            for &e in &matching {
                t.add(e, &seen);
                seen[e] = true;
            }
        }
    }
    coverage.push(count);
    for (k, &a) in matching.iter().enumerate() {
        if matching[..k].iter().any(|&b| !h.disjoint(a, b)) {
            return Err(Error::Internal(format!("edges {a} and a predecessor intersect")));
        }
    }
    let reports = fs
        .iter()
        .zip(&trackers)
        .map(|(f, t)| {
            let f_m = f.eval(h, &matching);
            let f_expect = f.expectation(h);
            let rel_dev = if f_expect > 0.0 { (f_m - f_expect) / f_expect } else { 0.0 };
            FReport { name: f.name.clone(), f_m, f_expect, rel_dev, incremental: t.value }
        })
        .collect();
    Ok(NibbleOutcome { matching, covered: count, coverage, greedy_added, swaps, reports })
}

/// Replaces one or two matched edges by up to one more disjoint edge inside
/// the freed vertices whenever that covers more vertices.
fn improve(h: &WeightedHypergraph, m: &mut Vec<usize>, covered: &mut [bool], in_m: &mut [bool]) -> usize {
    let mut owner: Vec<Option<usize>> = vec![None; h.n()];
    for &e in m.iter() {
        for &v in h.edge(e) {
            owner[v] = Some(e);
        }
    }
    let mut swaps = 0;
    let mut changed = true;
    while changed {
        changed = false;
        let order: Vec<usize> = m.clone();
        for e in order {
            if !in_m[e] {
                continue;
            }
            // partners: matched edges met by an edge through e
            let mut groups: Vec<Vec<usize>> = vec![vec![e]];
            let mut partners: Vec<usize> = h
                .edge(e)
                .iter()
                .flat_map(|&v| h.incident(v).iter())
                .flat_map(|&c| h.edge(c).iter().filter_map(|&u| owner[u]))
                .filter(|&o| o != e)
                .collect();
            partners.sort_unstable();
            partners.dedup();
            groups.extend(partners.into_iter().map(|o| vec![e, o]));
            for g in groups {
                if let Some(add) = exchange(h, &g, covered) {
                    for &r in &g {
                        in_m[r] = false;
                        for &v in h.edge(r) {
                            covered[v] = false;
                            owner[v] = None;
                        }
                    }
                    m.retain(|x| !g.contains(x));
                    for a in add {
                        in_m[a] = true;
                        for &v in h.edge(a) {
                            covered[v] = true;
                            owner[v] = Some(a);
                        }
                        m.push(a);
                    }
                    swaps += 1;
                    changed = true;
                    break;
                }
            }
        }
    }
    swaps
}

/// Best set of at most `|out| + 1` disjoint edges inside the vertices freed
/// by removing `out`, if it covers more.
fn exchange(h: &WeightedHypergraph, out: &[usize], covered: &[bool]) -> Option<Vec<usize>> {
    const CAND_CAP: usize = 40;
    let freed: Vec<usize> = out.iter().flat_map(|&e| h.edge(e).iter().copied()).collect();
    let gone = |v: usize| freed.contains(&v);
    let mut cand: Vec<usize> = freed
        .iter()
        .flat_map(|&v| h.incident(v).iter().copied())
        .filter(|c| !out.contains(c) && h.edge(*c).iter().all(|&v| !covered[v] || gone(v)))
        .collect();
    cand.sort_unstable();
    cand.dedup();
    cand.truncate(CAND_CAP);
    let have: usize = freed.len();
    let limit = out.len() + 1;
    let mut best: Option<(usize, Vec<usize>)> = None;
    fn go(
        h: &WeightedHypergraph,
        cand: &[usize],
        from: usize,
        cur: &mut Vec<usize>,
        size: usize,
        limit: usize,
        best: &mut Option<(usize, Vec<usize>)>,
    ) {
        if best.as_ref().map_or(true, |b| size > b.0) {
            *best = Some((size, cur.clone()));
        }
        if cur.len() == limit {
            return;
        }
        for i in from..cand.len() {
            let c = cand[i];
            if cur.iter().all(|&x| h.disjoint(x, c)) {
                cur.push(c);
                go(h, cand, i + 1, cur, size + h.edge(c).len(), limit, best);
                cur.pop();
            }
        }
    }
    go(h, &cand, 0, &mut Vec::new(), 0, limit, &mut best);
    best.filter(|b| b.0 > have).map(|b| b.1)
}

/// Union of `d` uniformly random triangle factors on `n` vertices with
/// weights `1/d`. Triples repeating a pair already used are skipped, so every
/// codegree is at most `1/d`.
pub fn random_regular_3graph(n: usize, d: usize, rng: &mut Rng) -> Result<WeightedHypergraph> {
    if n % 3 != 0 || d == 0 {
        return Err(Error::Input("need 3 | n and d ≥ 1".into()));
    }
    let mut pairs = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let mut verts: Vec<usize> = (0..n).collect();
    for _ in 0..d {
        verts.shuffle(rng);
        for c in verts.chunks(3) {
            let mut e = c.to_vec();
            e.sort_unstable();
            let ps = [(e[0], e[1]), (e[0], e[2]), (e[1], e[2])];
            if ps.iter().all(|p| !pairs.contains(p)) {
                pairs.extend(ps);
                edges.push(e);
            }
        }
    }
    let w = vec![1.0 / d as f64; edges.len()];
    WeightedHypergraph::new(n, 3, edges, w)
}
