//! Host graphs, cyclic orders, labelled digraphs.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Simple undirected graph on `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;
    fn try_from(g: GraphJson) -> Result<Self> {
        let edges: Vec<_> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(g.n, &edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        let edges = g.edges().into_iter().map(|(u, v)| [u, v]).collect();
        GraphJson { n: g.n, edges }
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|x| (0..n).filter(|&y| y != x).collect())
            .collect();
        Graph {
            n,
            adj,
            m: n * n.saturating_sub(1) / 2,
        }
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!(
                    "edge {u}-{v} out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::Input(format!("loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (x, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("multi-edge at {x}")));
            }
        }
        Ok(Graph {
            n,
            adj,
            m: edges.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        x < self.n && y < self.n && self.adj[x].binary_search(&y).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Edge density `|G| / C(n, 2)`.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m as f64 / (self.n * (self.n - 1) / 2) as f64
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n_decl: Option<usize> = None;
        let mut max_v = None::<usize>;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let a = it.next().unwrap_or("");
            let b = it.next();
            if a == "n" {
                let v = b.and_then(|s| s.parse().ok());
                n_decl = Some(v.ok_or_else(|| Error::Input(format!("line {}: bad n", ln + 1)))?);
                continue;
            }
            let parse = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::Input(format!("line {}: bad vertex {s:?}", ln + 1)))
            };
            let u = parse(a)?;
            let v = parse(
                b.ok_or_else(|| Error::Input(format!("line {}: missing endpoint", ln + 1)))?,
            )?;
            max_v = Some(max_v.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = n_decl.unwrap_or(max_v.map_or(0, |m| m + 1));
        Graph::from_edges(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphJson = serde_json::from_str(text)?;
        Graph::try_from(g)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let edges: Vec<[usize; 2]> = self.edges().into_iter().map(|(u, v)| [u, v]).collect();
        serde_json::json!({ "n": self.n, "edges": edges })
    }
}

/// `∩_{x∈s} N(x)`; the empty intersection is `V(g)`.
pub fn common_neighborhood(g: &Graph, s: &[usize]) -> Result<Vec<usize>> {
    if let Some(&x) = s.iter().find(|&&x| x >= g.n()) {
        return Err(Error::Input(format!("vertex {x} out of range")));
    }
    let mut cur: Vec<usize> = match s.first() {
        None => return Ok((0..g.n()).collect()),
        Some(&x) => g.neighbors(x).to_vec(),
    };
    for &x in &s[1..] {
        let nb = g.neighbors(x);
        cur.retain(|y| nb.binary_search(y).is_ok());
    }
    Ok(cur)
}

/// Outcome of a typicality check.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalVerdict {
    pub typical: bool,
    pub witness: Option<Vec<usize>>,
    pub sampled: bool,
    pub checked: usize,
}

/// Options for [`is_typical`].
#[derive(Debug, Clone, Copy)]
pub struct TypicalOpts {
    /// Above this many candidate sets, switch to sampling.
    pub exhaustive_limit: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for TypicalOpts {
    fn default() -> Self {
        TypicalOpts {
            exhaustive_limit: 5_000_000,
            samples: 20_000,
            seed: 0,
        }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

enum Bound {
    Exact(BigRational, BigRational),
    Float(f64, f64),
}

impl Bound {
    fn contains(&self, c: usize) -> bool {
        match self {
            Bound::Exact(lo, hi) => {
                let c = BigRational::from_integer(BigInt::from(c));
                *lo <= c && c <= *hi
            }
            Bound::Float(lo, hi) => {
                let c = c as f64;
                c >= lo - 1e-9 && c <= hi + 1e-9
            }
        }
    }
}

fn typical_bounds(g: &Graph, xi: f64, s: usize) -> Vec<Bound> {
    let n = g.n();
    let exact = n <= 10_000;
    let mut out = Vec::with_capacity(s + 1);
    for k in 0..=s {
        if exact {
            let pairs = (n * n.saturating_sub(1) / 2).max(1);
            let d = BigRational::new(BigInt::from(g.edge_count()), BigInt::from(pairs));
            let x = BigRational::from_f64(xi).unwrap_or_else(BigRational::zero);
            let one = BigRational::one();
            let nn = BigRational::from_integer(BigInt::from(n));
            let lo = num_traits::pow((&one - &x) * &d, k) * &nn;
            let hi = num_traits::pow((&one + &x) * &d, k) * &nn;
            out.push(Bound::Exact(lo, hi));
        } else {
            let d = g.density();
            let lo = ((1.0 - xi) * d).powi(k as i32) * n as f64;
            let hi = ((1.0 + xi) * d).powi(k as i32) * n as f64;
            out.push(Bound::Float(lo, hi));
        }
    }
    out
}

/// `(xi, s)`-typicality: every `S` with `|S| ≤ s` has `((1±xi)d)^{|S|} n`
/// common neighbours. Exhaustive when the number of sets is small, sampled
/// otherwise (flagged in the verdict).
pub fn is_typical(g: &Graph, xi: f64, s: usize, opts: TypicalOpts) -> Result<TypicalVerdict> {
    if s > g.n() {
        return Err(Error::Input(format!("s = {s} exceeds n = {}", g.n())));
    }
    if !(xi > 0.0 && xi < 1.0) || s == 0 {
        return Err(Error::Input("need 0 < xi < 1 and s ≥ 1".into()));
    }
    let bounds = typical_bounds(g, xi, s);
    let total: u128 = (1..=s)
        .map(|k| binom(g.n(), k))
        .fold(0u128, |a, b| a.saturating_add(b));
    let mut checked = 0usize;
    if total <= opts.exhaustive_limit {
        for k in 1..=s {
            let mut set: Vec<usize> = (0..k).collect();
            loop {
                checked += 1;
                let c = common_neighborhood(g, &set)?.len();
                if !bounds[k].contains(c) {
                    return Ok(TypicalVerdict {
                        typical: false,
                        witness: Some(set),
                        sampled: false,
                        checked,
                    });
                }
                // next combination
                let mut i = k;
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    if set[i] < g.n() - k + i {
                        set[i] += 1;
                        for j in i + 1..k {
                            set[j] = set[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        return Ok(TypicalVerdict {
            typical: true,
            witness: None,
            sampled: false,
            checked,
        });
    }
    let mut rng = crate::rng::seeded(opts.seed);
    let verts: Vec<usize> = (0..g.n()).collect();
    for i in 0..opts.samples {
        let k = 1 + i % s;
        let mut set: Vec<usize> = verts.choose_multiple(&mut rng, k).copied().collect();
        set.sort_unstable();
        checked += 1;
        let c = common_neighborhood(g, &set)?.len();
        if !bounds[k].contains(c) {
            return Ok(TypicalVerdict {
                typical: false,
                witness: Some(set),
                sampled: true,
                checked,
            });
        }
    }
    Ok(TypicalVerdict {
        typical: true,
        witness: None,
        sampled: true,
        checked,
    })
}

/// Bijection `V(G) → [n]` read as a cyclic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicOrder {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl CyclicOrder {
    pub fn identity(n: usize) -> Self {
        CyclicOrder {
            perm: (0..n).collect(),
            inv: (0..n).collect(),
        }
    }

    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inv = vec![usize::MAX; n];
        for (v, &p) in perm.iter().enumerate() {
            if p >= n || inv[p] != usize::MAX {
                return Err(Error::Input("cyclic order is not a bijection".into()));
            }
            inv[p] = v;
        }
        Ok(CyclicOrder { perm, inv })
    }

    pub fn random(n: usize, rng: &mut Rng) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        CyclicOrder::from_perm(perm).expect("shuffle is a bijection")
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Position (label) of vertex `v`.
    pub fn label(&self, v: usize) -> usize {
        self.perm[v]
    }

    /// Vertex at position `p`.
    pub fn vertex(&self, p: usize) -> usize {
        self.inv[p % self.n()]
    }

    pub fn succ(&self, v: usize) -> usize {
        self.vertex(self.perm[v] + 1)
    }

    pub fn pred(&self, v: usize) -> usize {
        let n = self.n();
        self.vertex(self.perm[v] + n - 1)
    }
}

/// `min(|a-b|, n-|a-b|)` on labels.
pub fn circ_dist(n: usize, a: usize, b: usize) -> usize {
    let d = a.abs_diff(b) % n.max(1);
    d.min(n - d)
}

pub fn cyclic_distance(o: &CyclicOrder, x: usize, y: usize) -> Result<usize> {
    let n = o.n();
    if x >= n || y >= n {
        return Err(Error::Input(format!("vertex out of range for n = {n}")));
    }
    Ok(circ_dist(n, o.label(x), o.label(y)))
}

/// Directed graph; each arc may carry several distinct labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out: Vec<BTreeSet<usize>>,
    inn: Vec<BTreeSet<usize>>,
    labels: BTreeMap<(usize, usize), BTreeSet<String>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            out: vec![BTreeSet::new(); n],
            inn: vec![BTreeSet::new(); n],
            labels: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<bool> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::Input(format!("bad arc {u}->{v}")));
        }
        self.inn[v].insert(u);
        Ok(self.out[u].insert(v))
    }

    /// Adds `u→v` carrying `label`; false if that labelled arc already exists.
    pub fn add_labeled(&mut self, u: usize, v: usize, label: &str) -> Result<bool> {
        self.add_arc(u, v)?;
        Ok(self
            .labels
            .entry((u, v))
            .or_default()
            .insert(label.to_string()))
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        self.labels.remove(&(u, v));
        self.inn[v].remove(&u);
        self.out[u].remove(&v)
    }

    pub fn reverse(&mut self, u: usize, v: usize) -> bool {
        if !self.out[u].contains(&v) {
            return false;
        }
        let lab = self.labels.remove(&(u, v));
        self.remove_arc(u, v);
        self.out[v].insert(u);
        self.inn[u].insert(v);
        if let Some(l) = lab {
            self.labels.insert((v, u), l);
        }
        true
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].contains(&v)
    }

    pub fn out_neighbors(&self, u: usize) -> &BTreeSet<usize> {
        &self.out[u]
    }

    pub fn in_neighbors(&self, u: usize) -> &BTreeSet<usize> {
        &self.inn[u]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out[u].len()
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.inn[u].len()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|s| s.len()).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
    }

    pub fn labels_of(&self, u: usize, v: usize) -> Option<&BTreeSet<String>> {
        self.labels.get(&(u, v))
    }

    /// Underlying undirected graph (antiparallel arcs collapse).
    pub fn underlying(&self) -> Graph {
        let mut e: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (u, v) in self.arcs() {
            e.insert((u.min(v), u.max(v)));
        }
        let e: Vec<_> = e.into_iter().collect();
        Graph::from_edges(self.n, &e).expect("arcs are in range and loop-free")
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in 0..self.n {
            s.push_str(&format!("  {v};\n"));
        }
        for (u, v) in self.arcs() {
            match self.labels.get(&(u, v)) {
                Some(ls) if !ls.is_empty() => {
                    let l: Vec<&str> = ls.iter().map(|x| x.as_str()).collect();
                    s.push_str(&format!("  {u} -> {v} [label=\"{}\"];\n", l.join(",")));
                }
                _ => s.push_str(&format!("  {u} -> {v};\n")),
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let arcs: Vec<serde_json::Value> = self
            .arcs()
            .map(|(u, v)| {
                let labels: Vec<&String> = self
                    .labels
                    .get(&(u, v))
                    .map(|s| s.iter().collect())
                    .unwrap_or_default();
                serde_json::json!({ "from": u, "to": v, "labels": labels })
            })
            .collect();
        serde_json::json!({ "n": self.n, "arcs": arcs })
    }
}

/// Each edge directed either way with probability 1/2.
pub fn random_orientation(g: &Graph, rng: &mut Rng) -> Digraph {
    let mut d = Digraph::new(g.n());
    for (u, v) in g.edges() {
        let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        d.add_arc(a, b).expect("graph edges are valid arcs");
    }
    d
}

/// Keeps each edge independently with probability `p`.
pub fn independent_subsample(g: &Graph, p: f64, rng: &mut Rng) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Input(format!("probability {p} outside [0, 1]")));
    }
    let kept: Vec<_> = g.edges().into_iter().filter(|_| rng.gen_bool(p)).collect();
    Graph::from_edges(g.n(), &kept)
}

/// Binomial random graph `G(n, p)`.
pub fn gnp(n: usize, p: f64, rng: &mut Rng) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Input(format!("probability {p} outside [0, 1]")));
    }
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn common_neighborhood_examples() {
        assert_eq!(
            common_neighborhood(&Graph::complete(4), &[0, 1]).unwrap(),
            vec![2, 3]
        );
        assert_eq!(
            common_neighborhood(&cycle(5), &[]).unwrap(),
            vec![0, 1, 2, 3, 4]
        );
        assert_eq!(common_neighborhood(&cycle(5), &[0, 2]).unwrap(), vec![1]);
        assert!(common_neighborhood(&cycle(5), &[7]).is_err());
    }

    #[test]
    fn typicality_examples() {
        let v = is_typical(&Graph::complete(10), 0.3, 2, TypicalOpts::default()).unwrap();
        assert!(v.typical && !v.sampled);

        let mut e = Graph::complete(10).edges();
        e.retain(|&(u, v)| !(u % 2 == 0 && v == u + 1));
        let g = Graph::from_edges(10, &e).unwrap();
        assert_eq!(g.edge_count(), 40);
        let v = is_typical(&g, 0.01, 1, TypicalOpts::default()).unwrap();
        assert!(!v.typical);
        assert_eq!(v.witness.unwrap().len(), 1);

        assert!(
            is_typical(&Graph::empty(10), 0.5, 1, TypicalOpts::default())
                .unwrap()
                .typical
        );
        assert!(is_typical(&Graph::empty(3), 0.5, 4, TypicalOpts::default()).is_err());
    }

    #[test]
    fn typicality_sampled_mode_is_flagged() {
        let opts = TypicalOpts {
            exhaustive_limit: 10,
            samples: 50,
            seed: 1,
        };
        let v = is_typical(&Graph::complete(30), 0.2, 3, opts).unwrap();
        assert!(v.typical && v.sampled);
    }

    #[test]
    fn cyclic_distance_examples() {
        let o = CyclicOrder::identity(10);
        assert_eq!(cyclic_distance(&o, 2, 9).unwrap(), 3);
        assert_eq!(cyclic_distance(&o, 4, 4).unwrap(), 0);
        assert_eq!(cyclic_distance(&CyclicOrder::identity(7), 1, 5).unwrap(), 3);
        assert_eq!(o.succ(9), 0);
        assert_eq!(o.pred(0), 9);
    }

    #[test]
    fn orientation_examples() {
        let single = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut fwd = 0;
        for s in 0..2000 {
            let d = random_orientation(&single, &mut seeded(s));
            assert_eq!(d.arc_count(), 1);
            if d.has_arc(0, 1) {
                fwd += 1;
            }
        }
        // 2000 fair coins; 5 standard deviations is about 112
        assert!((fwd as i64 - 1000).abs() < 112, "{fwd}");
        assert_eq!(
            random_orientation(&Graph::empty(3), &mut seeded(0)).arc_count(),
            0
        );
        let d = random_orientation(&Graph::complete(4), &mut seeded(3));
        assert_eq!(d.arc_count(), 6);
        assert_eq!(d.underlying(), Graph::complete(4));
    }

    #[test]
    fn subsample_examples() {
        let k = Graph::complete(100);
        let mut rng = seeded(0);
        assert_eq!(independent_subsample(&k, 1.0, &mut rng).unwrap(), k);
        assert_eq!(
            independent_subsample(&k, 0.0, &mut rng)
                .unwrap()
                .edge_count(),
            0
        );
        assert!(independent_subsample(&k, 1.5, &mut rng).is_err());
        // Bin(4950, 1/2): mean 2475, sd = sqrt(4950)/2 ≈ 35.18
        for s in 0..100 {
            let m = independent_subsample(&k, 0.5, &mut seeded(s))
                .unwrap()
                .edge_count() as f64;
            assert!((m - 2475.0).abs() <= 4.0 * 35.18, "{m}");
        }
    }

    #[test]
    fn io_round_trip() {
        let g = cycle(6);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        assert_eq!(Graph::from_json(&g.to_json_value().to_string()).unwrap(), g);
        assert!(Graph::parse_edge_list("0 0\n").is_err());
        assert!(Graph::parse_edge_list("0 1\n1 0\n").is_err());
        let mut d = Digraph::new(3);
        d.add_labeled(0, 1, "H").unwrap();
        assert!(!d.add_labeled(0, 1, "H").unwrap());
        d.add_labeled(0, 1, "J").unwrap();
        assert!(d.to_dot().contains("0 -> 1 [label=\"H,J\"]"));
        assert_eq!(
            d.to_json_value()["arcs"][0]["labels"]
                .as_array()
                .unwrap()
                .len(),
            2
        );
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..14, any::<u64>(), 0.1f64..0.9)
            .prop_map(|(n, s, p)| gnp(n, p, &mut seeded(s)).unwrap())
    }

    fn brute_typical(g: &Graph, xi: f64, s: usize) -> bool {
        let n = g.n();
        let d = g.density();
        for mask in 1u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k > s {
                continue;
            }
            let c = (0..n)
                .filter(|&y| (0..n).all(|x| mask & (1 << x) == 0 || g.has_edge(x, y)))
                .count() as f64;
            let lo = ((1.0 - xi) * d).powi(k as i32) * n as f64;
            let hi = ((1.0 + xi) * d).powi(k as i32) * n as f64;
            if c < lo - 1e-9 || c > hi + 1e-9 {
                return false;
            }
        }
        true
    }

    proptest! {
        #[test]
        fn common_neighborhood_recursion(g in arb_graph(), picks in prop::collection::vec(0usize..14, 0..4), x in 0usize..14) {
            let s: Vec<usize> = picks.into_iter().filter(|&v| v < g.n()).collect();
            let x = x % g.n();
            let mut sx = s.clone();
            sx.push(x);
            let lhs = common_neighborhood(&g, &sx).unwrap();
            let mut rhs = common_neighborhood(&g, &s).unwrap();
            rhs.retain(|y| g.has_edge(x, *y));
            rhs.sort_unstable();
            let mut lhs = lhs;
            lhs.sort_unstable();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn typical_matches_brute_force(g in arb_graph(), xi in 0.05f64..0.9, s in 1usize..3) {
            prop_assume!(s <= g.n());
            let v = is_typical(&g, xi, s, TypicalOpts::default()).unwrap();
            prop_assert_eq!(v.typical, brute_typical(&g, xi, s));
        }

        #[test]
        fn cyclic_distance_is_shift_invariant_metric(n in 1usize..40, x in 0usize..40, y in 0usize..40, z in 0usize..40) {
            let (x, y, z) = (x % n, y % n, z % n);
            let o = CyclicOrder::identity(n);
            let d = |a, b| cyclic_distance(&o, a, b).unwrap();
            prop_assert!(d(x, y) <= n / 2);
            prop_assert_eq!(d(x, y), d(y, x));
            prop_assert!(d(x, z) <= d(x, y) + d(y, z));
            prop_assert_eq!(d(x, y), d(o.succ(x), o.succ(y)));
            prop_assert_eq!(d(x, y) == 0, x == y);
        }

        #[test]
        fn sampling_is_reproducible(g in arb_graph(), seed in any::<u64>(), p in 0.0f64..1.0) {
            let a = independent_subsample(&g, p, &mut seeded(seed)).unwrap();
            let b = independent_subsample(&g, p, &mut seeded(seed)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.edges().iter().all(|&(u, v)| g.has_edge(u, v)));
            let o1 = random_orientation(&g, &mut seeded(seed));
            let o2 = random_orientation(&g, &mut seeded(seed));
            prop_assert_eq!(&o1, &o2);
            prop_assert_eq!(o1.underlying(), g);
        }
    }
}
