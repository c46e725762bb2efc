//! Exact ground truth for small instances: perfect matchings, the
//! decomposition verifier, exhaustive decomposition search and path systems.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matching::BipartiteInstance;
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectMatching {
    pub mate_x: Vec<Option<usize>>,
    pub mate_y: Vec<Option<usize>>,
    pub size: usize,
    pub perfect: bool,
    /// `X` vertices reachable by alternating paths from unmatched ones; their
    /// neighbourhood is smaller than the set by the matching deficiency.
    pub hall_violator: Vec<usize>,
    pub violator_neighbours: usize,
}

/// Maximum matching by Hopcroft–Karp.
pub fn exact_perfect_matching(inst: &BipartiteInstance) -> PerfectMatching {
    let (nx, ny) = (inst.x_size, inst.y_size);
    let adj = inst.b_adj();
    let mut mx: Vec<Option<usize>> = vec![None; nx];
    let mut my: Vec<Option<usize>> = vec![None; ny];
    let mut dist = vec![usize::MAX; nx];
    loop {
        let mut q = VecDeque::new();
        for x in 0..nx {
            if mx[x].is_none() {
                dist[x] = 0;
                q.push_back(x);
            } else {
                dist[x] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                match my[y] {
                    None => found = true,
                    Some(x2) if dist[x2] == usize::MAX => {
                        dist[x2] = dist[x] + 1;
                        q.push_back(x2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(
            x: usize,
            adj: &[Vec<usize>],
            mx: &mut [Option<usize>],
            my: &mut [Option<usize>],
            dist: &mut [usize],
        ) -> bool {
            for &y in &adj[x] {
                let ok = match my[y] {
                    None => true,
                    Some(x2) => dist[x2] == dist[x] + 1 && dfs(x2, adj, mx, my, dist),
                };
                if ok {
                    mx[x] = Some(y);
                    my[y] = Some(x);
                    return true;
                }
            }
            dist[x] = usize::MAX;
            false
        }
        for x in 0..nx {
            if mx[x].is_none() {
                dfs(x, &adj, &mut mx, &mut my, &mut dist);
            }
        }
    }
    let size = mx.iter().filter(|m| m.is_some()).count();
    let perfect = size == nx && nx == ny;
    let (mut violator, mut nbrs) = (Vec::new(), 0);
    if size < nx {
        let mut seen_x = vec![false; nx];
        let mut seen_y = vec![false; ny];
        let mut q: VecDeque<usize> = (0..nx).filter(|&x| mx[x].is_none()).collect();
        for &x in &q {
            seen_x[x] = true;
        }
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if !seen_y[y] {
                    seen_y[y] = true;
                    if let Some(x2) = my[y] {
                        if !seen_x[x2] {
                            seen_x[x2] = true;
                            q.push_back(x2);
                        }
                    }
                }
            }
        }
        violator = (0..nx).filter(|&x| seen_x[x]).collect();
        nbrs = seen_y.iter().filter(|&&s| s).count();
    }
    PerfectMatching { mate_x: mx, mate_y: my, size, perfect, hall_violator: violator, violator_neighbours: nbrs }
}

/// All perfect matchings of `b` (ignoring `z`), up to `limit`.
pub fn enumerate_perfect_matchings(inst: &BipartiteInstance, limit: usize) -> Vec<Vec<usize>> {
    let adj = inst.b_adj();
    let mut out = Vec::new();
    if inst.x_size != inst.y_size {
        return out;
    }
    fn go(x: usize, adj: &[Vec<usize>], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if x == adj.len() {
            out.push(cur.clone());
            return;
        }
        for &y in &adj[x] {
            if !used[y] {
                used[y] = true;
                cur.push(y);
                go(x + 1, adj, used, cur, out, limit);
                cur.pop();
                used[y] = false;
            }
        }
    }
    go(0, &adj, &mut vec![false; inst.y_size], &mut Vec::new(), &mut out, limit);
    out
}

/// Exact edge marginals of the uniform perfect matching of `b` by a subset
/// recursion over `Y`. Needs `|Y| ≤ 24`.
pub fn perfect_matching_marginals(inst: &BipartiteInstance) -> BTreeMap<(usize, usize), f64> {
    let n = inst.x_size;
    assert!(n == inst.y_size && n <= 24, "subset recursion needs a small square instance");
    let adj = inst.b_adj();
    let full = 1usize << n;
    // fwd[mask]: ways to match x_0..x_{|mask|-1} onto mask
    let mut fwd = vec![0u128; full];
    fwd[0] = 1;
    for mask in 0..full {
        let k = mask.count_ones() as usize;
        if fwd[mask] == 0 || k == n {
            continue;
        }
        for &y in &adj[k] {
            if mask & (1 << y) == 0 {
                fwd[mask | (1 << y)] += fwd[mask];
            }
        }
    }
    // bwd[mask]: ways to match x_{|mask|}..x_{n-1} onto the complement
    let mut bwd = vec![0u128; full];
    bwd[full - 1] = 1;
    for mask in (0..full).rev() {
        let k = mask.count_ones() as usize;
        if k == n {
            continue;
        }
        bwd[mask] = adj[k].iter().filter(|&&y| mask & (1 << y) == 0).map(|&y| bwd[mask | (1 << y)]).sum();
    }
    let total = fwd[full - 1];
    let mut out = BTreeMap::new();
    for &(x, y) in &inst.b {
        let mut c = 0u128;
        for mask in 0..full {
            if mask.count_ones() as usize == x && mask & (1 << y) == 0 {
                c += fwd[mask] * bwd[mask | (1 << y)];
            }
        }
        out.insert((x, y), if total == 0 { 0.0 } else { c as f64 / total as f64 });
    }
    out
}

/// `n` copies of a tree in a host, each given by its vertex map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub host: Graph,
    pub tree: Tree,
    pub copies: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn to_json_value(&self) -> serde_json::Value {
        let copies: Vec<_> = self.copies.iter().map(|m| serde_json::json!({ "map": m })).collect();
        serde_json::json!({ "host": self.host.to_json_value(), "tree": self.tree.to_json_value(), "copies": copies })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Copy {
            map: Vec<usize>,
        }
        #[derive(Deserialize)]
        struct J {
            host: serde_json::Value,
            tree: serde_json::Value,
            copies: Vec<Copy>,
        }
        let j: J = serde_json::from_str(text)?;
        Ok(Decomposition {
            host: Graph::from_json(&j.host.to_string())?,
            tree: Tree::from_json(&j.tree.to_string())?,
            copies: j.copies.into_iter().map(|c| c.map).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    CopyCount { expected: usize, found: usize },
    MapLength { copy: usize, len: usize },
    NotInjective { copy: usize, host_vertex: usize },
    NotAdjacent { copy: usize, edge: (usize, usize) },
    EdgeReuse { edge: (usize, usize), first: usize, second: usize },
    Uncovered { edge: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CopyCount { expected, found } => write!(f, "expected {expected} copies, found {found}"),
            Violation::MapLength { copy, len } => write!(f, "copy {copy} maps {len} vertices"),
            Violation::NotInjective { copy, host_vertex } => write!(f, "copy {copy} hits host vertex {host_vertex} twice"),
            Violation::NotAdjacent { copy, edge } => write!(f, "copy {copy} maps a tree edge onto non-edge {edge:?}"),
            Violation::EdgeReuse { edge, first, second } => write!(f, "edge {edge:?} used by copies {first} and {second}"),
            Violation::Uncovered { edge } => write!(f, "edge {edge:?} is not covered"),
        }
    }
}

/// Checks count, injectivity, adjacency, disjointness and exact coverage.
pub fn verify(d: &Decomposition) -> std::result::Result<(), Violation> {
    let n = d.host.n();
    if d.copies.len() != n {
        return Err(Violation::CopyCount { expected: n, found: d.copies.len() });
    }
    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (c, map) in d.copies.iter().enumerate() {
        if map.len() != d.tree.n() {
            return Err(Violation::MapLength { copy: c, len: map.len() });
        }
        let mut seen = BTreeSet::new();
        for &v in map {
            if v >= n || !seen.insert(v) {
                return Err(Violation::NotInjective { copy: c, host_vertex: v });
            }
        }
        for &(u, v) in d.tree.edges() {
            let (a, b) = key(map[u], map[v]);
            if !d.host.has_edge(a, b) {
                return Err(Violation::NotAdjacent { copy: c, edge: (a, b) });
            }
            if let Some(&first) = owner.get(&(a, b)) {
                return Err(Violation::EdgeReuse { edge: (a, b), first, second: c });
            }
            owner.insert((a, b), c);
        }
    }
    if let Some(e) = d.host.edges().into_iter().find(|e| !owner.contains_key(e)) {
        return Err(Violation::Uncovered { edge: e });
    }
    Ok(())
}

/// Search limits shared by the exhaustive solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOpts {
    pub cap: usize,
    pub nodes: u64,
    pub seconds: Option<f64>,
}

impl Default for OracleOpts {
    fn default() -> Self {
        OracleOpts { cap: 60, nodes: 50_000_000, seconds: None }
    }
}

struct Limits {
    nodes: u64,
    max_nodes: u64,
    deadline: Option<std::time::Instant>,
    exhausted: bool,
}

impl Limits {
    fn new(o: &OracleOpts) -> Self {
        Limits {
            nodes: 0,
            max_nodes: o.nodes,
            deadline: o.seconds.map(|s| std::time::Instant::now() + std::time::Duration::from_secs_f64(s)),
            exhausted: false,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes
            || (self.nodes % 4096 == 0 && self.deadline.is_some_and(|d| std::time::Instant::now() > d))
        {
            self.exhausted = true;
        }
        !self.exhausted
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome<T> {
    pub found: Option<T>,
    pub nodes: u64,
    /// True when the search stopped on its budget rather than completing.
    pub exhausted: bool,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Exact cover search: the smallest uncovered host edge must be covered by
/// the next copy. Copies with the same image are tried once.
pub fn brute_decompose(g: &Graph, t: &Tree, opts: &OracleOpts) -> Result<SearchOutcome<Decomposition>> {
    let n = g.n();
    if g.edge_count() != n * t.edge_count() {
        return Err(Error::Input(format!(
            "host has {} edges, expected n·|E(T)| = {}",
            g.edge_count(),
            n * t.edge_count()
        )));
    }
    if g.edge_count() > opts.cap {
        return Err(Error::Budget(format!("{} host edges exceed the oracle cap {}", g.edge_count(), opts.cap)));
    }
    let mut s = Cover {
        g,
        t,
        edges: g.edges(),
        used: HashSet::new(),
        copies: Vec::new(),
        lim: Limits::new(opts),
        orders: t.edges().iter().flat_map(|&(u, v)| [rooted(t, u, v), rooted(t, v, u)]).collect(),
    };
    let ok = s.go();
    let found = ok.then(|| Decomposition { host: g.clone(), tree: t.clone(), copies: s.copies.clone() });
    if let Some(d) = &found {
        verify(d).map_err(|v| Error::Internal(format!("search produced an invalid decomposition: {v}")))?;
    }
    Ok(SearchOutcome { found, nodes: s.lim.nodes, exhausted: s.lim.exhausted })
}

/// Tree vertices in BFS order from `u` with `v` second, plus parents.
fn rooted(t: &Tree, u: usize, v: usize) -> (Vec<usize>, Vec<usize>) {
    let mut order = vec![u, v];
    let mut parent = vec![usize::MAX; t.n()];
    parent[v] = u;
    let mut seen = vec![false; t.n()];
    seen[u] = true;
    seen[v] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        for &y in t.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                order.push(y);
            }
        }
        i += 1;
    }
    (order, parent)
}

struct Cover<'a> {
    g: &'a Graph,
    t: &'a Tree,
    edges: Vec<(usize, usize)>,
    used: HashSet<(usize, usize)>,
    copies: Vec<Vec<usize>>,
    lim: Limits,
    orders: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Cover<'_> {
    fn go(&mut self) -> bool {
        if !self.lim.tick() {
            return false;
        }
        let Some(&(a, b)) = self.edges.iter().find(|e| !self.used.contains(e)) else {
            return true;
        };
        let mut placements: Vec<Vec<usize>> = Vec::new();
        let mut images: HashSet<Vec<(usize, usize)>> = HashSet::new();
        for oi in 0..self.orders.len() {
            let mut map = vec![usize::MAX; self.t.n()];
            map[self.orders[oi].0[0]] = a;
            map[self.orders[oi].0[1]] = b;
            self.extend(oi, 2, &mut map, &mut placements, &mut images);
        }
        for map in placements {
            let edges: Vec<_> = self.t.edges().iter().map(|&(u, v)| key(map[u], map[v])).collect();
            for e in &edges {
                self.used.insert(*e);
            }
            self.copies.push(map);
            if self.go() {
                return true;
            }
            self.copies.pop();
            for e in &edges {
                self.used.remove(e);
            }
            if self.lim.exhausted {
                return false;
            }
        }
        false
    }

    fn extend(
        &self,
        oi: usize,
        i: usize,
        map: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        images: &mut HashSet<Vec<(usize, usize)>>,
    ) {
        let (order, parent) = &self.orders[oi];
        if i == order.len() {
            let mut img: Vec<_> = self.t.edges().iter().map(|&(u, v)| key(map[u], map[v])).collect();
            img.sort_unstable();
            if images.insert(img) {
                out.push(map.clone());
            }
            return;
        }
        let v = order[i];
        let hp = map[parent[v]];
        for &h in self.g.neighbors(hp) {
            if !map.contains(&h) && !self.used.contains(&key(hp, h)) {
                map[v] = h;
                self.extend(oi, i + 1, map, out, images);
                map[v] = usize::MAX;
            }
        }
    }
}

/// A requested path between `ends` with `len` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathDemand {
    pub ends: (usize, usize),
    pub len: usize,
}

/// Splits all of `g` into the demanded paths. Paths of one `w` are vertex
/// disjoint and avoid `forbidden[w]` internally.
pub fn path_factor_solve(
    g: &Graph,
    demands: &[Vec<PathDemand>],
    forbidden: &[BTreeSet<usize>],
    opts: &OracleOpts,
) -> Result<SearchOutcome<Vec<Vec<Vec<usize>>>>> {
    if forbidden.len() != demands.len() {
        return Err(Error::Input("one forbidden set per w".into()));
    }
    let total: usize = demands.iter().flatten().map(|d| d.len).sum();
    if total != g.edge_count() {
        return Err(Error::Input(format!("demands total {total} edges, host has {}", g.edge_count())));
    }
    if g.edge_count() > opts.cap {
        return Err(Error::Budget(format!("{} edges exceed the oracle cap {}", g.edge_count(), opts.cap)));
    }
    let mut ends = vec![0usize; g.n()];
    for d in demands.iter().flatten() {
        if d.ends.0 >= g.n() || d.ends.1 >= g.n() || d.len == 0 || d.ends.0 == d.ends.1 {
            return Err(Error::Input(format!("bad demand {d:?}")));
        }
        ends[d.ends.0] += 1;
        ends[d.ends.1] += 1;
    }
    let mut lim = Limits::new(opts);
    if (0..g.n()).any(|v| g.degree(v) < ends[v] || (g.degree(v) - ends[v]) % 2 == 1) {
        return Ok(SearchOutcome { found: None, nodes: 0, exhausted: false });
    }
    let slots: Vec<(usize, PathDemand)> =
        demands.iter().enumerate().flat_map(|(w, ds)| ds.iter().map(move |&d| (w, d))).collect();
    let mut s = PathSearch {
        g,
        slots: &slots,
        forbidden,
        used: HashSet::new(),
        busy: vec![BTreeSet::new(); demands.len()],
        paths: Vec::new(),
        lim: &mut lim,
    };
    let ok = s.slot(0);
    let paths = std::mem::take(&mut s.paths);
    if !ok {
        return Ok(SearchOutcome { found: None, nodes: lim.nodes, exhausted: lim.exhausted });
    }
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new(); demands.len()];
    for ((w, _), p) in slots.iter().zip(paths) {
        out[*w].push(p);
    }
    check_path_systems(g, demands, forbidden, &out)
        .map_err(|e| Error::Internal(format!("path search produced an invalid system: {e}")))?;
    Ok(SearchOutcome { found: Some(out), nodes: lim.nodes, exhausted: false })
}

/// Independent check of a path-system answer.
pub fn check_path_systems(
    g: &Graph,
    demands: &[Vec<PathDemand>],
    forbidden: &[BTreeSet<usize>],
    sol: &[Vec<Vec<usize>>],
) -> std::result::Result<(), String> {
    let mut used = BTreeSet::new();
    for (w, (ds, ps)) in demands.iter().zip(sol).enumerate() {
        if ds.len() != ps.len() {
            return Err(format!("w = {w}: {} paths for {} demands", ps.len(), ds.len()));
        }
        let mut verts = BTreeSet::new();
        for (d, p) in ds.iter().zip(ps) {
            if p.len() != d.len + 1 || p[0] != d.ends.0 || p[d.len] != d.ends.1 {
                return Err(format!("w = {w}: path {p:?} does not meet {d:?}"));
            }
            for &v in &p[1..d.len] {
                if forbidden[w].contains(&v) {
                    return Err(format!("w = {w}: interior vertex {v} is forbidden"));
                }
            }
            for &v in p {
                if !verts.insert(v) {
                    return Err(format!("w = {w}: vertex {v} on two paths"));
                }
            }
            for e in p.windows(2) {
                if !g.has_edge(e[0], e[1]) || !used.insert(key(e[0], e[1])) {
                    return Err(format!("edge {:?} missing or reused", (e[0], e[1])));
                }
            }
        }
    }
    if used.len() != g.edge_count() {
        return Err(format!("{} of {} edges covered", used.len(), g.edge_count()));
    }
    Ok(())
}

struct PathSearch<'a, 'l> {
    g: &'a Graph,
    slots: &'a [(usize, PathDemand)],
    forbidden: &'a [BTreeSet<usize>],
    used: HashSet<(usize, usize)>,
    busy: Vec<BTreeSet<usize>>,
    paths: Vec<Vec<usize>>,
    lim: &'l mut Limits,
}

impl PathSearch<'_, '_> {
    fn slot(&mut self, k: usize) -> bool {
        if k == self.slots.len() {
            return true;
        }
        let (w, d) = self.slots[k];
        if self.busy[w].contains(&d.ends.0) || self.busy[w].contains(&d.ends.1) {
            return false;
        }
        self.busy[w].insert(d.ends.0);
        self.busy[w].insert(d.ends.1);
        let mut path = vec![d.ends.0];
        let ok = self.walk(k, &mut path);
        if !ok {
            self.busy[w].remove(&d.ends.0);
            self.busy[w].remove(&d.ends.1);
        }
        ok
    }

    fn walk(&mut self, k: usize, path: &mut Vec<usize>) -> bool {
        if !self.lim.tick() {
            return false;
        }
        let (w, d) = self.slots[k];
        let cur = *path.last().expect("nonempty");
        let left = d.len + 1 - path.len();
        if left == 0 {
            self.paths.push(path.clone());
            if self.slot(k + 1) {
                return true;
            }
            self.paths.pop();
            return false;
        }
        for &h in self.g.neighbors(cur) {
            let e = key(cur, h);
            if self.used.contains(&e) {
                continue;
            }
            let last = left == 1;
            if last != (h == d.ends.1) {
                continue;
            }
            if !last && (self.busy[w].contains(&h) || self.forbidden[w].contains(&h)) {
                continue;
            }
            self.used.insert(e);
            if !last {
                self.busy[w].insert(h);
            }
            path.push(h);
            if self.walk(k, path) {
                return true;
            }
            path.pop();
            if !last {
                self.busy[w].remove(&h);
            }
            self.used.remove(&e);
            if self.lim.exhausted {
                return false;
            }
        }
        false
    }
}
