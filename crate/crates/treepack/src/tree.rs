//! Trees: parsing, spans, leaf stars, bare paths and the L/S/P cases.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::ParamConfig;
use crate::error::{CaseMeasure, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct Tree {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<TreeJson> for Tree {
    type Error = Error;
    fn try_from(t: TreeJson) -> Result<Self> {
        let e: Vec<_> = t.edges.iter().map(|e| (e[0], e[1])).collect();
        Tree::from_edges(t.n, &e)
    }
}

impl From<Tree> for TreeJson {
    fn from(t: Tree) -> Self {
        let n = t.n();
        TreeJson { n, edges: t.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl Tree {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("tree must have a vertex".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::Input(format!(
                "{} edges on {n} vertices is not a tree",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Input(format!("bad tree edge {u}-{v}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            norm.push((u.min(v), u.max(v)));
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        norm.sort_unstable();
        let t = Tree { adj, edges: norm };
        if t.bfs_order(0).len() != n {
            return Err(Error::Input(
                "tree edges do not connect all vertices".into(),
            ));
        }
        Ok(t)
    }

    /// Parent-array text: line `i` holds the parent of `i`, `-1` at the root.
    pub fn parse_parent_array(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        let mut roots = 0;
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let p: i64 = line
                .parse()
                .map_err(|_| Error::Input(format!("bad parent {line:?}")))?;
            if p < 0 {
                roots += 1;
            } else {
                edges.push((n, p as usize));
            }
            n += 1;
        }
        if roots != 1 {
            return Err(Error::Input(format!("parent array has {roots} roots")));
        }
        Tree::from_edges(n, &edges)
    }

    /// Parent array rooted at 0.
    pub fn to_parent_array(&self) -> String {
        let mut parent = vec![-1i64; self.n()];
        let order = self.bfs_order(0);
        let mut seen = vec![false; self.n()];
        for &v in &order {
            seen[v] = true;
            for &u in &self.adj[v] {
                if !seen[u] {
                    parent[u] = v as i64;
                }
            }
        }
        parent.iter().map(|p| format!("{p}\n")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: TreeJson = serde_json::from_str(text)?;
        Tree::try_from(t)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let e: Vec<[usize; 2]> = self.edges.iter().map(|&(u, v)| [u, v]).collect();
        serde_json::json!({ "n": self.n(), "edges": e })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::with_capacity(self.n());
        let mut q = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = q.pop_front() {
            out.push(v);
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
        out
    }

    /// Number of components of `T[s]`.
    pub fn components_in(&self, s: &BTreeSet<usize>) -> usize {
        let inner = self
            .edges
            .iter()
            .filter(|(u, v)| s.contains(u) && s.contains(v))
            .count();
        s.len() - inner
    }
}

/// `span^k_T(s)`: closure of `s` under adding sets of at most `k` vertices
/// that merge components of `T[S*]`.
///
/// In a tree a set merges components exactly when it contains the interior
/// of a path between two vertices of `S*`, so the closure adds interiors of
/// such paths with at most `k` inner vertices. Those paths stay admissible as
/// `S*` grows, hence the fixed point does not depend on the order of additions.
pub fn k_span(t: &Tree, s: &BTreeSet<usize>, k: usize) -> BTreeSet<usize> {
    let n = t.n();
    let mut inside = vec![false; n];
    for &v in s {
        inside[v] = true;
    }
    let mut queue: VecDeque<usize> = s.iter().copied().collect();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut touched: Vec<usize> = Vec::new();
    while let Some(src) = queue.pop_front() {
        // BFS through outside vertices, at most k deep
        let mut found = None;
        let mut q = VecDeque::new();
        for &u in &t.adj[src] {
            if !inside[u] && k >= 1 {
                parent[u] = src;
                depth[u] = 1;
                touched.push(u);
                q.push_back(u);
            }
        }
        'bfs: while let Some(v) = q.pop_front() {
            for &u in &t.adj[v] {
                if u == parent[v] {
                    continue;
                }
                if inside[u] {
                    found = Some(v);
                    break 'bfs;
                }
                if depth[v] < k {
                    parent[u] = v;
                    depth[u] = depth[v] + 1;
                    touched.push(u);
                    q.push_back(u);
                }
            }
        }
        if let Some(mut v) = found {
            while v != src {
                inside[v] = true;
                queue.push_back(v);
                v = parent[v];
            }
            queue.push_back(src);
        }
        for &u in &touched {
            parent[u] = usize::MAX;
            depth[u] = 0;
        }
        touched.clear();
    }
    (0..n).filter(|&v| inside[v]).collect()
}

/// A maximal leaf star: a centre with all its leaf neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafStar {
    pub center: usize,
    pub leaves: Vec<usize>,
}

impl LeafStar {
    pub fn size(&self) -> usize {
        self.leaves.len()
    }
}

/// All maximal leaf stars, ordered by centre. In `K_2` the lower vertex is
/// the centre.
pub fn leaf_stars(t: &Tree) -> Vec<LeafStar> {
    if t.n() == 2 {
        return vec![LeafStar {
            center: 0,
            leaves: vec![1],
        }];
    }
    (0..t.n())
        .filter_map(|c| {
            let leaves: Vec<usize> = t.adj[c].iter().copied().filter(|&u| t.is_leaf(u)).collect();
            (!leaves.is_empty() && !t.is_leaf(c)).then_some(LeafStar { center: c, leaves })
        })
        .collect()
}

/// Maximal bare segments: paths whose inner vertices have degree 2 and whose
/// ends do not, listed along a DFS from vertex 0. A tree that is a single
/// path yields one segment.
pub fn bare_segments(t: &Tree) -> Vec<Vec<usize>> {
    let n = t.n();
    if n == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    // DFS order of non-degree-2 vertices, then walk each incident chain once
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    let mut seen = vec![false; n];
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        order.push(v);
        for &u in t.adj[v].iter().rev() {
            if !seen[u] {
                stack.push(u);
            }
        }
    }
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &v in &order {
        if t.degree(v) == 2 {
            continue;
        }
        for &u in &t.adj[v] {
            if done.contains(&(v, u)) {
                continue;
            }
            let mut path = vec![v, u];
            let (mut prev, mut cur) = (v, u);
            while t.degree(cur) == 2 {
                let next = if t.adj[cur][0] == prev {
                    t.adj[cur][1]
                } else {
                    t.adj[cur][0]
                };
                prev = cur;
                cur = next;
                path.push(cur);
            }
            done.insert((cur, prev));
            done.insert((v, u));
            out.push(path);
        }
    }
    out
}

/// Cuts vertex-disjoint `len`-edge pieces from `segment` greedily from its
/// start, keeping only pieces accepted by `ok`. Consecutive pieces are
/// separated by at least one edge.
pub fn cut_pieces(
    segment: &[usize],
    len: usize,
    mut ok: impl FnMut(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + len < segment.len() {
        let piece = &segment[i..=i + len];
        if ok(piece) {
            out.push(piece.to_vec());
            i += len + 1;
        } else {
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    L,
    S,
    P,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub case: Case,
    /// Vertices outside leaf stars of size at least `Λ`.
    pub outside_large_stars: usize,
    /// Vertices in leaf stars of size at most `Λ`.
    pub in_small_stars: usize,
    /// Vertex-disjoint bare `8K`-paths (vertex sequences).
    pub bare_paths: Vec<Vec<usize>>,
}

fn star_counts(t: &Tree, lambda: f64) -> (usize, usize) {
    let stars = leaf_stars(t);
    let in_large: usize = stars
        .iter()
        .filter(|s| s.size() as f64 >= lambda)
        .map(|s| s.size() + 1)
        .sum();
    let in_small: usize = stars
        .iter()
        .filter(|s| s.size() as f64 <= lambda)
        .map(|s| s.size() + 1)
        .sum();
    (t.n() - in_large, in_small)
}

/// Vertex-disjoint bare `len`-paths, greedily along the bare segments.
pub fn disjoint_bare_paths(t: &Tree, len: usize) -> Vec<Vec<usize>> {
    bare_segments(t)
        .iter()
        .flat_map(|seg| cut_pieces(seg, len, |_| true))
        .collect()
}

/// Picks Case L, S or P at the configured thresholds.
pub fn classify_case(t: &Tree, cfg: &ParamConfig) -> Result<CaseTag> {
    let lambda = cfg.big_lambda();
    let n = cfg.n as f64;
    let (outside, in_small) = star_counts(t, lambda);
    let mut tag = CaseTag {
        case: Case::L,
        outside_large_stars: outside,
        in_small_stars: in_small,
        bare_paths: Vec::new(),
    };
    if outside as f64 <= cfg.p_plus * n {
        return Ok(tag);
    }
    if in_small as f64 >= cfg.p_minus * n {
        tag.case = Case::S;
        return Ok(tag);
    }
    let paths = disjoint_bare_paths(t, 8 * cfg.big_k);
    if !paths.is_empty() && paths.len() as f64 >= cfg.p_plus * n / (100.0 * cfg.big_k as f64) {
        tag.case = Case::P;
        tag.bare_paths = paths;
        return Ok(tag);
    }
    Err(Error::Classification(CaseMeasure {
        outside_large_stars: outside,
        in_small_stars: in_small,
        bare_paths: paths.len(),
        n: cfg.n,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    /// Literal search: any S' of size ≤ k outside S* that lowers the
    /// component count, repeated to a fixed point.
    fn brute_span(t: &Tree, s: &BTreeSet<usize>, k: usize) -> BTreeSet<usize> {
        let n = t.n();
        let mut cur = s.clone();
        'outer: loop {
            let rest: Vec<usize> = (0..n).filter(|v| !cur.contains(v)).collect();
            let base = t.components_in(&cur);
            for mask in 1u64..(1u64 << rest.len()) {
                if mask.count_ones() as usize > k {
                    continue;
                }
                let mut next = cur.clone();
                for (i, &v) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        next.insert(v);
                    }
                }
                if t.components_in(&next) < base {
                    cur = next;
                    continue 'outer;
                }
            }
            return cur;
        }
    }

    #[test]
    fn span_examples() {
        let p = gen::path(5);
        assert_eq!(k_span(&p, &set(&[0, 4]), 3), set(&[0, 1, 2, 3, 4]));
        assert_eq!(k_span(&p, &set(&[0, 4]), 2), set(&[0, 4]));
        assert!(k_span(&p, &BTreeSet::new(), 4).is_empty());
    }

    #[test]
    fn parent_array_round_trip() {
        let t = Tree::parse_parent_array("-1\n0\n0\n1\n").unwrap();
        assert_eq!(t.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert_eq!(Tree::parse_parent_array(&t.to_parent_array()).unwrap(), t);
        assert_eq!(Tree::from_json(&t.to_json_value().to_string()).unwrap(), t);
        assert!(Tree::parse_parent_array("-1\n-1\n").is_err());
        assert!(Tree::from_edges(4, &[(0, 1), (1, 0), (2, 3)]).is_err());
    }

    #[test]
    fn classify_examples() {
        let star = gen::star(99);
        let cfg = ParamConfig {
            n: 100,
            big_lambda: Some(50.0),
            p_plus: 0.1,
            ..Default::default()
        };
        let tag = classify_case(&star, &cfg).unwrap();
        assert_eq!(tag.case, Case::L);
        assert_eq!(tag.outside_large_stars, 0);

        let cat = gen::caterpillar(50, 1);
        let cfg = ParamConfig {
            n: 100,
            big_lambda: Some(50.0),
            p_minus: 0.3,
            ..Default::default()
        };
        let tag = classify_case(&cat, &cfg).unwrap();
        assert_eq!(tag.case, Case::S);
        assert_eq!(tag.in_small_stars, 100);

        let path = gen::path(1000);
        let cfg = ParamConfig {
            n: 1000,
            big_lambda: Some(50.0),
            p_plus: 0.2,
            big_k: 4,
            ..Default::default()
        };
        let tag = classify_case(&path, &cfg).unwrap();
        assert_eq!(tag.case, Case::P);
        // 1000 vertices hold 30 disjoint 33-vertex pieces
        assert_eq!(tag.bare_paths.len(), 30);
        for p in &tag.bare_paths {
            assert_eq!(p.len(), 33);
            assert!(p[1..32].iter().all(|&v| path.degree(v) == 2));
        }
    }

    #[test]
    fn classification_failure_carries_measures() {
        // a complete binary tree has no long bare paths and few small-star vertices at this scale
        let t = gen::complete_binary(6);
        let cfg = ParamConfig {
            n: 620,
            p_minus: 0.16,
            ..Default::default()
        };
        match classify_case(&t, &cfg) {
            Err(Error::Classification(m)) => assert_eq!(m.bare_paths, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn leaf_star_edge_cases() {
        assert_eq!(
            leaf_stars(&gen::path(2)),
            vec![LeafStar {
                center: 0,
                leaves: vec![1]
            }]
        );
        assert_eq!(
            leaf_stars(&gen::star(3)),
            vec![LeafStar {
                center: 0,
                leaves: vec![1, 2, 3]
            }]
        );
        let segs = bare_segments(&gen::star(3));
        assert_eq!(segs.len(), 3);
    }

    proptest! {
        #[test]
        fn span_agrees_with_literal_definition(n in 2usize..11, seed in any::<u64>(), mask in any::<u16>(), k in 1usize..4) {
            let t = gen::uniform_tree(n, &mut seeded(seed));
            let s: BTreeSet<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
            prop_assert_eq!(k_span(&t, &s, k), brute_span(&t, &s, k));
        }

        #[test]
        fn span_bound_monotone_idempotent(n in 2usize..400, seed in any::<u64>(), k in 1usize..7, frac in 0.0f64..0.3) {
            let mut rng = seeded(seed);
            let t = gen::uniform_tree(n, &mut rng);
            let s = gen::random_subset(n, frac, &mut rng);
            let extra = gen::random_subset(n, frac, &mut rng);
            let sp = k_span(&t, &s, k);
            prop_assert!(sp.len() <= (k + 1) * s.len());
            prop_assert!(s.is_subset(&sp));
            prop_assert_eq!(&k_span(&t, &sp, k), &sp);
            let bigger: BTreeSet<usize> = s.union(&extra).copied().collect();
            prop_assert!(sp.is_subset(&k_span(&t, &bigger, k)));
        }

        #[test]
        fn bare_segments_cover_every_edge_once(n in 2usize..200, seed in any::<u64>()) {
            let t = gen::uniform_tree(n, &mut seeded(seed));
            let segs = bare_segments(&t);
            let mut seen = BTreeSet::new();
            for s in &segs {
                prop_assert!(s[1..s.len() - 1].iter().all(|&v| t.degree(v) == 2));
                for w in s.windows(2) {
                    prop_assert!(t.has_edge(w[0], w[1]));
                    prop_assert!(seen.insert((w[0].min(w[1]), w[0].max(w[1]))));
                }
            }
            prop_assert_eq!(seen.len(), t.edge_count());
        }
    }
}
