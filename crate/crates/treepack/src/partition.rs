//! TREE PARTITION: layers, classes, the order ≺ and the label scheme.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::config::ParamConfig;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tree::{bare_segments, cut_pieces, k_span, leaf_stars, Case, CaseTag, LeafStar, Tree};

/// Where a vertex sits in ≺.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    AStar,
    AStarStar,
    A0Prime,
    /// `A_i`, `i ≥ 1`.
    Layer(usize),
    /// Only in `P_ex`, outside `V(F)`.
    Ex,
}

impl Part {
    pub fn in_a0(self) -> bool {
        matches!(self, Part::AStar | Part::AStarStar | Part::A0Prime)
    }
}

/// Class of a layer vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    /// In `A^a_i` for the given centre `a`.
    Hi(usize),
    Lo,
    No,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerClasses {
    pub hi: Vec<usize>,
    pub lo: Vec<usize>,
    pub no: Vec<usize>,
    /// `A^a_i` for `a ∈ A^Δ_i`.
    pub stars: BTreeMap<usize, Vec<usize>>,
    /// Centres with `|A^a_i| ≥ Λ`.
    pub big_centres: Vec<usize>,
}

impl LayerClasses {
    pub fn below_lambda(&self) -> Vec<usize> {
        self.group(false)
    }

    pub fn above_lambda(&self) -> Vec<usize> {
        self.group(true)
    }

    fn group(&self, big: bool) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .stars
            .iter()
            .filter(|(a, _)| self.big_centres.contains(a) == big)
            .flat_map(|(_, s)| s.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePartition {
    pub case: Case,
    pub a_star: Vec<usize>,
    pub a_star_star: Vec<usize>,
    pub a0_prime: Vec<usize>,
    /// `C_1, …, C_{i*}` as produced in step ii.
    pub c_layers: Vec<Vec<usize>>,
    /// `A_1, …, A_{i*}`.
    pub layers: Vec<Vec<usize>>,
    pub classes: Vec<LayerClasses>,
    pub p_ex: Vec<(usize, usize)>,
    pub ex_stars: Vec<LeafStar>,
    pub ex_paths: Vec<Vec<usize>>,
    /// `(a_k, ℓ_k)` leaf edges of `P_ex` in Case P.
    pub ex_leaf_edges: Vec<(usize, usize)>,
    pub f_edges: Vec<(usize, usize)>,
    pub f_prime_edges: Vec<(usize, usize)>,
    pub order: Vec<usize>,
    pub q_delta: Vec<(usize, usize)>,
    pub q_lambda: Vec<(usize, usize)>,
    /// `m^a_i` keyed by `(a, i)`.
    pub m_counts: BTreeMap<(usize, usize), usize>,
    pub m: usize,
    pub part: Vec<Part>,
    pub class: Vec<Option<Class>>,
    pub pos: Vec<usize>,
    f_prime_adj: Vec<Vec<usize>>,
    f_star_adj: Vec<Vec<usize>>,
}

impl TreePartition {
    /// Degenerate partition for hand-built states: the leaves of `stars` form
    /// `P_ex`, everything else sits in `A'_0` in BFS order from a centre.
    pub fn flat(t: &Tree, case: Case, stars: Vec<LeafStar>) -> Result<Self> {
        Self::flat_ex(t, case, stars, Vec::new(), Vec::new())
    }

    /// As [`TreePartition::flat`], with bare paths (ends included) and leaf
    /// edges `(a, ℓ)` added to `P_ex`.
    pub fn flat_ex(
        t: &Tree,
        case: Case,
        stars: Vec<LeafStar>,
        paths: Vec<Vec<usize>>,
        leaf_edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n_t = t.n();
        let mut part = vec![Part::A0Prime; n_t];
        let mut p_ex = Vec::new();
        let take = |part: &mut Vec<Part>, p_ex: &mut Vec<(usize, usize)>, a: usize, l: usize| -> Result<()> {
            if !t.has_edge(a, l) || part[l] == Part::Ex {
                return Err(Error::Input(format!("{a}{l} is not a free edge of the tree")));
            }
            part[l] = Part::Ex;
            p_ex.push((a.min(l), a.max(l)));
            Ok(())
        };
        for st in &stars {
            for &l in &st.leaves {
                if !t.is_leaf(l) {
                    return Err(Error::Input(format!("{} is not a leaf", l)));
                }
                take(&mut part, &mut p_ex, st.center, l)?;
            }
        }
        for &(a, l) in &leaf_edges {
            if !t.is_leaf(l) {
                return Err(Error::Input(format!("{} is not a leaf", l)));
            }
            take(&mut part, &mut p_ex, a, l)?;
        }
        for p in &paths {
            if p.len() < 3 || p[1..p.len() - 1].iter().any(|&v| t.degree(v) != 2) {
                return Err(Error::Input(format!("{p:?} is not a bare path")));
            }
            for w in p[..p.len() - 1].windows(2) {
                take(&mut part, &mut p_ex, w[0], w[1])?;
            }
            let k = p.len();
            if !t.has_edge(p[k - 2], p[k - 1]) {
                return Err(Error::Input(format!("{p:?} is not a path")));
            }
            p_ex.push((p[k - 2].min(p[k - 1]), p[k - 2].max(p[k - 1])));
        }
        p_ex.sort_unstable();
        let f_edges: Vec<(usize, usize)> = t
            .edges()
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .filter(|e| p_ex.binary_search(e).is_err())
            .collect();
        let root = (0..n_t).find(|&v| part[v] != Part::Ex).unwrap_or(0);
        let mut order: Vec<usize> = t.bfs_order(root).into_iter().filter(|&v| part[v] != Part::Ex).collect();
        order.extend((0..n_t).filter(|&v| part[v] == Part::Ex));
        let mut pos = vec![0; n_t];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let adj = adjacency(n_t, &f_edges);
        Ok(TreePartition {
            case,
            a_star: Vec::new(),
            a_star_star: Vec::new(),
            a0_prime: (0..n_t).filter(|&v| part[v] == Part::A0Prime).collect(),
            c_layers: Vec::new(),
            layers: Vec::new(),
            classes: Vec::new(),
            p_ex,
            ex_stars: stars,
            ex_paths: paths,
            ex_leaf_edges: leaf_edges,
            f_prime_edges: f_edges.clone(),
            f_edges,
            order,
            q_delta: Vec::new(),
            q_lambda: Vec::new(),
            m_counts: BTreeMap::new(),
            m: 0,
            part,
            class: vec![None; n_t],
            pos,
            f_prime_adj: adj.clone(),
            f_star_adj: adj,
        })
    }

    pub fn i_star(&self) -> usize {
        self.layers.len()
    }

    pub fn a0(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .a_star
            .iter()
            .chain(&self.a_star_star)
            .chain(&self.a0_prime)
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    pub fn precedes(&self, u: usize, v: usize) -> bool {
        self.pos[u] < self.pos[v]
    }

    pub fn f_prime_neighbors(&self, v: usize) -> &[usize] {
        &self.f_prime_adj[v]
    }

    pub fn f_star_neighbors(&self, v: usize) -> &[usize] {
        &self.f_star_adj[v]
    }

    /// `N_<(v)`: earlier `F'`-neighbours.
    pub fn n_less(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.f_prime_adj[v]
            .iter()
            .copied()
            .filter(|&u| self.pos[u] < self.pos[v])
            .collect();
        out.sort_by_key(|&u| self.pos[u]);
        out
    }

    /// `N_>(v)`: later `F'`-neighbours.
    pub fn n_greater(&self, v: usize) -> Vec<usize> {
        self.f_prime_adj[v]
            .iter()
            .copied()
            .filter(|&u| self.pos[u] > self.pos[v])
            .collect()
    }

    /// `|A_u|`: the class set containing layer vertex `u`.
    pub fn class_set(&self, u: usize) -> Option<&[usize]> {
        let i = match self.part[u] {
            Part::Layer(i) => i,
            _ => return None,
        };
        let cl = &self.classes[i - 1];
        match self.class[u]? {
            Class::Hi(a) => cl.stars.get(&a).map(|v| v.as_slice()),
            Class::Lo => Some(&cl.lo),
            Class::No => Some(&cl.no),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.case,
            "a_star": self.a_star,
            "a_star_star": self.a_star_star,
            "a0_prime": self.a0_prime,
            "layers": self.layers,
            "classes": self.classes.iter().map(|c| serde_json::json!({
                "hi": c.hi, "lo": c.lo, "no": c.no,
                "stars": c.stars.iter().map(|(a, s)| serde_json::json!({"centre": a, "set": s})).collect::<Vec<_>>(),
                "big_centres": c.big_centres,
            })).collect::<Vec<_>>(),
            "p_ex": self.p_ex,
            "f_edges": self.f_edges,
            "f_prime_edges": self.f_prime_edges,
            "order": self.order,
            "q_delta": self.q_delta,
            "q_lambda": self.q_lambda,
            "m_counts": self.m_counts.iter().map(|((a, i), m)| serde_json::json!({"a": a, "i": i, "m": m})).collect::<Vec<_>>(),
            "m": self.m,
        })
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    adj
}

/// Exact maximum independent set of the forest induced on `verts`.
pub fn forest_mis(adj: &[Vec<usize>], verts: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for &r in verts {
        if !seen.insert(r) {
            continue;
        }
        // iterative DFS, then take a vertex whenever no child was taken
        let mut order = Vec::new();
        let mut parent = BTreeMap::new();
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &u in &adj[v] {
                if verts.contains(&u) && seen.insert(u) {
                    parent.insert(u, v);
                    stack.push(u);
                }
            }
        }
        let mut blocked = BTreeSet::new();
        for &v in order.iter().rev() {
            if !blocked.contains(&v) {
                out.insert(v);
                if let Some(&p) = parent.get(&v) {
                    blocked.insert(p);
                }
            }
        }
    }
    out
}

fn span_in_f(t: &Tree, set: &BTreeSet<usize>, in_f: &[bool]) -> BTreeSet<usize> {
    k_span(t, set, 4).into_iter().filter(|&v| in_f[v]).collect()
}

fn choose_p_ex(
    t: &Tree,
    case: &CaseTag,
    cfg: &ParamConfig,
    a_star: &BTreeSet<usize>,
    rng: &mut Rng,
) -> Result<(Vec<LeafStar>, Vec<Vec<usize>>, Vec<(usize, usize)>)> {
    let n = cfg.n as f64;
    let lambda = cfg.big_lambda();
    match case.case {
        Case::S => {
            let target = cfg.p_minus * n / 2.0;
            let mut stars: Vec<LeafStar> = leaf_stars(t)
                .into_iter()
                .filter(|s| s.size() as f64 <= lambda && s.leaves.len() < t.degree(s.center))
                .collect();
            stars.shuffle(rng);
            let mut chosen = Vec::new();
            let mut total = 0usize;
            for s in stars {
                if total as f64 >= target {
                    break;
                }
                if (total + s.size()) as f64 <= target + lambda {
                    total += s.size();
                    chosen.push(s);
                }
            }
            if (total as f64) < target - lambda {
                return Err(Error::Partition(format!(
                    "leaf stars cover {total} edges, need {:.1} ± {:.1}",
                    target, lambda
                )));
            }
            chosen.sort_by_key(|s| s.center);
            Ok((chosen, Vec::new(), Vec::new()))
        }
        Case::P => {
            let len = 8 * cfg.big_k;
            let want = (cfg.p_plus * n / (101.0 * cfg.big_k as f64))
                .ceil()
                .max(1.0) as usize;
            let mut pieces = Vec::new();
            for seg in bare_segments(t) {
                pieces.extend(cut_pieces(&seg, len, |p| {
                    !t.is_leaf(p[0])
                        && !t.is_leaf(p[len])
                        && p[1..len].iter().all(|v| !a_star.contains(v))
                }));
            }
            let mut used: BTreeSet<usize> = BTreeSet::new();
            let mut paths = Vec::new();
            for p in pieces {
                if paths.len() == want {
                    break;
                }
                used.extend(p.iter().copied());
                paths.push(p);
            }
            if paths.len() < want {
                return Err(Error::Partition(format!(
                    "found {} disjoint bare {len}-paths, need {want}",
                    paths.len()
                )));
            }
            let mut leaf_edges = Vec::new();
            for v in 0..t.n() {
                if leaf_edges.len() == 2 {
                    break;
                }
                if !t.is_leaf(v) || used.contains(&v) {
                    continue;
                }
                let a = t.neighbors(v)[0];
                if used.contains(&a) || t.is_leaf(a) {
                    continue;
                }
                used.insert(a);
                used.insert(v);
                leaf_edges.push((a, v));
            }
            if leaf_edges.len() < 2 {
                return Err(Error::Partition(
                    "fewer than two disjoint leaf edges outside the paths".into(),
                ));
            }
            Ok((Vec::new(), paths, leaf_edges))
        }
        Case::L => Err(Error::Partition(
            "Case L does not use TREE PARTITION".into(),
        )),
    }
}

struct Layering {
    layers: Vec<BTreeSet<usize>>,
}

fn compute_classes(
    t: &Tree,
    f_adj: &[Vec<usize>],
    a0: &BTreeSet<usize>,
    layers: &Layering,
    cfg: &ParamConfig,
) -> Vec<LayerClasses> {
    let big_delta = cfg.big_delta();
    let lambda = cfg.big_lambda();
    let mut out = Vec::with_capacity(layers.layers.len());
    for a_i in &layers.layers {
        let mut cl = LayerClasses::default();
        let mut star_of: BTreeMap<usize, usize> = BTreeMap::new();
        for a in 0..t.n() {
            if (t.degree(a) as f64) < big_delta {
                continue;
            }
            let nb: Vec<usize> = f_adj[a]
                .iter()
                .copied()
                .filter(|u| a_i.contains(u))
                .collect();
            if nb.len() as f64 >= big_delta {
                if t.degree(a) as f64 >= lambda && nb.len() as f64 >= lambda {
                    cl.big_centres.push(a);
                }
                for &u in &nb {
                    star_of.insert(u, a);
                }
                cl.stars.insert(a, nb);
            }
        }
        for &u in a_i {
            if star_of.contains_key(&u) {
                cl.hi.push(u);
                continue;
            }
            let k = f_adj[u].iter().filter(|v| a0.contains(v)).count();
            if k == 0 {
                cl.no.push(u);
            } else {
                cl.lo.push(u);
            }
        }
        out.push(cl);
    }
    out
}

/// Runs steps i–v and builds ≺.
pub fn tree_partition(
    t: &Tree,
    case: &CaseTag,
    cfg: &ParamConfig,
    rng: &mut Rng,
) -> Result<TreePartition> {
    let n_t = t.n();
    let n = cfg.n as f64;
    let big_delta = cfg.big_delta();

    // step i
    let a_delta: BTreeSet<usize> = (0..n_t)
        .filter(|&v| t.degree(v) as f64 >= big_delta)
        .collect();
    let a_star0 = k_span(t, &a_delta, 4);
    let (ex_stars, ex_paths, ex_leaf_edges) = choose_p_ex(t, case, cfg, &a_star0, rng)?;
    let mut p_ex: BTreeSet<(usize, usize)> = BTreeSet::new();
    for s in &ex_stars {
        for &l in &s.leaves {
            p_ex.insert((s.center.min(l), s.center.max(l)));
        }
    }
    for p in &ex_paths {
        for w in p.windows(2) {
            p_ex.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    for &(a, l) in &ex_leaf_edges {
        p_ex.insert((a.min(l), a.max(l)));
    }
    let f_edges: Vec<(usize, usize)> = t
        .edges()
        .iter()
        .copied()
        .filter(|e| !p_ex.contains(e))
        .collect();
    let f_adj = adjacency(n_t, &f_edges);
    let in_f: Vec<bool> = (0..n_t).map(|v| !f_adj[v].is_empty()).collect();
    let a_star0: BTreeSet<usize> = a_star0.into_iter().filter(|&v| in_f[v]).collect();
    let f_star_edges: Vec<(usize, usize)> = f_edges
        .iter()
        .copied()
        .filter(|(u, v)| !a_star0.contains(u) && !a_star0.contains(v))
        .collect();
    let f_star_adj = adjacency(n_t, &f_star_edges);
    let v_f_star: BTreeSet<usize> = (0..n_t)
        .filter(|&v| in_f[v] && !a_star0.contains(&v))
        .collect();

    // step ii
    let mut c_layers: Vec<BTreeSet<usize>> = Vec::new();
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    loop {
        let b: BTreeSet<usize> = v_f_star.difference(&taken).copied().collect();
        let c_prime: BTreeSet<usize> = b
            .iter()
            .copied()
            .filter(|&v| {
                let inside = f_star_adj[v].iter().filter(|u| b.contains(u)).count();
                let earlier = f_star_adj[v].iter().filter(|u| taken.contains(u)).count();
                inside <= 3 && earlier as f64 <= 1.0 / cfg.p_max
            })
            .collect();
        let c = forest_mis(&f_star_adj, &c_prime);
        if (c.len() as f64) < cfg.eps * n || c.is_empty() {
            break;
        }
        taken.extend(c.iter().copied());
        c_layers.push(c);
    }
    let i_star = c_layers.len();
    let b_last: BTreeSet<usize> = v_f_star.difference(&taken).copied().collect();

    // step iii
    let a_d: BTreeSet<usize> = (0..n_t)
        .filter(|&v| t.degree(v) as f64 >= cfg.big_d)
        .collect();
    let a_ss0: BTreeSet<usize> = span_in_f(t, &a_d, &in_f)
        .difference(&a_star0)
        .copied()
        .collect();
    let seed: BTreeSet<usize> = a_star0
        .iter()
        .chain(&a_ss0)
        .chain(&b_last)
        .copied()
        .collect();
    let mut a0 = span_in_f(t, &seed, &in_f);
    let mut layering = Layering {
        layers: (1..=i_star)
            .map(|i| c_layers[i_star - i].difference(&a0).copied().collect())
            .collect(),
    };
    let mut classes = compute_classes(t, &f_adj, &a0, &layering, cfg);

    // step iv, repeated until a full sweep moves nothing: at small n a later
    // move can push an earlier class back under its floor
    let mut moved = true;
    while moved {
        moved = false;
        for j in 1..=4 {
            let floor = cfg.delta_j(j) * n;
            loop {
                let pick = classes.iter().enumerate().find_map(|(i, cl)| {
                    let set = match j {
                        1 => cl.no.clone(),
                        2 => cl.above_lambda(),
                        3 => cl.below_lambda(),
                        _ => cl.lo.clone(),
                    };
                    (!set.is_empty() && (set.len() as f64) < floor).then_some((i, set))
                });
                let Some((_, set)) = pick else { break };
                moved = true;
                let grown: BTreeSet<usize> = a0.iter().chain(&set).copied().collect();
                a0 = span_in_f(t, &grown, &in_f);
                for layer in layering.layers.iter_mut() {
                    layer.retain(|v| !a0.contains(v));
                }
                classes = compute_classes(t, &f_adj, &a0, &layering, cfg);
            }
        }
    }

    // step v
    let mut a_star = a_star0.clone();
    let mut a_ss = a_ss0.clone();
    if classes.iter().all(|c| c.hi.is_empty()) {
        a_ss.extend(a_star.iter().copied());
        a_star.clear();
    }
    let a0_prime: BTreeSet<usize> = a0
        .iter()
        .copied()
        .filter(|v| !a_star.contains(v) && !a_ss.contains(v))
        .collect();

    // F'
    let mut removed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for cl in &classes {
        for (&a, set) in &cl.stars {
            for &b in set {
                removed.insert((a.min(b), a.max(b)));
            }
        }
    }
    let f_prime_edges: Vec<(usize, usize)> = f_edges
        .iter()
        .copied()
        .filter(|e| !removed.contains(e))
        .collect();
    let f_prime_adj = adjacency(n_t, &f_prime_edges);

    // ≺
    let mut order = Vec::with_capacity(n_t);
    let mut part = vec![Part::Ex; n_t];
    let mut placed = vec![false; n_t];
    for (set, tag) in [
        (&a_star, Part::AStar),
        (&a_ss, Part::AStarStar),
        (&a0_prime, Part::A0Prime),
    ] {
        for &r in set.iter() {
            if placed[r] {
                continue;
            }
            let mut q = VecDeque::from([r]);
            placed[r] = true;
            while let Some(v) = q.pop_front() {
                order.push(v);
                part[v] = tag;
                for &u in t.neighbors(v) {
                    if set.contains(&u) && !placed[u] {
                        placed[u] = true;
                        q.push_back(u);
                    }
                }
            }
        }
    }
    for (i, layer) in layering.layers.iter().enumerate() {
        for &v in layer {
            order.push(v);
            part[v] = Part::Layer(i + 1);
            placed[v] = true;
        }
    }
    for v in 0..n_t {
        if !placed[v] {
            if in_f[v] {
                return Err(Error::Internal(format!(
                    "vertex {v} of F not assigned to a part"
                )));
            }
            order.push(v);
        }
    }
    let mut pos = vec![0; n_t];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }

    let mut class = vec![None; n_t];
    let mut q_delta = Vec::new();
    let mut q_lambda = Vec::new();
    let mut m_counts = BTreeMap::new();
    for (i, cl) in classes.iter().enumerate() {
        for &u in &cl.lo {
            class[u] = Some(Class::Lo);
        }
        for &u in &cl.no {
            class[u] = Some(Class::No);
        }
        for (&a, set) in &cl.stars {
            for &u in set {
                class[u] = Some(Class::Hi(a));
            }
            if cl.big_centres.contains(&a) {
                q_lambda.push((a, i + 1));
            } else {
                q_delta.push((a, i + 1));
            }
            let m = (big_delta.powf(-0.2) * set.len() as f64).ceil() as usize;
            m_counts.insert((a, i + 1), m);
        }
    }
    let m = m_counts.values().sum();

    Ok(TreePartition {
        case: case.case,
        a_star: a_star.into_iter().collect(),
        a_star_star: a_ss.into_iter().collect(),
        a0_prime: a0_prime.into_iter().collect(),
        c_layers: c_layers
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect(),
        layers: layering
            .layers
            .into_iter()
            .map(|l| l.into_iter().collect())
            .collect(),
        classes,
        p_ex: p_ex.into_iter().collect(),
        ex_stars,
        ex_paths,
        ex_leaf_edges,
        f_edges,
        f_prime_edges,
        order,
        q_delta,
        q_lambda,
        m_counts,
        m,
        part,
        class,
        pos,
        f_prime_adj,
        f_star_adj,
    })
}

/// A label `ℓ_{aij}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub a: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelScheme {
    pub m: usize,
    pub m_below: usize,
    pub m_above: usize,
    /// `M^a_i` for every `(a, i)` in `Q^Δ ∪ Q^Λ`.
    pub big_m: BTreeMap<(usize, usize), usize>,
    pub below: Vec<Label>,
    pub above: Vec<Label>,
    /// Set when `m = 0`.
    pub empty: bool,
}

impl LabelScheme {
    pub fn p_below(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.m_below as f64 / self.m as f64
        }
    }

    pub fn p_above(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.m_above as f64 / self.m as f64
        }
    }
}

/// Largest-remainder split of `total` proportional to `weights`; every part
/// is the floor or the ceiling of its exact quota.
pub fn apportion(weights: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<usize> = weights.iter().map(|&w| w * total / sum).collect();
    let mut rem: Vec<(usize, usize)> = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| (w * total % sum, k))
        .collect();
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = total - out.iter().sum::<usize>();
    for &(_, k) in rem.iter().take(short) {
        out[k] += 1;
    }
    out
}

/// `m^a_i`, `p_∘` and `M^a_i` with `Σ_{Q^∘} M^a_i = m`, plus the labels.
pub fn label_scheme(tp: &TreePartition) -> LabelScheme {
    let m = tp.m;
    if m == 0 {
        return LabelScheme {
            empty: true,
            ..Default::default()
        };
    }
    let mut s = LabelScheme {
        m,
        ..Default::default()
    };
    for (q, out, mo) in [
        (&tp.q_delta, &mut s.below, &mut s.m_below),
        (&tp.q_lambda, &mut s.above, &mut s.m_above),
    ] {
        let w: Vec<usize> = q.iter().map(|k| tp.m_counts[k]).collect();
        *mo = w.iter().sum();
        let big = apportion(&w, m);
        for (&(a, i), &mm) in q.iter().zip(&big) {
            s.big_m.insert((a, i), mm);
            out.extend((1..=mm).map(|j| Label { a, i, j }));
        }
    }
    s
}
