//! HIGH DEGREES: shifts `x_a`, the `V`/`W` block partitions and one
//! perfect matching per `a ∈ A*`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{abort_on, Blocks, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::graph::circ_dist;
use crate::partition::TreePartition;
use crate::rng::Rng;

const STAGE: &str = "HIGH DEGREES";

/// Input to the shift choice, separated from the partition for testing.
#[derive(Debug, Clone, Default)]
pub struct ShiftProblem {
    pub order: Vec<usize>,
    /// `N_<(a)` for each `a` in `order`.
    pub n_less: BTreeMap<usize, Vec<usize>>,
    /// `F`-edges among the vertices of `order`.
    pub f_edges: Vec<(usize, usize)>,
    pub m: usize,
    pub d: usize,
}

impl ShiftProblem {
    pub fn from_partition(tp: &TreePartition, d: usize) -> Self {
        let mut order: Vec<usize> = tp.a_star.clone();
        order.sort_by_key(|&a| tp.pos[a]);
        let inside = |v: usize| tp.a_star.contains(&v);
        ShiftProblem {
            n_less: order
                .iter()
                .map(|&a| (a, tp.n_less(a).into_iter().filter(|&b| inside(b)).collect()))
                .collect(),
            f_edges: tp
                .f_edges
                .iter()
                .copied()
                .filter(|&(u, v)| inside(u) && inside(v))
                .collect(),
            order,
            m: tp.m,
            d,
        }
    }

    fn earlier_edges(&self, rank: &BTreeMap<usize, usize>, k: usize) -> Vec<(usize, usize)> {
        self.f_edges
            .iter()
            .copied()
            .filter(|&(u, v)| rank.get(&u).is_some_and(|&r| r < k) && rank.get(&v).is_some_and(|&r| r < k))
            .collect()
    }

    fn ranks(&self) -> BTreeMap<usize, usize> {
        self.order.iter().enumerate().map(|(k, &a)| (a, k)).collect()
    }

    /// First feasible value in `[m]` for each `a`, in order.
    pub fn solve(&self) -> Result<BTreeMap<usize, usize>> {
        let rank = self.ranks();
        let mut x: BTreeMap<usize, usize> = BTreeMap::new();
        for (k, &a) in self.order.iter().enumerate() {
            let earlier = self.earlier_edges(&rank, k);
            let nl = &self.n_less[&a];
            let ok = |c: usize| {
                self.order[..k].iter().all(|b| circ_dist(self.m, c, x[b]) > 3 * self.d)
                    && nl.iter().all(|a2| {
                        earlier
                            .iter()
                            .all(|&(b, b2)| circ_dist(self.m, c, x[a2]) != circ_dist(self.m, x[&b], x[&b2]))
                    })
            };
            match (0..self.m.max(1)).find(|&c| ok(c)) {
                Some(c) => {
                    x.insert(a, c);
                }
                None => {
                    return Err(Error::abort(
                        STAGE,
                        format!(
                            "no feasible shift for a = {a} (m = {}, d = {}, {} of {} placed)",
                            self.m,
                            self.d,
                            k,
                            self.order.len()
                        ),
                    ))
                }
            }
        }
        Ok(x)
    }

    /// Independent post-hoc scan of both constraint families.
    pub fn check(&self, x: &BTreeMap<usize, usize>) -> Vec<String> {
        let rank = self.ranks();
        let mut bad = Vec::new();
        for (k, &a) in self.order.iter().enumerate() {
            let Some(&xa) = x.get(&a) else {
                bad.push(format!("{a} has no shift"));
                continue;
            };
            if xa >= self.m.max(1) {
                bad.push(format!("x_{a} = {xa} outside [m]"));
            }
            for &b in &self.order[..k] {
                if circ_dist(self.m, xa, x[&b]) <= 3 * self.d {
                    bad.push(format!("x_{a}, x_{b} too close"));
                }
            }
            for &a2 in &self.n_less[&a] {
                for (b, b2) in self.earlier_edges(&rank, k) {
                    if circ_dist(self.m, xa, x[&a2]) == circ_dist(self.m, x[&b], x[&b2]) {
                        bad.push(format!("edge {a}{a2} repeats the distance of {b}{b2}"));
                    }
                }
            }
        }
        bad
    }
}

/// `n = m n_* + n_0` with `n_0 ≡ n (mod m)` closest to `n Δ^{-0.1}`, ties down.
pub fn block_sizes(n: usize, m: usize, big_delta: f64) -> (usize, usize) {
    if m == 0 {
        return (n, 0);
    }
    let target = n as f64 * big_delta.powf(-0.1);
    let mut best = n % m;
    let mut c = best;
    while c <= n {
        if (c as f64 - target).abs() < (best as f64 - target).abs() {
            best = c;
        }
        c += m;
    }
    (best, (n - best) / m)
}

fn random_blocks(n: usize, n0: usize, n_star: usize, rng: &mut Rng) -> Vec<Option<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut out = vec![None; n];
    for (r, &v) in perm.iter().enumerate().skip(n0) {
        out[v] = Some((r - n0) / n_star);
    }
    out
}

pub fn pick_shifts(s: &EmbeddingState) -> Result<BTreeMap<usize, usize>> {
    ShiftProblem::from_partition(&s.tp, s.cfg.d).solve()
}

pub fn high_degrees(s: &mut EmbeddingState, rng: &mut Rng) -> Result<()> {
    let n = s.n();
    let m = s.tp.m;
    if s.tp.a_star.is_empty() {
        s.blocks = Blocks { n0: n, n_star: 0, v_block: vec![None; n], w_block: vec![None; n] };
        s.clock = TimeMarker::HighDegrees;
        return Ok(());
    }
    if m == 0 {
        return Err(Error::Internal("A* is non-empty but m = 0".into()));
    }
    s.shifts = pick_shifts(s)?;
    let (n0, n_star) = block_sizes(n, m, s.cfg.big_delta());
    s.blocks = Blocks {
        n0,
        n_star,
        v_block: random_blocks(n, n0, n_star, rng),
        w_block: random_blocks(n, n0, n_star, rng),
    };
    s.metric("n0", n0 as f64);
    s.metric("n_star", n_star as f64);
    let members = |blk: &[Option<usize>], k: Option<usize>| -> Vec<usize> {
        (0..n).filter(|&v| blk[v] == k).collect()
    };
    let mut order = s.tp.a_star.clone();
    order.sort_by_key(|&a| s.tp.pos[a]);
    for a in order {
        let nl = s.tp.n_less(a);
        let st: &EmbeddingState = s;
        let z: Vec<(usize, usize)> = (0..n)
            .flat_map(|w| nl.iter().filter_map(move |&b| st.phi[w][b].map(|y| (y, w))))
            .collect();
        let xa = s.shifts[&a];
        let mut parts: Vec<(Option<usize>, Option<usize>)> = vec![(None, None)];
        parts.extend((0..m).map(|ws| (Some((xa + ws) % m), Some(ws))));
        let mut placed = Vec::with_capacity(n);
        for (vk, wk) in parts {
            let ws = members(&s.blocks.w_block, wk);
            let vs = members(&s.blocks.v_block, vk);
            let got = s
                .match_copies(&ws, &vs, |v, w| s.can_place(w, a, v), &z, rng, true)
                .map_err(|e| abort_on(STAGE, format!("a = {a}, block {}", wk.map_or("0".into(), |k| k.to_string())), e))?;
            placed.extend(got);
        }
        for (w, v) in placed {
            s.set_phi(w, a, v)?;
        }
    }
    s.clock = TimeMarker::HighDegrees;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParamConfig;
    use crate::gen;
    use crate::graph::Graph;
    use crate::partition::tree_partition;
    use crate::rng::seeded;
    use crate::tree::{classify_case, Tree};
    use proptest::prelude::*;

    #[test]
    fn single_shift_is_zero() {
        let p = ShiftProblem {
            order: vec![4],
            n_less: [(4, vec![])].into(),
            m: 7,
            d: 4,
            ..Default::default()
        };
        assert_eq!(p.solve().unwrap()[&4], 0);
    }

    #[test]
    fn unrelated_pair_first_feasible_is_ten() {
        let p = ShiftProblem {
            order: vec![1, 2],
            n_less: [(1, vec![]), (2, vec![])].into(),
            f_edges: vec![],
            m: 100,
            d: 3,
        };
        let x = p.solve().unwrap();
        assert_eq!((x[&1], x[&2]), (0, 10));
        assert!(p.check(&x).is_empty());
    }

    #[test]
    fn distance_difference_pushes_shift() {
        // path 0-1-2: edge 01 has distance 10, so 12 may not also have distance 10
        let p = ShiftProblem {
            order: vec![0, 1, 2],
            n_less: [(0, vec![]), (1, vec![0]), (2, vec![1])].into(),
            f_edges: vec![(0, 1), (1, 2)],
            m: 100,
            d: 3,
        };
        let x = p.solve().unwrap();
        assert_eq!(x[&0], 0);
        assert_eq!(x[&1], 10);
        // 20 is distance 10 from x_1, forbidden; 21 is the first candidate far from both
        assert_eq!(x[&2], 21);
        assert!(p.check(&x).is_empty());
        let mut bad = x.clone();
        bad.insert(2, 20);
        assert!(!p.check(&bad).is_empty());
    }

    #[test]
    fn too_small_m_aborts() {
        let p = ShiftProblem {
            order: vec![0, 1],
            n_less: [(0, vec![]), (1, vec![])].into(),
            m: 6,
            d: 1,
            ..Default::default()
        };
        assert!(matches!(p.solve(), Err(Error::Abort { .. })));
    }

    #[test]
    fn block_size_rounding() {
        // 1000 Δ^{-0.1} with Δ = 10 is 794.3; residues 1000 mod 7 = 6, so 790 and 797 are the
        // neighbours and 797 is nearer
        assert_eq!(block_sizes(1000, 7, 10.0), (797, 29));
        // Δ = 10^10 puts the target at exactly 10, halfway between 8 and 12
        assert_eq!(block_sizes(100, 4, 1e10), (8, 23));
        assert_eq!(block_sizes(5, 0, 2.0), (5, 0));
    }

    fn random_problem(seed: u64) -> ShiftProblem {
        let mut rng = seeded(seed);
        let t = gen::uniform_tree(12, &mut rng);
        let order: Vec<usize> = t.bfs_order(0);
        let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &a)| (a, k)).collect();
        let n_less = order
            .iter()
            .map(|&a| (a, t.neighbors(a).iter().copied().filter(|b| rank[b] < rank[&a]).collect()))
            .collect();
        ShiftProblem { order, n_less, f_edges: t.edges().to_vec(), m: 400, d: 2 }
    }

    proptest! {
        #[test]
        fn shifts_pass_the_checker(seed in 0u64..500) {
            let p = random_problem(seed);
            let x = p.solve().unwrap();
            prop_assert!(p.check(&x).is_empty());
        }
    }

    /// Two adjacent hubs, each with twelve neighbours carrying two leaves:
    /// Case S with both hubs in A*.
    pub(crate) fn hub_tree() -> Tree {
        let mut edges = vec![(0, 1)];
        let mut next = 2;
        for hub in 0..2 {
            for _ in 0..12 {
                let c = next;
                edges.push((hub, c));
                edges.push((c, c + 1));
                edges.push((c, c + 2));
                next += 3;
            }
        }
        Tree::from_edges(next, &edges).unwrap()
    }

    pub(crate) fn hub_cfg(n: usize) -> ParamConfig {
        let mut cfg = ParamConfig::with_scale(n, 1.0);
        cfg.big_delta = Some(5.0);
        cfg.big_lambda = Some(4.0);
        cfg.d = 1;
        cfg
    }

    fn hub_state(seed: u64) -> EmbeddingState {
        let tree = hub_tree();
        let n = 101;
        let cfg = hub_cfg(n);
        let mut rng = seeded(seed);
        let tag = classify_case(&tree, &cfg).unwrap();
        let tp = tree_partition(&tree, &tag, &cfg, &mut rng).unwrap();
        EmbeddingState::new(Graph::complete(n), tree, tp, cfg, &mut rng).unwrap()
    }

    #[test]
    fn perfect_matching_per_hub() {
        for seed in 0..50 {
            let mut s = hub_state(seed);
            assert_eq!(s.tp.a_star.len(), 2);
            let mut rng = seeded(100 + seed);
            high_degrees(&mut s, &mut rng).unwrap();
            for &a in &s.tp.a_star {
                let mut img: Vec<usize> = (0..s.n()).map(|w| s.phi[w][a].unwrap()).collect();
                img.sort_unstable();
                assert_eq!(img, (0..s.n()).collect::<Vec<_>>());
            }
            assert!(s.audit().is_empty());
            assert!(ShiftProblem::from_partition(&s.tp, s.cfg.d).check(&s.shifts).is_empty());
        }
    }
}
