//! Orientation with prescribed out-degrees by reversing two-arc paths.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{random_orientation, Digraph, Graph};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct Oriented {
    pub d: Digraph,
    pub moves: usize,
    /// Imbalance `Σ |d⁺(x) − target(x)|` before each move and at the end.
    pub trace: Vec<usize>,
}

pub fn imbalance(d: &Digraph, targets: &[usize]) -> usize {
    (0..d.n()).map(|x| d.out_degree(x).abs_diff(targets[x])).sum()
}

/// Starts from a uniform orientation and reverses `y→z→x` into `x→z→y` for
/// random deficit `x`, surplus `y` and `z ∈ N⁺(y) ∩ N⁻(x)` until every
/// out-degree meets its target. When `n` draws find no such `z` the shortest
/// directed surplus-to-deficit path is reversed instead; sparse leftovers
/// need it.
pub fn degree_target_orient(g: &Graph, targets: &[usize], rng: &mut Rng) -> Result<Oriented> {
    let n = g.n();
    if targets.len() != n {
        return Err(Error::Input(format!("{} targets for {n} vertices", targets.len())));
    }
    let sum: usize = targets.iter().sum();
    if sum != g.edge_count() {
        return Err(Error::Input(format!("targets sum to {sum}, graph has {} edges", g.edge_count())));
    }
    let mut d = random_orientation(g, rng);
    let mut cur = imbalance(&d, targets);
    let mut trace = vec![cur];
    let mut moves = 0;
    let budget = move_budget(n);
    while cur > 0 {
        let deficit: Vec<usize> = (0..n).filter(|&x| d.out_degree(x) < targets[x]).collect();
        let surplus: Vec<usize> = (0..n).filter(|&y| d.out_degree(y) > targets[y]).collect();
        let mut done = false;
        for _ in 0..n.max(1) {
            let x = *deficit.choose(rng).expect("imbalance has a deficit");
            let y = *surplus.choose(rng).expect("imbalance has a surplus");
            let zs: Vec<usize> = d.out_neighbors(y).intersection(d.in_neighbors(x)).copied().collect();
            let Some(&z) = zs.choose(rng) else { continue };
            d.reverse(y, z);
            d.reverse(z, x);
            done = true;
            break;
        }
        if !done {
            if let Some(p) = shortest_fix(&d, &surplus, &deficit) {
                for e in p.windows(2) {
                    d.reverse(e[0], e[1]);
                }
                done = true;
            }
        }
        if !done || moves >= budget {
            return Err(Error::Stuck { what: format!("orientation left imbalance {cur}"), moves });
        }
        moves += 1;
        let next = imbalance(&d, targets);
        if next + 2 != cur {
            return Err(Error::Internal(format!("reversal moved imbalance from {cur} to {next}")));
        }
        cur = next;
        trace.push(cur);
    }
    Ok(Oriented { d, moves, trace })
}

/// BFS from every surplus vertex along out-arcs to the nearest deficit.
fn shortest_fix(d: &Digraph, surplus: &[usize], deficit: &[usize]) -> Option<Vec<usize>> {
    let n = d.n();
    let mut prev = vec![usize::MAX; n];
    let mut q = std::collections::VecDeque::new();
    for &y in surplus {
        prev[y] = y;
        q.push_back(y);
    }
    let want: std::collections::BTreeSet<usize> = deficit.iter().copied().collect();
    while let Some(a) = q.pop_front() {
        if want.contains(&a) {
            let mut p = vec![a];
            while prev[*p.last().unwrap()] != *p.last().unwrap() {
                p.push(prev[*p.last().unwrap()]);
            }
            p.reverse();
            return Some(p);
        }
        for &b in d.out_neighbors(a) {
            if prev[b] == usize::MAX {
                prev[b] = a;
                q.push_back(b);
            }
        }
    }
    None
}

/// `100 n log n` moves before a randomized loop is declared stuck.
pub fn move_budget(n: usize) -> usize {
    let n = n.max(2) as f64;
    (100.0 * n * n.ln()).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gnp;
    use crate::rng::seeded;
    use proptest::prelude::*;

    #[test]
    fn four_cycle_all_ones() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        for seed in 0..20 {
            let o = degree_target_orient(&g, &[1; 4], &mut seeded(seed)).unwrap();
            assert!((0..4).all(|x| o.d.out_degree(x) == 1));
            // a directed 4-cycle: following out-arcs returns after four steps
            let mut v = 0;
            for _ in 0..4 {
                v = *o.d.out_neighbors(v).iter().next().unwrap();
            }
            assert_eq!(v, 0);
        }
    }

    #[test]
    fn feasible_start_needs_no_moves() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut rng = seeded(3);
        let d0 = random_orientation(&g, &mut seeded(3));
        let t: Vec<usize> = (0..3).map(|x| d0.out_degree(x)).collect();
        let o = degree_target_orient(&g, &t, &mut rng).unwrap();
        assert_eq!(o.moves, 0);
    }

    #[test]
    fn wrong_total_is_input_error() {
        let g = Graph::complete(4);
        assert!(matches!(degree_target_orient(&g, &[1, 1, 1, 1], &mut seeded(0)), Err(Error::Input(_))));
    }

    /// Out-degrees of an independent orientation, so always attainable.
    fn composition(g: &Graph, rng: &mut crate::rng::Rng) -> Vec<usize> {
        let d = random_orientation(g, rng);
        (0..g.n()).map(|x| d.out_degree(x)).collect()
    }

    #[test]
    fn gnp_fifty_within_ten_moves_per_edge() {
        for seed in 0..50 {
            let mut rng = seeded(seed);
            let g = gnp(50, 0.5, &mut rng).unwrap();
            let t = composition(&g, &mut rng);
            let o = degree_target_orient(&g, &t, &mut rng).unwrap();
            assert!(o.moves < 10 * g.edge_count());
            assert!((0..50).all(|x| o.d.out_degree(x) == t[x]));
            assert_eq!(o.d.arc_count(), g.edge_count());
        }
    }

    proptest! {
        #[test]
        fn every_move_drops_imbalance_by_two(seed in 0u64..500, n in 6usize..25) {
            let mut rng = seeded(seed);
            let g = gnp(n, 0.6, &mut rng).unwrap();
            let t = composition(&g, &mut rng);
            let o = degree_target_orient(&g, &t, &mut rng).unwrap();
            prop_assert!(o.trace.windows(2).all(|w| w[0] == w[1] + 2));
            prop_assert_eq!(*o.trace.last().unwrap(), 0);
            for (x, y) in o.d.arcs() {
                prop_assert!(g.has_edge(x, y) && !o.d.has_arc(y, x));
            }
        }
    }
}
