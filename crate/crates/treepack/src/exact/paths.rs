//! PATHS: fix the parity of the leftover with the two leaf edges, reserve an
//! `8d`-path for every kept interval, embed the rest of `P_ex` greedily and
//! finish with one path system per copy.

use std::collections::BTreeSet;

use rand::seq::{index::sample, SliceRandom};

use super::{free_graph, in_j_ex};
use crate::embed::{abort_on, EmbeddingState, TimeMarker};
use crate::embed::intervals::interval_len;
use crate::error::{Error, Result};
use crate::oracle::{path_factor_solve, OracleOpts, PathDemand};
use crate::rng::Rng;
use crate::partition::Part;

const STAGE: &str = "PATHS";

/// One kept interval `[x, y]` of a copy: `x`, `y⁺` and `d(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub x: usize,
    pub y_plus: usize,
    pub d: usize,
}

/// A reserved tree path `P^{xy}_w`, `8d + 1` vertices, ends mapped to `x` and `y⁺`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reserved {
    pub w: usize,
    pub iv: Interval,
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathsPlan {
    pub odd: Vec<usize>,
    pub reserved: Vec<Reserved>,
    pub greedy: usize,
}

/// `𝒴_w` read off the interval state. Zero-length intervals are skipped.
pub fn y_intervals(s: &EmbeddingState) -> Vec<Vec<Interval>> {
    let n = s.n();
    let Some(is) = &s.intervals else { return vec![Vec::new(); n] };
    (0..n)
        .map(|w| {
            let di = is.d[is.level[w] - 1];
            is.kept[w]
                .iter()
                .filter_map(|&p| {
                    let len = interval_len(n, di, p);
                    (len >= 2).then(|| Interval {
                        x: s.order.vertex(p),
                        y_plus: s.order.vertex((p + len) % n),
                        d: len - 1,
                    })
                })
                .collect()
        })
        .collect()
}

/// Vertices whose free degree has the wrong parity for what `P_ex` still
/// needs there. `c(x)` counts `P_ex` edges with exactly one embedded end at `x`.
pub fn odd_set(s: &EmbeddingState) -> Vec<usize> {
    let n = s.n();
    let free = free_graph(s);
    let mut c = vec![0usize; n];
    for w in 0..n {
        for &(a, b) in &s.tp.p_ex {
            match (s.phi[w][a], s.phi[w][b]) {
                (Some(x), None) | (None, Some(x)) => c[x] += 1,
                _ => {}
            }
        }
    }
    (0..n).filter(|&x| (free.degree(x) + c[x]) % 2 == 1).collect()
}

/// Greedy vertex-disjoint windows of `8d + 2` edges along the bare paths;
/// the middle `8d` edges are the reservation.
pub fn reserve_windows(paths: &[Vec<usize>], ivs: &[Interval]) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(ivs.len());
    let (mut pi, mut off) = (0, 0);
    for iv in ivs {
        let need = 8 * iv.d + 3;
        loop {
            let p = paths.get(pi)?;
            if off + need <= p.len() {
                out.push(p[off + 1..off + need - 1].to_vec());
                off += need;
                break;
            }
            pi += 1;
            off = 0;
        }
    }
    Some(out)
}

/// Steps up to the greedy embedding: afterwards only the interiors of the
/// reserved paths are open and the odd set is empty.
pub fn paths_parity_and_reserve(s: &mut EmbeddingState, ys: &[Vec<Interval>], rng: &mut Rng) -> Result<PathsPlan> {
    let n = s.n();
    if ys.len() != n {
        return Err(Error::Input(format!("{} interval lists for {n} copies", ys.len())));
    }
    let &[(a1, l1), (a2, l2)] = s.tp.ex_leaf_edges.as_slice() else {
        return Err(Error::Input(format!("PATHS wants two leaf edges, got {}", s.tp.ex_leaf_edges.len())));
    };
    // reservations first, so no leaf lands on a pinned end
    let mut reserved = Vec::new();
    let mut interior: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for w in 0..n {
        let wins = reserve_windows(&s.tp.ex_paths, &ys[w])
            .ok_or_else(|| Error::abort(STAGE, format!("copy {w}: bare paths too short for its intervals")))?;
        for (iv, path) in ys[w].iter().zip(wins) {
            interior[w].extend(path[1..path.len() - 1].iter().copied());
            reserved.push(Reserved { w, iv: *iv, path });
        }
    }
    for r in &reserved {
        let (u0, u1) = (r.path[0], *r.path.last().expect("non-empty"));
        for (u, x) in [(u0, r.iv.x), (u1, r.iv.y_plus)] {
            if !s.can_place(r.w, u, x) {
                return Err(Error::abort(STAGE, format!("copy {}: cannot pin {u} to {x}", r.w)));
            }
            s.set_phi(r.w, u, x)?;
        }
    }

    let odd = odd_set(s);
    if odd.len() % 2 == 1 {
        return Err(Error::Internal(format!("odd set has odd size {}", odd.len())));
    }
    let all: Vec<usize> = (0..n).collect();

    // ℓ1 over every copy
    let z1: Vec<(usize, usize)> = all.iter().filter_map(|&w| s.phi[w][a1].map(|x| (x, w))).collect();
    let st: &EmbeddingState = s;
    let m = st
        .match_copies(&all, &all, |v, w| in_j_ex(st, v, w) && st.can_place(w, l1, v), &z1, rng, false)
        .map_err(|e| abort_on(STAGE, "first leaf".into(), e))?;
    for (w, v) in m {
        s.set_phi(w, l1, v)?;
    }

    // ℓ2: half the copies land on half the odd set
    let h = odd.len() / 2;
    let xs: Vec<usize> = sample(rng, odd.len(), h).into_iter().map(|i| odd[i]).collect();
    let mut ws: Vec<usize> = sample(rng, n, h).into_iter().collect();
    ws.sort_unstable();
    let rest_w: Vec<usize> = all.iter().copied().filter(|w| ws.binary_search(w).is_err()).collect();
    let rest_v: Vec<usize> = all.iter().copied().filter(|v| !odd.contains(v) || xs.contains(v)).collect();
    for (part, (wq, vq)) in [(&ws, &xs), (&rest_w, &rest_v)].into_iter().enumerate() {
        let z2: Vec<(usize, usize)> = wq.iter().filter_map(|&w| s.phi[w][a2].map(|x| (x, w))).collect();
        let st: &EmbeddingState = s;
        let m = st
            .match_copies(wq, vq, |v, w| in_j_ex(st, v, w) && st.can_place(w, l2, v), &z2, rng, false)
            .map_err(|e| abort_on(STAGE, format!("second leaf, part {}", part + 1), e))?;
        for (w, v) in m {
            s.set_phi(w, l2, v)?;
        }
    }

    // greedy, round robin over the copies
    let queues: Vec<Vec<usize>> = (0..n)
        .map(|w| {
            let mut q = Vec::new();
            for p in &s.tp.ex_paths {
                q.extend(p.iter().copied().filter(|u| s.phi[w][*u].is_none() && !interior[w].contains(u)));
            }
            q.dedup();
            q
        })
        .collect();
    let rounds = queues.iter().map(Vec::len).max().unwrap_or(0);
    let mut greedy = 0;
    for k in 0..rounds {
        for w in 0..n {
            let Some(&u) = queues[w].get(k) else { continue };
            let st: &EmbeddingState = s;
            let cand: Vec<usize> = (0..n).filter(|&z| in_j_ex(st, z, w) && st.can_place(w, u, z)).collect();
            let &z = cand
                .choose(rng)
                .ok_or_else(|| Error::abort(STAGE, format!("greedy dead end at copy {w}, vertex {u}")))?;
            s.set_phi(w, u, z)?;
            greedy += 1;
        }
    }

    // every vertex now has as many free edges, mod 2, as reserved path ends
    if let Some(&x) = odd_set(s).first() {
        return Err(Error::Internal(format!("vertex {x} still has the wrong parity")));
    }
    s.metric("odd_set", odd.len() as f64);
    s.metric("reserved_paths", reserved.len() as f64);
    s.metric("greedy_vertices", greedy as f64);
    Ok(PathsPlan { odd, reserved, greedy })
}

/// Splits the leftover into the reserved paths and writes them into `φ`.
pub fn paths_complete(s: &mut EmbeddingState, plan: &PathsPlan, opts: &OracleOpts) -> Result<u64> {
    let n = s.n();
    let free = free_graph(s);
    let mut demands = vec![Vec::new(); n];
    let mut which = vec![Vec::new(); n];
    for r in &plan.reserved {
        demands[r.w].push(PathDemand { ends: (r.iv.x, r.iv.y_plus), len: r.path.len() - 1 });
        which[r.w].push(&r.path);
    }
    let forbidden: Vec<BTreeSet<usize>> = (0..n).map(|w| s.phi[w].iter().flatten().copied().collect()).collect();
    let out = path_factor_solve(&free, &demands, &forbidden, opts)?;
    let Some(sys) = out.found else {
        let why = if out.exhausted { "search budget ran out" } else { "no path system exists" };
        return Err(Error::abort(STAGE, format!("{why} after {} nodes", out.nodes)));
    };
    for w in 0..n {
        for (hp, tp) in sys[w].iter().zip(&which[w]) {
            for k in 1..tp.len() - 1 {
                s.set_phi(w, tp[k], hp[k])?;
            }
        }
    }
    s.metric("path_search_nodes", out.nodes as f64);
    s.clock = TimeMarker::Exact;
    Ok(out.nodes)
}

/// Both halves with the intervals of the state.
pub fn paths(s: &mut EmbeddingState, rng: &mut Rng) -> Result<PathsPlan> {
    let ys = y_intervals(s);
    let plan = paths_parity_and_reserve(s, &ys, rng)?;
    let opts = OracleOpts { cap: s.cfg.oracle_cap.max(free_graph(s).edge_count()), nodes: s.cfg.oracle_nodes, seconds: None };
    paths_complete(s, &plan, &opts)?;
    Ok(plan)
}

/// Tree vertices still open after the greedy step must all be reserved interiors.
pub fn open_outside_reservations(s: &EmbeddingState, plan: &PathsPlan) -> usize {
    let n = s.n();
    let mut bad = 0;
    for w in 0..n {
        let inside: BTreeSet<usize> = plan
            .reserved
            .iter()
            .filter(|r| r.w == w)
            .flat_map(|r| r.path[1..r.path.len() - 1].iter().copied())
            .collect();
        bad += (0..s.tree.n())
            .filter(|&u| s.tp.part[u] == Part::Ex && s.phi[w][u].is_none() && !inside.contains(&u))
            .count();
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_decomposition;
    use crate::exact::toy::{from_copies, rotations};
    use crate::graph::Graph;
    use crate::oracle::verify;
    use crate::partition::TreePartition;
    use crate::rng::seeded;
    use crate::tree::{Case, Tree};

    const N: usize = 27;
    // graceful zigzag: edge t_j t_{j+1} has difference j + 1
    const BASE: [usize; 14] = [0, 1, 26, 2, 25, 3, 24, 4, 23, 5, 22, 6, 21, 7];

    fn toy() -> EmbeddingState {
        let edges: Vec<(usize, usize)> = (0..13).map(|j| (j, j + 1)).collect();
        let t = Tree::from_edges(14, &edges).unwrap();
        let tp = TreePartition::flat_ex(&t, Case::P, Vec::new(), vec![(1..=12).collect()], vec![(1, 0), (12, 13)]).unwrap();
        from_copies(Graph::complete(N), t, tp, &rotations(&BASE, N), &[1, 12])
    }

    fn toy_intervals() -> Vec<Vec<Interval>> {
        (0..N).map(|w| vec![Interval { x: (BASE[2] + w) % N, y_plus: (BASE[10] + w) % N, d: 1 }]).collect()
    }

    #[test]
    fn windows_are_disjoint_and_centred() {
        let p: Vec<usize> = (0..30).collect();
        let iv = Interval { x: 0, y_plus: 0, d: 1 };
        let w = reserve_windows(&[p.clone()], &[iv, iv]).unwrap();
        assert_eq!(w[0], (1..=9).collect::<Vec<_>>());
        assert_eq!(w[1], (12..=20).collect::<Vec<_>>());
        assert!(reserve_windows(&[p], &[iv, iv, iv, iv]).is_none());
    }

    #[test]
    fn window_spills_to_the_next_path() {
        let a: Vec<usize> = (0..15).collect();
        let b: Vec<usize> = (100..111).collect();
        let iv = Interval { x: 0, y_plus: 0, d: 1 };
        let w = reserve_windows(&[a, b], &[iv, iv]).unwrap();
        assert_eq!(w[1][0], 101);
        assert_eq!(w[1].len(), 9);
    }

    #[test]
    fn complete_host_with_full_degrees_has_no_odd_vertex() {
        // every vertex has free degree 26 and four half-embedded P_ex edges
        assert!(odd_set(&toy()).is_empty());
    }

    #[test]
    fn toy_reaches_even_leftover() {
        let mut ok = 0;
        for seed in 0..10 {
            let mut s = toy();
            match paths_parity_and_reserve(&mut s, &toy_intervals(), &mut seeded(seed)) {
                Ok(plan) => {
                    assert_eq!(plan.reserved.len(), N);
                    assert_eq!(plan.reserved[0].path, (2..=10).collect::<Vec<_>>());
                    assert_eq!(open_outside_reservations(&s, &plan), 0);
                    let free = free_graph(&s);
                    assert_eq!(free.edge_count(), 8 * N);
                    assert!(odd_set(&s).is_empty());
                    assert!(s.audit().is_empty());
                    ok += 1;
                }
                Err(e) => assert!(matches!(e, Error::Abort { .. }), "{e}"),
            }
        }
        assert!(ok > 0);
    }

    #[test]
    fn parity_fix_pairs_up_an_odd_set() {
        // two host edges taken from outside make four vertices odd; the
        // leftover is then two edges short, which parity does not see
        let edges: Vec<(usize, usize)> = (0..13).map(|j| (j, j + 1)).collect();
        let t = Tree::from_edges(14, &edges).unwrap();
        let mut ok = 0;
        for seed in 0..10 {
            let tp = TreePartition::flat_ex(&t, Case::P, Vec::new(), vec![(1..=12).collect()], vec![(1, 0), (12, 13)]).unwrap();
            let mut s = from_copies(Graph::complete(N), t.clone(), tp, &rotations(&BASE, N), &[1, 12]);
            // pretend an outside copy already used 3-4 and 5-6
            for (x, y) in [(3, 4), (5, 6)] {
                s.used.insert((x, y), crate::embed::Owner { w: 0, u: 0, v: 0 });
            }
            let odd = odd_set(&s);
            assert_eq!(odd, vec![3, 4, 5, 6]);
            if let Ok(plan) = paths_parity_and_reserve(&mut s, &toy_intervals(), &mut seeded(seed)) {
                assert_eq!(plan.odd.len(), 4);
                assert!(odd_set(&s).is_empty());
                assert_eq!(free_graph(&s).edge_count(), 8 * N - 2);
                ok += 1;
            }
        }
        assert!(ok > 0);
    }

    #[test]
    fn path_systems_finish_the_rotations() {
        // three copies keep their middles open; the rest is the rotations, so
        // the leftover is exactly those three middles
        let open = [0, 9, 18];
        let mut s = toy();
        let copies = rotations(&BASE, N);
        for w in 0..N {
            let us: Vec<usize> = if open.contains(&w) { vec![0, 2, 10, 11, 13] } else { vec![0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13] };
            for u in us {
                s.set_phi(w, u, copies[w][u]).unwrap();
            }
        }
        let reserved: Vec<Reserved> = open
            .iter()
            .map(|&w| Reserved { w, iv: toy_intervals()[w][0], path: (2..=10).collect() })
            .collect();
        let plan = PathsPlan { odd: Vec::new(), reserved, greedy: 0 };
        assert_eq!(free_graph(&s).edge_count(), 24);
        let nodes = paths_complete(&mut s, &plan, &OracleOpts::default()).unwrap();
        assert!(nodes > 0);
        assert!(verify(&to_decomposition(&s).unwrap()).is_ok());
    }
}
