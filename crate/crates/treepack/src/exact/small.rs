//! SMALL STARS: orient the leftover so every centre image has exactly as many
//! out-arcs as it has demanded leaves, then match leaves to out-neighbours.

use super::orient::degree_target_orient;
use super::{free_graph, in_j_ex};
use crate::embed::{abort_on, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::matching::{match_sample_with, BipartiteInstance, MatchOptions};
use crate::rng::Rng;

const STAGE: &str = "SMALL STARS";

/// `L_x`: the `(leaf, copy)` pairs whose star centre sits at `x`.
pub fn star_demand(s: &EmbeddingState) -> Result<Vec<Vec<(usize, usize)>>> {
    let n = s.n();
    let mut l = vec![Vec::new(); n];
    for st in &s.tp.ex_stars {
        for w in 0..n {
            let x = s.phi[w][st.center]
                .ok_or_else(|| Error::Order(format!("copy {w} has no image for centre {}", st.center)))?;
            for &u in &st.leaves {
                if s.phi[w][u].is_none() {
                    l[x].push((u, w));
                }
            }
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallStarsReport {
    pub demand: usize,
    pub orient_moves: usize,
    pub start_imbalance: usize,
    /// Imbalance before each reversal and at the end.
    pub trace: Vec<usize>,
}

pub fn small_stars(s: &mut EmbeddingState, rng: &mut Rng) -> Result<SmallStarsReport> {
    let n = s.n();
    let l = star_demand(s)?;
    let free = free_graph(s);
    let demand: usize = l.iter().map(|v| v.len()).sum();
    if demand != free.edge_count() {
        return Err(Error::Input(format!(
            "stars demand {demand} edges but {} are left",
            free.edge_count()
        )));
    }
    if let Some(x) = (0..n).find(|&x| l[x].len() > free.degree(x)) {
        return Err(Error::Infeasible { violator: vec![x], neighbours: free.degree(x) });
    }
    let targets: Vec<usize> = l.iter().map(|v| v.len()).collect();
    let o = degree_target_orient(&free, &targets, rng).map_err(|e| abort_on(STAGE, "orientation".into(), e))?;
    for x in 0..n {
        let lx = &l[x];
        if lx.is_empty() {
            continue;
        }
        let ys: Vec<usize> = o.d.out_neighbors(x).iter().copied().collect();
        let st: &EmbeddingState = s;
        let mut b = Vec::new();
        for (i, &(_, w)) in lx.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                if in_j_ex(st, y, w) && st.preimage(w, y).is_none() {
                    b.push((i, j));
                }
            }
        }
        let k = lx.len();
        let inst = BipartiteInstance::new(k, k, b, Vec::new())?;
        let opts = MatchOptions::new(st.cfg.mixing_steps(k), st.cfg.budget(k));
        let m = match_sample_with(&inst, rng, opts).map_err(|e| abort_on(STAGE, format!("x = {x}"), e))?;
        for (i, &j) in m.mate.iter().enumerate() {
            let (u, w) = lx[i];
            s.set_phi(w, u, ys[j])?;
        }
    }
    s.metric("star_demand", demand as f64);
    s.metric("orient_moves", o.moves as f64);
    s.clock = TimeMarker::Exact;
    Ok(SmallStarsReport { demand, orient_moves: o.moves, start_imbalance: o.trace[0], trace: o.trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_decomposition;
    use crate::exact::toy::{from_copies, rotations};
    use crate::graph::Graph;
    use crate::oracle::{brute_decompose, verify, OracleOpts};
    use crate::partition::TreePartition;
    use crate::rng::seeded;
    use crate::tree::{Case, LeafStar, Tree};

    fn cherry() -> Tree {
        // 0 - 1 with leaves 2, 3 on 1
        Tree::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap()
    }

    fn star_12() -> Vec<LeafStar> {
        vec![LeafStar { center: 1, leaves: vec![2, 3] }]
    }

    #[test]
    fn no_stars_is_a_no_op() {
        let t = cherry();
        let tp = TreePartition::flat(&t, Case::S, Vec::new()).unwrap();
        let copies = rotations(&[3, 0, 1, 2], 7);
        let mut s = from_copies(Graph::complete(7), t, tp, &copies, &[0, 1, 2, 3]);
        let r = small_stars(&mut s, &mut seeded(1)).unwrap();
        assert_eq!(r.demand, 0);
        assert!(verify(&to_decomposition(&s).unwrap()).is_ok());
    }

    #[test]
    fn two_out_arcs_two_leaves_always_fit() {
        // K_5 into five K_{1,2} with centres on distinct vertices: every
        // out-neighbour of x is allowed, so both leaves take both of them
        let t = Tree::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        for seed in 0..20 {
            let tp = TreePartition::flat(&t, Case::S, vec![LeafStar { center: 0, leaves: vec![1, 2] }]).unwrap();
            let copies: Vec<Vec<usize>> = (0..5).map(|w| vec![w, 0, 0]).collect();
            let mut s = from_copies(Graph::complete(5), t.clone(), tp, &copies, &[0]);
            let r = small_stars(&mut s, &mut seeded(seed)).unwrap();
            assert_eq!(r.demand, 10);
            assert!(verify(&to_decomposition(&s).unwrap()).is_ok());
        }
    }

    #[test]
    fn rotational_cherries_complete() {
        let t = cherry();
        let mut ok = 0;
        for seed in 0..20 {
            let tp = TreePartition::flat(&t, Case::S, star_12()).unwrap();
            let copies = rotations(&[3, 0, 1, 2], 7);
            let mut s = from_copies(Graph::complete(7), t.clone(), tp, &copies, &[0, 1]);
            match small_stars(&mut s, &mut seeded(seed)) {
                Ok(r) => {
                    assert_eq!(r.demand, 14);
                    let d = to_decomposition(&s).unwrap();
                    assert!(verify(&d).is_ok());
                    assert_eq!(s.used.len(), s.host.edge_count());
                    ok += 1;
                }
                Err(e) => {
                    assert!(matches!(e, Error::Abort { .. }), "{e}");
                    assert!(s.audit().is_empty());
                }
            }
        }
        assert!(ok > 0);
    }

    #[test]
    fn oracle_built_state_completes() {
        // K_7 into seven K_{1,3}: the whole star is the demand
        let t = Tree::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let d = brute_decompose(&Graph::complete(7), &t, &OracleOpts::default()).unwrap().found.unwrap();
        let mut ok = 0;
        for seed in 0..20 {
            let tp = TreePartition::flat(&t, Case::S, vec![LeafStar { center: 0, leaves: vec![1, 2, 3] }]).unwrap();
            let mut s = from_copies(Graph::complete(7), t.clone(), tp, &d.copies, &[0]);
            if small_stars(&mut s, &mut seeded(seed)).is_ok() {
                assert!(verify(&to_decomposition(&s).unwrap()).is_ok());
                ok += 1;
            } else {
                assert!(s.audit().is_empty());
            }
        }
        assert!(ok > 0);
    }
}
