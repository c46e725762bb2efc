//! EMBED A_0: the reserve `G_0`, the digraph `J_0` and one MATCH per vertex
//! of `A** ∪ A'_0`.

use rand::Rng as _;

use super::{abort_on, key, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::partition::Part;
use crate::rng::Rng;

const STAGE: &str = "EMBED A0";

/// `vw ∈ B_a`: `v ∈ N_{J_0}(w) ∖ im φ_w` and every edge to an embedded
/// neighbour is an unused edge of `G_0`.
pub fn allowed_a0(s: &EmbeddingState, a: usize, v: usize, w: usize) -> bool {
    s.j0[w].contains(&v)
        && s.can_place(w, a, v)
        && s.tree
            .neighbors(a)
            .iter()
            .all(|&b| s.phi[w][b].is_none_or(|y| s.g0.contains(&key(v, y))))
}

/// Samples `G_0` and `J_0`.
pub fn sample_reserves(s: &mut EmbeddingState, rng: &mut Rng) -> Result<()> {
    let n = s.n();
    let (p0, p) = (s.cfg.p0, s.cfg.p);
    if !(p0 > 0.0 && p0 <= p) {
        return Err(Error::Config(format!("p0 = {p0} must lie in (0, p = {p}]")));
    }
    let q = p0 / p;
    s.g0 = s
        .host
        .edges()
        .into_iter()
        .filter(|&(x, y)| !s.is_used(x, y))
        .filter(|_| rng.gen_bool(q))
        .collect();
    for w in 0..n {
        let pw = s.pbar[w];
        let q = if pw > 0.0 { (p0 / pw).min(1.0) } else { 0.0 };
        s.j0[w] = (0..n).filter(|&x| s.in_xbar(w, x)).filter(|_| rng.gen_bool(q)).collect();
    }
    let g0 = s.g0.len() as f64;
    let jd = s.j0.iter().map(|j| j.len()).sum::<usize>() as f64 / n as f64;
    s.metric("g0_edges", g0);
    s.metric("j0_mean_outdegree", jd);
    Ok(())
}

pub fn embed_a0(s: &mut EmbeddingState, rng: &mut Rng) -> Result<()> {
    sample_reserves(s, rng)?;
    let n = s.n();
    let all: Vec<usize> = (0..n).collect();
    let order = s.in_order(|p| matches!(p, Part::AStarStar | Part::A0Prime));
    for a in order {
        let st: &EmbeddingState = s;
        let nl = st.tp.n_less(a);
        let z: Vec<(usize, usize)> = (0..n)
            .flat_map(|w| nl.iter().filter_map(move |&b| st.phi[w][b].map(|y| (y, w))))
            .collect();
        let got = st
            .match_copies(&all, &all, |v, w| allowed_a0(st, a, v, w), &z, rng, true)
            .map_err(|e| abort_on(STAGE, format!("a = {a}"), e))?;
        for (w, v) in got {
            s.set_phi(w, a, v)?;
        }
    }
    s.clock = TimeMarker::EmbedA0;
    Ok(())
}
