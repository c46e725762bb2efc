//! DIGRAPH: label matchings `M^h_∘`, the orientation of `G_1` and the
//! mutually exclusive reserves carved out of it.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{key, pairs, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::graph::circ_dist;
use crate::matching::{rainbow_matching, LabeledEdge, LabeledMultigraph};
use crate::nibble::{nibble_match, WeightedHypergraph};
use crate::partition::{Class, Label, Part, TreePartition};
use crate::rng::Rng;
use crate::tree::Case;

/// Class `g ∈ {hi, lo, no}` of a layer vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum G3 {
    Hi,
    Lo,
    No,
}

impl G3 {
    pub fn of(c: Class) -> G3 {
        match c {
            Class::Hi(_) => G3::Hi,
            Class::Lo => G3::Lo,
            Class::No => G3::No,
        }
    }
}

/// Reserve label on an arc of `G_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GRes {
    Ex,
    /// `G^{gg'}_{ii'}` with `i' < i`.
    Pair { i: usize, g: G3, i2: usize, g2: G3 },
    /// `G^g_{i0}`.
    Zero { i: usize, g: G3 },
    Prime(usize),
    /// `H^a_i`.
    H { a: usize, i: usize },
}

/// Label on a pair `xw` (read `x → w`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JRes {
    Hi { a: usize, i: usize },
    Lo(usize),
    No(usize),
    Ex,
    Prime(usize),
}

/// Where a tree vertex sits for the purpose of `G_uv`.
fn slot(tp: &TreePartition, u: usize) -> Option<(usize, Option<G3>)> {
    match tp.part[u] {
        Part::Layer(i) => Some((i, tp.class[u].map(G3::of))),
        p if p.in_a0() => Some((0, None)),
        _ => None,
    }
}

/// The reserve `G_uv` for `u` embedded after `v`.
pub fn g_uv(tp: &TreePartition, u: usize, v: usize) -> Option<GRes> {
    let (i, g) = slot(tp, u)?;
    let (i2, g2) = slot(tp, v)?;
    let g = g?;
    if i2 == 0 {
        Some(GRes::Zero { i, g })
    } else if i2 < i {
        Some(GRes::Pair { i, g, i2, g2: g2? })
    } else {
        None
    }
}

/// The reserve `J_u` of a layer vertex.
pub fn j_u(tp: &TreePartition, u: usize) -> Option<JRes> {
    let Part::Layer(i) = tp.part[u] else { return None };
    Some(match tp.class[u]? {
        Class::Hi(a) => JRes::Hi { a, i },
        Class::Lo => JRes::Lo(i),
        Class::No => JRes::No(i),
    })
}

/// Densities and the two probability tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub p1: f64,
    pub p_ex: f64,
    pub p_ex_prime: f64,
    pub alpha_hi: f64,
    /// `p^{gg'}_{ii'}` and `p^g_{i0}` for the class pairs that carry `F'`-edges.
    pub p_pairs: Vec<(GRes, f64)>,
    pub alpha_lo: Vec<f64>,
    pub alpha_no: Vec<f64>,
    pub p_max: f64,
    /// Fixed step vi probabilities, `H` excluded.
    pub vi: Vec<(GRes, f64)>,
    /// `2 α_hi / p_1`, to be divided by `p̄_w`.
    pub h_coeff: f64,
    /// Step vii numerators, divided by `p_xw`.
    pub vii: Vec<(JRes, f64)>,
    pub vi_max_sum: f64,
    pub vii_max_sum: f64,
    pub p_xw_min: f64,
}

/// Builds the tables and checks that both sum to at most one for every arc.
pub fn probability_tables(s: &EmbeddingState) -> Result<Tables> {
    let tp = &s.tp;
    let cfg = &s.cfg;
    let n = s.n() as f64;
    let p1 = cfg.p - cfg.p0;
    if p1 <= 0.0 {
        return Err(Error::Config(format!("p1 = p - p0 = {p1} is not positive")));
    }
    let i_star = tp.i_star();
    let mut counts: BTreeMap<GRes, usize> = BTreeMap::new();
    for &(u, v) in &tp.f_prime_edges {
        let (u, v) = if tp.pos[u] > tp.pos[v] { (u, v) } else { (v, u) };
        let (Some((iu, _)), Some((iv, _))) = (slot(tp, u), slot(tp, v)) else { continue };
        if iu == 0 {
            continue;
        }
        if iu == iv {
            return Err(Error::Internal(format!("F'-edge {u}{v} inside layer {iu}")));
        }
        let r = g_uv(tp, u, v).ok_or_else(|| Error::Internal(format!("no class for F'-edge {u}{v}")))?;
        *counts.entry(r).or_insert(0) += 1;
    }
    let p_pairs: Vec<(GRes, f64)> = counts
        .iter()
        .map(|(&r, &c)| (r, c as f64 / n + cfg.p_min))
        .collect();
    let alpha = |pick: fn(&crate::partition::LayerClasses) -> usize| -> Vec<f64> {
        tp.classes.iter().map(|c| pick(c) as f64 / n).collect()
    };
    let alpha_lo = alpha(|c| c.lo.len());
    let alpha_no = alpha(|c| c.no.len());
    let alpha_hi = cfg.big_delta().powf(0.2) * tp.m as f64 / n;
    let p_ex = tp.p_ex.len() as f64 / n;
    let mut vi: Vec<(GRes, f64)> = vec![(GRes::Ex, 2.0 * p_ex / p1)];
    vi.extend(p_pairs.iter().map(|&(r, p)| (r, 2.0 * p / p1)));
    vi.extend((1..=i_star).map(|i| (GRes::Prime(i), 2.0 * cfg.p_max / p1)));
    let pbar_min = s.pbar.iter().copied().fold(f64::INFINITY, f64::min);
    if pbar_min <= 0.0 {
        return Err(Error::Config("some copy has an empty X̄_w".into()));
    }
    let h_coeff = 2.0 * alpha_hi / p1;
    let vi_max_sum = vi.iter().map(|e| e.1).sum::<f64>() + if tp.m > 0 { h_coeff / pbar_min } else { 0.0 };
    if vi_max_sum > 1.0 {
        return Err(Error::Config(format!(
            "DIGRAPH step vi probabilities sum to {vi_max_sum:.4} > 1 (p1 = {p1}, {} reserve classes)",
            vi.len()
        )));
    }
    let p_xw_min = pbar_min * p1 - if tp.m > 0 { 2.0 * alpha_hi } else { 0.0 };
    if p_xw_min <= 0.0 {
        return Err(Error::Config(format!("p_xw can reach {p_xw_min:.4} ≤ 0")));
    }
    let fixed = alpha_lo.iter().sum::<f64>() + alpha_no.iter().sum::<f64>() + i_star as f64 * cfg.p_max;
    let p_ex_prime = if tp.case == Case::P {
        (7.0 / 8.0 - cfg.eta(true)) * p_ex
    } else {
        // strictly between p_ex and 1, shrunk to what the table can hold
        p_ex.sqrt().min(p_xw_min - fixed)
    };
    if p_ex > 0.0 && p_ex_prime < p_ex.min(p_xw_min - fixed) {
        return Err(Error::Config(format!("no room for J_ex: p'_ex = {p_ex_prime:.4} < p_ex = {p_ex:.4}")));
    }
    let mut vii: Vec<(JRes, f64)> = vec![(JRes::Ex, p_ex_prime.max(0.0))];
    for i in 1..=i_star {
        vii.push((JRes::Lo(i), alpha_lo[i - 1]));
        vii.push((JRes::No(i), alpha_no[i - 1]));
        vii.push((JRes::Prime(i), cfg.p_max));
    }
    let vii_max_sum = vii.iter().map(|e| e.1).sum::<f64>() / p_xw_min;
    if vii_max_sum > 1.0 + 1e-12 {
        return Err(Error::Config(format!("DIGRAPH step vii probabilities sum to {vii_max_sum:.4} > 1")));
    }
    Ok(Tables {
        p1,
        p_ex,
        p_ex_prime,
        alpha_hi,
        p_pairs,
        alpha_lo,
        alpha_no,
        p_max: cfg.p_max,
        vi,
        h_coeff,
        vii,
        vi_max_sum,
        vii_max_sum,
        p_xw_min,
    })
}

/// One edge `(y, w)` of some `M^h_∘`, with its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledPair {
    pub y: usize,
    pub w: usize,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigraphState {
    pub tables: Tables,
    /// `h` with `x ∈ U_h`.
    pub u_part: Vec<usize>,
    /// `M^h_{≥Λ}` and `M^h_{<Λ}`, indexed by `h`.
    pub m_geq: Vec<Vec<LabelledPair>>,
    pub m_lt: Vec<Vec<LabelledPair>>,
    /// Arcs `(y, x)` of the oriented `G_1`.
    pub g1: BTreeSet<(usize, usize)>,
    /// `w(yx)` and the label placing `yx` in `H*_{ai}`.
    #[serde(with = "pairs")]
    pub wmark: BTreeMap<(usize, usize), (usize, Label)>,
    #[serde(with = "pairs")]
    pub gres: BTreeMap<(usize, usize), Vec<GRes>>,
    /// Keyed by `(x, w)`.
    #[serde(with = "pairs")]
    pub jres: BTreeMap<(usize, usize), Vec<JRes>>,
    pub j_ex0: BTreeSet<(usize, usize)>,
    /// Twisted arcs `y x^-`.
    pub j_exk: BTreeSet<(usize, usize)>,
}

impl DigraphState {
    pub fn g_label(&self, y: usize, x: usize) -> Option<GRes> {
        self.gres.get(&(y, x)).and_then(|v| v.first().copied())
    }

    pub fn j_label(&self, x: usize, w: usize) -> Option<JRes> {
        self.jres.get(&(x, w)).and_then(|v| v.first().copied())
    }

    /// `(x, w)` pairs carrying `r`.
    pub fn j_pairs(&self, r: JRes) -> Vec<(usize, usize)> {
        self.jres
            .iter()
            .filter(|(_, v)| v.contains(&r))
            .map(|(&k, _)| k)
            .collect()
    }

    /// Undirected edges of `G'_i`.
    pub fn prime_edges(&self, i: usize) -> BTreeSet<(usize, usize)> {
        self.gres
            .iter()
            .filter(|(_, v)| v.contains(&GRes::Prime(i)))
            .map(|(&(y, x), _)| key(y, x))
            .collect()
    }

    pub fn audit(&self, j0: &[BTreeSet<usize>]) -> Vec<String> {
        let mut bad = Vec::new();
        for (&(y, x), v) in &self.gres {
            if v.len() > 1 {
                bad.push(format!("arc {y}{x} carries {} reserve labels", v.len()));
            }
            if !self.g1.contains(&(y, x)) {
                bad.push(format!("reserve label on {y}{x} outside G_1"));
            }
            if let Some(GRes::H { a, i }) = v.first() {
                match self.wmark.get(&(y, x)) {
                    Some((_, l)) if l.a == *a && l.i == *i => {}
                    _ => bad.push(format!("arc {y}{x} in H^{a}_{i} without a matching w(yx)")),
                }
            }
        }
        for (&(x, w), v) in &self.jres {
            if v.len() > 1 {
                bad.push(format!("pair {x}{w} carries {} J-labels", v.len()));
            }
            let hi = matches!(v.first(), Some(JRes::Hi { .. }));
            if !hi && j0.get(w).is_some_and(|s| s.contains(&x)) {
                bad.push(format!("pair {x}{w} is in J_0 and in J'"));
            }
        }
        for &(y, x) in self.j_ex0.iter() {
            if self.g_label(y, x) != Some(GRes::Ex) {
                bad.push(format!("J^0_ex arc {y}{x} not in G_ex"));
            }
        }
        bad
    }
}

/// Edges `(φ_w(a), w)` for `w` in block `k`.
fn block_edges(s: &EmbeddingState, a: usize, k: Option<usize>, label: Label) -> Vec<LabelledPair> {
    (0..s.n())
        .filter(|&w| s.blocks.w_block[w] == k)
        .filter_map(|w| s.phi[w][a].map(|y| LabelledPair { y, w, label }))
        .collect()
}

fn union_find_root(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

pub fn digraph_allocate(s: &mut EmbeddingState, rng: &mut Rng) -> Result<()> {
    let tables = probability_tables(s)?;
    s.metric("table_vi_sum", tables.vi_max_sum);
    s.metric("table_vii_sum", tables.vii_max_sum);
    let n = s.n();
    let m = s.tp.m;
    let mh = m.max(1);
    let labels = s.labels.clone();
    let mut m_geq: Vec<Vec<LabelledPair>> = vec![Vec::new(); mh];
    let mut m_lt: Vec<Vec<LabelledPair>> = vec![Vec::new(); mh];
    if m > 0 {
        let shifts = s.shifts.clone();
        let xa = |a: usize| shifts[&a];
        // steps i, ii
        let above = &labels.above;
        let mut edges = Vec::new();
        for (li, l) in above.iter().enumerate() {
            for w in 0..m {
                edges.push(LabeledEdge { x: (xa(l.a) + w) % m, y: w, label: li });
            }
        }
        let rb = rainbow_matching(&LabeledMultigraph { x_size: m, y_size: m, edges })?;
        s.metric("rainbow_deficit", rb.deficit as f64);
        for e in &rb.edges {
            let l = above[e.label];
            for (h, mg) in m_geq.iter_mut().enumerate() {
                mg.extend(block_edges(s, l.a, Some((e.y + h) % m), l));
            }
        }
        // step iii
        let below = &labels.below;
        let mut hedges = Vec::new();
        let mut meta = Vec::new();
        for (li, l) in below.iter().enumerate() {
            for w in 0..m {
                let v = (xa(l.a) + w) % m;
                hedges.push(vec![v, m + w, 2 * m + li]);
                meta.push((w, *l));
            }
        }
        if !hedges.is_empty() {
            let k = hedges.len();
            let h = WeightedHypergraph::new(3 * m.max(1) + below.len(), 3, hedges, vec![1.0 / m as f64; k])?;
            let out = nibble_match(&h, &[], rng, s.cfg.nibble_rounds(), s.cfg.bite)?;
            s.metric("label_nibble_edges", out.matching.len() as f64);
            for &e in &out.matching {
                let (w, l) = meta[e];
                for (hh, ml) in m_lt.iter_mut().enumerate() {
                    ml.extend(block_edges(s, l.a, Some((w + hh) % m), l));
                }
            }
        }
        // step iv, M^0_a copies
        for (mset, ls) in [(&mut m_geq, above), (&mut m_lt, below)] {
            for (hh, l) in ls.iter().enumerate().take(m) {
                mset[hh].extend(block_edges(s, l.a, None, *l));
            }
        }
    }
    let u_part: Vec<usize> = (0..n).map(|_| rng.gen_range(0..mh)).collect();
    // G_1: unused, outside G_0, far apart in the cyclic order
    let close = 3 * s.cfg.d;
    let mut g1 = BTreeSet::new();
    let mut inn: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, y) in s.host.edges() {
        if s.is_used(x, y) || s.g0.contains(&(x, y)) {
            continue;
        }
        if circ_dist(n, s.order.label(x), s.order.label(y)) <= close {
            continue;
        }
        let (a, b) = if rng.gen_bool(0.5) { (x, y) } else { (y, x) };
        g1.insert((a, b));
        inn[b].push(a);
    }
    s.metric("g1_arcs", g1.len() as f64);
    // step v
    let index = |ms: &Vec<Vec<LabelledPair>>| -> Vec<BTreeMap<usize, (usize, Label)>> {
        ms.iter().map(|v| v.iter().map(|p| (p.y, (p.w, p.label))).collect()).collect()
    };
    let geq_y = index(&m_geq);
    let lt_y = index(&m_lt);
    let p_geq = labels.p_above();
    let mut wmark = BTreeMap::new();
    for x in 0..n {
        let h = u_part[x];
        let ys = &inn[x];
        let k = ys.len();
        let mut parent: Vec<usize> = (0..k).collect();
        let mut by_w_geq: BTreeMap<usize, usize> = BTreeMap::new();
        let mut by_w_lt: BTreeMap<usize, usize> = BTreeMap::new();
        for (idx, y) in ys.iter().enumerate() {
            if let Some(&(w, _)) = geq_y[h].get(y) {
                by_w_geq.insert(w, idx);
            }
            if let Some(&(w, _)) = lt_y[h].get(y) {
                by_w_lt.insert(w, idx);
            }
        }
        for (w, &i1) in &by_w_geq {
            if let Some(&i2) = by_w_lt.get(w) {
                if i1 != i2 && s.in_xbar(*w, x) {
                    let (r1, r2) = (union_find_root(&mut parent, i1), union_find_root(&mut parent, i2));
                    parent[r1.max(r2)] = r1.min(r2);
                }
            }
        }
        let mut colour: BTreeMap<usize, bool> = BTreeMap::new();
        for (idx, &y) in ys.iter().enumerate() {
            let r = union_find_root(&mut parent, idx);
            let hi = *colour.entry(r).or_insert_with(|| rng.gen_bool(p_geq.clamp(0.0, 1.0)));
            let src = if hi { &geq_y[h] } else { &lt_y[h] };
            if let Some(&(w, l)) = src.get(&y) {
                wmark.insert((y, x), (w, l));
            }
        }
    }
    s.metric("h_star_arcs", wmark.len() as f64);
    // step vi
    let mut gres: BTreeMap<(usize, usize), Vec<GRes>> = BTreeMap::new();
    let mut jres: BTreeMap<(usize, usize), Vec<JRes>> = BTreeMap::new();
    for &(y, x) in &g1 {
        let mut u: f64 = rng.gen();
        let mut pick = None;
        for &(r, p) in &tables.vi {
            if u < p {
                pick = Some(r);
                break;
            }
            u -= p;
        }
        if pick.is_none() {
            if let Some(&(w, l)) = wmark.get(&(y, x)) {
                if s.in_xbar(w, x) && u < tables.h_coeff / s.pbar[w] {
                    pick = Some(GRes::H { a: l.a, i: l.i });
                    jres.entry((x, w)).or_default().push(JRes::Hi { a: l.a, i: l.i });
                }
            }
        }
        if let Some(r) = pick {
            gres.entry((y, x)).or_default().push(r);
        }
    }
    // step vii
    let hi_pairs: BTreeSet<(usize, usize)> = wmark.iter().map(|(&(_, x), &(w, _))| (x, w)).collect();
    for w in 0..n {
        for x in 0..n {
            if !s.in_xbar(w, x) || s.j0[w].contains(&x) || jres.contains_key(&(x, w)) {
                continue;
            }
            let hi = if hi_pairs.contains(&(x, w)) && m > 0 { 1.0 } else { 0.0 };
            let pxw = s.pbar[w] * tables.p1 - 2.0 * tables.alpha_hi * hi;
            let mut u: f64 = rng.gen::<f64>() * pxw;
            for &(r, p) in &tables.vii {
                if u < p {
                    jres.entry((x, w)).or_default().push(r);
                    break;
                }
                u -= p;
            }
        }
    }
    // step viii
    let mut j_ex0 = BTreeSet::new();
    let mut j_exk = BTreeSet::new();
    if s.tp.case == Case::P {
        for (&(y, x), r) in &gres {
            if r.first() == Some(&GRes::Ex) {
                if rng.gen_bool(7.0 / 8.0) {
                    j_ex0.insert((y, x));
                } else {
                    j_exk.insert((y, s.order.pred(x)));
                }
            }
        }
    }
    let count = |f: &dyn Fn(&GRes) -> bool| gres.values().filter(|v| v.first().is_some_and(f)).count() as f64;
    s.metric("g_ex_arcs", count(&|r| *r == GRes::Ex));
    s.metric("h_arcs", count(&|r| matches!(r, GRes::H { .. })));
    s.metric("j_pairs", jres.len() as f64);
    s.dg = Some(DigraphState {
        tables,
        u_part,
        m_geq,
        m_lt,
        g1,
        wmark,
        gres,
        jres,
        j_ex0,
        j_exk,
    });
    s.clock = TimeMarker::Digraph;
    Ok(())
}
