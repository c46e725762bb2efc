//! APPROXIMATE DECOMPOSITION: the hypergraphs `H_i`, their nibble matchings
//! and the leftover MATCH per layer vertex.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;

use super::digraph::{g_uv, j_u, GRes, JRes};
use super::{abort_on, key, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::nibble::{nibble_match, WeightedHypergraph};
use crate::partition::{Class, Part};
use crate::rng::Rng;

const STAGE: &str = "APPROXIMATE DECOMPOSITION";

/// Vertex of `H_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HVert {
    Uw(usize, usize),
    Xw(usize, usize),
    Arc(usize, usize),
}

/// `H_i` with both weightings and the incremental degree tallies.
#[derive(Debug, Clone)]
pub struct HiBuild {
    pub i: usize,
    pub verts: Vec<HVert>,
    /// `(w, u, x)` per edge.
    pub labels: Vec<(usize, usize, usize)>,
    pub edges: Vec<Vec<usize>>,
    pub omega: Vec<f64>,
    pub omega_prime: Vec<f64>,
    /// `ω(H_i[v])` accumulated while edges were added.
    pub deg_incremental: Vec<f64>,
}

/// `|A_u|^{-1} ∏ p_uv^{-1}`.
pub fn omega_weight(a_size: usize, densities: &[f64]) -> f64 {
    densities.iter().fold(1.0 / a_size as f64, |w, p| w / p)
}

impl HiBuild {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `ω(H_i[v])` summed afresh from the edge list.
    pub fn deg_scratch(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.verts.len()];
        for (e, vs) in self.edges.iter().enumerate() {
            for &v in vs {
                d[v] += self.omega[e];
            }
        }
        d
    }

    pub fn deg_prime(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.verts.len()];
        for (e, vs) in self.edges.iter().enumerate() {
            for &v in vs {
                d[v] += self.omega_prime[e];
            }
        }
        d
    }

    pub fn hypergraph(&self) -> Result<WeightedHypergraph> {
        let r = self.edges.iter().map(|e| e.len()).max().unwrap_or(1);
        WeightedHypergraph::new(self.verts.len(), r, self.edges.clone(), self.omega_prime.clone())
    }
}

/// Density `p_uv` read from the tables.
fn p_of(s: &EmbeddingState, r: GRes) -> Result<f64> {
    let dg = s.dg.as_ref().ok_or_else(|| Error::Order("DIGRAPH has not run".into()))?;
    dg.tables
        .p_pairs
        .iter()
        .find(|(g, _)| *g == r)
        .map(|&(_, p)| p)
        .ok_or_else(|| Error::Internal(format!("no density for {r:?}")))
}

pub fn build_hi(s: &EmbeddingState, i: usize) -> Result<HiBuild> {
    let dg = s.dg.as_ref().ok_or_else(|| Error::Order("DIGRAPH has not run".into()))?;
    let mut by_j: BTreeMap<JRes, Vec<(usize, usize)>> = BTreeMap::new();
    for (&(x, w), v) in &dg.jres {
        if let Some(&r) = v.first() {
            by_j.entry(r).or_default().push((x, w));
        }
    }
    let mut b = HiBuild {
        i,
        verts: Vec::new(),
        labels: Vec::new(),
        edges: Vec::new(),
        omega: Vec::new(),
        omega_prime: Vec::new(),
        deg_incremental: Vec::new(),
    };
    let mut ids: HashMap<HVert, usize> = HashMap::new();
    let mut id = |b: &mut HiBuild, v: HVert| -> usize {
        *ids.entry(v).or_insert_with(|| {
            b.verts.push(v);
            b.deg_incremental.push(0.0);
            b.verts.len() - 1
        })
    };
    let layer = s.in_order(|p| p == Part::Layer(i));
    for u in layer {
        let Some(r) = j_u(&s.tp, u) else { continue };
        let a_size = s.tp.class_set(u).map_or(0, |c| c.len());
        if a_size == 0 {
            return Err(Error::Internal(format!("layer vertex {u} has an empty class")));
        }
        let nl = s.tp.n_less(u);
        let mut dens = Vec::with_capacity(nl.len());
        let mut res = Vec::with_capacity(nl.len());
        for &v in &nl {
            let g = g_uv(&s.tp, u, v).ok_or_else(|| Error::Internal(format!("no reserve for {u}{v}")))?;
            dens.push(p_of(s, g)?);
            res.push(g);
        }
        let centre = match s.tp.class[u] {
            Some(Class::Hi(a)) => Some(a),
            _ => None,
        };
        let wgt = omega_weight(a_size, &dens);
        let Some(pairs) = by_j.get(&r) else { continue };
        'pair: for &(x, w) in pairs {
            if s.phi[w][u].is_some() || s.preimage(w, x).is_some() {
                continue;
            }
            let mut arcs = Vec::with_capacity(nl.len());
            for (k, &v) in nl.iter().enumerate() {
                let Some(y) = s.phi[w][v] else { continue 'pair };
                if dg.g_label(y, x) != Some(res[k]) || s.is_used(x, y) {
                    continue 'pair;
                }
                arcs.push((y, x));
            }
            if let Some(a) = centre {
                match s.phi[w][a] {
                    Some(y) if s.host.has_edge(x, y) && !s.is_used(x, y) => {}
                    _ => continue 'pair,
                }
            }
            let mut e = vec![id(&mut b, HVert::Uw(u, w)), id(&mut b, HVert::Xw(x, w))];
            e.extend(arcs.into_iter().map(|(y, x)| id(&mut b, HVert::Arc(y, x))));
            for &v in &e {
                b.deg_incremental[v] += wgt;
            }
            b.edges.push(e);
            b.omega.push(wgt);
            b.labels.push((w, u, x));
        }
    }
    let eps = s.cfg.eps_i(i);
    b.omega_prime = b
        .edges
        .iter()
        .zip(&b.omega)
        .map(|(e, &w)| {
            let q = e.iter().map(|&v| b.deg_incremental[v]).fold(1.0, f64::max);
            (1.0 - 0.5 * eps) * w / q
        })
        .collect();
    Ok(b)
}

/// Observational statistics of `H_i`; never gates execution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HiMetrics {
    pub edges: usize,
    pub max_omega_prime_degree: f64,
    pub min_uw_omega_prime_degree: f64,
    pub mean_uw_omega_degree: f64,
    pub max_incremental_error: f64,
}

pub fn instrument(b: &HiBuild) -> HiMetrics {
    if b.edges.is_empty() {
        return HiMetrics::default();
    }
    let dp = b.deg_prime();
    let scratch = b.deg_scratch();
    let uw: Vec<usize> = (0..b.verts.len()).filter(|&v| matches!(b.verts[v], HVert::Uw(..))).collect();
    HiMetrics {
        edges: b.edges.len(),
        max_omega_prime_degree: dp.iter().copied().fold(0.0, f64::max),
        min_uw_omega_prime_degree: uw.iter().map(|&v| dp[v]).fold(f64::INFINITY, f64::min),
        mean_uw_omega_degree: uw.iter().map(|&v| scratch[v]).sum::<f64>() / uw.len().max(1) as f64,
        max_incremental_error: scratch
            .iter()
            .zip(&b.deg_incremental)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    }
}

/// Nibble matching on `H_i` and the leftover MATCH for layer `i`.
pub fn approx_layer(s: &mut EmbeddingState, i: usize, rng: &mut Rng) -> Result<HiMetrics> {
    let b = build_hi(s, i)?;
    let met = instrument(&b);
    s.clock = TimeMarker::Approx(i);
    s.metric("hi_edges", met.edges as f64);
    s.metric("hi_max_omega_prime_degree", met.max_omega_prime_degree);
    s.metric("hi_mean_uw_omega_degree", met.mean_uw_omega_degree);
    if !b.edges.is_empty() {
        let h = b.hypergraph()?;
        let out = nibble_match(&h, &[], rng, s.cfg.nibble_rounds(), s.cfg.bite)?;
        for &e in &out.matching {
            let (w, u, x) = b.labels[e];
            let want = s.embedded_neighbors(w, u).len();
            let before = s.used.len();
            s.set_phi(w, u, x)?;
            if s.used.len() - before != want {
                return Err(Error::Internal(format!("copy {w}: placing {u} consumed the wrong edge count")));
            }
        }
        s.metric("hi_matched", out.matching.len() as f64);
    }
    leftover(s, i, rng)?;
    s.clock = TimeMarker::Leftover(i);
    Ok(met)
}

/// `vw ∈ B_a` in the leftover step.
pub fn allowed_leftover(s: &EmbeddingState, i: usize, a: usize, v: usize, w: usize, prime: &std::collections::BTreeSet<(usize, usize)>) -> bool {
    let Some(dg) = s.dg.as_ref() else { return false };
    dg.j_label(v, w) == Some(JRes::Prime(i))
        && s.can_place(w, a, v)
        && s.tree
            .neighbors(a)
            .iter()
            .all(|&b| s.phi[w][b].is_none_or(|y| prime.contains(&key(v, y))))
}

fn leftover(s: &mut EmbeddingState, i: usize, rng: &mut Rng) -> Result<()> {
    let n = s.n();
    let prime = s.dg.as_ref().map(|d| d.prime_edges(i)).unwrap_or_default();
    let layer = s.in_order(|p| p == Part::Layer(i));
    let mut left = 0usize;
    for a in layer {
        let wa: Vec<usize> = (0..n).filter(|&w| s.phi[w][a].is_none()).collect();
        if wa.is_empty() {
            continue;
        }
        left += wa.len();
        let mut va: Vec<usize> = sample(rng, n, wa.len()).into_vec();
        va.sort_unstable();
        let st: &EmbeddingState = s;
        let z: Vec<(usize, usize)> = wa
            .iter()
            .flat_map(|&w| st.embedded_neighbors(w, a).into_iter().map(move |b| (st.phi[w][b].unwrap(), w)))
            .collect();
        let got = st
            .match_copies(&wa, &va, |v, w| allowed_leftover(st, i, a, v, w, &prime), &z, rng, true)
            .map_err(|e| abort_on(STAGE, format!("leftover i = {i}, a = {a}"), e))?;
        for (w, v) in got {
            s.set_phi(w, a, v)?;
        }
    }
    s.metric("leftover_copies", left as f64);
    Ok(())
}

pub fn approx_decomposition(s: &mut EmbeddingState, rng: &mut Rng) -> Result<Vec<HiMetrics>> {
    if s.dg.is_none() {
        return Err(Error::Order("APPROXIMATE DECOMPOSITION needs DIGRAPH".into()));
    }
    let mut out = Vec::new();
    for i in 1..=s.tp.i_star() {
        out.push(approx_layer(s, i, rng)?);
    }
    Ok(out)
}
