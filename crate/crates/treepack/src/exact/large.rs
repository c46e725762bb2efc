//! LARGE STARS: embed everything but the big leaf stars by MATCH on a
//! three-way split of the host, orient the rest and push arcs around until
//! every centre image has exactly its number of leaves.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::orient::move_budget;
use super::free_graph;
use crate::embed::{abort_on, EmbeddingState, TimeMarker};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rng::Rng;
use crate::tree::{LeafStar, Tree};

const STAGE: &str = "LARGE STARS";

/// Maximal leaf stars with at least `lambda` leaves.
pub fn large_leaf_stars(t: &Tree, lambda: f64) -> Vec<LeafStar> {
    (0..t.n())
        .filter_map(|c| {
            let leaves: Vec<usize> = t.neighbors(c).iter().copied().filter(|&l| t.is_leaf(l)).collect();
            // a lone edge has two leaves and no centre
            (!t.is_leaf(c) && leaves.len() as f64 >= lambda).then_some(LeafStar { center: c, leaves })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeStarsReport {
    pub centres: Vec<usize>,
    pub start_sigma: usize,
    pub moves: usize,
    pub trace: Vec<usize>,
    /// Vertices of `F` after whose MATCHes `J` was checked for 2-cycles.
    pub j_checks: usize,
    pub j_arcs: usize,
}

/// Split of the host: `class[v] = a` for `v ∈ U^a`, `part[v] = i` for `v ∈ U_i`.
struct Split {
    class: Vec<usize>,
    part: Vec<usize>,
}

fn split(n: usize, stars: &[LeafStar], w_part: &[usize], rng: &mut Rng) -> Split {
    let total: usize = stars.iter().map(|s| s.leaves.len()).sum();
    let mut class = vec![0; n];
    let mut part = vec![0; n];
    for v in 0..n {
        let mut r = rng.gen_range(0..total);
        for st in stars {
            if r < st.leaves.len() {
                class[v] = st.center;
                break;
            }
            r -= st.leaves.len();
        }
        part[v] = rng.gen_range(0..3);
    }
    let want: Vec<usize> = (0..3).map(|i| w_part.iter().filter(|&&p| p == i).count()).collect();
    loop {
        let have: Vec<usize> = (0..3).map(|i| part.iter().filter(|&&p| p == i).count()).collect();
        let Some(from) = (0..3).find(|&i| have[i] > want[i]) else { break };
        let to = (0..3).find(|&i| have[i] < want[i]).expect("sizes add up");
        let pool: Vec<usize> = (0..n).filter(|&v| part[v] == from).collect();
        part[*pool.choose(rng).expect("over-full part")] = to;
    }
    Split { class, part }
}

/// Arcs of `D` with the copy each one counts for.
struct Oriented {
    label: HashMap<(usize, usize), usize>,
    d: Digraph,
    /// `heads[w][v]`: arcs of `D_w` into `v`.
    heads: Vec<Vec<u32>>,
    /// `out[(w, p)]`: arcs of `D_w` out of `p`.
    out: HashMap<(usize, usize), usize>,
}

impl Oriented {
    fn add(&mut self, p: usize, q: usize, w: usize) {
        self.d.add_arc(p, q).expect("in range");
        self.label.insert((p, q), w);
        self.heads[w][q] += 1;
        *self.out.entry((w, p)).or_default() += 1;
    }

    fn remove(&mut self, p: usize, q: usize) -> usize {
        self.d.remove_arc(p, q);
        let w = self.label.remove(&(p, q)).expect("arc present");
        self.heads[w][q] -= 1;
        *self.out.get_mut(&(w, p)).expect("counted") -= 1;
        w
    }

    fn out_of(&self, w: usize, p: usize) -> usize {
        self.out.get(&(w, p)).copied().unwrap_or(0)
    }
}

pub fn large_stars(s: &mut EmbeddingState, rng: &mut Rng) -> Result<LargeStarsReport> {
    let n = s.n();
    let t = s.tree.clone();
    if s.phi.iter().flatten().any(Option::is_some) {
        return Err(Error::Input("LARGE STARS starts from an empty embedding".into()));
    }
    let lambda = s.cfg.big_lambda();
    let stars = large_leaf_stars(&t, lambda);
    if stars.is_empty() {
        return Err(Error::Input(format!("no leaf star with at least {lambda:.1} leaves")));
    }
    let mut star_of = vec![None; t.n()];
    let mut is_leaf = vec![false; t.n()];
    for (k, st) in stars.iter().enumerate() {
        star_of[st.center] = Some(k);
        st.leaves.iter().for_each(|&l| is_leaf[l] = true);
    }
    let s_plus: Vec<bool> = (0..t.n()).map(|v| t.degree(v) as f64 >= lambda).collect();
    let w_part: Vec<usize> = (0..n).map(|w| w % 3).collect();
    let sp = split(n, &stars, &w_part, rng);
    let in_u = |i: usize| -> Vec<usize> { (0..n).filter(|&v| sp.part[v] == i).collect() };
    let in_w = |i: usize| -> Vec<usize> { (0..n).filter(|&w| w_part[w] == i).collect() };

    // F in BFS order from a centre; every later vertex has one earlier neighbour
    let u0 = stars[0].center;
    let mut order = Vec::new();
    let mut parent = vec![usize::MAX; t.n()];
    let mut seen = vec![false; t.n()];
    seen[u0] = true;
    order.push(u0);
    let mut k = 0;
    while k < order.len() {
        let u = order[k];
        k += 1;
        for &v in t.neighbors(u) {
            if !seen[v] && !is_leaf[v] {
                seen[v] = true;
                parent[v] = u;
                order.push(v);
            }
        }
    }

    let mut j = Digraph::new(n);
    // φ_w(u0): a random bijection W_i → U_i
    for i in 0..3 {
        let mut us = in_u(i);
        us.shuffle(rng);
        for (w, x) in in_w(i).into_iter().zip(us) {
            s.set_phi(w, u0, x)?;
        }
    }
    add_j(s, &mut j, &sp, &star_of, u0)?;
    let mut j_checks = 1;

    for &a in &order[1..] {
        let am = parent[a];
        for i in 0..3 {
            let mut ws = in_w(i);
            if !s_plus[a] {
                let mut vs = in_u((i + 2) % 3);
                // |U_{i-1}| and |W_i| may differ by one
                while vs.len() < ws.len() {
                    let st: &EmbeddingState = s;
                    let pairs: Vec<(usize, usize)> = ws
                        .iter()
                        .flat_map(|&w| vs.iter().map(move |&v| (v, w)))
                        .filter(|&(v, w)| st.can_place(w, a, v))
                        .collect();
                    let &(v, w) = pairs
                        .choose(rng)
                        .ok_or_else(|| Error::abort(STAGE, format!("vertex {a}: no edge for a spare copy")))?;
                    s.set_phi(w, a, v)?;
                    ws.retain(|&x| x != w);
                }
                while vs.len() > ws.len() {
                    let r = rng.gen_range(0..vs.len());
                    vs.swap_remove(r);
                }
                let z: Vec<(usize, usize)> = ws.iter().map(|&w| (s.phi[w][am].expect("parent first"), w)).collect();
                let st: &EmbeddingState = s;
                let m = st
                    .match_copies(&ws, &vs, |v, w| st.can_place(w, a, v), &z, rng, false)
                    .map_err(|e| abort_on(STAGE, format!("vertex {a}, part {}", i + 1), e))?;
                for (w, v) in m {
                    s.set_phi(w, a, v)?;
                }
            } else {
                let vs = in_u(i);
                let mut z = Vec::new();
                for &w in &ws {
                    z.push((s.phi[w][am].expect("parent first"), w));
                    if star_of[a].is_some() {
                        z.extend(vs.iter().filter(|&&x| sp.class[x] == a && s.preimage(w, x).is_some()).map(|&x| (x, w)));
                    }
                }
                let st: &EmbeddingState = s;
                let jr = &j;
                let allowed = |v: usize, w: usize| -> bool {
                    if !st.can_place(w, a, v) {
                        return false;
                    }
                    // v would point at its class-a images; none may point back
                    if star_of[a].is_some()
                        && jr.in_neighbors(v).iter().any(|&y| sp.class[y] == a && st.preimage(w, y).is_some())
                    {
                        return false;
                    }
                    match st.phi[w][sp.class[v]] {
                        Some(c) => !jr.has_arc(v, c),
                        None => true,
                    }
                };
                let m = st
                    .match_copies(&ws, &vs, allowed, &z, rng, false)
                    .map_err(|e| abort_on(STAGE, format!("vertex {a}, part {}", i + 1), e))?;
                for (w, v) in m {
                    s.set_phi(w, a, v)?;
                }
            }
        }
        add_j(s, &mut j, &sp, &star_of, a)?;
        j_checks += 1;
    }

    // orientation, forced against J
    let free = free_graph(s);
    let mut centre_copy: HashMap<(usize, usize), usize> = HashMap::new();
    for w in 0..n {
        for st in &stars {
            centre_copy.insert((st.center, s.phi[w][st.center].expect("centres are in F")), w);
        }
    }
    let label_of = |p: usize, q: usize| centre_copy[&(sp.class[q], p)];
    let mut o = Oriented { label: HashMap::new(), d: Digraph::new(n), heads: vec![vec![0; n]; n], out: HashMap::new() };
    for (x, y) in free.edges() {
        let (p, q) = if j.has_arc(x, y) {
            (y, x)
        } else if j.has_arc(y, x) || rng.gen_bool(0.5) {
            (x, y)
        } else {
            (y, x)
        };
        o.add(p, q, label_of(p, q));
    }

    let sigma = |o: &Oriented| -> usize {
        let mut t = 0;
        for w in 0..n {
            for st in &stars {
                t += o.out_of(w, s.phi[w][st.center].expect("set")).abs_diff(st.leaves.len());
            }
        }
        t
    };
    let mut cur = sigma(&o);
    let mut trace = vec![cur];
    let budget = move_budget(n);
    let mut moves = 0;
    while cur > 0 {
        let mut def = Vec::new();
        let mut sur = Vec::new();
        for w in 0..n {
            for st in &stars {
                let u = s.phi[w][st.center].expect("set");
                let d = o.out_of(w, u);
                if d < st.leaves.len() {
                    def.push((u, w));
                } else if d > st.leaves.len() {
                    sur.push((u, w));
                }
            }
        }
        let mut done = false;
        for _ in 0..n {
            let &(u, w) = def.choose(rng).expect("positive Σ has a deficit");
            let &(u2, w2) = sur.choose(rng).expect("positive Σ has a surplus");
            if u == u2 {
                continue;
            }
            if let Some(mv) = find_move(s, &o, (u, w), (u2, w2), rng) {
                apply_move(&mut o, (u, w), u2, mv);
                done = true;
                break;
            }
        }
        if !done || moves >= budget {
            return Err(Error::abort(STAGE, format!("no xvz-move left at Σ = {cur} after {moves} moves")));
        }
        moves += 1;
        let next = sigma(&o);
        if next + 2 != cur {
            return Err(Error::Internal(format!("xvz-move took Σ from {cur} to {next}")));
        }
        cur = next;
        trace.push(cur);
    }

    // leaves go to the heads of D_w out of each centre image
    for w in 0..n {
        for st in &stars {
            let u = s.phi[w][st.center].expect("set");
            let hs: Vec<usize> = o.d.out_neighbors(u).iter().copied().filter(|&q| o.label[&(u, q)] == w).collect();
            for (&l, &q) in st.leaves.iter().zip(&hs) {
                s.set_phi(w, l, q)?;
            }
        }
    }
    s.metric("large_star_sigma", trace[0] as f64);
    s.metric("xvz_moves", moves as f64);
    s.clock = TimeMarker::Exact;
    Ok(LargeStarsReport {
        centres: stars.iter().map(|s| s.center).collect(),
        start_sigma: trace[0],
        moves,
        trace,
        j_checks,
        j_arcs: j.arc_count(),
    })
}

/// J arcs created by embedding `a` in every copy. A 2-cycle is a bug.
fn add_j(s: &EmbeddingState, j: &mut Digraph, sp: &Split, star_of: &[Option<usize>], a: usize) -> Result<()> {
    let n = s.n();
    let mut new = Vec::new();
    for w in 0..n {
        let x = s.phi[w][a].expect("just embedded");
        let b = sp.class[x];
        if b != a {
            if let Some(y) = s.phi[w][b] {
                new.push((y, x));
            }
        }
        if star_of[a].is_some() {
            for y in (0..n).filter(|&y| y != x && sp.class[y] == a && s.preimage(w, y).is_some()) {
                new.push((x, y));
            }
        }
    }
    for (p, q) in new {
        if j.has_arc(q, p) {
            return Err(Error::Internal(format!("J has the 2-cycle {p}{q}")));
        }
        j.add_arc(p, q)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Move {
    x: usize,
    v: usize,
    z: usize,
}

/// A random `xvz`-move taking an arc from `u2` in copy `w2` to `u` in copy `w`.
/// Every copy that gains a head must not hold it already, as a vertex of
/// `F` or as another head, once the four old arcs are gone.
fn find_move(
    s: &EmbeddingState,
    o: &Oriented,
    (u, w): (usize, usize),
    (u2, w2): (usize, usize),
    rng: &mut Rng,
) -> Option<Move> {
    let fixed = |c: usize, q: usize| s.preimage(c, q).is_some();
    let mut xv = Vec::new();
    for &x in o.d.in_neighbors(u) {
        if x == u2 || fixed(w, x) {
            continue;
        }
        let wx = o.label[&(x, u)];
        for &v in o.d.in_neighbors(x) {
            if v == u || v == u2 || !o.d.has_arc(u2, v) || fixed(wx, v) || fixed(o.label[&(v, x)], u2) {
                continue;
            }
            xv.push((x, v));
        }
    }
    xv.shuffle(rng);
    for (x, v) in xv {
        let (wx, wv, wu2) = (o.label[&(x, u)], o.label[&(v, x)], o.label[&(u2, v)]);
        let gone = [(wx, u), (wv, x), (wu2, v), (w2, 0)];
        let zs: Vec<usize> = o
            .d
            .out_neighbors(u2)
            .iter()
            .copied()
            .filter(|&z| {
                if z == u || z == x || z == v || o.label[&(u2, z)] != w2 || fixed(wu2, z) {
                    return false;
                }
                let mut gone = gone;
                gone[3].1 = z;
                let gained = [(w, x), (wx, v), (wv, u2), (wu2, z)];
                gained.iter().all(|&(c, q)| {
                    let had = o.heads[c][q] as usize - gone.iter().filter(|&&g| g == (c, q)).count();
                    had + gained.iter().filter(|&&g| g == (c, q)).count() <= 1
                })
            })
            .collect();
        if let Some(&z) = zs.choose(rng) {
            return Some(Move { x, v, z });
        }
    }
    None
}

/// Reverses `u2 → v → x → u` and hands `u2 → z` to the copy that owned `u2 → v`.
fn apply_move(o: &mut Oriented, (u, w): (usize, usize), u2: usize, m: Move) {
    let Move { x, v, z } = m;
    let wx = o.remove(x, u);
    let wv = o.remove(v, x);
    let wu2 = o.remove(u2, v);
    o.remove(u2, z);
    o.add(u, x, w);
    o.add(x, v, wx);
    o.add(v, u2, wv);
    o.add(u2, z, wu2);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_decomposition;
    use crate::exact::toy::from_copies;
    use crate::graph::Graph;
    use crate::oracle::verify;
    use crate::partition::TreePartition;
    use crate::rng::seeded;
    use crate::tree::Case;

    /// A star with `k` leaves and a path of `len` edges hanging off its centre.
    fn broom(k: usize, len: usize) -> Tree {
        let mut e: Vec<(usize, usize)> = (1..=k).map(|l| (0, l)).collect();
        let mut prev = 0;
        for v in k + 1..=k + len {
            e.push((prev, v));
            prev = v;
        }
        Tree::from_edges(k + len + 1, &e).unwrap()
    }

    fn empty_state(n: usize, t: Tree) -> EmbeddingState {
        let tp = TreePartition::flat(&t, Case::L, Vec::new()).unwrap();
        from_copies(Graph::complete(n), t, tp, &[], &[])
    }

    #[test]
    fn finds_only_big_stars() {
        let t = broom(5, 3);
        assert_eq!(large_leaf_stars(&t, 5.0).len(), 1);
        assert!(large_leaf_stars(&t, 6.0).is_empty());
        // the far end of the handle is a leaf star of size one
        assert_eq!(large_leaf_stars(&t, 1.0).len(), 2);
    }

    #[test]
    fn split_matches_copy_parts() {
        let stars = large_leaf_stars(&broom(22, 8), 20.0);
        let w_part: Vec<usize> = (0..61).map(|w| w % 3).collect();
        for seed in 0..10 {
            let sp = split(61, &stars, &w_part, &mut seeded(seed));
            for i in 0..3 {
                let u = sp.part.iter().filter(|&&p| p == i).count();
                assert_eq!(u, w_part.iter().filter(|&&p| p == i).count());
            }
            assert!(sp.class.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn broom_decomposes_k61() {
        // 61 · 30 = C(61, 2)
        let mut ok = 0;
        for seed in 0..10 {
            let mut s = empty_state(61, broom(22, 8));
            match large_stars(&mut s, &mut seeded(seed)) {
                Ok(r) => {
                    assert_eq!(r.centres, vec![0]);
                    assert!(r.trace.windows(2).all(|w| w[0] == w[1] + 2));
                    assert_eq!(r.trace.len(), r.moves + 1);
                    let d = to_decomposition(&s).expect("every copy total");
                    assert!(verify(&d).is_ok());
                    ok += 1;
                }
                Err(e) => {
                    assert!(matches!(e, Error::Abort { .. }), "{e}");
                    assert!(s.audit().is_empty());
                }
            }
        }
        assert!(ok >= 6, "only {ok} of 10 seeds finished");
    }

    #[test]
    fn refuses_trees_without_big_stars() {
        let mut s = empty_state(61, broom(3, 27));
        assert!(matches!(large_stars(&mut s, &mut seeded(0)), Err(Error::Input(_))));
    }
}
