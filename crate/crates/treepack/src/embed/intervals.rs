//! INTERVALS: the cyclic interval families `I^i_j` and the sets
//! `A_w ⊇ S_w ⊇ X_w ⊇ Y_w` of Case P.
//!
//! Intervals are named by `(level, start position)`; within a level every
//! position starts exactly one interval, so the pair is a key.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{EmbeddingState, TimeMarker};
use crate::error::Result;
use crate::rng::Rng;
use crate::tree::Case;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalState {
    pub n: usize,
    /// `d_i` for `i = 1..=2s+1` (stored at `i - 1`).
    pub d: Vec<usize>,
    /// `i(w)`, 1-based.
    pub level: Vec<usize>,
    pub j: Vec<usize>,
    /// Starts of the intervals in `𝒳_w`, before step iv.
    pub chosen: Vec<Vec<usize>>,
    /// Starts of the intervals in `𝒴_w`.
    pub kept: Vec<Vec<usize>>,
    /// `t_i`, 1-based levels stored at `i - 1`.
    pub t: Vec<usize>,
}

/// `d_i = max(2, ⌊d/(2s)^{i-1}⌋)` for `i ∈ [2s+1]`.
pub fn level_widths(d: usize, s: usize) -> Vec<usize> {
    (1..=2 * s + 1)
        .map(|i| {
            let w = d as f64 / ((2 * s) as f64).powi(i as i32 - 1);
            (w.floor() as usize).max(2)
        })
        .collect()
}

/// Length of the interval of width class `di` starting at position `x`.
pub fn interval_len(n: usize, di: usize, x: usize) -> usize {
    if x + di < n {
        di
    } else {
        n - x + x % di
    }
}

/// Starts of `I^i_j`, in cyclic order.
pub fn family(n: usize, di: usize, j: usize) -> Vec<usize> {
    (j..n).step_by(di).collect()
}

pub fn positions(n: usize, di: usize, x: usize) -> impl Iterator<Item = usize> {
    let len = interval_len(n, di, x);
    (0..len).map(move |k| (x + k) % n)
}

impl IntervalState {
    /// `X(I)` after step iv, i.e. `Y(I)`, for each start of level `i`.
    pub fn y_counts(&self, i: usize) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for (w, ks) in self.kept.iter().enumerate() {
            if self.level[w] == i {
                for &x in ks {
                    c[x] += 1;
                }
            }
        }
        c
    }

    pub fn audit(&self, n: usize) -> Vec<String> {
        let mut bad = Vec::new();
        for (li, &di) in self.d.iter().enumerate() {
            let i = li + 1;
            let mut starts = vec![0usize; n];
            let mut ends = vec![0usize; n];
            for j in 0..di.min(n) {
                let mut cover = vec![0usize; n];
                for x in family(n, di, j) {
                    starts[x] += 1;
                    let len = interval_len(n, di, x);
                    ends[(x + len) % n] += 1;
                    for p in positions(n, di, x) {
                        cover[p] += 1;
                    }
                }
                if cover.iter().any(|&c| c != 1) {
                    bad.push(format!("I^{i}_{j} is not a partition of [n]"));
                }
            }
            if starts.iter().any(|&c| c != 1) || ends.iter().any(|&c| c != 1) {
                bad.push(format!("level {i}: starts or ends not unique"));
            }
            let y = self.y_counts(i);
            if y.iter().any(|&c| c != self.t[li]) {
                bad.push(format!("level {i}: |Y(I)| differs from t_i = {}", self.t[li]));
            }
        }
        bad
    }
}

/// Steps i–iv on positions. `blocked[w]` holds the positions of `φ_w(A*)`.
pub fn sample_intervals(
    n: usize,
    d: usize,
    s: usize,
    keep: f64,
    blocked: &[BTreeSet<usize>],
    rng: &mut Rng,
) -> IntervalState {
    let widths = level_widths(d, s);
    let nw = blocked.len();
    let mut st = IntervalState {
        n,
        d: widths.clone(),
        level: Vec::with_capacity(nw),
        j: Vec::with_capacity(nw),
        chosen: vec![Vec::new(); nw],
        kept: vec![Vec::new(); nw],
        t: vec![0; widths.len()],
    };
    let keep = keep.clamp(0.0, 1.0);
    for w in 0..nw {
        let i = rng.gen_range(1..=widths.len());
        let di = widths[i - 1];
        let j = rng.gen_range(0..di.min(n));
        st.level.push(i);
        st.j.push(j);
        let fam = family(n, di, j);
        let k = fam.len();
        let a: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
        for idx in 0..k {
            let prev = (idx + k - 1) % k;
            let next = (idx + 1) % k;
            let isolated = a[idx] && (k == 1 || (!a[prev] && !a[next]));
            if isolated && rng.gen_bool(keep) {
                st.chosen[w].push(fam[idx]);
            }
        }
    }
    // step iv
    let mut holders: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; widths.len()];
    for w in 0..nw {
        let li = st.level[w] - 1;
        let di = widths[li];
        for &x in &st.chosen[w] {
            if positions(n, di, x).all(|p| !blocked[w].contains(&p)) {
                holders[li][x].push(w);
            }
        }
    }
    for (li, hs) in holders.iter_mut().enumerate() {
        let t = hs.iter().map(|h| h.len()).min().unwrap_or(0);
        st.t[li] = t;
        for (x, h) in hs.iter_mut().enumerate() {
            h.shuffle(rng);
            for &w in &h[..t] {
                st.kept[w].push(x);
            }
        }
    }
    for k in st.kept.iter_mut() {
        k.sort_unstable();
    }
    st
}

pub fn intervals(s: &mut EmbeddingState, rng: &mut Rng) -> Result<()> {
    let n = s.n();
    if s.tp.case == Case::P {
        let blocked: Vec<BTreeSet<usize>> = (0..n)
            .map(|w| {
                s.tp.a_star
                    .iter()
                    .filter_map(|&a| s.phi[w][a])
                    .map(|x| s.order.label(x))
                    .collect()
            })
            .collect();
        let eta = s.cfg.eta(true);
        let keep = (1.0 - eta) * s.tp.p_ex.len() as f64 / n as f64;
        let st = sample_intervals(n, s.cfg.d, s.cfg.s, keep, &blocked, rng);
        for w in 0..n {
            let di = st.d[st.level[w] - 1];
            s.x_w[w] = st.chosen[w]
                .iter()
                .flat_map(|&x| positions(n, di, x))
                .map(|p| s.order.vertex(p))
                .collect();
        }
        for (li, &t) in st.t.iter().enumerate() {
            s.metric(&format!("t_{}", li + 1), t as f64);
        }
        s.intervals = Some(st);
    }
    s.refresh_xbar();
    s.pbar = (0..n)
        .map(|w| (0..n).filter(|&x| s.in_xbar(w, x)).count() as f64 / n as f64)
        .collect();
    s.clock = TimeMarker::Intervals;
    Ok(())
}
