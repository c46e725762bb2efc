//! Instance generators for hosts and trees.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{gnp, Graph};
use crate::rng::Rng;
use crate::tree::Tree;

pub fn path(n: usize) -> Tree {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Tree::from_edges(n, &e).expect("path is a tree")
}

/// `K_{1,k}` with centre 0.
pub fn star(k: usize) -> Tree {
    let e: Vec<_> = (1..=k).map(|i| (0, i)).collect();
    Tree::from_edges(k + 1, &e).expect("star is a tree")
}

/// Spine `0..spine` with `legs` pendant leaves on every spine vertex.
pub fn caterpillar(spine: usize, legs: usize) -> Tree {
    let mut e: Vec<_> = (1..spine).map(|i| (i - 1, i)).collect();
    let mut next = spine;
    for v in 0..spine {
        for _ in 0..legs {
            e.push((v, next));
            next += 1;
        }
    }
    Tree::from_edges(next, &e).expect("caterpillar is a tree")
}

/// `legs` paths of `leg_len` edges hanging from centre 0.
pub fn spider(legs: usize, leg_len: usize) -> Tree {
    let mut e = Vec::new();
    let mut next = 1;
    for _ in 0..legs {
        let mut prev = 0;
        for _ in 0..leg_len {
            e.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    Tree::from_edges(next, &e).expect("spider is a tree")
}

pub fn complete_binary(depth: usize) -> Tree {
    let n = (1usize << (depth + 1)) - 1;
    let e: Vec<_> = (1..n).map(|i| ((i - 1) / 2, i)).collect();
    Tree::from_edges(n, &e).expect("binary tree")
}

/// Uniform labelled tree via a random Prüfer sequence.
pub fn uniform_tree(n: usize, rng: &mut Rng) -> Tree {
    if n <= 2 {
        return path(n.max(1));
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut e = Vec::with_capacity(n - 1);
    for &x in &seq {
        let leaf = *leaves.iter().next().expect("a leaf always remains");
        leaves.remove(&leaf);
        e.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    e.push((rest[0], rest[1]));
    Tree::from_edges(n, &e).expect("Prüfer decoding yields a tree")
}

/// Uniform random core of `core` vertices with `paths` bare paths of
/// `path_len` edges attached at random core vertices, each ending in a
/// small star so its far end is not a leaf.
pub fn long_path_tree(core: usize, paths: usize, path_len: usize, rng: &mut Rng) -> Tree {
    let base = uniform_tree(core.max(1), rng);
    let mut e: Vec<(usize, usize)> = base.edges().to_vec();
    let mut next = base.n();
    for _ in 0..paths {
        let mut prev = rng.gen_range(0..base.n());
        for _ in 0..path_len {
            e.push((prev, next));
            prev = next;
            next += 1;
        }
        for _ in 0..2 {
            e.push((prev, next));
            next += 1;
        }
    }
    Tree::from_edges(next, &e).expect("attached paths keep a tree")
}

/// Each vertex of `[0, n)` independently with probability `frac`.
pub fn random_subset(n: usize, frac: f64, rng: &mut Rng) -> BTreeSet<usize> {
    (0..n)
        .filter(|_| rng.gen_bool(frac.clamp(0.0, 1.0)))
        .collect()
}

/// Random tree with exactly `edges` edges, shaped for the named model.
pub fn tree_model(model: &str, edges: usize, rng: &mut Rng) -> Result<Tree> {
    let n = edges + 1;
    Ok(match model {
        "uniform" => uniform_tree(n, rng),
        "path" => path(n),
        "star" => star(edges),
        "caterpillar" => {
            let spine = (n / 2).max(1);
            let mut t = caterpillar(spine, 1);
            if t.n() != n {
                let mut e = t.edges().to_vec();
                e.push((0, t.n()));
                t = Tree::from_edges(n, &e)?;
            }
            t
        }
        "paths" => {
            // about half the edges in 34-edge hanging paths
            let per = 34;
            let k = (edges / 2 / per).max(1);
            let core = (edges + 1).saturating_sub(k * per).max(1);
            let t = long_path_tree(core, k, per - 2, rng);
            if t.edge_count() != edges {
                return Err(Error::Input(format!(
                    "tree model 'paths' needs more than {edges} edges"
                )));
            }
            t
        }
        other => return Err(Error::Input(format!("unknown tree model {other:?}"))),
    })
}

/// `G(n, p)` with random edges removed until `n` divides the edge count, so
/// that an exact decomposition into `n` copies is arithmetically possible.
pub fn quasirandom_host(n: usize, p: f64, rng: &mut Rng) -> Result<Graph> {
    let g = gnp(n, p, rng)?;
    let mut e = g.edges();
    e.shuffle(rng);
    let keep = e.len() - e.len() % n.max(1);
    e.truncate(keep);
    e.sort_unstable();
    Graph::from_edges(n, &e)
}
