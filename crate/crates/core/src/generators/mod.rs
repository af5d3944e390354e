//! Seeded random-graph models and the semicircle law's analytic moments.

mod semicircle;

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

pub use semicircle::{
    semicircle_chebyshev_moments, semicircle_density, semicircle_moments, semicircle_raw_moments,
    SemicircleSpec,
};

/// Ring degree used for Watts-Strogatz graphs unless stated otherwise.
pub const DEFAULT_WS_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    /// Every pair joined independently with probability `p`.
    Er { p: f64 },
    /// Ring lattice of even degree `k`, each edge rewired with probability
    /// `p_rewire`.
    Ws { k: usize, p_rewire: f64 },
    /// Preferential attachment of `r` edges per new node onto an `r`-clique.
    Ba { r: usize },
    /// Disjoint clusters joined by exactly `inter_edges` random edges.
    Planted {
        clusters: Vec<Cluster>,
        inter_edges: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub size: usize,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: Model, seed: u64) -> Self {
        Self { model, seed }
    }

    /// `count` clusters of `size` nodes, each `Er { p }`.
    pub fn planted_er(count: usize, size: usize, p: f64, inter_edges: usize, seed: u64) -> Self {
        let clusters = vec![
            Cluster {
                size,
                model: Model::Er { p },
            };
            count
        ];
        Self::new(
            Model::Planted {
                clusters,
                inter_edges,
            },
            seed,
        )
    }

    /// Node count implied by the model, if it fixes one.
    pub fn implied_size(&self) -> Option<usize> {
        match &self.model {
            Model::Planted { clusters, .. } => Some(clusters.iter().map(|c| c.size).sum()),
            _ => None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Generates an `n`-node simple graph with node ids `0..n`. Planted models
/// require `n` to equal the sum of their cluster sizes.
pub fn generate(spec: &ModelSpec, n: usize) -> Result<SparseGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = model_edges(&spec.model, n, &mut rng, spec.seed)?;
    SparseGraph::from_unweighted(n, edges)
}

fn model_edges(
    model: &Model,
    n: usize,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    match *model {
        Model::Er { p } => {
            check_probability("p", p)?;
            Ok(erdos_renyi(n, p, rng))
        }
        Model::Ws { k, p_rewire } => {
            check_probability("p_rewire", p_rewire)?;
            if k == 0 || k % 2 == 1 || k >= n {
                return Err(invalid(format!(
                    "ring degree k must be even and in [2, n), got {k}"
                )));
            }
            Ok(watts_strogatz(n, k, p_rewire, rng))
        }
        Model::Ba { r } => {
            if r == 0 || r >= n {
                return Err(invalid(format!(
                    "attachment count r must be in [1, n), got {r}"
                )));
            }
            Ok(barabasi_albert(n, r, rng))
        }
        Model::Planted {
            ref clusters,
            inter_edges,
        } => planted(clusters, inter_edges, n, rng, seed),
    }
}

/// Geometric skipping over the lower triangle: the gap to the next edge is
/// geometric, so the cost is proportional to the number of edges.
fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if p <= 0.0 || n < 2 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
    }
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::with_capacity((p * (n * (n - 1) / 2) as f64) as usize + 16);
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        w += 1 + skip.min(i64::MAX as f64 / 2.0) as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::with_capacity(k + 2); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let t = (i + j) % n;
            adj[i].insert(t);
            adj[t].insert(i);
        }
    }
    // Rewire lattice edge (i, i + j) by moving its far endpoint.
    for j in 1..=k / 2 {
        for i in 0..n {
            let t = (i + j) % n;
            if !adj[i].contains(&t) || rng.random::<f64>() >= p {
                continue;
            }
            if adj[i].len() >= n - 1 {
                continue;
            }
            let new = loop {
                let c = rng.random_range(0..n);
                if c != i && !adj[i].contains(&c) {
                    break c;
                }
            };
            adj[i].remove(&t);
            adj[t].remove(&i);
            adj[i].insert(new);
            adj[new].insert(i);
        }
    }
    let mut edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().filter(move |&&t| t > i).map(move |&t| (i, t)))
        .collect();
    edges.sort_unstable();
    edges
}

fn barabasi_albert(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(r * (r - 1) / 2 + r * (n - r));
    // Every edge endpoint once: drawing from it is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for i in 0..r {
        for j in i + 1..r {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    for v in r..n {
        chosen.clear();
        if endpoints.is_empty() {
            // A one-node seed has no degree mass yet.
            chosen.extend(0..v);
        } else {
            while chosen.len() < r {
                let &t = endpoints.choose(rng).expect("non-empty");
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    edges
}

fn planted(
    clusters: &[Cluster],
    inter_edges: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if clusters.is_empty() {
        return Err(invalid("planted model needs at least one cluster"));
    }
    let total: usize = clusters.iter().map(|c| c.size).sum();
    if total != n {
        return Err(invalid(format!(
            "cluster sizes sum to {total}, not n = {n}"
        )));
    }
    let mut edges = Vec::new();
    let mut owner = Vec::with_capacity(n);
    let mut offset = 0;
    for (idx, c) in clusters.iter().enumerate() {
        if c.size == 0 {
            return Err(invalid("cluster size must be positive"));
        }
        if matches!(c.model, Model::Planted { .. }) {
            return Err(invalid("planted clusters cannot be nested"));
        }
        let mut sub = ChaCha8Rng::seed_from_u64(seed);
        sub.set_stream(idx as u64 + 1);
        let local = if c.size == 1 {
            Vec::new()
        } else {
            model_edges(&c.model, c.size, &mut sub, seed)?
        };
        edges.extend(local.into_iter().map(|(a, b)| (a + offset, b + offset)));
        owner.extend(std::iter::repeat(idx).take(c.size));
        offset += c.size;
    }

    let within: usize = clusters.iter().map(|c| c.size * (c.size - 1) / 2).sum();
    let available = n * (n - 1) / 2 - within;
    if inter_edges > available {
        return Err(invalid(format!(
            "{inter_edges} inter-cluster edges requested but only {available} pairs exist"
        )));
    }
    let mut picked = HashSet::with_capacity(inter_edges);
    while picked.len() < inter_edges {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if owner[a] != owner[b] {
            picked.insert((a.min(b), a.max(b)));
        }
    }
    let mut inter: Vec<_> = picked.into_iter().collect();
    inter.sort_unstable();
    edges.extend(inter);
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ba_edge_count_is_deterministic() {
        for (n, r) in [(100, 5), (30, 1), (50, 49), (10, 3)] {
            let g = generate(&ModelSpec::new(Model::Ba { r }, 7), n).unwrap();
            assert_eq!(g.num_edges(), r * (n - r) + r * (r - 1) / 2, "n={n} r={r}");
        }
    }

    #[test]
    fn ws_without_rewiring_is_a_ring() {
        let g = generate(
            &ModelSpec::new(
                Model::Ws {
                    k: 4,
                    p_rewire: 0.0,
                },
                1,
            ),
            20,
        )
        .unwrap();
        assert!(g.degrees().0.iter().all(|&d| d == 4.0));
        let h = generate(
            &ModelSpec::new(
                Model::Ws {
                    k: 4,
                    p_rewire: 0.5,
                },
                1,
            ),
            20,
        )
        .unwrap();
        assert_eq!(h.num_edges(), 40);
    }

    #[test]
    fn er_extremes() {
        let empty = generate(&ModelSpec::new(Model::Er { p: 0.0 }, 1), 10).unwrap();
        assert_eq!(empty.num_edges(), 0);
        let full = generate(&ModelSpec::new(Model::Er { p: 1.0 }, 1), 10).unwrap();
        assert_eq!(full.num_edges(), 45);
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(&ModelSpec::new(Model::Er { p: 1.5 }, 1), 10).is_err());
        assert!(generate(&ModelSpec::new(Model::Ba { r: 10 }, 1), 10).is_err());
        assert!(generate(&ModelSpec::new(Model::Ba { r: 0 }, 1), 10).is_err());
        assert!(generate(
            &ModelSpec::new(
                Model::Ws {
                    k: 3,
                    p_rewire: 0.1
                },
                1
            ),
            10
        )
        .is_err());
        assert!(generate(&ModelSpec::planted_er(2, 5, 0.5, 0, 1), 11).is_err());
        assert!(generate(&ModelSpec::planted_er(2, 2, 0.5, 5, 1), 4).is_err());
    }

    #[test]
    fn planted_components_and_inter_edges() {
        let spec = ModelSpec::planted_er(9, 30, 0.5, 0, 3);
        let g = generate(&spec, 270).unwrap();
        assert_eq!(g.connected_components().0, 9);

        let spec = ModelSpec::planted_er(3, 10, 1.0, 4, 3);
        let g = generate(&spec, 30).unwrap();
        assert_eq!(g.num_edges(), 3 * 45 + 4);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = ModelSpec::new(Model::Er { p: 0.1 }, 99);
        assert_eq!(generate(&spec, 200).unwrap(), generate(&spec, 200).unwrap());
    }
}
