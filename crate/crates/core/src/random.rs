//! Seeded random hierarchy generator for property sweeps.
//!
//! Distribution: layer count up to a cap, group sizes 1-4, one random
//! spanning tree per group plus extra edges, physical and edge weights
//! log-uniform in [0.5, 2], random stochastic collecting vectors. Draws
//! whose physical layer exceeds the node cap are rejected and retried, so
//! sweeps stay at desk scale.

use crate::hierarchy::{GroupEdge, GroupSpec, HierarchySpec, LayerSpec};
use crate::spectral::random_stochastic;
use rand::Rng;

/// Default seed for reproducible sweeps.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug)]
pub struct RandomSpecConfig {
    pub max_layers: usize,
    pub max_physical: usize,
    pub max_group_size: usize,
    /// Probability of each extra (non-tree) edge.
    pub extra_edge_prob: f64,
}

impl Default for RandomSpecConfig {
    fn default() -> Self {
        RandomSpecConfig {
            max_layers: 4,
            max_physical: 20,
            max_group_size: 4,
            extra_edge_prob: 0.3,
        }
    }
}

fn log_uniform(rng: &mut impl Rng) -> f64 {
    // log-uniform on [0.5, 2]
    let lo = 0.5_f64.ln();
    let hi = 2.0_f64.ln();
    rng.gen_range(lo..hi).exp()
}

fn random_group(size: usize, cfg: &RandomSpecConfig, rng: &mut impl Rng) -> GroupSpec {
    let mut edges = Vec::new();
    // random recursive tree keeps the group connected
    for b in 1..size {
        let a = rng.gen_range(0..b);
        edges.push(GroupEdge {
            a,
            b,
            weight: log_uniform(rng),
        });
    }
    for a in 0..size {
        for b in (a + 1)..size {
            let already = edges.iter().any(|e| (e.a, e.b) == (a, b));
            if !already && rng.gen_bool(cfg.extra_edge_prob) {
                edges.push(GroupEdge {
                    a,
                    b,
                    weight: log_uniform(rng),
                });
            }
        }
    }
    GroupSpec { size, edges }
}

/// Draws one valid random hierarchy with zero hop delays.
pub fn random_hierarchy(cfg: &RandomSpecConfig, rng: &mut impl Rng) -> HierarchySpec {
    loop {
        let m = rng.gen_range(1..=cfg.max_layers);
        // sizes from the top down: the top layer is one group, and the
        // group count of layer l equals the node count of layer l+1
        let mut group_counts = vec![0usize; m];
        let mut node_counts = vec![0usize; m];
        group_counts[m - 1] = 1;
        let mut ok = true;
        let mut sizes: Vec<Vec<usize>> = vec![Vec::new(); m];
        for l in (0..m).rev() {
            sizes[l] = (0..group_counts[l])
                .map(|_| rng.gen_range(1..=cfg.max_group_size))
                .collect();
            node_counts[l] = sizes[l].iter().sum();
            if l > 0 {
                group_counts[l - 1] = node_counts[l];
            }
            if node_counts[l] > cfg.max_physical {
                ok = false;
                break;
            }
        }
        if !ok || node_counts[0] > cfg.max_physical {
            continue;
        }

        let layers: Vec<LayerSpec> = sizes
            .iter()
            .map(|layer_sizes| {
                let groups = layer_sizes
                    .iter()
                    .map(|&s| random_group(s, cfg, rng))
                    .collect::<Vec<_>>();
                let collecting = groups
                    .iter()
                    .map(|g| random_stochastic(g.size, rng))
                    .collect();
                LayerSpec {
                    groups,
                    collecting: Some(collecting),
                }
            })
            .collect();
        let physical_weights = (0..node_counts[0]).map(|_| log_uniform(rng)).collect();
        return HierarchySpec {
            layers,
            physical_weights,
            hop_delays: vec![0.0; m - 1],
        };
    }
}
