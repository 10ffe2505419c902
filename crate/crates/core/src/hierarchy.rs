//! Data model of an M-layer hierarchy and assembly of its layer matrices.
//!
//! Layer 1 is the physical layer; every higher layer is a cyber layer
//! whose nodes each supervise one group of the layer below. A node
//! collects a stochastic average from its subordinate group and
//! broadcasts a correction back, which in matrix form turns every layer
//! into an effective Laplacian acting on the physical states.

use crate::mat::Mat;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Tolerance for structural identities (row sums, stochastic rows, CB = I).
pub const STRUCT_TOL: f64 = 1e-12;

/// One communication group: an undirected weighted graph on `size` nodes.
///
/// Edges are 0-based internally; scenario files use 1-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    pub size: usize,
    pub edges: Vec<GroupEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl GroupSpec {
    /// Group with unit edge weights.
    pub fn new(size: usize, edges: &[(usize, usize)]) -> Self {
        GroupSpec {
            size,
            edges: edges
                .iter()
                .map(|&(a, b)| GroupEdge { a, b, weight: 1.0 })
                .collect(),
        }
    }

    fn is_connected(&self) -> bool {
        if self.size <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.size];
        for e in &self.edges {
            if e.a >= self.size || e.b >= self.size {
                return false;
            }
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; self.size];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.size
    }
}

/// One layer: its groups plus optional collecting vectors (one stochastic
/// row per group). `None` selects the weight-proportional default at
/// assembly time.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub groups: Vec<GroupSpec>,
    pub collecting: Option<Vec<Vec<f64>>>,
}

impl LayerSpec {
    pub fn new(groups: Vec<GroupSpec>) -> Self {
        LayerSpec {
            groups,
            collecting: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.groups.iter().map(|g| g.size).sum()
    }
}

/// Full declarative description of the hierarchy.
///
/// `hop_delays[l-1]` is the communication delay between layer `l` and
/// layer `l+1`, in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchySpec {
    pub layers: Vec<LayerSpec>,
    pub physical_weights: Vec<f64>,
    pub hop_delays: Vec<f64>,
}

impl HierarchySpec {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn physical_size(&self) -> usize {
        self.physical_weights.len()
    }
}

/// A single invariant violation, located as precisely as the invariant
/// allows. Layers and groups are reported 1-based to match scenario files.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub layer: Option<usize>,
    pub group: Option<usize>,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.layer {
            write!(f, "layer {l} ")?;
        }
        if let Some(g) = self.group {
            write!(f, "group {g} ")?;
        }
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Outcome of `validate`: empty means the spec satisfies every invariant.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("invalid hierarchy spec:\n{0}")]
    Invalid(ValidationReport),
    #[error("edge ({a}, {b}) out of range for group of size {size}")]
    EdgeOutOfRange { a: usize, b: usize, size: usize },
    #[error("nonpositive physical weight {value} at index {index}")]
    NonpositiveWeight { index: usize, value: f64 },
}

/// Checks every spec invariant and reports all violations; valid specs
/// yield an empty report. Validation never fails: bad data is data.
pub fn validate(spec: &HierarchySpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut push =
        |layer: Option<usize>, group: Option<usize>, field: &'static str, message: String| {
            report.violations.push(Violation {
                layer,
                group,
                field,
                message,
            });
        };

    let m = spec.layers.len();
    if m == 0 {
        push(
            None,
            None,
            "layers",
            "hierarchy needs at least one layer".into(),
        );
        return report;
    }

    for (li, layer) in spec.layers.iter().enumerate() {
        let lno = li + 1;
        if layer.groups.is_empty() {
            push(Some(lno), None, "groups", "layer has no groups".into());
        }
        for (gi, g) in layer.groups.iter().enumerate() {
            let gno = gi + 1;
            if g.size == 0 {
                push(Some(lno), Some(gno), "size", "group is empty".into());
                continue;
            }
            let mut seen = std::collections::HashSet::new();
            for e in &g.edges {
                if e.a == e.b {
                    push(
                        Some(lno),
                        Some(gno),
                        "edges",
                        format!("self-loop on node {}", e.a + 1),
                    );
                } else if e.a >= g.size || e.b >= g.size {
                    push(
                        Some(lno),
                        Some(gno),
                        "edges",
                        format!(
                            "edge ({}, {}) out of range for size {}",
                            e.a + 1,
                            e.b + 1,
                            g.size
                        ),
                    );
                } else if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                    push(
                        Some(lno),
                        Some(gno),
                        "edges",
                        format!("duplicate edge ({}, {})", e.a + 1, e.b + 1),
                    );
                }
                if !e.weight.is_finite() || e.weight <= 0.0 {
                    push(
                        Some(lno),
                        Some(gno),
                        "edge_weights",
                        format!(
                            "edge ({}, {}) has nonpositive weight {}",
                            e.a + 1,
                            e.b + 1,
                            e.weight
                        ),
                    );
                }
            }
            if !g.is_connected() {
                push(Some(lno), Some(gno), "edges", "group disconnected".into());
            }
        }
        // collecting vectors: stochastic rows, one per group
        if let Some(rows) = &layer.collecting {
            if rows.len() != layer.groups.len() {
                push(
                    Some(lno),
                    None,
                    "collecting",
                    format!(
                        "{} collecting vectors for {} groups",
                        rows.len(),
                        layer.groups.len()
                    ),
                );
            }
            for (gi, (row, g)) in rows.iter().zip(&layer.groups).enumerate() {
                let gno = gi + 1;
                if row.len() != g.size {
                    push(
                        Some(lno),
                        Some(gno),
                        "collecting",
                        format!("vector length {} for group size {}", row.len(), g.size),
                    );
                    continue;
                }
                if row.iter().any(|&w| w < 0.0) {
                    push(Some(lno), Some(gno), "collecting", "negative entry".into());
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STRUCT_TOL {
                    push(
                        Some(lno),
                        Some(gno),
                        "collecting",
                        format!("collecting row sums to {sum}"),
                    );
                }
            }
        }
        // chain consistency: groups of layer l count the nodes of layer l+1
        if li + 1 < m {
            let next = spec.layers[li + 1].node_count();
            if layer.groups.len() != next {
                push(
                    Some(lno),
                    None,
                    "groups",
                    format!(
                        "layer has {} groups but layer {} has {} nodes",
                        layer.groups.len(),
                        lno + 1,
                        next
                    ),
                );
            }
        }
    }

    if spec.layers[m - 1].groups.len() != 1 {
        push(
            Some(m),
            None,
            "groups",
            format!(
                "top layer must have exactly one group, found {}",
                spec.layers[m - 1].groups.len()
            ),
        );
    }

    let n1 = spec.layers[0].node_count();
    if n1 != spec.physical_weights.len() {
        push(
            None,
            None,
            "physical_weights",
            format!(
                "{} weights for {} physical nodes",
                spec.physical_weights.len(),
                n1
            ),
        );
    }
    for (i, &w) in spec.physical_weights.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            push(
                None,
                None,
                "physical_weights",
                format!("weight {} at index {} must be positive", w, i + 1),
            );
        }
    }

    if spec.hop_delays.len() != m - 1 {
        push(
            None,
            None,
            "hop_delays",
            format!("{} delays for {} layers", spec.hop_delays.len(), m),
        );
    }
    for (i, &d) in spec.hop_delays.iter().enumerate() {
        if !d.is_finite() || d < 0.0 {
            push(
                None,
                None,
                "hop_delays",
                format!("delay {} at hop {} must be nonnegative", d, i + 1),
            );
        }
    }

    report
}

/// Weighted Laplacian D - A of one group.
pub fn group_laplacian(g: &GroupSpec) -> Result<Mat, HierarchyError> {
    let mut l = Mat::zeros(g.size, g.size);
    for e in &g.edges {
        if e.a >= g.size || e.b >= g.size || e.a == e.b {
            return Err(HierarchyError::EdgeOutOfRange {
                a: e.a,
                b: e.b,
                size: g.size,
            });
        }
        l[(e.a, e.a)] += e.weight;
        l[(e.b, e.b)] += e.weight;
        l[(e.a, e.b)] -= e.weight;
        l[(e.b, e.a)] -= e.weight;
    }
    Ok(l)
}

/// Physical numbers n_i at every layer: each node's count of physical
/// leaves in the interlayer spanning tree below it.
pub fn physical_numbers(spec: &HierarchySpec) -> Vec<Vec<usize>> {
    let mut all = Vec::with_capacity(spec.layers.len());
    all.push(vec![1usize; spec.layers[0].node_count()]);
    for l in 1..spec.layers.len() {
        let below = &all[l - 1];
        let mut cur = Vec::with_capacity(spec.layers[l].node_count());
        let mut off = 0;
        for g in &spec.layers[l - 1].groups {
            cur.push(below[off..off + g.size].iter().sum());
            off += g.size;
        }
        all.push(cur);
    }
    all
}

/// Physical weights a_i at every layer: layer-1 weights summed up the
/// interlayer tree. With unit weights this reproduces the physical numbers.
pub fn physical_weights_all(spec: &HierarchySpec) -> Result<Vec<Vec<f64>>, HierarchyError> {
    for (i, &w) in spec.physical_weights.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            return Err(HierarchyError::NonpositiveWeight { index: i, value: w });
        }
    }
    let mut all = Vec::with_capacity(spec.layers.len());
    all.push(spec.physical_weights.clone());
    for l in 1..spec.layers.len() {
        let below: &Vec<f64> = &all[l - 1];
        let mut cur = Vec::with_capacity(spec.layers[l].node_count());
        let mut off = 0;
        for g in &spec.layers[l - 1].groups {
            cur.push(below[off..off + g.size].iter().sum());
            off += g.size;
        }
        all.push(cur);
    }
    Ok(all)
}

/// Every matrix of the assembled hierarchy.
///
/// `effective[l-1]` is the layer-l effective Laplacian acting on the
/// physical states, and `total` is their sum, so the undelayed closed
/// loop is `x' = -total * x`.
#[derive(Clone, Debug)]
pub struct LayerMatrices {
    /// Node count per layer.
    pub layer_sizes: Vec<usize>,
    /// Group sizes per layer (k_p).
    pub group_sizes: Vec<Vec<usize>>,
    /// Block-diagonal group Laplacians L_D per layer.
    pub group_laplacians: Vec<Mat>,
    /// Diagonal of K per layer: reciprocals of the layer weights.
    pub inv_weights: Vec<Vec<f64>>,
    /// Broadcast matrices B, layer l to l+1 shape N^(l) x N^(l+1).
    pub broadcasts: Vec<Mat>,
    /// Collecting matrices C, shape N^(l+1) x N^(l).
    pub collectors: Vec<Mat>,
    /// Effective Laplacians, each N^(1) x N^(1).
    pub effective: Vec<Mat>,
    /// Sum of the effective Laplacians.
    pub total: Mat,
    /// Physical numbers per layer.
    pub physical_numbers: Vec<Vec<usize>>,
    /// Physical weights per layer.
    pub physical_weights: Vec<Vec<f64>>,
}

impl LayerMatrices {
    pub fn layer_count(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn physical_size(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Diagonal of K = diag(a^(1)), the conservation weights.
    pub fn conservation_weights(&self) -> &[f64] {
        &self.physical_weights[0]
    }
}

/// Assembles all layer matrices. The spec is validated first and any
/// violation is returned as `HierarchyError::Invalid`.
pub fn assemble(spec: &HierarchySpec) -> Result<LayerMatrices, HierarchyError> {
    let report = validate(spec);
    if !report.is_valid() {
        return Err(HierarchyError::Invalid(report));
    }

    let m = spec.layers.len();
    let n1 = spec.physical_size();
    let weights = physical_weights_all(spec)?;
    let numbers = physical_numbers(spec);
    let layer_sizes: Vec<usize> = spec.layers.iter().map(|l| l.node_count()).collect();
    let group_sizes: Vec<Vec<usize>> = spec
        .layers
        .iter()
        .map(|l| l.groups.iter().map(|g| g.size).collect())
        .collect();

    // L_D per layer
    let mut group_laplacians = Vec::with_capacity(m);
    for layer in &spec.layers {
        let n = layer.node_count();
        let mut ld = Mat::zeros(n, n);
        let mut off = 0;
        for g in &layer.groups {
            let lg = group_laplacian(g)?;
            for i in 0..g.size {
                for j in 0..g.size {
                    ld[(off + i, off + j)] = lg[(i, j)];
                }
            }
            off += g.size;
        }
        group_laplacians.push(ld);
    }

    let inv_weights: Vec<Vec<f64>> = weights
        .iter()
        .map(|a| a.iter().map(|&w| 1.0 / w).collect())
        .collect();

    // B and C for every interlayer hop
    let mut broadcasts = Vec::with_capacity(m.saturating_sub(1));
    let mut collectors = Vec::with_capacity(m.saturating_sub(1));
    for l in 0..m.saturating_sub(1) {
        let nl = layer_sizes[l];
        let nup = layer_sizes[l + 1];
        let mut b = Mat::zeros(nl, nup);
        let mut c = Mat::zeros(nup, nl);
        let mut off = 0;
        for (p, g) in spec.layers[l].groups.iter().enumerate() {
            for q in 0..g.size {
                b[(off + q, p)] = 1.0;
            }
            match &spec.layers[l].collecting {
                Some(rows) => {
                    for q in 0..g.size {
                        c[(p, off + q)] = rows[p][q];
                    }
                }
                None => {
                    // weight-proportional default
                    for q in 0..g.size {
                        c[(p, off + q)] = weights[l][off + q] / weights[l + 1][p];
                    }
                }
            }
            off += g.size;
        }
        broadcasts.push(b);
        collectors.push(c);
    }

    // effective Laplacians: prefix products of B and C around K L_D
    let mut effective = Vec::with_capacity(m);
    let mut prefix_b = Mat::identity(n1);
    let mut prefix_c = Mat::identity(n1);
    for l in 0..m {
        if l > 0 {
            prefix_b = prefix_b.matmul(&broadcasts[l - 1]);
            prefix_c = collectors[l - 1].matmul(&prefix_c);
        }
        let mut kld = group_laplacians[l].clone();
        for i in 0..layer_sizes[l] {
            for j in 0..layer_sizes[l] {
                kld[(i, j)] *= inv_weights[l][i];
            }
        }
        let eff = if l == 0 {
            kld
        } else {
            prefix_b.matmul(&kld).matmul(&prefix_c)
        };
        effective.push(eff);
    }

    let mut total = Mat::zeros(n1, n1);
    for e in &effective {
        total = total.add(e);
    }

    Ok(LayerMatrices {
        layer_sizes,
        group_sizes,
        group_laplacians,
        inv_weights,
        broadcasts,
        collectors,
        effective,
        total,
        physical_numbers: numbers,
        physical_weights: weights,
    })
}

/// One block-structure defect found by `block_structure_check`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockViolation {
    pub layer: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BlockReport {
    pub violations: Vec<BlockViolation>,
}

impl BlockReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies the block structure of every effective Laplacian: each block
/// indexed by a pair of layer-l nodes has identical rows, and each
/// diagonal super-block (one per layer-(l+1) node) has zero row sums.
pub fn block_structure_check(m: &LayerMatrices) -> BlockReport {
    let mut report = BlockReport::default();
    let mcount = m.layer_count();
    let n1 = m.physical_size();
    for l in 0..mcount {
        let eff = &m.effective[l];
        let nl = m.layer_sizes[l];
        // offsets of each layer-l node's physical leaf range
        let mut offs = Vec::with_capacity(nl + 1);
        offs.push(0usize);
        for i in 0..nl {
            offs.push(offs[i] + m.physical_numbers[l][i]);
        }
        // within each block all rows must agree
        for bi in 0..nl {
            for bj in 0..nl {
                let (r0, r1) = (offs[bi], offs[bi + 1]);
                let (c0, c1) = (offs[bj], offs[bj + 1]);
                let mut dev = 0.0_f64;
                for r in (r0 + 1)..r1 {
                    for c in c0..c1 {
                        dev = dev.max((eff[(r, c)] - eff[(r0, c)]).abs());
                    }
                }
                if dev > STRUCT_TOL {
                    report.violations.push(BlockViolation {
                        layer: l + 1,
                        detail: format!("block ({}, {}) rows differ by {dev:.3e}", bi + 1, bj + 1),
                    });
                }
            }
        }
        // diagonal super-blocks: one per group of layer l, i.e. per node
        // of layer l+1 (the top layer aggregates everything)
        let super_sizes: Vec<usize> = if l + 1 < mcount {
            m.physical_numbers[l + 1].clone()
        } else {
            vec![n1]
        };
        let mut off = 0;
        for (p, &sz) in super_sizes.iter().enumerate() {
            for r in off..off + sz {
                let sum: f64 = (off..off + sz).map(|c| eff[(r, c)]).sum();
                if sum.abs() > STRUCT_TOL {
                    report.violations.push(BlockViolation {
                        layer: l + 1,
                        detail: format!("super-block {} row {} sums to {sum:.3e}", p + 1, r + 1),
                    });
                }
            }
            off += sz;
        }
    }
    report
}
