//! Sequential growth of PA, DPA, and GDPA networks.
//!
//! Attachment sampling is exact and O(1) per pick via mixture decomposition:
//! a node weight like `i + c·j + δ` is the mixture of "uniform in-stub"
//! (category weight = total in-degree), "uniform out-stub" (weight `c` × total
//! out-degree), and "uniform node" (weight `δ` × node count). The stub lists
//! are exactly the edge target/source lists, which the graph keeps anyway, so
//! no auxiliary structure is maintained.
//!
//! Randomness comes only from the caller's `(seed, stream)` pair, driving a
//! ChaCha8 generator (`rand_chacha::ChaCha8Rng`, seeded with `seed_from_u64`
//! and `set_stream`). The generator family is part of the artifact's stability
//! contract: identical `(seed, stream)` must reproduce identical graphs across
//! versions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams};

/// Explicit RNG position: `seed` selects the key, `stream` the stream within
/// it. Parallel replicas use consecutive streams under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A grown network: degree arrays plus append-only edge stub lists.
///
/// `edge_heads[e]` is edge `e`'s target (one in-stub), `edge_tails[e]` its
/// source (one out-stub). For PA the graph is undirected: both endpoints'
/// degrees accumulate in `in_degree` (so Σ in_degree = 2 × edge count there,
/// while the directed models keep Σ in_degree = Σ out_degree = edge count).
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthGraph {
    params: ModelParams,
    in_degree: Vec<u32>,
    out_degree: Vec<u32>,
    edge_heads: Vec<u32>,
    edge_tails: Vec<u32>,
    reciprocal_flags: Vec<bool>,
    step_count: u64,
    edges_per_step: u32,
    // Degree sums maintained next to each individual degree increment, so the
    // stub-list consistency invariant is checkable in O(1) after every step.
    sum_in: u64,
    sum_out: u64,
}

impl GrowthGraph {
    fn new(params: ModelParams, n_steps: u64, edges_per_step: u32) -> Self {
        let node_cap = n_steps as usize + 1;
        let edge_cap = n_steps as usize * edges_per_step as usize;
        GrowthGraph {
            params,
            in_degree: Vec::with_capacity(node_cap),
            out_degree: Vec::with_capacity(node_cap),
            edge_heads: Vec::with_capacity(edge_cap),
            edge_tails: Vec::with_capacity(edge_cap),
            reciprocal_flags: Vec::with_capacity(if params.kind() == ModelKind::Gdpa {
                n_steps as usize
            } else {
                0
            }),
            step_count: 0,
            edges_per_step,
            sum_in: 0,
            sum_out: 0,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
    /// The parameters this graph was grown with.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn node_count(&self) -> usize {
        self.in_degree.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edge_heads.len()
    }
    pub fn step_count(&self) -> u64 {
        self.step_count
    }
    pub fn in_degrees(&self) -> &[u32] {
        &self.in_degree
    }
    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degree
    }
    pub fn edge_heads(&self) -> &[u32] {
        &self.edge_heads
    }
    pub fn edge_tails(&self) -> &[u32] {
        &self.edge_tails
    }
    /// Per-step reciprocation outcomes (GDPA only; empty otherwise).
    pub fn reciprocal_flags(&self) -> &[bool] {
        &self.reciprocal_flags
    }
    /// Directed edges appended per step before reciprocation (m for PA, 1 else).
    pub fn edges_per_step(&self) -> u32 {
        self.edges_per_step
    }

    fn add_node(&mut self) -> u32 {
        let id = self.in_degree.len() as u32;
        self.in_degree.push(0);
        self.out_degree.push(0);
        id
    }

    fn add_edge(&mut self, source: u32, target: u32) {
        self.edge_tails.push(source);
        self.edge_heads.push(target);
        self.out_degree[source as usize] += 1;
        self.sum_out += 1;
        self.in_degree[target as usize] += 1;
        self.sum_in += 1;
    }

    /// Undirected edge for PA: both endpoint degrees live in `in_degree`.
    fn add_undirected_edge(&mut self, new_node: u32, target: u32) {
        self.edge_tails.push(new_node);
        self.edge_heads.push(target);
        self.in_degree[new_node as usize] += 1;
        self.in_degree[target as usize] += 1;
        self.sum_in += 2;
    }

    /// O(1) stub-list consistency check, run after every step in debug builds.
    fn debug_check_stubs(&self) {
        #[cfg(debug_assertions)]
        {
            let edges = self.edge_heads.len() as u64;
            debug_assert_eq!(self.edge_tails.len() as u64, edges);
            match self.kind() {
                ModelKind::Pa => {
                    debug_assert_eq!(self.sum_in, 2 * edges);
                    debug_assert_eq!(self.sum_out, 0);
                }
                _ => {
                    debug_assert_eq!(self.sum_in, edges);
                    debug_assert_eq!(self.sum_out, edges);
                }
            }
        }
    }

    /// Full recomputation of the degree/stub invariant; run once per grown
    /// graph in every build (the release-mode sample point).
    fn audit_stubs(&self) {
        let sum_in: u64 = self.in_degree.iter().map(|&d| d as u64).sum();
        let sum_out: u64 = self.out_degree.iter().map(|&d| d as u64).sum();
        assert_eq!(sum_in, self.sum_in, "in-degree sum drifted from running total");
        assert_eq!(sum_out, self.sum_out, "out-degree sum drifted from running total");
        let edges = self.edge_heads.len() as u64;
        assert_eq!(self.edge_tails.len() as u64, edges);
        match self.kind() {
            ModelKind::Pa => assert_eq!(sum_in, 2 * edges),
            _ => {
                assert_eq!(sum_in, edges);
                assert_eq!(sum_out, edges);
            }
        }
    }
}

/// `(in, out)` degree pair per node, in node order.
pub fn degree_snapshot(graph: &GrowthGraph) -> Vec<(u32, u32)> {
    graph
        .in_degree
        .iter()
        .zip(&graph.out_degree)
        .map(|(&i, &o)| (i, o))
        .collect()
}

fn check_steps(n_steps: u64) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::OutOfRange {
            name: "n_steps",
            value: 0.0,
            detail: "at least one growth step is required",
        });
    }
    if n_steps >= u32::MAX as u64 {
        return Err(Error::OutOfRange {
            name: "n_steps",
            value: n_steps as f64,
            detail: "node ids are 32-bit",
        });
    }
    Ok(())
}

/// Pick a node with probability proportional to
/// `own·1 + cross_weight·other + delta` per node, decomposed as the mixture
/// (uniform own-stub, uniform other-stub, uniform node). Falls back to a
/// uniform node when the total weight vanishes.
#[inline]
fn pick_node(
    rng: &mut ChaCha8Rng,
    own_stubs: &[u32],
    cross_weight: f64,
    cross_stubs: &[u32],
    delta: f64,
    node_count: usize,
) -> u32 {
    let w_own = own_stubs.len() as f64;
    let w_cross = cross_weight * cross_stubs.len() as f64;
    let w_node = delta * node_count as f64;
    let total = w_own + w_cross + w_node;
    if total <= 0.0 {
        return rng.random_range(0..node_count) as u32;
    }
    let x = rng.random::<f64>() * total;
    if x < w_own {
        own_stubs[rng.random_range(0..own_stubs.len())]
    } else if x < w_own + w_cross {
        cross_stubs[rng.random_range(0..cross_stubs.len())]
    } else {
        rng.random_range(0..node_count) as u32
    }
}

/// One directed growth step shared by DPA and GDPA (GDPA passes its cross
/// weights and handles reciprocation outside).
#[inline]
fn directed_step(
    graph: &mut GrowthGraph,
    rng: &mut ChaCha8Rng,
    params: &ModelParams,
    cross_in: f64,
    cross_out: f64,
) {
    let nodes = graph.node_count();
    let event = rng.random::<f64>();
    if event < params.alpha() {
        // new node with an outgoing edge; target picked from pre-step state
        let target = pick_node(
            rng,
            &graph.edge_heads,
            cross_in,
            &graph.edge_tails,
            params.delta_in(),
            nodes,
        );
        let v = graph.add_node();
        graph.add_edge(v, target);
    } else if event < params.alpha() + params.beta() {
        // new edge between existing nodes; endpoints picked independently
        let target = pick_node(
            rng,
            &graph.edge_heads,
            cross_in,
            &graph.edge_tails,
            params.delta_in(),
            nodes,
        );
        let source = pick_node(
            rng,
            &graph.edge_tails,
            cross_out,
            &graph.edge_heads,
            params.delta_out(),
            nodes,
        );
        graph.add_edge(source, target);
    } else {
        // new node with an ingoing edge; source picked from pre-step state
        let source = pick_node(
            rng,
            &graph.edge_tails,
            cross_out,
            &graph.edge_heads,
            params.delta_out(),
            nodes,
        );
        let v = graph.add_node();
        graph.add_edge(source, v);
    }
}

/// Grow a DPA network for `n_steps` events from a single edgeless node.
pub fn grow_dpa(params: &ModelParams, n_steps: u64, seed: RngSeed) -> Result<GrowthGraph> {
    params.expect_kind(ModelKind::Dpa, "grow_dpa")?;
    check_steps(n_steps)?;
    let mut rng = seed.rng();
    let mut graph = GrowthGraph::new(*params, n_steps, 1);
    graph.add_node();
    for _ in 0..n_steps {
        directed_step(&mut graph, &mut rng, params, 0.0, 0.0);
        graph.step_count += 1;
        graph.debug_check_stubs();
    }
    graph.audit_stubs();
    Ok(graph)
}

/// Grow a GDPA network: DPA events with cross-degree attachment weights, plus
/// an independent Bernoulli(ρ) reverse edge after each step's insertion.
/// Reverse edges never trigger their own reciprocation.
pub fn grow_gdpa(params: &ModelParams, n_steps: u64, seed: RngSeed) -> Result<GrowthGraph> {
    params.expect_kind(ModelKind::Gdpa, "grow_gdpa")?;
    check_steps(n_steps)?;
    let mut rng = seed.rng();
    let mut graph = GrowthGraph::new(*params, n_steps, 1);
    graph.add_node();
    let rho = params.rho();
    for _ in 0..n_steps {
        directed_step(
            &mut graph,
            &mut rng,
            params,
            params.cross_in(),
            params.cross_out(),
        );
        let reciprocate = rho > 0.0 && rng.random::<f64>() < rho;
        if reciprocate {
            let e = graph.edge_count() - 1;
            let (source, target) = (graph.edge_tails[e], graph.edge_heads[e]);
            graph.add_edge(target, source);
        }
        graph.reciprocal_flags.push(reciprocate);
        graph.step_count += 1;
        graph.debug_check_stubs();
    }
    graph.audit_stubs();
    Ok(graph)
}

/// Grow an undirected PA network: each step adds one node with `m` edges, each
/// attaching to a node with probability proportional to its degree (uniform
/// stub pick over heads ∪ tails). All `m` targets are drawn from the
/// pre-step state; the step's own stubs are appended afterwards. The very
/// first step sees only the degree-0 seed node and falls back to a uniform
/// (hence certain) pick.
pub fn grow_pa(m: u32, n_steps: u64, seed: RngSeed) -> Result<GrowthGraph> {
    if m == 0 {
        return Err(Error::OutOfRange {
            name: "m",
            value: 0.0,
            detail: "PA adds at least one edge per node",
        });
    }
    check_steps(n_steps)?;
    let mut rng = seed.rng();
    let mut graph = GrowthGraph::new(ModelParams::pa(m)?, n_steps, m);
    graph.add_node();
    let mut targets = Vec::with_capacity(m as usize);
    for _ in 0..n_steps {
        let stubs = graph.edge_heads.len() + graph.edge_tails.len();
        targets.clear();
        for _ in 0..m {
            if stubs == 0 {
                targets.push(rng.random_range(0..graph.node_count()) as u32);
            } else {
                let u = rng.random_range(0..stubs);
                targets.push(if u < graph.edge_heads.len() {
                    graph.edge_heads[u]
                } else {
                    graph.edge_tails[u - graph.edge_heads.len()]
                });
            }
        }
        let v = graph.add_node();
        for &target in &targets {
            graph.add_undirected_edge(v, target);
        }
        graph.step_count += 1;
        graph.debug_check_stubs();
    }
    graph.audit_stubs();
    Ok(graph)
}
