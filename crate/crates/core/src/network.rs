//! Graph and state representation plus the synchronous cascade engine.
//!
//! A `Network` is immutable during a run. Failure is absorbing in the
//! deterministic model classes: once a node is failed it stays failed.

use thiserror::Error;

use crate::models::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("edge ({i},{j}) out of range for n={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("duplicate edge ({i},{j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("edge ({i},{j}) has non-positive weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("state has {state} nodes but network has {network}")]
    SizeMismatch { state: usize, network: usize },
    #[error("max_steps must be at least 1")]
    ZeroMaxSteps,
    #[error("no fixed point reached within {0} steps")]
    NoFixedPoint(usize),
    #[error(transparent)]
    Model(#[from] crate::models::ModelError),
}

/// Directed weighted graph, static during a cascade run. `a[i][j] > 0`
/// means an edge i -> j; neighbor sets are kept consistent with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    out_nb: Vec<Vec<usize>>,
    in_nb: Vec<Vec<usize>>,
    out_w: Vec<Vec<f64>>,
}

impl Network {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_nb[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_nb[i]
    }

    pub fn k_out(&self, i: usize) -> usize {
        self.out_nb[i].len()
    }

    pub fn k_in(&self, i: usize) -> usize {
        self.in_nb[i].len()
    }

    /// Weight of the edge i -> j, or 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.out_nb[i].binary_search(&j) {
            Ok(pos) => self.out_w[i][pos],
            Err(_) => 0.0,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.out_nb[i]
                .iter()
                .zip(&self.out_w[i])
                .map(move |(&j, &w)| (i, j, w))
        })
    }
}

/// Build a network from an edge list. With `undirected` every edge is
/// mirrored. Rejects out-of-range indices, duplicates (after mirroring)
/// and non-positive weights.
pub fn build_network(
    edges: &[(usize, usize, f64)],
    n: usize,
    undirected: bool,
) -> Result<Network, NetworkError> {
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut in_nb: Vec<Vec<usize>> = vec![Vec::new(); n];

    let insert = |out: &mut Vec<Vec<(usize, f64)>>, i: usize, j: usize, w: f64| {
        if i >= n || j >= n {
            return Err(NetworkError::IndexOutOfRange { i, j, n });
        }
        if w <= 0.0 {
            return Err(NetworkError::NonPositiveWeight { i, j, w });
        }
        if out[i].iter().any(|&(t, _)| t == j) {
            return Err(NetworkError::DuplicateEdge { i, j });
        }
        out[i].push((j, w));
        Ok(())
    };

    for &(i, j, w) in edges {
        insert(&mut out, i, j, w)?;
        if undirected && i != j {
            insert(&mut out, j, i, w)?;
        }
    }

    for (i, targets) in out.iter_mut().enumerate() {
        targets.sort_by_key(|&(j, _)| j);
        for &(j, _) in targets.iter() {
            in_nb[j].push(i);
        }
    }
    for nb in &mut in_nb {
        nb.sort_unstable();
    }

    let (out_nb, out_w) = out
        .into_iter()
        .map(|v| v.into_iter().unzip())
        .unzip::<Vec<usize>, Vec<f64>, Vec<_>, Vec<_>>();

    Ok(Network {
        n,
        out_nb,
        in_nb,
        out_w,
    })
}

/// Per-node failure flag, fragility and threshold(s). `theta_prime` is the
/// recovery threshold used only by the stochastic layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub s: Vec<bool>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_prime: Option<Vec<f64>>,
}

impl NodeState {
    /// All-healthy state with zero fragility.
    pub fn healthy(theta: Vec<f64>) -> Self {
        let n = theta.len();
        NodeState {
            s: vec![false; n],
            phi: vec![0.0; n],
            theta,
            theta_prime: None,
        }
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// Net fragility z_i = phi_i - theta_i; z >= 0 means failing.
    pub fn net_fragility(&self, i: usize) -> f64 {
        self.phi[i] - self.theta[i]
    }

    pub fn theta_prime_of(&self, i: usize) -> f64 {
        match &self.theta_prime {
            Some(tp) => tp[i],
            None => self.theta[i],
        }
    }
}

pub fn net_fragility(state: &NodeState, i: usize) -> f64 {
    state.net_fragility(i)
}

/// Fraction of failed nodes X = (1/n) sum s_i.
pub fn fraction_failed(state: &NodeState) -> f64 {
    if state.s.is_empty() {
        return 0.0;
    }
    state.s.iter().filter(|&&b| b).count() as f64 / state.s.len() as f64
}

/// Synchronous threshold rule s_i(t+1) = Theta(z_i(t)), with Theta(0) = 1
/// and absorbing failure: an already-failed node never recovers here.
pub fn apply_threshold(state: &NodeState) -> NodeState {
    let mut next = state.clone();
    for i in 0..state.n() {
        next.s[i] = state.s[i] || state.net_fragility(i) >= 0.0;
    }
    next
}

/// Time-indexed snapshots of a deterministic run plus the X(t) series.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub states: Vec<NodeState>,
    pub x_series: Vec<f64>,
    pub terminated_at: usize,
}

impl CascadeTrace {
    pub fn final_fraction(&self) -> f64 {
        *self.x_series.last().expect("trace is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Run a deterministic cascade to its fixed point.
///
/// Each step evaluates the model's fragility rule against the time-t state
/// and then applies the threshold rule to every node simultaneously. The
/// run stops when no failure flag changes; any deterministic model reaches
/// that within n+1 steps, so `max_steps = n + 1` is a safe default.
pub fn run_cascade(
    spec: &ModelSpec,
    network: &Network,
    init: &NodeState,
    max_steps: usize,
) -> Result<CascadeTrace, CascadeError> {
    if init.n() != network.n() {
        return Err(CascadeError::SizeMismatch {
            state: init.n(),
            network: network.n(),
        });
    }
    if max_steps == 0 {
        return Err(CascadeError::ZeroMaxSteps);
    }
    spec.validate(network.n())?;

    let mut state = init.clone();
    state.phi = spec.initial_fragility(network, &state);

    let mut states = vec![state.clone()];
    let mut x_series = vec![fraction_failed(&state)];

    for _ in 0..max_steps {
        let next = spec.step(network, &state);
        if next.s == state.s {
            let terminated_at = states.len() - 1;
            return Ok(CascadeTrace {
                states,
                x_series,
                terminated_at,
            });
        }
        x_series.push(fraction_failed(&next));
        states.push(next.clone());
        state = next;
    }
    Err(CascadeError::NoFixedPoint(max_steps))
}
