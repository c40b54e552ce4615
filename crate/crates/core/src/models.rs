//! The six deterministic fragility-update rules: constant load (inward,
//! outward), load redistribution (LLSC, LLSS) and overload redistribution
//! (LLSC, LLSS).
//!
//! LLSC keeps links through failed nodes, so load travels along chains of
//! failures and is conserved whenever every failed node can still reach a
//! healthy one. LLSS transfers only to surviving first neighbours and sheds
//! the load otherwise.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::network::{apply_threshold, Network, NodeState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("phi0 has {got} entries but the network has {expected} nodes")]
    Phi0Length { got: usize, expected: usize },
    #[error("load redistribution requires phi0 >= 0, got {value} at node {index}")]
    NegativePhi0 { index: usize, value: f64 },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{0}` defines fragility recursively and cannot be used as a state-function rule")]
    NotAStateFunction(ModelKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadVariant {
    Inward,
    Outward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharingVariant {
    Llsc,
    Llss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelClass {
    ConstantLoad,
    LoadRedistribution,
    OverloadRedistribution,
}

/// Model selector as exposed on the CLI and in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    ConstantIn,
    ConstantOut,
    LoadLlsc,
    LoadLlss,
    OverloadLlsc,
    OverloadLlss,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::ConstantIn,
        ModelKind::ConstantOut,
        ModelKind::LoadLlsc,
        ModelKind::LoadLlss,
        ModelKind::OverloadLlsc,
        ModelKind::OverloadLlss,
    ];

    pub fn class(&self) -> ModelClass {
        match self {
            ModelKind::ConstantIn | ModelKind::ConstantOut => ModelClass::ConstantLoad,
            ModelKind::LoadLlsc | ModelKind::LoadLlss => ModelClass::LoadRedistribution,
            ModelKind::OverloadLlsc | ModelKind::OverloadLlss => {
                ModelClass::OverloadRedistribution
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ModelKind::ConstantIn => "constant-in",
            ModelKind::ConstantOut => "constant-out",
            ModelKind::LoadLlsc => "load-llsc",
            ModelKind::LoadLlss => "load-llss",
            ModelKind::OverloadLlsc => "overload-llsc",
            ModelKind::OverloadLlss => "overload-llss",
        }
    }

    fn is_llss(&self) -> bool {
        matches!(self, ModelKind::LoadLlss | ModelKind::OverloadLlss)
    }

    /// Overload models transfer phi - theta instead of phi.
    fn subtracts_threshold(&self) -> bool {
        self.class() == ModelClass::OverloadRedistribution
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// A concrete model: the rule plus the initial load vector phi0 used by the
/// redistribution classes. Constant-load models carry no initial load.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub phi0: Vec<f64>,
}

impl ModelSpec {
    pub fn constant_load(variant: LoadVariant) -> Self {
        let kind = match variant {
            LoadVariant::Inward => ModelKind::ConstantIn,
            LoadVariant::Outward => ModelKind::ConstantOut,
        };
        ModelSpec {
            kind,
            phi0: Vec::new(),
        }
    }

    pub fn load_redistribution(
        variant: SharingVariant,
        phi0: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if let Some(index) = phi0.iter().position(|&v| v < 0.0) {
            return Err(ModelError::NegativePhi0 {
                index,
                value: phi0[index],
            });
        }
        let kind = match variant {
            SharingVariant::Llsc => ModelKind::LoadLlsc,
            SharingVariant::Llss => ModelKind::LoadLlss,
        };
        Ok(ModelSpec { kind, phi0 })
    }

    pub fn overload_redistribution(variant: SharingVariant, phi0: Vec<f64>) -> Self {
        let kind = match variant {
            SharingVariant::Llsc => ModelKind::OverloadLlsc,
            SharingVariant::Llss => ModelKind::OverloadLlss,
        };
        ModelSpec { kind, phi0 }
    }

    /// Build a spec for `kind`, attaching phi0 where the class needs it.
    pub fn from_kind(kind: ModelKind, phi0: Vec<f64>) -> Result<Self, ModelError> {
        match kind {
            ModelKind::ConstantIn => Ok(ModelSpec::constant_load(LoadVariant::Inward)),
            ModelKind::ConstantOut => Ok(ModelSpec::constant_load(LoadVariant::Outward)),
            ModelKind::LoadLlsc => ModelSpec::load_redistribution(SharingVariant::Llsc, phi0),
            ModelKind::LoadLlss => ModelSpec::load_redistribution(SharingVariant::Llss, phi0),
            ModelKind::OverloadLlsc => {
                Ok(ModelSpec::overload_redistribution(SharingVariant::Llsc, phi0))
            }
            ModelKind::OverloadLlss => {
                Ok(ModelSpec::overload_redistribution(SharingVariant::Llss, phi0))
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        if self.kind.class() != ModelClass::ConstantLoad && self.phi0.len() != n {
            return Err(ModelError::Phi0Length {
                got: self.phi0.len(),
                expected: n,
            });
        }
        Ok(())
    }

    /// Fragility at t = 0 consistent with the initial failure flags.
    pub fn initial_fragility(&self, network: &Network, init: &NodeState) -> Vec<f64> {
        match self.kind {
            ModelKind::ConstantIn => fragility_constant_inward(network, init),
            ModelKind::ConstantOut => fragility_constant_outward(network, init),
            ModelKind::LoadLlsc | ModelKind::OverloadLlsc => {
                let fresh = llsc_fragility(network, &init.s, &init.theta, self);
                keep_failed_phi(&init.s, &init.phi, fresh)
            }
            ModelKind::LoadLlss | ModelKind::OverloadLlss => self.phi0.clone(),
        }
    }

    /// One synchronous step: threshold rule on the time-t state, then the
    /// model's fragility update.
    pub fn step(&self, network: &Network, state: &NodeState) -> NodeState {
        if self.kind.is_llss() {
            return step_llss(network, state, self);
        }
        let mut next = apply_threshold(state);
        next.phi = match self.kind {
            ModelKind::ConstantIn => fragility_constant_inward(network, &next),
            ModelKind::ConstantOut => fragility_constant_outward(network, &next),
            _ => {
                let fresh = llsc_fragility(network, &next.s, &next.theta, self);
                keep_failed_phi(&next.s, &state.phi, fresh)
            }
        };
        next
    }

    /// Fragility as a pure function of the failure flags, for the stochastic
    /// layer. LLSS is recursive in phi and is rejected.
    pub fn state_fragility(
        &self,
        network: &Network,
        state: &NodeState,
    ) -> Result<Vec<f64>, ModelError> {
        match self.kind {
            ModelKind::ConstantIn => Ok(fragility_constant_inward(network, state)),
            ModelKind::ConstantOut => Ok(fragility_constant_outward(network, state)),
            ModelKind::LoadLlsc | ModelKind::OverloadLlsc => {
                Ok(llsc_fragility(network, &state.s, &state.theta, self))
            }
            k => Err(ModelError::NotAStateFunction(k)),
        }
    }
}

// Failed nodes keep their last fragility; it plays no further role.
fn keep_failed_phi(s: &[bool], prev_phi: &[f64], mut fresh: Vec<f64>) -> Vec<f64> {
    for i in 0..s.len() {
        if s[i] {
            fresh[i] = prev_phi[i];
        }
    }
    fresh
}

/// Inward constant load: phi_i is the fraction of failed in-neighbors.
/// Nodes with no in-neighbors feel no contagion pressure (phi = 0).
pub fn fragility_constant_inward(network: &Network, state: &NodeState) -> Vec<f64> {
    (0..network.n())
        .map(|i| {
            let k_in = network.k_in(i);
            if k_in == 0 {
                return 0.0;
            }
            let failed = network
                .in_neighbors(i)
                .iter()
                .filter(|&&j| state.s[j])
                .count();
            failed as f64 / k_in as f64
        })
        .collect()
}

/// Outward constant load: each failed neighbor j contributes 1/k_out(j),
/// so the damage of a failure is split among the failer's out-neighbors.
pub fn fragility_constant_outward(network: &Network, state: &NodeState) -> Vec<f64> {
    (0..network.n())
        .map(|i| {
            network
                .in_neighbors(i)
                .iter()
                .filter(|&&j| state.s[j])
                .map(|&j| 1.0 / network.k_out(j) as f64)
                .sum()
        })
        .collect()
}

/// Failed nodes from which `i` can be reached along directed paths whose
/// interior nodes are all failed.
pub fn reach_failed_in(network: &Network, state: &NodeState, i: usize) -> Vec<usize> {
    let mut seen = vec![false; network.n()];
    seen[i] = true;
    let mut queue = VecDeque::new();
    let mut reach = Vec::new();
    for &j in network.in_neighbors(i) {
        if state.s[j] && !seen[j] {
            seen[j] = true;
            reach.push(j);
            queue.push_back(j);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &j in network.in_neighbors(u) {
            if state.s[j] && !seen[j] {
                seen[j] = true;
                reach.push(j);
                queue.push_back(j);
            }
        }
    }
    reach.sort_unstable();
    reach
}

/// Healthy nodes reachable from `j` along directed paths of failed
/// interior nodes. `j` itself is never a member.
pub fn reach_healthy_out(network: &Network, state: &NodeState, j: usize) -> Vec<usize> {
    let mut seen = vec![false; network.n()];
    seen[j] = true;
    let mut queue = VecDeque::new();
    let mut reach = Vec::new();
    queue.push_back(j);
    while let Some(u) = queue.pop_front() {
        for &v in network.out_neighbors(u) {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if state.s[v] {
                queue.push_back(v);
            } else {
                reach.push(v);
            }
        }
    }
    reach.sort_unstable();
    reach
}

/// LLSC fragility: initial load plus, for every upstream failed node, an
/// equal share of its load (class ii) or overload (class iii) over the
/// healthy nodes it can still reach. A failed node with an empty reach set
/// sheds its load; no healthy node receives it.
pub fn fragility_llsc(network: &Network, state: &NodeState, spec: &ModelSpec) -> Vec<f64> {
    let fresh = llsc_fragility(network, &state.s, &state.theta, spec);
    keep_failed_phi(&state.s, &state.phi, fresh)
}

fn llsc_fragility(network: &Network, s: &[bool], theta: &[f64], spec: &ModelSpec) -> Vec<f64> {
    let mut phi = spec.phi0.clone();
    if phi.is_empty() {
        phi = vec![0.0; network.n()];
    }
    let state_view = NodeState {
        s: s.to_vec(),
        phi: vec![0.0; s.len()],
        theta: theta.to_vec(),
        theta_prime: None,
    };
    for j in 0..network.n() {
        if !s[j] {
            continue;
        }
        let reach = reach_healthy_out(network, &state_view, j);
        if reach.is_empty() {
            continue; // nothing downstream can carry it: shed
        }
        let load = if spec.kind.subtracts_threshold() {
            spec.phi0[j] - theta[j]
        } else {
            spec.phi0[j]
        };
        let share = load / reach.len() as f64;
        for &i in &reach {
            phi[i] += share;
        }
    }
    phi
}

/// One LLSS step. Nodes failing at time t hand their load (class ii) or
/// overload (class iii) in equal shares to the out-neighbors that remain
/// healthy at t+1; if none exist the load is shed. Failed and failing
/// nodes end with phi = 0.
pub fn step_llss(network: &Network, state: &NodeState, spec: &ModelSpec) -> NodeState {
    let n = network.n();
    let failing: Vec<bool> = (0..n)
        .map(|i| !state.s[i] && state.net_fragility(i) >= 0.0)
        .collect();
    // survivors: healthy now and below threshold, so alive at t+1
    let survives = |i: usize| !state.s[i] && !failing[i];

    let mut next = apply_threshold(state);
    let mut phi = vec![0.0; n];
    for i in 0..n {
        if survives(i) {
            phi[i] = state.phi[i];
        }
    }
    for j in 0..n {
        if !failing[j] {
            continue;
        }
        let hea_out: Vec<usize> = network
            .out_neighbors(j)
            .iter()
            .copied()
            .filter(|&i| survives(i))
            .collect();
        if hea_out.is_empty() {
            continue; // no surviving neighbour: the load has to be shed
        }
        let load = if spec.kind.subtracts_threshold() {
            state.phi[j] - state.theta[j]
        } else {
            state.phi[j]
        };
        let share = load / hea_out.len() as f64;
        for &i in &hea_out {
            phi[i] += share;
        }
    }
    next.phi = phi;
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_network;

    fn healthy_state(n: usize, theta: f64) -> NodeState {
        NodeState::healthy(vec![theta; n])
    }

    fn mark_failed(state: &mut NodeState, nodes: &[usize]) {
        for &i in nodes {
            state.s[i] = true;
        }
    }

    fn star5() -> Network {
        // center 0, leaves 1..=4
        build_network(
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
            5,
            true,
        )
        .unwrap()
    }

    #[test]
    fn inward_no_failures_is_zero() {
        let net = star5();
        let st = healthy_state(5, 0.5);
        assert_eq!(fragility_constant_inward(&net, &st), vec![0.0; 5]);
    }

    #[test]
    fn inward_fraction_of_failed_neighbors() {
        // node 3 has in-neighbors {0,1,2}, two of them failed
        let net = build_network(&[(0, 3, 1.0), (1, 3, 1.0), (2, 3, 1.0)], 4, false).unwrap();
        let mut st = healthy_state(4, 0.5);
        mark_failed(&mut st, &[0, 1]);
        let phi = fragility_constant_inward(&net, &st);
        assert!((phi[3] - 2.0 / 3.0).abs() < 1e-15);
        // isolated in-degree-0 nodes carry no pressure
        assert_eq!(phi[0], 0.0);
    }

    #[test]
    fn inward_star_center_one_leaf_failed() {
        let net = star5();
        let mut st = healthy_state(5, 0.5);
        mark_failed(&mut st, &[1]);
        let phi = fragility_constant_inward(&net, &st);
        assert!((phi[0] - 0.25).abs() < 1e-15);
        assert_eq!(phi[2], 0.0);
        assert_eq!(phi[3], 0.0);
    }

    #[test]
    fn inward_bounded_by_one() {
        let net = star5();
        let mut st = healthy_state(5, 0.5);
        mark_failed(&mut st, &[1, 2, 3, 4]);
        let phi = fragility_constant_inward(&net, &st);
        assert!(phi.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert_eq!(phi[0], 1.0);
    }

    #[test]
    fn outward_single_out_neighbor_contributes_fully() {
        let net = build_network(&[(0, 1, 1.0)], 2, false).unwrap();
        let mut st = healthy_state(2, 0.5);
        mark_failed(&mut st, &[0]);
        let phi = fragility_constant_outward(&net, &st);
        assert_eq!(phi[1], 1.0);
    }

    #[test]
    fn outward_star_failed_center_splits_load() {
        let net = star5();
        let mut st = healthy_state(5, 0.5);
        mark_failed(&mut st, &[0]);
        let phi = fragility_constant_outward(&net, &st);
        for leaf in 1..5 {
            assert!((phi[leaf] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn outward_no_failures_is_zero() {
        let net = star5();
        let st = healthy_state(5, 0.5);
        assert_eq!(fragility_constant_outward(&net, &st), vec![0.0; 5]);
    }

    #[test]
    fn reach_sets_empty_without_failures() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, false).unwrap();
        let st = healthy_state(3, 0.5);
        assert!(reach_failed_in(&net, &st, 2).is_empty());
        assert!(reach_healthy_out(&net, &st, 0).is_empty() || !st.s[0]);
    }

    #[test]
    fn reach_failed_in_follows_failed_chain() {
        // j(0, failed) -> m(1, failed) -> i(2, healthy)
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, false).unwrap();
        let mut st = healthy_state(3, 0.5);
        mark_failed(&mut st, &[0, 1]);
        assert_eq!(reach_failed_in(&net, &st, 2), vec![0, 1]);
    }

    #[test]
    fn reach_failed_in_excludes_unconnected_failures() {
        // failed node 3 has no path to node 2
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)], 4, false).unwrap();
        let mut st = healthy_state(4, 0.5);
        mark_failed(&mut st, &[1, 3]);
        // 3 -> 0 but 0 is healthy, so the path 3 -> 0 -> 1 -> 2 is blocked
        assert_eq!(reach_failed_in(&net, &st, 2), vec![1]);
    }

    #[test]
    fn reach_healthy_out_two_hop_chain() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)], 4, false).unwrap();
        let mut st = healthy_state(4, 0.5);
        mark_failed(&mut st, &[0, 1]);
        assert_eq!(reach_healthy_out(&net, &st, 0), vec![2, 3]);
    }

    #[test]
    fn reach_healthy_out_blocked_by_healthy_interior() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, false).unwrap();
        let mut st = healthy_state(3, 0.5);
        mark_failed(&mut st, &[0]);
        // node 1 is healthy, so 2 is not reachable through failed nodes
        assert_eq!(reach_healthy_out(&net, &st, 0), vec![1]);
    }

    #[test]
    fn llsc_without_failures_returns_phi0() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llsc, vec![1.0, 2.0, 3.0]).unwrap();
        let st = healthy_state(3, 10.0);
        assert_eq!(fragility_llsc(&net, &st, &spec), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn llsc_path_hand_evaluation() {
        // A(0, failed, phi0 = 1) - B(1) - C(2) undirected:
        // reach_healthy_out(A) = {B}; phi_B = 1 + 1, phi_C = 1.
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llsc, vec![1.0, 1.0, 1.0]).unwrap();
        let mut st = healthy_state(3, 10.0);
        mark_failed(&mut st, &[0]);
        let phi = fragility_llsc(&net, &st, &spec);
        assert!((phi[1] - 2.0).abs() < 1e-15);
        assert!((phi[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overload_llsc_transfers_excess_only() {
        // phi0 = 0, A failed with theta_A = -0.6, B the only healthy reach:
        // phi_B = 0 + 0.6.
        let net = build_network(&[(0, 1, 1.0)], 2, true).unwrap();
        let spec = ModelSpec::overload_redistribution(SharingVariant::Llsc, vec![0.0, 0.0]);
        let mut st = NodeState::healthy(vec![-0.6, 5.0]);
        mark_failed(&mut st, &[0]);
        let phi = fragility_llsc(&net, &st, &spec);
        assert!((phi[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn llss_without_new_failures_keeps_phi() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llss, vec![0.3, 0.2, 0.1]).unwrap();
        let st = NodeState {
            s: vec![false; 3],
            phi: vec![0.3, 0.2, 0.1],
            theta: vec![1.0; 3],
            theta_prime: None,
        };
        let next = step_llss(&net, &st, &spec);
        assert_eq!(next.phi, vec![0.3, 0.2, 0.1]);
        assert_eq!(next.s, vec![false; 3]);
    }

    #[test]
    fn llss_failing_node_splits_load_between_survivors() {
        // node 0 fails with phi = 2, its two out-neighbors survive
        let net = build_network(&[(0, 1, 1.0), (0, 2, 1.0)], 3, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llss, vec![2.0, 0.0, 0.0]).unwrap();
        let st = NodeState {
            s: vec![false; 3],
            phi: vec![2.0, 0.0, 0.0],
            theta: vec![1.5, 10.0, 10.0],
            theta_prime: None,
        };
        let next = step_llss(&net, &st, &spec);
        assert_eq!(next.s, vec![true, false, false]);
        assert_eq!(next.phi[0], 0.0);
        assert!((next.phi[1] - 1.0).abs() < 1e-15);
        assert!((next.phi[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn llss_sheds_when_all_neighbors_fail_too() {
        let net = build_network(&[(0, 1, 1.0)], 2, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llss, vec![2.0, 2.0]).unwrap();
        let st = NodeState {
            s: vec![false; 2],
            phi: vec![2.0, 2.0],
            theta: vec![1.0, 1.0],
            theta_prime: None,
        };
        let before: f64 = st.phi.iter().sum();
        let next = step_llss(&net, &st, &spec);
        let after: f64 = next.phi.iter().sum();
        assert_eq!(next.s, vec![true, true]);
        // both loads shed entirely
        assert_eq!(after, 0.0);
        assert!(after <= before);
    }

    #[test]
    fn llss_excludes_failing_receivers() {
        // 0 and 1 both fail this step; 1 must not receive 0's load even
        // though it is still formally healthy at time t.
        let net = build_network(&[(0, 1, 1.0), (0, 2, 1.0)], 3, true).unwrap();
        let spec =
            ModelSpec::load_redistribution(SharingVariant::Llss, vec![2.0, 2.0, 0.0]).unwrap();
        let st = NodeState {
            s: vec![false; 3],
            phi: vec![2.0, 2.0, 0.0],
            theta: vec![1.0, 1.0, 10.0],
            theta_prime: None,
        };
        let next = step_llss(&net, &st, &spec);
        // node 2 receives all of node 0's load; node 1 sheds (its only
        // neighbor is node 0, which is failing)
        assert!((next.phi[2] - 2.0).abs() < 1e-15);
        assert_eq!(next.phi[1], 0.0);
    }

    #[test]
    fn overload_llss_subtracts_threshold() {
        let net = build_network(&[(0, 1, 1.0)], 2, true).unwrap();
        let spec = ModelSpec::overload_redistribution(SharingVariant::Llss, vec![2.0, 0.0]);
        let st = NodeState {
            s: vec![false; 2],
            phi: vec![2.0, 0.0],
            theta: vec![0.5, 10.0],
            theta_prime: None,
        };
        let next = step_llss(&net, &st, &spec);
        assert!((next.phi[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn model_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.to_string().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("constant-sideways".parse::<ModelKind>().is_err());
    }

    #[test]
    fn load_redistribution_rejects_negative_phi0() {
        let err = ModelSpec::load_redistribution(SharingVariant::Llsc, vec![0.5, -0.1]);
        assert!(matches!(
            err,
            Err(ModelError::NegativePhi0 { index: 1, .. })
        ));
    }

    #[test]
    fn validate_checks_phi0_length() {
        let spec = ModelSpec::load_redistribution(SharingVariant::Llsc, vec![1.0; 3]).unwrap();
        assert!(spec.validate(3).is_ok());
        assert!(spec.validate(4).is_err());
        // constant load needs no phi0
        assert!(ModelSpec::constant_load(LoadVariant::Inward).validate(7).is_ok());
    }
}
