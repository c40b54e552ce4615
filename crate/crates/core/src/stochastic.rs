//! Stochastic failure/recovery transitions and the macroscopic maps that
//! recover the deterministic limit, the voter model and SIS/SI.
//!
//! Transition probabilities follow the logit family: failing becomes more
//! likely as z = phi - theta grows, recovering as z' = phi - theta' falls.
//! Large beta approaches the deterministic threshold rule, beta -> 0 the
//! random limit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::meanfield::DiscretizedDensity;
use crate::models::{ModelError, ModelSpec};
use crate::network::{fraction_failed, Network, NodeState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StochasticError {
    #[error("gamma must lie in [0,1], got {0}")]
    GammaOutOfRange(f64),
    #[error("probability parameter must lie in [0,1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("contact degree k must be at least 1")]
    ZeroDegree,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters of the logit transition family. `beta`, `theta`, `gamma`
/// shape the transition into the failed state; the primed set shapes the
/// transition back to health.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub beta: f64,
    pub beta_prime: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub theta: f64,
    pub theta_prime: f64,
}

impl TransitionParams {
    pub fn new(
        beta: f64,
        beta_prime: f64,
        gamma: f64,
        gamma_prime: f64,
        theta: f64,
        theta_prime: f64,
    ) -> Result<Self, StochasticError> {
        for g in [gamma, gamma_prime] {
            if !(0.0..=1.0).contains(&g) {
                return Err(StochasticError::GammaOutOfRange(g));
            }
        }
        Ok(TransitionParams {
            beta,
            beta_prime,
            gamma,
            gamma_prime,
            theta,
            theta_prime,
        })
    }

    /// Symmetric parameters: beta' = beta, theta' = theta, gamma = gamma' = 1.
    pub fn symmetric(beta: f64, theta: f64) -> Self {
        TransitionParams {
            beta,
            beta_prime: beta,
            gamma: 1.0,
            gamma_prime: 1.0,
            theta,
            theta_prime: theta,
        }
    }

    /// Net fragilities (z, z') of a node with fragility phi under the
    /// homogeneous thresholds carried here.
    pub fn z_pair(&self, phi: f64) -> (f64, f64) {
        (phi - self.theta, phi - self.theta_prime)
    }
}

/// Deterministic RNG for stochastic runs; replica r of a seeded experiment
/// uses `seeded_rng(seed + r)`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// logistic(a) = 1/(1+exp(-a)), evaluated without overflow.
fn logistic(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Failure probability of the logit family,
/// p(1) = exp(beta z) / (exp(beta z) + exp(-beta' z')), computed in
/// log-space so large beta never overflows.
pub fn logit_prob(z: f64, z_prime: f64, params: &TransitionParams) -> f64 {
    logistic(params.beta * z + params.beta_prime * z_prime)
}

/// Transition pair (p_fail, p_recover) scaled by the range parameters.
/// With gamma = gamma' the pair satisfies detailed balance.
pub fn transition_probs(z: f64, z_prime: f64, params: &TransitionParams) -> (f64, f64) {
    let p1 = logit_prob(z, z_prime, params);
    (params.gamma * p1, params.gamma_prime * (1.0 - p1))
}

/// One synchronous stochastic sweep: every node resamples its state from
/// the transition pair at its current (z, z'). The fragility rule must be
/// a pure function of the failure flags (LLSS is rejected).
pub fn stochastic_step(
    network: &Network,
    state: &NodeState,
    params: &TransitionParams,
    fragility_rule: &ModelSpec,
    rng: &mut ChaCha8Rng,
) -> Result<NodeState, StochasticError> {
    let phi = fragility_rule.state_fragility(network, state)?;
    let mut next = state.clone();
    next.phi = phi;
    for i in 0..network.n() {
        let z = next.phi[i] - state.theta[i];
        let z_prime = next.phi[i] - state.theta_prime_of(i);
        let (p_fail, p_recover) = transition_probs(z, z_prime, params);
        let u: f64 = rng.gen();
        next.s[i] = if state.s[i] {
            u >= p_recover
        } else {
            u < p_fail
        };
    }
    Ok(next)
}

/// Multi-step stochastic cascade from a seed; returns the state sequence
/// including the initial state.
pub fn stochastic_cascade(
    network: &Network,
    init: &NodeState,
    params: &TransitionParams,
    fragility_rule: &ModelSpec,
    steps: usize,
    seed: u64,
) -> Result<Vec<NodeState>, StochasticError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(steps + 1);
    let mut cur = init.clone();
    cur.phi = fragility_rule.state_fragility(network, &cur)?;
    states.push(cur.clone());
    for _ in 0..steps {
        cur = stochastic_step(network, &cur, params, fragility_rule, &mut rng)?;
        states.push(cur.clone());
    }
    Ok(states)
}

/// Density of net fragility for the macroscopic master equation: either a
/// point mass (homogeneous threshold) or a binned density with z' = z +
/// (theta - theta').
pub enum NetFragilityDensity<'a> {
    Delta { z: f64, z_prime: f64 },
    Binned { density: &'a DiscretizedDensity, theta_shift: f64 },
}

/// Expected-fraction update
/// X' = X + (1-X) E[p(1|0;z)] - X E[p(0|1;z')], clamped to [0,1].
pub fn macro_step(x: f64, pz: &NetFragilityDensity, params: &TransitionParams) -> f64 {
    let (fail_exp, rec_exp) = match pz {
        NetFragilityDensity::Delta { z, z_prime } => {
            let (pf, pr) = transition_probs(*z, *z_prime, params);
            (pf, pr)
        }
        NetFragilityDensity::Binned {
            density,
            theta_shift,
        } => {
            let total = density.total_mass();
            let mut fail = 0.0;
            let mut rec = 0.0;
            for i in 0..density.bins() {
                let m = density.mass()[i];
                if m == 0.0 {
                    continue;
                }
                let z = density.bin_center(i);
                let (pf, pr) = transition_probs(z, z + theta_shift, params);
                fail += m * pf;
                rec += m * pr;
            }
            if total > 0.0 {
                (fail / total, rec / total)
            } else {
                (0.0, 0.0)
            }
        }
    };
    (x + (1.0 - x) * fail_exp - x * rec_exp).clamp(0.0, 1.0)
}

/// Frequency-dependent response of the nonlinear voter model. F1 scales
/// the transition to the failed state, F2 the transition back.
pub struct VmResponse<F1, F2>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    pub f1: F1,
    pub f2: F2,
}

impl VmResponse<fn(f64) -> f64, fn(f64) -> f64> {
    /// The linear voter model: F1 = F2 = 1.
    pub fn linear() -> Self {
        VmResponse {
            f1: |_| 1.0,
            f2: |_| 1.0,
        }
    }
}

/// Voter-model mean-field map X' = X + (1-X) X [F1(X) - F2(X)].
/// The linear model leaves X unchanged; 0 and 1 are always fixed.
pub fn vm_macro_step<F1, F2>(x: f64, response: &VmResponse<F1, F2>) -> f64
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    (x + (1.0 - x) * x * ((response.f1)(x) - (response.f2)(x))).clamp(0.0, 1.0)
}

/// SIS parameters: per-contact infection probability, recovery probability
/// and contact degree. The epidemic threshold is nu_c = delta / k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisParams {
    pub nu: f64,
    pub delta: f64,
    pub k: u32,
}

impl SisParams {
    pub fn new(nu: f64, delta: f64, k: u32) -> Result<Self, StochasticError> {
        for p in [nu, delta] {
            if !(0.0..=1.0).contains(&p) {
                return Err(StochasticError::ProbabilityOutOfRange(p));
            }
        }
        if k == 0 {
            return Err(StochasticError::ZeroDegree);
        }
        Ok(SisParams { nu, delta, k })
    }

    pub fn critical_nu(&self) -> f64 {
        self.delta / self.k as f64
    }

    /// Nontrivial fixed point 1 - delta/(nu k), when it exists.
    pub fn endemic_fixed_point(&self) -> Option<f64> {
        let nk = self.nu * self.k as f64;
        if self.nu > self.critical_nu() {
            Some(1.0 - self.delta / nk)
        } else {
            None
        }
    }
}

/// SIS mean-field map X' = X + nu k X (1-X) - delta X, clamped to [0,1].
/// With delta = 0 this is logistic growth toward full infection.
pub fn sis_macro_step(x: f64, p: &SisParams) -> f64 {
    (x + p.nu * p.k as f64 * x * (1.0 - x) - p.delta * x).clamp(0.0, 1.0)
}

/// Outcome of one voter-model realization.
#[derive(Debug, Clone, PartialEq)]
pub struct VmRun {
    /// X after each unit of time (n micro-updates).
    pub x_series: Vec<f64>,
    /// Some(true) for consensus on the failed state, Some(false) for the
    /// healthy state, None if max_time ran out first.
    pub consensus: Option<bool>,
    pub time: usize,
}

/// Classic voter model on the complete graph: per micro-update a random
/// node copies the state of another random node; n such events advance
/// time by 1. Runs until consensus or max_time.
pub fn vm_monte_carlo_complete(
    n: usize,
    initial_failed: usize,
    max_time: usize,
    rng: &mut ChaCha8Rng,
) -> VmRun {
    assert!(n >= 2 && initial_failed <= n);
    let mut s = vec![false; n];
    for flag in s.iter_mut().take(initial_failed) {
        *flag = true;
    }
    let mut failed = initial_failed;
    let mut x_series = vec![failed as f64 / n as f64];
    for t in 1..=max_time {
        if failed == 0 || failed == n {
            return VmRun {
                x_series,
                consensus: Some(failed == n),
                time: t - 1,
            };
        }
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let j = loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            };
            if s[i] != s[j] {
                if s[j] {
                    failed += 1;
                } else {
                    failed -= 1;
                }
                s[i] = s[j];
            }
        }
        x_series.push(failed as f64 / n as f64);
    }
    let consensus = if failed == 0 || failed == n {
        Some(failed == n)
    } else {
        None
    };
    VmRun {
        x_series,
        consensus,
        time: max_time,
    }
}

/// Mean X(t) across stochastic cascade replicas, plus each replica's final
/// fraction. Replica r uses seed `seed + r` so runs are reproducible and
/// order-independent.
pub fn stochastic_cascade_ensemble(
    network: &Network,
    init: &NodeState,
    params: &TransitionParams,
    fragility_rule: &ModelSpec,
    steps: usize,
    replicas: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), StochasticError> {
    let mut mean_x = vec![0.0; steps + 1];
    let mut finals = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let states = stochastic_cascade(
            network,
            init,
            params,
            fragility_rule,
            steps,
            seed.wrapping_add(r as u64),
        )?;
        for (t, st) in states.iter().enumerate() {
            mean_x[t] += fraction_failed(st);
        }
        finals.push(fraction_failed(states.last().expect("non-empty")));
    }
    for v in &mut mean_x {
        *v /= replicas.max(1) as f64;
    }
    Ok((mean_x, finals))
}
