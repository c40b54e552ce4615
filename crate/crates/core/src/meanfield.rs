//! Macroscopic solvers for the final fraction of failed nodes X*.
//!
//! Three approaches:
//! - MF1: fully connected network; one recursion in X(t) per model class.
//! - MF2: degree-k network; the fragility takes values j/k with binomial
//!   weights, giving a refined recursion in X(t).
//! - MF3: recursion for the whole partial density of healthy nodes' net
//!   fragility on a binned z-axis.
//!
//! All of them assume thresholds normally distributed so that the initial
//! net fragility is z(0) ~ N(-mu, sigma) and X(0) = Phi(-mu/sigma).

use rayon::prelude::*;
use thiserror::Error;

use crate::dist::{std_normal_cdf, DistError, ThresholdDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanfieldError {
    #[error("fixed-point iteration did not converge within {max_iter} steps (last X = {last})")]
    MaxIterExceeded { max_iter: usize, last: f64 },
    #[error("shift needs support up to z = {needed} but the grid ends at {z_max}; widen the grid")]
    GridOverflow { needed: f64, z_max: f64 },
    #[error("bad density grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("at grid cell (mu={mu}, sigma={sigma}): {source}")]
    AtCell {
        mu: f64,
        sigma: f64,
        #[source]
        source: Box<MeanfieldError>,
    },
}

/// MF1 model class selector. Load redistribution carries the uniform
/// initial load phi0; its thresholds are shifted to N(mu + phi0, sigma)
/// so that z(0) matches the other classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mf1Class {
    ConstantLoad,
    LoadRedistribution { phi0: f64 },
    OverloadRedistribution,
}

/// One MF1 recursion step X(t) -> X(t+1).
///
/// An input at or above 1 is absorbed into full breakdown. The overload
/// class is continuous at X = 0 with value P_theta(0).
pub fn mf1_step(class: Mf1Class, x: f64, dist: &ThresholdDistribution) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    match class {
        Mf1Class::ConstantLoad => dist.cdf(x),
        Mf1Class::LoadRedistribution { phi0 } => dist.cdf(phi0 / (1.0 - x)),
        Mf1Class::OverloadRedistribution => {
            if x <= 0.0 {
                return dist.cdf(0.0);
            }
            let mean_failed = dist
                .truncated_mean_below(x)
                .expect("x is inside (0,1)");
            dist.cdf(-mean_failed * x / (1.0 - x))
        }
    }
}

/// Iterate a self-map of [0,1] to a fixed point: stops when
/// |step(x) - x| <= tol and returns step(x).
///
/// The maps used here are monotone non-decreasing, so the iteration from
/// X(0) is monotone and converges. Should a non-monotone tail ever produce
/// an oscillation, the iterate is averaged with its image, which keeps the
/// same fixed points.
pub fn solve_fixed_point(
    step: impl Fn(f64) -> f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64, MeanfieldError> {
    let mut x = x0;
    let mut prev_delta = 0.0_f64;
    let mut damped = false;
    for _ in 0..max_iter {
        let next = step(x);
        let delta = next - x;
        if delta.abs() <= tol {
            return Ok(next);
        }
        if delta * prev_delta < 0.0 {
            damped = true;
        }
        x = if damped { 0.5 * (x + next) } else { next };
        prev_delta = delta;
    }
    Err(MeanfieldError::MaxIterExceeded { max_iter, last: x })
}

/// B(j, k, q) for j = 0..=k.
fn binomial_weights(k: u32, q: f64) -> Vec<f64> {
    let k = k as usize;
    let mut coeff = 1.0_f64;
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        out.push(coeff * q.powi(j as i32) * (1.0 - q).powi((k - j) as i32));
        coeff = coeff * (k - j) as f64 / (j + 1) as f64;
    }
    out
}

/// One MF2 step: X' = sum_j B(j,k,X) P_theta(j/k).
pub fn mf2_step(k: u32, x: f64, dist: &ThresholdDistribution) -> f64 {
    debug_assert!(k >= 1);
    let x = x.clamp(0.0, 1.0);
    binomial_weights(k, x)
        .iter()
        .enumerate()
        .map(|(j, w)| w * dist.cdf(j as f64 / k as f64))
        .sum()
}

/// Binning request for the MF3 z-axis. The realized grid snaps the left
/// edge down so that z = 0 falls exactly on a bin edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub bins: usize,
}

impl GridSpec {
    /// Default grid for a threshold distribution: covers the left tail of
    /// z(0) ~ N(-mu, sigma) with room for shifts of up to 1 per step.
    pub fn default_for(dist: &ThresholdDistribution) -> Self {
        GridSpec {
            z_min: -6.0 * dist.sigma() - dist.mu() - 1.5,
            z_max: 2.5,
            bins: 4000,
        }
    }

    /// Like `default_for`, but with the bin width snapped to divide 1/k so
    /// every shift lands exactly on bin edges. Fractional shifts spread
    /// mass across neighbouring bins, which acts as a small diffusion and
    /// biases the failing tail upward; an aligned grid avoids that.
    pub fn default_for_k(k: u32, dist: &ThresholdDistribution) -> Self {
        let base = Self::default_for(dist);
        let span = base.z_max - base.z_min;
        let w0 = span / base.bins as f64;
        let per_share = (1.0 / (k as f64 * w0)).ceil();
        let width = 1.0 / (k as f64 * per_share);
        let bins = (span / width).ceil() as usize;
        GridSpec {
            z_min: base.z_min,
            z_max: base.z_min + bins as f64 * width,
            bins,
        }
    }
}

/// Partial density of healthy nodes' net fragility on a uniform grid.
/// Total mass is at most 1 and shrinks as nodes fail. Bin edges sit at
/// exact multiples of the bin width, so z = 0 is always an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDensity {
    width: f64,
    first_edge_index: i64, // left edge of bin 0 is first_edge_index * width
    zero_bin: usize,       // first bin whose left edge is at z = 0
    mass: Vec<f64>,
}

impl DiscretizedDensity {
    pub fn zeros(grid: &GridSpec) -> Result<Self, MeanfieldError> {
        if grid.bins == 0 || !(grid.z_max > grid.z_min) {
            return Err(MeanfieldError::BadGrid(format!(
                "need bins > 0 and z_max > z_min, got [{}, {}] with {} bins",
                grid.z_min, grid.z_max, grid.bins
            )));
        }
        if !(grid.z_min < 0.0 && grid.z_max > 0.0) {
            return Err(MeanfieldError::BadGrid(
                "grid must straddle z = 0".to_string(),
            ));
        }
        let width = (grid.z_max - grid.z_min) / grid.bins as f64;
        let first_edge_index = (grid.z_min / width).floor() as i64;
        Ok(DiscretizedDensity {
            width,
            first_edge_index,
            zero_bin: (-first_edge_index) as usize,
            mass: vec![0.0; grid.bins],
        })
    }

    /// Density of N(mean, sigma) by CDF differences; tail mass beyond the
    /// grid is folded into the boundary bins so the total stays 1.
    pub fn gaussian(mean: f64, sigma: f64, grid: &GridSpec) -> Result<Self, MeanfieldError> {
        let mut d = Self::zeros(grid)?;
        let dist = ThresholdDistribution::normal(mean, sigma)?;
        let bins = d.mass.len();
        let mut lo = 0.0;
        for i in 0..bins {
            let hi = if i == bins - 1 {
                1.0
            } else {
                dist.cdf(d.edge(i + 1))
            };
            d.mass[i] = hi - lo;
            lo = hi;
        }
        Ok(d)
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Left edge of bin i. Exact at z = 0.
    pub fn edge(&self, i: usize) -> f64 {
        (self.first_edge_index + i as i64) as f64 * self.width
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.edge(i) + 0.5 * self.width
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mass at z >= 0: the fraction of currently failing nodes.
    pub fn failing_mass(&self) -> f64 {
        self.mass[self.zero_bin..].iter().sum()
    }

    /// Deposit point mass into the bin containing z (test scaffolding).
    pub fn add_mass(&mut self, z: f64, m: f64) {
        let rel = (z / self.width - self.first_edge_index as f64).floor();
        let i = (rel as i64).clamp(0, self.bins() as i64 - 1) as usize;
        self.mass[i] += m;
    }
}

/// One MF3 step: drop the failing mass (z >= 0), then shift the surviving
/// density by j/k with binomial weight B(j, k, X_f); non-integer bin
/// shifts split mass linearly between adjacent bins.
pub fn mf3_step(k: u32, ph: &DiscretizedDensity) -> Result<DiscretizedDensity, MeanfieldError> {
    let mut out = ph.clone();
    mf3_step_kernel(k, ph, &mut out.mass)?;
    Ok(out)
}

fn mf3_step_kernel(
    k: u32,
    src: &DiscretizedDensity,
    dst: &mut [f64],
) -> Result<(), MeanfieldError> {
    debug_assert!(k >= 1);
    debug_assert_eq!(dst.len(), src.bins());
    let x_f = src.failing_mass();
    let healthy = &src.mass[..src.zero_bin];
    let support_end = match healthy.iter().rposition(|&m| m != 0.0) {
        Some(i) => i,
        None => {
            dst.fill(0.0);
            return Ok(());
        }
    };
    let max_target = support_end as f64 + 1.0 / src.width + 1.0;
    if max_target >= src.bins() as f64 {
        return Err(MeanfieldError::GridOverflow {
            needed: src.edge(support_end) + src.width + 1.0,
            z_max: src.edge(src.bins() - 1) + src.width,
        });
    }

    dst.fill(0.0);
    let weights = binomial_weights(k, x_f);
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (whole, frac) = split_bin_offset(j as f64 / k as f64 / src.width);
        for (i, &m) in healthy.iter().enumerate().take(support_end + 1) {
            if m == 0.0 {
                continue;
            }
            dst[i + whole] += w * (1.0 - frac) * m;
            if frac > 0.0 {
                dst[i + whole + 1] += w * frac * m;
            }
        }
    }
    Ok(())
}

// Whole-bin and fractional parts of a shift measured in bins; offsets
// within rounding error of an integer snap to it.
fn split_bin_offset(offset: f64) -> (usize, f64) {
    let nearest = offset.round();
    if (offset - nearest).abs() < 1e-9 && nearest >= 0.0 {
        (nearest as usize, 0.0)
    } else {
        let whole = offset.floor();
        (whole as usize, offset - whole)
    }
}

/// Partial densities of surviving nodes stratified by how many of their k
/// neighbours have already failed. Re-applying the one-shot kernel every
/// step would re-sample neighbour failures independently and let a node
/// collect more than k shares of 1/k over its lifetime, which inflates
/// deep cascades without bound; stratifying by the spent budget draws new
/// failures only from the still-healthy part of each neighbourhood.
#[derive(Debug, Clone)]
pub struct Mf3State {
    k: u32,
    /// layers[f] holds survivors with f failed neighbours so far.
    layers: Vec<DiscretizedDensity>,
    /// Fraction failed before the current step.
    failed: f64,
}

impl Mf3State {
    pub fn new(k: u32, dist: &ThresholdDistribution, grid: &GridSpec) -> Result<Self, MeanfieldError> {
        let base = DiscretizedDensity::gaussian(-dist.mu(), dist.sigma(), grid)?;
        let empty = DiscretizedDensity {
            mass: vec![0.0; base.bins()],
            ..base.clone()
        };
        let mut layers = vec![empty; k as usize + 1];
        layers[0] = base;
        Ok(Mf3State {
            k,
            layers,
            failed: 0.0,
        })
    }

    pub fn fraction_failed(&self) -> f64 {
        self.failed
    }

    /// Density of net fragility across all surviving nodes.
    pub fn density(&self) -> DiscretizedDensity {
        let mut out = self.layers[0].clone();
        for layer in &self.layers[1..] {
            for (o, m) in out.mass.iter_mut().zip(&layer.mass) {
                *o += m;
            }
        }
        out
    }

    pub fn failing_mass(&self) -> f64 {
        self.layers.iter().map(|l| l.failing_mass()).sum()
    }

    /// One step: drop failing mass, then move each survivor up a budget
    /// layer per newly failed neighbour, shifting its net fragility by 1/k
    /// per failure. A fresh neighbour fails with probability
    /// X_f / (1 - X), the failing share of the not-yet-failed pool.
    pub fn step(&mut self) -> Result<(), MeanfieldError> {
        let x_f = self.failing_mass();
        let healthy_pool = 1.0 - self.failed;
        let rate = if x_f > 0.0 && healthy_pool > 0.0 {
            (x_f / healthy_pool).min(1.0)
        } else {
            0.0
        };
        let k = self.k as usize;
        let bins = self.layers[0].bins();
        let mut next: Vec<Vec<f64>> = vec![vec![0.0; bins]; k + 1];
        let mut scratch = vec![0.0; bins];
        for (f, layer) in self.layers.iter().enumerate() {
            let mut trunc = layer.clone();
            for m in &mut trunc.mass[trunc.zero_bin..] {
                *m = 0.0;
            }
            if trunc.mass.iter().all(|&m| m == 0.0) {
                continue;
            }
            let fresh = (k - f) as u32;
            let weights = binomial_weights(fresh, rate);
            for (m_new, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                shift_into(&trunc, m_new as f64 / self.k as f64, &mut scratch)?;
                for (dst, &s) in next[f + m_new].iter_mut().zip(&scratch) {
                    *dst += w * s;
                }
            }
        }
        for (layer, mass) in self.layers.iter_mut().zip(next) {
            layer.mass = mass;
        }
        let total: f64 = self.layers.iter().map(|l| l.total_mass()).sum();
        self.failed = 1.0 - total;
        Ok(())
    }
}

// Shift a density up by `offset` (in z units) into `dst`, splitting mass
// linearly between adjacent bins.
fn shift_into(src: &DiscretizedDensity, offset: f64, dst: &mut [f64]) -> Result<(), MeanfieldError> {
    dst.fill(0.0);
    let support_end = match src.mass.iter().rposition(|&m| m != 0.0) {
        Some(i) => i,
        None => return Ok(()),
    };
    let off_bins = offset / src.width;
    let (whole, frac) = split_bin_offset(off_bins);
    if support_end as f64 + off_bins + 1.0 >= src.bins() as f64 {
        return Err(MeanfieldError::GridOverflow {
            needed: src.edge(support_end) + src.width + offset,
            z_max: src.edge(src.bins() - 1) + src.width,
        });
    }
    for (i, &m) in src.mass.iter().enumerate().take(support_end + 1) {
        if m == 0.0 {
            continue;
        }
        dst[i + whole] += (1.0 - frac) * m;
        if frac > 0.0 {
            dst[i + whole + 1] += frac * m;
        }
    }
    Ok(())
}

/// Iterate MF3 from the no-failure state until the failed fraction
/// stabilizes; returns X*.
pub fn mf3_solve(
    k: u32,
    dist: &ThresholdDistribution,
    grid: Option<GridSpec>,
    tol: f64,
    max_iter: usize,
) -> Result<f64, MeanfieldError> {
    let grid = grid.unwrap_or_else(|| GridSpec::default_for_k(k, dist));
    let mut state = Mf3State::new(k, dist, &grid)?;
    let mut x = 0.0;
    for _ in 0..max_iter {
        state.step()?;
        let x_next = state.fraction_failed();
        if x_next - x <= tol {
            return Ok(x_next);
        }
        x = x_next;
    }
    Err(MeanfieldError::MaxIterExceeded { max_iter, last: x })
}

/// Mean-field method selector for phase-diagram sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MfMethod {
    Mf1(Mf1Class),
    Mf2 { k: u32 },
    Mf3 { k: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// X(0) and converged X* over a (mu, sigma) grid, row-major with mu as the
/// outer index. x0 = Phi(-mu/sigma) everywhere; x_star >= x0 elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramGrid {
    pub mu_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub x0: Vec<f64>,
    pub x_star: Vec<f64>,
}

impl PhaseDiagramGrid {
    pub fn idx(&self, i_mu: usize, j_sigma: usize) -> usize {
        i_mu * self.sigma_values.len() + j_sigma
    }

    pub fn x_star_at(&self, i_mu: usize, j_sigma: usize) -> f64 {
        self.x_star[self.idx(i_mu, j_sigma)]
    }

    pub fn x0_at(&self, i_mu: usize, j_sigma: usize) -> f64 {
        self.x0[self.idx(i_mu, j_sigma)]
    }

    /// Adjacent cell pairs (along either axis) whose |X* difference|
    /// exceeds `threshold`; the signature of a first-order transition.
    pub fn jump_pairs(&self, threshold: f64) -> Vec<((usize, usize), (usize, usize))> {
        let (nm, ns) = (self.mu_values.len(), self.sigma_values.len());
        let mut out = Vec::new();
        for i in 0..nm {
            for j in 0..ns {
                if i + 1 < nm
                    && (self.x_star_at(i, j) - self.x_star_at(i + 1, j)).abs() > threshold
                {
                    out.push(((i, j), (i + 1, j)));
                }
                if j + 1 < ns
                    && (self.x_star_at(i, j) - self.x_star_at(i, j + 1)).abs() > threshold
                {
                    out.push(((i, j), (i, j + 1)));
                }
            }
        }
        out
    }
}

fn solve_cell(
    method: &MfMethod,
    mu: f64,
    sigma: f64,
    settings: &SolverSettings,
) -> Result<(f64, f64), MeanfieldError> {
    let x0 = std_normal_cdf(-mu / sigma);
    let x_star = match *method {
        MfMethod::Mf1(class) => {
            let dist = match class {
                Mf1Class::LoadRedistribution { phi0 } => {
                    ThresholdDistribution::normal(mu + phi0, sigma)?
                }
                _ => ThresholdDistribution::normal(mu, sigma)?,
            };
            solve_fixed_point(
                |x| mf1_step(class, x, &dist),
                x0,
                settings.tol,
                settings.max_iter,
            )?
        }
        MfMethod::Mf2 { k } => {
            let dist = ThresholdDistribution::normal(mu, sigma)?;
            solve_fixed_point(
                |x| mf2_step(k, x, &dist),
                x0,
                settings.tol,
                settings.max_iter,
            )?
        }
        MfMethod::Mf3 { k } => {
            let dist = ThresholdDistribution::normal(mu, sigma)?;
            mf3_solve(k, &dist, None, settings.tol, settings.max_iter)?
        }
    };
    Ok((x0, x_star))
}

/// Sweep the (mu, sigma) plane; cells are independent and solved in
/// parallel. Solver failures are annotated with their grid coordinates.
pub fn phase_diagram(
    method: &MfMethod,
    mu_values: &[f64],
    sigma_values: &[f64],
    settings: &SolverSettings,
) -> Result<PhaseDiagramGrid, MeanfieldError> {
    let cells: Vec<(f64, f64)> = mu_values
        .iter()
        .flat_map(|&mu| sigma_values.iter().map(move |&sigma| (mu, sigma)))
        .collect();
    let solved: Result<Vec<(f64, f64)>, MeanfieldError> = cells
        .par_iter()
        .map(|&(mu, sigma)| {
            solve_cell(method, mu, sigma, settings).map_err(|e| MeanfieldError::AtCell {
                mu,
                sigma,
                source: Box::new(e),
            })
        })
        .collect();
    let solved = solved?;
    Ok(PhaseDiagramGrid {
        mu_values: mu_values.to_vec(),
        sigma_values: sigma_values.to_vec(),
        x0: solved.iter().map(|c| c.0).collect(),
        x_star: solved.iter().map(|c| c.1).collect(),
    })
}

/// `count` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_dist(mu: f64, sigma: f64) -> ThresholdDistribution {
        ThresholdDistribution::normal(mu, sigma).unwrap()
    }

    #[test]
    fn mf1_constant_load_at_its_mean() {
        let dist = std_dist(0.37, 0.21);
        assert!((mf1_step(Mf1Class::ConstantLoad, 0.37, &dist) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mf1_constant_load_at_zero_equals_x0() {
        let dist = std_dist(0.2, 0.1);
        let got = mf1_step(Mf1Class::ConstantLoad, 0.0, &dist);
        assert!((got - 0.02275).abs() < 1e-5);
        assert!((got - std_normal_cdf(-2.0)).abs() < 1e-14);
    }

    #[test]
    fn mf1_load_redistribution_at_zero_equals_x0() {
        // with theta ~ N(mu + phi0, sigma), step(0) = P(phi0) = Phi(-mu/sigma)
        let (mu, sigma, phi0) = (0.3, 0.25, 0.4);
        let dist = std_dist(mu + phi0, sigma);
        let got = mf1_step(Mf1Class::LoadRedistribution { phi0 }, 0.0, &dist);
        assert!((got - std_normal_cdf(-mu / sigma)).abs() < 1e-14);
    }

    #[test]
    fn mf1_overload_continuous_at_zero() {
        let dist = std_dist(0.3, 0.2);
        let at_zero = mf1_step(Mf1Class::OverloadRedistribution, 0.0, &dist);
        let near_zero = mf1_step(Mf1Class::OverloadRedistribution, 1e-9, &dist);
        assert!((at_zero - dist.cdf(0.0)).abs() < 1e-15);
        assert!((at_zero - near_zero).abs() < 1e-6);
    }

    #[test]
    fn mf1_absorbs_full_breakdown() {
        let dist = std_dist(0.5, 0.2);
        assert_eq!(mf1_step(Mf1Class::ConstantLoad, 1.0, &dist), 1.0);
    }

    #[test]
    fn fixed_point_identity_returns_start() {
        let x = solve_fixed_point(|x| x, 0.42, 1e-12, 10).unwrap();
        assert_eq!(x, 0.42);
    }

    #[test]
    fn fixed_point_full_cascade_case() {
        // mu = 0.3, sigma = 0.2: the cascade runs to (almost) everyone
        let dist = std_dist(0.3, 0.2);
        let x0 = std_normal_cdf(-1.5);
        assert!((x0 - 0.0668).abs() < 1e-4);
        let x = solve_fixed_point(
            |x| mf1_step(Mf1Class::ConstantLoad, x, &dist),
            x0,
            1e-10,
            10_000,
        )
        .unwrap();
        assert!((x - 0.9998).abs() < 1e-3, "got {x}");
    }

    #[test]
    fn fixed_point_no_cascade_case() {
        let dist = std_dist(0.8, 0.1);
        let x0 = std_normal_cdf(-8.0);
        let x = solve_fixed_point(
            |x| mf1_step(Mf1Class::ConstantLoad, x, &dist),
            x0,
            1e-10,
            10_000,
        )
        .unwrap();
        assert!(x < 1e-10, "got {x}");
    }

    #[test]
    fn fixed_point_reports_non_convergence() {
        // a map translating by a constant never settles
        let err = solve_fixed_point(|x| x + 0.1, 0.0, 1e-12, 5);
        assert!(matches!(err, Err(MeanfieldError::MaxIterExceeded { .. })));
    }

    #[test]
    fn mf1_iteration_is_monotone_from_x0() {
        for &(class, mu, sigma) in &[
            (Mf1Class::ConstantLoad, 0.25, 0.3),
            (Mf1Class::LoadRedistribution { phi0: 0.25 }, 0.2, 0.3),
            (Mf1Class::OverloadRedistribution, 0.15, 0.5),
        ] {
            let dist = match class {
                Mf1Class::LoadRedistribution { phi0 } => std_dist(mu + phi0, sigma),
                _ => std_dist(mu, sigma),
            };
            let mut x = std_normal_cdf(-mu / sigma);
            for _ in 0..200 {
                let next = mf1_step(class, x, &dist);
                assert!(
                    next >= x - 1e-15,
                    "not monotone for {class:?} at x={x}: next={next}"
                );
                x = next;
            }
        }
    }

    #[test]
    fn mf_steps_stay_in_unit_interval_and_monotone_in_x() {
        // Constant load and load redistribution are monotone on all of
        // [0,1]; the overload map is monotone only up to a hump beyond its
        // fixed point (checked along the iteration path below), so here it
        // is held to the range bound alone.
        let dist = std_dist(0.3, 0.4);
        let classes = [
            Mf1Class::ConstantLoad,
            Mf1Class::LoadRedistribution { phi0: 0.25 },
        ];
        for class in classes {
            let d = match class {
                Mf1Class::LoadRedistribution { phi0 } => std_dist(0.3 + phi0, 0.4),
                _ => dist,
            };
            let mut prev = 0.0;
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                let y = mf1_step(class, x, &d);
                assert!((0.0..=1.0).contains(&y));
                assert!(y >= prev - 1e-12, "{class:?} not monotone at x={x}");
                prev = y;
            }
        }
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let y = mf1_step(Mf1Class::OverloadRedistribution, x, &dist);
            assert!((0.0..=1.0).contains(&y));
        }
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let y = mf2_step(3, x, &dist);
            assert!((0.0..=1.0).contains(&y));
            assert!(y >= prev - 1e-12);
            prev = y;
        }
    }

    #[test]
    fn overload_step_monotone_along_iteration_path() {
        // The range the solver actually traverses, [X(0), X*], lies in the
        // monotone region even though the map has a decreasing tail.
        for &(mu, sigma) in &[(0.3, 0.4), (0.05, 0.2), (0.6, 0.8), (0.0, 0.5)] {
            let dist = std_dist(mu, sigma);
            let mut x = std_normal_cdf(-mu / sigma);
            for _ in 0..500 {
                let next = mf1_step(Mf1Class::OverloadRedistribution, x, &dist);
                assert!(
                    next >= x - 1e-12,
                    "iteration decreased at mu={mu}, sigma={sigma}, x={x}"
                );
                if next - x < 1e-14 {
                    break;
                }
                x = next;
            }
        }
    }

    #[test]
    fn binomial_weights_normalize() {
        for &k in &[1_u32, 2, 3, 7] {
            for &q in &[0.0, 0.2, 0.5, 0.9, 1.0] {
                let s: f64 = binomial_weights(k, q).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "k={k} q={q}: sum={s}");
            }
        }
    }

    #[test]
    fn mf2_collapses_at_x_zero() {
        let dist = std_dist(0.4, 0.3);
        assert!((mf2_step(3, 0.0, &dist) - dist.cdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn mf2_direct_expansion_k2() {
        let dist = std_dist(0.4, 0.3);
        let expected = 0.25 * dist.cdf(0.0) + 0.5 * dist.cdf(0.5) + 0.25 * dist.cdf(1.0);
        assert!((mf2_step(2, 0.5, &dist) - expected).abs() < 1e-14);
    }

    #[test]
    fn mf2_near_degenerate_distribution_acts_two_point() {
        // k = 1: X' = (1-X) P(0) + X P(1); with a tight distribution around
        // 0.5 this is the two-point fragility {0, 1} composed with P.
        let dist = std_dist(0.5, 0.01);
        for &x in &[0.1, 0.4, 0.9] {
            let direct = (1.0 - x) * dist.cdf(0.0) + x * dist.cdf(1.0);
            assert!((mf2_step(1, x, &dist) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn density_grid_puts_zero_on_an_edge() {
        let dist = std_dist(0.37, 0.53);
        let grid = GridSpec::default_for(&dist);
        let d = DiscretizedDensity::zeros(&grid).unwrap();
        assert_eq!(d.edge(d.zero_bin), 0.0);
        assert!((d.total_mass()).abs() == 0.0);
    }

    #[test]
    fn k_aligned_grid_makes_share_shifts_integral() {
        for &k in &[1u32, 3, 7] {
            let dist = std_dist(0.39, 0.1189);
            let grid = GridSpec::default_for_k(k, &dist);
            let d = DiscretizedDensity::zeros(&grid).unwrap();
            let off = (1.0 / k as f64) / d.width();
            assert!(
                (off - off.round()).abs() < 1e-9,
                "k={k}: 1/k is {off} bins"
            );
            assert!(grid.bins >= 4000 && grid.bins < 4200);
        }
    }

    #[test]
    fn stratified_solver_matches_mf2_trajectory() {
        // with the budget layers, the failed-fraction recursion coincides
        // with MF2 up to floating noise
        for &(mu, sigma) in &[(0.39, 0.1189), (0.5, 0.307), (0.2, 0.6)] {
            let dist = std_dist(mu, sigma);
            let x3 = mf3_solve(3, &dist, None, 1e-10, 100_000).unwrap();
            let x2 = solve_fixed_point(|x| mf2_step(3, x, &dist), std_normal_cdf(-mu / sigma), 1e-10, 100_000)
                .unwrap();
            assert!(
                x3 <= x2 + 1e-9,
                "mu={mu}, sigma={sigma}: mf3 {x3} exceeds mf2 {x2}"
            );
            assert!((x3 - x2).abs() < 1e-6, "mu={mu}, sigma={sigma}: {x3} vs {x2}");
        }
    }

    #[test]
    fn gaussian_density_mass_and_failing_fraction() {
        let dist = std_dist(0.3, 0.4);
        let grid = GridSpec::default_for(&dist);
        let d = DiscretizedDensity::gaussian(-dist.mu(), dist.sigma(), &grid).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let expect_failing = std_normal_cdf(-0.3 / 0.4);
        assert!((d.failing_mass() - expect_failing).abs() < 1e-12);
    }

    #[test]
    fn mf3_step_with_no_failing_mass_only_truncates() {
        let grid = GridSpec {
            z_min: -2.0,
            z_max: 2.0,
            bins: 400,
        };
        let mut d = DiscretizedDensity::zeros(&grid).unwrap();
        d.add_mass(-0.6, 0.7);
        let next = mf3_step(3, &d).unwrap();
        // X_f = 0 so B collapses to j = 0: pure truncation, nothing moves
        assert_eq!(next.mass, d.mass);
    }

    #[test]
    fn mf3_step_mass_never_increases() {
        let dist = std_dist(0.2, 0.3);
        let grid = GridSpec::default_for(&dist);
        let mut d = DiscretizedDensity::gaussian(-0.2, 0.3, &grid).unwrap();
        for _ in 0..10 {
            let next = mf3_step(3, &d).unwrap();
            assert!(next.total_mass() <= d.total_mass() + 1e-12);
            d = next;
        }
    }

    #[test]
    fn mf3_shift_conserves_truncated_mass() {
        // before truncation at the *next* step, the convolution itself
        // must conserve the surviving mass
        let dist = std_dist(0.1, 0.5);
        let grid = GridSpec::default_for(&dist);
        let d = DiscretizedDensity::gaussian(-0.1, 0.5, &grid).unwrap();
        let surviving = d.total_mass() - d.failing_mass();
        let next = mf3_step(4, &d).unwrap();
        assert!((next.total_mass() - surviving).abs() < 1e-9);
    }

    #[test]
    fn mf3_step_matches_brute_force_convolution() {
        // grid with width exactly 1/30 so shifts of j/3 are 10j bins;
        // a second case with k = 7 exercises fractional interpolation
        let grid = GridSpec {
            z_min: -2.0,
            z_max: 2.0,
            bins: 120,
        };
        let mut d = DiscretizedDensity::zeros(&grid).unwrap();
        d.add_mass(-0.6, 0.5);
        d.add_mass(-0.21, 0.2);
        d.add_mass(0.3, 0.3); // failing mass 0.3
        let k = 3;
        let next = mf3_step(k, &d).unwrap();

        // oracle: explicit weighted shifted copies of the truncated density
        let x_f = 0.3;
        let weights = binomial_weights(k, x_f);
        let width = d.width();
        let mut expected = vec![0.0; d.bins()];
        for (j, &w) in weights.iter().enumerate() {
            let offset = (j as f64 / k as f64) / width;
            let whole = offset.floor() as usize;
            let frac = offset - whole as f64;
            for i in 0..d.zero_bin {
                let m = d.mass[i];
                if m == 0.0 {
                    continue;
                }
                expected[i + whole] += w * (1.0 - frac) * m;
                if frac > 0.0 {
                    expected[i + whole + 1] += w * frac * m;
                }
            }
        }
        for (a, b) in next.mass.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let total_in: f64 = 0.7;
        assert!((next.total_mass() - total_in).abs() < 1e-12);

        // fractional-shift variant: j/k not a whole number of bins
        let next7 = mf3_step(7, &d).unwrap();
        assert!((next7.total_mass() - total_in).abs() < 1e-12);
    }

    #[test]
    fn mf3_grid_overflow_is_detected() {
        let grid = GridSpec {
            z_min: -1.0,
            z_max: 0.5,
            bins: 150,
        };
        let mut d = DiscretizedDensity::zeros(&grid).unwrap();
        d.add_mass(-0.05, 0.5);
        d.add_mass(0.1, 0.5); // X_f = 0.5 forces shifts up to 1.0
        assert!(matches!(
            mf3_step(2, &d),
            Err(MeanfieldError::GridOverflow { .. })
        ));
    }

    #[test]
    fn consistency_all_solvers_agree_at_t0() {
        // started from no failures, the first step of MF1, MF2 and MF3 all
        // produce X(1) = Phi(-mu/sigma)
        let (mu, sigma) = (0.3, 0.4);
        let dist = std_dist(mu, sigma);
        let x1 = std_normal_cdf(-mu / sigma);
        assert!((mf1_step(Mf1Class::ConstantLoad, 0.0, &dist) - x1).abs() < 1e-14);
        assert!((mf2_step(3, 0.0, &dist) - x1).abs() < 1e-14);
        let grid = GridSpec::default_for(&dist);
        let d0 = DiscretizedDensity::gaussian(-mu, sigma, &grid).unwrap();
        let d1 = mf3_step(3, &d0).unwrap();
        assert!((1.0 - d1.total_mass() - x1).abs() < 1e-12);
    }

    #[test]
    fn phase_diagram_x0_column_at_mu_zero() {
        let grid = phase_diagram(
            &MfMethod::Mf1(Mf1Class::ConstantLoad),
            &[0.0, 0.5],
            &linspace(0.1, 1.0, 5),
            &SolverSettings::default(),
        )
        .unwrap();
        for j in 0..5 {
            assert!((grid.x0_at(0, j) - 0.5).abs() < 1e-14);
        }
        // x_star >= x0 elementwise
        for (xs, x0) in grid.x_star.iter().zip(&grid.x0) {
            assert!(xs >= x0);
        }
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 1.0, 101);
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[100], 1.0);
        assert!((v[1] - 0.01).abs() < 1e-15);
    }
}
