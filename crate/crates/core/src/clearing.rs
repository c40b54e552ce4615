//! Eisenberg-Noe liability clearing: system validation, the fictitious
//! default algorithm, and the fragility mapping into the threshold
//! framework.
//!
//! A system is a vector of total obligations x0, a row-stochastic relative
//! liability matrix A (a_ij is the fraction of firm i's obligations owed
//! to firm j) and operating cash flows theta. The clearing vector solves
//! x_i = min(theta_i + sum_j a_ji x_j, x0_i) under limited liability and
//! absolute priority of debt.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClearingError {
    #[error("invalid financial system: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("payment vector has {got} entries, system has {expected} firms")]
    PaymentLength { got: usize, expected: usize },
    #[error("clearing iteration did not converge within {0} steps")]
    NoConvergence(usize),
}

/// A single validation failure; `validate_system` reports them all.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    RowSum { firm: usize, sum: f64 },
    NegativeEntry { row: usize, col: usize, value: f64 },
    NonZeroDiagonal { firm: usize, value: f64 },
    NegativeObligation { firm: usize, value: f64 },
    NegativeCashFlow { firm: usize, value: f64 },
    ShapeMismatch { what: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { firm, sum } => {
                write!(f, "row {firm} of A sums to {sum}, expected 1")
            }
            Violation::NegativeEntry { row, col, value } => {
                write!(f, "A[{row}][{col}] = {value} is negative")
            }
            Violation::NonZeroDiagonal { firm, value } => {
                write!(f, "A[{firm}][{firm}] = {value}, expected 0")
            }
            Violation::NegativeObligation { firm, value } => {
                write!(f, "x0[{firm}] = {value} is negative")
            }
            Violation::NegativeCashFlow { firm, value } => {
                write!(f, "theta[{firm}] = {value} is negative")
            }
            Violation::ShapeMismatch { what } => write!(f, "shape mismatch: {what}"),
        }
    }
}

const ROW_SUM_TOL: f64 = 1e-9;

/// A financial system of n firms. Rows of A for firms with obligations
/// must sum to one; a firm without obligations may carry an all-zero row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinancialSystem {
    pub n: usize,
    pub x0: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

impl FinancialSystem {
    pub fn new(x0: Vec<f64>, a: Vec<Vec<f64>>, theta: Vec<f64>) -> Self {
        FinancialSystem {
            n: x0.len(),
            x0,
            a,
            theta,
        }
    }

    /// Expected payments to firm i given the payment vector x.
    fn inflow(&self, x: &[f64], i: usize) -> f64 {
        (0..self.n).map(|j| self.a[j][i] * x[j]).sum()
    }
}

/// Check row-stochasticity, non-negativity and the zero diagonal. Returns
/// every violation found instead of stopping at the first.
pub fn validate_system(sys: &FinancialSystem) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let n = sys.n;
    if sys.x0.len() != n {
        violations.push(Violation::ShapeMismatch { what: "x0 length" });
    }
    if sys.theta.len() != n {
        violations.push(Violation::ShapeMismatch {
            what: "theta length",
        });
    }
    if sys.a.len() != n || sys.a.iter().any(|row| row.len() != n) {
        violations.push(Violation::ShapeMismatch { what: "A is not n x n" });
        return Err(violations);
    }
    for i in 0..n {
        for j in 0..n {
            if sys.a[i][j] < 0.0 {
                violations.push(Violation::NegativeEntry {
                    row: i,
                    col: j,
                    value: sys.a[i][j],
                });
            }
        }
        if sys.a[i][i] != 0.0 {
            violations.push(Violation::NonZeroDiagonal {
                firm: i,
                value: sys.a[i][i],
            });
        }
        let sum: f64 = sys.a[i].iter().sum();
        let has_obligations = sys.x0.get(i).copied().unwrap_or(0.0) > 0.0;
        if has_obligations && (sum - 1.0).abs() > ROW_SUM_TOL {
            violations.push(Violation::RowSum { firm: i, sum });
        }
        if !has_obligations && sum != 0.0 && (sum - 1.0).abs() > ROW_SUM_TOL {
            // zero-obligation firms may have an all-zero or stochastic row
            violations.push(Violation::RowSum { firm: i, sum });
        }
    }
    for (i, &v) in sys.x0.iter().enumerate() {
        if v < 0.0 {
            violations.push(Violation::NegativeObligation { firm: i, value: v });
        }
    }
    for (i, &v) in sys.theta.iter().enumerate() {
        if v < 0.0 {
            violations.push(Violation::NegativeCashFlow { firm: i, value: v });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// One candidate update x_i' = min(theta_i + inflow_i(x), x0_i). Started
/// from x0 this produces a decreasing sequence of clearing candidates.
pub fn clearing_iterate(sys: &FinancialSystem, x: &[f64]) -> Result<Vec<f64>, ClearingError> {
    if x.len() != sys.n {
        return Err(ClearingError::PaymentLength {
            got: x.len(),
            expected: sys.n,
        });
    }
    Ok((0..sys.n)
        .map(|i| (sys.theta[i] + sys.inflow(x, i)).min(sys.x0[i]))
        .collect())
}

/// Fragility of each firm given a payment vector: the part of its total
/// obligation not covered by expected inflows. A firm defaults in the next
/// candidate step iff phi_i - theta_i >= 0, matching s = Theta(z).
pub fn en_fragility(sys: &FinancialSystem, x: &[f64]) -> Vec<f64> {
    (0..sys.n).map(|i| sys.x0[i] - sys.inflow(x, i)).collect()
}

/// Result of the fictitious default algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearingResult {
    pub x_star: Vec<f64>,
    pub defaults: Vec<usize>,
    pub iterations: usize,
    pub equity: Vec<f64>,
    /// Set when every firm fails to meet its obligations, the signature of
    /// a full system breakdown.
    pub diverged: bool,
}

/// Run the fictitious default algorithm from x(0) = x0 until the candidate
/// payments change by at most `tol` componentwise.
pub fn fictitious_default(sys: &FinancialSystem, tol: f64) -> Result<ClearingResult, ClearingError> {
    validate_system(sys).map_err(ClearingError::Invalid)?;
    // Tightly coupled default cycles contract slowly, so the cap is far
    // above the n-step bound of the default-set formulation.
    let cap = 100_000.max(10 * sys.n);
    let mut x = sys.x0.clone();
    let mut iterations = 0;
    loop {
        let next = clearing_iterate(sys, &x)?;
        iterations += 1;
        let delta = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        x = next;
        if delta <= tol {
            break;
        }
        if iterations >= cap {
            return Err(ClearingError::NoConvergence(cap));
        }
    }
    let defaults: Vec<usize> = (0..sys.n)
        .filter(|&i| x[i] < sys.x0[i] - tol)
        .collect();
    let equity: Vec<f64> = (0..sys.n)
        .map(|i| sys.theta[i] + sys.inflow(&x, i) - x[i])
        .collect();
    let diverged = sys.n > 0 && defaults.len() == sys.n;
    Ok(ClearingResult {
        x_star: x,
        defaults,
        iterations,
        equity,
        diverged,
    })
}
