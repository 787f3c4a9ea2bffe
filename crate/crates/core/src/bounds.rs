//! Convergence-time bounds for complete digraphs with uniform activation.
//!
//! All bounds are assembled from a per-event mean time and a count of events:
//!
//! | quantity | per-event bound | event budget |
//! |---|---|---|
//! | consensus | one shrink `< n(n-1)` | `M - m` shrinks |
//! | averaging, descent of `V` | one decrement `< 6n(n-1)` | `(M - m)n/4` decrements |
//! | averaging, final max decay | one decay `< n(n-1)R/(n - R/2)` | `R - 1` decays |
//!
//! which yields `n(n-1)(M-m)` and `(3/2)n²(n-1)(M-m) + n(n-1)R(R-1)/(n-R/2)`.

use serde::Serialize;
use thiserror::Error;

use crate::lyapunov::v_upper_bound;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("max-state decay bound needs 2 <= R <= n-1, got R={r}, n={n}")]
    NotApplicable { n: usize, r: i64 },
    #[error("invalid bound inputs: {0}")]
    Invalid(String),
}

fn validate(n: usize, m: i64, big_m: i64, r: i64) -> Result<(), BoundsError> {
    if n < 2 {
        return Err(BoundsError::Invalid(format!("n must be at least 2, got {n}")));
    }
    if big_m < m {
        return Err(BoundsError::Invalid(format!("M = {big_m} below m = {m}")));
    }
    if r < 0 || r >= n as i64 {
        return Err(BoundsError::Invalid(format!("remainder {r} outside 0..{n}")));
    }
    Ok(())
}

fn edges<T: Scalar>(n: usize) -> T {
    T::from_int((n * (n - 1)) as i64)
}

/// Mean consensus time from any start in `[m, M]^n`: `n(n-1)(M-m)`.
pub fn qc_convergence_bound<T: Scalar>(n: usize, m: i64, big_m: i64) -> T {
    edges::<T>(n) * T::from_int(big_m - m)
}

/// Mean time for one interval shrink: `n(n-1)`.
pub fn qc_shrink_bound<T: Scalar>(n: usize) -> T {
    edges::<T>(n)
}

/// Mean averaging time from any start in `[m, M]^n` with remainder `R`.
/// The final-decay term vanishes for `R ∈ {0, 1}`.
pub fn qa_convergence_bound<T: Scalar>(n: usize, m: i64, big_m: i64, r: i64) -> T {
    let nn = T::from_int(n as i64);
    let descent = nn * edges::<T>(n) * T::ratio(3 * (big_m - m), 2);
    if r < 2 {
        return descent;
    }
    descent + edges::<T>(n) * T::from_int(r * (r - 1)) / (n_minus_half_r::<T>(n, r))
}

fn n_minus_half_r<T: Scalar>(n: usize, r: i64) -> T {
    T::from_int(n as i64) - T::ratio(r, 2)
}

/// Mean time for one decrement of `V`: `6n(n-1)`.
pub fn qa_decrement_bound<T: Scalar>(n: usize) -> T {
    T::from_int(6) * edges::<T>(n)
}

/// Mean time for one decay of the maximum state once `V = R`:
/// `n(n-1)R/(n - R/2)`, with `R/2` kept exact for odd `R`.
pub fn qa_max_decay_bound<T: Scalar>(n: usize, r: i64) -> Result<T, BoundsError> {
    if r < 2 || r >= n as i64 {
        return Err(BoundsError::NotApplicable { n, r });
    }
    Ok(edges::<T>(n) * T::from_int(r) / n_minus_half_r::<T>(n, r))
}

/// Event counts used to assemble the two convergence bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecrementBudgets {
    /// Interval shrinks: `M - m`.
    pub qc_shrinks: i64,
    /// Lyapunov decrements: `⌈(M - m)n/4⌉`.
    pub v_decrements: i64,
    /// Max-state decays after `V` bottoms out: `R - 1`, absent for `R < 2`.
    pub max_state_decrements: Option<i64>,
}

pub fn decrement_budgets(n: usize, m: i64, big_m: i64, r: i64) -> DecrementBudgets {
    let spread = big_m - m;
    let quarter = spread * n as i64;
    DecrementBudgets {
        qc_shrinks: spread,
        v_decrements: (quarter + 3).div_euclid(4),
        max_state_decrements: (r >= 2).then_some(r - 1),
    }
}

/// Every bound for one `(n, m, M, R)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub n: usize,
    pub m: i64,
    #[serde(rename = "M")]
    pub big_m: i64,
    #[serde(rename = "R")]
    pub r: i64,
    pub qc_convergence: T,
    pub qc_shrink: T,
    pub qa_convergence: T,
    pub lyapunov_max: T,
    pub qa_decrement: T,
    pub qa_max_decay: Option<T>,
    pub v_decrements: i64,
    pub max_state_decrements: Option<i64>,
}

impl<T: Scalar> BoundReport<T> {
    pub fn new(n: usize, m: i64, big_m: i64, r: i64) -> Result<Self, BoundsError> {
        validate(n, m, big_m, r)?;
        let budgets = decrement_budgets(n, m, big_m, r);
        Ok(Self {
            n,
            m,
            big_m,
            r,
            qc_convergence: qc_convergence_bound(n, m, big_m),
            qc_shrink: qc_shrink_bound(n),
            qa_convergence: qa_convergence_bound(n, m, big_m, r),
            lyapunov_max: v_upper_bound(n, m, big_m, r),
            qa_decrement: qa_decrement_bound(n),
            qa_max_decay: qa_max_decay_bound(n, r).ok(),
            v_decrements: budgets.v_decrements,
            max_state_decrements: budgets.max_state_decrements,
        })
    }

    /// Named values in a fixed order, for tabular output.
    pub fn rows(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("qc_convergence", Some(self.qc_convergence.to_f64_lossy())),
            ("qc_shrink", Some(self.qc_shrink.to_f64_lossy())),
            ("qa_convergence", Some(self.qa_convergence.to_f64_lossy())),
            ("lyapunov_max", Some(self.lyapunov_max.to_f64_lossy())),
            ("qa_decrement", Some(self.qa_decrement.to_f64_lossy())),
            ("qa_max_decay", self.qa_max_decay.as_ref().map(|v| v.to_f64_lossy())),
            ("v_decrements", Some(self.v_decrements as f64)),
            ("max_state_decrements", self.max_state_decrements.map(|v| v as f64)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn consensus_bounds() {
        assert_eq!(qc_convergence_bound::<f64>(10, 0, 1), 90.0);
        assert_eq!(qc_convergence_bound::<f64>(2, 0, 5), 10.0);
        assert_eq!(qc_convergence_bound::<f64>(7, 0, 0), 0.0);
        assert_eq!(qc_shrink_bound::<f64>(3), 6.0);
        assert_eq!(qc_shrink_bound::<f64>(2), 2.0);
        assert_eq!(qc_shrink_bound::<f64>(32), 992.0);
    }

    #[test]
    fn averaging_bounds() {
        assert_eq!(qa_convergence_bound::<f64>(4, 0, 2, 0), 144.0);
        assert_eq!(qa_convergence_bound::<f64>(2, 0, 2, 0), 12.0);
        assert_eq!(qa_convergence_bound::<f64>(10, 0, 1, 4), 1485.0);
        // R = 1 contributes nothing beyond the descent term
        assert_eq!(qa_convergence_bound::<f64>(10, 0, 1, 1), 1350.0);
        assert_eq!(qa_decrement_bound::<f64>(4), 72.0);
        assert_eq!(qa_decrement_bound::<f64>(6), 180.0);
        assert_eq!(qa_decrement_bound::<f64>(2), 12.0);
    }

    #[test]
    fn max_decay_bound() {
        assert_eq!(qa_max_decay_bound::<f64>(10, 4).unwrap(), 45.0);
        assert_eq!(qa_max_decay_bound::<f64>(10, 2).unwrap(), 20.0);
        // odd R keeps R/2 exact: 90 * 3 / 8.5
        assert_eq!(qa_max_decay_bound::<BigRational>(10, 3).unwrap(), q(540, 17));
        assert!(matches!(qa_max_decay_bound::<f64>(10, 1), Err(BoundsError::NotApplicable { .. })));
    }

    #[test]
    fn budgets() {
        assert_eq!(
            decrement_budgets(4, 0, 2, 0),
            DecrementBudgets { qc_shrinks: 2, v_decrements: 2, max_state_decrements: None }
        );
        assert_eq!(
            decrement_budgets(10, 0, 1, 4),
            DecrementBudgets { qc_shrinks: 1, v_decrements: 3, max_state_decrements: Some(3) }
        );
        assert_eq!(
            decrement_budgets(5, 0, 0, 0),
            DecrementBudgets { qc_shrinks: 0, v_decrements: 0, max_state_decrements: None }
        );
    }

    #[test]
    fn assembly_identities_hold_exactly() {
        for n in 2..=20usize {
            for spread in 0..=4i64 {
                let lhs: BigRational = qc_convergence_bound(n, 0, spread);
                assert_eq!(lhs, qc_shrink_bound::<BigRational>(n) * q(spread, 1));
                // descent term = one-decrement bound x (M - m)n/4 before ceiling
                let descent: BigRational = qa_convergence_bound(n, 0, spread, 0);
                assert_eq!(descent, qa_decrement_bound::<BigRational>(n) * q(spread * n as i64, 4));
            }
            for r in 2..n as i64 {
                let total: BigRational = qa_convergence_bound(n, 0, 1, r);
                let decay = qa_max_decay_bound::<BigRational>(n, r).unwrap() * q(r - 1, 1);
                assert_eq!(total, qa_convergence_bound::<BigRational>(n, 0, 1, 0) + decay);
            }
        }
    }

    #[test]
    fn report() {
        let rep = BoundReport::<f64>::new(10, 0, 1, 4).unwrap();
        assert_eq!(rep.qc_convergence, 90.0);
        assert_eq!(rep.qa_convergence, 1485.0);
        assert_eq!(rep.qa_max_decay, Some(45.0));
        assert_eq!(rep.lyapunov_max, 9.0);
        assert_eq!(rep.v_decrements, 3);
        assert!(BoundReport::<f64>::new(1, 0, 1, 0).is_err());
        assert!(BoundReport::<f64>::new(4, 2, 1, 0).is_err());
        assert!(BoundReport::<f64>::new(4, 0, 1, 4).is_err());
    }
}
