//! Mean hitting times of finite Markov chains.
//!
//! Two independent routes to the same numbers:
//!
//! * [`solve_hitting_times`] solves the first-step equations
//!   `E_i = 0` on the target and `E_i = 1 + Σ_{j ∉ target} P_ij E_j` elsewhere
//!   by dense Gaussian elimination with partial pivoting;
//! * the three walk families below carry their own closed forms, derived by
//!   telescoping the first-step differences `E_{z+1} - E_z`.
//!
//! Both are generic over [`Scalar`], so every value can be computed exactly
//! with rationals as well as in floating point.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkovError {
    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: String },
    #[error("negative probability at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    Shape { row: usize, len: usize, expected: usize },
    #[error("target set is empty")]
    EmptyTarget,
    #[error("target state {0} out of range")]
    TargetOutOfRange(usize),
    #[error("target unreachable from state `{0}`: no finite hitting time")]
    Unreachable(String),
    #[error("first-step system is singular: no finite hitting time")]
    Singular,
    #[error("closed-form hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("chain too small: {0}")]
    TooSmall(String),
    #[error("start state {z} outside 1..={max}")]
    StartOutOfRange { z: usize, max: usize },
    #[error("chain matrix line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown chain builder `{0}`")]
    UnknownBuilder(String),
}

/// A finite chain with a row-stochastic transition matrix and a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec<T> {
    labels: Vec<String>,
    p: Vec<Vec<T>>,
    target: Vec<bool>,
}

impl<T: Scalar> ChainSpec<T> {
    pub fn new(labels: Vec<String>, p: Vec<Vec<T>>, targets: &[usize]) -> Result<Self, MarkovError> {
        let k = p.len();
        assert_eq!(labels.len(), k, "one label per state");
        for (row, entries) in p.iter().enumerate() {
            if entries.len() != k {
                return Err(MarkovError::Shape { row, len: entries.len(), expected: k });
            }
            let mut sum = T::zero();
            for (col, v) in entries.iter().enumerate() {
                if *v < T::zero() {
                    return Err(MarkovError::NegativeEntry { row, col });
                }
                sum = sum + v.clone();
            }
            if (sum.clone() - T::one()).abs() > T::tolerance() {
                return Err(MarkovError::RowSum { row, sum: sum.to_string() });
            }
        }
        if targets.is_empty() {
            return Err(MarkovError::EmptyTarget);
        }
        let mut target = vec![false; k];
        for &t in targets {
            if t >= k {
                return Err(MarkovError::TargetOutOfRange(t));
            }
            target[t] = true;
        }
        Ok(Self { labels, p, target })
    }

    /// Unlabelled chain; states are named `0..k`.
    pub fn from_matrix(p: Vec<Vec<T>>, targets: &[usize]) -> Result<Self, MarkovError> {
        let labels = (0..p.len()).map(|i| i.to_string()).collect();
        Self::new(labels, p, targets)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn prob(&self, i: usize, j: usize) -> &T {
        &self.p[i][j]
    }

    pub fn is_target(&self, i: usize) -> bool {
        self.target[i]
    }

    /// Converts every entry, e.g. exact rationals to `f64`.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ChainSpec<U> {
        ChainSpec {
            labels: self.labels.clone(),
            p: self.p.iter().map(|row| row.iter().map(&f).collect()).collect(),
            target: self.target.clone(),
        }
    }

    /// States from which the target can be reached with positive probability.
    fn can_reach_target(&self) -> Vec<bool> {
        let k = self.len();
        let mut ok = self.target.clone();
        let mut queue: VecDeque<usize> = (0..k).filter(|&i| ok[i]).collect();
        while let Some(j) = queue.pop_front() {
            for i in 0..k {
                if !ok[i] && !self.p[i][j].is_zero() {
                    ok[i] = true;
                    queue.push_back(i);
                }
            }
        }
        ok
    }
}

/// Mean hitting times of the target from every state.
pub fn solve_hitting_times<T: Scalar>(chain: &ChainSpec<T>) -> Result<Vec<T>, MarkovError> {
    let reach = chain.can_reach_target();
    if let Some(bad) = reach.iter().position(|&ok| !ok) {
        return Err(MarkovError::Unreachable(chain.labels[bad].clone()));
    }
    let transient: Vec<usize> = (0..chain.len()).filter(|&i| !chain.is_target(i)).collect();
    let m = transient.len();
    // (I - Q) E = 1 over the transient states, augmented with the rhs column.
    let mut a: Vec<Vec<T>> = transient
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let mut row: Vec<T> = transient.iter().map(|&j| T::zero() - chain.p[i][j].clone()).collect();
            row[r] = row[r].clone() + T::one();
            row.push(T::one());
            row
        })
        .collect();

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| {
                a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty pivot range");
        if a[pivot][col].is_zero() {
            return Err(MarkovError::Singular);
        }
        a.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let prow = &upper[col];
        for row in lower.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / prow[col].clone();
            for c in col..=m {
                row[c] = row[c].clone() - factor.clone() * prow[c].clone();
            }
        }
    }
    let mut x = vec![T::zero(); m];
    for r in (0..m).rev() {
        let mut acc = a[r][m].clone();
        for c in r + 1..m {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }

    let mut e = vec![T::zero(); chain.len()];
    for (r, &i) in transient.iter().enumerate() {
        e[i] = x[r].clone();
    }
    Ok(e)
}

/// Largest relative residual of `e` in the first-step equations.
pub fn first_step_residual<T: Scalar>(chain: &ChainSpec<T>, e: &[T]) -> T {
    let mut worst = T::zero();
    for i in 0..chain.len() {
        let expected = if chain.is_target(i) {
            T::zero()
        } else {
            (0..chain.len())
                .filter(|&j| !chain.is_target(j))
                .fold(T::one(), |acc, j| acc + chain.p[i][j].clone() * e[j].clone())
        };
        let scale = if e[i].abs() > T::one() { e[i].abs() } else { T::one() };
        let res = (e[i].clone() - expected).abs() / scale;
        if res > worst {
            worst = res;
        }
    }
    worst
}

/// Simulates the chain from `start` until it enters the target.
/// Returns `None` if `max_steps` is exhausted.
pub fn sample_hitting_time<T: Scalar, R: Rng + ?Sized>(
    chain: &ChainSpec<T>,
    start: usize,
    rng: &mut R,
    max_steps: u64,
) -> Option<u64> {
    let rows: Vec<Vec<f64>> = chain
        .p
        .iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, v| {
                    *acc += v.to_f64_lossy();
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut state = start;
    for k in 0..=max_steps {
        if chain.is_target(state) {
            return Some(k);
        }
        let cdf = &rows[state];
        let u = rng.random::<f64>() * cdf[cdf.len() - 1];
        state = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    }
    None
}

/// Parses the chain matrix text format:
///
/// ```text
/// states 3 target 2
/// 0.5 0.5 0
/// 0 0.5 0.5
/// 0 0 1
/// ```
///
/// States are named `0..k`; entries may be decimals or fractions like `1/3`.
pub fn parse_chain_matrix<T: Scalar>(text: &str) -> Result<ChainSpec<T>, MarkovError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(MarkovError::Parse { line: 1, msg: "empty input".into() })?;
    let bad_header = || MarkovError::Parse { line: hline, msg: "expected `states <k> target <labels...>`".into() };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 4 || fields[0] != "states" || fields[2] != "target" {
        return Err(bad_header());
    }
    let k: usize = fields[1].parse().map_err(|_| bad_header())?;
    let targets = fields[3..]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| bad_header()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut p = Vec::with_capacity(k);
    for (line, body) in lines {
        let row = body
            .split_whitespace()
            .map(|tok| {
                T::parse_literal(tok).ok_or_else(|| MarkovError::Parse { line, msg: format!("bad probability `{tok}`") })
            })
            .collect::<Result<Vec<T>, _>>()?;
        p.push(row);
    }
    if p.len() != k {
        return Err(MarkovError::Parse { line: hline, msg: format!("declared {k} states, found {} rows", p.len()) });
    }
    ChainSpec::from_matrix(p, &targets)
}

/// `G_l = (q_l / p_l) G_{l-1} + 1/p_l` with `G_1 = 1/p_1`, for `l = 1..=upto`.
///
/// Expanding the recursion gives
/// `G_l = (Π_{i=2}^{l} q_i/p_i)/p_1 + Σ_{j=2}^{l} (Π_{i=j+1}^{l} q_i/p_i)/p_j`,
/// the bracketed term shared by the reflected and ladder closed forms.
/// Slices are indexed from `z = 1` at position 0.
fn backlog_terms<T: Scalar>(p: &[T], q: &[T], upto: usize) -> Vec<T> {
    let mut g: Vec<T> = Vec::with_capacity(upto);
    for l in 1..=upto {
        let term = if l == 1 {
            T::one() / p[0].clone()
        } else {
            q[l - 1].clone() / p[l - 1].clone() * g[l - 2].clone() + T::one() / p[l - 1].clone()
        };
        g.push(term);
    }
    g
}

/// Birth-death walk on `0..=n` with absorbing ends and equal up/down rates.
///
/// From interior state `z` the walk moves up and down with the same
/// probability `p_z` and stays put otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricWalk<T> {
    rates: Vec<T>,
}

impl<T: Scalar> SymmetricWalk<T> {
    /// `up[z-1]` and `down[z-1]` are the rates out of interior state `z`.
    pub fn new(up: Vec<T>, down: Vec<T>) -> Result<Self, MarkovError> {
        if up.len() != down.len() {
            return Err(MarkovError::Hypothesis("up and down rate lists differ in length".into()));
        }
        if let Some(z) = up.iter().zip(&down).position(|(a, b)| a != b) {
            return Err(MarkovError::Hypothesis(format!("up rate != down rate at state {}", z + 1)));
        }
        Self::from_rates(up)
    }

    pub fn from_rates(rates: Vec<T>) -> Result<Self, MarkovError> {
        if rates.is_empty() {
            return Err(MarkovError::TooSmall("need at least one interior state".into()));
        }
        for (k, p) in rates.iter().enumerate() {
            if *p <= T::zero() || p.clone() + p.clone() > T::one() + T::tolerance() {
                return Err(MarkovError::Hypothesis(format!("rate {p} at state {} outside (0, 1/2]", k + 1)));
            }
        }
        Ok(Self { rates })
    }

    /// Length `n`: interior states `1..n`, absorbing `0` and `n`.
    pub fn n(&self) -> usize {
        self.rates.len() + 1
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    /// Mean time to hit `{0, n}` from `z`:
    /// `(1 - z/n) Σ_{i<z} i/p_i + (z/n) Σ_{j>=z} (n-j)/p_j`.
    pub fn closed_form(&self, z: usize) -> Result<T, MarkovError> {
        let n = self.n();
        if z == 0 || z >= n {
            return Err(MarkovError::StartOutOfRange { z, max: n - 1 });
        }
        let frac = T::ratio(z as i64, n as i64);
        let below = (1..z).fold(T::zero(), |acc, i| acc + T::from_int(i as i64) / self.rates[i - 1].clone());
        let above = (z..n).fold(T::zero(), |acc, j| acc + T::from_int((n - j) as i64) / self.rates[j - 1].clone());
        Ok((T::one() - frac.clone()) * below + frac * above)
    }

    /// Chain on states `0..=n` (labelled by number), target `{0, n}`.
    pub fn to_chain(&self) -> ChainSpec<T> {
        let n = self.n();
        let mut p = vec![vec![T::zero(); n + 1]; n + 1];
        p[0][0] = T::one();
        p[n][n] = T::one();
        for z in 1..n {
            let rate = self.rates[z - 1].clone();
            p[z][z + 1] = rate.clone();
            p[z][z - 1] = rate.clone();
            p[z][z] = T::one() - rate.clone() - rate;
        }
        let labels = (0..=n).map(|z| z.to_string()).collect();
        ChainSpec::new(labels, p, &[0, n]).expect("symmetric walk rows are stochastic")
    }
}

/// Walk on `1..=n` absorbed at `n`, reflecting at `1`.
///
/// From `z` it moves up with `p_z`, down with `q_z` (`z >= 2`), and stays
/// otherwise; state 1 can only move up.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedWalk<T> {
    up: Vec<T>,
    down: Vec<T>,
}

impl<T: Scalar> ReflectedWalk<T> {
    /// `up[z-1]` for `z = 1..n-1`; `down[z-2]` for `z = 2..n-1`.
    pub fn new(up: Vec<T>, down: Vec<T>) -> Result<Self, MarkovError> {
        if up.is_empty() {
            return Err(MarkovError::TooSmall("need at least one transient state".into()));
        }
        if down.len() + 1 != up.len() {
            return Err(MarkovError::Hypothesis(format!(
                "{} up rates need {} down rates, got {}",
                up.len(),
                up.len() - 1,
                down.len()
            )));
        }
        let mut q = Vec::with_capacity(up.len());
        q.push(T::zero());
        q.extend(down);
        for (k, (p, qz)) in up.iter().zip(&q).enumerate() {
            if *p <= T::zero() {
                return Err(MarkovError::Hypothesis(format!("up rate at state {} must be positive", k + 1)));
            }
            if *qz < T::zero() || p.clone() + qz.clone() > T::one() + T::tolerance() {
                return Err(MarkovError::Hypothesis(format!("rates at state {} do not fit in a row", k + 1)));
            }
        }
        Ok(Self { up, down: q })
    }

    pub fn n(&self) -> usize {
        self.up.len() + 1
    }

    pub fn up(&self) -> &[T] {
        &self.up
    }

    /// Down rates indexed from `z = 1` (the first is always zero).
    pub fn down(&self) -> &[T] {
        &self.down
    }

    /// Mean time to hit `n` from `z`: `E_z = Σ_{l=z}^{n-1} G_l` for `z >= 2`
    /// and `E_1 = E_2 + 1/p_1`.
    pub fn closed_form(&self, z: usize) -> Result<T, MarkovError> {
        let n = self.n();
        if z == 0 || z >= n {
            return Err(MarkovError::StartOutOfRange { z, max: n - 1 });
        }
        let g = backlog_terms(&self.up, &self.down, n - 1);
        let tail = |from: usize| (from..n).fold(T::zero(), |acc, l| acc + g[l - 1].clone());
        if z == 1 {
            Ok(tail(2) + T::one() / self.up[0].clone())
        } else {
            Ok(tail(z))
        }
    }

    /// Chain on states `1..=n` (indices `0..n`), target `{n}`.
    pub fn to_chain(&self) -> ChainSpec<T> {
        let n = self.n();
        let mut p = vec![vec![T::zero(); n]; n];
        for z in 1..n {
            let (up, down) = (self.up[z - 1].clone(), self.down[z - 1].clone());
            p[z - 1][z] = up.clone();
            if z >= 2 {
                p[z - 1][z - 2] = down.clone();
            }
            p[z - 1][z - 1] = T::one() - up - down;
        }
        p[n - 1][n - 1] = T::one();
        let labels = (1..=n).map(|z| z.to_string()).collect();
        ChainSpec::new(labels, p, &[n - 1]).expect("reflected walk rows are stochastic")
    }
}

/// Two-row ladder over columns `1..n-1` absorbed at `n`.
///
/// Both rows share the column rates: `p_z` forward, `q_z` backward (`z >= 2`)
/// and `d_z` across to the other row. Only the upper row's last column can
/// step into `n`; the lower row's last column has no forward move.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderWalk<T> {
    up: Vec<T>,
    down: Vec<T>,
    cross: Vec<T>,
}

/// Closed-form results for the ladder's last column.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderHitting<T> {
    /// Exact mean hitting time from the upper-row last column.
    pub upper_exact: T,
    /// Strict upper bound on the lower-row last column: `(1 + p/d) · upper_exact`.
    pub lower_bound: T,
}

impl<T: Scalar> LadderWalk<T> {
    /// `up`, `cross` indexed by `z = 1..n-1`; `down` by `z = 2..n-1`.
    pub fn new(up: Vec<T>, down: Vec<T>, cross: Vec<T>) -> Result<Self, MarkovError> {
        let cols = up.len();
        if cols == 0 {
            return Err(MarkovError::TooSmall("need at least one column".into()));
        }
        if cross.len() != cols || down.len() + 1 != cols {
            return Err(MarkovError::Hypothesis("ladder rate lists have inconsistent lengths".into()));
        }
        let mut q = Vec::with_capacity(cols);
        q.push(T::zero());
        q.extend(down);
        for z in 0..cols {
            let (p, qz, d) = (&up[z], &q[z], &cross[z]);
            if *p <= T::zero() || *qz < T::zero() || *d < T::zero() {
                return Err(MarkovError::Hypothesis(format!("bad rates in column {}", z + 1)));
            }
            if p.clone() + qz.clone() + d.clone() > T::one() + T::tolerance() {
                return Err(MarkovError::Hypothesis(format!("column {} rates exceed 1", z + 1)));
            }
        }
        Ok(Self { up, down: q, cross })
    }

    pub fn n(&self) -> usize {
        self.up.len() + 1
    }

    pub fn up(&self) -> &[T] {
        &self.up
    }

    pub fn down(&self) -> &[T] {
        &self.down
    }

    pub fn cross(&self) -> &[T] {
        &self.cross
    }

    pub fn closed_form(&self) -> Result<LadderHitting<T>, MarkovError> {
        let cols = self.up.len();
        let last_cross = self.cross[cols - 1].clone();
        if last_cross.is_zero() {
            return Err(MarkovError::Hypothesis("last-column crossing rate must be positive for the bound".into()));
        }
        let g = backlog_terms(&self.up, &self.down, cols);
        let upper_exact = T::from_int(2) * g[cols - 1].clone();
        let lower_bound = (T::one() + self.up[cols - 1].clone() / last_cross) * upper_exact.clone();
        Ok(LadderHitting { upper_exact, lower_bound })
    }

    /// Index of `(column, upper?)` in [`Self::to_chain`]; the absorbing
    /// state is the last index.
    pub fn state_index(&self, column: usize, upper: bool) -> usize {
        2 * (column - 1) + usize::from(!upper)
    }

    /// Chain with states `1u, 1l, 2u, 2l, ..., n` (target `n`).
    pub fn to_chain(&self) -> ChainSpec<T> {
        let cols = self.up.len();
        let k = 2 * cols + 1;
        let absorbing = k - 1;
        let mut p = vec![vec![T::zero(); k]; k];
        for z in 1..=cols {
            let (up, down, cross) = (self.up[z - 1].clone(), self.down[z - 1].clone(), self.cross[z - 1].clone());
            for upper in [true, false] {
                let me = self.state_index(z, upper);
                let mut stay = T::one() - cross.clone();
                p[me][self.state_index(z, !upper)] = cross.clone();
                if z >= 2 {
                    p[me][self.state_index(z - 1, upper)] = down.clone();
                    stay = stay - down.clone();
                }
                if z < cols {
                    p[me][self.state_index(z + 1, upper)] = up.clone();
                    stay = stay - up.clone();
                } else if upper {
                    p[me][absorbing] = up.clone();
                    stay = stay - up.clone();
                }
                p[me][me] = stay;
            }
        }
        p[absorbing][absorbing] = T::one();
        let mut labels: Vec<String> =
            (1..=cols).flat_map(|z| [format!("{z}u"), format!("{z}l")]).collect();
        labels.push((cols + 1).to_string());
        ChainSpec::new(labels, p, &[absorbing]).expect("ladder rows are stochastic")
    }
}

/// Interval-shrinkage walk of quantized consensus from two-level states:
/// `p_z = q_z = z(n - z) / (n(n - 1))`, interior state `z` = number of ones.
pub fn consensus_shrink_walk<T: Scalar>(n: usize) -> Result<SymmetricWalk<T>, MarkovError> {
    if n < 2 {
        return Err(MarkovError::TooSmall(format!("need n >= 2, got {n}")));
    }
    let edges = (n * (n - 1)) as i64;
    SymmetricWalk::from_rates((1..n).map(|z| T::ratio((z * (n - z)) as i64, edges)).collect())
}

fn ladder_for_level<T: Scalar>(n: usize, deep: bool) -> Result<LadderWalk<T>, MarkovError> {
    if n < 4 {
        return Err(MarkovError::TooSmall(format!("ladder needs n >= 4, got {n}")));
    }
    let e = (n * (n - 1)) as i64;
    let p = |k: usize| T::ratio(k as i64, e);
    let mut up = vec![p(n - 2)];
    let mut down = Vec::new();
    let mut cross = vec![p(1)];
    for z in 2..=n - 2 {
        up.push(p((n - 1 - z) * z));
        down.push(p(z - 1));
        cross.push(if deep { p(z - 1) } else { p(z) });
    }
    up.push(p(1));
    down.push(p(n - 2));
    cross.push(if deep { p(n - 2) } else { p(n - 1) });
    LadderWalk::new(up, down, cross)
}

/// Ladder bounding one Lyapunov decrement from the last level above
/// average consensus.
pub fn one_level_ladder<T: Scalar>(n: usize) -> Result<LadderWalk<T>, MarkovError> {
    ladder_for_level(n, false)
}

/// Ladder bounding one Lyapunov decrement from any level two or more above
/// average consensus (weaker crossing rates).
pub fn deep_level_ladder<T: Scalar>(n: usize) -> Result<LadderWalk<T>, MarkovError> {
    ladder_for_level(n, true)
}

/// Walk for one decay of the maximum state once `V` has reached `R`:
/// `h = ⌊R/2⌋` nodes at `L + 2` step down one by one.
///
/// `p_1 = h(n-h)/e`, `p_z = (h-z+1)(n-h)/e`, `q_z = (z-1)(h-z+1)/e` for
/// `z = 2..h`, where `e = n(n-1)`. Odd `R` uses the same formulas with `⌊R/2⌋`.
pub fn max_decay_walk<T: Scalar>(n: usize, r: usize) -> Result<ReflectedWalk<T>, MarkovError> {
    if r < 2 {
        return Err(MarkovError::TooSmall(format!("max-state decay needs R >= 2, got {r}")));
    }
    if r >= n {
        return Err(MarkovError::Hypothesis(format!("remainder {r} must be below n = {n}")));
    }
    let h = r / 2;
    let e = (n * (n - 1)) as i64;
    let up = (1..=h).map(|z| T::ratio(((h - z + 1) * (n - h)) as i64, e)).collect();
    let down = (2..=h).map(|z| T::ratio(((z - 1) * (h - z + 1)) as i64, e)).collect();
    ReflectedWalk::new(up, down)
}

/// A chain named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedChain {
    /// `chain-i:<n>`
    ConsensusShrink(usize),
    /// `chain-iii-l1:<n>`
    OneLevelLadder(usize),
    /// `chain-iii-lgeq2:<n>`
    DeepLevelLadder(usize),
    /// `chain-ii-qa:<n>:<R>`
    MaxDecay(usize, usize),
}

/// A named chain instantiated at a scalar type, with its closed form.
#[derive(Debug, Clone)]
pub enum BuiltChain<T> {
    Symmetric(SymmetricWalk<T>),
    Reflected(ReflectedWalk<T>),
    Ladder(LadderWalk<T>),
}

impl<T: Scalar> BuiltChain<T> {
    pub fn to_chain(&self) -> ChainSpec<T> {
        match self {
            BuiltChain::Symmetric(w) => w.to_chain(),
            BuiltChain::Reflected(w) => w.to_chain(),
            BuiltChain::Ladder(w) => w.to_chain(),
        }
    }
}

impl NamedChain {
    pub fn parse(spec: &str) -> Result<Self, MarkovError> {
        let unknown = || MarkovError::UnknownBuilder(spec.to_string());
        let mut parts = spec.split(':');
        let kind = parts.next().ok_or_else(unknown)?;
        let nums = parts.map(|s| s.parse::<usize>().map_err(|_| unknown())).collect::<Result<Vec<_>, _>>()?;
        match (kind, nums.as_slice()) {
            ("chain-i", [n]) => Ok(NamedChain::ConsensusShrink(*n)),
            ("chain-iii-l1", [n]) => Ok(NamedChain::OneLevelLadder(*n)),
            ("chain-iii-lgeq2", [n]) => Ok(NamedChain::DeepLevelLadder(*n)),
            ("chain-ii-qa", [n, r]) => Ok(NamedChain::MaxDecay(*n, *r)),
            _ => Err(unknown()),
        }
    }

    pub fn build<T: Scalar>(self) -> Result<BuiltChain<T>, MarkovError> {
        Ok(match self {
            NamedChain::ConsensusShrink(n) => BuiltChain::Symmetric(consensus_shrink_walk(n)?),
            NamedChain::OneLevelLadder(n) => BuiltChain::Ladder(one_level_ladder(n)?),
            NamedChain::DeepLevelLadder(n) => BuiltChain::Ladder(deep_level_ladder(n)?),
            NamedChain::MaxDecay(n, r) => BuiltChain::Reflected(max_decay_walk(n, r)?),
        })
    }
}
