//! Initial-state generators and their string specs.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad initial-state spec `{spec}`: {msg}")]
pub struct InitError {
    pub spec: String,
    pub msg: String,
}

/// Slowest start for consensus: `⌊n/2⌋` ones then zeros.
pub fn qc_worst_init(n: usize) -> Vec<i64> {
    (0..n).map(|k| i64::from(k < n / 2)).collect()
}

/// Slowest start for averaging: `[2, 1, ..., 1, 0]` (sum `n`, so `L = 1`, `R = 0`).
pub fn qa_worst_init(n: usize) -> Vec<i64> {
    assert!(n >= 2, "need at least two nodes");
    let mut x = vec![1; n];
    x[0] = 2;
    x[n - 1] = 0;
    x
}

/// I.i.d. integers uniform on the inclusive range `lo..=hi`.
pub fn uniform_init(n: usize, lo: i64, hi: i64, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Parsed initial-state spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitSpec {
    /// `2,0,1` or `2 0 1`
    Explicit(Vec<i64>),
    /// `x1:<n>:<z>`: `z` ones then zeros.
    TwoLevel { n: usize, z: usize },
    /// `halfsplit:<n>`
    HalfSplit(usize),
    /// `qaworst:<n>`
    QaWorst(usize),
    /// `uniform:<n>:<lo>:<hi>:<seed>`
    Uniform { n: usize, lo: i64, hi: i64, seed: u64 },
}

impl InitSpec {
    pub fn values(&self) -> Vec<i64> {
        match *self {
            InitSpec::Explicit(ref x) => x.clone(),
            InitSpec::TwoLevel { n, z } => (0..n).map(|k| i64::from(k < z)).collect(),
            InitSpec::HalfSplit(n) => qc_worst_init(n),
            InitSpec::QaWorst(n) => qa_worst_init(n),
            InitSpec::Uniform { n, lo, hi, seed } => uniform_init(n, lo, hi, seed),
        }
    }
}

impl FromStr for InitSpec {
    type Err = InitError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| InitError { spec: spec.to_string(), msg: msg.to_string() };
        let spec_t = spec.trim();
        let parts: Vec<&str> = spec_t.split(':').collect();
        let num = |s: &str| s.parse::<i64>().map_err(|_| err(&format!("`{s}` is not an integer")));
        let size = |s: &str| match s.parse::<usize>() {
            Ok(n) if n >= 2 => Ok(n),
            _ => Err(err("node count must be an integer >= 2")),
        };
        match parts.as_slice() {
            ["x1", n, z] => {
                let (n, z) = (size(n)?, num(z)?);
                if z < 1 || z as usize >= n {
                    return Err(err("need 1 <= z <= n-1"));
                }
                Ok(InitSpec::TwoLevel { n, z: z as usize })
            }
            ["halfsplit", n] => Ok(InitSpec::HalfSplit(size(n)?)),
            ["qaworst", n] => Ok(InitSpec::QaWorst(size(n)?)),
            ["uniform", n, lo, hi, seed] => {
                let (n, lo, hi) = (size(n)?, num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(err("empty range"));
                }
                let seed = seed.parse::<u64>().map_err(|_| err("bad seed"))?;
                Ok(InitSpec::Uniform { n, lo, hi, seed })
            }
            [single] => {
                let values = single
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(num)
                    .collect::<Result<Vec<_>, _>>()?;
                if values.len() < 2 {
                    return Err(err("need at least two node states"));
                }
                Ok(InitSpec::Explicit(values))
            }
            _ => Err(err("unknown generator")),
        }
    }
}

impl TryFrom<String> for InitSpec {
    type Error = InitError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<InitSpec> for String {
    fn from(spec: InitSpec) -> Self {
        match spec {
            InitSpec::Explicit(x) => x.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
            InitSpec::TwoLevel { n, z } => format!("x1:{n}:{z}"),
            InitSpec::HalfSplit(n) => format!("halfsplit:{n}"),
            InitSpec::QaWorst(n) => format!("qaworst:{n}"),
            InitSpec::Uniform { n, lo, hi, seed } => format!("uniform:{n}:{lo}:{hi}:{seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_starts() {
        assert_eq!(qc_worst_init(4), vec![1, 1, 0, 0]);
        assert_eq!(qc_worst_init(5), vec![1, 1, 0, 0, 0]);
        assert_eq!(qc_worst_init(2), vec![1, 0]);
        assert_eq!(qa_worst_init(4), vec![2, 1, 1, 0]);
        assert_eq!(qa_worst_init(2), vec![2, 0]);
        assert_eq!(qa_worst_init(6), vec![2, 1, 1, 1, 1, 0]);
        assert_eq!(crate::lyapunov::decompose_sum(qa_worst_init(6).iter().sum(), 6), (1, 0));
    }

    #[test]
    fn parse_generators() {
        assert_eq!("x1:4:3".parse::<InitSpec>().unwrap().values(), vec![1, 1, 1, 0]);
        assert_eq!("halfsplit:5".parse::<InitSpec>().unwrap().values(), vec![1, 1, 0, 0, 0]);
        assert_eq!("qaworst:3".parse::<InitSpec>().unwrap().values(), vec![2, 1, 0]);
        assert_eq!("2,0".parse::<InitSpec>().unwrap().values(), vec![2, 0]);
        assert_eq!("-1 4  2".parse::<InitSpec>().unwrap().values(), vec![-1, 4, 2]);
        let u = "uniform:50:-5:5:9".parse::<InitSpec>().unwrap().values();
        assert_eq!(u.len(), 50);
        assert!(u.iter().all(|v| (-5..=5).contains(v)));
        assert_eq!(u, "uniform:50:-5:5:9".parse::<InitSpec>().unwrap().values());
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["x1:4:4", "x1:4:0", "halfsplit:1", "uniform:3:5:1:0", "7", "a,b", "foo:3"] {
            assert!(bad.parse::<InitSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn uniform_covers_both_endpoints() {
        let draws = uniform_init(2000, -5, 5, 3);
        assert!(draws.contains(&-5));
        assert!(draws.contains(&5));
    }

    #[test]
    fn spec_string_round_trip() {
        for s in ["x1:5:2", "halfsplit:8", "qaworst:4", "uniform:6:-5:5:1", "2,0,1"] {
            let spec: InitSpec = s.parse().unwrap();
            assert_eq!(String::from(spec), s);
        }
    }
}
