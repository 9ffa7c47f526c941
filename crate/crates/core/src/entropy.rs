use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// An entropy value `log q` for an exact positive rational `q`, or `+∞`.
///
/// The logarithm is never evaluated internally; [`EntropyValue::ln`] is a
/// display helper.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EntropyValue {
    LogOf(BigRational),
    Infinite,
}

impl EntropyValue {
    pub fn zero() -> Self {
        EntropyValue::LogOf(BigRational::one())
    }

    /// `log q`. Panics unless `q > 0`.
    pub fn log_of(q: BigRational) -> Self {
        assert!(q.is_positive(), "entropy argument must be positive, got {q}");
        EntropyValue::LogOf(q)
    }

    pub fn log_int(n: impl Into<BigUint>) -> Self {
        Self::log_of(BigRational::from_integer(BigInt::from(n.into())))
    }

    /// `log(num) − log(den)`.
    pub fn log_ratio(num: &BigUint, den: &BigUint) -> Self {
        Self::log_of(BigRational::new(
            BigInt::from(num.clone()),
            BigInt::from(den.clone()),
        ))
    }

    pub fn argument(&self) -> Option<&BigRational> {
        match self {
            EntropyValue::LogOf(q) => Some(q),
            EntropyValue::Infinite => None,
        }
    }

    /// The argument as an integer, when it is one (formula outputs always are).
    pub fn integer_argument(&self) -> Option<BigUint> {
        let q = self.argument()?;
        if q.is_integer() {
            q.to_integer().to_biguint()
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, EntropyValue::LogOf(q) if q.is_one())
    }

    pub fn ln(&self) -> f64 {
        match self {
            EntropyValue::Infinite => f64::INFINITY,
            EntropyValue::LogOf(q) => {
                let n = q.numer().to_f64().unwrap_or(f64::MAX);
                let d = q.denom().to_f64().unwrap_or(f64::MAX);
                if n.is_finite() && d.is_finite() && n < 1e300 && d < 1e300 {
                    n.ln() - d.ln()
                } else {
                    big_ln(q.numer()) - big_ln(q.denom())
                }
            }
        }
    }

    /// `k · log q = log q^k`.
    pub fn times(&self, k: u32) -> Self {
        match self {
            EntropyValue::Infinite => EntropyValue::Infinite,
            EntropyValue::LogOf(q) => EntropyValue::LogOf(num_traits::pow(q.clone(), k as usize)),
        }
    }
}

fn big_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl PartialOrd for EntropyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntropyValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (EntropyValue::Infinite, EntropyValue::Infinite) => Ordering::Equal,
            (EntropyValue::Infinite, _) => Ordering::Greater,
            (_, EntropyValue::Infinite) => Ordering::Less,
            (EntropyValue::LogOf(a), EntropyValue::LogOf(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyValue::Infinite => write!(f, "∞"),
            EntropyValue::LogOf(q) if q.is_one() => write!(f, "0"),
            EntropyValue::LogOf(q) => write!(f, "log {q}"),
        }
    }
}

impl Default for EntropyValue {
    fn default() -> Self {
        Self::zero()
    }
}

/// How an entropy value is obtained: from the stabilized growth index, from
/// the limit-free index formula, or (compact side, surjective maps) from the
/// index of the negative cotrajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Limit,
    LimitFree,
    Surjective,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "limit" => Ok(Method::Limit),
            "limitfree" => Ok(Method::LimitFree),
            "surjective" => Ok(Method::Surjective),
            other => Err(format!("unknown method `{other}` (limit, limitfree, surjective)")),
        }
    }
}

/// Budget and stall window for stabilization detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StabilizationPolicy {
    /// Largest `n` for which `T_n` / `C_n` is computed.
    pub max_n: usize,
    /// Number of consecutive equal values required to call a sequence stalled.
    pub stall_window: usize,
    /// Cap on the number of blocks in any window.
    pub window_budget: usize,
}

impl Default for StabilizationPolicy {
    fn default() -> Self {
        StabilizationPolicy {
            max_n: 64,
            stall_window: 3,
            window_budget: 512,
        }
    }
}

/// Index of the first position from which the last `w` entries are equal,
/// if the tail of `seq` has stalled for `w` steps.
pub(crate) fn stalled<T: PartialEq>(seq: &[T], w: usize) -> Option<usize> {
    let w = w.max(1);
    if seq.len() < w {
        return None;
    }
    let last = seq.last()?;
    let tail = &seq[seq.len() - w..];
    if tail.iter().all(|x| x == last) {
        let mut start = seq.len() - 1;
        while start > 0 && seq[start - 1] == *last {
            start -= 1;
        }
        Some(start)
    } else {
        None
    }
}
