use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Largest admissible cyclic modulus. Keeps every product of two reduced
/// entries inside `i64` and every ext-gcd combination inside `i128`.
pub const MAX_MODULUS: i64 = (1 << 31) - 1;

/// An element of a [`FiniteAbelianGroup`]: one integer per cyclic factor.
pub type Elem = Vec<i64>;

/// `Z/d_1 ⊕ … ⊕ Z/d_k`, given by its diagonal relation matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct FiniteAbelianGroup {
    moduli: Vec<i64>,
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<i64>) -> Result<Self> {
        if let Some(&bad) = moduli.iter().find(|&&d| !(1..=MAX_MODULUS).contains(&d)) {
            return Err(Error::Modulus(bad));
        }
        Ok(FiniteAbelianGroup { moduli })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { moduli: Vec::new() }
    }

    pub fn cyclic(n: i64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    /// Number of cyclic coordinates.
    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> BigUint {
        self.moduli
            .iter()
            .fold(BigUint::from(1u32), |acc, &d| acc * BigUint::from(d as u64))
    }

    /// Order as a machine integer, if it fits.
    pub fn order_u64(&self) -> Option<u64> {
        self.moduli
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
    }

    /// Exponent (lcm of the moduli).
    pub fn exponent(&self) -> i64 {
        self.moduli
            .iter()
            .fold(1i64, |acc, &d| num_integer::lcm(acc, d))
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.rank()]
    }

    pub fn unit(&self, i: usize) -> Elem {
        let mut e = self.zero();
        e[i] = 1 % self.moduli[i];
        e
    }

    pub fn check_dim(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.rank() {
            return Err(Error::Dimension {
                expected: self.rank(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn reduce_in_place(&self, x: &mut [i64]) {
        for (v, &d) in x.iter_mut().zip(&self.moduli) {
            *v = v.rem_euclid(d);
        }
    }

    /// Canonical representative with every coordinate in `[0, d_i)`.
    pub fn canonical(&self, x: &[i64]) -> Result<Elem> {
        self.check_dim(x)?;
        let mut y = x.to_vec();
        self.reduce_in_place(&mut y);
        Ok(y)
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Elem {
        x.iter()
            .zip(y)
            .zip(&self.moduli)
            .map(|((a, b), d)| (a + b).rem_euclid(*d))
            .collect()
    }

    pub fn neg(&self, x: &[i64]) -> Elem {
        x.iter()
            .zip(&self.moduli)
            .map(|(a, d)| (-a).rem_euclid(*d))
            .collect()
    }

    pub fn scale(&self, c: i64, x: &[i64]) -> Elem {
        x.iter()
            .zip(&self.moduli)
            .map(|(a, d)| ((c as i128 * *a as i128).rem_euclid(*d as i128)) as i64)
            .collect()
    }

    pub fn is_zero(&self, x: &[i64]) -> bool {
        x.iter().zip(&self.moduli).all(|(a, d)| a.rem_euclid(*d) == 0)
    }

    /// Additive order of an element.
    pub fn element_order(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.moduli).fold(1i64, |acc, (a, &d)| {
            let g = num_integer::gcd(a.rem_euclid(d), d);
            num_integer::lcm(acc, d / g)
        })
    }

    pub fn direct_sum(&self, other: &FiniteAbelianGroup) -> FiniteAbelianGroup {
        let mut moduli = self.moduli.clone();
        moduli.extend_from_slice(&other.moduli);
        FiniteAbelianGroup { moduli }
    }

    /// Enumerates every element in lexicographic order. Only sensible for
    /// small groups; used by oracles and brute-force checks.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        let total = self.order_u64().expect("group too large to enumerate");
        (0..total).map(move |mut idx| {
            let mut x = vec![0i64; self.rank()];
            for i in (0..self.rank()).rev() {
                let d = self.moduli[i] as u64;
                x[i] = (idx % d) as i64;
                idx /= d;
            }
            x
        })
    }
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.moduli.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Extended gcd on non-negative inputs (not both zero): `s*a + t*b = g`.
pub(crate) fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}
