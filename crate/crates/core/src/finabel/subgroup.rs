//! Canonical subgroups of a finite abelian group.
//!
//! A subgroup `H ≤ A = Z^k / D·Z^k` is the image of a full-rank lattice
//! `L` with `D·Z^k ⊆ L ⊆ Z^k`. We store the row Hermite normal form of `L`:
//! an upper-triangular `k × k` matrix whose pivot `h_i` divides `d_i` and
//! whose entries right of a pivot lie in `[0, h_j)`. Every entry is bounded
//! by the moduli, because `d_j·e_j ∈ L` lets us reduce freely mod `d_j`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;

use super::group::{ext_gcd, Elem, FiniteAbelianGroup};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbSubgroup {
    ambient: FiniteAbelianGroup,
    /// Row-major `k × k` Hermite basis.
    rows: Vec<i64>,
    order: BigUint,
}

#[inline]
fn modp(x: i128, d: i64) -> i64 {
    x.rem_euclid(d as i128) as i64
}

impl AbSubgroup {
    /// The trivial subgroup `{0}`.
    pub fn trivial(ambient: &FiniteAbelianGroup) -> Self {
        let k = ambient.rank();
        let mut rows = vec![0i64; k * k];
        for (i, &d) in ambient.moduli().iter().enumerate() {
            rows[i * k + i] = d;
        }
        AbSubgroup {
            ambient: ambient.clone(),
            rows,
            order: BigUint::from(1u32),
        }
    }

    /// The whole ambient group.
    pub fn whole(ambient: &FiniteAbelianGroup) -> Self {
        let k = ambient.rank();
        let mut rows = vec![0i64; k * k];
        for i in 0..k {
            rows[i * k + i] = 1;
        }
        AbSubgroup {
            ambient: ambient.clone(),
            rows,
            order: ambient.order(),
        }
    }

    /// Subgroup generated by `gens`, in canonical form.
    pub fn generated<I, E>(ambient: &FiniteAbelianGroup, gens: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[i64]>,
    {
        let mut h = Self::trivial(ambient);
        h.absorb(gens)?;
        Ok(h)
    }

    /// Adds generators, keeping the canonical form.
    fn absorb<I, E>(&mut self, gens: I) -> Result<()>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[i64]>,
    {
        let mut touched = false;
        for g in gens {
            let v = self.ambient.canonical(g.as_ref())?;
            touched |= self.insert(v);
        }
        if touched {
            self.normalize();
            self.recompute_order();
        }
        Ok(())
    }

    fn k(&self) -> usize {
        self.ambient.rank()
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> i64 {
        self.rows[i * self.k() + j]
    }

    /// Pivot `h_i` of row `i`.
    pub fn pivot(&self, i: usize) -> i64 {
        self.at(i, i)
    }

    /// Inserts a reduced vector into the echelon rows. Returns whether the
    /// lattice may have changed.
    fn insert(&mut self, mut v: Vec<i64>) -> bool {
        let k = self.k();
        let d = self.ambient.moduli().to_vec();
        let mut changed = false;
        let mut i = 0;
        while i < k {
            if v[i] == 0 {
                i += 1;
                continue;
            }
            let h = self.rows[i * k + i];
            let vi = v[i];
            if vi % h == 0 {
                let q = (vi / h) as i128;
                v[i] = 0;
                for j in i + 1..k {
                    let b = self.rows[i * k + j] as i128;
                    if b != 0 {
                        v[j] = modp(v[j] as i128 - q * b, d[j]);
                    }
                }
            } else {
                changed = true;
                let (g, s, t) = ext_gcd(h, vi);
                let (s, t) = (s as i128, t as i128);
                let (a, c) = ((vi / g) as i128, (h / g) as i128);
                self.rows[i * k + i] = g;
                v[i] = 0;
                for j in i + 1..k {
                    let b = self.rows[i * k + j] as i128;
                    let x = v[j] as i128;
                    if b == 0 && x == 0 {
                        continue;
                    }
                    self.rows[i * k + j] = modp(s * b + t * x, d[j]);
                    v[j] = modp(a * b - c * x, d[j]);
                }
            }
            i += 1;
        }
        changed
    }

    /// Reduces entries right of each pivot into `[0, h_j)`.
    fn normalize(&mut self) {
        let k = self.k();
        let d = self.ambient.moduli().to_vec();
        for i in (0..k).rev() {
            for j in i + 1..k {
                let x = self.rows[i * k + j];
                if x == 0 {
                    continue;
                }
                let hj = self.rows[j * k + j];
                let q = x / hj;
                if q == 0 {
                    continue;
                }
                let q = q as i128;
                self.rows[i * k + j] = x - (q as i64) * hj;
                for jj in j + 1..k {
                    let b = self.rows[j * k + jj] as i128;
                    if b != 0 {
                        let cur = self.rows[i * k + jj] as i128;
                        self.rows[i * k + jj] = modp(cur - q * b, d[jj]);
                    }
                }
            }
        }
    }

    fn recompute_order(&mut self) {
        let k = self.k();
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for (i, &d) in self.ambient.moduli().iter().enumerate() {
            num *= BigUint::from(d as u64);
            den *= BigUint::from(self.rows[i * k + i] as u64);
        }
        self.order = num / den;
    }

    pub fn ambient(&self) -> &FiniteAbelianGroup {
        &self.ambient
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    /// `[A : H]`.
    pub fn index_in_ambient(&self) -> BigUint {
        self.ambient.order() / &self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == BigUint::from(1u32)
    }

    pub fn is_whole(&self) -> bool {
        (0..self.k()).all(|i| self.pivot(i) == 1)
    }

    /// Raw canonical basis, row-major.
    pub fn canonical_rows(&self) -> Vec<Vec<i64>> {
        let k = self.k();
        (0..k).map(|i| self.rows[i * k..(i + 1) * k].to_vec()).collect()
    }

    /// Membership by back-substitution against the echelon rows.
    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        let mut v = self.ambient.canonical(x)?;
        let k = self.k();
        let d = self.ambient.moduli();
        for i in 0..k {
            if v[i] == 0 {
                continue;
            }
            let h = self.pivot(i);
            if v[i] % h != 0 {
                return Ok(false);
            }
            let q = (v[i] / h) as i128;
            v[i] = 0;
            for j in i + 1..k {
                let b = self.at(i, j) as i128;
                if b != 0 {
                    v[j] = modp(v[j] as i128 - q * b, d[j]);
                }
            }
        }
        Ok(true)
    }

    /// Eliminates the coordinates in `0..upto` using the echelon rows and
    /// returns the remainder; `None` if some coordinate in range cannot be
    /// cleared (no element of `H` has that prefix).
    pub fn reduce_prefix(&self, x: &[i64], upto: usize) -> Result<Option<Elem>> {
        let mut v = self.ambient.canonical(x)?;
        let k = self.k();
        let d = self.ambient.moduli();
        for i in 0..upto.min(k) {
            if v[i] == 0 {
                continue;
            }
            let h = self.pivot(i);
            if v[i] % h != 0 {
                return Ok(None);
            }
            let q = (v[i] / h) as i128;
            v[i] = 0;
            for j in i + 1..k {
                let b = self.at(i, j) as i128;
                if b != 0 {
                    v[j] = modp(v[j] as i128 - q * b, d[j]);
                }
            }
        }
        Ok(Some(v))
    }

    /// A generating set: the canonical rows read in the ambient group,
    /// zeros dropped. At most `rank` elements.
    pub fn generators(&self) -> Vec<Elem> {
        let k = self.k();
        let mut out = Vec::new();
        for i in 0..k {
            let mut row = self.rows[i * k..(i + 1) * k].to_vec();
            self.ambient.reduce_in_place(&mut row);
            if row.iter().any(|&x| x != 0) {
                out.push(row);
            }
        }
        out
    }

    /// Generators of `H ∩ (0 ⊕ A_2)` projected to `A_2`, where the ambient
    /// is `A_1 ⊕ A_2` and `split = rank(A_1)`. Rows of an echelon basis
    /// whose pivot lies at or past `split` span exactly that part.
    pub(crate) fn tail_generators(&self, split: usize) -> Vec<Elem> {
        let k = self.k();
        let d = self.ambient.moduli();
        let mut out = Vec::new();
        for i in split..k {
            let mut row: Vec<i64> = self.rows[i * k + split..(i + 1) * k].to_vec();
            for (x, &m) in row.iter_mut().zip(&d[split..]) {
                *x = x.rem_euclid(m);
            }
            if row.iter().any(|&x| x != 0) {
                out.push(row);
            }
        }
        out
    }

    pub fn is_subgroup_of(&self, other: &AbSubgroup) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        for g in self.generators() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `H + L`.
    pub fn sum(&self, other: &AbSubgroup) -> Result<AbSubgroup> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        let mut out = self.clone();
        out.absorb(other.generators())?;
        Ok(out)
    }

    /// `H + ⟨gens⟩`.
    pub fn with_generators<I, E>(&self, gens: I) -> Result<AbSubgroup>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[i64]>,
    {
        let mut out = self.clone();
        out.absorb(gens)?;
        Ok(out)
    }

    /// `H ∩ L`, read off from `{(h + l, h)} ≤ A ⊕ A`.
    pub fn intersect(&self, other: &AbSubgroup) -> Result<AbSubgroup> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        if self.is_trivial() || other.is_whole() {
            return Ok(self.clone());
        }
        if other.is_trivial() || self.is_whole() {
            return Ok(other.clone());
        }
        let a = &self.ambient;
        let k = a.rank();
        let big = a.direct_sum(a);
        let mut gens: Vec<Elem> = Vec::new();
        for h in self.generators() {
            let mut v = h.clone();
            v.extend_from_slice(&h);
            gens.push(v);
        }
        for l in other.generators() {
            let mut v = l;
            v.extend(std::iter::repeat_n(0, k));
            gens.push(v);
        }
        let graph = AbSubgroup::generated(&big, &gens)?;
        AbSubgroup::generated(a, graph.tail_generators(k))
    }

    /// `[L : H]` for `H ⊆ L` (`self = H`).
    pub fn index_in(&self, larger: &AbSubgroup) -> Result<BigUint> {
        if !self.is_subgroup_of(larger)? {
            return Err(Error::NotContained);
        }
        Ok(larger.order() / self.order())
    }
}

impl fmt::Debug for AbSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AbSubgroup(order {} in {:?}, gens {:?})",
            self.order,
            self.ambient,
            self.generators()
        )
    }
}

/// Order of `A / H` as a `u64`, for callers that know it is small.
pub fn small(n: &BigUint) -> u64 {
    let digits = n.to_u64_digits();
    match digits.len() {
        0 => 0,
        1 => digits[0],
        _ => panic!("value {n} does not fit in u64"),
    }
}

/// `|H| · |L| = |H + L| · |H ∩ L|` lets callers get `|H ∩ L|` without
/// building the intersection.
pub fn intersection_order(h: &AbSubgroup, l: &AbSubgroup) -> Result<BigUint> {
    let s = h.sum(l)?;
    let prod = h.order() * l.order();
    debug_assert!(prod.is_multiple_of(s.order()));
    Ok(prod / s.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn z44() -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![4, 4]).unwrap()
    }

    fn brute_closure(a: &FiniteAbelianGroup, gens: &[Elem]) -> BTreeSet<Elem> {
        let mut set: BTreeSet<Elem> = BTreeSet::new();
        set.insert(a.zero());
        let mut frontier = vec![a.zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = a.add(&x, g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    #[test]
    fn generated_examples() {
        let a = z44();
        let h = AbSubgroup::generated(&a, [vec![2, 0]]).unwrap();
        assert_eq!(*h.order(), BigUint::from(2u32));
        let h = AbSubgroup::generated(&a, [vec![1, 2], vec![2, 0]]).unwrap();
        assert_eq!(*h.order(), BigUint::from(4u32));
        let h = AbSubgroup::generated(&a, Vec::<Elem>::new()).unwrap();
        assert!(h.is_trivial());
        assert!(AbSubgroup::generated(&a, [vec![1]]).is_err());
    }

    #[test]
    fn combine_examples() {
        let a = z44();
        let h = AbSubgroup::generated(&a, [vec![1, 0]]).unwrap();
        let l = AbSubgroup::generated(&a, [vec![1, 2]]).unwrap();
        let i = h.intersect(&l).unwrap();
        assert_eq!(i, AbSubgroup::generated(&a, [vec![2, 0]]).unwrap());
        assert_eq!(*h.sum(&l).unwrap().order(), BigUint::from(8u32));
        assert_eq!(h.sum(&AbSubgroup::trivial(&a)).unwrap(), h);
    }

    #[test]
    fn index_examples() {
        let z8 = FiniteAbelianGroup::cyclic(8).unwrap();
        let two = AbSubgroup::generated(&z8, [vec![2]]).unwrap();
        let whole = AbSubgroup::whole(&z8);
        assert_eq!(two.index_in(&whole).unwrap(), BigUint::from(2u32));
        assert_eq!(two.index_in(&two).unwrap(), BigUint::from(1u32));
        assert_eq!(
            AbSubgroup::trivial(&z44())
                .index_in(&AbSubgroup::whole(&z44()))
                .unwrap(),
            BigUint::from(16u32)
        );
        assert_eq!(whole.index_in(&two), Err(Error::NotContained));
    }

    #[test]
    fn whole_is_canonical() {
        let a = FiniteAbelianGroup::new(vec![6, 4, 1]).unwrap();
        let w = AbSubgroup::generated(&a, a.elements().collect::<Vec<_>>()).unwrap();
        assert_eq!(w, AbSubgroup::whole(&a));
    }

    #[test]
    fn matches_enumeration_exhaustively_on_small_group() {
        let a = FiniteAbelianGroup::new(vec![2, 4, 3]).unwrap();
        let elems: Vec<Elem> = a.elements().collect();
        for x in &elems {
            for y in elems.iter().step_by(3) {
                let gens = vec![x.clone(), y.clone()];
                let h = AbSubgroup::generated(&a, &gens).unwrap();
                let brute = brute_closure(&a, &gens);
                assert_eq!(h.order(), &BigUint::from(brute.len()));
                for z in &elems {
                    assert_eq!(h.contains(z).unwrap(), brute.contains(z));
                }
                // canonicality: regenerate from the brute-force element set
                let again = AbSubgroup::generated(&a, brute.iter()).unwrap();
                assert_eq!(again, h);
            }
        }
    }
}
