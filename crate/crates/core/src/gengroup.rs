//! Small finite groups given by Cayley tables, subgroups as explicit element
//! sets, and a generic closure routine shared with the non-abelian
//! trajectory code.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest Cayley table accepted.
pub const MAX_ORDER: usize = 512;

/// Identity, product and inverse on some element type.
pub trait GroupOps {
    type Elem: Clone + Ord + Hash;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
}

/// Subgroup generated by `gens`, as a sorted set. Fails once the set
/// exceeds `cap` elements.
pub fn generic_closure<G: GroupOps>(
    g: &G,
    gens: &[G::Elem],
    cap: usize,
) -> Result<BTreeSet<G::Elem>> {
    let e = g.identity();
    let gens: Vec<G::Elem> = gens.iter().filter(|x| **x != e).cloned().collect();
    let mut seen = BTreeSet::new();
    seen.insert(e.clone());
    let mut queue = VecDeque::from([e]);
    // right multiplication by generators reaches everything: each generator
    // has finite order, so its inverse is a positive power
    while let Some(x) = queue.pop_front() {
        for s in &gens {
            let y = g.mul(&x, s);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::TooLarge {
                        size: seen.len() + 1,
                        cap,
                    });
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

/// A finite group on `{0, …, n-1}` given by its multiplication table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<u16>,
    identity: usize,
    inverse: Vec<u16>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup(order {})", self.n)
    }
}

impl FiniteGroup {
    /// Validates a Cayley table. Errors name the offending witness.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::TooLarge {
                size: n,
                cap: MAX_ORDER,
            });
        }
        let mut flat = Vec::with_capacity(n * n);
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!(
                    "row {a} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (b, &c) in row.iter().enumerate() {
                if c >= n {
                    return Err(Error::InvalidTable(format!(
                        "entry {a}*{b} = {c} is outside 0..{n}"
                    )));
                }
                flat.push(c as u16);
            }
        }
        let at = |a: usize, b: usize| flat[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| Error::InvalidTable("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let b = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {a} has no inverse")))?;
            inverse.push(b as u16);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::InvalidTable(format!(
                            "not associative: ({a}*{b})*{c} != {a}*({b}*{c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            n,
            table: flat,
            identity,
            inverse,
        })
    }

    /// The group generated by permutations of `{0, …, k-1}` under
    /// composition `(p·q)(x) = p(q(x))`. Element 0 is the identity; the
    /// remaining elements are in sorted order.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self> {
        let k = gens.first().map_or(0, |p| p.len());
        for p in gens {
            let mut seen = vec![false; k];
            if p.len() != k || p.iter().any(|&x| x >= k || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidTable(format!("{p:?} is not a permutation of 0..{k}")));
            }
        }
        let perms = PermOps { k };
        let all = generic_closure(&perms, gens, MAX_ORDER)?;
        let id = perms.identity();
        let mut elems: Vec<Vec<usize>> = vec![id.clone()];
        elems.extend(all.into_iter().filter(|p| *p != id));
        let pos: HashMap<&Vec<usize>, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table: Vec<Vec<usize>> = elems
            .iter()
            .map(|p| elems.iter().map(|q| pos[&perms.mul(p, q)]).collect())
            .collect();
        Self::from_table(&table)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("cyclic group of order 0".into()));
        }
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(&table)
    }

    /// The symmetric group on `k` points.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k <= 1 {
            return Self::cyclic(1);
        }
        let mut transposition: Vec<usize> = (0..k).collect();
        transposition.swap(0, 1);
        let cycle: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
        Self::from_permutations(&[transposition, cycle])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    /// Checks that `map` (indexed by elements of `self`) is a homomorphism
    /// into `target`.
    pub fn check_hom(&self, map: &[usize], target: &FiniteGroup) -> Result<()> {
        if map.len() != self.n {
            return Err(Error::Spec(format!(
                "element map has {} entries, source has order {}",
                map.len(),
                self.n
            )));
        }
        if let Some(&bad) = map.iter().find(|&&x| x >= target.n) {
            return Err(Error::Spec(format!("image {bad} outside target of order {}", target.n)));
        }
        for a in 0..self.n {
            for b in 0..self.n {
                if map[self.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(Error::Spec(format!(
                        "element map is not a homomorphism: f({a}*{b}) != f({a})*f({b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

struct PermOps {
    k: usize,
}

impl GroupOps for PermOps {
    type Elem = Vec<usize>;
    fn identity(&self) -> Vec<usize> {
        (0..self.k).collect()
    }
    fn mul(&self, p: &Vec<usize>, q: &Vec<usize>) -> Vec<usize> {
        q.iter().map(|&x| p[x]).collect()
    }
    fn inv(&self, p: &Vec<usize>) -> Vec<usize> {
        let mut out = vec![0; p.len()];
        for (i, &x) in p.iter().enumerate() {
            out[x] = i;
        }
        out
    }
}

impl GroupOps for FiniteGroup {
    type Elem = usize;
    fn identity(&self) -> usize {
        self.identity
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        FiniteGroup::mul(self, *a, *b)
    }
    fn inv(&self, a: &usize) -> usize {
        FiniteGroup::inv(self, *a)
    }
}

/// A subgroup stored as its sorted element list.
#[derive(Clone, PartialEq, Eq)]
pub struct GenSubgroup {
    parent: Arc<FiniteGroup>,
    elements: Vec<usize>,
}

impl std::fmt::Debug for GenSubgroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GenSubgroup{:?}", self.elements)
    }
}

/// Smallest subgroup of `g` containing `s`.
pub fn closure(g: &Arc<FiniteGroup>, s: &[usize]) -> GenSubgroup {
    let set = generic_closure(g.as_ref(), s, usize::MAX).expect("no cap");
    GenSubgroup {
        parent: g.clone(),
        elements: set.into_iter().collect(),
    }
}

impl GenSubgroup {
    pub fn trivial(g: &Arc<FiniteGroup>) -> Self {
        closure(g, &[])
    }

    pub fn whole(g: &Arc<FiniteGroup>) -> Self {
        GenSubgroup {
            parent: g.clone(),
            elements: (0..g.order()).collect(),
        }
    }

    /// Wraps an element set after checking it is a subgroup.
    pub fn from_elements(g: &Arc<FiniteGroup>, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut elements: Vec<usize> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        if let Some(&x) = elements.iter().find(|&&x| x >= g.order()) {
            return Err(Error::InvalidTable(format!("element {x} outside group")));
        }
        let h = GenSubgroup {
            parent: g.clone(),
            elements,
        };
        let closed = h.contains(g.identity())
            && h.elements
                .iter()
                .all(|&a| h.elements.iter().all(|&b| h.contains(g.mul(a, g.inv(b)))));
        if !closed {
            return Err(Error::Hypothesis("element set is not a subgroup".into()));
        }
        Ok(h)
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &GenSubgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    pub fn conjugate(&self, g: usize) -> GenSubgroup {
        let mut elements: Vec<usize> = self.elements.iter().map(|&h| self.parent.conj(g, h)).collect();
        elements.sort_unstable();
        GenSubgroup {
            parent: self.parent.clone(),
            elements,
        }
    }

    pub fn is_normal(&self) -> bool {
        (0..self.parent.order()).all(|g| self.elements.iter().all(|&h| self.contains(self.parent.conj(g, h))))
    }

    /// Whether `self` is normalized by every element of `by`.
    pub fn is_normalized_by(&self, by: &GenSubgroup) -> bool {
        by.elements
            .iter()
            .all(|&g| self.elements.iter().all(|&h| self.contains(self.parent.conj(g, h))))
    }

    /// The largest normal subgroup of the parent contained in `self`:
    /// the intersection of all conjugates.
    pub fn heart(&self) -> GenSubgroup {
        let mut keep: Vec<usize> = self.elements.clone();
        for g in 0..self.parent.order() {
            keep.retain(|&h| self.contains(self.parent.conj(self.parent.inv(g), h)));
        }
        GenSubgroup {
            parent: self.parent.clone(),
            elements: keep,
        }
    }

    pub fn intersect(&self, other: &GenSubgroup) -> GenSubgroup {
        GenSubgroup {
            parent: self.parent.clone(),
            elements: self.elements.iter().copied().filter(|&x| other.contains(x)).collect(),
        }
    }

    /// The subgroup generated by both.
    pub fn join(&self, other: &GenSubgroup) -> GenSubgroup {
        let mut gens = self.elements.clone();
        gens.extend_from_slice(&other.elements);
        closure(&self.parent, &gens)
    }

    /// `H·N`, provided `N` is normalized by `H` (so the product is a group).
    pub fn product(&self, n: &GenSubgroup) -> Result<GenSubgroup> {
        if !n.is_normalized_by(self) && !self.is_normalized_by(n) {
            return Err(Error::Hypothesis(
                "neither factor normalizes the other; the product set is not a subgroup".into(),
            ));
        }
        let g = &self.parent;
        let set: BTreeSet<usize> = self
            .elements
            .iter()
            .flat_map(|&h| n.elements.iter().map(move |&x| g.mul(h, x)))
            .collect();
        let out = GenSubgroup {
            parent: g.clone(),
            elements: set.into_iter().collect(),
        };
        debug_assert_eq!(
            out.order() * self.intersect(n).order(),
            self.order() * n.order()
        );
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalQuery {
    IsNormal,
    Heart,
    Index,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalAnswer {
    Bool(bool),
    Subgroup(GenSubgroup),
    Index(usize),
}

pub fn normal_tools(h: &GenSubgroup, query: NormalQuery) -> NormalAnswer {
    match query {
        NormalQuery::IsNormal => NormalAnswer::Bool(h.is_normal()),
        NormalQuery::Heart => NormalAnswer::Subgroup(h.heart()),
        NormalQuery::Index => NormalAnswer::Index(h.index()),
    }
}

pub fn subgroup_product(h: &GenSubgroup, n: &GenSubgroup) -> Result<GenSubgroup> {
    h.product(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> (Arc<FiniteGroup>, Vec<Vec<usize>>) {
        // independent element list: all permutations of 3 points
        let perms: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![1, 0, 2],
            vec![0, 2, 1],
            vec![2, 1, 0],
            vec![1, 2, 0],
            vec![2, 0, 1],
        ];
        let idx = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| perms.iter().map(|q| idx(&q.iter().map(|&x| p[x]).collect())).collect())
            .collect();
        (Arc::new(FiniteGroup::from_table(&table).unwrap()), perms)
    }

    #[test]
    fn cayley_validation() {
        assert!(FiniteGroup::from_table(&[vec![0, 1], vec![1, 0]]).is_ok());
        let (g, _) = s3();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        // x*y = x - y mod 3 has an identity on the right only
        let bad: Vec<Vec<usize>> = (0..3).map(|a| (0..3).map(|b| (a + 3 - b) % 3).collect()).collect();
        assert!(FiniteGroup::from_table(&bad).is_err());
        // a loop with identity and inverses that is not associative
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        match FiniteGroup::from_table(&loop5) {
            Err(Error::InvalidTable(msg)) => assert!(msg.contains("not associative"), "{msg}"),
            other => panic!("expected associativity failure, got {other:?}"),
        }
    }

    #[test]
    fn s3_closures_and_normality() {
        let (g, _) = s3();
        let e = GenSubgroup::trivial(&g);
        assert_eq!(e.order(), 1);
        let t = closure(&g, &[1]);
        assert_eq!(t.order(), 2);
        let a3 = closure(&g, &[4]);
        assert_eq!(a3.order(), 3);
        assert!(!t.is_normal());
        assert_eq!(t.heart(), e);
        assert_eq!(t.index(), 3);
        assert!(a3.is_normal());
        assert_eq!(a3.heart(), a3);
        let all = GenSubgroup::whole(&g);
        assert_eq!(all.heart(), all);
        assert_eq!(normal_tools(&t, NormalQuery::Index), NormalAnswer::Index(3));
        let p = subgroup_product(&t, &a3).unwrap();
        assert_eq!(p.order(), 6);
        assert_eq!(t.product(&t).unwrap(), t);
        assert_eq!(e.product(&a3).unwrap(), a3);
        let t2 = closure(&g, &[2]);
        assert!(t.product(&t2).is_err());
    }

    #[test]
    fn permutation_builder_matches() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        let s4 = FiniteGroup::symmetric(4).unwrap();
        assert_eq!(s4.order(), 24);
        assert!(FiniteGroup::from_permutations(&[vec![0, 0, 1]]).is_err());
    }

    #[test]
    fn from_elements_checks_closure() {
        let (g, _) = s3();
        assert!(GenSubgroup::from_elements(&g, [0, 1]).is_ok());
        assert!(GenSubgroup::from_elements(&g, [0, 1, 2]).is_err());
    }
}
