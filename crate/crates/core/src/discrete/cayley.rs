use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;

use super::{StepOutcome, TrajectoryEngine};
use crate::blocks::{Geometry, IndexSet, Periodic, Window};
use crate::error::{Error, Result};
use crate::gengroup::{generic_closure, FiniteGroup, GroupOps};

/// Largest explicit element set built for a non-abelian trajectory.
pub const MAX_SET: usize = 1 << 17;

/// A finite-support element of `⊕_i B_i` with Cayley-table blocks:
/// `(block index, element)` pairs, sorted, identity entries omitted.
pub type CayleyElem = Vec<(i64, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyBlocks {
    pub index_set: IndexSet,
    pub blocks: Periodic<Arc<FiniteGroup>>,
}

impl CayleyBlocks {
    pub fn new(index_set: IndexSet, blocks: Periodic<Arc<FiniteGroup>>) -> Result<Self> {
        blocks.validate(index_set)?;
        Ok(CayleyBlocks { index_set, blocks })
    }

    pub fn block(&self, i: i64) -> &FiniteGroup {
        self.blocks.get(i)
    }

    /// Normalizes a user-supplied element.
    pub fn element(&self, entries: &[(i64, usize)]) -> Result<CayleyElem> {
        let mut acc: BTreeMap<i64, usize> = BTreeMap::new();
        for &(i, g) in entries {
            if !self.index_set.contains(i) {
                return Err(Error::Spec(format!("block index {i} outside the index set")));
            }
            let b = self.block(i);
            if g >= b.order() {
                return Err(Error::Spec(format!(
                    "element {g} outside block {i} of order {}",
                    b.order()
                )));
            }
            let cur = acc.entry(i).or_insert(b.identity());
            *cur = b.mul(*cur, g);
        }
        Ok(acc
            .into_iter()
            .filter(|&(i, g)| g != self.block(i).identity())
            .collect())
    }
}

impl GroupOps for CayleyBlocks {
    type Elem = CayleyElem;

    fn identity(&self) -> CayleyElem {
        Vec::new()
    }

    fn mul(&self, a: &CayleyElem, b: &CayleyElem) -> CayleyElem {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut p, mut q) = (0, 0);
        while p < a.len() || q < b.len() {
            let take_a = q >= b.len() || (p < a.len() && a[p].0 < b[q].0);
            let take_b = p >= a.len() || (q < b.len() && b[q].0 < a[p].0);
            if take_a {
                out.push(a[p]);
                p += 1;
            } else if take_b {
                out.push(b[q]);
                q += 1;
            } else {
                let i = a[p].0;
                let g = self.block(i);
                let c = g.mul(a[p].1, b[q].1);
                if c != g.identity() {
                    out.push((i, c));
                }
                p += 1;
                q += 1;
            }
        }
        out
    }

    fn inv(&self, a: &CayleyElem) -> CayleyElem {
        a.iter().map(|&(i, g)| (i, self.block(i).inv(g))).collect()
    }
}

fn support(e: &CayleyElem) -> Window {
    match (e.first(), e.last()) {
        (Some(a), Some(b)) => Window::new(a.0, b.0 + 1),
        _ => Window::empty(),
    }
}

/// A finite subgroup of `⊕_i B_i` with Cayley-table blocks, as an explicit
/// element set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleySubgroup {
    elements: BTreeSet<CayleyElem>,
}

impl CayleySubgroup {
    pub fn generated(blocks: &CayleyBlocks, gens: &[CayleyElem]) -> Result<Self> {
        let gens: Vec<CayleyElem> = gens.iter().map(|g| blocks.element(g)).collect::<Result<_>>()?;
        Ok(CayleySubgroup {
            elements: generic_closure(blocks, &gens, MAX_SET)?,
        })
    }

    pub fn elements(&self) -> &BTreeSet<CayleyElem> {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &CayleyElem) -> bool {
        self.elements.contains(x)
    }

    pub fn window(&self) -> Window {
        self.elements
            .iter()
            .fold(Window::empty(), |w, e| w.hull(&support(e)))
    }

    /// Normal in the whole group: conjugation by any block element preserves
    /// the set. Only blocks meeting the support can act non-trivially.
    pub fn check_normal(&self, blocks: &CayleyBlocks) -> Result<()> {
        for i in self.window().indices() {
            let b = blocks.block(i);
            for g in 0..b.order() {
                let ge: CayleyElem = if g == b.identity() { continue } else { vec![(i, g)] };
                let gi = blocks.inv(&ge);
                for h in &self.elements {
                    let c = blocks.mul(&blocks.mul(&ge, h), &gi);
                    if !self.contains(&c) {
                        return Err(Error::Hypothesis(format!(
                            "F is not normal: conjugating {h:?} by element {g} of block {i} leaves F"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A column-finite endomorphism with Cayley-table blocks: `rules[i][t]`
/// is an element map `B_i → B_{i+s+t}`. Contributions of different source
/// blocks to one target block must commute, which makes the product
/// independent of order and the whole map a homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyEndo {
    blocks: CayleyBlocks,
    offset: i64,
    width: usize,
    rules: Periodic<Vec<Vec<usize>>>,
}

impl CayleyEndo {
    pub fn new(
        blocks: CayleyBlocks,
        offset: i64,
        width: usize,
        rules: Periodic<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if width == 0 {
            return Err(Error::Spec("band width must be positive".into()));
        }
        rules.validate(blocks.index_set)?;
        let e = CayleyEndo {
            blocks,
            offset,
            width,
            rules,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn blocks(&self) -> &CayleyBlocks {
        &self.blocks
    }

    fn validation_window(&self) -> Window {
        let period = num_integer::lcm(self.rules.period(), self.blocks.blocks.period()) as i64;
        let reach = self.offset.abs() + self.width as i64;
        match self.blocks.index_set {
            IndexSet::Finite(n) => Window::new(0, n as i64),
            IndexSet::Integers => Window::new(-reach, period + reach),
            IndexSet::Naturals => Window::new(
                0,
                (self.rules.prefix_len() + self.blocks.blocks.prefix_len()) as i64 + 2 * reach + period,
            ),
        }
    }

    fn map(&self, i: i64, t: usize) -> &[usize] {
        &self.rules.get(i)[t]
    }

    fn validate(&self) -> Result<()> {
        let idx = self.blocks.index_set;
        let win = self.validation_window();
        for i in win.indices() {
            let rule = self.rules.get(i);
            if rule.len() != self.width {
                return Err(Error::Spec(format!(
                    "rule at anchor {i} has {} maps, band width is {}",
                    rule.len(),
                    self.width
                )));
            }
            for t in 0..self.width {
                let j = i + self.offset + t as i64;
                if idx.contains(j) {
                    self.blocks
                        .block(i)
                        .check_hom(&rule[t], self.blocks.block(j))
                        .map_err(|e| Error::Spec(format!("map at anchor {i}, band position {t}: {e}")))?;
                }
            }
        }
        // images of distinct sources landing in one block must commute
        for j in win.indices() {
            let target = self.blocks.block(j);
            let sources: Vec<(i64, usize)> = (0..self.width)
                .map(|t| (j - self.offset - t as i64, t))
                .filter(|&(i, _)| idx.contains(i))
                .collect();
            let images: Vec<HashSet<usize>> = sources
                .iter()
                .map(|&(i, t)| self.map(i, t).iter().copied().collect())
                .collect();
            for a in 0..images.len() {
                for b in a + 1..images.len() {
                    for &x in &images[a] {
                        for &y in &images[b] {
                            if target.mul(x, y) != target.mul(y, x) {
                                return Err(Error::Spec(format!(
                                    "images of blocks {} and {} in block {j} do not commute",
                                    sources[a].0, sources[b].0
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &CayleyElem) -> CayleyElem {
        let mut acc: BTreeMap<i64, usize> = BTreeMap::new();
        for &(i, g) in x {
            for t in 0..self.width {
                let j = i + self.offset + t as i64;
                if !self.blocks.index_set.contains(j) {
                    continue;
                }
                let b = self.blocks.block(j);
                let img = self.map(i, t)[g];
                let cur = acc.entry(j).or_insert(b.identity());
                *cur = b.mul(*cur, img);
            }
        }
        acc.into_iter()
            .filter(|&(j, g)| g != self.blocks.block(j).identity())
            .collect()
    }
}

impl TrajectoryEngine for CayleyEndo {
    type Sub = CayleySubgroup;

    fn order(&self, s: &CayleySubgroup) -> BigUint {
        BigUint::from(s.order())
    }

    fn window(&self, s: &CayleySubgroup) -> Window {
        s.window()
    }

    fn geometry(&self) -> Geometry {
        Geometry {
            index_set: self.blocks.index_set,
            settle: (self.rules.prefix_len() + self.blocks.blocks.prefix_len()) as i64
                + self.offset.abs()
                + self.width as i64,
            period: num_integer::lcm(self.rules.period(), self.blocks.blocks.period()),
        }
    }

    fn step(&self, f: &CayleySubgroup, t: &CayleySubgroup) -> Result<StepOutcome<CayleySubgroup>> {
        let mut image = BTreeSet::new();
        let mut kernel = 0usize;
        for x in &t.elements {
            let y = self.apply(x);
            if y.is_empty() {
                kernel += 1;
            }
            image.insert(y);
        }
        let f_cap = f.elements.iter().filter(|x| image.contains(*x)).count();
        let mut next = BTreeSet::new();
        for a in &f.elements {
            for b in &image {
                next.insert(self.blocks.mul(a, b));
                if next.len() > MAX_SET {
                    return Err(Error::TooLarge {
                        size: next.len(),
                        cap: MAX_SET,
                    });
                }
            }
        }
        Ok(StepOutcome {
            image_order: BigUint::from(image.len()),
            kernel_order: BigUint::from(kernel),
            f_cap_image_order: BigUint::from(f_cap),
            next: CayleySubgroup { elements: next },
        })
    }
}
