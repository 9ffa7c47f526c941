//! Index sets, eventually periodic block sequences, finite windows and the
//! banded coefficient data shared by both sides of the duality.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finabel::{Elem, FiniteAbelianGroup, Hom};

/// Integer matrix, one row per target coordinate.
pub type IntMatrix = Vec<Vec<i64>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    /// `0, 1, 2, …`
    Naturals,
    /// all of `Z`
    Integers,
    /// `0, …, n-1`
    Finite(usize),
}

impl IndexSet {
    pub fn lo(&self) -> Option<i64> {
        match self {
            IndexSet::Integers => None,
            _ => Some(0),
        }
    }

    pub fn hi(&self) -> Option<i64> {
        match self {
            IndexSet::Finite(n) => Some(*n as i64),
            _ => None,
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo().is_none_or(|lo| i >= lo) && self.hi().is_none_or(|hi| i < hi)
    }

    pub fn clip(&self, w: Window) -> Window {
        let lo = self.lo().map_or(w.lo, |l| w.lo.max(l));
        let hi = self.hi().map_or(w.hi, |h| w.hi.min(h));
        Window::new(lo, hi.max(lo))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, IndexSet::Finite(_))
    }

    /// The whole index set as a window, when finite.
    pub fn as_window(&self) -> Option<Window> {
        match self {
            IndexSet::Finite(n) => Some(Window::new(0, *n as i64)),
            _ => None,
        }
    }
}

/// Half-open block range `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        if hi <= lo {
            Window { lo: 0, hi: 0 }
        } else {
            Window { lo, hi }
        }
    }

    pub fn empty() -> Self {
        Window { lo: 0, hi: 0 }
    }

    pub fn single(i: i64) -> Self {
        Window { lo: i, hi: i + 1 }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i < self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn hull(&self, other: &Window) -> Window {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Window::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn shift(&self, by: i64) -> Window {
        if self.is_empty() {
            return *self;
        }
        Window::new(self.lo + by, self.hi + by)
    }

    pub fn widen(&self, left: i64, right: i64) -> Window {
        Window::new(self.lo - left, self.hi + right)
    }

    pub fn indices(&self) -> Range<i64> {
        self.lo..self.hi
    }
}

/// `prefix` followed by `cycle` repeated forever. Negative positions (only
/// meaningful over `Z`) read the cycle backwards and require an empty prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Periodic<T> {
    pub prefix: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T> Periodic<T> {
    pub fn constant(x: T) -> Self {
        Periodic {
            prefix: Vec::new(),
            cycle: vec![x],
        }
    }

    pub fn cycle(cycle: Vec<T>) -> Self {
        Periodic {
            prefix: Vec::new(),
            cycle,
        }
    }

    pub fn period(&self) -> usize {
        self.cycle.len().max(1)
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn try_get(&self, i: i64) -> Option<&T> {
        if i >= 0 && (i as usize) < self.prefix.len() {
            return self.prefix.get(i as usize);
        }
        if self.cycle.is_empty() {
            return None;
        }
        if i < 0 && !self.prefix.is_empty() {
            return None;
        }
        let p = self.cycle.len() as i64;
        let pos = (i - self.prefix.len() as i64).rem_euclid(p);
        self.cycle.get(pos as usize)
    }

    pub fn get(&self, i: i64) -> &T {
        self.try_get(i)
            .unwrap_or_else(|| panic!("no entry at position {i}"))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Periodic<U> {
        Periodic {
            prefix: self.prefix.iter().map(&mut f).collect(),
            cycle: self.cycle.iter().map(&mut f).collect(),
        }
    }

    /// Reads `f` at every position that determines a sequence over
    /// `index_set` which repeats with `period` from `prefix` onwards.
    pub(crate) fn tabulate(
        index_set: IndexSet,
        prefix: usize,
        period: usize,
        mut f: impl FnMut(i64) -> Result<T>,
    ) -> Result<Self> {
        let run = |r: std::ops::Range<i64>, f: &mut dyn FnMut(i64) -> Result<T>| r.map(f).collect::<Result<Vec<T>>>();
        Ok(match index_set {
            IndexSet::Finite(n) => Periodic {
                prefix: run(0..n as i64, &mut f)?,
                cycle: Vec::new(),
            },
            IndexSet::Integers => Periodic {
                prefix: Vec::new(),
                cycle: run(0..period as i64, &mut f)?,
            },
            IndexSet::Naturals => Periodic {
                prefix: run(0..prefix as i64, &mut f)?,
                cycle: run(prefix as i64..(prefix + period) as i64, &mut f)?,
            },
        })
    }

    /// Shortest description of the same sequence over `index_set`: minimal
    /// cycle, then prefix entries absorbed into the cycle where possible.
    pub fn normalized(mut self, index_set: IndexSet) -> Self
    where
        T: PartialEq + Clone,
    {
        if let IndexSet::Finite(n) = index_set {
            let mut all: Vec<T> = (0..n as i64).filter_map(|i| self.try_get(i).cloned()).collect();
            if all.len() < n {
                return self;
            }
            let Some(last) = all.pop() else {
                return self;
            };
            self = Periodic {
                prefix: all,
                cycle: vec![last],
            };
        }
        let len = self.cycle.len();
        if let Some(p) = (1..=len).find(|&p| len.is_multiple_of(p) && (p..len).all(|i| self.cycle[i] == self.cycle[i - p])) {
            self.cycle.truncate(p);
        }
        if index_set == IndexSet::Integers {
            return self;
        }
        while let (Some(a), Some(b)) = (self.prefix.last(), self.cycle.last()) {
            if a != b {
                break;
            }
            self.prefix.pop();
            self.cycle.rotate_right(1);
        }
        self
    }

    pub fn validate(&self, index_set: IndexSet) -> Result<()> {
        match index_set {
            IndexSet::Integers if !self.prefix.is_empty() => Err(Error::Spec(
                "a Z-indexed sequence cannot have a prefix".into(),
            )),
            IndexSet::Finite(n) if self.cycle.is_empty() && self.prefix.len() < n => Err(
                Error::Spec(format!("need {n} entries, got {}", self.prefix.len())),
            ),
            IndexSet::Naturals | IndexSet::Integers if self.cycle.is_empty() => {
                Err(Error::Spec("an infinite index set needs a non-empty cycle".into()))
            }
            _ => Ok(()),
        }
    }
}

/// An eventually periodic sequence of finite abelian blocks over an index set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianBlocks {
    pub index_set: IndexSet,
    pub blocks: Periodic<FiniteAbelianGroup>,
}

/// Flat coordinate layout of the window group `⊕_{i∈W} B_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub window: Window,
    offsets: Vec<usize>,
    group: FiniteAbelianGroup,
}

impl Layout {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    /// Flat coordinate range of block `i` (must lie in the window).
    pub fn block_range(&self, i: i64) -> Range<usize> {
        let p = (i - self.window.lo) as usize;
        self.offsets[p]..self.offsets[p + 1]
    }

    pub fn block_of_coord(&self, c: usize) -> i64 {
        let p = self.offsets.partition_point(|&o| o <= c) - 1;
        self.window.lo + p as i64
    }

    /// Copies `x` (over `self`) into a vector over `larger`, which must
    /// contain this window.
    pub fn embed(&self, x: &[i64], larger: &Layout) -> Elem {
        let mut y = larger.group.zero();
        for i in self.window.indices() {
            let src = self.block_range(i);
            let dst = larger.block_range(i);
            y[dst].copy_from_slice(&x[src]);
        }
        y
    }

    /// Restricts `x` (over `self`) to the blocks of `smaller`.
    pub fn restrict(&self, x: &[i64], smaller: &Layout) -> Elem {
        let mut y = smaller.group.zero();
        for i in smaller.window.indices() {
            if self.window.contains(i) {
                let src = self.block_range(i);
                let dst = smaller.block_range(i);
                y[dst].copy_from_slice(&x[src]);
            }
        }
        y
    }
}

impl AbelianBlocks {
    pub fn new(index_set: IndexSet, blocks: Periodic<FiniteAbelianGroup>) -> Result<Self> {
        blocks.validate(index_set)?;
        Ok(AbelianBlocks { index_set, blocks })
    }

    pub fn uniform(index_set: IndexSet, block: FiniteAbelianGroup) -> Self {
        AbelianBlocks {
            index_set,
            blocks: Periodic::constant(block),
        }
    }

    pub fn block(&self, i: i64) -> &FiniteAbelianGroup {
        self.blocks.get(i)
    }

    pub fn layout(&self, w: Window) -> Layout {
        let w = self.index_set.clip(w);
        let mut offsets = Vec::with_capacity(w.len() + 1);
        let mut moduli = Vec::new();
        offsets.push(0);
        for i in w.indices() {
            moduli.extend_from_slice(self.block(i).moduli());
            offsets.push(moduli.len());
        }
        Layout {
            window: w,
            offsets,
            group: FiniteAbelianGroup::new(moduli).expect("block moduli already validated"),
        }
    }

    pub fn clip(&self, w: Window) -> Window {
        self.index_set.clip(w)
    }
}

/// Banded coefficient data: at anchor index `i` and band position `t`, the
/// block matrix relating block `i` and block `i + offset + t`.
///
/// Column-finite maps (discrete side) read `rules[i][t] : B_i → B_{i+s+t}`;
/// row-finite maps (compact side) read `rules[j][t] : B_{j+s+t} → B_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Band {
    pub offset: i64,
    pub width: usize,
    pub rules: Periodic<Vec<IntMatrix>>,
}

/// Which way the block matrices point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Orientation {
    /// `rules[i][t]` maps the anchor block to block `i+s+t`.
    AnchorToFar,
    /// `rules[j][t]` maps block `j+s+t` to the anchor block.
    FarToAnchor,
}

impl Band {
    /// The identity (offset 0, width 1).
    pub fn identity(blocks: &AbelianBlocks) -> Band {
        let id = |b: &FiniteAbelianGroup| vec![Hom::identity(b).matrix().to_vec()];
        Band {
            offset: 0,
            width: 1,
            rules: blocks.blocks.map(id),
        }
    }

    /// Identity block matrices at offset `by`: on the discrete side
    /// `e_i ↦ e_{i+by}`, on the compact side `x ↦ (x_{j+by})_j`.
    pub fn shift(blocks: &AbelianBlocks, by: i64) -> Band {
        let id = |b: &FiniteAbelianGroup| vec![Hom::identity(b).matrix().to_vec()];
        Band {
            offset: by,
            width: 1,
            rules: blocks.blocks.map(id),
        }
    }

    pub fn zero(blocks: &AbelianBlocks) -> Band {
        Band {
            offset: 0,
            width: 1,
            rules: blocks
                .blocks
                .map(|b| vec![vec![vec![0; b.rank()]; b.rank()]]),
        }
    }

    /// The band radius `max(|s|, |s + w - 1|)`.
    pub fn reach(&self) -> i64 {
        self.offset
            .abs()
            .max((self.offset + self.width as i64 - 1).abs())
    }

    /// Anchor positions that exhibit every distinct local configuration.
    pub(crate) fn validation_window(&self, blocks: &AbelianBlocks) -> Window {
        let period = num_integer::lcm(self.rules.period(), blocks.blocks.period()) as i64;
        match blocks.index_set {
            IndexSet::Finite(n) => Window::new(0, n as i64),
            IndexSet::Integers => Window::new(0, period),
            IndexSet::Naturals => {
                let settle = self.rules.prefix_len() as i64
                    + blocks.blocks.prefix_len() as i64
                    + self.reach()
                    + self.width as i64;
                Window::new(0, settle + period)
            }
        }
    }

    pub(crate) fn normalized(self, index_set: IndexSet) -> Band {
        Band {
            rules: self.rules.normalized(index_set),
            ..self
        }
    }

    pub(crate) fn geometry(&self, blocks: &AbelianBlocks) -> Geometry {
        Geometry {
            index_set: blocks.index_set,
            settle: (self.rules.prefix_len() + blocks.blocks.prefix_len()) as i64 + self.reach() + 1,
            period: num_integer::lcm(self.rules.period(), blocks.blocks.period()),
        }
    }

    pub(crate) fn matrix(&self, anchor: i64, t: usize) -> &IntMatrix {
        &self.rules.get(anchor)[t]
    }

    /// Checks shapes and that every block matrix is a homomorphism.
    pub(crate) fn validate(&self, blocks: &AbelianBlocks, orient: Orientation) -> Result<()> {
        if self.width == 0 {
            return Err(Error::Spec("band width must be positive".into()));
        }
        self.rules.validate(blocks.index_set)?;
        for i in self.validation_window(blocks).indices() {
            let Some(rule) = self.rules.try_get(i) else {
                return Err(Error::Spec(format!("no rule for anchor {i}")));
            };
            if rule.len() != self.width {
                return Err(Error::Spec(format!(
                    "rule at anchor {i} has {} matrices, band width is {}",
                    rule.len(),
                    self.width
                )));
            }
            for (t, m) in rule.iter().enumerate() {
                let far = i + self.offset + t as i64;
                if !blocks.index_set.contains(far) {
                    continue;
                }
                let (src, dst) = match orient {
                    Orientation::AnchorToFar => (blocks.block(i), blocks.block(far)),
                    Orientation::FarToAnchor => (blocks.block(far), blocks.block(i)),
                };
                Hom::new(m.clone(), src, dst).map_err(|e| match e {
                    Error::IllDefinedHom {
                        generator,
                        order,
                        coordinate,
                    } => Error::Spec(format!(
                        "block matrix at anchor {i}, band position {t}: generator {generator} \
                         (order {order}) violates target coordinate {coordinate}"
                    )),
                    other => Error::Spec(format!("block matrix at anchor {i}, band position {t}: {other}")),
                })?;
            }
        }
        Ok(())
    }
}

/// Where the data stops being homogeneous.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Geometry {
    pub index_set: IndexSet,
    /// Indices at or past this point see only the periodic part.
    pub settle: i64,
    pub period: usize,
}

impl Geometry {
    /// A step is settled when each window edge is either parked against a
    /// boundary (or past the non-periodic prefix) or did not move. Stalls
    /// are only trusted on settled steps: otherwise the trajectory may still
    /// be travelling towards a boundary or a prefix block that changes the
    /// indices.
    pub fn settled(&self, before: Window, after: Window) -> bool {
        let left = match self.index_set.lo() {
            None => true,
            Some(lo) => after.lo == lo || after.lo == before.lo,
        };
        let right = match self.index_set.hi() {
            Some(hi) => after.hi == hi || after.hi == before.hi,
            None => after.hi >= self.settle || after.hi == before.hi,
        };
        left && right
    }
}
