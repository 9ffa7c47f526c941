//! The compact side: full products `Π_i B_i` of finite abelian blocks, open
//! cylinder subgroups, row-finite endomorphisms and topological entropy.
//!
//! Every open subgroup handled here is a cylinder `{x : x|_W ∈ core}` over a
//! finite window `W`, so indices are exact window computations.

mod cotrajectory;
mod quotient;

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;

pub use cotrajectory::{
    h_top, topological_entropy, CotrajectoryReport, CotrajectoryStep,
};
pub use quotient::{
    kernel_cokernel_orders, log_law_check, quotient_system, KernelCokernel, LogLawRecord,
    QuotientSystem,
};

use crate::blocks::{AbelianBlocks, Band, Geometry, IndexSet, IntMatrix, Layout, Orientation, Periodic, Window};
use crate::error::{Error, Result};
use crate::finabel::{AbSubgroup, Elem, FiniteAbelianGroup, Hom};

/// `Π_i B_i` with the product topology.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProGroup {
    blocks: AbelianBlocks,
}

impl ProGroup {
    pub fn new(index_set: IndexSet, blocks: Periodic<FiniteAbelianGroup>) -> Result<Arc<Self>> {
        Ok(Arc::new(ProGroup {
            blocks: AbelianBlocks::new(index_set, blocks)?,
        }))
    }

    pub fn from_blocks(blocks: AbelianBlocks) -> Result<Arc<Self>> {
        blocks.blocks.validate(blocks.index_set)?;
        Ok(Arc::new(ProGroup { blocks }))
    }

    pub fn uniform(index_set: IndexSet, block: FiniteAbelianGroup) -> Arc<Self> {
        Arc::new(ProGroup {
            blocks: AbelianBlocks::uniform(index_set, block),
        })
    }

    pub fn blocks(&self) -> &AbelianBlocks {
        &self.blocks
    }

    pub fn index_set(&self) -> IndexSet {
        self.blocks.index_set
    }

    pub fn block(&self, i: i64) -> &FiniteAbelianGroup {
        self.blocks.block(i)
    }

    pub fn layout(&self, w: Window) -> Layout {
        self.blocks.layout(w)
    }
}

/// The open subgroup `{x : x|_W ∈ core}`, kept on the smallest window: edge
/// blocks that the core contains entirely are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderSubgroup {
    parent: Arc<ProGroup>,
    layout: Layout,
    core: AbSubgroup,
}

impl CylinderSubgroup {
    pub fn new(parent: &Arc<ProGroup>, window: Window, core: AbSubgroup) -> Result<Self> {
        if parent.index_set().clip(window) != window {
            return Err(Error::Spec(format!(
                "window [{}, {}) leaves the index set",
                window.lo, window.hi
            )));
        }
        let layout = parent.layout(window);
        if layout.group() != core.ambient() {
            return Err(Error::AmbientMismatch);
        }
        Ok(Self::canonical(parent, layout, core))
    }

    pub fn from_generators<E: AsRef<[i64]>>(parent: &Arc<ProGroup>, window: Window, gens: &[E]) -> Result<Self> {
        let layout = parent.layout(window);
        let core = AbSubgroup::generated(layout.group(), gens)?;
        Self::new(parent, window, core)
    }

    pub fn whole(parent: &Arc<ProGroup>) -> Self {
        let layout = parent.layout(Window::empty());
        let core = AbSubgroup::whole(layout.group());
        CylinderSubgroup {
            parent: parent.clone(),
            layout,
            core,
        }
    }

    /// `{x : x_i = 0 for i ∈ W}`.
    pub fn pinned(parent: &Arc<ProGroup>, window: Window) -> Self {
        let layout = parent.layout(window);
        let core = AbSubgroup::trivial(layout.group());
        Self::canonical(parent, layout, core)
    }

    pub fn parent(&self) -> &Arc<ProGroup> {
        &self.parent
    }

    pub fn window(&self) -> Window {
        self.layout.window
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn core(&self) -> &AbSubgroup {
        &self.core
    }

    /// `[K : U]`.
    pub fn index(&self) -> BigUint {
        self.core.index_in_ambient()
    }

    pub fn is_whole(&self) -> bool {
        self.core.is_whole()
    }

    /// The core over a window containing the current one.
    pub fn core_on(&self, w: Window) -> Result<AbSubgroup> {
        let big = self.parent.layout(w.hull(&self.window()));
        let mut gens: Vec<Elem> = self
            .core
            .generators()
            .iter()
            .map(|g| self.layout.embed(g, &big))
            .collect();
        for i in big.window.indices().filter(|&i| !self.window().contains(i)) {
            gens.extend(big.block_range(i).map(|c| big.group().unit(c)));
        }
        AbSubgroup::generated(big.group(), &gens)
    }

    fn same_parent(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.parent, &other.parent) || self.parent == other.parent {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(&AbSubgroup, &AbSubgroup) -> Result<AbSubgroup>) -> Result<Self> {
        self.same_parent(other)?;
        let w = self.window().hull(&other.window());
        let core = f(&self.core_on(w)?, &other.core_on(w)?)?;
        Ok(Self::canonical(&self.parent, self.parent.layout(w), core))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.intersect(b))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.sum(b))
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> Result<bool> {
        self.same_parent(other)?;
        let w = self.window().hull(&other.window());
        other.core_on(w)?.is_subgroup_of(&self.core_on(w)?)
    }

    /// `[self : other]` for `other ⊆ self`.
    pub fn index_of(&self, other: &Self) -> Result<BigUint> {
        if !self.contains(other)? {
            return Err(Error::NotContained);
        }
        let (a, b) = (self.index(), other.index());
        let (q, r) = b.div_rem(&a);
        debug_assert_eq!(r, BigUint::ZERO);
        Ok(q)
    }

    /// Whether a point given on a window satisfies the defining condition.
    /// The window must contain the cylinder's window.
    pub fn contains_point(&self, w: Window, x: &[i64]) -> Result<bool> {
        let outer = self.parent.layout(w);
        if !outer.window.contains_window(&self.window()) {
            return Err(Error::Spec("point window does not cover the cylinder".into()));
        }
        outer.group().check_dim(x)?;
        self.core.contains(&outer.restrict(x, &self.layout))
    }

    fn canonical(parent: &Arc<ProGroup>, mut layout: Layout, mut core: AbSubgroup) -> Self {
        let free = |layout: &Layout, core: &AbSubgroup, i: i64| {
            layout
                .block_range(i)
                .all(|c| core.contains(&layout.group().unit(c)).expect("dimension matches"))
        };
        loop {
            let w = layout.window;
            if w.is_empty() {
                break;
            }
            let smaller = if free(&layout, &core, w.lo) {
                Window::new(w.lo + 1, w.hi)
            } else if free(&layout, &core, w.hi - 1) {
                Window::new(w.lo, w.hi - 1)
            } else {
                break;
            };
            let small = parent.layout(smaller);
            let gens: Vec<Elem> = core.generators().iter().map(|g| layout.restrict(g, &small)).collect();
            core = AbSubgroup::generated(small.group(), &gens).expect("restriction keeps dimensions");
            layout = small;
        }
        CylinderSubgroup {
            parent: parent.clone(),
            layout,
            core,
        }
    }
}

/// A continuous endomorphism of `Π_i B_i` given by finite rows:
/// `ψ(x)_j = Σ_t rules[j][t] · x_{j+s+t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowFiniteEndo {
    parent: Arc<ProGroup>,
    band: Band,
}

impl RowFiniteEndo {
    pub fn new(parent: &Arc<ProGroup>, band: Band) -> Result<Self> {
        band.validate(parent.blocks(), Orientation::FarToAnchor)?;
        Ok(RowFiniteEndo {
            parent: parent.clone(),
            band: band.normalized(parent.index_set()),
        })
    }

    pub fn identity(parent: &Arc<ProGroup>) -> Self {
        RowFiniteEndo {
            parent: parent.clone(),
            band: Band::identity(parent.blocks()).normalized(parent.index_set()),
        }
    }

    /// `x ↦ (x_{j+by})_j`; `by = 1` is the left shift.
    pub fn shift(parent: &Arc<ProGroup>, by: i64) -> Self {
        RowFiniteEndo {
            parent: parent.clone(),
            band: Band::shift(parent.blocks(), by).normalized(parent.index_set()),
        }
    }

    pub fn zero(parent: &Arc<ProGroup>) -> Self {
        RowFiniteEndo {
            parent: parent.clone(),
            band: Band::zero(parent.blocks()).normalized(parent.index_set()),
        }
    }

    pub fn parent(&self) -> &Arc<ProGroup> {
        &self.parent
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    pub(crate) fn geometry(&self) -> Geometry {
        self.band.geometry(self.parent.blocks())
    }

    /// Input coordinates that the outputs on `w` read.
    pub fn dependency_window(&self, w: Window) -> Window {
        if w.is_empty() {
            return w;
        }
        let s = self.band.offset;
        self.parent
            .blocks()
            .clip(Window::new(w.lo + s, w.hi - 1 + s + self.band.width as i64))
    }

    /// `ψ` read on `w`: from the dependency window of `w` to `w`.
    pub fn window_hom(&self, w: Window) -> Result<(Layout, Layout, Hom)> {
        let dep = self.dependency_window(w);
        self.window_hom_from(w, dep)
    }

    /// As [`Self::window_hom`], with the source widened to `domain`, which
    /// must contain the dependency window of `w`.
    pub fn window_hom_from(&self, w: Window, domain: Window) -> Result<(Layout, Layout, Hom)> {
        let dst = self.parent.layout(w);
        let src = self.parent.layout(domain.hull(&self.dependency_window(dst.window)));
        let mut m = vec![vec![0i64; src.rank()]; dst.rank()];
        for j in dst.window.indices() {
            let rows = dst.block_range(j);
            for t in 0..self.band.width {
                let far = j + self.band.offset + t as i64;
                if !src.window.contains(far) {
                    continue;
                }
                let cols = src.block_range(far);
                let block = self.band.matrix(j, t);
                for (r, row) in rows.clone().zip(block) {
                    for (c, &x) in cols.clone().zip(row) {
                        m[r][c] = x;
                    }
                }
            }
        }
        let hom = Hom::new(m, src.group(), dst.group())?;
        Ok((src, dst, hom))
    }

    fn check_parent(&self, u: &CylinderSubgroup) -> Result<()> {
        if Arc::ptr_eq(&self.parent, u.parent()) || self.parent == *u.parent() {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    /// `ψ^{-1}(U)`.
    pub fn preimage(&self, u: &CylinderSubgroup) -> Result<CylinderSubgroup> {
        self.check_parent(u)?;
        if u.is_whole() {
            return Ok(u.clone());
        }
        let (src, _, hom) = self.window_hom(u.window())?;
        let core = hom.preimage(u.core())?;
        Ok(CylinderSubgroup::canonical(&self.parent, src, core))
    }

    /// `Im ψ + U`, an open subgroup on the window of `U`.
    pub fn image_plus(&self, u: &CylinderSubgroup) -> Result<CylinderSubgroup> {
        self.check_parent(u)?;
        let (_, dst, hom) = self.window_hom(u.window())?;
        let core = hom.image_of_whole()?.sum(u.core())?;
        Ok(CylinderSubgroup::canonical(&self.parent, dst, core))
    }

    /// `[K : Im ψ + U]`.
    pub fn cokernel_index(&self, u: &CylinderSubgroup) -> Result<BigUint> {
        Ok(self.image_plus(u)?.index())
    }

    /// Whether `ψ` followed by restriction to `w` is onto `Π_{i∈w} B_i`.
    pub fn is_surjective_on(&self, w: Window) -> Result<bool> {
        self.window_hom(w)?.2.is_surjective()
    }

    /// Windows probed by [`Self::check_surjective`]: every window of length
    /// up to `max_len` starting at a position that exhibits each local
    /// configuration, plus the whole index set when finite.
    fn surjectivity_windows(&self, max_len: usize) -> Vec<Window> {
        let blocks = self.parent.blocks();
        if let Some(all) = blocks.index_set.as_window() {
            return vec![all];
        }
        let starts = self.band.validation_window(blocks);
        let mut out = Vec::new();
        for lo in starts.indices() {
            out.push(blocks.clip(Window::new(lo, lo + max_len as i64)));
        }
        if blocks.index_set == IndexSet::Naturals {
            for len in 1..=max_len {
                out.push(Window::new(0, len as i64));
            }
        }
        out
    }

    /// Checks surjectivity on window quotients. Over a finite index set the
    /// check is exact; otherwise it covers windows of length up to `max_len`.
    pub fn check_surjective(&self, max_len: usize) -> Result<()> {
        for w in self.surjectivity_windows(max_len) {
            if !self.is_surjective_on(w)? {
                return Err(Error::NotSurjective(format!(
                    "not onto the window group on [{}, {})",
                    w.lo, w.hi
                )));
            }
        }
        Ok(())
    }

    /// The default probe length for surjectivity checks.
    pub fn surjectivity_probe(&self) -> usize {
        let g = self.geometry();
        (2 * self.band.width + g.period + self.band.reach() as usize).max(4)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RowFiniteEndo) -> Result<RowFiniteEndo> {
        if self.parent != other.parent {
            return Err(Error::AmbientMismatch);
        }
        let blocks = self.parent.blocks();
        let (s1, w1) = (self.band.offset, self.band.width);
        let (s2, w2) = (other.band.offset, other.band.width);
        let width = w1 + w2 - 1;
        let offset = s1 + s2;
        let rule_at = |j: i64| -> Result<Vec<IntMatrix>> {
            let target = blocks.block(j);
            let mut out: Vec<Vec<Vec<i128>>> = Vec::with_capacity(width);
            for v in 0..width {
                let far = j + offset + v as i64;
                let cols = if blocks.index_set.contains(far) {
                    blocks.block(far).rank()
                } else {
                    0
                };
                out.push(vec![vec![0i128; cols]; target.rank()]);
            }
            for t in 0..w1 {
                let mid = j + s1 + t as i64;
                if !blocks.index_set.contains(mid) {
                    continue;
                }
                let a = self.band.matrix(j, t);
                for u in 0..w2 {
                    let far = mid + s2 + u as i64;
                    if !blocks.index_set.contains(far) {
                        continue;
                    }
                    let b = other.band.matrix(mid, u);
                    let acc = &mut out[t + u];
                    for (r, arow) in a.iter().enumerate() {
                        for (k, &x) in arow.iter().enumerate() {
                            if x == 0 {
                                continue;
                            }
                            for (c, &y) in b[k].iter().enumerate() {
                                acc[r][c] += x as i128 * y as i128;
                            }
                        }
                    }
                }
            }
            Ok(out
                .into_iter()
                .map(|m| {
                    m.into_iter()
                        .enumerate()
                        .map(|(r, row)| {
                            let d = target.moduli()[r] as i128;
                            row.into_iter().map(|x| x.rem_euclid(d) as i64).collect()
                        })
                        .collect()
                })
                .collect())
        };
        let rules = match blocks.index_set {
            IndexSet::Finite(n) => Periodic {
                prefix: (0..n as i64).map(rule_at).collect::<Result<_>>()?,
                cycle: Vec::new(),
            },
            IndexSet::Integers | IndexSet::Naturals => {
                let cycle_len = num_integer::lcm(
                    num_integer::lcm(self.band.rules.period(), other.band.rules.period()),
                    blocks.blocks.period(),
                );
                let prefix_len = if blocks.index_set == IndexSet::Integers {
                    0
                } else {
                    let pre = self.band.rules.prefix_len().max(other.band.rules.prefix_len())
                        + blocks.blocks.prefix_len();
                    pre as i64 + s1.abs() + s2.abs() + (w1 + w2) as i64
                };
                Periodic {
                    prefix: (0..prefix_len).map(rule_at).collect::<Result<_>>()?,
                    cycle: (prefix_len..prefix_len + cycle_len as i64)
                        .map(rule_at)
                        .collect::<Result<_>>()?,
                }
            }
        };
        RowFiniteEndo::new(&self.parent, Band { offset, width, rules })
    }

    /// `ψ^k` for `k ≥ 1`.
    pub fn power(&self, k: u32) -> Result<RowFiniteEndo> {
        if k == 0 {
            return Ok(RowFiniteEndo::identity(&self.parent));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.compose(self)?;
        }
        Ok(out)
    }

    /// Applies `ψ` to a point known on `w`, giving the outputs on every
    /// position whose dependencies lie in `w`.
    pub fn apply_window(&self, w: Window, x: &[i64]) -> Result<(Window, Elem)> {
        let src = self.parent.layout(w);
        src.group().check_dim(x)?;
        let s = self.band.offset;
        let candidates = self
            .parent
            .blocks()
            .clip(Window::new(w.lo - s - self.band.width as i64, w.hi - s + 1));
        let inner: Vec<i64> = candidates
            .indices()
            .filter(|&j| src.window.contains_window(&self.dependency_window(Window::single(j))))
            .collect();
        let out_w = match (inner.first(), inner.last()) {
            (Some(&a), Some(&b)) => Window::new(a, b + 1),
            _ => Window::empty(),
        };
        let (dep, _, hom) = self.window_hom(out_w)?;
        let y = hom.apply(&src.restrict(x, &dep))?;
        Ok((out_w, y))
    }

    /// `C_n(ψ, U) = U ∩ ψ^{-1}(U) ∩ … ∩ ψ^{-n+1}(U)`.
    pub fn cotrajectory(&self, u: &CylinderSubgroup, n: usize) -> Result<CylinderSubgroup> {
        if n == 0 {
            return Err(Error::Spec("cotrajectory length must be positive".into()));
        }
        self.check_parent(u)?;
        let mut c = u.clone();
        for _ in 1..n {
            c = u.intersect(&self.preimage(&c)?)?;
        }
        Ok(c)
    }
}
