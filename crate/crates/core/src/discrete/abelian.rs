use num_bigint::BigUint;

use super::{StepOutcome, TrajectoryEngine};
use crate::blocks::{AbelianBlocks, Band, Geometry, Layout, Orientation, Window};
use crate::error::{Error, Result};
use crate::finabel::{AbSubgroup, Elem, Hom};

/// A finite-support element: `(block index, block coordinates)` pairs.
pub type SparseVec = Vec<(i64, Vec<i64>)>;

/// A finite subgroup of `⊕_i B_i`, stored canonically on the smallest window
/// containing its support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSubgroup {
    layout: Layout,
    sub: AbSubgroup,
}

impl WindowSubgroup {
    pub fn trivial(blocks: &AbelianBlocks) -> Self {
        let layout = blocks.layout(Window::empty());
        let sub = AbSubgroup::trivial(layout.group());
        WindowSubgroup { layout, sub }
    }

    pub fn from_generators(blocks: &AbelianBlocks, gens: &[SparseVec]) -> Result<Self> {
        let mut hull = Window::empty();
        for g in gens {
            for (i, x) in g {
                if !blocks.index_set.contains(*i) {
                    return Err(Error::Spec(format!("block index {i} outside the index set")));
                }
                blocks.block(*i).check_dim(x)?;
                hull = hull.hull(&Window::single(*i));
            }
        }
        let layout = blocks.layout(hull);
        let flat: Vec<Elem> = gens.iter().map(|g| densify(&layout, g)).collect();
        let sub = AbSubgroup::generated(layout.group(), &flat)?;
        Ok(WindowSubgroup { layout, sub }.trimmed(blocks))
    }

    /// Wraps a subgroup of a window group and trims it to its support.
    pub fn from_window(blocks: &AbelianBlocks, layout: Layout, sub: AbSubgroup) -> Result<Self> {
        if layout.group() != sub.ambient() {
            return Err(Error::AmbientMismatch);
        }
        Ok(WindowSubgroup { layout, sub }.trimmed(blocks))
    }

    pub fn window(&self) -> Window {
        self.layout.window
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn subgroup(&self) -> &AbSubgroup {
        &self.sub
    }

    pub fn order(&self) -> BigUint {
        self.sub.order().clone()
    }

    pub fn contains(&self, x: &SparseVec) -> Result<bool> {
        if x.iter().any(|(i, v)| !self.window().contains(*i) && v.iter().any(|&c| c != 0)) {
            return Ok(false);
        }
        let inside: SparseVec = x
            .iter()
            .filter(|(i, _)| self.window().contains(*i))
            .cloned()
            .collect();
        self.sub.contains(&densify(&self.layout, &inside))
    }

    pub fn generators(&self) -> Vec<SparseVec> {
        self.sub
            .generators()
            .iter()
            .map(|g| sparsify(&self.layout, g))
            .collect()
    }

    /// The same subgroup over a window containing the current one.
    pub(crate) fn on(&self, blocks: &AbelianBlocks, w: Window) -> Result<AbSubgroup> {
        let big = blocks.layout(w.hull(&self.window()));
        let gens: Vec<Elem> = self
            .sub
            .generators()
            .iter()
            .map(|g| self.layout.embed(g, &big))
            .collect();
        AbSubgroup::generated(big.group(), &gens)
    }

    fn trimmed(self, blocks: &AbelianBlocks) -> Self {
        let gens = self.sub.generators();
        let mut support = Window::empty();
        for g in &gens {
            for (c, &x) in g.iter().enumerate() {
                if x != 0 {
                    support = support.hull(&Window::single(self.layout.block_of_coord(c)));
                }
            }
        }
        if support == self.layout.window {
            return self;
        }
        let small = blocks.layout(support);
        let flat: Vec<Elem> = gens.iter().map(|g| self.layout.restrict(g, &small)).collect();
        let sub = AbSubgroup::generated(small.group(), &flat).expect("restriction keeps dimensions");
        WindowSubgroup { layout: small, sub }
    }
}

pub(crate) fn densify(layout: &Layout, x: &SparseVec) -> Elem {
    let mut out = layout.group().zero();
    for (i, v) in x {
        let r = layout.block_range(*i);
        for (slot, &c) in out[r].iter_mut().zip(v) {
            *slot += c;
        }
    }
    layout.group().reduce_in_place(&mut out);
    out
}

pub(crate) fn sparsify(layout: &Layout, x: &[i64]) -> SparseVec {
    layout
        .window
        .indices()
        .filter_map(|i| {
            let v = x[layout.block_range(i)].to_vec();
            v.iter().any(|&c| c != 0).then_some((i, v))
        })
        .collect()
}

/// A column-finite endomorphism of `⊕_i B_i`: the generators of block `i`
/// map into blocks `i+s, …, i+s+b-1` by the matrices of the band.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianEndo {
    blocks: AbelianBlocks,
    band: Band,
}

impl AbelianEndo {
    pub fn new(blocks: AbelianBlocks, band: Band) -> Result<Self> {
        band.validate(&blocks, Orientation::AnchorToFar)?;
        let band = band.normalized(blocks.index_set);
        Ok(AbelianEndo { blocks, band })
    }

    pub fn blocks(&self) -> &AbelianBlocks {
        &self.blocks
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    /// Smallest window containing `φ(x)` for all `x` supported on `w`.
    pub fn image_window(&self, w: Window) -> Window {
        if w.is_empty() {
            return w;
        }
        let s = self.band.offset;
        self.blocks
            .clip(Window::new(w.lo + s, w.hi - 1 + s + self.band.width as i64))
    }

    /// `φ` restricted to the window group on `w`, landing in `image_window(w)`.
    pub fn window_hom(&self, w: Window) -> Result<(Layout, Layout, Hom)> {
        let src = self.blocks.layout(w);
        let dst = self.blocks.layout(self.image_window(src.window));
        let mut m = vec![vec![0i64; src.rank()]; dst.rank()];
        for i in src.window.indices() {
            let cols = src.block_range(i);
            for t in 0..self.band.width {
                let j = i + self.band.offset + t as i64;
                if !dst.window.contains(j) {
                    continue;
                }
                let rows = dst.block_range(j);
                let block = self.band.matrix(i, t);
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

    pub fn apply(&self, x: &SparseVec) -> Result<SparseVec> {
        let hull = x
            .iter()
            .fold(Window::empty(), |w, (i, _)| w.hull(&Window::single(*i)));
        let (src, dst, hom) = self.window_hom(hull)?;
        let y = hom.apply(&densify(&src, x))?;
        Ok(sparsify(&dst, &y))
    }

    /// `φ(H)`.
    pub fn image(&self, h: &WindowSubgroup) -> Result<WindowSubgroup> {
        let (_, dst, hom) = self.window_hom(h.window())?;
        let img = hom.image(h.subgroup())?;
        WindowSubgroup::from_window(&self.blocks, dst, img)
    }

    /// `|ker φ ∩ H|`.
    pub fn kernel_order_on(&self, h: &WindowSubgroup) -> Result<BigUint> {
        let (_, _, hom) = self.window_hom(h.window())?;
        Ok(hom.kernel_on(h.subgroup())?.order().clone())
    }

    pub fn sum(&self, h: &WindowSubgroup, l: &WindowSubgroup) -> Result<WindowSubgroup> {
        let w = h.window().hull(&l.window());
        let a = h.on(&self.blocks, w)?;
        let b = l.on(&self.blocks, w)?;
        WindowSubgroup::from_window(&self.blocks, self.blocks.layout(w), a.sum(&b)?)
    }

    pub fn intersect(&self, h: &WindowSubgroup, l: &WindowSubgroup) -> Result<WindowSubgroup> {
        let w = h.window().hull(&l.window());
        let a = h.on(&self.blocks, w)?;
        let b = l.on(&self.blocks, w)?;
        WindowSubgroup::from_window(&self.blocks, self.blocks.layout(w), a.intersect(&b)?)
    }
}

impl TrajectoryEngine for AbelianEndo {
    type Sub = WindowSubgroup;

    fn order(&self, s: &WindowSubgroup) -> BigUint {
        s.order()
    }

    fn window(&self, s: &WindowSubgroup) -> Window {
        s.window()
    }

    fn geometry(&self) -> Geometry {
        self.band.geometry(&self.blocks)
    }

    fn step(&self, f: &WindowSubgroup, t: &WindowSubgroup) -> Result<StepOutcome<WindowSubgroup>> {
        let image = self.image(t)?;
        let next = self.sum(f, &image)?;
        let f_cap = self.intersect(f, &image)?;
        Ok(StepOutcome {
            image_order: image.order(),
            kernel_order: self.kernel_order_on(t)?,
            f_cap_image_order: f_cap.order(),
            next,
        })
    }
}
