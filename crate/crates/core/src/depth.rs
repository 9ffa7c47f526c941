//! Finite depth for topological automorphisms of block products: banded
//! inverses, antistable subgroups, `U_±` and the entropy–depth identity.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use crate::blocks::{Band, IndexSet, IntMatrix, Periodic, Window};
use crate::entropy::{EntropyValue, Method, StabilizationPolicy};
use crate::error::{Error, Result};
use crate::finabel::AbSubgroup;
use crate::jobs::par_map;
use crate::profinite::{h_top, topological_entropy, CotrajectoryReport, CylinderSubgroup, ProGroup, RowFiniteEndo};

impl RowFiniteEndo {
    /// Whether every row is the identity on its own block.
    pub fn is_identity(&self) -> bool {
        let blocks = self.parent().blocks();
        let band = self.band();
        band.validation_window(blocks).indices().all(|j| {
            (0..band.width).all(|t| {
                let far = j + band.offset + t as i64;
                if !blocks.index_set.contains(far) {
                    return true;
                }
                let moduli = blocks.block(j).moduli();
                band.matrix(j, t).iter().enumerate().all(|(r, row)| {
                    row.iter().enumerate().all(|(c, &x)| {
                        let want = i64::from(far == j && r == c);
                        (x - want).rem_euclid(moduli[r]) == 0
                    })
                })
            })
        })
    }
}

/// Widest inverse band searched, as a multiple of the forward width.
pub const INVERSE_WIDTH_FACTOR: usize = 4;

/// One row of the inverse: `y_j` as a function of `x` on `window`.
fn inverse_row(psi: &RowFiniteEndo, j: i64, max_len: usize) -> Result<(Window, IntMatrix)> {
    let k = psi.parent();
    let blocks = k.blocks();
    let reach = psi.band().reach();
    let target = k.block(j);
    for len in 1..=max_len as i64 {
        for lo in (j - max_len as i64 - reach)..=(j + reach) {
            let w = blocks.clip(Window::new(lo, lo + len));
            if w.len() as i64 != len {
                continue;
            }
            let (dep, dst, hom) = psi.window_hom(w)?;
            if target.rank() > 0 && !dep.window.contains(j) {
                continue;
            }
            let kernel = hom.kernel()?;
            let determined = target.rank() == 0
                || kernel
                    .generators()
                    .iter()
                    .all(|g| g[dep.block_range(j)].iter().all(|&c| c == 0));
            if !determined {
                continue;
            }
            let lifter = hom.lifter()?;
            let mut columns = Vec::with_capacity(dst.rank());
            for c in 0..dst.rank() {
                let y = lifter.lift(&dst.group().unit(c))?.ok_or_else(|| {
                    Error::NotInvertible(format!("not onto the window group on [{}, {})", w.lo, w.hi))
                })?;
                columns.push(if target.rank() == 0 { Vec::new() } else { y[dep.block_range(j)].to_vec() });
            }
            let m: IntMatrix = (0..target.rank())
                .map(|r| columns.iter().map(|col| col[r]).collect())
                .collect();
            return Ok((w, m));
        }
    }
    Err(Error::NotInvertible(format!(
        "coordinate {j} of the inverse is not determined by any window of length at most {max_len}"
    )))
}

/// The inverse of a banded automorphism, solved window by window and
/// checked by composing both ways.
pub fn invert(psi: &RowFiniteEndo) -> Result<RowFiniteEndo> {
    let k = psi.parent();
    let blocks = k.blocks();
    let band = psi.band();
    let max_len = INVERSE_WIDTH_FACTOR * band.width;
    let period = num_integer::lcm(band.rules.period(), blocks.blocks.period());
    let prefix = band.rules.prefix_len() + blocks.blocks.prefix_len() + max_len + band.reach() as usize;
    let anchors: Vec<i64> = match blocks.index_set {
        IndexSet::Finite(n) => (0..n as i64).collect(),
        IndexSet::Integers => (0..period as i64).collect(),
        IndexSet::Naturals => (0..(prefix + period) as i64).collect(),
    };
    let rows: Vec<(i64, Window, IntMatrix)> = anchors
        .iter()
        .map(|&j| inverse_row(psi, j, max_len).map(|(w, m)| (j, w, m)))
        .collect::<Result<_>>()?;
    let offset = rows.iter().map(|(j, w, _)| w.lo - j).min().unwrap_or(0);
    let reach_hi = rows.iter().map(|(j, w, _)| w.hi - j).max().unwrap_or(1);
    let width = (reach_hi - offset).max(1) as usize;
    let row_at = |j: i64| -> Result<Vec<IntMatrix>> {
        let (anchor, w, m) = match blocks.index_set {
            IndexSet::Integers => &rows[j.rem_euclid(period as i64) as usize],
            _ => &rows[j as usize],
        };
        let shift = j - anchor;
        let w = w.shift(shift);
        let src = k.layout(w);
        let rank = k.block(j).rank();
        Ok((0..width)
            .map(|t| {
                let far = j + offset + t as i64;
                if !blocks.index_set.contains(far) {
                    return vec![Vec::new(); rank];
                }
                let cols = k.block(far).rank();
                if !w.contains(far) {
                    return vec![vec![0; cols]; rank];
                }
                let range = src.block_range(far);
                m.iter().map(|row| row[range.clone()].to_vec()).collect()
            })
            .collect())
    };
    let rules = Periodic::tabulate(blocks.index_set, prefix, period, row_at)?;
    let inverse = RowFiniteEndo::new(k, Band { offset, width, rules })?;
    if !psi.compose(&inverse)?.is_identity() || !inverse.compose(psi)?.is_identity() {
        return Err(Error::NotInvertible(format!(
            "no banded inverse of width at most {max_len}"
        )));
    }
    Ok(inverse)
}

/// `U_n = C_n(ψ, U) ∩ C_n(ψ^{-1}, U)` for `n = 1..=count`.
pub fn base_sequence(
    psi: &RowFiniteEndo,
    inverse: &RowFiniteEndo,
    u: &CylinderSubgroup,
    count: usize,
) -> Result<Vec<CylinderSubgroup>> {
    let mut out = Vec::with_capacity(count);
    let (mut fwd, mut back) = (u.clone(), u.clone());
    for n in 1..=count {
        if n > 1 {
            fwd = u.intersect(&psi.preimage(&fwd)?)?;
            back = u.intersect(&inverse.preimage(&back)?)?;
        }
        out.push(fwd.intersect(&back)?);
    }
    Ok(out)
}

/// Outcome of the antistability test for `∩_{n∈Z} ψ^n(U) = {1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Antistability {
    /// `I_N = ∩_{|n|≤N} ψ^n(U)` pins `pinned`, a window of length at least
    /// three radii of `ψ^{±1..±steps}`, and at every edge position met while
    /// that window grows, `steps` more stages pin one more block on each side.
    Antistable { stage: usize, steps: usize, pinned: Window },
    /// `I_N` repeated exactly: the full intersection is `I_N`.
    Exact { stage: usize, trivial: bool },
    Unknown { budget: usize },
}

impl Antistability {
    pub fn is_antistable(&self) -> Option<bool> {
        match self {
            Antistability::Antistable { .. } => Some(true),
            Antistability::Exact { trivial, .. } => Some(*trivial),
            Antistability::Unknown { .. } => None,
        }
    }
}

/// Longest run of blocks `i` with `I ⊆ {x_i = 0}`.
fn pinned_run(c: &CylinderSubgroup) -> Window {
    let layout = c.layout();
    let moduli = layout.group().moduli();
    let gens = c.core().generators();
    let mut best = Window::empty();
    let mut start = None;
    let w = c.window();
    for i in w.lo..=w.hi {
        let pinned = w.contains(i)
            && gens
                .iter()
                .all(|g| layout.block_range(i).all(|col| g[col].rem_euclid(moduli[col]) == 0));
        match (pinned, start) {
            (true, None) => start = Some(i),
            (false, Some(lo)) => {
                if (i - lo) as usize > best.len() {
                    best = Window::new(lo, i);
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// With `x` zero on `[a, a+2R)` and every `maps[m](x)` zero on `[a, a+R)`,
/// is `x_{a-1}` forced to vanish? `right` mirrors the test.
fn edge_grows(maps: &[RowFiniteEndo], a: i64, radius: i64, right: bool) -> Result<bool> {
    let k = maps[0].parent();
    let blocks = k.blocks();
    let (domain, outputs, free, target) = if right {
        (
            Window::new(a - 2 * radius, a + radius),
            Window::new(a - radius, a),
            Window::new(a, a + radius),
            a,
        )
    } else {
        (
            Window::new(a - radius, a + 2 * radius),
            Window::new(a, a + radius),
            Window::new(a - radius, a),
            a - 1,
        )
    };
    if !blocks.index_set.contains(target) {
        return Ok(true);
    }
    let domain = blocks.clip(domain);
    let outputs = blocks.clip(outputs);
    let layout = k.layout(domain);
    let gens: Vec<Vec<i64>> = blocks
        .clip(free)
        .indices()
        .flat_map(|i| layout.block_range(i).map(|c| layout.group().unit(c)).collect::<Vec<_>>())
        .collect();
    let mut solutions = AbSubgroup::generated(layout.group(), &gens)?;
    for map in maps {
        let (src, _, hom) = map.window_hom_from(outputs, domain)?;
        if src.window != domain {
            return Err(Error::Consistency("edge window misses a dependency".into()));
        }
        solutions = hom.kernel_on(&solutions)?;
    }
    let range = layout.block_range(target);
    Ok(solutions.generators().iter().all(|g| g[range.clone()].iter().all(|&c| c == 0)))
}

/// Most steps per round of the pinning induction.
pub const PINNING_STEPS: usize = 4;

/// `ψ^{±1}, …, ψ^{±k}` with their joint radius, settle point and period.
struct PinningMaps {
    maps: Vec<RowFiniteEndo>,
    radius: i64,
    settle: i64,
    period: i64,
}

impl PinningMaps {
    fn new(psi: &RowFiniteEndo, inverse: &RowFiniteEndo, k: usize) -> Result<Self> {
        let mut maps = Vec::with_capacity(2 * k);
        for m in 1..=k as u32 {
            maps.push(psi.power(m)?);
            maps.push(inverse.power(m)?);
        }
        let blocks = psi.parent().blocks();
        let radius = maps.iter().map(|m| m.band().reach()).max().unwrap_or(1).max(1);
        let period = maps
            .iter()
            .fold(blocks.blocks.period(), |acc, m| num_integer::lcm(acc, m.band().rules.period())) as i64;
        let settle = maps.iter().map(|m| m.band().rules.prefix_len()).max().unwrap_or(0) as i64
            + blocks.blocks.prefix_len() as i64
            + 3 * radius;
        Ok(Self { maps, radius, settle, period })
    }

    /// Every edge the window `p` meets while growing outwards.
    fn grows_from(&self, p: Window, index_set: IndexSet) -> Result<bool> {
        let (lefts, rights): (Vec<i64>, Vec<i64>) = match index_set {
            IndexSet::Naturals => ((1..=p.lo).collect(), (p.hi..=p.hi.max(self.settle) + self.period).collect()),
            _ => ((0..self.period).collect(), (0..self.period).collect()),
        };
        for a in lefts {
            if !edge_grows(&self.maps, a, self.radius, false)? {
                return Ok(false);
            }
        }
        for b in rights {
            if !edge_grows(&self.maps, b, self.radius, true)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn antistable_check(
    psi: &RowFiniteEndo,
    inverse: &RowFiniteEndo,
    u: &CylinderSubgroup,
    policy: &StabilizationPolicy,
) -> Result<Antistability> {
    let k = psi.parent();
    let index_set = k.index_set();
    let mut rounds: Vec<Option<PinningMaps>> = (0..PINNING_STEPS).map(|_| None).collect();
    // over Z the edge checks do not depend on the stage
    let mut failed = [false; PINNING_STEPS];
    let mut stage = u.clone();
    for n in 0..policy.max_n {
        if stage.window().len() > policy.window_budget {
            break;
        }
        let next = u.intersect(&psi.preimage(&stage)?)?.intersect(&inverse.preimage(&stage)?)?;
        if next == stage {
            let trivial = is_trivial_whole(k, &stage);
            return Ok(Antistability::Exact { stage: n, trivial });
        }
        if !index_set.is_finite() {
            let p = pinned_run(&stage);
            for steps in 1..=PINNING_STEPS {
                if failed[steps - 1] && index_set == IndexSet::Integers {
                    continue;
                }
                if rounds[steps - 1].is_none() {
                    rounds[steps - 1] = Some(PinningMaps::new(psi, inverse, steps)?);
                }
                let maps = rounds[steps - 1].as_ref().expect("built");
                if (p.len() as i64) < 3 * maps.radius {
                    continue;
                }
                if maps.grows_from(p, index_set)? {
                    return Ok(Antistability::Antistable { stage: n, steps, pinned: p });
                }
                failed[steps - 1] = true;
            }
        }
        stage = next;
    }
    Ok(Antistability::Unknown { budget: policy.max_n })
}

/// Whether a cylinder is the trivial subgroup, which needs a finite group.
fn is_trivial_whole(k: &Arc<ProGroup>, c: &CylinderSubgroup) -> bool {
    match k.index_set().as_window() {
        Some(all) => c.core_on(all).map(|core| core.is_trivial()).unwrap_or(false),
        None => false,
    }
}

/// Shape of a cotrajectory limit whose stages are plain pinned windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `x_i = 0` on a fixed window.
    Window(Window),
    /// `x_i = 0` for every `i ≤ upto`.
    Left { upto: i64 },
    /// `x_i = 0` for every `i ≥ from`.
    Right { from: i64 },
}

/// `C(map, base) = ∩_n map^{-n}(base)`, a finitely described constraint
/// with possibly infinite support. Indices are read on the window of `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfLineCylinder {
    pub map: RowFiniteEndo,
    pub base: CylinderSubgroup,
    pub report: CotrajectoryReport,
}

impl HalfLineCylinder {
    /// `C_n(map, base)`.
    pub fn stage(&self, n: usize) -> Result<CylinderSubgroup> {
        self.map.cotrajectory(&self.base, n)
    }

    /// `[map^{-1}(C) : C]`.
    pub fn index_step(&self) -> &BigUint {
        self.report.psi_inv_c_mod_c.as_ref().expect("certified")
    }

    /// The explicit constraint, when two consecutive late stages pin whole windows.
    pub fn tail(&self) -> Result<Option<Tail>> {
        let n = self.report.steps.len().max(1);
        let (a, b) = (self.stage(n)?, self.stage(n + 1)?);
        let plain = |c: &CylinderSubgroup| c.core().is_trivial();
        if !plain(&a) || !plain(&b) {
            return Ok(None);
        }
        let (wa, wb) = (a.window(), b.window());
        Ok(if wa == wb {
            Some(Tail::Window(wa))
        } else if wa.hi == wb.hi && wb.lo < wa.lo {
            Some(Tail::Left { upto: wa.hi - 1 })
        } else if wa.lo == wb.lo && wb.hi > wa.hi {
            Some(Tail::Right { from: wa.lo })
        } else {
            None
        })
    }
}

/// `U_- = C(ψ, U)` and `U_+ = C(ψ^{-1}, U)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlusMinus {
    pub u_minus: HalfLineCylinder,
    pub u_plus: HalfLineCylinder,
}

pub fn plus_minus(
    psi: &RowFiniteEndo,
    inverse: &RowFiniteEndo,
    u: &CylinderSubgroup,
    policy: &StabilizationPolicy,
) -> Result<PlusMinus> {
    let side = |map: &RowFiniteEndo| -> Result<HalfLineCylinder> {
        let report = map.cotrajectory_limits(u, policy)?;
        if !report.certified {
            return Err(Error::Inconclusive { budget: policy.max_n });
        }
        Ok(HalfLineCylinder {
            map: map.clone(),
            base: u.clone(),
            report,
        })
    };
    Ok(PlusMinus {
        u_minus: side(psi)?,
        u_plus: side(inverse)?,
    })
}

/// `[ψ(U_+) : U_+]` and `[ψ^{-1}(U_-) : U_-]`, in that order.
pub fn depth_indices(
    psi: &RowFiniteEndo,
    inverse: &RowFiniteEndo,
    u: &CylinderSubgroup,
    policy: &StabilizationPolicy,
) -> Result<(BigUint, BigUint)> {
    let pm = plus_minus(psi, inverse, u, policy)?;
    Ok((pm.u_plus.index_step().clone(), pm.u_minus.index_step().clone()))
}

/// The depth index through `U_+` and through `U_-`; they must agree.
pub fn depth_value(
    psi: &RowFiniteEndo,
    inverse: &RowFiniteEndo,
    u: &CylinderSubgroup,
    policy: &StabilizationPolicy,
) -> Result<BigUint> {
    let (via_plus, via_minus) = depth_indices(psi, inverse, u, policy)?;
    if via_plus != via_minus {
        return Err(Error::Consistency(format!(
            "[ψ(U_+):U_+] = {via_plus} but [ψ^{{-1}}(U_-):U_-] = {via_minus}"
        )));
    }
    Ok(via_plus)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateDepth {
    pub cylinder: CylinderSubgroup,
    pub antistability: Antistability,
    /// `[ψ(U_+) : U_+]`
    pub via_plus: Option<BigUint>,
    /// `[ψ^{-1}(U_-) : U_-]`
    pub via_minus: Option<BigUint>,
}

impl CandidateDepth {
    pub fn depth(&self) -> Option<&BigUint> {
        self.via_plus.as_ref().filter(|_| self.via_plus == self.via_minus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthReport {
    pub inverse: RowFiniteEndo,
    pub candidates: Vec<CandidateDepth>,
    pub depth: BigUint,
    pub inverse_depth: BigUint,
    /// `h_top(ψ)` over the base `U_1, U_2, …` of the first antistable candidate.
    pub h_top: EntropyValue,
    /// Depth values agree across all antistable candidates.
    pub independent: bool,
    pub h_top_is_log_depth: bool,
    pub symmetric: bool,
    /// `[K : C_n(ψ, U)] = [K : C_n(ψ^{-1}, U)]` on every computed step.
    pub mirror_indices_agree: bool,
    /// For infinite `K`, depth exceeds one.
    pub exceeds_one: Option<bool>,
}

/// Base length used for the entropy over `U_1, …, U_n`.
pub const BASE_LENGTH: usize = 3;

pub fn depth_report(
    psi: &RowFiniteEndo,
    candidates: &[CylinderSubgroup],
    policy: &StabilizationPolicy,
) -> Result<DepthReport> {
    depth_report_with_jobs(psi, candidates, policy, candidates.len())
}

/// [`depth_report`] with candidates spread over at most `jobs` threads.
pub fn depth_report_with_jobs(
    psi: &RowFiniteEndo,
    candidates: &[CylinderSubgroup],
    policy: &StabilizationPolicy,
    jobs: usize,
) -> Result<DepthReport> {
    let inverse = invert(psi)?;
    let results = par_map(candidates, jobs, |u| -> Result<CandidateDepth> {
        let antistability = antistable_check(psi, &inverse, u, policy)?;
        let (via_plus, via_minus) = match antistability.is_antistable() {
            Some(true) => {
                let (p, m) = depth_indices(psi, &inverse, u, policy)?;
                (Some(p), Some(m))
            }
            _ => (None, None),
        };
        Ok(CandidateDepth {
            cylinder: u.clone(),
            antistability,
            via_plus,
            via_minus,
        })
    });
    let candidates: Vec<CandidateDepth> = results.into_iter().collect::<Result<_>>()?;
    for c in &candidates {
        if c.via_plus != c.via_minus {
            return Err(Error::Consistency(format!(
                "[ψ(U_+):U_+] = {:?} but [ψ^{{-1}}(U_-):U_-] = {:?}",
                c.via_plus, c.via_minus
            )));
        }
    }
    let Some(first) = candidates.iter().find(|c| c.depth().is_some()) else {
        return Err(Error::Hypothesis("no candidate subgroup is certified antistable".into()));
    };
    let depth = first.depth().cloned().expect("found");
    let independent = candidates
        .iter()
        .filter_map(|c| c.depth())
        .all(|d| *d == depth);
    let u = first.cylinder.clone();
    let base = base_sequence(psi, &inverse, &u, BASE_LENGTH)?;
    let h = h_top(psi, &base, policy)?;
    let per_stage: Vec<EntropyValue> = base
        .iter()
        .map(|v| topological_entropy(psi, v, Method::Limit, policy))
        .collect::<Result<_>>()?;
    let log_depth = EntropyValue::log_int(depth.clone());
    let h_top_is_log_depth = h == log_depth && per_stage.iter().all(|e| *e == log_depth);
    let inverse_depth = depth_value(&inverse, psi, &u, policy)?;
    let forward = psi.cotrajectory_limits(&u, policy)?;
    let backward = inverse.cotrajectory_limits(&u, policy)?;
    let mirror_indices_agree = forward
        .steps
        .iter()
        .zip(&backward.steps)
        .all(|(a, b)| a.index == b.index);
    let exceeds_one = (!psi.parent().index_set().is_finite()).then(|| depth > BigUint::one());
    Ok(DepthReport {
        inverse,
        candidates,
        symmetric: inverse_depth == depth,
        inverse_depth,
        depth,
        h_top: h,
        independent,
        h_top_is_log_depth,
        mirror_indices_agree,
        exceeds_one,
    })
}
