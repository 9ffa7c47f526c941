//! The quotient system `K/U_-`, kernel and cokernel orders of `ψ`, and the
//! power law for surjective maps.

use num_bigint::BigUint;

use super::{CylinderSubgroup, RowFiniteEndo};
use crate::blocks::{IndexSet, Window};
use crate::entropy::{stalled, EntropyValue, Method, StabilizationPolicy};
use crate::error::{Error, Result};
use crate::finabel::{quotient, AbSubgroup, Elem, FiniteAbelianGroup, Hom};

/// `K_U = K/U_-` with the induced map `ψ_U` and the image of `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSystem {
    /// `U_-`, when it is open.
    pub u_minus: Option<CylinderSubgroup>,
    /// `K/U_-` as a finite group, when `U_-` is open.
    pub quotient: Option<FiniteAbelianGroup>,
    pub induced: Option<Hom>,
    pub image_of_u: Option<AbSubgroup>,
    /// `|ker ψ_U| = [ψ^{-1}(U_-) : U_-]`
    pub kernel_order: BigUint,
    /// `|coker ψ_U| = [K : Im ψ·U_-]`
    pub cokernel_order: BigUint,
    /// `log |ker ψ_U| − log |coker ψ_U|`
    pub entropy: EntropyValue,
    /// All of the above agree with `H_top(ψ, U)`.
    pub agrees: bool,
}

pub fn quotient_system(
    psi: &RowFiniteEndo,
    u: &CylinderSubgroup,
    policy: &StabilizationPolicy,
) -> Result<QuotientSystem> {
    let report = psi.cotrajectory_limits(u, policy)?;
    let h = report.limit_entropy()?;
    let r = report.psi_inv_c_mod_c.clone().expect("certified");
    let l = report.k_mod_l.clone().expect("certified");
    let Some(c) = report.limit.clone() else {
        let entropy = EntropyValue::log_ratio(&r, &l);
        return Ok(QuotientSystem {
            u_minus: None,
            quotient: None,
            induced: None,
            image_of_u: None,
            kernel_order: r,
            cokernel_order: l,
            agrees: entropy == h,
            entropy,
        });
    };
    let w = c.window();
    let (q, proj) = quotient(c.core())?;
    let (dep, dst, hom) = psi.window_hom_from(w, w)?;
    let lifter = proj.lifter()?;
    let mut columns: Vec<Elem> = Vec::with_capacity(q.rank());
    for k in 0..q.rank() {
        let x = lifter
            .lift(&q.unit(k))?
            .ok_or_else(|| Error::Consistency("projection onto K/U_- is not onto".into()))?;
        let x_dep = c.layout().embed(&x, &dep);
        let y = hom.apply(&x_dep)?;
        debug_assert_eq!(dst.window, w);
        columns.push(proj.apply(&y)?);
    }
    let matrix: Vec<Vec<i64>> = (0..q.rank())
        .map(|row| columns.iter().map(|col| col[row]).collect())
        .collect();
    let induced = Hom::new(matrix, &q, &q)?;
    let image_of_u = proj.image(&u.core_on(w)?)?;
    let kernel_order = induced.kernel()?.order().clone();
    let cokernel_order = induced.cokernel_order()?;
    let entropy = EntropyValue::log_ratio(&kernel_order, &cokernel_order);
    let agrees = entropy == h && kernel_order == r && cokernel_order == l;
    Ok(QuotientSystem {
        u_minus: Some(c),
        quotient: Some(q),
        induced: Some(induced),
        image_of_u: Some(image_of_u),
        kernel_order,
        cokernel_order,
        entropy,
        agrees,
    })
}

/// `|ker ψ|` and `|coker ψ|` of `ψ` on the whole group, from growing windows:
/// `|π_V(ker ψ)|` and `[K_V : π_V(Im ψ)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelCokernel {
    /// `None` when the window values never settled (typically an infinite kernel).
    pub kernel: Option<BigUint>,
    pub cokernel: Option<BigUint>,
    pub kernel_by_window: Vec<BigUint>,
    pub cokernel_by_window: Vec<BigUint>,
}

fn probe_window(index_set: IndexSet, m: i64) -> Window {
    match index_set {
        IndexSet::Naturals => Window::new(0, m),
        IndexSet::Integers => Window::new(-m, m),
        IndexSet::Finite(n) => Window::new(0, m.min(n as i64)),
    }
}

pub fn kernel_cokernel_orders(psi: &RowFiniteEndo, policy: &StabilizationPolicy) -> Result<KernelCokernel> {
    let parent = psi.parent();
    let index_set = parent.index_set();
    let reach = psi.band().reach() + psi.band().width as i64;
    let w = policy.stall_window.max(1).max(psi.geometry().period);
    let mut out = KernelCokernel {
        kernel: None,
        cokernel: None,
        kernel_by_window: Vec::new(),
        cokernel_by_window: Vec::new(),
    };
    for m in 1..=policy.max_n as i64 {
        let v = probe_window(index_set, m);
        if v.len() > policy.window_budget {
            break;
        }
        let outer = parent.blocks().clip(v.widen(m * reach, m * reach));
        let (src, _, hom) = psi.window_hom_from(outer, v)?;
        let ker = hom.kernel()?;
        let small = parent.layout(v);
        let restrict: Vec<Elem> = ker.generators().iter().map(|g| src.restrict(g, &small)).collect();
        let projected = AbSubgroup::generated(small.group(), &restrict)?;
        out.kernel_by_window.push(projected.order().clone());
        out.cokernel_by_window.push(psi.cokernel_index(&CylinderSubgroup::pinned(parent, v))?);
        let finite_done = index_set.as_window() == Some(v) && outer == v;
        if finite_done || (stalled(&out.kernel_by_window, w).is_some() && stalled(&out.cokernel_by_window, w).is_some()) {
            out.kernel = out.kernel_by_window.last().cloned();
            out.cokernel = out.cokernel_by_window.last().cloned();
            break;
        }
    }
    Ok(out)
}

/// Both sides of `[ψ^{-k}(U_-) : U_-] = [ψ^{-1}(U_-) : U_-]^k` and of
/// `H_top(ψ^k, C_k(ψ, U)) = k·H_top(ψ, U)`.
///
/// The entropy law needs `C_k(ψ, U)` in place of `U` on the left: for the
/// left shift and `U = {x_0 = 0}`, `H_top(σ^3, U) = log 2`. That value is
/// kept in `power_entropy_at_u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogLawRecord {
    pub k: u32,
    pub base_index: BigUint,
    pub power_index: BigUint,
    /// `H_top(ψ^k, C_k(ψ, U))`
    pub power_entropy: EntropyValue,
    /// `H_top(ψ^k, U)`
    pub power_entropy_at_u: EntropyValue,
    pub scaled_entropy: EntropyValue,
    pub index_law_holds: bool,
    pub entropy_law_holds: bool,
}

/// Requires `ψ` onto. `[ψ^{-k}(C) : C]` is read in `K/C_k`, where
/// `ψ^{-k}(C)·C_k / C_k` is the stable value of `ψ^{-k}(C_n)·C_k / C_k`.
pub fn log_law_check(
    psi: &RowFiniteEndo,
    u: &CylinderSubgroup,
    k: u32,
    policy: &StabilizationPolicy,
) -> Result<LogLawRecord> {
    if k == 0 {
        return Err(Error::Spec("the power must be positive".into()));
    }
    psi.check_surjective(psi.surjectivity_probe())?;
    let report = psi.cotrajectory_limits(u, policy)?;
    let base_entropy = report.surjective_entropy()?;
    let base_index = report.psi_inv_c_mod_c.clone().expect("certified");
    let power = psi.power(k)?;
    let c_k = psi.cotrajectory(u, k as usize)?;
    let index_ck = c_k.index();
    let w = policy.stall_window.max(1).max(psi.geometry().period);
    let mut seq: Vec<BigUint> = Vec::new();
    let mut c = u.clone();
    let mut power_index = None;
    for _ in 1..=policy.max_n {
        if c.window().len() > policy.window_budget {
            break;
        }
        let pulled = power.preimage(&c)?.sum(&c_k)?;
        seq.push(&index_ck / pulled.index());
        let next = u.intersect(&psi.preimage(&c)?)?;
        let fixed = next == c;
        if fixed || stalled(&seq, w).is_some() {
            power_index = seq.last().cloned();
            break;
        }
        c = next;
    }
    let power_index = power_index.ok_or(Error::Inconclusive { budget: policy.max_n })?;
    let power_entropy = super::topological_entropy(&power, &c_k, Method::Limit, policy)?;
    let power_entropy_at_u = super::topological_entropy(&power, u, Method::Limit, policy)?;
    let scaled_entropy = base_entropy.times(k);
    Ok(LogLawRecord {
        k,
        index_law_holds: power_index == base_index.pow(k),
        entropy_law_holds: power_entropy == scaled_entropy,
        base_index,
        power_index,
        power_entropy,
        power_entropy_at_u,
        scaled_entropy,
    })
}
