//! Cotrajectories `C_{n+1} = U ∩ ψ^{-1}(C_n)` and their limits.
//!
//! Each step records, from separate cylinder computations,
//!
//! * `c_n = [K : C_n]` and `α_n = c_{n+1} / c_n`,
//! * `r_n = [ψ^{-1}(C_n)·U : U]`, the order of the descending chain in `K/U`,
//! * `l_n = [K : Im ψ·C_n]`, read on the window of `C_n`,
//!
//! and checks `[K : ψ^{-1}(C_n)]·l_n = c_n` and `r_n = α_n·l_n`. In the limit
//! `r = |ψ^{-1}(C)/C|` and `l = [K : Im ψ·C]`, so `log α = log r − log l`.

use num_bigint::BigUint;
use num_integer::Integer;

use super::{CylinderSubgroup, RowFiniteEndo};
use crate::entropy::{stalled, EntropyValue, Method, StabilizationPolicy};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CotrajectoryStep {
    pub n: usize,
    /// `[K : C_n]`
    pub index: BigUint,
    /// `[C_n : C_{n+1}]`
    pub alpha: BigUint,
    /// `[ψ^{-1}(C_n)·U : U]`
    pub preimage_index: BigUint,
    /// `[K : Im ψ·C_n]`
    pub cokernel_index: BigUint,
    pub identities_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CotrajectoryReport {
    pub steps: Vec<CotrajectoryStep>,
    /// First `n` of the final run of equal `α_n`.
    pub n0: Option<usize>,
    /// First `n` of the final run of equal `[ψ^{-1}(C_n)·U : U]`.
    pub n1: Option<usize>,
    pub alpha: Option<BigUint>,
    /// `|ψ^{-1}(C)/C|`
    pub psi_inv_c_mod_c: Option<BigUint>,
    /// `[K : Im ψ·C]`
    pub k_mod_l: Option<BigUint>,
    /// `C` itself, when the cotrajectory became constant (then `C` is open).
    pub limit: Option<CylinderSubgroup>,
    /// The last computed `C_n`.
    pub last: CylinderSubgroup,
    pub certified: bool,
    pub budget: usize,
}

impl CotrajectoryReport {
    pub fn indices(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.index.clone()).collect()
    }

    pub fn alphas(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.alpha.clone()).collect()
    }

    fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::Inconclusive { budget: self.budget })
        }
    }

    pub fn limit_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        Ok(EntropyValue::log_int(self.alpha.clone().expect("certified")))
    }

    /// `log |ψ^{-1}(C)/C| − log [K : Im ψ·C]`.
    pub fn limitfree_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        Ok(EntropyValue::log_ratio(
            self.psi_inv_c_mod_c.as_ref().expect("certified"),
            self.k_mod_l.as_ref().expect("certified"),
        ))
    }

    /// `log [ψ^{-1}(U_-) : U_-]`, valid when `ψ` is onto.
    pub fn surjective_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        let l = self.k_mod_l.as_ref().expect("certified");
        if *l != BigUint::from(1u8) {
            return Err(Error::Consistency(format!(
                "ψ passed the surjectivity check but [K : Im ψ·C] = {l}"
            )));
        }
        Ok(EntropyValue::log_int(self.psi_inv_c_mod_c.clone().expect("certified")))
    }
}

fn exact_div(a: &BigUint, b: &BigUint, what: &str) -> Result<BigUint> {
    let (q, r) = a.div_rem(b);
    if r != BigUint::ZERO {
        return Err(Error::Consistency(format!("{what}: {b} does not divide {a}")));
    }
    Ok(q)
}

impl RowFiniteEndo {
    pub fn cotrajectory_limits(
        &self,
        u: &CylinderSubgroup,
        policy: &StabilizationPolicy,
    ) -> Result<CotrajectoryReport> {
        self.check_parent(u)?;
        let geometry = self.geometry();
        let w = policy.stall_window.max(1).max(geometry.period);
        let mut report = CotrajectoryReport {
            steps: Vec::new(),
            n0: None,
            n1: None,
            alpha: None,
            psi_inv_c_mod_c: None,
            k_mod_l: None,
            limit: None,
            last: u.clone(),
            certified: false,
            budget: policy.max_n,
        };
        let index_u = u.index();
        let mut c = u.clone();
        let mut index_c = index_u.clone();
        let mut settled: Vec<bool> = Vec::new();
        for n in 1..=policy.max_n {
            if c.window().len() > policy.window_budget {
                break;
            }
            let pre = self.preimage(&c)?;
            let next = u.intersect(&pre)?;
            let index_next = next.index();
            let alpha = exact_div(&index_next, &index_c, "C_{n+1} ⊆ C_n")?;
            let preimage_index = exact_div(&index_u, &pre.sum(u)?.index(), "U ⊆ ψ^{-1}(C_n)·U")?;
            let cokernel_index = self.cokernel_index(&c)?;
            let identities_hold = pre.index() * &cokernel_index == index_c && preimage_index == &alpha * &cokernel_index;
            let fixed = next == c;
            report.steps.push(CotrajectoryStep {
                n,
                index: index_c.clone(),
                alpha,
                preimage_index,
                cokernel_index,
                identities_hold,
            });
            settled.push(geometry.settled(c.window(), next.window()));
            let steps = &report.steps;
            let last = steps.last().expect("non-empty");
            let done = if fixed {
                // C_{n+1} = C_n forces every later step to repeat this one
                last.identities_hold
            } else if geometry.index_set.is_finite() {
                false
            } else {
                let triples: Vec<_> = steps
                    .iter()
                    .map(|s| (&s.alpha, &s.preimage_index, &s.cokernel_index))
                    .collect();
                stalled(&triples, w).is_some() && {
                    let recent = steps.len() - w..;
                    steps[recent.clone()].iter().all(|s| s.identities_hold) && settled[recent].iter().all(|&b| b)
                }
            };
            if fixed {
                report.limit = Some(c.clone());
            }
            if done {
                report.alpha = Some(last.alpha.clone());
                report.psi_inv_c_mod_c = Some(last.preimage_index.clone());
                report.k_mod_l = Some(last.cokernel_index.clone());
                report.certified = true;
                report.last = c;
                break;
            }
            c = next;
            index_c = index_next;
            report.last = c.clone();
        }
        let alphas: Vec<_> = report.steps.iter().map(|s| &s.alpha).collect();
        let chain: Vec<_> = report.steps.iter().map(|s| &s.preimage_index).collect();
        report.n0 = stalled(&alphas, 1).map(|i| i + 1);
        report.n1 = stalled(&chain, 1).map(|i| i + 1);
        Ok(report)
    }
}

/// `H_top(ψ, U)` by the requested method.
pub fn topological_entropy(
    psi: &RowFiniteEndo,
    u: &CylinderSubgroup,
    method: Method,
    policy: &StabilizationPolicy,
) -> Result<EntropyValue> {
    if method == Method::Surjective {
        psi.check_surjective(psi.surjectivity_probe())?;
    }
    let report = psi.cotrajectory_limits(u, policy)?;
    match method {
        Method::Limit => report.limit_entropy(),
        Method::LimitFree => report.limitfree_entropy(),
        Method::Surjective => report.surjective_entropy(),
    }
}

/// Maximum of `H_top(ψ, U)` over an explicit family of cylinders. For a
/// family forming a base of neighbourhoods this is `h_top(ψ)`; otherwise it
/// is a lower bound.
pub fn h_top(psi: &RowFiniteEndo, base: &[CylinderSubgroup], policy: &StabilizationPolicy) -> Result<EntropyValue> {
    let mut best = EntropyValue::zero();
    for u in base {
        best = best.max(topological_entropy(psi, u, Method::Limit, policy)?);
    }
    Ok(best)
}
