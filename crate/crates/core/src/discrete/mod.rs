//! The discrete side: restricted direct sums `⊕_i B_i` of finite blocks,
//! column-finite endomorphisms, trajectories and algebraic entropy.
//!
//! For a finite subgroup `F` the trajectory `T_n = F·φ(F)·…·φ^{n-1}(F)` is
//! computed by `T_{n+1} = F·φ(T_n)`. Each step records, from independent
//! subgroup computations,
//!
//! * `α_n = [T_{n+1} : T_n]` (orders of the sum),
//! * `f_n = [F : F ∩ φ(T_n)] = [T_{n+1} : φ(T_n)]` (an intersection),
//! * `k_n = |ker φ ∩ T_n|` (a kernel),
//!
//! and the step passes its consistency check when `f_n = α_n · k_n`.
//! Once the triple has been constant for the stall window, the limit value
//! is `log α` and the limit-free value is `log f − log k`.

mod abelian;
mod cayley;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

pub use abelian::{AbelianEndo, SparseVec, WindowSubgroup};
pub use cayley::{CayleyBlocks, CayleyElem, CayleyEndo, CayleySubgroup, MAX_SET};

use crate::blocks::{AbelianBlocks, Band, Geometry, IndexSet, Window};
use crate::entropy::{stalled, EntropyValue, Method, StabilizationPolicy};
use crate::error::{Error, Result};

/// `⊕_i B_i` with either abelian or Cayley-table blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LFGroup {
    Abelian(AbelianBlocks),
    Cayley(CayleyBlocks),
}

impl LFGroup {
    pub fn is_abelian(&self) -> bool {
        matches!(self, LFGroup::Abelian(_))
    }

    pub fn index_set(&self) -> IndexSet {
        match self {
            LFGroup::Abelian(b) => b.index_set,
            LFGroup::Cayley(b) => b.index_set,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BandedEndo {
    Abelian(AbelianEndo),
    Cayley(CayleyEndo),
}

impl BandedEndo {
    pub fn abelian(blocks: AbelianBlocks, band: Band) -> Result<Self> {
        Ok(BandedEndo::Abelian(AbelianEndo::new(blocks, band)?))
    }

    pub fn group(&self) -> LFGroup {
        match self {
            BandedEndo::Abelian(e) => LFGroup::Abelian(e.blocks().clone()),
            BandedEndo::Cayley(e) => LFGroup::Cayley(e.blocks().clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteSubgroup {
    Abelian(WindowSubgroup),
    Cayley(CayleySubgroup),
}

impl FiniteSubgroup {
    pub fn order(&self) -> BigUint {
        match self {
            FiniteSubgroup::Abelian(h) => h.order(),
            FiniteSubgroup::Cayley(h) => BigUint::from(h.order()),
        }
    }
}

pub(crate) struct StepOutcome<S> {
    pub next: S,
    pub image_order: BigUint,
    pub kernel_order: BigUint,
    pub f_cap_image_order: BigUint,
}

/// One step `T_n ↦ T_{n+1} = F·φ(T_n)` with the side quantities.
pub(crate) trait TrajectoryEngine {
    type Sub: Clone;
    fn order(&self, s: &Self::Sub) -> BigUint;
    /// Smallest window containing the support.
    fn window(&self, s: &Self::Sub) -> Window;
    fn geometry(&self) -> Geometry;
    fn step(&self, f: &Self::Sub, t: &Self::Sub) -> Result<StepOutcome<Self::Sub>>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub n: usize,
    /// `|T_n|`
    pub order: BigUint,
    /// `[T_{n+1} : T_n]`
    pub alpha: BigUint,
    /// `|F / (F ∩ φ(T_n))|`
    pub quotient_index: BigUint,
    /// `|ker φ ∩ T_n|`
    pub kernel_order: BigUint,
    /// `|F/(F∩φ(T_n))| = α_n·|ker φ ∩ T_n|`, the product formula for
    /// `F·φ(T_n)` and `|T_n| = |φ(T_n)|·|ker φ ∩ T_n|` all hold.
    pub identities_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryReport {
    pub steps: Vec<TrajectoryStep>,
    /// First `n` of the final run of equal `α_n`.
    pub n0: Option<usize>,
    /// First `n` of the final run of equal `|F/(F∩φ(T_n))|`.
    pub n1: Option<usize>,
    pub alpha: Option<BigUint>,
    /// `|T/φ(T)|`
    pub t_mod_phi_t: Option<BigUint>,
    /// `|ker φ ∩ T|`
    pub ker_cap_t: Option<BigUint>,
    pub certified: bool,
    pub budget: usize,
}

impl TrajectoryReport {
    fn trivial() -> Self {
        let one = BigUint::one();
        TrajectoryReport {
            steps: vec![TrajectoryStep {
                n: 1,
                order: one.clone(),
                alpha: one.clone(),
                quotient_index: one.clone(),
                kernel_order: one.clone(),
                identities_hold: true,
            }],
            n0: Some(1),
            n1: Some(1),
            alpha: Some(one.clone()),
            t_mod_phi_t: Some(one.clone()),
            ker_cap_t: Some(one),
            certified: true,
            budget: 0,
        }
    }

    pub fn orders(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.order.clone()).collect()
    }

    pub fn alphas(&self) -> Vec<BigUint> {
        self.steps.iter().map(|s| s.alpha.clone()).collect()
    }

    fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::Inconclusive {
                budget: self.budget,
            })
        }
    }

    /// `log α`.
    pub fn limit_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        Ok(EntropyValue::log_int(self.alpha.clone().expect("certified")))
    }

    /// `log |T/φ(T)| − log |ker φ ∩ T|`.
    pub fn limitfree_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        Ok(EntropyValue::log_ratio(
            self.t_mod_phi_t.as_ref().expect("certified"),
            self.ker_cap_t.as_ref().expect("certified"),
        ))
    }

    /// `log |T/φ(T)|` alone.
    pub fn gap_entropy(&self) -> Result<EntropyValue> {
        self.require_certified()?;
        Ok(EntropyValue::log_int(self.t_mod_phi_t.clone().expect("certified")))
    }
}

fn exact_div(a: &BigUint, b: &BigUint, what: &str) -> Result<BigUint> {
    let (q, r) = a.div_rem(b);
    if r != BigUint::ZERO {
        return Err(Error::Consistency(format!("{what}: {b} does not divide {a}")));
    }
    Ok(q)
}

pub(crate) fn run_trajectory<E: TrajectoryEngine>(
    engine: &E,
    f: &E::Sub,
    policy: &StabilizationPolicy,
) -> Result<TrajectoryReport> {
    let order_f = engine.order(f);
    if order_f.is_one() {
        return Ok(TrajectoryReport::trivial());
    }
    let w = policy.stall_window.max(1);
    let mut steps: Vec<TrajectoryStep> = Vec::new();
    let mut t = f.clone();
    let mut order_t = order_f.clone();
    let mut report = TrajectoryReport {
        steps: Vec::new(),
        n0: None,
        n1: None,
        alpha: None,
        t_mod_phi_t: None,
        ker_cap_t: None,
        certified: false,
        budget: policy.max_n,
    };
    let geometry = engine.geometry();
    let w = w.max(geometry.period);
    let mut settled: Vec<bool> = Vec::new();
    for n in 1..=policy.max_n {
        if engine.window(&t).len() > policy.window_budget {
            break;
        }
        let out = match engine.step(f, &t) {
            Ok(out) => out,
            Err(Error::TooLarge { .. }) => break,
            Err(e) => return Err(e),
        };
        let order_next = engine.order(&out.next);
        let alpha = exact_div(&order_next, &order_t, "T_n ⊆ T_{n+1}")?;
        let quotient_index = exact_div(&order_f, &out.f_cap_image_order, "F ∩ φ(T_n) ≤ F")?;
        let identities_hold = quotient_index == &alpha * &out.kernel_order
            && &order_next * &out.f_cap_image_order == &order_f * &out.image_order
            && order_t == &out.image_order * &out.kernel_order;
        steps.push(TrajectoryStep {
            n,
            order: order_t.clone(),
            alpha,
            quotient_index,
            kernel_order: out.kernel_order,
            identities_hold,
        });
        settled.push(geometry.settled(engine.window(&t), engine.window(&out.next)));
        t = out.next;
        order_t = order_next;

        let last = steps.last().expect("non-empty");
        let done = if geometry.index_set.is_finite() {
            // T_{n+1} = T_n repeats forever; a stall before that proves nothing
            last.alpha.is_one() && last.identities_hold
        } else {
            let triples: Vec<_> = steps
                .iter()
                .map(|s| (&s.alpha, &s.quotient_index, &s.kernel_order))
                .collect();
            stalled(&triples, w).is_some() && {
                let recent = steps.len() - w..;
                steps[recent.clone()].iter().all(|s| s.identities_hold) && settled[recent].iter().all(|&b| b)
            }
        };
        if done {
            report.alpha = Some(last.alpha.clone());
            report.t_mod_phi_t = Some(last.quotient_index.clone());
            report.ker_cap_t = Some(last.kernel_order.clone());
            report.certified = true;
            break;
        }
    }
    let alphas: Vec<_> = steps.iter().map(|s| &s.alpha).collect();
    let quotients: Vec<_> = steps.iter().map(|s| &s.quotient_index).collect();
    report.n0 = stalled(&alphas, 1).map(|i| i + 1);
    report.n1 = stalled(&quotients, 1).map(|i| i + 1);
    report.steps = steps;
    Ok(report)
}

impl BandedEndo {
    /// `T_n(φ, F)`.
    pub fn trajectory(&self, f: &FiniteSubgroup, n: usize) -> Result<FiniteSubgroup> {
        if n == 0 {
            return Err(Error::Spec("trajectory length must be positive".into()));
        }
        match (self, f) {
            (BandedEndo::Abelian(e), FiniteSubgroup::Abelian(f)) => {
                let mut t = f.clone();
                for _ in 1..n {
                    t = e.step(f, &t)?.next;
                }
                Ok(FiniteSubgroup::Abelian(t))
            }
            (BandedEndo::Cayley(e), FiniteSubgroup::Cayley(f)) => {
                f.check_normal(e.blocks())?;
                let mut t = f.clone();
                for _ in 1..n {
                    t = e.step(f, &t)?.next;
                }
                Ok(FiniteSubgroup::Cayley(t))
            }
            _ => Err(Error::AmbientMismatch),
        }
    }

    pub fn trajectory_limits(
        &self,
        f: &FiniteSubgroup,
        policy: &StabilizationPolicy,
    ) -> Result<TrajectoryReport> {
        match (self, f) {
            (BandedEndo::Abelian(e), FiniteSubgroup::Abelian(f)) => run_trajectory(e, f, policy),
            (BandedEndo::Cayley(e), FiniteSubgroup::Cayley(f)) => {
                f.check_normal(e.blocks())?;
                run_trajectory(e, f, policy)
            }
            _ => Err(Error::AmbientMismatch),
        }
    }
}

/// `H_alg(φ, F)` by the requested method.
pub fn algebraic_entropy(
    phi: &BandedEndo,
    f: &FiniteSubgroup,
    method: Method,
    policy: &StabilizationPolicy,
) -> Result<EntropyValue> {
    let report = phi.trajectory_limits(f, policy)?;
    match method {
        Method::Limit => report.limit_entropy(),
        Method::LimitFree => report.limitfree_entropy(),
        Method::Surjective => Err(Error::Spec(
            "the surjective method applies to compact groups only".into(),
        )),
    }
}

/// Maximum of `H_alg(φ, F)` over an explicit family: a lower bound for
/// `h_alg(φ)`, which is the supremum over all finite subgroups.
pub fn h_alg(
    phi: &BandedEndo,
    family: &[FiniteSubgroup],
    policy: &StabilizationPolicy,
) -> Result<EntropyValue> {
    let mut best = EntropyValue::zero();
    for f in family {
        best = best.max(algebraic_entropy(phi, f, Method::Limit, policy)?);
    }
    Ok(best)
}

/// `log |T/φ(T)|`, which overestimates `H_alg` by `log |ker φ ∩ T|`.
pub fn yuzvinski_gap(
    phi: &BandedEndo,
    f: &FiniteSubgroup,
    policy: &StabilizationPolicy,
) -> Result<EntropyValue> {
    phi.trajectory_limits(f, policy)?.gap_entropy()
}
