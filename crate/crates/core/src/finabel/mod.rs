//! Exact finite abelian groups: normal forms, canonical subgroups and the
//! homomorphism calculus every other module is built on.

mod group;
mod hom;
pub mod snf;
mod subgroup;

pub use group::{Elem, FiniteAbelianGroup, MAX_MODULUS};
pub use hom::{Hom, Lifter};
pub use snf::{quotient, smith_normal_form, SmithForm};
pub use subgroup::{intersection_order, small, AbSubgroup};

use num_bigint::BigUint;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Intersect,
}

pub fn canonical_subgroup<E: AsRef<[i64]>>(a: &FiniteAbelianGroup, gens: &[E]) -> Result<AbSubgroup> {
    AbSubgroup::generated(a, gens.iter().map(|g| g.as_ref()))
}

pub fn subgroup_combine(h: &AbSubgroup, l: &AbSubgroup, op: CombineOp) -> Result<AbSubgroup> {
    match op {
        CombineOp::Sum => h.sum(l),
        CombineOp::Intersect => h.intersect(l),
    }
}

/// `[L : H]`; errors unless `H ⊆ L`.
pub fn subgroup_index(h: &AbSubgroup, l: &AbSubgroup) -> Result<BigUint> {
    h.index_in(l)
}

pub fn hom_validate(
    matrix: Vec<Vec<i64>>,
    source: &FiniteAbelianGroup,
    target: &FiniteAbelianGroup,
) -> Result<Hom> {
    Hom::new(matrix, source, target)
}

#[derive(Clone, Debug)]
pub enum HomQuery<'a> {
    Kernel,
    Image(&'a AbSubgroup),
    Preimage(&'a AbSubgroup),
}

pub fn hom_calculus(f: &Hom, query: HomQuery<'_>) -> Result<AbSubgroup> {
    match query {
        HomQuery::Kernel => f.kernel(),
        HomQuery::Image(h) => f.image(h),
        HomQuery::Preimage(h) => f.preimage(h),
    }
}
