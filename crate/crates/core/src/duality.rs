//! Pontryagin duality at window level: finite abelian groups are paired
//! with themselves through `Z/m`, and `⊕_i B_i` is paired with `Π_i B̂_i`
//! block by block.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::blocks::{Band, IntMatrix, Periodic};
use crate::discrete::{AbelianEndo, BandedEndo, FiniteSubgroup, WindowSubgroup};
use crate::entropy::{EntropyValue, Method, StabilizationPolicy};
use crate::error::{Error, Result};
use crate::finabel::{quotient, AbSubgroup, FiniteAbelianGroup, Hom};
use crate::profinite::{topological_entropy, CylinderSubgroup, ProGroup, RowFiniteEndo};

/// `⟨x, χ⟩ = Σ_i x_i χ_i (m/d_i) mod m`, with `m` the exponent of the group.
/// Characters use the same coordinates as the group itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPairing {
    group: FiniteAbelianGroup,
    m: i64,
}

impl DualPairing {
    pub fn new(group: &FiniteAbelianGroup) -> Self {
        DualPairing {
            m: group.exponent(),
            group: group.clone(),
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// The circle is represented by `Z/m`.
    pub fn modulus(&self) -> i64 {
        self.m
    }

    pub fn pair(&self, x: &[i64], chi: &[i64]) -> i64 {
        let m = self.m as i128;
        let mut acc = 0i128;
        for ((&a, &b), &d) in x.iter().zip(chi).zip(self.group.moduli()) {
            acc = (acc + (a as i128 * b as i128).rem_euclid(m) * (self.m / d) as i128).rem_euclid(m);
        }
        acc as i64
    }

    /// Enumerates both arguments; only for small groups.
    pub fn is_nondegenerate(&self) -> bool {
        let elems: Vec<_> = self.group.elements().collect();
        let dead = |x: &Vec<i64>| elems.iter().all(|c| self.pair(x, c) == 0);
        let dead_right = |c: &Vec<i64>| elems.iter().all(|x| self.pair(x, c) == 0);
        elems.iter().filter(|x| dead(x)).count() == 1 && elems.iter().filter(|c| dead_right(c)).count() == 1
    }
}

/// `Â` with its pairing.
pub fn dual_group(a: &FiniteAbelianGroup) -> (FiniteAbelianGroup, DualPairing) {
    (a.clone(), DualPairing::new(a))
}

/// The adjoint `f̂ : B̂ → Â`, `f̂(χ) = χ ∘ f`. In coordinates
/// `N[a][c] = M[c][a] · d_a / e_c`.
pub fn dual_hom(f: &Hom) -> Result<Hom> {
    let (d, e) = (f.source().moduli(), f.target().moduli());
    let m = f.matrix();
    let n: IntMatrix = (0..d.len())
        .map(|a| {
            (0..e.len())
                .map(|c| {
                    let scaled = m[c][a] as i128 * d[a] as i128;
                    debug_assert_eq!(scaled % e[c] as i128, 0);
                    ((scaled / e[c] as i128).rem_euclid(d[a] as i128)) as i64
                })
                .collect()
        })
        .collect();
    Hom::new(n, f.target(), f.source())
}

/// `H^⊥ = {χ : ⟨h, χ⟩ = 0 for all h ∈ H}`.
pub fn annihilator(h: &AbSubgroup, pairing: &DualPairing) -> Result<AbSubgroup> {
    if h.ambient() != pairing.group() {
        return Err(Error::AmbientMismatch);
    }
    let gens = h.generators();
    let a = pairing.group();
    if gens.is_empty() {
        return Ok(AbSubgroup::whole(a));
    }
    let m = pairing.modulus();
    let circle = FiniteAbelianGroup::new(vec![m; gens.len()])?;
    let rows: IntMatrix = gens
        .iter()
        .map(|g| {
            g.iter()
                .zip(a.moduli())
                .map(|(&x, &d)| ((x as i128 * (m / d) as i128).rem_euclid(m as i128)) as i64)
                .collect()
        })
        .collect();
    Hom::new(rows, a, &circle)?.kernel()
}

/// Outcome of the finite-level duality checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityFacts {
    /// `(Σ_{k<n} f^k H)^⊥ = ∩_{k<n} (f^k H)^⊥`, and the same for `H, L`
    /// together with `(H ∩ L)^⊥ = H^⊥ + L^⊥`.
    pub sums_and_intersections: bool,
    /// `Ĥ ≅ Â/H^⊥`, compared through the orders of all `m`-torsion subgroups.
    pub subgroup_dual: bool,
    /// `(f^n H)^⊥ = f̂^{-n}(H^⊥)`.
    pub iterated_preimage: bool,
    /// `(ker f)^⊥ = Im f̂`.
    pub kernel_image: bool,
    /// `|H^⊥ / L^⊥| = |L/H|`.
    pub quotient_dual: bool,
    /// `f̂̂ = f` and `|H|·|H^⊥| = |A|`.
    pub double_dual: bool,
}

impl DualityFacts {
    pub fn all_hold(&self) -> bool {
        self.sums_and_intersections
            && self.subgroup_dual
            && self.iterated_preimage
            && self.kernel_image
            && self.quotient_dual
            && self.double_dual
    }
}

fn divisors(n: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// `|H[m]|` for every `m` dividing the exponent of the ambient group. Two
/// finite abelian groups with equal profiles are isomorphic.
fn torsion_profile(h: &AbSubgroup) -> Result<Vec<BigUint>> {
    let a = h.ambient();
    divisors(a.exponent())
        .into_iter()
        .map(|m| Ok(Hom::scalar(a, m).kernel_on(h)?.order().clone()))
        .collect()
}

fn quotient_profile(q: &FiniteAbelianGroup, exponent: i64) -> Vec<BigUint> {
    divisors(exponent)
        .into_iter()
        .map(|m| {
            q.moduli()
                .iter()
                .fold(BigUint::from(1u8), |acc, &d| acc * BigUint::from(d.gcd(&m) as u64))
        })
        .collect()
}

/// Checks the finite-level duality facts for an endomorphism `f` of `A`,
/// subgroups `H ⊆ L` and the power `n`.
pub fn verify_duality_facts(f: &Hom, h: &AbSubgroup, l: &AbSubgroup, n: usize) -> Result<DualityFacts> {
    let a = f.source();
    if f.target() != a || h.ambient() != a || l.ambient() != a {
        return Err(Error::AmbientMismatch);
    }
    if !h.is_subgroup_of(l)? {
        return Err(Error::NotContained);
    }
    let p = DualPairing::new(a);
    let fd = dual_hom(f)?;
    let ann = |s: &AbSubgroup| annihilator(s, &p);

    // powers f^k(H) for k < n
    let mut images = vec![h.clone()];
    for _ in 1..n.max(1) {
        let next = f.image(images.last().expect("non-empty"))?;
        images.push(next);
    }
    let mut total = AbSubgroup::trivial(a);
    let mut meet = AbSubgroup::whole(a);
    for s in &images {
        total = total.sum(s)?;
        meet = meet.intersect(&ann(s)?)?;
    }
    let (hp, lp) = (ann(h)?, ann(l)?);
    let sums_and_intersections = ann(&total)? == meet
        && ann(&h.sum(l)?)? == hp.intersect(&lp)?
        && ann(&h.intersect(l)?)? == hp.sum(&lp)?;

    let (q, _) = quotient(&hp)?;
    let subgroup_dual = torsion_profile(h)? == quotient_profile(&q, a.exponent());

    let mut fnh = h.clone();
    let mut pulled = hp.clone();
    for _ in 0..n {
        fnh = f.image(&fnh)?;
        pulled = fd.preimage(&pulled)?;
    }
    let iterated_preimage = ann(&fnh)? == pulled;

    let kernel_image = ann(&f.kernel()?)? == fd.image_of_whole()?;

    let quotient_dual = hp.order() * h.order() == lp.order() * l.order();

    let double_dual = dual_hom(&fd)? == *f && h.order() * hp.order() == a.order();

    Ok(DualityFacts {
        sums_and_intersections,
        subgroup_dual,
        iterated_preimage,
        kernel_image,
        quotient_dual,
        double_dual,
    })
}

/// The compact dual of a banded endomorphism of `⊕_i B_i` together with
/// `U = F^⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub group: Arc<ProGroup>,
    pub endo: RowFiniteEndo,
    pub cylinder: CylinderSubgroup,
}

/// `K = Π_i B̂_i`, `ψ = φ̂` (the band with every block matrix replaced by its
/// adjoint) and `U = F^⊥`.
pub fn bridge(phi: &BandedEndo, f: &FiniteSubgroup) -> Result<Bridge> {
    let (BandedEndo::Abelian(phi), FiniteSubgroup::Abelian(f)) = (phi, f) else {
        return Err(Error::Hypothesis("duality needs abelian blocks".into()));
    };
    let (group, endo) = dual_endo(phi)?;
    let cylinder = annihilator_cylinder(&group, f)?;
    Ok(Bridge { group, endo, cylinder })
}

/// `(Π_i B̂_i, φ̂)`.
pub fn dual_endo(phi: &AbelianEndo) -> Result<(Arc<ProGroup>, RowFiniteEndo)> {
    let blocks = phi.blocks();
    let band = phi.band();
    let group = ProGroup::from_blocks(blocks.clone())?;
    let period = num_integer::lcm(band.rules.period(), blocks.blocks.period());
    let prefix = band.rules.prefix_len().max(blocks.blocks.prefix_len()) + band.offset.unsigned_abs() as usize;
    let rules = Periodic::tabulate(blocks.index_set, prefix, period, |i| {
        (0..band.width)
            .map(|t| {
                let m = band.matrix(i, t);
                let far = i + band.offset + t as i64;
                if !blocks.index_set.contains(far) {
                    // never read; keep the transposed shape
                    let cols = m.len();
                    return Ok(vec![vec![0; cols]; blocks.block(i).rank()]);
                }
                let f = Hom::new(m.clone(), blocks.block(i), blocks.block(far))?;
                Ok(dual_hom(&f)?.matrix().to_vec())
            })
            .collect::<Result<Vec<IntMatrix>>>()
    })?;
    let endo = RowFiniteEndo::new(
        &group,
        Band {
            offset: band.offset,
            width: band.width,
            rules,
        },
    )?;
    Ok((group, endo))
}

/// `H^⊥` for a finite subgroup of `⊕_i B_i`, as a cylinder on its window.
pub fn annihilator_cylinder(group: &Arc<ProGroup>, h: &WindowSubgroup) -> Result<CylinderSubgroup> {
    let pairing = DualPairing::new(h.layout().group());
    let core = annihilator(h.subgroup(), &pairing)?;
    CylinderSubgroup::new(group, h.window(), core)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgePairCheck {
    /// `T_n(φ, F)^⊥ = C_n(φ̂, F^⊥)` for `n = 1..=checked`.
    pub checked: usize,
    pub cylinders_match: bool,
    /// `|ker φ ∩ T| = [K : Im ψ + C]`
    pub kernel_matches: bool,
    /// `|T/φ(T)| = |ψ^{-1}(C)/C|`
    pub quotient_matches: bool,
    pub algebraic: EntropyValue,
    pub topological: EntropyValue,
}

impl BridgePairCheck {
    pub fn holds(&self) -> bool {
        self.cylinders_match && self.kernel_matches && self.quotient_matches && self.algebraic == self.topological
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeCheck {
    pub pairs: Vec<BridgePairCheck>,
    pub h_alg: EntropyValue,
    pub h_top: EntropyValue,
}

impl BridgeCheck {
    pub fn holds(&self) -> bool {
        self.pairs.iter().all(BridgePairCheck::holds) && self.h_alg == self.h_top
    }
}

/// Computes both sides independently for every `F` in the family and
/// compares them, including the cylinders `T_n^⊥` and `C_n` step by step.
pub fn weiss_bridge_check(
    phi: &BandedEndo,
    family: &[FiniteSubgroup],
    policy: &StabilizationPolicy,
) -> Result<BridgeCheck> {
    let BandedEndo::Abelian(endo) = phi else {
        return Err(Error::Hypothesis("duality needs abelian blocks".into()));
    };
    let (group, psi) = dual_endo(endo)?;
    let mut pairs = Vec::with_capacity(family.len());
    let mut h_alg = EntropyValue::zero();
    let mut h_top = EntropyValue::zero();
    for f in family {
        let FiniteSubgroup::Abelian(fa) = f else {
            return Err(Error::Hypothesis("duality needs abelian blocks".into()));
        };
        let u = annihilator_cylinder(&group, fa)?;
        let alg = phi.trajectory_limits(f, policy)?;
        let top = psi.cotrajectory_limits(&u, policy)?;
        let algebraic = alg.limit_entropy()?;
        let topological = top.limit_entropy()?;
        let checked = alg.steps.len().min(top.steps.len()).max(1);
        let mut cylinders_match = true;
        for n in 1..=checked {
            let FiniteSubgroup::Abelian(t) = phi.trajectory(f, n)? else {
                unreachable!("abelian in, abelian out")
            };
            if annihilator_cylinder(&group, &t)? != psi.cotrajectory(&u, n)? {
                cylinders_match = false;
                break;
            }
        }
        pairs.push(BridgePairCheck {
            checked,
            cylinders_match,
            kernel_matches: alg.ker_cap_t == top.k_mod_l,
            quotient_matches: alg.t_mod_phi_t == top.psi_inv_c_mod_c,
            algebraic: algebraic.clone(),
            topological: topological.clone(),
        });
        h_alg = h_alg.max(algebraic);
        h_top = h_top.max(topological);
    }
    Ok(BridgeCheck { pairs, h_alg, h_top })
}

/// `H_top(φ̂, F^⊥)` by the requested method.
pub fn bridged_entropy(
    phi: &BandedEndo,
    f: &FiniteSubgroup,
    method: Method,
    policy: &StabilizationPolicy,
) -> Result<EntropyValue> {
    let b = bridge(phi, f)?;
    topological_entropy(&b.endo, &b.cylinder, method, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{AbelianBlocks, IndexSet, Window};
    use crate::discrete::SparseVec;
    use proptest::prelude::*;

    fn g(moduli: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(moduli.to_vec()).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    /// `H^⊥` by enumerating all characters.
    fn brute_annihilator(h: &AbSubgroup, p: &DualPairing) -> Vec<Vec<i64>> {
        let hs: Vec<_> = p.group().elements().filter(|x| h.contains(x).unwrap()).collect();
        p.group()
            .elements()
            .filter(|c| hs.iter().all(|x| p.pair(x, c) == 0))
            .collect()
    }

    #[test]
    fn dual_groups() {
        for m in [vec![4], vec![2, 2, 2], vec![2, 6]] {
            let (d, p) = dual_group(&g(&m));
            assert_eq!(d.order(), g(&m).order());
            assert!(p.is_nondegenerate(), "{m:?}");
        }
        let (_, p) = dual_group(&g(&[4]));
        assert_eq!(p.pair(&[1], &[1]), 1);
        assert_eq!(p.pair(&[2], &[2]), 0);
        let (_, p) = dual_group(&g(&[2, 6]));
        assert_eq!(p.modulus(), 6);
        assert_eq!(p.pair(&[1, 0], &[1, 0]), 3);
        assert_eq!(p.pair(&[0, 1], &[0, 1]), 1);
    }

    #[test]
    fn dual_homs() {
        let a = g(&[8]);
        let two = Hom::scalar(&a, 2);
        assert_eq!(dual_hom(&two).unwrap(), two);
        assert_eq!(dual_hom(&Hom::identity(&a)).unwrap(), Hom::identity(&a));
        let b = g(&[2, 6]);
        assert_eq!(dual_hom(&Hom::zero(&a, &b)).unwrap(), Hom::zero(&b, &a));
        // Z/2 → Z/4, 1 ↦ 2 has adjoint Z/4 → Z/2, 1 ↦ 1
        let f = Hom::new(vec![vec![2]], &g(&[2]), &g(&[4])).unwrap();
        let fd = dual_hom(&f).unwrap();
        assert_eq!(fd.matrix(), &[vec![1]]);
        let (pa, pb) = (DualPairing::new(f.source()), DualPairing::new(f.target()));
        for x in f.source().elements() {
            for c in f.target().elements() {
                let lhs = pb.pair(&f.apply(&x).unwrap(), &c) * (pa.modulus());
                let rhs = pa.pair(&x, &fd.apply(&c).unwrap()) * (pb.modulus());
                assert_eq!(lhs % (pa.modulus() * pb.modulus()), rhs % (pa.modulus() * pb.modulus()));
            }
        }
    }

    #[test]
    fn annihilators() {
        let a = g(&[4]);
        let p = DualPairing::new(&a);
        let h = AbSubgroup::generated(&a, &[vec![2]]).unwrap();
        let ann = annihilator(&h, &p).unwrap();
        assert_eq!(ann, h);
        assert_eq!(ann.order(), &big(2));
        assert!(annihilator(&AbSubgroup::trivial(&a), &p).unwrap().is_whole());
        assert!(annihilator(&AbSubgroup::whole(&a), &p).unwrap().is_trivial());
    }

    #[test]
    fn duality_facts() {
        let a = g(&[8]);
        let f = Hom::scalar(&a, 2);
        let h = AbSubgroup::generated(&a, &[vec![4]]).unwrap();
        let l = AbSubgroup::generated(&a, &[vec![2]]).unwrap();
        let facts = verify_duality_facts(&f, &h, &l, 1).unwrap();
        assert!(facts.all_hold(), "{facts:?}");
        let id = Hom::identity(&g(&[2, 6]));
        let h = AbSubgroup::generated(id.source(), &[vec![1, 3]]).unwrap();
        assert!(verify_duality_facts(&id, &h, &AbSubgroup::whole(id.source()), 3).unwrap().all_hold());
        assert!(verify_duality_facts(&f, &l, &h, 1).is_err());
    }

    fn shift_blocks() -> AbelianBlocks {
        AbelianBlocks::uniform(IndexSet::Naturals, g(&[2]))
    }

    fn e0(blocks: &AbelianBlocks) -> FiniteSubgroup {
        let gens: Vec<SparseVec> = vec![vec![(0, vec![1])]];
        FiniteSubgroup::Abelian(WindowSubgroup::from_generators(blocks, &gens).unwrap())
    }

    #[test]
    fn bridge_of_the_right_shift_is_the_left_shift() {
        let blocks = shift_blocks();
        let beta = BandedEndo::abelian(blocks.clone(), Band::shift(&blocks, 1)).unwrap();
        let b = bridge(&beta, &e0(&blocks)).unwrap();
        assert_eq!(b.endo, RowFiniteEndo::shift(&b.group, 1));
        assert_eq!(b.cylinder, CylinderSubgroup::pinned(&b.group, Window::single(0)));
        let id = BandedEndo::abelian(blocks.clone(), Band::identity(&blocks)).unwrap();
        assert_eq!(bridge(&id, &e0(&blocks)).unwrap().endo, RowFiniteEndo::identity(&b.group));
        let zero = BandedEndo::abelian(blocks.clone(), Band::zero(&blocks)).unwrap();
        assert_eq!(bridge(&zero, &e0(&blocks)).unwrap().endo, RowFiniteEndo::zero(&b.group));
    }

    #[test]
    fn bridge_examples() {
        let p = StabilizationPolicy::default();
        let blocks = shift_blocks();
        for (band, expected) in [
            (Band::shift(&blocks, 1), EntropyValue::log_int(big(2))),
            (Band::zero(&blocks), EntropyValue::zero()),
            (Band::identity(&blocks), EntropyValue::zero()),
        ] {
            let phi = BandedEndo::abelian(blocks.clone(), band).unwrap();
            let check = weiss_bridge_check(&phi, &[e0(&blocks)], &p).unwrap();
            assert!(check.holds(), "{check:?}");
            assert_eq!(check.h_alg, expected);
            assert_eq!(check.h_top, expected);
        }
    }

    fn arb_facts() -> impl Strategy<Value = (Vec<i64>, IntMatrix, Vec<Vec<i64>>, Vec<Vec<i64>>)> {
        prop::sample::select(vec![vec![2, 2], vec![4], vec![2, 4], vec![3, 9], vec![2, 6], vec![8]]).prop_flat_map(|m| {
            let k = m.len();
            let mx = *m.iter().max().unwrap();
            (
                Just(m),
                prop::collection::vec(prop::collection::vec(0..mx, k), k),
                prop::collection::vec(prop::collection::vec(0..mx, k), 0..=2),
                prop::collection::vec(prop::collection::vec(0..mx, k), 0..=2),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn finite_duality(( m, raw, hg, lg) in arb_facts()) {
            let a = g(&m);
            // force validity by scaling each entry to a multiple of e/gcd(d, e)
            let matrix: IntMatrix = raw
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(c, &x)| x * (m[r] / m[r].gcd(&m[c])))
                        .collect()
                })
                .collect();
            let f = Hom::new(matrix, &a, &a).unwrap();
            let h = AbSubgroup::generated(&a, &hg).unwrap();
            let l = h.with_generators(&lg).unwrap();
            let p = DualPairing::new(&a);
            let ann = annihilator(&h, &p).unwrap();
            let brute = brute_annihilator(&h, &p);
            prop_assert_eq!(ann.order(), &BigUint::from(brute.len()));
            for c in &brute {
                prop_assert!(ann.contains(c).unwrap());
            }
            for n in 0..3 {
                let facts = verify_duality_facts(&f, &h, &l, n).unwrap();
                prop_assert!(facts.all_hold(), "{:?}", facts);
            }
            let fd = dual_hom(&f).unwrap();
            for x in a.elements() {
                for c in a.elements() {
                    prop_assert_eq!(p.pair(&f.apply(&x).unwrap(), &c), p.pair(&x, &fd.apply(&c).unwrap()));
                }
            }
        }

        #[test]
        fn bridge_matches_on_random_bands(
            d in prop::sample::select(vec![2i64, 3, 4]),
            s in -1i64..=1,
            rule in prop::collection::vec(0i64..4, 1..=2),
            gens in prop::collection::vec((0i64..3, 0i64..4), 1..=2),
        ) {
            let blocks = AbelianBlocks::uniform(IndexSet::Naturals, g(&[d]));
            let band = Band {
                offset: s,
                width: rule.len(),
                rules: Periodic::constant(rule.iter().map(|&c| vec![vec![c % d]]).collect()),
            };
            let phi = BandedEndo::abelian(blocks.clone(), band).unwrap();
            let gens: Vec<SparseVec> = gens.iter().map(|&(i, c)| vec![(i, vec![c % d])]).collect();
            let f = FiniteSubgroup::Abelian(WindowSubgroup::from_generators(&blocks, &gens).unwrap());
            match weiss_bridge_check(&phi, &[f], &StabilizationPolicy::default()) {
                Ok(check) => prop_assert!(check.holds(), "{:?}", check),
                Err(Error::Inconclusive { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }
    }
}
