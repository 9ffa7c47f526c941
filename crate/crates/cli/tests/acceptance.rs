//! The acceptance suite: one PASS/FAIL line per criterion, non-zero exit
//! if any fails.

#[path = "acceptance/oracle.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use entropy_core::blocks::{AbelianBlocks, Band, IndexSet, Periodic, Window};
use entropy_core::depth::depth_report;
use entropy_core::discrete::{algebraic_entropy, yuzvinski_gap, BandedEndo, FiniteSubgroup, SparseVec, WindowSubgroup};
use entropy_core::duality::{annihilator, annihilator_cylinder, bridge, dual_hom, verify_duality_facts, weiss_bridge_check, DualPairing};
use entropy_core::finabel::{subgroup_combine, subgroup_index, AbSubgroup, CombineOp, FiniteAbelianGroup, Hom};
use entropy_core::gengroup::{closure, FiniteGroup};
use entropy_core::profinite::{kernel_cokernel_orders, log_law_check, CylinderSubgroup, ProGroup, RowFiniteEndo};
use entropy_core::{EntropyValue, Error, Method, StabilizationPolicy};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn policy() -> StabilizationPolicy {
    StabilizationPolicy::default()
}

fn within(start: Instant, limit: u64, what: &str) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(limit), "{what} took {t:.1?}, limit {limit}s");
    Ok(t)
}

/// `(Z/d)^k` blocks, a random band of width at most 3.
#[derive(Clone, Debug)]
struct Sample {
    d: i64,
    k: usize,
    index_set: IndexSet,
    band: Band,
}

impl Sample {
    fn random(r: &mut ChaCha8Rng, ds: &[i64], max_k: usize) -> Self {
        let d = *ds.choose(r).unwrap();
        let k = r.gen_range(1..=max_k);
        let index_set = if r.gen_bool(0.5) { IndexSet::Naturals } else { IndexSet::Integers };
        let width = r.gen_range(1..=3);
        let period = r.gen_range(1..=2);
        let cycle = (0..period)
            .map(|_| {
                (0..width)
                    .map(|_| (0..k).map(|_| (0..k).map(|_| r.gen_range(0..d)).collect()).collect())
                    .collect()
            })
            .collect();
        Sample {
            d,
            k,
            index_set,
            band: Band {
                offset: r.gen_range(-1..=1),
                width,
                rules: Periodic::cycle(cycle),
            },
        }
    }

    fn block(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![self.d; self.k]).unwrap()
    }

    fn first(&self) -> i64 {
        match self.index_set {
            IndexSet::Integers => -1,
            _ => 0,
        }
    }

    fn discrete(&self) -> (AbelianBlocks, BandedEndo) {
        let blocks = AbelianBlocks::uniform(self.index_set, self.block());
        let phi = BandedEndo::abelian(blocks.clone(), self.band.clone()).unwrap();
        (blocks, phi)
    }

    fn random_f(&self, r: &mut ChaCha8Rng) -> Vec<SparseVec> {
        (0..r.gen_range(1..=2))
            .map(|_| {
                (0..r.gen_range(1..=2))
                    .map(|_| (self.first() + r.gen_range(0..3), (0..self.k).map(|_| r.gen_range(0..self.d)).collect()))
                    .collect()
            })
            .collect()
    }
}

fn divides_chain(xs: &[BigUint], up: bool) -> bool {
    xs.windows(2).all(|p| if up { p[1].is_multiple_of(&p[0]) } else { p[0].is_multiple_of(&p[1]) })
}

fn algebraic_formulas() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(0xa1);
    let (total, mut certified, mut oracle_checked) = (120, 0, 0);
    for case in 0..total {
        let s = Sample::random(&mut r, &[2, 3, 4, 8], 3);
        let (blocks, phi) = s.discrete();
        let gens = s.random_f(&mut r);
        let f = FiniteSubgroup::Abelian(WindowSubgroup::from_generators(&blocks, &gens).map_err(fail)?);
        let report = phi.trajectory_limits(&f, &policy()).map_err(fail)?;
        ensure!(report.steps.iter().all(|st| st.identities_hold), "case {case}: step identities fail for {s:?}");
        ensure!(divides_chain(&report.orders(), true), "case {case}: |T_n| does not divide |T_(n+1)|");
        if let Some(orders) = oracle::trajectory_orders(s.d, s.k, s.index_set, &s.band, &gens, 3, 1 << 14) {
            oracle_checked += 1;
            for (n, want) in orders.iter().enumerate() {
                let got = phi.trajectory(&f, n + 1).map_err(fail)?.order();
                ensure!(got == big(*want as u64), "case {case}: |T_{}| = {got}, enumeration gives {want}", n + 1);
            }
        }
        if report.certified {
            certified += 1;
            let alpha = report.alpha.clone().unwrap();
            let free = report.limitfree_entropy().map_err(fail)?;
            ensure!(free.integer_argument() == Some(alpha.clone()), "case {case}: limit-free gives {free}, alpha {alpha}");
            ensure!(report.limit_entropy().map_err(fail)? == free, "case {case}: methods differ");
        }
    }
    let t = within(start, 60, "the run")?;
    ensure!(certified * 10 >= total * 9, "only {certified}/{total} certified");
    Ok(format!("{total} instances, {certified} certified, {oracle_checked} checked by enumeration, {t:.1?}"))
}

fn topological_formulas() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(0xa2);
    let (total, mut certified, mut surjective, mut steps, mut oracle_checked) = (120, 0, 0, 0, 0);
    for case in 0..total {
        let s = Sample::random(&mut r, &[2, 3, 4, 8], 3);
        let k = ProGroup::uniform(s.index_set, s.block());
        let psi = RowFiniteEndo::new(&k, s.band.clone()).map_err(fail)?;
        let len = r.gen_range(1..=2);
        let w = Window::new(s.first(), s.first() + len);
        let core: Vec<Vec<i64>> = (0..r.gen_range(0..=1))
            .map(|_| (0..s.k * len as usize).map(|_| r.gen_range(0..s.d)).collect())
            .collect();
        let u = CylinderSubgroup::from_generators(&k, w, &core).map_err(fail)?;
        let report = psi.cotrajectory_limits(&u, &policy()).map_err(fail)?;
        steps += report.steps.len();
        ensure!(report.steps.iter().all(|st| st.identities_hold), "case {case}: step identities fail");
        ensure!(divides_chain(&report.indices(), true), "case {case}: c_n does not divide c_(n+1): {:?}", report.indices());
        ensure!(divides_chain(&report.alphas(), false), "case {case}: alpha_(n+1) does not divide alpha_n: {:?}", report.alphas());
        if let Some(indices) = oracle::cotrajectory_indices(s.d, s.k, s.index_set, &s.band, (w.lo, w.hi), &core, 3, 1 << 13) {
            oracle_checked += 1;
            for (n, want) in indices.iter().enumerate() {
                let got = psi.cotrajectory(&u, n + 1).map_err(fail)?.index();
                ensure!(got == big(*want as u64), "case {case}: [K:C_{}] = {got}, enumeration gives {want}", n + 1);
            }
        }
        if !report.certified {
            continue;
        }
        certified += 1;
        let limit = report.limit_entropy().map_err(fail)?;
        ensure!(report.limitfree_entropy().map_err(fail)? == limit, "case {case}: limit-free differs from limit");
        if psi.check_surjective(psi.surjectivity_probe()).is_ok() {
            surjective += 1;
            ensure!(report.surjective_entropy().map_err(fail)? == limit, "case {case}: onto formula differs");
        }
    }
    Ok(format!(
        "{total} instances, {certified} certified ({surjective} onto), {steps} divisibility steps, {oracle_checked} checked by enumeration"
    ))
}

fn zero_endomorphism_gap() -> Outcome {
    for m in [2i64, 3, 4, 8, 16] {
        let g = FiniteAbelianGroup::cyclic(m).unwrap();
        let blocks = AbelianBlocks::uniform(IndexSet::Naturals, g);
        let gens: Vec<SparseVec> = vec![vec![(0, vec![1])]];
        let f = FiniteSubgroup::Abelian(WindowSubgroup::from_generators(&blocks, &gens).map_err(fail)?);
        let zero = BandedEndo::abelian(blocks.clone(), Band::zero(&blocks)).map_err(fail)?;
        let gap = yuzvinski_gap(&zero, &f, &policy()).map_err(fail)?;
        ensure!(gap == EntropyValue::log_int(m as u32), "m = {m}: gap {gap}");
        for method in [Method::Limit, Method::LimitFree] {
            let h = algebraic_entropy(&zero, &f, method, &policy()).map_err(fail)?;
            ensure!(h.is_zero(), "m = {m}: entropy {h} by {method:?}");
        }
        let orders = oracle::trajectory_orders(m, 1, IndexSet::Naturals, &Band::zero(&blocks), &gens, 4, 1 << 12).unwrap();
        ensure!(orders.iter().all(|&o| o == m as usize), "m = {m}: enumeration gives {orders:?}");
        let shift = BandedEndo::abelian(blocks.clone(), Band::shift(&blocks, 1)).map_err(fail)?;
        let wider: Vec<SparseVec> = vec![vec![(0, vec![1])], vec![(1, vec![1])]];
        for family in [&gens, &wider] {
            let f = FiniteSubgroup::Abelian(WindowSubgroup::from_generators(&blocks, family).map_err(fail)?);
            let gap = yuzvinski_gap(&shift, &f, &policy()).map_err(fail)?;
            let h = algebraic_entropy(&shift, &f, Method::Limit, &policy()).map_err(fail)?;
            ensure!(gap == h, "shift on Z/{m}: gap {gap} against entropy {h}");
            ensure!(h == EntropyValue::log_int(m as u32), "shift on Z/{m}: entropy {h}");
        }
    }
    Ok("zero maps give log m with entropy 0, shifts show no gap".into())
}

fn bridge_identity() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(0xa4);
    let (mut done, mut inconclusive, mut cylinders) = (0, 0, 0);
    while done < 60 && done + inconclusive < 90 {
        let s = Sample::random(&mut r, &[2, 3, 4, 8], 2);
        let (blocks, phi) = s.discrete();
        let gens = s.random_f(&mut r);
        let f = FiniteSubgroup::Abelian(WindowSubgroup::from_generators(&blocks, &gens).map_err(fail)?);
        let check = match weiss_bridge_check(&phi, std::slice::from_ref(&f), &policy()) {
            Ok(c) => c,
            Err(Error::Inconclusive { .. }) => {
                inconclusive += 1;
                continue;
            }
            Err(e) => return Err(format!("{s:?}: {e}")),
        };
        ensure!(check.holds(), "{s:?}: {check:?}");
        ensure!(check.h_alg == check.h_top, "{s:?}: {} against {}", check.h_alg, check.h_top);
        let b = bridge(&phi, &f).map_err(fail)?;
        for n in 1..=8 {
            let FiniteSubgroup::Abelian(t) = phi.trajectory(&f, n).map_err(fail)? else {
                unreachable!()
            };
            let c = b.endo.cotrajectory(&b.cylinder, n).map_err(fail)?;
            ensure!(annihilator_cylinder(&b.group, &t).map_err(fail)? == c, "{s:?}: annihilator of T_{n} is not C_{n}");
            ensure!(c.index() == t.order(), "{s:?}: [K:C_{n}] = {} but |T_{n}| = {}", c.index(), t.order());
            cylinders += 1;
        }
        done += 1;
    }
    let t = within(start, 60, "the run")?;
    ensure!(done >= 50, "only {done} instances completed ({inconclusive} inconclusive)");
    Ok(format!("{done} instances agree, {cylinders} cylinder pairs equal, {inconclusive} inconclusive skipped, {t:.1?}"))
}

/// Invariant factors with product at most `bound`.
fn random_group(r: &mut ChaCha8Rng, bound: i64) -> Vec<i64> {
    let pool = [2i64, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 25, 27, 32];
    loop {
        let m: Vec<i64> = (0..r.gen_range(1..=3)).map(|_| *pool.choose(r).unwrap()).collect();
        if m.iter().product::<i64>() <= bound {
            return m;
        }
    }
}

/// A random matrix that defines an endomorphism: entry `(i, j)` is a
/// multiple of `m_i / gcd(m_i, m_j)`.
fn random_endo(r: &mut ChaCha8Rng, m: &[i64]) -> Vec<Vec<i64>> {
    (0..m.len())
        .map(|i| (0..m.len()).map(|j| r.gen_range(0..m[i]) * (m[i] / m[i].gcd(&m[j]))).collect())
        .collect()
}

fn random_elems(r: &mut ChaCha8Rng, m: &[i64], count: usize) -> Vec<Vec<i64>> {
    (0..count).map(|_| m.iter().map(|&d| r.gen_range(0..d)).collect()).collect()
}

fn duality_suite() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(0xa5);
    let (mut brute, mut facts) = (0, 0);
    for case in 0..520 {
        let m = random_group(&mut r, 10_000);
        let a = FiniteAbelianGroup::new(m.clone()).unwrap();
        let f = Hom::new(random_endo(&mut r, &m), &a, &a).map_err(fail)?;
        let hg = r.gen_range(0..=2);
        let h = AbSubgroup::generated(&a, random_elems(&mut r, &m, hg)).map_err(fail)?;
        let lg = r.gen_range(0..=2);
        let l = h.with_generators(random_elems(&mut r, &m, lg)).map_err(fail)?;
        let n = r.gen_range(0..=3);
        let got = verify_duality_facts(&f, &h, &l, n).map_err(fail)?;
        ensure!(got.all_hold(), "case {case} on {m:?}: {got:?}");
        facts += 1;
        let p = DualPairing::new(&a);
        let ann = annihilator(&h, &p).map_err(fail)?;
        ensure!(ann.order() * h.order() == a.order(), "case {case}: |H^perp| |H| != |A| on {m:?}");
        for chi in ann.generators() {
            for x in h.generators() {
                ensure!(p.pair(&x, &chi) == 0, "case {case}: annihilator generator pairs non-trivially");
            }
        }
        if a.order() <= big(400) {
            brute += 1;
            let all = oracle::elements(&m);
            let in_h: Vec<&Vec<i64>> = all.iter().filter(|x| h.contains(x).unwrap()).collect();
            let want: BTreeSet<&Vec<i64>> = all.iter().filter(|c| in_h.iter().all(|x| p.pair(x, c) == 0)).collect();
            for c in &all {
                ensure!(ann.contains(c).unwrap() == want.contains(c), "case {case}: annihilator membership of {c:?}");
            }
            let fd = dual_hom(&f).map_err(fail)?;
            for x in all.iter().step_by(7) {
                for c in all.iter().step_by(5) {
                    ensure!(
                        p.pair(&oracle::apply(&m, f.matrix(), x), c) == p.pair(x, &fd.apply(c).unwrap()),
                        "case {case}: dual map is not adjoint"
                    );
                }
            }
        }
    }
    Ok(format!("{facts} random suites hold, {brute} checked by enumeration"))
}

fn full_shift_depth() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for moduli in [vec![2i64], vec![3], vec![4], vec![2, 2], vec![6]] {
        let block = FiniteAbelianGroup::new(moduli.clone()).unwrap();
        let size = moduli.iter().product::<i64>() as u64;
        let k = ProGroup::uniform(IndexSet::Integers, block);
        let candidates: Vec<CylinderSubgroup> = [(0, 1), (0, 2), (-1, 1), (0, 3)]
            .into_iter()
            .map(|(lo, hi)| CylinderSubgroup::pinned(&k, Window::new(lo, hi)))
            .collect();
        for by in [1, -1] {
            let psi = RowFiniteEndo::shift(&k, by);
            let rep = depth_report(&psi, &candidates, &policy()).map_err(fail)?;
            let agreeing: Vec<_> = rep.candidates.iter().filter_map(|c| c.depth()).collect();
            ensure!(agreeing.len() >= 3, "{moduli:?}: only {} antistable candidates", agreeing.len());
            ensure!(agreeing.iter().all(|d| **d == big(size)), "{moduli:?}: depths {agreeing:?}");
            ensure!(rep.depth == big(size), "{moduli:?}: depth {}", rep.depth);
            ensure!(rep.inverse_depth == rep.depth, "{moduli:?}: inverse depth {}", rep.inverse_depth);
            ensure!(rep.h_top == EntropyValue::log_int(size), "{moduli:?}: h_top {}", rep.h_top);
            ensure!(rep.independent && rep.symmetric && rep.h_top_is_log_depth, "{moduli:?}: {rep:?}");
        }
        lines.push(format!("{moduli:?}"));
    }
    let t = within(start, 10, "the run")?;
    Ok(format!("depth = |F| for blocks {} in both directions, {t:.1?}", lines.join(", ")))
}

fn non_surjective_shift() -> Outcome {
    let k = ProGroup::uniform(IndexSet::Naturals, FiniteAbelianGroup::cyclic(2).unwrap());
    let u = CylinderSubgroup::pinned(&k, Window::new(0, 1));
    let right = RowFiniteEndo::shift(&k, -1);
    ensure!(right.check_surjective(right.surjectivity_probe()).is_err(), "right shift reported onto");
    let rep = right.cotrajectory_limits(&u, &policy()).map_err(fail)?;
    ensure!(rep.certified, "right shift not certified");
    ensure!(rep.psi_inv_c_mod_c == Some(big(2)), "|psi^-1(C)/C| = {:?}", rep.psi_inv_c_mod_c);
    ensure!(rep.k_mod_l == Some(big(2)), "[K : Im psi + C] = {:?}", rep.k_mod_l);
    ensure!(rep.limitfree_entropy().map_err(fail)?.is_zero(), "limit-free entropy not 0");
    ensure!(rep.limit_entropy().map_err(fail)?.is_zero(), "limit entropy not 0");
    let band = right.band().clone();
    let indices = oracle::cotrajectory_indices(2, 1, IndexSet::Naturals, &band, (0, 1), &[], 5, 1 << 10).unwrap();
    ensure!(indices == vec![2; 5], "enumeration gives {indices:?}");

    let left = RowFiniteEndo::shift(&k, 1);
    let rep = left.cotrajectory_limits(&u, &policy()).map_err(fail)?;
    ensure!(rep.limit.is_none(), "left shift cotrajectory became open");
    let indices = oracle::cotrajectory_indices(2, 1, IndexSet::Naturals, left.band(), (0, 1), &[], 5, 1 << 10).unwrap();
    ensure!(indices == vec![2, 4, 8, 16, 32], "enumeration gives {indices:?}");
    let kc = kernel_cokernel_orders(&left, &policy()).map_err(fail)?;
    let (ker, coker) = (kc.kernel.ok_or("kernel order undetermined")?, kc.cokernel.ok_or("cokernel order undetermined")?);
    ensure!(ker == big(2) && coker == big(1), "left shift: kernel {ker}, cokernel {coker}");
    Ok(format!("right shift: log 2 - log 2 = 0 = limit; left shift: |ker| = {ker} > |coker| = {coker}"))
}

fn logarithmic_law() -> Outcome {
    let cases: [(IndexSet, Vec<i64>, i64, (i64, i64)); 5] = [
        (IndexSet::Naturals, vec![2], 1, (0, 1)),
        (IndexSet::Integers, vec![3], 1, (0, 1)),
        (IndexSet::Integers, vec![2], -1, (0, 2)),
        (IndexSet::Naturals, vec![4], 2, (0, 2)),
        (IndexSet::Integers, vec![2, 2], 1, (-1, 1)),
    ];
    let mut checked = 0;
    for (index_set, moduli, by, (lo, hi)) in cases {
        let block = FiniteAbelianGroup::new(moduli.clone()).unwrap();
        let expect = block.order().pow(by.unsigned_abs() as u32);
        let k = ProGroup::uniform(index_set, block);
        let psi = RowFiniteEndo::shift(&k, by);
        let u = CylinderSubgroup::pinned(&k, Window::new(lo, hi));
        for power in 2..=4u32 {
            let rec = log_law_check(&psi, &u, power, &policy()).map_err(fail)?;
            ensure!(rec.base_index == expect, "{moduli:?} shift {by}: base index {}", rec.base_index);
            ensure!(rec.power_index == rec.base_index.pow(power), "{moduli:?} shift {by}, k = {power}: {rec:?}");
            ensure!(rec.index_law_holds, "{moduli:?} shift {by}, k = {power}: {rec:?}");
            checked += 1;
        }
    }
    Ok(format!("{checked} index identities for k = 2, 3, 4"))
}

/// Every abelian group of order `n` as elementary divisors.
fn abelian_groups(n: i64) -> Vec<Vec<i64>> {
    fn partitions(e: u32, max: u32) -> Vec<Vec<u32>> {
        if e == 0 {
            return vec![vec![]];
        }
        (1..=e.min(max))
            .rev()
            .flat_map(|first| {
                partitions(e - first, first).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }
    let mut out = vec![vec![]];
    let mut rest = n;
    let mut p = 2;
    while rest > 1 {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            let options: Vec<Vec<i64>> =
                partitions(e, e).into_iter().map(|part| part.into_iter().map(|x| p.pow(x)).collect()).collect();
            out = out
                .into_iter()
                .flat_map(|base: Vec<i64>| {
                    options.iter().map(move |o| {
                        let mut v = base.clone();
                        v.extend(o);
                        v
                    })
                })
                .collect();
        }
        p += 1;
    }
    out
}

fn set_of(h: &AbSubgroup, all: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    all.iter().filter(|x| h.contains(x).unwrap()).cloned().collect()
}

fn abelian_oracle() -> Result<usize, String> {
    let mut r = ChaCha8Rng::seed_from_u64(0xa9);
    let mut groups = 0;
    for n in 1..=256 {
        for m in abelian_groups(n) {
            groups += 1;
            let a = FiniteAbelianGroup::new(m.clone()).unwrap();
            ensure!(a.order() == big(n as u64), "{m:?} has order {}", a.order());
            let all = oracle::elements(&m);
            let p = DualPairing::new(&a);
            for trial in 0..3 {
                let (hn, ln) = (r.gen_range(1..=2), r.gen_range(1..=2));
                let (hg, lg) = (random_elems(&mut r, &m, hn), random_elems(&mut r, &m, ln));
                let h = AbSubgroup::generated(&a, &hg).map_err(fail)?;
                let l = AbSubgroup::generated(&a, &lg).map_err(fail)?;
                let bh = oracle::closure(&m, &hg, usize::MAX).unwrap();
                let bl = oracle::closure(&m, &lg, usize::MAX).unwrap();
                let tag = format!("{m:?} trial {trial}");
                ensure!(set_of(&h, &all) == bh && *h.order() == big(bh.len() as u64), "{tag}: generated subgroup");
                let both: Vec<Vec<i64>> = hg.iter().chain(&lg).cloned().collect();
                let sum = subgroup_combine(&h, &l, CombineOp::Sum).map_err(fail)?;
                ensure!(set_of(&sum, &all) == oracle::closure(&m, &both, usize::MAX).unwrap(), "{tag}: sum");
                let meet = subgroup_combine(&h, &l, CombineOp::Intersect).map_err(fail)?;
                let bmeet: BTreeSet<Vec<i64>> = bh.intersection(&bl).cloned().collect();
                ensure!(set_of(&meet, &all) == bmeet, "{tag}: intersection");
                let idx = subgroup_index(&meet, &h).map_err(fail)?;
                ensure!(idx == big((bh.len() / bmeet.len()) as u64), "{tag}: index {idx}");
                let matrix = random_endo(&mut r, &m);
                let f = Hom::new(matrix.clone(), &a, &a).map_err(fail)?;
                let img = |x: &Vec<i64>| oracle::apply(&m, &matrix, x);
                let bker: BTreeSet<Vec<i64>> = all.iter().filter(|x| img(x).iter().all(|&c| c == 0)).cloned().collect();
                ensure!(set_of(&f.kernel().map_err(fail)?, &all) == bker, "{tag}: kernel");
                let bimg: BTreeSet<Vec<i64>> = bh.iter().map(img).collect();
                ensure!(set_of(&f.image(&h).map_err(fail)?, &all) == bimg, "{tag}: image");
                let bpre: BTreeSet<Vec<i64>> = all.iter().filter(|x| bl.contains(&img(x))).cloned().collect();
                ensure!(set_of(&f.preimage(&l).map_err(fail)?, &all) == bpre, "{tag}: preimage");
                let bann: BTreeSet<Vec<i64>> = all.iter().filter(|c| bh.iter().all(|x| p.pair(x, c) == 0)).cloned().collect();
                ensure!(set_of(&annihilator(&h, &p).map_err(fail)?, &all) == bann, "{tag}: annihilator");
            }
            if all.len() <= 64 {
                // the pairing itself: bilinear and perfect
                let e = a.exponent();
                for (i, x) in all.iter().enumerate() {
                    let zero_row = all.iter().all(|c| p.pair(x, c) == 0);
                    ensure!(zero_row == x.iter().all(|&v| v == 0), "{m:?}: pairing degenerate at {x:?}");
                    for y in all.iter().step_by(3) {
                        let c = &all[(i * 7 + 1) % all.len()];
                        let lhs = p.pair(&oracle::add(&m, x, y), c);
                        ensure!(lhs == (p.pair(x, c) + p.pair(y, c)).rem_euclid(e), "{m:?}: pairing not additive");
                    }
                }
            }
        }
    }
    Ok(groups)
}

fn permutation_oracle() -> Result<usize, String> {
    let catalog: Vec<(&str, Vec<Vec<usize>>)> = vec![
        ("S3", vec![vec![1, 0, 2], vec![1, 2, 0]]),
        ("D4", vec![vec![1, 2, 3, 0], vec![3, 2, 1, 0]]),
        ("Q8", vec![vec![1, 2, 3, 0, 5, 6, 7, 4], vec![4, 7, 6, 5, 2, 1, 0, 3]]),
        ("A4", vec![vec![1, 2, 0, 3], vec![1, 0, 3, 2]]),
        ("S4", vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]]),
        ("D5", vec![vec![1, 2, 3, 4, 0], vec![4, 3, 2, 1, 0]]),
        ("A5", vec![vec![1, 2, 0, 3, 4], vec![1, 2, 3, 4, 0]]),
        ("S5", vec![vec![1, 0, 2, 3, 4], vec![1, 2, 3, 4, 0]]),
        ("Z2xS3", vec![vec![1, 0, 2, 3, 4], vec![0, 1, 3, 2, 4], vec![0, 1, 3, 4, 2]]),
    ];
    let mut r = ChaCha8Rng::seed_from_u64(0x9e);
    let mut subgroups = 0;
    for (name, gens) in catalog {
        let k = gens[0].len();
        let whole = oracle::perm_closure(&gens, k);
        let g = Arc::new(FiniteGroup::from_permutations(&gens).map_err(fail)?);
        ensure!(g.order() == whole.len(), "{name}: order {}", g.order());
        // element 0 is the identity, the rest in sorted order
        let id: Vec<usize> = (0..k).collect();
        let mut perms = vec![id.clone()];
        perms.extend(whole.iter().filter(|p| **p != id).cloned());
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                ensure!(perms[g.mul(i, j)] == oracle::compose(p, q), "{name}: table disagrees");
            }
        }
        for _ in 0..12 {
            let picks: Vec<usize> = (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..perms.len())).collect();
            let h = closure(&g, &picks);
            let chosen: Vec<Vec<usize>> = picks.iter().map(|&i| perms[i].clone()).collect();
            let bh = oracle::perm_closure(&chosen, k);
            let got: BTreeSet<Vec<usize>> = h.elements().iter().map(|&i| perms[i].clone()).collect();
            ensure!(got == bh, "{name}: closure of {chosen:?}");
            let heart: BTreeSet<Vec<usize>> = h.heart().elements().iter().map(|&i| perms[i].clone()).collect();
            ensure!(heart == oracle::perm_heart(&whole, &bh), "{name}: heart of {chosen:?}");
            ensure!(h.index() * h.order() == g.order(), "{name}: index");
            subgroups += 1;
        }
    }
    Ok(subgroups)
}

fn oracle_equivalence() -> Outcome {
    let groups = abelian_oracle()?;
    let subgroups = permutation_oracle()?;
    Ok(format!("{groups} abelian groups of order <= 256, {subgroups} permutation subgroups, no discrepancies"))
}

fn deterministic_reports() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("instances");
    let mut files: Vec<_> = std::fs::read_dir(&dir).map_err(fail)?.map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut runs = 0;
    for file in &files {
        for cmd in ["alg-entropy", "top-entropy", "bridge-check", "depth", "verify"] {
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_entctl"))
                    .args([cmd, file.to_str().unwrap(), "--format", "json"])
                    .output()
                    .unwrap()
            };
            let (a, b) = (run(), run());
            if a.status.code() == Some(3) {
                continue;
            }
            ensure!(a.stdout == b.stdout && a.status == b.status, "{cmd} {} differs between runs", file.display());
            ensure!(!a.stdout.is_empty(), "{cmd} {} printed nothing", file.display());
            runs += 1;
        }
    }
    Ok(format!("{runs} command/instance pairs byte-identical across two runs over {} instances", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("algebraic formulas agree", algebraic_formulas),
        ("topological formulas agree", topological_formulas),
        ("zero endomorphism gap", zero_endomorphism_gap),
        ("duality bridge", bridge_identity),
        ("finite duality identities", duality_suite),
        ("depth of full shifts", full_shift_depth),
        ("non-surjective shift", non_surjective_shift),
        ("logarithmic law", logarithmic_law),
        ("oracle equivalence", oracle_equivalence),
        ("deterministic reports", deterministic_reports),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
