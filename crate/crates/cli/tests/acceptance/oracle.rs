//! Reference computations by enumeration. Nothing here touches the
//! library's normal forms; bands are read as plain data.

use std::collections::{BTreeSet, HashSet};

use entropy_core::blocks::{Band, IndexSet};
use entropy_core::discrete::SparseVec;

pub type Vector = Vec<i64>;

/// Every element of `Z/m_1 ⊕ … ⊕ Z/m_r`.
pub fn elements(moduli: &[i64]) -> Vec<Vector> {
    let mut out = vec![Vec::new()];
    for &m in moduli {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn add(moduli: &[i64], a: &[i64], b: &[i64]) -> Vector {
    a.iter().zip(b).zip(moduli).map(|((x, y), m)| (x + y).rem_euclid(*m)).collect()
}

/// `x ↦ Mx` with rows indexed by target coordinates.
pub fn apply(target: &[i64], matrix: &[Vec<i64>], x: &[i64]) -> Vector {
    matrix
        .iter()
        .zip(target)
        .map(|(row, m)| row.iter().zip(x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(*m))
        .collect()
}

/// Subgroup generated by `gens`, or `None` past `cap` elements.
pub fn closure(moduli: &[i64], gens: &[Vector], cap: usize) -> Option<BTreeSet<Vector>> {
    let zero = vec![0; moduli.len()];
    let mut seen = BTreeSet::from([zero.clone()]);
    let mut todo = vec![zero];
    while let Some(x) = todo.pop() {
        for g in gens {
            let y = add(moduli, &x, g);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return None;
                }
                todo.push(y);
            }
        }
    }
    Some(seen)
}

/// Dense vectors over `[lo, hi)` with `k` coordinates in `Z/d` per block.
#[derive(Clone, Copy)]
struct Strip {
    lo: i64,
    hi: i64,
    k: usize,
    d: i64,
}

impl Strip {
    fn len(&self) -> usize {
        (self.hi - self.lo) as usize * self.k
    }

    fn at(&self, i: i64) -> std::ops::Range<usize> {
        let p = (i - self.lo) as usize * self.k;
        p..p + self.k
    }

    fn moduli(&self) -> Vec<i64> {
        vec![self.d; self.len()]
    }
}

fn matvec(d: i64, m: &[Vec<i64>], x: &[i64]) -> Vector {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(d)).collect()
}

/// `|T_n(φ, F)|` for `n = 1..=n_max`, reading `rules[i][t]` as a map from
/// block `i` to block `i + offset + t`. `None` when a group exceeds `cap`.
pub fn trajectory_orders(
    d: i64,
    k: usize,
    index_set: IndexSet,
    band: &Band,
    f: &[SparseVec],
    n_max: usize,
    cap: usize,
) -> Option<Vec<usize>> {
    let reach = band.offset.abs() + band.width as i64;
    let lo = f.iter().flatten().map(|(i, _)| *i).min().unwrap_or(0);
    let hi = f.iter().flatten().map(|(i, _)| *i).max().unwrap_or(0) + 1;
    let s = Strip {
        lo: lo - reach * n_max as i64,
        hi: hi + reach * n_max as i64,
        k,
        d,
    };
    let dense = |x: &SparseVec| {
        let mut v = vec![0; s.len()];
        for (i, c) in x {
            for (slot, val) in s.at(*i).zip(c) {
                v[slot] = (v[slot] + val).rem_euclid(d);
            }
        }
        v
    };
    let step = |x: &Vector| {
        let mut y = vec![0; s.len()];
        for i in s.lo..s.hi {
            let src = &x[s.at(i)];
            if src.iter().all(|&c| c == 0) {
                continue;
            }
            for t in 0..band.width {
                let j = i + band.offset + t as i64;
                if !index_set.contains(j) {
                    continue;
                }
                assert!(j >= s.lo && j < s.hi, "oracle strip too narrow");
                let img = matvec(d, &band.rules.get(i)[t], src);
                for (slot, v) in s.at(j).zip(img) {
                    y[slot] = (y[slot] + v).rem_euclid(d);
                }
            }
        }
        y
    };
    let moduli = s.moduli();
    let mut layer: Vec<Vector> = f.iter().map(dense).collect();
    let mut gens = Vec::new();
    let mut out = Vec::new();
    for _ in 0..n_max {
        gens.extend(layer.iter().cloned());
        out.push(closure(&moduli, &gens, cap)?.len());
        layer = layer.iter().map(step).collect();
    }
    Some(out)
}

/// `[K : C_n(ψ, U)]` for `n = 1..=n_max`, reading `rules[j][t]` as a map
/// from block `j + offset + t` to block `j`, with `U` the set of points
/// whose restriction to `[u_lo, u_hi)` lies in `⟨core⟩`. The index is the
/// number of distinct tuples `(ψ^m x |_U mod core)_{m<n}`, enumerated over
/// every `x` on the window the tuple depends on.
#[allow(clippy::too_many_arguments)]
pub fn cotrajectory_indices(
    d: i64,
    k: usize,
    index_set: IndexSet,
    band: &Band,
    window: (i64, i64),
    core: &[Vector],
    n_max: usize,
    cap: usize,
) -> Option<Vec<usize>> {
    let (u_lo, u_hi) = window;
    let u = Strip { lo: u_lo, hi: u_hi, k, d };
    let core = closure(&u.moduli(), core, cap)?;
    let rep = |v: &Vector| core.iter().map(|c| add(&u.moduli(), v, c)).min().unwrap();
    let s = band.offset;
    let w = band.width as i64;
    let mut out = Vec::new();
    for n in 1..=n_max as i64 {
        let reach = Strip {
            lo: u_lo + (n - 1) * s.min(0),
            hi: u_hi + (n - 1) * (s + w - 1).max(0),
            k,
            d,
        };
        let live: Vec<i64> = (reach.lo..reach.hi).filter(|&i| index_set.contains(i)).collect();
        let free = live.len() * k;
        if (d as f64).powi(free as i32) > cap as f64 {
            return None;
        }
        let mut seen: HashSet<Vec<Vector>> = HashSet::new();
        for x in elements(&vec![d; free]) {
            let mut cur: Vec<Option<Vector>> = vec![None; (reach.hi - reach.lo) as usize];
            for (p, i) in live.iter().enumerate() {
                cur[(i - reach.lo) as usize] = Some(x[p * k..(p + 1) * k].to_vec());
            }
            let mut key = Vec::with_capacity(n as usize);
            for m in 0..n {
                let mut on_u = Vec::with_capacity(u.len());
                for i in u_lo..u_hi {
                    on_u.extend(cur[(i - reach.lo) as usize].clone().expect("dependency window covers U"));
                }
                key.push(rep(&on_u));
                if m + 1 == n {
                    break;
                }
                let next: Vec<Option<Vector>> = (reach.lo..reach.hi)
                    .map(|j| {
                        if !index_set.contains(j) {
                            return None;
                        }
                        let mut acc = vec![0; k];
                        for t in 0..w {
                            let src = j + s + t;
                            if !index_set.contains(src) {
                                continue;
                            }
                            if src < reach.lo || src >= reach.hi {
                                return None;
                            }
                            let v = cur[(src - reach.lo) as usize].as_ref()?;
                            let img = matvec(d, &band.rules.get(j)[t as usize], v);
                            acc = acc.iter().zip(img).map(|(a, b)| (a + b).rem_euclid(d)).collect();
                        }
                        Some(acc)
                    })
                    .collect();
                cur = next;
            }
            seen.insert(key);
        }
        out.push(seen.len());
    }
    Some(out)
}

/// Permutations composed as `(p·q)(x) = p(q(x))`.
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x] = i;
    }
    out
}

pub fn perm_closure(gens: &[Vec<usize>], k: usize) -> BTreeSet<Vec<usize>> {
    let id: Vec<usize> = (0..k).collect();
    let mut seen = BTreeSet::from([id.clone()]);
    let mut todo = vec![id];
    while let Some(x) = todo.pop() {
        for g in gens {
            let y = compose(&x, g);
            if seen.insert(y.clone()) {
                todo.push(y);
            }
        }
    }
    seen
}

/// `∩_g g H g^{-1}`.
pub fn perm_heart(whole: &BTreeSet<Vec<usize>>, h: &BTreeSet<Vec<usize>>) -> BTreeSet<Vec<usize>> {
    h.iter()
        .filter(|x| whole.iter().all(|g| h.contains(&compose(&compose(g, x), &invert(g)))))
        .cloned()
        .collect()
}
