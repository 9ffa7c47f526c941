use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::group::FiniteAbelianGroup;
use super::hom::Hom;
use super::subgroup::AbSubgroup;
use crate::error::Result;

pub type BigMatrix = Vec<Vec<BigInt>>;

/// `U·M·V = S` with `S` diagonal, `s_1 | s_2 | …`, non-negative, and
/// `U`, `V` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub s: BigMatrix,
    pub u: BigMatrix,
    pub v: BigMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let r = self.s.len().min(self.s.first().map_or(0, |row| row.len()));
        (0..r).map(|i| self.s[i][i].clone()).collect()
    }
}

pub fn to_big(m: &[Vec<i64>]) -> BigMatrix {
    m.iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn identity(n: usize) -> BigMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let inner = b.len();
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// Determinant by fraction-free Bareiss elimination.
pub fn determinant(m: &BigMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = val / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

fn swap_cols(m: &mut BigMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// row[dst] += q * row[src]
fn add_row(m: &mut BigMatrix, dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src_row = m[src].clone();
    for (x, y) in m[dst].iter_mut().zip(src_row) {
        *x += q * y;
    }
}

fn add_col(m: &mut BigMatrix, dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let y = row[src].clone();
        row[dst] += q * y;
    }
}

/// Smith normal form of an integer matrix, with transforms.
pub fn smith_normal_form(m: &[Vec<i64>]) -> SmithForm {
    smith_normal_form_big(to_big(m))
}

pub fn smith_normal_form_big(m: BigMatrix) -> SmithForm {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut s = m;
    let mut u = identity(rows);
    let mut v = identity(cols);
    let r = rows.min(cols);

    let mut t = 0;
    while t < r {
        // smallest non-zero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if s[i][j].is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if s[bi][bj].abs() <= s[i][j].abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        s.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut s, t, pj);
        swap_cols(&mut v, t, pj);

        let mut clean = true;
        for i in t + 1..rows {
            if s[i][t].is_zero() {
                continue;
            }
            let q = -s[i][t].div_floor(&s[t][t]);
            add_row(&mut s, i, t, &q);
            add_row(&mut u, i, t, &q);
            if !s[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if s[t][j].is_zero() {
                continue;
            }
            let q = -s[t][j].div_floor(&s[t][t]);
            add_col(&mut s, j, t, &q);
            add_col(&mut v, j, t, &q);
            if !s[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: fold any offending row into the pivot row
        let mut offending = None;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&s[i][j] % &s[t][t]).is_zero() {
                    offending = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = offending {
            let one = BigInt::one();
            add_row(&mut s, t, i, &one);
            add_row(&mut u, t, i, &one);
            continue;
        }
        if s[t][t].is_negative() {
            for x in s[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    SmithForm { s, u, v }
}

/// Invariant-factor presentation of `A / H`: the quotient group (moduli
/// equal to the non-unit invariant factors) and the projection `A → A/H`.
pub fn quotient(h: &AbSubgroup) -> Result<(FiniteAbelianGroup, Hom)> {
    let a = h.ambient();
    let rows = h.canonical_rows();
    // rows of B span L; P·B·Q = S, so x ↦ x·Q carries L onto ⊕ s_i Z.
    let sf = smith_normal_form(&rows);
    let diag = sf.diagonal();
    let keep: Vec<usize> = (0..diag.len()).filter(|&i| !diag[i].is_one()).collect();
    let moduli: Vec<i64> = keep
        .iter()
        .map(|&i| diag[i].to_i64().expect("invariant factor divides a modulus"))
        .collect();
    let q = FiniteAbelianGroup::new(moduli.clone())?;
    let matrix: Vec<Vec<i64>> = keep
        .iter()
        .zip(&moduli)
        .map(|(&c, &m)| {
            (0..a.rank())
                .map(|x| {
                    let bm = BigInt::from(m);
                    sf.v[x][c]
                        .mod_floor(&bm)
                        .to_i64()
                        .expect("reduced entry fits")
                })
                .collect()
        })
        .collect();
    let proj = Hom::new(matrix, a, &q)?;
    Ok((q, proj))
}
