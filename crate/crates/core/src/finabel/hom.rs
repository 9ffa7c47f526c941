use num_bigint::BigUint;

use super::group::{Elem, FiniteAbelianGroup};
use super::subgroup::AbSubgroup;
use crate::error::{Error, Result};

/// A homomorphism between finite abelian groups, as an integer matrix with
/// one row per target coordinate and one column per source coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hom {
    source: FiniteAbelianGroup,
    target: FiniteAbelianGroup,
    matrix: Vec<Vec<i64>>,
}

impl Hom {
    /// Validates that the matrix respects the relations of `source`:
    /// `d_i · M e_i ∈ D_target Z^m` for every source generator `e_i`.
    pub fn new(
        matrix: Vec<Vec<i64>>,
        source: &FiniteAbelianGroup,
        target: &FiniteAbelianGroup,
    ) -> Result<Self> {
        if matrix.len() != target.rank() {
            return Err(Error::Dimension {
                expected: target.rank(),
                got: matrix.len(),
            });
        }
        for row in &matrix {
            if row.len() != source.rank() {
                return Err(Error::Dimension {
                    expected: source.rank(),
                    got: row.len(),
                });
            }
        }
        let mut matrix = matrix;
        for (r, row) in matrix.iter_mut().enumerate() {
            let e = target.moduli()[r];
            for (i, x) in row.iter_mut().enumerate() {
                *x = x.rem_euclid(e);
                let d = source.moduli()[i];
                if (d as i128 * *x as i128) % e as i128 != 0 {
                    return Err(Error::IllDefinedHom {
                        generator: i,
                        order: d,
                        coordinate: r,
                    });
                }
            }
        }
        Ok(Hom {
            source: source.clone(),
            target: target.clone(),
            matrix,
        })
    }

    pub fn zero(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> Self {
        Hom {
            source: source.clone(),
            target: target.clone(),
            matrix: vec![vec![0; source.rank()]; target.rank()],
        }
    }

    pub fn identity(a: &FiniteAbelianGroup) -> Self {
        let k = a.rank();
        let matrix = (0..k)
            .map(|i| (0..k).map(|j| i64::from(i == j) % a.moduli()[i]).collect())
            .collect();
        Hom {
            source: a.clone(),
            target: a.clone(),
            matrix,
        }
    }

    pub fn scalar(a: &FiniteAbelianGroup, c: i64) -> Self {
        let k = a.rank();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { c.rem_euclid(a.moduli()[i]) } else { 0 })
                    .collect()
            })
            .collect();
        Hom {
            source: a.clone(),
            target: a.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn apply(&self, x: &[i64]) -> Result<Elem> {
        self.source.check_dim(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[i64]) -> Elem {
        self.matrix
            .iter()
            .zip(self.target.moduli())
            .map(|(row, &e)| {
                let s: i128 = row
                    .iter()
                    .zip(x)
                    .filter(|(m, v)| **m != 0 && **v != 0)
                    .map(|(&m, &v)| m as i128 * v as i128)
                    .sum();
                s.rem_euclid(e as i128) as i64
            })
            .collect()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &Hom) -> Result<Hom> {
        if self.target != g.source {
            return Err(Error::AmbientMismatch);
        }
        let cols: Vec<Elem> = (0..self.source.rank())
            .map(|i| g.apply_unchecked(&self.apply_unchecked(&self.source.unit(i))))
            .collect();
        let matrix = (0..g.target.rank())
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        Ok(Hom {
            source: self.source.clone(),
            target: g.target.clone(),
            matrix,
        })
    }

    /// `(f(x), x)` for `x` in a generating set of `H` (or of the whole source).
    fn graph_generators(&self, h: Option<&AbSubgroup>) -> Vec<Elem> {
        let gens: Vec<Elem> = match h {
            Some(h) => h.generators(),
            None => (0..self.source.rank()).map(|i| self.source.unit(i)).collect(),
        };
        gens.into_iter()
            .map(|x| {
                let mut v = self.apply_unchecked(&x);
                v.extend_from_slice(&x);
                v
            })
            .collect()
    }

    pub fn kernel(&self) -> Result<AbSubgroup> {
        let big = self.target.direct_sum(&self.source);
        let graph = AbSubgroup::generated(&big, self.graph_generators(None))?;
        AbSubgroup::generated(&self.source, graph.tail_generators(self.target.rank()))
    }

    /// `ker f ∩ H`.
    pub fn kernel_on(&self, h: &AbSubgroup) -> Result<AbSubgroup> {
        if h.ambient() != &self.source {
            return Err(Error::AmbientMismatch);
        }
        let big = self.target.direct_sum(&self.source);
        let graph = AbSubgroup::generated(&big, self.graph_generators(Some(h)))?;
        AbSubgroup::generated(&self.source, graph.tail_generators(self.target.rank()))
    }

    pub fn image(&self, h: &AbSubgroup) -> Result<AbSubgroup> {
        if h.ambient() != &self.source {
            return Err(Error::AmbientMismatch);
        }
        let imgs: Vec<Elem> = h
            .generators()
            .iter()
            .map(|x| self.apply_unchecked(x))
            .collect();
        AbSubgroup::generated(&self.target, imgs)
    }

    pub fn image_of_whole(&self) -> Result<AbSubgroup> {
        let imgs: Vec<Elem> = (0..self.source.rank())
            .map(|i| self.apply_unchecked(&self.source.unit(i)))
            .collect();
        AbSubgroup::generated(&self.target, imgs)
    }

    /// `f^{-1}(H)`, read off from `{(f(x) + h, x)} ≤ target ⊕ source`.
    pub fn preimage(&self, h: &AbSubgroup) -> Result<AbSubgroup> {
        if h.ambient() != &self.target {
            return Err(Error::AmbientMismatch);
        }
        if h.is_whole() {
            return Ok(AbSubgroup::whole(&self.source));
        }
        let big = self.target.direct_sum(&self.source);
        let mut gens = self.graph_generators(None);
        let pad = self.source.rank();
        for g in h.generators() {
            let mut v = g;
            v.extend(std::iter::repeat_n(0, pad));
            gens.push(v);
        }
        let sub = AbSubgroup::generated(&big, gens)?;
        AbSubgroup::generated(&self.source, sub.tail_generators(self.target.rank()))
    }

    /// Prepares repeated solving of `f(x) = y`.
    pub fn lifter(&self) -> Result<Lifter> {
        let big = self.target.direct_sum(&self.source);
        let graph = AbSubgroup::generated(&big, self.graph_generators(None))?;
        Ok(Lifter {
            graph,
            split: self.target.rank(),
            source: self.source.clone(),
        })
    }

    /// Some `x` with `f(x) = y`, if one exists.
    pub fn lift(&self, y: &[i64]) -> Result<Option<Elem>> {
        self.lifter()?.lift(y)
    }

    pub fn is_surjective(&self) -> Result<bool> {
        Ok(self.image_of_whole()?.is_whole())
    }

    /// `[target : f(source)]`.
    pub fn cokernel_order(&self) -> Result<BigUint> {
        Ok(self.image_of_whole()?.index_in_ambient())
    }
}

/// Solves `f(x) = y` against the graph of `f`: eliminating the target part
/// of `(y, 0)` with graph rows leaves `(0, -x)`.
#[derive(Clone, Debug)]
pub struct Lifter {
    graph: AbSubgroup,
    split: usize,
    source: FiniteAbelianGroup,
}

impl Lifter {
    pub fn lift(&self, y: &[i64]) -> Result<Option<Elem>> {
        if y.len() != self.split {
            return Err(Error::Dimension {
                expected: self.split,
                got: y.len(),
            });
        }
        let mut v = y.to_vec();
        v.extend(std::iter::repeat_n(0, self.source.rank()));
        Ok(self
            .graph
            .reduce_prefix(&v, self.split)?
            .map(|r| self.source.neg(&r[self.split..])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: i64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(Hom::new(vec![vec![2]], &z(8), &z(8)).is_ok());
        assert_eq!(
            Hom::new(vec![vec![1]], &z(2), &z(4)),
            Err(Error::IllDefinedHom {
                generator: 0,
                order: 2,
                coordinate: 0
            })
        );
        assert!(Hom::new(vec![vec![2]], &z(2), &z(4)).is_ok());
        let a = FiniteAbelianGroup::new(vec![3, 5]).unwrap();
        let b = FiniteAbelianGroup::new(vec![7]).unwrap();
        assert!(Hom::new(vec![vec![0, 0]], &a, &b).is_ok());
    }

    #[test]
    fn calculus_examples() {
        let f = Hom::scalar(&z(8), 2);
        let k = f.kernel().unwrap();
        assert_eq!(k, AbSubgroup::generated(&z(8), [vec![4]]).unwrap());
        let whole = AbSubgroup::whole(&z(8));
        let im = f.image(&whole).unwrap();
        assert_eq!(im, AbSubgroup::generated(&z(8), [vec![2]]).unwrap());
        let four = AbSubgroup::generated(&z(8), [vec![4]]).unwrap();
        assert_eq!(
            f.preimage(&four).unwrap(),
            AbSubgroup::generated(&z(8), [vec![2]]).unwrap()
        );
        assert_eq!(f.preimage(&im).unwrap(), whole);
    }

    #[test]
    fn kernel_on_subgroup() {
        let a = FiniteAbelianGroup::new(vec![4, 4]).unwrap();
        let f = Hom::new(vec![vec![1, 1], vec![0, 0]], &a, &a).unwrap();
        let h = AbSubgroup::generated(&a, [vec![1, 3], vec![2, 0]]).unwrap();
        let kh = f.kernel_on(&h).unwrap();
        let brute: Vec<Elem> = a
            .elements()
            .filter(|x| h.contains(x).unwrap() && a.is_zero(&f.apply(x).unwrap()))
            .collect();
        assert_eq!(kh.order(), &BigUint::from(brute.len()));
    }

    #[test]
    fn lifting_solves_exactly_on_the_image() {
        let a = FiniteAbelianGroup::new(vec![4, 6]).unwrap();
        let b = FiniteAbelianGroup::new(vec![12]).unwrap();
        let f = Hom::new(vec![vec![3, 4]], &a, &b).unwrap();
        let image: Vec<Elem> = a.elements().map(|x| f.apply(&x).unwrap()).collect();
        let lifter = f.lifter().unwrap();
        for y in b.elements() {
            match lifter.lift(&y).unwrap() {
                Some(x) => assert_eq!(f.apply(&x).unwrap(), y),
                None => assert!(!image.contains(&y), "{y:?} is an image but was not lifted"),
            }
        }
        assert!(f.lift(&[1, 2]).is_err());
    }
}
