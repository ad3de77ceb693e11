//! Zero-pattern parabolics from diagonal one-parameter subgroups, and exact
//! subspaces of `r×r` rational matrices.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{rref, LatticeError, Rational, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("conjugating matrix is singular")]
    Singular,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Exponents `(w_1, ..., w_r)` of `z ↦ diag(z^{w_1}, ..., z^{w_r})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn new(w: Vec<i64>) -> Self {
        WeightVector(w)
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<i64>> for WeightVector {
    fn from(w: Vec<i64>) -> Self {
        WeightVector(w)
    }
}

/// Which entries of an `r×r` matrix may be nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZeroPattern {
    allowed: Vec<Vec<bool>>,
}

impl ZeroPattern {
    pub fn from_table(allowed: Vec<Vec<bool>>) -> Result<Self, LieError> {
        let r = allowed.len();
        if let Some(row) = allowed.iter().find(|row| row.len() != r) {
            return Err(LieError::RankMismatch(r, row.len()));
        }
        Ok(ZeroPattern { allowed })
    }

    /// Block-diagonal pattern; `blocks` partitions `0..r`.
    pub fn block_diagonal(r: usize, blocks: &[Vec<usize>]) -> Self {
        let mut label = vec![usize::MAX; r];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                if i < r {
                    label[i] = b;
                }
            }
        }
        let allowed = (0..r).map(|i| (0..r).map(|j| label[i] == label[j]).collect()).collect();
        ZeroPattern { allowed }
    }

    pub fn rank(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i][j]
    }

    pub fn table(&self) -> &[Vec<bool>] {
        &self.allowed
    }

    /// Whether every nonzero entry of `a` sits at an allowed position.
    pub fn admits(&self, a: &RationalMatrix) -> bool {
        a.rows() == self.rank() && a.cols() == self.rank() && a.nonzero_entries().all(|(i, j, _)| self.allowed[i][j])
    }
}

impl fmt::Display for ZeroPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.allowed.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            for &a in row {
                write!(f, "{}", if a { '*' } else { '0' })?;
            }
        }
        Ok(())
    }
}

/// `(i, j)` is allowed iff `w_i ≥ w_j`, i.e. iff `z^{w_i - w_j}` has a limit
/// at `z = 0`.
pub fn parabolic_pattern(w: &WeightVector) -> ZeroPattern {
    let w = w.weights();
    let allowed = w.iter().map(|wi| w.iter().map(|wj| wi >= wj).collect()).collect();
    ZeroPattern { allowed }
}

/// A linear subspace of `r×r` rational matrices, stored as the reduced row
/// echelon basis of the row-major flattenings. Two subspaces are equal iff
/// their values are structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixSubspace {
    rank: usize,
    basis: Vec<Vec<Rational>>,
}

impl MatrixSubspace {
    /// The span of `spanning`, which need not be independent.
    pub fn span(rank: usize, spanning: &[RationalMatrix]) -> Result<Self, LieError> {
        let mut vectors = Vec::with_capacity(spanning.len());
        for m in spanning {
            if m.rows() != rank || m.cols() != rank {
                return Err(LieError::RankMismatch(rank, m.rows()));
            }
            vectors.push(m.as_flat().to_vec());
        }
        Ok(Self::from_vectors(rank, vectors))
    }

    fn from_vectors(rank: usize, vectors: Vec<Vec<Rational>>) -> Self {
        MatrixSubspace { rank, basis: rref(vectors, rank * rank) }
    }

    pub fn zero(rank: usize) -> Self {
        MatrixSubspace { rank, basis: Vec::new() }
    }

    pub fn full(rank: usize) -> Self {
        let all: Vec<_> = (0..rank * rank).map(|k| RationalMatrix::unit(rank, k / rank, k % rank)).collect();
        Self::span(rank, &all).expect("units have the right shape")
    }

    /// Matrices of trace zero.
    pub fn trace_zero(rank: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..rank {
            for j in 0..rank {
                if i != j {
                    gens.push(RationalMatrix::unit(rank, i, j));
                }
            }
        }
        for i in 1..rank {
            let mut h = RationalMatrix::zeros(rank, rank);
            h.set(0, 0, Rational::from_integer(1.into()));
            h.set(i, i, Rational::from_integer((-1).into()));
            gens.push(h);
        }
        Self::span(rank, &gens).expect("generators have the right shape")
    }

    /// `{Y : XY = YX}`.
    pub fn centralizer(x: &RationalMatrix) -> Result<Self, LieError> {
        let r = x.rows();
        if !x.is_square() {
            return Err(LieError::RankMismatch(r, x.cols()));
        }
        // column k of the map is ad_X(E_k)
        let n = r * r;
        let mut map = RationalMatrix::zeros(n, n);
        for k in 0..n {
            let e = RationalMatrix::unit(r, k / r, k % r);
            let img = x.mul(&e)?.sub(&e.mul(x)?)?;
            for (row, v) in img.as_flat().iter().enumerate() {
                if !v.is_zero() {
                    map.set(row, k, v.clone());
                }
            }
        }
        Ok(Self::from_vectors(r, map.kernel_basis()))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_vectors(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<RationalMatrix> {
        self.basis
            .iter()
            .map(|v| RationalMatrix::from_flat(self.rank, v.clone()).expect("basis vectors have length r^2"))
            .collect()
    }

    pub fn contains(&self, a: &RationalMatrix) -> bool {
        if a.rows() != self.rank || a.cols() != self.rank {
            return false;
        }
        let mut v = a.as_flat().to_vec();
        for b in &self.basis {
            let p = b.iter().position(|x| !x.is_zero()).expect("echelon rows are nonzero");
            if !v[p].is_zero() {
                let c = v[p].clone();
                for (vi, bi) in v.iter_mut().zip(b) {
                    if !bi.is_zero() {
                        *vi -= &c * bi;
                    }
                }
            }
        }
        v.iter().all(Zero::is_zero)
    }

    /// Whether `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &MatrixSubspace) -> bool {
        self.rank == other.rank && self.basis().iter().all(|b| other.contains(b))
    }
}

impl fmt::Display for MatrixSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "subspace of dim {} in gl({})", self.dim(), self.rank)?;
        for b in self.basis() {
            write!(f, "\n{b}")?;
        }
        Ok(())
    }
}

pub fn pattern_subspace(p: &ZeroPattern) -> MatrixSubspace {
    let r = p.rank();
    // unit matrices in row-major order are already in reduced echelon form
    let mut basis = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if p.is_allowed(i, j) {
                let mut v = vec![Rational::zero(); r * r];
                v[i * r + j] = Rational::from_integer(1.into());
                basis.push(v);
            }
        }
    }
    MatrixSubspace { rank: r, basis }
}

/// `C · S · C^{-1}`.
pub fn conjugate_subspace(s: &MatrixSubspace, c: &RationalMatrix) -> Result<MatrixSubspace, LieError> {
    if c.rows() != s.rank || c.cols() != s.rank {
        return Err(LieError::RankMismatch(s.rank, c.rows()));
    }
    let inv = c.inverse().map_err(|e| match e {
        LatticeError::Singular => LieError::Singular,
        other => other.into(),
    })?;
    let images = s.basis().iter().map(|b| c.mul(b)?.mul(&inv)).collect::<Result<Vec<_>, _>>()?;
    MatrixSubspace::span(s.rank, &images)
}

/// `S₁ ∩ S₂`, from the kernel of `(a, b) ↦ Σ a_i s_i - Σ b_j t_j`.
pub fn intersect_subspaces(s1: &MatrixSubspace, s2: &MatrixSubspace) -> Result<MatrixSubspace, LieError> {
    if s1.rank != s2.rank {
        return Err(LieError::RankMismatch(s1.rank, s2.rank));
    }
    let n = s1.rank * s1.rank;
    let (d1, d2) = (s1.dim(), s2.dim());
    if d1 == 0 || d2 == 0 {
        return Ok(MatrixSubspace::zero(s1.rank));
    }
    let mut system = RationalMatrix::zeros(n, d1 + d2);
    for (k, b) in s1.basis.iter().enumerate() {
        for (row, x) in b.iter().enumerate() {
            if !x.is_zero() {
                system.set(row, k, x.clone());
            }
        }
    }
    for (k, b) in s2.basis.iter().enumerate() {
        for (row, x) in b.iter().enumerate() {
            if !x.is_zero() {
                system.set(row, d1 + k, -x.clone());
            }
        }
    }
    let vectors = system
        .kernel_basis()
        .into_iter()
        .map(|coeffs| {
            let mut v = vec![Rational::zero(); n];
            for (a, b) in coeffs[..d1].iter().zip(&s1.basis) {
                if !a.is_zero() {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += a * bi;
                    }
                }
            }
            v
        })
        .collect();
    Ok(MatrixSubspace::from_vectors(s1.rank, vectors))
}

/// `S₁ + S₂`.
pub fn span_subspaces(s1: &MatrixSubspace, s2: &MatrixSubspace) -> Result<MatrixSubspace, LieError> {
    if s1.rank != s2.rank {
        return Err(LieError::RankMismatch(s1.rank, s2.rank));
    }
    let vectors = s1.basis.iter().chain(&s2.basis).cloned().collect();
    Ok(MatrixSubspace::from_vectors(s1.rank, vectors))
}

pub fn trace_zero_restrict(s: &MatrixSubspace) -> MatrixSubspace {
    intersect_subspaces(s, &MatrixSubspace::trace_zero(s.rank)).expect("ranks agree")
}

pub fn contains_matrix(s: &MatrixSubspace, a: &RationalMatrix) -> bool {
    s.contains(a)
}

pub fn subspace_dim(s: &MatrixSubspace) -> usize {
    s.dim()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{q, qq};

    fn mat(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_int_rows(rows).unwrap()
    }

    fn pat(w: &[i64]) -> MatrixSubspace {
        pattern_subspace(&parabolic_pattern(&WeightVector::new(w.to_vec())))
    }

    #[test]
    fn trivial_weights_allow_everything() {
        let p = parabolic_pattern(&WeightVector::new(vec![0, 0, 0]));
        assert!(p.table().iter().flatten().all(|&a| a));
        assert_eq!(pat(&[0, 0, 0]), MatrixSubspace::full(3));
    }

    #[test]
    fn descending_weights_give_upper_triangular() {
        let p = parabolic_pattern(&WeightVector::new(vec![1, 0, -1]));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.is_allowed(i, j), i <= j);
            }
        }
    }

    #[test]
    fn weights_zero_one() {
        let p = parabolic_pattern(&WeightVector::new(vec![0, 1]));
        assert!(p.is_allowed(0, 0) && p.is_allowed(1, 0) && p.is_allowed(1, 1));
        assert!(!p.is_allowed(0, 1));
    }

    #[test]
    fn upper_meets_lower_in_diagonals() {
        let s = intersect_subspaces(&pat(&[1, 0]), &pat(&[0, 1])).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&RationalMatrix::diagonal(&[q(3), qq(1, 2)])));
        assert!(!s.contains(&RationalMatrix::unit(2, 0, 1)));
    }

    #[test]
    fn conjugation_by_identity() {
        let s = pat(&[2, -1, 0]);
        assert_eq!(conjugate_subspace(&s, &RationalMatrix::identity(3)).unwrap(), s);
    }

    #[test]
    fn tangent_p2_scalar_line() {
        let diag = intersect_subspaces(&pat(&[1, 0]), &pat(&[0, 1])).unwrap();
        let c = mat(&[&[-1, 0], &[-1, 1]]);
        let conj = conjugate_subspace(&pat(&[1, 0]), &c).unwrap();
        let s = intersect_subspaces(&diag, &conj).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.contains(&RationalMatrix::identity(2)));
        // diag(a, b) conjugated back is [[a, 0], [a - b, b]]
        let back = c.mul(&RationalMatrix::diagonal(&[q(2), q(3)])).unwrap().mul(&c).unwrap();
        assert_eq!(back, mat(&[&[2, 0], &[-1, 3]]));
    }

    #[test]
    fn singular_conjugator() {
        let s = pat(&[0, 0]);
        assert_eq!(conjugate_subspace(&s, &RationalMatrix::zeros(2, 2)), Err(LieError::Singular));
    }

    #[test]
    fn trace_zero() {
        let t = MatrixSubspace::trace_zero(3);
        assert_eq!(t.dim(), 8);
        assert!(!t.contains(&RationalMatrix::identity(3)));
        assert_eq!(trace_zero_restrict(&pat(&[1, 0, -1])).dim(), 5);
        assert_eq!(trace_zero_restrict(&MatrixSubspace::zero(2)).dim(), 0);
    }

    #[test]
    fn centralizers() {
        let x = RationalMatrix::diagonal(&[q(1), q(2), q(3)]);
        let c = MatrixSubspace::centralizer(&x).unwrap();
        assert_eq!(c, pattern_subspace(&ZeroPattern::block_diagonal(3, &[vec![0], vec![1], vec![2]])));
        let c = MatrixSubspace::centralizer(&RationalMatrix::diagonal(&[q(1), q(1), q(2)])).unwrap();
        assert_eq!(c.dim(), 5);
        let j = mat(&[&[0, 1], &[0, 0]]);
        assert_eq!(MatrixSubspace::centralizer(&j).unwrap().dim(), 2);
    }

    #[test]
    fn span_and_containment() {
        let a = MatrixSubspace::span(2, &[RationalMatrix::unit(2, 0, 0), RationalMatrix::identity(2)]).unwrap();
        assert_eq!(a.dim(), 2);
        let b = MatrixSubspace::span(2, &[RationalMatrix::unit(2, 1, 1)]).unwrap();
        assert!(b.is_subspace_of(&a));
        assert_eq!(span_subspaces(&a, &b).unwrap(), a);
        assert!(MatrixSubspace::span(3, &[RationalMatrix::identity(2)]).is_err());
    }
}
