//! Exact linear algebra over the character lattice `M` and the cocharacter
//! lattice `N`, plus dense rational matrices.
//!
//! Lattice coordinates are machine integers with checked arithmetic; every
//! matrix computation runs over arbitrary-precision rationals, so results are
//! exact and equality is structural.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for the rational number `n`.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for the rational number `n / d`. Panics if `d == 0`.
pub fn qq(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
}

/// An element of `N`: a ray generator or the exponent vector of a
/// one-parameter subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

/// An element of `M`, i.e. a character of the torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character(Vec<i64>);

macro_rules! lattice_common {
    ($ty:ident) => {
        impl $ty {
            pub fn new(coords: Vec<i64>) -> Self {
                $ty(coords)
            }

            pub fn zero(dim: usize) -> Self {
                $ty(vec![0; dim])
            }

            /// The `i`-th standard basis vector of a rank-`dim` lattice.
            pub fn unit(dim: usize, i: usize) -> Self {
                let mut c = vec![0; dim];
                c[i] = 1;
                $ty(c)
            }

            pub fn coords(&self) -> &[i64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|&c| c == 0)
            }

            /// Whether the gcd of the coordinates is 1.
            pub fn is_primitive(&self) -> bool {
                self.0.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1
            }

            pub fn checked_add(&self, other: &Self) -> Result<Self, LatticeError> {
                check_dims(self.dim(), other.dim())?;
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| a.checked_add(*b).ok_or(LatticeError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
                    .map($ty)
            }

            pub fn checked_sub(&self, other: &Self) -> Result<Self, LatticeError> {
                check_dims(self.dim(), other.dim())?;
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| a.checked_sub(*b).ok_or(LatticeError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
                    .map($ty)
            }

            pub fn checked_scale(&self, k: i64) -> Result<Self, LatticeError> {
                self.0
                    .iter()
                    .map(|a| a.checked_mul(k).ok_or(LatticeError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
                    .map($ty)
            }

            pub fn checked_neg(&self) -> Result<Self, LatticeError> {
                self.checked_scale(-1)
            }
        }

        impl From<Vec<i64>> for $ty {
            fn from(v: Vec<i64>) -> Self {
                $ty(v)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (i, c) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    };
}

lattice_common!(LatticeVector);
lattice_common!(Character);

fn check_dims(expected: usize, found: usize) -> Result<(), LatticeError> {
    if expected == found {
        Ok(())
    } else {
        Err(LatticeError::DimensionMismatch { expected, found })
    }
}

/// The natural pairing `M x N -> Z`.
pub fn pairing(u: &Character, v: &LatticeVector) -> Result<i64, LatticeError> {
    check_dims(u.dim(), v.dim())?;
    let mut acc: i128 = 0;
    for (a, b) in u.coords().iter().zip(v.coords()) {
        acc = acc.checked_add(i128::from(*a) * i128::from(*b)).ok_or(LatticeError::Overflow)?;
    }
    i64::try_from(acc).map_err(|_| LatticeError::Overflow)
}

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntegerMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dims(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(IntegerMatrix { rows: rows.len(), cols, data })
    }

    /// Matrix whose columns are the given lattice vectors.
    pub fn from_columns(cols: &[LatticeVector]) -> Result<Self, LatticeError> {
        let rows = cols.first().map_or(0, LatticeVector::dim);
        let mut data = vec![0; rows * cols.len()];
        for (j, c) in cols.iter().enumerate() {
            check_dims(rows, c.dim())?;
            for (i, &x) in c.coords().iter().enumerate() {
                data[i * cols.len() + j] = x;
            }
        }
        Ok(IntegerMatrix { rows, cols: cols.len(), data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntegerMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| q(x)).collect() }
    }

    pub fn determinant(&self) -> Result<BigInt, LatticeError> {
        Ok(self.to_rational().determinant()?.to_integer())
    }
}

/// Rows of the returned matrix are the characters dual to the columns of `b`:
/// `dual_basis(b) * b = I`. Fails unless `b` is unimodular.
pub fn dual_basis(b: &IntegerMatrix) -> Result<IntegerMatrix, LatticeError> {
    if b.rows != b.cols {
        return Err(LatticeError::NotSquare { rows: b.rows, cols: b.cols });
    }
    let det = b.determinant()?;
    if det.abs() != BigInt::one() {
        return Err(LatticeError::NotUnimodular { det: det.to_string() });
    }
    let inv = b.to_rational().inverse()?;
    let mut data = Vec::with_capacity(inv.data.len());
    for x in &inv.data {
        // |det| = 1 forces an integral inverse
        let v = x.to_integer().to_i64().ok_or(LatticeError::Overflow)?;
        data.push(v);
    }
    Ok(IntegerMatrix { rows: b.rows, cols: b.cols, data })
}

/// Dense matrix over `Q`, row-major. Entries are always reduced fractions with
/// positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Rational::one())
    }

    pub fn scalar(n: usize, c: Rational) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    /// Elementary matrix with a single 1 at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[i * n + j] = Rational::one();
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LatticeError> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            check_dims(cols, r.len())?;
            data.extend(r);
        }
        Ok(RationalMatrix { rows: nrows, cols, data })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self, LatticeError> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    /// Square matrix from a row-major flattening of length `n * n`.
    pub fn from_flat(n: usize, flat: Vec<Rational>) -> Result<Self, LatticeError> {
        check_dims(n * n, flat.len())?;
        Ok(RationalMatrix { rows: n, cols: n, data: flat })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major flattening.
    pub fn as_flat(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[_]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Iterator over `(i, j, value)` for every nonzero entry.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        let cols = self.cols;
        self.data.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(k, v)| (k / cols, k % cols, v))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LatticeError> {
        check_dims(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self, LatticeError> {
        check_dims(self.rows, other.rows)?;
        check_dims(self.cols, other.cols)?;
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn determinant(&self) -> Result<Rational, LatticeError> {
        if !self.is_square() {
            return Err(LatticeError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            let pivot = a[col][col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &pivot;
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self, LatticeError> {
        if !self.is_square() {
            return Err(LatticeError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut aug: Vec<Vec<Rational>> = self
            .to_rows()
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                row
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n);
        if pivots.len() < n {
            return Err(LatticeError::Singular);
        }
        let rows = aug.into_iter().map(|r| r[n..].to_vec()).collect();
        Self::from_rows(rows)
    }

    /// Basis of the right null space `{x : A x = 0}`, in reduced row echelon
    /// form.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let mut rows = self.to_rows();
        if self.rows == 0 {
            rows.clear();
        }
        let pivots = rref_in_place(&mut rows, self.cols);
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[r][free].clone();
            }
            basis.push(v);
        }
        rref(basis, self.cols)
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.to_rows();
        rref_in_place(&mut rows, self.cols).len()
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Gauss-Jordan elimination restricted to the first `ncols` columns. Returns
/// the pivot columns; the first `pivots.len()` rows are the nonzero rows of
/// the reduced form.
pub(crate) fn rref_in_place(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Reduced row echelon form of the span of `vectors`, zero rows dropped.
pub(crate) fn rref(mut vectors: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let k = rref_in_place(&mut vectors, ncols).len();
    vectors.truncate(k);
    vectors
}
