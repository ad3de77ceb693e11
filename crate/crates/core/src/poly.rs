//! Dense univariate polynomials over the rationals, coefficients stored
//! lowest degree first.

use num_traits::{One, Zero};

use crate::lattice::{LatticeError, Rational, RationalMatrix};

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `det(tI - X)`, via Faddeev-LeVerrier. Monic of degree `r`.
pub fn characteristic_polynomial(x: &RationalMatrix) -> Result<Vec<Rational>, LatticeError> {
    if !x.is_square() {
        return Err(LatticeError::NotSquare { rows: x.rows(), cols: x.cols() });
    }
    let n = x.rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    // M_k = X M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(X M_k) / k
    let mut m = RationalMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = x.mul(&m)?;
        let c = coeffs[n - k + 1].clone();
        for i in 0..n {
            let v = next.get(i, i) + &c;
            next.set(i, i, v);
        }
        m = next;
        let xm = x.mul(&m)?;
        coeffs[n - k] = -xm.trace() / Rational::from_integer((k as i64).into());
    }
    Ok(coeffs)
}

pub fn derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * Rational::from_integer((k as i64).into())).collect()
}

/// Remainder of `a` divided by nonzero `b`.
fn remainder(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let lead = b.last().expect("divisor is nonzero").clone();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().expect("nonempty").clone() / &lead;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] -= &f * bk;
        }
        r.pop();
        r = trim(r);
    }
    r
}

/// Monic greatest common divisor; the zero polynomial is `[]`.
pub fn gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = remainder(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in &mut a {
            *c /= &lead;
        }
    }
    a
}

/// No repeated roots over an algebraic closure.
pub fn is_squarefree(p: &[Rational]) -> bool {
    let p = trim(p.to_vec());
    if p.is_empty() {
        return false;
    }
    gcd(&p, &derivative(&p)).len() <= 1
}

pub fn evaluate(p: &[Rational], t: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::q;

    fn poly(c: &[i64]) -> Vec<Rational> {
        c.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn charpoly_of_diagonal() {
        let x = RationalMatrix::diagonal(&[q(1), q(2)]);
        assert_eq!(characteristic_polynomial(&x).unwrap(), poly(&[2, -3, 1]));
    }

    #[test]
    fn charpoly_matches_determinant() {
        let x = RationalMatrix::from_int_rows(&[&[1, 2, 0], &[3, -1, 4], &[0, 5, 2]]).unwrap();
        let p = characteristic_polynomial(&x).unwrap();
        for t in -3..4 {
            let shifted = RationalMatrix::scalar(3, q(t)).sub(&x).unwrap();
            assert_eq!(evaluate(&p, &q(t)), shifted.determinant().unwrap());
        }
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(&poly(&[2, -3, 1])));
        assert!(!is_squarefree(&poly(&[1, -2, 1])));
        assert!(is_squarefree(&poly(&[1, 0, 1])));
        assert!(is_squarefree(&poly(&[5])));
        assert!(!is_squarefree(&[]));
        let nilpotent = RationalMatrix::from_int_rows(&[&[0, 1], &[0, 0]]).unwrap();
        assert!(!is_squarefree(&characteristic_polynomial(&nilpotent).unwrap()));
    }

    #[test]
    fn gcd_is_monic() {
        // (t-1)(t-2) and (t-1)(t+3)
        assert_eq!(gcd(&poly(&[2, -3, 1]), &poly(&[-3, 2, 1])), poly(&[-1, 1]));
        assert_eq!(gcd(&poly(&[4, 2]), &[]), poly(&[2, 1]));
    }
}
