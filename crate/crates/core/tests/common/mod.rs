//! Shared fixture access and independent oracles. The oracles use their own
//! `i128` fraction arithmetic, cofactor determinants and elimination, so
//! they share no code with the library beyond reading its inputs.
#![allow(dead_code)]

pub mod props;

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::path::PathBuf;

use eqbundle::{Fan, GroupKind, KaneyamaData, RationalMatrix};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn fixture_fan(name: &str) -> Fan {
    eqbundle::json::from_str(&read_fixture(&format!("fans/{name}.json"))).unwrap()
}

pub fn fixture_data(name: &str) -> KaneyamaData {
    eqbundle::json::from_str(&read_fixture(&format!("data/{name}.json"))).unwrap()
}

pub fn fixture_names(sub: &str) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

/// Every fixture data set that is meant to be valid.
pub fn valid_fixture_data() -> Vec<(String, KaneyamaData)> {
    fixture_names("data")
        .into_iter()
        .filter(|n| n != "broken_cocycle")
        .map(|n| {
            let d = fixture_data(&n);
            (n, d)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac {
    pub n: i128,
    pub d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    pub fn new(n: i128, d: i128) -> Self {
        assert!(d != 0, "zero denominator");
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Frac { n: s * n / g, d: s * d / g }
    }
    pub fn int(n: i128) -> Self {
        Frac { n, d: 1 }
    }
    pub fn zero() -> Self {
        Frac::int(0)
    }
    pub fn one() -> Self {
        Frac::int(1)
    }
    pub fn is_zero(self) -> bool {
        self.n == 0
    }
    pub fn parse(s: &str) -> Self {
        match s.split_once('/') {
            Some((n, d)) => Frac::new(n.parse().unwrap(), d.parse().unwrap()),
            None => Frac::int(s.parse().unwrap()),
        }
    }
}

impl Add for Frac {
    type Output = Frac;
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }
}
impl Sub for Frac {
    type Output = Frac;
    fn sub(self, o: Frac) -> Frac {
        self + (-o)
    }
}
impl Neg for Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        Frac { n: -self.n, d: self.d }
    }
}
impl Mul for Frac {
    type Output = Frac;
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.n * o.n, self.d * o.d)
    }
}
impl Div for Frac {
    type Output = Frac;
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d, self.d * o.n)
    }
}
impl PartialOrd for Frac {
    fn partial_cmp(&self, o: &Frac) -> Option<Ordering> {
        Some((self.n * o.d).cmp(&(o.n * self.d)))
    }
}

pub type FMat = Vec<Vec<Frac>>;

pub fn to_fmat(m: &RationalMatrix) -> FMat {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| Frac::parse(&m.get(i, j).to_string())).collect()).collect()
}

pub fn int_fmat(rows: &[&[i64]]) -> FMat {
    rows.iter().map(|r| r.iter().map(|&x| Frac::int(x as i128)).collect()).collect()
}

pub fn fmat_mul(a: &FMat, b: &FMat) -> FMat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..m).map(|j| (0..k).fold(Frac::zero(), |s, l| s + a[i][l] * b[l][j])).collect()).collect()
}

/// Cofactor expansion along the first row.
pub fn det(a: &FMat) -> Frac {
    let n = a.len();
    if n == 0 {
        return Frac::one();
    }
    let mut total = Frac::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: FMat = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
            .collect();
        let term = a[0][j] * det(&minor);
        total = if j % 2 == 0 { total + term } else { total - term };
    }
    total
}

/// Inverse by the adjugate formula.
pub fn inverse(a: &FMat) -> FMat {
    let n = a.len();
    let d = det(a);
    assert!(!d.is_zero(), "singular");
    let mut inv = vec![vec![Frac::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: FMat = a
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != i)
                .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let cof = det(&minor);
            inv[j][i] = if (i + j) % 2 == 0 { cof / d } else { -cof / d };
        }
    }
    inv
}

/// Rank by forward elimination.
pub fn rank(mut rows: FMat) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if !rows[i][c].is_zero() {
                let f = rows[i][c] / rows[r][c];
                for k in c..ncols {
                    let v = rows[r][k];
                    rows[i][k] = rows[i][k] - f * v;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn pair(u: &[i64], v: &[i64]) -> i64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Generators of a cone as the columns of a matrix.
pub fn generator_columns(f: &Fan, cone: usize) -> FMat {
    let rays = f.cone(cone).unwrap().ray_indices();
    let n = f.dim();
    (0..n).map(|i| rays.iter().map(|&g| Frac::int(f.ray(g).coords()[i] as i128)).collect()).collect()
}

/// Tangent transition as the change of basis `B_τ^{-1} B_σ`.
pub fn tangent_transition(f: &Fan, tau: usize, sigma: usize) -> FMat {
    fmat_mul(&inverse(&generator_columns(f, tau)), &generator_columns(f, sigma))
}

/// Dimension of `{X : C^{-1} X C` has no entry at `(i, j)` with
/// `w_i < w_j`, for every ray`}`, intersected with trace zero for SL.
/// Each forbidden entry contributes one linear functional on `X`.
pub fn aut_dim(d: &KaneyamaData, base: usize) -> usize {
    let r = d.rank();
    let f = d.fan();
    let mut constraints: FMat = Vec::new();
    for ray in 0..f.num_rays() {
        let sigma = (0..f.num_cones()).find(|&c| f.cone(c).unwrap().contains(ray)).unwrap();
        let v = f.ray(ray).coords();
        let w: Vec<i64> = d.xi(sigma).iter().map(|u| pair(u.coords(), v)).collect();
        let c = to_fmat(d.transition(base, sigma));
        let ci = inverse(&c);
        for i in 0..r {
            for j in 0..r {
                if w[i] < w[j] {
                    let mut row = vec![Frac::zero(); r * r];
                    for k in 0..r {
                        for l in 0..r {
                            row[k * r + l] = ci[i][k] * c[l][j];
                        }
                    }
                    constraints.push(row);
                }
            }
        }
    }
    if d.group().kind == GroupKind::SL {
        let mut row = vec![Frac::zero(); r * r];
        for i in 0..r {
            row[i * r + i] = Frac::one();
        }
        constraints.push(row);
    }
    r * r - rank(constraints)
}

/// `det(tI - X)`.
pub fn charpoly_at(x: &FMat, t: Frac) -> Frac {
    let n = x.len();
    let m: FMat = (0..n).map(|i| (0..n).map(|j| if i == j { t - x[i][j] } else { -x[i][j] }).collect()).collect();
    det(&m)
}

/// `z ↦ diag(z^w) A diag(z^{-w})` has only nonnegative exponents on the
/// nonzero entries of `A`.
pub fn limit_exists(w: &[i64], a: &FMat) -> bool {
    let r = w.len();
    (0..r).all(|i| (0..r).all(|j| a[i][j].is_zero() || w[i] - w[j] >= 0))
}
