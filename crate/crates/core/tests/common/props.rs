//! Property checks and their input strategies, shared by the proptest suite
//! and the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};

use eqbundle::analysis::{parabolic_at_ray_via, SplitVerdict};
use eqbundle::kaneyama::{apply_equivalence_witness, verify_equivalence_witness};
use eqbundle::liealg::{
    conjugate_subspace, intersect_subspaces, parabolic_pattern, pattern_subspace, span_subspaces, MatrixSubspace,
    WeightVector,
};
use eqbundle::{
    aut_lie_algebra, extend_structure_group, is_equivariant_automorphism, split_check, split_data, validate, Embedding,
    EquivalenceWitness, Fan, GroupKind, GroupTag, KaneyamaData, Rational, RationalMatrix,
};

use super::{aut_dim, det, fixture_fan, limit_exists, to_fmat, Frac};

pub const CASES: u32 = 256;
pub const SEED: u64 = 0x6571_6275_6e64;

pub fn config() -> Config {
    Config { cases: CASES, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() }
}

pub type PropResult = Result<(), TestCaseError>;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn int_matrix(r: usize) -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(-4i64..=4, r * r)
        .prop_map(move |v| RationalMatrix::from_flat(r, v.into_iter().map(q).collect()).unwrap())
}

/// Nonsingular matrices with entries `a/b`, `|a| ≤ 5`, `1 ≤ b ≤ 3`.
pub fn nonsingular(r: usize) -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec((-5i64..=5, 1i64..=3), r * r)
        .prop_map(move |v| {
            let flat = v.into_iter().map(|(a, b)| Rational::new(a.into(), b.into())).collect();
            RationalMatrix::from_flat(r, flat).unwrap()
        })
        .prop_filter("nonsingular", |m| m.determinant().unwrap() != q(0))
}

pub fn weights(r: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-3i64..=3, r)
}

/// Sparse integer matrix: each entry zero with probability one half.
pub fn sparse_matrix(r: usize) -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(prop_oneof![Just(0i64), -4i64..=4], r * r)
        .prop_map(move |v| RationalMatrix::from_flat(r, v.into_iter().map(q).collect()).unwrap())
}

pub fn subspace(r: usize) -> impl Strategy<Value = MatrixSubspace> {
    proptest::collection::vec(sparse_matrix(r), 0..=r * r).prop_map(move |gens| MatrixSubspace::span(r, &gens).unwrap())
}

/// Choice stream used to build witnesses from fixed data.
pub fn choices() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(any::<u32>(), 64)
}

struct Chooser<'a> {
    stream: &'a [u32],
    pos: usize,
}

impl Chooser<'_> {
    fn next(&mut self, bound: usize) -> usize {
        let v = self.stream[self.pos % self.stream.len()] as usize;
        self.pos += 1;
        if bound == 0 {
            0
        } else {
            v % bound
        }
    }
}

/// A witness valid for `d` by construction: per cone, `β = Π (I + t E_kl)`
/// with `Π_{i,η(i)} = ±1` and `(k, l)` allowed for the permuted characters,
/// times a scalar for GL.
pub fn random_witness(d: &KaneyamaData, stream: &[u32]) -> EquivalenceWitness {
    let mut ch = Chooser { stream, pos: 0 };
    let r = d.rank();
    let f = d.fan();
    let mut eta = Vec::new();
    let mut beta = Vec::new();
    for c in 0..d.num_cones() {
        let mut perm: Vec<usize> = (0..r).collect();
        for i in (1..r).rev() {
            perm.swap(i, ch.next(i + 1));
        }
        let mut pi = RationalMatrix::zeros(r, r);
        for (i, &e) in perm.iter().enumerate() {
            pi.set(i, e, q(1));
        }
        if pi.determinant().unwrap() != q(1) {
            pi.set(0, perm[0], q(-1));
        }
        let mut new_xi = vec![Vec::new(); r];
        for (i, &e) in perm.iter().enumerate() {
            new_xi[e] = d.xi(c)[i].coords().to_vec();
        }
        let rays = f.cone(c).unwrap().ray_indices();
        let allowed: Vec<(usize, usize)> = (0..r)
            .flat_map(|k| (0..r).map(move |l| (k, l)))
            .filter(|&(k, l)| {
                k != l
                    && rays.iter().all(|&g| {
                        let v = f.ray(g).coords();
                        super::pair(&new_xi[k], v) >= super::pair(&new_xi[l], v)
                    })
            })
            .collect();
        let mut b = pi;
        if !allowed.is_empty() {
            let (k, l) = allowed[ch.next(allowed.len())];
            let t = ch.next(7) as i64 - 3;
            let mut u = RationalMatrix::identity(r);
            u.set(k, l, q(t));
            b = b.mul(&u).unwrap();
        }
        if d.group().kind == GroupKind::GL {
            let s = [1, -1, 2, -3, 5][ch.next(5)];
            b = b.scale(&Rational::new(s.into(), (1 + ch.next(3) as i64).into()));
        }
        eta.push(perm);
        beta.push(b);
    }
    EquivalenceWitness { eta, beta }
}

pub fn random_split(fan_name: &str, r: usize, m: &[i64]) -> KaneyamaData {
    let f = fixture_fan(fan_name);
    let per_ray: Vec<Vec<i64>> =
        (0..f.num_rays()).map(|g| (0..r).map(|i| m[(g * r + i) % m.len()]).collect()).collect();
    split_data(&f, &per_ray, GroupTag::gl(r)).unwrap()
}

// -- liealg -----------------------------------------------------------------

pub fn check_limit_oracle(w: &[i64], a: &RationalMatrix) -> PropResult {
    let p = parabolic_pattern(&WeightVector::new(w.to_vec()));
    let s = pattern_subspace(&p);
    let rule = (0..w.len()).all(|i| (0..w.len()).all(|j| a.get(i, j) == &q(0) || w[i] >= w[j]));
    let oracle = limit_exists(w, &to_fmat(a));
    prop_assert_eq!(s.contains(a), rule);
    prop_assert_eq!(rule, oracle);
    prop_assert_eq!(p.admits(a), oracle);
    Ok(())
}

pub fn check_pattern_contains_diagonals(w: &[i64]) -> PropResult {
    let r = w.len();
    let s = pattern_subspace(&parabolic_pattern(&WeightVector::new(w.to_vec())));
    prop_assert!(s.contains(&RationalMatrix::identity(r)));
    for i in 0..r {
        prop_assert!(s.contains(&RationalMatrix::unit(r, i, i)));
    }
    Ok(())
}

pub fn check_double_conjugation(w: &[i64], c: &RationalMatrix) -> PropResult {
    let s = pattern_subspace(&parabolic_pattern(&WeightVector::new(w.to_vec())));
    let there = conjugate_subspace(&s, c).unwrap();
    let back = conjugate_subspace(&there, &c.inverse().unwrap()).unwrap();
    prop_assert_eq!(there.dim(), s.dim());
    prop_assert_eq!(back, s);
    Ok(())
}

pub fn check_dimension_formula(s1: &MatrixSubspace, s2: &MatrixSubspace) -> PropResult {
    let meet = intersect_subspaces(s1, s2).unwrap();
    let join = span_subspaces(s1, s2).unwrap();
    prop_assert_eq!(meet.dim() + join.dim(), s1.dim() + s2.dim());
    prop_assert!(meet.is_subspace_of(s1) && meet.is_subspace_of(s2));
    Ok(())
}

// -- data ---------------------------------------------------------------------

pub fn check_cocycles(d: &KaneyamaData) -> PropResult {
    let m = d.num_cones();
    let r = d.rank();
    for t in 0..m {
        prop_assert!(d.transition(t, t).is_identity());
        for s in 0..m {
            for k in 0..m {
                let prod = d.transition(t, s).mul(d.transition(s, k)).unwrap().mul(d.transition(k, t)).unwrap();
                prop_assert_eq!(prod, RationalMatrix::identity(r));
            }
        }
    }
    Ok(())
}

pub fn check_cone_independence(d: &KaneyamaData) -> PropResult {
    let f = d.fan();
    for ray in 0..f.num_rays() {
        let cones = f.cones_containing(ray);
        let first = parabolic_at_ray_via(d, 0, ray, cones[0]).unwrap();
        for &c in &cones[1..] {
            prop_assert_eq!(&parabolic_at_ray_via(d, 0, ray, c).unwrap(), &first, "ray {} via {}", ray, c);
        }
    }
    Ok(())
}

pub fn check_base_independence(d: &KaneyamaData) -> PropResult {
    let reports: Vec<_> = (0..d.num_cones()).map(|b| aut_lie_algebra(d, b).unwrap()).collect();
    let oracle = aut_dim(d, 0);
    for (b, rep) in reports.iter().enumerate() {
        prop_assert_eq!(rep.dim, oracle, "base {}", b);
        let moved = conjugate_subspace(&reports[0].lie_algebra, d.transition(b, 0)).unwrap();
        prop_assert_eq!(&moved, &rep.lie_algebra, "base {}", b);
    }
    Ok(())
}

pub fn check_center(d: &KaneyamaData) -> PropResult {
    let rep = aut_lie_algebra(d, 0).unwrap();
    let r = d.rank();
    match d.group().kind {
        GroupKind::GL => prop_assert!(rep.lie_algebra.contains(&RationalMatrix::identity(r))),
        GroupKind::SL => prop_assert!(rep.lie_algebra.is_subspace_of(&MatrixSubspace::trace_zero(r))),
    }
    Ok(())
}

pub fn check_witness(d: &KaneyamaData, stream: &[u32]) -> PropResult {
    let w = random_witness(d, stream);
    let image = apply_equivalence_witness(d, &w).unwrap();
    prop_assert!(validate(&image).is_valid(), "{}", validate(&image));
    prop_assert!(verify_equivalence_witness(d, &image, &w).unwrap());
    let before = aut_lie_algebra(d, 0).unwrap().dim;
    let after = aut_lie_algebra(&image, 0).unwrap().dim;
    prop_assert_eq!(before, after);
    prop_assert_eq!(after, aut_dim(&image, 0));
    check_cocycles(&image)?;
    check_cone_independence(&image)
}

pub fn check_one_plus_tx(d: &KaneyamaData) -> PropResult {
    let rep = aut_lie_algebra(d, 0).unwrap();
    let r = d.rank();
    for x in rep.lie_algebra.basis() {
        for t in [q(1), Rational::new(1.into(), 2.into()), q(-3)] {
            let a = RationalMatrix::identity(r).add(&x.scale(&t)).unwrap();
            let dt = det(&to_fmat(&a));
            if dt.is_zero() {
                continue;
            }
            let expect = match d.group().kind {
                GroupKind::GL => true,
                GroupKind::SL => dt == Frac::one(),
            };
            prop_assert_eq!(is_equivariant_automorphism(d, 0, &a).unwrap(), expect);
        }
    }
    Ok(())
}

pub fn check_extension(d: &KaneyamaData) -> PropResult {
    if d.group().kind != GroupKind::GL {
        return Ok(());
    }
    let e = extend_structure_group(d, &Embedding::SlBalance).unwrap();
    prop_assert!(validate(&e).is_valid());
    for c in 0..e.num_cones() {
        let sum: Vec<i64> = (0..e.fan().dim()).map(|k| e.xi(c).iter().map(|u| u.coords()[k]).sum()).collect();
        prop_assert!(sum.iter().all(|&x| x == 0));
    }
    for t in 0..e.num_cones() {
        for s in 0..e.num_cones() {
            prop_assert_eq!(e.transition(t, s).determinant().unwrap(), q(1));
        }
    }
    Ok(())
}

pub fn check_split_extension_consistency(d: &KaneyamaData, seed: u64) -> PropResult {
    let e = extend_structure_group(d, &Embedding::SlBalance).unwrap();
    if matches!(split_check(&e, 0, 32, seed).unwrap(), SplitVerdict::Split { .. }) {
        let not_split = matches!(split_check(d, 0, 32, seed).unwrap(), SplitVerdict::NotSplit { .. });
        prop_assert!(!not_split);
    }
    Ok(())
}

pub fn is_projective(f: &Fan) -> bool {
    (1..=5).any(|n| Fan::projective_space(n).is_ok_and(|p| &p == f))
}
