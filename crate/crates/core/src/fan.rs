//! Fans of smooth complete toric varieties.
//!
//! A fan is stored as a ray table plus a list of maximal cones, each an
//! ordered list of indices into the ray table. The order of a cone's indices
//! fixes the order of its generators, and with it the order of every dual
//! basis and every matrix built from that cone.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{dual_basis, Character, IntegerMatrix, LatticeError, LatticeVector};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("ray {index} has length {found}, expected {dim}")]
    RayDimension { index: usize, dim: usize, found: usize },
    #[error("cone {cone} has {found} rays, expected {dim}")]
    ConeSize { cone: usize, dim: usize, found: usize },
    #[error("cone {cone} refers to ray {ray}, but the fan has {num_rays} rays")]
    RayOutOfRange { cone: usize, ray: usize, num_rays: usize },
    #[error("cone {cone} lists ray {ray} twice")]
    RepeatedRay { cone: usize, ray: usize },
    #[error("cone index {0} out of range")]
    ConeOutOfRange(usize),
    #[error("ray {ray} is not a generator of cone {cone}")]
    RayNotInCone { ray: usize, cone: usize },
    #[error("ray {0} lies in no maximal cone")]
    OrphanRay(usize),
    #[error("invalid constructor parameters: {0}")]
    InvalidParameters(String),
    #[error("fan fails validation: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A maximal cone, as ordered indices into its fan's ray table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cone {
    ray_indices: Vec<usize>,
}

impl Cone {
    pub fn new(ray_indices: Vec<usize>) -> Self {
        Cone { ray_indices }
    }

    pub fn ray_indices(&self) -> &[usize] {
        &self.ray_indices
    }

    pub fn contains(&self, ray: usize) -> bool {
        self.ray_indices.contains(&ray)
    }

    /// Position of `ray` among the cone's generators.
    pub fn position(&self, ray: usize) -> Option<usize> {
        self.ray_indices.iter().position(|&r| r == ray)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RawFan {
    dim: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<Cone>,
}

/// A pure `n`-dimensional fan given by its rays and maximal cones.
///
/// Construction only enforces structural well-formedness (dimensions, index
/// ranges, no repeated indices). Geometric conditions are checked by
/// [`validate_fan`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFan", into = "RawFan")]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<Cone>,
}

impl TryFrom<RawFan> for Fan {
    type Error = FanError;

    fn try_from(raw: RawFan) -> Result<Self, FanError> {
        Fan::new(raw.dim, raw.rays, raw.max_cones)
    }
}

impl From<Fan> for RawFan {
    fn from(f: Fan) -> Self {
        RawFan { dim: f.dim, rays: f.rays, max_cones: f.max_cones }
    }
}

impl Fan {
    pub fn new(dim: usize, rays: Vec<LatticeVector>, max_cones: Vec<Cone>) -> Result<Self, FanError> {
        for (index, r) in rays.iter().enumerate() {
            if r.dim() != dim {
                return Err(FanError::RayDimension { index, dim, found: r.dim() });
            }
        }
        for (cone, c) in max_cones.iter().enumerate() {
            if c.ray_indices.len() != dim {
                return Err(FanError::ConeSize { cone, dim, found: c.ray_indices.len() });
            }
            for (k, &ray) in c.ray_indices.iter().enumerate() {
                if ray >= rays.len() {
                    return Err(FanError::RayOutOfRange { cone, ray, num_rays: rays.len() });
                }
                if c.ray_indices[..k].contains(&ray) {
                    return Err(FanError::RepeatedRay { cone, ray });
                }
            }
        }
        Ok(Fan { dim, rays, max_cones })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Cone] {
        &self.max_cones
    }

    pub fn num_cones(&self) -> usize {
        self.max_cones.len()
    }

    pub fn cone(&self, i: usize) -> Result<&Cone, FanError> {
        self.max_cones.get(i).ok_or(FanError::ConeOutOfRange(i))
    }

    pub fn generators(&self, cone: usize) -> Result<Vec<LatticeVector>, FanError> {
        Ok(self.cone(cone)?.ray_indices.iter().map(|&r| self.rays[r].clone()).collect())
    }

    /// Matrix whose columns are the generators of `cone`, in cone order.
    pub fn generator_matrix(&self, cone: usize) -> Result<IntegerMatrix, FanError> {
        Ok(IntegerMatrix::from_columns(&self.generators(cone)?)?)
    }

    /// The characters `u_1, ..., u_n` dual to the generators of `cone`.
    pub fn dual_characters(&self, cone: usize) -> Result<Vec<Character>, FanError> {
        let u = dual_basis(&self.generator_matrix(cone)?)?;
        Ok((0..u.rows()).map(|i| Character::new(u.row(i).to_vec())).collect())
    }

    /// Indices of maximal cones having `ray` as a generator, ascending.
    pub fn cones_containing(&self, ray: usize) -> Vec<usize> {
        (0..self.max_cones.len()).filter(|&c| self.max_cones[c].contains(ray)).collect()
    }

    /// Lowest-index maximal cone containing `ray`.
    pub fn first_cone_containing(&self, ray: usize) -> Result<usize, FanError> {
        self.max_cones.iter().position(|c| c.contains(ray)).ok_or(FanError::OrphanRay(ray))
    }

    /// Rays common to two maximal cones, in ascending ray-index order.
    ///
    /// For a fan whose cones meet in common faces this is `(σ ∩ τ)(1)`.
    pub fn shared_rays(&self, sigma: usize, tau: usize) -> Result<Vec<usize>, FanError> {
        let s = self.cone(sigma)?;
        let t = self.cone(tau)?;
        let mut shared: Vec<usize> = s.ray_indices.iter().copied().filter(|r| t.contains(*r)).collect();
        shared.sort_unstable();
        Ok(shared)
    }

    /// The fan of `P^n`: rays `e_0 = -(e_1 + ... + e_n), e_1, ..., e_n` and
    /// cones `σ_i` generated by every ray except `e_i`.
    pub fn projective_space(n: usize) -> Result<Fan, FanError> {
        if n == 0 {
            return Err(FanError::InvalidParameters("projective space needs n >= 1".into()));
        }
        let mut rays = vec![LatticeVector::new(vec![-1; n])];
        rays.extend((0..n).map(|i| LatticeVector::unit(n, i)));
        let cones = (0..=n).map(|i| Cone::new((0..=n).filter(|&k| k != i).collect())).collect();
        Fan::new(n, rays, cones)
    }

    /// The fan of `P(O ⊕ O(a_1) ⊕ ... ⊕ O(a_r))` over `P^s`, with `r = a.len()`.
    ///
    /// The ray table is `v_0, v_1, ..., v_s, e_0, e_1, ..., e_r` in
    /// `N = Z^s x Z^r`, where `v_0 = -(v_1 + ... + v_s) + Σ a_i e_i` and
    /// `e_0 = -(e_1 + ... + e_r)`. The maximal cone omitting `v_j` and `e_i`
    /// has index `j * (r + 1) + i`; its generators keep the ray-table order.
    pub fn kleinschmidt(s: usize, a: &[i64]) -> Result<Fan, FanError> {
        let r = a.len();
        if s == 0 || r == 0 {
            return Err(FanError::InvalidParameters("kleinschmidt needs s >= 1 and r >= 1".into()));
        }
        if a[0] < 0 || a.windows(2).any(|w| w[0] > w[1]) {
            return Err(FanError::InvalidParameters("twist exponents must satisfy 0 <= a_1 <= ... <= a_r".into()));
        }
        let n = s + r;
        let mut rays = Vec::with_capacity(n + 2);
        let mut v0 = vec![-1; s];
        v0.extend_from_slice(a);
        rays.push(LatticeVector::new(v0));
        rays.extend((0..s).map(|i| LatticeVector::unit(n, i)));
        let mut e0 = vec![0; s];
        e0.extend(std::iter::repeat_n(-1, r));
        rays.push(LatticeVector::new(e0));
        rays.extend((0..r).map(|i| LatticeVector::unit(n, s + i)));

        let mut cones = Vec::with_capacity((s + 1) * (r + 1));
        for j in 0..=s {
            for i in 0..=r {
                let mut idx: Vec<usize> = (0..=s).filter(|&k| k != j).collect();
                idx.extend((0..=r).filter(|&k| k != i).map(|k| s + 1 + k));
                cones.push(Cone::new(idx));
            }
        }
        Fan::new(n, rays, cones)
    }
}

/// Checks the smoothness and completeness hypotheses used throughout the
/// crate: primitive rays, unimodular maximal cones, every facet shared by
/// exactly two maximal cones, and cones meeting along their common rays.
///
/// Facet pairing is necessary but not sufficient for completeness of a pure
/// smooth fan; an exact covering test is not attempted. The common-face rule
/// is checked as: ray vectors are pairwise distinct, and no ray outside a
/// unimodular cone lies inside that cone.
pub fn validate_fan(f: &Fan) -> ValidationReport {
    let mut report = ValidationReport::new();

    let bad_ray = f.rays.iter().position(|r| !r.is_primitive());
    report.record("primitive_rays", bad_ray.map(|i| format!("ray {i} = {} is not primitive", f.rays[i])));

    let mut duals: Vec<Option<Vec<Character>>> = Vec::with_capacity(f.num_cones());
    let mut unimodular_failure = None;
    for c in 0..f.num_cones() {
        let det = f.generator_matrix(c).and_then(|m| Ok(m.determinant()?));
        match det {
            Ok(d) if d.abs() == BigInt::from(1) => duals.push(f.dual_characters(c).ok()),
            Ok(d) => {
                unimodular_failure.get_or_insert_with(|| format!("cone {c} has determinant {d}"));
                duals.push(None);
            }
            Err(e) => {
                unimodular_failure.get_or_insert_with(|| format!("cone {c}: {e}"));
                duals.push(None);
            }
        }
    }
    report.record("unimodular_cones", unimodular_failure);

    let mut facets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (ci, c) in f.max_cones.iter().enumerate() {
        for omit in 0..c.ray_indices.len() {
            let mut facet: Vec<usize> =
                c.ray_indices.iter().enumerate().filter(|(k, _)| *k != omit).map(|(_, &r)| r).collect();
            facet.sort_unstable();
            facets.entry(facet).or_default().push(ci);
        }
    }
    let mut facet_list: Vec<_> = facets.into_iter().collect();
    facet_list.sort();
    let facet_failure = facet_list
        .iter()
        .find(|(_, cones)| cones.len() != 2)
        .map(|(facet, cones)| format!("facet {facet:?} lies in {} maximal cones {cones:?}", cones.len()));
    report.record("facet_pairing", facet_failure);

    let mut face_failure = None;
    'outer: for i in 0..f.rays.len() {
        for j in 0..i {
            if f.rays[i] == f.rays[j] {
                face_failure = Some(format!("rays {j} and {i} coincide"));
                break 'outer;
            }
        }
    }
    if face_failure.is_none() {
        'cones: for (ci, dual) in duals.iter().enumerate() {
            let Some(dual) = dual else { continue };
            for (ri, ray) in f.rays.iter().enumerate() {
                if f.max_cones[ci].contains(ri) {
                    continue;
                }
                let inside = dual.iter().all(|u| crate::lattice::pairing(u, ray).map(|p| p >= 0).unwrap_or(false));
                if inside {
                    face_failure = Some(format!("ray {ri} lies inside cone {ci} without generating it"));
                    break 'cones;
                }
            }
        }
    }
    report.record("common_faces", face_failure);

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[i64]) -> LatticeVector {
        LatticeVector::new(v.to_vec())
    }

    #[test]
    fn p1_fan() {
        let f = Fan::projective_space(1).unwrap();
        let mut rays: Vec<_> = f.rays().to_vec();
        rays.sort();
        assert_eq!(rays, vec![lv(&[-1]), lv(&[1])]);
        assert_eq!(f.num_cones(), 2);
        assert!(validate_fan(&f).is_valid());
    }

    #[test]
    fn p2_fan() {
        let f = Fan::projective_space(2).unwrap();
        assert_eq!(f.rays(), &[lv(&[-1, -1]), lv(&[1, 0]), lv(&[0, 1])]);
        assert_eq!(f.num_cones(), 3);
        assert!(validate_fan(&f).is_valid());
    }

    #[test]
    fn non_unimodular_cone_is_invalid() {
        let f = Fan::new(2, vec![lv(&[1, 0]), lv(&[1, 2])], vec![Cone::new(vec![0, 1])]).unwrap();
        let rep = validate_fan(&f);
        assert!(!rep.is_valid());
        assert!(!rep.check("unimodular_cones").unwrap().passed);
    }

    #[test]
    fn hirzebruch_is_valid() {
        let f = Fan::kleinschmidt(1, &[1]).unwrap();
        assert_eq!(f.num_rays(), 4);
        assert_eq!(f.num_cones(), 4);
        assert!(validate_fan(&f).is_valid(), "{}", validate_fan(&f));
    }

    #[test]
    fn p1_times_p1() {
        let f = Fan::kleinschmidt(1, &[0]).unwrap();
        let mut rays = f.rays().to_vec();
        rays.sort();
        assert_eq!(rays, vec![lv(&[-1, 0]), lv(&[0, -1]), lv(&[0, 1]), lv(&[1, 0])]);
        assert_eq!(f.num_cones(), 4);
        assert!(validate_fan(&f).is_valid());
    }

    #[test]
    fn shared_rays_examples() {
        let p2 = Fan::projective_space(2).unwrap();
        assert_eq!(p2.shared_rays(0, 0).unwrap(), vec![1, 2]);
        // σ_0 = Cone(e_1, e_2), σ_1 = Cone(e_0, e_2)
        assert_eq!(p2.shared_rays(0, 1).unwrap(), vec![2]);

        let p3 = Fan::projective_space(3).unwrap();
        // σ_0 = {e1,e2,e3}, σ_1 = {e0,e2,e3}: common 2-face spanned by e2, e3
        assert_eq!(p3.shared_rays(0, 1).unwrap(), vec![2, 3]);
        assert_eq!(p3.shared_rays(2, 3).unwrap(), vec![0, 1]);
    }

    #[test]
    fn incomplete_fan_fails_facet_pairing() {
        let f = Fan::new(2, vec![lv(&[1, 0]), lv(&[0, 1])], vec![Cone::new(vec![0, 1])]).unwrap();
        let rep = validate_fan(&f);
        assert!(!rep.check("facet_pairing").unwrap().passed);
    }

    #[test]
    fn overlapping_cones_fail_common_faces() {
        // the ray (1,1) sits inside Cone(e1, e2)
        let f = Fan::new(
            2,
            vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[1, 1]), lv(&[-1, -1])],
            vec![Cone::new(vec![0, 1]), Cone::new(vec![1, 2]), Cone::new(vec![0, 3]), Cone::new(vec![2, 3])],
        )
        .unwrap();
        assert!(!validate_fan(&f).check("common_faces").unwrap().passed);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(Fan::new(2, vec![lv(&[1])], vec![]), Err(FanError::RayDimension { .. })));
        assert!(matches!(Fan::new(1, vec![lv(&[1])], vec![Cone::new(vec![3])]), Err(FanError::RayOutOfRange { .. })));
        assert!(matches!(
            Fan::new(2, vec![lv(&[1, 0])], vec![Cone::new(vec![0, 0])]),
            Err(FanError::RepeatedRay { .. })
        ));
        assert!(Fan::kleinschmidt(1, &[2, 1]).is_err());
        assert!(Fan::projective_space(0).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let text = r#"{"dim":2,"rays":[[-1,-1],[1,0],[0,1]],"max_cones":[[1,2],[0,2],[0,1]]}"#;
        let f: Fan = serde_json::from_str(text).unwrap();
        assert_eq!(f, Fan::projective_space(2).unwrap());
        assert_eq!(serde_json::to_string(&f).unwrap(), text);
    }
}
