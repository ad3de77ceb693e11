//! Equivariant automorphisms, morphism and reduction witnesses, Levi
//! reductions and equivariant splitting, all decided by exact sign
//! conditions on pairings.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kaneyama::{validate, DataError, GroupKind, KaneyamaData};
use crate::lattice::{pairing, Character, LatticeError, Rational, RationalMatrix};
use crate::liealg::{
    conjugate_subspace, intersect_subspaces, parabolic_pattern, pattern_subspace, trace_zero_restrict, LieError,
    MatrixSubspace, WeightVector, ZeroPattern,
};
use crate::poly::{characteristic_polynomial, is_squarefree};

pub const DEFAULT_SPLIT_ATTEMPTS: u32 = 32;
pub const SPLIT_COEFFICIENT_BOUND: i64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("ray {ray} is not a ray of cone {cone}")]
    RayNotInCone { ray: usize, cone: usize },
    #[error("ray {0} lies in no maximal cone")]
    OrphanRay(usize),
    #[error("cone index {0} out of range")]
    ConeOutOfRange(usize),
    #[error("invalid Kaneyama data: {0}")]
    InvalidData(String),
    #[error("malformed partition: {0}")]
    Partition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

fn require_valid(d: &KaneyamaData) -> Result<(), AnalysisError> {
    let rep = validate(d);
    if rep.is_valid() {
        return Ok(());
    }
    let msgs: Vec<String> =
        rep.failures().map(|c| format!("{}: {}", c.rule, c.detail.clone().unwrap_or_default())).collect();
    Err(AnalysisError::InvalidData(msgs.join("; ")))
}

fn check_cone(d: &KaneyamaData, c: usize) -> Result<(), AnalysisError> {
    if c < d.num_cones() {
        Ok(())
    } else {
        Err(AnalysisError::ConeOutOfRange(c))
    }
}

fn check_square(d: &KaneyamaData, a: &RationalMatrix, what: &str) -> Result<(), AnalysisError> {
    let r = d.rank();
    if a.rows() != r || a.cols() != r {
        return Err(AnalysisError::Shape(format!("{what} is {}x{}, rank is {r}", a.rows(), a.cols())));
    }
    Ok(())
}

/// `(⟨ξ^σ_1, v_α⟩, ..., ⟨ξ^σ_r, v_α⟩)`: the exponents of `ρ_σ ∘ λ^{v_α}`.
pub fn ray_weight_vector(d: &KaneyamaData, sigma: usize, ray: usize) -> Result<WeightVector, AnalysisError> {
    check_cone(d, sigma)?;
    if !d.fan().cone(sigma).map_err(DataError::from)?.contains(ray) {
        return Err(AnalysisError::RayNotInCone { ray, cone: sigma });
    }
    Ok(WeightVector::new(d.restriction(sigma, ray)?))
}

/// `C · diag(z^w) · C^{-1}` evaluated at `z`, with `C = P(base, σ(α))`.
pub fn one_psg_in_base_frame(
    d: &KaneyamaData,
    base: usize,
    ray: usize,
    z: &Rational,
) -> Result<RationalMatrix, AnalysisError> {
    let sigma = d.fan().first_cone_containing(ray).map_err(|_| AnalysisError::OrphanRay(ray))?;
    check_cone(d, base)?;
    let w = ray_weight_vector(d, sigma, ray)?;
    let diag: Vec<Rational> = w.weights().iter().map(|&k| num_traits::pow::Pow::pow(z, k as i32)).collect();
    let c = d.transition(base, sigma);
    Ok(c.mul(&RationalMatrix::diagonal(&diag))?.mul(&c.inverse()?)?)
}

/// Lie algebra of the parabolic attached to `ray`, in the frame of `base`,
/// computed through the chart of `via`.
pub fn parabolic_at_ray_via(
    d: &KaneyamaData,
    base: usize,
    ray: usize,
    via: usize,
) -> Result<MatrixSubspace, AnalysisError> {
    check_cone(d, base)?;
    let w = ray_weight_vector(d, via, ray)?;
    let s = conjugate_subspace(&pattern_subspace(&parabolic_pattern(&w)), d.transition(base, via))?;
    Ok(match d.group().kind {
        GroupKind::GL => s,
        GroupKind::SL => trace_zero_restrict(&s),
    })
}

/// [`parabolic_at_ray_via`] through the lowest-index cone containing `ray`.
pub fn parabolic_at_ray(d: &KaneyamaData, base: usize, ray: usize) -> Result<MatrixSubspace, AnalysisError> {
    let sigma = d.fan().first_cone_containing(ray).map_err(|_| AnalysisError::OrphanRay(ray))?;
    parabolic_at_ray_via(d, base, ray, sigma)
}

/// Lie algebra of the group of equivariant automorphisms, in the frame of
/// `base_cone`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutReport {
    pub base_cone: usize,
    pub lie_algebra: MatrixSubspace,
    pub dim: usize,
    pub per_ray: BTreeMap<usize, MatrixSubspace>,
}

/// The JSON shape of an [`AutReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutSummary {
    pub base_cone: usize,
    pub dim: usize,
    pub basis: Vec<RationalMatrix>,
    pub per_ray_dims: BTreeMap<usize, usize>,
}

impl AutReport {
    pub fn summary(&self) -> AutSummary {
        AutSummary {
            base_cone: self.base_cone,
            dim: self.dim,
            basis: self.lie_algebra.basis(),
            per_ray_dims: self.per_ray.iter().map(|(&k, s)| (k, s.dim())).collect(),
        }
    }
}

pub fn aut_lie_algebra(d: &KaneyamaData, base: usize) -> Result<AutReport, AnalysisError> {
    require_valid(d)?;
    check_cone(d, base)?;
    let r = d.rank();
    let mut acc = match d.group().kind {
        GroupKind::GL => MatrixSubspace::full(r),
        GroupKind::SL => MatrixSubspace::trace_zero(r),
    };
    let mut per_ray = BTreeMap::new();
    for ray in 0..d.fan().num_rays() {
        let s = parabolic_at_ray(d, base, ray)?;
        acc = intersect_subspaces(&acc, &s)?;
        per_ray.insert(ray, s);
    }
    Ok(AutReport { base_cone: base, dim: acc.dim(), lie_algebra: acc, per_ray })
}

/// Whether `a`, read in the frame of `base`, extends to an equivariant
/// automorphism. A matrix outside the structure group is not one.
pub fn is_equivariant_automorphism(d: &KaneyamaData, base: usize, a: &RationalMatrix) -> Result<bool, AnalysisError> {
    check_cone(d, base)?;
    check_square(d, a, "matrix")?;
    if a.determinant()?.is_zero() {
        return Err(LatticeError::Singular.into());
    }
    if !d.group().contains(a) {
        return Ok(false);
    }
    for ray in 0..d.fan().num_rays() {
        let sigma = d.fan().first_cone_containing(ray).map_err(|_| AnalysisError::OrphanRay(ray))?;
        let w = ray_weight_vector(d, sigma, ray)?;
        let c = d.transition(base, sigma);
        let local = c.inverse()?.mul(a)?.mul(c)?;
        if !parabolic_pattern(&w).admits(&local) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_partition(r: usize, blocks: &[Vec<usize>]) -> Result<(), AnalysisError> {
    let mut seen = vec![false; r];
    for b in blocks {
        if b.is_empty() {
            return Err(AnalysisError::Partition("empty block".into()));
        }
        for &i in b {
            if i >= r {
                return Err(AnalysisError::Partition(format!("index {i} out of range for rank {r}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(AnalysisError::Partition(format!("index {i} repeated")));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(AnalysisError::Partition(format!("index {i} missing")));
    }
    Ok(())
}

fn block_identity(r: usize, block: &[usize]) -> RationalMatrix {
    let mut e = RationalMatrix::zeros(r, r);
    for &i in block {
        e.set(i, i, Rational::from_integer(1.into()));
    }
    e
}

/// Spanning set of the Lie algebra of the connected center of the block
/// Levi subgroup.
fn levi_center(kind: GroupKind, r: usize, blocks: &[Vec<usize>]) -> Vec<RationalMatrix> {
    match kind {
        GroupKind::GL => blocks.iter().map(|b| block_identity(r, b)).collect(),
        GroupKind::SL => {
            let first = block_identity(r, &blocks[0]);
            let n0 = Rational::from_integer((blocks[0].len() as i64).into());
            blocks[1..]
                .iter()
                .map(|b| {
                    let nb = Rational::from_integer((b.len() as i64).into());
                    first.scale(&nb).sub(&block_identity(r, b).scale(&n0)).expect("same shape")
                })
                .collect()
        }
    }
}

/// Whether the bundle reduces equivariantly to the Levi subgroup of the
/// 0-based block partition `blocks`, tested by containment of the Levi's
/// connected center in the automorphism group.
pub fn levi_reduction_check(d: &KaneyamaData, base: usize, blocks: &[Vec<usize>]) -> Result<bool, AnalysisError> {
    check_partition(d.rank(), blocks)?;
    let aut = aut_lie_algebra(d, base)?;
    Ok(levi_center(d.group().kind, d.rank(), blocks).iter().all(|e| aut.lie_algebra.contains(e)))
}

/// Outcome of [`split_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitVerdict {
    /// A regular semisimple element of the automorphism Lie algebra whose
    /// centralizer lies in it.
    Split {
        certificate: RationalMatrix,
    },
    NotSplit {
        reason: String,
    },
    Unknown {
        reason: String,
    },
}

impl SplitVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SplitVerdict::Split { .. } => "split",
            SplitVerdict::NotSplit { .. } => "not_split",
            SplitVerdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SplitVerdictRepr {
    verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<RationalMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

impl Serialize for SplitVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (certificate, reason) = match self {
            SplitVerdict::Split { certificate } => (Some(certificate.clone()), None),
            SplitVerdict::NotSplit { reason } | SplitVerdict::Unknown { reason } => (None, Some(reason.clone())),
        };
        SplitVerdictRepr { verdict: self.label().to_owned(), certificate, reason }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SplitVerdict {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SplitVerdictRepr::deserialize(de)?;
        match (repr.verdict.as_str(), repr.certificate, repr.reason) {
            ("split", Some(certificate), _) => Ok(SplitVerdict::Split { certificate }),
            ("not_split", _, reason) => Ok(SplitVerdict::NotSplit { reason: reason.unwrap_or_default() }),
            ("unknown", _, reason) => Ok(SplitVerdict::Unknown { reason: reason.unwrap_or_default() }),
            ("split", None, _) => Err(D::Error::custom("split verdict without certificate")),
            (other, _, _) => Err(D::Error::custom(format!("unknown verdict `{other}`"))),
        }
    }
}

fn centralizer_in_group(kind: GroupKind, x: &RationalMatrix) -> Result<MatrixSubspace, AnalysisError> {
    let c = MatrixSubspace::centralizer(x)?;
    Ok(match kind {
        GroupKind::GL => c,
        GroupKind::SL => trace_zero_restrict(&c),
    })
}

fn certifies(kind: GroupKind, lie: &MatrixSubspace, x: &RationalMatrix) -> Result<bool, AnalysisError> {
    Ok(lie.contains(x)
        && is_squarefree(&characteristic_polynomial(x)?)
        && centralizer_in_group(kind, x)?.is_subspace_of(lie))
}

/// Re-checks a split certificate against the automorphism Lie algebra in
/// the frame of `base`.
pub fn verify_split_certificate(d: &KaneyamaData, base: usize, x: &RationalMatrix) -> Result<bool, AnalysisError> {
    check_square(d, x, "certificate")?;
    let aut = aut_lie_algebra(d, base)?;
    certifies(d.group().kind, &aut.lie_algebra, x)
}

/// Decides equivariant splitting where it can: by dimension for
/// `NotSplit`, by a regular semisimple certificate for `Split`. Candidates
/// are integer combinations of the basis with coefficients in
/// `[-10, 10]`, drawn from a ChaCha8 stream seeded by `seed`.
pub fn split_check(d: &KaneyamaData, base: usize, attempts: u32, seed: u64) -> Result<SplitVerdict, AnalysisError> {
    let aut = aut_lie_algebra(d, base)?;
    let r = d.rank();
    let kind = d.group().kind;
    let needed = match kind {
        GroupKind::GL => r,
        GroupKind::SL => r - 1,
    };
    if aut.dim < needed {
        return Ok(SplitVerdict::NotSplit {
            reason: format!("automorphism Lie algebra has dimension {} < {needed}", aut.dim),
        });
    }
    let basis = aut.lie_algebra.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let mut x = RationalMatrix::zeros(r, r);
        for b in &basis {
            let c = rng.gen_range(-SPLIT_COEFFICIENT_BOUND..=SPLIT_COEFFICIENT_BOUND);
            x = x.add(&b.scale(&Rational::from_integer(c.into())))?;
        }
        if certifies(kind, &aut.lie_algebra, &x)? {
            return Ok(SplitVerdict::Split { certificate: x });
        }
    }
    Ok(SplitVerdict::Unknown { reason: format!("no regular semisimple certificate in {attempts} attempts") })
}

/// `g_0` relates the base frames of the two bundles; `g[σ]` relates their
/// `σ`-frames.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismWitness {
    pub g0: RationalMatrix,
    #[serde(with = "crate::json::cone_map")]
    pub g: Vec<RationalMatrix>,
}

fn sign_condition_holds(d: &KaneyamaData, sigma: usize, a: &RationalMatrix) -> Result<bool, AnalysisError> {
    let rays = d.fan().cone(sigma).map_err(DataError::from)?.ray_indices().to_vec();
    for ray in rays {
        let w = ray_weight_vector(d, sigma, ray)?;
        if !parabolic_pattern(&w).admits(a) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks a morphism witness from `d1` to `d2`. Per cone `σ`: nonzero
/// `(g_σ)_{ij}` needs `ξ₂^σ_i = ξ₁^σ_j`, and
/// `g_σ^{-1} P₂(b,σ)^{-1} g_0 P₁(b,σ)` must satisfy the sign condition on
/// the rays of `σ` with the weights of `d1`.
pub fn verify_morphism_witness(
    d1: &KaneyamaData,
    d2: &KaneyamaData,
    base: usize,
    w: &MorphismWitness,
) -> Result<bool, AnalysisError> {
    if d1.fan() != d2.fan() || d1.group() != d2.group() {
        return Err(AnalysisError::Shape("data must share fan and structure group".into()));
    }
    check_cone(d1, base)?;
    let m = d1.num_cones();
    if w.g.len() != m {
        return Err(AnalysisError::Shape(format!("witness has {} cone matrices, fan has {m}", w.g.len())));
    }
    check_square(d1, &w.g0, "g0")?;
    for g in &w.g {
        check_square(d1, g, "g_sigma")?;
    }
    let group = d1.group();
    if !group.contains(&w.g0) || !w.g.iter().all(|g| group.contains(g)) {
        return Ok(false);
    }
    for sigma in 0..m {
        let g = &w.g[sigma];
        let (x1, x2) = (d1.xi(sigma), d2.xi(sigma));
        if g.nonzero_entries().any(|(i, j, _)| x2[i] != x1[j]) {
            return Ok(false);
        }
        let local =
            g.inverse()?.mul(&d2.transition(base, sigma).inverse()?)?.mul(&w.g0)?.mul(d1.transition(base, sigma))?;
        if !sign_condition_holds(d1, sigma, &local)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The subgroup `H` of a reduction: a block Levi (0-based partition) or the
/// diagonal torus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionTarget {
    Levi(Vec<Vec<usize>>),
    DiagonalTorus,
}

impl ReductionTarget {
    fn pattern(&self, r: usize) -> Result<ZeroPattern, AnalysisError> {
        match self {
            ReductionTarget::Levi(blocks) => {
                check_partition(r, blocks)?;
                Ok(ZeroPattern::block_diagonal(r, blocks))
            }
            ReductionTarget::DiagonalTorus => {
                Ok(ZeroPattern::block_diagonal(r, &(0..r).map(|i| vec![i]).collect::<Vec<_>>()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionWitness {
    pub target: ReductionTarget,
    #[serde(with = "crate::json::cone_map")]
    pub alpha: Vec<RationalMatrix>,
    #[serde(with = "crate::json::cone_map")]
    pub beta: Vec<RationalMatrix>,
}

/// Checks a reduction of structure group to `H`:
/// 1. `α_σ^{-1} ρ_σ(t) α_σ ∈ H` for all `t`, decided on the projectors onto
///    the distinct characters of `ξ^σ`, which are independent as functions;
/// 2. `β_τ^{-1} P(τ,σ) β_σ ∈ H`;
/// 3. `β_σ α_σ^{-1}` satisfies the sign condition on the rays of `σ`.
pub fn verify_reduction_witness(d: &KaneyamaData, w: &ReductionWitness) -> Result<bool, AnalysisError> {
    let r = d.rank();
    let m = d.num_cones();
    let pattern = w.target.pattern(r)?;
    if w.alpha.len() != m || w.beta.len() != m {
        return Err(AnalysisError::Shape(format!(
            "witness has {} / {} cone matrices, fan has {m}",
            w.alpha.len(),
            w.beta.len()
        )));
    }
    for a in w.alpha.iter().chain(&w.beta) {
        check_square(d, a, "witness matrix")?;
    }
    let group = d.group();
    if !w.alpha.iter().chain(&w.beta).all(|a| group.contains(a)) {
        return Ok(false);
    }
    let alpha_inv: Vec<RationalMatrix> = w.alpha.iter().map(RationalMatrix::inverse).collect::<Result<_, _>>()?;
    let beta_inv: Vec<RationalMatrix> = w.beta.iter().map(RationalMatrix::inverse).collect::<Result<_, _>>()?;

    for sigma in 0..m {
        let xi = d.xi(sigma);
        let mut distinct: Vec<&Character> = xi.iter().collect();
        distinct.sort_by(|a, b| a.coords().cmp(b.coords()));
        distinct.dedup();
        for chi in distinct {
            let mut proj = RationalMatrix::zeros(r, r);
            for (i, x) in xi.iter().enumerate() {
                if x == chi {
                    proj.set(i, i, Rational::from_integer(1.into()));
                }
            }
            let conj = alpha_inv[sigma].mul(&proj)?.mul(&w.alpha[sigma])?;
            if !pattern.admits(&conj) {
                return Ok(false);
            }
        }
    }
    for tau in 0..m {
        for sigma in 0..m {
            let p = beta_inv[tau].mul(d.transition(tau, sigma))?.mul(&w.beta[sigma])?;
            if !pattern.admits(&p) {
                return Ok(false);
            }
        }
    }
    for sigma in 0..m {
        let ba = w.beta[sigma].mul(&alpha_inv[sigma])?;
        let rays = d.fan().cone(sigma).map_err(DataError::from)?.ray_indices().to_vec();
        for (i, j, _) in ba.nonzero_entries() {
            for &g in &rays {
                let v = d.fan().ray(g);
                if pairing(&d.xi(sigma)[i], v)? < pairing(&d.xi(sigma)[j], v)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
