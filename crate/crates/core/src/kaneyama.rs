//! Kaneyama data `(ξ, P)` of a torus-equivariant principal bundle on a smooth
//! complete toric variety.
//!
//! For every maximal cone `σ` the data holds an `r`-tuple of characters
//! `ξ^σ` (the diagonal homomorphism `t ↦ diag(χ^{ξ^σ_1}(t), ...)`), and for
//! every ordered pair `(τ, σ)` a transition matrix `P(τ, σ)` expressing the
//! `σ`-frame in the `τ`-frame at the identity point of the open orbit.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fan::{validate_fan, Fan, FanError};
use crate::lattice::{pairing, Character, LatticeError, RationalMatrix};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("malformed data: {0}")]
    Shape(String),
    #[error("transitions do not connect cone {tau} to cone {sigma}; cannot complete by cocycles")]
    IncompleteTransitions { tau: usize, sigma: usize },
    #[error("fan is not smooth and complete: {0}")]
    InvalidFan(String),
    #[error("SL data needs characters summing to zero; cone {cone} sums to {sum}")]
    SlTrace { cone: usize, sum: Character },
    #[error("unsupported embedding: {0}")]
    UnsupportedEmbedding(String),
    #[error("support condition violated at cone {cone}, entry ({row},{col}), ray {ray}")]
    SupportViolation { cone: usize, row: usize, col: usize, ray: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("eta for cone {cone} is not a permutation of 0..{rank}")]
    InvalidPermutation { cone: usize, rank: usize },
    #[error("matrix not in the structure group: {0}")]
    NotInGroup(String),
    #[error("data fails validation: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    GL,
    SL,
}

/// The structure group `G`, realized as `GL(r)` or `SL(r)` with the diagonal
/// matrices of the group as its maximal torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupTag {
    pub kind: GroupKind,
    pub rank: usize,
}

impl GroupTag {
    pub fn gl(rank: usize) -> Self {
        GroupTag { kind: GroupKind::GL, rank }
    }

    pub fn sl(rank: usize) -> Self {
        GroupTag { kind: GroupKind::SL, rank }
    }

    /// Whether `a` is an element of the group.
    pub fn contains(&self, a: &RationalMatrix) -> bool {
        if a.rows() != self.rank || a.cols() != self.rank {
            return false;
        }
        match a.determinant() {
            Ok(det) => match self.kind {
                GroupKind::GL => !det.is_zero(),
                GroupKind::SL => det.is_one(),
            },
            Err(_) => false,
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GroupKind::GL => "GL",
            GroupKind::SL => "SL",
        };
        write!(f, "{k}({})", self.rank)
    }
}

impl FromStr for GroupTag {
    type Err = String;

    /// Parses `GL:2`, `SL:3`, `GL2` or `gl(2)`.
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().to_ascii_uppercase();
        let (kind, rest) = if let Some(r) = t.strip_prefix("GL") {
            (GroupKind::GL, r)
        } else if let Some(r) = t.strip_prefix("SL") {
            (GroupKind::SL, r)
        } else {
            return Err(format!("unknown group `{s}`"));
        };
        let digits = rest.trim_matches(|c: char| c == ':' || c == '(' || c == ')');
        let rank: usize = digits.parse().map_err(|_| format!("bad rank in `{s}`"))?;
        if rank == 0 {
            return Err("rank must be at least 1".into());
        }
        Ok(GroupTag { kind, rank })
    }
}

/// Combinatorial data of an equivariant principal bundle in diagonal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KaneyamaData {
    fan: Fan,
    group: GroupTag,
    xi: Vec<Vec<Character>>,
    // row-major over (tau, sigma)
    trans: Vec<RationalMatrix>,
}

impl KaneyamaData {
    /// Builds data from characters and the full table of transitions,
    /// `trans[tau * m + sigma] = P(tau, sigma)`. Only shapes are checked.
    pub fn new(
        fan: Fan,
        group: GroupTag,
        xi: Vec<Vec<Character>>,
        trans: Vec<RationalMatrix>,
    ) -> Result<Self, DataError> {
        let m = fan.num_cones();
        let r = group.rank;
        if r == 0 {
            return Err(DataError::Shape("group rank must be at least 1".into()));
        }
        if xi.len() != m {
            return Err(DataError::Shape(format!("xi has {} cones, fan has {m}", xi.len())));
        }
        for (c, chars) in xi.iter().enumerate() {
            if chars.len() != r {
                return Err(DataError::Shape(format!("xi[{c}] has {} characters, rank is {r}", chars.len())));
            }
            if let Some(bad) = chars.iter().find(|u| u.dim() != fan.dim()) {
                return Err(DataError::Shape(format!(
                    "xi[{c}] contains {bad} of dimension {}, lattice has {}",
                    bad.dim(),
                    fan.dim()
                )));
            }
        }
        if trans.len() != m * m {
            return Err(DataError::Shape(format!("expected {} transitions, found {}", m * m, trans.len())));
        }
        if let Some(k) = trans.iter().position(|p| p.rows() != r || p.cols() != r) {
            return Err(DataError::Shape(format!("P({},{}) is not {r}x{r}", k / m, k % m)));
        }
        Ok(KaneyamaData { fan, group, xi, trans })
    }

    /// Builds data from a set of transitions that connects all maximal cones.
    ///
    /// Missing pairs are filled in from a spanning tree rooted at the lowest
    /// cone of each pair's component, using `P(τ,σ) = P(ρ,τ)^{-1} P(ρ,σ)`.
    /// Supplied pairs are kept verbatim, so conflicting input surfaces as a
    /// cocycle failure in [`validate`]. A missing diagonal entry is the
    /// identity.
    pub fn from_partial(
        fan: Fan,
        group: GroupTag,
        xi: Vec<Vec<Character>>,
        given: BTreeMap<(usize, usize), RationalMatrix>,
    ) -> Result<Self, DataError> {
        let m = fan.num_cones();
        let r = group.rank;
        for (&(t, s), p) in &given {
            if t >= m || s >= m {
                return Err(DataError::Shape(format!("transition key ({t},{s}) out of range")));
            }
            if p.rows() != r || p.cols() != r {
                return Err(DataError::Shape(format!("P({t},{s}) is not {r}x{r}")));
            }
        }
        let mut trans: Vec<Option<RationalMatrix>> = vec![None; m * m];
        for (&(t, s), p) in &given {
            trans[t * m + s] = Some(p.clone());
        }
        for s in 0..m {
            trans[s * m + s].get_or_insert_with(|| RationalMatrix::identity(r));
        }

        if trans.iter().any(Option::is_none) {
            // frame[c] = P(0, c) along a BFS tree over given pairs
            let mut frame: Vec<Option<RationalMatrix>> = vec![None; m];
            if m > 0 {
                frame[0] = Some(RationalMatrix::identity(r));
            }
            let mut queue = VecDeque::from([0usize]);
            while let Some(c) = queue.pop_front() {
                let base = frame[c].clone().expect("queued cones have frames");
                for d in 0..m {
                    if frame[d].is_some() {
                        continue;
                    }
                    let next = if let Some(p) = given.get(&(c, d)) {
                        Some(base.mul(p)?)
                    } else if let Some(p) = given.get(&(d, c)) {
                        Some(base.mul(&p.inverse()?)?)
                    } else {
                        None
                    };
                    if let Some(f) = next {
                        frame[d] = Some(f);
                        queue.push_back(d);
                    }
                }
            }
            for t in 0..m {
                for s in 0..m {
                    if trans[t * m + s].is_some() {
                        continue;
                    }
                    let (Some(ft), Some(fs)) = (&frame[t], &frame[s]) else {
                        return Err(DataError::IncompleteTransitions { tau: t, sigma: s });
                    };
                    trans[t * m + s] = Some(ft.inverse()?.mul(fs)?);
                }
            }
        }
        let trans = trans.into_iter().map(|p| p.expect("all pairs filled")).collect();
        Self::new(fan, group, xi, trans)
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn rank(&self) -> usize {
        self.group.rank
    }

    pub fn num_cones(&self) -> usize {
        self.fan.num_cones()
    }

    /// The character tuple `ξ^σ`.
    pub fn xi(&self, sigma: usize) -> &[Character] {
        &self.xi[sigma]
    }

    pub fn all_xi(&self) -> &[Vec<Character>] {
        &self.xi
    }

    /// The transition `P(τ, σ)`.
    pub fn transition(&self, tau: usize, sigma: usize) -> &RationalMatrix {
        &self.trans[tau * self.num_cones() + sigma]
    }

    fn check_cone(&self, c: usize) -> Result<(), DataError> {
        if c < self.num_cones() {
            Ok(())
        } else {
            Err(FanError::ConeOutOfRange(c).into())
        }
    }

    /// `⟨ξ^σ_i, v_γ⟩` for `i = 1..r`.
    pub fn restriction(&self, sigma: usize, ray: usize) -> Result<Vec<i64>, DataError> {
        self.check_cone(sigma)?;
        let v = self.fan.ray(ray);
        Ok(self.xi[sigma].iter().map(|u| pairing(u, v)).collect::<Result<_, _>>()?)
    }

    /// `⟨ξ^τ_i - ξ^σ_j, v_γ⟩`.
    fn gap(&self, tau: usize, i: usize, sigma: usize, j: usize, ray: usize) -> Result<i64, DataError> {
        let v = self.fan.ray(ray);
        let a = pairing(&self.xi[tau][i], v)?;
        let b = pairing(&self.xi[sigma][j], v)?;
        a.checked_sub(b).ok_or(DataError::Lattice(LatticeError::Overflow))
    }

    /// First nonzero entry of `a` violating the support condition on the
    /// rays `rays`, comparing row characters of `tau` against column
    /// characters of `sigma`.
    fn support_violation(
        &self,
        tau: usize,
        sigma: usize,
        a: &RationalMatrix,
        rays: &[usize],
    ) -> Result<Option<(usize, usize, usize)>, DataError> {
        for (i, j, _) in a.nonzero_entries() {
            for &g in rays {
                if self.gap(tau, i, sigma, j, g)? < 0 {
                    return Ok(Some((i, j, g)));
                }
            }
        }
        Ok(None)
    }

    fn with_transitions(&self, trans: Vec<RationalMatrix>) -> Self {
        KaneyamaData { fan: self.fan.clone(), group: self.group, xi: self.xi.clone(), trans }
    }

    /// Returns a copy with `P(τ, σ)` replaced, leaving every other pair alone.
    pub fn with_transition(&self, tau: usize, sigma: usize, p: RationalMatrix) -> Result<Self, DataError> {
        self.check_cone(tau)?;
        self.check_cone(sigma)?;
        if p.rows() != self.rank() || p.cols() != self.rank() {
            return Err(DataError::RankMismatch { expected: self.rank(), found: p.rows() });
        }
        let mut trans = self.trans.clone();
        trans[tau * self.num_cones() + sigma] = p;
        Ok(self.with_transitions(trans))
    }
}

/// Checks the defining conditions of Kaneyama data pair by pair.
///
/// Rules, each reporting its first failure:
/// * `fan`: the fan passes [`validate_fan`];
/// * `restriction_multisets`: for every pair, the restriction vectors of
///   `ξ^σ` and `ξ^τ` to the shared rays agree as multisets;
/// * `support`: nonzero `P(τ,σ)_{ij}` needs `⟨ξ^τ_i - ξ^σ_j, v_γ⟩ ≥ 0` on
///   every shared ray;
/// * `identity_diagonal`: `P(σ,σ) = I`;
/// * `cocycle`: `P(τ,σ) P(σ,δ) P(δ,τ) = I` for all triples;
/// * `group_membership`: every transition lies in the structure group.
pub fn validate(d: &KaneyamaData) -> ValidationReport {
    let mut report = ValidationReport::new();
    let fan_report = validate_fan(&d.fan);
    report.record(
        "fan",
        (!fan_report.is_valid()).then(|| {
            fan_report.failures().map(|c| c.detail.clone().unwrap_or_default()).collect::<Vec<_>>().join("; ")
        }),
    );

    let m = d.num_cones();
    let mut multiset_failure = None;
    let mut support_failure = None;
    for t in 0..m {
        for s in 0..m {
            let shared = match d.fan.shared_rays(s, t) {
                Ok(v) => v,
                Err(e) => {
                    multiset_failure.get_or_insert(e.to_string());
                    continue;
                }
            };
            if multiset_failure.is_none() {
                match restriction_multisets_agree(d, t, s, &shared) {
                    Ok(true) => {}
                    Ok(false) => {
                        multiset_failure =
                            Some(format!("pair ({t},{s}): restrictions to shared rays {shared:?} differ as multisets"))
                    }
                    Err(e) => multiset_failure = Some(format!("pair ({t},{s}): {e}")),
                }
            }
            if support_failure.is_none() {
                match d.support_violation(t, s, d.transition(t, s), &shared) {
                    Ok(None) => {}
                    Ok(Some((i, j, g))) => {
                        support_failure = Some(format!(
                            "P({t},{s}) entry ({i},{j}) = {} is nonzero but <xi^{t}_{i} - xi^{s}_{j}, v_{g}> < 0",
                            d.transition(t, s).get(i, j)
                        ))
                    }
                    Err(e) => support_failure = Some(format!("pair ({t},{s}): {e}")),
                }
            }
        }
    }
    report.record("restriction_multisets", multiset_failure);
    report.record("support", support_failure);

    let diag_failure =
        (0..m).find(|&s| !d.transition(s, s).is_identity()).map(|s| format!("P({s},{s}) is not the identity"));
    report.record("identity_diagonal", diag_failure);

    let mut cocycle_failure = None;
    'triples: for t in 0..m {
        for s in 0..m {
            let ts = d.transition(t, s);
            for k in 0..m {
                let prod = ts.mul(d.transition(s, k)).and_then(|x| x.mul(d.transition(k, t)));
                if !prod.map(|p| p.is_identity()).unwrap_or(false) {
                    cocycle_failure = Some(format!("triple ({t},{s},{k}): P({t},{s}) P({s},{k}) P({k},{t}) != I"));
                    break 'triples;
                }
            }
        }
    }
    report.record("cocycle", cocycle_failure);

    let group = d.group;
    let membership_failure =
        (0..m * m).find(|&k| !group.contains(&d.trans[k])).map(|k| format!("P({},{}) is not in {group}", k / m, k % m));
    report.record("group_membership", membership_failure);

    report
}

fn restriction_multisets_agree(
    d: &KaneyamaData,
    tau: usize,
    sigma: usize,
    shared: &[usize],
) -> Result<bool, DataError> {
    let rows = |c: usize| -> Result<Vec<Vec<i64>>, DataError> {
        let per_ray: Vec<Vec<i64>> = shared.iter().map(|&g| d.restriction(c, g)).collect::<Result<_, _>>()?;
        let mut out: Vec<Vec<i64>> = (0..d.rank()).map(|i| per_ray.iter().map(|v| v[i]).collect()).collect();
        out.sort();
        Ok(out)
    };
    Ok(rows(tau)? == rows(sigma)?)
}

/// Whether `a`, placed as a transition from the `σ`-frame to the `τ`-frame,
/// extends over `X_σ ∩ X_τ`: every nonzero `a_{ij}` needs
/// `⟨ξ^τ_i - ξ^σ_j, v_γ⟩ ≥ 0` for every shared ray `γ`.
pub fn extends_on_overlap(d: &KaneyamaData, tau: usize, sigma: usize, a: &RationalMatrix) -> Result<bool, DataError> {
    let r = d.rank();
    if a.rows() != r || a.cols() != r {
        return Err(DataError::RankMismatch { expected: r, found: a.rows() });
    }
    let shared = d.fan.shared_rays(tau, sigma)?;
    Ok(d.support_violation(tau, sigma, a, &shared)?.is_none())
}

fn require_valid_fan(f: &Fan) -> Result<(), DataError> {
    let rep = validate_fan(f);
    if rep.is_valid() {
        Ok(())
    } else {
        let msg = rep.failures().map(|c| c.detail.clone().unwrap_or_else(|| c.rule.clone())).collect::<Vec<_>>();
        Err(DataError::InvalidFan(msg.join("; ")))
    }
}

/// Data of the frame bundle of the tangent bundle.
///
/// `ξ^σ` is the dual basis of the generators of `σ`, and
/// `P(τ,σ)_{ij} = ⟨u_i(τ), v_j(σ)⟩`: the Jacobian of the change of toric
/// coordinates evaluated at the identity point.
pub fn tangent_frame_data(f: &Fan) -> Result<KaneyamaData, DataError> {
    require_valid_fan(f)?;
    let m = f.num_cones();
    let n = f.dim();
    let xi: Vec<Vec<Character>> = (0..m).map(|c| f.dual_characters(c)).collect::<Result<_, _>>()?;
    let gens: Vec<_> = (0..m).map(|c| f.generators(c)).collect::<Result<_, _>>()?;
    let mut trans = Vec::with_capacity(m * m);
    for t in 0..m {
        for s in 0..m {
            let mut rows = Vec::with_capacity(n);
            for u in &xi[t] {
                let row: Vec<i64> = gens[s].iter().map(|v| pairing(u, v)).collect::<Result<_, _>>()?;
                rows.push(row);
            }
            let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
            trans.push(RationalMatrix::from_int_rows(&refs)?);
        }
    }
    KaneyamaData::new(f.clone(), GroupTag::gl(n), xi, trans)
}

/// Data with all transitions trivial and `⟨ξ^σ_i, v_γ⟩ = m(γ)_i` for every
/// ray `γ` of `σ`. `m` is indexed by ray.
pub fn split_data(f: &Fan, m: &[Vec<i64>], group: GroupTag) -> Result<KaneyamaData, DataError> {
    require_valid_fan(f)?;
    let r = group.rank;
    if m.len() != f.num_rays() {
        return Err(DataError::Shape(format!("m has {} entries, fan has {} rays", m.len(), f.num_rays())));
    }
    if let Some(g) = m.iter().position(|v| v.len() != r) {
        return Err(DataError::RankMismatch { expected: r, found: m[g].len() });
    }
    let n = f.dim();
    let mut xi = Vec::with_capacity(f.num_cones());
    for c in 0..f.num_cones() {
        let duals = f.dual_characters(c)?;
        let rays = f.cone(c)?.ray_indices();
        let mut chars = Vec::with_capacity(r);
        for i in 0..r {
            let mut acc = Character::zero(n);
            for (k, &g) in rays.iter().enumerate() {
                acc = acc.checked_add(&duals[k].checked_scale(m[g][i])?)?;
            }
            chars.push(acc);
        }
        if group.kind == GroupKind::SL {
            let sum = chars.iter().try_fold(Character::zero(n), |a, u| a.checked_add(u))?;
            if !sum.is_zero() {
                return Err(DataError::SlTrace { cone: c, sum });
            }
        }
        xi.push(chars);
    }
    let k = f.num_cones();
    let trans = vec![RationalMatrix::identity(r); k * k];
    KaneyamaData::new(f.clone(), group, xi, trans)
}

/// A homomorphism `φ: G → G'` used to extend the structure group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Embedding {
    Identity,
    /// `GL(r) → GL(r')`: `A` occupies the rows and columns `positions`; each
    /// remaining diagonal slot, in ascending order, carries `det(A)^k` with
    /// `k` taken from `det_powers`.
    Block {
        target_rank: usize,
        positions: Vec<usize>,
        det_powers: Vec<i64>,
    },
    /// `GL(r) → SL(r+1)`, `A ↦ diag(A, det(A)^{-1})`.
    SlBalance,
}

impl FromStr for Embedding {
    type Err = String;

    /// `identity`, `sl-balance`, or `block:<target>:<p,p,...>:<k,k,...>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "identity" => return Ok(Embedding::Identity),
            "sl-balance" => return Ok(Embedding::SlBalance),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.first() != Some(&"block") || !(3..=4).contains(&parts.len()) {
            return Err(format!("unknown embedding `{s}`"));
        }
        let list = |t: &str| -> Result<Vec<i64>, String> {
            t.split(',')
                .filter(|x| !x.is_empty())
                .map(|x| x.trim().parse().map_err(|_| format!("bad number `{x}`")))
                .collect()
        };
        let target_rank: usize = parts[1].parse().map_err(|_| format!("bad target rank `{}`", parts[1]))?;
        let positions = list(parts[2])?
            .into_iter()
            .map(|p| usize::try_from(p).map_err(|_| format!("negative position {p}")))
            .collect::<Result<_, _>>()?;
        let det_powers = if parts.len() == 4 { list(parts[3])? } else { Vec::new() };
        Ok(Embedding::Block { target_rank, positions, det_powers })
    }
}

impl Embedding {
    fn target(&self, source: GroupTag) -> Result<GroupTag, DataError> {
        match self {
            Embedding::Identity => Ok(source),
            Embedding::SlBalance => Ok(GroupTag::sl(source.rank + 1)),
            Embedding::Block { target_rank, positions, det_powers } => {
                let r = source.rank;
                if positions.len() != r {
                    return Err(DataError::UnsupportedEmbedding(format!(
                        "block embedding lists {} positions for rank {r}",
                        positions.len()
                    )));
                }
                if *target_rank < r || det_powers.len() != target_rank - r {
                    return Err(DataError::UnsupportedEmbedding(format!(
                        "block embedding into rank {target_rank} needs {} determinant powers",
                        target_rank.saturating_sub(r)
                    )));
                }
                let mut seen = vec![false; *target_rank];
                for &p in positions {
                    if p >= *target_rank || std::mem::replace(&mut seen[p], true) {
                        return Err(DataError::UnsupportedEmbedding(format!("bad block position {p}")));
                    }
                }
                Ok(GroupTag::gl(*target_rank))
            }
        }
    }

    /// Slots of the target not occupied by the block, ascending.
    fn free_slots(&self, target_rank: usize) -> Vec<usize> {
        match self {
            Embedding::Block { positions, .. } => (0..target_rank).filter(|q| !positions.contains(q)).collect(),
            Embedding::SlBalance => vec![target_rank - 1],
            Embedding::Identity => Vec::new(),
        }
    }

    fn det_powers(&self) -> Vec<i64> {
        match self {
            Embedding::Block { det_powers, .. } => det_powers.clone(),
            Embedding::SlBalance => vec![-1],
            Embedding::Identity => Vec::new(),
        }
    }

    fn positions(&self, r: usize) -> Vec<usize> {
        match self {
            Embedding::Block { positions, .. } => positions.clone(),
            _ => (0..r).collect(),
        }
    }

    /// The image `φ(a)` of a source-group matrix.
    pub fn apply_matrix(&self, source: GroupTag, a: &RationalMatrix) -> Result<RationalMatrix, DataError> {
        let target = self.target(source)?;
        if a.rows() != source.rank || a.cols() != source.rank {
            return Err(DataError::RankMismatch { expected: source.rank, found: a.rows() });
        }
        if matches!(self, Embedding::Identity) {
            return Ok(a.clone());
        }
        let det = a.determinant()?;
        if det.is_zero() {
            return Err(LatticeError::Singular.into());
        }
        let pos = self.positions(source.rank);
        let mut out = RationalMatrix::zeros(target.rank, target.rank);
        for (i, &pi) in pos.iter().enumerate() {
            for (j, &pj) in pos.iter().enumerate() {
                out.set(pi, pj, a.get(i, j).clone());
            }
        }
        for (q, k) in self.free_slots(target.rank).into_iter().zip(self.det_powers()) {
            out.set(q, q, num_traits::pow::Pow::pow(&det, k as i32));
        }
        Ok(out)
    }

    /// The image weights `ξ'` of a character tuple.
    fn apply_characters(&self, source: GroupTag, chars: &[Character]) -> Result<Vec<Character>, DataError> {
        let target = self.target(source)?;
        if matches!(self, Embedding::Identity) {
            return Ok(chars.to_vec());
        }
        let dim = chars.first().map_or(0, Character::dim);
        let total = chars.iter().try_fold(Character::zero(dim), |a, u| a.checked_add(u))?;
        let mut out = vec![Character::zero(dim); target.rank];
        for (i, p) in self.positions(source.rank).into_iter().enumerate() {
            out[p] = chars[i].clone();
        }
        for (q, k) in self.free_slots(target.rank).into_iter().zip(self.det_powers()) {
            out[q] = total.checked_scale(k)?;
        }
        Ok(out)
    }
}

/// Data of the bundle with structure group extended along `phi`:
/// `ξ' = φ_*(ξ)` and `P' = φ(P)`.
pub fn extend_structure_group(d: &KaneyamaData, phi: &Embedding) -> Result<KaneyamaData, DataError> {
    let target = phi.target(d.group)?;
    let m = d.num_cones();
    let xi = (0..m).map(|c| phi.apply_characters(d.group, d.xi(c))).collect::<Result<_, _>>()?;
    let trans = d.trans.iter().map(|p| phi.apply_matrix(d.group, p)).collect::<Result<_, _>>()?;
    KaneyamaData::new(d.fan.clone(), target, xi, trans)
}

/// Per-cone permutations `η(σ)` (0-based, `η[σ][i]` is the image of `i`) and
/// matrices `β_σ` relating two sets of Kaneyama data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub eta: Vec<Vec<usize>>,
    pub beta: Vec<RationalMatrix>,
}

impl EquivalenceWitness {
    pub fn identity(cones: usize, rank: usize) -> Self {
        EquivalenceWitness { eta: vec![(0..rank).collect(); cones], beta: vec![RationalMatrix::identity(rank); cones] }
    }
}

fn check_permutation(p: &[usize], rank: usize, cone: usize) -> Result<(), DataError> {
    let mut seen = vec![false; rank];
    if p.len() != rank {
        return Err(DataError::InvalidPermutation { cone, rank });
    }
    for &x in p {
        if x >= rank || std::mem::replace(&mut seen[x], true) {
            return Err(DataError::InvalidPermutation { cone, rank });
        }
    }
    Ok(())
}

/// Transforms `d` by `w`: `ξ'^σ_{η(i)} = ξ^σ_i` and
/// `P'(τ,σ) = β_τ^{-1} P(τ,σ) β_σ`.
///
/// Each `β_σ` must lie in the group and satisfy the support rule: nonzero
/// `(β_σ)_{ij}` needs `⟨ξ^σ_i - ξ'^σ_j, v_γ⟩ ≥ 0` for every ray `γ` of `σ`.
pub fn apply_equivalence_witness(d: &KaneyamaData, w: &EquivalenceWitness) -> Result<KaneyamaData, DataError> {
    let m = d.num_cones();
    let r = d.rank();
    if w.eta.len() != m || w.beta.len() != m {
        return Err(DataError::Shape(format!("witness covers {} / {} cones, data has {m}", w.eta.len(), w.beta.len())));
    }
    let mut xi = Vec::with_capacity(m);
    for c in 0..m {
        check_permutation(&w.eta[c], r, c)?;
        let b = &w.beta[c];
        if b.rows() != r || b.cols() != r {
            return Err(DataError::RankMismatch { expected: r, found: b.rows() });
        }
        if !d.group.contains(b) {
            return Err(DataError::NotInGroup(format!("beta[{c}] is not in {}", d.group)));
        }
        let mut permuted = vec![Character::zero(d.fan.dim()); r];
        for (i, &e) in w.eta[c].iter().enumerate() {
            permuted[e] = d.xi[c][i].clone();
        }
        let rays = d.fan.cone(c)?.ray_indices();
        for (i, j, _) in b.nonzero_entries() {
            for &g in rays {
                let v = d.fan.ray(g);
                if pairing(&d.xi[c][i], v)? < pairing(&permuted[j], v)? {
                    return Err(DataError::SupportViolation { cone: c, row: i, col: j, ray: g });
                }
            }
        }
        xi.push(permuted);
    }
    let inverses: Vec<RationalMatrix> = w.beta.iter().map(RationalMatrix::inverse).collect::<Result<_, _>>()?;
    let mut trans = Vec::with_capacity(m * m);
    for t in 0..m {
        for s in 0..m {
            trans.push(inverses[t].mul(d.transition(t, s))?.mul(&w.beta[s])?);
        }
    }
    KaneyamaData::new(d.fan.clone(), d.group, xi, trans)
}

/// Whether `w` carries `d` to `d2` exactly.
pub fn verify_equivalence_witness(
    d: &KaneyamaData,
    d2: &KaneyamaData,
    w: &EquivalenceWitness,
) -> Result<bool, DataError> {
    if d.rank() != d2.rank() {
        return Err(DataError::RankMismatch { expected: d.rank(), found: d2.rank() });
    }
    if d.fan != d2.fan || d.group != d2.group {
        return Ok(false);
    }
    match apply_equivalence_witness(d, w) {
        Ok(image) => Ok(&image == d2),
        Err(DataError::SupportViolation { .. }) | Err(DataError::NotInGroup(_)) => Ok(false),
        Err(e) => Err(e),
    }
}
