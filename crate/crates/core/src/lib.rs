//! Exact arithmetic for torus-equivariant principal bundles on smooth
//! complete toric varieties, described by Kaneyama data.

pub mod analysis;
pub mod cli;
pub mod fan;
pub mod json;
pub mod kaneyama;
pub mod lattice;
pub mod liealg;
pub mod poly;
pub mod report;

pub use analysis::{
    aut_lie_algebra, is_equivariant_automorphism, levi_reduction_check, parabolic_at_ray, ray_weight_vector,
    split_check, verify_morphism_witness, verify_reduction_witness, verify_split_certificate, AnalysisError, AutReport,
    AutSummary, MorphismWitness, ReductionTarget, ReductionWitness, SplitVerdict,
};
pub use fan::{validate_fan, Cone, Fan, FanError};
pub use kaneyama::{
    apply_equivalence_witness, extend_structure_group, extends_on_overlap, split_data, tangent_frame_data, validate,
    verify_equivalence_witness, DataError, Embedding, EquivalenceWitness, GroupKind, GroupTag, KaneyamaData,
};
pub use lattice::{pairing, Character, LatticeError, LatticeVector, Rational, RationalMatrix};
pub use liealg::{MatrixSubspace, WeightVector, ZeroPattern};
pub use report::{Check, ValidationReport};
