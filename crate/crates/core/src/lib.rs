//! Generic objects for binary-string Cohen forcing at desk scale.

pub mod bits;
pub mod blockchain;
pub mod conditions;
pub mod dense;
pub mod error;
pub mod exact_pair;
pub mod gen;
pub mod names;
pub mod render;
pub mod report;
pub mod surgery;
pub mod theory;

pub use bits::BitString;
pub use conditions::{interleave_join, stride_extract, IndexSet, MatrixCondition};
pub use dense::{
    check_dense_open, meets, DenseRequirement, DensityReport, Registry, RequirementSchedule,
    RequirementSpec, ScheduleStep,
};
pub use error::{Error, Result};
pub use report::{Finding, Report};
pub use names::{
    evaluate, find_deciding_extension, forces_in, partial_evaluate, search_separating_name,
    Decision, Evaluation, FiniteName, SeparatingName,
};
pub use surgery::{
    build_mutable_blockchain, decode_surgery, good_points, graft, immunize, is_immune, prime,
    substitute, verify_mutable, verify_preservation, GoodPointSet, MutableBlockchain, MutableRow,
    PrimedFamily, SurgeryDecode,
};
pub use exact_pair::{
    build_exact_pair, build_exact_partner, tower_from_matrix, verify_exact_pair, DiagEntry,
    ExactPairResult, Tower,
};
pub use render::{render_blockchain, render_matrix, render_primed, RenderFormat};
