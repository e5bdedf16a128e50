//! Obstacle families, posets and *-embeddings, and the existential theory of
//! families of extensions under inclusion, meets and amalgamability.

pub mod obstacles;
pub mod poset;
pub mod sentence;
pub mod solver;

pub use obstacles::{family_members, is_antichain, ObstacleFamily, DEFAULT_MEMBER_BOUND};
pub use poset::{check_star_embedding, downset_embedding, DownsetEmbedding, EmbeddingReport, FinitePoset};
pub use sentence::{parse_sentence, Literal, Sentence};
pub use solver::{check_witness, decide_sentence, decide_with_bound, Verdict, Witness};
