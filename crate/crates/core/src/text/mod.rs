//! Curriculum extraction from noisy web metadata.

pub mod curriculum;
pub mod embedding;
pub mod matching;
pub mod stem;
pub mod tokenize;

pub use curriculum::{
    build_curriculum, build_region, fuse_modalities, CurriculumRegion, CurriculumScores, Group,
    MatchConfig, MatchMethod, ModalityBags, ModalityScores, ModalityWeights,
};
pub use embedding::{load_embeddings, EmbeddingTable};
pub use matching::{match_score_embedding, match_score_exact, match_score_lt_we, Bag};
pub use stem::stem;
pub use tokenize::tokenize;
