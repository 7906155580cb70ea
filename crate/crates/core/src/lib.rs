//! Phonetic similarity graphs.
//!
//! Words of a corpus are transcribed to IPA phoneme sequences, every pair is
//! scored with Needleman–Wunsch global alignment, and the scores are stored
//! as one signed byte per edge of the upper-triangular adjacency matrix.
//! Filtered views of that graph answer neighborhood and path queries and can
//! be exported for Gephi.

pub mod aligner;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod graph;
pub mod store;
pub mod triangle;

pub use aligner::{nw_align, nw_score, oracle_score, Aligner, Alignment, ScoringScheme, Slot};
pub use corpus::{
    build_inventory, encode_word, load_corpus, tokenize_ipa, CorpusRow, DigraphSet, EncodedWord,
    PhonemeId, PhonemeInventory,
};
pub use engine::{compute_all_pairs, preflight_range_check, ComputePlan, ComputeStats, EdgeSink};
pub use error::{Error, ErrorKind, Result};
pub use graph::{ego_network, filter_view, shortest_path, GraphView, WordPath};
pub use store::{histogram, normalize, EdgeStore, EdgeStoreManifest, EdgeStoreWriter, Histogram};
pub use triangle::TriangleGeometry;
