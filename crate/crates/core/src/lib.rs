//! Topological signatures for talking-face videos.
//!
//! The pipeline builds cell complexes from facial-landmark sequences and raw
//! audio, runs lower-star persistence over eight plane-distance filters plus
//! an amplitude filter, summarizes each diagram by its persistent entropy,
//! and trains a small feedforward network on the resulting 9-dimensional
//! signatures.

pub mod cellcomplex;
pub mod complexbuild;
pub mod dataset;
pub mod filtration;
pub mod mlp;
pub mod persistence;
pub mod signature;
pub mod testgen;

pub use cellcomplex::{Cell, CellComplex, CellId, ComplexError, Violation};
pub use complexbuild::{AudioSignal, BuildError, LandmarkFrame, Triangulation2D};
pub use dataset::{DatasetError, EmotionLabel, Intensity, ManifestEntry, RavdessMeta, VideoRecord};
pub use filtration::{FilterFunction, FilterLabel, Filtration, FiltrationError};
pub use mlp::{AdamState, Gradients, MlpError, MlpParams, Mode, TrainConfig, TrainHistory};
pub use persistence::{DiagramCoords, DiagramPoint, PersistenceDiagram, PersistenceError};
pub use signature::{EntropyPooling, ExtractConfig, SignatureError, TopologicalSignature};
