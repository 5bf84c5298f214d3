//! Anchor-relative embedding coordinates.
//!
//! An embedding space produced by one training run differs from a retrained
//! one by (approximately) an angle-preserving transformation: a rotation or
//! reflection plus rescaling. Re-expressing every sample as its vector of
//! cosine similarities to a fixed, ordered anchor set cancels exactly that
//! family of transformations, which makes independently produced spaces
//! directly comparable and lets task heads transfer across encoders with no
//! retraining.
//!
//! The crate provides:
//!
//! - [`space`]: embedding-space containers, validation, centering;
//! - [`anchors`]: seeded anchor selection (uniform, farthest point, k-means,
//!   frequency top-k) and cross-space anchor correspondences;
//! - [`relative`]: the cosine projection, its cluster-quantized variant, and
//!   the analytic Jacobian of the anchor similarities;
//! - [`metrics`]: Jaccard@k / MRR / cosine alignment reports, brute-force
//!   KNN, Pearson correlation, and the latent-similarity performance proxy;
//! - [`transforms`]: seeded orthogonal maps, rescalings, translations, and
//!   bounded distortion used as the invariance test harness;
//! - [`stitch`]: synthetic zero-shot stitching experiments with ridge linear
//!   heads.

pub mod anchors;
mod error;
pub mod linalg;
pub mod metrics;
pub mod relative;
pub mod space;
pub mod stitch;
pub mod transforms;

pub use anchors::{AnchorCorrespondence, AnchorSet, SelectionConfig, Strategy};
pub use error::{Diagnostic, Error, Result};
pub use metrics::AlignmentReport;
pub use relative::{cosine, project, project_quantized, RelativeSpace};
pub use space::{EmbeddingSpace, VectorSet};
pub use transforms::TransformSpec;
