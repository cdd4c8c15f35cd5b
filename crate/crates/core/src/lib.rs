//! Feature-preserving triangle-mesh denoising with element-based normal voting tensors.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, threading and the
//! command-line front end live in the `envt` companion crate.
//!
//! A denoising run alternates two stages for a fixed number of iterations:
//!
//! 1. **Face-normal filtering** ([`envt`]): every face gathers a neighborhood
//!    ([`neighborhood`]), weights its members by normal similarity, builds an
//!    area-weighted normal voting tensor, quantizes the tensor's normalized
//!    eigenvalues to `{0, 1}` and projects its normal onto the dominant
//!    eigenspace.
//! 2. **Vertex update** ([`vertex`]): positions follow the filtered normals by
//!    gradient steps on an edge/normal orthogonality energy.
//!
//! [`noise`] synthesizes test noise and analyzes edge flips; [`metrics`]
//! compares results against a ground truth.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod curvature;
pub mod eigen;
pub mod envt;
pub mod exec;
pub mod geom;
pub mod mesh;
pub mod metrics;
pub mod neighborhood;
pub mod noise;
pub mod pipeline;
pub mod shapes;
pub mod vertex;

pub use curvature::{cotangent_mean_curvature, CurvatureField, ScalarField, VertexArea};
pub use eigen::{eigen_sym3, SymEigen};
pub use envt::{Envt, FeatureClass, FilterParams};
pub use exec::{Executor, Serial};
pub use geom::{Mat3, Vec3};
pub use mesh::{Edge, MeshError, TriMesh};
pub use neighborhood::{Neighborhood, NeighborhoodScheme};
pub use noise::{FlipModel, FlipReport, NoiseDirection, NoiseModel, NoiseSpec};
pub use pipeline::{denoise_pipeline, DenoiseParams, Observer, Phase};
pub use vertex::VertexUpdateParams;
