//! Exact dyadic-model computations behind the bloomlab experiments:
//! meshes and step functions, Muckenhoupt/reverse-Hölder brackets,
//! sparse families and forms, model operators with their commutators,
//! and rational-arithmetic exponent calculus.

pub mod bounds;
pub mod cube;
pub mod error;
pub mod mesh;
pub mod op;
pub mod params;
pub mod sparse;
pub mod step;
pub mod weights;

pub use cube::DyadicCube;
pub use error::{Error, Result};
pub use mesh::{Mesh, MeshKind, Region, Resolved};
pub use params::{conj, Ext, FormParams};
pub use step::StepFunction;
