//! Minimal-work grasp quality for parallel-jaw grasps on deformable hollow objects.
//!
//! The pipeline runs from a triangle mesh to a ranked set of grasps:
//!
//! 1. [`mesh`] loads the object and answers ray and surface queries.
//! 2. [`contact`] estimates the pad/object contact area and its pressure field by
//!    casting one ray per pad cell, and builds antipodal grasp candidates.
//! 3. [`limitsurface`] samples friction wrenches over body twists, fits a
//!    minimum-volume ellipsoid and linearizes it into hyperplanes.
//! 4. [`optimizer`] solves the minimal grasp force linear program.
//! 5. [`stiffness`] turns physical measurements into a per-vertex stiffness map.
//! 6. [`metrics`] turns forces into work and the reliability, minimal force and
//!    minimal work qualities, aggregated over pose perturbations and task poses.
//! 7. [`sampler`] proposes antipodal candidates; [`cli`] drives everything.

pub mod cli;
pub mod contact;
pub mod exec;
pub mod geometry;
pub mod limitsurface;
pub mod mesh;
pub mod metrics;
pub mod optimizer;
pub mod ply;
pub mod rng;
pub mod sampler;
pub mod stiffness;

pub use contact::{ContactPatch, GraspCandidate, JawConfig};
pub use exec::Execution;
pub use limitsurface::{ConstraintSet, LimitSurface, Wrench};
pub use mesh::TriMesh;
pub use metrics::{Normalizers, PerturbationSpec, QualityReport, Task, TaskKind};
pub use optimizer::{ForceSolution, GraspSystem};
pub use stiffness::StiffnessMap;
