//! Ultrametric Gromov-Wasserstein distances.
//!
//! The crate compares finite ultrametric measure spaces and ultra-dissimilarity
//! spaces (such as phylogenetic tree shapes):
//!
//! * [`spaces`]: spaces, validation, quotients, dendrograms.
//! * [`transport`]: closed-form and exact discrete Wasserstein distances.
//! * [`gw`]: distortion, exact `uGW_∞`/`uGH`, Frank-Wolfe, Sturm brute force.
//! * [`bounds`]: polynomial-time lower bounds.
//! * [`phylo`]: Newick I/O and tree-shape spaces.
//! * [`synth`]: random ultrametric spaces and level-`t` perturbations.
//! * [`batch`]: pairwise matrices over corpora and classical MDS.

pub mod batch;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod gw;
pub mod phylo;
pub mod rng;
pub mod spaces;
pub mod synth;
pub mod tol;
pub mod transport;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spaces::{Dendrogram, Mode, UmSpace};
pub use transport::{Coupling, ScalarMeasure};
