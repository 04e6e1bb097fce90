//! Executable models of the universal operator algebras attached to finite
//! directed graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds directed and undirected multigraphs and the doubled graph
//!   with its edge involution.
//! * [`words`] implements the semigroup of reduced words over `V ∪ E`.
//! * [`algebra`] is exact arithmetic in the complex semigroup algebra.
//! * [`mispace`] models the maximal ideal space: components, characters,
//!   invariant extraction, blinding, degrees and shadow recovery.
//! * [`reps`] evaluates finite-dimensional representations (nest
//!   representations, random `*`-representations) and checks the block-matrix
//!   positivity lemmas on concrete matrices.
//! * [`norm_bounds`] brackets the universal norm and the Gelfand–Naimark
//!   seminorm between representation-attained lower bounds and the `ℓ¹` norm.
//! * [`iso`] decides directed and undirected multigraph isomorphism with
//!   checkable witnesses.
//! * [`io`] parses graph files and algebra expressions.

pub mod algebra;
pub mod catalog;
pub mod graph;
pub mod io;
pub mod iso;
pub mod mispace;
pub mod norm_bounds;
pub mod reps;
pub mod seeds;
pub mod words;

pub use algebra::{AlgebraElement, AlgebraError, ApproxElement, Scalar};
pub use graph::{
    Carrier, DirectedMultigraph, DoubledGraph, Edge, GraphError, Letter, UndirectedMultigraph,
};
pub use iso::{IsoError, IsoMapping, IsoWitness, Refutation};
pub use mispace::{
    BlindedDescriptor, Character, Component, InvariantReport, MaxIdealDescriptor, MispaceError,
};
pub use norm_bounds::{BoundConfig, NormBounds};
pub use reps::{ComplexMatrix, GraphRep, NestRep, RepError};
pub use words::{ReducedWord, WordError};
