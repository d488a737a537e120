//! Extension counting, rigid closures and the genericity events.

use thiserror::Error;

use crate::alpha::AlphaError;
use crate::graph::Vertex;

pub mod closure;
pub mod count;
pub mod events;

pub use closure::{
    closure, extract_rigid_chain, rigid_kernel, rigid_step, rigid_step_exhaustive, ChainEntry, KernelResult,
    RigidChain, RoundCap,
};
pub use count::{count_extensions, for_each_extension, has_extension, Embedding};
pub use events::{
    check_generic_ext, check_no_rigid_from_base, generic_obligation, safe_catalog, Counterexample, Event, EventReport,
    GenericCheckOptions, Obligation, SafeTemplate,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("embedding does not cover base vertex {0}")]
    NotCovering(Vertex),
    #[error("embedding is not injective at vertex {0}")]
    NotInjective(Vertex),
    #[error("embedding maps vertex {0}, which is outside the base")]
    OutsideBase(Vertex),
    #[error("template vertex {template} and its image {image} disagree on membership in Q")]
    QMisaligned { template: Vertex, image: Vertex },
    #[error("vertex {vertex} is out of range 1..={n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error(transparent)]
    Alpha(#[from] AlphaError),
}
