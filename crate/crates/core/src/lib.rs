//! Gradient asymptotics for the Lamé system in thin gaps between nearly touching
//! inclusions: gap geometry, auxiliary fields, thin-gap quadrature, blow-up factor
//! systems, rate certificates and a plane-strain finite-element oracle.

pub mod aux_fields;
pub mod boundary;
pub mod error;
pub mod expansion;
pub mod factors;
pub mod fit;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod rates;
pub mod verify;

pub use aux_fields::{lame_rate_constant, u_bar, vbar, AuxField, AuxKind, LameConstants, TopField};
pub use boundary::{basis_count, classify_parity, make_family, rigid_basis, BoundaryData, Family, Parity, RigidBasis};
pub use error::{Error, Result};
pub use factors::{free_constants, FactorData, Provenance};
pub use geometry::{validate_conditions, GapProfile, Graph, ThinGapRegion};
pub use quadrature::{QuadResult, QuadSettings};
pub use rates::{rate_table, BoundsInput, RateCertificate, RateTerm, Theorem};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
