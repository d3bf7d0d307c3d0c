//! Calculus on finite configuration spaces.
//!
//! A ground space is a finite list of weighted sites. A configuration is a
//! subset of sites (a bitmask), a multiconfiguration allows repeated sites.
//! On top of these the crate provides the combinatorial star convolution and
//! its fast subset-lattice transform, Wick power pairings, correlation
//! measures of point-process laws together with realizability checks, and the
//! spectral decomposition that recovers a law from its correlation measure.
//!
//! Everything numeric is generic over two scalar families: `f64`-based
//! complex arithmetic for production paths and exact rational arithmetic for
//! the algebraic laws that hold identically.

pub mod algebra;
pub mod bench;
pub mod error;
pub mod formats;
pub mod ground;
pub mod measures;
pub mod numeric;
pub mod sampler;
pub mod scenarios;
pub mod spectral;
pub mod transforms;
pub mod wick;

pub use error::Error;
pub use ground::{Configuration, GroundSpace, MultiConfiguration, Site};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Hard cap for dense subset-lattice paths (tables of length `2^sites`).
///
/// The bitmask representation itself allows up to 64 sites; anything that
/// materializes a full lattice table refuses to go past this limit. Memory
/// is the practical bound well before the mask width is.
pub const DENSE_SITE_LIMIT: usize = 32;

/// Hard cap for any configuration bitmask.
pub const MASK_SITE_LIMIT: usize = 64;
