//! Generalized cones `I x_f X` over interval and discrete fibers, in Riemannian
//! and Lorentzian signature.
//!
//! The crate covers the distortion coefficients, one-dimensional density tests,
//! warping functions and their model catalog, geodesics and causality on the
//! two-dimensional sheets, exact discrete optimal transport and the curvature
//! verifiers built on top of them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod coeffs;
pub mod cone_geom;
pub mod densities;
pub mod error;
pub mod quad;
pub mod serde_ext;
pub mod transport;
pub mod verify;
pub mod warp;

pub use coeffs::{sigma_kappa, sigma_kn, tau_coeff, CoeffValue};
pub use cone_geom::{ConePoint, ConeSpec, Fiber, FiberMeasure, FiberPoint, GeodesicPath};
pub use densities::{DensityCheckResult, DensityProfile, ModelTag};
pub use error::{Error, Result};
pub use transport::{DiscreteMeasure, TransportPlan};
pub use verify::{Condition, VerificationReport};
pub use warp::{CatalogEntry, Signature, WarpingFunction};
