//! Bochner-type vanishing checks for Riemannian foliations.

pub mod connections;
pub mod exterior;
pub mod frames;
pub mod curvature;
pub mod jets;
pub mod laplacians;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod verify;

pub use exterior::{Coeff, Form, MixedTensor, MultiIndex, MultiVector};
pub use jets::{FrameAlgebra, Jet, JetError, RewriteStrategy};
pub use scalar::{Rational, Scalar};
