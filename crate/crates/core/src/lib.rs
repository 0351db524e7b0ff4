//! Expectations of exponential functionals of Brownian motion and moments of
//! stochastic-volatility asset prices.

// `!(x > 0.0)` is used deliberately so that NaN fails every precondition.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod functionals;
pub mod quadrature;
pub mod special;
pub mod stochastic;
pub mod sv;
pub mod validation;

pub use error::{Error, Result};
pub use functionals::{GammaLaplaceMethod, KernelContext, LaplaceRoute, MomentTable, PsiTable};
pub use quadrature::{QuadConfig, QuadResult};
pub use special::SeriesControl;
pub use stochastic::{Estimate, FunctionalParams, MCConfig, PathBundle, Scheme};
pub use sv::{ExponentSign, LognormalMethod, SVParams, SteinVariant, SvModel};
pub use validation::{Suite, ValidationOptions, ValidationReport};
