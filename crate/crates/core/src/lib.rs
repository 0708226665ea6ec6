//! Grand Lebesgue space (GLS) and moment rearrangement-invariant norms on
//! discretized measure spaces.
//!
//! * [`measure`]: weighted point-mass spaces, `L_p` norms, moment curves, tails.
//! * [`spaces`]: generating functions, GLS norms, fundamental functions,
//!   m.r.i. norms and Markov tail bounds.
//! * [`operators`]: dilation, periodic heat convolution, the identity on
//!   trigonometric polynomials and tabulated kernel integrals.
//! * [`verify`]: empirical operator constants and norm-transfer checks.
//!
//! Every routine is a pure function of its inputs; reductions run in a fixed
//! order so results are bit-reproducible.

pub mod error;
pub mod measure;
pub mod operators;
pub mod optimize;
mod parallel;
pub mod quadrature;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{lp_norm, norm_family, tail_function, MeasureSpace, NormFamily, PGrid, SampledFunction};
pub use spaces::{fundamental_function, gls_norm, kappa, mri_norm, tail_bound, GeneratingFunction, MriNorm};
