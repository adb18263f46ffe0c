//! Numerical toolkit for L^r differentiation and gauge (Henstock–Kurzweil type)
//! partitions.
//!
//! The crate is organised bottom-up:
//!
//! * [`funcmodel`] – evaluatable real functions, including the Cantor-type
//!   counterexample built on an exact-rational [`CantorScheme`].
//! * [`quadrature`] – L^r mean-deviation integrals with exact kernels for
//!   affine pieces and an adaptive Gauss–Legendre rule elsewhere.
//! * [`derivates`] – estimators for the four one-sided L^r derivates, the
//!   L^r derivative and the approximate derivative.
//! * [`gauges`] – gauges, tagged partitions, Cousin bisection and the
//!   Riemann-type sums used by the integrability definitions.
//! * [`checkers`] – certificates and refutations for the HK_r, AC_r and AC
//!   conditions plus the counterexample divergence sweep.

pub mod checkers;
pub mod derivates;
pub mod error;
pub mod funcmodel;
pub mod gauges;
pub mod quadrature;

pub use checkers::{CheckReport, Verdict as CheckVerdict};
pub use derivates::{DerivateEstimate, DerivativeEstimate, HGrid, Verdict};
pub use error::{Error, Result};
pub use funcmodel::{
    CantorScheme, Counterexample, FunctionModel, GapAddress, Interval, PointClassification,
};
pub use gauges::{Gauge, TaggedInterval, TaggedPartition};
pub use quadrature::{LrParams, Part, QuadratureResult, Side};
