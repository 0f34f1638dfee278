//! Two free projections of trace ½ as 2×2 matrix functions of an angle.
//!
//! `p = diag(1, 0)` and `q(θ)` is the rank-one projection onto
//! `(cos θ, sin θ)`, with θ uniform on `[0, π/2]`. Traces are computed exactly
//! as elements of `Q(i) + Q(i)/π`.

mod angle;
mod checks;
mod trig;

pub use angle::{build_generators, identity_checks, AngleElement, Generators, IdentityCheck};
pub use checks::{
    derive_measure_moments, haar_check_xu, moment_match, two_projection_report, Coefficient,
    DihedralWord, HaarPower, HaarReport, MomentPair, TwoProjReport,
};
pub use trig::{PiRational, TrigPoly};
