//! Exact planning of key-rotation intervals for QKD-distributed keys used
//! with block-cipher modes (CTR, CBC, ECBC-MAC).
//!
//! - [`exactmath`]: big integers, exact rationals, fixed-point logarithms.
//! - [`advmodel`]: per-mode advantage bounds and bit-security conversions.
//! - [`planner`]: Q* solver, rotation improvement and benefit, k-sweeps.
//! - [`empirics`]: toy-scale modes and Monte Carlo collision estimates.
//! - [`rotation`]: key pool, rotation sessions, persisted session state.

pub mod advmodel;
pub mod empirics;
pub mod exactmath;
pub mod planner;
pub mod reference;
pub mod rotation;

pub use advmodel::{AdvError, AdvantageValue, EcbcDenominator, Mode, SecurityParams};
pub use exactmath::{FixedDecimal, MathError, Natural, Rational};
pub use planner::{BenefitReport, ImprovementReport, PlanError, RotationPlan, SweepRow};
pub use rotation::{KeyPool, KeyRecord, RotationError, RotationEvent, Session, SessionState};
