//! Path-space linearization on chart-atlas Riemannian manifolds.
//!
//! A based curve `γ` with `γ(0) = p` is mapped to the tangent-space curve
//! `t ↦ P_γ^{t→0} γ̇(t)` by parallel transport, and back again by integrating
//! the coupled position/frame system. Around that pair the crate provides the
//! two-parameter (square) version, polynomial-like curves, and flow-built
//! trivializations of evaluation bundles.
//!
//! All computations work on sampled data: curves are grids of chart-tagged
//! points, and every ODE is solved with fixed-step RK4 so results are
//! reproducible bit for bit.

pub mod bundleflow;
pub mod cubemaps;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linearize;
pub mod numerics;
mod par;
pub mod polycurves;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{ChartId, Domain, Frame, Manifold, Point, Tangent};
pub use numerics::Grid;
pub use transport::{SampledCurve, TransportConfig};
