//! Exact arithmetic for Hasse-Witt matrices, higher congruence matrices,
//! truncated period series and p-adic unit roots of hypersurfaces in toric
//! varieties, plus the explicit Grassmannian G(2,4) chart.
//!
//! Everything is computed over exact coefficient rings: arbitrary-precision
//! integers, integers mod a prime power, rationals, and polynomial rings in
//! the family parameters. No floating point is used anywhere.

pub mod error;
pub mod flag;
pub mod hasse_witt;
pub mod lattice;
pub mod laurent;
pub mod periods;
pub mod ring;
pub mod zeta;

pub use error::CoreError;
pub use lattice::{LatticePolytope, ToricData};
pub use laurent::{GradedSeries, LaurentPoly};
pub use ring::{
    BigIntRing, CoefficientRing, DualRing, Frobenius, Matrix, ParamPoly, ParamRing, RationalRing,
    ZpmRing,
};
