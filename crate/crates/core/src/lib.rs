//! Exact finite-precision Witt vectors, A_cris of quotient rings of perfect polynomial rings, and Dieudonné point groups.

pub mod error;
pub mod linalg;
pub mod multlog;
pub mod dieudonne;
pub mod serial;
pub mod acris;
pub mod covec;
pub mod padic;
pub mod perfring;
pub mod wittgen;

pub use error::{Error, Result};
pub use acris::{DividedSeries, IcrisWitness};
pub use covec::{PFraction, VExpansion};
pub use dieudonne::{DieudonneModule, SolutionModule};
pub use multlog::UnitElement;
pub use padic::{Modulus, MultiExp, PExp, Zmod};
pub use perfring::{ExpBox, RingDescriptor, TiltPoly, WCElement, WittSeries};
pub use wittgen::WittVec;
