//! Necklace diagrams: cyclic words over four stones with identity monodromy
//! in PSL(2,Z), their enumeration, a rewrite calculus, mark refinements and
//! an algebraicity screen.

pub mod calculus;
pub mod enumerate;
pub mod error;
pub mod necklace;
pub mod psl2;
pub mod record;
pub mod refine;
pub mod screen;

pub use error::{Error, Result};
pub use necklace::{Mode, NecklaceDiagram, Stone, StoneCounts, TopInvariants};
pub use psl2::{ProjMat, Sl2, StoneAlgebra};
