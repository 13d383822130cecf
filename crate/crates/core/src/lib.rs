pub mod descriptor;
pub mod dwork;
pub mod error;
pub mod ff;
pub mod geometry;
pub mod kloosterman;
pub mod laurent;
pub mod limiting;
pub mod linalg;
pub mod padic;
pub mod series;
pub mod sigma;
pub mod weight;

pub use error::{Error, Result};
pub use ff::{FfElem, FiniteField};
pub use geometry::{BaseScheme, ClosedPoint, SchemeKind};
pub use laurent::LaurentElement;
pub use padic::{PadicNumber, Tower, TowerDescriptor, Valuation};
pub use linalg::Matrix;
pub use series::TruncatedSeries;
pub use sigma::{NormalFlags, SigmaMatrix};
