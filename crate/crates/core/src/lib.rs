pub mod appendix;
pub mod cli;
pub mod drury;
pub mod error;
pub mod extension;
pub mod kernels;
pub mod linalg;
pub mod moebius;
pub mod multipliers;
pub mod norms;
pub mod params;
pub mod poly;

pub use error::{ErrorKind, Result, ToolkitError};
pub use params::{DualExponent, Point, PointSeq, SpaceParams};
pub use poly::{MultiIndex, PolyFn};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
