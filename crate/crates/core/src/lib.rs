pub mod dataset;
pub mod error;
pub mod forward;
pub mod fresnel;
pub mod imaging;
pub mod oracles;
pub mod pixel;
pub mod scene;
pub mod specfun;

pub use error::{Error, Result};
