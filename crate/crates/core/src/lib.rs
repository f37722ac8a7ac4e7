pub mod bipolar;
pub mod error;
pub mod hedging;
pub mod instance;
pub mod lp;
pub mod model;
pub mod random;
pub mod tolerance;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
