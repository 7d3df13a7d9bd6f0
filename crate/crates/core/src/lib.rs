pub mod analysis;
pub mod error;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod stark;
pub mod weierstrass;

pub use error::{Error, Result};
pub use scalar::Real;
pub use weierstrass::WeierstrassContext;

/// Double-precision elliptic-function context.
pub type Weierstrass = WeierstrassContext<f64>;
/// Single-precision elliptic-function context.
pub type Weierstrass32 = WeierstrassContext<f32>;
