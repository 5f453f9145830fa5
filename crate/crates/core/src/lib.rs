pub mod ainf;
pub mod entropy;
pub mod error;
pub mod filtered_complex;
pub mod fukaya_models;
pub mod gf2;
pub mod hochschild;
pub mod matching;
pub mod morse;
pub mod novikov;
pub mod novikov_complex;
pub mod persistence;
pub mod q;
pub mod tseries;

pub use error::{Error, Result};
pub use novikov::Nov;
pub use persistence::{Bar, Barcode};
pub use q::{Ext, Q};
