pub mod apriori;
pub mod condexp;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod par;
pub mod scheme;
pub mod simulate;

pub use error::{Error, Result};
