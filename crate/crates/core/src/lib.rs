//! Opinion dynamics on an adaptive, fully connected weighted network where a
//! recommendation strategy decides what each user is exposed to.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod recommend;
pub mod sampling;
pub mod state;

pub use error::{Error, Result};
