//! Offensive-tweet detection building blocks: OLID corpus loading and text
//! cleaning, averaged word vectors and DMD/HODMD sentence features, random
//! kitchen sink kernel maps, linear classifiers and macro-averaged
//! evaluation.

pub mod corpus;
pub mod dmd;
pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod learn;
pub mod rks;

pub use error::{Error, Result};
