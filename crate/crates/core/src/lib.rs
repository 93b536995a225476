pub mod analysis;
pub mod chartype;
pub mod cli;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod features;
pub mod labels;
pub mod lexicon;
pub mod model_file;
pub mod segmenter;
pub mod synthetic;

pub use error::{Error, Result};
