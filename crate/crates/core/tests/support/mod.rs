pub mod properties;
pub mod corpora;
