//! Circular fingerprints, substructure pooling, matched molecular pairs and
//! twin networks for activity-cliff prediction.

pub mod ecfp;
pub mod elements;
pub mod harness;
pub mod metrics;
pub mod mmp;
pub mod molgraph;
pub mod neural;
pub mod pooling;
pub mod predictors;
pub mod rng;
pub mod smiles;
pub mod split;
pub mod synth;
