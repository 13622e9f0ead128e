pub mod exponent_regions;
pub mod fit;
pub mod fractal_sets;
pub mod operator_engine;
pub mod sparse_verifier;
pub mod witness_lab;
