pub mod certify;
pub mod first_integral;
pub mod kernel;
pub mod picard;
pub mod replicate;
pub mod scan;
pub mod simulate;
