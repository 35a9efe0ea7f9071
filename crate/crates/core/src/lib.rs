pub mod bessel;
pub mod certificate;
pub mod crosscheck;
pub mod field;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod ode;
mod par;
pub mod pde;
pub mod profile;
pub mod quadrature;
pub mod replicate;
pub mod scan;
pub mod verify;
