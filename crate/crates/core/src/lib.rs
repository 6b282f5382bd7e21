pub mod dirac;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod raman;
pub mod response;
