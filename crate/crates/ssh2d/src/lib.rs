pub mod bloch;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod phases;
pub mod realspace;
pub mod ribbon;
pub mod topology;
