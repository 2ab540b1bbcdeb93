pub mod dyadic;
pub mod error;
pub mod tape;
pub mod randvar;
pub mod quadrature;
pub mod machines;
pub mod measure;
pub mod constructions;
pub mod conditioning;
pub mod cli;
