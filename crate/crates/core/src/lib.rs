pub mod catalog;
pub mod constructions;
pub mod exec;
pub mod expr;
pub mod forms;
pub mod immersion;
pub mod linalg;
pub mod octonion;
pub mod sampling;
pub mod scalar;
