pub mod cli;
pub mod error;
pub mod geometry;
pub mod graphs;
pub mod io;
pub mod linalg;
pub mod separation;
pub mod shell;
pub mod stability;
pub mod tomography;
