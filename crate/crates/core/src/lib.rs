pub mod check;
pub mod cli;
pub mod codegen;
pub mod model;
pub mod sim;
pub mod syntax;
pub mod verify;
