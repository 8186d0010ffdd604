pub mod ast;
pub mod cli;
pub mod corpus;
pub mod desugar;
pub mod dump;
pub mod error;
pub mod exec;
pub mod frontend;
pub mod hierarchy;
pub mod kernel;
pub mod logic9;
pub mod model;
pub mod sim;
pub mod state;
pub mod types;
pub mod values;
pub mod vcd;
