pub mod eval;
pub mod generate;
pub mod model;
pub mod online;
pub mod simulate;
pub mod train;
