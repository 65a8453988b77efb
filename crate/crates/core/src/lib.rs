pub mod dsl;
pub mod facts;
pub mod germ;
pub mod laurent;
pub mod matrix;
pub mod mixed;
pub mod poly;
pub mod sample;
pub mod report;
pub mod regularity;
pub mod numeric;
pub mod witness;
pub mod pipeline;
pub mod corpus;
pub mod cli;
