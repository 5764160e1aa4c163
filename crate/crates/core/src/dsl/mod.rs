//! The `.eaa` text format.
//!
//! ```text
//! meta purpose "Transport passengers"
//! module justice "Justice argument" {
//!   goal JG1 "The distribution is equitable" [public]
//!   strategy JA1 "Argue over each principle"
//!   awaygoal BG1 from beneficence
//!   JG1 <- JA1      # JA1 supports JG1
//!   JA1 <- BG1
//!   JG1 <~ JC5      # JG1 in context of JC5
//! }
//! ```

mod lexer;
mod parser;
mod printer;

pub use parser::{parse, parse_bytes, parse_named};
pub use printer::print;
