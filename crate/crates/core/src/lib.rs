//! Parser, lexicon, symbol registry, content assist and corpus statistics for
//! the Rimay requirements language.

pub mod analytics;
pub mod assist;
pub mod lexicon;
pub mod model;
pub mod parser;
pub mod span;
pub mod syntax;
