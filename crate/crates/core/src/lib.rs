//! Online structuring of raw log lines into event templates.
//!
//! Each message is preprocessed (header extraction, regex masking and
//! character-level digit masking), used as a query against an inverted index
//! of template terms, filtered by token count, and finally matched either
//! textually or by TF-IDF cosine similarity. Matched templates are
//! generalized in place; unmatched messages seed new templates.
//!
//! ```
//! use logstruct::{DatasetConfig, Parser};
//!
//! let config = DatasetConfig::new("demo", "<Content>", [r"(\d+\.){3}\d+"], 0.5);
//! let mut parser = Parser::new(config).unwrap();
//! parser.parse_line("Invalid user chen from 10.0.0.1");
//! parser.parse_line("Invalid user webmaster from 10.0.0.2");
//! let out = parser.finalize();
//! assert_eq!(out.templates.len(), 1);
//! assert_eq!(out.templates[0].template, "Invalid user <*> from <*>");
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod index;
pub mod model;
pub mod parser;
pub mod preprocess;
pub mod similarity;

pub use config::DatasetConfig;
pub use error::{Error, Result};
pub use eval::{parsing_accuracy, Grouping};
pub use index::InvertedIndex;
pub use model::{template_string, ParseRecord, Template, TemplateId, Token, TokenKind, WILDCARD};
pub use parser::{ParseOutput, Parser};
