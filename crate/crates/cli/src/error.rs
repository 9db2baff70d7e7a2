use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Ingest,
    Provider,
    Io,
    Internal,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Config => "config",
            Category::Ingest => "ingest",
            Category::Provider => "provider",
            Category::Io => "io",
            Category::Internal => "internal",
        })
    }
}

#[derive(Debug, Error)]
#[error("{category}: {message}")]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self { category, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Category::Config, message)
    }

    pub fn ingest(message: impl fmt::Display) -> Self {
        Self::new(Category::Ingest, message.to_string())
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self::new(Category::Io, message.to_string())
    }

    /// 2 for bad usage or input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.category {
            Category::Config | Category::Ingest | Category::Provider => 2,
            Category::Io | Category::Internal => 1,
        }
    }
}
