//! Process exit codes and the mapping from errors to them.

use std::fmt;

use relclass_core::Error;

pub const OK: u8 = 0;
pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const NUMERIC: u8 = 3;

/// Bad command-line usage detected after argument parsing.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Tensors that failed the gradient check.
#[derive(Debug)]
pub struct GradcheckFailed(pub Vec<String>);

impl fmt::Display for GradcheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gradient check failed for {}", self.0.join(", "))
    }
}

impl std::error::Error for GradcheckFailed {}

pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return USAGE;
        }
        if cause.is::<GradcheckFailed>() {
            return NUMERIC;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_) => USAGE,
                Error::NonFinite(_) => NUMERIC,
                _ => DATA,
            };
        }
    }
    DATA
}
