use std::fmt;

/// A failed run: exit code 2 for usage or input problems, 1 for failures
/// inside a computation.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<iscore::Error> for Failure {
    fn from(e: iscore::Error) -> Self {
        Self {
            code: if e.is_input_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}
