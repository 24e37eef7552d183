use std::fmt;

/// A single broken invariant found while validating model data.
///
/// Validation never fails; it returns every violation it finds so callers can
/// report them all at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// What the violation is about, e.g. `node n1` or `function F2`.
    pub subject: String,
    pub message: String,
}

impl Violation {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Turns a violation list into a `Result`.
pub fn into_result(violations: Vec<Violation>) -> crate::Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(crate::Error::Validation(violations))
    }
}
