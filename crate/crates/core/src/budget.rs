use crate::error::{Error, Result};

/// Environment variable that overrides the default enumeration cap.
pub const BUDGET_ENV: &str = "MGL_BUDGET";

/// Upper bound on the number of items an exhaustive enumeration may touch.
///
/// Exponential spaces are never truncated: an operation whose work exceeds
/// the budget fails with [`Error::BudgetExceeded`] before producing output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Budget(u64);

impl Budget {
    pub const DEFAULT_LIMIT: u64 = 100_000_000;

    pub const fn new(limit: u64) -> Self {
        Budget(limit)
    }

    pub const fn unlimited() -> Self {
        Budget(u64::MAX)
    }

    /// The default cap, overridden by `MGL_BUDGET` when it parses.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    pub const fn limit(&self) -> u64 {
        self.0
    }

    pub fn check(&self, requested: u128) -> Result<()> {
        if requested > self.0 as u128 {
            Err(Error::BudgetExceeded { requested, limit: self.0 })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget(Self::DEFAULT_LIMIT)
    }
}
