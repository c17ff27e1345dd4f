//! Work and memory budgets.
//!
//! Every potentially large computation estimates its cost up front and
//! refuses to start when the estimate exceeds the budget, so a mistyped
//! exponent fails in milliseconds instead of hanging the machine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on elementary operations (loop iterations, table slots).
pub const DEFAULT_MAX_OPS: u128 = 10_000_000_000;

/// Default ceiling on working memory: 8 GiB.
pub const DEFAULT_MAX_BYTES: u128 = 8 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_ops: u128,
    pub max_bytes: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_ops: DEFAULT_MAX_OPS,
            max_bytes: DEFAULT_MAX_BYTES,
        }
    }
}

impl Budget {
    pub const fn unlimited() -> Self {
        Budget {
            max_ops: u128::MAX,
            max_bytes: u128::MAX,
        }
    }

    pub fn check_ops(&self, estimate: u128) -> Result<()> {
        if estimate > self.max_ops {
            return Err(Error::WorkBudget {
                estimate,
                limit: self.max_ops,
            });
        }
        Ok(())
    }

    pub fn check_bytes(&self, estimate: u128) -> Result<()> {
        if estimate > self.max_bytes {
            return Err(Error::MemoryBudget {
                estimate,
                limit: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Saturating integer power for cost estimates.
pub fn pow_cost(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refusal_carries_estimate_and_limit() {
        let b = Budget {
            max_ops: 100,
            max_bytes: 100,
        };
        match b.check_ops(101) {
            Err(Error::WorkBudget { estimate, limit }) => {
                assert_eq!(estimate, 101);
                assert_eq!(limit, 100);
            }
            other => panic!("expected work budget refusal, got {other:?}"),
        }
        assert!(b.check_ops(100).is_ok());
        assert!(b.check_bytes(101).is_err());
    }

    #[test]
    fn pow_cost_saturates() {
        assert_eq!(pow_cost(10, 3), 1000);
        assert_eq!(pow_cost(u128::MAX, 2), u128::MAX);
    }
}
