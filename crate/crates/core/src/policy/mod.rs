//! Augmenting-pair policies plugged into the generic pass.

mod simple;
mod zelke;

pub use simple::{simple_proposal, SimplePolicy};
pub use zelke::{best_augmenting_set, neighborhood, update_shadows, ShadowTable, ZelkePolicy};

use serde::{Deserialize, Serialize};

/// Which policy a one-pass run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Zelke,
    Simple,
}

impl PolicyKind {
    pub fn build(self) -> Box<dyn crate::framework::AugmentPolicy> {
        match self {
            PolicyKind::Zelke => Box::new(ZelkePolicy::default()),
            PolicyKind::Simple => Box::new(SimplePolicy),
        }
    }
}
