use std::collections::HashMap;

use serde::Serialize;

use super::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Runner {
    /// Starting number.
    pub id: i64,
    /// Tag id; unique and distinct from the starting number.
    pub rfid: String,
    pub last_name: String,
    pub first_name: String,
}

impl Runner {
    pub fn new(id: i64, rfid: impl Into<String>, last_name: impl Into<String>, first_name: impl Into<String>) -> Self {
        Runner { id, rfid: rfid.into(), last_name: last_name.into(), first_name: first_name.into() }
    }
}

/// Registered competitors with lookups by starting number and tag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    runners: Vec<Runner>,
    by_id: HashMap<i64, usize>,
    by_rfid: HashMap<String, usize>,
}

impl Registry {
    pub fn new(runners: Vec<Runner>) -> Result<Self, StoreError> {
        let mut by_id = HashMap::new();
        let mut by_rfid = HashMap::new();
        for (i, r) in runners.iter().enumerate() {
            if by_id.insert(r.id, i).is_some() {
                return Err(StoreError::DuplicateRunnerId(r.id));
            }
            if by_rfid.insert(r.rfid.clone(), i).is_some() {
                return Err(StoreError::DuplicateRfid(r.rfid.clone()));
            }
        }
        Ok(Registry { runners, by_id, by_rfid })
    }

    pub fn runners(&self) -> &[Runner] {
        &self.runners
    }

    pub fn by_id(&self, id: i64) -> Option<&Runner> {
        self.by_id.get(&id).map(|&i| &self.runners[i])
    }

    pub fn by_rfid(&self, tag: &str) -> Option<&Runner> {
        self.by_rfid.get(tag).map(|&i| &self.runners[i])
    }

    pub fn len(&self) -> usize {
        self.runners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runners.is_empty()
    }
}
