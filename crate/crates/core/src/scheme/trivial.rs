//! Broadcast every file; nothing is cached.

use crate::error::{param, CachingError, Result};
use crate::field::Symbol;
use crate::library::{FileLibrary, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trivial {
    files: usize,
    users: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivialPacket {
    pub files: Vec<Segment>,
}

impl Trivial {
    pub fn new(files: usize, users: usize) -> Result<Self> {
        if files == 0 || users == 0 {
            return Err(param("need N >= 1 and K >= 1"));
        }
        Ok(Trivial { files, users })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn deliver(&self, library: &FileLibrary) -> TrivialPacket {
        TrivialPacket { files: (0..library.n_files()).map(|n| library.file(n).to_vec()).collect() }
    }

    pub fn decode(&self, packet: &TrivialPacket, demand_k: usize) -> Result<Vec<Symbol>> {
        packet
            .files
            .get(demand_k)
            .cloned()
            .ok_or_else(|| CachingError::Shape(format!("packet lacks file {demand_k}")))
    }
}
