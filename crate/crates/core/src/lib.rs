pub mod audit;
pub mod bits;
pub mod bounds;
pub mod cli;
pub mod coded;
pub mod error;
pub mod field;
pub mod library;
pub mod mds_a;
pub mod mds_b;
pub mod reed_solomon;
pub mod scheme;
pub mod subsets;
pub mod virtual_user;
pub mod yma;
