pub mod access;
pub mod ingest;
pub mod lower;
pub mod predicates;
pub mod store;
