pub mod instantiate;
pub mod matcher;
pub mod property;
pub mod rules;
