pub mod c;
pub mod engine;
pub mod lang;
pub mod oracle;
pub mod semantics;
pub mod session;
