//! A type description language engine for typed feature structure grammars.

pub mod expand;
pub mod fs;
pub mod hierarchy;
pub mod session;
pub mod simplify;
pub mod syntax;
pub mod typesys;
