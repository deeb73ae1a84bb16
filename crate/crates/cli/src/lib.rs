//! Library surface of the command-line tool: the JSON model format and the
//! formula grammar, shared between the binary and its tests.

pub mod format;
pub mod formula;
