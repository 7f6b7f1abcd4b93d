#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod forms;
pub mod mesh;
pub mod polybasis;
pub mod spaces;
pub mod sparse;
pub mod solve;
pub mod study;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
