#![allow(clippy::result_large_err)]

pub mod certifier;
pub mod cli;
pub mod empirics;
pub mod exactnum;
pub mod exprfn;
pub mod ifs_core;
pub mod qexp;
pub mod union;
