//! Proof checking, game semantics and strategy extraction for the
//! computability-logic arithmetic CLA4 and its underlying logic CL12.

pub mod syntax;
pub mod game;
pub mod cl12;
pub mod cla4;
pub mod polyfun;
pub mod strategy;
pub mod hpm;
pub mod service;
