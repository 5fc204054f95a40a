//! Twisted partial actions of finite groups on finite rings that are
//! products of matrix blocks over `Z/p^e`: axiom verification, crossed
//! products, corestriction, extended twists, globalizations, Morita
//! contexts, and comparison of globalizations.

pub mod action;
pub mod cli;
pub mod corestriction;
pub mod crossed;
pub mod equivalence;
pub mod fixtures;
pub mod globalization;
pub mod group;
pub mod io;
pub mod morita;
pub mod orbit;
pub mod report;
pub mod ring;
pub mod span;
