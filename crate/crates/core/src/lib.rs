// NaN-aware guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod connection;
mod contour;
pub mod cubic;
pub mod expr;
pub mod hexagon;
pub mod ode;
pub mod render;
pub mod singular;
pub mod trace;
pub mod web;
