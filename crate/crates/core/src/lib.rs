// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dielectric;
pub mod emitter;
pub mod fano;
pub mod interp;
pub mod quadrature;
