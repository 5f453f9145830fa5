#![allow(dead_code)]

pub mod chain;
pub mod enumerate;
pub mod gf2;
pub mod rankfn;
