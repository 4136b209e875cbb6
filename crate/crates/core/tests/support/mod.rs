#![allow(dead_code)]
pub mod counts;
pub mod models;
pub mod oracles;
