#![allow(dead_code)]

pub mod containment;
