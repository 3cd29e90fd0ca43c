//! Interval operations enclose 320-bit reference values.

mod common;

use common::containment::check;

#[test]
fn addition() {
    check("add").unwrap();
}

#[test]
fn subtraction() {
    check("sub").unwrap();
}

#[test]
fn multiplication() {
    check("mul").unwrap();
}

#[test]
fn division() {
    check("div").unwrap();
}

#[test]
fn cancellation_in_sums() {
    check("cancellation").unwrap();
}

#[test]
fn square_root() {
    check("sqrt").unwrap();
}

#[test]
fn exponential() {
    check("exp").unwrap();
}

#[test]
fn logarithm() {
    check("ln").unwrap();
}

#[test]
fn sine() {
    check("sin").unwrap();
}

#[test]
fn cosine() {
    check("cos").unwrap();
}

#[test]
fn arc_cosine() {
    check("acos").unwrap();
}

#[test]
fn small_arguments_of_sine_and_cosine() {
    check("sin-small").unwrap();
    check("cos-small").unwrap();
}
