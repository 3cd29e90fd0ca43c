//! Built-in maps, written as definition documents.

use super::constants::Supplied;
use super::parse::parse_document;
use super::MarkovMap;
use crate::error::{Error, Result};

pub fn catalog_names() -> &'static [&'static str] {
    &["lanford", "doubling", "tupling(k)", "circle k=K linear", "nonanalytic-g"]
}

/// Highest term index in the nonanalytic-g series: the first M with
/// 2^(-33M/8) below machine epsilon.
pub const NONANALYTIC_G_TERMS: u32 = 13;

fn lanford_text() -> String {
    let f = "2*x + x*(1 - x)/2";
    format!(
        "domain interval 0 1\n\
         branch [0, (5 - sqrt(17))/2] expr {f}\n\
         branch [(5 - sqrt(17))/2, 1] expr {f} - 1\n"
    )
}

fn tupling_text(k: u32) -> String {
    let mut s = String::from("domain interval -1 1\n");
    for i in 0..k {
        let c = k as i64 - 1 - 2 * i as i64;
        s.push_str(&format!("branch [-1 + 2*{i}/{k}, -1 + 2*{}/{k}] expr {k}*x + ({c}) deriv {k}\n", i + 1));
    }
    s
}

fn nonanalytic_g_text() -> String {
    let mut v = String::from("x/3");
    for m in 0..=NONANALYTIC_G_TERMS {
        v.push_str(&format!(" + 2^(-33*{m}/8)*cos(2^{m}*(1 - cos(x/3)))"));
    }
    format!("domain periodic 0 2*pi\ninvlift {v}\n")
}

fn build(name: &str, text: &str, supplied: Supplied) -> Result<MarkovMap> {
    let (domain, definition, _) = parse_document(text)?;
    MarkovMap::new(name, domain, definition, supplied)
}

fn parse_k(s: &str) -> Option<u32> {
    s.trim().parse().ok()
}

pub(super) fn lookup(name: &str) -> Option<Result<MarkovMap>> {
    let linear = |k: u32| Supplied { lambda: Some(k as f64), lambda_check: None, c1: Some(0.0) };
    if name == "lanford" {
        let s = Supplied { lambda: Some(1.5), lambda_check: None, c1: Some(4.0 / 9.0) };
        return Some(build(name, &lanford_text(), s));
    }
    if name == "doubling" {
        return Some(build(name, "domain periodic 0 1\nlift 2*x", linear(2)));
    }
    if name == "nonanalytic-g" {
        return Some(build(name, &nonanalytic_g_text(), Supplied::default()));
    }
    if let Some(rest) = name.strip_prefix("tupling(").and_then(|r| r.strip_suffix(')')) {
        return Some(match parse_k(rest) {
            Some(k) if k >= 2 => {
                let s = Supplied { lambda_check: Some((k as f64).sqrt()), ..linear(k) };
                build(name, &tupling_text(k), s)
            }
            _ => Err(Error::InvalidInput(format!("tupling needs an integer k ≥ 2, got '{rest}'"))),
        });
    }
    let words: Vec<&str> = name.split_whitespace().collect();
    if words.len() == 3 && words[0] == "circle" && words[2] == "linear" {
        return Some(match words[1].strip_prefix("k=").and_then(parse_k) {
            Some(k) if k >= 2 => build(name, &format!("domain periodic 0 1\nlift {k}*x"), linear(k)),
            _ => Err(Error::InvalidInput(format!("circle map needs k=K with K ≥ 2, got '{}'", words[1]))),
        });
    }
    None
}

/// Resolves a catalog name.
pub fn catalog(name: &str) -> Result<MarkovMap> {
    lookup(name.trim())
        .unwrap_or_else(|| Err(Error::InvalidInput(format!("unknown map '{name}'; catalog names are {}", catalog_names().join(", ")))))
}
