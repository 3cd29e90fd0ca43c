//! Map-definition documents.
//!
//! ```text
//! domain interval 0 1
//! branch [0, (5 - sqrt(17))/2] expr 2*x + x*(1 - x)/2
//! branch [(5 - sqrt(17))/2, 1] expr 2*x + x*(1 - x)/2 - 1
//! ```
//!
//! Circle maps give a single `lift EXPR` (or `invlift EXPR` for a map known
//! through its inverse lift) instead of branches. Any expression may be
//! followed by `deriv EXPR`. `const NAME VALUE` supplies a constant
//! (lambda, lambda_check, C1) instead of estimating it. `#` starts a comment.
//! Bracket ends and header numbers may be constant expressions.

use super::constants::Supplied;
use super::{catalog, Branch, Definition, Domain, DomainKind, MarkovMap};
use crate::error::{Error, Result};
use crate::expr::Expr;

const KEYWORDS: [&str; 6] = ["domain", "branch", "lift", "invlift", "deriv", "const"];

/// Parses a definition document, or resolves a catalog name.
pub fn parse_map_definition(text: &str) -> Result<MarkovMap> {
    if let Some(m) = catalog::lookup(text.trim()) {
        return m;
    }
    let (domain, definition, supplied) = parse_document(text)?;
    MarkovMap::new("custom", domain, definition, supplied)
}

/// Parses and checks a document without estimating constants.
pub(super) fn parse_document(text: &str) -> Result<(Domain, Definition, Supplied)> {
    Doc::new(text).parse()
}

struct Doc {
    /// Source with comments blanked out, so byte positions are preserved.
    src: String,
    pos: usize,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl Doc {
    fn new(text: &str) -> Doc {
        let mut src = String::with_capacity(text.len());
        let mut in_comment = false;
        for c in text.chars() {
            if c == '#' {
                in_comment = true;
            }
            if c == '\n' {
                in_comment = false;
            }
            if in_comment {
                // keep byte offsets stable for multibyte characters too
                for _ in 0..c.len_utf8() {
                    src.push(' ');
                }
            } else {
                src.push(c);
            }
        }
        Doc { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let b = self.src.as_bytes();
        while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    /// Next whitespace-delimited token without consuming it.
    fn peek_token(&mut self) -> (usize, &str) {
        self.skip_ws();
        let b = self.src.as_bytes();
        let mut end = self.pos;
        while end < b.len() && !b[end].is_ascii_whitespace() {
            end += 1;
        }
        (self.pos, &self.src[self.pos..end])
    }

    fn found_here(&mut self) -> String {
        let (_, t) = self.peek_token();
        if t.is_empty() {
            "end of input".into()
        } else {
            format!("'{}'", t.chars().take(24).collect::<String>())
        }
    }

    fn syntax(&mut self, expected: &str) -> Error {
        let found = self.found_here();
        Error::Syntax { pos: self.pos, expected: expected.into(), found }
    }

    /// Consumes the keyword `kw` if it is next.
    fn eat_word(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest = &self.src.as_bytes()[self.pos..];
        if rest.starts_with(kw.as_bytes()) && rest.get(kw.len()).is_none_or(|&b| !is_word_byte(b)) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, kw: &str) -> Result<()> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            Err(self.syntax(&format!("'{kw}'")))
        }
    }

    fn expect_char(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("'{c}'")))
        }
    }

    fn constant_expr(&self, text: &str, at: usize) -> Result<f64> {
        let e = Expr::parse_at(text, at)?;
        if !e.is_constant() {
            return Err(Error::Syntax { pos: at, expected: "a constant".into(), found: format!("'{}'", text.trim()) });
        }
        let v: f64 = e.eval(0.0);
        if !v.is_finite() {
            return Err(Error::Semantic(format!("constant '{}' is not finite", text.trim())));
        }
        Ok(v)
    }

    fn number(&mut self) -> Result<f64> {
        let (at, tok) = self.peek_token();
        if tok.is_empty() {
            return Err(self.syntax("a number"));
        }
        let tok = tok.to_string();
        let v = self.constant_expr(&tok, at)?;
        self.pos = at + tok.len();
        Ok(v)
    }

    /// Expression text running up to the next keyword or end of input.
    fn expression(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        let b = self.src.as_bytes();
        let mut i = start;
        let mut end = b.len();
        while i < b.len() {
            let boundary = i == 0 || !is_word_byte(b[i - 1]);
            if boundary {
                let hit = KEYWORDS.iter().any(|k| b[i..].starts_with(k.as_bytes()) && b.get(i + k.len()).is_none_or(|&c| !is_word_byte(c)));
                if hit {
                    end = i;
                    break;
                }
            }
            i += 1;
        }
        let text = &self.src[start..end];
        if text.trim().is_empty() {
            return Err(self.syntax("an expression"));
        }
        let e = Expr::parse_at(text, start)?;
        self.pos = end;
        Ok(e)
    }

    fn bracket(&mut self) -> Result<(f64, f64)> {
        self.expect_char('[')?;
        let start = self.pos;
        let b = self.src.as_bytes();
        let (mut depth, mut comma, mut close) = (0i32, None, None);
        for (i, &c) in b.iter().enumerate().skip(start) {
            match c {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b',' if depth == 0 && comma.is_none() => comma = Some(i),
                b']' if depth == 0 => {
                    close = Some(i);
                    break;
                }
                b'\n' => break,
                _ => {}
            }
        }
        let Some(close) = close else {
            self.pos = b.len().min(start);
            return Err(self.syntax("']' closing the branch interval"));
        };
        let Some(comma) = comma else {
            self.pos = close;
            return Err(self.syntax("','"));
        };
        let lo = self.constant_expr(&self.src[start..comma], start)?;
        let hi = self.constant_expr(&self.src[comma + 1..close], comma + 1)?;
        self.pos = close + 1;
        Ok((lo, hi))
    }

    fn optional_deriv(&mut self) -> Result<Option<Expr>> {
        if self.eat_word("deriv") {
            Ok(Some(self.expression()?))
        } else {
            Ok(None)
        }
    }

    fn parse(mut self) -> Result<(Domain, Definition, Supplied)> {
        self.expect_word("domain")?;
        let kind = if self.eat_word("periodic") {
            DomainKind::Periodic
        } else if self.eat_word("interval") {
            DomainKind::NonPeriodic
        } else {
            return Err(self.syntax("'periodic' or 'interval'"));
        };
        let a = self.number()?;
        let b = self.number()?;
        let domain = Domain::new(kind, a, b)?;

        let mut raw_branches = Vec::new();
        let mut lift: Option<(bool, Expr, Option<Expr>)> = None;
        let mut supplied = Supplied::default();
        while !self.at_end() {
            if self.eat_word("branch") {
                let (lo, hi) = self.bracket()?;
                self.expect_word("expr")?;
                let e = self.expression()?;
                let d = self.optional_deriv()?;
                raw_branches.push((lo, hi, e, d));
            } else if self.eat_word("lift") || self.eat_word("invlift") {
                let inverse = self.src[..self.pos].ends_with("invlift");
                if lift.is_some() {
                    return Err(Error::Semantic("more than one lift given".into()));
                }
                let e = self.expression()?;
                let d = self.optional_deriv()?;
                lift = Some((inverse, e, d));
            } else if self.eat_word("const") {
                let (at, name) = self.peek_token();
                let name = name.to_string();
                self.pos = at + name.len();
                let v = self.number()?;
                match name.as_str() {
                    "lambda" => supplied.lambda = Some(v),
                    "lambda_check" => supplied.lambda_check = Some(v),
                    "C1" => supplied.c1 = Some(v),
                    _ => return Err(Error::Syntax { pos: at, expected: "lambda, lambda_check or C1".into(), found: format!("'{name}'") }),
                }
            } else {
                return Err(self.syntax("'branch', 'lift', 'invlift' or 'const'"));
            }
        }

        let definition = match kind {
            DomainKind::NonPeriodic => {
                if lift.is_some() {
                    return Err(Error::Semantic("interval maps take branches, not a lift".into()));
                }
                interval_definition(&domain, raw_branches)?
            }
            DomainKind::Periodic => {
                if !raw_branches.is_empty() {
                    return Err(Error::Semantic("circle maps take a single lift, not branches".into()));
                }
                let Some((inverse, e, d)) = lift else {
                    return Err(Error::Semantic("circle map has no lift".into()));
                };
                circle_definition(&domain, inverse, e, d)?
            }
        };
        Ok((domain, definition, supplied))
    }
}

const MONOTONE_SAMPLES: usize = 257;

/// Orientation of `f` on [lo, hi] from a sampled check; `None` if not
/// strictly monotone.
fn sampled_orientation(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<i8> {
    let vals: Vec<f64> = (0..MONOTONE_SAMPLES).map(|i| f(lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if vals.windows(2).all(|w| w[1] > w[0]) {
        Some(1)
    } else if vals.windows(2).all(|w| w[1] < w[0]) {
        Some(-1)
    } else {
        None
    }
}

fn interval_definition(domain: &Domain, raw: Vec<(f64, f64, Expr, Option<Expr>)>) -> Result<Definition> {
    if raw.is_empty() {
        return Err(Error::Semantic("interval map has no branches".into()));
    }
    let len = domain.b - domain.a;
    let tol = 1e-9 * len;
    let mut branches = Vec::new();
    for (i, (lo, hi, expr, deriv)) in raw.into_iter().enumerate() {
        if !(lo < hi) || lo < domain.a - tol || hi > domain.b + tol {
            return Err(Error::Semantic(format!("branch {i} interval [{lo}, {hi}] is not inside the domain")));
        }
        let (clo, chi) = (domain.to_canonical(lo).max(-1.0), domain.to_canonical(hi).min(1.0));
        let f = |x: f64| domain.to_canonical(expr.eval(domain.from_canonical(x)));
        let Some(orientation) = sampled_orientation(f, clo, chi) else {
            return Err(Error::Semantic(format!("branch {i} is not strictly monotone on its interval")));
        };
        let (flo, fhi) = (f(clo), f(chi));
        let (first, last) = if orientation > 0 { (-1.0, 1.0) } else { (1.0, -1.0) };
        if (flo - first).abs() > 1e-10 || (fhi - last).abs() > 1e-10 {
            return Err(Error::Semantic(format!("branch {i} image does not cover domain")));
        }
        branches.push(Branch { index: i, lo: clo, hi: chi, expr, deriv, orientation });
    }
    let mut order: Vec<usize> = (0..branches.len()).collect();
    order.sort_by(|&x, &y| branches[x].lo.total_cmp(&branches[y].lo));
    for w in order.windows(2) {
        let (p, q) = (&branches[w[0]], &branches[w[1]]);
        if p.hi > q.lo + 2e-9 {
            return Err(Error::Semantic(format!("branches {} and {} overlap", p.index, q.index)));
        }
    }
    let total: f64 = branches.iter().map(|b| b.hi - b.lo).sum();
    if (total - 2.0).abs() > 2e-9 {
        return Err(Error::Semantic(format!("branch intervals cover length {} of a domain of length {len}", total / 2.0 * len)));
    }
    Ok(Definition::Branches(branches))
}

fn circle_definition(domain: &Domain, inverse: bool, expr: Expr, deriv: Option<Expr>) -> Result<Definition> {
    let (a, b) = (domain.a, domain.b);
    let len = b - a;
    let f = |x: f64| -> f64 { expr.eval(x) };
    if !inverse {
        let ratio = (f(b) - f(a)) / len;
        let beta = ratio.round();
        if !ratio.is_finite() || (ratio - beta).abs() > 1e-9 {
            return Err(Error::Semantic(format!("lift degree {ratio} is not an integer")));
        }
        if beta.abs() < 2.0 {
            return Err(Error::Semantic(format!("lift degree {beta} is not expanding; need |β| ≥ 2")));
        }
        if sampled_orientation(f, a, b).is_none() {
            return Err(Error::Semantic("lift is not strictly monotone".into()));
        }
        return Ok(Definition::Lift { expr, deriv, beta: beta as i64 });
    }
    for beta in 2..=64i64 {
        let x1 = a + beta as f64 * len;
        let step = f(x1) - f(a);
        if (step.abs() - len).abs() <= 1e-9 * len {
            if sampled_orientation(f, a, x1).is_none() {
                return Err(Error::Semantic("inverse lift is not strictly monotone".into()));
            }
            let beta = if step > 0.0 { beta } else { -beta };
            return Ok(Definition::InverseLift { expr, deriv, beta });
        }
    }
    Err(Error::Semantic("inverse lift does not advance one period over any integer number (2..64) of periods".into()))
}
