//! Angular profiles `f(θ)` written as sums of terms:
//!
//! ```text
//! profile := term ('+' term)*
//! term    := [coef '*'] name [':' arg]
//! name    := const | cos | sin | cos_sq | exp_cos
//! ```
//!
//! `const:v` is the constant `v`, `cos:k` and `sin:k` are `cos(kθ)` and
//! `sin(kθ)`, `cos_sq` is `cos²θ` and `exp_cos:c` is `exp(c·cosθ)`.
//! For example `const:5+cos:1` is `5 + cosθ` and `exp_cos:-0.5` is
//! `exp(−cos(θ)/2)`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Const(f64),
    Cos(f64),
    Sin(f64),
    CosSq,
    ExpCos(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    terms: Vec<Term>,
    source: String,
}

impl Profile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let source: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if source.is_empty() {
            return Err("empty profile".into());
        }
        let mut terms = Vec::new();
        for raw in split_terms(&source) {
            terms.push(parse_term(raw)?);
        }
        Ok(Profile { terms, source })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coef
                    * match t.shape {
                        Shape::Const(v) => v,
                        Shape::Cos(k) => (k * theta).cos(),
                        Shape::Sin(k) => (k * theta).sin(),
                        Shape::CosSq => theta.cos().powi(2),
                        Shape::ExpCos(c) => (c * theta.cos()).exp(),
                    }
            })
            .sum()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Splits at `+` signs that separate terms, leaving exponent signs such as
/// `1e+3` and leading signs of arguments alone.
fn split_terms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 0..bytes.len() {
        if bytes[i] == b'+' && i > start {
            let prev = bytes[i - 1];
            if prev != b'e' && prev != b'E' && prev != b':' && prev != b'*' {
                parts.push(&s[start..i]);
                start = i + 1;
            }
        }
    }
    parts.push(&s[start..]);
    parts
}

fn number(s: &str, term: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("cannot read number '{s}' in term '{term}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number in term '{term}'"));
    }
    Ok(v)
}

fn parse_term(term: &str) -> Result<Term, String> {
    let (coef, rest) = match term.split_once('*') {
        Some((c, r)) => (number(c, term)?, r),
        None => (1.0, term),
    };
    let (name, arg) = match rest.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (rest, None),
    };
    let need = |what: &str| -> Result<f64, String> {
        match arg {
            Some(a) => number(a, term),
            None => Err(format!("term '{term}' needs {what}")),
        }
    };
    let shape = match name {
        "const" => Shape::Const(need("a value")?),
        "cos" => Shape::Cos(need("a frequency")?),
        "sin" => Shape::Sin(need("a frequency")?),
        "exp_cos" => Shape::ExpCos(need("a rate")?),
        "cos_sq" if arg.is_none() => Shape::CosSq,
        "cos_sq" => return Err(format!("term '{term}' takes no argument")),
        other => return Err(format!("unknown profile term '{other}'")),
    };
    Ok(Term { coef, shape })
}

/// Semicolon-separated list of profiles.
pub fn parse_list(text: &str) -> Result<Vec<Profile>, String> {
    let list: Vec<Profile> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(Profile::parse)
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err("empty profile list".into());
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn evaluates_sums() {
        let p = Profile::parse("const:5 + cos:1").unwrap();
        assert_eq!(p.eval(0.0), 6.0);
        assert_eq!(p.to_string(), "const:5+cos:1");
        let q = Profile::parse("const:1+cos_sq").unwrap();
        assert!((q.eval(PI) - 2.0).abs() < 1e-15);
        let r = Profile::parse("exp_cos:-0.5").unwrap();
        assert!((r.eval(0.0) - (-0.5f64).exp()).abs() < 1e-15);
        let s = Profile::parse("2*sin:3+const:1e+0").unwrap();
        assert!((s.eval(PI / 6.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(Profile::parse("").is_err());
        assert!(Profile::parse("tan:1").is_err());
        assert!(Profile::parse("cos").is_err());
        assert!(Profile::parse("cos_sq:2").is_err());
        assert!(Profile::parse("const:x").is_err());
        assert!(parse_list(" ; ").is_err());
        assert_eq!(parse_list("cos:1;sin:1").unwrap().len(), 2);
    }
}
