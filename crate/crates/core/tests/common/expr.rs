//! A tiny complex-valued expression evaluator for the `.oracle` files.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, variables,
//! the constants `i` and `pi`, and the functions `exp sin cos sqrt conj re
//! im abs`. An oracle file is a list of `name = expression` lines evaluated
//! in order; `#` starts a comment.

use std::collections::BTreeMap;

use num_complex::Complex64;

pub type Env = BTreeMap<String, Complex64>;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|e| format!("{text}: {e}"))?));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(format!("unexpected character `{ch}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    env: &'a Env,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Complex64, String> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<Complex64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Complex64, String> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Complex64, String> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.unary()?;
            if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() < 64.0 {
                return Ok(base.powi(e.re as i32));
            }
            return Ok(base.powc(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Complex64, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Complex64::new(x, 0.0))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err("missing `)`".into());
                    }
                    return match name.as_str() {
                        "exp" => Ok(arg.exp()),
                        "sin" => Ok(arg.sin()),
                        "cos" => Ok(arg.cos()),
                        "sqrt" => Ok(arg.sqrt()),
                        "conj" => Ok(arg.conj()),
                        "re" => Ok(Complex64::new(arg.re, 0.0)),
                        "im" => Ok(Complex64::new(arg.im, 0.0)),
                        "abs" => Ok(Complex64::new(arg.norm(), 0.0)),
                        _ => Err(format!("unknown function `{name}`")),
                    };
                }
                match name.as_str() {
                    "i" => Ok(Complex64::new(0.0, 1.0)),
                    "pi" => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
                    _ => self
                        .env
                        .get(&name)
                        .copied()
                        .ok_or_else(|| format!("unbound variable `{name}`")),
                }
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

pub fn eval(src: &str, env: &Env) -> Result<Complex64, String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        env,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input in `{src}`"));
    }
    Ok(v)
}

/// Evaluates every assignment of an oracle file on top of `inputs`.
pub fn eval_oracle(text: &str, inputs: &[(&str, Complex64)]) -> Result<Env, String> {
    let mut env: Env = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (name, rhs) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `name = expr`", n + 1))?;
        let v = eval(rhs, &env).map_err(|e| format!("line {}: {e}", n + 1))?;
        env.insert(name.trim().to_string(), v);
    }
    Ok(env)
}

#[test]
fn evaluator_basics() {
    let env = Env::new();
    let c = |s| eval(s, &env).unwrap();
    assert_eq!(c("1 + 2*3"), Complex64::new(7.0, 0.0));
    assert_eq!(c("-2^2"), Complex64::new(-4.0, 0.0));
    assert_eq!(c("(1+i)*(1-i)"), Complex64::new(2.0, 0.0));
    assert!((c("exp(i*pi)") + 1.0).norm() < 1e-15);
    assert_eq!(c("2^-1"), Complex64::new(0.5, 0.0));
    assert!(eval("1 +", &env).is_err());
}
