//! Construction trees for representations and their text syntax.
//!
//! ```text
//! spec := "trivial" | "std" | "standard" | "adjoint" | "ad"
//!       | "dual(" spec ")" | "wedge" d "(" spec ")" | "sym" d "(" spec ")"
//!       | "tensor(" spec "," spec ")"
//! ```
//!
//! Shorthands: `wedgeD` and `symD` without an argument apply to `std`, and
//! `std-dual` is `tensor(std,dual(std))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RepSpec {
    Trivial,
    Standard,
    Dual(Box<RepSpec>),
    Adjoint,
    Wedge(usize, Box<RepSpec>),
    Sym(usize, Box<RepSpec>),
    Tensor(Box<RepSpec>, Box<RepSpec>),
}

fn binom(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl RepSpec {
    /// Dimension for `SL(n)`, `None` on overflow.
    pub fn dim(&self, n: usize) -> Option<usize> {
        match self {
            RepSpec::Trivial => Some(1),
            RepSpec::Standard => Some(n),
            RepSpec::Dual(r) => r.dim(n),
            RepSpec::Adjoint => Some(n * n - 1),
            RepSpec::Wedge(d, r) => binom(r.dim(n)?, *d),
            RepSpec::Sym(d, r) => binom(r.dim(n)? + d - 1, *d),
            RepSpec::Tensor(a, b) => a.dim(n)?.checked_mul(b.dim(n)?),
        }
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepSpec::Trivial => write!(f, "trivial"),
            RepSpec::Standard => write!(f, "std"),
            RepSpec::Dual(r) => write!(f, "dual({r})"),
            RepSpec::Adjoint => write!(f, "adjoint"),
            RepSpec::Wedge(d, r) => write!(f, "wedge{d}({r})"),
            RepSpec::Sym(d, r) => write!(f, "sym{d}({r})"),
            RepSpec::Tensor(a, b) => write!(f, "tensor({a},{b})"),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Config(format!("bad representation {:?} at offset {}: {what}", self.input, self.pos))
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphabetic() || self.s[self.pos] == b'-') {
            self.pos += 1;
        }
        &self.input[start..self.pos]
    }

    fn number(&mut self) -> Option<usize> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.input[start..self.pos].parse().ok()
    }

    fn spec(&mut self) -> Result<RepSpec> {
        let name = self.word();
        match name {
            "trivial" => Ok(RepSpec::Trivial),
            "std" | "standard" => Ok(RepSpec::Standard),
            "adjoint" | "ad" => Ok(RepSpec::Adjoint),
            "std-dual" => Ok(RepSpec::Tensor(Box::new(RepSpec::Standard), Box::new(RepSpec::Dual(Box::new(RepSpec::Standard))))),
            "dual" => {
                self.expect(b'(')?;
                let r = self.spec()?;
                self.expect(b')')?;
                Ok(RepSpec::Dual(Box::new(r)))
            }
            "tensor" => {
                self.expect(b'(')?;
                let a = self.spec()?;
                self.expect(b',')?;
                let b = self.spec()?;
                self.expect(b')')?;
                Ok(RepSpec::Tensor(Box::new(a), Box::new(b)))
            }
            "wedge" | "sym" => {
                let d = self.number().ok_or_else(|| self.err("expected a degree"))?;
                if d == 0 {
                    return Err(self.err("degree must be positive"));
                }
                let inner = if self.eat(b'(') {
                    let r = self.spec()?;
                    self.expect(b')')?;
                    r
                } else {
                    RepSpec::Standard
                };
                let inner = Box::new(inner);
                Ok(if name == "wedge" { RepSpec::Wedge(d, inner) } else { RepSpec::Sym(d, inner) })
            }
            _ => Err(self.err(&format!("unknown construction {name:?}"))),
        }
    }
}

impl FromStr for RepSpec {
    type Err = Error;
    fn from_str(input: &str) -> Result<Self> {
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: compact.as_bytes(), pos: 0, input: &compact };
        let spec = p.spec()?;
        if p.pos != compact.len() {
            return Err(p.err("trailing input"));
        }
        Ok(spec)
    }
}
