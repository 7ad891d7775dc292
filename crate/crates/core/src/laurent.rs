//! Sparse real bivariate Laurent polynomials.
//!
//! A [`LaurentPoly`] is the defining equation `f` of a curve in `(C*)^2`. Terms are
//! kept sorted by exponent with duplicates merged and zero coefficients dropped, so
//! structural equality is polynomial equality.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;
use crate::scalar::{cabs, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term<T> {
    pub i: i32,
    pub j: i32,
    pub c: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly<T> {
    terms: Vec<Term<T>>,
}

/// Univariate polynomial obtained by fixing one variable of a [`LaurentPoly`] and
/// multiplying by the monomial that clears negative powers of the free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSlice<T> {
    /// Ascending powers of the free variable.
    pub coefficients: Vec<Complex<T>>,
    pub fixed: Var,
    pub value: Complex<T>,
    /// Exponent of the free variable that was factored out (the minimal one).
    pub shift: i32,
}

impl<T: Real> UnivariateSlice<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Evaluates the cleared polynomial (not the original Laurent slice).
    pub fn eval(&self, w: Complex<T>) -> Complex<T> {
        roots::horner(&self.coefficients, w)
    }

    /// Value of the original Laurent slice at the free variable `w`.
    pub fn eval_laurent(&self, w: Complex<T>) -> Complex<T> {
        self.eval(w) * w.powi(self.shift)
    }

    /// Roots in `C*` (zero roots introduced by the cleared form are removed).
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        let r = roots::roots(&self.coefficients, T::lit(1e-13))?;
        Ok(r.into_iter().filter(|z| !z.is_zero()).collect())
    }
}

fn normalize<T: Real>(mut raw: Vec<Term<T>>) -> Vec<Term<T>> {
    raw.sort_by_key(|t| (t.i, t.j));
    let mut out: Vec<Term<T>> = Vec::with_capacity(raw.len());
    for t in raw {
        match out.last_mut() {
            Some(last) if last.i == t.i && last.j == t.j => last.c = last.c + t.c,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.c != T::zero());
    out
}

/// True when every exponent vector lies on a single line.
pub(crate) fn collinear(points: &[(i64, i64)]) -> bool {
    let Some(&(x0, y0)) = points.first() else {
        return true;
    };
    let Some(&(x1, y1)) = points.iter().find(|&&p| p != (x0, y0)) else {
        return true;
    };
    points
        .iter()
        .all(|&(x, y)| (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) == 0)
}

impl<T: Real> LaurentPoly<T> {
    /// Builds a curve equation: normalizes and rejects empty or collinear support.
    pub fn new(terms: impl IntoIterator<Item = Term<T>>) -> Result<Self> {
        let p = Self::from_terms_unchecked(terms);
        if p.terms.is_empty() {
            return Err(Error::EmptySupport);
        }
        if collinear(&p.support()) {
            return Err(Error::DegenerateSupport);
        }
        Ok(p)
    }

    /// Normalizes without the non-degeneracy check. Derived polynomials (partials,
    /// fiber equations) legitimately have thin or empty support.
    pub fn from_terms_unchecked(terms: impl IntoIterator<Item = Term<T>>) -> Self {
        LaurentPoly {
            terms: normalize(terms.into_iter().collect()),
        }
    }

    pub fn from_triples(triples: &[(i32, i32, f64)]) -> Result<Self> {
        Self::new(triples.iter().map(|&(i, j, c)| Term { i, j, c: T::lit(c) }))
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<(i64, i64)> {
        self.terms.iter().map(|t| (t.i as i64, t.j as i64)).collect()
    }

    pub fn coefficient(&self, i: i32, j: i32) -> T {
        self.terms
            .iter()
            .find(|t| t.i == i && t.j == j)
            .map_or(T::zero(), |t| t.c)
    }

    /// Exponent range `(min, max)` of one variable.
    pub fn exponent_range(&self, var: Var) -> (i32, i32) {
        let pick = |t: &Term<T>| if var == Var::X { t.i } else { t.j };
        let lo = self.terms.iter().map(pick).min().unwrap_or(0);
        let hi = self.terms.iter().map(pick).max().unwrap_or(0);
        (lo, hi)
    }

    fn check_domain(z1: Complex<T>, z2: Complex<T>) -> Result<()> {
        if z1.is_zero() || z2.is_zero() {
            return Err(Error::Domain(format!(
                "({}, {})",
                Complex::new(z1.re.to_f64_lossy(), z1.im.to_f64_lossy()),
                Complex::new(z2.re.to_f64_lossy(), z2.im.to_f64_lossy())
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z1: Complex<T>, z2: Complex<T>) -> Result<Complex<T>> {
        Self::check_domain(z1, z2)?;
        Ok(self.eval_unchecked(z1, z2))
    }

    pub(crate) fn eval_unchecked(&self, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
        self.terms
            .iter()
            .fold(Complex::zero(), |acc, t| acc + z1.powi(t.i) * z2.powi(t.j) * t.c)
    }

    pub fn eval_real(&self, x: T, y: T) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.c * x.powi(t.i) * y.powi(t.j))
    }

    /// `sum |c| |z1|^i |z2|^j`, the natural scale for relative residuals.
    pub fn magnitude(&self, z1: Complex<T>, z2: Complex<T>) -> T {
        let (a, b) = (cabs(z1), cabs(z2));
        self.terms
            .iter()
            .fold(T::zero(), |acc, t| acc + t.c.abs() * a.powi(t.i) * b.powi(t.j))
    }

    /// `|f(z)| / magnitude(z)`.
    pub fn relative_residual(&self, z1: Complex<T>, z2: Complex<T>) -> T {
        let m = self.magnitude(z1, z2);
        if m == T::zero() {
            return T::zero();
        }
        cabs(self.eval_unchecked(z1, z2)) / m
    }

    pub fn partial(&self, var: Var) -> LaurentPoly<T> {
        Self::from_terms_unchecked(self.terms.iter().map(|t| match var {
            Var::X => Term {
                i: t.i - 1,
                j: t.j,
                c: t.c * T::from_i32(t.i).unwrap(),
            },
            Var::Y => Term {
                i: t.i,
                j: t.j - 1,
                c: t.c * T::from_i32(t.j).unwrap(),
            },
        }))
    }

    /// `(z1 df/dz1, z2 df/dz2)`: every term keeps its exponent and is scaled by `i`
    /// (resp. `j`).
    pub fn log_gauss_pair(&self) -> (LaurentPoly<T>, LaurentPoly<T>) {
        let scaled = |w: fn(&Term<T>) -> i32| {
            Self::from_terms_unchecked(self.terms.iter().map(|t| Term {
                c: t.c * T::from_i32(w(t)).unwrap(),
                ..*t
            }))
        };
        (scaled(|t| t.i), scaled(|t| t.j))
    }

    pub fn scale(&self, k: T) -> LaurentPoly<T> {
        Self::from_terms_unchecked(self.terms.iter().map(|t| Term { c: t.c * k, ..*t }))
    }

    /// `p(e^a x, e^b y)`.
    pub fn torus_scale(&self, a: T, b: T) -> LaurentPoly<T> {
        Self::from_terms_unchecked(self.terms.iter().map(|t| Term {
            c: t.c * (T::from_i32(t.i).unwrap() * a + T::from_i32(t.j).unwrap() * b).exp(),
            ..*t
        }))
    }

    pub fn add(&self, other: &LaurentPoly<T>) -> LaurentPoly<T> {
        Self::from_terms_unchecked(self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// Exchanges the roles of the two variables.
    pub fn swap(&self) -> LaurentPoly<T> {
        Self::from_terms_unchecked(self.terms.iter().map(|t| Term { i: t.j, j: t.i, c: t.c }))
    }

    pub fn slice(&self, fixed: Var, value: Complex<T>) -> Result<UnivariateSlice<T>> {
        if value.is_zero() {
            return Err(Error::Domain("slice at zero".into()));
        }
        let free = fixed.other();
        let (lo, hi) = self.exponent_range(free);
        let mut coefficients = vec![Complex::zero(); (hi - lo + 1).max(0) as usize];
        for t in &self.terms {
            let (e_fixed, e_free) = match fixed {
                Var::X => (t.i, t.j),
                Var::Y => (t.j, t.i),
            };
            coefficients[(e_free - lo) as usize] = coefficients[(e_free - lo) as usize] + value.powi(e_fixed) * t.c;
        }
        let mut coefficients = roots::trim_leading(&coefficients, T::lit(1e-14));
        if coefficients.is_empty() {
            coefficients.push(Complex::zero());
        }
        Ok(UnivariateSlice {
            coefficients,
            fixed,
            value,
            shift: lo,
        })
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    i: t.i,
                    j: t.j,
                    c: t.c.to_f64_lossy(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        Self::new(json.terms.iter().map(|t| Term {
            i: t.i,
            j: t.j,
            c: T::lit(t.c),
        }))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: PolyJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_json(&json)
    }

    /// Convert to another scalar type.
    pub fn cast<U: Real>(&self) -> LaurentPoly<U> {
        LaurentPoly::from_terms_unchecked(self.terms.iter().map(|t| Term {
            i: t.i,
            j: t.j,
            c: U::lit(t.c.to_f64_lossy()),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub i: i32,
    pub j: i32,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

fn write_monomial(f: &mut fmt::Formatter<'_>, i: i32, j: i32) -> fmt::Result {
    let mut first = true;
    for (name, e) in [("x", i), ("y", j)] {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        match e {
            1 => write!(f, "{name}")?,
            _ => write!(f, "{name}^{e}")?,
        }
    }
    Ok(())
}

impl<T: Real> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let neg = t.c < T::zero();
            let a = t.c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let constant = t.i == 0 && t.j == 0;
            if constant {
                write!(f, "{a}")?;
            } else if a == T::one() {
                write_monomial(f, t.i, t.j)?;
            } else {
                write!(f, "{a}*")?;
                write_monomial(f, t.i, t.j)?;
            }
        }
        Ok(())
    }
}

impl<T: Real> FromStr for LaurentPoly<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Parses `c*x^i*y^j` sums. Factors may appear in any order and repeat; exponents
/// may be negative (`x^-1` or `x^(-1)`); a bare sign or a missing coefficient
/// means `1`.
pub fn parse<T: Real>(text: &str) -> Result<LaurentPoly<T>> {
    let terms = Parser::new(text).terms()?;
    LaurentPoly::new(terms)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<R>(&self, msg: impl Into<String>) -> Result<R> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn terms<T: Real>(&mut self) -> Result<Vec<Term<T>>> {
        let mut out = Vec::new();
        let mut sign = T::one();
        let mut first = true;
        loop {
            match self.peek() {
                None if first => return self.err("empty expression"),
                None => return self.err("expected a term after sign"),
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -sign;
                }
                Some(_) => {
                    let t = self.term::<T>()?;
                    out.push(Term { c: t.c * sign, ..t });
                    sign = T::one();
                    first = false;
                    match self.peek() {
                        None => return Ok(out),
                        Some(b'+') | Some(b'-') => {}
                        Some(c) => return self.err(format!("unexpected '{}'", c as char)),
                    }
                }
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Term<T>> {
        let mut t = Term {
            i: 0,
            j: 0,
            c: T::one(),
        };
        loop {
            self.factor(&mut t)?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(t);
            }
        }
    }

    fn factor<T: Real>(&mut self, t: &mut Term<T>) -> Result<()> {
        match self.peek() {
            Some(b'x') | Some(b'y') => {
                let var = self.src[self.pos];
                self.pos += 1;
                let e = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.exponent()?
                } else {
                    1
                };
                let slot = if var == b'x' { &mut t.i } else { &mut t.j };
                *slot = slot
                    .checked_add(e)
                    .ok_or(())
                    .or_else(|_| self.err("exponent overflow"))?;
                Ok(())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v: T = self.number()?;
                t.c = t.c * v;
                Ok(())
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number<T: Real>(&mut self) -> Result<T> {
        let start = self.pos;
        let s = self.src;
        let mut p = self.pos;
        while p < s.len() && (s[p].is_ascii_digit() || s[p] == b'.') {
            p += 1;
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                while q < s.len() && s[q].is_ascii_digit() {
                    q += 1;
                }
                p = q;
            }
        }
        let text = std::str::from_utf8(&s[start..p]).expect("ascii slice");
        match text.parse::<T>() {
            Ok(v) if v.is_finite() => {
                self.pos = p;
                Ok(v)
            }
            _ => self.err(format!("invalid number '{text}'")),
        }
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer exponent");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let mut e: i32 = match digits.parse() {
            Ok(e) => e,
            Err(_) => return self.err("exponent out of range"),
        };
        if neg {
            e = -e;
        }
        if paren {
            if self.peek() != Some(b')') {
                return self.err("expected ')'");
            }
            self.pos += 1;
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = LaurentPoly<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn triples(p: &P) -> Vec<(i32, i32, f64)> {
        p.terms().iter().map(|t| (t.i, t.j, t.c)).collect()
    }

    #[test]
    fn parse_examples() {
        let p: P = "1 + x + y".parse().unwrap();
        assert_eq!(triples(&p), vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let p: P = "x^2 + y^2 + 1".parse().unwrap();
        assert_eq!(triples(&p), vec![(0, 0, 1.0), (0, 2, 1.0), (2, 0, 1.0)]);
        let p: P = "x*y - x - y".parse().unwrap();
        assert_eq!(triples(&p), vec![(0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)]);
    }

    #[test]
    fn parse_merges_and_handles_negative_exponents() {
        let p: P = " 2*x*y^-1 + x^(-1) - 0.5 * y * 4 + x - x + 3".parse().unwrap();
        assert_eq!(triples(&p), vec![(-1, 0, 1.0), (0, 0, 3.0), (0, 1, -2.0), (1, -1, 2.0)]);
        let p: P = "1e-3*x + y*x^2 + 1".parse().unwrap();
        assert_eq!(p.coefficient(1, 0), 1e-3);
        assert_eq!(p.coefficient(2, 1), 1.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("".parse::<P>(), Err(Error::Syntax { .. })));
        assert!(matches!("1 + x +".parse::<P>(), Err(Error::Syntax { .. })));
        assert!(matches!("1 + z".parse::<P>(), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!("x^".parse::<P>(), Err(Error::Syntax { .. })));
        assert_eq!("x - x".parse::<P>(), Err(Error::EmptySupport));
        assert_eq!("x + x^2".parse::<P>(), Err(Error::DegenerateSupport));
        assert_eq!("1 + x*y + x^2*y^2".parse::<P>(), Err(Error::DegenerateSupport));
    }

    #[test]
    fn eval_examples() {
        let line: P = "1 + x + y".parse().unwrap();
        assert!(line.eval(c(-0.5, 0.0), c(-0.5, 0.0)).unwrap().norm() < 1e-15);
        assert!(line.eval(c(0.0, 1.0), c(-1.0, -1.0)).unwrap().norm() < 1e-15);
        let q: P = "x^2 + y^2 + 1".parse().unwrap();
        assert_eq!(q.eval(c(1.0, 0.0), c(1.0, 0.0)).unwrap(), c(3.0, 0.0));
        assert!(matches!(line.eval(c(0.0, 0.0), c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn log_gauss_pair_examples() {
        let (a, b) = "1 + x + y".parse::<P>().unwrap().log_gauss_pair();
        assert_eq!(triples(&a), vec![(1, 0, 1.0)]);
        assert_eq!(triples(&b), vec![(0, 1, 1.0)]);
        let (a, b) = "x^2 + y^2 + 1".parse::<P>().unwrap().log_gauss_pair();
        assert_eq!(triples(&a), vec![(2, 0, 2.0)]);
        assert_eq!(triples(&b), vec![(0, 2, 2.0)]);
        let p = P::from_terms_unchecked([Term { i: 1, j: -1, c: 1.0 }]);
        let (a, b) = p.log_gauss_pair();
        assert_eq!(triples(&a), vec![(1, -1, 1.0)]);
        assert_eq!(triples(&b), vec![(1, -1, -1.0)]);
    }

    #[test]
    fn slice_examples() {
        let s = "1 + x + y".parse::<P>().unwrap().slice(Var::X, c(2.0, 0.0)).unwrap();
        assert_eq!(s.coefficients, vec![c(3.0, 0.0), c(1.0, 0.0)]);
        let s = "x^2 + y^2 + 1"
            .parse::<P>()
            .unwrap()
            .slice(Var::X, c(0.0, 1.0))
            .unwrap();
        assert_eq!(s.degree(), 2);
        assert!(s.coefficients[0].norm() < 1e-15);
        assert!(s.roots().unwrap().is_empty());
        let p = P::from_terms_unchecked([Term { i: 1, j: -1, c: 1.0 }, Term { i: 0, j: 0, c: 1.0 }]);
        let s = p.slice(Var::X, c(3.0, 0.0)).unwrap();
        assert_eq!(s.shift, -1);
        assert_eq!(s.coefficients, vec![c(3.0, 0.0), c(1.0, 0.0)]);
        assert!(p.slice(Var::Y, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn display_round_trip() {
        for text in ["1 + x + y", "x*y - x - y", "-2.5*x^-1*y^3 + 0.125 - y^-2"] {
            let p: P = text.parse().unwrap();
            let q: P = p.to_string().parse().unwrap();
            assert_eq!(p, q);
        }
        assert_eq!("1 + x + y".parse::<P>().unwrap().to_string(), "1 + y + x");
    }

    #[test]
    fn json_round_trip() {
        let p: P = "x*y - x - y + 0.3".parse().unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(P::from_json_str(&text).unwrap(), p);
        assert!(P::from_json_str(r#"{"terms":[{"i":1,"j":0,"c":1.0}]}"#).is_err());
        assert!(matches!(P::from_json_str("{"), Err(Error::Json(_))));
    }

    #[test]
    fn f32_instantiation() {
        let p: LaurentPoly<f32> = "1 + x + y".parse().unwrap();
        let v = p.eval(Complex::new(-0.5f32, 0.0), Complex::new(-0.5, 0.0)).unwrap();
        assert!(v.norm() < 1e-6);
    }
}
