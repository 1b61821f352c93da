//! Sparse multivariate polynomials over the rationals, the variety-file
//! expression parser, and the symbolic queries the samplers need: total
//! degrees, initial and leading forms, derivatives, and detection of pure
//! powers of linear forms.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Complex;
use serde::Serialize;

use crate::error::{Error, Result};

/// Coefficient field of a system. Complex systems are realified for all
/// numeric work (2 real equations and 2 real coordinates per complex one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldTag {
    Real,
    Complex,
}

const EXPANSION_TERM_CAP: usize = 200_000;

/// A polynomial as a map from exponent vectors to non-zero rational
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, j: usize) -> Self {
        let mut e = vec![0u32; nvars];
        e[j] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        use std::collections::btree_map::Entry;
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let work = self.terms.len().saturating_mul(other.terms.len());
        if work > 20 * EXPANSION_TERM_CAP {
            return Err(Error::ExpansionTooLarge(work));
        }
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
                if out.terms.len() > EXPANSION_TERM_CAP {
                    return Err(Error::ExpansionTooLarge(out.terms.len()));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    /// Minimal total degree over non-zero terms (the order of vanishing).
    pub fn order(&self) -> Result<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .min()
            .ok_or(Error::ZeroPolynomial)
    }

    /// Maximal total degree over non-zero terms.
    pub fn degree(&self) -> Result<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .ok_or(Error::ZeroPolynomial)
    }

    pub fn is_homogeneous(&self) -> bool {
        match (self.order(), self.degree()) {
            (Ok(a), Ok(b)) => a == b,
            _ => true,
        }
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Homogeneous part of minimal total degree.
    pub fn initial_form(&self) -> Result<Self> {
        let d = self.order()?;
        Ok(self.homogeneous_part(d))
    }

    /// Homogeneous part of maximal total degree.
    pub fn leading_form(&self) -> Result<Self> {
        let d = self.degree()?;
        Ok(self.homogeneous_part(d))
    }

    fn homogeneous_part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() == d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to variable `j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] -= 1;
            out.terms
                .insert(e2, c * BigRational::from(BigInt::from(e[j])));
        }
        out
    }

    /// Exact evaluation at a rational complex point.
    pub fn eval_rational_complex(&self, z: &[Complex<BigRational>]) -> Complex<BigRational> {
        let mut acc = Complex::new(BigRational::zero(), BigRational::zero());
        for (e, c) in &self.terms {
            let mut term = Complex::new(c.clone(), BigRational::zero());
            for (j, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term * z[j].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Plain f64 evaluation (tests and small-degree uses only).
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (j, &k) in e.iter().enumerate() {
                t *= x[j].powi(k as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_complex(&self, z: &[Complex<f64>]) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex::new(rational_to_f64(c), 0.0);
            for (j, &k) in e.iter().enumerate() {
                t *= z[j].powi(k as i32);
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = e.iter().all(|&k| k == 0);
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut started = false;
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if started {
                    write!(f, "*")?;
                }
                started = true;
                write!(f, "x{j}")?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // magnitude overflow: recover the sign and scale through bit counts
        let sign = if c.is_negative() { -1.0 } else { 1.0 };
        let bits = c.numer().bits() as i64 - c.denom().bits() as i64;
        if bits > 0 {
            sign * f64::INFINITY
        } else {
            0.0
        }
    })
}

/// ln |c| of a rational, robust to magnitudes beyond f64 range.
pub fn log_abs_rational(c: &BigRational) -> f64 {
    if c.is_zero() {
        return f64::NEG_INFINITY;
    }
    let f = rational_to_f64(c).abs();
    if f.is_finite() && f > 0.0 {
        return f.ln();
    }
    let nbits = c.numer().bits() as f64;
    let dbits = c.denom().bits() as f64;
    (nbits - dbits) * std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Polynomial systems
// ---------------------------------------------------------------------------

/// A finite set of polynomials cutting out a germ or affine variety.
#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    pub field: FieldTag,
    pub vars: Vec<String>,
    pub polys: Vec<SparsePoly>,
}

impl PolynomialSystem {
    pub fn new(field: FieldTag, vars: Vec<String>, polys: Vec<SparsePoly>) -> Result<Self> {
        if polys.iter().all(SparsePoly::is_zero) {
            return Err(Error::EmptySystem);
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != vars.len() {
                return Err(Error::ArityMismatch(i));
            }
        }
        Ok(Self { field, vars, polys })
    }

    /// Parse polynomial expressions over the declared variables.
    pub fn parse(field: FieldTag, vars: Vec<String>, exprs: &[String]) -> Result<Self> {
        let polys = exprs
            .iter()
            .map(|e| parse_polynomial(e, &vars))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, vars, polys)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Real coordinates after realification.
    pub fn real_dim(&self) -> usize {
        match self.field {
            FieldTag::Real => self.nvars(),
            FieldTag::Complex => 2 * self.nvars(),
        }
    }

    /// Real equations after realification.
    pub fn real_equation_count(&self) -> usize {
        match self.field {
            FieldTag::Real => self.polys.len(),
            FieldTag::Complex => 2 * self.polys.len(),
        }
    }

    /// Coordinate labels of the realified space.
    pub fn real_var_names(&self) -> Vec<String> {
        match self.field {
            FieldTag::Real => self.vars.clone(),
            FieldTag::Complex => self
                .vars
                .iter()
                .flat_map(|v| [format!("{v}_re"), format!("{v}_im")])
                .collect(),
        }
    }

    /// Germ systems must vanish at the origin.
    pub fn check_germ(&self) -> Result<()> {
        for (i, p) in self.polys.iter().enumerate() {
            if !p.constant_term().is_zero() {
                return Err(Error::NonZeroConstantTerm(i));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> Vec<String> {
        self.polys.iter().map(|p| p.to_string()).collect()
    }

    /// Minimal order of vanishing of a hypersurface (symbolic multiplicity).
    pub fn symbolic_multiplicity(&self) -> Result<u32> {
        if self.polys.len() != 1 {
            return Err(Error::NotHypersurface(self.polys.len()));
        }
        self.polys[0].order()
    }
}

// ---------------------------------------------------------------------------
// Pure powers of linear forms
// ---------------------------------------------------------------------------

/// If `g = c * l^d` for a linear form `l`, return the complex coefficients
/// of `l` (for real systems the imaginary parts are zero). The test is exact
/// on the gradient-proportionality side and numeric on the identity side.
pub fn power_of_linear_form(g: &SparsePoly, field: FieldTag) -> Option<Vec<Complex<f64>>> {
    let d = g.degree().ok()?;
    if !g.is_homogeneous() || d == 0 {
        return None;
    }
    let n = g.nvars();
    if d == 1 {
        let mut coeffs = vec![Complex::new(0.0, 0.0); n];
        for (e, c) in g.terms() {
            let j = e.iter().position(|&k| k == 1).unwrap();
            coeffs[j] = Complex::new(rational_to_f64(c), 0.0);
        }
        return Some(coeffs);
    }
    let grads: Vec<SparsePoly> = (0..n).map(|j| g.derivative(j)).collect();
    // exact gradient-proportionality at two fixed generic rational points
    let point = |seed: u64| -> Vec<Complex<BigRational>> {
        let primes = [2i64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        (0..n)
            .map(|j| {
                let re = BigRational::from(BigInt::from(
                    primes[(j + seed as usize) % primes.len()],
                ));
                let im = match field {
                    FieldTag::Real => BigRational::zero(),
                    FieldTag::Complex => BigRational::new(
                        BigInt::from(primes[(j + seed as usize + 3) % primes.len()]),
                        BigInt::from(7),
                    ),
                };
                Complex::new(re, im)
            })
            .collect()
    };
    let v1: Vec<Complex<BigRational>> = grads
        .iter()
        .map(|p| p.eval_rational_complex(&point(0)))
        .collect();
    let v2: Vec<Complex<BigRational>> = grads
        .iter()
        .map(|p| p.eval_rational_complex(&point(5)))
        .collect();
    let zero = |z: &Complex<BigRational>| z.re.is_zero() && z.im.is_zero();
    if v1.iter().all(zero) || v2.iter().all(zero) {
        return None;
    }
    for i in 0..n {
        for j in i + 1..n {
            let minor = v1[i].clone() * v2[j].clone() - v1[j].clone() * v2[i].clone();
            if !zero(&minor) {
                return None;
            }
        }
    }
    // candidate direction from the larger gradient, as f64
    let v: Vec<Complex<f64>> = v1
        .iter()
        .map(|z| Complex::new(rational_to_f64(&z.re), rational_to_f64(&z.im)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let a: Vec<Complex<f64>> = v.iter().map(|z| z / norm).collect();
    // numeric identity check g(z) == c * l(z)^d at pseudo-random points
    let eval_l = |z: &[Complex<f64>]| -> Complex<f64> {
        a.iter().zip(z).map(|(ai, zi)| ai * zi).sum()
    };
    let test_points: Vec<Vec<Complex<f64>>> = (0..6)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let s = ((k * 37 + j * 101 + 13) % 97) as f64 / 97.0 - 0.5;
                    let t = ((k * 59 + j * 71 + 29) % 89) as f64 / 89.0 - 0.5;
                    match field {
                        FieldTag::Real => Complex::new(1.0 + s, 0.0),
                        FieldTag::Complex => Complex::new(1.0 + s, t),
                    }
                })
                .collect()
        })
        .collect();
    let base = &test_points[0];
    let lb = eval_l(base).powi(d as i32);
    if lb.norm() < 1e-12 {
        return None;
    }
    let c = g.eval_complex(base) / lb;
    for p in &test_points[1..] {
        let lhs = g.eval_complex(p);
        let rhs = c * eval_l(p).powi(d as i32);
        let scale = lhs.norm().max(rhs.norm()).max(1e-30);
        if (lhs - rhs).norm() / scale > 1e-8 {
            return None;
        }
    }
    Some(a)
}

// ---------------------------------------------------------------------------
// Parser: infix with + - * ^, integer or rational coefficients,
// ^ binds tightest, implicit multiplication disallowed.
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<SparsePoly> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
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

    fn expr(&mut self) -> Result<SparsePoly> {
        let mut negate = false;
        if let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                negate = c == b'-';
            }
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                b'-' => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SparsePoly> {
        let mut acc = self.factor()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            let f = self.factor()?;
            acc = acc.mul(&f)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SparsePoly> {
        let base = self.base()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.err("exponent must be non-negative"))?;
            return base.pow(k);
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<SparsePoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let numer = self.integer()?;
                // optional rational: p/q
                if let Some(b'/') = self.peek() {
                    self.pos += 1;
                    self.skip_ws();
                    let denom = self.integer()?;
                    if denom == 0 {
                        return Err(self.err("zero denominator"));
                    }
                    return Ok(SparsePoly::constant(
                        self.vars.len(),
                        BigRational::new(BigInt::from(numer), BigInt::from(denom)),
                    ));
                }
                Ok(SparsePoly::constant(
                    self.vars.len(),
                    BigRational::from(BigInt::from(numer)),
                ))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let ident = self.ident();
                match self.vars.iter().position(|v| v == &ident) {
                    Some(j) => Ok(SparsePoly::var(self.vars.len(), j)),
                    None => Err(self.err(&format!("unknown variable '{ident}'"))),
                }
            }
            _ => Err(self.err("expected number, variable or '('")),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_cusp() {
        let p = parse_polynomial("y^2 - x^3", &vars(&["x", "y"])).unwrap();
        assert_eq!(p.term_count(), 2);
        assert_eq!(p.order().unwrap(), 2);
        assert_eq!(p.degree().unwrap(), 3);
    }

    #[test]
    fn parse_realified_counts() {
        let sys = PolynomialSystem::parse(
            FieldTag::Complex,
            vars(&["x", "y", "z"]),
            &["x^2 + y^2 + z^2".to_string()],
        )
        .unwrap();
        assert_eq!(sys.real_equation_count(), 2);
        assert_eq!(sys.real_dim(), 6);
    }

    #[test]
    fn parse_high_degree() {
        let p = parse_polynomial("x^2021 + y^2021 - z^2021", &vars(&["x", "y", "z"])).unwrap();
        assert_eq!(p.term_count(), 3);
        assert_eq!(p.degree().unwrap(), 2021);
        assert!(p.is_homogeneous());
    }

    #[test]
    fn parse_rational_coefficient() {
        let p = parse_polynomial("3/2*x - 1/4", &vars(&["x"])).unwrap();
        assert_eq!(p.eval_f64(&[1.0]), 1.25);
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse_polynomial("x + $", &vars(&["x"])).unwrap_err();
        match e {
            Error::Parse { position, .. } => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_unknown_variable() {
        assert!(parse_polynomial("w^2", &vars(&["x"])).is_err());
    }

    #[test]
    fn parenthesized_power_expands() {
        let p = parse_polynomial("(x + y)^2", &vars(&["x", "y"])).unwrap();
        assert_eq!(p.term_count(), 3);
        assert_eq!(p.eval_f64(&[2.0, 3.0]), 25.0);
    }

    #[test]
    fn initial_and_leading_forms() {
        let p = parse_polynomial("y^2 - x^3", &vars(&["x", "y"])).unwrap();
        let init = p.initial_form().unwrap();
        assert_eq!(init.term_count(), 1);
        assert_eq!(init.degree().unwrap(), 2);
        let lead = p.leading_form().unwrap();
        assert_eq!(lead.degree().unwrap(), 3);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = parse_polynomial("x^3*y - 2*y^2", &vars(&["x", "y"])).unwrap();
        let dx = p.derivative(0);
        let x = [1.3, -0.7];
        let h = 1e-6;
        let fd = (p.eval_f64(&[x[0] + h, x[1]]) - p.eval_f64(&[x[0] - h, x[1]])) / (2.0 * h);
        assert!((dx.eval_f64(&x) - fd).abs() < 1e-6);
    }

    #[test]
    fn symbolic_multiplicity_examples() {
        let cusp = PolynomialSystem::parse(
            FieldTag::Complex,
            vars(&["x", "y"]),
            &["y^2 - x^3".to_string()],
        )
        .unwrap();
        assert_eq!(cusp.symbolic_multiplicity().unwrap(), 2);
        let quad = PolynomialSystem::parse(
            FieldTag::Complex,
            vars(&["x", "y", "z"]),
            &["x^2 + y^2 + z^2".to_string()],
        )
        .unwrap();
        assert_eq!(quad.symbolic_multiplicity().unwrap(), 2);
        let smooth = PolynomialSystem::parse(
            FieldTag::Complex,
            vars(&["x", "y"]),
            &["x + x^2 + y^3".to_string()],
        )
        .unwrap();
        assert_eq!(smooth.symbolic_multiplicity().unwrap(), 1);
    }

    #[test]
    fn germ_check() {
        let sys = PolynomialSystem::parse(
            FieldTag::Real,
            vars(&["x", "y"]),
            &["x^2 + y^2 - 1".to_string()],
        )
        .unwrap();
        assert!(matches!(
            sys.check_germ(),
            Err(Error::NonZeroConstantTerm(0))
        ));
    }

    #[test]
    fn pure_power_detection() {
        let v2 = vars(&["x", "y"]);
        let ysq = parse_polynomial("y^2", &v2).unwrap();
        let a = power_of_linear_form(&ysq, FieldTag::Complex).unwrap();
        assert!(a[0].norm() < 1e-12 && (a[1].norm() - 1.0).abs() < 1e-9);
        let z = parse_polynomial("z", &vars(&["x", "y", "z"])).unwrap();
        assert!(power_of_linear_form(&z, FieldTag::Complex).is_some());
        let quad = parse_polynomial("x^2 + y^2 + z^2", &vars(&["x", "y", "z"])).unwrap();
        assert!(power_of_linear_form(&quad, FieldTag::Complex).is_none());
        let xy = parse_polynomial("x*y", &v2).unwrap();
        assert!(power_of_linear_form(&xy, FieldTag::Complex).is_none());
        let mixed = parse_polynomial("(x + 2*y)^3", &v2).unwrap();
        let a = power_of_linear_form(&mixed, FieldTag::Real).unwrap();
        // direction proportional to (1, 2)
        assert!((a[1].re / a[0].re - 2.0).abs() < 1e-9);
        let brieskorn =
            parse_polynomial("x^2021 + y^2021 - z^2021", &vars(&["x", "y", "z"])).unwrap();
        assert!(power_of_linear_form(&brieskorn, FieldTag::Real).is_none());
    }

    #[test]
    fn expansion_cap_enforced() {
        let v = vars(&["x", "y", "z"]);
        let p = parse_polynomial("x + y + z", &v).unwrap();
        assert!(matches!(p.pow(2000), Err(Error::ExpansionTooLarge(_))));
    }
}
