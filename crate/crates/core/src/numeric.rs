//! Double-double scalars, complex vectors and small complex matrices.
//!
//! Backward orbits converging to a boundary point get within `1e-19` of the
//! sphere after forty steps of dilation 3, which is below the resolution of
//! `f64`. Every point coordinate is therefore a double-double ([`Real`]);
//! logarithms and other transcendental functions are taken in `f64` once the
//! ill-conditioned differences (`1 - |z|^2`, `1 - <z, w>`) have been formed.

use num_complex::{Complex, Complex64};

pub use crate::dd::Dd;
use crate::error::{Error, Result};

pub type Real = Dd;
pub type Cx = Complex<Real>;

pub const ZERO: Real = Dd::from_f64(0.0);
pub const ONE: Real = Dd::from_f64(1.0);

#[inline]
pub fn dd(x: f64) -> Real {
    Dd::from_f64(x)
}

#[inline]
pub fn to_f64(x: Real) -> f64 {
    x.to_f64()
}

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Complex::new(dd(re), dd(im))
}

#[inline]
pub fn cx_real(x: Real) -> Cx {
    Complex::new(x, ZERO)
}

pub const CX_ZERO: Cx = Complex::new(ZERO, ZERO);
pub const CX_ONE: Cx = Complex::new(ONE, ZERO);
pub const CX_I: Cx = Complex::new(ZERO, ONE);

#[inline]
pub fn cx_from_f64(z: Complex64) -> Cx {
    cx(z.re, z.im)
}

#[inline]
pub fn cx_to_f64(z: Cx) -> Complex64 {
    Complex64::new(to_f64(z.re), to_f64(z.im))
}

#[inline]
pub fn scale(z: Cx, r: Real) -> Cx {
    Complex::new(z.re * r, z.im * r)
}

/// Hermitian product `<z, w> = sum z_i conj(w_i)`.
pub fn inner(z: &[Cx], w: &[Cx]) -> Cx {
    z.iter()
        .zip(w)
        .fold(CX_ZERO, |acc, (a, b)| acc + *a * b.conj())
}

pub fn norm_sqr(z: &[Cx]) -> Real {
    z.iter().fold(ZERO, |acc, a| acc + a.norm_sqr())
}

pub fn norm(z: &[Cx]) -> Real {
    norm_sqr(z).sqrt()
}

/// `1 - |z|^2`, accurate to double-double resolution.
pub fn defect(z: &[Cx]) -> Real {
    ONE - norm_sqr(z)
}

pub fn sub(z: &[Cx], w: &[Cx]) -> Vec<Cx> {
    z.iter().zip(w).map(|(a, b)| *a - *b).collect()
}

pub fn add(z: &[Cx], w: &[Cx]) -> Vec<Cx> {
    z.iter().zip(w).map(|(a, b)| *a + *b).collect()
}

pub fn mul_scalar(z: &[Cx], c: Cx) -> Vec<Cx> {
    z.iter().map(|a| *a * c).collect()
}

pub fn dist_euclid(z: &[Cx], w: &[Cx]) -> f64 {
    to_f64(norm(&sub(z, w)))
}

/// Dense complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![CX_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, CX_ONE);
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(cols: &[Vec<Cx>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, v: &[Cx]) -> Vec<Cx> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(CX_ZERO, |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = CX_ZERO;
                for k in 0..self.cols {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scaled(&self, c: Cx) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| *v * c).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| to_f64((*a - *b).norm_sqr().sqrt()))
            .fold(0.0, f64::max)
    }

    /// `max |U*U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .max_abs_diff(&CMatrix::identity(self.cols))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| cx_to_f64(self.get(i, j)))
    }
}

/// Complex Householder-type unitary `U` with `U u = e_1` for a unit vector `u`.
pub fn unitary_to_e1(u: &[Cx]) -> CMatrix {
    let n = u.len();
    let m1 = u[0].norm_sqr().sqrt();
    let phase = if to_f64(m1) > 0.0 {
        Complex::new(u[0].re / m1, u[0].im / m1)
    } else {
        CX_ONE
    };
    let mut v = u.to_vec();
    v[0] = v[0] - phase;
    let vv = norm_sqr(&v);
    let mut h = CMatrix::identity(n);
    if to_f64(vv) > 1e-60 {
        let two = dd(2.0);
        for i in 0..n {
            for j in 0..n {
                let e = h.get(i, j) - scale(v[i] * v[j].conj(), two / vv);
                h.set(i, j, e);
            }
        }
    }
    h.scaled(phase.conj())
}

const DECIMAL_DIGITS: usize = 30;

/// Scientific decimal rendering carrying enough digits to round-trip a double-double.
pub fn format_dd(x: Real) -> String {
    let hi = x.hi();
    if hi == 0.0 {
        return "0".to_string();
    }
    if !hi.is_finite() {
        return format!("{hi}");
    }
    let neg = hi < 0.0;
    let mut y = if neg { -x } else { x };
    let mut exp = y.hi().log10().floor() as i32;
    y = y / pow10(exp);
    if y.hi() >= 10.0 {
        y = y / dd(10.0);
        exp += 1;
    } else if y.hi() < 1.0 {
        y = y * dd(10.0);
        exp -= 1;
    }
    let mut digits = String::with_capacity(DECIMAL_DIGITS + 8);
    for i in 0..DECIMAL_DIGITS {
        let mut d = y.hi().floor();
        if y - dd(d) < ZERO {
            d -= 1.0;
        }
        let d = d.clamp(0.0, 9.0);
        digits.push(char::from(b'0' + d as u8));
        if i == 0 {
            digits.push('.');
        }
        y = (y - dd(d)) * dd(10.0);
    }
    format!("{}{}e{}", if neg { "-" } else { "" }, digits, exp)
}

/// Inverse of [`format_dd`]; also accepts plain decimals and fractions `p/q`.
pub fn parse_dd(s: &str) -> Result<Real> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_dd(num)?;
        let d = parse_dd(den)?;
        if d.hi() == 0.0 {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(n / d);
    }
    let bad = || Error::Parse(format!("not a number: '{s}'"));
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        Some(_) => (false, s),
        None => return Err(bad()),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let mut acc = ZERO;
    let mut used = 0usize;
    let mut scale10 = exp;
    for (i, ch) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = ch.to_digit(10).ok_or_else(bad)?;
        let is_frac = i >= int_part.len();
        if used < 31 {
            if acc.hi() != 0.0 || d != 0 {
                used += 1;
            }
            acc = acc * dd(10.0) + dd(d as f64);
            if is_frac {
                scale10 -= 1;
            }
        } else if !is_frac {
            scale10 += 1;
        }
    }
    let v = if scale10 >= 0 {
        acc * pow10(scale10)
    } else {
        acc / pow10(-scale10)
    };
    Ok(if neg { -v } else { v })
}

fn pow10(e: i32) -> Real {
    if e < 0 {
        return ONE / pow10(-e);
    }
    let mut base = dd(10.0);
    let mut acc = ONE;
    let mut n = e as u32;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        n >>= 1;
    }
    acc
}

/// Parses `re` or `re,im`, each part a decimal or fraction.
pub fn parse_complex(s: &str) -> Result<Cx> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex::new(parse_dd(re)?, parse_dd(im)?)),
        None => Ok(Complex::new(parse_dd(s)?, ZERO)),
    }
}

/// Parses `;`-separated complex coordinates, e.g. `0.5,0;0,0.1`.
pub fn parse_cvec(s: &str) -> Result<Vec<Cx>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_complex)
        .collect()
}

/// Fifteen significant digits.
pub fn fmt15(x: f64) -> String {
    format!("{:.14e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip_keeps_low_word() {
        let x = ONE - dd(2.0) / (dd(3.0).powi(40) + ONE);
        let back = parse_dd(&format_dd(x)).unwrap();
        let d = ONE - back;
        let expect = ONE - x;
        assert!((to_f64(d) / to_f64(expect) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parses_fractions_and_plain_decimals() {
        assert_eq!(to_f64(parse_dd("1/3").unwrap()), 1.0 / 3.0);
        assert_eq!(to_f64(parse_dd("-0.25").unwrap()), -0.25);
        assert_eq!(to_f64(parse_dd("2.5e-3").unwrap()), 2.5e-3);
        assert!(parse_dd("abc").is_err());
        assert!(parse_dd("1/0").is_err());
    }

    #[test]
    fn complex_vector_syntax() {
        let v = parse_cvec("0.5,0;0,-0.25").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(to_f64(v[1].im), -0.25);
    }

    #[test]
    fn householder_maps_to_e1() {
        let raw = vec![cx(0.6, 0.0), cx(0.0, 0.8)];
        let n = norm(&raw);
        let u: Vec<Cx> = raw.iter().map(|z| scale(*z, ONE / n)).collect();
        let h = unitary_to_e1(&u);
        let e = h.mul_vec(&u);
        assert!(dist_euclid(&e, &[CX_ONE, CX_ZERO]) < 1e-28);
        assert!(h.unitarity_defect() < 1e-28);
    }
}
