//! Rank-two lattice arithmetic.
//!
//! Everything here is exact: lattice points are `i64` pairs and every
//! fractional quantity is a [`Rational`] backed by arbitrary precision
//! integers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

pub fn is_integral(q: &Rational) -> bool {
    q.denom().is_one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeVector {
    pub x: i64,
    pub y: i64,
}

impl From<[i64; 2]> for LatticeVector {
    fn from([x, y]: [i64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<LatticeVector> for [i64; 2] {
    fn from(v: LatticeVector) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl std::ops::Add for LatticeVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for LatticeVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for LatticeVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, v: LatticeVector) -> LatticeVector {
        LatticeVector::new(self * v.x, self * v.y)
    }
}

impl LatticeVector {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn gcd(&self) -> i64 {
        self.x.gcd(&self.y)
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }

    /// Key used for the textual `"x,y"` encoding in divisor JSON.
    pub fn key(&self) -> String {
        format!("{},{}", self.x, self.y)
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad ray key `{s}`")))?;
        let x = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad ray key `{s}`")))?;
        let y = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad ray key `{s}`")))?;
        Ok(Self::new(x, y))
    }

    /// Upper half plane (including the positive x-axis) sorts first.
    fn half(&self) -> u8 {
        if self.y > 0 || (self.y == 0 && self.x > 0) {
            0
        } else {
            1
        }
    }

    /// Counterclockwise angular order starting at the positive x-axis.
    pub fn angle_cmp(&self, other: &Self) -> Ordering {
        self.half()
            .cmp(&other.half())
            .then_with(|| 0.cmp(&det2(*self, *other)))
    }

    /// Rational coordinates of `self` in the basis `(u, v)`.
    pub fn coords_in(&self, u: LatticeVector, v: LatticeVector) -> (Rational, Rational) {
        let d = det2(u, v);
        (frac(det2(*self, v), d), frac(det2(u, *self), d))
    }
}

pub fn primitive(v: LatticeVector) -> Result<LatticeVector> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let g = v.gcd();
    Ok(LatticeVector::new(v.x / g, v.y / g))
}

pub fn det2(u: LatticeVector, v: LatticeVector) -> i64 {
    u.x * v.y - u.y * v.x
}

/// Ceiling of `a / b` for `b > 0`.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Interior rays of the Hirzebruch–Jung subdivision of the cone spanned by
/// `u` and `v`, listed in order from `u` to `v`.
///
/// The cone is the strictly convex one spanned by the two vectors, so either
/// orientation is accepted. Each step picks the lattice point `p` with
/// `det(cur, p) = 1` that lies in the cone and is closest to `cur`; the
/// sequence is the boundary of the convex hull of the nonzero lattice points
/// of the cone, i.e. the minimal resolution.
pub fn cone_smoothing_rays(u: LatticeVector, v: LatticeVector) -> Result<Vec<LatticeVector>> {
    let u = primitive(u)?;
    let v = primitive(v)?;
    let d = det2(u, v);
    if d == 0 {
        return Err(Error::DegenerateCone(u, v));
    }
    if d < 0 {
        let mut rays = cone_smoothing_rays(v, u)?;
        rays.reverse();
        return Ok(rays);
    }
    let mut rays = Vec::new();
    let mut cur = u;
    while det2(cur, v) > 1 {
        let dc = det2(cur, v);
        // p0 with det(cur, p0) = 1
        let (_, s, t) = ext_gcd(cur.x, cur.y);
        let p0 = LatticeVector::new(-t, s);
        debug_assert_eq!(det2(cur, p0), 1);
        // p = p0 + k*cur lies in the cone iff det(p, v) >= 0; pick the
        // smallest such k.
        let k = ceil_div(-det2(p0, v), dc);
        let p = p0 + k * cur;
        debug_assert!(det2(p, v) >= 0 && det2(p, v) < dc);
        rays.push(p);
        cur = p;
    }
    Ok(rays)
}

/// Element of GL(2, Z), acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn apply(&self, v: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn compose(&self, o: &Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// The unique matrix sending `p -> p_img` and `q -> q_img`, if it is
    /// integral and unimodular.
    pub fn mapping(
        p: LatticeVector,
        q: LatticeVector,
        p_img: LatticeVector,
        q_img: LatticeVector,
    ) -> Option<Matrix2> {
        let dpq = det2(p, q);
        if dpq == 0 || dpq.abs() != det2(p_img, q_img).abs() {
            return None;
        }
        // A = [p_img q_img] * [p q]^{-1}
        let inv = [q.y, -q.x, -p.y, p.x];
        let num = [
            p_img.x * inv[0] + q_img.x * inv[2],
            p_img.x * inv[1] + q_img.x * inv[3],
            p_img.y * inv[0] + q_img.y * inv[2],
            p_img.y * inv[1] + q_img.y * inv[3],
        ];
        if num.iter().any(|e| e % dpq != 0) {
            return None;
        }
        let m = Matrix2::new(num[0] / dpq, num[1] / dpq, num[2] / dpq, num[3] / dpq);
        m.is_unimodular().then_some(m)
    }

    /// Unimodular map sending `p` to `(1,0)` and `q` to `(a, |det(p,q)|)`
    /// with `0 <= a < |det(p,q)|`.
    pub fn normalizing(p: LatticeVector, q: LatticeVector) -> Option<Matrix2> {
        if !p.is_primitive() {
            return None;
        }
        let d = det2(p, q);
        if d == 0 {
            return None;
        }
        let (_, s, t) = ext_gcd(p.x, p.y);
        let mut m = Matrix2::new(s, t, -p.y, p.x);
        if d < 0 {
            m = Matrix2::new(1, 0, 0, -1).compose(&m);
        }
        let img = m.apply(q);
        let h = d.abs();
        let shift = -(img.x.div_euclid(h));
        Some(Matrix2::new(1, shift, 0, 1).compose(&m))
    }
}

/// All primitive vectors with `|x|, |y| <= bound`, sorted counterclockwise.
pub fn primitive_vectors(bound: i64) -> Vec<LatticeVector> {
    let mut out: Vec<LatticeVector> = (-bound..=bound)
        .flat_map(|x| (-bound..=bound).map(move |y| LatticeVector::new(x, y)))
        .filter(|v| !v.is_zero() && v.is_primitive())
        .collect();
    out.sort_by(|a, b| a.angle_cmp(b));
    out
}

/// Primitive vectors strictly inside the cone spanned by `u` and `v`, with
/// coordinates bounded by `|u| + |v|` componentwise. Every lattice point of
/// the half-open parallelogram `[0,1) u + [0,1) v` lies in this box.
pub fn interior_primitive_vectors(u: LatticeVector, v: LatticeVector) -> Vec<LatticeVector> {
    let bx = u.x.abs() + v.x.abs();
    let by = u.y.abs() + v.y.abs();
    let d = det2(u, v);
    let mut out = Vec::new();
    for x in -bx..=bx {
        for y in -by..=by {
            let e = LatticeVector::new(x, y);
            if e.is_zero() || !e.is_primitive() {
                continue;
            }
            let a = det2(e, v) * d.signum();
            let b = det2(u, e) * d.signum();
            if a > 0 && b > 0 {
                out.push(e);
            }
        }
    }
    out.sort_by(|a, b| a.angle_cmp(b));
    out
}

pub fn sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    #[test]
    fn primitive_divides_by_gcd() {
        assert_eq!(primitive(lv(2, 4)).unwrap(), lv(1, 2));
        assert_eq!(primitive(lv(0, -3)).unwrap(), lv(0, -1));
        assert_eq!(primitive(lv(-2, 1)).unwrap(), lv(-2, 1));
        assert_eq!(primitive(lv(0, 0)), Err(Error::ZeroVector));
    }

    #[test]
    fn determinants() {
        assert_eq!(det2(lv(1, 0), lv(0, 1)), 1);
        assert_eq!(det2(lv(-2, 1), lv(1, 1)), -3);
        assert_eq!(det2(lv(1, 1), lv(1, -2)), -3);
    }

    #[test]
    fn smoothing_known_cones() {
        assert!(cone_smoothing_rays(lv(1, 0), lv(0, 1)).unwrap().is_empty());
        assert_eq!(
            cone_smoothing_rays(lv(1, 1), lv(1, -2)).unwrap(),
            vec![lv(1, 0), lv(1, -1)]
        );
        assert_eq!(
            cone_smoothing_rays(lv(-2, 1), lv(1, 1)).unwrap(),
            vec![lv(-1, 1), lv(0, 1)]
        );
        assert_eq!(cone_smoothing_rays(lv(0, 1), lv(2, -1)).unwrap(), vec![lv(1, 0)]);
        assert!(matches!(
            cone_smoothing_rays(lv(1, 0), lv(-2, 0)),
            Err(Error::DegenerateCone(..))
        ));
    }

    #[test]
    fn normalizing_map() {
        let p = lv(-2, 1);
        let q = lv(1, 1);
        let m = Matrix2::normalizing(p, q).unwrap();
        assert!(m.is_unimodular());
        assert_eq!(m.apply(p), lv(1, 0));
        let img = m.apply(q);
        assert_eq!(img.y, 3);
        assert!((0..3).contains(&img.x));
    }

    #[test]
    fn angular_order() {
        let mut v = vec![lv(1, -2), lv(-2, 1), lv(1, 1), lv(1, 0), lv(0, -1)];
        v.sort_by(|a, b| a.angle_cmp(b));
        assert_eq!(v, vec![lv(1, 0), lv(1, 1), lv(-2, 1), lv(0, -1), lv(1, -2)]);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
