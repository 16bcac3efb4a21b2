//! Torus-invariant divisors on complete toric surfaces.
//!
//! A divisor is a rational coefficient per ray. Its support function is
//! linear on each two-dimensional cone; intersection numbers on singular
//! fans are Mumford's, computed by pulling back to the minimal resolution.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::{Fan, FanJson, FanMorphism};
use crate::lattice::{det2, int, is_integral, parse_rational, LatticeVector, Rational};
use crate::linalg;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ToricDivisor {
    fan: Fan,
    coeffs: Vec<Rational>,
}

impl fmt::Debug for ToricDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ToricDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (r, c) in self.fan.rays().iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*D{r}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A rational point of the dual lattice `M ⊗ Q`.
pub type LinearForm = [Rational; 2];

pub fn pair(m: &LinearForm, v: LatticeVector) -> Rational {
    &m[0] * int(v.x) + &m[1] * int(v.y)
}

/// The support function of a divisor: one linear form per cone, with
/// `<m_σ, v> = -coeff(v)` on both rays of `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLFunction {
    fan: Fan,
    pub forms: Vec<LinearForm>,
}

impl PLFunction {
    pub fn eval(&self, e: LatticeVector) -> Rational {
        pair(&self.forms[self.fan.containing_cone(e)], e)
    }
}

/// Solves `<m, u> = a`, `<m, v> = b` for `det(u, v) != 0`.
pub fn solve_form(u: LatticeVector, v: LatticeVector, a: &Rational, b: &Rational) -> LinearForm {
    let d = int(det2(u, v));
    // m = (a*v.y - b*u.y, b*u.x - a*v.x) / det
    let mx = (a * int(v.y) - b * int(u.y)) / &d;
    let my = (b * int(u.x) - a * int(v.x)) / &d;
    [mx, my]
}

impl ToricDivisor {
    pub fn new(fan: Fan, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != fan.len() {
            return Err(Error::InvalidDivisor(format!(
                "{} coefficients for {} rays",
                coeffs.len(),
                fan.len()
            )));
        }
        Ok(Self { fan, coeffs })
    }

    pub fn zero(fan: &Fan) -> Self {
        Self {
            coeffs: vec![Rational::zero(); fan.len()],
            fan: fan.clone(),
        }
    }

    pub fn prime(fan: &Fan, r: LatticeVector) -> Result<Self> {
        Self::from_terms(fan, &[(r, int(1))])
    }

    pub fn from_terms(fan: &Fan, terms: &[(LatticeVector, Rational)]) -> Result<Self> {
        let mut d = Self::zero(fan);
        for (r, c) in terms {
            let i = fan.index_of(r).ok_or(Error::UnknownRay(*r))?;
            d.coeffs[i] += c;
        }
        Ok(d)
    }

    /// Integer-coefficient shorthand used heavily in tests and fixtures.
    pub fn from_int_terms(fan: &Fan, terms: &[((i64, i64), i64)]) -> Result<Self> {
        let t: Vec<_> = terms
            .iter()
            .map(|&((x, y), c)| (LatticeVector::new(x, y), int(c)))
            .collect();
        Self::from_terms(fan, &t)
    }

    /// The divisor of the character `χ^m`: `Σ <m, v_ρ> D_ρ`.
    pub fn principal(fan: &Fan, m: &LinearForm) -> Self {
        Self {
            coeffs: fan.rays().iter().map(|&v| pair(m, v)).collect(),
            fan: fan.clone(),
        }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, r: &LatticeVector) -> Rational {
        self.fan
            .index_of(r)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (LatticeVector, &Rational)> {
        self.fan.rays().iter().copied().zip(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn support(&self) -> Vec<LatticeVector> {
        self.terms()
            .filter(|(_, c)| !c.is_zero())
            .map(|(r, _)| r)
            .collect()
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.fan != o.fan {
            return Err(Error::FanMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Self {
            fan: self.fan.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.scale(&int(-1)))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            fan: self.fan.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Coefficientwise `self <= o`.
    pub fn le(&self, o: &Self) -> Result<bool> {
        self.check_same(o)?;
        Ok(self.coeffs.iter().zip(&o.coeffs).all(|(a, b)| a <= b))
    }

    pub fn pl_function(&self) -> PLFunction {
        let n = self.fan.len();
        let forms = (0..n)
            .map(|i| {
                let (u, v) = self.fan.cone(i);
                solve_form(u, v, &-&self.coeffs[i], &-&self.coeffs[(i + 1) % n])
            })
            .collect();
        PLFunction {
            fan: self.fan.clone(),
            forms,
        }
    }

    /// Pullback along a refinement: the coefficient at a source ray `e` is
    /// `-φ_D(e)`.
    pub fn pullback(&self, f: &FanMorphism) -> Result<Self> {
        if f.target != self.fan {
            return Err(Error::FanMismatch);
        }
        let phi = self.pl_function();
        Ok(Self {
            coeffs: f.source.rays().iter().map(|&e| -phi.eval(e)).collect(),
            fan: f.source.clone(),
        })
    }

    /// Pullback to any fan refining this divisor's fan.
    pub fn pullback_to(&self, model: &Fan) -> Result<Self> {
        let f = FanMorphism::new(model.clone(), self.fan.clone())?;
        self.pullback(&f)
    }

    pub fn pushforward(&self, f: &FanMorphism) -> Result<Self> {
        if f.source != self.fan {
            return Err(Error::FanMismatch);
        }
        Ok(self.pushforward_to(&f.target))
    }

    /// Restriction of coefficients to the rays of a coarser fan.
    pub fn pushforward_to(&self, target: &Fan) -> Self {
        Self {
            coeffs: target.rays().iter().map(|r| self.coeff(r)).collect(),
            fan: target.clone(),
        }
    }

    pub fn intersect(&self, o: &Self) -> Result<Rational> {
        self.check_same(o)?;
        let m = intersection_matrix(&self.fan);
        let mut s = Rational::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() && !m[i][j].is_zero() {
                    s += a * b * &m[i][j];
                }
            }
        }
        Ok(s)
    }

    /// Intersection with the invariant curve of the `i`-th ray.
    pub fn dot_ray(&self, i: usize) -> Rational {
        let m = intersection_matrix(&self.fan);
        self.coeffs
            .iter()
            .zip(&m[i])
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_cartier(&self) -> bool {
        self.pl_function()
            .forms
            .iter()
            .all(|m| is_integral(&m[0]) && is_integral(&m[1]))
    }

    pub fn is_nef(&self) -> bool {
        (0..self.fan.len()).all(|i| !self.dot_ray(i).is_negative())
    }

    pub fn is_ample(&self) -> bool {
        (0..self.fan.len()).all(|i| self.dot_ray(i).is_positive())
    }

    /// The linear form `m_0` that kills the coefficients of the first two
    /// rays after adding `div(χ^{m_0})`.
    fn normalizing_form(&self) -> LinearForm {
        let (u, v) = self.fan.cone(0);
        solve_form(u, v, &-&self.coeffs[0], &-&self.coeffs[1])
    }

    /// Coordinates in `Cl(X) ⊗ Q ≅ Q^{n-2}`: the coefficients at rays
    /// `2..n` of the unique representative with zero coefficients on the
    /// first two rays.
    pub fn class_of(&self) -> DivisorClass {
        let m = self.normalizing_form();
        DivisorClass(
            self.fan.rays()[2..]
                .iter()
                .zip(&self.coeffs[2..])
                .map(|(&v, c)| c + pair(&m, v))
                .collect(),
        )
    }

    pub fn is_torsion(&self) -> bool {
        self.class_of().is_zero()
    }

    /// Linear equivalence over `Z`, or over `Q` when `over_q` is set.
    pub fn linear_equivalent(&self, o: &Self, over_q: bool) -> Result<bool> {
        let d = self.try_sub(o)?;
        if !d.is_torsion() {
            return Ok(false);
        }
        if over_q {
            return Ok(true);
        }
        let m = d.normalizing_form();
        Ok(is_integral(&m[0]) && is_integral(&m[1]))
    }
}

/// `Cl(X) ⊗ Q` coordinates of a divisor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorClass(pub Vec<Rational>);

impl DivisorClass {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

pub fn canonical_divisor(fan: &Fan) -> ToricDivisor {
    ToricDivisor {
        coeffs: vec![int(-1); fan.len()],
        fan: fan.clone(),
    }
}

/// Sum of all invariant prime divisors (the reduced toric boundary).
pub fn toric_boundary(fan: &Fan) -> ToricDivisor {
    ToricDivisor {
        coeffs: vec![int(1); fan.len()],
        fan: fan.clone(),
    }
}

pub fn span_rank(divs: &[ToricDivisor]) -> Result<usize> {
    if let Some(first) = divs.first() {
        for d in divs {
            first.check_same(d)?;
        }
    }
    let rows: Vec<Vec<Rational>> = divs.iter().map(|d| d.class_of().0).collect();
    Ok(linalg::rank(&rows))
}

/// Symmetric matrix of Mumford intersection numbers `D_i · D_j`, computed
/// once per fan.
pub fn intersection_matrix(fan: &Fan) -> Arc<Vec<Vec<Rational>>> {
    fan.intersections
        .get_or_init(|| Arc::new(compute_intersections(fan)))
        .clone()
}

fn compute_intersections(fan: &Fan) -> Vec<Vec<Rational>> {
    let (y, morph) = fan.minimal_resolution();
    let m = y.len();
    // smooth rules on the resolution
    let mut s = vec![vec![Rational::zero(); m]; m];
    for k in 0..m {
        s[k][k] = int(-det2(y.prev(k), y.next(k)));
        s[k][(k + 1) % m] = int(1);
        s[(k + 1) % m][k] = int(1);
    }
    let pulled: Vec<Vec<Rational>> = fan
        .rays()
        .iter()
        .map(|&r| {
            ToricDivisor::prime(fan, r)
                .and_then(|d| d.pullback(&morph))
                .expect("prime divisor pulls back")
                .coeffs
        })
        .collect();
    let n = fan.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Rational::zero();
            for (k, a) in pulled[i].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for l in [(k + m - 1) % m, k, (k + 1) % m] {
                    let b = &pulled[j][l];
                    if !b.is_zero() {
                        acc += a * b * &s[k][l];
                    }
                }
            }
            out[i][j] = acc.clone();
            out[j][i] = acc;
        }
    }
    out
}

/// A b-nef divisor that descends to a smooth model refining the base fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BNefDivisor {
    pub morphism: FanMorphism,
    pub divisor: ToricDivisor,
}

impl BNefDivisor {
    pub fn new(base: &Fan, divisor: ToricDivisor) -> Result<Self> {
        let model = divisor.fan().clone();
        if !model.is_smooth() {
            return Err(Error::InvalidDivisor(format!("model {model} is not smooth")));
        }
        if !divisor.is_nef() {
            return Err(Error::InvalidDivisor(format!("{divisor} is not nef on its model")));
        }
        let morphism = FanMorphism::new(model, base.clone())?;
        Ok(Self { morphism, divisor })
    }

    /// The b-divisor of a nef divisor on the base, realized on its minimal
    /// resolution.
    pub fn descending(d: &ToricDivisor) -> Result<Self> {
        let (_, morph) = d.fan().minimal_resolution();
        let pulled = d.pullback(&morph)?;
        Self::new(d.fan(), pulled)
    }

    pub fn zero(base: &Fan) -> Self {
        let (y, morphism) = base.minimal_resolution();
        Self {
            morphism,
            divisor: ToricDivisor::zero(&y),
        }
    }

    pub fn model(&self) -> &Fan {
        &self.morphism.source
    }

    pub fn base(&self) -> &Fan {
        &self.morphism.target
    }

    /// The trace `M_X` on the base.
    pub fn trace(&self) -> ToricDivisor {
        self.divisor.pushforward_to(self.base())
    }

    /// The b-divisor evaluated on a fan refining the model.
    pub fn on(&self, fan: &Fan) -> Result<ToricDivisor> {
        self.divisor.pullback_to(fan)
    }

    pub fn descends_to_base(&self) -> Result<bool> {
        let back = self.trace().pullback(&self.morphism)?;
        Ok(back == self.divisor)
    }
}

/// Divisor JSON: `{"fan": {"rays": ...}, "coeffs": [["x,y", "p/q"], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivisorJson {
    pub fan: FanJson,
    pub coeffs: Vec<(String, String)>,
}

impl From<&ToricDivisor> for DivisorJson {
    fn from(d: &ToricDivisor) -> Self {
        DivisorJson {
            fan: d.fan().into(),
            coeffs: d
                .terms()
                .filter(|(_, c)| !c.is_zero())
                .map(|(r, c)| (r.key(), c.to_string()))
                .collect(),
        }
    }
}

impl TryFrom<DivisorJson> for ToricDivisor {
    type Error = Error;
    fn try_from(j: DivisorJson) -> Result<Self> {
        let fan = Fan::try_from(j.fan)?;
        let terms = j
            .coeffs
            .iter()
            .map(|(k, c)| Ok((LatticeVector::parse_key(k)?, parse_rational(c)?)))
            .collect::<Result<Vec<_>>>()?;
        ToricDivisor::from_terms(&fan, &terms)
    }
}

impl Serialize for ToricDivisor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DivisorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ToricDivisor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DivisorJson::deserialize(d)?;
        ToricDivisor::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::frac;

    fn lv(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn prime(f: &Fan, x: i64, y: i64) -> ToricDivisor {
        ToricDivisor::prime(f, lv(x, y)).unwrap()
    }

    #[test]
    fn support_functions() {
        let p2 = Fan::projective_plane();
        assert!(ToricDivisor::zero(&p2)
            .pl_function()
            .forms
            .iter()
            .all(|m| m[0].is_zero() && m[1].is_zero()));
        let pl = prime(&p2, 1, 0).pl_function();
        assert_eq!(pl.forms[0], [int(-1), int(0)]);
        let k = canonical_divisor(&p2).pl_function();
        for (i, m) in k.forms.iter().enumerate() {
            let (u, v) = p2.cone(i);
            assert_eq!(pair(m, u), int(1));
            assert_eq!(pair(m, v), int(1));
        }
    }

    #[test]
    fn blow_up_pullback() {
        let p2 = Fan::projective_plane();
        let (_, f) = p2.star_subdivision(lv(1, 1)).unwrap();
        let l = prime(&p2, 1, 0);
        let pb = l.pullback(&f).unwrap();
        let expected =
            ToricDivisor::from_int_terms(&f.source, &[((1, 0), 1), ((1, 1), 1)]).unwrap();
        assert_eq!(pb, expected);
        assert_eq!(pb.pushforward(&f).unwrap(), l);
        let e = ToricDivisor::prime(&f.source, lv(1, 1)).unwrap();
        assert!(e.pushforward(&f).unwrap().is_zero());
        assert!(ToricDivisor::zero(&p2).pullback(&f).unwrap().is_zero());
    }

    #[test]
    fn intersections() {
        let p2 = Fan::projective_plane();
        for &(x, y) in &[(1, 0), (0, 1), (-1, -1)] {
            let h = prime(&p2, x, y);
            assert_eq!(h.intersect(&h).unwrap(), int(1));
        }
        let k = canonical_divisor(&p2);
        assert_eq!(k.intersect(&k).unwrap(), int(9));
        for n in 0..6 {
            let s = Fan::hirzebruch(n);
            let c0 = prime(&s, 0, 1);
            let f = prime(&s, 1, 0);
            assert_eq!(c0.intersect(&c0).unwrap(), int(-n));
            assert_eq!(c0.intersect(&f).unwrap(), int(1));
            assert_eq!(f.intersect(&f).unwrap(), int(0));
        }
        // singular oracle: adjacent rays meet with 1/det
        let c41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        let a = prime(&c41, 1, 1);
        let b = prime(&c41, -2, 1);
        assert_eq!(a.intersect(&b).unwrap(), frac(1, 3));
        assert_eq!(a.intersect(&a).unwrap(), frac(1, 3));
    }

    #[test]
    fn cartier_and_positivity() {
        let p2 = Fan::projective_plane();
        assert!(canonical_divisor(&p2).is_cartier());
        assert!(prime(&p2, 0, 1).is_cartier());
        let z = ToricDivisor::zero(&p2);
        assert!(z.is_nef() && !z.is_ample());
        assert!(canonical_divisor(&p2).scale(&int(-1)).is_ample());
        for n in 1..=4 {
            let s = Fan::hirzebruch(n);
            for a in 0..=5 {
                for b in 0..=5 {
                    let d = prime(&s, 0, 1)
                        .scale(&int(a))
                        .try_add(&prime(&s, 1, 0).scale(&int(b)))
                        .unwrap();
                    assert_eq!(d.is_nef(), b >= n * a, "n={n} a={a} b={b}");
                }
            }
        }
        let f2 = Fan::f_n(2);
        assert!(prime(&f2, -1, 0).is_cartier());
        assert!(!prime(&f2, 0, 1).is_cartier());
        assert!(prime(&f2, 0, 1).scale(&int(2)).is_cartier());
    }

    #[test]
    fn classes_and_equivalence() {
        let p2 = Fan::projective_plane();
        assert!(prime(&p2, 1, 0)
            .linear_equivalent(&prime(&p2, 0, 1), false)
            .unwrap());
        let t = Fan::p1xp1();
        assert!(prime(&t, 1, 0)
            .linear_equivalent(&prime(&t, -1, 0), false)
            .unwrap());
        assert!(!prime(&t, 1, 0)
            .linear_equivalent(&prime(&t, 0, 1), true)
            .unwrap());
        let s2 = Fan::hirzebruch(2);
        let rhs = ToricDivisor::from_int_terms(&s2, &[((0, 1), 2), ((1, 0), 4)]).unwrap();
        assert!(canonical_divisor(&s2)
            .scale(&int(-1))
            .linear_equivalent(&rhs, false)
            .unwrap());
        // Cl = Z + Z/3 on this fan, so the difference is torsion but nonzero
        let c41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        let (a, b) = (prime(&c41, 1, 1), prime(&c41, -2, 1));
        assert!(a.try_sub(&b).unwrap().is_torsion());
        assert!(!a.linear_equivalent(&b, false).unwrap());
        assert!(a.linear_equivalent(&b, true).unwrap());
        assert!(a.scale(&int(3)).linear_equivalent(&b.scale(&int(3)), false).unwrap());
    }

    #[test]
    fn spans() {
        let p2 = Fan::projective_plane();
        let h = prime(&p2, 1, 0);
        assert_eq!(span_rank(&[h.clone(), h.scale(&int(2))]).unwrap(), 1);
        let t = Fan::p1xp1();
        assert_eq!(span_rank(&[prime(&t, 1, 0), prime(&t, 0, 1)]).unwrap(), 2);
        assert!(ToricDivisor::zero(&p2).is_torsion());
        assert!(!h.is_torsion());
    }

    #[test]
    fn json_round_trip() {
        let s2 = Fan::hirzebruch(2);
        let d = ToricDivisor::from_terms(&s2, &[(lv(0, 1), frac(1, 2)), (lv(1, 0), int(-3))])
            .unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: ToricDivisor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<ToricDivisor>(
            r#"{"fan":{"rays":[[1,0],[0,1],[-1,-1]]},"coeffs":[["2,2","1"]]}"#
        )
        .is_err());
    }
}
