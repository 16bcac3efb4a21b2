//! Generalized pairs `(X, B, M)` with torus-invariant boundary and a b-nef
//! moduli part that descends to a smooth toric model.
//!
//! Every log discrepancy is computed from support functions. Writing
//! `L = K_X + B + M_X`, the crepant pullback to any model through a ray `e`
//! gives `a_e = φ_L(e) - φ_M(e)`, where `φ_M` is the support function of
//! `M_Y` on the model where the moduli part descends. This function is
//! linear on every cone of the model fan (which refines the base), so its
//! sign pattern is decided at the model rays.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor::{canonical_divisor, BNefDivisor, DivisorJson, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::{Fan, FanJson};
use crate::lattice::{det2, int, LatticeVector, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedPair {
    boundary: ToricDivisor,
    moduli: BNefDivisor,
}

impl GeneralizedPair {
    pub fn new(boundary: ToricDivisor, moduli: BNefDivisor) -> Result<Self> {
        if moduli.base() != boundary.fan() {
            return Err(Error::InvalidPair(
                "moduli model does not refine the boundary's fan".into(),
            ));
        }
        for (r, c) in boundary.terms() {
            if c.is_negative() || *c > Rational::one() {
                return Err(Error::InvalidPair(format!(
                    "boundary coefficient {c} at {r} outside [0,1]"
                )));
            }
        }
        Ok(Self { boundary, moduli })
    }

    pub fn without_moduli(boundary: ToricDivisor) -> Result<Self> {
        let m = BNefDivisor::zero(boundary.fan());
        Self::new(boundary, m)
    }

    pub fn base(&self) -> &Fan {
        self.boundary.fan()
    }

    pub fn boundary(&self) -> &ToricDivisor {
        &self.boundary
    }

    pub fn moduli(&self) -> &BNefDivisor {
        &self.moduli
    }

    /// The trace `M_X` of the moduli part on the base.
    pub fn trace(&self) -> ToricDivisor {
        self.moduli.trace()
    }

    /// `K_X + B + M_X`.
    pub fn log_canonical_divisor(&self) -> ToricDivisor {
        canonical_divisor(self.base())
            .try_add(&self.boundary)
            .and_then(|d| d.try_add(&self.trace()))
            .expect("all on the base fan")
    }

    /// Generalized log discrepancy of the valuation of a primitive vector.
    pub fn log_discrepancy(&self, e: LatticeVector) -> Rational {
        let l = self.log_canonical_divisor().pl_function();
        let m = self.moduli.divisor.pl_function();
        l.eval(e) - m.eval(e)
    }

    /// Same value computed on an explicit model refining both the base and
    /// the moduli model: `1 - coeff_e(B_W)` with
    /// `B_W = π^*(K_X + B + M_X) - K_W - M_W`.
    pub fn log_discrepancy_on(&self, model: &Fan, e: LatticeVector) -> Result<Rational> {
        if !model.contains(&e) {
            return Err(Error::UnknownRay(e));
        }
        let bw = self
            .log_canonical_divisor()
            .pullback_to(model)?
            .try_sub(&canonical_divisor(model))?
            .try_sub(&self.moduli.on(model)?)?;
        Ok(Rational::one() - bw.coeff(&e))
    }

    /// The fan on which glc-type conditions are decided: the moduli model,
    /// which is smooth and refines the base.
    pub fn computation_fan(&self) -> &Fan {
        self.moduli.model()
    }

    pub fn discrepancies(&self) -> Vec<(LatticeVector, Rational)> {
        let l = self.log_canonical_divisor().pl_function();
        let m = self.moduli.divisor.pl_function();
        self.computation_fan()
            .rays()
            .iter()
            .map(|&e| (e, l.eval(e) - m.eval(e)))
            .collect()
    }

    pub fn is_glc(&self) -> bool {
        self.discrepancies().iter().all(|(_, a)| !a.is_negative())
    }

    pub fn is_gklt(&self) -> bool {
        self.discrepancies().iter().all(|(_, a)| a.is_positive())
    }

    pub fn is_glcy(&self) -> bool {
        self.is_glc() && self.log_canonical_divisor().is_torsion()
    }

    /// Log canonical places and crepant exceptional rays on a model
    /// refining the moduli model.
    pub fn crepant_rays(&self, model: &Fan) -> Result<CrepantAnalysis> {
        for r in self.computation_fan().rays() {
            if !model.contains(r) {
                return Err(Error::NotRefinement(format!(
                    "{model} misses moduli model ray {r}"
                )));
            }
        }
        let a: Vec<Rational> = model
            .rays()
            .iter()
            .map(|&e| self.log_discrepancy(e))
            .collect();
        let lc_places = model
            .rays()
            .iter()
            .zip(&a)
            .filter(|(_, x)| x.is_zero())
            .map(|(r, _)| *r)
            .collect();
        let crepant_exceptional = model
            .rays()
            .iter()
            .zip(&a)
            .filter(|(r, x)| x.is_one() && !self.base().contains(r))
            .map(|(r, _)| *r)
            .collect();
        let n = model.len();
        let vanishing_cones = (0..n)
            .filter(|&i| a[i].is_zero() && a[(i + 1) % n].is_zero())
            .map(|i| model.cone(i))
            .collect();
        Ok(CrepantAnalysis {
            lc_places,
            crepant_exceptional,
            vanishing_cones,
        })
    }

    /// Adjunction to the invariant curve `D_ρ`, which must have boundary
    /// coefficient one. The curve is `P^1` with the two torus fixed points
    /// as its only special points.
    pub fn adjunction_to_invariant_curve(
        &self,
        rho: LatticeVector,
        orbifold: &OrbifoldStructure,
    ) -> Result<AdjunctionData> {
        let base = self.base();
        let i = base.index_of(&rho).ok_or(Error::UnknownRay(rho))?;
        if !self.boundary.coeff(&rho).is_one() {
            return Err(Error::Precondition(format!(
                "{rho} has boundary coefficient {}, not 1",
                self.boundary.coeff(&rho)
            )));
        }
        let y = self.computation_fan();
        let j = y.index_of(&rho).expect("model refines base");
        let sides = [
            (base.prev(i), y.prev(j), det2(base.prev(i), rho)),
            (base.next(i), y.next(j), det2(rho, base.next(i))),
        ];
        let points = sides.map(|(nb, w, index)| {
            let n_p = orbifold.value(&nb);
            // a fixed point lies on exactly two invariant curves, the curve
            // itself and `nb`, so it never carries two orbifold divisors
            let marked = orbifold.value(&rho) > 1 && n_p > 1;
            assert!(!marked, "two orbifold divisors through a fixed point");
            AdjunctionPoint {
                neighbor: nb,
                model_neighbor: w,
                local_index: index,
                orbifold_index: index * n_p as i64,
                boundary_coeff: Rational::one() - self.log_discrepancy(w),
            }
        });
        let s_y = ToricDivisor::prime(y, rho)?;
        let moduli_degree = self.moduli.divisor.intersect(&s_y)?;
        let lhs = self
            .log_canonical_divisor()
            .intersect(&ToricDivisor::prime(base, rho)?)?;
        Ok(AdjunctionData {
            curve: rho,
            points,
            moduli_degree,
            log_canonical_degree: lhs,
            marked: Vec::new(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrepantAnalysis {
    /// Rays with log discrepancy zero.
    pub lc_places: Vec<LatticeVector>,
    /// Rays not on the base with log discrepancy one.
    pub crepant_exceptional: Vec<LatticeVector>,
    /// Cones on which the discrepancy function vanishes identically.
    pub vanishing_cones: Vec<(LatticeVector, LatticeVector)>,
}

/// Orbifold indices `n_P` on invariant prime divisors; unlisted rays have
/// index one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrbifoldStructure(BTreeMap<LatticeVector, u32>);

impl OrbifoldStructure {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn new(entries: impl IntoIterator<Item = (LatticeVector, u32)>) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (r, n) in entries {
            if n == 0 {
                return Err(Error::InvalidDecomposition(format!("orbifold index 0 at {r}")));
            }
            if n > 1 {
                m.insert(r, n);
            }
        }
        Ok(Self(m))
    }

    pub fn value(&self, r: &LatticeVector) -> u32 {
        self.0.get(r).copied().unwrap_or(1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&LatticeVector, &u32)> {
        self.0.iter()
    }

    /// `Σ (1 - 1/n_P) P`.
    pub fn divisor(&self, fan: &Fan) -> Result<ToricDivisor> {
        let terms: Vec<_> = self
            .0
            .iter()
            .map(|(r, &n)| (*r, Rational::one() - Rational::new(1.into(), n.into())))
            .collect();
        ToricDivisor::from_terms(fan, &terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionPoint {
    /// The other invariant curve through the fixed point.
    pub neighbor: LatticeVector,
    /// Neighbour of the curve on the smooth model.
    pub model_neighbor: LatticeVector,
    /// `i_Q`: determinant of the base cone at the point.
    pub local_index: i64,
    /// `m_Q = n_P · i_Q`.
    pub orbifold_index: i64,
    #[serde(serialize_with = "crate::json::rational")]
    pub boundary_coeff: Rational,
}

/// The adjoint generalized pair on `D_ρ ≅ P^1` together with the local
/// data at its two fixed points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionData {
    pub curve: LatticeVector,
    pub points: [AdjunctionPoint; 2],
    /// `deg M_S = M_Y · S_Y`.
    #[serde(serialize_with = "crate::json::rational")]
    pub moduli_degree: Rational,
    /// `(K_X + B + M_X) · D_ρ`.
    #[serde(serialize_with = "crate::json::rational")]
    pub log_canonical_degree: Rational,
    /// Points through which two orbifold divisors pass; always empty for
    /// invariant curves.
    pub marked: Vec<LatticeVector>,
}

impl AdjunctionData {
    /// `deg(K_S + B_S + M_S)`.
    pub fn adjoint_degree(&self) -> Rational {
        int(-2) + &self.points[0].boundary_coeff + &self.points[1].boundary_coeff
            + &self.moduli_degree
    }

    pub fn degree_identity_holds(&self) -> bool {
        self.adjoint_degree() == self.log_canonical_degree
    }
}

/// Pair JSON: `{"fan": ..., "boundary": [["x,y","p/q"],...],
/// "moduli": {"model": ..., "coeffs": [...]}}`. A missing `moduli` means
/// the zero b-divisor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairJson {
    pub fan: FanJson,
    #[serde(default)]
    pub boundary: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<ModuliJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuliJson {
    pub model: FanJson,
    #[serde(default)]
    pub coeffs: Vec<(String, String)>,
}

impl From<&GeneralizedPair> for PairJson {
    fn from(p: &GeneralizedPair) -> Self {
        let b = DivisorJson::from(p.boundary());
        let m = DivisorJson::from(&p.moduli().divisor);
        PairJson {
            fan: b.fan,
            boundary: b.coeffs,
            moduli: Some(ModuliJson {
                model: m.fan,
                coeffs: m.coeffs,
            }),
        }
    }
}

impl TryFrom<PairJson> for GeneralizedPair {
    type Error = Error;
    fn try_from(j: PairJson) -> Result<Self> {
        let boundary = ToricDivisor::try_from(DivisorJson {
            fan: j.fan,
            coeffs: j.boundary,
        })?;
        match j.moduli {
            None => GeneralizedPair::without_moduli(boundary),
            Some(m) => {
                let d = ToricDivisor::try_from(DivisorJson {
                    fan: m.model,
                    coeffs: m.coeffs,
                })?;
                let moduli = BNefDivisor::new(boundary.fan(), d)?;
                GeneralizedPair::new(boundary, moduli)
            }
        }
    }
}

impl Serialize for GeneralizedPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneralizedPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PairJson::deserialize(d)?;
        GeneralizedPair::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// The smallest fan whose ray set contains those of all inputs.
pub fn common_refinement(fans: &[&Fan]) -> Result<Fan> {
    let mut rays: Vec<LatticeVector> = fans.iter().flat_map(|f| f.rays().iter().copied()).collect();
    rays.sort();
    rays.dedup();
    Fan::new(rays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::toric_boundary;
    use crate::lattice::frac;

    fn lv(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn not_descend_pair() -> GeneralizedPair {
        let p2 = Fan::projective_plane();
        let (bl, _) = p2.star_subdivision(lv(1, 1)).unwrap();
        let m = ToricDivisor::from_int_terms(&bl, &[((-1, -1), 2), ((1, 0), 1)]).unwrap();
        GeneralizedPair::new(
            ToricDivisor::zero(&p2),
            BNefDivisor::new(&p2, m).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn toric_boundary_is_lc_everywhere() {
        let p2 = Fan::projective_plane();
        let p = GeneralizedPair::without_moduli(toric_boundary(&p2)).unwrap();
        assert!(p.log_discrepancy(lv(1, 1)).is_zero());
        assert!(p.log_discrepancy(lv(3, -7)).is_zero());
        assert!(p.is_glc() && !p.is_gklt() && p.is_glcy());
        let c = p.crepant_rays(&p2).unwrap();
        assert_eq!(c.lc_places.len(), 3);
        assert_eq!(c.vanishing_cones.len(), 3);
    }

    #[test]
    fn empty_pair_on_p2() {
        let p2 = Fan::projective_plane();
        let p = GeneralizedPair::without_moduli(ToricDivisor::zero(&p2)).unwrap();
        assert_eq!(p.log_discrepancy(lv(1, 1)), int(2));
        let (bl, _) = p2.star_subdivision(lv(1, 1)).unwrap();
        assert_eq!(p.log_discrepancy_on(&bl, lv(1, 1)).unwrap(), int(2));
        assert!(p.is_gklt() && !p.is_glcy());
        assert!(p.crepant_rays(&p2).unwrap().lc_places.is_empty());
    }

    #[test]
    fn moduli_without_boundary() {
        let p = not_descend_pair();
        assert!(p.is_glcy() && p.is_gklt());
        assert_eq!(p.log_discrepancy(lv(1, 1)), int(1));
        assert!(!p.moduli().descends_to_base().unwrap());
        let p2 = Fan::projective_plane();
        let twice =
            ToricDivisor::from_int_terms(&p2, &[((1, 0), 2)]).unwrap();
        let q = GeneralizedPair::new(
            ToricDivisor::zero(&p2),
            BNefDivisor::descending(&twice).unwrap(),
        )
        .unwrap();
        assert!(!q.is_glcy());
    }

    #[test]
    fn rejects_bad_boundaries() {
        let p2 = Fan::projective_plane();
        let b = ToricDivisor::from_terms(&p2, &[(lv(1, 0), frac(3, 2))]).unwrap();
        assert!(GeneralizedPair::without_moduli(b).is_err());
    }

    #[test]
    fn adjunction_on_smooth_and_singular_curves() {
        let p2 = Fan::projective_plane();
        let p = GeneralizedPair::without_moduli(toric_boundary(&p2)).unwrap();
        let a = p
            .adjunction_to_invariant_curve(lv(1, 0), &OrbifoldStructure::trivial())
            .unwrap();
        assert_eq!(a.points[0].boundary_coeff, int(1));
        assert_eq!(a.points[1].boundary_coeff, int(1));
        assert!(a.degree_identity_holds());
        assert!(a.marked.is_empty());

        let s2 = Fan::hirzebruch(2);
        let c0 = ToricDivisor::prime(&s2, lv(0, 1)).unwrap();
        let p = GeneralizedPair::without_moduli(c0).unwrap();
        let a = p
            .adjunction_to_invariant_curve(lv(0, 1), &OrbifoldStructure::trivial())
            .unwrap();
        assert_eq!(a.log_canonical_degree, int(-2));
        assert!(a.degree_identity_holds());

        // the index-2 point of F_2 lies on D_(0,1) and D_(2,-1)
        let f2 = Fan::f_n(2);
        let d = ToricDivisor::prime(&f2, lv(0, 1)).unwrap();
        let p = GeneralizedPair::without_moduli(d).unwrap();
        let a = p
            .adjunction_to_invariant_curve(lv(0, 1), &OrbifoldStructure::trivial())
            .unwrap();
        let sing = a.points.iter().find(|q| q.local_index == 2).unwrap();
        assert_eq!(sing.boundary_coeff, frac(1, 2));
        assert!(a.degree_identity_holds());
        assert!(p
            .adjunction_to_invariant_curve(lv(-1, 0), &OrbifoldStructure::trivial())
            .is_err());
    }

    #[test]
    fn pair_json_round_trip() {
        let p = not_descend_pair();
        let s = serde_json::to_string(&p).unwrap();
        let back: GeneralizedPair = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
