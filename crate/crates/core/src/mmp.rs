//! The `K`-MMP on toric surfaces and the two constructive Picard-rank
//! lemmas used in the rank-one and rank-two cases.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::divisor::{canonical_divisor, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::{Fan, FanMorphism, MfsStructure};
use crate::genpair::GeneralizedPair;
use crate::lattice::{interior_primitive_vectors, LatticeVector, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MmpStep {
    pub contracted_ray: LatticeVector,
    #[serde(serialize_with = "crate::json::rational")]
    pub k_intersection: Rational,
    pub result: Fan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MmpTerminal {
    PicardRankOne,
    MoriFiberSpace { structures: Vec<MfsStructure> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MmpTrace {
    pub start: Fan,
    pub steps: Vec<MmpStep>,
    pub terminal: MmpTerminal,
}

impl MmpTrace {
    pub fn end(&self) -> &Fan {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    /// Each step contracts a `K`-negative curve of the previous fan and
    /// removes exactly that ray; the terminal state is what it claims.
    pub fn is_valid(&self) -> bool {
        let mut cur = &self.start;
        for s in &self.steps {
            let ok = s.k_intersection.is_negative()
                && k_negative_rays(cur).contains(&(s.contracted_ray, s.k_intersection.clone()))
                && cur.remove_ray(s.contracted_ray).as_ref() == Ok(&s.result);
            if !ok {
                return false;
            }
            cur = &s.result;
        }
        if !k_negative_rays(cur).is_empty() {
            return false;
        }
        match &self.terminal {
            MmpTerminal::PicardRankOne => cur.picard_rank() == 1,
            MmpTerminal::MoriFiberSpace { structures } => {
                !structures.is_empty() && *structures == cur.mfs_structures()
            }
        }
    }
}

/// Contractible rays `ρ` with `K · D_ρ < 0`, with that intersection.
pub fn k_negative_rays(x: &Fan) -> Vec<(LatticeVector, Rational)> {
    if x.len() <= 3 {
        return Vec::new();
    }
    let k = canonical_divisor(x);
    x.rays()
        .iter()
        .enumerate()
        .filter(|(_, &r)| x.remove_ray(r).is_ok())
        .map(|(i, &r)| (r, k.dot_ray(i)))
        .filter(|(_, v)| v.is_negative())
        .collect()
}

/// Contracts the lexicographically smallest `K`-negative ray until none is
/// left.
pub fn run_k_mmp(x: &Fan) -> MmpTrace {
    let mut cur = x.clone();
    let mut steps = Vec::new();
    loop {
        let Some((r, v)) = k_negative_rays(&cur).into_iter().min_by_key(|(r, _)| *r) else {
            break;
        };
        let next = cur.remove_ray(r).expect("contractible by construction");
        steps.push(MmpStep {
            contracted_ray: r,
            k_intersection: v,
            result: next.clone(),
        });
        cur = next;
    }
    let terminal = if cur.picard_rank() == 1 {
        MmpTerminal::PicardRankOne
    } else {
        let structures = cur.mfs_structures();
        // K is never nef on a complete toric surface, so without a
        // divisorial step a fibre-type extremal ray must exist
        assert!(!structures.is_empty(), "MMP stopped without an MFS on {cur}");
        MmpTerminal::MoriFiberSpace { structures }
    };
    MmpTrace {
        start: x.clone(),
        steps,
        terminal,
    }
}

/// Log discrepancy of `e` with respect to `(X, 0, 0)`.
pub fn log_discrepancy(x: &Fan, e: LatticeVector) -> Rational {
    GeneralizedPair::without_moduli(ToricDivisor::zero(x))
        .expect("zero boundary")
        .log_discrepancy(e)
}

/// Every exceptional ray of the minimal resolution has log discrepancy at
/// least one.
pub fn is_canonical(x: &Fan) -> bool {
    let (_, f) = x.minimal_resolution();
    f.exceptional_rays
        .iter()
        .all(|&e| log_discrepancy(x, e) >= Rational::one())
}

/// Primitive rays in the relative interior of the cone `(u, v)` whose log
/// discrepancy over `X` lies in `(0, 1)` (or `(0, 1]` when `closed`),
/// ordered by discrepancy and then lexicographically. Such rays lie in the
/// triangle `0, u, v`, so the box `|x| <= |u_x| + |v_x|`, `|y| <= |u_y| +
/// |v_y|` is exhaustive; it is returned with the list.
pub fn low_discrepancy_rays(
    x: &Fan,
    u: LatticeVector,
    v: LatticeVector,
    closed: bool,
) -> (Vec<(LatticeVector, Rational)>, [i64; 2]) {
    let bound = [u.x.abs() + v.x.abs(), u.y.abs() + v.y.abs()];
    let mut out: Vec<(LatticeVector, Rational)> = interior_primitive_vectors(u, v)
        .into_iter()
        .map(|e| (e, log_discrepancy(x, e)))
        .filter(|(_, a)| a.is_positive() && (*a < Rational::one() || (closed && a.is_one())))
        .collect();
    out.sort_by(|p, q| p.1.cmp(&q.1).then(p.0.cmp(&q.0)));
    (out, bound)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyBound {
    /// `a < 1` was attained.
    Strict,
    /// Only `a = 1` was available.
    One,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rho2Model {
    pub y: Fan,
    pub z: Fan,
    pub to_x: FanMorphism,
    pub to_z: FanMorphism,
    /// The extracted ray and its log discrepancy over `X`, if any.
    pub extracted: Option<(LatticeVector, Rational)>,
    pub bound_attained: Option<DiscrepancyBound>,
    pub search_box: Option<[i64; 2]>,
}

/// For `ρ(X) = 2`: a model `Y -> X` extracting at most one divisor with
/// log discrepancy in `(0, 1]` and a contraction `Y -> Z` with `ρ(Z) = 1`.
/// Absent exactly for `P^1 × P^1`.
pub fn rho2_intermediate_model(x: &Fan) -> Result<Option<Rho2Model>> {
    if x.picard_rank() != 2 {
        return Err(Error::Precondition(format!(
            "Picard rank {} is not 2",
            x.picard_rank()
        )));
    }
    if x.lattice_equivalent(&Fan::p1xp1()).is_some() {
        return Ok(None);
    }
    let removable = x.rays().iter().copied().filter(|r| x.remove_ray(*r).is_ok()).min();
    if let Some(r) = removable {
        let z = x.remove_ray(r)?;
        assert_eq!(z.picard_rank(), 1);
        return Ok(Some(Rho2Model {
            y: x.clone(),
            to_x: FanMorphism::identity(x),
            to_z: FanMorphism::new(x.clone(), z.clone())?,
            z,
            extracted: None,
            bound_attained: None,
            search_box: None,
        }));
    }
    // no divisorial contraction: the rays are ±v_1, ±v_2
    let v = x.rays();
    assert!(v.iter().all(|r| x.contains(&-*r)), "non-contractible fan {x} is not ±v1, ±v2");
    assert!(!x.is_smooth(), "smooth case is P^1 x P^1");
    for i in 0..x.len() {
        let (v1, v2) = x.cone(i);
        if x.cone_det(i) == 1 {
            continue;
        }
        let (cands, bound) = low_discrepancy_rays(x, v1, v2, true);
        let Some((v3, a)) = cands.first().cloned() else {
            continue;
        };
        assert!(a.is_positive() && a <= Rational::one());
        let (y, to_x) = x.star_subdivision(v3)?;
        let z = y.remove_ray(v1)?.remove_ray(v2)?;
        assert_eq!(z.picard_rank(), 1);
        assert!(z.contains(&v3) && z.contains(&-v1) && z.contains(&-v2));
        let attained = if a.is_one() {
            DiscrepancyBound::One
        } else {
            DiscrepancyBound::Strict
        };
        return Ok(Some(Rho2Model {
            to_z: FanMorphism::new(y.clone(), z.clone())?,
            y,
            z,
            to_x,
            extracted: Some((v3, a)),
            bound_attained: Some(attained),
            search_box: Some(bound),
        }));
    }
    unreachable!("a singular cone of {x} has a resolution ray with a <= 1")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rho1Model {
    pub y: Fan,
    pub z: Fan,
    pub to_x: FanMorphism,
    pub to_z: FanMorphism,
    /// The divisor kept by `Y -> Z` and its log discrepancy over `X`.
    pub e: LatticeVector,
    pub a_e: Rational,
    /// Whether the second insertion (the case `v_4 = -v_1`) was used.
    pub second_insertion: bool,
    pub search_box: [i64; 2],
}

/// For `ρ(X) = 1`, `X` not canonical and not some `F_n`: a model `Y -> X`
/// extracting `E` with `a_E(X) ∈ (0, 1)` and a contraction `Y -> Z` with
/// `ρ(Z) = 1` keeping `E`.
pub fn rho1_noncanonical_model(x: &Fan) -> Result<Rho1Model> {
    if x.picard_rank() != 1 {
        return Err(Error::Precondition(format!(
            "Picard rank {} is not 1",
            x.picard_rank()
        )));
    }
    if is_canonical(x) {
        return Err(Error::Precondition(format!("{x} is canonical")));
    }
    if let Some(n) = x.is_fn() {
        return Err(Error::Precondition(format!("{x} is F_{n}")));
    }
    // v_4: the first ray with a in (0,1) over all cones, ⟨v_2, v_3⟩ its cone
    let mut best: Option<(Rational, LatticeVector, usize, [i64; 2])> = None;
    for i in 0..3 {
        let (u, w) = x.cone(i);
        let (cands, bound) = low_discrepancy_rays(x, u, w, false);
        if let Some((e, a)) = cands.into_iter().next() {
            let better = match &best {
                None => true,
                Some((ba, be, _, _)) => (&a, e) < (ba, *be),
            };
            if better {
                best = Some((a, e, i, bound));
            }
        }
    }
    let (a4, v4, i, bound) = best.expect("a non-canonical singularity has a ray with a < 1");
    let (v2, v3) = x.cone(i);
    let v1 = x.rays()[(i + 2) % 3];
    let (y0, _) = x.star_subdivision(v4)?;
    if v4 != -v1 {
        let r = [v2, v3]
            .into_iter()
            .find(|r| y0.remove_ray(*r).is_ok())
            .expect("v4 is not opposite v1, so v2 or v3 is contractible");
        let z = y0.remove_ray(r)?;
        return finish(x, y0, z, v4, a4, false, bound);
    }
    // v_4 = -v_1: one of ⟨v_2, v_4⟩, ⟨v_3, v_4⟩ is singular since X is not F_n
    for (side, other) in [(v2, v3), (v3, v2)] {
        let j = y0
            .rays()
            .iter()
            .position(|r| *r == side)
            .expect("v2, v3 are rays of Y_0");
        let (p, q) = if y0.next(j) == v4 { (side, v4) } else { (v4, side) };
        if crate::lattice::det2(p, q).abs() == 1 {
            continue;
        }
        let (cands, bound5) = low_discrepancy_rays(x, p, q, false);
        let (v5, a5) = cands
            .into_iter()
            .next()
            .expect("a singular cone below the segment has a lattice point with a < 1");
        let (y, _) = y0.star_subdivision(v5)?;
        let z = y.remove_ray(side)?.remove_ray(v4)?;
        debug_assert!(z.contains(&other));
        let b = [bound[0].max(bound5[0]), bound[1].max(bound5[1])];
        return finish(x, y, z, v5, a5, true, b);
    }
    unreachable!("both cones smooth means {x} is some F_n")
}

fn finish(
    x: &Fan,
    y: Fan,
    z: Fan,
    e: LatticeVector,
    a_e: Rational,
    second_insertion: bool,
    search_box: [i64; 2],
) -> Result<Rho1Model> {
    assert!(a_e.is_positive() && a_e < Rational::one());
    assert_eq!(z.picard_rank(), 1);
    assert!(z.contains(&e), "E is contracted");
    Ok(Rho1Model {
        to_x: FanMorphism::new(y.clone(), x.clone())?,
        to_z: FanMorphism::new(y.clone(), z.clone())?,
        y,
        z,
        e,
        a_e,
        second_insertion,
        search_box,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::int;

    fn lv(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn bl_p2() -> Fan {
        Fan::from_pairs(&[(1, 0), (1, 1), (0, 1), (-1, -1)]).unwrap()
    }

    #[test]
    fn k_negative() {
        assert!(k_negative_rays(&bl_p2()).contains(&(lv(1, 1), int(-1))));
        assert!(k_negative_rays(&Fan::p1xp1()).is_empty());
        let s2 = Fan::hirzebruch(2);
        assert!(k_negative_rays(&s2).iter().all(|(r, _)| *r != lv(0, 1)));
        assert_eq!(canonical_divisor(&s2).intersect(&ToricDivisor::prime(&s2, lv(0, 1)).unwrap()).unwrap(), int(0));
    }

    #[test]
    fn mmp_runs() {
        let t = run_k_mmp(&bl_p2());
        assert_eq!(t.steps.len(), 1);
        assert!(t.end().is_projective_plane());
        assert_eq!(t.terminal, MmpTerminal::PicardRankOne);
        assert!(t.is_valid());

        let t = run_k_mmp(&Fan::p1xp1());
        assert!(t.steps.is_empty());
        assert!(matches!(t.terminal, MmpTerminal::MoriFiberSpace { .. }));
        assert!(t.is_valid());

        let y41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap().minimal_resolution().0;
        let t = run_k_mmp(&y41);
        assert!(t.is_valid());
        assert!(t.steps.len() <= y41.len() - 3);
    }

    #[test]
    fn canonical() {
        assert!(is_canonical(&Fan::projective_plane()));
        assert!(is_canonical(&Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap()));
        assert!(!is_canonical(&Fan::f_n(3)));
        assert!(is_canonical(&Fan::f_n(2)));
    }

    #[test]
    fn rho2() {
        assert_eq!(rho2_intermediate_model(&Fan::p1xp1()).unwrap(), None);
        let m = rho2_intermediate_model(&bl_p2()).unwrap().unwrap();
        assert_eq!(m.y, bl_p2());
        assert!(m.z.is_projective_plane());

        let x = Fan::from_pairs(&[(1, 0), (1, 2), (-1, 0), (-1, -2)]).unwrap();
        let m = rho2_intermediate_model(&x).unwrap().unwrap();
        let (_, a) = m.extracted.unwrap();
        assert!(a.is_positive() && a <= int(1));
        assert_eq!(m.z.picard_rank(), 1);
        assert!(rho2_intermediate_model(&Fan::projective_plane()).is_err());
    }

    #[test]
    fn rho1() {
        let x = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        assert!(rho1_noncanonical_model(&x).is_err());
        assert!(rho1_noncanonical_model(&Fan::projective_plane()).is_err());
        assert!(rho1_noncanonical_model(&Fan::f_n(3)).is_err());

        let x = Fan::from_pairs(&[(-1, 0), (2, 5), (1, -3)]).unwrap();
        if x.is_fn().is_none() && !is_canonical(&x) {
            let m = rho1_noncanonical_model(&x).unwrap();
            assert!(m.z.contains(&m.e));
            assert!(m.a_e.is_positive() && m.a_e < int(1));
        }
    }
}
