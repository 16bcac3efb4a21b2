//! Complete fans in the plane and the toric birational maps between them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    cone_smoothing_rays, det2, primitive, primitive_vectors, LatticeVector, Matrix2, Rational,
};

/// A complete fan, stored as its primitive rays in counterclockwise order
/// starting from the positive x-axis. Two-dimensional cones are spanned by
/// cyclically consecutive rays.
#[derive(Clone)]
pub struct Fan {
    rays: Vec<LatticeVector>,
    pub(crate) intersections: OnceLock<Arc<Vec<Vec<Rational>>>>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.rays == other.rays
    }
}

impl Eq for Fan {}

impl Hash for Fan {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rays.hash(state);
    }
}

impl PartialOrd for Fan {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fan {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rays.cmp(&other.rays)
    }
}

impl fmt::Debug for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fan{self}")
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.rays.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}}")
    }
}

/// JSON form of a fan: `{"rays": [[x,y], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FanJson {
    pub rays: Vec<[i64; 2]>,
}

impl From<&Fan> for FanJson {
    fn from(f: &Fan) -> Self {
        FanJson {
            rays: f.rays.iter().map(|&v| v.into()).collect(),
        }
    }
}

impl TryFrom<FanJson> for Fan {
    type Error = Error;
    fn try_from(j: FanJson) -> Result<Fan> {
        Fan::new(j.rays.into_iter().map(LatticeVector::from))
    }
}

impl Serialize for Fan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FanJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Fan, D::Error> {
        let j = FanJson::deserialize(d)?;
        Fan::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// A toric birational morphism `source -> target` given by a refinement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanMorphism {
    pub source: Fan,
    pub target: Fan,
    /// Rays of `source` that are not rays of `target`, in source order.
    pub exceptional_rays: Vec<LatticeVector>,
}

impl FanMorphism {
    /// In dimension two a complete fan refines another complete fan exactly
    /// when its ray set contains the other's.
    pub fn new(source: Fan, target: Fan) -> Result<Self> {
        for r in target.rays() {
            if !source.contains(r) {
                return Err(Error::NotRefinement(format!(
                    "target ray {r} missing from {source}"
                )));
            }
        }
        let exceptional_rays = source
            .rays()
            .iter()
            .copied()
            .filter(|r| !target.contains(r))
            .collect();
        Ok(Self {
            source,
            target,
            exceptional_rays,
        })
    }

    pub fn identity(fan: &Fan) -> Self {
        Self {
            source: fan.clone(),
            target: fan.clone(),
            exceptional_rays: Vec::new(),
        }
    }

    /// Factors the morphism into single-ray divisorial contractions,
    /// starting from the source. Each intermediate fan is valid.
    pub fn contraction_sequence(&self) -> Result<Vec<Fan>> {
        let mut cur = self.source.clone();
        let mut out = vec![cur.clone()];
        let mut pending: Vec<LatticeVector> = self.exceptional_rays.clone();
        while !pending.is_empty() {
            let pos = pending
                .iter()
                .position(|r| cur.remove_ray(*r).is_ok())
                .ok_or_else(|| {
                    Error::NotRefinement(format!("no contractible ray left in {cur}"))
                })?;
            let r = pending.remove(pos);
            cur = cur.remove_ray(r)?;
            out.push(cur.clone());
        }
        debug_assert_eq!(cur, self.target);
        Ok(out)
    }
}

/// A Mori fibre space structure `X -> P^1`, given by a pair of opposite
/// rays. The base map is the projection `N -> N / Z·v`, recorded as the
/// primitive linear form vanishing on `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MfsStructure {
    pub fiber_ray_pair: (LatticeVector, LatticeVector),
    pub base_projection: [i64; 2],
}

impl Fan {
    /// Builds a fan from arbitrary nonzero vectors: each is primitivized and
    /// the result is sorted counterclockwise.
    pub fn new(rays: impl IntoIterator<Item = LatticeVector>) -> Result<Fan> {
        let mut prim = rays
            .into_iter()
            .map(primitive)
            .collect::<Result<Vec<_>>>()?;
        prim.sort_by(|a, b| a.angle_cmp(b));
        for w in prim.windows(2) {
            if w[0] == w[1] || det2(w[0], w[1]) == 0 && w[0].angle_cmp(&w[1]).is_eq() {
                return Err(Error::ParallelRays(w[0], w[1]));
            }
        }
        if prim.len() < 3 {
            return Err(Error::TooFewRays(prim.len()));
        }
        Self::from_sorted(prim)
    }

    fn from_sorted(rays: Vec<LatticeVector>) -> Result<Fan> {
        let n = rays.len();
        if n < 3 {
            return Err(Error::TooFewRays(n));
        }
        for i in 0..n {
            let (u, v) = (rays[i], rays[(i + 1) % n]);
            if det2(u, v) <= 0 {
                return Err(Error::NotComplete(u, v));
            }
        }
        Ok(Fan {
            rays,
            intersections: OnceLock::new(),
        })
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Fan> {
        Fan::new(pairs.iter().map(|&(x, y)| LatticeVector::new(x, y)))
    }

    pub fn projective_plane() -> Fan {
        Fan::from_pairs(&[(1, 0), (0, 1), (-1, -1)]).expect("P2 fan")
    }

    pub fn p1xp1() -> Fan {
        Fan::from_pairs(&[(1, 0), (0, 1), (-1, 0), (0, -1)]).expect("P1xP1 fan")
    }

    /// The Hirzebruch surface `Σ_n` with rays `(1,0), (0,1), (-1,n), (0,-1)`.
    /// The ray `(0,1)` is the negative section `C_0` with `C_0^2 = -n`,
    /// `(0,-1)` the positive section, and `(1,0)`, `(-1,n)` the invariant
    /// fibres.
    pub fn hirzebruch(n: i64) -> Fan {
        Fan::from_pairs(&[(1, 0), (0, 1), (-1, n), (0, -1)]).expect("Hirzebruch fan")
    }

    /// The cone over the rational normal curve of degree `n`: the
    /// contraction of the negative section of `Σ_n`.
    pub fn f_n(n: i64) -> Fan {
        Fan::from_pairs(&[(-1, 0), (0, 1), (n, -1)]).expect("F_n fan")
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn index_of(&self, r: &LatticeVector) -> Option<usize> {
        self.rays.iter().position(|v| v == r)
    }

    pub fn contains(&self, r: &LatticeVector) -> bool {
        self.index_of(r).is_some()
    }

    pub fn ray(&self, i: usize) -> LatticeVector {
        self.rays[i % self.rays.len()]
    }

    pub fn prev(&self, i: usize) -> LatticeVector {
        self.rays[(i + self.rays.len() - 1) % self.rays.len()]
    }

    pub fn next(&self, i: usize) -> LatticeVector {
        self.rays[(i + 1) % self.rays.len()]
    }

    /// The `i`-th two-dimensional cone, spanned by rays `i` and `i + 1`.
    pub fn cone(&self, i: usize) -> (LatticeVector, LatticeVector) {
        (self.ray(i), self.next(i))
    }

    pub fn cone_det(&self, i: usize) -> i64 {
        let (u, v) = self.cone(i);
        det2(u, v)
    }

    pub fn is_smooth(&self) -> bool {
        (0..self.len()).all(|i| self.cone_det(i) == 1)
    }

    pub fn picard_rank(&self) -> usize {
        self.rays.len() - 2
    }

    /// Index of a two-dimensional cone containing `e` (rays on a cone
    /// boundary report the cone that starts at them).
    pub fn containing_cone(&self, e: LatticeVector) -> usize {
        let n = self.len();
        (0..n)
            .find(|&i| {
                let (u, v) = self.cone(i);
                det2(u, e) >= 0 && det2(e, v) > 0 || e == u
            })
            .expect("complete fan covers the plane")
    }

    pub fn minimal_resolution(&self) -> (Fan, FanMorphism) {
        let mut rays = Vec::new();
        for i in 0..self.len() {
            let (u, v) = self.cone(i);
            rays.push(u);
            rays.extend(cone_smoothing_rays(u, v).expect("fan cones are strictly convex"));
        }
        let res = Fan::new(rays).expect("resolution of a valid fan");
        let morph = FanMorphism::new(res.clone(), self.clone()).expect("resolution refines");
        (res, morph)
    }

    pub fn star_subdivision(&self, r: LatticeVector) -> Result<(Fan, FanMorphism)> {
        let r = primitive(r)?;
        if self.contains(&r) {
            return Err(Error::DuplicateRay(r));
        }
        let fan = Fan::new(self.rays.iter().copied().chain(std::iter::once(r)))?;
        let morph = FanMorphism::new(fan.clone(), self.clone())?;
        Ok((fan, morph))
    }

    /// Divisorial contraction of the invariant curve of `r`.
    pub fn remove_ray(&self, r: LatticeVector) -> Result<Fan> {
        let i = self.index_of(&r).ok_or(Error::UnknownRay(r))?;
        if self.len() <= 3 {
            return Err(Error::TooFewRays(self.len() - 1));
        }
        let (left, right) = (self.prev(i), self.next(i));
        if det2(left, right) <= 0 {
            return Err(Error::NotContractible {
                ray: r,
                left,
                right,
            });
        }
        let rays = self
            .rays
            .iter()
            .copied()
            .filter(|v| *v != r)
            .collect::<Vec<_>>();
        Fan::from_sorted(rays)
    }

    pub fn mfs_structures(&self) -> Vec<MfsStructure> {
        let mut out = Vec::new();
        for (i, &v) in self.rays.iter().enumerate() {
            if let Some(j) = self.index_of(&-v) {
                if i < j {
                    out.push(MfsStructure {
                        fiber_ray_pair: (v, -v),
                        base_projection: [-v.y, v.x],
                    });
                }
            }
        }
        out
    }

    pub fn apply(&self, m: &Matrix2) -> Fan {
        Fan::new(self.rays.iter().map(|&v| m.apply(v))).expect("unimodular image of a fan")
    }

    /// A matrix in GL(2,Z) carrying the rays of `self` onto those of
    /// `other`, if one exists. Any such map sends the adjacent pair
    /// `(v_0, v_1)` to some adjacent pair of `other` in one of the two
    /// orientations, so those candidates are exhaustive.
    pub fn lattice_equivalent(&self, other: &Fan) -> Option<Matrix2> {
        if self.len() != other.len() {
            return None;
        }
        let (p, q) = self.cone(0);
        let target: BTreeSet<LatticeVector> = other.rays.iter().copied().collect();
        for j in 0..other.len() {
            let (a, b) = other.cone(j);
            for (pi, qi) in [(a, b), (b, a)] {
                if let Some(m) = Matrix2::mapping(p, q, pi, qi) {
                    if self.rays.iter().all(|&v| target.contains(&m.apply(v))) {
                        return Some(m);
                    }
                }
            }
        }
        None
    }

    /// Lexicographically smallest sorted ray list among the images of the
    /// fan under the normalizing maps of all ordered adjacent pairs. Two
    /// fans are lattice equivalent iff their canonical forms agree.
    pub fn canonical_form(&self) -> Vec<LatticeVector> {
        let n = self.len();
        let mut best: Option<Vec<LatticeVector>> = None;
        for i in 0..n {
            let (u, v) = self.cone(i);
            for (p, q) in [(u, v), (v, u)] {
                let m = Matrix2::normalizing(p, q).expect("adjacent rays are independent");
                let mut img: Vec<LatticeVector> = self.rays.iter().map(|&r| m.apply(r)).collect();
                img.sort_by(|a, b| a.angle_cmp(b));
                if best.as_ref().is_none_or(|b| img < *b) {
                    best = Some(img);
                }
            }
        }
        best.expect("nonempty fan")
    }

    pub fn is_projective_plane(&self) -> bool {
        self.len() == 3 && self.is_smooth()
    }

    /// `Some(n)` when the fan is lattice equivalent to the contraction of the
    /// negative section of `Σ_n` for some `n >= 2`.
    pub fn is_fn(&self) -> Option<i64> {
        if self.len() != 3 {
            return None;
        }
        let dets: Vec<i64> = (0..3).map(|i| self.cone_det(i)).collect();
        let singular: Vec<i64> = dets.iter().copied().filter(|&d| d > 1).collect();
        if singular.len() != 1 {
            return None;
        }
        let n = singular[0];
        self.lattice_equivalent(&Fan::f_n(n)).map(|_| n)
    }

    /// `Some(n)` when the fan is lattice equivalent to the Hirzebruch
    /// surface `Σ_n`.
    pub fn hirzebruch_index(&self) -> Option<i64> {
        if self.len() != 4 || !self.is_smooth() {
            return None;
        }
        // for smooth fans v_{i-1} + v_{i+1} = a_i v_i and D_i^2 = -a_i
        let n = (0..4)
            .map(|i| det2(self.prev(i), self.next(i)).abs())
            .max()
            .unwrap_or(0);
        self.lattice_equivalent(&Fan::hirzebruch(n)).map(|_| n)
    }
}

/// Every complete fan with rays in the box `|x|, |y| <= coord_bound` and at
/// most `max_rays` rays, one representative per lattice-equivalence class.
///
/// The result is ordered by canonical form; each class is represented by
/// its smallest in-box member (in ray-list order).
pub fn enumerate_fans(coord_bound: i64, max_rays: usize) -> Vec<Fan> {
    enumerate_fans_with_sizes(coord_bound, 3, max_rays)
}

pub fn enumerate_fans_with_sizes(coord_bound: i64, min_rays: usize, max_rays: usize) -> Vec<Fan> {
    let pool = primitive_vectors(coord_bound);
    let mut classes: BTreeMap<Vec<LatticeVector>, Fan> = BTreeMap::new();
    let mut chosen = Vec::new();
    for k in min_rays.max(3)..=max_rays {
        collect_complete(&pool, k, 0, &mut chosen, &mut |rays| {
            let fan = Fan {
                rays: rays.to_vec(),
                intersections: OnceLock::new(),
            };
            let key = fan.canonical_form();
            match classes.get(&key) {
                Some(existing) if *existing <= fan => {}
                _ => {
                    classes.insert(key, fan);
                }
            }
        });
    }
    classes.into_values().collect()
}

/// Depth-first enumeration of angularly sorted subsets of `pool` whose
/// consecutive determinants are positive. Partial sequences are pruned as
/// soon as two consecutive rays fail to turn counterclockwise by less than
/// a half turn.
fn collect_complete(
    pool: &[LatticeVector],
    k: usize,
    start: usize,
    chosen: &mut Vec<LatticeVector>,
    emit: &mut dyn FnMut(&[LatticeVector]),
) {
    if chosen.len() == k {
        let first = chosen[0];
        let last = chosen[k - 1];
        if det2(last, first) > 0 {
            emit(chosen);
        }
        return;
    }
    let remaining = k - chosen.len();
    for idx in start..pool.len() {
        if pool.len() - idx < remaining {
            break;
        }
        let v = pool[idx];
        if let Some(&last) = chosen.last() {
            if det2(last, v) <= 0 {
                // later candidates are further around; once we pass the
                // half turn none of them can follow `last`
                if last.angle_cmp(&v).is_lt() && det2(last, v) < 0 {
                    break;
                }
                continue;
            }
        }
        chosen.push(v);
        collect_complete(pool, k, idx + 1, chosen, emit);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn set(v: &[(i64, i64)]) -> BTreeSet<LatticeVector> {
        v.iter().map(|&(x, y)| lv(x, y)).collect()
    }

    fn ray_set(f: &Fan) -> BTreeSet<LatticeVector> {
        f.rays().iter().copied().collect()
    }

    #[test]
    fn construction_sorts_and_validates() {
        let p2 = Fan::from_pairs(&[(1, 0), (0, 1), (-1, -1)]).unwrap();
        assert_eq!(p2.rays(), &[lv(1, 0), lv(0, 1), lv(-1, -1)]);
        let c41 = Fan::from_pairs(&[(1, -2), (-2, 1), (1, 1)]).unwrap();
        assert_eq!(c41.rays(), &[lv(1, 1), lv(-2, 1), lv(1, -2)]);
        assert!(matches!(
            Fan::from_pairs(&[(1, 0), (2, 0), (0, 1)]),
            Err(Error::ParallelRays(..))
        ));
        assert!(matches!(
            Fan::from_pairs(&[(1, 0), (0, 1), (-1, 0)]),
            Err(Error::NotComplete(..))
        ));
    }

    #[test]
    fn resolutions_of_case_fans() {
        let (y, m) = Fan::projective_plane().minimal_resolution();
        assert_eq!(y, Fan::projective_plane());
        assert!(m.exceptional_rays.is_empty());

        let (y, m) = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)])
            .unwrap()
            .minimal_resolution();
        assert_eq!(
            ray_set(&y),
            set(&[(-2, 1), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (1, -2), (0, -1), (-1, 0)])
        );
        assert_eq!(m.exceptional_rays.len(), 6);
        assert_eq!(y.picard_rank(), 7);

        let (y, _) = Fan::from_pairs(&[(0, 1), (-2, -1), (2, -1)])
            .unwrap()
            .minimal_resolution();
        assert_eq!(
            ray_set(&y),
            set(&[(0, 1), (1, 0), (2, -1), (1, -1), (0, -1), (-1, -1), (-2, -1), (-1, 0)])
        );

        let (y, _) = Fan::from_pairs(&[(-1, 0), (0, 1), (3, -2)])
            .unwrap()
            .minimal_resolution();
        assert_eq!(
            ray_set(&y),
            set(&[(0, 1), (1, 0), (2, -1), (3, -2), (1, -1), (-1, 0)])
        );
    }

    #[test]
    fn blow_up_and_down() {
        let p2 = Fan::projective_plane();
        let (bl, m) = p2.star_subdivision(lv(1, 1)).unwrap();
        assert_eq!(bl.len(), 4);
        assert_eq!(m.exceptional_rays, vec![lv(1, 1)]);
        assert_eq!(bl.remove_ray(lv(1, 1)).unwrap(), p2);
        assert_eq!(p2.star_subdivision(lv(1, 0)), Err(Error::DuplicateRay(lv(1, 0))));

        let c41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        let (f, _) = c41.star_subdivision(lv(-1, 0)).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.contains(&lv(-1, 0)));

        assert!(matches!(
            Fan::p1xp1().remove_ray(lv(1, 0)),
            Err(Error::NotContractible { .. })
        ));
        let (y, _) = c41.minimal_resolution();
        let smaller = y.remove_ray(lv(-1, 1)).unwrap();
        assert_eq!(smaller.len(), 8);
    }

    #[test]
    fn mori_fibre_spaces() {
        assert_eq!(Fan::p1xp1().mfs_structures().len(), 2);
        assert!(Fan::projective_plane().mfs_structures().is_empty());
        let s2 = Fan::hirzebruch(2).mfs_structures();
        assert_eq!(s2.len(), 1);
        assert_eq!(s2[0].fiber_ray_pair, (lv(0, 1), lv(0, -1)));
    }

    #[test]
    fn equivalence_witnesses() {
        let c41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        let neg = c41.apply(&Matrix2::new(-1, 0, 0, -1));
        let m = c41.lattice_equivalent(&neg).unwrap();
        assert_eq!(c41.apply(&m), neg);
        assert!(Fan::projective_plane()
            .lattice_equivalent(&Fan::p1xp1())
            .is_none());
        let a = Fan::from_pairs(&[(1, 0), (0, 1), (-1, -2)]).unwrap();
        let b = Fan::from_pairs(&[(0, 1), (1, 0), (-2, -1)]).unwrap();
        assert!(a.lattice_equivalent(&b).is_some());
        assert_eq!(a.canonical_form(), b.canonical_form());
    }

    #[test]
    fn f_n_recognition() {
        assert_eq!(Fan::from_pairs(&[(-1, 0), (0, 1), (2, -1)]).unwrap().is_fn(), Some(2));
        assert_eq!(Fan::projective_plane().is_fn(), None);
        // one singular point of index 3 but of type 1/3(1,2)
        assert_eq!(Fan::from_pairs(&[(-1, 0), (1, 1), (1, -2)]).unwrap().is_fn(), None);
        assert_eq!(Fan::f_n(7).is_fn(), Some(7));
        assert_eq!(Fan::hirzebruch(3).hirzebruch_index(), Some(3));
        assert_eq!(Fan::p1xp1().hirzebruch_index(), Some(0));
    }

    #[test]
    fn small_enumerations() {
        let one3 = enumerate_fans(1, 3);
        assert!(one3
            .iter()
            .any(|f| f.lattice_equivalent(&Fan::projective_plane()).is_some()));
        let one4 = enumerate_fans(1, 4);
        let (bl, _) = Fan::projective_plane().star_subdivision(lv(1, 1)).unwrap();
        let p1 = one4.iter().position(|f| f.lattice_equivalent(&Fan::p1xp1()).is_some());
        let b = one4.iter().position(|f| f.lattice_equivalent(&bl).is_some());
        assert!(p1.is_some() && b.is_some() && p1 != b);
        let two3 = enumerate_fans(2, 3);
        let c41 = Fan::from_pairs(&[(-2, 1), (1, 1), (1, -2)]).unwrap();
        assert!(two3.iter().any(|f| f.lattice_equivalent(&c41).is_some()));
    }
}
