//! Decompositions of generalized pairs, their complexities, and the linear
//! systems behind the Picard-rank-one case analysis.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor::{BNefDivisor, DivisorJson, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::genpair::{GeneralizedPair, OrbifoldStructure};
use crate::lattice::{int, is_integral, parse_rational, LatticeVector, Rational};
use crate::linalg;
use crate::lp::{LinearProgram, LpResult, LpSolution, Relation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub divisor: ToricDivisor,
    pub weight: Rational,
}

impl Component {
    pub fn new(divisor: ToricDivisor, weight: Rational) -> Self {
        Self { divisor, weight }
    }
}

/// A decomposition `Σ = (Σ_B, Σ_M)`: an orbifold structure, weighted
/// orbifold Weil divisors under `B` on the base, and weighted nef divisors
/// under `M_Y` on the moduli model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub orbifold: OrbifoldStructure,
    pub boundary: Vec<Component>,
    pub moduli: Vec<Component>,
}

impl Decomposition {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every boundary prime with weight equal to its coefficient, and the
    /// given moduli components.
    pub fn tautological(p: &GeneralizedPair, moduli: Vec<Component>) -> Result<Self> {
        let boundary = p
            .boundary()
            .terms()
            .filter(|(_, c)| c.is_positive())
            .map(|(r, c)| Ok(Component::new(ToricDivisor::prime(p.base(), r)?, c.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            orbifold: OrbifoldStructure::trivial(),
            boundary,
            moduli,
        })
    }

    pub fn validate(&self, p: &GeneralizedPair) -> Result<()> {
        let base = p.base();
        let model = p.moduli().model();
        let bad = |s: String| Err(Error::InvalidDecomposition(s));
        for (r, _) in self.orbifold.entries() {
            if !base.contains(r) {
                return bad(format!("orbifold index on non-ray {r}"));
            }
        }
        let mut sum_b = self.orbifold.divisor(base)?;
        for c in &self.boundary {
            if c.weight.is_negative() {
                return bad(format!("negative weight {}", c.weight));
            }
            if c.divisor.fan() != base {
                return Err(Error::FanMismatch);
            }
            for (r, x) in c.divisor.terms() {
                let n = self.orbifold.value(&r);
                if !is_integral(&(x * int(n as i64))) {
                    return bad(format!("{} is not an orbifold Weil divisor", c.divisor));
                }
            }
            sum_b = sum_b.try_add(&c.divisor.scale(&c.weight))?;
        }
        if !sum_b.le(p.boundary())? {
            return bad(format!("boundary part {sum_b} exceeds B = {}", p.boundary()));
        }
        let mut sum_m = ToricDivisor::zero(model);
        for c in &self.moduli {
            if c.weight.is_negative() {
                return bad(format!("negative weight {}", c.weight));
            }
            if c.divisor.fan() != model {
                return Err(Error::FanMismatch);
            }
            if !c.divisor.is_nef() {
                return bad(format!("moduli component {} is not nef", c.divisor));
            }
            if c.divisor.is_torsion() {
                return bad(format!("moduli component {} is torsion", c.divisor));
            }
            sum_m = sum_m.try_add(&c.divisor.scale(&c.weight))?;
        }
        if !sum_m.le(&p.moduli().divisor)? {
            return bad(format!(
                "moduli part {sum_m} exceeds M_Y = {}",
                p.moduli().divisor
            ));
        }
        Ok(())
    }

    /// `|Σ|`: boundary weights plus the moduli weights whose pushforward to
    /// the base is not torsion.
    pub fn norm(&self, base: &Fan) -> Rational {
        let b: Rational = self.boundary.iter().map(|c| c.weight.clone()).sum();
        let m: Rational = self
            .moduli
            .iter()
            .filter(|c| !c.divisor.pushforward_to(base).is_torsion())
            .map(|c| c.weight.clone())
            .sum();
        b + m
    }

    /// `ρ(Σ)`: rank of the span of all components in `Cl(X) ⊗ Q`.
    pub fn span_rank(&self, base: &Fan) -> usize {
        let rows: Vec<Vec<Rational>> = self
            .boundary
            .iter()
            .map(|c| c.divisor.class_of().0)
            .chain(
                self.moduli
                    .iter()
                    .map(|c| c.divisor.pushforward_to(base).class_of().0),
            )
            .collect();
        linalg::rank(&rows)
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    divisor: DivisorJson,
    weight: String,
}

/// `{"orbifold": [["x,y", n], ...], "boundary": [{"divisor": ..., "weight":
/// "p/q"}], "moduli": [...]}`; missing lists are empty.
#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    #[serde(default)]
    orbifold: Vec<(String, u32)>,
    #[serde(default)]
    boundary: Vec<ComponentJson>,
    #[serde(default)]
    moduli: Vec<ComponentJson>,
}

impl TryFrom<DecompositionJson> for Decomposition {
    type Error = Error;

    fn try_from(j: DecompositionJson) -> Result<Self> {
        let orbifold = j
            .orbifold
            .iter()
            .map(|(k, n)| Ok((LatticeVector::parse_key(k)?, *n)))
            .collect::<Result<Vec<_>>>()?;
        let comp = |c: ComponentJson| -> Result<Component> {
            Ok(Component::new(c.divisor.try_into()?, parse_rational(&c.weight)?))
        };
        Ok(Self {
            orbifold: OrbifoldStructure::new(orbifold)?,
            boundary: j.boundary.into_iter().map(comp).collect::<Result<_>>()?,
            moduli: j.moduli.into_iter().map(comp).collect::<Result<_>>()?,
        })
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DecompositionJson::deserialize(d)?;
        Decomposition::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let comp = |c: &Component| ComponentJson {
            divisor: (&c.divisor).into(),
            weight: c.weight.to_string(),
        };
        DecompositionJson {
            orbifold: self.orbifold.entries().map(|(r, n)| (r.key(), *n)).collect(),
            boundary: self.boundary.iter().map(comp).collect(),
            moduli: self.moduli.iter().map(comp).collect(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Orbifold,
    Classic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    #[serde(serialize_with = "crate::json::rational")]
    pub norm: Rational,
    pub span_rank: usize,
    pub picard_rank: usize,
    /// `dim + ρ(Σ) - |Σ|`.
    #[serde(serialize_with = "crate::json::rational")]
    pub orbifold_value: Rational,
    /// `dim + ρ(X) - |Σ|`.
    #[serde(serialize_with = "crate::json::rational")]
    pub classic_value: Rational,
    pub witness: Decomposition,
}

impl ComplexityReport {
    pub fn value(&self, v: Variant) -> &Rational {
        match v {
            Variant::Orbifold => &self.orbifold_value,
            Variant::Classic => &self.classic_value,
        }
    }
}

pub fn norm(d: &Decomposition, base: &Fan) -> Rational {
    d.norm(base)
}

/// Complexities of one decomposition, after validating it against the pair.
pub fn complexity(p: &GeneralizedPair, d: &Decomposition) -> Result<ComplexityReport> {
    d.validate(p)?;
    let base = p.base();
    let norm = d.norm(base);
    let span_rank = d.span_rank(base);
    let picard_rank = base.picard_rank();
    Ok(ComplexityReport {
        orbifold_value: int(2 + span_rank as i64) - &norm,
        classic_value: int(2 + picard_rank as i64) - &norm,
        norm,
        span_rank,
        picard_rank,
        witness: d.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxNorm {
    pub value: Rational,
    pub boundary_weights: Vec<Rational>,
    pub moduli_weights: Vec<Rational>,
    pub lp: LinearProgram,
    pub solution: LpSolution,
}

/// Maximizes `|Σ|` over weights for fixed component lists: boundary
/// components on the base and moduli components on the moduli model.
pub fn max_norm_lp(
    p: &GeneralizedPair,
    orbifold: &OrbifoldStructure,
    boundary: &[ToricDivisor],
    moduli: &[ToricDivisor],
) -> Result<MaxNorm> {
    let base = p.base();
    let model = p.moduli().model();
    let nb = boundary.len();
    let nv = nb + moduli.len();
    let mut lp = LinearProgram::new(nv);
    for (j, d) in boundary.iter().enumerate() {
        if d.fan() != base {
            return Err(Error::FanMismatch);
        }
        lp.objective[j] = Rational::one();
    }
    for (j, d) in moduli.iter().enumerate() {
        if d.fan() != model {
            return Err(Error::FanMismatch);
        }
        if !d.pushforward_to(base).is_torsion() {
            lp.objective[nb + j] = Rational::one();
        }
    }
    let fixed = orbifold.divisor(base)?;
    for (i, r) in base.rays().iter().enumerate() {
        let mut row = vec![Rational::zero(); nv];
        for (j, d) in boundary.iter().enumerate() {
            row[j] = d.coeffs()[i].clone();
        }
        let rhs = p.boundary().coeff(r) - fixed.coeff(r);
        lp.add(row, Relation::Le, rhs);
    }
    for (i, _) in model.rays().iter().enumerate() {
        let mut row = vec![Rational::zero(); nv];
        for (j, d) in moduli.iter().enumerate() {
            row[nb + j] = d.coeffs()[i].clone();
        }
        lp.add(row, Relation::Le, p.moduli().divisor.coeffs()[i].clone());
    }
    match lp.solve() {
        LpResult::Optimal(s) => Ok(MaxNorm {
            value: s.value.clone(),
            boundary_weights: s.x[..nb].to_vec(),
            moduli_weights: s.x[nb..].to_vec(),
            lp,
            solution: s,
        }),
        LpResult::Infeasible(_) => Err(Error::InvalidDecomposition(
            "orbifold structure exceeds the boundary".into(),
        )),
        LpResult::Unbounded => Err(Error::InvalidDecomposition(
            "unbounded norm: a component has no positive coefficient".into(),
        )),
    }
}

/// Bounds of the decomposition search. Results are minima over the
/// searched family only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_orbifold_index: u32,
    pub max_multiple: i64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            max_orbifold_index: 2,
            max_multiple: 1,
        }
    }
}

/// A subspace reached by the search whose value is not positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroWitness {
    pub subspace_dim: usize,
    pub witness_rank: usize,
    #[serde(serialize_with = "crate::json::rational")]
    pub witness_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub bounds: SearchBounds,
    /// Minimum over the searched family; `orbifold_value` is the fine
    /// complexity estimate.
    pub best: ComplexityReport,
    #[serde(serialize_with = "crate::json::rational")]
    pub absolute_value: Rational,
    #[serde(serialize_with = "crate::json::rational")]
    pub classic_value: Rational,
    #[serde(serialize_with = "crate::json::rational")]
    pub max_norm: Rational,
    pub moduli_candidates: usize,
    pub subspaces_evaluated: usize,
    pub zero_witnesses: Vec<ZeroWitness>,
    pub all_lp_certified: bool,
}

/// A subspace of `Cl(X) ⊗ Q` spanned by prime and candidate classes, with
/// its moduli LP and the base primes whose class it contains.
#[derive(Clone, Debug)]
struct Subspace {
    basis: Vec<Vec<Rational>>,
    lp: Rational,
    weights: Vec<Rational>,
    certified: bool,
    primes: Vec<bool>,
}

/// Candidate moduli components of a b-nef divisor, together with every
/// subspace of `Cl(X) ⊗ Q` spanned by prime and candidate classes and its
/// moduli LP. None of this depends on the boundary, so a table is reusable
/// across pairs with the same base and moduli part.
pub struct ModuliTable {
    base: Fan,
    moduli: BNefDivisor,
    candidates: Vec<ToricDivisor>,
    classes: Vec<Vec<Rational>>,
    prime_classes: Vec<Vec<Rational>>,
    subspaces: Option<Vec<Subspace>>,
}

/// Effective integral nef divisors on the smooth model with coefficients in
/// `0..=max_multiple`, supported where `M_Y` is positive, whose pushforward
/// is not torsion.
pub fn moduli_candidates(moduli: &BNefDivisor, max_multiple: i64) -> Vec<ToricDivisor> {
    let y = moduli.model();
    let n = y.len();
    let support: Vec<usize> = (0..n)
        .filter(|&i| moduli.divisor.coeffs()[i].is_positive())
        .collect();
    if support.is_empty() || max_multiple < 1 {
        return Vec::new();
    }
    // smooth model: D · D_k = c_{k-1} + c_{k+1} - a_k c_k
    let a: Vec<i64> = (0..n)
        .map(|k| crate::lattice::det2(y.prev(k), y.next(k)))
        .collect();
    let mut out = Vec::new();
    let mut digits = vec![0i64; support.len()];
    loop {
        // increment odometer
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return out;
            }
            digits[pos] += 1;
            if digits[pos] > max_multiple {
                digits[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
        let mut c = vec![0i64; n];
        for (d, &i) in digits.iter().zip(&support) {
            c[i] = *d;
        }
        let nef = (0..n).all(|k| c[(k + n - 1) % n] + c[(k + 1) % n] - a[k] * c[k] >= 0);
        if !nef {
            continue;
        }
        let d = ToricDivisor::new(y.clone(), c.into_iter().map(int).collect())
            .expect("coefficient count matches");
        if !d.pushforward_to(moduli.base()).is_torsion() {
            out.push(d);
        }
    }
}

fn canonical_basis(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let piv = linalg::rref(&mut m);
    m.truncate(piv.len());
    m
}

/// Membership in the span of a basis in reduced row echelon form.
fn in_rref_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut r = v.to_vec();
    for row in basis {
        let c = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
        if r[c].is_zero() {
            continue;
        }
        let f = r[c].clone();
        for (x, y) in r.iter_mut().zip(row) {
            *x -= &f * y;
        }
    }
    r.iter().all(Zero::is_zero)
}

impl ModuliTable {
    pub fn new(moduli: &BNefDivisor, bounds: SearchBounds) -> Self {
        let candidates = moduli_candidates(moduli, bounds.max_multiple);
        let base = moduli.base().clone();
        let classes = candidates
            .iter()
            .map(|d| d.pushforward_to(&base).class_of().0)
            .collect();
        let prime_classes = base
            .rays()
            .iter()
            .map(|&r| ToricDivisor::prime(&base, r).expect("ray of base").class_of().0)
            .collect();
        Self {
            base,
            moduli: moduli.clone(),
            candidates,
            classes,
            prime_classes,
            subspaces: None,
        }
    }

    pub fn candidates(&self) -> &[ToricDivisor] {
        &self.candidates
    }

    /// Maximum of `Σ λ_j` over candidates whose class lies in the subspace
    /// with the given canonical basis.
    fn lp_in(&self, basis: &[Vec<Rational>]) -> (Rational, Vec<Rational>, bool) {
        let idx: Vec<usize> = (0..self.candidates.len())
            .filter(|&j| in_rref_span(basis, &self.classes[j]))
            .collect();
        if idx.is_empty() {
            return (Rational::zero(), vec![Rational::zero(); self.candidates.len()], true);
        }
        let my = &self.moduli.divisor;
        let rows: Vec<usize> = (0..my.fan().len())
            .filter(|&i| idx.iter().any(|&j| !self.candidates[j].coeffs()[i].is_zero()))
            .collect();
        let mut lp = LinearProgram::new(idx.len());
        lp.objective = vec![Rational::one(); idx.len()];
        for &i in &rows {
            let row = idx
                .iter()
                .map(|&j| self.candidates[j].coeffs()[i].clone())
                .collect();
            lp.add(row, Relation::Le, my.coeffs()[i].clone());
        }
        let s = match lp.solve() {
            LpResult::Optimal(s) => s,
            other => unreachable!("moduli LP is feasible and bounded: {other:?}"),
        };
        let ok = lp.certify(&s);
        let mut w = vec![Rational::zero(); self.candidates.len()];
        for (k, &j) in idx.iter().enumerate() {
            w[j] = s.x[k].clone();
        }
        (s.value, w, ok)
    }

    /// All nonzero subspaces spanned by prime and candidate classes, found
    /// breadth first by adjoining one generator at a time.
    fn subspaces(&mut self) -> &[Subspace] {
        if self.subspaces.is_none() {
            let mut gens: Vec<Vec<Rational>> = Vec::new();
            let mut dirs = HashSet::new();
            for cls in self.prime_classes.iter().chain(&self.classes) {
                let key = canonical_basis(std::slice::from_ref(cls));
                if !key.is_empty() && dirs.insert(key) {
                    gens.push(cls.clone());
                }
            }
            let mut visited: HashSet<Vec<Vec<Rational>>> = HashSet::new();
            let mut frontier: Vec<Vec<Vec<Rational>>> = vec![Vec::new()];
            let mut out = Vec::new();
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for v in &frontier {
                    for g in &gens {
                        if in_rref_span(v, g) {
                            continue;
                        }
                        let mut rows = v.clone();
                        rows.push(g.clone());
                        let w = canonical_basis(&rows);
                        if visited.insert(w.clone()) {
                            next.push(w);
                        }
                    }
                }
                for basis in &next {
                    let (lp, weights, certified) = self.lp_in(basis);
                    let primes = self
                        .prime_classes
                        .iter()
                        .map(|c| in_rref_span(basis, c))
                        .collect();
                    out.push(Subspace {
                        basis: basis.clone(),
                        lp,
                        weights,
                        certified,
                        primes,
                    });
                }
                frontier = next;
            }
            self.subspaces = Some(out);
        }
        self.subspaces.as_deref().expect("just filled")
    }

    /// Minimum complexity over decompositions whose boundary components are
    /// single invariant primes (as `P / n_P`) and whose moduli components
    /// are the table's candidates.
    ///
    /// The minimum over decompositions equals the minimum over subspaces
    /// `V` spanned by candidate classes of `2 + dim V - N(V)`, where `N(V)`
    /// is the largest norm using only components with class in `V`.
    pub fn search(&mut self, p: &GeneralizedPair, bounds: SearchBounds) -> Result<SearchReport> {
        if p.base() != &self.base || p.moduli() != &self.moduli {
            return Err(Error::Precondition("pair does not match the moduli table".into()));
        }
        let base = p.base().clone();
        let rho = base.picard_rank();
        let b: Vec<Rational> = base.rays().iter().map(|r| p.boundary().coeff(r)).collect();
        let primes: Vec<(LatticeVector, Rational, Vec<Rational>)> = base
            .rays()
            .iter()
            .zip(&b)
            .zip(&self.prime_classes)
            .filter(|((_, c), _)| c.is_positive())
            .map(|((r, c), cls)| (*r, c.clone(), cls.clone()))
            .collect();
        let subspaces = self.subspaces().to_vec();
        let b_full: Rational = b.iter().filter(|c| c.is_positive()).sum();
        let lp_full = subspaces
            .iter()
            .map(|s| &s.lp)
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        let max_norm = &lp_full + &b_full;

        let mut certified = true;
        let mut best_value = int(2);
        let mut best: Option<&Subspace> = None;
        let mut zero_witnesses = Vec::new();
        for v in &subspaces {
            certified &= v.certified;
            let k = v.basis.len();
            let nb: Rational = b
                .iter()
                .zip(&v.primes)
                .filter(|(c, &inside)| inside && c.is_positive())
                .map(|(c, _)| c)
                .sum();
            let value = int(2 + k as i64) - &v.lp - &nb;
            if !value.is_positive() {
                let wit = self.assemble(p, &primes, &v.basis, &v.weights, bounds)?;
                let rank = wit.span_rank(&base);
                let wv = int(2 + rank as i64) - wit.norm(&base);
                zero_witnesses.push(ZeroWitness {
                    subspace_dim: k,
                    witness_rank: rank,
                    witness_value: wv,
                });
            }
            if value < best_value {
                best_value = value;
                best = Some(v);
            }
        }
        let witness = match best {
            Some(v) => self.assemble(p, &primes, &v.basis, &v.weights, bounds)?,
            None => self.assemble(p, &primes, &[], &vec![Rational::zero(); self.candidates.len()], bounds)?,
        };
        let best = complexity(p, &witness)?;
        debug_assert!(best.orbifold_value <= best_value);
        Ok(SearchReport {
            bounds,
            absolute_value: best.orbifold_value.clone(),
            classic_value: int(2 + rho as i64) - &max_norm,
            best,
            max_norm,
            moduli_candidates: self.candidates.len(),
            subspaces_evaluated: subspaces.len(),
            zero_witnesses,
            all_lp_certified: certified,
        })
    }

    fn assemble(
        &self,
        p: &GeneralizedPair,
        primes: &[(LatticeVector, Rational, Vec<Rational>)],
        basis: &[Vec<Rational>],
        moduli_weights: &[Rational],
        bounds: SearchBounds,
    ) -> Result<Decomposition> {
        let base = p.base();
        let mut boundary = Vec::new();
        let mut orbifold = Vec::new();
        for (r, b, cls) in primes {
            if in_rref_span(basis, cls) {
                // the component P/n with fixed part (1 - 1/n)P has weight at
                // most n(b - 1) + 1, which is largest at n = 1 since b <= 1
                let (n, w) = (1..=bounds.max_orbifold_index.max(1))
                    .map(|n| {
                        let n = n as i64;
                        (n, int(n) * (b - int(1)) + int(1))
                    })
                    .fold((1, b.clone()), |acc, (n, w)| if w > acc.1 { (n, w) } else { acc });
                if n > 1 {
                    orbifold.push((*r, n as u32));
                }
                let comp = ToricDivisor::prime(base, *r)?.scale(&Rational::new(1.into(), n.into()));
                boundary.push(Component::new(comp, w));
            } else {
                // absorb as much as possible into the orbifold part
                let n = (2..=bounds.max_orbifold_index)
                    .rev()
                    .find(|&n| int(1) - Rational::new(1.into(), (n as i64).into()) <= *b);
                if let Some(n) = n {
                    orbifold.push((*r, n));
                }
            }
        }
        let moduli = self
            .candidates
            .iter()
            .zip(moduli_weights)
            .filter(|(_, w)| w.is_positive())
            .map(|(d, w)| Component::new(d.clone(), w.clone()))
            .collect();
        Ok(Decomposition {
            orbifold: OrbifoldStructure::new(orbifold)?,
            boundary,
            moduli,
        })
    }
}

pub fn search_min_complexity(p: &GeneralizedPair, bounds: SearchBounds) -> Result<SearchReport> {
    ModuliTable::new(p.moduli(), bounds).search(p, bounds)
}

/// Families of nef Cartier classes on a model with a ruling by
/// `f` and a section `C_0`, and the class identities they must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n")]
pub enum FeasibilityFixture {
    /// `Σ_n`: components `a C_0 + b f` with `b >= n a`, and `c f`; the
    /// class equations are `Σλ + Σμ = 3`, `Σλa + α = 2`,
    /// `Σλb + Σμc = n + 2`.
    Hirzebruch(i64),
    /// Components `2a C_0 + 2b f` with `b >= 2a`, and `2c f`; right-hand
    /// side `4`.
    Case42,
    /// Components `2a C_0 + 2b f` with `b >= 3a`, and `2c f`; right-hand
    /// side `6`.
    Case43,
}

impl FeasibilityFixture {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "4.2" | "case42" => Ok(Self::Case42),
            "4.3" | "case43" => Ok(Self::Case43),
            _ => {
                let n = s
                    .strip_prefix("3.2-")
                    .or_else(|| s.strip_prefix("hirzebruch-"))
                    .and_then(|t| t.parse::<i64>().ok())
                    .filter(|n| *n >= 0)
                    .ok_or_else(|| Error::UnknownCase(s.to_string()))?;
                Ok(Self::Hirzebruch(n))
            }
        }
    }

    /// `(scale s, slope k, fibre degree rhs)`: components are
    /// `s(a C_0 + b f)` with `b >= k a`, and the `f`-equation has
    /// right-hand side `rhs`.
    fn data(&self) -> (i64, i64, i64) {
        match *self {
            Self::Hirzebruch(n) => (1, n, n + 2),
            Self::Case42 => (2, 2, 4),
            Self::Case43 => (2, 3, 6),
        }
    }

    fn name(&self) -> String {
        match self {
            Self::Hirzebruch(n) => format!("3.2-{n}"),
            Self::Case42 => "4.2".into(),
            Self::Case43 => "4.3".into(),
        }
    }
}

/// Which values of the boundary coefficient `α` admit a solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum AlphaSet {
    Empty,
    Interval {
        #[serde(serialize_with = "crate::json::rational")]
        min: Rational,
        #[serde(serialize_with = "crate::json::rational")]
        max: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnType {
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityWitness {
    #[serde(serialize_with = "crate::json::rational")]
    pub alpha: Rational,
    /// `(type, λ)` for the `a C_0 + b f` components with positive weight.
    pub lambda: Vec<(ColumnType, String)>,
    /// `(c, μ)` for the fibre components with positive weight.
    pub mu: Vec<(i64, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub fixture: String,
    pub alpha_set: AlphaSet,
    /// Witnesses attaining the ends of the interval.
    pub witnesses: Vec<FeasibilityWitness>,
    /// Farkas multipliers on `(Σ, C_0, f, α <= 1)` rows when infeasible,
    /// otherwise the dual multipliers certifying the minimum of `α`.
    #[serde(serialize_with = "crate::json::rationals")]
    pub certificate: Vec<Rational>,
    /// The certificate was checked against the whole infinite family of
    /// component types, not only the finitely many columns solved.
    pub certificate_universal: bool,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.alpha_set != AlphaSet::Empty
    }

    /// The feasible set is exactly `{value}`.
    pub fn is_singleton(&self, value: &Rational) -> bool {
        matches!(&self.alpha_set, AlphaSet::Interval { min, max } if min == value && max == value)
    }
}

struct FeasibilityLp {
    lp: LinearProgram,
    lambda_types: Vec<ColumnType>,
    mu_types: Vec<i64>,
}

fn feasibility_lp(fx: FeasibilityFixture, alpha: Option<&Rational>) -> FeasibilityLp {
    let (s, k, rhs) = fx.data();
    let a_max = 2;
    let top = rhs / s;
    let mut lambda_types = Vec::new();
    for a in 1..=a_max {
        for b in (k * a)..=top.max(k * a) {
            lambda_types.push(ColumnType { a, b });
        }
    }
    let mu_types: Vec<i64> = (1..=top.max(1)).collect();
    let nl = lambda_types.len();
    let nv = nl + mu_types.len() + 1;
    let ai = nv - 1;
    let mut lp = LinearProgram::new(nv);
    let mut sum = vec![Rational::zero(); nv];
    let mut c0 = vec![Rational::zero(); nv];
    let mut fib = vec![Rational::zero(); nv];
    for (j, t) in lambda_types.iter().enumerate() {
        sum[j] = int(1);
        c0[j] = int(s * t.a);
        fib[j] = int(s * t.b);
    }
    for (j, &c) in mu_types.iter().enumerate() {
        sum[nl + j] = int(1);
        fib[nl + j] = int(s * c);
    }
    c0[ai] = int(1);
    lp.add(sum, Relation::Eq, int(3));
    lp.add(c0, Relation::Eq, int(2));
    lp.add(fib, Relation::Eq, int(rhs));
    let mut bound = vec![Rational::zero(); nv];
    bound[ai] = int(1);
    lp.add(bound.clone(), Relation::Le, int(1));
    if let Some(a) = alpha {
        lp.add(bound, Relation::Eq, a.clone());
    }
    FeasibilityLp {
        lp,
        lambda_types,
        mu_types,
    }
}

/// Checks `yᵀ col >= floor` for every column of the infinite families:
/// `(1, s a, s b)` with `a >= 1`, `b >= k a` and `(1, 0, s c)` with
/// `c >= 1`. Each is affine in its parameters over a translated cone, so it
/// suffices to check the vertex and the recession directions.
fn universal_columns_ok(fx: FeasibilityFixture, y: &[Rational], floor: &Rational) -> bool {
    let (s, k, _) = fx.data();
    let (y0, y1, y2) = (&y[0], &y[1], &y[2]);
    let s = int(s);
    let lam = |a: i64, b: i64| y0 + &s * int(a) * y1 + &s * int(b) * y2;
    let vertex = lam(1, k) >= *floor;
    let dir_ak = !(&s * (y1 + int(k) * y2)).is_negative();
    let dir_b = !(&s * y2).is_negative();
    let mu_vertex = y0 + &s * y2 >= *floor;
    vertex && dir_ak && dir_b && mu_vertex
}

fn witness_of(f: &FeasibilityLp, x: &[Rational]) -> FeasibilityWitness {
    let nl = f.lambda_types.len();
    FeasibilityWitness {
        alpha: x[x.len() - 1].clone(),
        lambda: f
            .lambda_types
            .iter()
            .zip(x)
            .filter(|(_, w)| w.is_positive())
            .map(|(t, w)| (t.clone(), w.to_string()))
            .collect(),
        mu: f
            .mu_types
            .iter()
            .zip(&x[nl..])
            .filter(|(_, w)| w.is_positive())
            .map(|(c, w)| (*c, w.to_string()))
            .collect(),
    }
}

/// Decides the class equations of a fixture over the rationals. With
/// `alpha` fixed the answer is feasible/infeasible; with `alpha` free the
/// feasible `α`-set (an interval inside `[0, 1]`) is returned. The
/// component types are unbounded integers: the finite LP uses a bounded
/// window of types, and its certificate is then checked against every type.
pub fn feasibility_system(
    fx: FeasibilityFixture,
    alpha: Option<&Rational>,
) -> FeasibilityReport {
    let f = feasibility_lp(fx, alpha);
    let nv = f.lp.num_vars;
    let ai = nv - 1;
    let mut lo = f.lp.clone();
    lo.objective = vec![Rational::zero(); nv];
    lo.objective[ai] = int(1);
    match lo.solve_min() {
        LpResult::Infeasible(y) => {
            let farkas_ok = f.lp.check_farkas(&y);
            FeasibilityReport {
                fixture: fx.name(),
                alpha_set: AlphaSet::Empty,
                witnesses: Vec::new(),
                certificate_universal: farkas_ok && universal_columns_ok(fx, &y, &Rational::zero()),
                certificate: y,
            }
        }
        LpResult::Optimal(min_sol) => {
            let mut hi = f.lp.clone();
            hi.objective = vec![Rational::zero(); nv];
            hi.objective[ai] = int(1);
            let max_sol = match hi.solve() {
                LpResult::Optimal(s) => s,
                other => unreachable!("bounded by α <= 1: {other:?}"),
            };
            // min α is certified by y with Aᵀy <= e_α; for the λ and μ
            // columns this reads yᵀcol <= 0, i.e. (-y)ᵀcol >= 0
            let neg: Vec<Rational> = min_sol.dual.iter().map(|v| -v).collect();
            let mut min_lp = lo.clone();
            for c in min_lp.objective.iter_mut() {
                *c = -&*c;
            }
            let cert_ok = min_lp.dual_bound(&neg) == Some(-min_sol.value.clone())
                && universal_columns_ok(fx, &neg, &Rational::zero());
            FeasibilityReport {
                fixture: fx.name(),
                alpha_set: AlphaSet::Interval {
                    min: min_sol.value.clone(),
                    max: max_sol.value.clone(),
                },
                witnesses: vec![witness_of(&f, &min_sol.x), witness_of(&f, &max_sol.x)],
                certificate: neg,
                certificate_universal: cert_ok,
            }
        }
        LpResult::Unbounded => unreachable!("α is bounded below by 0"),
    }
}

/// Comparison of a decomposition with the one induced on an invariant
/// curve of coefficient one by adjunction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjointComparison {
    pub curve: LatticeVector,
    #[serde(serialize_with = "crate::json::rational")]
    pub curve_norm: Rational,
    pub curve_span_rank: usize,
    #[serde(serialize_with = "crate::json::rational")]
    pub curve_value: Rational,
    #[serde(serialize_with = "crate::json::rational")]
    pub surface_value: Rational,
    /// The induced boundary decomposition lies under `B_S` at both points.
    pub bounded_by_different: bool,
}

impl AdjointComparison {
    pub fn holds(&self) -> bool {
        self.bounded_by_different && self.curve_value <= self.surface_value
    }
}

/// Builds the decomposition of the adjoint pair on `D_ρ ≅ P^1` from a
/// decomposition of the surface pair in which `D_ρ` is a weight-one
/// boundary component. Boundary components other than `D_ρ` restrict to
/// the fixed points; moduli components restricting to torsion move into
/// the boundary through their negative parts `π^*π_*M - M`.
pub fn adjoint_comparison(
    p: &GeneralizedPair,
    d: &Decomposition,
    rho: LatticeVector,
) -> Result<AdjointComparison> {
    let surface = complexity(p, d)?;
    let base = p.base();
    let y = p.moduli().model();
    let s_x = ToricDivisor::prime(base, rho)?;
    let s_y = ToricDivisor::prime(y, rho)?;
    let self_pos = d
        .boundary
        .iter()
        .position(|c| c.divisor == s_x && c.weight.is_one())
        .ok_or_else(|| Error::Precondition(format!("D{rho} is not a weight-one component")))?;
    if d.orbifold.value(&rho) != 1 {
        return Err(Error::Precondition(format!("D{rho} carries an orbifold index")));
    }
    for c in &d.boundary {
        if c.divisor.intersect(&s_x)?.is_zero() {
            return Err(Error::Precondition(format!("{} restricts trivially", c.divisor)));
        }
    }
    for c in &d.moduli {
        if c.divisor.pushforward_to(base).intersect(&s_x)?.is_zero() {
            return Err(Error::Precondition(format!("{} restricts trivially", c.divisor)));
        }
    }
    let adj = p.adjunction_to_invariant_curve(rho, &d.orbifold)?;
    let mut norm = Rational::zero();
    let mut components = 0usize;
    // coefficient of the induced boundary decomposition at each point
    let mut at = [Rational::zero(), Rational::zero()];
    for (q, pt) in adj.points.iter().enumerate() {
        at[q] = int(1) - Rational::new(1.into(), pt.orbifold_index.into());
    }
    for (i, c) in d.boundary.iter().enumerate() {
        if i == self_pos {
            continue;
        }
        norm += &c.weight;
        components += 1;
        for (q, pt) in adj.points.iter().enumerate() {
            let local = c.divisor.coeff(&pt.neighbor) / int(pt.local_index);
            at[q] += &c.weight * local;
        }
    }
    for c in &d.moduli {
        norm += &c.weight;
        components += 1;
        if c.divisor.intersect(&s_y)?.is_zero() {
            let m_x = c.divisor.pushforward_to(base);
            let e = m_x.pullback_to(y)?.try_sub(&c.divisor)?;
            for (q, pt) in adj.points.iter().enumerate() {
                at[q] += &c.weight * e.coeff(&pt.model_neighbor);
            }
        }
    }
    let bounded = adj
        .points
        .iter()
        .zip(&at)
        .all(|(pt, v)| *v <= pt.boundary_coeff);
    let rank = usize::from(components > 0);
    Ok(AdjointComparison {
        curve: rho,
        curve_value: int(1 + rank as i64) - &norm,
        curve_norm: norm,
        curve_span_rank: rank,
        surface_value: surface.orbifold_value,
        bounded_by_different: bounded,
    })
}
