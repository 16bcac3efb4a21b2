//! Serde helpers: exact rationals travel as `"p/q"` strings.

use serde::ser::SerializeSeq;
use serde::Serializer;

use crate::lattice::Rational;

pub fn rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn rationals<S: Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(qs.len()))?;
    for q in qs {
        seq.serialize_element(&q.to_string())?;
    }
    seq.end()
}

pub fn opt_rational<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}
