//! Fragmented one-dimensional domains.
//!
//! A [`Domain1D`] is a finite union of disjoint open intervals, optionally
//! tagged as favourable (`Minus`) or unfavourable (`Plus`) components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval `]a, b[`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Strict containment (open interval).
    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Distance from `x` to the closed interval.
    pub fn dist(&self, x: f64) -> f64 {
        if x < self.a {
            self.a - x
        } else if x > self.b {
            x - self.b
        } else {
            0.0
        }
    }
}

/// Classification of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Minus,
    Plus,
}

/// Finite union of disjoint open intervals sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainJson", into = "DomainJson")]
pub struct Domain1D {
    intervals: Vec<Interval>,
    tags: Option<Vec<Tag>>,
}

/// Wire form: `{"intervals": [[a,b],...], "tags": ["minus"|"plus", ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainJson {
    pub intervals: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<Tag>>,
}

impl TryFrom<DomainJson> for Domain1D {
    type Error = Error;

    fn try_from(j: DomainJson) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = j.intervals.iter().map(|p| (p[0], p[1])).collect();
        match j.tags {
            Some(tags) => Domain1D::with_tags(&pairs, &tags),
            None => Domain1D::new(&pairs),
        }
    }
}

impl From<Domain1D> for DomainJson {
    fn from(d: Domain1D) -> Self {
        DomainJson {
            intervals: d.intervals.iter().map(|iv| [iv.a, iv.b]).collect(),
            tags: d.tags,
        }
    }
}

/// Two patches of lengths `a1`, `a2` separated by a gap of `2 mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPatch {
    pub a1: f64,
    pub a2: f64,
    pub mu: f64,
}

impl TwoPatch {
    pub fn new(a1: f64, a2: f64, mu: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "patch lengths must be positive, got {a1}, {a2}"
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half-distance must be nonnegative, got {mu}"
            )));
        }
        Ok(TwoPatch { a1, a2, mu })
    }

    /// `]-a1-mu, -mu[ ∪ ]mu, a2+mu[`, or `]-a1, a2[` when `mu = 0`.
    pub fn domain(&self) -> Domain1D {
        two_patch(*self)
    }

    pub fn left(&self) -> Interval {
        Interval { a: -self.a1 - self.mu, b: -self.mu }
    }

    pub fn right(&self) -> Interval {
        Interval { a: self.mu, b: self.a2 + self.mu }
    }
}

/// Builds the union of two patches; touching patches (`mu = 0`) merge.
pub fn two_patch(tp: TwoPatch) -> Domain1D {
    if tp.mu == 0.0 {
        Domain1D {
            intervals: vec![Interval { a: -tp.a1, b: tp.a2 }],
            tags: None,
        }
    } else {
        Domain1D {
            intervals: vec![tp.left(), tp.right()],
            tags: None,
        }
    }
}

/// Sorts, validates and merges touching intervals. Returns merged intervals
/// and, for each, the indices of the input pairs it came from.
fn normalize(pairs: &[(f64, f64)]) -> Result<Vec<(Interval, Vec<usize>)>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("domain needs at least one interval".into()));
    }
    let mut ivs: Vec<(Interval, usize)> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Interval::new(a, b).map(|iv| (iv, k)))
        .collect::<Result<_>>()?;
    ivs.sort_by(|x, y| x.0.a.total_cmp(&y.0.a));
    let mut out: Vec<(Interval, Vec<usize>)> = Vec::with_capacity(ivs.len());
    for (iv, k) in ivs {
        if let Some((last, members)) = out.last_mut() {
            if iv.a < last.b {
                return Err(Error::OverlappingIntervals(last.a, last.b, iv.a, iv.b));
            }
            if iv.a == last.b {
                last.b = iv.b;
                members.push(k);
                continue;
            }
        }
        out.push((iv, vec![k]));
    }
    Ok(out)
}

impl Domain1D {
    /// Untagged domain from `(a, b)` pairs.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        let merged = normalize(pairs)?;
        Ok(Domain1D {
            intervals: merged.into_iter().map(|(iv, _)| iv).collect(),
            tags: None,
        })
    }

    /// Tagged domain; `tags[k]` classifies `pairs[k]`. Touching intervals
    /// merge only when they carry the same tag.
    pub fn with_tags(pairs: &[(f64, f64)], tags: &[Tag]) -> Result<Self> {
        if tags.len() != pairs.len() {
            return Err(Error::ClassificationLength {
                tags: tags.len(),
                intervals: pairs.len(),
            });
        }
        let merged = normalize(pairs)?;
        let mut out_tags = Vec::with_capacity(merged.len());
        for (iv, members) in &merged {
            let t = tags[members[0]];
            if members.iter().any(|&k| tags[k] != t) {
                return Err(Error::InvalidParameter(format!(
                    "touching intervals with different tags merge into ({}, {})",
                    iv.a, iv.b
                )));
            }
            out_tags.push(t);
        }
        Ok(Domain1D {
            intervals: merged.into_iter().map(|(iv, _)| iv).collect(),
            tags: Some(out_tags),
        })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn tags(&self) -> Option<&[Tag]> {
        self.tags.as_deref()
    }

    /// Replaces the classification.
    pub fn tagged(mut self, tags: Vec<Tag>) -> Result<Self> {
        if tags.len() != self.intervals.len() {
            return Err(Error::ClassificationLength {
                tags: tags.len(),
                intervals: self.intervals.len(),
            });
        }
        self.tags = Some(tags);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Smallest closed interval containing the domain.
    pub fn hull(&self) -> (f64, f64) {
        (self.intervals[0].a, self.intervals[self.intervals.len() - 1].b)
    }

    pub fn diameter(&self) -> f64 {
        let (a, b) = self.hull();
        b - a
    }

    pub fn shortest(&self) -> f64 {
        self.intervals.iter().map(Interval::len).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.find(x).is_some()
    }

    /// Index of the interval containing `x`.
    pub fn find(&self, x: f64) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.contains(x))
    }

    /// Distance to the closed domain (0 inside).
    pub fn dist(&self, x: f64) -> f64 {
        self.intervals.iter().map(|iv| iv.dist(x)).fold(f64::INFINITY, f64::min)
    }

    /// Open gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].b, w[1].a)).collect()
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {s}")));
        }
        Ok(Domain1D {
            intervals: self.intervals.iter().map(|iv| Interval { a: iv.a * s, b: iv.b * s }).collect(),
            tags: self.tags.clone(),
        })
    }

    pub fn translate(&self, t: f64) -> Self {
        Domain1D {
            intervals: self.intervals.iter().map(|iv| Interval { a: iv.a + t, b: iv.b + t }).collect(),
            tags: self.tags.clone(),
        }
    }

    /// Partition into the `Minus` and `Plus` parts. The plus part may be
    /// empty, in which case it is returned as `None`.
    pub fn split(&self) -> Result<(Domain1D, Option<Domain1D>)> {
        let tags = self.tags.as_ref().ok_or(Error::MissingClassification)?;
        let pick = |want: Tag| -> Vec<Interval> {
            self.intervals
                .iter()
                .zip(tags)
                .filter(|(_, &t)| t == want)
                .map(|(iv, _)| *iv)
                .collect()
        };
        let minus = pick(Tag::Minus);
        let plus = pick(Tag::Plus);
        if minus.is_empty() {
            return Err(Error::EmptyMinus);
        }
        let plus = if plus.is_empty() {
            None
        } else {
            Some(Domain1D { intervals: plus, tags: None })
        };
        Ok((Domain1D { intervals: minus, tags: None }, plus))
    }

    /// Geometric diagnostics for the cluster hypotheses: smallest distance
    /// from any Plus interval to the Minus set, smallest distance between two
    /// Plus intervals, largest Plus interval radius.
    pub fn diagnostics(&self) -> Result<Diagnostics> {
        let (minus, plus) = self.split()?;
        let Some(plus) = plus else {
            return Ok(Diagnostics {
                plus_to_minus: f64::INFINITY,
                plus_separation: f64::INFINITY,
                plus_radius: 0.0,
                interior_radius: 0.5 * self.shortest(),
            });
        };
        let mut plus_to_minus = f64::INFINITY;
        for p in plus.intervals() {
            for m in minus.intervals() {
                let d = (p.a - m.b).max(m.a - p.b);
                plus_to_minus = plus_to_minus.min(d);
            }
        }
        let plus_separation = plus
            .gaps()
            .iter()
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min);
        let plus_radius = plus.intervals().iter().map(|iv| 0.5 * iv.len()).fold(0.0, f64::max);
        Ok(Diagnostics {
            plus_to_minus,
            plus_separation,
            plus_radius,
            interior_radius: 0.5 * self.shortest(),
        })
    }
}

/// See [`Domain1D::diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub plus_to_minus: f64,
    pub plus_separation: f64,
    pub plus_radius: f64,
    /// Largest radius of a ball that fits inside every component.
    pub interior_radius: f64,
}

/// Distance to the boundary inside the domain, 0 outside.
pub fn delta(d: &Domain1D, x: f64) -> f64 {
    match d.find(x) {
        Some(k) => {
            let iv = d.intervals[k];
            (x - iv.a).min(iv.b - x)
        }
        None => 0.0,
    }
}
