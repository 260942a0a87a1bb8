use super::describe::Descriptor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub query: usize,
    pub reference: usize,
    /// Nearest over second-nearest distance.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub pairs: Vec<Match>,
    pub detected_query: usize,
    pub detected_ref: usize,
}

impl MatchSet {
    pub fn matched(&self) -> usize {
        self.pairs.len()
    }
}

fn dist2(a: &Descriptor, b: &Descriptor) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Two nearest references of `q`: `(index, d1^2, d2^2)`.
fn nearest_two(q: &Descriptor, refs: &[Descriptor]) -> (usize, f32, f32) {
    let (mut best, mut d1, mut d2) = (0, f32::INFINITY, f32::INFINITY);
    for (j, r) in refs.iter().enumerate() {
        let d = dist2(q, r);
        if d < d1 {
            d2 = d1;
            d1 = d;
            best = j;
        } else if d < d2 {
            d2 = d;
        }
    }
    (best, d1, d2)
}

/// Lowe's ratio test: keep `q -> nearest` iff `d1 < ratio * d2`.
/// With `cross_check`, also require `q` to be the nearest query of its match.
pub fn match_ratio(query: &[Descriptor], reference: &[Descriptor], ratio: f64, cross_check: bool) -> Result<MatchSet> {
    if query.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput("descriptor set"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!("ratio {ratio} must be in (0, 1]")));
    }
    let mut pairs = Vec::new();
    for (i, q) in query.iter().enumerate() {
        let (j, d1, d2) = nearest_two(q, reference);
        let (d1, d2) = ((d1 as f64).sqrt(), (d2 as f64).sqrt());
        // a single reference has no second neighbour and cannot pass
        if !(d1 < ratio * d2) {
            continue;
        }
        if cross_check && nearest_two(&reference[j], query).0 != i {
            continue;
        }
        pairs.push(Match {
            query: i,
            reference: j,
            ratio: if d2 > 0.0 { d1 / d2 } else { 0.0 },
        });
    }
    Ok(MatchSet {
        pairs,
        detected_query: query.len(),
        detected_ref: reference.len(),
    })
}
