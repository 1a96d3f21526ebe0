//! Measurable subsets of the sphere built from caps and latitude bands,
//! closed under union, intersection, complement and the antipodal map.
//!
//! Membership is exact tree evaluation with closed boundaries (x . v >= t0
//! keeps x). Measures come in two modes: an analytic latitude integral when
//! every primitive shares one axis, reducing the tree to disjoint latitude
//! intervals, and chunked Monte Carlo otherwise.

use crate::error::{Error, Result};
use crate::geometry::UnitVector;
use crate::mc::{fold_chunks, wilson_interval, Tally, DEFAULT_CHUNK};
use crate::stream::RandomStream;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Cap { axis: UnitVector, t0: f64 },
    Band { axis: UnitVector, a: f64, b: f64 },
    Union { terms: Vec<Region> },
    Intersection { terms: Vec<Region> },
    Complement { of: Box<Region> },
    Antipode { of: Box<Region> },
}

impl Region {
    pub fn cap(axis: UnitVector, t0: f64) -> Self {
        Region::Cap { axis, t0 }
    }

    pub fn band(axis: UnitVector, a: f64, b: f64) -> Self {
        Region::Band { axis, a, b }
    }

    pub fn union(terms: Vec<Region>) -> Self {
        Region::Union { terms }
    }

    pub fn intersection(terms: Vec<Region>) -> Self {
        Region::Intersection { terms }
    }

    pub fn complement(self) -> Self {
        Region::Complement { of: Box::new(self) }
    }

    pub fn antipode(self) -> Self {
        Region::Antipode { of: Box::new(self) }
    }

    /// The empty set, as the union of no terms.
    pub fn empty() -> Self {
        Region::Union { terms: vec![] }
    }

    /// The full sphere, as the complement of the empty set. Contains no
    /// primitive, so it is valid in every ambient dimension.
    pub fn full() -> Self {
        Region::empty().complement()
    }

    /// Thresholds are latitudes and every axis must live in S^{n-1}.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Region::Cap { axis, t0 } => {
                check_axis(axis, n)?;
                check_threshold("t0", *t0)
            }
            Region::Band { axis, a, b } => {
                check_axis(axis, n)?;
                check_threshold("a", *a)?;
                check_threshold("b", *b)?;
                if a > b {
                    return Err(Error::InvalidConfiguration(format!(
                        "band needs a <= b, got a = {a}, b = {b}"
                    )));
                }
                Ok(())
            }
            Region::Union { terms } | Region::Intersection { terms } => {
                terms.iter().try_for_each(|t| t.validate(n))
            }
            Region::Complement { of } | Region::Antipode { of } => of.validate(n),
        }
    }

    /// Exact membership by tree evaluation; thresholds compare directly.
    pub fn contains(&self, x: &UnitVector) -> Result<bool> {
        match self {
            Region::Cap { axis, t0 } => {
                check_dims(axis, x)?;
                Ok(axis.dot(x) >= *t0)
            }
            Region::Band { axis, a, b } => {
                check_dims(axis, x)?;
                let t = axis.dot(x);
                Ok(*a <= t && t <= *b)
            }
            Region::Union { terms } => {
                for t in terms {
                    if t.contains(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Region::Intersection { terms } => {
                for t in terms {
                    if !t.contains(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Region::Complement { of } => Ok(!of.contains(x)?),
            Region::Antipode { of } => of.contains(&x.antipode()),
        }
    }

    /// The single axis shared by every primitive, if there is one. Regions
    /// without primitives (empty, full) are axis-free and report None inside
    /// Ok. Axes must match bitwise; programmatically shared axes do.
    fn shared_axis(&self) -> Result<Option<&UnitVector>> {
        fn walk<'a>(region: &'a Region, found: &mut Option<&'a UnitVector>) -> Result<()> {
            match region {
                Region::Cap { axis, .. } | Region::Band { axis, .. } => match found {
                    None => {
                        *found = Some(axis);
                        Ok(())
                    }
                    Some(prev) if prev.coords() == axis.coords() => Ok(()),
                    Some(_) => Err(Error::AnalyticMeasureUnavailable),
                },
                Region::Union { terms } | Region::Intersection { terms } => {
                    terms.iter().try_for_each(|t| walk(t, found))
                }
                Region::Complement { of } | Region::Antipode { of } => walk(of, found),
            }
        }
        let mut found = None;
        walk(self, &mut found)?;
        Ok(found)
    }

    /// Latitude intervals occupied by the region around its shared axis.
    fn to_intervals(&self) -> IntervalSet {
        match self {
            Region::Cap { t0, .. } => IntervalSet::segment(*t0, 1.0),
            Region::Band { a, b, .. } => IntervalSet::segment(*a, *b),
            Region::Union { terms } => terms
                .iter()
                .map(Region::to_intervals)
                .fold(IntervalSet::empty(), IntervalSet::union),
            Region::Intersection { terms } => terms
                .iter()
                .map(Region::to_intervals)
                .fold(IntervalSet::full(), IntervalSet::intersection),
            Region::Complement { of } => of.to_intervals().complement(),
            Region::Antipode { of } => of.to_intervals().negate(),
        }
    }
}

fn check_axis(axis: &UnitVector, n: usize) -> Result<()> {
    if axis.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: axis.dim(),
        });
    }
    Ok(())
}

fn check_dims(axis: &UnitVector, x: &UnitVector) -> Result<()> {
    if axis.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: axis.dim(),
            got: x.dim(),
        });
    }
    Ok(())
}

fn check_threshold(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[-1, 1]",
        });
    }
    Ok(())
}

/// Sorted disjoint closed subintervals of [-1, 1]. Endpoint touching is
/// merged; single points carry no measure so the closedness is cosmetic.
#[derive(Clone, Debug, PartialEq)]
struct IntervalSet {
    spans: Vec<(f64, f64)>,
}

impl IntervalSet {
    fn empty() -> Self {
        Self { spans: vec![] }
    }

    fn full() -> Self {
        Self {
            spans: vec![(-1.0, 1.0)],
        }
    }

    fn segment(lo: f64, hi: f64) -> Self {
        let lo = lo.max(-1.0);
        let hi = hi.min(1.0);
        if lo > hi {
            Self::empty()
        } else {
            Self { spans: vec![(lo, hi)] }
        }
    }

    fn normalize(mut spans: Vec<(f64, f64)>) -> Self {
        spans.retain(|(l, h)| l <= h);
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (l, h) in spans {
            match out.last_mut() {
                Some(prev) if l <= prev.1 => prev.1 = prev.1.max(h),
                _ => out.push((l, h)),
            }
        }
        Self { spans: out }
    }

    fn union(self, other: Self) -> Self {
        let mut spans = self.spans;
        spans.extend(other.spans);
        Self::normalize(spans)
    }

    fn intersection(self, other: Self) -> Self {
        let mut spans = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.spans.len() && j < other.spans.len() {
            let (al, ah) = self.spans[i];
            let (bl, bh) = other.spans[j];
            let lo = al.max(bl);
            let hi = ah.min(bh);
            if lo <= hi {
                spans.push((lo, hi));
            }
            if ah < bh {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { spans }
    }

    fn complement(self) -> Self {
        let mut spans = Vec::with_capacity(self.spans.len() + 1);
        let mut cursor = -1.0;
        for (l, h) in &self.spans {
            if *l > cursor {
                spans.push((cursor, *l));
            }
            cursor = cursor.max(*h);
        }
        if cursor < 1.0 {
            spans.push((cursor, 1.0));
        }
        Self { spans }
    }

    fn negate(self) -> Self {
        let mut spans: Vec<(f64, f64)> = self.spans.into_iter().map(|(l, h)| (-h, -l)).collect();
        spans.reverse();
        Self { spans }
    }

    fn measure(&self, n: usize) -> Result<f64> {
        let mut total = 0.0;
        for (l, h) in &self.spans {
            total += cap_measure(n, *l)? - cap_measure(n, *h)?;
        }
        Ok(total.clamp(0.0, 1.0))
    }
}

/// sigma({x : x . v >= t0}) through the regularized incomplete beta
/// function; exact 0, 1/2, 1 at the pinned latitudes.
pub fn cap_measure(n: usize, t0: f64) -> Result<f64> {
    if n < crate::geometry::MIN_DIMENSION {
        return Err(Error::DimensionTooSmall(n));
    }
    check_threshold("t0", t0)?;
    if t0 == -1.0 {
        return Ok(1.0);
    }
    if t0 == 1.0 {
        return Ok(0.0);
    }
    if t0 < 0.0 {
        return Ok(1.0 - cap_measure(n, -t0)?);
    }
    let a = (n as f64 - 1.0) / 2.0;
    Ok(0.5 * beta_reg(a, 0.5, 1.0 - t0 * t0))
}

/// sigma({x : x . v <= t}), the latitude distribution function.
pub fn latitude_cdf(n: usize, t: f64) -> Result<f64> {
    Ok(1.0 - cap_measure(n, t)?)
}

/// Cap threshold realizing a given measure, by bisection on the strictly
/// decreasing map t0 -> cap_measure(n, t0).
pub fn find_threshold_for_measure(n: usize, target: f64) -> Result<f64> {
    if n < crate::geometry::MIN_DIMENSION {
        return Err(Error::DimensionTooSmall(n));
    }
    if !target.is_finite() || target <= 0.0 || target >= 1.0 {
        return Err(Error::OutOfRange {
            name: "target",
            value: target,
            range: "(0, 1)",
        });
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        let m = cap_measure(n, mid)?;
        if (m - target).abs() <= 1e-10 || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if m > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Latitudes cutting the sphere into `count` slabs of equal measure,
/// returned ascending including the endpoints -1 and 1.
pub fn equal_measure_thresholds(n: usize, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidConfiguration(
            "partition needs at least one slab".into(),
        ));
    }
    let mut cuts = Vec::with_capacity(count + 1);
    cuts.push(-1.0);
    for j in 1..count {
        cuts.push(find_threshold_for_measure(n, 1.0 - j as f64 / count as f64)?);
    }
    cuts.push(1.0);
    Ok(cuts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub method: MeasureMethod,
    /// 0 for analytic values; the Wilson 95% half-width for Monte Carlo.
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug)]
pub enum MeasureMode {
    Analytic,
    MonteCarlo { samples: u64, stream: RandomStream },
}

/// Exact measure for single-axis regions via the latitude reduction.
pub fn measure_analytic(region: &Region, n: usize) -> Result<MeasureResult> {
    region.validate(n)?;
    region.shared_axis()?;
    let value = region.to_intervals().measure(n)?;
    Ok(MeasureResult {
        value,
        method: MeasureMethod::Analytic,
        std_error: 0.0,
    })
}

/// Monte Carlo measure with deterministic chunking; works for any region.
pub fn measure_mc(
    region: &Region,
    n: usize,
    samples: u64,
    stream: &RandomStream,
) -> Result<MeasureResult> {
    region.validate(n)?;
    if samples == 0 {
        return Err(Error::SampleBudget { got: 0, min: 1 });
    }
    let tally = fold_chunks(
        stream,
        samples,
        DEFAULT_CHUNK,
        |count, rng| {
            let mut tally = Tally::default();
            for _ in 0..count {
                let x = crate::geometry::sample_uniform(n, rng).expect("dimension validated");
                tally.push(region.contains(&x).expect("region validated"));
            }
            tally
        },
        Tally::merge,
        Tally::default(),
    );
    let (lo, hi) = wilson_interval(tally.hits, tally.trials, 0.95);
    Ok(MeasureResult {
        value: tally.rate(),
        method: MeasureMethod::MonteCarlo,
        std_error: 0.5 * (hi - lo),
    })
}

pub fn measure(region: &Region, n: usize, mode: MeasureMode) -> Result<MeasureResult> {
    match mode {
        MeasureMode::Analytic => measure_analytic(region, n),
        MeasureMode::MonteCarlo { samples, stream } => measure_mc(region, n, samples, &stream),
    }
}
