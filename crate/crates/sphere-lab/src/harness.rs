//! Monte Carlo experiments over the lower layers: correlated-pair densities,
//! good-vector mass, orthogonal-slice concentration, tuple containment,
//! reverse hypercontractivity margins, and a coloring demo.
//!
//! Every experiment is described by a serializable [`ExperimentSpec`] and
//! produces an [`ExperimentReport`] that echoes its inputs, so a report alone
//! is enough to rerun the experiment. Reference quantities appear as
//! [`BoundValue`] rows keyed by a stable formula id, and hard pass/fail
//! entries are reserved for constant-free statements; everything with an
//! unknown dimension-dependent slack is reported as a ratio or margin only.

use crate::constants::{check_diameter_condition, derived_constants};
use crate::error::{Error, Result};
use crate::geometry::{sample_configuration, sample_uniform, sample_subsphere, InductiveConfiguration};
use crate::mc::{fold_chunks, proportion_estimate, ProportionEstimate, Tally, NESTED_CHUNK};
use crate::regions::{measure_analytic, measure_mc, MeasureResult, Region};
use crate::stream::RandomStream;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::time::{Duration, Instant};

/// Smallest accepted outer sample budget.
pub const MIN_SAMPLES: u64 = 1_000;
/// Smallest accepted nested (per-point subsphere) budget.
pub const MIN_SUBSPHERE_SAMPLES: u64 = 100;
/// Relative deviation that marks a slice measure as exceptional in the
/// concentration experiment.
pub const CONCENTRATION_TOLERANCE: f64 = 0.1;

/// Chunk length for flat experiments; small enough that default budgets
/// still split across workers.
const FLAT_CHUNK: u64 = 1 << 10;

// Substream indices per experiment seed. Fixed so that reports are
// reproducible and the component estimates are independent.
const MAIN_STREAM: u64 = 0;
const MEASURE_A_STREAM: u64 = 1;
const MEASURE_B_STREAM: u64 = 2;
const PARTITION_STREAM: u64 = 3;

fn default_samples() -> u64 {
    10_000
}

fn default_subsphere_samples() -> u64 {
    10_000
}

fn default_confidence() -> f64 {
    0.95
}

/// The experiment-specific part of a spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Pr(x in A, y in B) for x uniform and y uniform on the slice x·y = r.
    PairwiseDensity { a: Region, b: Region, r: f64 },
    /// Mass of the subset of A whose slice density stays above the
    /// half-power threshold.
    GoodSetMass {
        a: Region,
        r: f64,
        #[serde(default = "default_subsphere_samples")]
        subsphere_samples: u64,
    },
    /// Fraction of points whose orthogonal slice sees a measure of A far
    /// from the global value.
    OrthogonalConcentration {
        a: Region,
        #[serde(default = "default_subsphere_samples")]
        subsphere_samples: u64,
    },
    /// Pr(every point of a prescribed-Gram tuple lands in A).
    TupleContainment {
        a: Region,
        config: InductiveConfiguration,
    },
    /// Margin of the correlated-pair density over the product of p-norms at
    /// p = 1 - |r|.
    ReverseHcCheck { f: Region, g: Region, r: f64 },
    /// Monochromatic tuple frequencies for a coloring of the sphere.
    RamseyColoringDemo {
        colors: Vec<Region>,
        config: InductiveConfiguration,
    },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PairwiseDensity { .. } => "pairwise_density",
            ExperimentKind::GoodSetMass { .. } => "good_set_mass",
            ExperimentKind::OrthogonalConcentration { .. } => "orthogonal_concentration",
            ExperimentKind::TupleContainment { .. } => "tuple_containment",
            ExperimentKind::ReverseHcCheck { .. } => "reverse_hc_check",
            ExperimentKind::RamseyColoringDemo { .. } => "ramsey_coloring_demo",
        }
    }
}

/// Full description of one experiment run. Serializes flat: the kind's tag
/// and fields sit next to `n`, `samples`, `seed`, `confidence`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: ExperimentKind,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::SampleBudget {
                got: self.samples,
                min: MIN_SAMPLES,
            });
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::OutOfRange {
                name: "confidence",
                value: self.confidence,
                range: "(0, 1)",
            });
        }
        let check_r = |r: f64| -> Result<()> {
            if !(r > -1.0 && r < 1.0) {
                return Err(Error::OutOfRange {
                    name: "r",
                    value: r,
                    range: "(-1, 1)",
                });
            }
            Ok(())
        };
        let check_subsphere = |s: u64| -> Result<()> {
            if s < MIN_SUBSPHERE_SAMPLES {
                return Err(Error::SampleBudget {
                    got: s,
                    min: MIN_SUBSPHERE_SAMPLES,
                });
            }
            Ok(())
        };
        let check_config = |config: &InductiveConfiguration| -> Result<()> {
            if config.k() > self.n {
                return Err(Error::TooManyPoints {
                    points: config.k(),
                    dim: self.n,
                });
            }
            Ok(())
        };
        match &self.kind {
            ExperimentKind::PairwiseDensity { a, b, r } => {
                a.validate(self.n)?;
                b.validate(self.n)?;
                check_r(*r)?;
            }
            ExperimentKind::GoodSetMass {
                a,
                r,
                subsphere_samples,
            } => {
                a.validate(self.n)?;
                check_r(*r)?;
                check_subsphere(*subsphere_samples)?;
            }
            ExperimentKind::OrthogonalConcentration {
                a,
                subsphere_samples,
            } => {
                a.validate(self.n)?;
                check_subsphere(*subsphere_samples)?;
            }
            ExperimentKind::TupleContainment { a, config } => {
                a.validate(self.n)?;
                check_config(config)?;
                let check = check_diameter_condition(config);
                if !check.satisfied {
                    return Err(Error::DiameterCondition(check.reason));
                }
            }
            ExperimentKind::ReverseHcCheck { f, g, r } => {
                f.validate(self.n)?;
                g.validate(self.n)?;
                check_r(*r)?;
            }
            ExperimentKind::RamseyColoringDemo { colors, config } => {
                if colors.is_empty() {
                    return Err(Error::InvalidSpec(
                        "a coloring needs at least one color".into(),
                    ));
                }
                for c in colors {
                    c.validate(self.n)?;
                }
                check_config(config)?;
            }
        }
        Ok(())
    }
}

/// A reference quantity computed from the inputs, tagged with the id of the
/// producing formula so it can be recomputed independently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub id: String,
    pub value: f64,
    pub description: String,
}

/// One hard pass/fail check inside a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionCheck {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of one experiment. `runtime` is measured wall clock and is
/// excluded from serialization so that serialized reports are byte-identical
/// across reruns of the same spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub std_error: f64,
    pub interval_method: String,
    pub bounds: Vec<BoundValue>,
    pub criteria: Vec<CriterionCheck>,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub runtime: Duration,
}

impl ExperimentReport {
    /// True when every hard criterion in the report passed.
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn bound(&self, id: &str) -> Option<&BoundValue> {
        self.bounds.iter().find(|b| b.id == id)
    }

    /// Flat row matching [`csv_header`]; bound entries are packed as
    /// semicolon-separated id=value pairs to keep the column count fixed.
    pub fn csv_row(&self) -> String {
        let bounds = self
            .bounds
            .iter()
            .map(|b| format!("{}={}", b.id, b.value))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.spec.kind.name(),
            self.spec.n,
            self.spec.samples,
            self.spec.seed,
            self.estimate,
            self.ci_low,
            self.ci_high,
            self.std_error,
            bounds
        )
    }
}

pub fn csv_header() -> &'static str {
    "experiment,n,samples,seed,estimate,ci_low,ci_high,std_error,bounds"
}

/// Measure a region analytically when a shared axis allows it, otherwise by
/// Monte Carlo on the given stream.
fn measure_auto(
    region: &Region,
    n: usize,
    samples: u64,
    stream: &RandomStream,
) -> Result<MeasureResult> {
    match measure_analytic(region, n) {
        Ok(m) => Ok(m),
        Err(Error::AnalyticMeasureUnavailable) => measure_mc(region, n, samples, stream),
        Err(e) => Err(e),
    }
}

/// Tally of x in A and y in B over draws with x uniform and x·y = r. The
/// slice draw is skipped when x already missed A; the skip changes where
/// later draws fall in the substream but not the estimator.
fn pair_tally(a: &Region, b: &Region, r: f64, n: usize, samples: u64, stream: &RandomStream) -> Tally {
    fold_chunks(
        stream,
        samples,
        FLAT_CHUNK,
        |count, rng| {
            let mut tally = Tally::default();
            for _ in 0..count {
                let x = sample_uniform(n, rng).expect("dimension validated");
                let hit = if a.contains(&x).expect("region validated") {
                    let y = sample_subsphere(&x, r, rng).expect("latitude validated");
                    b.contains(&y).expect("region validated")
                } else {
                    false
                };
                tally.push(hit);
            }
            tally
        },
        Tally::merge,
        Tally::default(),
    )
}

fn report_skeleton(
    spec: &ExperimentSpec,
    prop: ProportionEstimate,
) -> ExperimentReport {
    ExperimentReport {
        spec: spec.clone(),
        estimate: prop.estimate,
        ci_low: prop.lo,
        ci_high: prop.hi,
        std_error: prop.std_error,
        interval_method: prop.method.to_string(),
        bounds: vec![],
        criteria: vec![],
        details: serde_json::Value::Null,
        runtime: Duration::ZERO,
    }
}

fn run_pairwise_density(
    spec: &ExperimentSpec,
    a: &Region,
    b: &Region,
    r: f64,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let sig_a = measure_auto(a, spec.n, spec.samples, &base.substream(MEASURE_A_STREAM))?;
    let sig_b = measure_auto(b, spec.n, spec.samples, &base.substream(MEASURE_B_STREAM))?;
    let tally = pair_tally(a, b, r, spec.n, spec.samples, &base.substream(MAIN_STREAM));
    let prop = proportion_estimate(tally, spec.confidence);
    let mut report = report_skeleton(spec, prop);
    let power = 1.0 / (1.0 - r.abs());
    report.bounds.push(BoundValue {
        id: "pair_product_power".into(),
        value: (sig_a.value * sig_b.value).powf(power),
        description: format!("(sigma(A)*sigma(B))^(1/(1-|r|)) at |r| = {}", r.abs()),
    });
    if r == 0.0 && a == b {
        let nine_tenths = 0.9 * sig_a.value * sig_b.value;
        report.bounds.push(BoundValue {
            id: "orthogonal_pair_nine_tenths".into(),
            value: nine_tenths,
            description: "0.9*sigma(A)^2 for an identical exactly-orthogonal pair".into(),
        });
        report.criteria.push(CriterionCheck {
            id: "orthogonal_pair_lower_ci".into(),
            passed: prop.lo >= nine_tenths,
            detail: format!(
                "lower CI end {} against 0.9*sigma(A)^2 = {nine_tenths}",
                prop.lo
            ),
        });
    }
    report.details = json!({
        "r": r,
        "sigma_a": sig_a.value,
        "sigma_a_method": sig_a.method,
        "sigma_b": sig_b.value,
        "sigma_b_method": sig_b.method,
    });
    Ok(report)
}

fn run_good_set_mass(
    spec: &ExperimentSpec,
    a: &Region,
    r: f64,
    subsphere_samples: u64,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let sig_a = measure_auto(a, spec.n, spec.samples, &base.substream(MEASURE_A_STREAM))?;
    if sig_a.value <= 0.0 {
        return Err(Error::InvalidSpec(
            "good-set mass needs a region of positive measure".into(),
        ));
    }
    let abs_r = r.abs();
    let threshold = 0.5 * sig_a.value.powf((1.0 + abs_r) / (1.0 - abs_r));
    let floor = 0.5 * sig_a.value.powf(2.0 / (1.0 - abs_r));
    let n = spec.n;
    let (good, in_a) = fold_chunks(
        &base.substream(MAIN_STREAM),
        spec.samples,
        NESTED_CHUNK,
        |count, rng| {
            let mut good = Tally::default();
            let mut in_a = Tally::default();
            for _ in 0..count {
                let x = sample_uniform(n, rng).expect("dimension validated");
                let member = a.contains(&x).expect("region validated");
                in_a.push(member);
                let is_good = if member {
                    let mut slice = Tally::default();
                    for _ in 0..subsphere_samples {
                        let y = sample_subsphere(&x, r, rng).expect("latitude validated");
                        slice.push(a.contains(&y).expect("region validated"));
                    }
                    slice.rate() >= threshold
                } else {
                    false
                };
                good.push(member && is_good);
            }
            (good, in_a)
        },
        |(g1, a1), (g2, a2)| (Tally::merge(g1, g2), Tally::merge(a1, a2)),
        (Tally::default(), Tally::default()),
    );
    let prop = proportion_estimate(good, spec.confidence);
    let mut report = report_skeleton(spec, prop);
    report.bounds.push(BoundValue {
        id: "good_mass_floor".into(),
        value: floor,
        description: "sigma(A)^(2/(1-|r|))/2, the good-set mass reference".into(),
    });
    report.bounds.push(BoundValue {
        id: "good_threshold".into(),
        value: threshold,
        description: "sigma(A)^((1+|r|)/(1-|r|))/2, the slice-density cutoff for a good point"
            .into(),
    });
    let fraction_good = if in_a.hits > 0 {
        good.hits as f64 / in_a.hits as f64
    } else {
        0.0
    };
    report.details = json!({
        "r": r,
        "sigma_a": sig_a.value,
        "sigma_a_method": sig_a.method,
        "subsphere_samples": subsphere_samples,
        "points_in_a": in_a.hits,
        "fraction_of_a_good": fraction_good,
        "ratio_to_floor": if floor > 0.0 { prop.estimate / floor } else { f64::NAN },
    });
    Ok(report)
}

fn run_orthogonal_concentration(
    spec: &ExperimentSpec,
    a: &Region,
    subsphere_samples: u64,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let sig_a = measure_auto(a, spec.n, spec.samples, &base.substream(MEASURE_A_STREAM))?;
    if sig_a.value <= 0.0 {
        return Err(Error::InvalidSpec(
            "concentration needs a region of positive measure".into(),
        ));
    }
    let n = spec.n;
    let sigma = sig_a.value;
    let tally = fold_chunks(
        &base.substream(MAIN_STREAM),
        spec.samples,
        NESTED_CHUNK,
        |count, rng| {
            let mut tally = Tally::default();
            for _ in 0..count {
                let x = sample_uniform(n, rng).expect("dimension validated");
                let mut slice = Tally::default();
                for _ in 0..subsphere_samples {
                    let y = sample_subsphere(&x, 0.0, rng).expect("latitude validated");
                    slice.push(a.contains(&y).expect("region validated"));
                }
                let exceptional = (slice.rate() / sigma - 1.0).abs() > CONCENTRATION_TOLERANCE;
                tally.push(exceptional);
            }
            tally
        },
        Tally::merge,
        Tally::default(),
    );
    let prop = proportion_estimate(tally, spec.confidence);
    let mut report = report_skeleton(spec, prop);
    report.details = json!({
        "sigma_a": sig_a.value,
        "sigma_a_method": sig_a.method,
        "subsphere_samples": subsphere_samples,
        "ratio_tolerance": CONCENTRATION_TOLERANCE,
    });
    Ok(report)
}

fn run_tuple_containment(
    spec: &ExperimentSpec,
    a: &Region,
    config: &InductiveConfiguration,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let gram = config.gram()?;
    let constants = derived_constants(config);
    let c_r = constants
        .c_r
        .expect("diameter condition checked during validation");
    let sig_a = measure_auto(a, spec.n, spec.samples, &base.substream(MEASURE_A_STREAM))?;
    let n = spec.n;
    let tally = fold_chunks(
        &base.substream(MAIN_STREAM),
        spec.samples,
        NESTED_CHUNK,
        |count, rng| {
            let mut tally = Tally::default();
            for _ in 0..count {
                let points =
                    sample_configuration(n, &gram, rng).expect("configuration validated");
                let all_in = points
                    .iter()
                    .all(|p| a.contains(p).expect("region validated"));
                tally.push(all_in);
            }
            tally
        },
        Tally::merge,
        Tally::default(),
    );
    let prop = proportion_estimate(tally, spec.confidence);
    let mut report = report_skeleton(spec, prop);
    let power_reference = sig_a.value.powf(c_r);
    report.bounds.push(BoundValue {
        id: "containment_power_reference".into(),
        value: power_reference,
        description: "sigma(A)^C_R, the constant-free reference shape".into(),
    });
    let k = config.k();
    if config.r_values().iter().all(|&r| r == 0.0) {
        report.bounds.push(BoundValue {
            id: "orthogonal_product_reference".into(),
            value: sig_a.value.powi(k as i32),
            description: "sigma(A)^k, the product shape for the orthogonal tuple".into(),
        });
    }
    report.details = json!({
        "k": k,
        "sigma_a": sig_a.value,
        "sigma_a_method": sig_a.method,
        "constants": constants,
        "ratio_to_power_reference":
            if power_reference > 0.0 { prop.estimate / power_reference } else { f64::NAN },
    });
    Ok(report)
}

fn run_reverse_hc_check(
    spec: &ExperimentSpec,
    f: &Region,
    g: &Region,
    r: f64,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let sig_f = measure_auto(f, spec.n, spec.samples, &base.substream(MEASURE_A_STREAM))?;
    let sig_g = measure_auto(g, spec.n, spec.samples, &base.substream(MEASURE_B_STREAM))?;
    let tally = pair_tally(f, g, r, spec.n, spec.samples, &base.substream(MAIN_STREAM));
    let prop = proportion_estimate(tally, spec.confidence);
    let mut report = report_skeleton(spec, prop);
    let p = 1.0 - r.abs();
    let product_norm = (sig_f.value * sig_g.value).powf(1.0 / p);
    let margin = prop.estimate - product_norm;
    report.bounds.push(BoundValue {
        id: "reverse_hc_product_norm".into(),
        value: product_norm,
        description: format!("(sigma(F)*sigma(G))^(1/p) at p = 1-|r| = {p}"),
    });
    report.details = json!({
        "r": r,
        "p": p,
        "sigma_f": sig_f.value,
        "sigma_f_method": sig_f.method,
        "sigma_g": sig_g.value,
        "sigma_g_method": sig_g.method,
        "margin": margin,
    });
    Ok(report)
}

fn run_ramsey_coloring(
    spec: &ExperimentSpec,
    colors: &[Region],
    config: &InductiveConfiguration,
) -> Result<ExperimentReport> {
    let base = RandomStream::new(spec.seed);
    let gram = config.gram()?;
    let n = spec.n;

    // Partition pre-check: overlap and miss rates must both be statistically
    // indistinguishable from zero.
    let (overlap, miss) = fold_chunks(
        &base.substream(PARTITION_STREAM),
        spec.samples,
        FLAT_CHUNK,
        |count, rng| {
            let mut overlap = Tally::default();
            let mut miss = Tally::default();
            for _ in 0..count {
                let x = sample_uniform(n, rng).expect("dimension validated");
                let cover = colors
                    .iter()
                    .filter(|c| c.contains(&x).expect("region validated"))
                    .count();
                overlap.push(cover >= 2);
                miss.push(cover == 0);
            }
            (overlap, miss)
        },
        |(o1, m1), (o2, m2)| (Tally::merge(o1, o2), Tally::merge(m1, m2)),
        (Tally::default(), Tally::default()),
    );
    let overlap_prop = proportion_estimate(overlap, spec.confidence);
    if overlap_prop.estimate > 0.5 * (overlap_prop.hi - overlap_prop.lo) {
        return Err(Error::PartitionCheck(format!(
            "colors overlap: rate {} exceeds its CI half-width",
            overlap_prop.estimate
        )));
    }
    let miss_prop = proportion_estimate(miss, spec.confidence);
    if miss_prop.estimate > 0.5 * (miss_prop.hi - miss_prop.lo) {
        return Err(Error::PartitionCheck(format!(
            "colors do not cover the sphere: miss rate {} exceeds its CI half-width",
            miss_prop.estimate
        )));
    }

    let measure_base = base.substream(MEASURE_A_STREAM);
    let measures: Vec<f64> = colors
        .iter()
        .enumerate()
        .map(|(i, c)| {
            measure_auto(c, n, spec.samples, &measure_base.substream(i as u64)).map(|m| m.value)
        })
        .collect::<Result<_>>()?;

    let zero = vec![0u64; colors.len()];
    let counts = fold_chunks(
        &base.substream(MAIN_STREAM),
        spec.samples,
        NESTED_CHUNK,
        |count, rng| {
            let mut counts = vec![0u64; colors.len()];
            for _ in 0..count {
                let points =
                    sample_configuration(n, &gram, rng).expect("configuration validated");
                for (slot, color) in counts.iter_mut().zip(colors) {
                    if points
                        .iter()
                        .all(|p| color.contains(p).expect("region validated"))
                    {
                        *slot += 1;
                    }
                }
            }
            counts
        },
        |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        zero,
    );
    let mono_total: u64 = counts.iter().sum();
    let prop = proportion_estimate(
        Tally {
            hits: mono_total,
            trials: spec.samples,
        },
        spec.confidence,
    );
    let mut report = report_skeleton(spec, prop);
    let frequencies: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / spec.samples as f64)
        .collect();
    let largest = measures.iter().copied().fold(0.0, f64::max);
    let pigeonhole = 1.0 / colors.len() as f64 - 1e-9;
    if largest >= pigeonhole && check_diameter_condition(config).satisfied {
        report.criteria.push(CriterionCheck {
            id: "monochromatic_hit_exists".into(),
            passed: mono_total > 0,
            detail: format!(
                "largest color has measure {largest} >= 1/{}; {mono_total} monochromatic \
                 tuples in {} draws",
                colors.len(),
                spec.samples
            ),
        });
    }
    report.details = json!({
        "k": config.k(),
        "color_measures": measures,
        "color_frequencies": frequencies,
        "overlap_rate": overlap_prop.estimate,
        "miss_rate": miss_prop.estimate,
    });
    Ok(report)
}

/// Validate and run one experiment.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let mut report = match &spec.kind {
        ExperimentKind::PairwiseDensity { a, b, r } => run_pairwise_density(spec, a, b, *r),
        ExperimentKind::GoodSetMass {
            a,
            r,
            subsphere_samples,
        } => run_good_set_mass(spec, a, *r, *subsphere_samples),
        ExperimentKind::OrthogonalConcentration {
            a,
            subsphere_samples,
        } => run_orthogonal_concentration(spec, a, *subsphere_samples),
        ExperimentKind::TupleContainment { a, config } => {
            run_tuple_containment(spec, a, config)
        }
        ExperimentKind::ReverseHcCheck { f, g, r } => run_reverse_hc_check(spec, f, g, *r),
        ExperimentKind::RamseyColoringDemo { colors, config } => {
            run_ramsey_coloring(spec, colors, config)
        }
    }?;
    report.runtime = start.elapsed();
    Ok(report)
}

pub fn pairwise_density(
    a: Region,
    b: Region,
    r: f64,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::PairwiseDensity { a, b, r },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

pub fn good_set_mass(
    a: Region,
    r: f64,
    n: usize,
    samples: u64,
    subsphere_samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::GoodSetMass {
            a,
            r,
            subsphere_samples,
        },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

pub fn orthogonal_concentration(
    a: Region,
    n: usize,
    samples: u64,
    subsphere_samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::OrthogonalConcentration {
            a,
            subsphere_samples,
        },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

pub fn tuple_containment(
    a: Region,
    config: InductiveConfiguration,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::TupleContainment { a, config },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

pub fn reverse_hc_check(
    f: Region,
    g: Region,
    r: f64,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::ReverseHcCheck { f, g, r },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

pub fn ramsey_coloring_demo(
    colors: Vec<Region>,
    config: InductiveConfiguration,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    run(&ExperimentSpec {
        n,
        kind: ExperimentKind::RamseyColoringDemo { colors, config },
        samples,
        seed,
        confidence: default_confidence(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector;
    use crate::regions::find_threshold_for_measure;

    fn axis(n: usize) -> UnitVector {
        UnitVector::basis(n, 0).unwrap()
    }

    fn cap_with_measure(n: usize, sigma: f64) -> Region {
        let t0 = find_threshold_for_measure(n, sigma).unwrap();
        Region::cap(axis(n), t0)
    }

    #[test]
    fn full_and_empty_pairs_are_exact() {
        let full = pairwise_density(Region::full(), Region::full(), 0.3, 12, 1_000, 7).unwrap();
        assert_eq!(full.estimate, 1.0);
        assert_eq!(full.bound("pair_product_power").unwrap().value, 1.0);
        assert_eq!(full.interval_method, "clopper_pearson_full");
        assert!(full.criteria.is_empty());

        let empty = pairwise_density(Region::empty(), Region::full(), 0.3, 12, 1_000, 7).unwrap();
        assert_eq!(empty.estimate, 0.0);
        assert_eq!(empty.bound("pair_product_power").unwrap().value, 0.0);
        assert_eq!(empty.interval_method, "clopper_pearson_zero");
        assert!(empty.ci_high > 0.0);
    }

    #[test]
    fn identical_orthogonal_pair_gets_the_nine_tenths_row() {
        // A = B and r = 0: the 0.9*sigma^2 row and its hard criterion apply.
        let report =
            pairwise_density(Region::empty(), Region::empty(), 0.0, 10, 1_000, 1).unwrap();
        let row = report.bound("orthogonal_pair_nine_tenths").unwrap();
        assert_eq!(row.value, 0.0);
        assert!(report.passed());
        // Different regions, r = 0: no such row.
        let other =
            pairwise_density(Region::empty(), Region::full(), 0.0, 10, 1_000, 1).unwrap();
        assert!(other.bound("orthogonal_pair_nine_tenths").is_none());
    }

    #[test]
    fn orthogonal_cap_pair_clears_nine_tenths_of_product() {
        let a = cap_with_measure(300, 0.3);
        let report = pairwise_density(a.clone(), a, 0.0, 300, 40_000, 11).unwrap();
        let row = report.bound("orthogonal_pair_nine_tenths").unwrap();
        assert!((row.value - 0.9 * 0.3 * 0.3).abs() < 1e-6);
        assert!(report.passed(), "{:?}", report.criteria);
        assert!(report.ci_low >= row.value);
    }

    #[test]
    fn good_set_of_full_sphere_is_everything() {
        let report = good_set_mass(Region::full(), 0.2, 8, 1_000, 100, 5).unwrap();
        assert_eq!(report.estimate, 1.0);
        assert_eq!(report.details["fraction_of_a_good"], 1.0);
        assert_eq!(report.bound("good_threshold").unwrap().value, 0.5);
        assert_eq!(report.bound("good_mass_floor").unwrap().value, 0.5);
    }

    #[test]
    fn good_set_threshold_echoes_the_formula() {
        let a = cap_with_measure(100, 0.3);
        let sigma = measure_analytic(&a, 100).unwrap().value;
        let r = 0.3;
        let report = good_set_mass(a, r, 100, 1_000, 100, 3).unwrap();
        let threshold = report.bound("good_threshold").unwrap().value;
        let expected = 0.5 * sigma.powf((1.0 + r) / (1.0 - r));
        assert!((threshold - expected).abs() <= 1e-12);
        let floor = report.bound("good_mass_floor").unwrap().value;
        assert!((floor - 0.5 * sigma.powf(2.0 / (1.0 - r))).abs() <= 1e-12);
        assert!((report.details["sigma_a"].as_f64().unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn concentration_of_full_sphere_is_never_exceptional() {
        let report =
            orthogonal_concentration(Region::full(), 10, 1_000, 100, 2).unwrap();
        assert_eq!(report.estimate, 0.0);
        assert_eq!(report.interval_method, "clopper_pearson_zero");
    }

    #[test]
    fn hemisphere_slices_concentrate_hard() {
        // Every orthogonal slice of a hemisphere has measure exactly 1/2, so
        // only inner-loop noise can mark a point exceptional; at 2000 draws a
        // 10% deviation is a 4.5-sigma event.
        let hemisphere = Region::cap(axis(40), 0.0);
        let report = orthogonal_concentration(hemisphere, 40, 1_000, 2_000, 9).unwrap();
        assert!(report.estimate < 0.01, "estimate {}", report.estimate);
    }

    #[test]
    fn tuple_containment_trivial_and_reference_rows() {
        let config = InductiveConfiguration::simplex(3, 0.0).unwrap();
        let full = tuple_containment(Region::full(), config.clone(), 16, 1_000, 4).unwrap();
        assert_eq!(full.estimate, 1.0);
        assert_eq!(full.bound("containment_power_reference").unwrap().value, 1.0);

        let hemi = Region::cap(axis(16), 0.0);
        let report = tuple_containment(hemi, config, 16, 1_000, 4).unwrap();
        let product = report.bound("orthogonal_product_reference").unwrap();
        assert_eq!(product.value, 0.125);
        assert!(report.details["ratio_to_power_reference"].is_number());
        // correlated config: no orthogonal product row
        let tilted = InductiveConfiguration::simplex(3, 0.2).unwrap();
        let tilted_report =
            tuple_containment(Region::full(), tilted, 16, 1_000, 4).unwrap();
        assert!(tilted_report.bound("orthogonal_product_reference").is_none());
    }

    #[test]
    fn tuple_containment_refuses_degenerate_configurations() {
        let config = InductiveConfiguration::simplex(3, -0.5).unwrap();
        let err = tuple_containment(Region::full(), config, 16, 1_000, 4).unwrap_err();
        assert!(matches!(err, Error::DiameterCondition(_)));
    }

    #[test]
    fn reverse_hc_full_sphere_margin_is_exactly_zero() {
        let report =
            reverse_hc_check(Region::full(), Region::full(), 0.4, 10, 1_000, 6).unwrap();
        assert_eq!(report.estimate, 1.0);
        assert_eq!(report.bound("reverse_hc_product_norm").unwrap().value, 1.0);
        assert_eq!(report.details["margin"], 0.0);
        assert_eq!(report.details["p"], 0.6);
    }

    #[test]
    fn one_color_coloring_is_monochromatic() {
        let config = InductiveConfiguration::simplex(2, 0.0).unwrap();
        let report =
            ramsey_coloring_demo(vec![Region::full()], config, 10, 1_000, 8).unwrap();
        assert_eq!(report.estimate, 1.0);
        assert_eq!(report.criteria.len(), 1);
        assert!(report.passed());
    }

    #[test]
    fn hemisphere_coloring_matches_quarter_frequencies() {
        let n = 30;
        let upper = Region::cap(axis(n), 0.0);
        let lower = upper.clone().complement();
        let config = InductiveConfiguration::simplex(2, 0.0).unwrap();
        let report =
            ramsey_coloring_demo(vec![upper, lower], config, n, 4_000, 12).unwrap();
        let freqs = report.details["color_frequencies"].as_array().unwrap();
        for f in freqs {
            let f = f.as_f64().unwrap();
            assert!((f - 0.25).abs() < 0.03, "frequency {f}");
        }
        assert!(report.passed());
        assert_eq!(report.details["overlap_rate"], 0.0);
        assert_eq!(report.details["miss_rate"], 0.0);
    }

    #[test]
    fn broken_partitions_are_rejected() {
        let n = 10;
        let config = InductiveConfiguration::simplex(2, 0.0).unwrap();
        let gap = Region::cap(axis(n), 0.5);
        let err = ramsey_coloring_demo(vec![gap], config.clone(), n, 1_000, 3).unwrap_err();
        assert!(matches!(err, Error::PartitionCheck(_)));
        let overlap =
            ramsey_coloring_demo(vec![Region::full(), Region::full()], config, n, 1_000, 3)
                .unwrap_err();
        assert!(matches!(overlap, Error::PartitionCheck(_)));
    }

    #[test]
    fn spec_validation_rejects_bad_budgets_and_ranges() {
        let spec = ExperimentSpec {
            n: 10,
            kind: ExperimentKind::PairwiseDensity {
                a: Region::full(),
                b: Region::full(),
                r: 0.0,
            },
            samples: 500,
            seed: 0,
            confidence: 0.95,
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::SampleBudget { min: 1000, .. })
        ));
        let mut bad_r = spec.clone();
        bad_r.samples = 1_000;
        bad_r.kind = ExperimentKind::PairwiseDensity {
            a: Region::full(),
            b: Region::full(),
            r: 1.0,
        };
        assert!(matches!(bad_r.validate(), Err(Error::OutOfRange { .. })));
        let mut bad_conf = spec.clone();
        bad_conf.samples = 1_000;
        bad_conf.confidence = 1.0;
        assert!(matches!(bad_conf.validate(), Err(Error::OutOfRange { .. })));
        let nested = ExperimentSpec {
            n: 10,
            kind: ExperimentKind::GoodSetMass {
                a: Region::full(),
                r: 0.0,
                subsphere_samples: 50,
            },
            samples: 1_000,
            seed: 0,
            confidence: 0.95,
        };
        assert!(matches!(
            nested.validate(),
            Err(Error::SampleBudget { min: 100, .. })
        ));
        let crowded = ExperimentSpec {
            n: 3,
            kind: ExperimentKind::TupleContainment {
                a: Region::full(),
                config: InductiveConfiguration::simplex(5, 0.0).unwrap(),
            },
            samples: 1_000,
            seed: 0,
            confidence: 0.95,
        };
        assert!(matches!(
            crowded.validate(),
            Err(Error::TooManyPoints { .. })
        ));
        let misfit = ExperimentSpec {
            n: 10,
            kind: ExperimentKind::PairwiseDensity {
                a: Region::cap(axis(9), 0.0),
                b: Region::full(),
                r: 0.0,
            },
            samples: 1_000,
            seed: 0,
            confidence: 0.95,
        };
        assert!(matches!(
            misfit.validate(),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spec_json_shape_and_defaults() {
        let spec = ExperimentSpec {
            n: 20,
            kind: ExperimentKind::PairwiseDensity {
                a: Region::full(),
                b: Region::full(),
                r: 0.25,
            },
            samples: 2_000,
            seed: 9,
            confidence: 0.95,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"experiment\":\"pairwise_density\""), "{json}");
        assert!(json.contains("\"n\":20"));
        let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);

        let minimal: ExperimentSpec = serde_json::from_str(
            r#"{"experiment":"good_set_mass","n":50,"a":{"type":"union","terms":[]},"r":0.1}"#,
        )
        .unwrap();
        assert_eq!(minimal.samples, 10_000);
        assert_eq!(minimal.seed, 0);
        assert_eq!(minimal.confidence, 0.95);
        match minimal.kind {
            ExperimentKind::GoodSetMass {
                subsphere_samples, ..
            } => assert_eq!(subsphere_samples, 10_000),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn reports_reproduce_and_flatten_to_csv() {
        let spec = ExperimentSpec {
            n: 15,
            kind: ExperimentKind::ReverseHcCheck {
                f: Region::cap(axis(15), 0.2),
                g: Region::cap(axis(15), -0.1),
                r: -0.35,
            },
            samples: 2_000,
            seed: 42,
            confidence: 0.9,
        };
        let one = serde_json::to_string(&run(&spec).unwrap()).unwrap();
        let two = serde_json::to_string(&run(&spec).unwrap()).unwrap();
        assert_eq!(one, two);

        let report = run(&spec).unwrap();
        let row = report.csv_row();
        assert_eq!(
            row.split(',').count(),
            csv_header().split(',').count(),
            "{row}"
        );
        assert!(row.starts_with("reverse_hc_check,15,2000,42,"));
    }
}
