//! End-to-end consistency checks between experiments that estimate the same
//! quantity through different machinery.

use sphere_lab::constants::c_sequence;
use sphere_lab::geometry::{
    project_to_link, sample_configuration, InductiveConfiguration, UnitVector,
};
use sphere_lab::harness::{
    good_set_mass, pairwise_density, ramsey_coloring_demo, reverse_hc_check, tuple_containment,
};
use sphere_lab::regions::{find_threshold_for_measure, Region};
use sphere_lab::stream::RandomStream;

fn axis(n: usize) -> UnitVector {
    UnitVector::basis(n, 0).unwrap()
}

fn cap_with_measure(n: usize, sigma: f64) -> Region {
    Region::cap(axis(n), find_threshold_for_measure(n, sigma).unwrap())
}

#[test]
fn pairwise_and_tuple_estimators_agree_at_k_two() {
    // Pr(x in A, y in A) over orthogonal pairs, measured once with the slice
    // sampler and once with the Gram tuple sampler.
    let n = 60;
    let a = cap_with_measure(n, 0.35);
    let samples = 40_000;
    let pair = pairwise_density(a.clone(), a.clone(), 0.0, n, samples, 101).unwrap();
    let config = InductiveConfiguration::simplex(2, 0.0).unwrap();
    let tuple = tuple_containment(a, config, n, samples, 202).unwrap();
    let gap = (pair.estimate - tuple.estimate).abs();
    let budget = 4.0 * (pair.std_error + tuple.std_error);
    assert!(
        gap <= budget,
        "pair {} vs tuple {} gap {gap} budget {budget}",
        pair.estimate,
        tuple.estimate
    );
}

#[test]
fn reverse_hc_negative_r_equals_antipode_at_positive_r() {
    let n = 45;
    let f = cap_with_measure(n, 0.3);
    let g = Region::band(axis(n), -0.1, 0.6);
    let r = 0.35;
    let direct = reverse_hc_check(f.clone(), g.clone(), -r, n, 50_000, 7).unwrap();
    let reflected = reverse_hc_check(f, g.antipode(), r, n, 50_000, 8).unwrap();
    // identical product-norm reference: the antipode preserves measure
    let b1 = direct.bound("reverse_hc_product_norm").unwrap().value;
    let b2 = reflected.bound("reverse_hc_product_norm").unwrap().value;
    assert_eq!(b1, b2);
    let gap = (direct.estimate - reflected.estimate).abs();
    let budget = 4.0 * (direct.std_error + reflected.std_error);
    assert!(
        gap <= budget,
        "direct {} vs reflected {} gap {gap} budget {budget}",
        direct.estimate,
        reflected.estimate
    );
}

#[test]
fn hemisphere_coloring_frequencies_match_pairwise_density() {
    let n = 200;
    let upper = Region::cap(axis(n), 0.0);
    let lower = upper.clone().complement();
    let samples = 4_000;
    let config = InductiveConfiguration::simplex(2, 0.0).unwrap();
    let coloring =
        ramsey_coloring_demo(vec![upper.clone(), lower], config, n, samples, 31).unwrap();
    let frequencies: Vec<f64> = coloring.details["color_frequencies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let pair = pairwise_density(upper.clone(), upper, 0.0, n, samples, 32).unwrap();
    // a frequency estimate carries roughly the same binomial noise as the
    // pairwise estimate; compare with both uncertainties pooled
    let budget = 4.0 * (pair.std_error + coloring.std_error);
    for f in frequencies {
        assert!(
            (f - pair.estimate).abs() <= budget,
            "frequency {f} vs pairwise {} budget {budget}",
            pair.estimate
        );
    }
}

#[test]
fn nearly_all_of_a_cap_is_good_in_high_dimension() {
    // At r = 0 the slice density concentrates at sigma(A), far above the
    // sigma(A)/2 cutoff, so misclassification requires a 12-sigma inner
    // fluctuation.
    let n = 500;
    let a = cap_with_measure(n, 0.3);
    let report = good_set_mass(a, 0.0, n, 1_500, 1_500, 77).unwrap();
    let fraction = report.details["fraction_of_a_good"].as_f64().unwrap();
    assert!(fraction >= 1.0 - 1e-3, "good fraction {fraction}");
    let sigma_good = report.estimate;
    let floor = report.bound("good_mass_floor").unwrap().value;
    assert!(
        sigma_good >= floor,
        "sigma(A_good) {sigma_good} under the floor {floor}"
    );
}

#[test]
fn two_stage_projection_reproduces_the_constant_sequence() {
    // Project a 4-tuple onto the link of its first point, then the image
    // onto the link of its own first point: pairwise inner products must
    // walk down the c_sequence.
    let n = 30;
    let config = InductiveConfiguration::new(vec![0.4, 0.3, 0.2]).unwrap();
    let cs = c_sequence(&config).unwrap();
    let gram = config.gram().unwrap();
    let mut rng = RandomStream::new(4242).rng();
    for _ in 0..200 {
        let pts = sample_configuration(n, &gram, &mut rng).unwrap();
        let y2 = project_to_link(&pts[0], &pts[1], cs[0]).unwrap();
        let y3 = project_to_link(&pts[0], &pts[2], cs[0]).unwrap();
        let y4 = project_to_link(&pts[0], &pts[3], cs[0]).unwrap();
        assert!((y2.dot(&y3) - cs[1]).abs() <= 1e-8, "first-stage mismatch");
        assert!((y2.dot(&y4) - cs[1]).abs() <= 1e-8, "first-stage mismatch");
        let z3 = project_to_link(&y2, &y3, cs[1]).unwrap();
        let z4 = project_to_link(&y2, &y4, cs[1]).unwrap();
        assert!(
            (z3.dot(&z4) - cs[2]).abs() <= 1e-8,
            "second-stage inner product {} vs c_3 {}",
            z3.dot(&z4),
            cs[2]
        );
    }
}
