use std::sync::Arc;

use num_complex::Complex64;

use super::*;
use crate::hilbert::ops::ring_shift;
use crate::hilbert::{permutation_operator, HalfInt, SpinBasis};
use crate::logical::{dimer_state, ring_covering, twist_operator};
use crate::models::{ladder, CouplingAssignment, CouplingClass, LatticeLayout};
use crate::State;

fn sector(n: usize) -> Arc<SpinBasis> {
    Arc::new(SpinBasis::new(n, Some(HalfInt(0))).unwrap())
}

fn decoupled(l: usize) -> LatticeLayout {
    ladder(l, 1.0, 0.5, 0.0, 0.0, true).unwrap()
}

fn rung_product(basis: &Arc<SpinBasis>, layout: &LatticeLayout) -> State {
    let l = layout.length();
    let cov: Vec<_> = (0..l).map(|n| (layout.ladder_site(0, n), layout.ladder_site(1, n))).collect();
    dimer_state(basis, &cov).unwrap()
}

fn leg_product(basis: &Arc<SpinBasis>, layout: &LatticeLayout, p1: usize, p2: usize) -> State {
    let mut cov = ring_covering(&layout.rings[0], p1);
    cov.extend(ring_covering(&layout.rings[1], p2));
    dimer_state(basis, &cov).unwrap()
}

fn point(j_leg: f64, j_2nn: f64, j_rung: f64, j_diag: f64) -> CouplingAssignment {
    CouplingAssignment::default()
        .with(CouplingClass::JLeg, j_leg)
        .with(CouplingClass::J2nn, j_2nn)
        .with(CouplingClass::JRung, j_rung)
        .with(CouplingClass::JDiag, j_diag)
}

#[test]
fn dimer_order_of_coverings() {
    let layout = decoupled(6);
    let basis = sector(12);
    let aa = leg_product(&basis, &layout, 0, 0);
    let ab = leg_product(&basis, &layout, 0, 1);
    assert!((dimer_order(&aa, &layout, 0).unwrap() - 0.75).abs() < 1e-12);
    assert!((dimer_order(&aa, &layout, 1).unwrap() - 0.75).abs() < 1e-12);
    assert!((dimer_order(&ab, &layout, 1).unwrap() + 0.75).abs() < 1e-12);
    let rp = rung_product(&basis, &layout);
    assert!(dimer_order(&rp, &layout, 0).unwrap().abs() < 1e-12);
}

#[test]
fn dimer_operator_matches_direct() {
    let layout = decoupled(4);
    let basis = sector(8);
    let psi = State::random(basis.clone(), 7);
    let op = dimer_order_operator(&basis, &layout, 1).unwrap();
    let a = op.expectation(&psi).unwrap();
    assert!(a.im.abs() < 1e-10);
    assert!((a.re - dimer_order(&psi, &layout, 1).unwrap()).abs() < 1e-12);
}

#[test]
fn dimer_order_flips_under_translation() {
    let layout = decoupled(6);
    let basis = sector(12);
    let t = permutation_operator(&basis, &ring_shift(12, &layout.rings[0], 1)).unwrap();
    for seed in 0..5 {
        let psi = State::random(basis.clone(), seed);
        let tpsi = t.apply(&psi).unwrap();
        let (d, dt) = (dimer_order(&psi, &layout, 0).unwrap(), dimer_order(&tpsi, &layout, 0).unwrap());
        assert!((d + dt).abs() < 1e-12, "{d} {dt}");
    }
}

#[test]
fn rung_density_references() {
    let layout = decoupled(4);
    let basis = sector(8);
    assert!((rung_singlet_density(&rung_product(&basis, &layout), &layout).unwrap() - 1.0).abs() < 1e-12);
    assert!((rung_singlet_density(&leg_product(&basis, &layout, 0, 0), &layout).unwrap() - 0.25).abs() < 1e-12);
    let full = Arc::new(SpinBasis::full(8).unwrap());
    let up = State::basis_state(full, 0xff).unwrap();
    assert!(rung_singlet_density(&up, &layout).unwrap().abs() < 1e-12);
}

#[test]
fn string_order_references() {
    let layout = decoupled(6);
    let basis = sector(12);
    assert!(string_order(&rung_product(&basis, &layout), &layout, 0, 3).unwrap().abs() < 1e-12);
    assert!(string_order(&rung_product(&basis, &layout), &layout, 0, 1).is_err());
    let full = Arc::new(SpinBasis::full(12).unwrap());
    let up = State::basis_state(full, 0xfff).unwrap();
    // fully polarized: −(1)(e^{iπ·2})^2(1) per unit rung spin
    assert!((string_order(&up, &layout, 0, 3).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn twist_expectation_on_coverings() {
    let basis = sector(4);
    let sites = [0, 1, 2, 3];
    let f = twist_operator(&basis, &sites).unwrap();
    let a = dimer_state(&basis, &ring_covering(&sites, 0)).unwrap();
    let b = dimer_state(&basis, &ring_covering(&sites, 1)).unwrap();
    let ea = twist_expectation(&a, &f).unwrap();
    let eb = twist_expectation(&b, &f).unwrap();
    assert!((ea - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    assert!((eb - Complex64::new(-0.5, 0.0)).norm() < 1e-12);
    let sum = State::combination(&[&a, &b], &[Complex64::new(1.0, 0.0); 2]).unwrap().normalized();
    let es = twist_expectation(&sum, &f).unwrap();
    assert!(es.re.abs() < 0.5);
}

#[test]
fn deep_phase_points() {
    let cases = [
        (point(1.0, 0.5, 0.2, 0.1), PhaseLabel::C),
        (point(1.0, 0.5, 0.1, 0.2), PhaseLabel::S),
        (point(1.0, 0.0, 5.0, 0.0), PhaseLabel::R),
        (point(1.0, 0.0, -5.0, 0.0), PhaseLabel::H),
    ];
    for (c, want) in &cases {
        let p = classify_phase(c, 8).unwrap();
        assert_eq!(p.label, *want, "{:?}", p.observables);
        if *want == PhaseLabel::H {
            assert!(p.observables["string_order"].abs() > 0.1);
        }
    }
}

#[test]
fn classification_is_stable_under_small_perturbations() {
    let cases = [
        (point(1.0, 0.5, 0.2, 0.1), PhaseLabel::C),
        (point(1.0, 0.0, 5.0, 0.0), PhaseLabel::R),
        (point(1.0, 0.0, -5.0, 0.0), PhaseLabel::H),
    ];
    for (c, want) in &cases {
        for class in [CouplingClass::JLeg, CouplingClass::JRung] {
            for f in [0.99, 1.01] {
                let mut q = c.clone();
                q.set(class, c.get(class).unwrap() * f);
                assert_eq!(classify_phase(&q, 8).unwrap().label, *want);
            }
        }
    }
}

#[test]
fn margins_exceed_threshold_when_labelled() {
    let p = classify_phase(&point(1.0, 0.5, 0.2, 0.1), 8).unwrap();
    let o = &p.observables;
    assert!(o["dimer_aligned"].abs() - o["dimer_staggered"].abs() > 0.05);
    let p = classify_phase(&point(1.0, 0.5, 0.2, 0.0), 8).unwrap();
    if p.label != PhaseLabel::Unclassified {
        let o = &p.observables;
        assert!((o["dimer_aligned"].abs() - o["dimer_staggered"].abs()).abs() > 0.05);
    }
}

#[test]
fn scan_csv_has_row_per_point() {
    let pts = vec![
        classify_phase(&point(1.0, 0.0, 5.0, 0.0), 4).unwrap(),
        classify_phase(&point(1.0, 0.0, -5.0, 0.0), 4).unwrap(),
    ];
    let mut out = Vec::new();
    write_scan_csv(&pts, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("J_leg,J_2nn,J_rung,J_diag"));
    assert!(lines[0].ends_with(",label"));
}

#[test]
fn label_serializes_lowercase_unclassified() {
    assert_eq!(serde_json::to_string(&PhaseLabel::Unclassified).unwrap(), "\"unclassified\"");
    assert_eq!(serde_json::to_string(&PhaseLabel::R).unwrap(), "\"R\"");
}
