use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dynamics::{step_grid, Schedule, ScheduleHamiltonian};
use crate::error::Error;
use crate::hilbert::dense::{expm_minus_i, to_dense, to_dvector};
use crate::hilbert::{HalfInt, SpinBasis};
use crate::logical::{dimer_state, ring_covering, twist_operator, wrap_angle, LogicalAction, RingQubit};
use crate::models::{ladder, CouplingAssignment, CouplingClass};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn mg_code(l: usize) -> crate::logical::LogicalCode {
    let b = Arc::new(SpinBasis::new(l, Some(HalfInt(0))).unwrap());
    RingQubit::new(&b, &(0..l).collect::<Vec<_>>()).unwrap().code
}

fn phases_wrapped(r: &ProtocolReport) -> bool {
    let p = &r.phases;
    let all = p
        .per_state
        .iter()
        .chain(&p.correction)
        .chain(p.delta.iter())
        .chain(p.delta_1.iter())
        .chain(p.delta_2.iter());
    all.into_iter().all(|&a| a > -PI && a <= PI)
}

#[test]
fn pump_on_mg_ring() {
    let code = mg_code(8);
    let r = run_pump(&code).unwrap();
    let m = &r.action.matrix;
    assert!(m[(0, 0)].norm() < 1e-12 && m[(1, 1)].norm() < 1e-12, "{m}");
    assert!(r.fidelity > 0.95, "{}", r.fidelity);
    assert!(r.leakage < 0.05, "{}", r.leakage);
    assert!(!r.flagged);
    let twice = run_pump_times(&code, 2).unwrap();
    assert_eq!(twice.target_name, "I");
    assert!(twice.fidelity > 0.99, "{}", twice.fidelity);
}

#[test]
fn twist_on_mg_ring() {
    let code = mg_code(8);
    let r = run_twist(&code).unwrap();
    assert!(r.fidelity > 0.95, "{}", r.fidelity);
    let twice = run_twist_times(&code, 2).unwrap();
    assert!(twice.fidelity > 0.9, "{}", twice.fidelity);
    // bare F² on the Löwdin pair: entries 17/63 and −10/63
    assert!((twice.diagnostics["operator_power_fidelity"] - 289.0 / 389.0).abs() < 1e-12);
    assert!(r.diagnostics["unitarity_defect"] <= 3.0 * r.leakage + 1e-12);
}

#[test]
fn twist_matches_dense_oracle() {
    let code = mg_code(8);
    let f = to_dense(&twist_operator(&code.basis, &(0..8).collect::<Vec<_>>()).unwrap());
    let v: Vec<DVector<Complex64>> = code.codewords.iter().map(to_dvector).collect();
    let dense = DMatrix::from_fn(2, 2, |i, j| v[i].dotc(&(&f * &v[j])));
    let want = LogicalAction::from_matrix(dense);
    let got = run_twist(&code).unwrap();
    assert!((got.action.leakage - want.leakage).abs() < 1e-12);
    assert!((&got.action.matrix - &want.matrix).norm() < 1e-12);
}

#[test]
fn ring_protocols_reject_other_codes() {
    let lay = gtg_network(2, 4).unwrap();
    let b = Arc::new(SpinBasis::new(8, Some(HalfInt(0))).unwrap());
    let code = gtg_code(&lay, &b).unwrap();
    assert!(run_pump(&code).is_err());
    assert!(run_twist(&code).is_err());
}

#[test]
fn teleport_examples() {
    let zero = [c(1.0), c(0.0)];
    let one = [c(0.0), c(1.0)];
    let t = run_teleport_h(zero, 0).unwrap();
    assert!(!t.correction);
    assert!((t.output[0] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!((t.output[1] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    let t = run_teleport_h(one, 1).unwrap();
    assert!(t.correction);
    assert!((t.output[0] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!((t.output[1] + c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert_eq!(t.output, [t.raw[1], t.raw[0]]);
    assert!(run_teleport_h(zero, 2).is_err());
    assert!(run_teleport_h([c(1.0), c(1.0)], 0).is_err());
}

#[test]
fn teleport_is_exact_for_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = hadamard_gate();
    for _ in 0..100 {
        let psi = random_qubit(&mut rng);
        for m in 0..2 {
            let t = run_teleport_h(psi, m).unwrap();
            for i in 0..2 {
                let want = h[(i, 0)] * psi[0] + h[(i, 1)] * psi[1];
                assert!((t.output[i] - want).norm() < 1e-12);
            }
            assert!((t.probability - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn teleport_report_is_exact() {
    for m in 0..2 {
        let r = teleport_report(m, 100, 3).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!(r.leakage < 1e-12);
        assert!(r.diagnostics["max_output_error"] < 1e-12);
        assert!(r.diagnostics["max_probability_error"] < 1e-12);
    }
}

#[test]
fn gate_builders() {
    let cz = controlled_z_gate(2);
    assert_eq!(cz, DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0), c(1.0), c(-1.0)])));
    let l3 = controlled_z_gate(3);
    assert_eq!(l3[(7, 7)], c(-1.0));
    assert_eq!((0..7).filter(|&i| l3[(i, i)] == c(1.0)).count(), 7);
    let h = hadamard_gate();
    assert!((&h * &h - DMatrix::identity(2, 2)).norm() < 1e-15);
    let xz = pauli_x_gate() * pauli_z_gate();
    let zx = pauli_z_gate() * pauli_x_gate();
    assert!((xz + zx).norm() < 1e-15);
}

fn diag_phase(p: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|&a| Complex64::from_polar(1.0, a))))
}

proptest! {
    #[test]
    fn phase_equivalent_hadamard_is_found(a in prop::collection::vec(-PI..PI, 2), b in prop::collection::vec(-PI..PI, 2)) {
        let m = diag_phase(&a) * hadamard_gate() * diag_phase(&b);
        let (f, g) = phase_equivalent_fidelity(&m, &hadamard_gate());
        prop_assert!(f > 1.0 - 1e-10);
        prop_assert!(crate::logical::gate_fidelity(&m, &g) > 1.0 - 1e-10);
    }

    #[test]
    fn phase_equivalent_fidelity_is_bounded(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4)) {
        let m = DMatrix::from_fn(2, 2, |i, j| Complex64::new(re[2 * i + j], im[2 * i + j]));
        prop_assume!(m.norm() > 1e-3);
        let (f, _) = phase_equivalent_fidelity(&m, &hadamard_gate());
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!(f + 1e-12 >= crate::logical::gate_fidelity(&m, &hadamard_gate()));
    }

    #[test]
    fn unitarity_defect_bounded_by_leakage(k in 1usize..4, seed in any::<u64>()) {
        // a contraction of the form U·diag(s) with s ≤ 1
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_qubit(&mut rng);
        let u = DMatrix::from_row_slice(2, 2, &[q[0], -q[1].conj(), q[1], q[0].conj()]);
        let s = 1.0 - 0.05 * k as f64;
        let m = u * DMatrix::from_diagonal(&DVector::from_vec(vec![c(s), c(s)]));
        let r = ProtocolReport::new("test", LogicalAction::from_matrix(m), "I", DMatrix::identity(2, 2));
        prop_assert!(r.unitarity_defect() <= 3.0 * r.leakage + 1e-12);
    }
}

#[test]
fn angle_helpers() {
    assert!((report::mean_angle(&[PI - 0.1, -PI + 0.1]).abs() - PI).abs() < 1e-12);
    assert!(report::mean_angle(&[0.2, -0.2]).abs() < 1e-15);
    assert!((report::angle_spread(&[PI - 0.1, -PI + 0.1]) - 0.2).abs() < 1e-12);
}

#[test]
fn report_json_round_trip() {
    let mut r = run_twist(&mg_code(8)).unwrap();
    r.phases.delta = Some(wrap_angle(3.5));
    r.sweep = vec![SweepRow {
        tau: 10.0,
        leakage: 0.1,
        fidelity: 0.9,
        flagged: false,
    }];
    let s = serde_json::to_string(&r).unwrap();
    let back: ProtocolReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back, r);
    assert!(phases_wrapped(&back));
}

#[test]
fn report_csv_rows() {
    let mut r = teleport_report(0, 4, 1).unwrap();
    let mut buf = vec![];
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "protocol,tau,fidelity,leakage,delta,delta_1,delta_2,flagged");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("teleport-h,,"));
    r.sweep = vec![
        SweepRow {
            tau: 1.0,
            leakage: 0.5,
            fidelity: 0.4,
            flagged: true,
        },
        SweepRow {
            tau: 2.0,
            leakage: 0.1,
            fidelity: 0.8,
            flagged: false,
        },
    ];
    let mut buf = vec![];
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().ends_with(",false"));
    assert!(shuffle::decreasing(&r.sweep));
}

#[test]
fn gtg_code_layout() {
    let lay = gtg_network(2, 4).unwrap();
    let b = Arc::new(SpinBasis::new(8, Some(HalfInt(0))).unwrap());
    let code = gtg_code(&lay, &b).unwrap();
    assert_eq!(code.labels, ["00", "01", "10", "11"]);
    assert_eq!(code.meta.rings.len(), 2);
    assert_eq!(code.meta.twist_origin, Some(lay.corners[0].loop_sites[0]));
    let lay3 = gtg_network(3, 4).unwrap();
    let b3 = Arc::new(SpinBasis::new(12, Some(HalfInt(0))).unwrap());
    let code3 = gtg_code(&lay3, &b3).unwrap();
    assert_eq!(code3.labels.len(), 8);
    assert_eq!(code3.labels[5], "101");
    assert!(gtg_network(4, 4).is_err());
}

#[test]
fn glued_point_switches_couplings() {
    let lay = gtg_network(2, 8).unwrap();
    let g = glued_couplings(&lay).unwrap();
    assert_eq!(g.get(CouplingClass::JCorner), Some(0.0));
    assert_eq!(g.get(CouplingClass::JCorner2nn), Some(0.0));
    assert_eq!(g.get(CouplingClass::JGlue), lay.couplings.get(CouplingClass::JCorner));
    assert_eq!(g.get(CouplingClass::JGlue2nn), lay.couplings.get(CouplingClass::JCorner2nn));
}

/// Dense piecewise propagation with the same midpoint grid.
fn dense_schedule(lay: &crate::models::LatticeLayout, base: &CouplingAssignment, s: &Schedule, psi: &DVector<Complex64>, b: &Arc<SpinBasis>) -> DVector<Complex64> {
    let ham = ScheduleHamiltonian::new(lay, b, s).unwrap();
    let (n, h) = step_grid(&ham, base, s).unwrap();
    let mut v = psi.clone();
    for k in 0..n {
        let hk = ham.at(s, base, (k as f64 + 0.5) * h).unwrap();
        v = expm_minus_i(&hk, h) * v;
    }
    v
}

#[test]
fn gtg_matches_dense_oracle() {
    let lay = gtg_network(2, 4).unwrap();
    let opts = GtgOptions {
        calibrate: false,
        ..Default::default()
    };
    let glue = glue_schedule(&lay, 12.0, &opts).unwrap();
    let r = run_gtg(&lay, &glue, &opts).unwrap();

    let b = Arc::new(SpinBasis::new(8, Some(HalfInt(0))).unwrap());
    let code = gtg_code(&lay, &b).unwrap();
    let lp = &lay.corners[0].loop_sites;
    let f = to_dense(&twist_operator(&b, lp).unwrap());
    let glued = glued_couplings(&lay).unwrap();
    let v: Vec<DVector<Complex64>> = code.codewords.iter().map(to_dvector).collect();
    let images: Vec<DVector<Complex64>> = v
        .iter()
        .map(|c| {
            let g = dense_schedule(&lay, &lay.couplings, &glue, c, &b);
            dense_schedule(&lay, &glued, &glue.reversed(), &(&f * g), &b)
        })
        .collect();
    let m = DMatrix::from_fn(4, 4, |i, j| v[i].dotc(&images[j]));
    let want = LogicalAction::from_matrix(m);
    assert!((r.leakage - want.leakage).abs() < 1e-8, "{} vs {}", r.leakage, want.leakage);
    assert!((&r.action.matrix - &want.matrix).norm() < 1e-8);
    assert!(r.diagnostics["unitarity_defect"] <= 3.0 * r.leakage + 1e-10);
    assert!(phases_wrapped(&r));
    assert!(r.phases.delta.is_some() && r.phases.delta_1.is_none());
}

#[test]
fn identity_twist_calibrates_away() {
    let lay = gtg_network(2, 4).unwrap();
    let opts = GtgOptions {
        twist: TwistKind::Identity,
        ..Default::default()
    };
    let glue = glue_schedule(&lay, 8.0, &opts).unwrap();
    let r = run_gtg(&lay, &glue, &opts).unwrap();
    for (a, b) in r.phases.per_state.iter().zip(&r.phases.correction) {
        assert!(wrap_angle(a - b).abs() < 1e-10);
    }
    assert!((r.diagnostics["calibration_leakage"] - r.leakage).abs() < 1e-12);
}

#[test]
fn gtg_is_deterministic() {
    let lay = gtg_network(2, 4).unwrap();
    let opts = GtgOptions::default();
    let glue = glue_schedule(&lay, 6.0, &opts).unwrap();
    let a = run_gtg(&lay, &glue, &opts).unwrap();
    let b = run_gtg(&lay, &glue, &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn gtg_three_rings_reports_class_phases() {
    let lay = gtg_network(3, 4).unwrap();
    let opts = GtgOptions::default();
    let r = run_gtg_sweep(&lay, &[4.0, 2.0], &opts).unwrap();
    assert_eq!(r.protocol, "gtg3");
    assert_eq!(r.action.matrix.nrows(), 8);
    assert_eq!(r.ramp_times, [4.0, 2.0]);
    assert_eq!(r.sweep.len(), 2);
    assert!(r.phases.delta_1.is_some() && r.phases.delta_2.is_some());
    assert!(r.diagnostics.contains_key("delta_1_spread"));
    assert!(phases_wrapped(&r));
    assert!((0.0..=1.0).contains(&r.fidelity));
}

#[test]
fn gtg_rejects_wrong_ring_count() {
    let lay = crate::models::ring_network(
        &[crate::models::RingSpec { l: 4, j1: 1.0, j2: 0.5 }; 3],
        &[crate::models::CornerSpec::square(0, 1)],
    )
    .unwrap();
    let s = Schedule::new(1.0, vec![]);
    assert!(run_gtg(&lay, &s, &GtgOptions::default()).is_err());
}

#[test]
fn flux_threading_returns_glued_loop_with_sign() {
    // two L=6 MG rings glued into one 12-site MG loop, both coverings exact
    let lay = gtg_network(2, 6).unwrap();
    let b = Arc::new(SpinBasis::new(12, Some(HalfInt(0))).unwrap());
    let lp = lay.corners[0].loop_sites.clone();
    let glued = glued_couplings(&lay).unwrap();
    let flux = Schedule::new(300.0, vec![]).with_dt(0.25).with_flux(crate::dynamics::FluxControl {
        cut: vec![(lp[11], lp[0]), (lp[10], lp[0]), (lp[11], lp[1])],
        ramp: crate::dynamics::Ramp::Smoothstep,
        start: 0.0,
        end: 2.0 * PI,
        window: None,
    });
    let mut flux = flux;
    flux.thin = 1;
    // overlap with the start state, dynamical phase −∫E dt removed
    let geometric = |p: usize| -> (f64, f64) {
        let s = dimer_state(&b, &ring_covering(&lp, p)).unwrap();
        let t = crate::dynamics::evolve_schedule(&lay, &glued, &flux, &s).unwrap();
        let mut dyn_phase = 0.0;
        for k in 1..t.times.len() {
            dyn_phase += 0.5 * (t.energies[k] + t.energies[k - 1]) * (t.times[k] - t.times[k - 1]);
        }
        let o = s.inner(t.final_state()).unwrap();
        (o.norm(), o.arg() + dyn_phase)
    };
    let (na, ga) = geometric(0);
    let (np, gp) = geometric(1);
    assert!(na > 0.99 && np > 0.99, "{na} {np}");
    // residual nonadiabatic error falls off as ~30/duration
    assert!((wrap_angle(gp - ga).abs() - PI).abs() < 0.15, "{ga} {gp}");
}

#[test]
fn shuffle_rejects_misclassified_endpoints() {
    let lay = ladder(6, 1.0, 0.5, 0.2, 0.1, true).unwrap();
    let pc = CouplingAssignment::new()
        .with(CouplingClass::JLeg, 1.0)
        .with(CouplingClass::J2nn, 0.5)
        .with(CouplingClass::JRung, 0.2)
        .with(CouplingClass::JDiag, 0.1);
    let pr = pc.clone().with(CouplingClass::JRung, 2.0);
    let s = shuffle_schedule(&pr, &pc, 5.0, &ShuffleOptions::default());
    match run_shuffle(&lay, &pr, &pc, &s, &ShuffleOptions::default()) {
        Err(Error::Misclassified { expected, got }) => {
            assert_eq!(expected, "C");
            assert_eq!(got, "R");
        }
        other => panic!("expected misclassification, got {other:?}"),
    }
}

#[test]
fn shuffle_small_ladder() {
    let lay = ladder(6, 1.0, 0.5, 0.2, 0.1, true).unwrap();
    let pc = CouplingAssignment::new()
        .with(CouplingClass::JLeg, 1.0)
        .with(CouplingClass::J2nn, 0.5)
        .with(CouplingClass::JRung, 0.2)
        .with(CouplingClass::JDiag, 0.1);
    let pr = pc.clone().with(CouplingClass::JRung, 2.0);
    let opts = ShuffleOptions::default();
    let r = run_shuffle_sweep(&lay, &pc, &pr, &[2.0, 16.0], &opts).unwrap();
    assert_eq!(r.output_labels, ["+", "-"]);
    assert!(r.diagnostics["rung_parity.+"] > r.diagnostics["rung_parity.-"]);
    assert!(r.diagnostics["quench_leakage"] > r.leakage, "{:?}", r.diagnostics);
    assert!(r.diagnostics["unitarity_defect"] <= 3.0 * r.leakage + 1e-10);
    assert_eq!(r.parameters["end.J_rung"], 2.0);
    assert!((0.0..=1.0).contains(&r.fidelity));
    let bad = shuffle_schedule(&pc, &pc, 5.0, &opts);
    assert!(run_shuffle(&lay, &pc, &pr, &bad, &opts).is_err());
}

