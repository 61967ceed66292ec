use super::*;
use crate::hilbert::ops::pauli_x;

fn commutes(a: &Operator, b: &Operator) -> bool {
    a.commutator(b).unwrap().max_abs() < 1e-12
}

fn anticommutes(a: &Operator, b: &Operator) -> bool {
    a.anticommutator(b).unwrap().max_abs() < 1e-12
}

#[test]
fn full_basis_is_in_config_order() {
    let b = full_basis(5).unwrap();
    assert!(b.configs().iter().enumerate().all(|(k, &c)| c == k as u64));
}

#[test]
fn dual_operators_form_a_pauli_algebra() {
    let (xs, zs) = dual_operators(4).unwrap();
    let id = Operator::identity(xs[0].basis().clone());
    for a in 0..3 {
        assert!(xs[a].compose(&xs[a]).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
        assert!(zs[a].compose(&zs[a]).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
        for b in 0..3 {
            assert!(commutes(&xs[a], &xs[b]));
            assert!(commutes(&zs[a], &zs[b]));
            if a == b {
                assert!(anticommutes(&xs[a], &zs[b]));
            } else {
                assert!(commutes(&xs[a], &zs[b]), "{a} {b}");
            }
        }
    }
}

#[test]
fn algebra_check_counts_relations() {
    let c = check_dual_algebra(4).unwrap();
    assert_eq!(c.relations, 2 * 3 + 3 * 9);
    assert_eq!(c.violations, 0);
    assert!(check_dual_algebra(2).is_err());
}

#[test]
fn hamiltonian_in_dual_variables() {
    let (l, lambda) = (4, 0.7);
    let h = tfim_hamiltonian(l, lambda, Boundary::Open).unwrap();
    let (xs, zs) = dual_operators(l).unwrap();
    let basis = h.basis().clone();
    // bulk: -λ Σ σ̃^x - Σ σ̃^z_{n-1} σ̃^z_n; boundary: -X_0 - X_{L-1}
    let mut d = Operator::zero(basis.clone());
    for x in &xs {
        d = d.add_scaled(x, Complex64::new(-lambda, 0.0)).unwrap();
    }
    for n in 1..l - 1 {
        d = d.add_scaled(&zs[n - 1].compose(&zs[n]).unwrap(), Complex64::new(-1.0, 0.0)).unwrap();
    }
    let boundary = pauli_x(&basis, 0).unwrap().add(&pauli_x(&basis, l - 1).unwrap()).unwrap();
    d = d.add_scaled(&boundary, Complex64::new(-1.0, 0.0)).unwrap();
    assert!(h.max_abs_diff(&d).unwrap() < 1e-12);
}

#[test]
fn parity_commutes_with_hamiltonian() {
    for boundary in [Boundary::Open, Boundary::Periodic] {
        for lambda in [0.0, 0.3, 1.0, 4.0] {
            let h = tfim_hamiltonian(6, lambda, boundary).unwrap();
            assert!(commutes(&h, &parity_operator(6).unwrap()));
        }
    }
}

#[test]
fn parity_split_references() {
    let (even, odd) = parity_split(6, 0.0).unwrap();
    assert_eq!(even.len() + odd.len(), 64);
    assert!((even[0] + 6.0).abs() < 1e-12);
    assert!((odd[0] + 4.0).abs() < 1e-12);
    let (even, odd) = parity_split(8, 10.0).unwrap();
    assert!((odd[0] - even[0]).abs() < 1e-3 * 10.0);
    let mut all: Vec<f64> = even.iter().chain(&odd).copied().collect();
    all.sort_by(f64::total_cmp);
    let dense = crate::hilbert::dense::eigvalsh(&tfim_hamiltonian(8, 10.0, Boundary::Open).unwrap()).unwrap();
    assert!(max_dev(&all, &dense) < 1e-9);
}

#[test]
fn anchored_pairing_is_even_even_on_the_ring() {
    let (pair, dev) = anchor_pairing(Boundary::Periodic, 2.0).unwrap();
    assert_eq!(pair, MATCHED_PAIRING);
    assert!(dev < 1e-10);
    // no pairing is exact on the open chain
    let (_, dev) = anchor_pairing(Boundary::Open, 2.0).unwrap();
    assert!(dev > 1e-3);
}

#[test]
fn self_dual_point_is_trivial() {
    let p = spectrum_duality_check(6, 1.0).unwrap();
    assert!(p.max_deviation < 1e-12);
}

#[test]
fn matched_spectra_agree() {
    for l in [6, 8] {
        for lambda in [0.5, 2.0] {
            let p = spectrum_duality_check(l, lambda).unwrap();
            assert_eq!(p.original.len(), 1 << (l - 1));
            assert!(p.max_deviation < 1e-8, "L={l} λ={lambda}: {}", p.max_deviation);
            assert!((p.original[0] - p.dual[0]).abs() < 1e-8);
        }
    }
}

#[test]
fn order_grows_and_disorder_shrinks_with_lambda() {
    let rows = order_disorder_scan(8, &[0.2, 1.0, 5.0]).unwrap();
    assert!(rows[0].order < rows[1].order && rows[1].order < rows[2].order);
    assert!(rows[0].disorder > rows[1].disorder && rows[1].disorder > rows[2].disorder);
    assert!(rows[2].order > 0.9);
    assert!(rows[0].disorder > 0.5);
}

#[test]
fn csv_exports() {
    let rows = order_disorder_scan(4, &[0.5, 2.0]).unwrap();
    let mut out = Vec::new();
    write_scan_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("lambda,ground_energy,parity_gap,order,disorder"));

    let p = spectrum_duality_check(4, 2.0).unwrap();
    let mut out = Vec::new();
    write_spectra_csv(&p, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 9);
}

#[test]
fn rejects_bad_arguments() {
    assert!(spectrum_duality_check(6, 0.0).is_err());
    assert!(parity_split(6, -1.0).is_err());
    assert!(dual_operators(2).is_err());
}
