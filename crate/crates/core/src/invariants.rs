//! Property tests of the invariants that span several modules.

use crate::chebyshev::{alpha_from_cos2, aux_quantities, chebyshev_u, closed_form_from_alpha, closed_form_tn, AlphaClass};
use crate::cli::run;
use crate::determinant::{direct_determinant, dn_sequence, general_solution_tn, minor_sequence};
use crate::dipole::{chain_couplings, omega_ij, DipoleConfig};
use crate::eigvec::{ansatz_fit, boundary_rank_check, eigenpairs};
use crate::roots::{
    lambda_from_alpha, lambda_from_x, series_x, sweep_curves, tangent_residual_entire, tangent_root, x_y_from_alpha,
    Branch,
};
use crate::spectrum::{count_below, eigenvalues_bisection, eigenvalues_dense_oracle, spectrum_a_zero};
use crate::{build_hamiltonian, trace_moments, ChainParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn coupling() -> impl Strategy<Value = f64> {
    (0.05f64..1.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn chain(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ChainParams> {
    (n, -1.0f64..1.0, coupling(), coupling()).prop_map(|(n, w, a, b)| ChainParams::new(n, w, a, b).unwrap())
}

/// A chain together with a trial energy on its Gershgorin interval.
fn chain_and_energy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (ChainParams, f64)> {
    chain(n).prop_flat_map(|p| {
        let r = p.gershgorin_radius();
        (Just(p), (p.omega0 - r)..(p.omega0 + r))
    })
}

/// `T₀ … T_n`, indexed by order.
fn t_values(p: &ChainParams, e: f64) -> Vec<f64> {
    std::iter::once(1.0).chain(minor_sequence(p, e).values()).collect()
}

fn sorted_jacobi(p: &ChainParams) -> Vec<f64> {
    eigenvalues_dense_oracle(p).unwrap().eigenvalues
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn hamiltonian_is_symmetric(p in chain(1..=20)) {
        let m = build_hamiltonian(&p).unwrap();
        let d = m.to_dense();
        for i in 0..p.n {
            for j in 0..p.n {
                prop_assert_eq!(d[i * p.n + j].to_bits(), d[j * p.n + i].to_bits());
            }
        }
    }

    #[test]
    fn trace_moments_match_eigenvalues(p in chain(1..=12)) {
        let e = sorted_jacobi(&p);
        let (m1, m2) = trace_moments(&p);
        let s1: f64 = e.iter().sum();
        let s2: f64 = e.iter().map(|v| v * v).sum();
        prop_assert!((s1 - m1).abs() <= 1e-10 * (1.0 + m1.abs()));
        prop_assert!((s2 - m2).abs() <= 1e-10 * (1.0 + m2.abs()));
    }

    #[test]
    fn recurrence_matches_direct_determinant(n in 1usize..=12, a in -2.0f64..2.0, b in -2.0f64..2.0, lambda in -2.0f64..2.0) {
        let p = ChainParams::new(n, 0.0, a, b).unwrap();
        let e = -lambda;
        let seq = minor_sequence(&p, e);
        let m = build_hamiltonian(&p).unwrap();
        let largest = seq.values().iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let direct = direct_determinant(&m, e);
        prop_assert!((seq.last() - direct).abs() <= 1e-9 * largest, "{} vs {}", seq.last(), direct);
    }

    #[test]
    fn general_solution_matches_recurrence((p, e) in chain_and_energy(2..=12)) {
        let t = t_values(&p, e);
        let tn = t[p.n];
        let largest = t.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        // Near a root T_n is a cancellation of much larger terms.
        prop_assume!(tn.abs() > 1e-4 * largest);
        if let Ok(v) = general_solution_tn(&p, e, p.n) {
            prop_assert!((v - tn).abs() <= 1e-8 * tn.abs(), "{} vs {}", v, tn);
        }
    }

    #[test]
    fn d_relation_holds((p, e) in chain_and_energy(2..=12)) {
        let t = t_values(&p, e);
        let d = dn_sequence(&p, e).unwrap();
        let lambda = p.lambda(e);
        for k in 3..=p.n {
            let want = p.a * t[k - 1] - p.b * d[k - 3];
            let scale = (p.a * t[k - 1]).abs() + (p.b * d[k - 3]).abs();
            prop_assert!((d[k - 2] - want).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
        prop_assert!((d[0] - (p.a * lambda - p.a * p.b)).abs() <= 1e-15 * (p.a * lambda).abs().max(1.0));
    }

    #[test]
    fn b_zero_recurrence_is_tridiagonal(n in 2usize..=30, w in -1.0f64..1.0, a in coupling(), e in -3.0f64..3.0) {
        let p = ChainParams::new(n, w, a, 0.0).unwrap();
        let t = t_values(&p, e);
        let lambda = p.lambda(e);
        for k in 2..=n {
            let want = lambda * t[k - 1] - a * a * t[k - 2];
            if k > 5 {
                prop_assert_eq!(t[k].to_bits(), want.to_bits());
            } else {
                // The first five minors come from direct expansion.
                let size = (lambda * t[k - 1]).abs() + (a * a * t[k - 2]).abs();
                prop_assert!((t[k] - want).abs() <= 1e-14 * size);
            }
        }
    }

    #[test]
    fn closed_form_matches_recurrence((p, e) in chain_and_energy(1..=12)) {
        let t = t_values(&p, e);
        let tn = t[p.n];
        let largest = t.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        prop_assume!(tn.abs() > 1e-4 * largest);
        if let Ok(v) = closed_form_tn(&p, e, p.n) {
            prop_assert!((v - tn).abs() <= 1e-8 * tn.abs(), "{} vs {}", v, tn);
        }
    }

    #[test]
    fn pell_identity(k in 1usize..=20, r in 0.0f64..2.0, t in 0.0f64..std::f64::consts::TAU) {
        let z = Complex64::from_polar(r, t);
        let (u0, u1, u2) = (chebyshev_u(k - 1, z), chebyshev_u(k, z), chebyshev_u(k + 1, z));
        let lhs = u1 * u1 - u2 * u0;
        // Absolute accuracy is bounded by the size of the squared terms.
        let scale = (u1 * u1).norm().max((u2 * u0).norm()).max(1.0);
        prop_assert!((lhs - 1.0).norm() <= 1e-10 * scale, "{} at k={}", lhs, k);
    }

    #[test]
    fn closed_form_even_in_alpha(
        n in 1usize..=12,
        a in coupling(),
        b in coupling(),
        re in 0.01f64..1.5,
        im in -1.0f64..1.0,
    ) {
        let gamma = Complex64::from(a / (4.0 * b)).sqrt();
        let alpha = Complex64::new(re, im);
        let (Ok(p), Ok(m)) = (closed_form_from_alpha(a, b, gamma, alpha, n), closed_form_from_alpha(a, b, gamma, -alpha, n)) else {
            return Ok(());
        };
        prop_assert!((p - m).norm() <= 1e-10 * p.norm().max(1e-300));
    }

    #[test]
    fn closed_form_continuous_at_degenerate_angle(n in 1usize..=12, w in -1.0f64..1.0, a in coupling(), b in coupling()) {
        // α = 1e−9 gives |sin 2α| = 2e−9, just above the degeneracy guard.
        let gamma = Complex64::from(a / (4.0 * b)).sqrt();
        let v = closed_form_from_alpha(a, b, gamma, Complex64::from(1e-9), n).unwrap().re;
        let p = ChainParams::new(n, w, a, b).unwrap();
        let lambda = 2.0 * a - 2.0 * b;
        let t = minor_sequence(&p, w - lambda).last();
        prop_assert!((v - t).abs() <= 1e-6 * t.abs().max(1e-300), "{} vs {}", v, t);
    }
}

proptest! {
    #![proptest_config(cfg(60))]

    #[test]
    fn bisection_matches_jacobi(p in chain(1..=64)) {
        let bis = eigenvalues_bisection(&p, 1e-13 * p.energy_scale()).unwrap().eigenvalues;
        let jac = sorted_jacobi(&p);
        let scale = 1.0 + jac.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (x, y) in bis.iter().zip(&jac) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn spectrum_invariant_under_a_sign(p in chain(1..=32)) {
        let tol = 1e-13 * p.energy_scale();
        let e1 = eigenvalues_bisection(&p, tol).unwrap().eigenvalues;
        let e2 = eigenvalues_bisection(&ChainParams { a: -p.a, ..p }, tol).unwrap().eigenvalues;
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() <= 1e-10 * p.energy_scale());
        }
    }

    #[test]
    fn count_below_is_monotone(p in chain(1..=32), mut probes in prop::collection::vec(-1.0f64..1.0, 1..20)) {
        let r = p.gershgorin_radius() + 1.0;
        probes.sort_by(f64::total_cmp);
        let counts: Vec<usize> = probes.iter().map(|t| count_below(&p, p.omega0 + t * r)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(count_below(&p, p.omega0 - r), 0);
        prop_assert_eq!(count_below(&p, p.omega0 + r), p.n);
    }

    #[test]
    fn a_zero_even_chain_is_doubly_degenerate(half in 1usize..=16, w in -1.0f64..1.0, b in coupling()) {
        let p = ChainParams::new(2 * half, w, 0.0, b).unwrap();
        let e = eigenvalues_bisection(&p, 1e-14).unwrap().eigenvalues;
        let exact = spectrum_a_zero(&p).unwrap().eigenvalues;
        for k in 0..half {
            prop_assert!((e[2 * k] - e[2 * k + 1]).abs() <= 1e-9);
            prop_assert!((e[2 * k] - exact[2 * k]).abs() <= 1e-9);
        }
    }

    #[test]
    fn alpha_round_trip((p, e) in chain_and_energy(1..=12)) {
        let Ok(aux) = aux_quantities(&p, e) else { return Ok(()); };
        let back = p.omega0 - lambda_from_alpha(&p, aux.alpha).unwrap();
        prop_assert!((back - e).abs() <= 1e-9 * p.energy_scale());
    }

    #[test]
    fn series_error_is_eighth_order(k in prop::sample::select(vec![1usize, 3]), plus in any::<bool>(), gamma in 0.01f64..0.1) {
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let s = series_x(6, k, gamma, branch).unwrap();
        let x = tangent_root(6, gamma, s, branch).unwrap();
        // |Δx|/γ⁸ stays below 2e−2 on this range; the floor covers rounding.
        prop_assert!((s - x).abs() <= 2e-2 * gamma.powi(8) + 1e-14, "ratio {}", (s - x).abs() / gamma.powi(8));
    }

    #[test]
    fn eigenvalues_are_tangent_roots(half in 1usize..=5, gamma in 0.01f64..2.0) {
        let n = 2 * half;
        let a = 4.0 * gamma * gamma;
        let p = ChainParams::new(n, 0.0, a, 1.0).unwrap();
        let e = eigenvalues_bisection(&p, 1e-14).unwrap().eigenvalues;
        let mut xs = Vec::new();
        for &ev in &e {
            let (alpha, _) = alpha_from_cos2((-ev + 2.0) / (2.0 * a));
            let (x, _) = x_y_from_alpha(gamma, alpha).unwrap();
            let r = [Branch::Minus, Branch::Plus]
                .map(|br| tangent_residual_entire(n, Complex64::from(gamma * gamma), Complex64::from(x), br).norm());
            prop_assert!(r[0].min(r[1]) <= 1e-10 * r[0].max(r[1]).max(1.0), "E={} residuals {:?}", ev, r);
            prop_assert!((-lambda_from_x(1.0, gamma, x) - ev).abs() <= 1e-9 * p.energy_scale());
            xs.push((ev, x));
        }
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                if (xs[i].0 - xs[j].0).abs() > 1e-8 {
                    prop_assert!(xs[i].1 != xs[j].1);
                }
            }
        }
    }

    #[test]
    fn swept_curves_are_real_and_admissible(half in 1usize..=4, gamma_max in 0.1f64..2.0) {
        let n = 2 * half;
        let grid: Vec<f64> = (0..=100).map(|i| gamma_max * i as f64 / 100.0).collect();
        let curves = sweep_curves(n, &grid).unwrap();
        prop_assert_eq!(curves.len(), n);
        for c in &curves {
            for (i, x) in c.x_values.iter().enumerate() {
                prop_assert!(x.is_finite());
                let al = c.alpha_values[i];
                match c.alpha_class[i] {
                    AlphaClass::Real => prop_assert!(al.im == 0.0),
                    AlphaClass::PureImaginary => prop_assert!(al.re == 0.0),
                    AlphaClass::PiHalfPlusImaginary => prop_assert!(al.re == std::f64::consts::FRAC_PI_2),
                }
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal(p in chain(1..=12)) {
        let e = eigenvalues_bisection(&p, 1e-14 * p.energy_scale()).unwrap().eigenvalues;
        let pairs = eigenpairs(&p, &e).unwrap();
        for (i, pi) in pairs.iter().enumerate() {
            prop_assert!(pi.residual <= 1e-9 * p.energy_scale());
            for pj in &pairs[i + 1..] {
                let dot: f64 = pi.c.iter().zip(&pj.c).map(|(x, y)| x * y).sum();
                prop_assert!(dot.abs() <= 1e-8);
            }
        }
    }

}

proptest! {
    #![proptest_config(cfg(1000))]

    #[test]
    fn boundary_rank_three_at_simple_eigenvalues(p in chain(4..=10)) {
        let e = eigenvalues_bisection(&p, 1e-14 * p.energy_scale()).unwrap().eigenvalues;
        for (k, &ev) in e.iter().enumerate() {
            let gap = [k.checked_sub(1).map(|j| e[j]), e.get(k + 1).copied()]
                .into_iter()
                .flatten()
                .map(|o| (o - ev).abs())
                .fold(f64::INFINITY, f64::min);
            if gap > 1e-6 * p.energy_scale() {
                prop_assert_eq!(boundary_rank_check(&p, ev).unwrap(), 3);
            }
        }
    }

}

proptest! {
    #![proptest_config(cfg(60))]

    #[test]
    fn ansatz_reproduces_eigenvectors(p in chain(1..=12)) {
        prop_assume!(p.b.abs() >= 0.05 * p.a.abs());
        let e = eigenvalues_bisection(&p, 1e-14 * p.energy_scale()).unwrap().eigenvalues;
        for pair in eigenpairs(&p, &e).unwrap() {
            let fit = ansatz_fit(&p, &pair).unwrap();
            prop_assert!(fit.fit_error <= 1e-7, "fit error {}", fit.fit_error);
        }
    }

    #[test]
    fn degenerate_pairs_span_eigenspace(half in 1usize..=6, b in coupling()) {
        let p = ChainParams::new(2 * half, 0.0, 0.0, b).unwrap();
        let e = spectrum_a_zero(&p).unwrap().eigenvalues;
        let pairs = eigenpairs(&p, &e).unwrap();
        let m = build_hamiltonian(&p).unwrap();
        for k in 0..half {
            let (u, v) = (&pairs[2 * k], &pairs[2 * k + 1]);
            let dot: f64 = u.c.iter().zip(&v.c).map(|(x, y)| x * y).sum();
            prop_assert!(dot.abs() <= 1e-9);
            // Any combination of the pair is again an eigenvector.
            let mix: Vec<f64> = u.c.iter().zip(&v.c).map(|(x, y)| 0.6 * x + 0.8 * y).collect();
            let hm = m.mul_vec(&mix);
            let r: f64 = hm.iter().zip(&mix).map(|(h, c)| (h - e[2 * k] * c).powi(2)).sum::<f64>().sqrt();
            prop_assert!(r <= 1e-9);
        }
    }

    #[test]
    fn omega_is_linear_in_decay(x in 0.1f64..50.0, c in -1.0f64..1.0, g in 0.1f64..10.0) {
        prop_assert_eq!(omega_ij(x, c, 2.0 * g).unwrap(), 2.0 * omega_ij(x, c, g).unwrap());
        let (a, b) = chain_couplings(&DipoleConfig::new(x, c, 2.0 * g).unwrap()).unwrap();
        let (a1, b1) = chain_couplings(&DipoleConfig::new(x, c, g).unwrap()).unwrap();
        prop_assert_eq!((a, b), (2.0 * a1, 2.0 * b1));
    }

    #[test]
    fn omega_is_continuous(x in 0.5f64..50.0, c in -1.0f64..1.0) {
        let h = 1e-7;
        let d = (omega_ij(x + h, c, 1.0).unwrap() - omega_ij(x, c, 1.0).unwrap()).abs();
        prop_assert!(d <= 1e-5);
    }
}

#[test]
fn perpendicular_coupling_decays() {
    assert!(omega_ij(7.0, 0.0, 1.0).unwrap().abs() < omega_ij(1.0, 0.0, 1.0).unwrap().abs());
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("nnn-chain").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn cli_is_reproducible() {
    for args in [
        &["verify-cpoly", "--n-max", "6", "--draws", "20", "--seed", "3"][..],
        &["spectrum", "--n", "9", "--a", "0.7", "--b", "-0.3"][..],
        &["curves", "--n", "4", "--gamma-steps", "50"][..],
    ] {
        let first = run_cli(args);
        assert_eq!(first.0, 0);
        assert_eq!(first, run_cli(args));
    }
}

#[test]
fn cli_json_and_csv_agree() {
    let base = ["spectrum", "--n", "7", "--a", "0.9", "--b", "0.4", "--omega0", "0.2"];
    let (_, csv) = run_cli(&base);
    let (_, json) = run_cli(&[&base[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), lines.len());
    for (row, line) in rows.iter().zip(lines) {
        let sig = |v: f64| format!("{v:.11e}");
        let cells: Vec<String> = line.split(',').map(|c| sig(c.parse().unwrap())).collect();
        for (cell, key) in cells.iter().zip(["k", "E", "residual"]) {
            assert_eq!(*cell, sig(row[key].as_f64().unwrap()));
        }
    }
}
