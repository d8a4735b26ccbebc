use modtop::diagnostics::{check_linf_isomorphism, LinfVerdict};
use modtop::dirichlet::{assemble_energy_from_nodes, energy_gradient, energy_value};
use modtop::exponent::ExponentSpec;
use modtop::luxemburg::{luxemburg_norm, scaled_luxemburg_norm, NormOptions};
use modtop::modular::{eval_seq_modular, scaled_modular, verify_seq_certificate, DivergenceCertificate};
use modtop::sequence::{Run, Tail};
use modtop::{modular, Element, EvalConfig, SequenceVec};
use proptest::prelude::*;

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

/// Table exponent plus two vectors of matching dimension.
fn table_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|d| {
        (
            prop::collection::vec(1.0f64..7.0, d),
            prop::collection::vec(-3.0f64..3.0, d),
            prop::collection::vec(-3.0f64..3.0, d),
        )
    })
}

fn seq(v: &[f64]) -> SequenceVec {
    SequenceVec::from_values(v).unwrap()
}

fn ev(x: &SequenceVec, p: &ExponentSpec) -> f64 {
    eval_seq_modular(x, p, &cfg()).unwrap().value().expect("finite")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modular_axioms((pv, xv, yv) in table_case()) {
        let p = ExponentSpec::table(pv).unwrap();
        let (x, y) = (seq(&xv), seq(&yv));
        prop_assert_eq!(ev(&SequenceVec::zero(), &p), 0.0);
        prop_assert_eq!(ev(&x.neg(), &p), ev(&x, &p));
        for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mix = SequenceVec::lin_comb(a, &x, 1.0 - a, &y);
            let rhs = a * ev(&x, &p) + (1.0 - a) * ev(&y, &p);
            prop_assert!(ev(&mix, &p) <= rhs + 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn matches_direct_summation((pv, xv, _) in table_case()) {
        let direct: f64 = xv.iter().zip(&pv).map(|(a, q)| a.abs().powf(*q)).sum();
        let p = ExponentSpec::table(pv).unwrap();
        let v = ev(&seq(&xv), &p);
        prop_assert!((v - direct).abs() <= 1e-14 * direct.max(f64::MIN_POSITIVE), "{} vs {}", v, direct);
    }

    #[test]
    fn scaling_is_monotone(xv in prop::collection::vec(-2.0f64..2.0, 1..20), l1 in 0.01f64..3.0, dl in 0.0f64..3.0) {
        let p = ExponentSpec::identity();
        let x: Element = seq(&xv).into();
        let a = scaled_modular(&x, &p, l1, &cfg()).unwrap();
        let b = scaled_modular(&x, &p, l1 + dl, &cfg()).unwrap();
        if let (Some(a), Some(b)) = (a.value(), b.value()) {
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn prefixes_increase_to_the_modular(xv in prop::collection::vec(-0.9f64..0.9, 0..12), c in -0.9f64..0.9) {
        let p = ExponentSpec::identity();
        let runs = if xv.is_empty() { Vec::new() } else {
            xv.iter().enumerate().map(|(i, &v)| Run { start: i as u64 + 1, end: i as u64 + 1, value: v }).collect()
        };
        let x = SequenceVec::from_runs(runs, Tail::Constant(c)).unwrap();
        let full = eval_seq_modular(&x, &p, &cfg()).unwrap();
        prop_assert!(full.is_finite());
        let total = full.value().unwrap() + full.abs_err().unwrap();
        let mut prev = 0.0;
        for n in [1u64, 2, 4, 8, 16, 64, 256, 1024] {
            let v = ev(&x.prefix(n), &p);
            prop_assert!(v >= prev && v <= total + 1e-12);
            prev = v;
        }
        prop_assert!(total - prev <= 1e-9 + c.abs().powi(1024) / (1.0 - c.abs()));
    }

    #[test]
    fn divergence_certificates_recheck(xv in prop::collection::vec(-3.0f64..3.0, 0..10), c in 1.0f64..3.0, slope in 0.0f64..2.0) {
        let p = ExponentSpec::affine(slope, 1.0).unwrap();
        let runs = xv.iter().enumerate().map(|(i, &v)| Run { start: i as u64 + 1, end: i as u64 + 1, value: v }).collect();
        let x = SequenceVec::from_runs(runs, Tail::Constant(-c)).unwrap();
        let v = eval_seq_modular(&x, &p, &cfg()).unwrap();
        prop_assert!(v.is_infinite());
        let cert = v.certificate().unwrap();
        prop_assert!(verify_seq_certificate(&x, &p, cert));
        if let DivergenceCertificate::TermsBounded { first, last, delta, nondecreasing } = cert {
            let mut prev = 0.0;
            for n in *first..=(*last).min(*first + 1000) {
                let t = x.value_at(n).abs().powf(p.seq_value(n));
                prop_assert!(t >= delta * (1.0 - 1e-12));
                prop_assert!(!nondecreasing || t >= prev * (1.0 - 1e-12));
                prev = t;
            }
        }
    }

    #[test]
    fn norm_axioms((pv, xv, yv) in table_case(), c in prop::sample::select(vec![-2.0, -1.0, 0.5, 3.0])) {
        let p = ExponentSpec::table(pv).unwrap();
        let opts = NormOptions::with_tol(1e-12);
        let (x, y): (Element, Element) = (seq(&xv).into(), seq(&yv).into());
        let n = |e: &Element| luxemburg_norm(e, &p, &opts).unwrap().value;
        let nx = n(&x);
        let tol = 1e-10;
        prop_assert!((n(&x.scale(c)) - c.abs() * nx).abs() <= 2.0 * tol * (c.abs() * nx).max(1.0));
        let ny = n(&y);
        prop_assert!(n(&Element::lin_comb(1.0, &x, 1.0, &y).unwrap()) <= nx + ny + 2.0 * tol * (nx + ny).max(1.0));
        prop_assert!(seq(&xv).sup_abs() <= nx + tol);
        for a in [0.25, 0.5, 2.0, 4.0] {
            let s = scaled_luxemburg_norm(&x, &p, a, &opts).unwrap().value;
            let (lo, hi) = if a < 1.0 { (a * nx, nx) } else { (nx, a * nx) };
            prop_assert!(lo <= s + 1e-8 && s <= hi + 1e-8);
        }
    }

    #[test]
    fn bounded_exponents_double_boundedly((pv, xv, _) in table_case(), j in 1u32..40) {
        let sup = pv.iter().cloned().fold(f64::MIN, f64::max);
        let p = ExponentSpec::table(pv).unwrap();
        let x: Element = seq(&xv).scale(2f64.powi(-(j as i32))).into();
        let r1 = modular(&x, &p, &cfg()).unwrap().value().unwrap();
        let r2 = modular(&x.scale(2.0), &p, &cfg()).unwrap().value().unwrap();
        prop_assert!(r2 <= 2f64.powf(sup) * r1 * (1.0 + 1e-12));
    }

    #[test]
    fn linf_verdict_agrees_with_its_witness(slope in 0.05f64..3.0, intercept in 1.0f64..3.0) {
        let p = ExponentSpec::affine(slope, intercept).unwrap();
        match check_linf_isomorphism(&p, &cfg()).unwrap() {
            LinfVerdict::Isomorphic { lambda, .. } => {
                prop_assert!(eval_seq_modular(&SequenceVec::constant(lambda), &p, &cfg()).unwrap().is_finite());
                if lambda < 0.5 {
                    // the search takes the largest dyadic scale that works
                    prop_assert!(!eval_seq_modular(&SequenceVec::constant(2.0 * lambda), &p, &cfg()).unwrap().is_finite());
                }
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn energy_convex_and_gradient_exact(
        n in prop::sample::select(vec![8usize, 16, 32]),
        slope in 0.0f64..2.0,
        seed in prop::collection::vec(-0.5f64..0.5, 99),
        shift in -2.0f64..2.0,
    ) {
        let p = ExponentSpec::affine(slope, 2.0).unwrap();
        let phi: Vec<f64> = seed[..=n].to_vec();
        let prob = assemble_energy_from_nodes(n, &p, phi.clone()).unwrap();
        let u: Vec<f64> = seed[33..33 + n - 1].to_vec();
        let v: Vec<f64> = seed[66..66 + n - 1].iter().map(|a| -a).collect();
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let (fu, fv) = (energy_value(&prob, &u), energy_value(&prob, &v));
        prop_assert!(energy_value(&prob, &mid) <= 0.5 * fu + 0.5 * fv + 1e-12);

        let g = energy_gradient(&prob, &u);
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..u.len() {
            let (mut a, mut b) = (u.clone(), u.clone());
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (energy_value(&prob, &a) - energy_value(&prob, &b)) / 2e-6;
            prop_assert!((fd - g[i]).abs() < 1e-6 * gmax.max(1e-300), "{} vs {}", fd, g[i]);
        }

        // shifting phi by a constant leaves every slope of u - phi unchanged
        let shifted = assemble_energy_from_nodes(n, &p, phi.iter().map(|x| x + shift).collect()).unwrap();
        let direct: f64 = (0..n)
            .map(|i| {
                let w = |k: usize| if k == 0 || k == n { 0.0 } else { u[k - 1] } - (phi[k] + shift);
                prob.h * ((w(i + 1) - w(i)) / prob.h).abs().powf(prob.exponents[i])
            })
            .sum();
        let fs = energy_value(&shifted, &u);
        prop_assert!((fs - direct).abs() <= 1e-12 * direct.max(1.0));
        prop_assert!((fs - fu).abs() <= 1e-9 * fu.max(1.0));
    }
}
