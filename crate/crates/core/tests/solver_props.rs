mod common;

use proptest::prelude::*;
use rand::Rng;
use sk_core::arnoldi::{krylov_basis_oracle, Arnoldi, ArnoldiStatus, DEFAULT_BREAKDOWN_TOL};
use sk_core::dense::{
    matmul, norm2, orthogonality_defect, singular_values, spectral_norm, sub_vec, tr_matmul,
};
use sk_core::solvers::{gmres, rr_gmres, SolverConfig};
use sk_core::subspaces::{classify, solution_triple_from, ClassifyTolerance};

fn rank_for(seed: u64, n: usize) -> usize {
    1 + (seed as usize) % (n - 1).max(1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn arnoldi_relation_and_orthogonality(seed in any::<u64>(), n in 2usize..=14) {
        let mut rng = common::rng(seed);
        let a = common::gaussian(&mut rng, n, n);
        let start = common::gaussian_vec(&mut rng, n);
        let mut arn = Arnoldi::new(&a, &start, DEFAULT_BREAKDOWN_TOL).unwrap();
        let a_norm = spectral_norm(&a).unwrap();
        while arn.is_running() && arn.steps() < n {
            arn.step().unwrap();
            let k = arn.steps();
            let q = arn.basis();
            prop_assert!(orthogonality_defect(&q) <= 1e-13 * q.cols() as f64);
            let h = arn.hessenberg();
            let lhs = matmul(&a, &arn.basis_k()).unwrap();
            let rhs = matmul(&q.leading_columns(0..h.rows().min(q.cols())), &h.submatrix(0..h.rows().min(q.cols()), 0..k)).unwrap();
            prop_assert!(spectral_norm(&lhs.sub(&rhs).unwrap()).unwrap() <= 1e-12 * a_norm * k as f64);
            prop_assert!(singular_values(&h).unwrap()[0] <= a_norm + 1e-10);
            for j in 0..k {
                for i in j + 2..h.rows() {
                    prop_assert_eq!(h.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn arnoldi_span_matches_power_basis(seed in any::<u64>(), n in 3usize..=10) {
        let mut rng = common::rng(seed);
        let a = common::gaussian(&mut rng, n, n).scaled(1.0 / (n as f64).sqrt());
        let start = common::gaussian_vec(&mut rng, n);
        let mut arn = Arnoldi::new(&a, &start, DEFAULT_BREAKDOWN_TOL).unwrap();
        let mut k = 0;
        while k < n.min(5) {
            if arn.step().unwrap() != ArnoldiStatus::Running {
                break;
            }
            k = arn.steps();
            let h = arn.hessenberg();
            if h.get(k, k - 1) <= 1e-6 {
                break;
            }
            let oracle = krylov_basis_oracle(&a, &start, k).unwrap();
            prop_assume!(oracle.cols() == k);
            // Sine of the largest principal angle: ||(I - Q Q^T) Z||.
            let q = arn.basis_k();
            let proj = matmul(&q, &tr_matmul(&q, &oracle).unwrap()).unwrap();
            let sine = spectral_norm(&oracle.sub(&proj).unwrap()).unwrap();
            prop_assert!(sine <= 1e-8, "k={k}: sine {sine:e}");
        }
    }

    #[test]
    fn residual_is_monotone_and_h_norm_bounded(seed in any::<u64>(), n in 2usize..=14, kind in 0u8..3) {
        let mut rng = common::rng(seed);
        let r = rank_for(seed, n);
        let a = match kind {
            0 => common::gaussian(&mut rng, n, n),
            1 => common::random_ep(&mut rng, n, r),
            _ => common::random_singular(&mut rng, n, r),
        };
        let b = common::gaussian_vec(&mut rng, n);
        let a_norm = spectral_norm(&a).unwrap();
        let cfg = SolverConfig::default();
        for t in [Some(gmres(&a, &b, &vec![0.0; n], &cfg).unwrap()), rr_gmres(&a, &b, &vec![0.0; n], &cfg).ok()].into_iter().flatten() {
            let bn = norm2(&b);
            let mut prev = norm2(&t.r0);
            for s in &t.steps {
                let cur = norm2(&s.r);
                prop_assert!(cur <= prev + 1e-10 * bn, "{:?} k={} {cur:e} > {prev:e}", t.method, s.iter);
                prev = cur;
                prop_assert!(s.sigma_max_h <= a_norm + 1e-10);
            }
        }
    }

    #[test]
    fn rr_residual_bounded_by_next_gmres(seed in any::<u64>(), n in 3usize..=12) {
        let mut rng = common::rng(seed);
        let a = common::random_ep(&mut rng, n, rank_for(seed, n));
        let b = common::gaussian_vec(&mut rng, n);
        let cfg = SolverConfig::default();
        let g = gmres(&a, &b, &vec![0.0; n], &cfg).unwrap();
        let r = rr_gmres(&a, &b, &vec![0.0; n], &cfg).unwrap();
        // RR step k searches A K_k(A, r0), which lies inside K_{k+1}(A, r0).
        for (k, rs) in r.steps.iter().enumerate() {
            let simpler = r.simpler_gmres_resnorm[k];
            prop_assert!(simpler <= norm2(&rs.r) + 1e-10 * norm2(&b));
            if let Some(gs) = g.steps.get(k + 1) {
                prop_assert!(norm2(&gs.r) <= norm2(&rs.r) + 1e-10 * norm2(&b));
            }
        }
    }

    #[test]
    fn consistent_gp_converges_to_group_solution(seed in any::<u64>(), n in 3usize..=12) {
        let mut rng = common::rng(seed);
        let a = common::random_gp(&mut rng, n, rank_for(seed, n));
        let b = common::range_vector(&mut rng, &a);
        let x0 = common::gaussian_vec(&mut rng, n);
        let profile = classify(&a, ClassifyTolerance::default()).unwrap();
        let t = gmres(&a, &b, &x0, &SolverConfig::default()).unwrap();
        let g = profile.group_inverse().unwrap();
        let xs = g.matvec(&b).unwrap();
        let ga_x0 = g.matvec(&a.matvec(&x0).unwrap()).unwrap();
        let expected: Vec<f64> = xs.iter().zip(&x0).zip(&ga_x0).map(|((s, x), p)| s + x - p).collect();
        let err = norm2(&sub_vec(t.final_x(), &expected));
        prop_assert!(err <= 1e-6 * norm2(&xs), "err {err:e} vs ||x#|| {:e}", norm2(&xs));
    }

    #[test]
    fn ep_runs_reach_least_squares_solution(seed in any::<u64>(), n in 3usize..=12) {
        let mut rng = common::rng(seed);
        let a = common::random_ep(&mut rng, n, rank_for(seed, n));
        let b = common::gaussian_vec(&mut rng, n);
        let profile = classify(&a, ClassifyTolerance::default()).unwrap();
        let triple = solution_triple_from(&a, &b, &profile).unwrap();
        let t = gmres(&a, &b, &vec![0.0; n], &SolverConfig::default()).unwrap();
        let kappa = profile.kappa_a().unwrap();
        let atb = norm2(&a.tr_matvec(&b).unwrap());
        let atr = norm2(&a.tr_matvec(t.final_r()).unwrap());
        prop_assert!(atr <= 1e-6 * atb * kappa);
        let u2 = profile.svd().u2();
        for s in &t.steps {
            let d = sub_vec(&s.r, &triple.r_star);
            prop_assert!(norm2(&u2.tr_matvec(&d).unwrap()) <= 1e-9 * norm2(&b));
        }
    }

    #[test]
    fn hessenberg_condition_dominates_sampled_restriction(seed in any::<u64>(), n in 3usize..=8) {
        let mut rng = common::rng(seed);
        let a = common::gaussian(&mut rng, n, n);
        let b = common::gaussian_vec(&mut rng, n);
        let t = gmres(&a, &b, &vec![0.0; n], &SolverConfig::default()).unwrap();
        for s in t.steps.iter().filter(|s| s.iter >= 2) {
            let z = krylov_basis_oracle(&a, &b, s.iter).unwrap();
            prop_assume!(z.cols() == s.iter);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
            for _ in 0..2000 {
                let c: Vec<f64> = (0..z.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = z.matvec(&c).unwrap();
                let ratio = norm2(&a.matvec(&v).unwrap()) / norm2(&v);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            prop_assert!(hi / lo <= s.kappa_h * (1.0 + 1e-6));
        }
    }
}
