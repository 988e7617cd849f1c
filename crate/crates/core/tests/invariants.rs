use fraclap::certificates::{certify, singular_constants, theta_smooth, verify_bounds};
use fraclap::continuation::{continue_arclength, locate_fold, ArclengthOptions};
use fraclap::solver::{newton_solve, residual};
use fraclap::truncation::{truncated_fixed_point, FixedPointOptions, SubSuperPair};
use fraclap::{NewtonOptions, PeriodicGrid, ProblemSpec, ScalarFn, SpectralField};
use proptest::prelude::*;

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fold_lies_between_theta_and_t_star(a in 0.0f64..1.0, s in 0.3f64..0.8) {
        let h = SpectralField::sample(grid(), |x| a * x.cos()).unwrap();
        let p = ProblemSpec::smooth(s, 1.0, 2.0, h, ScalarFn::square(), true).unwrap();
        let seed = newton_solve(&SpectralField::constant(grid(), 1.5), &p, &NewtonOptions::default()).unwrap();
        let opts = ArclengthOptions { ds: 0.1, max_steps: 200, t_max: 2.0, ..Default::default() };
        let branch = continue_arclength(&p, &seed, &opts).unwrap();
        for (pt, step) in branch.points.iter().zip(&branch.steps).skip(1) {
            prop_assert!(pt.residual_sup <= 1e-10);
            prop_assert!(*step <= opts.ds && *step >= opts.ds_min);
        }
        for tan in &branch.tangents {
            let n = tan.du.len() as f64;
            let norm = tan.du.iter().map(|v| v * v).sum::<f64>() / n + tan.dt * tan.dt;
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
        let fold = locate_fold(&p, &branch, &NewtonOptions::default()).unwrap();
        let rep = {
            let mut r = certify(&p, None).unwrap();
            r.set_fold(fold.t1);
            r
        };
        prop_assert!((theta_smooth(&p, 1.0).unwrap() + a).abs() < 1e-12);
        prop_assert!(rep.theta.unwrap() <= fold.t1 + 1e-6);
        prop_assert!(fold.t1 <= rep.t_star.unwrap() + 1e-6);
        prop_assert_eq!(rep.flags.get("theta_le_t1"), Some(&true));
    }

    #[test]
    fn singular_theta_below_t_star(mu in 1.0f64..4.0, b in 0.1f64..5.0, amp in 0.0f64..0.9) {
        let beta = SpectralField::sample(grid(), |x| b * (1.0 + amp * x.cos())).unwrap();
        let k = singular_constants(mu, &beta, None).unwrap();
        prop_assert!(k.theta <= k.t_star * (1.0 + 1e-12));
    }

    #[test]
    fn mems_solutions_respect_bounds(t in 2.2f64..4.0, amp in 0.0f64..0.5) {
        let beta = SpectralField::sample(grid(), |x| 1.0 + amp * x.cos()).unwrap();
        let p = ProblemSpec::singular_mems(0.5, 1.0, t, 2.0, beta).unwrap();
        let sol = newton_solve(&SpectralField::constant(grid(), t), &p, &NewtonOptions::default()).unwrap();
        let rep = certify(&p, None).unwrap();
        for f in verify_bounds(&sol, &rep, &p).unwrap() {
            prop_assert!(f.pass, "{:?}", f);
        }
    }

    #[test]
    fn truncated_solution_is_sandwiched(a in 0.0f64..0.5) {
        let h = SpectralField::sample(grid(), |x| a * x.sin()).unwrap();
        let p = ProblemSpec::smooth(0.5, 1.0, 1.0, h, ScalarFn::square(), true).unwrap();
        let pair = SubSuperPair::new(&p, SpectralField::constant(grid(), -3.0), SpectralField::zeros(grid())).unwrap();
        let out = truncated_fixed_point(&p, &pair, &FixedPointOptions::default()).unwrap();
        let u = &out.solution.u;
        prop_assert!(u.min() >= -3.0 - 1e-12 && u.max() <= 1e-12);
        prop_assert!(residual(u, &p).unwrap().sup() <= 1e-10);
    }
}
