use fraclap::certificates::verify_identities;
use fraclap::continuation::{continue_arclength, ArclengthOptions};
use fraclap::io::{branch_csv, fields_csv, import_branch, import_fields, BranchRow};
use fraclap::solver::newton_solve;
use fraclap::{NewtonOptions, PeriodicGrid, ProblemSpec, Solution, SpectralField};

#[test]
fn exported_branch_reproduces_identity_residuals() {
    let g = PeriodicGrid::new(32).unwrap();
    let beta = SpectralField::sample(g, |x| 1.0 + 0.5 * x.cos()).unwrap();
    let p = ProblemSpec::singular_mems(0.5, 1.0, 3.0, 2.0, beta).unwrap();
    let seed = newton_solve(&SpectralField::constant(g, 2.9), &p, &NewtonOptions::default()).unwrap();
    let opts = ArclengthOptions {
        ds: 0.2,
        max_steps: 12,
        ..Default::default()
    };
    let branch = continue_arclength(&p, &seed, &opts).unwrap();

    let rows = BranchRow::rows(&branch);
    assert_eq!(import_branch(&branch_csv(&rows).unwrap()).unwrap(), rows);

    let back = import_fields(&fields_csv(&branch.points).unwrap()).unwrap();
    assert_eq!(back.len(), branch.points.len());
    for (rec, pt) in back.iter().zip(&branch.points) {
        let u = SpectralField::from_values(g, rec.values.clone()).unwrap();
        let re = Solution::new(u, rec.t, pt.residual_sup, pt.tol, pt.iterations);
        let pt_p = p.with_t(rec.t.unwrap());
        let a = verify_identities(pt, &pt_p).unwrap();
        let b = verify_identities(&re, &pt_p).unwrap();
        assert!((a.mean_value - b.mean_value).abs() <= 1e-12);
        assert!((a.drift_energy.unwrap() - b.drift_energy.unwrap()).abs() <= 1e-12);
        assert!((a.fractional_mean - b.fractional_mean).abs() <= 1e-12);
        assert!((a.fractional_drift - b.fractional_drift).abs() <= 1e-12);
    }
}
