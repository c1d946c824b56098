use quasimode_core::sweep::{blow_up, fit_slopes, geometric_grid, read_csv, run_sweep, upper_bound_audit, CSV_COLUMNS};
use quasimode_core::{select_parameters, HomogeneousPotential, QuadratureConfig, QuasimodeFamily};

#[test]
fn sweep_csv_fit_round_trip() {
    let plan = select_parameters(2, 0.0, 4.0).unwrap();
    let family = QuasimodeFamily::new(HomogeneousPotential::builtin("quad", 2, 0.0).unwrap(), plan.gamma).unwrap();
    let radii = geometric_grid(2.0, 4, 9).unwrap();
    let result = run_sweep(&plan, &family, &radii, &QuadratureConfig::default()).unwrap();
    assert!(result.failures().is_empty());
    // the quadratic profile has no Taylor remainder
    assert!(result.records.iter().all(|r| r.norm_rem == 0.0));

    let mut buf = Vec::new();
    result.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), CSV_COLUMNS.join(","));
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), radii.len());
    for (a, b) in result.records.iter().zip(&back) {
        assert_eq!(a.norm_w, b.norm_w);
        assert!((a.ratio_quotient - b.ratio_quotient).abs() <= 1e-15 * a.ratio_quotient);
    }

    let slopes = fit_slopes(&back, &plan, 0.02).unwrap();
    assert!(slopes.passed, "{slopes:?}");
    let audit = upper_bound_audit(&back, &plan, 0.02).unwrap();
    assert!(audit.passed);
    assert!(audit.get("norm_rem").unwrap().vacuous);
    let b = blow_up(&back, 10.0);
    assert!(b.strictly_increasing);
    assert!(b.extrapolated_crossing.is_some());
}
