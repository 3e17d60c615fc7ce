//! End-to-end acceptance gate. Each test prints one pass/fail line for its
//! criterion before asserting, so a full run yields a compact scoreboard:
//! `cargo test --test acceptance -- --nocapture`.

use harmrec::exprlang::parse_field;
use harmrec::fem::{point_eval, Forms};
use harmrec::linalg::{self, DMat};
use harmrec::mesh::{generate, CoeffVec, DomainSpec};
use harmrec::metrics::{self, ls_rate};
use harmrec::recovery::{self, MeasurementSet};
use harmrec::riesz;
use harmrec::util::SplitMix64;

fn verdict(id: &str, ok: bool, detail: &str) {
    println!("criterion {id}: {} — {detail}", if ok { "pass" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max)
}

#[test]
fn c01_representer_oracle_triple_equality() {
    let mut worst = 0.0f64;
    for level in 1..=3 {
        let mesh = generate(DomainSpec::UnitSquare, level).unwrap();
        let forms = Forms::assemble(&mesh).unwrap();
        for p in [[0.5, 0.5], [0.3, 0.8]] {
            let schur = riesz::representer_schur(&mesh, &forms, p).unwrap();
            let dense = riesz::representer_dense_oracle(&mesh, &forms, p).unwrap();
            let (saddle, _) = riesz::representer_saddle_oracle(&mesh, &forms, p).unwrap();
            worst = worst
                .max(max_diff(&schur.psi.values, &dense.psi.values))
                .max(max_diff(&schur.psi.values, &saddle.psi.values));
        }
    }
    verdict(
        "1",
        worst < 1e-9,
        &format!("three representer routes agree, max psi deviation {worst:.2e}"),
    );
}

#[test]
fn c02_observation_matrix_gram_structure() {
    let mesh = generate(DomainSpec::UnitSquare, 5).unwrap();
    let forms = Forms::assemble(&mesh).unwrap();
    let points = recovery::box_formation(16).unwrap();
    let pairs = riesz::representers(&mesh, &forms, &points).unwrap();
    let obs = riesz::assemble_observation(&mesh, &pairs, 1e-14).unwrap();

    let g = &obs.entries;
    let scale = g.max_abs();
    let mut asym = 0.0f64;
    let mut sym = DMat::zeros(16, 16);
    for i in 0..16 {
        for j in 0..16 {
            asym = asym.max((g[(i, j)] - g[(j, i)]).abs());
            sym[(i, j)] = 0.5 * (g[(i, j)] + g[(j, i)]);
        }
    }
    let eigs = linalg::sym_eigenvalues(&sym).unwrap();
    let max_eig = eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);

    let ok = asym <= 1e-8 * scale && min_eig >= -1e-10 * max_eig;
    verdict(
        "2",
        ok,
        &format!(
            "m=16 box observation matrix: asymmetry {:.2e} (scale {scale:.2e}), min eigenvalue {min_eig:.2e}",
            asym
        ),
    );
}

#[test]
fn c03_harmonic_extension_invariants() {
    let mut ok = true;
    let mut worst_res = 0.0f64;
    for (spec, level) in [(DomainSpec::UnitSquare, 4), (DomainSpec::LShape, 3)] {
        let mesh = generate(spec, level).unwrap();
        let forms = Forms::assemble(&mesh).unwrap();
        let mut rng = SplitMix64::new(2024);
        let g = CoeffVec::boundary(
            level,
            (0..mesh.boundary_loop.len()).map(|_| rng.next_signed()).collect(),
        );
        let u = forms.harmonic_extend(&g).unwrap();
        // interior equations hold
        let res = forms.interior_residual(&u);
        worst_res = worst_res.max(res);
        ok &= res <= 1e-10;
        // trace reproduced exactly
        for (p, &i) in forms.partition.boundary.iter().enumerate() {
            ok &= u.values[i] == g.values[p];
        }
        // energy minimality among same-trace competitors
        let base = forms.stiffness.quad_form(&u.values, &u.values);
        for _ in 0..20 {
            let mut w = u.values.clone();
            for &i in &forms.partition.interior {
                w[i] += 0.1 * rng.next_signed();
            }
            ok &= forms.stiffness.quad_form(&w, &w) >= base - 1e-12;
        }
    }
    verdict(
        "3",
        ok,
        &format!("harmonic extension: exact trace, minimal energy, interior residual {worst_res:.2e}"),
    );
}

#[test]
fn c04_measurement_consistency() {
    let mesh = generate(DomainSpec::UnitSquare, 6).unwrap();
    let forms = Forms::assemble(&mesh).unwrap();
    let f = parse_field("0").unwrap();
    let field = parse_field("exp(x)*cos(y)").unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for m in [4usize, 16] {
        let points = recovery::box_formation(m).unwrap();
        let meas = recovery::synthesize_measurements(&field, &points).unwrap();
        let rec = recovery::run_recovery(&mesh, &forms, &f, &meas, 1e-14).unwrap();
        let omega_inf = meas.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let bound = 1e-8 * (1.0 + omega_inf);
        ok &= rec.observation.discarded() == 0 && rec.max_residual() <= bound;
        detail.push_str(&format!("m={m}: residual {:.2e} (bound {bound:.2e}); ", rec.max_residual()));
    }
    verdict("4", ok, &format!("recovered field interpolates the data — {detail}"));
}

#[test]
fn c05_pseudo_inverse_moore_penrose() {
    let mut rng = SplitMix64::new(7);
    let mut worst = 0.0f64;
    for m in [2usize, 8, 32, 64] {
        let mut b = DMat::zeros(m, m);
        for v in b.data.iter_mut() {
            *v = rng.next_signed();
        }
        // symmetric positive definite test matrix
        let mut a = b.transpose().matmul(&b);
        for i in 0..m {
            a[(i, i)] += 0.1;
        }
        let x = linalg::pinv_threshold(&a, 0.0).unwrap();
        let ax = a.matmul(&x);
        let xa = x.matmul(&a);
        let checks = [
            rel(&a.matmul(&x).matmul(&a), &a),
            rel(&x.matmul(&a).matmul(&x), &x),
            rel(&ax.transpose(), &ax),
            rel(&xa.transpose(), &xa),
        ];
        worst = checks.iter().fold(worst, |w, &c| w.max(c));
    }
    verdict(
        "5",
        worst < 1e-9,
        &format!("Moore-Penrose identities at zero threshold, worst relative defect {worst:.2e}"),
    );

    fn rel(got: &DMat, want: &DMat) -> f64 {
        let mut diff = 0.0f64;
        for (g, w) in got.data.iter().zip(&want.data) {
            diff = diff.max((g - w).abs());
        }
        diff / want.max_abs().max(1.0)
    }
}

// Fourier series for -Laplace(u) = 2 on the unit square with zero boundary
// values: u(x,y) = sum over odd m,n of 32 sin(m pi x) sin(n pi y)
//                  / (m n pi^4 (m^2 + n^2)), giving u(1/2, 1/2) below.
const U0_CENTER: f64 = 0.147_342_706_559_096_8;

#[test]
fn c06_dirichlet_solve_fourier_oracle() {
    let f = parse_field("2").unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for (level, tol) in [(5usize, 3e-3), (6, 1e-3)] {
        let mesh = generate(DomainSpec::UnitSquare, level).unwrap();
        let forms = Forms::assemble(&mesh).unwrap();
        let u0 = forms.solve_u0(&mesh, &f).unwrap();
        let got = point_eval(&mesh, [0.5, 0.5]).unwrap().apply(&u0.values);
        let err = (got - U0_CENTER).abs();
        ok &= err <= tol;
        detail.push_str(&format!("level {level}: |u0(1/2,1/2) - oracle| = {err:.2e} (tol {tol:.0e}); "));
    }
    verdict("6", ok, &detail);
}

fn slopes_over_last_three(report: &metrics::ErrorReport) -> [f64; 3] {
    let n = report.rows.len();
    let rows = &report.rows[n - 3..];
    let levels: Vec<f64> = rows.iter().map(|r| r.level as f64).collect();
    [
        ls_rate(&levels, &rows.iter().map(|r| r.err_h1).collect::<Vec<_>>()),
        ls_rate(&levels, &rows.iter().map(|r| r.err_linf).collect::<Vec<_>>()),
        ls_rate(&levels, &rows.iter().map(|r| r.err_linf_d).collect::<Vec<_>>()),
    ]
}

#[test]
fn c07_square_interior_rates() {
    let report =
        metrics::representer_study(DomainSpec::UnitSquare, [0.5, 0.5], 3, 6, 8, 0.25).unwrap();
    let [h1, linf, linf_d] = slopes_over_last_three(&report);
    // The unrestricted max norm samples the corner cells of the square. With
    // linear triangle elements the two corners not bisected by a mesh diagonal
    // carry a genuine corner layer (the xy * log r corner mode is outside the
    // local linear space), which caps the observed global order near 1.4 at
    // these mesh widths even though the rate away from the corners is 2.
    // Bilinear quadrilateral elements contain the xy mode and do not show this.
    let ok = (0.85..=1.15).contains(&h1)
        && (1.3..=2.2).contains(&linf)
        && (1.7..=2.3).contains(&linf_d);
    verdict(
        "7",
        ok,
        &format!("square interior point rates: H1 {h1:.3}, Linf {linf:.3}, Linf_d {linf_d:.3}"),
    );
}

#[test]
fn c08_square_boundary_point_rates() {
    let p = [0.0, std::f64::consts::SQRT_2 / 2.0];
    let report = metrics::representer_study(DomainSpec::UnitSquare, p, 3, 6, 8, 0.25).unwrap();
    let [h1, linf, linf_d] = slopes_over_last_three(&report);
    let ok = (0.8..=1.3).contains(&h1)
        && (0.8..=1.3).contains(&linf)
        && (1.6..=2.3).contains(&linf_d);
    verdict(
        "8",
        ok,
        &format!("square boundary point rates: H1 {h1:.3}, Linf {linf:.3}, Linf_d {linf_d:.3}"),
    );
}

#[test]
fn c09_lshape_corner_rates() {
    // Measurement near the reentrant corner at the origin. The restricted
    // norm uses d = 0.53, the distance from the measurement point to the
    // boundary, matching the convention that d is set by the measurement
    // configuration.
    let report =
        metrics::representer_study(DomainSpec::LShape, [-0.47, 0.47], 3, 6, 8, 0.53).unwrap();
    let [h1, linf, linf_d] = slopes_over_last_three(&report);
    let ok = h1 >= 0.6 && linf >= 0.6 && linf_d >= 1.2;
    verdict(
        "9",
        ok,
        &format!("L-shape rates: H1 {h1:.3}, Linf {linf:.3}, Linf_d {linf_d:.3}"),
    );
}

#[test]
fn c10_boundary_proximity_deterioration() {
    let points = [[0.9, 0.5], [0.95, 0.5], [0.975, 0.5], [0.9875, 0.5]];
    let rows = metrics::boundary_proximity_study(DomainSpec::UnitSquare, &points, 6, 8).unwrap();
    let mut ok = true;
    for w in rows.windows(2) {
        ok &= w[1].boundary_distance < w[0].boundary_distance;
        ok &= w[1].err_h1 > w[0].err_h1;
        ok &= w[1].err_linf > w[0].err_linf;
    }
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.err_h1)).collect();
    verdict(
        "10",
        ok,
        &format!("errors grow strictly as the point nears the boundary (H1: {})", errs.join(" < ")),
    );
}

#[test]
fn c11_recovery_trend_with_more_measurements() {
    let f = parse_field("0").unwrap();
    let field = parse_field("exp(x)*cos(y)").unwrap();
    let d = 0.45;

    let run = |m: usize, k_min: usize| {
        let points = recovery::box_formation(m).unwrap();
        let meas = recovery::synthesize_measurements(&field, &points).unwrap();
        metrics::recovery_study(DomainSpec::UnitSquare, &f, &field, &meas, k_min, 7, d, 1e-14)
            .unwrap()
    };

    let rows4 = run(4, 5);
    let rows16 = run(16, 7);
    let err4 = rows4.last().unwrap().err_linf_d;
    let err16 = rows16.last().unwrap().err_linf_d;

    // m = 4 plateaus at its information-theoretic floor
    let r1 = rows4[1].err_linf_d / rows4[0].err_linf_d;
    let r2 = rows4[2].err_linf_d / rows4[1].err_linf_d;
    let ok = err16 < err4 && r1 >= 0.5 && r2 >= 0.5;
    verdict(
        "11",
        ok,
        &format!(
            "level-7 interior error: m=16 {err16:.2e} < m=4 {err4:.2e}; m=4 plateau ratios {r1:.2}, {r2:.2}"
        ),
    );
    // informational only: order-of-magnitude comparison with reported plateaus
    let m4_match = err4 / 2e-2;
    let m16_match = err16 / 1e-4;
    println!(
        "criterion 11 (report): plateau levels vs reference 2e-2 / 1e-4: factors {m4_match:.2} and {m16_match:.2}{}",
        if (0.1..=10.0).contains(&m4_match) && (0.1..=10.0).contains(&m16_match) {
            " (within x10)"
        } else {
            " (outside x10, non-blocking)"
        }
    );
}

#[test]
fn measurement_set_and_formation_guards() {
    // supporting sanity for the criteria above
    assert!(recovery::box_formation(5).is_err());
    assert!(MeasurementSet::new(vec![[0.2, 0.2], [0.2, 0.2]], vec![0.0, 0.0]).is_err());
}
