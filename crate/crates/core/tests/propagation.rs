use std::f64::consts::{PI, TAU};

use kirchhoff_dirac::algebra::plane_wave_spinor;
use kirchhoff_dirac::analysis::{compare, intensity, spin_density};
use kirchhoff_dirac::apertures::{circular, double_slit, slit};
use kirchhoff_dirac::scalar::{
    fraunhofer_scalar, illuminate, kirchhoff_fresnel, DetectorMode, DetectorSpec, ObliquityKind, SourceSpec,
};
use kirchhoff_dirac::spinor::{spinor_fraunhofer, spinor_kirchhoff_fresnel};
use kirchhoff_dirac::{Direction3, Grid2D, ParticleState, ScalarField2D, Spin, SpinorField2D, Vec3, C64};

const ONE: C64 = C64::new(1.0, 0.0);
const PLANE: SourceSpec = SourceSpec::PlaneWave { amplitude: ONE };

fn row(field: &ScalarField2D, iy: usize) -> Vec<f64> {
    let p = intensity(field);
    (0..field.grid().nx).map(|ix| *p.get(ix, iy)).collect()
}

fn first_minimum(v: &[f64], start: usize) -> usize {
    (start + 1..v.len() - 1).find(|&i| v[i] <= v[i - 1] && v[i] < v[i + 1]).unwrap()
}

#[test]
fn parseval_at_discrete_fourier_frequencies() {
    let n = 32;
    let dx = 0.05;
    let grid = Grid2D::centered(n, n as f64 * dx).unwrap();
    let ap = ScalarField2D::from_fn(grid, |x, y| C64::new((3.0 * x).cos() + y, x * y - 0.2));
    let dk = TAU / (n as f64 * dx);
    let det = DetectorSpec::new(1e9, Grid2D::new(n, n, dk, dk, [-(n as f64 / 2.0) * dk + 0.3 * dk, -7.0 * dk]).unwrap(), DetectorMode::Angular).unwrap();
    let out = fraunhofer_scalar(&ap, 1e4, &det).unwrap();
    let expect = grid.cell_area().powi(2) * (n * n) as f64 * ap.power();
    assert!((out.power() - expect).abs() / expect < 1e-9, "{} {}", out.power(), expect);
}

#[test]
fn kirchhoff_fresnel_airy_zero() {
    let k = 100.0;
    let a = 0.2;
    let z = 1000.0;
    let grid = Grid2D::centered(128, 0.5).unwrap();
    let field = illuminate(&circular(a, &grid).unwrap(), &PLANE, k).unwrap();
    let det = DetectorSpec::new(z, Grid2D::new(400, 1, 1.0, 1.0, [0.0, 0.0]).unwrap(), DetectorMode::RealPlane).unwrap();
    let out = kirchhoff_fresnel(&field, &PLANE, &det, k, ObliquityKind::Kirchhoff).unwrap();
    let r = row(&out, 0);
    let i = first_minimum(&r, 0);
    let sin = |x: f64| x / (x * x + z * z).sqrt();
    let measured = sin(det.grid.x(i));
    let expect = 3.8317 / (k * a);
    assert!((measured - expect).abs() <= sin(det.grid.x(i) + 1.0) - measured, "{measured} {expect}");
}

#[test]
fn square_aperture_matches_finer_direct_sum() {
    let k = 200.0;
    let a = 1.0;
    let coarse = Grid2D::centered(64, 2.0).unwrap();
    let field = illuminate(&slit(a, a, &coarse).unwrap(), &PLANE, k).unwrap();
    let dk = 0.25;
    let det = DetectorSpec::new(1e9, Grid2D::new(81, 1, dk, 1.0, [0.0, 0.0]).unwrap(), DetectorMode::Angular).unwrap();
    let out = fraunhofer_scalar(&field, k, &det).unwrap();
    let r = row(&out, 0);
    let zero = det.grid.x(first_minimum(&r, 0));
    assert!((zero - TAU / a).abs() <= dk);

    // 4× finer direct double sum over the same square.
    let m = 4 * 32;
    let h = a / m as f64;
    for (i, v) in out.values().iter().enumerate().step_by(8) {
        let kx = det.grid.x(i);
        let mut sum = C64::new(0.0, 0.0);
        for ix in 0..m {
            let x = -a / 2.0 + (ix as f64 + 0.5) * h;
            sum += C64::from_polar(1.0, -kx * x);
        }
        let direct = sum * h * a;
        assert!((v - direct).norm() < 2e-3 * a * a, "kx={kx}: {v} vs {direct}");
    }
}

#[test]
fn double_slit_fringes() {
    let k = 200.0;
    let (w, d) = (0.25, 1.0);
    let grid = Grid2D::centered(256, 4.0).unwrap();
    let field = illuminate(&double_slit(w, d, 1.0, &grid).unwrap(), &PLANE, k).unwrap();
    let det_grid = Grid2D::new(321, 1, 0.1, 1.0, [-16.0, 0.0]).unwrap();
    let det = DetectorSpec::new(1e9, det_grid, DetectorMode::Angular).unwrap();
    let out = fraunhofer_scalar(&field, k, &det).unwrap();
    let analytic = ScalarField2D::from_fn(det_grid, |kx, _| {
        let envelope = if kx == 0.0 { w } else { 2.0 * (kx * w / 2.0).sin() / kx };
        C64::new(2.0 * (kx * d / 2.0).cos() * envelope, 0.0)
    });
    let report = compare(&analytic, &out, true).unwrap();
    assert!(report.l2_relative < 1e-2, "{}", report.l2_relative);
    // Fringe minima are 2π/d apart.
    let r = row(&out, 0);
    let first = first_minimum(&r, 160);
    let second = first_minimum(&r, first);
    let spacing = det_grid.x(second) - det_grid.x(first);
    assert!((spacing - TAU / d).abs() <= 0.1 + 1e-12, "{spacing}");
}

#[test]
fn propagators_are_linear() {
    let k = 30.0;
    let grid = Grid2D::centered(24, 1.0).unwrap();
    let f1 = ScalarField2D::from_fn(grid, |x, y| C64::new(1.0 + x, y));
    let f2 = ScalarField2D::from_fn(grid, |x, y| C64::new((x * y).cos(), -x));
    let (a, b) = (C64::new(0.5, 2.0), C64::new(-1.0, 0.25));
    let mix = ScalarField2D::new(grid, f1.values().iter().zip(f2.values()).map(|(p, q)| a * p + b * q).collect()).unwrap();
    let source = SourceSpec::PointSource { position: Vec3::new(0.1, 0.0, -10.0), amplitude: ONE };
    let det = DetectorSpec::new(20.0, Grid2D::centered(9, 8.0).unwrap(), DetectorMode::RealPlane).unwrap();
    let runs: Vec<Box<dyn Fn(&ScalarField2D) -> ScalarField2D>> = vec![
        Box::new(|f| kirchhoff_fresnel(f, &source, &det, k, ObliquityKind::Kirchhoff).unwrap()),
        Box::new(|f| kirchhoff_fresnel(f, &source, &det, k, ObliquityKind::Rs1).unwrap()),
        Box::new(|f| kirchhoff_fresnel(f, &source, &det, k, ObliquityKind::Rs2).unwrap()),
        Box::new(|f| fraunhofer_scalar(f, k, &det).unwrap()),
    ];
    for run in &runs {
        let (m, p, q) = (run(&mix), run(&f1), run(&f2));
        for ((x, y), z) in m.values().iter().zip(p.values()).zip(q.values()) {
            let lin = a * y + b * z;
            assert!((x - lin).norm() <= 1e-12 * lin.norm().max(1e-3 * m.power().sqrt()));
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let k = 40.0;
    let grid = Grid2D::centered(48, 1.0).unwrap();
    let field = illuminate(&circular(0.4, &grid).unwrap(), &PLANE, k).unwrap();
    let det = DetectorSpec::new(30.0, Grid2D::centered(17, 10.0).unwrap(), DetectorMode::RealPlane).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                kirchhoff_fresnel(&field, &PLANE, &det, k, ObliquityKind::Rs2).unwrap(),
                fraunhofer_scalar(&field, k, &det).unwrap(),
            )
        })
    };
    let (a1, b1) = run(1);
    let (a4, b4) = run(4);
    assert_eq!(a1.values(), a4.values());
    assert_eq!(b1.values(), b4.values());
}

#[test]
fn spinor_fresnel_with_point_source_conserves_spin() {
    let k = 40.0;
    let st = ParticleState::from_wavenumber_kappa(k, 0.8).unwrap();
    let grid = Grid2D::centered(40, 1.0).unwrap();
    let mask = circular(0.4, &grid).unwrap();
    let profile = mask.to_scalar();
    let source = SourceSpec::PointSource { position: Vec3::new(0.0, 0.2, -15.0), amplitude: ONE };
    let det = DetectorSpec::new(25.0, Grid2D::centered(15, 12.0).unwrap(), DetectorMode::RealPlane).unwrap();
    for (spin, target) in [(Spin::Up, 1.0), (Spin::Down, -1.0)] {
        let u = plane_wave_spinor(&st, &Direction3::z(), spin).unwrap();
        let out = spinor_kirchhoff_fresnel(&SpinorField2D::from_profile(&profile, &u), &source, &det, k).unwrap();
        for s in spin_density(&out).values() {
            assert!((s.unwrap() - target).abs() < 1e-12);
        }
    }
}

#[test]
fn spinor_fresnel_matches_fraunhofer_far_away() {
    let k = 100.0;
    let st = ParticleState::from_wavenumber_kappa(k, 0.3).unwrap();
    let grid = Grid2D::centered(64, 0.5).unwrap();
    let profile = circular(0.2, &grid).unwrap().to_scalar();
    let u = plane_wave_spinor(&st, &Direction3::z(), Spin::Up).unwrap();
    let field = SpinorField2D::from_profile(&profile, &u);
    let det = DetectorSpec::new(100.0, Grid2D::centered(16, 7.0).unwrap(), DetectorMode::Angular).unwrap();
    let near = spinor_kirchhoff_fresnel(&field, &PLANE, &det, k).unwrap();
    let far = spinor_fraunhofer(&field, k, &det).unwrap();
    assert!(compare(&far, &near, true).unwrap().l2_relative < 2e-2);
}

#[test]
fn airy_peak_is_on_axis() {
    let k = 50.0;
    let grid = Grid2D::centered(64, 2.0).unwrap();
    let field = illuminate(&circular(0.5, &grid).unwrap(), &PLANE, k).unwrap();
    let det = DetectorSpec::new(1e9, Grid2D::new(21, 21, 0.5, 0.5, [-5.0, -5.0]).unwrap(), DetectorMode::Angular).unwrap();
    let p = intensity(&fraunhofer_scalar(&field, k, &det).unwrap());
    let peak = p.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(peak, det.grid.index(10, 10));
    let area = PI * 0.25;
    assert!((p.values()[peak].sqrt() - area).abs() / area < 0.02);
}
