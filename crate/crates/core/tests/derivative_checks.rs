//! Finite-difference verification of the Riemannian derivatives across the
//! desk-scale parameter grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rfxy::lattice::Lattice;
use rfxy::manifold::{self, RiemannianHessian, TangentVector};
use rfxy::matrix::Matrix2xN;
use rfxy::model::Instance;
use rfxy::spin::CartesianConfig;

fn random_tangent(x: &CartesianConfig<f64>, rng: &mut ChaCha8Rng) -> TangentVector<f64> {
    let mut u = Matrix2xN::zeros(x.n_sites());
    for i in 0..x.n_sites() {
        u.set_col(i, [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]);
    }
    let v = manifold::project_tangent(x, &u).unwrap();
    let mut v = v;
    let norm = manifold::norm(&v);
    v.scale(1.0 / norm);
    v
}

/// Central finite differences of the energy through the retraction match
/// the Riemannian gradient, and the Hessian bilinear form is symmetric, on
/// 50 (instance, point) pairs spanning d ∈ {1,2,3}, L ∈ {3,4,6},
/// Δ ∈ {0.1, 1, 3}.
#[test]
fn riemannian_gradient_and_hessian_pass_fd_checks() {
    let dims = [1usize, 2, 3];
    let sizes = [3usize, 4, 6];
    let deltas = [0.1f64, 1.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut checked = 0usize;
    'outer: for rep in 0.. {
        for &d in &dims {
            for &l in &sizes {
                for &delta in &deltas {
                    if checked >= 50 {
                        break 'outer;
                    }
                    let seed = 1000 + rep * 100 + checked as u64;
                    let inst =
                        Instance::generate(Lattice::new(d, l).unwrap(), delta, seed).unwrap();
                    let x = manifold::random_point::<f64>(inst.lattice(), seed ^ 0xabcd);
                    let g = manifold::riemannian_gradient(&inst, &x).unwrap();
                    let v = random_tangent(&x, &mut rng);

                    // Gradient against f∘retract.
                    let t = 1e-5;
                    let mut step = v.value().clone();
                    step.scale(t);
                    let plus = manifold::retract(&x, &manifold::project_tangent(&x, &step).unwrap())
                        .unwrap();
                    step.scale(-1.0);
                    let minus =
                        manifold::retract(&x, &manifold::project_tangent(&x, &step).unwrap())
                            .unwrap();
                    let slope = (inst.energy_cartesian(&plus).unwrap()
                        - inst.energy_cartesian(&minus).unwrap())
                        / (2.0 * t);
                    let ip = manifold::inner(&g, &v);
                    assert!(
                        (slope - ip).abs() <= 1e-5 * (1.0 + ip.abs()),
                        "d={d} L={l} delta={delta}: slope {slope} vs <g,v> {ip}"
                    );

                    // Hessian symmetry.
                    let u = random_tangent(&x, &mut rng);
                    let hess = RiemannianHessian::at(&inst, &x).unwrap();
                    let a = manifold::inner(&u, &hess.apply(&v));
                    let b = manifold::inner(&v, &hess.apply(&u));
                    assert!(
                        (a - b).abs() <= 1e-10 * (1.0 + a.abs()),
                        "d={d} L={l} delta={delta}: asymmetry {a} vs {b}"
                    );
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 50);
}

/// The random starting points and the disorder draws obey the CLT bounds at
/// n = 32768 sites.
#[test]
fn sampling_means_concentrate() {
    let lat = Lattice::new(3, 32).unwrap();
    let n = lat.n_sites() as f64;

    let inst = Instance::<f64>::generate(lat.clone(), 1.0, 90210).unwrap();
    let mean_cos: f64 = inst.field_angles().iter().map(|p| p.cos()).sum::<f64>() / n;
    assert!(mean_cos.abs() <= 3.0 / n.sqrt());

    let x = manifold::random_point::<f64>(&lat, 90211);
    let (mut sx, mut sy) = (0.0, 0.0);
    for c in x.matrix().columns() {
        sx += c[0];
        sy += c[1];
    }
    let mean_norm = ((sx / n).powi(2) + (sy / n).powi(2)).sqrt();
    assert!(mean_norm <= 3.0 / n.sqrt());
}
