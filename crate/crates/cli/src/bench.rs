//! Kernel timing microbenchmarks: cost, gradient, and Hessian-vector
//! evaluation in both formulations, plus the manifold-only extras
//! (retraction, Riemannian gradient and Hessian).
//!
//! Single-threaded by construction so the means are comparable across rows.

use std::hint::black_box;
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use rfxy::manifold::{self, RiemannianHessian};
use rfxy::matrix::Matrix2xN;
use rfxy::model::Instance;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub operation: String,
    pub formulation: String,
    pub mean_seconds: f64,
    pub repetitions: usize,
}

fn time_mean<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    // One warm-up call keeps cache effects out of the first sample.
    f();
    let start = Instant::now();
    for _ in 0..reps {
        f();
    }
    start.elapsed().as_secs_f64() / reps as f64
}

/// Times the full kernel set on one instance. `repetitions` must be at
/// least 100 for stable means.
pub fn bench_kernels(inst: &Instance<f64>, repetitions: usize) -> Result<Vec<BenchRow>> {
    anyhow::ensure!(repetitions >= 100, "need at least 100 repetitions");
    let n = inst.n_sites();

    let x = manifold::random_point::<f64>(inst.lattice(), 12345);
    let theta = x.to_angles();
    let mut raw = Matrix2xN::zeros(n);
    for i in 0..n {
        let c = x.col(i);
        raw.set_col(i, [0.3 - c[1], c[0] * 0.2]);
    }
    let tangent = manifold::project_tangent(&x, &raw)?;
    let v_angular: Vec<f64> = theta.as_slice().iter().map(|a| (a * 7.7).sin()).collect();

    let mut rows = Vec::new();
    let mut push = |operation: &str, formulation: &str, mean: f64| {
        rows.push(BenchRow {
            operation: operation.into(),
            formulation: formulation.into(),
            mean_seconds: mean,
            repetitions,
        });
    };

    push(
        "cost",
        "manifold",
        time_mean(repetitions, || {
            black_box(inst.energy_cartesian(black_box(&x)).unwrap());
        }),
    );
    push(
        "cost",
        "angular",
        time_mean(repetitions, || {
            black_box(inst.energy_angular(black_box(&theta)).unwrap());
        }),
    );
    push(
        "cost+retraction",
        "manifold",
        time_mean(repetitions, || {
            let moved = manifold::retract(black_box(&x), black_box(&tangent)).unwrap();
            black_box(inst.energy_cartesian(&moved).unwrap());
        }),
    );
    push(
        "euclidean-gradient",
        "manifold",
        time_mean(repetitions, || {
            black_box(inst.euclidean_gradient(black_box(&x)).unwrap());
        }),
    );
    push(
        "euclidean-gradient",
        "angular",
        time_mean(repetitions, || {
            black_box(inst.euclidean_gradient_angular(black_box(&theta)).unwrap());
        }),
    );
    push(
        "riemannian-gradient",
        "manifold",
        time_mean(repetitions, || {
            black_box(manifold::riemannian_gradient(inst, black_box(&x)).unwrap());
        }),
    );
    push(
        "euclidean-hessian",
        "manifold",
        time_mean(repetitions, || {
            black_box(inst.euclidean_hessian_vec(black_box(tangent.value())).unwrap());
        }),
    );
    push(
        "euclidean-hessian",
        "angular",
        time_mean(repetitions, || {
            black_box(
                inst.euclidean_hessian_vec_angular(black_box(&theta), black_box(&v_angular))
                    .unwrap(),
            );
        }),
    );
    push(
        "riemannian-hessian",
        "manifold",
        time_mean(repetitions, || {
            let hess = RiemannianHessian::at(inst, black_box(&x)).unwrap();
            black_box(hess.apply(black_box(&tangent)));
        }),
    );

    Ok(rows)
}

/// Looks up a row's mean by operation and formulation.
pub fn mean_of(rows: &[BenchRow], operation: &str, formulation: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.operation == operation && r.formulation == formulation)
        .map(|r| r.mean_seconds)
}

pub fn to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("operation            formulation  mean_seconds\n");
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<12} {:.6e}\n",
            r.operation, r.formulation, r.mean_seconds
        ));
    }
    out
}
