//! Small shared numeric helpers: Kronecker products and fixed-order
//! Gauss-Legendre quadrature for matrix- and vector-valued integrands.

use nalgebra::{DMatrix, DVector};

/// Kronecker product `a (x) b`.
pub(crate) fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s != 0.0 {
                out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
            }
        }
    }
    out
}

// 10-point Gauss-Legendre nodes and weights on [-1, 1] (positive half).
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn panel_points(a: f64, b: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels).flat_map(move |p| {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        (0..5).flat_map(move |i| {
            [
                (mid - half * GL_NODES[i], half * GL_WEIGHTS[i]),
                (mid + half * GL_NODES[i], half * GL_WEIGHTS[i]),
            ]
        })
    })
}

/// Composite Gauss-Legendre quadrature of a matrix-valued integrand.
pub(crate) fn integrate_matrix(
    f: impl Fn(f64) -> DMatrix<f64>,
    a: f64,
    b: f64,
    panels: usize,
) -> DMatrix<f64> {
    let mut it = panel_points(a, b, panels);
    let (t0, w0) = it.next().expect("at least one panel");
    let mut acc = f(t0) * w0;
    for (t, w) in it {
        acc += f(t) * w;
    }
    acc
}

/// Composite Gauss-Legendre quadrature of a vector-valued integrand.
pub(crate) fn integrate_vector(
    f: impl Fn(f64) -> DVector<f64>,
    a: f64,
    b: f64,
    panels: usize,
) -> DVector<f64> {
    let mut it = panel_points(a, b, panels);
    let (t0, w0) = it.next().expect("at least one panel");
    let mut acc = f(t0) * w0;
    for (t, w) in it {
        acc += f(t) * w;
    }
    acc
}
