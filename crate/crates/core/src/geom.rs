//! Small dense-vector helpers for points in R^N.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    norm2(a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `a + t b`
pub(crate) fn axpy(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

pub(crate) fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| t * x).collect()
}

/// Orthonormal triple `(e1, e2, e3)` in R^dim (dim >= 3) with `e1 ∥ first`
/// and `e2` in the plane of `first` and `second` whenever those are
/// non-degenerate. Degenerate inputs fall back to coordinate axes.
pub(crate) fn frame(dim: usize, first: &[f64], second: &[f64]) -> [Vec<f64>; 3] {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut candidates: Vec<Vec<f64>> = vec![first.to_vec(), second.to_vec()];
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        candidates.push(e);
    }
    for c in candidates {
        if basis.len() == 3 {
            break;
        }
        let scale_in = norm(&c);
        if scale_in == 0.0 {
            continue;
        }
        let mut v = c;
        for b in &basis {
            let p = dot(&v, b);
            v = axpy(&v, -p, b);
        }
        let n = norm(&v);
        if n > 1e-10 * scale_in {
            basis.push(scale(&v, 1.0 / n));
        }
    }
    let e3 = basis.pop().unwrap();
    let e2 = basis.pop().unwrap();
    let e1 = basis.pop().unwrap();
    [e1, e2, e3]
}
