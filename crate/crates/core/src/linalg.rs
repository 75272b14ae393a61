//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Embedding matrices are stored column-per-word (`d × n`), so a word vector
//! is a contiguous column and mapping a whole space is one product `W · X`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// ‖WᵀW − I‖_F.
pub fn orthogonality_error(w: &Matrix) -> f64 {
    let mut g = w.transpose() * w;
    for i in 0..g.nrows().min(g.ncols()) {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of R's diagonal folded into Q.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let a = Matrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-random proper rotation: [`random_orthogonal`] with the first column
/// negated when the determinant is −1.
pub fn random_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let mut q = random_orthogonal(d, rng);
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Scale every column to unit length; zero columns are left untouched.
pub fn normalize_columns(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
}

pub fn column_mean(m: &Matrix) -> Vector {
    if m.ncols() == 0 {
        return Vector::zeros(m.nrows());
    }
    m.column_mean()
}

/// Indices of the `k` largest values, largest first; ties broken by the
/// smaller index. Linear selection followed by a sort of the head.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    top_k_by(scores, k, |a, b| a.cmp(&b))
}

/// As [`top_k_indices`] with a custom tie-break on indices (`Less` ranks first).
pub fn top_k_by(
    scores: &[f64],
    k: usize,
    tie: impl Fn(usize, usize) -> std::cmp::Ordering,
) -> Vec<usize> {
    let k = k.min(scores.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |&a: &usize, &b: &usize| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| tie(a, b))
    };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    idx
}

/// Mean of the `k` largest values (all values when fewer than `k`).
pub fn mean_of_top_k(values: &[f64], k: usize) -> f64 {
    let k = k.min(values.len());
    if k == 0 {
        return 0.0;
    }
    let mut v = values.to_vec();
    let pivot = k - 1;
    v.select_nth_unstable_by(pivot, |a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v[..k].iter().sum::<f64>() / k as f64
}

/// `(0..n).map(f)`, in parallel when the `parallel` feature is on. Output
/// order is the index order either way.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Column ranges of width at most `width` covering `0..n`.
pub(crate) fn chunks(n: usize, width: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(width))
        .map(|c| c * width..((c + 1) * width).min(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [1, 2, 5, 40] {
            let q = random_orthogonal(d, &mut rng);
            assert!(orthogonality_error(&q) < 1e-12);
            let r = random_rotation(d, &mut rng);
            assert!(orthogonality_error(&r) < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn top_k_order_and_ties() {
        let s = [0.1, 0.9, 0.5, 0.9, -1.0];
        assert_eq!(top_k_indices(&s, 3), [1, 3, 2]);
        assert_eq!(top_k_indices(&s, 10), [1, 3, 2, 0, 4]);
        assert_eq!(top_k_by(&s, 2, |a, b| b.cmp(&a)), [3, 1]);
        assert!((mean_of_top_k(&s, 2) - 0.9).abs() < 1e-15);
    }
}
