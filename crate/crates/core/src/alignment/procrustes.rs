use super::{AlignmentMatrix, AnchorDictionary, PreparedSpace, ORTHOGONALITY_TOLERANCE};
use crate::linalg::{orthogonality_error, Matrix};
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// Orthogonal `W` minimising `‖WX − Y‖_F`: `W = UVᵀ` where `UΣVᵀ = YXᵀ`.
///
/// Columns of `x` and `y` are paired vectors. When `YXᵀ` is singular the
/// minimiser is not unique; one valid solution is returned and the result is
/// flagged `ambiguous`.
pub fn procrustes(x: &Matrix, y: &Matrix) -> Result<AlignmentMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::InvalidInput(format!(
            "X is {}x{} but Y is {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidInput("need d >= 1 and at least one pair".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite anchor vector".into()));
    }
    let m = y * x.transpose();
    let svd = m
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vt"));
    let mut w = u * v_t;
    if orthogonality_error(&w) > ORTHOGONALITY_TOLERANCE {
        // re-project onto the orthogonal group
        let svd = w
            .clone()
            .try_svd(true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
        w = svd.u.expect("U") * svd.v_t.expect("Vt");
    }
    let s_max = svd.singular_values.max();
    let ambiguous = s_max == 0.0
        || svd
            .singular_values
            .iter()
            .any(|&s| s <= RANK_TOLERANCE * s_max);
    let residual = (&w * x - y).norm();
    let mut out = AlignmentMatrix::from_matrix(w)?;
    out.residual = residual;
    out.ambiguous = ambiguous;
    out.iterations_used = 1;
    Ok(out)
}

/// Stack anchor vectors as columns of `X` (source) and `Y` (target), then
/// solve [`procrustes`].
pub fn align_with_anchors(
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    anchors: &AnchorDictionary,
) -> Result<AlignmentMatrix> {
    if anchors.is_empty() {
        return Err(Error::NoAnchors("anchor dictionary is empty".into()));
    }
    if src.dim() != tgt.dim() {
        return Err(Error::InvalidInput(format!(
            "source dimension {} differs from target dimension {}",
            src.dim(),
            tgt.dim()
        )));
    }
    let d = src.dim();
    let k = anchors.len();
    let mut x = Matrix::zeros(d, k);
    let mut y = Matrix::zeros(d, k);
    for (j, (s, t)) in anchors.pairs().iter().enumerate() {
        let sv = src
            .vector(s)
            .ok_or_else(|| Error::InvalidInput(format!("anchor {s:?} not resolvable in source space")))?;
        let tv = tgt
            .vector(t)
            .ok_or_else(|| Error::InvalidInput(format!("anchor {t:?} not resolvable in target space")))?;
        x.set_column(j, &sv);
        y.set_column(j, &tv);
    }
    procrustes(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(d, k, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn identical_inputs_give_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = gaussian(5, 12, &mut rng);
        let w = procrustes(&x, &x).unwrap();
        assert!((&w.w - Matrix::identity(5, 5)).norm() < 1e-8);
        assert!(w.orthogonal && !w.ambiguous);
        assert!(w.residual < 1e-8);
    }

    #[test]
    fn recovers_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_orthogonal(4, &mut rng);
        let x = gaussian(4, 10, &mut rng);
        let y = &q * &x;
        let w = procrustes(&x, &y).unwrap();
        assert!((&w.w - &q).norm() <= 1e-8);
    }

    #[test]
    fn rank_one_is_ambiguous() {
        let x = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let y = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let w = procrustes(&x, &y).unwrap();
        assert!(w.ambiguous);
        assert!(w.orthogonal);
        assert!(w.residual < 1e-12);
    }

    #[test]
    fn input_validation() {
        let a = Matrix::zeros(2, 3);
        assert!(procrustes(&a, &Matrix::zeros(2, 2)).is_err());
        assert!(procrustes(&Matrix::zeros(2, 0), &Matrix::zeros(2, 0)).is_err());
        let mut b = Matrix::zeros(2, 3);
        b[(0, 0)] = f64::NAN;
        assert!(procrustes(&a, &b).is_err());
    }
}
