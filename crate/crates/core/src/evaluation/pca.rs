use serde::{Deserialize, Serialize};

use crate::linalg::{column_mean, Matrix};
use crate::{Error, Result};

/// A labelled group of points (e.g. "professional" and "consumer" terms).
#[derive(Clone, Debug)]
pub struct LabeledPoints {
    pub label: String,
    pub words: Vec<String>,
    /// `d × m`, one column per word.
    pub vectors: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub label: String,
    pub word: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaProjection {
    /// Principal axes as rows, `out_dims × d`.
    pub components: Matrix,
    /// Eigenvalues of the (population) covariance, descending.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub points: Vec<ProjectedPoint>,
}

impl PcaProjection {
    /// Header `label<TAB>word<TAB>x<TAB>y`, then one row per point. Further
    /// components, if any, follow as extra columns.
    pub fn to_tsv(&self) -> String {
        let axes = ["x", "y", "z"];
        let dims = self.components.nrows();
        let mut out = String::from("label\tword");
        for i in 0..dims {
            out.push('\t');
            match axes.get(i) {
                Some(a) => out.push_str(a),
                None => out.push_str(&format!("pc{}", i + 1)),
            }
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&p.label);
            out.push('\t');
            out.push_str(&p.word);
            for c in &p.coords {
                out.push_str(&format!("\t{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Pool all points, centre them and project onto the `out_dims` leading
/// eigenvectors of the covariance. Each axis is signed so that its largest
/// magnitude loading is positive.
pub fn pca_project(sets: &[LabeledPoints], out_dims: usize) -> Result<PcaProjection> {
    let d = sets.first().map_or(0, |s| s.vectors.nrows());
    for s in sets {
        if s.vectors.nrows() != d || s.words.len() != s.vectors.ncols() {
            return Err(Error::InvalidInput(format!("point set {:?} has inconsistent shape", s.label)));
        }
    }
    let n: usize = sets.iter().map(|s| s.vectors.ncols()).sum();
    if out_dims == 0 || out_dims > d || n < out_dims {
        return Err(Error::InvalidInput(format!(
            "cannot project {n} points of dimension {d} onto {out_dims} components"
        )));
    }
    let mut pooled = Matrix::zeros(d, n);
    let mut col = 0;
    for s in sets {
        pooled.columns_mut(col, s.vectors.ncols()).copy_from(&s.vectors);
        col += s.vectors.ncols();
    }
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let mean = column_mean(&pooled);
    for mut c in pooled.column_iter_mut() {
        c -= &mean;
    }
    let cov = (&pooled * pooled.transpose()) / n as f64;
    let total = cov.trace();
    let scale = pooled.amax().max(f64::MIN_POSITIVE);
    if total <= (f64::EPSILON * scale).powi(2) * d as f64 {
        return Err(Error::InvalidInput("zero variance: all points are identical".into()));
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Matrix::zeros(out_dims, d);
    let mut explained_variance = Vec::with_capacity(out_dims);
    for (row, &i) in order.iter().take(out_dims).enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.neg_mut();
        }
        components.row_mut(row).copy_from(&v.transpose());
        explained_variance.push(eig.eigenvalues[i].max(0.0));
    }
    let explained_variance_ratio = explained_variance.iter().map(|v| v / total).collect();
    let coords = &components * &pooled;
    let mut points = Vec::with_capacity(n);
    let mut j = 0;
    for s in sets {
        for w in &s.words {
            points.push(ProjectedPoint {
                label: s.label.clone(),
                word: w.clone(),
                coords: coords.column(j).iter().copied().collect(),
            });
            j += 1;
        }
    }
    Ok(PcaProjection {
        components,
        explained_variance,
        explained_variance_ratio,
        points,
    })
}
