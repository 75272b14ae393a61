use std::fs;
use std::path::Path;

use rand::Rng;

use crate::linalg::{Matrix, Vector};
use crate::{Error, Result};

/// Probabilities are clamped to `[P_FLOOR, 1 − P_FLOOR]` before taking logs.
pub const P_FLOOR: f64 = 1e-12;

/// `Linear(d → hidden) → LeakyReLU → Dropout → Linear(hidden → 1) → sigmoid`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorParams {
    /// `hidden × d`
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Vector,
    pub b2: f64,
    pub dropout_rate: f64,
    pub leaky_slope: f64,
}

/// Gradients with the same layout as [`DiscriminatorParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorGrads {
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Vector,
    pub b2: f64,
}

impl DiscriminatorGrads {
    pub fn zeros(d: usize, hidden: usize) -> Self {
        DiscriminatorGrads {
            w1: Matrix::zeros(hidden, d),
            b1: Vector::zeros(hidden),
            w2: Vector::zeros(hidden),
            b2: 0.0,
        }
    }
}

impl DiscriminatorParams {
    /// Uniform `±1/√fan_in` initialisation for weights and biases.
    pub fn new<R: Rng + ?Sized>(d: usize, hidden: usize, dropout_rate: f64, leaky_slope: f64, rng: &mut R) -> Self {
        let a1 = 1.0 / (d as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        let mut u = |a: f64| rng.random_range(-a..a);
        DiscriminatorParams {
            w1: Matrix::from_fn(hidden, d, |_, _| u(a1)),
            b1: Vector::from_fn(hidden, |_, _| u(a1)),
            w2: Vector::from_fn(hidden, |_, _| u(a2)),
            b2: u(a2),
            dropout_rate,
            leaky_slope,
        }
    }

    /// All weights zero.
    pub fn zeros(d: usize, hidden: usize) -> Self {
        DiscriminatorParams {
            w1: Matrix::zeros(hidden, d),
            b1: Vector::zeros(hidden),
            w2: Vector::zeros(hidden),
            b2: 0.0,
            dropout_rate: 0.0,
            leaky_slope: 0.2,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        if self.b1.len() != h || self.w2.len() != h {
            return Err(Error::InvalidInput("discriminator layer sizes disagree".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout rate {} outside [0, 1)", self.dropout_rate)));
        }
        let finite = self.w1.iter().chain(self.b1.iter()).chain(self.w2.iter()).all(|x| x.is_finite());
        if !finite || !self.b2.is_finite() {
            return Err(Error::Numerical("non-finite discriminator weight".into()));
        }
        Ok(())
    }

    /// `self ← self − lr · g`
    pub fn sgd_step(&mut self, g: &DiscriminatorGrads, lr: f64) {
        self.w1.zip_apply(&g.w1, |w, g| *w -= lr * g);
        self.b1.axpy(-lr, &g.b1, 1.0);
        self.w2.axpy(-lr, &g.w2, 1.0);
        self.b2 -= lr * g.b2;
    }

    /// Binary sidecar: magic `TADP`, `u32` version (1), `u64` d, `u64` hidden,
    /// `f64` dropout rate, `f64` leaky slope, then `w1` row-major, `b1`, `w2`
    /// and `b2` as `f64`. Little-endian.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(b"TADP");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.input_dim() as u64).to_le_bytes());
        out.extend_from_slice(&(self.hidden() as u64).to_le_bytes());
        out.extend_from_slice(&self.dropout_rate.to_le_bytes());
        out.extend_from_slice(&self.leaky_slope.to_le_bytes());
        for row in self.w1.row_iter() {
            row.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        }
        self.b1.iter().chain(self.w2.iter()).for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        out.extend_from_slice(&self.b2.to_le_bytes());
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::parse(path.display(), 0, m.to_string());
        if bytes.len() < 40 || &bytes[..4] != b"TADP" {
            return Err(bad("not a discriminator file"));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        if u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) != 1 {
            return Err(bad("unsupported version"));
        }
        let (d, h) = (u64_at(8) as usize, u64_at(16) as usize);
        let expected = 40 + 8 * (h * d + 2 * h + 1);
        if d == 0 || h == 0 || bytes.len() != expected {
            return Err(bad("size does not match header"));
        }
        let vals: Vec<f64> = bytes[40..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8"))).collect();
        let params = DiscriminatorParams {
            w1: Matrix::from_row_slice(h, d, &vals[..h * d]),
            b1: Vector::from_column_slice(&vals[h * d..h * d + h]),
            w2: Vector::from_column_slice(&vals[h * d + h..h * d + 2 * h]),
            b2: vals[h * d + 2 * h],
            dropout_rate: f64_at(24),
            leaky_slope: f64_at(32),
        };
        params.validate()?;
        Ok(params)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Activations of one batch, kept for the backward pass.
#[derive(Clone, Debug)]
struct Pass {
    /// Pre-activation of the hidden layer (`hidden × B`).
    z1: Matrix,
    /// Hidden activations after dropout.
    a: Matrix,
    /// Gradient with respect to `a`, then `z1` (filled by the backward pass).
    da: Matrix,
    /// Dropout keep flags, column-major like `a`; empty without dropout.
    kept: Vec<bool>,
    scale: f64,
    p: Vec<f64>,
}

impl Default for Pass {
    fn default() -> Self {
        Pass {
            z1: Matrix::zeros(0, 0),
            a: Matrix::zeros(0, 0),
            da: Matrix::zeros(0, 0),
            kept: Vec::new(),
            scale: 1.0,
            p: Vec::new(),
        }
    }
}

/// Buffers reused across training steps, so the `hidden × batch` matrices
/// are not reallocated on every forward and backward pass.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    src: Pass,
    tgt: Pass,
    grads: Option<DiscriminatorGrads>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gradients from the last [`discriminator_loss_and_grad_into`] call.
    pub fn grads(&self) -> Option<&DiscriminatorGrads> {
        self.grads.as_ref()
    }
}

fn forward_into<R: Rng + ?Sized>(params: &DiscriminatorParams, v: &Matrix, rng: Option<&mut R>, pass: &mut Pass) {
    let shape = (params.hidden(), v.ncols());
    if pass.z1.shape() != shape {
        pass.z1 = Matrix::zeros(shape.0, shape.1);
        pass.a = Matrix::zeros(shape.0, shape.1);
        pass.da = Matrix::zeros(shape.0, shape.1);
    }
    pass.z1.gemm(1.0, &params.w1, v, 0.0);
    for mut col in pass.z1.column_iter_mut() {
        col += &params.b1;
    }
    let slope = params.leaky_slope;
    pass.a.zip_apply(&pass.z1, |a, z| *a = if z > 0.0 { z } else { slope * z });
    pass.kept.clear();
    pass.scale = 1.0;
    if let Some(rng) = rng.filter(|_| params.dropout_rate > 0.0) {
        let keep = 1.0 - params.dropout_rate;
        pass.scale = 1.0 / keep;
        // keep a unit when a uniform 32-bit draw falls below keep·2³²; each
        // 64-bit draw serves two units
        let threshold = (keep * 4_294_967_296.0) as u64;
        let mut bits = 0u64;
        for (i, x) in pass.a.iter_mut().enumerate() {
            let half = if i % 2 == 0 {
                bits = rng.next_u64();
                bits & 0xffff_ffff
            } else {
                bits >> 32
            };
            let k = half < threshold;
            *x = if k { *x * pass.scale } else { 0.0 };
            pass.kept.push(k);
        }
    }
    let z2 = pass.a.tr_mul(&params.w2);
    pass.p.clear();
    pass.p.extend(z2.iter().map(|&z| sigmoid(z + params.b2)));
}

/// Discriminator probability that `v` is a mapped source vector. Dropout
/// masks are drawn from `rng` only when `train_mode` is set.
pub fn discriminator_forward<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    v: &[f64],
    train_mode: bool,
    rng: &mut R,
) -> f64 {
    let m = Matrix::from_column_slice(v.len(), 1, v);
    let mut pass = Pass::default();
    forward_into(params, &m, train_mode.then_some(rng), &mut pass);
    pass.p[0]
}

/// Mean binary cross-entropy of a batch against one (smoothed) label, and
/// the gradient with respect to each logit. Clamped probabilities contribute
/// no gradient.
fn bce(p: &[f64], label: f64) -> (f64, Vec<f64>, usize) {
    let n = p.len() as f64;
    let mut loss = 0.0;
    let mut clamped = 0;
    let grads = p
        .iter()
        .map(|&p| {
            let pc = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
            loss -= label * pc.ln() + (1.0 - label) * (1.0 - pc).ln();
            if pc != p {
                clamped += 1;
                0.0
            } else {
                (p - label) / n
            }
        })
        .collect();
    (loss / n, grads, clamped)
}

/// Fill `pass.da` with the gradient with respect to the hidden
/// pre-activations, given logit gradients `dz2`.
fn backward_hidden(params: &DiscriminatorParams, pass: &mut Pass, dz2: &[f64]) {
    let slope = params.leaky_slope;
    for (j, mut col) in pass.da.column_iter_mut().enumerate() {
        col.copy_from(&params.w2);
        col *= dz2[j];
    }
    if !pass.kept.is_empty() {
        let scale = pass.scale;
        for (g, &k) in pass.da.iter_mut().zip(&pass.kept) {
            *g = if k { *g * scale } else { 0.0 };
        }
    }
    pass.da.zip_apply(&pass.z1, |g, z| {
        if z <= 0.0 {
            *g *= slope
        }
    });
}

/// Parameter gradients of one pass, added to `g` (`beta` = 0 overwrites).
fn backward_params(pass: &Pass, v: &Matrix, dz2: &[f64], g: &mut DiscriminatorGrads, beta: f64) {
    let dz2 = Vector::from_column_slice(dz2);
    g.w2.gemv(1.0, &pass.a, &dz2, beta);
    g.b2 = beta * g.b2 + dz2.sum();
    g.w1.gemm(1.0, &pass.da, &v.transpose(), beta);
    g.b1 *= beta;
    for col in pass.da.column_iter() {
        g.b1 += col;
    }
}

fn labels(smoothing: f64) -> (f64, f64) {
    (1.0 - smoothing, smoothing)
}

fn check_batches(a: &Matrix, b: &Matrix, d: usize) -> Result<()> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    if a.nrows() != d || b.nrows() != d {
        return Err(Error::InvalidInput("batch dimension differs from discriminator input".into()));
    }
    Ok(())
}

fn log_clamps(n: usize) {
    if n > 0 {
        log::debug!("{n} discriminator probabilities clamped to [{P_FLOOR}, 1 - {P_FLOOR}]");
    }
}

fn forward_both<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    a: &Matrix,
    b: &Matrix,
    rng: Option<&mut R>,
    scratch: &mut Scratch,
) {
    match rng {
        Some(rng) => {
            forward_into(params, a, Some(&mut *rng), &mut scratch.src);
            forward_into(params, b, Some(rng), &mut scratch.tgt);
        }
        None => {
            forward_into::<R>(params, a, None, &mut scratch.src);
            forward_into::<R>(params, b, None, &mut scratch.tgt);
        }
    }
}

/// [`discriminator_loss_and_grad`] writing the gradients into `scratch`
/// (read them back with [`Scratch::grads`]).
pub fn discriminator_loss_and_grad_into<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    mapped_src: &Matrix,
    tgt: &Matrix,
    smoothing: f64,
    rng: Option<&mut R>,
    scratch: &mut Scratch,
) -> Result<f64> {
    check_batches(mapped_src, tgt, params.input_dim())?;
    let (hi, lo) = labels(smoothing);
    forward_both(params, mapped_src, tgt, rng, scratch);
    let (ls, gs, cs) = bce(&scratch.src.p, hi);
    let (lt, gt, ct) = bce(&scratch.tgt.p, lo);
    log_clamps(cs + ct);
    let (d, h) = (params.input_dim(), params.hidden());
    let g = scratch.grads.get_or_insert_with(|| DiscriminatorGrads::zeros(d, h));
    if g.w1.shape() != (h, d) {
        *g = DiscriminatorGrads::zeros(d, h);
    }
    backward_hidden(params, &mut scratch.src, &gs);
    backward_params(&scratch.src, mapped_src, &gs, g, 0.0);
    backward_hidden(params, &mut scratch.tgt, &gt);
    backward_params(&scratch.tgt, tgt, &gt, g, 1.0);
    Ok(ls + lt)
}

/// `L_D = −mean log P(src | W p) − mean log P(tgt | c)` with labels smoothed
/// towards ½ by `smoothing` (0 gives the plain objective). `rng` enables
/// dropout.
pub fn discriminator_loss_and_grad<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    mapped_src: &Matrix,
    tgt: &Matrix,
    smoothing: f64,
    rng: Option<&mut R>,
) -> Result<(f64, DiscriminatorGrads)> {
    let mut scratch = Scratch::new();
    let loss = discriminator_loss_and_grad_into(params, mapped_src, tgt, smoothing, rng, &mut scratch)?;
    Ok((loss, scratch.grads.take().expect("gradients written")))
}

/// Evaluation-mode `L_D`.
pub fn discriminator_loss(params: &DiscriminatorParams, mapped_src: &Matrix, tgt: &Matrix, smoothing: f64) -> Result<f64> {
    discriminator_loss_and_grad::<rand_chacha::ChaCha8Rng>(params, mapped_src, tgt, smoothing, None).map(|r| r.0)
}

/// [`generator_loss_and_grad`] reusing the buffers in `scratch`.
pub fn generator_loss_and_grad_into<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    w: &Matrix,
    src: &Matrix,
    tgt: &Matrix,
    smoothing: f64,
    rng: Option<&mut R>,
    scratch: &mut Scratch,
) -> Result<(f64, Matrix)> {
    check_batches(src, tgt, params.input_dim())?;
    if w.nrows() != params.input_dim() || w.ncols() != src.nrows() {
        return Err(Error::InvalidInput("W shape does not match the batches".into()));
    }
    let (hi, lo) = labels(smoothing);
    let mapped = w * src;
    forward_both(params, &mapped, tgt, rng, scratch);
    let (ls, gs, cs) = bce(&scratch.src.p, lo);
    let (lt, _, ct) = bce(&scratch.tgt.p, hi);
    log_clamps(cs + ct);
    backward_hidden(params, &mut scratch.src, &gs);
    let dv = params.w1.tr_mul(&scratch.src.da);
    Ok((ls + lt, dv * src.transpose()))
}

/// `L_W = −mean log P(tgt | W p) − mean log P(src | c)` and its gradient with
/// respect to `W` (the target term is constant in `W`).
pub fn generator_loss_and_grad<R: Rng + ?Sized>(
    params: &DiscriminatorParams,
    w: &Matrix,
    src: &Matrix,
    tgt: &Matrix,
    smoothing: f64,
    rng: Option<&mut R>,
) -> Result<(f64, Matrix)> {
    generator_loss_and_grad_into(params, w, src, tgt, smoothing, rng, &mut Scratch::new())
}

/// Evaluation-mode `L_W`.
pub fn generator_loss(params: &DiscriminatorParams, w: &Matrix, src: &Matrix, tgt: &Matrix, smoothing: f64) -> Result<f64> {
    generator_loss_and_grad::<rand_chacha::ChaCha8Rng>(params, w, src, tgt, smoothing, None).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_is_uninformative() {
        let p = DiscriminatorParams::zeros(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(discriminator_forward(&p, &[1.0, -2.0, 3.0], false, &mut rng), 0.5);
        let x = Matrix::from_element(3, 4, 0.7);
        let ln4 = 2.0 * std::f64::consts::LN_2;
        assert!((discriminator_loss(&p, &x, &x, 0.0).unwrap() - ln4).abs() < 1e-12);
        assert!((generator_loss(&p, &Matrix::identity(3, 3), &x, &x, 0.1).unwrap() - ln4).abs() < 1e-12);
    }

    #[test]
    fn saturated_bias() {
        let mut p = DiscriminatorParams::zeros(2, 4);
        p.b2 = 20.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(discriminator_forward(&p, &[0.3, 0.1], false, &mut rng) > 1.0 - 1e-8);
    }

    #[test]
    fn sidecar_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = DiscriminatorParams::new(3, 5, 0.1, 0.2, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        p.save(&path).unwrap();
        assert_eq!(DiscriminatorParams::load(&path).unwrap(), p);
    }
}
