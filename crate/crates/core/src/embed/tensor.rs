//! Dense row-major `f32` tensors and the forward primitives built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape {
                expected: shape,
                found: vec![data.len()],
                context: " (element count)".into(),
            });
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Geometry(format!("non-finite tensor entry {} at {i}", data[i])));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn filled(shape: &[usize], value: f32) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn vector(data: Vec<f32>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn from_f64(data: &[f64]) -> Self {
        Self::vector(data.iter().map(|&x| x as f32).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[0]
        } else {
            1
        }
    }

    /// Size of the last axis.
    pub fn cols(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_tensor(&self, i: usize) -> Tensor {
        Tensor::vector(self.row(i).to_vec())
    }

    /// The same data viewed as `[1, n]` when one-dimensional.
    pub fn as_matrix(&self) -> Tensor {
        match self.shape.len() {
            1 => Tensor {
                shape: vec![1, self.shape[0]],
                data: self.data.clone(),
            },
            _ => self.clone(),
        }
    }

    pub fn expect_shape(&self, expected: &[usize], context: &str) -> Result<()> {
        if self.shape != expected {
            return Err(Error::shape(expected, &self.shape, context));
        }
        Ok(())
    }

    /// Concatenation of one-dimensional tensors.
    pub fn concat(parts: &[&Tensor]) -> Result<Tensor> {
        let mut data = Vec::new();
        for p in parts {
            if p.shape.len() != 1 {
                return Err(Error::shape(&[p.len()], &p.shape, "concat expects vectors"));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Tensor::vector(data))
    }

    /// Stacks equal-length vectors into a matrix.
    pub fn stack(rows: &[Tensor]) -> Result<Tensor> {
        let first = rows.first().ok_or(Error::Empty("no rows to stack"))?;
        let d = first.len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.shape != [d] {
                return Err(Error::shape(&[d], &r.shape, "stack"));
            }
            data.extend_from_slice(&r.data);
        }
        Ok(Tensor {
            shape: vec![rows.len(), d],
            data,
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::shape(&self.shape, &other.shape, "add"));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f32 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }
}

/// `x W^T + b` for `x: [n, in]` (or `[in]`), `W: [out, in]`, `b: [out]`.
pub fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    if w.shape.len() != 2 {
        return Err(Error::shape(&[0, 0], &w.shape, "dense weight must be a matrix"));
    }
    let (out, inp) = (w.shape[0], w.shape[1]);
    if x.cols() != inp || x.shape.len() > 2 {
        return Err(Error::shape(&[inp], &x.shape, "dense input"));
    }
    b.expect_shape(&[out], "dense bias")?;
    let n = x.rows();
    let mut data = vec![0.0f32; n * out];
    for r in 0..n {
        let xr = x.row(r);
        for o in 0..out {
            let wr = &w.data[o * inp..(o + 1) * inp];
            let mut acc = b.data[o];
            for k in 0..inp {
                acc += xr[k] * wr[k];
            }
            data[r * out + o] = acc;
        }
    }
    let shape = if x.shape.len() == 1 { vec![out] } else { vec![n, out] };
    Ok(Tensor { shape, data })
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Normalizes every row over the last axis.
pub fn layer_norm(x: &Tensor, gamma: &Tensor, beta: &Tensor, eps: f32) -> Result<Tensor> {
    let d = x.cols();
    gamma.expect_shape(&[d], "layer norm gamma")?;
    beta.expect_shape(&[d], "layer norm beta")?;
    let mut out = x.clone();
    for r in 0..x.rows() {
        let row = &mut out.data[r * d..(r + 1) * d];
        let mean = row.iter().sum::<f32>() / d as f32;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / d as f32;
        let inv = 1.0 / (var + eps).sqrt();
        for (k, v) in row.iter_mut().enumerate() {
            *v = (*v - mean) * inv * gamma.data[k] + beta.data[k];
        }
    }
    Ok(out)
}

fn check_pool_input(x: &Tensor) -> Result<()> {
    if x.shape.len() != 2 || x.shape[0] == 0 {
        return Err(Error::shape(
            &[1, x.cols()],
            &x.shape,
            "pooling needs a non-empty matrix",
        ));
    }
    Ok(())
}

/// Column means of `x: [n, d]`.
pub fn mean_pool(x: &Tensor) -> Result<Tensor> {
    check_pool_input(x)?;
    let (n, d) = (x.shape[0], x.shape[1]);
    let mut acc = vec![0.0f32; d];
    for r in 0..n {
        for (a, v) in acc.iter_mut().zip(x.row(r)) {
            *a += v;
        }
    }
    Ok(Tensor::vector(acc.into_iter().map(|a| a / n as f32).collect()))
}

/// Column maxima of `x: [n, d]`.
pub fn max_pool(x: &Tensor) -> Result<Tensor> {
    check_pool_input(x)?;
    let d = x.shape[1];
    let mut acc = vec![f32::NEG_INFINITY; d];
    for r in 0..x.shape[0] {
        for (a, &v) in acc.iter_mut().zip(x.row(r)) {
            *a = a.max(v);
        }
    }
    Ok(Tensor::vector(acc))
}

/// Sinusoidal position code: `sin` on even and `cos` on odd coordinates.
pub fn cosine_positional(index: usize, dim: usize) -> Tensor {
    let data = (0..dim)
        .map(|k| {
            let pair = (k / 2) as f64;
            let angle = index as f64 / 10000f64.powf(2.0 * pair / dim as f64);
            (if k % 2 == 0 { angle.sin() } else { angle.cos() }) as f32
        })
        .collect();
    Tensor::vector(data)
}

/// Adds position codes to the rows of `x`.
pub fn add_positional(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    let d = x.cols();
    for r in 0..x.rows() {
        let pe = cosine_positional(r, d);
        for (v, p) in out.data[r * d..(r + 1) * d].iter_mut().zip(&pe.data) {
            *v += p;
        }
    }
    out
}

/// `h' = tanh((W_he x + W_hh h) W_h)`, with the bracket taken as a row
/// vector.
pub fn rnn_step(x: &Tensor, h: &Tensor, w_he: &Tensor, w_hh: &Tensor, w_h: &Tensor) -> Result<Tensor> {
    let hd = h.len();
    w_he.expect_shape(&[hd, x.len()], "rnn W_he")?;
    w_hh.expect_shape(&[hd, hd], "rnn W_hh")?;
    w_h.expect_shape(&[hd, hd], "rnn W_h")?;
    let zero = Tensor::zeros(&[hd]);
    let a = dense_forward(x, w_he, &zero)?.add(&dense_forward(h, w_hh, &zero)?)?;
    let mut out = vec![0.0f32; hd];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0f32;
        for (k, av) in a.data.iter().enumerate() {
            acc += av * w_h.data[k * hd + j];
        }
        *o = acc.tanh();
    }
    Ok(Tensor::vector(out))
}

fn softmax_in_place(row: &mut [f32]) {
    let m = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Parameters of one post-norm encoder layer.
#[derive(Debug, Clone, Copy)]
pub struct AttentionParams<'a> {
    pub heads: usize,
    pub wq: &'a Tensor,
    pub bq: &'a Tensor,
    pub wk: &'a Tensor,
    pub bk: &'a Tensor,
    pub wv: &'a Tensor,
    pub bv: &'a Tensor,
    pub wo: &'a Tensor,
    pub bo: &'a Tensor,
    pub norm1: (&'a Tensor, &'a Tensor),
    pub ff1: (&'a Tensor, &'a Tensor),
    pub ff2: (&'a Tensor, &'a Tensor),
    pub norm2: (&'a Tensor, &'a Tensor),
}

pub const LAYER_NORM_EPS: f32 = 1e-5;

/// Multi-head self-attention followed by a ReLU feed-forward block, each
/// wrapped in residual + layer norm. No masking, no position information.
pub fn attention_layer(x: &Tensor, p: &AttentionParams<'_>) -> Result<Tensor> {
    let x = x.as_matrix();
    let (n, d) = (x.shape[0], x.shape[1]);
    if p.heads == 0 || d % p.heads != 0 {
        return Err(Error::Config(format!("{} heads do not divide width {d}", p.heads)));
    }
    let dh = d / p.heads;
    let q = dense_forward(&x, p.wq, p.bq)?;
    let k = dense_forward(&x, p.wk, p.bk)?;
    let v = dense_forward(&x, p.wv, p.bv)?;
    let scale = 1.0 / (dh as f32).sqrt();
    let mut ctx = vec![0.0f32; n * d];
    let mut scores = vec![0.0f32; n];
    for h in 0..p.heads {
        let off = h * dh;
        for i in 0..n {
            let qi = &q.data[i * d + off..i * d + off + dh];
            for (j, s) in scores.iter_mut().enumerate() {
                let kj = &k.data[j * d + off..j * d + off + dh];
                *s = qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f32>() * scale;
            }
            softmax_in_place(&mut scores);
            let out = &mut ctx[i * d + off..i * d + off + dh];
            for (j, &s) in scores.iter().enumerate() {
                let vj = &v.data[j * d + off..j * d + off + dh];
                for (o, vv) in out.iter_mut().zip(vj) {
                    *o += s * vv;
                }
            }
        }
    }
    let ctx = Tensor {
        shape: vec![n, d],
        data: ctx,
    };
    let attn = dense_forward(&ctx, p.wo, p.bo)?;
    let h1 = layer_norm(&x.add(&attn)?, p.norm1.0, p.norm1.1, LAYER_NORM_EPS)?;
    let ff = dense_forward(&relu(&dense_forward(&h1, p.ff1.0, p.ff1.1)?), p.ff2.0, p.ff2.1)?;
    layer_norm(&h1.add(&ff)?, p.norm2.0, p.norm2.1, LAYER_NORM_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools() {
        let v = Tensor::vector(vec![1.0, -2.0, 3.5]);
        let m = Tensor::stack(&[v.clone(), v.clone(), v.clone()]).unwrap();
        assert_eq!(mean_pool(&m).unwrap(), v);
        assert_eq!(max_pool(&m).unwrap(), v);
        let a = Tensor::stack(&[Tensor::vector(vec![1.0, 5.0]), Tensor::vector(vec![3.0, 2.0])]).unwrap();
        let b = Tensor::stack(&[Tensor::vector(vec![3.0, 2.0]), Tensor::vector(vec![1.0, 5.0])]).unwrap();
        assert_eq!(max_pool(&a).unwrap(), max_pool(&b).unwrap());
        assert_eq!(max_pool(&a).unwrap().data(), &[3.0, 5.0]);
        assert!(mean_pool(&Tensor::zeros(&[0, 3])).is_err());
    }

    #[test]
    fn dense_matches_triple_loop() {
        let x = Tensor::new(vec![4, 4], (0..16).map(|i| (i as f32 * 0.37).sin()).collect()).unwrap();
        let w = Tensor::new(vec![4, 4], (0..16).map(|i| (i as f32 * 0.91).cos()).collect()).unwrap();
        let b = Tensor::vector(vec![0.1, -0.2, 0.3, 0.0]);
        let y = dense_forward(&x, &w, &b).unwrap();
        for i in 0..4 {
            for o in 0..4 {
                let mut acc = b.data()[o] as f64;
                for k in 0..4 {
                    acc += x.data()[i * 4 + k] as f64 * w.data()[o * 4 + k] as f64;
                }
                assert!((y.data()[i * 4 + o] as f64 - acc).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn shape_errors_name_both_shapes() {
        let x = Tensor::zeros(&[3]);
        let w = Tensor::zeros(&[2, 4]);
        let err = dense_forward(&x, &w, &Tensor::zeros(&[2])).unwrap_err().to_string();
        assert!(err.contains("[4]") && err.contains("[3]"), "{err}");
    }

    #[test]
    fn scalar_rnn() {
        let (we, wh, w) = (0.7f32, -0.3f32, 1.2f32);
        let t = |v: f32| Tensor::new(vec![1, 1], vec![v]).unwrap();
        let mut h = Tensor::vector(vec![0.0]);
        let mut h_ref = 0.0f32;
        for x in [0.5f32, -1.0, 2.0] {
            h = rnn_step(&Tensor::vector(vec![x]), &h, &t(we), &t(wh), &t(w)).unwrap();
            h_ref = ((we * x + wh * h_ref) * w).tanh();
            assert!((h.data()[0] - h_ref).abs() < 1e-7);
        }
    }

    #[test]
    fn positional_code() {
        let pe = cosine_positional(0, 6);
        assert_eq!(pe.data(), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert!((cosine_positional(1, 4).data()[0] - 1f32.sin()).abs() < 1e-7);
    }

    #[test]
    fn layer_norm_unit_stats() {
        let x = Tensor::vector(vec![1.0, 2.0, 3.0, 4.0]);
        let y = layer_norm(&x, &Tensor::filled(&[4], 1.0), &Tensor::zeros(&[4]), 0.0).unwrap();
        let mean: f32 = y.data().iter().sum::<f32>() / 4.0;
        let var: f32 = y.data().iter().map(|v| v * v).sum::<f32>() / 4.0;
        assert!(mean.abs() < 1e-6 && (var - 1.0).abs() < 1e-5);
    }
}
