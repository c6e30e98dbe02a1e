//! KAN layers over a polynomial basis.
//!
//! Layer `p` maps `y_p` (width `k_p`) to `y_{p+1}` with
//! `y_{p+1,j} = sum_i rho_{i,j}(y_{p,i})`, where every edge function is
//! `rho_{i,j}(y) = sum_d c_{i,j,d} P_d(tanh y)`. The Padé family instead
//! learns a rational edge `N(t) / Q(t)` with `Q(0) = 1`, the denominator
//! magnitude clamped at [`PADE_EPSILON`].
//!
//! Coefficients are stored flat in input-major, output-major, degree-major
//! order: `c[(i * k_out + j) * width + d]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::basis::{BasisError, BasisKernel, FamilySpec};
use crate::exec::Execution;

/// Lower bound on `|Q(t)|` for rational edges.
pub const PADE_EPSILON: f64 = 1e-4;

/// Largest squashed magnitude handed to a basis; `tanh` rounds to exactly
/// `±1` for large inputs and the basis domain is the open interval.
const SQUASH_LIMIT: f64 = 1.0 - f64::EPSILON;

/// Samples per forward work item.
const TILE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KanError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("trace does not belong to this network: {0}")]
    TraceMismatch(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Per-edge parameter layout of a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLayout {
    /// `width = D + 1` basis coefficients per edge.
    Basis { width: usize },
    /// Numerator `p_0..=p_m` block followed by denominator `q_1..=q_n` block.
    Rational { num: usize, den: usize },
}

impl EdgeLayout {
    pub fn per_edge(self) -> usize {
        match self {
            EdgeLayout::Basis { width } => width,
            EdgeLayout::Rational { num, den } => num + den,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KanLayer {
    in_dim: usize,
    out_dim: usize,
    layout: EdgeLayout,
    params: Vec<f64>,
}

impl KanLayer {
    pub fn new(in_dim: usize, out_dim: usize, layout: EdgeLayout, params: Vec<f64>) -> Result<Self, KanError> {
        if in_dim == 0 || out_dim == 0 {
            return Err(KanError::InvalidDims(format!("layer {in_dim} -> {out_dim}")));
        }
        let expected = in_dim * out_dim * layout.per_edge();
        if params.len() != expected {
            return Err(KanError::ShapeMismatch {
                expected,
                got: params.len(),
            });
        }
        if let Some(bad) = params.iter().find(|v| !v.is_finite()) {
            return Err(KanError::InvalidDims(format!("non-finite coefficient {bad}")));
        }
        Ok(Self {
            in_dim,
            out_dim,
            layout,
            params,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn layout(&self) -> EdgeLayout {
        self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn edges(&self) -> usize {
        self.in_dim * self.out_dim
    }
}

/// Squashed inputs and basis evaluations of one layer, `batch` rows each.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace {
    pub batch: usize,
    pub in_dim: usize,
    pub width: usize,
    pub input: Vec<f64>,
    pub squashed: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub batch: usize,
    pub layers: Vec<LayerTrace>,
    pub logits: Vec<f64>,
}

/// Coefficient gradients per layer (same layout as [`KanLayer::params`]) and
/// gradients with respect to the network input.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct KanNetwork {
    spec: FamilySpec,
    dims: Vec<usize>,
    degree: usize,
    layers: Vec<KanLayer>,
    kernel: BasisKernel,
}

fn layout_for(spec: &FamilySpec, degree: usize) -> (EdgeLayout, usize) {
    match spec {
        FamilySpec::Pade { m, n } => (EdgeLayout::Rational { num: m + 1, den: *n }, (*m).max(*n)),
        _ => (EdgeLayout::Basis { width: degree + 1 }, degree),
    }
}

impl KanNetwork {
    /// Builds a network from explicit per-layer coefficients.
    pub fn from_params(
        spec: &FamilySpec,
        dims: &[usize],
        degree: usize,
        params: Vec<Vec<f64>>,
    ) -> Result<Self, KanError> {
        if dims.len() < 2 {
            return Err(KanError::InvalidDims(format!(
                "need at least input and output widths, got {dims:?}"
            )));
        }
        if dims.contains(&0) {
            return Err(KanError::InvalidDims(format!("zero width in {dims:?}")));
        }
        if params.len() != dims.len() - 1 {
            return Err(KanError::InvalidDims(format!(
                "{} coefficient blocks for {} layers",
                params.len(),
                dims.len() - 1
            )));
        }
        let (layout, kernel_degree) = layout_for(spec, degree);
        let kernel = BasisKernel::new(spec, kernel_degree)?;
        let layers = dims
            .windows(2)
            .zip(params)
            .map(|(w, p)| KanLayer::new(w[0], w[1], layout, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            spec: spec.clone(),
            dims: dims.to_vec(),
            degree,
            layers,
            kernel,
        })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn layers(&self) -> &[KanLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [KanLayer] {
        &mut self.layers
    }

    pub fn kernel(&self) -> &BasisKernel {
        &self.kernel
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("dims has at least two entries")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.params.len()).sum()
    }

    /// All coefficients, layer-major.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params.iter().copied()).collect()
    }
}

/// Fresh network with coefficients drawn i.i.d. from `N(0, 1 / (k_p (D + 1)))`
/// using ChaCha8 seeded from `seed`.
///
/// Rational (Padé) edges draw their numerators the same way with `m + 1` in
/// place of `D + 1` and start from a unit denominator (`q_k = 0`).
pub fn init_network(spec: &FamilySpec, dims: &[usize], degree: usize, seed: u64) -> Result<KanNetwork, KanError> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(KanError::InvalidDims(format!("{dims:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (layout, _) = layout_for(spec, degree);
    let params = dims
        .windows(2)
        .map(|w| {
            let (k_in, k_out) = (w[0], w[1]);
            let edges = k_in * k_out;
            match layout {
                EdgeLayout::Basis { width } => {
                    let std = 1.0 / ((k_in * width) as f64).sqrt();
                    let normal = Normal::new(0.0, std).expect("positive standard deviation");
                    (0..edges * width).map(|_| normal.sample(&mut rng)).collect()
                }
                EdgeLayout::Rational { num, den } => {
                    let std = 1.0 / ((k_in * num) as f64).sqrt();
                    let normal = Normal::new(0.0, std).expect("positive standard deviation");
                    let mut p: Vec<f64> = (0..edges * num).map(|_| normal.sample(&mut rng)).collect();
                    p.resize(edges * (num + den), 0.0);
                    p
                }
            }
        })
        .collect();
    KanNetwork::from_params(spec, dims, degree, params)
}

struct SampleForward {
    out: Vec<f64>,
    squashed: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

#[inline]
fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

/// Rational edge: returns `(N, Q, clamped denominator, clamped?)`.
#[inline]
fn rational_parts(num: &[f64], den: &[f64], powers: &[f64]) -> (f64, f64, f64, bool) {
    let n: f64 = num.iter().zip(powers).map(|(c, p)| c * p).sum();
    let q: f64 = 1.0 + den.iter().zip(&powers[1..]).map(|(c, p)| c * p).sum::<f64>();
    if q.abs() < PADE_EPSILON {
        let sign = if q < 0.0 { -1.0 } else { 1.0 };
        (n, q, PADE_EPSILON * sign, true)
    } else {
        (n, q, q, false)
    }
}

/// Value of one rational edge at `t` (used by tests and the checkpoint tools).
pub fn rational_edge(num: &[f64], den: &[f64], t: f64) -> f64 {
    let q = 1.0 + t * horner(den, t);
    let n = horner(num, t);
    let q = if q.abs() < PADE_EPSILON {
        PADE_EPSILON * if q < 0.0 { -1.0 } else { 1.0 }
    } else {
        q
    };
    n / q
}

/// `row[j] += sum_d block[j][d] * basis[d]` with the degree loop unrolled.
#[inline]
fn edge_sums<const W: usize>(row: &mut [f64], block: &[f64], basis: &[f64]) {
    let basis: &[f64; W] = basis.try_into().expect("basis width");
    for (o, c) in row.iter_mut().zip(block.chunks_exact(W)) {
        let mut acc = 0.0;
        for d in 0..W {
            acc += c[d] * basis[d];
        }
        *o += acc;
    }
}

fn edge_sums_dyn(row: &mut [f64], block: &[f64], basis: &[f64]) {
    let w = basis.len();
    for (o, c) in row.iter_mut().zip(block.chunks_exact(w)) {
        let mut acc = 0.0;
        for d in 0..w {
            acc += c[d] * basis[d];
        }
        *o += acc;
    }
}

/// Forward over a tile of `rows` consecutive samples. The input index is the
/// outer loop so each edge block stays in cache across the tile; every
/// output still accumulates over `i` in ascending order, so results do not
/// depend on the tiling.
fn forward_tile(layer: &KanLayer, kernel: &BasisKernel, y: &[f64], rows: usize) -> Result<SampleForward, KanError> {
    let (k_in, k_out) = (layer.in_dim, layer.out_dim);
    let width = kernel.len();
    let mut squashed = Vec::with_capacity(rows * k_in);
    let mut values = vec![0.0; rows * k_in * width];
    let mut derivs = vec![0.0; rows * k_in * width];
    for (i, &yi) in y.iter().enumerate() {
        let t = yi.tanh().clamp(-SQUASH_LIMIT, SQUASH_LIMIT);
        debug_assert!(t > -1.0 && t < 1.0);
        squashed.push(t);
        let span = i * width..(i + 1) * width;
        kernel.eval_into(t, &mut values[span.clone()], &mut derivs[span])?;
    }
    let mut out = vec![0.0; rows * k_out];
    match layer.layout {
        EdgeLayout::Basis { width: w } => {
            for i in 0..k_in {
                let block = &layer.params[i * k_out * w..(i + 1) * k_out * w];
                for s in 0..rows {
                    let basis = &values[(s * k_in + i) * w..][..w];
                    let row = &mut out[s * k_out..(s + 1) * k_out];
                    match w {
                        1 => edge_sums::<1>(row, block, basis),
                        2 => edge_sums::<2>(row, block, basis),
                        3 => edge_sums::<3>(row, block, basis),
                        4 => edge_sums::<4>(row, block, basis),
                        5 => edge_sums::<5>(row, block, basis),
                        6 => edge_sums::<6>(row, block, basis),
                        _ => edge_sums_dyn(row, block, basis),
                    }
                }
            }
        }
        EdgeLayout::Rational { num, den } => {
            let (num_block, den_block) = layer.params.split_at(layer.edges() * num);
            for i in 0..k_in {
                for s in 0..rows {
                    let powers = &values[(s * k_in + i) * width..][..width];
                    for (j, o) in out[s * k_out..(s + 1) * k_out].iter_mut().enumerate() {
                        let e = i * k_out + j;
                        let (n, _, denom, _) = rational_parts(
                            &num_block[e * num..(e + 1) * num],
                            &den_block[e * den..(e + 1) * den],
                            powers,
                        );
                        *o += n / denom;
                    }
                }
            }
        }
    }
    Ok(SampleForward {
        out,
        squashed,
        values,
        derivs,
    })
}

/// One layer over a batch stored row-major (`batch` rows of `k_in`).
pub fn layer_forward(
    layer: &KanLayer,
    kernel: &BasisKernel,
    input: &[f64],
    batch: usize,
    exec: Execution,
) -> Result<(Vec<f64>, LayerTrace), KanError> {
    let k_in = layer.in_dim;
    if input.len() != batch * k_in {
        return Err(KanError::ShapeMismatch {
            expected: batch * k_in,
            got: input.len(),
        });
    }
    let tiles = batch.div_ceil(TILE);
    let rows = exec.map(tiles, |k| {
        let lo = k * TILE;
        let hi = (lo + TILE).min(batch);
        forward_tile(layer, kernel, &input[lo * k_in..hi * k_in], hi - lo)
    });
    let width = kernel.len();
    let mut out = Vec::with_capacity(batch * layer.out_dim);
    let mut trace = LayerTrace {
        batch,
        in_dim: k_in,
        width,
        input: input.to_vec(),
        squashed: Vec::with_capacity(batch * k_in),
        values: Vec::with_capacity(batch * k_in * width),
        derivs: Vec::with_capacity(batch * k_in * width),
    };
    for row in rows {
        let row = row?;
        out.extend_from_slice(&row.out);
        trace.squashed.extend_from_slice(&row.squashed);
        trace.values.extend_from_slice(&row.values);
        trace.derivs.extend_from_slice(&row.derivs);
    }
    Ok((out, trace))
}

pub fn forward(net: &KanNetwork, x: &[f64], batch: usize, exec: Execution) -> Result<(Vec<f64>, ForwardTrace), KanError> {
    let mut current = x.to_vec();
    let mut layers = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        let (next, trace) = layer_forward(layer, &net.kernel, &current, batch, exec)?;
        layers.push(trace);
        current = next;
    }
    Ok((
        current.clone(),
        ForwardTrace {
            batch,
            layers,
            logits: current,
        },
    ))
}

/// Logits only, without keeping the trace.
pub fn predict_logits(net: &KanNetwork, x: &[f64], batch: usize, exec: Execution) -> Result<Vec<f64>, KanError> {
    let mut current = x.to_vec();
    for layer in &net.layers {
        current = layer_forward(layer, &net.kernel, &current, batch, exec)?.0;
    }
    Ok(current)
}

fn coefficient_grads(layer: &KanLayer, trace: &LayerTrace, grad_out: &[f64], exec: Execution) -> Vec<f64> {
    let (k_in, k_out, batch, width) = (layer.in_dim, layer.out_dim, trace.batch, trace.width);
    match layer.layout {
        EdgeLayout::Basis { width: w } => {
            let blocks = exec.map(k_in, |i| {
                let mut acc = vec![0.0; k_out * w];
                for s in 0..batch {
                    let basis = &trace.values[(s * k_in + i) * width..][..w];
                    for (j, g) in grad_out[s * k_out..(s + 1) * k_out].iter().enumerate() {
                        if *g == 0.0 {
                            continue;
                        }
                        let slot = &mut acc[j * w..(j + 1) * w];
                        for d in 0..w {
                            slot[d] += g * basis[d];
                        }
                    }
                }
                acc
            });
            blocks.concat()
        }
        EdgeLayout::Rational { num, den } => {
            let edges = layer.edges();
            let (num_block, den_block) = layer.params.split_at(edges * num);
            let blocks = exec.map(k_in, |i| {
                let mut g_num = vec![0.0; k_out * num];
                let mut g_den = vec![0.0; k_out * den];
                for s in 0..batch {
                    let powers = &trace.values[(s * k_in + i) * width..][..width];
                    for (j, g) in grad_out[s * k_out..(s + 1) * k_out].iter().enumerate() {
                        if *g == 0.0 {
                            continue;
                        }
                        let e = i * k_out + j;
                        let (n, q, denom, clamped) = rational_parts(
                            &num_block[e * num..(e + 1) * num],
                            &den_block[e * den..(e + 1) * den],
                            powers,
                        );
                        for d in 0..num {
                            g_num[j * num + d] += g * powers[d] / denom;
                        }
                        if !clamped {
                            let scale = -g * n / (q * q);
                            for k in 0..den {
                                g_den[j * den + k] += scale * powers[k + 1];
                            }
                        }
                    }
                }
                (g_num, g_den)
            });
            let mut out = Vec::with_capacity(layer.params.len());
            for (g_num, _) in &blocks {
                out.extend_from_slice(g_num);
            }
            for (_, g_den) in &blocks {
                out.extend_from_slice(g_den);
            }
            out
        }
    }
}

fn input_grads(layer: &KanLayer, trace: &LayerTrace, grad_out: &[f64], exec: Execution) -> Vec<f64> {
    let (k_in, k_out, batch, width) = (layer.in_dim, layer.out_dim, trace.batch, trace.width);
    let rows = exec.map(batch, |s| {
        let g_row = &grad_out[s * k_out..(s + 1) * k_out];
        (0..k_in)
            .map(|i| {
                let t = trace.squashed[s * k_in + i];
                let base = (s * k_in + i) * width;
                let dvals = &trace.derivs[base..base + width];
                let mut acc = 0.0;
                match layer.layout {
                    EdgeLayout::Basis { width: w } => {
                        let block = &layer.params[i * k_out * w..(i + 1) * k_out * w];
                        for (g, c) in g_row.iter().zip(block.chunks_exact(w)) {
                            if *g == 0.0 {
                                continue;
                            }
                            let mut slope = 0.0;
                            for d in 0..w {
                                slope += c[d] * dvals[d];
                            }
                            acc += g * slope;
                        }
                    }
                    EdgeLayout::Rational { num, den } => {
                        let (num_block, den_block) = layer.params.split_at(layer.edges() * num);
                        let powers = &trace.values[base..base + width];
                        for (j, g) in g_row.iter().enumerate() {
                            if *g == 0.0 {
                                continue;
                            }
                            let e = i * k_out + j;
                            let nc = &num_block[e * num..(e + 1) * num];
                            let dc = &den_block[e * den..(e + 1) * den];
                            let (n, q, denom, clamped) = rational_parts(nc, dc, powers);
                            let dn: f64 = nc.iter().zip(dvals).map(|(c, p)| c * p).sum();
                            let mut slope = dn / denom;
                            if !clamped {
                                let dq: f64 = dc.iter().zip(&dvals[1..]).map(|(c, p)| c * p).sum();
                                slope -= n * dq / (q * q);
                            }
                            acc += g * slope;
                        }
                    }
                }
                acc * (1.0 - t * t)
            })
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

fn check_trace(net: &KanNetwork, trace: &ForwardTrace, grad_logits: &[f64]) -> Result<(), KanError> {
    if trace.layers.len() != net.layers.len() {
        return Err(KanError::TraceMismatch(format!(
            "{} traced layers for {} network layers",
            trace.layers.len(),
            net.layers.len()
        )));
    }
    for (layer, lt) in net.layers.iter().zip(&trace.layers) {
        if lt.in_dim != layer.in_dim || lt.batch != trace.batch || lt.width != net.kernel.len() {
            return Err(KanError::TraceMismatch("layer shape differs".to_string()));
        }
    }
    let expected = trace.batch * net.output_dim();
    if grad_logits.len() != expected {
        return Err(KanError::ShapeMismatch {
            expected,
            got: grad_logits.len(),
        });
    }
    Ok(())
}

/// Reverse pass. Skips the input gradient of the first layer when
/// `want_input` is false (training never needs it).
pub fn backward_with(
    net: &KanNetwork,
    trace: &ForwardTrace,
    grad_logits: &[f64],
    exec: Execution,
    want_input: bool,
) -> Result<Gradients, KanError> {
    check_trace(net, trace, grad_logits)?;
    let mut grad = grad_logits.to_vec();
    let mut layer_grads = vec![Vec::new(); net.layers.len()];
    let mut input = Vec::new();
    for (p, (layer, lt)) in net.layers.iter().zip(&trace.layers).enumerate().rev() {
        layer_grads[p] = coefficient_grads(layer, lt, &grad, exec);
        if p > 0 || want_input {
            let g_in = input_grads(layer, lt, &grad, exec);
            if p == 0 {
                input = g_in;
            } else {
                grad = g_in;
            }
        }
    }
    Ok(Gradients {
        layers: layer_grads,
        input,
    })
}

pub fn backward(net: &KanNetwork, trace: &ForwardTrace, grad_logits: &[f64], exec: Execution) -> Result<Gradients, KanError> {
    backward_with(net, trace, grad_logits, exec, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros_like(net: &KanNetwork) -> KanNetwork {
        let params = net.layers.iter().map(|l| vec![0.0; l.params.len()]).collect();
        KanNetwork::from_params(&net.spec, &net.dims, net.degree, params).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let spec = FamilySpec::Gottlieb;
        let a = init_network(&spec, &[784, 32, 10], 3, 5).unwrap();
        let b = init_network(&spec, &[784, 32, 10], 3, 5).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        assert_eq!(a.layers[0].params.len(), 784 * 32 * 4);
        assert_eq!(a.layers[1].params.len(), 32 * 10 * 4);
        assert_eq!(a.parameter_count(), 101_632);
        let c = init_network(&spec, &[784, 32, 10], 3, 6).unwrap();
        assert_ne!(a.flat_params(), c.flat_params());
    }

    #[test]
    fn invalid_dims_rejected() {
        assert!(init_network(&FamilySpec::Fermat, &[4], 2, 0).is_err());
        assert!(init_network(&FamilySpec::Fermat, &[4, 0, 2], 2, 0).is_err());
    }

    #[test]
    fn zero_coefficients_give_zero_output() {
        let net = zeros_like(&init_network(&FamilySpec::Boubaker, &[3, 4, 2], 3, 1).unwrap());
        let (logits, _) = forward(&net, &[0.3, -2.0, 0.7, 1.0, 1.0, 1.0], 2, Execution::Sequential).unwrap();
        assert_eq!(logits, vec![0.0; 4]);
    }

    #[test]
    fn single_edge_vieta_pell_at_zero() {
        let net = KanNetwork::from_params(&FamilySpec::VietaPell, &[1, 1], 1, vec![vec![0.0, 0.5]]).unwrap();
        let (out, _) = forward(&net, &[0.0], 1, Execution::Sequential).unwrap();
        assert_eq!(out, vec![0.0]);
        let (out, _) = forward(&net, &[0.5], 1, Execution::Sequential).unwrap();
        assert!((out[0] - 0.5 * 2.0 * 0.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn degree_zero_is_input_independent() {
        let net = init_network(&FamilySpec::Gottlieb, &[3, 5, 2], 0, 9).unwrap();
        let (a, _) = forward(&net, &[0.1, 0.2, 0.3], 1, Execution::Sequential).unwrap();
        let (b, _) = forward(&net, &[-4.0, 9.0, 0.0], 1, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_equals_independent_samples() {
        let net = init_network(&FamilySpec::Charlier { a: 2.0 }, &[3, 4, 2], 3, 2).unwrap();
        let x = [0.1, -0.5, 2.0, 0.0, 0.3, -1.0, 5.0, 0.2, 0.9];
        let (batched, _) = forward(&net, &x, 3, Execution::Parallel).unwrap();
        for s in 0..3 {
            let (single, _) = forward(&net, &x[s * 3..(s + 1) * 3], 1, Execution::Sequential).unwrap();
            assert_eq!(&batched[s * 2..(s + 1) * 2], &single[..]);
        }
    }

    #[test]
    fn shape_and_trace_mismatch() {
        let net = init_network(&FamilySpec::Fermat, &[3, 2], 2, 0).unwrap();
        assert!(matches!(
            forward(&net, &[1.0, 2.0], 1, Execution::Sequential),
            Err(KanError::ShapeMismatch { .. })
        ));
        let other = init_network(&FamilySpec::Fermat, &[3, 2, 2], 2, 0).unwrap();
        let (_, trace) = forward(&other, &[1.0, 2.0, 3.0], 1, Execution::Sequential).unwrap();
        assert!(matches!(
            backward(&net, &trace, &[1.0, 1.0], Execution::Sequential),
            Err(KanError::TraceMismatch(_))
        ));
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let net = init_network(&FamilySpec::Narayana, &[3, 4, 2], 3, 3).unwrap();
        let (_, trace) = forward(&net, &[0.2, 0.4, 0.6], 1, Execution::Sequential).unwrap();
        let g = backward(&net, &trace, &[0.0, 0.0], Execution::Sequential).unwrap();
        assert!(g.layers.iter().flatten().all(|v| *v == 0.0));
        assert!(g.input.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn squashing_stays_inside_open_interval() {
        let net = init_network(&FamilySpec::Fermat, &[2, 1], 2, 0).unwrap();
        let (_, trace) = forward(&net, &[1e6, -1e6], 1, Execution::Sequential).unwrap();
        assert!(trace.layers[0].squashed.iter().all(|t| t.abs() < 1.0));
    }

    #[test]
    fn rational_edge_clamps_denominator() {
        assert_eq!(rational_edge(&[1.0], &[-1.0], 1.0), 1.0 / PADE_EPSILON);
        assert!((rational_edge(&[1.0, 0.5], &[-0.5], 0.5) - 1.25 / 0.75).abs() < 1e-15);
    }
}
