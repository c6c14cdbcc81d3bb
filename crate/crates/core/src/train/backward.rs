use crate::gru::{forward, ForwardTrace, GruDims, GruParams, TENSOR_NAMES};

use super::TrainError;

/// One gradient array per parameter tensor, shaped like [`GruParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(GruParams);

impl Gradients {
    pub fn zeros(dims: GruDims) -> Self {
        Gradients(GruParams::zeros(dims))
    }

    pub fn as_params(&self) -> &GruParams {
        &self.0
    }

    pub fn tensors(&self) -> [&[f64]; 11] {
        self.0.tensors()
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 11] {
        self.0.tensors_mut()
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|g| *g *= k);
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|g| g.is_finite()))
    }

    /// Rescales so that the global L2 norm is at most `max_norm`; returns the
    /// norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
        norm
    }
}

/// Mean of squared differences over all elements.
pub fn mse(y_hat: &[f64], y: &[f64]) -> Result<f64, TrainError> {
    if y_hat.len() != y.len() {
        return Err(TrainError::ShapeMismatch { expected: y.len(), found: y_hat.len() });
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = y_hat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / y.len() as f64)
}

fn check_trace(p: &GruParams, trace: &ForwardTrace, y: &[f64]) -> Result<(), TrainError> {
    let GruDims { input, hidden, output } = p.dims();
    if trace.steps.is_empty() {
        return Err(TrainError::TraceMismatch("trace has no steps".into()));
    }
    if trace.y_hat.len() != output {
        return Err(TrainError::TraceMismatch(format!(
            "trace output has {} entries, model has {}",
            trace.y_hat.len(),
            output
        )));
    }
    if y.len() != output {
        return Err(TrainError::ShapeMismatch { expected: output, found: y.len() });
    }
    for (t, s) in trace.steps.iter().enumerate() {
        let hidden_ok = [&s.h_prev, &s.r, &s.h_tilde, &s.z, &s.u, &s.h]
            .iter()
            .all(|v| v.len() == hidden);
        if !hidden_ok || s.x.len() != input {
            return Err(TrainError::TraceMismatch(format!("step {} has inconsistent sizes", t)));
        }
    }
    Ok(())
}

/// Reverse-mode pass through `trace`, adding the gradient of the squared
/// error loss into `g`. Returns the loss.
pub fn backward_into(
    p: &GruParams,
    trace: &ForwardTrace,
    y: &[f64],
    g: &mut Gradients,
) -> Result<f64, TrainError> {
    check_trace(p, trace, y)?;
    if g.as_params().dims() != p.dims() {
        return Err(TrainError::TraceMismatch("gradient buffer has different dimensions".into()));
    }
    let hidden = p.dims().hidden;
    let out_n = y.len() as f64;
    let loss = mse(&trace.y_hat, y)?;

    let gp = &mut g.0;
    let dy: Vec<f64> = trace.y_hat.iter().zip(y).map(|(a, b)| 2.0 * (a - b) / out_n).collect();
    gp.out_bias.iter_mut().zip(&dy).for_each(|(g, d)| *g += d);
    gp.out_weight.add_outer(&dy, trace.h_last());
    let mut dh = vec![0.0; hidden];
    p.out_weight.tr_mul_vec_acc(&dy, &mut dh);

    let mut da_u = vec![0.0; hidden];
    let mut da_z = vec![0.0; hidden];
    let mut da_r = vec![0.0; hidden];
    let mut dh_tilde = vec![0.0; hidden];
    let mut dh_prev = vec![0.0; hidden];

    for s in trace.steps.iter().rev() {
        for i in 0..hidden {
            da_u[i] = dh[i] * (s.z[i] - s.h_prev[i]) * s.u[i] * (1.0 - s.u[i]);
            da_z[i] = dh[i] * s.u[i] * (1.0 - s.z[i] * s.z[i]);
            dh_prev[i] = dh[i] * (1.0 - s.u[i]);
        }

        gp.recur_update.add_outer(&da_u, &s.h_prev);
        gp.input_update.add_outer(&da_u, &s.x);
        gp.bias_update.iter_mut().zip(&da_u).for_each(|(g, d)| *g += d);
        p.recur_update.tr_mul_vec_acc(&da_u, &mut dh_prev);

        gp.recur_cand.add_outer(&da_z, &s.h_tilde);
        gp.input_cand.add_outer(&da_z, &s.x);
        gp.bias_cand.iter_mut().zip(&da_z).for_each(|(g, d)| *g += d);
        dh_tilde.iter_mut().for_each(|v| *v = 0.0);
        p.recur_cand.tr_mul_vec_acc(&da_z, &mut dh_tilde);

        for i in 0..hidden {
            dh_prev[i] += dh_tilde[i] * s.r[i];
            da_r[i] = dh_tilde[i] * s.h_prev[i] * s.r[i] * (1.0 - s.r[i]);
        }
        gp.recur_reset.add_outer(&da_r, &s.h_prev);
        gp.input_reset.add_outer(&da_r, &s.x);
        gp.bias_reset.iter_mut().zip(&da_r).for_each(|(g, d)| *g += d);
        p.recur_reset.tr_mul_vec_acc(&da_r, &mut dh_prev);

        std::mem::swap(&mut dh, &mut dh_prev);
    }
    Ok(loss)
}

/// Loss and exact gradient for one traced sequence.
pub fn backward(
    p: &GruParams,
    trace: &ForwardTrace,
    y: &[f64],
) -> Result<(f64, Gradients), TrainError> {
    let mut g = Gradients::zeros(p.dims());
    let loss = backward_into(p, trace, y, &mut g)?;
    Ok((loss, g))
}

fn loss_at<X: AsRef<[f64]>>(p: &GruParams, inputs: &[X], target: &[f64]) -> f64 {
    let h0 = vec![0.0; p.dims().hidden];
    match forward(p, &h0, inputs) {
        Ok(tr) => mse(&tr.y_hat, target).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: &'static str,
    pub max_relative_error: f64,
    pub max_abs_gradient: f64,
    /// Analytic and numeric derivative of the worst element.
    pub worst_pair: (f64, f64),
}

/// Central-difference check of [`backward`] for every scalar parameter,
/// reported per tensor. Relative error is `|a - n| / max(|a|, |n|, 1e-12)`.
pub fn grad_check_report<X: AsRef<[f64]>>(
    p: &GruParams,
    inputs: &[X],
    target: &[f64],
    epsilon: f64,
) -> Result<Vec<TensorCheck>, TrainError> {
    let h0 = vec![0.0; p.dims().hidden];
    let trace = forward(p, &h0, inputs)?;
    let (_, analytic) = backward(p, &trace, target)?;

    let mut probe = p.clone();
    let mut report = Vec::with_capacity(TENSOR_NAMES.len());
    for (k, name) in TENSOR_NAMES.iter().enumerate() {
        let n = analytic.tensors()[k].len();
        let mut worst = 0.0f64;
        let mut worst_pair = (0.0, 0.0);
        let mut biggest = 0.0f64;
        for j in 0..n {
            let orig = probe.tensors()[k][j];
            probe.tensors_mut()[k][j] = orig + epsilon;
            let plus = loss_at(&probe, inputs, target);
            probe.tensors_mut()[k][j] = orig - epsilon;
            let minus = loss_at(&probe, inputs, target);
            probe.tensors_mut()[k][j] = orig;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.tensors()[k][j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
            let rel = if rel.is_nan() { f64::INFINITY } else { rel };
            if rel > worst {
                worst = rel;
                worst_pair = (a, numeric);
            }
            biggest = biggest.max(a.abs());
        }
        report.push(TensorCheck { name, max_relative_error: worst, max_abs_gradient: biggest, worst_pair });
    }
    Ok(report)
}

/// Worst relative error over all parameters, see [`grad_check_report`].
pub fn grad_check<X: AsRef<[f64]>>(
    p: &GruParams,
    inputs: &[X],
    target: &[f64],
    epsilon: f64,
) -> Result<f64, TrainError> {
    Ok(grad_check_report(p, inputs, target, epsilon)?
        .iter()
        .map(|c| c.max_relative_error)
        .fold(0.0, f64::max))
}
