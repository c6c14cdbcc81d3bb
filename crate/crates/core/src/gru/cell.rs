use super::params::GruParams;
use super::GruError;

/// Logistic function, evaluated without overflowing for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid_vec(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| sigmoid(x)).collect()
}

/// Every intermediate of one recurrence step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    /// Reset gate.
    pub r: Vec<f64>,
    /// `h_prev ⊙ r`
    pub h_tilde: Vec<f64>,
    /// Candidate state.
    pub z: Vec<f64>,
    /// Update gate.
    pub u: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub steps: Vec<StepTrace>,
    pub y_hat: Vec<f64>,
}

impl ForwardTrace {
    pub fn h_last(&self) -> &[f64] {
        &self.steps.last().expect("trace has at least one step").h
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), GruError> {
    if expected == found {
        Ok(())
    } else {
        Err(GruError::DimensionMismatch { what, expected, found })
    }
}

fn affine(
    p_recur: &super::Matrix,
    h: &[f64],
    p_input: &super::Matrix,
    x: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let mut a = bias.to_vec();
    p_recur.mul_vec_acc(h, &mut a);
    p_input.mul_vec_acc(x, &mut a);
    a
}

pub fn gru_step(p: &GruParams, h_prev: &[f64], x: &[f64]) -> Result<StepTrace, GruError> {
    let dims = p.dims();
    check_len("hidden state", dims.hidden, h_prev.len())?;
    check_len("input", dims.input, x.len())?;

    let mut r = affine(&p.recur_reset, h_prev, &p.input_reset, x, &p.bias_reset);
    r.iter_mut().for_each(|v| *v = sigmoid(*v));

    let h_tilde: Vec<f64> = h_prev.iter().zip(&r).map(|(h, r)| h * r).collect();

    let mut z = affine(&p.recur_cand, &h_tilde, &p.input_cand, x, &p.bias_cand);
    z.iter_mut().for_each(|v| *v = v.tanh());

    let mut u = affine(&p.recur_update, h_prev, &p.input_update, x, &p.bias_update);
    u.iter_mut().for_each(|v| *v = sigmoid(*v));

    let h = h_prev
        .iter()
        .zip(&u)
        .zip(&z)
        .map(|((hp, u), z)| (1.0 - u) * hp + u * z)
        .collect();

    Ok(StepTrace { x: x.to_vec(), h_prev: h_prev.to_vec(), r, h_tilde, z, u, h })
}

/// `W_out h + b_out`, no activation.
pub fn readout(p: &GruParams, h: &[f64]) -> Result<Vec<f64>, GruError> {
    check_len("hidden state", p.dims().hidden, h.len())?;
    let mut y = p.out_bias.clone();
    p.out_weight.mul_vec_acc(h, &mut y);
    Ok(y)
}

/// Runs the recurrence over `xs` from `h0` and reads out the final state.
pub fn forward<X: AsRef<[f64]>>(
    p: &GruParams,
    h0: &[f64],
    xs: &[X],
) -> Result<ForwardTrace, GruError> {
    if xs.is_empty() {
        return Err(GruError::EmptySequence);
    }
    let mut steps: Vec<StepTrace> = Vec::with_capacity(xs.len());
    for x in xs {
        let h_prev = steps.last().map_or(h0, |s| s.h.as_slice());
        let step = gru_step(p, h_prev, x.as_ref())?;
        steps.push(step);
    }
    let y_hat = readout(p, &steps[steps.len() - 1].h)?;
    Ok(ForwardTrace { steps, y_hat })
}

/// Forward pass from a zero initial state.
pub fn predict<X: AsRef<[f64]>>(p: &GruParams, xs: &[X]) -> Result<Vec<f64>, GruError> {
    let h0 = vec![0.0; p.dims().hidden];
    forward(p, &h0, xs).map(|t| t.y_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gru::{GruDims, Matrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_unit() -> GruParams {
        GruParams::zeros(GruDims::new(4, 1, 4))
    }

    fn random_params(dims: GruDims, scale: f64, seed: u64) -> GruParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = GruParams::zeros(dims);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-scale..scale);
            }
        }
        p
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-100.0) < 1e-40);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        for x in [-30.0, -2.5, -1e-3, 0.7, 12.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() <= f64::EPSILON);
        }
        assert_eq!(sigmoid_vec(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn zero_parameters_halve_state() {
        let t = gru_step(&one_unit(), &[0.8], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.r, vec![0.5]);
        assert_eq!(t.h_tilde, vec![0.4]);
        assert_eq!(t.z, vec![0.0]);
        assert_eq!(t.u, vec![0.5]);
        assert!((t.h[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn closed_update_gate_preserves_state() {
        let mut p = one_unit();
        p.bias_update = vec![-100.0];
        let t = gru_step(&p, &[0.7], &[5.0, -3.0, 0.0, 1.0]).unwrap();
        assert!((t.h[0] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn dimension_checks() {
        let p = one_unit();
        assert!(matches!(gru_step(&p, &[0.0, 0.0], &[0.0; 4]), Err(GruError::DimensionMismatch { .. })));
        assert!(matches!(gru_step(&p, &[0.0], &[0.0; 3]), Err(GruError::DimensionMismatch { .. })));
        let empty: [[f64; 4]; 0] = [];
        assert!(matches!(forward(&p, &[0.0], &empty), Err(GruError::EmptySequence)));
        assert!(readout(&p, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn readout_cases() {
        let mut p = GruParams::zeros(GruDims::new(4, 4, 4));
        p.out_bias = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(readout(&p, &[0.3, -0.2, 0.1, 0.9]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(readout(&p, &[0.0; 4]).unwrap(), p.out_bias);
        p.out_weight = Matrix::identity(4);
        assert_eq!(readout(&p, &[0.5, 0.5, 0.5, 0.5]).unwrap(), vec![1.5, 2.5, 3.5, 4.5]);
    }

    #[test]
    fn length_one_forward_is_step_plus_readout() {
        let p = random_params(GruDims::new(4, 3, 4), 0.8, 1);
        let x = [0.2, -0.1, 0.5, 1.0];
        let tr = forward(&p, &[0.1, 0.2, 0.3], &[x]).unwrap();
        let st = gru_step(&p, &[0.1, 0.2, 0.3], &x).unwrap();
        assert_eq!(tr.steps, vec![st.clone()]);
        assert_eq!(tr.y_hat, readout(&p, &st.h).unwrap());
    }

    #[test]
    fn zero_model_predicts_zero() {
        let p = GruParams::zeros(GruDims::sectors(5));
        let xs = vec![[3.0, 1.0, 4.0, 1.0]; 7];
        assert_eq!(predict(&p, &xs).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn resuming_from_mid_trace_matches_full_run() {
        let p = random_params(GruDims::sectors(6), 1.0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<[f64; 4]> = (0..12).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let h0 = vec![0.0; 6];
        let full = forward(&p, &h0, &xs).unwrap();
        for cut in 1..xs.len() {
            let head = forward(&p, &h0, &xs[..cut]).unwrap();
            let tail = forward(&p, head.h_last(), &xs[cut..]).unwrap();
            assert_eq!(tail.y_hat, full.y_hat);
            assert_eq!(tail.steps[..], full.steps[cut..]);
        }
    }

    proptest! {
        #[test]
        fn gates_stay_in_range_and_state_is_convex(
            seed in any::<u64>(),
            hidden in 1usize..8,
            h_prev in prop::collection::vec(-1.0f64..1.0, 8),
            x in prop::array::uniform4(-5.0f64..5.0),
        ) {
            let p = random_params(GruDims::sectors(hidden), 2.0, seed);
            let t = gru_step(&p, &h_prev[..hidden], &x).unwrap();
            for i in 0..hidden {
                // closed bounds: the gates saturate in floating point
                prop_assert!((0.0..=1.0).contains(&t.r[i]));
                prop_assert!((0.0..=1.0).contains(&t.u[i]));
                prop_assert!((-1.0..=1.0).contains(&t.z[i]));
                let (lo, hi) = if t.h_prev[i] < t.z[i] { (t.h_prev[i], t.z[i]) } else { (t.z[i], t.h_prev[i]) };
                prop_assert!(t.h[i] >= lo - 1e-15 && t.h[i] <= hi + 1e-15);
                prop_assert_eq!(t.h[i], (1.0 - t.u[i]) * t.h_prev[i] + t.u[i] * t.z[i]);
            }
            prop_assert_eq!(gru_step(&p, &h_prev[..hidden], &x).unwrap(), t);
        }

        #[test]
        fn forced_closed_gate_is_a_fixed_point(
            seed in any::<u64>(),
            h_prev in prop::collection::vec(-1.0f64..1.0, 4),
            x in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let mut p = random_params(GruDims::sectors(4), 1.0, seed);
            p.bias_update = vec![-200.0; 4];
            let t = gru_step(&p, &h_prev, &x).unwrap();
            for i in 0..4 {
                prop_assert!((t.h[i] - h_prev[i]).abs() < 1e-8);
            }
        }
    }
}
