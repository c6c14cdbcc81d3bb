use crate::gru::GruParams;

use super::backward::Gradients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(format!("unknown optimizer {:?} (sgd or adam)", other)),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

pub(crate) enum Optimizer {
    Sgd { lr: f64 },
    Adam { lr: f64, t: i32, m: Gradients, v: Gradients },
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

impl Optimizer {
    pub(crate) fn new(kind: OptimizerKind, lr: f64, p: &GruParams) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                t: 0,
                m: Gradients::zeros(p.dims()),
                v: Gradients::zeros(p.dims()),
            },
        }
    }

    pub(crate) fn step(&mut self, p: &mut GruParams, g: &Gradients) {
        match self {
            Optimizer::Sgd { lr } => {
                for (w, dw) in p.tensors_mut().into_iter().zip(g.tensors()) {
                    w.iter_mut().zip(dw).for_each(|(w, d)| *w -= *lr * d);
                }
            }
            Optimizer::Adam { lr, t, m, v } => {
                *t += 1;
                let c1 = 1.0 - BETA1.powi(*t);
                let c2 = 1.0 - BETA2.powi(*t);
                let tensors = p.tensors_mut().into_iter().zip(g.tensors());
                let moments = m.tensors_mut().into_iter().zip(v.tensors_mut());
                for ((w, dw), (m, v)) in tensors.zip(moments) {
                    for j in 0..w.len() {
                        m[j] = BETA1 * m[j] + (1.0 - BETA1) * dw[j];
                        v[j] = BETA2 * v[j] + (1.0 - BETA2) * dw[j] * dw[j];
                        let m_hat = m[j] / c1;
                        let v_hat = v[j] / c2;
                        w[j] -= *lr * m_hat / (v_hat.sqrt() + EPS);
                    }
                }
            }
        }
    }
}
