use crate::model::{Gradients, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &ModelParams) -> Self {
        let n = params.w.len() + params.theta.len() + 4;
        Adam {
            cfg,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    /// Bias-corrected Adam update over `[w, theta, category_logits]`, using
    /// the step-size form `lr·sqrt(1-β2^t)/(1-β1^t) · m / (sqrt(v) + eps·sqrt(1-β2^t))`.
    pub fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        self.step += 1;
        let c = self.cfg;
        let bc1 = 1.0 - c.beta1.powi(self.step);
        let root_bc2 = (1.0 - c.beta2.powi(self.step)).sqrt();
        let lr = c.learning_rate * root_bc2 / bc1;
        let eps = c.eps * root_bc2;
        let nw = params.w.len();
        let nt = params.theta.len();
        let (m_w, m_rest) = self.m.split_at_mut(nw);
        let (v_w, v_rest) = self.v.split_at_mut(nw);
        let (m_t, m_l) = m_rest.split_at_mut(nt);
        let (v_t, v_l) = v_rest.split_at_mut(nt);
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = c.beta1 * *m + (1.0 - c.beta1) * g;
                *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
                *p -= lr * *m / (v.sqrt() + eps);
            }
        };
        update(&mut params.w, &grads.w, m_w, v_w);
        update(&mut params.theta, &grads.theta, m_t, v_t);
        update(&mut params.category_logits, &grads.category_logits, m_l, v_l);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn small() -> ModelParams {
        ModelParams::init(
            ModelConfig {
                dim: 2,
                out_dim: 2,
                max_depth: 2,
                ..Default::default()
            },
            0,
        )
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = small();
        let before = p.clone();
        let mut adam = Adam::new(AdamConfig::default(), &p);
        let g = Gradients::zeros(&p);
        for _ in 0..3 {
            adam.step(&mut p, &g);
        }
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = small();
        let before = p.clone();
        let mut adam = Adam::new(AdamConfig::default(), &p);
        let mut g = Gradients::zeros(&p);
        g.w[0] = 3.0;
        g.theta[1] = -0.5;
        adam.step(&mut p, &g);
        assert!((before.w[0] - p.w[0] - 0.001).abs() < 1e-9);
        assert!((p.theta[1] - before.theta[1] - 0.001).abs() < 1e-9);
        assert_eq!(p.w[1], before.w[1]);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = small();
        p.category_logits = [2.0, -1.0, 0.5, 0.0];
        let mut adam = Adam::new(
            AdamConfig {
                learning_rate: 0.05,
                ..Default::default()
            },
            &p,
        );
        for _ in 0..2000 {
            let mut g = Gradients::zeros(&p);
            for (g, x) in g.category_logits.iter_mut().zip(&p.category_logits) {
                *g = 2.0 * x;
            }
            adam.step(&mut p, &g);
        }
        assert!(p.category_logits.iter().all(|x| x.abs() < 1e-3));
    }
}
