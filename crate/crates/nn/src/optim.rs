//! SGD with momentum and step learning-rate decay, and Adam.

use serde::{Deserialize, Serialize};

use crate::error::NnError;
use crate::layers::Network;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    SgdMomentum {
        learning_rate: f64,
        momentum: f64,
        /// Multiplier applied every `lr_decay_epoch` epochs.
        #[serde(default = "default_decay_factor")]
        lr_decay_factor: f64,
        #[serde(default = "default_decay_epoch")]
        lr_decay_epoch: usize,
    },
    Adam {
        learning_rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_decay_factor() -> f64 {
    1.0
}
fn default_decay_epoch() -> usize {
    80
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let mut problems = Vec::new();
        match self {
            OptimizerConfig::SgdMomentum {
                learning_rate,
                momentum,
                lr_decay_factor,
                lr_decay_epoch,
            } => {
                if *learning_rate <= 0.0 {
                    problems.push(format!("learning_rate must be > 0, got {learning_rate}"));
                }
                if !(0.0..1.0).contains(momentum) {
                    problems.push(format!("momentum must be in [0,1), got {momentum}"));
                }
                if !(0.0 < *lr_decay_factor && *lr_decay_factor <= 1.0) {
                    problems.push(format!(
                        "lr_decay_factor must be in (0,1], got {lr_decay_factor}"
                    ));
                }
                if *lr_decay_epoch == 0 {
                    problems.push("lr_decay_epoch must be >= 1".into());
                }
            }
            OptimizerConfig::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                if *learning_rate <= 0.0 {
                    problems.push(format!("learning_rate must be > 0, got {learning_rate}"));
                }
                if !(0.0..1.0).contains(beta1) || !(0.0..1.0).contains(beta2) {
                    problems.push(format!("betas must be in [0,1), got ({beta1}, {beta2})"));
                }
                if *epsilon <= 0.0 {
                    problems.push(format!("epsilon must be > 0, got {epsilon}"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(NnError::format(problems.join("; ")))
        }
    }

    /// The learning rate in effect at an epoch. SGD decays in steps of
    /// `lr_decay_epoch`; Adam keeps its configured rate.
    pub fn effective_lr(&self, epoch: usize) -> f64 {
        match self {
            OptimizerConfig::SgdMomentum {
                learning_rate,
                lr_decay_factor,
                lr_decay_epoch,
                ..
            } => learning_rate * lr_decay_factor.powi((epoch / lr_decay_epoch) as i32),
            OptimizerConfig::Adam { learning_rate, .. } => *learning_rate,
        }
    }
}

enum Slot {
    Sgd {
        velocity: Tensor,
    },
    Adam {
        moment1: Tensor,
        moment2: Tensor,
    },
}

/// Optimizer state for one network; slots are allocated lazily on the first
/// step, in parameter order.
pub struct Optimizer {
    config: OptimizerConfig,
    slots: Vec<Slot>,
    /// Adam step counter (shared across parameters).
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self, NnError> {
        config.validate()?;
        Ok(Optimizer {
            config,
            slots: Vec::new(),
            steps: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Applies one update from the accumulated layer gradients.
    ///
    /// `grad_scale` multiplies raw gradient sums (1/batch for minibatch
    /// averaging); `epoch` drives the SGD decay schedule.
    pub fn step(&mut self, net: &mut Network, epoch: usize, grad_scale: f64) {
        self.steps += 1;
        let mut slot_idx = 0;
        for layer in net.layers.iter_mut() {
            for (param, grad) in layer.params_and_grads() {
                if self.slots.len() == slot_idx {
                    self.slots.push(match self.config {
                        OptimizerConfig::SgdMomentum { .. } => Slot::Sgd {
                            velocity: Tensor::zeros(param.shape()),
                        },
                        OptimizerConfig::Adam { .. } => Slot::Adam {
                            moment1: Tensor::zeros(param.shape()),
                            moment2: Tensor::zeros(param.shape()),
                        },
                    });
                }
                match (&self.config, &mut self.slots[slot_idx]) {
                    (
                        OptimizerConfig::SgdMomentum { momentum, .. },
                        Slot::Sgd { velocity },
                    ) => {
                        let lr = self.config.effective_lr(epoch);
                        let vd = velocity.data_mut();
                        let pd = param.data_mut();
                        for ((v, p), g) in vd.iter_mut().zip(pd).zip(grad.data()) {
                            *v = momentum * *v - lr * (g * grad_scale);
                            *p += *v;
                        }
                    }
                    (
                        OptimizerConfig::Adam {
                            learning_rate,
                            beta1,
                            beta2,
                            epsilon,
                        },
                        Slot::Adam { moment1, moment2 },
                    ) => {
                        let t = self.steps as f64;
                        let bias1 = 1.0 - beta1.powf(t);
                        let bias2 = 1.0 - beta2.powf(t);
                        let m1 = moment1.data_mut();
                        let m2 = moment2.data_mut();
                        let pd = param.data_mut();
                        for (((m, v), p), g) in m1.iter_mut().zip(m2).zip(pd).zip(grad.data()) {
                            let g = g * grad_scale;
                            *m = beta1 * *m + (1.0 - beta1) * g;
                            *v = beta2 * *v + (1.0 - beta2) * g * g;
                            let m_hat = *m / bias1;
                            let v_hat = *v / bias2;
                            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                        }
                    }
                    _ => unreachable!("slot kind matches config kind"),
                }
                slot_idx += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{Dense, Mode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sgd_config() -> OptimizerConfig {
        OptimizerConfig::SgdMomentum {
            learning_rate: 1e-3,
            momentum: 0.8,
            lr_decay_factor: 0.1,
            lr_decay_epoch: 80,
        }
    }

    #[test]
    fn schedule_drops_tenfold_at_epoch_80() {
        let cfg = sgd_config();
        assert_eq!(cfg.effective_lr(0), 1e-3);
        assert_eq!(cfg.effective_lr(79), 1e-3);
        assert!((cfg.effective_lr(80) - 1e-4).abs() < 1e-19);
        assert!((cfg.effective_lr(160) - 1e-5).abs() < 1e-20);
    }

    fn one_param_net(w: f64) -> Network {
        let weight = Tensor::from_vec(&[1, 1], vec![w]).unwrap();
        let bias = Tensor::zeros(&[1]);
        Network::new(vec![Box::new(Dense::from_parameters(weight, bias).unwrap())])
    }

    fn run_step(net: &mut Network, opt: &mut Optimizer, x: f64, g: f64, epoch: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = Tensor::from_vec(&[1], vec![x]).unwrap();
        net.forward(&input, Mode::Train, &mut rng).unwrap();
        net.backward(&Tensor::from_vec(&[1], vec![g]).unwrap()).unwrap();
        opt.step(net, epoch, 1.0);
        net.zero_grads();
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut net = one_param_net(0.37);
        let mut opt = Optimizer::new(sgd_config()).unwrap();
        run_step(&mut net, &mut opt, 0.0, 0.0, 0);
        assert_eq!(net.layers[0].params()[0].data(), &[0.37]);
    }

    #[test]
    fn sgd_two_steps_match_hand_computation() {
        // dL/dw = g*x; lr 1e-3, momentum 0.8, w0 = 1.0
        let mut net = one_param_net(1.0);
        let mut opt = Optimizer::new(sgd_config()).unwrap();
        // step 1: grad = 2.0*3.0 = 6.0; v = -lr*6 = -0.006; w = 0.994
        run_step(&mut net, &mut opt, 3.0, 2.0, 0);
        let w1 = net.layers[0].params()[0].data()[0];
        assert!((w1 - 0.994).abs() < 1e-15, "w1 = {w1}");
        // step 2: grad = 1.0*2.0 = 2.0; v = 0.8*(-0.006) - 0.002 = -0.0068
        run_step(&mut net, &mut opt, 2.0, 1.0, 0);
        let w2 = net.layers[0].params()[0].data()[0];
        assert!((w2 - (0.994 - 0.0068)).abs() < 1e-15, "w2 = {w2}");
    }

    #[test]
    fn adam_first_step_is_full_learning_rate() {
        // with bias correction the first Adam step is lr * g/(|g| + eps')
        let mut net = one_param_net(0.5);
        let mut opt = Optimizer::new(OptimizerConfig::Adam {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        })
        .unwrap();
        run_step(&mut net, &mut opt, 1.0, 4.0, 0);
        let w = net.layers[0].params()[0].data()[0];
        // m_hat = 4, v_hat = 16, step = 0.01 * 4/(4 + 1e-8) ~ 0.01
        assert!((w - 0.49).abs() < 1e-9, "w = {w}");
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(Optimizer::new(OptimizerConfig::SgdMomentum {
            learning_rate: 0.0,
            momentum: 0.8,
            lr_decay_factor: 0.1,
            lr_decay_epoch: 80,
        })
        .is_err());
        assert!(Optimizer::new(OptimizerConfig::SgdMomentum {
            learning_rate: 1e-3,
            momentum: 1.0,
            lr_decay_factor: 0.1,
            lr_decay_epoch: 80,
        })
        .is_err());
        assert!(Optimizer::new(OptimizerConfig::Adam {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 1.5,
            epsilon: 1e-8,
        })
        .is_err());
    }
}
