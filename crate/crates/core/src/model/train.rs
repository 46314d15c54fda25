//! Mini-batch Adam training with early stopping on validation AUC.

use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::auc;
use super::mixture::{FeatureSet, MaPhlpModel, Standardizer};
use super::mlp::Mlp;
use super::optim::Adam;
use crate::error::{Error, Result};

/// How the per-angle networks and the mixture logits are fitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// All networks and α together on the mixture loss.
    #[default]
    Joint,
    /// Each network on its own first, then α alone with the networks frozen.
    SeparateThenMix,
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(TrainMode::Joint),
            "separate" | "separate_then_mix" | "separate-then-mix" => {
                Ok(TrainMode::SeparateThenMix)
            }
            other => Err(Error::invalid(format!("unknown training mode {other:?}"))),
        }
    }
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Joint => "joint",
            TrainMode::SeparateThenMix => "separate_then_mix",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub hidden: Vec<usize>,
    pub mode: TrainMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 200,
            patience: 20,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            hidden: vec![128, 64],
            mode: TrainMode::Joint,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.beta1, self.beta2, self.eps];
        if positive
            .iter()
            .any(|v| !v.is_finite() || *v <= 0.0)
        {
            return Err(Error::invalid(
                "learning rate, moment coefficients and eps must be positive",
            ));
        }
        if self.beta1 >= 1.0 || self.beta2 >= 1.0 {
            return Err(Error::invalid("moment coefficients must be below 1"));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::invalid(
                "batch size, epochs and patience must be positive",
            ));
        }
        if self.patience > self.max_epochs {
            return Err(Error::invalid(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden);
        sizes.push(1);
        sizes
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trained<M> {
    pub model: M,
    pub history: Vec<EpochRecord>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_auc: f64,
}

/// A single-angle classifier with its input standardization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhlpModel {
    pub mlp: Mlp,
    pub standardizer: Standardizer,
}

impl PhlpModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let s = self.standardizer.apply(x)?;
        let logits = self.mlp.logits(s.view())?;
        Ok(logits.iter().map(|&l| super::mlp::sigmoid(l)).collect())
    }
}

fn check_sets(train: &FeatureSet, val: &FeatureSet) -> Result<()> {
    let (pos, neg) = train.class_counts();
    if pos == 0 || neg == 0 {
        return Err(Error::invalid(format!(
            "training set needs both classes, has {pos} positive and {neg} negative"
        )));
    }
    let (vp, vn) = val.class_counts();
    if vp == 0 || vn == 0 {
        return Err(Error::invalid("validation set needs both classes"));
    }
    if train.angles != val.angles || train.feature_len() != val.feature_len() {
        return Err(Error::invalid(
            "training and validation features disagree in layout",
        ));
    }
    Ok(())
}

fn rows(x: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    x.select(Axis(0), idx)
}

struct Learn {
    mlps: bool,
    alpha: bool,
}

/// Standardized per-angle inputs with their labels.
struct Inputs<'a> {
    x: &'a [Array2<f64>],
    y: &'a [bool],
}

/// Runs epochs on standardized inputs, keeping the parameters with the best validation AUC.
fn fit(
    mut model: MaPhlpModel,
    train: Inputs<'_>,
    val: Inputs<'_>,
    cfg: &TrainConfig,
    learn: Learn,
    rng: &mut ChaCha8Rng,
) -> Result<Trained<MaPhlpModel>> {
    let mut shapes: Vec<usize> = Vec::new();
    if learn.mlps {
        for m in &mut model.mlps {
            shapes.extend(m.params_mut().map(|p| p.len()));
        }
    }
    if learn.alpha {
        shapes.push(model.alpha.len());
    }
    let mut adam = Adam::new(&shapes, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
    let val_views: Vec<_> = val.x.iter().map(|m| m.view()).collect();

    let mut order: Vec<usize> = (0..train.y.len()).collect();
    let mut history = Vec::new();
    let mut best = (model.clone(), 0usize, f64::NEG_INFINITY);
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb: Vec<Array2<f64>> = train.x.iter().map(|x| rows(x, batch)).collect();
            let views: Vec<_> = xb.iter().map(|m| m.view()).collect();
            let yb: Vec<bool> = batch.iter().map(|&i| train.y[i]).collect();
            let grad = model.loss_and_grad(&views, &yb)?;
            loss_sum += grad.loss * batch.len() as f64;

            let mut params: Vec<&mut Vec<f64>> = Vec::new();
            let mut grads: Vec<&Vec<f64>> = Vec::new();
            if learn.mlps {
                for (m, g) in model.mlps.iter_mut().zip(&grad.mlps) {
                    params.extend(m.params_mut());
                    grads.extend(g.params());
                }
            }
            if learn.alpha {
                params.push(&mut model.alpha);
                grads.push(&grad.alpha);
            }
            adam.update(params, grads);
        }
        if !model.is_finite() {
            return Err(Error::Infeasible(format!(
                "training diverged at epoch {epoch}"
            )));
        }
        let val_auc = auc(&model.predict_standardized(&val_views)?, val.y)?;
        let train_loss = loss_sum / train.y.len() as f64;
        debug!("epoch {epoch}: loss {train_loss:.6} val auc {val_auc:.6}");
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_auc,
        });
        if val_auc > best.2 {
            best = (model.clone(), epoch, val_auc);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(Trained {
        model: best.0,
        history,
        best_epoch: best.1,
        best_val_auc: best.2,
    })
}

type Prepared = (Vec<Standardizer>, Vec<Array2<f64>>, Vec<Array2<f64>>);

fn prepare(train: &FeatureSet, val: &FeatureSet) -> Result<Prepared> {
    let scalers = train
        .per_angle
        .iter()
        .map(|x| Standardizer::fit(x.view()))
        .collect::<Result<Vec<_>>>()?;
    let apply = |set: &FeatureSet| -> Result<Vec<Array2<f64>>> {
        set.per_angle
            .iter()
            .zip(&scalers)
            .map(|(x, s)| s.apply(x.view()))
            .collect()
    };
    let (tx, vx) = (apply(train)?, apply(val)?);
    Ok((scalers, tx, vx))
}

fn init_mlps(n: usize, input: usize, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Mlp>> {
    let sizes = cfg.layer_sizes(input);
    (0..n).map(|_| Mlp::new(&sizes, rng)).collect()
}

fn derived_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Trains one classifier on a single-angle feature set.
pub fn train_phlp(
    train: &FeatureSet,
    val: &FeatureSet,
    cfg: &TrainConfig,
) -> Result<Trained<PhlpModel>> {
    cfg.validate()?;
    if train.angles.len() != 1 {
        return Err(Error::invalid(
            "train_phlp takes a single-angle feature set",
        ));
    }
    let t = train_ma_phlp_joint(train, val, cfg)?;
    let MaPhlpModel {
        mut mlps,
        mut standardizers,
        ..
    } = t.model;
    Ok(Trained {
        model: PhlpModel {
            mlp: mlps.pop().unwrap(),
            standardizer: standardizers.pop().unwrap(),
        },
        history: t.history,
        best_epoch: t.best_epoch,
        best_val_auc: t.best_val_auc,
    })
}

fn train_ma_phlp_joint(
    train: &FeatureSet,
    val: &FeatureSet,
    cfg: &TrainConfig,
) -> Result<Trained<MaPhlpModel>> {
    check_sets(train, val)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (scalers, tx, vx) = prepare(train, val)?;
    let mlps = init_mlps(train.angles.len(), train.feature_len(), cfg, &mut rng)?;
    let model = MaPhlpModel::new(train.angles.clone(), mlps, scalers)?;
    fit(
        model,
        Inputs {
            x: &tx,
            y: &train.labels,
        },
        Inputs {
            x: &vx,
            y: &val.labels,
        },
        cfg,
        Learn {
            mlps: true,
            alpha: true,
        },
        &mut rng,
    )
}

/// Trains the mixture over every angle in `train`.
pub fn train_ma_phlp(
    train: &FeatureSet,
    val: &FeatureSet,
    cfg: &TrainConfig,
) -> Result<Trained<MaPhlpModel>> {
    cfg.validate()?;
    match cfg.mode {
        TrainMode::Joint => {
            let t = train_ma_phlp_joint(train, val, cfg)?;
            info!(
                "mixture trained: best epoch {} val auc {:.4}",
                t.best_epoch, t.best_val_auc
            );
            Ok(t)
        }
        TrainMode::SeparateThenMix => {
            check_sets(train, val)?;
            let mut mlps = Vec::with_capacity(train.angles.len());
            let mut scalers = Vec::with_capacity(train.angles.len());
            for i in 0..train.angles.len() {
                let sub_cfg = TrainConfig {
                    seed: derived_seed(cfg.seed, i as u64),
                    ..cfg.clone()
                };
                let t = train_phlp(&train.single(i), &val.single(i), &sub_cfg)?;
                debug!(
                    "angle {} trained: val auc {:.4}",
                    train.angles[i], t.best_val_auc
                );
                mlps.push(t.model.mlp);
                scalers.push(t.model.standardizer);
            }
            let model = MaPhlpModel::new(train.angles.clone(), mlps, scalers)?;
            let tx = model.standardize(train)?;
            let vx = model.standardize(val)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, u64::MAX));
            fit(
                model,
                Inputs {
                    x: &tx,
                    y: &train.labels,
                },
                Inputs {
                    x: &vx,
                    y: &val.labels,
                },
                cfg,
                Learn {
                    mlps: false,
                    alpha: true,
                },
                &mut rng,
            )
        }
    }
}
