//! Softmax-weighted mixture of per-angle classifiers.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::mlp::{sigmoid, Mlp, MlpGrad};
use crate::error::{Error, Result};
use crate::subgraph::Angle;

/// Clamp applied to mixture probabilities inside the loss.
const PROB_FLOOR: f64 = 1e-12;

/// Per-coordinate affine map `(x - mean) / scale` fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation, or 1 for constant coordinates.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn fit(x: ArrayView2<'_, f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::invalid("cannot standardize an empty matrix"));
        }
        let mean = x.mean_axis(Axis(0)).expect("nonempty");
        let var = x.var_axis(Axis(0), 0.0);
        let scale = var
            .iter()
            .map(|&s| if s > 1e-24 { s.sqrt() } else { 1.0 })
            .collect();
        Ok(Self {
            mean: mean.to_vec(),
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

/// Feature matrices for a set of links, one `links x features` matrix per angle, all rows
/// aligned on the same links.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub angles: Vec<Angle>,
    pub per_angle: Vec<Array2<f64>>,
    pub labels: Vec<bool>,
}

impl FeatureSet {
    pub fn new(angles: Vec<Angle>, per_angle: Vec<Array2<f64>>, labels: Vec<bool>) -> Result<Self> {
        if angles.is_empty() || angles.len() != per_angle.len() {
            return Err(Error::invalid(format!(
                "{} angles but {} feature matrices",
                angles.len(),
                per_angle.len()
            )));
        }
        let cols = per_angle[0].ncols();
        for m in &per_angle {
            if m.nrows() != labels.len() {
                return Err(Error::DimensionMismatch {
                    expected: labels.len(),
                    actual: m.nrows(),
                });
            }
            if m.ncols() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: m.ncols(),
                });
            }
        }
        Ok(Self {
            angles,
            per_angle,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_len(&self) -> usize {
        self.per_angle[0].ncols()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (pos, self.labels.len() - pos)
    }

    /// Only the angle at `index`.
    pub fn single(&self, index: usize) -> FeatureSet {
        FeatureSet {
            angles: vec![self.angles[index]],
            per_angle: vec![self.per_angle[index].clone()],
            labels: self.labels.clone(),
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&a| (a - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Mean binary cross-entropy of probabilities against labels.
pub fn bce(probs: &[f64], labels: &[bool]) -> f64 {
    let n = probs.len() as f64;
    probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaPhlpModel {
    pub angles: Vec<Angle>,
    pub mlps: Vec<Mlp>,
    /// Mixture logits; weights are `softmax(alpha)`.
    pub alpha: Vec<f64>,
    pub standardizers: Vec<Standardizer>,
}

/// Gradients of the mean batch loss.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureGrad {
    pub loss: f64,
    pub mlps: Vec<MlpGrad>,
    pub alpha: Vec<f64>,
}

impl MaPhlpModel {
    pub fn new(
        angles: Vec<Angle>,
        mlps: Vec<Mlp>,
        standardizers: Vec<Standardizer>,
    ) -> Result<Self> {
        if angles.is_empty() || angles.len() != mlps.len() || mlps.len() != standardizers.len() {
            return Err(Error::invalid(
                "angles, networks and standardizers must align",
            ));
        }
        for (m, s) in mlps.iter().zip(&standardizers) {
            if m.input_dim() != s.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m.input_dim(),
                    actual: s.dim(),
                });
            }
        }
        Ok(Self {
            alpha: vec![0.0; angles.len()],
            angles,
            mlps,
            standardizers,
        })
    }

    pub fn num_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        softmax(&self.alpha)
    }

    fn check_inputs(&self, inputs: &[ArrayView2<'_, f64>]) -> Result<usize> {
        if inputs.len() != self.num_angles() {
            return Err(Error::DimensionMismatch {
                expected: self.num_angles(),
                actual: inputs.len(),
            });
        }
        let rows = inputs[0].nrows();
        if let Some(bad) = inputs.iter().find(|x| x.nrows() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: bad.nrows(),
            });
        }
        Ok(rows)
    }

    /// Per-angle probabilities `z_i` for already standardized inputs, one row per angle.
    pub fn component_probs(&self, inputs: &[ArrayView2<'_, f64>]) -> Result<Array2<f64>> {
        let rows = self.check_inputs(inputs)?;
        let mut z = Array2::zeros((self.num_angles(), rows));
        for (i, (mlp, x)) in self.mlps.iter().zip(inputs).enumerate() {
            let logits = mlp.logits(*x)?;
            z.row_mut(i).assign(&logits.mapv(sigmoid));
        }
        Ok(z)
    }

    /// Mixture probabilities for already standardized inputs.
    pub fn predict_standardized(&self, inputs: &[ArrayView2<'_, f64>]) -> Result<Vec<f64>> {
        let z = self.component_probs(inputs)?;
        let w = Array1::from(self.weights());
        Ok(w.dot(&z).to_vec())
    }

    pub fn standardize(&self, set: &FeatureSet) -> Result<Vec<Array2<f64>>> {
        if set.angles != self.angles {
            return Err(Error::invalid("feature set angles differ from the model's"));
        }
        set.per_angle
            .iter()
            .zip(&self.standardizers)
            .map(|(x, s)| s.apply(x.view()))
            .collect()
    }

    /// Probabilities `p = Σ softmax(α)_i z_i` for raw features.
    pub fn predict(&self, set: &FeatureSet) -> Result<Vec<f64>> {
        let std = self.standardize(set)?;
        let views: Vec<_> = std.iter().map(|m| m.view()).collect();
        self.predict_standardized(&views)
    }

    /// Loss and gradients of mean BCE over a standardized batch.
    pub fn loss_and_grad(
        &self,
        inputs: &[ArrayView2<'_, f64>],
        labels: &[bool],
    ) -> Result<MixtureGrad> {
        let rows = self.check_inputs(inputs)?;
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: labels.len(),
            });
        }
        let w = self.weights();
        let caches = self
            .mlps
            .iter()
            .zip(inputs)
            .map(|(m, x)| m.forward(*x))
            .collect::<Result<Vec<_>>>()?;
        let z: Vec<Array1<f64>> = caches.iter().map(|c| c.logits.mapv(sigmoid)).collect();
        let mut p = Array1::zeros(rows);
        for (wi, zi) in w.iter().zip(&z) {
            p.scaled_add(*wi, zi);
        }
        let p_vec = p.to_vec();
        let loss = bce(&p_vec, labels);

        let n = rows as f64;
        // dL/dp for each row
        let dp: Array1<f64> = p
            .iter()
            .zip(labels)
            .map(|(&pb, &y)| {
                let pc = pb.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
                let y = if y { 1.0 } else { 0.0 };
                (pc - y) / (pc * (1.0 - pc)) / n
            })
            .collect();

        let alpha = w
            .iter()
            .zip(&z)
            .map(|(&wj, zj)| {
                wj * dp
                    .iter()
                    .zip(zj)
                    .zip(&p)
                    .map(|((g, zb), pb)| g * (zb - pb))
                    .sum::<f64>()
            })
            .collect();
        let mlps = self
            .mlps
            .iter()
            .zip(&caches)
            .zip(w.iter().zip(&z))
            .map(|((m, cache), (&wi, zi))| {
                let dlogit: Array1<f64> = dp
                    .iter()
                    .zip(zi)
                    .map(|(g, zb)| g * wi * zb * (1.0 - zb))
                    .collect();
                m.backward(cache, dlogit.view())
            })
            .collect();
        Ok(MixtureGrad { loss, mlps, alpha })
    }

    /// Loss only, for finite-difference checks.
    pub fn loss(&self, inputs: &[ArrayView2<'_, f64>], labels: &[bool]) -> Result<f64> {
        Ok(bce(&self.predict_standardized(inputs)?, labels))
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().all(|a| a.is_finite()) && self.mlps.iter().all(Mlp::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_sums_to_one() {
        let w = softmax(&[1000.0, -3.0, 0.5]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x >= 0.0));
        assert_eq!(softmax(&[7.0]), vec![1.0]);
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let x = array![[1.0, 0.0], [3.0, 0.0]];
        let s = Standardizer::fit(x.view()).unwrap();
        assert_eq!(s.mean, vec![2.0, 0.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        let y = s.apply(x.view()).unwrap();
        assert_eq!(y, array![[-1.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn single_angle_matches_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = Mlp::new(&[3, 4, 1], &mut rng).unwrap();
        let model = MaPhlpModel::new(
            vec![Angle::new(1, 1)],
            vec![mlp.clone()],
            vec![Standardizer::identity(3)],
        )
        .unwrap();
        let x = array![[0.1, 0.2, -0.3], [1.0, -2.0, 0.5]];
        let p = model.predict_standardized(&[x.view()]).unwrap();
        for (row, pb) in x.rows().into_iter().zip(p) {
            let z = super::super::mlp::mlp_forward(&mlp, row.as_slice().unwrap()).unwrap();
            assert_eq!(z, pb);
        }
    }

    #[test]
    fn mixture_lies_between_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mlps: Vec<Mlp> = (0..3)
            .map(|_| Mlp::new(&[2, 3, 1], &mut rng).unwrap())
            .collect();
        let mut model = MaPhlpModel::new(
            vec![Angle::new(1, 0), Angle::new(1, 1), Angle::new(2, 0)],
            mlps,
            vec![Standardizer::identity(2); 3],
        )
        .unwrap();
        model.alpha = vec![0.3, -1.0, 2.0];
        let x = array![[0.5, -0.5], [2.0, 1.0]];
        let views = [x.view(), x.view(), x.view()];
        let z = model.component_probs(&views).unwrap();
        let p = model.predict_standardized(&views).unwrap();
        for (b, pb) in p.iter().enumerate() {
            let col = z.column(b);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(*pb >= lo - 1e-15 && *pb <= hi + 1e-15);
        }
    }

    #[test]
    fn feature_set_alignment() {
        let a = Array2::zeros((2, 3));
        let b = Array2::zeros((3, 3));
        assert!(FeatureSet::new(
            vec![Angle::new(1, 0), Angle::new(1, 1)],
            vec![a.clone(), b],
            vec![true, false]
        )
        .is_err());
        assert!(FeatureSet::new(vec![Angle::new(1, 0)], vec![a], vec![true, false]).is_ok());
    }
}
