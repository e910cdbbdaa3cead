//! Linear SVM classifier: one-vs-rest training via the dual solver, feature
//! standardization, prediction, and the versioned text serialization.

pub mod solver;
mod tune;

pub use tune::{tune_hyperparameters, tune_with_grid, TuningCandidate, TuningResult, DEFAULT_C_GRID};

use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SeedStream};
use crate::signal::TaskClass;
use crate::spectral::{Dataset, FeatureVector};

/// Per-feature standardizer fitted on training data. Zero-variance features
/// pass through with unit divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Fits mean and population standard deviation per feature.
    pub fn fit(rows: &[&[f64]]) -> Scaler {
        let n = rows.len() as f64;
        let dim = rows.first().map_or(0, |r| r.len());
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(*row).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Trained one-vs-rest linear SVM with its scaler and tuning outcome.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// Classes in canonical order; row `k` of `weights` scores class `k`.
    pub classes: Vec<TaskClass>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    /// Electrode subset the features were built from, in layout order.
    pub electrodes_used: Vec<String>,
    pub c: f64,
    pub scaler: Scaler,
    /// Largest projected-gradient violation across the one-vs-rest solves.
    pub kkt_residual: f64,
}

/// Trains a one-vs-rest linear SVM on the dataset: fits the scaler,
/// standardizes, then solves each binary hinge-loss dual by coordinate
/// descent (converged when the largest projected-gradient violation is
/// below 1e-4, capped at 10000 epochs).
pub fn train_svm(dataset: &Dataset, c: f64, seed: u64) -> Result<LinearModel> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::validation(format!("C must be positive, got {c}")));
    }
    let classes = dataset.classes();
    if classes.len() < 2 {
        return Err(Error::validation(format!(
            "training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    // Dataset construction already rejects non-finite features.

    let rows: Vec<&[f64]> = dataset.features.iter().map(|f| f.values.as_slice()).collect();
    let scaler = Scaler::fit(&rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();

    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    let mut kkt_residual = 0.0f64;
    for (k, class) in classes.iter().enumerate() {
        let y: Vec<f64> = dataset
            .features
            .iter()
            .map(|f| if f.label == *class { 1.0 } else { -1.0 })
            .collect();
        let sol = solver::solve_binary(
            &x,
            &y,
            c,
            solver::DEFAULT_EPS,
            solver::DEFAULT_MAX_EPOCHS,
            derive_seed(seed, SeedStream::Solver, k as u64),
        );
        kkt_residual = kkt_residual.max(sol.kkt_residual);
        weights.push(sol.weights);
        biases.push(sol.bias);
    }

    Ok(LinearModel {
        classes,
        weights,
        biases,
        electrodes_used: dataset.electrodes().to_vec(),
        c,
        scaler,
        kkt_residual,
    })
}

impl LinearModel {
    /// Per-class decision scores `w_k . z + b_k` on the standardized input.
    pub fn decision_scores(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.scaler.mean.len() {
            return Err(Error::validation(format!(
                "feature length {} does not match model dimension {}",
                values.len(),
                self.scaler.mean.len()
            )));
        }
        let z = self.scaler.transform(values);
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(&z).map(|(wj, zj)| wj * zj).sum::<f64>() + b)
            .collect())
    }

    /// Arg-max class; exact ties break toward the lowest class index.
    pub fn predict_values(&self, values: &[f64]) -> Result<TaskClass> {
        let scores = self.decision_scores(values)?;
        let mut best = 0;
        for (k, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = k;
            }
        }
        Ok(self.classes[best])
    }

    pub fn predict(&self, feature: &FeatureVector) -> Result<TaskClass> {
        if feature.electrodes_used != self.electrodes_used {
            return Err(Error::validation(format!(
                "feature electrodes {:?} do not match model electrodes {:?}",
                feature.electrodes_used, self.electrodes_used
            )));
        }
        self.predict_values(&feature.values)
    }

    /// Serializes to the versioned text format; round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        };
        let mut out = String::new();
        out.push_str("# vibci-model v1\n");
        out.push_str(&format!(
            "classes = {}\n",
            self.classes.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        ));
        out.push_str(&format!("electrodes = {}\n", self.electrodes_used.join(",")));
        out.push_str(&format!("c = {}\n", self.c));
        out.push_str(&format!("kkt_residual = {}\n", self.kkt_residual));
        out.push_str(&format!("scaler_mean = {}\n", join(&self.scaler.mean)));
        out.push_str(&format!("scaler_std = {}\n", join(&self.scaler.std)));
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            out.push_str(&format!("bias[{k}] = {b}\n"));
            out.push_str(&format!("weights[{k}] = {}\n", join(w)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LinearModel> {
        let path = "<model text>";
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty model file"))?;
        if header.trim() != "# vibci-model v1" {
            return Err(Error::parse(path, 1, format!("unsupported model header '{header}'")));
        }

        let mut fields: std::collections::BTreeMap<String, String> = Default::default();
        for (ln, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, ln + 1, format!("expected 'key = value', got '{line}'"))
            })?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let take = |key: &str| -> Result<String> {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(path, 0, format!("missing field '{key}'")))
        };
        let floats = |s: &str, key: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(path, 0, format!("bad float '{v}' in '{key}'")))
                })
                .collect()
        };

        let classes: Vec<TaskClass> = take("classes")?
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_>>()?;
        let electrodes: Vec<String> = take("electrodes")?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let c: f64 = take("c")?
            .parse()
            .map_err(|_| Error::parse(path, 0, "bad float in 'c'"))?;
        let kkt_residual: f64 = take("kkt_residual")?
            .parse()
            .map_err(|_| Error::parse(path, 0, "bad float in 'kkt_residual'"))?;
        let mean = floats(&take("scaler_mean")?, "scaler_mean")?;
        let std = floats(&take("scaler_std")?, "scaler_std")?;
        if mean.len() != std.len() {
            return Err(Error::parse(path, 0, "scaler mean/std length mismatch"));
        }

        let mut weights = Vec::with_capacity(classes.len());
        let mut biases = Vec::with_capacity(classes.len());
        for k in 0..classes.len() {
            let w = floats(&take(&format!("weights[{k}]"))?, "weights")?;
            if w.len() != mean.len() {
                return Err(Error::parse(path, 0, format!("weights[{k}] length mismatch")));
            }
            weights.push(w);
            biases.push(
                take(&format!("bias[{k}]"))?
                    .parse()
                    .map_err(|_| Error::parse(path, 0, "bad float in bias"))?,
            );
        }

        Ok(LinearModel {
            classes,
            weights,
            biases,
            electrodes_used: electrodes,
            c,
            scaler: Scaler { mean, std },
            kkt_residual,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<LinearModel> {
        let text = std::fs::read_to_string(path)?;
        LinearModel::from_text(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::parse(path, line, message),
            other => other,
        })
    }
}
