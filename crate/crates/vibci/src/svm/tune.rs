//! Two-hyperparameter tuning: electrode subset by greedy forward selection
//! and regularization strength over a log-spaced grid, both scored on a
//! seeded stratified 50/50 split of the training set.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, fisher_yates, stream_rng, SeedStream};
use crate::signal::ChannelLayout;
use crate::spectral::Dataset;
use crate::svm::train_svm;

/// `{2^-5, 2^-3, 2^-1, 2^1, 2^3, 2^5}`.
pub const DEFAULT_C_GRID: [f64; 6] = [0.03125, 0.125, 0.5, 2.0, 8.0, 32.0];

/// One evaluated `(subset, C)` candidate.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TuningCandidate {
    pub electrodes: Vec<String>,
    pub c: f64,
    pub accuracy: f64,
}

/// Outcome of tuning, including the full audit trail.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TuningResult {
    /// Chosen electrode subset, in layout order.
    pub electrodes: Vec<String>,
    pub c: f64,
    /// Validation accuracy attained by the chosen candidate.
    pub validation_accuracy: f64,
    /// Every candidate evaluated, in evaluation order.
    pub candidates: Vec<TuningCandidate>,
    pub split_seed: u64,
}

/// Tunes with the default C grid.
pub fn tune_hyperparameters(
    train: &Dataset,
    layout: &ChannelLayout,
    seed: u64,
) -> Result<TuningResult> {
    tune_with_grid(train, layout, &DEFAULT_C_GRID, seed)
}

/// Greedy forward electrode selection crossed with a C grid.
///
/// Starting from the empty set, each step adds the electrode whose best C
/// maximizes inner-validation accuracy; the search stops when no addition
/// strictly improves it. Ties break toward the smaller subset, then the
/// smaller C, then layout order. The caller retrains on the full training
/// set with the returned pair.
pub fn tune_with_grid(
    train: &Dataset,
    layout: &ChannelLayout,
    c_grid: &[f64],
    seed: u64,
) -> Result<TuningResult> {
    if c_grid.is_empty() {
        return Err(Error::validation("empty C grid"));
    }
    for name in train.electrodes() {
        if layout.signal_index(name).is_none() {
            return Err(Error::validation(format!(
                "dataset electrode '{name}' is not a signal channel of the layout"
            )));
        }
    }

    let split_seed = derive_seed(seed, SeedStream::Split, 0);
    let (fit_half, val_half) = stratified_split(train, split_seed)?;

    let mut chosen: Vec<String> = Vec::new();
    let mut remaining: Vec<String> = train.electrodes().to_vec();
    let mut best_accuracy = f64::NEG_INFINITY;
    let mut best_c = c_grid[0];
    let mut candidates: Vec<TuningCandidate> = Vec::new();
    let mut step = 0u64;

    loop {
        // Every (electrode, C) candidate of this step, evaluated in parallel
        // and reduced in deterministic order.
        let step_candidates: Vec<(usize, usize)> = (0..remaining.len())
            .flat_map(|e| (0..c_grid.len()).map(move |c| (e, c)))
            .collect();
        let scored: Vec<TuningCandidate> = step_candidates
            .par_iter()
            .map(|&(e_idx, c_idx)| {
                let mut subset = chosen.clone();
                subset.push(remaining[e_idx].clone());
                let c = c_grid[c_idx];
                let solver_seed = derive_seed(
                    seed,
                    SeedStream::Solver,
                    (step << 32) | ((e_idx as u64) << 16) | c_idx as u64,
                );
                let accuracy = score_candidate(&fit_half, &val_half, &subset, c, solver_seed)?;
                Ok(TuningCandidate {
                    electrodes: sorted_by_layout(&subset, train.electrodes()),
                    c,
                    accuracy,
                })
            })
            .collect::<Result<_>>()?;

        // Best of this step: highest accuracy, then smallest C, then first
        // electrode in layout order (= evaluation order).
        let step_best = scored
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.accuracy
                    .total_cmp(&b.accuracy)
                    .then(b.c.total_cmp(&a.c))
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| scored[i].clone());
        candidates.extend(scored);

        let Some(step_best) = step_best else { break };
        if step_best.accuracy > best_accuracy {
            best_accuracy = step_best.accuracy;
            best_c = step_best.c;
            chosen = step_best.electrodes.clone();
            remaining.retain(|e| !chosen.contains(e));
            step += 1;
            if remaining.is_empty() {
                break;
            }
        } else {
            break;
        }
    }

    Ok(TuningResult {
        electrodes: chosen,
        c: best_c,
        validation_accuracy: best_accuracy,
        candidates,
        split_seed,
    })
}

fn sorted_by_layout(subset: &[String], order: &[String]) -> Vec<String> {
    let mut out: Vec<String> = order.iter().filter(|e| subset.contains(e)).cloned().collect();
    debug_assert_eq!(out.len(), subset.len());
    out.shrink_to_fit();
    out
}

fn score_candidate(
    fit_half: &Dataset,
    val_half: &Dataset,
    subset: &[String],
    c: f64,
    solver_seed: u64,
) -> Result<f64> {
    let fit = fit_half.restrict_to_electrodes(subset)?;
    let val = val_half.restrict_to_electrodes(subset)?;
    let model = train_svm(&fit, c, solver_seed)?;
    let mut correct = 0usize;
    for f in &val.features {
        if model.predict(f)? == f.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / val.n_examples() as f64)
}

/// Seeded stratified 50/50 split: per class, a shuffled half (rounded up)
/// goes to the fit half and the rest to the validation half.
fn stratified_split(dataset: &Dataset, split_seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = stream_rng(split_seed, SeedStream::Split, 1);
    let mut fit_idx: Vec<usize> = Vec::new();
    let mut val_idx: Vec<usize> = Vec::new();

    for class in dataset.classes() {
        let mut members: Vec<usize> = dataset
            .features
            .iter()
            .enumerate()
            .filter(|(_, f)| f.label == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::validation(format!(
                "class {class} has {} examples; the stratified split needs at least 2",
                members.len()
            )));
        }
        fisher_yates(&mut members, &mut rng);
        let cut = members.len().div_ceil(2);
        fit_idx.extend_from_slice(&members[..cut]);
        val_idx.extend_from_slice(&members[cut..]);
    }
    fit_idx.sort_unstable();
    val_idx.sort_unstable();

    let pick = |idx: &[usize]| -> Result<Dataset> {
        Dataset::new(
            idx.iter().map(|&i| dataset.features[i].clone()).collect(),
            dataset.band,
            dataset.bin_width,
        )
    };
    let fit = pick(&fit_idx)?;
    let val = pick(&val_idx)?;
    if fit.classes() != dataset.classes() || val.classes() != dataset.classes() {
        return Err(Error::validation("a class is absent from one split half"));
    }
    Ok((fit, val))
}
