use super::adam::{Adam, AdamConfig};
use super::state::SnippetState;
use crate::error::{Error, Result};
use crate::losses::{LossConfig, LossReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iter: usize,
    pub total: f64,
    /// View-synthesis loss summed over levels.
    pub vs: f64,
    /// Mean full-resolution explainability mask.
    pub mean_mask: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub state: SnippetState,
    /// Loss before each update, starting at iteration 0.
    pub history: Vec<HistoryEntry>,
    /// Objective at the returned parameters.
    pub final_report: LossReport,
    pub converged: bool,
}

/// Runs Adam on the multi-scale objective until `max_iters` updates or until
/// the best loss stops improving (relative change below `tolerance` over
/// `window` iterations).
pub fn fit_snippet(
    mut state: SnippetState,
    loss: &LossConfig,
    adam: &AdamConfig,
) -> Result<FitResult> {
    loss.validate()?;
    if loss.num_levels > state.num_levels() {
        return Err(Error::invalid(format!(
            "loss uses {} levels, state has {}",
            loss.num_levels,
            state.num_levels()
        )));
    }
    let mut opt = Adam::new(*adam, state.num_params())?;
    let mut params = state.params();
    let mut history = Vec::with_capacity(adam.max_iters + 1);
    // best loss seen up to and including each iteration
    let mut best = Vec::with_capacity(adam.max_iters + 1);
    let mut converged = false;

    for iter in 0..adam.max_iters {
        let (report, grads) = state.evaluate(loss)?;
        if !report.total.is_finite() {
            return Err(Error::Divergence {
                iteration: iter,
                loss: report.total,
            });
        }
        history.push(HistoryEntry {
            iter,
            total: report.total,
            vs: report.total_vs(),
            mean_mask: state.mean_mask(),
        });
        let prev_best = best.last().copied().unwrap_or(f64::INFINITY);
        best.push(report.total.min(prev_best));
        if iter >= adam.window {
            let old: f64 = best[iter - adam.window];
            let now = best[iter];
            if old - now <= adam.tolerance * old.abs() {
                converged = true;
                break;
            }
        }

        let g = state.flatten_grads(&grads);
        opt.step(&mut params, &g)?;
        if params.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                iteration: iter + 1,
                loss: f64::NAN,
            });
        }
        state.set_params(&params)?;
    }

    let (final_report, _) = state.evaluate(loss)?;
    if !final_report.total.is_finite() {
        return Err(Error::Divergence {
            iteration: opt.steps(),
            loss: final_report.total,
        });
    }
    Ok(FitResult {
        state,
        history,
        final_report,
        converged,
    })
}
