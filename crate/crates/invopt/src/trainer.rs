//! Hyper-parameter grid search on the training period.
//!
//! Each (SLP, STP) candidate pair is evaluated by running the full backtest
//! loop over the training period (with the sampling window fixed to the
//! whole period) and aggregating the cost and service level of the
//! order-simulation realizations at the configured percentile. A cell is
//! feasible when its aggregated service level reaches the SKU's target; the
//! chosen cell is the cheapest feasible one, ties broken toward the lower
//! (cheaper-risk) percentiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::{run_backtest, BacktestConfig};
use crate::domain::DayRange;
use crate::ingest::SkuDataset;
use crate::uncertainty::{initial_usw_len, UswMode};
use crate::{Error, Result};

/// Candidate hyper-parameter lists. Values are fractions in [0, 1],
/// strictly increasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperGrid {
    pub slp_candidates: Vec<f64>,
    pub stp_candidates: Vec<f64>,
}

impl HyperGrid {
    pub fn new(slp: Vec<f64>, stp: Vec<f64>) -> Result<HyperGrid> {
        let grid = HyperGrid {
            slp_candidates: slp,
            stp_candidates: stp,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// The default SLP candidate list with a single STP pinned to the
    /// minimum delay percentile.
    pub fn default_slp() -> HyperGrid {
        HyperGrid {
            slp_candidates: vec![0.5, 0.7, 0.9, 0.925, 0.95],
            stp_candidates: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [
            ("slp_candidates", &self.slp_candidates),
            ("stp_candidates", &self.stp_candidates),
        ] {
            if list.is_empty() {
                return Err(Error::Config(format!("{name} must be non-empty")));
            }
            for pair in list.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(Error::Config(format!(
                        "{name} must be strictly increasing, got {list:?}"
                    )));
                }
            }
            if list.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config(format!(
                    "{name} values must lie in [0,1], got {list:?}"
                )));
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        let mut cells = Vec::new();
        for &slp in &self.slp_candidates {
            for &stp in &self.stp_candidates {
                cells.push((slp, stp));
            }
        }
        cells
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CellReport {
    pub slp: f64,
    pub stp: f64,
    /// Aggregated (percentile) total inventory cost of the realizations.
    pub median_cost: f64,
    /// Aggregated (percentile) service level of the realizations.
    pub median_sl: f64,
    pub feasible: bool,
}

/// Full grid-search outcome for one SKU.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub sku_id: String,
    pub cells: Vec<CellReport>,
    pub chosen_slp: f64,
    pub chosen_stp: f64,
    /// False when no cell met the service-level constraint; the most
    /// conservative cell is chosen as a fallback.
    pub feasible: bool,
}

/// Grid-search the hyper-parameters on `training_period`.
pub fn train(
    dataset: &SkuDataset,
    grid: &HyperGrid,
    cfg: &BacktestConfig,
    training_period: DayRange,
) -> Result<TrainReport> {
    grid.validate()?;
    let params = &dataset.params;
    let l0 = initial_usw_len(params.lead_time, cfg.b_usw, cfg.l_min_usw);
    if training_period.len() < l0 + params.horizon {
        return Err(Error::Validation {
            sku: params.sku_id.clone(),
            message: format!(
                "training period {} days is shorter than one sampling window plus one horizon ({} + {})",
                training_period.len(),
                l0,
                params.horizon
            ),
        });
    }

    let cells = grid.cells();
    let reports: Vec<CellReport> = cells
        .par_iter()
        .map(|&(slp, stp)| {
            let mut cell_cfg = cfg.clone();
            cell_cfg.period = training_period;
            cell_cfg.usw_mode = UswMode::Training;
            cell_cfg.fwd.slp = slp;
            cell_cfg.fwd.stp = stp;
            let result = run_backtest(dataset, &cell_cfg)?;
            Ok(CellReport {
                slp,
                stp,
                median_cost: result.median_cost,
                median_sl: result.sl,
                feasible: result.sl >= params.target_sl,
            })
        })
        .collect::<Result<_>>()?;

    // Cheapest feasible cell; ties break toward lower SLP, then lower STP
    // (cell order is lexicographic in (slp, stp), so keeping the earliest
    // strict minimum realizes the tie-break).
    let chosen = reports
        .iter()
        .filter(|c| c.feasible)
        .fold(None::<&CellReport>, |best, c| match best {
            Some(b) if b.median_cost <= c.median_cost => Some(b),
            _ => Some(c),
        });

    let report = match chosen {
        Some(cell) => TrainReport {
            sku_id: params.sku_id.clone(),
            cells: reports.clone(),
            chosen_slp: cell.slp,
            chosen_stp: cell.stp,
            feasible: true,
        },
        None => {
            // Nothing met the constraint: fall back to the most
            // conservative corner of the grid.
            log::warn!(
                "sku {}: no feasible hyper-parameter cell; falling back to the most conservative",
                params.sku_id
            );
            TrainReport {
                sku_id: params.sku_id.clone(),
                cells: reports.clone(),
                chosen_slp: *grid.slp_candidates.last().unwrap(),
                chosen_stp: *grid.stp_candidates.last().unwrap(),
                feasible: false,
            }
        }
    };
    Ok(report)
}
