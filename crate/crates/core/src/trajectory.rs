//! Uniform time grids and sampled solution trajectories.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeField, LatticeGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeGridError {
    #[error("invalid time grid: {0}")]
    Invalid(String),
}

/// Uniform nodes `t_j = j·dt`, `j = 0..=m_steps`, `dt = T/m_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    m_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, m_steps: usize) -> Result<Self, TimeGridError> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(TimeGridError::Invalid(format!(
                "horizon T must be positive, got {t_final}"
            )));
        }
        if m_steps < 2 {
            return Err(TimeGridError::Invalid(format!(
                "m_steps must be at least 2, got {m_steps}"
            )));
        }
        Ok(TimeGrid { t_final, m_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn m_steps(&self) -> usize {
        self.m_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.m_steps as f64
    }

    /// Time of node `j`.
    pub fn node(&self, j: usize) -> f64 {
        if j == self.m_steps {
            self.t_final
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m_steps).map(|j| self.node(j)).collect()
    }
}

/// Snapshots of a lattice solution at every node of a time grid, together
/// with the fixed-point residual recorded after each sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrajectory {
    time: TimeGrid,
    snapshots: Vec<LatticeField>,
    residuals: Vec<f64>,
}

impl SolutionTrajectory {
    /// Requires one snapshot per node, all on the same lattice.
    pub fn new(time: TimeGrid, snapshots: Vec<LatticeField>, residuals: Vec<f64>) -> Result<Self, TimeGridError> {
        if snapshots.len() != time.m_steps() + 1 {
            return Err(TimeGridError::Invalid(format!(
                "{} snapshots for {} time nodes",
                snapshots.len(),
                time.m_steps() + 1
            )));
        }
        let g = *snapshots[0].grid();
        if snapshots.iter().any(|s| !s.grid().same_as(&g)) {
            return Err(TimeGridError::Invalid("snapshots live on different lattices".into()));
        }
        Ok(SolutionTrajectory {
            time,
            snapshots,
            residuals,
        })
    }

    /// Time-independent trajectory repeating `field` at every node.
    pub fn stationary(field: LatticeField, time: TimeGrid) -> Self {
        SolutionTrajectory {
            snapshots: vec![field; time.m_steps() + 1],
            time,
            residuals: Vec::new(),
        }
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn grid(&self) -> &LatticeGrid {
        self.snapshots[0].grid()
    }

    pub fn snapshots(&self) -> &[LatticeField] {
        &self.snapshots
    }

    pub fn initial(&self) -> &LatticeField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &LatticeField {
        self.snapshots.last().expect("at least three snapshots")
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Node-wise difference of two trajectories on identical grids.
    pub fn difference(&self, other: &SolutionTrajectory) -> Result<SolutionTrajectory, TimeGridError> {
        if self.time != other.time {
            return Err(TimeGridError::Invalid("trajectories use different time grids".into()));
        }
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| a.sub(b).map_err(|e| TimeGridError::Invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SolutionTrajectory {
            time: self.time,
            snapshots,
            residuals: Vec::new(),
        })
    }

    /// Every snapshot multiplied by `a`.
    pub fn scaled(&self, a: f64) -> SolutionTrajectory {
        SolutionTrajectory {
            time: self.time,
            snapshots: self.snapshots.iter().map(|s| s.scaled(a.into())).collect(),
            residuals: self.residuals.clone(),
        }
    }

    /// Map every snapshot through `f`.
    pub fn map_snapshots<F: Fn(&LatticeField) -> LatticeField>(&self, f: F) -> SolutionTrajectory {
        SolutionTrajectory {
            time: self.time,
            snapshots: self.snapshots.iter().map(f).collect(),
            residuals: self.residuals.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_uniform_and_end_exactly_at_horizon() {
        let tg = TimeGrid::new(0.3, 7).unwrap();
        let nodes = tg.nodes();
        assert_eq!(nodes.len(), 8);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[7], 0.3);
        assert!((nodes[3] - 3.0 * 0.3 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn invalid_time_grids_rejected() {
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 4).is_err());
    }

    #[test]
    fn snapshot_count_must_match() {
        let g = LatticeGrid::new(0.1, 8).unwrap();
        let tg = TimeGrid::new(1.0, 2).unwrap();
        assert!(SolutionTrajectory::new(tg, vec![LatticeField::zeros(g); 2], vec![]).is_err());
        assert!(SolutionTrajectory::new(tg, vec![LatticeField::zeros(g); 3], vec![]).is_ok());
    }
}
