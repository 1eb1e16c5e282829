// SPDX-License-Identifier: Apache-2.0

//! Width-constrained stimulus planning.
//!
//! Narrow control inputs are enumerated exhaustively, wide ones sampled.
//! Datapath inputs get the four corner patterns followed by random fill.
//! Control values form the outer loop and datapath values the inner loop;
//! when the product would exceed `max_checks` the inner loop is shortened
//! (never below the corners), and if even that is too long the controls
//! switch to a per-signal covering sequence zipped with the datapath
//! sequence. Every exhaustive control value and every corner pattern
//! appears in all three regimes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bits::{corner_patterns, Bits};
use super::{Category, Direction, Port, StgError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StgConfig {
    /// Control inputs up to this width are enumerated exhaustively.
    pub exhaustive_max_width: u32,
    /// Random values per wide control / random fill per datapath input.
    pub random_vectors: usize,
    pub seed: u64,
    /// Upper bound on check events per testbench.
    pub max_checks: usize,
}

impl Default for StgConfig {
    fn default() -> Self {
        Self { exhaustive_max_width: 8, random_vectors: 32, seed: 0, max_checks: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ControlMode {
    Exhaustive { count: u64 },
    ConstrainedRandom { count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlStimulus {
    pub name: String,
    pub width: u32,
    pub mode: ControlMode,
    pub values: Vec<Bits>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatapathStimulus {
    pub name: String,
    pub width: u32,
    /// Corner patterns first, then random values.
    pub values: Vec<Bits>,
}

/// How control and datapath sequences are combined into vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Composition {
    /// `outer` joint control combinations × `inner` datapath steps.
    Product { outer: u64, inner: usize },
    /// Each exhaustive control cycles through its own values; datapath
    /// values cycle independently.
    Covering { len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusPlan {
    pub controls: Vec<ControlStimulus>,
    pub datapath: Vec<DatapathStimulus>,
    pub random_vectors: usize,
    pub seed: u64,
    pub composition: Composition,
}

/// One applied input vector: values for every control and datapath input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vector {
    pub assignments: Vec<(String, Bits)>,
}

impl Vector {
    pub fn describe(&self) -> String {
        self.assignments.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(" ")
    }
}

pub(crate) fn check_stimulable(ports: &[Port]) -> Result<(), StgError> {
    for p in ports {
        if p.direction == Direction::InOut {
            return Err(StgError::InOut(p.name.clone()));
        }
        if p.category.is_none() {
            return Err(StgError::Unclassified(p.name.clone()));
        }
    }
    Ok(())
}

pub fn plan_stimulus(ports: &[Port], config: &StgConfig) -> Result<StimulusPlan, StgError> {
    check_stimulable(ports)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pool = config.random_vectors.max(1);

    let mut controls = Vec::new();
    for p in ports.iter().filter(|p| p.category == Some(Category::Control)) {
        let (mode, values) = if p.width <= config.exhaustive_max_width && p.width < 64 {
            let count = 1u64 << p.width;
            (ControlMode::Exhaustive { count }, (0..count).map(|v| Bits::from_u64(p.width, v)).collect())
        } else {
            let values: Vec<Bits> = (0..pool).map(|_| Bits::random(p.width, &mut rng)).collect();
            (ControlMode::ConstrainedRandom { count: pool }, values)
        };
        controls.push(ControlStimulus { name: p.name.clone(), width: p.width, mode, values });
    }

    let mut datapath = Vec::new();
    for p in ports.iter().filter(|p| p.category == Some(Category::Datapath)) {
        let mut values: Vec<Bits> = corner_patterns(p.width).into_iter().collect();
        values.extend((0..config.random_vectors).map(|_| Bits::random(p.width, &mut rng)));
        datapath.push(DatapathStimulus { name: p.name.clone(), width: p.width, values });
    }

    let inner = 4 + config.random_vectors;
    let joint = controls
        .iter()
        .filter_map(|c| match c.mode {
            ControlMode::Exhaustive { count } => Some(count),
            ControlMode::ConstrainedRandom { .. } => None,
        })
        .fold(1u64, u64::saturating_mul);
    let cap = config.max_checks.max(1) as u64;
    let composition = if joint.saturating_mul(inner as u64) <= cap {
        Composition::Product { outer: joint, inner }
    } else if joint.saturating_mul(4) <= cap {
        Composition::Product { outer: joint, inner: (cap / joint) as usize }
    } else {
        let longest = controls
            .iter()
            .filter_map(|c| match c.mode {
                ControlMode::Exhaustive { count } => Some(count as usize),
                ControlMode::ConstrainedRandom { .. } => None,
            })
            .max()
            .unwrap_or(1);
        Composition::Covering { len: (cap as usize).max(longest).max(4) }
    };

    Ok(StimulusPlan { controls, datapath, random_vectors: config.random_vectors, seed: config.seed, composition })
}

impl StimulusPlan {
    pub fn vector_count(&self) -> usize {
        match self.composition {
            Composition::Product { outer, inner } => outer as usize * inner,
            Composition::Covering { len } => len,
        }
    }

    pub fn vector(&self, t: usize) -> Vector {
        let mut assignments = Vec::with_capacity(self.controls.len() + self.datapath.len());
        let (mut outer_rest, data_idx) = match self.composition {
            Composition::Product { inner, .. } => ((t / inner) as u64, t % inner),
            Composition::Covering { .. } => (0, t),
        };
        let mut control_vals: Vec<Option<Bits>> = vec![None; self.controls.len()];
        // Mixed-radix decomposition: the last exhaustive control varies fastest.
        for (i, c) in self.controls.iter().enumerate().rev() {
            if let ControlMode::Exhaustive { count } = c.mode {
                let idx = match self.composition {
                    Composition::Product { .. } => {
                        let v = outer_rest % count;
                        outer_rest /= count;
                        v as usize
                    }
                    Composition::Covering { .. } => t % count as usize,
                };
                control_vals[i] = Some(c.values[idx].clone());
            }
        }
        for (c, v) in self.controls.iter().zip(control_vals) {
            let value = v.unwrap_or_else(|| c.values[t % c.values.len()].clone());
            assignments.push((c.name.clone(), value));
        }
        for d in &self.datapath {
            assignments.push((d.name.clone(), d.values[data_idx % d.values.len()].clone()));
        }
        Vector { assignments }
    }

    pub fn vectors(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.vector_count()).map(move |t| self.vector(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stg::classify_ports;
    use std::collections::HashSet;

    fn ports(spec: &[(&str, u32)]) -> Vec<Port> {
        classify_ports(&spec.iter().map(|(n, w)| Port::new(*n, Direction::In, *w)).collect::<Vec<_>>())
    }

    #[test]
    fn narrow_control_is_exhaustive() {
        let plan = plan_stimulus(&ports(&[("mode", 3)]), &StgConfig::default()).unwrap();
        assert_eq!(plan.controls[0].mode, ControlMode::Exhaustive { count: 8 });
        assert_eq!(plan.controls[0].values.len(), 8);
    }

    #[test]
    fn wide_control_is_random() {
        let cfg = StgConfig { random_vectors: 10, ..StgConfig::default() };
        let plan = plan_stimulus(&ports(&[("op_sel", 12)]), &cfg).unwrap();
        assert_eq!(plan.controls[0].mode, ControlMode::ConstrainedRandom { count: 10 });
    }

    #[test]
    fn datapath_corners_first() {
        let plan = plan_stimulus(&ports(&[("data", 16)]), &StgConfig::default()).unwrap();
        let lits: Vec<String> = plan.datapath[0].values[..4].iter().map(Bits::verilog_literal).collect();
        assert_eq!(lits, ["16'h0000", "16'hffff", "16'haaaa", "16'h5555"]);
        assert_eq!(plan.datapath[0].values.len(), 4 + 32);
    }

    #[test]
    fn product_count_matches_example() {
        let p = ports(&[("clk", 1), ("rst", 1), ("mode", 2), ("data", 8)]);
        let cfg = StgConfig { random_vectors: 16, ..StgConfig::default() };
        let plan = plan_stimulus(&p, &cfg).unwrap();
        assert_eq!(plan.composition, Composition::Product { outer: 4, inner: 20 });
        assert_eq!(plan.vector_count(), 80);
    }

    #[test]
    fn capped_regimes_keep_coverage() {
        // 4 * 4 * 36 = 576 > 512 -> shortened inner loop.
        let p = ports(&[("mode", 2), ("sel", 2), ("data", 8)]);
        let plan = plan_stimulus(&p, &StgConfig::default()).unwrap();
        assert_eq!(plan.composition, Composition::Product { outer: 16, inner: 32 });
        // 256 * 256 * 4 > 512 -> covering sequence.
        let p = ports(&[("mode", 8), ("op_sel", 8), ("data", 8)]);
        let plan = plan_stimulus(&p, &StgConfig::default()).unwrap();
        assert_eq!(plan.composition, Composition::Covering { len: 512 });
        for plan in [plan] {
            let vs: Vec<Vector> = plan.vectors().collect();
            for (i, name) in ["mode", "op_sel"].iter().enumerate() {
                let seen: HashSet<u64> = vs.iter().map(|v| v.assignments[i].1.low_u64()).collect();
                assert_eq!(seen.len(), 256, "{name}");
            }
            let corners: HashSet<String> = vs.iter().map(|v| v.assignments[2].1.verilog_literal()).collect();
            for c in ["8'h00", "8'hff", "8'haa", "8'h55"] {
                assert!(corners.contains(c));
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = ports(&[("mode", 9), ("data", 40)]);
        let cfg = StgConfig { seed: 42, ..StgConfig::default() };
        assert_eq!(plan_stimulus(&p, &cfg).unwrap(), plan_stimulus(&p, &cfg).unwrap());
        let other = StgConfig { seed: 43, ..cfg };
        assert_ne!(plan_stimulus(&p, &cfg).unwrap(), plan_stimulus(&p, &other).unwrap());
    }

    #[test]
    fn rejects_inout_and_unclassified() {
        let p = vec![Port::new("bus", Direction::InOut, 8)];
        assert!(matches!(plan_stimulus(&classify_ports(&p), &StgConfig::default()), Err(StgError::InOut(_))));
        let p = vec![Port::new("a", Direction::In, 8)];
        assert!(matches!(plan_stimulus(&p, &StgConfig::default()), Err(StgError::Unclassified(_))));
    }
}
