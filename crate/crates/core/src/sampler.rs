//! Antipodal grasp candidates by rejection sampling of surface point pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{make_antipodal_grasp, ContactError, GraspCandidate, JawConfig};
use crate::exec::Execution;
use crate::mesh::{MeshError, TriMesh};
use crate::rng::{derive_seed, seeded};

/// Upper bound on pair tests regardless of the sample count.
pub const MAX_PAIR_TESTS: usize = 1_000_000;
const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("no antipodal grasp found after {0} pair tests")]
    NoCandidates(usize),
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Jaw(#[from] ContactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub surface_sample_count: usize,
    pub max_candidates: usize,
    /// Two candidates closer than this at both contacts are duplicates (m).
    pub min_pair_separation: f64,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            surface_sample_count: 500,
            max_candidates: 100,
            min_pair_separation: 0.005,
            rng_seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.surface_sample_count < 2
            || self.max_candidates == 0
            || !(self.min_pair_separation >= 0.0)
        {
            return Err(SamplerError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }

    /// Number of random pairs tested: the squared sample count, capped.
    pub fn pair_budget(&self) -> usize {
        self.surface_sample_count
            .saturating_mul(self.surface_sample_count)
            .min(MAX_PAIR_TESTS)
    }
}

/// Distance between two grasps: the larger contact offset under the better
/// of the two contact pairings.
pub fn candidate_distance(a: &GraspCandidate, b: &GraspCandidate) -> f64 {
    let same = (a.contact1 - b.contact1)
        .norm()
        .max((a.contact2 - b.contact2).norm());
    let swapped = (a.contact1 - b.contact2)
        .norm()
        .max((a.contact2 - b.contact1).norm());
    same.min(swapped)
}

pub fn sample_candidates(
    mesh: &TriMesh,
    jaw: &JawConfig,
    cfg: &SamplerConfig,
) -> Result<Vec<GraspCandidate>, SamplerError> {
    sample_candidates_with(mesh, jaw, cfg, Execution::default())
}

/// Draws random surface point pairs, keeps antipodal ones and drops
/// near-duplicates, in draw order.
pub fn sample_candidates_with(
    mesh: &TriMesh,
    jaw: &JawConfig,
    cfg: &SamplerConfig,
    execution: Execution,
) -> Result<Vec<GraspCandidate>, SamplerError> {
    cfg.validate()?;
    jaw.validate()?;
    let points = mesh.sample_surface(cfg.surface_sample_count, derive_seed(cfg.rng_seed, &[0]))?;
    let budget = cfg.pair_budget();
    let mut rng = seeded(derive_seed(cfg.rng_seed, &[1]));
    let mut kept: Vec<GraspCandidate> = Vec::new();
    let mut tested = 0;
    while tested < budget && kept.len() < cfg.max_candidates {
        let n = CHUNK.min(budget - tested);
        let pairs: Vec<(usize, usize)> = (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..points.len()),
                    rng.gen_range(0..points.len()),
                )
            })
            .collect();
        tested += n;
        let found = execution.map_slice(&pairs, |&(i, j)| {
            if i == j {
                None
            } else {
                make_antipodal_grasp(mesh, &points[i], &points[j], jaw)
            }
        });
        for g in found.into_iter().flatten() {
            if kept.len() >= cfg.max_candidates {
                break;
            }
            if kept
                .iter()
                .all(|k| candidate_distance(k, &g) >= cfg.min_pair_separation)
            {
                kept.push(g);
            }
        }
    }
    if kept.is_empty() {
        return Err(SamplerError::NoCandidates(tested));
    }
    log::info!("kept {} candidates after {} pair tests", kept.len(), tested);
    Ok(kept)
}
