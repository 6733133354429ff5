//! End-to-end analysis of one configuration in one bounding region.

use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingRegion, Configuration};
use crate::error::Result;
use crate::flow::{check_nonsingularity, NonsingularityReport};
use crate::integrate::{region_volumes, QuadratureParams, VolumeTable};
use crate::invariants::{closeness, significance, ClosenessTable, SignificanceVector};
use crate::linking::{compute_linking_assignment, compute_linking_axis, LinkingAssignment, LinkingAxis, LinkingParams};
use crate::par::{self, Parallelism};
use crate::skeleton::{compute_skeleton, SkeletalStructure, SkeletonParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub skeleton: SkeletonParams,
    pub quadrature: QuadratureParams,
    pub tangency_tolerance: Option<f64>,
    pub parallelism: Parallelism,
}

impl PipelineParams {
    pub fn with_samples(samples: usize) -> PipelineParams {
        let mut p = PipelineParams::default();
        p.skeleton.samples_per_boundary = samples;
        p
    }

    pub fn sequential(mut self) -> PipelineParams {
        self.parallelism = Parallelism::Sequential;
        self.quadrature.parallelism = Parallelism::Sequential;
        self
    }

    pub fn linking(&self) -> LinkingParams {
        let d = LinkingParams::default();
        LinkingParams {
            theta_min: self.skeleton.theta_min,
            tangency_tolerance: self.tangency_tolerance.unwrap_or(d.tangency_tolerance),
            parallelism: self.parallelism,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub skeletons: Vec<SkeletalStructure>,
    pub axis: LinkingAxis,
    pub assignment: LinkingAssignment,
    pub nonsingularity: NonsingularityReport,
    pub volumes: VolumeTable,
    pub closeness: ClosenessTable,
    pub significance: SignificanceVector,
}

pub fn compute_skeletons(config: &Configuration, params: &PipelineParams) -> Result<Vec<SkeletalStructure>> {
    par::map_range(params.parallelism, config.len(), |i| compute_skeleton(&config.objects[i], i, &params.skeleton))
        .into_iter()
        .collect()
}

pub fn analyze(config: &Configuration, region: &BoundingRegion, params: &PipelineParams) -> Result<Analysis> {
    let skeletons = compute_skeletons(config, params)?;
    analyze_with_skeletons(config, skeletons, region, params)
}

pub fn analyze_with_skeletons(
    config: &Configuration,
    skeletons: Vec<SkeletalStructure>,
    region: &BoundingRegion,
    params: &PipelineParams,
) -> Result<Analysis> {
    let axis = compute_linking_axis(config, &skeletons, region, &params.linking())?;
    let assignment = compute_linking_assignment(&skeletons, &axis)?;
    Ok(Analysis::from_structure(skeletons, axis, assignment))
}

impl Analysis {
    /// Checks, volumes and invariants of an already linked structure.
    pub fn from_structure(skeletons: Vec<SkeletalStructure>, axis: LinkingAxis, assignment: LinkingAssignment) -> Analysis {
        let nonsingularity = check_nonsingularity(&skeletons, &assignment);
        let failing: Vec<(usize, usize)> =
            nonsingularity.sides.iter().filter(|s| !s.pass).map(|s| (s.object, s.node)).collect();
        let volumes = region_volumes(&skeletons, &assignment, &failing);
        let closeness = closeness(&volumes);
        let significance = significance(&volumes);
        Analysis { skeletons, axis, assignment, nonsingularity, volumes, closeness, significance }
    }
}
