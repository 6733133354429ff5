//! Closeness and positional significance.

use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingRegion, Configuration};
use crate::error::{Error, Result};
use crate::integrate::VolumeTable;
use crate::linking::Target;
use crate::par;
use crate::pipeline::{analyze_with_skeletons, compute_skeletons, PipelineParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosenessTable {
    /// c_{i→j}.
    pub directed: Vec<Vec<f64>>,
    /// c_{ij} = c_{i→j}·c_{j→i}.
    pub product: Vec<Vec<f64>>,
    /// c^a_{ij}.
    pub additive: Vec<Vec<f64>>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

pub fn closeness(v: &VolumeTable) -> ClosenessTable {
    let n = v.objects;
    let mut directed = vec![vec![0.0; n]; n];
    let mut product = vec![vec![0.0; n]; n];
    let mut additive = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                directed[i][j] = 1.0;
                continue;
            }
            let t = Target::Object(j);
            directed[i][j] = ratio(v.omega(i, t), v.total(i, t));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                product[i][j] = 1.0;
                additive[i][j] = 1.0;
                continue;
            }
            let (a, b) = (i.min(j), i.max(j));
            product[i][j] = directed[a][b] * directed[b][a];
            let (ta, tb) = (Target::Object(b), Target::Object(a));
            additive[i][j] = ratio(v.omega(a, ta) + v.omega(b, tb), v.total(a, ta) + v.total(b, tb));
        }
    }
    ClosenessTable { directed, product, additive }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceVector {
    pub s: Vec<f64>,
    /// s̃_i = s_i·vol(Ω_i).
    pub absolute: Vec<f64>,
    /// Objects with a nonzero self-linked interior (excluded from s).
    pub self_linked: Vec<bool>,
}

pub fn significance(v: &VolumeTable) -> SignificanceVector {
    let n = v.objects;
    let mut s = vec![0.0; n];
    let mut self_linked = vec![false; n];
    for i in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for j in (0..n).filter(|&j| j != i) {
            num += v.omega(i, Target::Object(j));
            den += v.total(i, Target::Object(j));
        }
        s[i] = ratio(num, den);
        self_linked[i] = v.omega(i, Target::SelfLink) > 0.0;
    }
    let absolute = s.iter().zip(&v.object_volumes).map(|(a, b)| a * b).collect();
    SignificanceVector { s, absolute, self_linked }
}

/// Bounds every table must satisfy; returns the violated ones.
pub fn table_violations(c: &ClosenessTable, s: &SignificanceVector) -> Vec<String> {
    let n = s.s.len();
    let mut out = Vec::new();
    let unit = |x: f64| (0.0..=1.0 + 1e-12).contains(&x);
    for i in 0..n {
        if !unit(s.s[i]) {
            out.push(format!("s_{i} = {} outside [0,1]", s.s[i]));
        }
        let bound: f64 = (0..n).filter(|&j| j != i).map(|j| c.directed[i][j]).sum();
        if s.s[i] > bound + 1e-12 {
            out.push(format!("s_{i} = {} exceeds sum of c_(i->j) = {bound}", s.s[i]));
        }
        for j in 0..n {
            for (name, m) in [("c_dir", &c.directed), ("c", &c.product), ("c_a", &c.additive)] {
                if !unit(m[i][j]) {
                    out.push(format!("{name}[{i}][{j}] = {} outside [0,1]", m[i][j]));
                }
            }
            if c.product[i][j] != c.product[j][i] || c.additive[i][j] != c.additive[j][i] {
                out.push(format!("asymmetric entry ({i},{j})"));
            }
            if i != j && c.additive[i][j] > c.directed[i][j] + c.directed[j][i] + 1e-12 {
                out.push(format!("c_a[{i}][{j}] exceeds c_(i->j) + c_(j->i)"));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMember {
    pub tau: f64,
    pub volumes: VolumeTable,
    pub closeness: ClosenessTable,
    pub significance: SignificanceVector,
}

/// Re-run linking and integration with each τ as an added cap on `base`.
pub fn threshold_family(
    config: &Configuration,
    base: &BoundingRegion,
    taus: &[f64],
    params: &PipelineParams,
) -> Result<Vec<ThresholdMember>> {
    if taus.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Bounding("threshold τ must be > 0".into()));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("threshold values must increase".into()));
    }
    let skeletons = compute_skeletons(config, params)?;
    let runs = par::map_slice(params.parallelism, taus, |&tau| {
        analyze_with_skeletons(config, skeletons.clone(), &base.with_cap(tau), params).map(|a| ThresholdMember {
            tau,
            volumes: a.volumes,
            closeness: a.closeness,
            significance: a.significance,
        })
    });
    runs.into_iter().collect()
}
