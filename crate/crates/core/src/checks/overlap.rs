//! Overlaps of random vectors and subspaces in high dimension.
//!
//! For Haar-random unit vectors in dimension `d`, `|⟨u|v⟩|²` has mean
//! `1/d`, so generic states of a large system are nearly orthogonal.

use std::io::Write;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::par_map;
use super::report::CheckReport;
use crate::error::{Error, Result};
use crate::linalg::{inner_product, random_state_with, SpaceLabel, Subspace};
use crate::seed;

/// Allowed distance of the sample mean from `1/d`, in standard errors.
pub const OVERLAP_STD_ERRORS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapParams {
    pub d: usize,
    pub n_pairs: usize,
    /// Dimension of the random subspaces for the principal-angle study.
    #[serde(default = "default_subspace_dim")]
    pub subspace_dim: usize,
    #[serde(default = "default_subspace_pairs")]
    pub subspace_pairs: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_subspace_dim() -> usize {
    4
}

fn default_subspace_pairs() -> usize {
    20
}

fn default_bins() -> usize {
    20
}

impl OverlapParams {
    pub fn new(d: usize, n_pairs: usize) -> Self {
        OverlapParams {
            d,
            n_pairs,
            subspace_dim: default_subspace_dim().min(d),
            subspace_pairs: default_subspace_pairs(),
            bins: default_bins(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub d: usize,
    pub n_pairs: usize,
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
    /// `(mean - 1/d) / std_error`.
    pub z: f64,
    pub min: f64,
    pub max: f64,
    /// Equal-width bins over `[0, min(1, 8/d)]`; the last bin is closed.
    pub histogram: Vec<HistogramBin>,
    /// Samples above the histogram range.
    pub overflow: u64,
    pub subspace_dim: usize,
    /// Largest principal-angle cosine of each random subspace pair.
    pub principal_cosines: Vec<f64>,
    pub max_principal_cosine: f64,
}

impl OverlapSummary {
    /// Histogram as CSV with header `d,bin_lower,bin_upper,count`; the
    /// overflow bin, when the range stops short of 1, is the last row.
    pub fn write_histogram_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let map = |e: csv::Error| Error::Io(std::io::Error::other(e));
        if header {
            w.write_record(["d", "bin_lower", "bin_upper", "count"]).map_err(map)?;
        }
        let mut rows: Vec<HistogramBin> = self.histogram.clone();
        let top = rows.last().map_or(0.0, |b| b.upper);
        if top < 1.0 {
            rows.push(HistogramBin {
                lower: top,
                upper: 1.0,
                count: self.overflow,
            });
        }
        for b in rows {
            w.write_record([
                self.d.to_string(),
                format!("{:?}", b.lower),
                format!("{:?}", b.upper),
                b.count.to_string(),
            ])
            .map_err(map)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `n_pairs` independent random unit pairs (pair `i` seeded by
/// `derive_index(seed, i)`) plus `subspace_pairs` pairs of random
/// `subspace_dim`-dimensional subspaces.
pub fn overlap_statistics(params: &OverlapParams, seed: u64) -> Result<OverlapSummary> {
    let OverlapParams {
        d,
        n_pairs,
        subspace_dim,
        subspace_pairs,
        bins,
    } = *params;
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if n_pairs < 2 {
        return Err(Error::invalid("need at least two pairs for a standard error"));
    }
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if subspace_pairs > 0 && (subspace_dim == 0 || subspace_dim > d) {
        return Err(Error::invalid(format!("subspace dimension {subspace_dim} not in 1..={d}")));
    }
    let space = SpaceLabel::new("u", d)?;

    let vector_seed = seed::derive(seed, "vectors");
    let indices: Vec<u64> = (0..n_pairs as u64).collect();
    let overlaps = par_map(&indices, |&i| {
        let mut rng = seed::rng(seed::derive_index(vector_seed, i));
        let u = random_state_with(&space, &mut rng);
        let v = random_state_with(&space, &mut rng);
        inner_product(&u, &v).expect("same space").norm_sqr()
    });

    let n = n_pairs as f64;
    let mean = overlaps.iter().sum::<f64>() / n;
    let var = overlaps.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    let expected = 1.0 / d as f64;
    let gap = mean - expected;
    let z = if std_error > 0.0 {
        gap / std_error
    } else if gap == 0.0 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    };

    let range = (8.0 / d as f64).min(1.0);
    let width = range / bins as f64;
    let mut histogram: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lower: b as f64 * width,
            upper: if b + 1 == bins { range } else { (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    let mut overflow = 0;
    for &x in &overlaps {
        if x > range && range < 1.0 {
            overflow += 1;
        } else {
            let b = ((x / width) as usize).min(bins - 1);
            histogram[b].count += 1;
        }
    }

    let subspace_seed = seed::derive(seed, "subspaces");
    let pair_ids: Vec<u64> = (0..subspace_pairs as u64).collect();
    let principal_cosines = par_map(&pair_ids, |&i| -> Result<f64> {
        let s = seed::derive_index(subspace_seed, i);
        let f = Subspace::random(space.clone(), subspace_dim, seed::derive(s, "first"))?;
        let g = Subspace::random(space.clone(), subspace_dim, seed::derive(s, "second"))?;
        let m = f.frame().adjoint() * g.frame();
        let sv = SVD::new(m, false, false).singular_values;
        Ok(sv.iter().copied().fold(0.0, f64::max))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(OverlapSummary {
        d,
        n_pairs,
        mean,
        std_error,
        expected,
        z,
        min: overlaps.iter().copied().fold(f64::INFINITY, f64::min),
        max: overlaps.iter().copied().fold(0.0, f64::max),
        histogram,
        overflow,
        subspace_dim,
        max_principal_cosine: principal_cosines.iter().copied().fold(0.0, f64::max),
        principal_cosines,
    })
}

/// Every sample mean lies within [`OVERLAP_STD_ERRORS`] standard errors of
/// `1/d`, and the means strictly decrease along the given summaries (which
/// are expected in ascending `d`). The defect is the largest `|z|`.
pub fn check_generic_orthogonality(summaries: &[OverlapSummary]) -> CheckReport {
    let worst = summaries.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    let decreasing = summaries.windows(2).all(|w| w[1].mean < w[0].mean);
    let rows: Vec<_> = summaries
        .iter()
        .map(|s| {
            json!({
                "d": s.d,
                "n_pairs": s.n_pairs,
                "mean": s.mean,
                "expected": s.expected,
                "std_error": s.std_error,
                "z": s.z,
                "max": s.max,
                "max_principal_cosine": s.max_principal_cosine,
            })
        })
        .collect();
    let details = json!({ "dimensions": rows, "means_strictly_decreasing": decreasing });
    let report = CheckReport::new("generic_orthogonality", worst, OVERLAP_STD_ERRORS, details);
    if decreasing {
        report
    } else {
        CheckReport::failed(report.check, report.defect, report.tolerance, report.details)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimension_overlaps_are_one() {
        let s = overlap_statistics(&OverlapParams::new(1, 100), 3).unwrap();
        assert!((s.min - 1.0).abs() < 1e-12 && (s.max - 1.0).abs() < 1e-12);
        assert!((s.max_principal_cosine - 1.0).abs() < 1e-12);
        assert_eq!(s.overflow, 0);
        assert_eq!(s.histogram.last().unwrap().count, 100);
    }

    #[test]
    fn histogram_counts_everything() {
        let s = overlap_statistics(&OverlapParams::new(32, 500), 9).unwrap();
        let total: u64 = s.histogram.iter().map(|b| b.count).sum::<u64>() + s.overflow;
        assert_eq!(total, 500);
        assert!((s.histogram.last().unwrap().upper - 0.25).abs() < 1e-15);
        let mut buf = Vec::new();
        s.write_histogram_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "d,bin_lower,bin_upper,count");
        assert_eq!(text.lines().count(), 1 + 20 + 1);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(overlap_statistics(&OverlapParams::new(0, 10), 0).is_err());
        assert!(overlap_statistics(&OverlapParams::new(4, 1), 0).is_err());
        let mut p = OverlapParams::new(4, 10);
        p.subspace_dim = 5;
        assert!(overlap_statistics(&p, 0).is_err());
    }

    #[test]
    fn same_seed_same_summary() {
        let p = OverlapParams::new(16, 200);
        assert_eq!(overlap_statistics(&p, 4).unwrap(), overlap_statistics(&p, 4).unwrap());
    }
}
