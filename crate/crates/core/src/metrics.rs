//! Evaluation metrics for group motions.
//!
//! Position-based: collision frequency and the repulsive interaction,
//! contact and total social forces. Feature-based: Fréchet distance,
//! diversity and multimodality over any equal-dimension feature vectors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::GroupMotion;
use crate::geometry::{forward, Vec3};
use crate::randomization::RngStream;

pub const DEFAULT_COLLISION_THRESHOLD: f64 = 0.45;
/// Ridge added to covariances that are not full rank.
pub const FID_RIDGE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("force between coincident points is undefined")]
    CoincidentPoints,
    #[error("metric needs at least two persons")]
    SinglePerson,
    #[error("feature set is empty")]
    EmptySet,
    #[error("feature dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("diversity needs at least two vectors")]
    SingletonSet,
    #[error("class `{0}` has fewer than two vectors")]
    UndersizedClass(String),
    #[error("pair count must be at least one")]
    NoPairs,
}

/// Social-force constants; radii are per person, meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceParams {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub radius: f64,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self {
            a: 2000.0,
            b: 0.08,
            k: 120_000.0,
            radius: DEFAULT_COLLISION_THRESHOLD / 2.0,
        }
    }
}

/// Distance and unit vector from `j` to `i`.
fn separation(p_i: &Vec3, p_j: &Vec3) -> Result<(f64, Vec3), MetricsError> {
    let diff = p_i - p_j;
    let d = diff.norm();
    if d == 0.0 {
        return Err(MetricsError::CoincidentPoints);
    }
    Ok((d, diff / d))
}

/// Repulsive interaction force exerted by `j` on `i`.
pub fn interaction_force(
    p_i: &Vec3,
    p_j: &Vec3,
    r_i: f64,
    r_j: f64,
    params: &ForceParams,
) -> Result<Vec3, MetricsError> {
    let (d, n) = separation(p_i, p_j)?;
    Ok(n * (params.a * ((r_i + r_j - d) / params.b).exp()))
}

/// Body-compression force of `j` on `i`; zero unless the bodies overlap.
pub fn contact_force(
    p_i: &Vec3,
    p_j: &Vec3,
    r_i: f64,
    r_j: f64,
    params: &ForceParams,
) -> Result<Vec3, MetricsError> {
    let (d, n) = separation(p_i, p_j)?;
    Ok(n * (params.k * (r_i + r_j - d).max(0.0)))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceReport {
    pub interaction_force: f64,
    pub contact_force: f64,
    pub total_force: f64,
    pub collision_frequency: f64,
    /// Set when the motion had fewer than two persons; values are then zero.
    pub single_person: bool,
}

/// Mean over persons and frames of the magnitude of each person's summed
/// pairwise forces. Coincident pairs contribute no force.
pub fn social_force_report(motion: &GroupMotion, params: &ForceParams) -> ForceReport {
    let p = motion.persons();
    if p < 2 {
        return ForceReport {
            single_person: true,
            ..ForceReport::default()
        };
    }
    let (mut int_sum, mut cont_sum, mut tot_sum) = (0.0, 0.0, 0.0);
    for t in 0..motion.frames() {
        let frame = motion.frame(t);
        for i in 0..p {
            let (mut fi, mut fc) = (Vec3::zeros(), Vec3::zeros());
            for j in 0..p {
                if i == j {
                    continue;
                }
                let (pi, pj) = (&frame[i].position, &frame[j].position);
                if let (Ok(a), Ok(b)) = (
                    interaction_force(pi, pj, params.radius, params.radius, params),
                    contact_force(pi, pj, params.radius, params.radius, params),
                ) {
                    fi += a;
                    fc += b;
                }
            }
            int_sum += fi.norm();
            cont_sum += fc.norm();
            tot_sum += (fi + fc).norm();
        }
    }
    let n = (p * motion.frames()) as f64;
    ForceReport {
        interaction_force: int_sum / n,
        contact_force: cont_sum / n,
        total_force: tot_sum / n,
        collision_frequency: collision_frequency(motion, 2.0 * params.radius).unwrap_or_default(),
        single_person: false,
    }
}

/// Sub-threshold (frame, pair) events divided by the number of pairs.
pub fn collision_frequency(motion: &GroupMotion, threshold: f64) -> Result<f64, MetricsError> {
    let p = motion.persons();
    if p < 2 {
        return Err(MetricsError::SinglePerson);
    }
    let mut events = 0usize;
    for t in 0..motion.frames() {
        let frame = motion.frame(t);
        for i in 0..p {
            for j in i + 1..p {
                if (frame[i].position - frame[j].position).norm() < threshold {
                    events += 1;
                }
            }
        }
    }
    Ok(events as f64 / (p * (p - 1) / 2) as f64)
}

/// Equal-dimension feature vectors, optionally labelled with a class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub label: Option<String>,
    pub vectors: Vec<Vec<f64>>,
}

impl FeatureSet {
    pub fn new(label: Option<String>, vectors: Vec<Vec<f64>>) -> Result<Self, MetricsError> {
        let set = Self { label, vectors };
        set.dim()?;
        Ok(set)
    }

    pub fn dim(&self) -> Result<usize, MetricsError> {
        let first = self.vectors.first().ok_or(MetricsError::EmptySet)?;
        let d = first.len();
        for v in &self.vectors {
            if v.len() != d {
                return Err(MetricsError::DimensionMismatch(d, v.len()));
            }
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Mean and maximum-likelihood covariance.
fn moments(set: &FeatureSet) -> Result<(DVector<f64>, DMatrix<f64>), MetricsError> {
    let d = set.dim()?;
    let n = set.len() as f64;
    let mut mean = DVector::zeros(d);
    for v in &set.vectors {
        mean += DVector::from_column_slice(v);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(d, d);
    for v in &set.vectors {
        let c = DVector::from_column_slice(v) - &mean;
        cov += &c * c.transpose();
    }
    cov /= n;
    Ok((mean, cov))
}

fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

fn is_rank_deficient(cov: &DMatrix<f64>, n: usize) -> bool {
    if n <= cov.nrows() {
        return true;
    }
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    max == 0.0 || min <= max * 1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidScore {
    pub distance: f64,
    /// A ridge of [`FID_RIDGE`]·I was added to both covariances.
    pub regularized: bool,
}

/// Fréchet distance between Gaussian fits of two feature sets.
pub fn fid(a: &FeatureSet, b: &FeatureSet) -> Result<FidScore, MetricsError> {
    let (da, db) = (a.dim()?, b.dim()?);
    if da != db {
        return Err(MetricsError::DimensionMismatch(da, db));
    }
    let (mu_a, mut cov_a) = moments(a)?;
    let (mu_b, mut cov_b) = moments(b)?;
    let regularized = is_rank_deficient(&cov_a, a.len()) || is_rank_deficient(&cov_b, b.len());
    if regularized {
        let ridge = DMatrix::identity(da, da) * FID_RIDGE;
        cov_a += &ridge;
        cov_b += ridge;
    }
    // Tr((Σa Σb)^½) = Tr((Σa^½ Σb Σa^½)^½), which keeps the root symmetric
    let root_a = sym_sqrt(&cov_a);
    let inner = &root_a * &cov_b * &root_a;
    let inner = (&inner + inner.transpose()) * 0.5;
    let cross = sym_sqrt(&inner).trace();
    let mean_term = (&mu_a - &mu_b).norm_squared();
    let distance = (mean_term + cov_a.trace() + cov_b.trace() - 2.0 * cross).max(0.0);
    Ok(FidScore {
        distance,
        regularized,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean distance over `n_pairs` random pairs of distinct indices.
pub fn diversity(
    set: &FeatureSet,
    n_pairs: usize,
    rng: &mut RngStream,
) -> Result<f64, MetricsError> {
    set.dim()?;
    if set.len() < 2 {
        return Err(MetricsError::SingletonSet);
    }
    if n_pairs == 0 {
        return Err(MetricsError::NoPairs);
    }
    let n = set.len();
    let mut total = 0.0;
    for _ in 0..n_pairs {
        let i = rng.sample_index(n);
        let mut j = rng.sample_index(n);
        while j == i {
            j = rng.sample_index(n);
        }
        total += euclid(&set.vectors[i], &set.vectors[j]);
    }
    Ok(total / n_pairs as f64)
}

/// Within-class diversity averaged over classes.
pub fn multimodality(
    sets_by_class: &BTreeMap<String, FeatureSet>,
    n_pairs: usize,
    rng: &mut RngStream,
) -> Result<f64, MetricsError> {
    if sets_by_class.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut dim = None;
    for (class, set) in sets_by_class {
        let d = set.dim()?;
        if *dim.get_or_insert(d) != d {
            return Err(MetricsError::DimensionMismatch(dim.unwrap(), d));
        }
        if set.len() < 2 {
            return Err(MetricsError::UndersizedClass(class.clone()));
        }
    }
    let mut sum = 0.0;
    for (class, set) in sets_by_class {
        sum += diversity(set, n_pairs, &mut rng.child(&format!("class/{class}")))?;
    }
    Ok(sum / sets_by_class.len() as f64)
}

/// Length of [`geometric_features`] vectors.
pub const GEOMETRIC_FEATURE_DIM: usize = 10;

/// Handcrafted group descriptor: per-person speed statistics, pairwise
/// distance statistics, heading dispersion, spatial extent and contact rate.
pub fn geometric_features(motion: &GroupMotion) -> Vec<f64> {
    let p = motion.persons();
    let t_len = motion.frames();
    let dt = 1.0 / motion.fps;

    let mut speeds = Vec::new();
    for k in 0..p {
        let mut path = 0.0;
        for t in 1..t_len {
            path += (motion.sample(t, k).position - motion.sample(t - 1, k).position).norm();
        }
        speeds.push(if t_len > 1 {
            path / ((t_len - 1) as f64 * dt)
        } else {
            0.0
        });
    }
    let (speed_mean, speed_std) = mean_std(&speeds);
    let speed_max = speeds.iter().cloned().fold(0.0, f64::max);

    let mut dists = Vec::new();
    let mut dispersion = 0.0;
    let mut extent = 0.0;
    for t in 0..t_len {
        let frame = motion.frame(t);
        for i in 0..p {
            for j in i + 1..p {
                dists.push((frame[i].position - frame[j].position).norm());
            }
        }
        let resultant: Vec3 = frame.iter().map(|s| forward(s.heading)).sum();
        dispersion += 1.0 - resultant.norm() / p as f64;
        let c: Vec3 = frame.iter().map(|s| s.position).sum::<Vec3>() / p as f64;
        extent += frame
            .iter()
            .map(|s| (s.position - c).norm())
            .fold(0.0, f64::max);
    }
    let (d_mean, d_std) = if dists.is_empty() {
        (0.0, 0.0)
    } else {
        mean_std(&dists)
    };
    let d_min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let d_min = if d_min.is_finite() { d_min } else { 0.0 };
    let contact_rate =
        collision_frequency(motion, DEFAULT_COLLISION_THRESHOLD).unwrap_or(0.0) / t_len as f64;

    vec![
        speed_mean,
        speed_std,
        speed_max,
        d_mean,
        d_std,
        d_min,
        dispersion / t_len as f64,
        extent / t_len as f64,
        contact_rate,
        p as f64,
    ]
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authoring::GroupActivity;

    fn p(x: f64, z: f64) -> Vec3 {
        Vec3::new(x, 0.0, z)
    }

    #[test]
    fn interaction_force_values() {
        let f = ForceParams::default();
        let at_contact = interaction_force(&p(0.45, 0.0), &p(0.0, 0.0), 0.225, 0.225, &f).unwrap();
        assert!((at_contact.norm() - 2000.0).abs() < 1e-9);
        assert!((at_contact.normalize() - Vec3::x()).norm() < 1e-15);
        let m = interaction_force(&p(0.0, 0.53), &p(0.0, 0.0), 0.225, 0.225, &f).unwrap();
        assert!((m.norm() - 735.758882).abs() < 1e-6);
        let far = interaction_force(&p(2.0, 0.0), &p(0.0, 0.0), 0.225, 0.225, &f).unwrap();
        assert!((far.norm() - 2000.0 * (-19.375f64).exp()).abs() < 1e-12);
        assert!(far.norm() < 1e-5);
        assert_eq!(
            interaction_force(&p(1.0, 1.0), &p(1.0, 1.0), 0.2, 0.2, &f).unwrap_err(),
            MetricsError::CoincidentPoints
        );
    }

    #[test]
    fn contact_force_values() {
        let f = ForceParams::default();
        assert_eq!(
            contact_force(&p(0.5, 0.0), &p(0.0, 0.0), 0.225, 0.225, &f).unwrap(),
            Vec3::zeros()
        );
        assert_eq!(
            contact_force(&p(0.45, 0.0), &p(0.0, 0.0), 0.225, 0.225, &f)
                .unwrap()
                .norm(),
            0.0
        );
        let c = contact_force(&p(0.44, 0.0), &p(0.0, 0.0), 0.225, 0.225, &f).unwrap();
        assert!((c.norm() - 1200.0).abs() < 1e-9);
    }

    #[test]
    fn report_on_static_pair_at_contact() {
        let m = GroupMotion::from_positions(
            GroupActivity::Talking,
            20.0,
            &vec![vec![p(0.0, 0.0), p(0.45, 0.0)]; 10],
        )
        .unwrap();
        let r = social_force_report(&m, &ForceParams::default());
        assert!((r.interaction_force - 2000.0).abs() < 1e-9);
        assert_eq!(r.contact_force, 0.0);
        assert_eq!(r.collision_frequency, 0.0);
    }

    #[test]
    fn single_person_flagged() {
        let m = GroupMotion::from_positions(GroupActivity::Talking, 20.0, &[vec![p(0.0, 0.0)]])
            .unwrap();
        let r = social_force_report(&m, &ForceParams::default());
        assert!(r.single_person);
        assert_eq!(r.total_force, 0.0);
        assert_eq!(
            collision_frequency(&m, 0.45),
            Err(MetricsError::SinglePerson)
        );
    }

    #[test]
    fn collision_counting_rule() {
        let frames: Vec<Vec<Vec3>> = (0..60)
            .map(|_| vec![p(0.0, 0.0), p(0.3, 0.0), p(5.0, 0.0)])
            .collect();
        let m = GroupMotion::from_positions(GroupActivity::Queueing, 20.0, &frames).unwrap();
        assert_eq!(collision_frequency(&m, 0.45).unwrap(), 20.0);
        let apart: Vec<Vec<Vec3>> = (0..60).map(|_| vec![p(0.0, 0.0), p(3.0, 0.0)]).collect();
        let m = GroupMotion::from_positions(GroupActivity::Queueing, 20.0, &apart).unwrap();
        assert_eq!(collision_frequency(&m, 0.45).unwrap(), 0.0);
    }

    #[test]
    fn fid_closed_forms() {
        let a = FeatureSet::new(None, vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]]).unwrap();
        let b = FeatureSet::new(None, vec![vec![0.0], vec![2.0], vec![0.0], vec![2.0]]).unwrap();
        let s = fid(&a, &b).unwrap();
        assert!((s.distance - 1.0).abs() < 1e-6);
        assert!(!s.regularized);
        assert!(fid(&a, &a).unwrap().distance < 1e-8);
        let c = FeatureSet::new(None, vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            fid(&a, &c).unwrap_err(),
            MetricsError::DimensionMismatch(1, 2)
        );
        assert_eq!(
            FeatureSet::new(None, vec![]).unwrap_err(),
            MetricsError::EmptySet
        );
    }

    #[test]
    fn fid_regularizes_small_sets() {
        let a = FeatureSet::new(None, vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let s = fid(&a, &a).unwrap();
        assert!(s.regularized);
        assert!(s.distance < 1e-8);
    }

    #[test]
    fn diversity_edge_cases() {
        let mut rng = RngStream::new(1);
        let same = FeatureSet::new(None, vec![vec![1.0, 2.0]; 5]).unwrap();
        assert_eq!(diversity(&same, 100, &mut rng).unwrap(), 0.0);
        let one = FeatureSet::new(None, vec![vec![1.0]]).unwrap();
        assert_eq!(
            diversity(&one, 10, &mut rng).unwrap_err(),
            MetricsError::SingletonSet
        );
        let two = FeatureSet::new(None, vec![vec![0.0], vec![3.0]]).unwrap();
        assert_eq!(diversity(&two, 10, &mut rng).unwrap(), 3.0);
        let a = diversity(&two, 7, &mut RngStream::new(9)).unwrap();
        let b = diversity(&two, 7, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multimodality_edge_cases() {
        let mut rng = RngStream::new(2);
        let mut classes = BTreeMap::new();
        classes.insert(
            "a".to_string(),
            FeatureSet::new(None, vec![vec![1.0]; 3]).unwrap(),
        );
        classes.insert(
            "b".to_string(),
            FeatureSet::new(None, vec![vec![4.0]; 3]).unwrap(),
        );
        assert_eq!(multimodality(&classes, 50, &mut rng).unwrap(), 0.0);
        classes.insert(
            "c".to_string(),
            FeatureSet::new(None, vec![vec![4.0]]).unwrap(),
        );
        assert_eq!(
            multimodality(&classes, 50, &mut rng).unwrap_err(),
            MetricsError::UndersizedClass("c".into())
        );
    }

    #[test]
    fn features_have_fixed_dimension() {
        let frames: Vec<Vec<Vec3>> = (0..5)
            .map(|t| vec![p(0.0, t as f64 * 0.1), p(1.0, t as f64 * 0.1)])
            .collect();
        let m = GroupMotion::from_positions(GroupActivity::Walking, 10.0, &frames).unwrap();
        let f = geometric_features(&m);
        assert_eq!(f.len(), GEOMETRIC_FEATURE_DIM);
        assert!((f[0] - 1.0).abs() < 1e-12);
        assert!((f[3] - 1.0).abs() < 1e-12);
        assert!(f.iter().all(|x| x.is_finite()));
        let single =
            GroupMotion::from_positions(GroupActivity::Talking, 10.0, &[vec![p(0.0, 0.0)]])
                .unwrap();
        assert!(geometric_features(&single).iter().all(|x| x.is_finite()));
    }
}
