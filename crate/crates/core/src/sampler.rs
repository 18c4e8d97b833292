//! Seeded rejection sampling of balanced datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_unchecked, inside_big_circle, ClassLabel, GeometryParams, Point};
use crate::rng::Rng;

/// Proposals tried per sample before giving up.
pub const MAX_PROPOSALS: u64 = 1_000_000;

/// One labelled point of the dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub label: ClassLabel,
}

impl Sample {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// The four network inputs `(x, y, 1 - x, 1 - y)` on normalized coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; 4]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered list of samples together with what produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    /// `None` when the samples were read from a file.
    pub seed: Option<u64>,
    pub geometry: GeometryParams,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples per class, indexed by class code.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.samples.iter().map(|s| features(s, &self.geometry)).collect()
    }
}

/// Seed and size of one split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitParams {
    pub seed: u64,
    pub size: usize,
}

/// Seeds and sizes for the train, validation and test splits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: SplitParams,
    pub validation: SplitParams,
    pub test: SplitParams,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: SplitParams { seed: 42, size: 5000 },
            validation: SplitParams { seed: 41, size: 1000 },
            test: SplitParams { seed: 40, size: 1000 },
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = (self.train.seed, self.validation.seed, self.test.seed);
        if a == b || b == c || a == c {
            return Err(Error::config("train, validation and test seeds must be pairwise distinct"));
        }
        Ok(())
    }

    pub fn generate(&self, g: &GeometryParams) -> Result<Splits> {
        self.validate()?;
        Ok(Splits {
            train: generate(self.train.seed, self.train.size, g)?,
            validation: generate(self.validation.seed, self.validation.size, g)?,
            test: generate(self.test.seed, self.test.size, g)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Draws proposals uniformly on the bounding square (x first, then y) until
/// one lands in `goal`'s region.
pub fn sample_one(rng: &mut Rng, goal: ClassLabel, g: &GeometryParams) -> Result<Sample> {
    let side = g.extent();
    for _ in 0..MAX_PROPOSALS {
        let x = rng.uniform() * side;
        let y = rng.uniform() * side;
        let p = Point::new(x, y);
        if inside_big_circle(p, g) && classify_unchecked(p, g) == goal {
            return Ok(Sample { x, y, label: goal });
        }
    }
    Err(Error::IterationCap { class: goal.name(), draws: MAX_PROPOSALS })
}

/// Sample `i` targets class `i mod 3`, all from one stream seeded with `seed`.
pub fn generate(seed: u64, size: usize, g: &GeometryParams) -> Result<Dataset> {
    if size == 0 {
        return Err(Error::config("dataset size must be at least 1"));
    }
    let mut rng = Rng::new(seed);
    let samples = (0..size)
        .map(|i| sample_one(&mut rng, ClassLabel::ALL[i % 3], g))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { samples, seed: Some(seed), geometry: *g })
}

/// Train (5000 samples), validation and test (1000 each) with the default seeds.
pub fn default_splits() -> Splits {
    SplitSpec::default()
        .generate(&GeometryParams::default())
        .expect("default geometry and splits are valid")
}

/// Normalizes by the symbol extent, then appends the complements.
pub fn features(s: &Sample, g: &GeometryParams) -> FeatureVector {
    let x = s.x / g.extent();
    let y = s.y / g.extent();
    FeatureVector([x, y, 1.0 - x, 1.0 - y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist_to_left_dot, dist_to_right_dot, which_class};
    use proptest::prelude::*;
    use crate::rng::Rng;

    #[test]
    fn dot_samples_lie_in_a_dot() {
        let g = GeometryParams::default();
        let mut rng = Rng::new(5);
        for _ in 0..1000 {
            let s = sample_one(&mut rng, ClassLabel::Dot, &g).unwrap();
            let p = s.point();
            assert!(dist_to_left_dot(p, &g) <= 0.1 || dist_to_right_dot(p, &g) <= 0.1);
        }
    }

    #[test]
    fn yin_golden_sample() {
        let g = GeometryParams::default();
        let mut rng = Rng::new(42);
        let s = sample_one(&mut rng, ClassLabel::Yin, &g).unwrap();
        assert_eq!((s.x, s.y), (YIN_SEED42.0, YIN_SEED42.1));
    }

    // Also reproduced by an independent Python transcription of xoshiro256**/splitmix64.
    const YIN_SEED42: (f64, f64) = (0.6800434110281394, 0.9246929453253876);

    #[test]
    fn dot_acceptance_rate() {
        // P(accept) = Dot area / square area = 2π·0.01, so ≈15.9 proposals per sample.
        let g = GeometryParams::default();
        let mut rng = Rng::new(11);
        let calls = 10_000;
        let mut proposals = 0u64;
        for _ in 0..calls {
            loop {
                proposals += 1;
                let p = Point::new(rng.uniform(), rng.uniform());
                if inside_big_circle(p, &g) && classify_unchecked(p, &g) == ClassLabel::Dot {
                    break;
                }
            }
        }
        let mean = proposals as f64 / calls as f64;
        let expected = 1.0 / (2.0 * std::f64::consts::PI * 0.01);
        assert!((mean - expected).abs() / expected < 0.1, "{mean} vs {expected}");
    }

    #[test]
    fn dot_acceptance_rate_through_sample_one() {
        // Same statistic, counted from the RNG draws sample_one consumes.
        let g = GeometryParams::default();
        let mut rng = Rng::new(12);
        let mut probe = rng.clone();
        let calls = 10_000;
        for _ in 0..calls {
            sample_one(&mut rng, ClassLabel::Dot, &g).unwrap();
        }
        let mut draws = 0u64;
        let target = rng.next_u64();
        while probe.next_u64() != target {
            draws += 1;
        }
        let mean = draws as f64 / 2.0 / calls as f64;
        let expected = 1.0 / (2.0 * std::f64::consts::PI * 0.01);
        assert!((mean - expected).abs() / expected < 0.1, "{mean} vs {expected}");
    }

    #[test]
    fn iteration_cap_reports_misconfigured_geometry() {
        let g = GeometryParams::new(0.5, 1e-7).unwrap();
        let mut rng = Rng::new(1);
        let err = sample_one(&mut rng, ClassLabel::Dot, &g).unwrap_err();
        assert!(matches!(err, Error::IterationCap { class: "Dot", .. }));
    }

    #[test]
    fn three_samples_one_per_class() {
        let ds = generate(42, 3, &GeometryParams::default()).unwrap();
        let labels: Vec<_> = ds.samples.iter().map(|s| s.label).collect();
        assert_eq!(labels, ClassLabel::ALL);
    }

    #[test]
    fn default_train_counts() {
        let ds = generate(42, 5000, &GeometryParams::default()).unwrap();
        assert_eq!(ds.class_counts(), [1667, 1667, 1666]);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(generate(42, 0, &GeometryParams::default()).is_err());
    }

    #[test]
    fn dot_regions_are_denser() {
        let ds = generate(42, 5000, &GeometryParams::default()).unwrap();
        let areas = ds.geometry.analytic_areas();
        let counts = ds.class_counts();
        let density: Vec<f64> = (0..3).map(|c| counts[c] as f64 / areas[c]).collect();
        assert!(density[2] > 5.0 * density[0] && density[2] > 5.0 * density[1]);
    }

    #[test]
    fn default_splits_shape() {
        let a = default_splits();
        assert_eq!((a.train.len(), a.validation.len(), a.test.len()), (5000, 1000, 1000));
        assert_ne!(a.train.samples[..1000], a.test.samples[..]);
        assert_eq!(a, default_splits());
    }

    #[test]
    fn duplicate_split_seeds_rejected() {
        let mut spec = SplitSpec::default();
        spec.test.seed = spec.train.seed;
        assert!(spec.generate(&GeometryParams::default()).is_err());
    }

    #[test]
    fn feature_examples() {
        let g = GeometryParams::default();
        let f = |x, y| features(&Sample { x, y, label: ClassLabel::Yin }, &g).0;
        assert_eq!(f(0.5, 0.5), [0.5; 4]);
        assert_eq!(f(0.75, 0.3), [0.75, 0.3, 0.25, 0.7]);
    }

    #[test]
    fn features_normalize_by_extent() {
        let g = GeometryParams::new(2.0, 0.4).unwrap();
        let f = features(&Sample { x: 3.0, y: 1.0, label: ClassLabel::Yin }, &g).0;
        assert_eq!(f, [0.75, 0.25, 0.25, 0.75]);
    }

    /// Chi-squared statistic of `samples` over the cells of a 10×10 grid,
    /// against expected counts proportional to each cell's share of the region
    /// (estimated by a fine independent quadrature).
    fn chi_squared(samples: &[Sample], class: ClassLabel, g: &GeometryParams) -> (f64, usize) {
        const GRID: usize = 10;
        const SUB: usize = 200;
        let mut weight = vec![0.0f64; GRID * GRID];
        for i in 0..GRID * SUB {
            for j in 0..GRID * SUB {
                let p = Point::new((i as f64 + 0.5) / (GRID * SUB) as f64, (j as f64 + 0.5) / (GRID * SUB) as f64);
                if which_class(p, g).ok() == Some(class) {
                    weight[(i / SUB) * GRID + j / SUB] += 1.0;
                }
            }
        }
        let total: f64 = weight.iter().sum();
        let mut observed = vec![0.0f64; GRID * GRID];
        for s in samples.iter().filter(|s| s.label == class) {
            let i = ((s.x * GRID as f64) as usize).min(GRID - 1);
            let j = ((s.y * GRID as f64) as usize).min(GRID - 1);
            observed[i * GRID + j] += 1.0;
        }
        let n: f64 = observed.iter().sum();
        let mut stat = 0.0;
        let mut cells = 0;
        for (o, w) in observed.iter().zip(&weight) {
            let e = n * w / total;
            // Cells barely touching the region carry too little mass for the χ² approximation.
            if e >= 5.0 {
                stat += (o - e) * (o - e) / e;
                cells += 1;
            }
        }
        (stat, cells)
    }

    #[test]
    fn samples_are_uniform_within_each_region() {
        let g = GeometryParams::default();
        let ds = generate(7, 30_000, &g).unwrap();
        for class in ClassLabel::ALL {
            let (stat, cells) = chi_squared(&ds.samples, class, &g);
            let dof = (cells - 1) as f64;
            // Wilson-Hilferty upper 0.001 quantile of χ²(dof).
            let z = 3.090_232_306;
            let crit = dof * (1.0 - 2.0 / (9.0 * dof) + z * (2.0 / (9.0 * dof)).sqrt()).powi(3);
            assert!(stat < crit, "{class}: χ²={stat:.1} > {crit:.1} ({cells} cells)");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn generated_datasets_are_valid_and_balanced(seed in any::<u64>(), size in 1usize..400) {
            let g = GeometryParams::default();
            let ds = generate(seed, size, &g).unwrap();
            prop_assert_eq!(ds.len(), size);
            let counts = ds.class_counts();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            for s in &ds.samples {
                prop_assert_eq!(which_class(s.point(), &g).unwrap(), s.label);
                let f = features(s, &g).0;
                prop_assert_eq!(f[0] + f[2], 1.0);
                prop_assert_eq!(f[1] + f[3], 1.0);
            }
            prop_assert_eq!(&ds, &generate(seed, size, &g).unwrap());
        }
    }
}
