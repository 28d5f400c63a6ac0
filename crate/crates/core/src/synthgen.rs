//! Synthetic questionnaire generators: finite mixtures of Dirac and uniform
//! components, followed by rounded, clamped Gaussian noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{NoiseSpec, QuestionnaireMatrix, Scale};
use crate::error::{Error, Result};
use crate::rng;

/// Variance of the noise used for the 7-item presets.
pub const PRESET_NOISE_VARIANCE: f64 = 0.66;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentKind {
    /// Point mass on one questionnaire.
    Dirac { values: Vec<i32> },
    /// Independent uniform integers in `[low, high]` per item.
    Uniform { low: i32, high: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    #[serde(flatten)]
    pub kind: ComponentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureLaw {
    pub n_items: usize,
    pub components: Vec<Component>,
}

impl MixtureLaw {
    pub fn new(n_items: usize, components: Vec<Component>, scale: Scale) -> Result<Self> {
        let law = MixtureLaw { n_items, components };
        law.check(scale)?;
        Ok(law)
    }

    pub fn check(&self, scale: Scale) -> Result<()> {
        if self.n_items == 0 || self.components.is_empty() {
            return Err(Error::InvalidArgument("mixture law needs items and components".into()));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("component weights sum to {total}")));
        }
        for c in &self.components {
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::InvalidArgument(format!("weight {} outside [0, 1]", c.weight)));
            }
            match &c.kind {
                ComponentKind::Dirac { values } => {
                    if values.len() != self.n_items {
                        return Err(Error::DimensionMismatch {
                            expected: self.n_items,
                            actual: values.len(),
                        });
                    }
                    if values.iter().any(|&v| v < scale.min || v > scale.max) {
                        return Err(Error::InvalidArgument(format!("{values:?} outside the scale")));
                    }
                }
                ComponentKind::Uniform { low, high } => {
                    if low > high || *low < scale.min || *high > scale.max {
                        return Err(Error::InvalidArgument(format!("uniform bounds [{low}, {high}]")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the component a uniform draw `u` in `[0, 1)` falls into.
    fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        // rounding slack: last component with positive weight
        self.components.iter().rposition(|c| c.weight > 0.0).unwrap_or(0)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (usize, Vec<i32>) {
        let idx = self.pick(rng.random::<f64>());
        let row = match &self.components[idx].kind {
            ComponentKind::Dirac { values } => values.clone(),
            ComponentKind::Uniform { low, high } => {
                (0..self.n_items).map(|_| rng.random_range(*low..=*high)).collect()
            }
        };
        (idx, row)
    }
}

/// Draws `n` rows i.i.d. from the law, before noise.
pub fn sample_group(law: &MixtureLaw, n: usize, seed: u64) -> Result<Vec<Vec<i32>>> {
    Ok(sample_group_with_components(law, n, seed)?.into_iter().map(|(_, r)| r).collect())
}

/// Like [`sample_group`], also returning the component index of each row.
pub fn sample_group_with_components(law: &MixtureLaw, n: usize, seed: u64) -> Result<Vec<(usize, Vec<i32>)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = rng::seeded(seed);
    Ok((0..n).map(|_| law.draw(&mut rng)).collect())
}

/// Applies the noise to `x` given a standard normal draw `z`.
pub fn perturb_with_draw(x: i32, noise: &NoiseSpec, z: f64) -> i32 {
    let y = x as f64 + noise.sd * z;
    // f64::round rounds half away from zero
    let y = if noise.round { y.round() } else { y.trunc() };
    y.clamp(noise.clamp_low as f64, noise.clamp_high as f64) as i32
}

pub fn perturb<R: Rng>(x: i32, noise: &NoiseSpec, rng: &mut R) -> i32 {
    let z: f64 = StandardNormal.sample(rng);
    perturb_with_draw(x, noise, z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub law: MixtureLaw,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub groups: Vec<GroupSpec>,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale: Scale,
}

impl DatasetSpec {
    pub fn check(&self) -> Result<()> {
        let first = self
            .groups
            .first()
            .ok_or_else(|| Error::InvalidArgument("dataset needs at least one group".into()))?;
        self.noise.check()?;
        for g in &self.groups {
            g.law.check(self.scale)?;
            if g.count == 0 {
                return Err(Error::InvalidArgument(format!("group `{}` has zero samples", g.name)));
            }
            if g.law.n_items != first.law.n_items {
                return Err(Error::DimensionMismatch {
                    expected: first.law.n_items,
                    actual: g.law.n_items,
                });
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Samples every group, perturbs each cell and attaches group labels.
///
/// Group `g` samples from `derive(seed, g)`; the noise for output row `i`
/// uses stream `i` of a noise seed, so rows can be generated in parallel.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<QuestionnaireMatrix> {
    spec.check()?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (g, group) in spec.groups.iter().enumerate() {
        let sampled = sample_group(&group.law, group.count, rng::derive(spec.seed, g as u64))?;
        labels.extend(std::iter::repeat_n(group.name.clone(), sampled.len()));
        rows.extend(sampled);
    }
    let noise_seed = rng::derive_tagged(spec.seed, "noise");
    let noisy: Vec<Vec<Option<f64>>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = rng::stream(noise_seed, i as u64);
            row.iter()
                .map(|&x| Some(perturb(x, &spec.noise, &mut rng) as f64))
                .collect()
        })
        .collect();
    QuestionnaireMatrix::from_rows(noisy, labels, spec.scale)
}

fn dirac(weight: f64, values: Vec<i32>) -> Component {
    Component {
        weight,
        kind: ComponentKind::Dirac { values },
    }
}

fn constant(weight: f64, v: i32, d: usize) -> Component {
    dirac(weight, vec![v; d])
}

fn uniform(weight: f64) -> Component {
    Component {
        weight,
        kind: ComponentKind::Uniform { low: 1, high: 5 },
    }
}

fn law(d: usize, components: Vec<Component>) -> MixtureLaw {
    MixtureLaw::new(d, components, Scale::default()).expect("preset laws are valid")
}

/// Laws of groups 1 to 11 used by the presets.
pub fn preset_law(group: usize) -> Option<MixtureLaw> {
    const D: usize = 7;
    let s = [
        vec![5, 3, 1],
        vec![1, 3, 5],
        vec![3, 3, 3],
        vec![5, 1, 3],
        vec![1, 5, 3],
        vec![3, 5, 1],
    ];
    let sigma = |w: [f64; 6], u: f64| {
        let mut c: Vec<Component> = w.iter().zip(&s).map(|(w, v)| dirac(*w, v.clone())).collect();
        c.push(uniform(u));
        law(3, c)
    };
    Some(match group {
        1 => law(
            D,
            vec![constant(0.25, 5, D), constant(0.55, 4, D), constant(0.15, 3, D), uniform(0.05)],
        ),
        2 => law(
            D,
            vec![constant(0.25, 4, D), constant(0.45, 3, D), constant(0.25, 2, D), uniform(0.05)],
        ),
        3 => law(
            D,
            vec![
                constant(0.19, 5, D),
                constant(0.19, 4, D),
                constant(0.19, 3, D),
                constant(0.19, 2, D),
                constant(0.19, 1, D),
                uniform(0.05),
            ],
        ),
        4 => law(
            D,
            vec![
                constant(0.3, 5, D),
                constant(0.175, 4, D),
                constant(0.175, 2, D),
                constant(0.3, 1, D),
                uniform(0.05),
            ],
        ),
        5 => law(
            D,
            vec![
                dirac(0.24, vec![5, 5, 5, 5, 5, 5, 1]),
                dirac(0.24, vec![5, 5, 5, 5, 5, 5, 2]),
                dirac(0.24, vec![4, 4, 4, 4, 4, 4, 2]),
                dirac(0.24, vec![4, 4, 4, 4, 4, 4, 1]),
                uniform(0.04),
            ],
        ),
        6 => law(
            D,
            vec![
                dirac(0.32, vec![1, 1, 1, 4, 1, 1, 1]),
                dirac(0.32, vec![3, 3, 3, 5, 3, 3, 3]),
                dirac(0.32, vec![2, 2, 2, 5, 2, 2, 2]),
                uniform(0.04),
            ],
        ),
        7 => law(
            D,
            vec![
                dirac(0.12, vec![5, 5, 5, 5, 5, 5, 2]),
                dirac(0.12, vec![5, 5, 5, 4, 5, 5, 1]),
                dirac(0.12, vec![4, 4, 4, 4, 4, 4, 1]),
                dirac(0.12, vec![4, 4, 4, 5, 4, 4, 2]),
                dirac(0.12, vec![2, 2, 2, 4, 2, 2, 1]),
                dirac(0.12, vec![2, 2, 2, 5, 2, 2, 1]),
                dirac(0.12, vec![1, 1, 1, 5, 1, 1, 1]),
                dirac(0.12, vec![1, 1, 1, 4, 1, 1, 1]),
                uniform(0.04),
            ],
        ),
        8 => sigma([0.16; 6], 0.04),
        9 => sigma([0.4, 0.02, 0.12, 0.4, 0.02, 0.02], 0.02),
        10 => sigma([0.06, 0.4, 0.04, 0.02, 0.4, 0.06], 0.02),
        11 => sigma([0.07, 0.07, 0.07, 0.07, 0.35, 0.35], 0.02),
        _ => return None,
    })
}

/// Built-in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Groups 1-4, shared one-dimensional construct.
    D1,
    /// Groups 1-7, construct structure differs between groups.
    D2,
    /// Groups 8-11, three unrelated items.
    D3,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Preset::D1),
            "d2" => Ok(Preset::D2),
            "d3" => Ok(Preset::D3),
            other => Err(Error::InvalidArgument(format!("unknown preset `{other}` (expected d1, d2 or d3)"))),
        }
    }
}

impl Preset {
    pub fn groups(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Preset::D1 => 1..=4,
            Preset::D2 => 1..=7,
            Preset::D3 => 8..=11,
        }
    }

    /// Noise sd; the 7-item presets use variance 0.66, the 3-item one unit variance.
    pub fn noise_sd(self) -> f64 {
        match self {
            Preset::D1 | Preset::D2 => PRESET_NOISE_VARIANCE.sqrt(),
            Preset::D3 => 1.0,
        }
    }

    pub fn spec(self, seed: u64) -> DatasetSpec {
        self.spec_with_sd(seed, self.noise_sd())
    }

    /// Same as [`Preset::spec`] with an explicit noise sd (e.g. 0.66 for
    /// the reading of the noise parameter as a standard deviation).
    pub fn spec_with_sd(self, seed: u64, sd: f64) -> DatasetSpec {
        DatasetSpec {
            groups: self
                .groups()
                .map(|g| GroupSpec {
                    name: g.to_string(),
                    law: preset_law(g).expect("preset group"),
                    count: 1000,
                })
                .collect(),
            noise: NoiseSpec {
                sd,
                clamp_low: 1,
                clamp_high: 5,
                round: true,
            },
            seed,
            scale: Scale::default(),
        }
    }

    pub fn generate(self, seed: u64) -> QuestionnaireMatrix {
        generate_dataset(&self.spec(seed)).expect("preset specs are valid")
    }
}
