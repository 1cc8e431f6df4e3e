//! Meta-measure protocols: good-map selection, the generic/noise
//! mis-ranking rates (MM2/MM3), human-ranking correlation (MM4), and the
//! ground-truth switch rate (MM5).

use std::fmt;
use std::str::FromStr;

use fmeval_core::measure::{self, MeasureId};
use fmeval_core::rank::{RankingList, theta};
use fmeval_core::{BinaryMap, classic};
use rand::Rng;

use crate::rng::stream_rng;
use crate::synth::{gaussian_noise_map_with, generic_circle, NoiseConfig};
use crate::Error;

/// F1 score at or above which a model map counts as "good" for MM5.
pub const GOOD_MAP_F1_THRESHOLD: f64 = 0.8;

/// One image with its ground truth and the model maps competing on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    image_id: String,
    gt: BinaryMap,
    models: Vec<(String, BinaryMap)>,
}

impl CandidateSet {
    pub fn new(
        image_id: String,
        gt: BinaryMap,
        models: Vec<(String, BinaryMap)>,
    ) -> Result<Self, Error> {
        if models.is_empty() {
            return Err(Error::NoModels(image_id));
        }
        for (_, map) in &models {
            if map.dimensions() != gt.dimensions() {
                return Err(fmeval_core::Error::DimensionMismatch {
                    left: gt.dimensions(),
                    right: map.dimensions(),
                }
                .into());
            }
        }
        Ok(CandidateSet { image_id, gt, models })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn gt(&self) -> &BinaryMap {
        &self.gt
    }

    pub fn models(&self) -> &[(String, BinaryMap)] {
        &self.models
    }
}

/// One human-ranked record: three candidate maps for an image plus the
/// human-agreed order (map indices, best first).
#[derive(Debug, Clone, PartialEq)]
pub struct HumanRankedTriple {
    image_id: String,
    gt: BinaryMap,
    maps: [BinaryMap; 3],
    human_order: [usize; 3],
}

impl HumanRankedTriple {
    pub fn new(
        image_id: String,
        gt: BinaryMap,
        maps: [BinaryMap; 3],
        human_order: [usize; 3],
    ) -> Result<Self, Error> {
        let mut seen = [false; 3];
        for &idx in &human_order {
            if idx > 2 || seen[idx] {
                return Err(Error::InvalidHumanOrder(format!("{human_order:?}")));
            }
            seen[idx] = true;
        }
        for map in &maps {
            if map.dimensions() != gt.dimensions() {
                return Err(fmeval_core::Error::DimensionMismatch {
                    left: gt.dimensions(),
                    right: map.dimensions(),
                }
                .into());
            }
        }
        Ok(HumanRankedTriple { image_id, gt, maps, human_order })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }
}

/// Which meta-measure a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaId {
    /// SOTA vs. generic map mis-ranking rate.
    Mm2,
    /// SOTA vs. Gaussian noise mis-ranking rate.
    Mm3,
    /// Mean ranking distance against human orders.
    Mm4,
    /// Ground-truth switch rate.
    Mm5,
}

impl fmt::Display for MetaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaId::Mm2 => write!(f, "mm2"),
            MetaId::Mm3 => write!(f, "mm3"),
            MetaId::Mm4 => write!(f, "mm4"),
            MetaId::Mm5 => write!(f, "mm5"),
        }
    }
}

impl FromStr for MetaId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mm2" => Ok(MetaId::Mm2),
            "mm3" => Ok(MetaId::Mm3),
            "mm4" => Ok(MetaId::Mm4),
            "mm5" => Ok(MetaId::Mm5),
            _ => Err(format!("unknown meta-measure {s:?} (expected mm2..mm5)")),
        }
    }
}

/// Outcome of one meta-measure run for one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaResult {
    pub meta: MetaId,
    pub measure: MeasureId,
    /// Rate in `[0, 1]` for MM2/MM3/MM5, mean theta in `[0, 2]` for MM4.
    pub value: f64,
    pub population: usize,
    pub seed: u64,
}

/// Source of the trivial map for the mis-ranking protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrivialMapSource {
    /// Centered circle (MM2).
    Generic,
    /// Binary Gaussian noise (MM3).
    Noise,
}

/// Keeps the images whose mean model score is highest: the top
/// `floor(n * keep_fraction)` ids (at least one). Sorting is stable with
/// ties broken by image id, so the kept set grows monotonically with the
/// fraction.
pub fn select_good_images(
    sets: &[CandidateSet],
    measure: MeasureId,
    keep_fraction: f64,
) -> Result<Vec<String>, Error> {
    if sets.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidKeepFraction(keep_fraction));
    }
    let mut scored: Vec<(f64, &str)> = sets
        .iter()
        .map(|set| Ok((mean_model_score(set, measure)?, set.image_id())))
        .collect::<Result<_, Error>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));

    let keep = ((sets.len() as f64 * keep_fraction).floor() as usize).max(1);
    Ok(scored[..keep].iter().map(|(_, id)| id.to_string()).collect())
}

fn mean_model_score(set: &CandidateSet, measure: MeasureId) -> Result<f64, Error> {
    let mut total = 0.0;
    for (_, fm) in set.models() {
        total += measure::evaluate(measure, set.gt(), fm)?.value;
    }
    Ok(total / set.models().len() as f64)
}

/// Fraction of images where the trivial map outscores the mean model score.
/// Noise maps are drawn from per-image streams, so the rate is a pure
/// function of `(corpus, measure, seed)`.
pub fn misrank_rate(
    sets: &[CandidateSet],
    source: TrivialMapSource,
    measure: MeasureId,
    seed: u64,
) -> Result<MetaResult, Error> {
    if sets.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut misranked = 0usize;
    for set in sets {
        let trivial = match source {
            TrivialMapSource::Generic => generic_circle(set.gt().dimensions()),
            TrivialMapSource::Noise => gaussian_noise_map_with(
                set.gt().dimensions(),
                crate::rng::stream_seed(seed, set.image_id()),
                NoiseConfig::default(),
            ),
        };
        let trivial_score = measure::evaluate(measure, set.gt(), &trivial)?.value;
        if trivial_score > mean_model_score(set, measure)? {
            misranked += 1;
        }
    }
    Ok(MetaResult {
        meta: match source {
            TrivialMapSource::Generic => MetaId::Mm2,
            TrivialMapSource::Noise => MetaId::Mm3,
        },
        measure,
        value: misranked as f64 / sets.len() as f64,
        population: sets.len(),
        seed,
    })
}

/// Mean ranking distance between the measure's order of each triple and the
/// human order. 0 means the measure always agrees with the humans, 2 means
/// it always reverses them.
pub fn mm4_human_theta(
    triples: &[HumanRankedTriple],
    measure: MeasureId,
) -> Result<MetaResult, Error> {
    if triples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = 0.0;
    for triple in triples {
        let mut measured = Vec::with_capacity(3);
        for (idx, map) in triple.maps.iter().enumerate() {
            let score = measure::evaluate(measure, &triple.gt, map)?.value;
            measured.push((idx.to_string(), score));
        }
        // Human scores descend along the stated order: best map gets 3.
        let human: Vec<(String, f64)> = triple
            .human_order
            .iter()
            .enumerate()
            .map(|(pos, &map_idx)| (map_idx.to_string(), (3 - pos) as f64))
            .collect();
        total += theta(
            &RankingList::new(measured).expect("indices are unique"),
            &RankingList::new(human).expect("permutation is unique"),
        )?;
    }
    Ok(MetaResult {
        meta: MetaId::Mm4,
        measure,
        value: total / triples.len() as f64,
        population: triples.len(),
        seed: 0,
    })
}

/// Fraction of good (image, model) pairs that score strictly higher against
/// a random other image's ground truth than against their own. The wrong GT
/// is resized nearest-neighbor when dimensions differ, leaving the model map
/// untouched.
pub fn mm5_gt_switch_rate(
    sets: &[CandidateSet],
    measure: MeasureId,
    seed: u64,
) -> Result<MetaResult, Error> {
    if sets.len() < 2 {
        return Err(Error::TooFewImages(sets.len()));
    }
    let mut population = 0usize;
    let mut switched = 0usize;
    for (index, set) in sets.iter().enumerate() {
        for (model_name, fm) in set.models() {
            let f1 = classic::f_beta(&classic::confusion(set.gt(), fm)?, 1.0).value;
            if f1 < GOOD_MAP_F1_THRESHOLD {
                continue;
            }
            population += 1;

            let label = format!("{}/{}/gt-switch", set.image_id(), model_name);
            let mut rng = stream_rng(seed, &label);
            let mut wrong_index = rng.random_range(0..sets.len() - 1);
            if wrong_index >= index {
                wrong_index += 1;
            }
            let wrong_gt = sets[wrong_index].gt().resize_nn(fm.dimensions());

            let right = measure::evaluate(measure, set.gt(), fm)?.value;
            let wrong = measure::evaluate(measure, &wrong_gt, fm)?.value;
            if wrong > right {
                switched += 1;
            }
        }
    }
    // No qualifying pairs means no observable switches.
    let value = if population == 0 { 0.0 } else { switched as f64 / population as f64 };
    Ok(MetaResult { meta: MetaId::Mm5, measure, value, population, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmeval_core::Dimensions;

    use crate::synth::{SynthConfig, generate_corpus, generic_circle};

    fn dims(w: u32, h: u32) -> Dimensions {
        Dimensions::new(w, h).unwrap()
    }

    fn simple_set(id: &str, gt: BinaryMap, fms: Vec<BinaryMap>) -> CandidateSet {
        let models = fms
            .into_iter()
            .enumerate()
            .map(|(i, m)| (format!("m{i}"), m))
            .collect();
        CandidateSet::new(id.to_string(), gt, models).unwrap()
    }

    #[test]
    fn candidate_set_validates() {
        let gt = generic_circle(dims(8, 8));
        assert!(matches!(
            CandidateSet::new("a".into(), gt.clone(), vec![]),
            Err(Error::NoModels(_))
        ));
        let wrong = generic_circle(dims(9, 9));
        assert!(CandidateSet::new("a".into(), gt, vec![("m".into(), wrong)]).is_err());
    }

    #[test]
    fn human_order_must_be_permutation() {
        let gt = generic_circle(dims(8, 8));
        let maps = [gt.clone(), gt.clone(), gt.clone()];
        assert!(
            HumanRankedTriple::new("a".into(), gt.clone(), maps.clone(), [0, 0, 1]).is_err()
        );
        assert!(HumanRankedTriple::new("a".into(), gt, maps, [2, 0, 1]).is_ok());
    }

    #[test]
    fn select_keeps_top_fraction_with_floor() {
        let gt = generic_circle(dims(16, 16));
        let good = simple_set("good", gt.clone(), vec![gt.clone()]);
        let bad = simple_set("bad", gt.clone(), vec![gt.complement()]);
        let sets = vec![bad.clone(), good.clone()];

        let all = select_good_images(&sets, MeasureId::EMeasure, 1.0).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0], "good");

        let half = select_good_images(&sets, MeasureId::EMeasure, 0.5).unwrap();
        assert_eq!(half, vec!["good".to_string()]);

        // floor(n * f) with a minimum of one id.
        let tiny = select_good_images(&sets, MeasureId::EMeasure, 0.1).unwrap();
        assert_eq!(tiny.len(), 1);
    }

    #[test]
    fn select_fraction_is_monotone() {
        let config = SynthConfig { images: 10, dims: dims(32, 32), seed: 9 };
        let sets = generate_corpus(&config).unwrap();
        let mut previous: Vec<String> = Vec::new();
        for f in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let kept = select_good_images(&sets, MeasureId::F1, f).unwrap();
            for id in &previous {
                assert!(kept.contains(id), "fraction {f} dropped {id}");
            }
            previous = kept;
        }
        assert_eq!(
            select_good_images(&sets, MeasureId::F1, 0.8).unwrap().len(),
            8
        );
    }

    #[test]
    fn select_rejects_bad_inputs() {
        assert!(matches!(
            select_good_images(&[], MeasureId::F1, 0.5),
            Err(Error::EmptyCorpus)
        ));
        let gt = generic_circle(dims(8, 8));
        let sets = vec![simple_set("a", gt.clone(), vec![gt])];
        assert!(matches!(
            select_good_images(&sets, MeasureId::F1, 0.0),
            Err(Error::InvalidKeepFraction(_))
        ));
        assert!(select_good_images(&sets, MeasureId::F1, 1.5).is_err());
    }

    #[test]
    fn misrank_zero_when_models_are_perfect() {
        // Every measure that attains its maximum only at fm = gt must give a
        // zero rate on an all-perfect corpus.
        let gt = generic_circle(dims(16, 16));
        let sets: Vec<CandidateSet> = (0..4)
            .map(|i| simple_set(&format!("img{i}"), gt.clone(), vec![gt.clone()]))
            .collect();
        for source in [TrivialMapSource::Generic, TrivialMapSource::Noise] {
            for measure in MeasureId::standard_set() {
                let result = misrank_rate(&sets, source, measure, 11).unwrap();
                assert_eq!(result.value, 0.0, "{source:?} / {measure}");
                assert_eq!(result.population, 4);
            }
        }
    }

    #[test]
    fn misrank_counts_forced_ordering() {
        // Adversarial fixture: the "trivial" generic circle IS the ground
        // truth, while the models are imperfect, so every image mis-ranks.
        let gt = generic_circle(dims(16, 16));
        let imperfect = {
            let mut values = gt.values().to_vec();
            for v in values.iter_mut().take(20) {
                *v = !*v;
            }
            BinaryMap::new(gt.dimensions(), values).unwrap()
        };
        let sets = vec![simple_set("img0", gt.clone(), vec![imperfect])];
        let result =
            misrank_rate(&sets, TrivialMapSource::Generic, MeasureId::EMeasure, 0).unwrap();
        assert_eq!(result.value, 1.0);
    }

    #[test]
    fn misrank_is_deterministic() {
        let config = SynthConfig { images: 6, dims: dims(32, 32), seed: 3 };
        let sets = generate_corpus(&config).unwrap();
        let a = misrank_rate(&sets, TrivialMapSource::Noise, MeasureId::F1, 5).unwrap();
        let b = misrank_rate(&sets, TrivialMapSource::Noise, MeasureId::F1, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mm4_agreement_and_reversal_endpoints() {
        let gt = generic_circle(dims(16, 16));
        // Three maps with strictly decreasing quality.
        let good = gt.clone();
        let mid = {
            let mut v = gt.values().to_vec();
            for x in v.iter_mut().take(12) {
                *x = !*x;
            }
            BinaryMap::new(gt.dimensions(), v).unwrap()
        };
        let poor = {
            let mut v = gt.values().to_vec();
            for x in v.iter_mut().take(60) {
                *x = !*x;
            }
            BinaryMap::new(gt.dimensions(), v).unwrap()
        };
        let maps = [good, mid, poor];

        let agree = HumanRankedTriple::new("a".into(), gt.clone(), maps.clone(), [0, 1, 2]).unwrap();
        let result = mm4_human_theta(&[agree], MeasureId::F1).unwrap();
        assert_eq!(result.value, 0.0);

        let reversed = HumanRankedTriple::new("a".into(), gt, maps, [2, 1, 0]).unwrap();
        let result = mm4_human_theta(&[reversed], MeasureId::F1).unwrap();
        assert_eq!(result.value, 2.0);
    }

    #[test]
    fn mm5_never_counts_perfect_models() {
        let config = SynthConfig { images: 4, dims: dims(32, 32), seed: 8 };
        let mut sets = generate_corpus(&config).unwrap();
        // Replace every model with the ground truth itself: score 1 is
        // maximal, so a strict improvement under the wrong GT is impossible.
        sets = sets
            .into_iter()
            .map(|s| {
                let gt = s.gt().clone();
                simple_set(s.image_id(), gt.clone(), vec![gt.clone(), gt.clone()])
            })
            .collect();
        let result = mm5_gt_switch_rate(&sets, MeasureId::EMeasure, 2).unwrap();
        assert_eq!(result.value, 0.0);
        assert_eq!(result.population, 8);
    }

    #[test]
    fn mm5_requires_two_images() {
        let gt = generic_circle(dims(8, 8));
        let sets = vec![simple_set("only", gt.clone(), vec![gt])];
        assert!(matches!(
            mm5_gt_switch_rate(&sets, MeasureId::F1, 0),
            Err(Error::TooFewImages(1))
        ));
    }

    #[test]
    fn mm5_duplicate_image_is_never_counted() {
        // Both images share the same GT, so the "wrong" GT equals the right
        // one and the strict inequality never fires.
        let gt = generic_circle(dims(16, 16));
        let sets = vec![
            simple_set("a", gt.clone(), vec![gt.clone()]),
            simple_set("b", gt.clone(), vec![gt.clone()]),
        ];
        let result = mm5_gt_switch_rate(&sets, MeasureId::F1, 0).unwrap();
        assert_eq!(result.value, 0.0);
        assert_eq!(result.population, 2);
    }
}
