//! Measure registry: string ids for the CLI and a single dispatch point.

use std::fmt;
use std::str::FromStr;

use crate::map::BinaryMap;
use crate::{Error, Score, classic, emeasure};

/// Identifier of an evaluation measure, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureId {
    /// Enhanced-alignment measure (`emeasure`).
    EMeasure,
    /// F1, i.e. F-beta with beta = 1 (`f1`).
    F1,
    /// F-beta with an explicit beta (`fbeta:<beta>`).
    FBeta(f64),
    /// Jaccard index / intersection-over-union (`iou`).
    Iou,
    /// Dependency-weighted F-beta with beta = 1 (`fbw`).
    Fbw,
}

impl MeasureId {
    /// All fixed-parameter measures, the default set for batch runs.
    pub fn standard_set() -> Vec<MeasureId> {
        vec![MeasureId::EMeasure, MeasureId::F1, MeasureId::Iou, MeasureId::Fbw]
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureId::EMeasure => write!(f, "emeasure"),
            MeasureId::F1 => write!(f, "f1"),
            MeasureId::FBeta(beta) => write!(f, "fbeta:{beta}"),
            MeasureId::Iou => write!(f, "iou"),
            MeasureId::Fbw => write!(f, "fbw"),
        }
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "emeasure" => Ok(MeasureId::EMeasure),
            "f1" => Ok(MeasureId::F1),
            "iou" => Ok(MeasureId::Iou),
            "fbw" => Ok(MeasureId::Fbw),
            _ => {
                let beta = s
                    .strip_prefix("fbeta:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .filter(|b| b.is_finite() && *b > 0.0)
                    .ok_or_else(|| Error::InvalidMeasureId(s.to_string()))?;
                Ok(MeasureId::FBeta(beta))
            }
        }
    }
}

/// Evaluates one measure on a GT/FM pair.
pub fn evaluate(measure: MeasureId, gt: &BinaryMap, fm: &BinaryMap) -> Result<Score, Error> {
    match measure {
        MeasureId::EMeasure => emeasure::e_measure(gt, fm),
        MeasureId::F1 => Ok(classic::f_beta(&classic::confusion(gt, fm)?, 1.0)),
        MeasureId::FBeta(beta) => Ok(classic::f_beta(&classic::confusion(gt, fm)?, beta)),
        MeasureId::Iou => Ok(classic::iou_ji(&classic::confusion(gt, fm)?)),
        MeasureId::Fbw => classic::fbw(gt, fm, 1.0, classic::FbwWeighting::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::Dimensions;

    #[test]
    fn id_round_trip() {
        for id in ["emeasure", "f1", "iou", "fbw", "fbeta:0.3"] {
            let parsed: MeasureId = id.parse().unwrap();
            assert_eq!(parsed.to_string(), id);
        }
        assert!("dice".parse::<MeasureId>().is_err());
        assert!("fbeta:-1".parse::<MeasureId>().is_err());
        assert!("fbeta:abc".parse::<MeasureId>().is_err());
    }

    #[test]
    fn evaluate_dispatches_per_measure() {
        let dims = Dimensions::new(2, 2).unwrap();
        let gt = BinaryMap::new(dims, vec![true, false, false, false]).unwrap();
        for id in MeasureId::standard_set() {
            let s = evaluate(id, &gt, &gt).unwrap();
            assert_eq!(s.value, 1.0, "{id} on a perfect pair");
        }
    }
}
