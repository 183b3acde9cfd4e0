use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayKind, TuningOrder};
use crate::waveform::CombSpec;

/// Element → comb tone assignment (tones are 1-based). Always a bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuningPlan {
    tones: Vec<usize>,
}

impl TuningPlan {
    pub fn from_tones(tones: &[usize]) -> Result<Self> {
        let n = tones.len();
        let mut seen = vec![false; n];
        for &t in tones {
            if t == 0 || t > n {
                return Err(Error::ToneIndex { index: t, count: n });
            }
            if std::mem::replace(&mut seen[t - 1], true) {
                return Err(Error::InvalidParameter(format!("tone {t} assigned twice")));
            }
        }
        Ok(Self { tones: tones.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    pub fn tone_for(&self, element: usize) -> usize {
        self.tones[element]
    }

    pub fn tones(&self) -> &[usize] {
        &self.tones
    }
}

/// Hands comb tones to the elements of a linear array starting from the
/// low-x edge, in ascending or descending frequency order.
pub fn assign_tuning(geom: &ArrayGeometry, comb: &CombSpec) -> Result<TuningPlan> {
    geom.validate()?;
    if geom.kind != ArrayKind::Linear {
        return Err(Error::UnsupportedGeometry("tone assignment is defined for linear arrays".into()));
    }
    if geom.m != comb.num_tones {
        return Err(Error::CountMismatch { elements: geom.m, tones: comb.num_tones });
    }
    let n = geom.m;
    let tones: Vec<usize> = match geom.tuning_order {
        TuningOrder::Ascending => (1..=n).collect(),
        TuningOrder::Descending => (1..=n).rev().collect(),
    };
    Ok(TuningPlan { tones })
}
