use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use qtrack::channels::{self, Bloch, ChoiMatrix, DensityMatrix, KrausSet};
use qtrack::mat::MatrixJson;
use qtrack::multistep::{AffineQubitMap, ChainTask};
use qtrack::sequence::WeightedSequence;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

/// Parse a JSON file, reporting the line, column and field path of any error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Failure::validation(format!("{}: field '{}': {}", path.display(), e.path(), e.inner()))
    })
}

/// A state given either by its qubit Bloch vector or by its density matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    #[serde(default)]
    pub bloch: Option<[f64; 3]>,
    #[serde(default)]
    pub matrix: Option<MatrixJson>,
}

impl StateJson {
    pub fn to_state(&self) -> Result<DensityMatrix, Failure> {
        match (&self.bloch, &self.matrix) {
            (Some(b), None) => Ok(DensityMatrix::from_bloch(&Bloch::from(*b))?),
            (None, Some(m)) => Ok(DensityMatrix::new(m.to_matrix()?)?),
            _ => Err(Failure::validation("a state needs exactly one of 'bloch' or 'matrix'")),
        }
    }
}

/// Two states, as used by `distances` and `discriminate`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub rho: StateJson,
    pub sigma: StateJson,
}

impl PairJson {
    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix), Failure> {
        Ok((self.rho.to_state()?, self.sigma.to_state()?))
    }
}

/// Sources, targets and priorities of a tracking task.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskJson {
    pub sources: Vec<StateJson>,
    pub targets: Vec<StateJson>,
    /// Uniform when omitted.
    #[serde(default)]
    pub priorities: Option<Vec<f64>>,
}

impl TaskJson {
    pub fn sequences(&self) -> Result<(WeightedSequence, WeightedSequence), Failure> {
        let n = self.sources.len();
        if n == 0 || self.targets.len() != n {
            return Err(Failure::validation(format!("{n} sources and {} targets", self.targets.len())));
        }
        let priorities = match &self.priorities {
            Some(p) if p.len() == n => p.clone(),
            Some(p) => return Err(Failure::validation(format!("{} priorities for {n} states", p.len()))),
            None => vec![1.0 / n as f64; n],
        };
        let build = |states: &[StateJson]| -> Result<WeightedSequence, Failure> {
            let items = priorities
                .iter()
                .zip(states)
                .map(|(&p, s)| Ok((p, s.to_state()?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            Ok(WeightedSequence::new(items)?)
        };
        Ok((build(&self.sources)?, build(&self.targets)?))
    }

    /// The two-state qubit form used by the closed-form tracker.
    pub fn pair(&self) -> Result<([DensityMatrix; 2], [DensityMatrix; 2], [f64; 2]), Failure> {
        let (src, tgt) = self.sequences()?;
        if src.len() != 2 || src.dim() != 2 {
            return Err(Failure::validation("this command takes two qubit sources and two qubit targets"));
        }
        let s: Vec<DensityMatrix> = src.states().cloned().collect();
        let t: Vec<DensityMatrix> = tgt.states().cloned().collect();
        let p = src.priorities();
        Ok(([s[0].clone(), s[1].clone()], [t[0].clone(), t[1].clone()], [p[0], p[1]]))
    }
}

/// A channel given by Kraus operators, a Choi matrix or a unitary.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    #[serde(default)]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default)]
    pub choi: Option<MatrixJson>,
    #[serde(default)]
    pub unitary: Option<MatrixJson>,
}

impl ChannelJson {
    pub fn to_choi(&self) -> Result<ChoiMatrix, Failure> {
        match (&self.kraus, &self.choi, &self.unitary) {
            (Some(ks), None, None) => {
                let ops = ks.iter().map(|k| k.to_matrix()).collect::<qtrack::Result<Vec<_>>>()?;
                Ok(channels::choi_from_kraus(&KrausSet::new(ops)?)?)
            }
            (None, Some(c), None) => Ok(ChoiMatrix::new(c.to_matrix()?)?),
            (None, None, Some(u)) => Ok(channels::unitary_channel(&u.to_matrix()?)),
            _ => Err(Failure::validation("a channel needs exactly one of 'kraus', 'choi' or 'unitary'")),
        }
    }
}

/// One noise step: an extremal map `(l1, l2)` or an explicit affine map.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseJson {
    #[serde(default)]
    pub extremal: Option<[f64; 2]>,
    /// Row-major 3x3 matrix acting on Bloch vectors.
    #[serde(default)]
    pub linear: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub shift: Option<[f64; 3]>,
}

impl NoiseJson {
    pub fn to_map(&self) -> Result<AffineQubitMap, Failure> {
        let map = match (&self.extremal, &self.linear) {
            (Some([l1, l2]), None) if self.shift.is_none() => AffineQubitMap::extremal(*l1, *l2)?,
            (None, Some(rows)) => {
                let linear = Matrix3::from_fn(|i, j| rows[i][j]);
                AffineQubitMap::new(linear, Vector3::from(self.shift.unwrap_or([0.0; 3])))
            }
            _ => return Err(Failure::validation("a noise step needs either 'extremal' or 'linear' (with optional 'shift')")),
        };
        map.choi()?;
        Ok(map)
    }
}

/// A pair task for the multi-step solver.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainTaskJson {
    #[serde(default)]
    pub sources: Option<[[f64; 3]; 2]>,
    #[serde(default)]
    pub targets: Option<[[f64; 3]; 2]>,
    #[serde(default)]
    pub priorities: Option<[f64; 2]>,
    /// Stabilize the pure pair at `(cos a, 0, +-sin a)` instead.
    #[serde(default)]
    pub half_angle: Option<f64>,
}

impl ChainTaskJson {
    pub fn to_task(&self) -> Result<ChainTask, Failure> {
        match (self.half_angle, self.sources, self.targets) {
            (Some(a), None, None) if self.priorities.is_none() => Ok(ChainTask::stabilize_pair(a)),
            (None, Some(s), Some(t)) => Ok(ChainTask::new(
                [Bloch::from(s[0]), Bloch::from(s[1])],
                [Bloch::from(t[0]), Bloch::from(t[1])],
                self.priorities.unwrap_or([0.5, 0.5]),
            )?),
            _ => Err(Failure::validation("a chain task needs either 'half_angle' or 'sources' and 'targets'")),
        }
    }
}
