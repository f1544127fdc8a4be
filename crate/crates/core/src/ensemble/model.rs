use alloc::vec::Vec;

use crate::error::invalid;
use crate::numerics::MlpParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnsembleKind {
    /// Members trained from scratch with different initializations.
    Standard,
    /// Members are epoch snapshots of a single training run.
    #[cfg_attr(feature = "serde", serde(rename = "self"))]
    SelfEnsemble,
    /// Members are the stages of a gated cascade.
    Cascade,
}

/// Where a member generator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub init_seed: u64,
    pub epoch: usize,
    /// 0-based cascade stage.
    pub stage: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub generator: MlpParams,
    pub provenance: Provenance,
}

/// A validated collection of member generators.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    kind: EnsembleKind,
    members: Vec<Member>,
    stage_shares: Option<Vec<f64>>,
    gate_thresholds: Option<Vec<f64>>,
}

impl EnsembleModel {
    /// Checks the per-kind invariants:
    /// standard members have distinct init seeds; self members share one
    /// init seed and have strictly increasing epochs; cascades carry one
    /// share per stage (summing to 1) and one threshold per gate.
    pub fn new(
        kind: EnsembleKind,
        members: Vec<Member>,
        stage_shares: Option<Vec<f64>>,
        gate_thresholds: Option<Vec<f64>>,
    ) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("ensemble members"))?;
        let (nd, dd) = (first.generator.input_dim(), first.generator.output_dim());
        if members
            .iter()
            .any(|m| m.generator.input_dim() != nd || m.generator.output_dim() != dd)
        {
            return Err(invalid("ensemble members must share noise and data dimensions"));
        }
        match kind {
            EnsembleKind::Standard => {
                for (i, a) in members.iter().enumerate() {
                    if members[..i]
                        .iter()
                        .any(|b| b.provenance.init_seed == a.provenance.init_seed)
                    {
                        return Err(Error::DuplicateSeed(a.provenance.init_seed));
                    }
                }
            }
            EnsembleKind::SelfEnsemble => {
                if members
                    .iter()
                    .any(|m| m.provenance.init_seed != first.provenance.init_seed)
                {
                    return Err(invalid("self-ensemble members must share one init seed"));
                }
                if members
                    .windows(2)
                    .any(|w| w[0].provenance.epoch >= w[1].provenance.epoch)
                {
                    return Err(invalid("self-ensemble epochs must be strictly increasing"));
                }
            }
            EnsembleKind::Cascade => {
                let shares = stage_shares
                    .as_ref()
                    .ok_or_else(|| invalid("cascade ensembles need stage shares"))?;
                if shares.len() != members.len() {
                    return Err(Error::Shape {
                        context: "cascade stage shares",
                        expected: members.len(),
                        found: shares.len(),
                    });
                }
                let sum: f64 = shares.iter().sum();
                if shares.iter().any(|&s| s.is_nan() || s < 0.0) || libm::fabs(sum - 1.0) > 1e-12 {
                    return Err(invalid("stage shares must be non-negative and sum to 1"));
                }
                if let Some(t) = &gate_thresholds {
                    if t.len() + 1 != members.len() {
                        return Err(Error::Shape {
                            context: "cascade gate thresholds",
                            expected: members.len() - 1,
                            found: t.len(),
                        });
                    }
                }
            }
        }
        if kind != EnsembleKind::Cascade && (stage_shares.is_some() || gate_thresholds.is_some()) {
            return Err(invalid("only cascade ensembles carry stage shares and gate thresholds"));
        }
        Ok(Self {
            kind,
            members,
            stage_shares,
            gate_thresholds,
        })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn stage_shares(&self) -> Option<&[f64]> {
        self.stage_shares.as_deref()
    }

    pub fn gate_thresholds(&self) -> Option<&[f64]> {
        self.gate_thresholds.as_deref()
    }

    pub fn noise_dim(&self) -> usize {
        self.members[0].generator.input_dim()
    }

    pub fn data_dim(&self) -> usize {
        self.members[0].generator.output_dim()
    }
}
