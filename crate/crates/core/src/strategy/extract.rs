//! From a checked CLA4 proof to a strategy for its last line.

use super::{axiom_strategy_for, compile_cl12, induction_compose, silent_strategy, Strategy, StrategyError};
use crate::cla4::{check_cla4, check_lc, parse_cla4, Cla4Options, Cla4Proof, Justification};
use crate::cl12::Checker;
use crate::syntax::{Formula, QuantOp};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;

pub const BUNDLE_VERSION: u32 = 1;

/// Everything needed to rebuild an extracted strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: u32,
    pub game: String,
    pub proof: String,
    pub proof_sha256: String,
    pub certificate: String,
}

impl Bundle {
    pub fn new(proof: &Cla4Proof, s: &Strategy) -> Self {
        let text = proof.to_text();
        Bundle {
            version: BUNDLE_VERSION,
            game: s.game.to_string(),
            proof_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            proof: text,
            certificate: s.certificate.to_text(),
        }
    }
}

/// Re-checks and re-extracts a bundle.
pub fn load_bundle(b: &Bundle) -> Result<Strategy, StrategyError> {
    if b.version != BUNDLE_VERSION {
        return Err(StrategyError::Invalid(format!("unsupported bundle version {}", b.version)));
    }
    if hex::encode(Sha256::digest(b.proof.as_bytes())) != b.proof_sha256 {
        return Err(StrategyError::Invalid("proof hash mismatch".into()));
    }
    let proof = parse_cla4(&b.proof, None).map_err(|e| StrategyError::Invalid(e.to_string()))?;
    extract(&proof)
}

pub fn extract(proof: &Cla4Proof) -> Result<Strategy, StrategyError> {
    let report = check_cla4(proof, &Cla4Options::default());
    if !report.extraction_ready {
        return Err(StrategyError::NotReady(report.offending));
    }
    let mut checker = Checker::default();
    let mut done: HashMap<String, Strategy> = HashMap::new();
    let mut last = None;
    for line in &proof.lines {
        let game = line.sentence.closure(QuantOp::Meet);
        let get = |l: &str| done.get(l).cloned().ok_or_else(|| StrategyError::Invalid(format!("no strategy for {l}")));
        let s = match &line.just {
            Justification::Axiom(k) => axiom_strategy_for(*k, game.clone()),
            Justification::Pa(_) => silent_strategy(game.clone()),
            Justification::Lc { premises, proof: attached } => {
                let ps: Vec<Strategy> = premises.iter().map(|p| get(p)).collect::<Result<_, _>>()?;
                let sentences: Vec<&Formula> = premises
                    .iter()
                    .map(|p| &proof.get(p).expect("checked").sentence)
                    .collect();
                let ok = check_lc(&line.sentence, &sentences, attached.as_ref(), &mut checker).map_err(StrategyError::Invalid)?;
                let concl = ok.proof.conclusion().expect("checked").clone();
                // providers in the order of the proof's antecedents
                let mut pool: Vec<Option<Strategy>> = ps.into_iter().map(Some).collect();
                let mut providers = Vec::new();
                for a in &concl.ant {
                    let i = pool
                        .iter()
                        .position(|p| p.as_ref().is_some_and(|p| p.game.alpha_eq(a)))
                        .ok_or_else(|| StrategyError::Invalid(format!("no premise plays {a}")))?;
                    providers.push(pool[i].take().expect("present"));
                }
                let mut s = compile_cl12(&ok.proof, providers)?;
                s.game = game.clone();
                s
            }
            Justification::Induction { var, basis, left, right } => {
                induction_compose(&game, var, &get(basis)?, &get(left)?, &get(right)?)?
            }
        };
        let mut s = s;
        s.name = line.label.clone();
        done.insert(line.label.clone(), s.clone());
        last = Some(s);
    }
    last.ok_or_else(|| StrategyError::Invalid("empty proof".into()))
}
