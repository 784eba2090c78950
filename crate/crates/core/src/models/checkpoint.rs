use serde::{Deserialize, Serialize};

use crate::neural::{ParamStore, Real};
use crate::treebank::{Vocab, WordClasses};

use super::{ModelConfig, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Generative,
    Discriminative,
    LstmLm,
}

/// JSON metadata stored in the checkpoint header.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct Meta {
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub classes: WordClasses,
}

pub(crate) fn save<T: Real>(
    store: &ParamStore<T>,
    kind: ModelKind,
    config: &ModelConfig,
    vocab: &Vocab,
    classes: &WordClasses,
) -> Vec<u8> {
    let meta = serde_json::json!({
        "kind": kind,
        "config": config,
        "vocab": vocab,
        "classes": classes,
    });
    store.save(&meta.to_string())
}

pub(crate) fn load<T: Real>(bytes: &[u8], expected: ModelKind) -> Result<(ParamStore<T>, Meta), ModelError> {
    let (store, meta, _) = ParamStore::<T>::load(bytes)?;
    let meta: Meta = serde_json::from_str(&meta).map_err(|e| ModelError::Checkpoint(format!("metadata: {e}")))?;
    if meta.kind != expected {
        return Err(ModelError::Checkpoint(format!(
            "expected a {expected:?} checkpoint, found {:?}",
            meta.kind
        )));
    }
    Ok((store, meta))
}

/// The kind of model stored in a checkpoint.
pub fn peek_kind(bytes: &[u8]) -> Result<ModelKind, ModelError> {
    let (_, meta, _) = ParamStore::<f32>::load(bytes)?;
    let meta: Meta = serde_json::from_str(&meta).map_err(|e| ModelError::Checkpoint(format!("metadata: {e}")))?;
    Ok(meta.kind)
}
