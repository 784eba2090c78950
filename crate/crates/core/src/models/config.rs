use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::neural::Composition;
use crate::transition::DEFAULT_MAX_OPEN_NTS;

/// Model hyperparameters. Read from a plain `key = value` file; `#` starts
/// a comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub dropout: f64,
    pub max_open_nts: usize,
    /// Number of word classes; `None` picks about sqrt(|vocab|).
    pub classes: Option<usize>,
    pub composition: Composition,
    pub seed: u64,
}

impl ModelConfig {
    pub fn generative() -> Self {
        Self {
            embed_dim: 256,
            hidden_dim: 256,
            layers: 2,
            dropout: 0.3,
            max_open_nts: DEFAULT_MAX_OPEN_NTS,
            classes: None,
            composition: Composition::Correct,
            seed: 1,
        }
    }

    pub fn discriminative() -> Self {
        Self {
            embed_dim: 128,
            hidden_dim: 128,
            dropout: 0.2,
            ..Self::generative()
        }
    }

    pub fn lstm_lm() -> Self {
        Self::generative()
    }

    /// Small dimensions for tests and toy experiments.
    pub fn tiny(dim: usize) -> Self {
        Self {
            embed_dim: dim,
            hidden_dim: dim,
            layers: 1,
            dropout: 0.0,
            ..Self::generative()
        }
    }

    /// Overrides fields of `self` with the assignments in `text`.
    pub fn parse_overrides(mut self, text: &str) -> Result<Self, ModelError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ModelError::Config { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "dim" => {
                    self.embed_dim = num(value)?;
                    self.hidden_dim = self.embed_dim;
                }
                "embed_dim" => self.embed_dim = num(value)?,
                "hidden_dim" => self.hidden_dim = num(value)?,
                "layers" => self.layers = num(value)?,
                "dropout" => self.dropout = value.parse().map_err(|e| err(format!("{key}: {e}")))?,
                "cap" | "max_open_nts" => self.max_open_nts = num(value)?,
                "classes" => {
                    self.classes = match value {
                        "auto" => None,
                        v => Some(num(v)?),
                    }
                }
                "composition" => self.composition = value.parse().map_err(err)?,
                "seed" => self.seed = value.parse().map_err(|e| err(format!("{key}: {e}")))?,
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |message: &str| {
            Err(ModelError::Config {
                line: 0,
                message: message.to_string(),
            })
        };
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.layers == 0 {
            return bad("dimensions and layer count must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.max_open_nts == 0 {
            return bad("cap must be positive");
        }
        if self.classes == Some(0) {
            return bad("classes must be positive");
        }
        Ok(())
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "embed_dim = {}", self.embed_dim)?;
        writeln!(f, "hidden_dim = {}", self.hidden_dim)?;
        writeln!(f, "layers = {}", self.layers)?;
        writeln!(f, "dropout = {}", self.dropout)?;
        writeln!(f, "cap = {}", self.max_open_nts)?;
        match self.classes {
            Some(k) => writeln!(f, "classes = {k}")?,
            None => writeln!(f, "classes = auto")?,
        }
        writeln!(f, "composition = {}", self.composition)?;
        writeln!(f, "seed = {}", self.seed)
    }
}
