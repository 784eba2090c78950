//! Recurrent neural network grammars.
//!
//! Top-down transition systems for parsing and generation, neural models of
//! transition sequences (a generative joint model and a discriminative
//! parser), maximum-likelihood training, importance-sampling inference and
//! bracket scoring.

pub mod evaluation;
pub mod inference;
pub mod models;
pub mod neural;
pub mod transition;
pub mod training;
pub mod treebank;
