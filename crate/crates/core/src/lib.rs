//! Graduate-to-publication record linkage and career tracking.
//!
//! The crate is organised as a batch pipeline:
//!
//! * [`records`] ingests graduates, publications and patent tables.
//! * [`names`] parses and compares personal names.
//! * [`blocking`] enumerates candidate graduate/authorship links.
//! * [`features`] turns each candidate into a numeric feature vector.
//! * [`linkmodel`] trains the two-stage feed-forward cascade and emits the linked sample.
//! * [`geo`] resolves affiliation strings to countries.
//! * [`migration`] detects emigration events from yearly location series.
//! * [`analytics`] computes classification metrics and emigration/citation aggregates.
//! * [`pipeline`] wires the stages together with file checkpoints.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod analytics;
pub mod blocking;
pub mod features;
pub mod geo;
pub mod linkmodel;
pub mod migration;
pub mod names;
pub mod par;
pub mod pipeline;
pub mod records;
pub mod synth;

mod jsonl;

pub use blocking::{CandidateLink, MatchWindow};
pub use features::{FeatureLayout, FeatureVector};
pub use linkmodel::{CascadeModel, MlpModel};
pub use names::{MatchClass, NameParts, NicknameTable};
pub use records::{Corpus, GraduateRecord, PublicationRecord};
