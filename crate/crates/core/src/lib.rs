//! Encoding of pseudo-Boolean and linear integer constraints into CNF, with
//! instance features and a learned per-instance choice of encoding.

pub mod amo;
pub mod check;
pub mod cnf;
pub mod encoders;
pub mod error;
pub mod features;
pub mod forest;
pub mod model;
pub mod pipeline;
pub mod runtime;
pub mod selector;
pub mod varenc;

pub use amo::{AmoDetector, AmoGroup, PbAmoConstraint, PbAmoResult};
pub use cnf::{CnfBuilder, Lit, Prop, DEFAULT_CLAUSE_CAP};
pub use encoders::{encode_instance, CnfFormula, Config, EncodingName};
pub use error::EncodeError;
pub use model::{parse_instance, Cmp, ConstraintClass, Domain, Instance, LinearConstraint, ModelError, VarId, Variable};
pub use varenc::{Atom, Need, VarEncoding};
pub use features::{extract_lipb, feature_names, stat_kit, FeatureVector, Stats};
pub use runtime::{make_split, par10, references, RuntimeMatrix, Split, SplitMode};
pub use forest::{Forest, ForestParams};
pub use features::{FeatureTable, FeatureTableError};
pub use selector::{build_portfolio, sample_weight, PairwiseSelector, Portfolio, Selector, SelectorError, SingleSelector, TrainOptions, TrainedSelector};
pub use pipeline::{run_pipeline, Aggregate, PipelineOptions, Report, SelectorKind};
