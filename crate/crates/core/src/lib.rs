//! Causal question answering over tabular data: parse a question into a
//! structured query, run the matching estimator, and narrate the result.
//! Also ships the synthetic data generators, question benches and
//! evaluation harness used to check each step.

pub mod datagen;
pub mod dataset;
pub mod engine;
pub mod eval;
pub mod forge;
pub mod llm;
pub mod narrator;
pub mod parser;
pub mod pipeline;
pub mod result;
pub mod rng;
pub mod schema;
pub mod text;

pub use dataset::TabularDataset;
pub use engine::{dispatch, EngineConfig, EngineError, MethodId, Registry};
pub use eval::EvalReport;
pub use forge::{InterpretBenchRecord, QueryBenchRecord, TopicHierarchy};
pub use narrator::Interpretation;
pub use parser::{interpret, ParseContext, ParseError};
pub use pipeline::{Pipeline, PipelineError, PipelineOutput};
pub use result::{Graph, ToolResult};
pub use schema::{parse_query_json, serialize_query, validate_query, CausalQuery, ConditionClause, Nodes, Scalar, Task};
