//! Question → intent → estimate → narrative, over one table.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::TabularDataset;
use crate::engine::{resolve_query, EngineConfig, EngineError, MethodId, Registry};
use crate::narrator::{narrate, Backend, Interpretation, NarrateError};
use crate::parser::{Interpreter, ParseContext, ParseError, RuleInterpreter};
use crate::result::ToolResult;
use crate::schema::CausalQuery;

/// Failure, tagged with the stage that raised it.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("interpretation: {0}")]
    Interpret(#[from] ParseError),
    #[error("estimation: {0}")]
    Engine(#[from] EngineError),
    #[error("narration: {0}")]
    Narrate(#[from] NarrateError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOutput {
    pub intent: CausalQuery,
    pub method: MethodId,
    pub result: ToolResult,
    pub interpretation: Interpretation,
}

pub struct Pipeline {
    pub interpreter: Box<dyn Interpreter + Send + Sync>,
    pub registry: Registry,
    pub engine: EngineConfig,
    pub narrator: Backend,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            interpreter: Box::new(RuleInterpreter),
            registry: Registry::default(),
            engine: EngineConfig::default(),
            narrator: Backend::Template,
        }
    }
}

impl Pipeline {
    /// Interprets the question only.
    pub fn intent(&self, question: &str, d: &TabularDataset) -> Result<CausalQuery, PipelineError> {
        let ctx = ParseContext::with_columns(d.names().to_vec());
        Ok(self.interpreter.interpret(question, &ctx)?)
    }

    /// Runs all three steps. The reported intent has its variables resolved
    /// to column names.
    pub fn run(&self, question: &str, d: &TabularDataset) -> Result<PipelineOutput, PipelineError> {
        let intent = self.intent(question, d)?;
        self.run_intent(question, intent, d)
    }

    pub fn run_intent(&self, question: &str, intent: CausalQuery, d: &TabularDataset) -> Result<PipelineOutput, PipelineError> {
        let (method, result) = self.registry.dispatch(&intent, d, &self.engine)?;
        let intent = resolve_query(&intent, d)?;
        let interpretation = narrate(question, &intent, &result, &method, &self.narrator)?;
        Ok(PipelineOutput { intent, method, result, interpretation })
    }
}
