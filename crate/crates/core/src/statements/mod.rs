//! From financial statements to credit networks: the extraction-record
//! grammar, synthetic statements, record aggregation with anomaly
//! detection, prompts, the LLM client boundary and plan replies.

mod aggregate;
mod lexer;
mod llm;
mod plan_reply;
mod prompt;
mod record;
mod render;

pub use aggregate::{
    aggregate_parsed, aggregate_statements, AggregatedNetwork, AggregationMode, AggregationOptions,
    AggregationReport, AggregationState, Anomaly, AnomalyDetail, AnomalyKind, DEFAULT_CONFLICT_TOLERANCE,
};
pub use llm::{
    llm_suggest, llm_translate, read_execution_prompt, translate_corpus, DelegatingMock, HttpClient,
    HttpSettings, LlmClient, LlmError, ScriptEntry, ScriptedMock, SuggestError, TranslateError,
};
pub use plan_reply::{parse_plan_reply, render_plan_block, PlanReplyError, ProposedPlan};
pub use prompt::{
    build_execution_prompt, build_translation_prompt, default_execution_prompt, default_task,
    operation_description, CLEARING_SOURCE, DEFAULT_OBJECTIVE, EXTRACTION_INSTRUCTIONS,
    NETWORK_INTRODUCTION,
};
pub use record::{
    parse_extraction_record, parse_record_syntax, records_from_network, render_extraction_record,
    ExtractionRecord, Liability, RecordError,
};
pub use render::{render_statement, RenderError, StatementTemplate};
