//! Translation-based augmentation: quota planning and plan execution.

mod execute;
mod plan;
mod translate;

pub use execute::{execute_plan, AugmentDiagnostic, ExecuteOptions, ExecuteOutput};
pub use plan::{
    plan_qc_augmentation, plan_qi_augmentation, LanguagePlan, TranslationPlan, QC_DEFAULT_QUOTA,
    QI_DEFAULT_QUOTA,
};
pub use translate::{
    HttpTranslator, PrefixTranslator, TranslateError, TranslateRequest, TranslateResponse,
    Translator,
};

use crate::corpus::{LanguageTag, Task};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("no eligible source records")]
    EmptyEligiblePool,
    #[error("target language {0} listed twice")]
    DuplicateTarget(LanguageTag),
    #[error("plan is for {plan} but records are {records}")]
    TaskMismatch { plan: Task, records: Task },
    #[error("plan was built from {plan} records but {records} were supplied")]
    SourceCountMismatch { plan: usize, records: usize },
    #[error("invalid plan: {0}")]
    BadPlan(String),
    #[error("invalid options: {0}")]
    BadOptions(String),
    #[error("translator unavailable: {0}")]
    TranslatorUnavailable(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
