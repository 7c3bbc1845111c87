//! Study data: label schemes, annotation panels, predictions and pet demographics.

mod cohort;
mod io;
mod labels;
mod table;

pub use cohort::{
    cohort_summary, life_stage, CohortReport, FacetCount, LifeStage, PetRecord, Sex, Species, SpeciesSummary,
};
pub(crate) use io::{open, CsvRows, Row};
pub use io::{
    parse_annotations, parse_pets, parse_predictions, read_annotations, read_pets, read_predictions, write_annotations,
    write_predictions, PredictionRecord, ANNOTATIONS_HEADER, PETS_HEADER, PREDICTIONS_HEADER,
};
pub use labels::{Label, LabelScheme};
pub use table::AnnotationTable;
