//! Least-cost nutrient-adequate diets for whole households.
//!
//! The pipeline: load or synthesize a dataset (`data`), turn household
//! members into requirement bounds (`requirements`), solve one least-cost
//! diet LP per person or per household (`lp`), assemble the monthly cost
//! panel under the individualized and shared scenarios (`panel`), estimate
//! seasonal factors and gaps (`seasonality`), and score affordability against
//! survey expenditure (`afford`).

pub mod data;
pub mod lp;
pub mod panel;
pub mod requirements;
pub mod time;
