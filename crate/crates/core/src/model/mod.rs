//! Scenario definition: domain and spectral basis, coefficient fields,
//! exponent schedules and initial data.

pub mod domain;
pub mod fields;
pub mod scenario;
pub mod schedule;

pub use domain::{mean_coefficient, project_initial, DomainKind, Mode, Point, Projection, SpectralDomain};
pub use fields::{Bounds, CoefficientBounds, CoefficientSet, Field, Modulation, Profile};
pub use scenario::{InitialField, Scenario, ScenarioConfig, SolverSettings, StartTime};
pub use schedule::{ExponentSchedule, Schedule, SwitchTimes};
