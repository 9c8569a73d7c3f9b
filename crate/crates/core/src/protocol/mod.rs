//! Enrollment, CRP bookkeeping and verification decisions.

mod database;
mod enroll;
mod policy;

pub use database::{
    audit_collisions, CollisionReport, CrpDatabase, CrpRecord, DbHeader, EnrollmentInfo, DB_FORMAT_VERSION,
};
pub use enroll::{enroll, EnrollParams};
pub use policy::{calibrate_policy, l2_threshold_rule, verify, AuthDecision, CalibrationInfo, VerifyPolicy};
