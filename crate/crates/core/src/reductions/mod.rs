//! Constructions between the problems, with witness builders and audits.

pub mod audit;
pub mod ccs_padding;
pub mod dtw_from_mscs;
pub mod mscs_from_rmcc;

pub use audit::{position_cost_audit, AuditReport, PositionAudit, PositionClass};
pub use ccs_padding::{mscs_g_to_ccs, pad_shift};
pub use dtw_from_mscs::{
    mscs_phi_to_dtw, witness_mean_from_shift, BlockMap, DtwInstance, DtwOverrides, DtwReductionParams, WitnessMean,
};
pub use mscs_from_rmcc::{
    audit_columns, rmcc_to_mscs, witness_shift_from_clique, ColumnAudit, MscsOverrides, MscsReductionParams,
};
