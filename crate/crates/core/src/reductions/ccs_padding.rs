//! f-MSCS with the padded consensus cost `g` to Circular Consensus String.
//!
//! Appending `k-2` all-ones strings turns a weight-`w` column into a
//! weight-`(w+k-2)` column over `2k-2` rows, and `g_k(w) = ccs_{2k-2}(w+k-2)`.

use crate::costfn::{Builtin, CostTable};
use crate::cyclic::{BinaryString, ShiftVector};
use crate::error::{Error, Result};
use crate::mscs::MscsInstance;

/// The padded instance, as f-MSCS with the `ccs` table at arity `2k-2`.
pub fn mscs_g_to_ccs(inst: &MscsInstance) -> Result<MscsInstance> {
    let k = inst.k();
    if inst.cost.builtin_kind() != Some(Builtin::G) {
        return Err(Error::InvalidArgument(format!(
            "padding needs the g cost table, instance uses {}",
            inst.cost.name
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("padding needs k >= 2".into()));
    }
    let mut strings = inst.strings.clone();
    let pad = BinaryString::ones(inst.n())?;
    strings.extend(std::iter::repeat_n(pad, k - 2));
    MscsInstance::new(strings, CostTable::builtin(Builtin::Ccs, 2 * k - 2)?, inst.target.clone())
}

/// Extend a shift of the source with zero shifts on the padding rows.
pub fn pad_shift(delta: &ShiftVector, k: usize) -> ShiftVector {
    delta.extended(k.saturating_sub(2))
}
