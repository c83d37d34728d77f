//! Hoeffding decomposition of L-statistics under sampling without
//! replacement: hypergeometric combinatorics, expected spacings, the
//! closed-form kernels and their enumeration oracle.

mod hypergeom;
pub mod oracle;
mod spacing;
mod closed_form;

use std::io::Write;

pub use hypergeom::{hypergeom_pmf, HypergeomParams};
pub use oracle::{h_oracle, kernels_from_h, Enumerator, ENUMERATION_LIMIT};
pub use spacing::{expected_l, expected_order_statistics, expected_spacing_given};
pub use closed_form::{
    g1_table, g2_at, g3_at, linear_coeff, pair_coeff, pair_coeff_envelope, triple_coeff,
    triple_coeff_envelope, KernelSet, PairTable,
};

use crate::error::Result;

/// Writes `g_1` as CSV with header `k,value`; `k` is one-based.
pub fn write_g1_csv<W: Write>(mut out: W, g1: &[f64]) -> Result<()> {
    writeln!(out, "k,value")?;
    for (k, v) in g1.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, v)?;
    }
    Ok(())
}

/// Writes `g_2` as CSV with header `k,l,value` for `k < l`, one-based.
pub fn write_g2_csv<W: Write>(mut out: W, table: &PairTable) -> Result<()> {
    writeln!(out, "k,l,value")?;
    for (k, l, v) in table.iter() {
        writeln!(out, "{},{},{}", k + 1, l + 1, v)?;
    }
    Ok(())
}
