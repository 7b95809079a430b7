use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

/// Sum of the table rows named by `ids` (with multiplicity).
pub fn embedding_sum(ids: &[u32], table: &Matrix) -> Result<Vec<f64>> {
    let mut out = vec![0.0; table.cols()];
    for &id in ids {
        let id = id as usize;
        if id >= table.rows() {
            return Err(Error::Dimension(format!(
                "n-gram id {id} outside embedding table of {} rows",
                table.rows()
            )));
        }
        for (o, v) in out.iter_mut().zip(table.row(id)) {
            *o += v;
        }
    }
    Ok(out)
}

/// Scatter `upstream` into every referenced row of `grad`.
pub fn embedding_sum_backward(ids: &[u32], upstream: &[f64], grad: &mut Matrix) {
    for &id in ids {
        for (g, u) in grad.row_mut(id as usize).iter_mut().zip(upstream) {
            *g += u;
        }
    }
}
