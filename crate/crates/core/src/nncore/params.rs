use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Read-only view of one named parameter tensor.
#[derive(Debug)]
pub struct ParamView<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

impl ParamView<'_> {
    /// `prefix.name`, or `name` alone for an empty prefix.
    pub fn name_in(prefix: &str, name: &str) -> String {
        join(prefix, name)
    }
}

/// Mutable view of one named parameter tensor.
#[derive(Debug)]
pub struct ParamViewMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
}

/// A collection of named tensors with a stable enumeration order.
///
/// Gradient buffers share the type of the parameters they belong to, so two
/// instances built from the same config enumerate identically.
pub trait ParamSet {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>);
    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>);

    fn params(&self) -> Vec<ParamView<'_>> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    fn params_mut(&mut self) -> Vec<ParamViewMut<'_>> {
        let mut out = Vec::new();
        self.collect_mut("", &mut out);
        out
    }

    fn num_values(&self) -> usize {
        self.params().iter().map(|p| p.data.len()).sum()
    }

    /// All values concatenated in enumeration order.
    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_values());
        for p in self.params() {
            out.extend_from_slice(p.data);
        }
        out
    }

    /// Inverse of [`ParamSet::flatten`]. Panics on a length mismatch.
    fn assign_flat(&mut self, values: &[f64]) {
        let mut offset = 0;
        for p in self.params_mut() {
            let n = p.data.len();
            p.data.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, values.len(), "flat parameter length mismatch");
    }

    fn fill_zero(&mut self) {
        for p in self.params_mut() {
            p.data.fill(0.0);
        }
    }

    /// `self *= factor`
    fn scale(&mut self, factor: f64) {
        for p in self.params_mut() {
            p.data.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// `self += other`, matching tensors by enumeration order.
    fn add_assign(&mut self, other: &Self)
    where
        Self: Sized,
    {
        for (dst, src) in self.params_mut().into_iter().zip(other.params()) {
            debug_assert_eq!(dst.shape, src.shape);
            dst.data.iter_mut().zip(src.data).for_each(|(d, s)| *d += s);
        }
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        String::from(name)
    } else {
        format!("{prefix}.{name}")
    }
}

/// Scale `grads` so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<P: ParamSet>(grads: &mut P, max_norm: f64) -> f64 {
    let sq: f64 = grads.params().iter().flat_map(|p| p.data.iter()).map(|g| g * g).sum();
    let norm = libm::sqrt(sq);
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}
