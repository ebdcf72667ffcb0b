use ndarray::{concatenate, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// A set of binary row vectors of common width `n_v`, optionally labeled.
///
/// Entries are stored as `f64` holding exactly `0.0` or `1.0` so batches
/// feed straight into the matrix products of the training kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryBatch {
    rows: Array2<f64>,
    labels: Option<Vec<usize>>,
}

impl BinaryBatch {
    pub fn new(rows: Array2<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|&&x| x != 0.0 && x != 1.0) {
            return Err(Error::Domain(format!("batch entry {bad} is not binary")));
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.nrows() {
                return Err(Error::dim("batch labels", rows.nrows(), labels.len()));
            }
        }
        Ok(Self { rows, labels })
    }

    /// Batch with zero rows and width `n_visible`.
    pub fn empty(n_visible: usize) -> Self {
        Self {
            rows: Array2::zeros((0, n_visible)),
            labels: None,
        }
    }

    /// Build from 0/1 byte rows; all rows must share a length.
    pub fn from_bits(n_visible: usize, rows: &[Vec<u8>], labels: Option<Vec<usize>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n_visible);
        for row in rows {
            if row.len() != n_visible {
                return Err(Error::dim("batch row", n_visible, row.len()));
            }
            data.extend(row.iter().map(|&b| f64::from(b)));
        }
        let rows = Array2::from_shape_vec((rows.len(), n_visible), data)
            .expect("shape matches collected data");
        Self::new(rows, labels)
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn n_visible(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn into_parts(self) -> (Array2<f64>, Option<Vec<usize>>) {
        (self.rows, self.labels)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    /// Rows of `self` followed by rows of `other`. Labels survive only when
    /// both sides carry them.
    pub fn concat(&self, other: &BinaryBatch) -> Result<BinaryBatch> {
        if self.n_visible() != other.n_visible() {
            return Err(Error::dim("batch concat", self.n_visible(), other.n_visible()));
        }
        let rows = concatenate(Axis(0), &[self.rows.view(), other.rows.view()])
            .expect("column counts checked");
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Ok(BinaryBatch { rows, labels })
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> BinaryBatch {
        BinaryBatch {
            rows: self.rows.select(Axis(0), indices),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Append one row. The row must already be binary.
    pub fn push(&mut self, row: ArrayView1<'_, f64>, label: Option<usize>) -> Result<()> {
        if row.len() != self.n_visible() {
            return Err(Error::dim("batch push", self.n_visible(), row.len()));
        }
        if row.iter().any(|&x| x != 0.0 && x != 1.0) {
            return Err(Error::Domain("pushed row is not binary".into()));
        }
        let was_empty = self.is_empty();
        self.rows.push_row(row).expect("width checked");
        match (&mut self.labels, label) {
            (Some(labels), Some(l)) => labels.push(l),
            (None, Some(l)) if was_empty => self.labels = Some(vec![l]),
            (labels, _) => *labels = None,
        }
        Ok(())
    }

    pub fn clear(&mut self) {
        self.rows = Array2::zeros((0, self.n_visible()));
        self.labels = None;
    }

    /// Rows as 0/1 bytes.
    pub fn to_bits(&self) -> Vec<Vec<u8>> {
        self.rows
            .outer_iter()
            .map(|r| r.iter().map(|&x| x as u8).collect())
            .collect()
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<usize> {
        let mut classes: Vec<usize> = self.labels.clone().unwrap_or_default();
        classes.sort_unstable();
        classes.dedup();
        classes
    }
}
