use std::collections::HashMap;

use crate::data::labels::{Label, LabelScheme};
use crate::error::{Error, Result};

/// Visits × raters matrix of optional labels.
///
/// Visits and raters keep the order in which they were first seen. Every
/// visit carries at least one label.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTable {
    scheme: LabelScheme,
    visit_ids: Vec<String>,
    raters: Vec<String>,
    // row-major, visits × raters
    cells: Vec<Option<Label>>,
}

impl AnnotationTable {
    /// Builds a table from long-format `(visit, rater, label)` records.
    pub fn from_records<V, R>(scheme: LabelScheme, records: impl IntoIterator<Item = (V, R, Label)>) -> Result<Self>
    where
        V: Into<String>,
        R: Into<String>,
    {
        let mut visit_index: HashMap<String, usize> = HashMap::new();
        let mut rater_index: HashMap<String, usize> = HashMap::new();
        let mut visit_ids = Vec::new();
        let mut raters = Vec::new();
        let mut triples = Vec::new();

        for (v, r, label) in records {
            let (v, r) = (v.into(), r.into());
            check_label(&scheme, label)?;
            let vi = *visit_index.entry(v.clone()).or_insert_with(|| {
                visit_ids.push(v.clone());
                visit_ids.len() - 1
            });
            let ri = *rater_index.entry(r.clone()).or_insert_with(|| {
                raters.push(r.clone());
                raters.len() - 1
            });
            triples.push((vi, ri, label));
        }

        let width = raters.len();
        let mut cells = vec![None; visit_ids.len() * width];
        for (vi, ri, label) in triples {
            let cell = &mut cells[vi * width + ri];
            if cell.is_some() {
                return Err(Error::DuplicateCell {
                    visit: visit_ids[vi].clone(),
                    rater: raters[ri].clone(),
                });
            }
            *cell = Some(label);
        }
        Ok(Self {
            scheme,
            visit_ids,
            raters,
            cells,
        })
    }

    /// Builds a table from wide rows, one `Option<Label>` per rater.
    pub fn from_rows<V: Into<String>>(
        scheme: LabelScheme,
        raters: Vec<String>,
        rows: impl IntoIterator<Item = (V, Vec<Option<Label>>)>,
    ) -> Result<Self> {
        for (i, r) in raters.iter().enumerate() {
            if raters[..i].contains(r) {
                return Err(Error::invalid(format!("duplicate rater `{r}`")));
            }
        }
        let mut seen = HashMap::new();
        let mut visit_ids = Vec::new();
        let mut cells = Vec::new();
        for (v, row) in rows {
            let v = v.into();
            if row.len() != raters.len() {
                return Err(Error::invalid(format!(
                    "visit `{v}` has {} cells for {} raters",
                    row.len(),
                    raters.len()
                )));
            }
            if row.iter().all(Option::is_none) {
                return Err(Error::invalid(format!("visit `{v}` has no labels")));
            }
            for label in row.iter().flatten() {
                check_label(&scheme, *label)?;
            }
            if seen.insert(v.clone(), ()).is_some() {
                return Err(Error::DuplicateVisit(v));
            }
            visit_ids.push(v);
            cells.extend(row);
        }
        Ok(Self {
            scheme,
            visit_ids,
            raters,
            cells,
        })
    }

    pub fn scheme(&self) -> &LabelScheme {
        &self.scheme
    }

    pub fn visit_ids(&self) -> &[String] {
        &self.visit_ids
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn n_visits(&self) -> usize {
        self.visit_ids.len()
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    pub fn row(&self, visit: usize) -> &[Option<Label>] {
        let w = self.raters.len();
        &self.cells[visit * w..(visit + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[Option<Label>])> {
        self.visit_ids
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), self.row(i)))
    }

    pub fn cell(&self, visit: usize, rater: usize) -> Option<Label> {
        self.cells[visit * self.raters.len() + rater]
    }

    /// Present cells as `(visit, rater, label)` in row-major order.
    pub fn records(&self) -> impl Iterator<Item = (&str, &str, Label)> {
        self.rows().flat_map(move |(v, row)| {
            row.iter()
                .zip(&self.raters)
                .filter_map(move |(l, r)| l.map(|l| (v, r.as_str(), l)))
        })
    }

    pub fn is_complete(&self, visit: usize) -> bool {
        self.row(visit).iter().all(Option::is_some)
    }

    /// Same visits and raters with raters reordered by `order` (a permutation of rater indices).
    pub fn permute_raters(&self, order: &[usize]) -> Result<Self> {
        let mut check = order.to_vec();
        check.sort_unstable();
        if check != (0..self.n_raters()).collect::<Vec<_>>() {
            return Err(Error::invalid("rater order is not a permutation"));
        }
        let raters = order.iter().map(|&i| self.raters[i].clone()).collect();
        let rows = self
            .rows()
            .map(|(v, row)| (v.to_string(), order.iter().map(|&i| row[i]).collect()));
        Self::from_rows(self.scheme.clone(), raters, rows)
    }
}

fn check_label(scheme: &LabelScheme, label: Label) -> Result<()> {
    if label.index() >= scheme.len() {
        return Err(Error::invalid(format!(
            "label index {} outside scheme {scheme}",
            label.index()
        )));
    }
    Ok(())
}
