//! Rectangular cell partition of the study region and overlap-ratio encoding
//! of anonymous regions (MBRs) into weighted location sets.

use std::fmt;

use crate::anonymize::AnonymousTrajectory;
use crate::error::{Error, Result};
use crate::model::{WlasDatabase, WlasSequence, WlasTerm};
use crate::scalar::{is_positive, max_of, min_of, Scalar};

/// Index of a grid cell, 0-based, row-major from the region's min corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Axis-aligned rectangle with `x_min < x_max` and `y_min < y_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect<S> {
    pub x_min: S,
    pub y_min: S,
    pub x_max: S,
    pub y_max: S,
}

/// The study region covered by the grid.
pub type Region<S> = Rect<S>;

/// Minimum bounding rectangle of an anonymous location.
pub type Mbr<S> = Rect<S>;

impl<S: Scalar> Rect<S> {
    pub fn new(x_min: S, y_min: S, x_max: S, y_max: S) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{}, {}] x [{}, {}]",
                x_min.render(),
                x_max.render(),
                y_min.render(),
                y_max.render()
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> S {
        self.x_max.clone() - self.x_min.clone()
    }

    pub fn height(&self) -> S {
        self.y_max.clone() - self.y_min.clone()
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    /// Intersection with `other`, or `None` when it has zero area.
    pub fn intersection(&self, other: &Rect<S>) -> Option<Rect<S>> {
        let x_min = max_of(self.x_min.clone(), other.x_min.clone());
        let y_min = max_of(self.y_min.clone(), other.y_min.clone());
        let x_max = min_of(self.x_max.clone(), other.x_max.clone());
        let y_max = min_of(self.y_max.clone(), other.y_max.clone());
        (x_min < x_max && y_min < y_max).then_some(Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Half-open containment `[x_min, x_max) x [y_min, y_max)`.
    pub fn contains_point(&self, x: &S, y: &S) -> bool {
        self.x_min <= *x && *x < self.x_max && self.y_min <= *y && *y < self.y_max
    }
}

/// Cells of an anonymous location with their overlap-ratio weights,
/// strictly increasing by cell id, every weight positive.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLocationSet<S> {
    entries: Vec<(CellId, S)>,
}

impl<S: Scalar> WeightedLocationSet<S> {
    pub fn new(entries: Vec<(CellId, S)>) -> Result<Self> {
        if let Some(w) = entries.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(format!(
                "cell ids must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        if let Some((cell, _)) = entries.iter().find(|(_, w)| !is_positive(w)) {
            return Err(Error::InvalidArgument(format!("weight of {cell} must be positive")));
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(CellId, S)] {
        &self.entries
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.entries.iter().map(|(c, _)| *c)
    }

    pub fn weight(&self, cell: CellId) -> Option<&S> {
        self.entries
            .binary_search_by_key(&cell, |(c, _)| *c)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn contains(&self, cell: CellId) -> bool {
        self.weight(cell).is_some()
    }

    pub fn total(&self) -> S {
        self.entries.iter().map(|(_, w)| w.clone()).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Partition of a region into `n_cols x n_rows` half-open cells. The last
/// column and row are clipped to the region boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid<S> {
    region: Region<S>,
    cell_width: S,
    cell_height: S,
    n_cols: usize,
    n_rows: usize,
}

impl<S: Scalar> CellGrid<S> {
    pub fn new(region: Region<S>, cell_width: S, cell_height: S) -> Result<Self> {
        if !is_positive(&cell_width) || !is_positive(&cell_height) {
            return Err(Error::InvalidArgument("cell dimensions must be positive".into()));
        }
        if cell_width > region.width() || cell_height > region.height() {
            return Err(Error::InvalidArgument(
                "cell dimensions must not exceed the region".into(),
            ));
        }
        let n_cols = (region.width() / cell_width.clone())
            .ceil_index()
            .ok_or_else(|| Error::InvalidArgument("column count overflow".into()))?;
        let n_rows = (region.height() / cell_height.clone())
            .ceil_index()
            .ok_or_else(|| Error::InvalidArgument("row count overflow".into()))?;
        if n_cols.checked_mul(n_rows).is_none_or(|n| n > u32::MAX as usize) {
            return Err(Error::InvalidArgument("too many cells".into()));
        }
        Ok(Self {
            region,
            cell_width,
            cell_height,
            n_cols,
            n_rows,
        })
    }

    pub fn region(&self) -> &Region<S> {
        &self.region
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn cell_count(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn cell_id(&self, col: usize, row: usize) -> CellId {
        debug_assert!(col < self.n_cols && row < self.n_rows);
        CellId((row * self.n_cols + col) as u32)
    }

    /// The cell rectangle, clipped to the region.
    pub fn cell_rect(&self, cell: CellId) -> Rect<S> {
        let col = cell.0 as usize % self.n_cols;
        let row = cell.0 as usize / self.n_cols;
        let x_min = self.region.x_min.clone() + S::from_usize(col) * self.cell_width.clone();
        let y_min = self.region.y_min.clone() + S::from_usize(row) * self.cell_height.clone();
        let x_max = min_of(x_min.clone() + self.cell_width.clone(), self.region.x_max.clone());
        let y_max = min_of(y_min.clone() + self.cell_height.clone(), self.region.y_max.clone());
        Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// The unique cell containing the point, or `None` outside the region.
    pub fn cell_at(&self, x: &S, y: &S) -> Option<CellId> {
        if !self.region.contains_point(x, y) {
            return None;
        }
        let col = ((x.clone() - self.region.x_min.clone()) / self.cell_width.clone())
            .floor_index()?
            .min(self.n_cols - 1);
        let row = ((y.clone() - self.region.y_min.clone()) / self.cell_height.clone())
            .floor_index()?
            .min(self.n_rows - 1);
        Some(self.cell_id(col, row))
    }

    /// Column/row index range `[first, last]` overlapped by `[lo, hi)` along
    /// one axis.
    fn span(lo: &S, hi: &S, origin: &S, step: &S, count: usize) -> Option<(usize, usize)> {
        let first = ((lo.clone() - origin.clone()) / step.clone()).floor_index()?;
        let last = ((hi.clone() - origin.clone()) / step.clone()).ceil_index()?;
        let last = last.min(count).checked_sub(1)?;
        (first <= last).then_some((first.min(count - 1), last))
    }

    /// Overlap-ratio encoding of an MBR. The MBR is clipped to the region
    /// first; weights are overlap area over clipped area.
    pub fn encode_region(&self, mbr: &Mbr<S>) -> Result<WeightedLocationSet<S>> {
        let clipped = mbr.intersection(&self.region).ok_or(Error::EmptyEncoding)?;
        let area = clipped.area();
        let (c0, c1) = Self::span(
            &clipped.x_min,
            &clipped.x_max,
            &self.region.x_min,
            &self.cell_width,
            self.n_cols,
        )
        .ok_or(Error::EmptyEncoding)?;
        let (r0, r1) = Self::span(
            &clipped.y_min,
            &clipped.y_max,
            &self.region.y_min,
            &self.cell_height,
            self.n_rows,
        )
        .ok_or(Error::EmptyEncoding)?;
        let mut entries = Vec::with_capacity((c1 - c0 + 1) * (r1 - r0 + 1));
        for row in r0..=r1 {
            for col in c0..=c1 {
                let cell = self.cell_id(col, row);
                if let Some(overlap) = self.cell_rect(cell).intersection(&clipped) {
                    entries.push((cell, overlap.area() / area.clone()));
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyEncoding);
        }
        WeightedLocationSet::new(entries)
    }
}

pub fn build_grid<S: Scalar>(region: Region<S>, cell_width: S, cell_height: S) -> Result<CellGrid<S>> {
    CellGrid::new(region, cell_width, cell_height)
}

pub fn encode_region<S: Scalar>(mbr: &Mbr<S>, grid: &CellGrid<S>) -> Result<WeightedLocationSet<S>> {
    grid.encode_region(mbr)
}

/// Encodes each anonymous trajectory as a wLAS-sequence, preserving term
/// order and sorting activities.
pub fn encode_database<S: Scalar>(
    trajectories: &[AnonymousTrajectory<S>],
    grid: &CellGrid<S>,
) -> Result<WlasDatabase<S>> {
    let mut sequences = Vec::with_capacity(trajectories.len());
    for traj in trajectories {
        let mut terms = Vec::with_capacity(traj.terms.len());
        for (i, term) in traj.terms.iter().enumerate() {
            let locations = grid.encode_region(&term.mbr).map_err(|e| Error::Encoding {
                trajectory: traj.id.clone(),
                term: i,
                source: Box::new(e),
            })?;
            terms.push(WlasTerm::new(locations, term.activities.iter().cloned()));
        }
        sequences.push(WlasSequence::new(traj.id.clone(), terms));
    }
    WlasDatabase::new(sequences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymize::AnonymousTerm;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn rect(x0: Q, y0: Q, x1: Q, y1: Q) -> Rect<Q> {
        Rect::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn unit_grid_over_4x8_has_32_cells() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(4, 1), q(8, 1)), q(1, 1), q(1, 1)).unwrap();
        assert_eq!(g.cell_count(), 32);
        assert_eq!(g.cell_id(3, 7), CellId(31));
    }

    #[test]
    fn identity_partition() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(1, 1), q(1, 1)), q(1, 1), q(1, 1)).unwrap();
        assert_eq!(g.cell_count(), 1);
    }

    #[test]
    fn clipped_last_column() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(3, 1), q(2, 1)), q(2, 1), q(2, 1)).unwrap();
        assert_eq!((g.n_cols(), g.n_rows()), (2, 1));
        let right = g.cell_rect(CellId(1));
        assert_eq!(right.width(), q(1, 1));
        assert_eq!(right.area(), q(2, 1));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let region = rect(q(0, 1), q(0, 1), q(1, 1), q(1, 1));
        assert!(matches!(
            build_grid(region.clone(), q(0, 1), q(1, 1)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_grid(region.clone(), q(-1, 1), q(1, 1)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_grid(region, q(2, 1), q(1, 1)).is_err());
        assert!(Rect::new(q(1, 1), q(0, 1), q(1, 1), q(2, 1)).is_err());
    }

    #[test]
    fn encodes_first_anonymous_location_of_the_worked_trajectory() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(4, 1), q(8, 1)), q(1, 1), q(1, 1)).unwrap();
        let mbr = rect(q(1, 2), q(1, 2), q(5, 4), q(2, 1));
        let wls = g.encode_region(&mbr).unwrap();
        assert_eq!(
            wls.entries(),
            &[
                (CellId(0), q(2, 9)),
                (CellId(1), q(1, 9)),
                (CellId(4), q(4, 9)),
                (CellId(5), q(2, 9)),
            ]
        );
    }

    #[test]
    fn mbr_equal_to_a_cell_has_unit_weight() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(4, 1), q(4, 1)), q(1, 1), q(1, 1)).unwrap();
        let wls = g.encode_region(&rect(q(1, 1), q(2, 1), q(2, 1), q(3, 1))).unwrap();
        assert_eq!(wls.entries(), &[(CellId(9), q(1, 1))]);
    }

    #[test]
    fn symmetric_straddle_splits_in_half() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(2, 1), q(1, 1)), q(1, 1), q(1, 1)).unwrap();
        let wls = g.encode_region(&rect(q(1, 2), q(0, 1), q(3, 2), q(1, 1))).unwrap();
        assert_eq!(wls.entries(), &[(CellId(0), q(1, 2)), (CellId(1), q(1, 2))]);
    }

    #[test]
    fn mbr_is_clipped_to_region() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(2, 1), q(1, 1)), q(1, 1), q(1, 1)).unwrap();
        let wls = g.encode_region(&rect(q(3, 2), q(0, 1), q(5, 1), q(1, 1))).unwrap();
        assert_eq!(wls.entries(), &[(CellId(1), q(1, 1))]);
    }

    #[test]
    fn disjoint_mbr_is_an_empty_encoding() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(2, 1), q(1, 1)), q(1, 1), q(1, 1)).unwrap();
        assert!(matches!(
            g.encode_region(&rect(q(2, 1), q(0, 1), q(3, 1), q(1, 1))),
            Err(Error::EmptyEncoding)
        ));
    }

    #[test]
    fn encode_database_sorts_activities_and_annotates_errors() {
        let g = build_grid(rect(q(0, 1), q(0, 1), q(1, 1), q(1, 1)), q(1, 1), q(1, 1)).unwrap();
        let traj = AnonymousTrajectory {
            id: "t".into(),
            terms: vec![AnonymousTerm {
                mbr: rect(q(0, 1), q(0, 1), q(1, 1), q(1, 1)),
                activities: vec!["b".into(), "a".into()],
            }],
        };
        let db = encode_database(std::slice::from_ref(&traj), &g).unwrap();
        let term = &db.sequences()[0].terms[0];
        assert_eq!(term.activities(), &["a".to_string(), "b".to_string()]);
        assert_eq!(term.locations().entries(), &[(CellId(0), q(1, 1))]);

        assert!(encode_database::<Q>(&[], &g).unwrap().is_empty());

        let mut bad = traj;
        bad.terms.push(AnonymousTerm {
            mbr: rect(q(5, 1), q(5, 1), q(6, 1), q(6, 1)),
            activities: vec!["a".into()],
        });
        match encode_database(&[bad], &g) {
            Err(Error::Encoding { trajectory, term, .. }) => {
                assert_eq!(trajectory, "t");
                assert_eq!(term, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_backend_matches_within_tolerance() {
        let g = build_grid(Rect::new(0.0, 0.0, 4.0, 8.0).unwrap(), 1.0, 1.0).unwrap();
        let wls = g.encode_region(&Rect::new(0.5, 0.5, 1.25, 2.0).unwrap()).unwrap();
        let expected = [2.0f64 / 9.0, 1.0 / 9.0, 4.0 / 9.0, 2.0 / 9.0];
        for ((_, w), e) in wls.entries().iter().zip(expected) {
            assert!((w - e).abs() < 1e-12);
        }
    }
}
