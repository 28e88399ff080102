//! Grid geometry: receptive fields, inhibition neighbourhoods and the leakage kernel.
//!
//! Neurons and pixels are indexed row-major. A 1-D network is a grid with a
//! single row, so every window below is a `rows x cols` rectangle. Windows are
//! centred on the neuron (or on the neuron's topographic image in the retina)
//! and are truncated at borders unless `wrap` is set.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rectangular extent of a grid or window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl Dims {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Dims { rows, cols }
    }

    /// A one-row extent, used for 1-D networks and retinae.
    pub const fn line(len: usize) -> Self {
        Dims { rows: 1, cols: len }
    }

    pub const fn square(side: usize) -> Self {
        Dims {
            rows: side,
            cols: side,
        }
    }

    pub const fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn is_line(&self) -> bool {
        self.rows == 1
    }

    fn is_odd(&self) -> bool {
        self.rows % 2 == 1 && self.cols % 2 == 1
    }

    fn fits_in(&self, outer: Dims) -> bool {
        self.rows <= outer.rows && self.cols <= outer.cols
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows == 1 {
            write!(f, "{}", self.cols)
        } else {
            write!(f, "{}x{}", self.rows, self.cols)
        }
    }
}

/// User-facing description of a network geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologySpec {
    pub grid: Dims,
    pub retina: Dims,
    pub num_retinae: usize,
    pub receptive_field: Dims,
    pub inhibition: Dims,
    pub leakage: Dims,
    /// Gaussian leakage standard deviation along (rows, cols), in neuron units.
    pub leakage_sigma: (f64, f64),
    /// Toroidal windows instead of border truncation.
    pub wrap: bool,
}

impl TopologySpec {
    /// The 1-D two-retina stripe experiment: 30 neurons, RF 9, N 5, L 5, sigma 1.
    pub fn stripes_1d() -> Self {
        TopologySpec {
            grid: Dims::line(30),
            retina: Dims::line(30),
            num_retinae: 2,
            receptive_field: Dims::line(9),
            inhibition: Dims::line(5),
            leakage: Dims::line(5),
            leakage_sigma: (1.0, 1.0),
            wrap: false,
        }
    }

    /// Input dimension `d`.
    pub fn input_len(&self) -> usize {
        self.num_retinae * self.retina.len()
    }

    /// True if every structural field (everything except the leakage width) agrees.
    pub fn same_structure(&self, other: &TopologySpec) -> bool {
        self.grid == other.grid
            && self.retina == other.retina
            && self.num_retinae == other.num_retinae
            && self.receptive_field == other.receptive_field
            && self.inhibition == other.inhibition
            && self.leakage == other.leakage
            && self.wrap == other.wrap
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Topology(msg));
        if self.grid.is_empty() || self.retina.is_empty() {
            return bad(format!(
                "grid {} and retina {} must be non-empty",
                self.grid, self.retina
            ));
        }
        if !(1..=2).contains(&self.num_retinae) {
            return bad(format!("num_retinae must be 1 or 2, got {}", self.num_retinae));
        }
        if self.grid.is_line() != self.retina.is_line() {
            return bad(format!(
                "grid {} and retina {} must have the same dimensionality",
                self.grid, self.retina
            ));
        }
        for (name, window, outer) in [
            ("receptive field", self.receptive_field, self.retina),
            ("inhibition window", self.inhibition, self.grid),
            ("leakage window", self.leakage, self.grid),
        ] {
            if window.is_empty() || !window.is_odd() {
                return bad(format!("{name} {window} must be positive and odd"));
            }
            if !window.fits_in(outer) {
                return bad(format!("{name} {window} is larger than {outer}"));
            }
        }
        let (sr, sc) = self.leakage_sigma;
        if self.leakage.len() > 1 && !(sr > 0.0 && sc > 0.0 && sr.is_finite() && sc.is_finite()) {
            return bad(format!("leakage sigma ({sr}, {sc}) must be positive"));
        }
        Ok(())
    }
}

/// Compressed sparse rows of neuron indices, with the transposed view.
///
/// `row(y)` lists the members of the window owned by `y`; `inverse(y)` lists
/// every `(owner, slot)` such that `members[slot] == y` and `slot` lies in
/// `owner`'s row, which is exactly the inverse neighbourhood of `y`.
#[derive(Clone, Debug)]
pub struct Neighbourhoods {
    offsets: Vec<usize>,
    members: Vec<usize>,
    inv_offsets: Vec<usize>,
    inv_entries: Vec<(usize, usize)>,
}

impl Neighbourhoods {
    fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut members = Vec::new();
        offsets.push(0);
        for row in &rows {
            members.extend_from_slice(row);
            offsets.push(members.len());
        }
        let mut inverse: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for owner in 0..n {
            for slot in offsets[owner]..offsets[owner + 1] {
                inverse[members[slot]].push((owner, slot));
            }
        }
        let mut inv_offsets = Vec::with_capacity(n + 1);
        let mut inv_entries = Vec::with_capacity(members.len());
        inv_offsets.push(0);
        for list in inverse {
            inv_entries.extend(list);
            inv_offsets.push(inv_entries.len());
        }
        Neighbourhoods {
            offsets,
            members,
            inv_offsets,
            inv_entries,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, y: usize) -> &[usize] {
        &self.members[self.offsets[y]..self.offsets[y + 1]]
    }

    /// Flat slot range of `row(y)`, for arrays aligned with the row storage.
    pub fn slots(&self, y: usize) -> std::ops::Range<usize> {
        self.offsets[y]..self.offsets[y + 1]
    }

    pub fn nnz(&self) -> usize {
        self.members.len()
    }

    /// `(owner, slot)` pairs of every window that contains `y`.
    pub fn inverse(&self, y: usize) -> &[(usize, usize)] {
        &self.inv_entries[self.inv_offsets[y]..self.inv_offsets[y + 1]]
    }
}

/// Row-stochastic leakage matrix `L[y][y'] = Pr(y'|y)` restricted to the leakage windows.
#[derive(Clone, Debug)]
pub struct Leakage<T> {
    windows: Neighbourhoods,
    weights: Vec<T>,
}

impl<T: Scalar> Leakage<T> {
    /// `(y', L[y][y'])` for every `y'` in the leakage window of `y`.
    pub fn row(&self, y: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let slots = self.windows.slots(y);
        self.windows.row(y).iter().copied().zip(self.weights[slots].iter().copied())
    }

    /// `(y', L[y'][y])` for every `y'` whose leakage window contains `y`.
    pub fn column(&self, y: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.windows
            .inverse(y)
            .iter()
            .map(move |&(owner, slot)| (owner, self.weights[slot]))
    }

    pub fn windows(&self) -> &Neighbourhoods {
        &self.windows
    }

    /// Dense copy, mostly useful for tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.windows.len();
        let mut dense = vec![vec![T::zero(); n]; n];
        for (y, row) in dense.iter_mut().enumerate() {
            for (t, w) in self.row(y) {
                row[t] = w;
            }
        }
        dense
    }
}

/// Materialised network geometry.
#[derive(Clone, Debug)]
pub struct Topology<T> {
    spec: TopologySpec,
    rf_offsets: Vec<usize>,
    rf_inputs: Vec<usize>,
    rf_taps: Vec<(usize, usize)>,
    rf_per_retina: Vec<usize>,
    inhibition: Neighbourhoods,
    leakage: Leakage<T>,
}

/// Offsets `(dr, dc, index)` of a centred window, truncated or wrapped at the border.
fn window(centre: (usize, usize), win: Dims, outer: Dims, wrap: bool) -> Vec<(usize, usize, usize)> {
    let hr = (win.rows / 2) as isize;
    let hc = (win.cols / 2) as isize;
    let mut out = Vec::with_capacity(win.len());
    for dr in -hr..=hr {
        for dc in -hc..=hc {
            let mut r = centre.0 as isize + dr;
            let mut c = centre.1 as isize + dc;
            if wrap {
                r = r.rem_euclid(outer.rows as isize);
                c = c.rem_euclid(outer.cols as isize);
            } else if r < 0 || c < 0 || r >= outer.rows as isize || c >= outer.cols as isize {
                continue;
            }
            let tap = ((dr + hr) as usize, (dc + hc) as usize);
            out.push((tap.0, tap.1, r as usize * outer.cols + c as usize));
        }
    }
    out
}

fn leakage_kernel<T: Scalar>(spec: &TopologySpec) -> Leakage<T> {
    let m = spec.grid.len();
    let (sr, sc) = spec.leakage_sigma;
    let hr = (spec.leakage.rows / 2) as f64;
    let hc = (spec.leakage.cols / 2) as f64;
    let mut rows = Vec::with_capacity(m);
    let mut weights = Vec::new();
    for y in 0..m {
        let centre = (y / spec.grid.cols, y % spec.grid.cols);
        let taps = window(centre, spec.leakage, spec.grid, spec.wrap);
        let raw: Vec<f64> = taps
            .iter()
            .map(|&(tr, tc, _)| {
                if spec.leakage.len() == 1 {
                    return 1.0;
                }
                let dr = tr as f64 - hr;
                let dc = tc as f64 - hc;
                (-(dr * dr) / (2.0 * sr * sr) - (dc * dc) / (2.0 * sc * sc)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        weights.extend(raw.iter().map(|&w| T::of(w / total)));
        rows.push(taps.into_iter().map(|(_, _, idx)| idx).collect());
    }
    Leakage {
        windows: Neighbourhoods::from_rows(rows),
        weights,
    }
}

impl<T: Scalar> Topology<T> {
    pub fn build(spec: TopologySpec) -> Result<Self> {
        spec.validate()?;
        let m = spec.grid.len();
        let retina_len = spec.retina.len();

        let mut rf_offsets = Vec::with_capacity(m + 1);
        let mut rf_inputs = Vec::new();
        let mut rf_taps = Vec::new();
        let mut rf_per_retina = Vec::with_capacity(m);
        rf_offsets.push(0);
        let mut inhibition_rows = Vec::with_capacity(m);
        for y in 0..m {
            let (r, c) = (y / spec.grid.cols, y % spec.grid.cols);
            let centre = (
                (2 * r + 1) * spec.retina.rows / (2 * spec.grid.rows),
                (2 * c + 1) * spec.retina.cols / (2 * spec.grid.cols),
            );
            let taps = window(centre, spec.receptive_field, spec.retina, spec.wrap);
            rf_per_retina.push(taps.len());
            for retina in 0..spec.num_retinae {
                for &(tr, tc, idx) in &taps {
                    rf_inputs.push(retina * retina_len + idx);
                    rf_taps.push((tr, tc));
                }
            }
            rf_offsets.push(rf_inputs.len());

            inhibition_rows.push(
                window((r, c), spec.inhibition, spec.grid, spec.wrap)
                    .into_iter()
                    .map(|(_, _, idx)| idx)
                    .collect(),
            );
        }
        let leakage = leakage_kernel(&spec);
        Ok(Topology {
            rf_offsets,
            rf_inputs,
            rf_taps,
            rf_per_retina,
            inhibition: Neighbourhoods::from_rows(inhibition_rows),
            leakage,
            spec,
        })
    }

    /// Rebuilds only the leakage kernel, keeping every other index map.
    pub fn set_leakage_sigma(&mut self, sigma: (f64, f64)) -> Result<()> {
        let mut spec = self.spec.clone();
        spec.leakage_sigma = sigma;
        spec.validate()?;
        self.leakage = leakage_kernel(&spec);
        self.spec = spec;
        Ok(())
    }

    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    /// Number of neurons `M`.
    pub fn neurons(&self) -> usize {
        self.spec.grid.len()
    }

    /// Input dimension `d`.
    pub fn input_len(&self) -> usize {
        self.spec.input_len()
    }

    pub fn num_retinae(&self) -> usize {
        self.spec.num_retinae
    }

    /// Input indices of neuron `y`'s raw receptive field, retina-major.
    pub fn receptive_field(&self, y: usize) -> &[usize] {
        &self.rf_inputs[self.rf_offsets[y]..self.rf_offsets[y + 1]]
    }

    /// Window-relative `(row, col)` of each receptive-field component of `y`.
    pub fn rf_taps(&self, y: usize) -> &[(usize, usize)] {
        &self.rf_taps[self.rf_offsets[y]..self.rf_offsets[y + 1]]
    }

    /// Components contributed by each retina to `y`'s receptive field.
    pub fn rf_per_retina(&self, y: usize) -> usize {
        self.rf_per_retina[y]
    }

    /// Offsets into a flat per-neuron receptive-field array (`M + 1` entries).
    pub fn rf_offsets(&self) -> &[usize] {
        &self.rf_offsets
    }

    pub fn rf_range(&self, y: usize) -> std::ops::Range<usize> {
        self.rf_offsets[y]..self.rf_offsets[y + 1]
    }

    pub fn inhibition(&self) -> &Neighbourhoods {
        &self.inhibition
    }

    pub fn leakage(&self) -> &Leakage<T> {
        &self.leakage
    }
}
