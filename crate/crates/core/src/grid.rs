//! Sampled N-dimensional lookup tables.
//!
//! A [`Grid`] stores values on a rectilinear lattice and evaluates them with
//! multilinear interpolation. Queries outside the lattice are clamped to the
//! boundary, never extrapolated.
//!
//! Tables round-trip through a plain-text format. A file holds one or more
//! blocks of the form
//!
//! ```text
//! # comment
//! table CL
//! axis alpha_deg -10 -8 -6 -4
//! values
//! -0.67 -0.50 -0.32 -0.15
//! end
//! ```
//!
//! with one `axis` line per dimension (name followed by strictly increasing
//! breakpoints) and the body listed in row-major order, last axis fastest.
//! Line breaks inside the body are not significant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest supported table dimension.
pub const MAX_DIMS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub breakpoints: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, breakpoints: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if breakpoints.is_empty() {
            return Err(Error::Config(format!("axis `{name}` has no breakpoints")));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config(format!("axis `{name}` has non-finite breakpoints")));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "axis `{name}` breakpoints must be strictly increasing"
            )));
        }
        Ok(Axis { name, breakpoints })
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn max(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Lower cell index and weight of the upper node, clamped to the axis.
    #[inline]
    fn locate(&self, x: f64) -> (usize, f64) {
        let bp = &self.breakpoints;
        let n = bp.len();
        if n == 1 {
            return (0, 0.0);
        }
        if !(x > bp[0]) {
            // also catches NaN
            return (0, 0.0);
        }
        if x >= bp[n - 1] {
            return (n - 2, 1.0);
        }
        // first breakpoint strictly greater than x
        let upper = bp.partition_point(|&b| b <= x);
        let i = upper - 1;
        let w = (x - bp[i]) / (bp[i + 1] - bp[i]);
        (i, w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    values: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIMS {
            return Err(Error::Config(format!(
                "grid must have between 1 and {MAX_DIMS} axes, got {}",
                axes.len()
            )));
        }
        let expected: usize = axes.iter().map(Axis::len).product();
        if values.len() != expected {
            return Err(Error::Config(format!(
                "grid expects {expected} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid contains non-finite values".into()));
        }
        let mut strides = vec![1; axes.len()];
        for d in (0..axes.len() - 1).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].len();
        }
        Ok(Grid {
            axes,
            values,
            strides,
        })
    }

    /// One-dimensional table from `(breakpoint, value)` pairs.
    pub fn from_pairs(axis: &str, pairs: &[(f64, f64)]) -> Result<Self> {
        let bp = pairs.iter().map(|p| p.0).collect();
        let vals = pairs.iter().map(|p| p.1).collect();
        Grid::new(vec![Axis::new(axis, bp)?], vals)
    }

    /// Tabulates `f` on the given axes.
    pub fn sample<F>(axes: Vec<Axis>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let total: usize = axes.iter().map(Axis::len).product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes.len()];
        let mut point = vec![0.0; axes.len()];
        for _ in 0..total {
            for (d, a) in axes.iter().enumerate() {
                point[d] = a.breakpoints[idx[d]];
            }
            values.push(f(&point));
            for d in (0..axes.len()).rev() {
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        Grid::new(axes, values)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Stored value at a lattice index.
    pub fn node(&self, index: &[usize]) -> f64 {
        let flat: usize = index.iter().zip(&self.strides).map(|(i, s)| i * s).sum();
        self.values[flat]
    }

    /// Multilinear interpolation with boundary clamping.
    ///
    /// Exact at lattice nodes.
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.axes.len());
        if self.axes.len() == 1 {
            return self.eval1(point[0]);
        }
        let dims = self.axes.len();
        let mut base = 0usize;
        let mut weights = [0.0f64; MAX_DIMS];
        let mut single = [false; MAX_DIMS];
        for d in 0..dims {
            let (i, w) = self.axes[d].locate(point[d]);
            base += i * self.strides[d];
            weights[d] = w;
            single[d] = self.axes[d].len() == 1;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut offset = 0usize;
            let mut skip = false;
            for d in 0..dims {
                let upper = (corner >> d) & 1 == 1;
                if upper {
                    if single[d] {
                        skip = true;
                        break;
                    }
                    w *= weights[d];
                    offset += self.strides[d];
                } else {
                    w *= 1.0 - weights[d];
                }
            }
            if skip || w == 0.0 {
                continue;
            }
            acc += w * self.values[base + offset];
        }
        acc
    }

    #[inline]
    fn eval1(&self, x: f64) -> f64 {
        let (i, w) = self.axes[0].locate(x);
        if w == 0.0 {
            return self.values[i];
        }
        if w == 1.0 {
            return self.values[i + 1];
        }
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

/// Parses every `table` block in `text`.
pub fn parse_tables(text: &str, source_name: &str) -> Result<BTreeMap<String, Grid>> {
    let perr = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let mut tables = BTreeMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    while let Some((lineno, raw)) = lines.next() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("table") => {}
            Some(other) => return Err(perr(lineno, format!("expected `table`, found `{other}`"))),
            None => continue,
        }
        let name = words
            .next()
            .ok_or_else(|| perr(lineno, "table without a name".into()))?
            .to_string();
        if tables.contains_key(&name) {
            return Err(perr(lineno, format!("duplicate table `{name}`")));
        }

        let mut axes = Vec::new();
        let mut values = Vec::new();
        let mut in_values = false;
        let mut closed = false;
        let mut last_line = lineno;
        for (ln, raw) in lines.by_ref() {
            last_line = ln;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            if line == "end" {
                closed = true;
                break;
            }
            if in_values {
                for tok in line.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| perr(ln, format!("bad number `{tok}`")))?;
                    values.push(v);
                }
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("axis") => {
                    let axis_name = words
                        .next()
                        .ok_or_else(|| perr(ln, "axis without a name".into()))?;
                    let bp = words
                        .map(|t| {
                            t.parse::<f64>()
                                .map_err(|_| perr(ln, format!("bad breakpoint `{t}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    axes.push(Axis::new(axis_name, bp).map_err(|e| perr(ln, e.to_string()))?);
                }
                Some("values") => in_values = true,
                Some(other) => {
                    return Err(perr(ln, format!("unexpected `{other}` in table `{name}`")))
                }
                None => {}
            }
        }
        if !closed {
            return Err(perr(last_line, format!("table `{name}` is missing `end`")));
        }
        let grid = Grid::new(axes, values)
            .map_err(|e| perr(last_line, format!("table `{name}`: {e}")))?;
        tables.insert(name, grid);
    }
    Ok(tables)
}

/// Serializes named tables in the text format read by [`parse_tables`].
pub fn write_tables<'a, I>(tables: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a Grid)>,
{
    let mut out = String::new();
    for (name, grid) in tables {
        let _ = writeln!(out, "table {name}");
        for axis in grid.axes() {
            let _ = write!(out, "axis {}", axis.name);
            for b in &axis.breakpoints {
                let _ = write!(out, " {b}");
            }
            out.push('\n');
        }
        out.push_str("values\n");
        let row = grid.axes().last().map(Axis::len).unwrap_or(1);
        for chunk in grid.values().chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.push_str("end\n\n");
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}
