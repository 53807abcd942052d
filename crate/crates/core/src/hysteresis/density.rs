//! Preisach densities and their exact cumulative integrals.

use crate::error::{invalid_param, Error, Result};

/// Nonnegative Preisach density `psi(r, v)`.
///
/// `cum0(r, v) = int_0^v psi(r, s) ds` and `cum1(r, v) = int_0^v s psi(r, s) ds`
/// are available in closed form for every variant, which keeps the Preisach
/// energy bookkeeping exact up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub enum PreisachDensity {
    Table(DensityTable),
    /// `amplitude * exp(-r / r_scale) * exp(-|v| / v_scale)`.
    SeparableExp {
        amplitude: f64,
        r_scale: f64,
        v_scale: f64,
    },
}

/// Piecewise-constant density on a rectangular `(r, v)` grid, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    r_range: (f64, f64),
    v_range: (f64, f64),
    nr: usize,
    nv: usize,
    values: Vec<f64>,
    // per r-row cumulative integrals at the v grid nodes, anchored at v = 0
    cum0_nodes: Vec<f64>,
    cum1_nodes: Vec<f64>,
    inv_dr: f64,
    inv_dv: f64,
}

impl DensityTable {
    /// `values` is row-major with `nr` rows (in `r`) of `nv` entries (in `v`).
    pub fn new(
        r_range: (f64, f64),
        v_range: (f64, f64),
        nr: usize,
        nv: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nr == 0 || nv == 0 {
            return Err(invalid_param("density table needs at least one cell"));
        }
        if values.len() != nr * nv {
            return Err(invalid_param(format!(
                "density table expects {} values, got {}",
                nr * nv,
                values.len()
            )));
        }
        if !(r_range.0 >= 0.0 && r_range.1 > r_range.0 && r_range.1.is_finite()) {
            return Err(invalid_param("density r-range must satisfy 0 <= r0 < r1"));
        }
        if !(v_range.1 > v_range.0 && v_range.0.is_finite() && v_range.1.is_finite()) {
            return Err(invalid_param("density v-range must satisfy v0 < v1"));
        }
        if let Some(bad) = values.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(invalid_param(format!("density values must be >= 0, found {bad}")));
        }
        let mut table = DensityTable {
            r_range,
            v_range,
            nr,
            nv,
            values,
            cum0_nodes: vec![0.0; nr * (nv + 1)],
            cum1_nodes: vec![0.0; nr * (nv + 1)],
            inv_dr: nr as f64 / (r_range.1 - r_range.0),
            inv_dv: nv as f64 / (v_range.1 - v_range.0),
        };
        table.build_cumulatives();
        Ok(table)
    }

    /// Constant density on `[r0, r1] x [v0, v1]`.
    pub fn uniform(value: f64, r_range: (f64, f64), v_range: (f64, f64)) -> Result<Self> {
        Self::new(r_range, v_range, 1, 1, vec![value])
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.r_range
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nr, self.nv)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Writes the table in the text format read by [`DensityTable::from_text`].
    ///
    /// ```text
    /// # freezethaw density v1
    /// r_range <r0> <r1>
    /// v_range <v0> <v1>
    /// shape <nr> <nv>
    /// <nr * nv values, row-major: one r-row of nv entries per line>
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored; the values may be
    /// split across lines freely.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# freezethaw density v1\n");
        s += &format!("r_range {:?} {:?}\n", self.r_range.0, self.r_range.1);
        s += &format!("v_range {:?} {:?}\n", self.v_range.0, self.v_range.1);
        s += &format!("shape {} {}\n", self.nr, self.nv);
        for row in self.values.chunks(self.nv) {
            let parts: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            s += &parts.join(" ");
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cur = Tokens::new(text);
        cur.keyword("r_range")?;
        let r_range = (cur.number("r0")?, cur.number("r1")?);
        cur.keyword("v_range")?;
        let v_range = (cur.number("v0")?, cur.number("v1")?);
        cur.keyword("shape")?;
        let nr = cur.count("nr")?;
        let nv = cur.count("nv")?;
        let mut values = Vec::with_capacity(nr.saturating_mul(nv).min(1 << 24));
        for _ in 0..nr * nv {
            values.push(cur.number("density value")?);
        }
        if let Some((l, c, t)) = cur.next() {
            return Err(parse_error(l, c, format!("unexpected trailing token '{t}'")));
        }
        DensityTable::new(r_range, v_range, nr, nv, values)
    }

    fn dr(&self) -> f64 {
        (self.r_range.1 - self.r_range.0) / self.nr as f64
    }

    fn dv(&self) -> f64 {
        (self.v_range.1 - self.v_range.0) / self.nv as f64
    }

    fn v_node(&self, k: usize) -> f64 {
        self.v_range.0 + k as f64 * self.dv()
    }

    fn build_cumulatives(&mut self) {
        let nv = self.nv;
        let dv = self.dv();
        for ir in 0..self.nr {
            let row = &self.values[ir * nv..(ir + 1) * nv];
            // integrals from v0, then shift so that the anchor is v = 0
            let mut c0 = vec![0.0; nv + 1];
            let mut c1 = vec![0.0; nv + 1];
            for k in 0..nv {
                let (a, b) = (self.v_node(k), self.v_node(k + 1));
                c0[k + 1] = c0[k] + row[k] * dv;
                c1[k + 1] = c1[k] + row[k] * 0.5 * (b * b - a * a);
            }
            let (z0, z1) = self.raw_cums(row, &c0, &c1, 0.0);
            for k in 0..=nv {
                self.cum0_nodes[ir * (nv + 1) + k] = c0[k] - z0;
                self.cum1_nodes[ir * (nv + 1) + k] = c1[k] - z1;
            }
        }
    }

    fn raw_cums(&self, row: &[f64], c0: &[f64], c1: &[f64], v: f64) -> (f64, f64) {
        let nv = self.nv;
        if v <= self.v_range.0 {
            return (c0[0], c1[0]);
        }
        if v >= self.v_range.1 {
            return (c0[nv], c1[nv]);
        }
        let k = (((v - self.v_range.0) / self.dv()) as usize).min(nv - 1);
        let a = self.v_node(k);
        (c0[k] + row[k] * (v - a), c1[k] + row[k] * 0.5 * (v * v - a * a))
    }

    #[inline]
    fn row_index(&self, r: f64) -> Option<usize> {
        if r < self.r_range.0 || r > self.r_range.1 {
            return None;
        }
        Some((((r - self.r_range.0) * self.inv_dr) as usize).min(self.nr - 1))
    }

    #[inline]
    fn cell_index(&self, v: f64) -> Option<usize> {
        if v < self.v_range.0 || v > self.v_range.1 {
            return None;
        }
        Some((((v - self.v_range.0) * self.inv_dv) as usize).min(self.nv - 1))
    }

    fn value(&self, r: f64, v: f64) -> f64 {
        match (self.row_index(r), self.cell_index(v)) {
            (Some(ir), Some(k)) => self.values[ir * self.nv + k],
            _ => 0.0,
        }
    }

    fn envelope(&self, r: f64) -> f64 {
        match self.row_index(r) {
            Some(ir) => self.values[ir * self.nv..(ir + 1) * self.nv]
                .iter()
                .cloned()
                .fold(0.0, f64::max),
            None => 0.0,
        }
    }

    #[inline]
    fn cums(&self, r: f64, v: f64) -> (f64, f64) {
        let Some(ir) = self.row_index(r) else {
            return (0.0, 0.0);
        };
        let nv = self.nv;
        let base = ir * (nv + 1);
        if v <= self.v_range.0 {
            return (self.cum0_nodes[base], self.cum1_nodes[base]);
        }
        if v >= self.v_range.1 {
            return (self.cum0_nodes[base + nv], self.cum1_nodes[base + nv]);
        }
        let k = (((v - self.v_range.0) * self.inv_dv) as usize).min(nv - 1);
        let a = self.v_node(k);
        let psi = self.values[ir * nv + k];
        (
            self.cum0_nodes[base + k] + psi * (v - a),
            self.cum1_nodes[base + k] + psi * 0.5 * (v * v - a * a),
        )
    }

    /// Mass of the density over `v > 0` and `v < 0`.
    fn saturation_constants(&self) -> (f64, f64) {
        let dr = self.dr();
        let nv = self.nv;
        let (mut plus, mut minus) = (0.0, 0.0);
        for ir in 0..self.nr {
            let base = ir * (nv + 1);
            plus += self.cum0_nodes[base + nv] * dr;
            minus -= self.cum0_nodes[base] * dr;
        }
        (plus, minus)
    }

    fn c_star(&self) -> f64 {
        let dr = self.dr();
        (0..self.nr)
            .map(|ir| {
                let a = self.r_range.0 + ir as f64 * dr;
                let b = a + dr;
                let env = self.values[ir * self.nv..(ir + 1) * self.nv]
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max);
                env * ((b - a) + (b * b * b - a * a * a) / 3.0)
            })
            .sum()
    }

    /// Breakpoints of the density in `v` strictly between `lo` and `hi`.
    fn v_breaks(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        (0..=self.nv)
            .map(|k| self.v_node(k))
            .filter(move |&x| x > lo && x < hi)
    }
}

// 8-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_48,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_48,
    0.101_228_536_290_376_26,
];

fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(m + h * x))
        .sum::<f64>()
        * h
}

fn parse_error(line: usize, column: usize, message: String) -> Error {
    Error::Parse { line, column, message }
}

// Whitespace tokens with their line and column, comments skipped.
struct Tokens<'a> {
    items: std::vec::IntoIter<(usize, usize, &'a str)>,
    end: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, l) in text.lines().enumerate() {
            if l.trim_start().starts_with('#') {
                continue;
            }
            let mut col = 1;
            for tok in l.split([' ', '\t']) {
                if !tok.trim().is_empty() {
                    items.push((i + 1, col, tok.trim()));
                }
                col += tok.len() + 1;
            }
        }
        Tokens {
            items: items.into_iter(),
            end: text.lines().count() + 1,
        }
    }

    fn next(&mut self) -> Option<(usize, usize, &'a str)> {
        self.items.next()
    }

    fn take(&mut self, what: &str) -> Result<(usize, usize, &'a str)> {
        self.next().ok_or_else(|| {
            parse_error(self.end, 1, format!("unexpected end of density file, expected {what}"))
        })
    }

    fn keyword(&mut self, key: &str) -> Result<()> {
        let (l, c, t) = self.take(key)?;
        if t != key {
            return Err(parse_error(l, c, format!("expected '{key}', found '{t}'")));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let (l, c, t) = self.take(what)?;
        t.parse().map_err(|_| parse_error(l, c, format!("cannot parse {what} '{t}'")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let (l, c, t) = self.take(what)?;
        t.parse().map_err(|_| parse_error(l, c, format!("cannot parse {what} '{t}'")))
    }
}

impl PreisachDensity {
    /// The symmetric box density used by the shipped scenarios:
    /// `psi = 0.2` on `r in [0, 1]`, `v in [-1, 1]`.
    pub fn default_box() -> Self {
        PreisachDensity::Table(
            DensityTable::uniform(0.2, (0.0, 1.0), (-1.0, 1.0)).expect("valid default density"),
        )
    }

    /// The zero density, which switches hysteresis off.
    pub fn zero() -> Self {
        PreisachDensity::Table(DensityTable::uniform(0.0, (0.0, 1.0), (-1.0, 1.0)).unwrap())
    }

    pub fn separable_exp(amplitude: f64, r_scale: f64, v_scale: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && r_scale > 0.0 && v_scale > 0.0) {
            return Err(invalid_param(
                "separable density needs amplitude >= 0 and positive scales",
            ));
        }
        Ok(PreisachDensity::SeparableExp {
            amplitude,
            r_scale,
            v_scale,
        })
    }

    /// Same shape with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self {
            PreisachDensity::Table(t) => Ok(PreisachDensity::Table(DensityTable::new(
                t.r_range,
                t.v_range,
                t.nr,
                t.nv,
                t.values.iter().map(|x| x * factor).collect(),
            )?)),
            PreisachDensity::SeparableExp {
                amplitude,
                r_scale,
                v_scale,
            } => Self::separable_exp(amplitude * factor, *r_scale, *v_scale),
        }
    }

    pub fn value(&self, r: f64, v: f64) -> f64 {
        match self {
            PreisachDensity::Table(t) => t.value(r, v),
            PreisachDensity::SeparableExp {
                amplitude,
                r_scale,
                v_scale,
            } => {
                if r < 0.0 {
                    0.0
                } else {
                    amplitude * (-r / r_scale).exp() * (-v.abs() / v_scale).exp()
                }
            }
        }
    }

    /// Envelope `psi*(r) >= psi(r, v)` for all `v`.
    pub fn envelope(&self, r: f64) -> f64 {
        match self {
            PreisachDensity::Table(t) => t.envelope(r),
            PreisachDensity::SeparableExp {
                amplitude, r_scale, ..
            } => {
                if r < 0.0 {
                    0.0
                } else {
                    amplitude * (-r / r_scale).exp()
                }
            }
        }
    }

    /// `(cum0(r, v), cum1(r, v))`.
    #[inline]
    pub fn cums(&self, r: f64, v: f64) -> (f64, f64) {
        match self {
            PreisachDensity::Table(t) => t.cums(r, v),
            PreisachDensity::SeparableExp {
                amplitude,
                r_scale,
                v_scale,
            } => {
                if r < 0.0 {
                    return (0.0, 0.0);
                }
                let a = amplitude * (-r / r_scale).exp();
                let b = *v_scale;
                let e = (-v.abs() / b).exp();
                let c0 = a * v.signum() * b * (1.0 - e);
                let c1 = a * (b * b - b * (v.abs() + b) * e);
                (if v == 0.0 { 0.0 } else { c0 }, c1)
            }
        }
    }

    pub fn cum0(&self, r: f64, v: f64) -> f64 {
        self.cums(r, v).0
    }

    pub fn cum1(&self, r: f64, v: f64) -> f64 {
        self.cums(r, v).1
    }

    /// `int_0^v h(s) psi(r, s) ds` by piecewise Gauss-Legendre quadrature.
    pub fn weighted_cum(&self, r: f64, v: f64, h: &dyn Fn(f64) -> f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let (lo, hi, sign) = if v > 0.0 { (0.0, v, 1.0) } else { (v, 0.0, -1.0) };
        let mut pts = vec![lo];
        match self {
            PreisachDensity::Table(t) => pts.extend(t.v_breaks(lo, hi)),
            PreisachDensity::SeparableExp { .. } => {
                let n = 32;
                pts.extend((1..n).map(|k| lo + (hi - lo) * k as f64 / n as f64));
            }
        }
        pts.push(hi);
        let total: f64 = pts
            .windows(2)
            .map(|w| gauss_legendre(w[0], w[1], |s| h(s) * self.value(r, s.clamp(w[0], w[1]))))
            .sum();
        sign * total
    }

    /// `(C_psi^+, C_psi^-)`: density mass over `v > 0` and over `v < 0`.
    pub fn saturation_constants(&self) -> (f64, f64) {
        match self {
            PreisachDensity::Table(t) => t.saturation_constants(),
            PreisachDensity::SeparableExp {
                amplitude,
                r_scale,
                v_scale,
            } => {
                let c = amplitude * r_scale * v_scale;
                (c, c)
            }
        }
    }

    /// `C_psi^* = int (1 + r^2) psi*(r) dr`.
    pub fn c_star(&self) -> f64 {
        match self {
            PreisachDensity::Table(t) => t.c_star(),
            PreisachDensity::SeparableExp {
                amplitude, r_scale, ..
            } => amplitude * (r_scale + 2.0 * r_scale.powi(3)),
        }
    }

    /// Upper end of the `r`-support used to place memory levels.
    pub fn r_support(&self) -> (f64, f64) {
        match self {
            PreisachDensity::Table(t) => t.r_range,
            // exp(-40) is below double precision relative to the peak
            PreisachDensity::SeparableExp { r_scale, .. } => (0.0, 40.0 * r_scale),
        }
    }

    /// True when the density vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            PreisachDensity::Table(t) => t.values.iter().all(|x| *x == 0.0),
            PreisachDensity::SeparableExp { amplitude, .. } => *amplitude == 0.0,
        }
    }
}
