//! Simplicial meshes in one and two dimensions.

use std::fmt::Write as _;

use crate::error::{invalid_param, Error, Result};

/// Boundary facet: a point in 1D, an edge in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub nodes: Vec<usize>,
    pub marker: u32,
}

/// Conforming mesh of segments (dim 1) or triangles (dim 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    cells: Vec<Vec<usize>>,
    facets: Vec<BoundaryFacet>,
    measures: Vec<f64>,
    // gradients of the P1 hat functions, per cell and local node
    grads: Vec<Vec<[f64; 2]>>,
}

impl Mesh {
    /// Builds a mesh from raw data and checks its consistency.
    pub fn new(
        dim: usize,
        nodes: Vec<[f64; 2]>,
        cells: Vec<Vec<usize>>,
        facets: Vec<BoundaryFacet>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid_param(format!("mesh dimension must be 1 or 2, got {dim}")));
        }
        if nodes.is_empty() || cells.is_empty() {
            return Err(invalid_param("mesh needs nodes and cells"));
        }
        let mut measures = Vec::with_capacity(cells.len());
        let mut grads = Vec::with_capacity(cells.len());
        for (k, c) in cells.iter().enumerate() {
            if c.len() != dim + 1 || c.iter().any(|i| *i >= nodes.len()) {
                return Err(invalid_param(format!("cell {k} has invalid connectivity")));
            }
            let (m, g) = if dim == 1 {
                let h = nodes[c[1]][0] - nodes[c[0]][0];
                (h.abs(), vec![[-1.0 / h, 0.0], [1.0 / h, 0.0]])
            } else {
                let [x0, y0] = nodes[c[0]];
                let [x1, y1] = nodes[c[1]];
                let [x2, y2] = nodes[c[2]];
                let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
                let g = vec![
                    [(y1 - y2) / det, (x2 - x1) / det],
                    [(y2 - y0) / det, (x0 - x2) / det],
                    [(y0 - y1) / det, (x1 - x0) / det],
                ];
                (0.5 * det.abs(), g)
            };
            if !(m > 0.0) {
                return Err(invalid_param(format!("cell {k} has nonpositive measure")));
            }
            measures.push(m);
            grads.push(g);
        }
        for (k, f) in facets.iter().enumerate() {
            if f.nodes.len() != dim || f.nodes.iter().any(|i| *i >= nodes.len()) {
                return Err(invalid_param(format!("boundary facet {k} is malformed")));
            }
        }
        Ok(Mesh {
            dim,
            nodes,
            cells,
            facets,
            measures,
            grads,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn facets(&self) -> &[BoundaryFacet] {
        &self.facets
    }

    pub fn cell_measure(&self, k: usize) -> f64 {
        self.measures[k]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Gradients of the local hat functions on cell `k`.
    pub fn cell_gradients(&self, k: usize) -> &[[f64; 2]] {
        &self.grads[k]
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Length of facet `k` (1 for points).
    pub fn facet_measure(&self, k: usize) -> f64 {
        let f = &self.facets[k];
        if self.dim == 1 {
            1.0
        } else {
            let [a, b] = [self.nodes[f.nodes[0]], self.nodes[f.nodes[1]]];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        }
    }

    /// Gradient of a nodal field on cell `k`.
    pub fn gradient(&self, k: usize, field: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (a, &i) in self.cells[k].iter().enumerate() {
            g[0] += field[i] * self.grads[k][a][0];
            g[1] += field[i] * self.grads[k][a][1];
        }
        g
    }

    /// Cell centroid.
    pub fn centroid(&self, k: usize) -> [f64; 2] {
        let c = &self.cells[k];
        let n = c.len() as f64;
        let mut x = [0.0; 2];
        for &i in c {
            x[0] += self.nodes[i][0] / n;
            x[1] += self.nodes[i][1] / n;
        }
        x
    }

    /// Largest index distance between two nodes sharing a cell.
    pub fn node_bandwidth(&self) -> usize {
        self.cells
            .iter()
            .map(|c| c.iter().max().unwrap() - c.iter().min().unwrap())
            .max()
            .unwrap_or(0)
    }

    /// Nodes touched by facets with one of the given markers.
    pub fn marked_nodes(&self, markers: &[u32]) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for f in &self.facets {
            if markers.contains(&f.marker) {
                for &i in &f.nodes {
                    on[i] = true;
                }
            }
        }
        on
    }

    /// Distinct boundary markers in order of first appearance.
    pub fn markers(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for f in &self.facets {
            if !out.contains(&f.marker) {
                out.push(f.marker);
            }
        }
        out
    }

    /// Writes the mesh in the plain text format read by [`Mesh::from_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::from("# freezethaw mesh v1\n");
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for n in &self.nodes {
            if self.dim == 1 {
                let _ = writeln!(s, "{}", n[0]);
            } else {
                let _ = writeln!(s, "{} {}", n[0], n[1]);
            }
        }
        let _ = writeln!(s, "cells {}", self.cells.len());
        for c in &self.cells {
            let parts: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        let _ = writeln!(s, "boundary {}", self.facets.len());
        for f in &self.facets {
            let parts: Vec<String> = f.nodes.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{} {}", f.marker, parts.join(" "));
        }
        s
    }

    /// Parses the plain text mesh format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: text.lines().count() + 1,
                column: 1,
                message: format!("unexpected end of mesh file, expected {what}"),
            })
        };
        let dim = header(next("dim")?, "dim")?;
        let nn = header(next("nodes")?, "nodes")?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, l) = next("node coordinates")?;
            let v: Vec<f64> = numbers(ln, l)?;
            if v.len() != dim {
                return Err(parse_err(ln, 1, format!("expected {dim} coordinates")));
            }
            nodes.push([v[0], if dim == 2 { v[1] } else { 0.0 }]);
        }
        let nc = header(next("cells")?, "cells")?;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = next("cell")?;
            let v: Vec<usize> = numbers(ln, l)?;
            if v.len() != dim + 1 {
                return Err(parse_err(ln, 1, format!("expected {} node indices", dim + 1)));
            }
            cells.push(v);
        }
        let nf = header(next("boundary")?, "boundary")?;
        let mut facets = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = next("boundary facet")?;
            let v: Vec<usize> = numbers(ln, l)?;
            if v.len() != dim + 1 {
                return Err(parse_err(ln, 1, "expected a marker and facet nodes".to_string()));
            }
            facets.push(BoundaryFacet {
                marker: v[0] as u32,
                nodes: v[1..].to_vec(),
            });
        }
        Mesh::new(dim, nodes, cells, facets)
    }
}

fn parse_err(line: usize, column: usize, message: String) -> Error {
    Error::Parse {
        line,
        column,
        message,
    }
}

fn header((ln, l): (usize, &str), key: &str) -> Result<usize> {
    let mut it = l.split_whitespace();
    if it.next() != Some(key) {
        return Err(parse_err(ln, 1, format!("expected '{key} <count>'")));
    }
    let col = key.len() + 2;
    it.next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| parse_err(ln, col, format!("expected a count after '{key}'")))
}

fn numbers<T: std::str::FromStr>(ln: usize, l: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    let mut col = 1;
    for tok in l.split(' ') {
        if !tok.is_empty() {
            out.push(
                tok.parse()
                    .map_err(|_| parse_err(ln, col, format!("cannot parse '{tok}'")))?,
            );
        }
        col += tok.len() + 1;
    }
    Ok(out)
}

/// Uniform interval mesh (dim 1) or structured rectangle triangulation
/// (dim 2, each cell split along its main diagonal).
///
/// Markers: 1D left = 1, right = 2; 2D bottom = 1, right = 2, top = 3, left = 4.
pub fn build_mesh(dim: usize, extents: &[(f64, f64)], resolution: &[usize]) -> Result<Mesh> {
    if extents.len() != dim || resolution.len() != dim {
        return Err(invalid_param("extents and resolution must match the dimension"));
    }
    for (e, n) in extents.iter().zip(resolution) {
        if !(e.1 > e.0) || !e.0.is_finite() || !e.1.is_finite() {
            return Err(invalid_param(format!("invalid extent [{}, {}]", e.0, e.1)));
        }
        if *n < 2 {
            return Err(invalid_param("resolution must be at least 2"));
        }
    }
    match dim {
        1 => {
            let (a, b) = extents[0];
            let n = resolution[0];
            let nodes = (0..=n)
                .map(|i| [a + (b - a) * i as f64 / n as f64, 0.0])
                .collect();
            let cells = (0..n).map(|i| vec![i, i + 1]).collect();
            let facets = vec![
                BoundaryFacet { nodes: vec![0], marker: 1 },
                BoundaryFacet { nodes: vec![n], marker: 2 },
            ];
            Mesh::new(1, nodes, cells, facets)
        }
        2 => {
            let ((x0, x1), (y0, y1)) = (extents[0], extents[1]);
            let (nx, ny) = (resolution[0], resolution[1]);
            let id = |i: usize, j: usize| j * (nx + 1) + i;
            let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
            for j in 0..=ny {
                for i in 0..=nx {
                    nodes.push([
                        x0 + (x1 - x0) * i as f64 / nx as f64,
                        y0 + (y1 - y0) * j as f64 / ny as f64,
                    ]);
                }
            }
            let mut cells = Vec::with_capacity(2 * nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            let mut facets = Vec::new();
            for i in 0..nx {
                facets.push(BoundaryFacet { nodes: vec![id(i, 0), id(i + 1, 0)], marker: 1 });
            }
            for j in 0..ny {
                facets.push(BoundaryFacet { nodes: vec![id(nx, j), id(nx, j + 1)], marker: 2 });
            }
            for i in 0..nx {
                facets.push(BoundaryFacet { nodes: vec![id(i + 1, ny), id(i, ny)], marker: 3 });
            }
            for j in 0..ny {
                facets.push(BoundaryFacet { nodes: vec![id(0, j + 1), id(0, j)], marker: 4 });
            }
            Mesh::new(2, nodes, cells, facets)
        }
        _ => Err(invalid_param(format!("mesh dimension must be 1 or 2, got {dim}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let m = build_mesh(1, &[(0.0, 1.0)], &[4]).unwrap();
        assert_eq!((m.num_nodes(), m.num_cells()), (5, 4));
        let m = build_mesh(2, &[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        assert_eq!((m.num_nodes(), m.num_cells()), (9, 8));
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
        assert_eq!(m.facets().len(), 8);
    }

    #[test]
    fn rejects_bad_extents() {
        assert!(build_mesh(1, &[(1.0, 0.0)], &[4]).is_err());
        assert!(build_mesh(1, &[(0.0, 1.0)], &[1]).is_err());
        assert!(build_mesh(3, &[(0.0, 1.0); 3], &[2; 3]).is_err());
    }

    #[test]
    fn text_round_trip() {
        for m in [
            build_mesh(1, &[(0.0, 2.0)], &[3]).unwrap(),
            build_mesh(2, &[(0.0, 1.0), (-1.0, 0.5)], &[3, 2]).unwrap(),
        ] {
            assert_eq!(Mesh::from_text(&m.to_text()).unwrap(), m);
        }
    }

    #[test]
    fn parse_error_has_position() {
        let err = Mesh::from_text("# freezethaw mesh v1\ndim 1\nnodes 2\n0\nx\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (5, 1)),
            e => panic!("unexpected {e}"),
        }
    }
}
