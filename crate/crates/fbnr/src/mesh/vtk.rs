//! Legacy ASCII VTK unstructured-grid ingestion (POINTS, CELLS, CELL_TYPES)
//! and a matching writer for tetrahedral connectivity.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{generate::tet_faces, Mesh};
use crate::{Error, Result, Vec3};

const VTK_TETRA: i64 = 10;
const VTK_HEXAHEDRON: i64 = 12;

/// Reads a legacy ASCII VTK unstructured grid containing tetrahedra and/or
/// hexahedra. Shared faces are deduplicated; the first referencing cell
/// becomes the owner and the stored normal points out of it.
pub fn load_vtk(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = fs::read_to_string(path)?;
    parse_vtk(&text)
}

/// Parses the contents of a legacy ASCII VTK unstructured-grid file.
pub fn parse_vtk(text: &str) -> Result<Mesh> {
    let mut tokens = Tokens::new(text);

    let mut points: Option<Vec<Vec3>> = None;
    let mut connectivity: Option<Vec<Vec<u32>>> = None;
    let mut types: Option<Vec<i64>> = None;

    while let Some(word) = tokens.next_word() {
        match word.to_ascii_uppercase().as_str() {
            "DATASET" => {
                let kind = tokens.expect_word("dataset kind")?;
                if !kind.eq_ignore_ascii_case("UNSTRUCTURED_GRID") {
                    return Err(tokens.error(format!("unsupported dataset `{kind}`")));
                }
            }
            "POINTS" => {
                let n = tokens.expect_usize("point count")?;
                tokens.expect_word("point scalar type")?;
                let mut pts = Vec::with_capacity(n);
                for _ in 0..n {
                    let x = tokens.expect_f64("point coordinate")?;
                    let y = tokens.expect_f64("point coordinate")?;
                    let z = tokens.expect_f64("point coordinate")?;
                    pts.push(Vec3::new(x, y, z));
                }
                points = Some(pts);
            }
            "CELLS" => {
                let n = tokens.expect_usize("cell count")?;
                let _total = tokens.expect_usize("cell list size")?;
                let mut cells = Vec::with_capacity(n);
                for _ in 0..n {
                    let cnt = tokens.expect_usize("cell vertex count")?;
                    let mut ids = Vec::with_capacity(cnt);
                    for _ in 0..cnt {
                        ids.push(tokens.expect_usize("cell vertex id")? as u32);
                    }
                    cells.push(ids);
                }
                connectivity = Some(cells);
            }
            "CELL_TYPES" => {
                let n = tokens.expect_usize("cell type count")?;
                let mut ts = Vec::with_capacity(n);
                for _ in 0..n {
                    ts.push(tokens.expect_i64("cell type")?);
                }
                types = Some(ts);
            }
            // Attribute sections and anything after them are irrelevant here.
            "CELL_DATA" | "POINT_DATA" => break,
            _ => {}
        }
    }

    let points = points.ok_or_else(|| tokens.error("missing POINTS section".into()))?;
    let connectivity =
        connectivity.ok_or_else(|| tokens.error("missing CELLS section".into()))?;
    let types = types.ok_or_else(|| tokens.error("missing CELL_TYPES section".into()))?;
    if connectivity.len() != types.len() {
        return Err(tokens.error(format!(
            "CELLS lists {} cells but CELL_TYPES lists {}",
            connectivity.len(),
            types.len()
        )));
    }

    let mut cell_faces = Vec::with_capacity(connectivity.len());
    for (ids, ty) in connectivity.into_iter().zip(&types) {
        cell_faces.push(canonical_faces(&ids, *ty)?);
    }
    Mesh::from_polyhedra(points, cell_faces, None)
}

/// Outward-oriented canonical faces of a VTK cell.
fn canonical_faces(v: &[u32], ty: i64) -> Result<Vec<Vec<u32>>> {
    match ty {
        VTK_TETRA => {
            if v.len() != 4 {
                return Err(Error::InvalidMesh(format!(
                    "tetrahedron with {} vertices",
                    v.len()
                )));
            }
            Ok(tet_faces([v[0], v[1], v[2], v[3]]))
        }
        VTK_HEXAHEDRON => {
            if v.len() != 8 {
                return Err(Error::InvalidMesh(format!(
                    "hexahedron with {} vertices",
                    v.len()
                )));
            }
            Ok(vec![
                vec![v[0], v[3], v[2], v[1]],
                vec![v[4], v[5], v[6], v[7]],
                vec![v[0], v[1], v[5], v[4]],
                vec![v[1], v[2], v[6], v[5]],
                vec![v[2], v[3], v[7], v[6]],
                vec![v[3], v[0], v[4], v[7]],
            ])
        }
        other => Err(Error::UnsupportedCellType(other)),
    }
}

/// Writes tetrahedral connectivity as a legacy ASCII VTK unstructured grid,
/// normalizing inverted elements to positive orientation.
pub fn write_vtk_tets(path: impl AsRef<Path>, points: &[Vec3], tets: &[[u32; 4]]) -> Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 2.0\ntetrahedral mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", points.len()));
    for p in points {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", p.x, p.y, p.z));
    }
    out.push_str(&format!("CELLS {} {}\n", tets.len(), tets.len() * 5));
    for t in tets {
        let mut t = *t;
        let [a, b, c, d] = t.map(|i| points[i as usize]);
        if (b - a).cross(&(c - a)).dot(&(d - a)) < 0.0 {
            t.swap(1, 2);
        }
        out.push_str(&format!("4 {} {} {} {}\n", t[0], t[1], t[2], t[3]));
    }
    out.push_str(&format!("CELL_TYPES {}\n", tets.len()));
    for _ in tets {
        out.push_str("10\n");
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Whitespace token stream that skips the two header lines and tracks line
/// numbers for error messages.
struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: std::str::SplitWhitespace<'a>,
    line_no: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = text.lines().enumerate();
        // Version comment and title line.
        for _ in 0..2 {
            lines.next();
        }
        Tokens {
            lines,
            current: "".split_whitespace(),
            line_no: 2,
        }
    }

    fn next_word(&mut self) -> Option<&'a str> {
        loop {
            if let Some(word) = self.current.next() {
                return Some(word);
            }
            let (idx, line) = self.lines.next()?;
            self.line_no = idx + 1;
            self.current = line.split_whitespace();
        }
    }

    fn expect_word(&mut self, what: &str) -> Result<&'a str> {
        self.next_word()
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))
    }

    fn expect_usize(&mut self, what: &str) -> Result<usize> {
        let w = self.expect_word(what)?;
        w.parse()
            .map_err(|_| self.error(format!("expected {what}, found `{w}`")))
    }

    fn expect_i64(&mut self, what: &str) -> Result<i64> {
        let w = self.expect_word(what)?;
        w.parse()
            .map_err(|_| self.error(format!("expected {what}, found `{w}`")))
    }

    fn expect_f64(&mut self, what: &str) -> Result<f64> {
        let w = self.expect_word(what)?;
        w.parse()
            .map_err(|_| self.error(format!("expected {what}, found `{w}`")))
    }

    fn error(&self, message: String) -> Error {
        Error::VtkParse {
            line: self.line_no,
            message,
        }
    }
}
