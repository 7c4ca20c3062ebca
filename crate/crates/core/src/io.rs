//! File formats: scalar-field CSV, patch JSON, frame and form snapshots,
//! surface CSV/OBJ and triple CSV. Every writer replaces its target
//! atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::isothermic::IsothermicPatch;
use crate::surface::{EuclideanSurface, SurfaceTriple};

/// Header line of the scalar-field CSV format.
pub const CSV_HEADER: &str = "nx,ny,hx,hy,x0,y0";

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Header line, one metadata line, then `ny` rows of `nx` values
/// (row `j` holds `y = y0 + j hy`).
pub fn scalar_field_to_csv(field: &ScalarField) -> Result<String> {
    let g = field.grid();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    w.write_record([g.nx.to_string(), g.ny.to_string(), g.hx.to_string(), g.hy.to_string(), g.x0.to_string(), g.y0.to_string()])?;
    for j in 0..g.ny {
        w.write_record((0..g.nx).map(|i| field.at(i, j).to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Format(format!("line {line}: cannot parse {what} from `{s}`")))
}

pub fn scalar_field_from_csv(text: &str) -> Result<ScalarField> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = r.records();
    let header = records.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER.split(',').collect::<Vec<_>>() {
        return Err(Error::Format(format!("line 1: expected header `{CSV_HEADER}`")));
    }
    let meta = records.next().ok_or_else(|| Error::Format("line 2: missing grid metadata".into()))??;
    if meta.len() != 6 {
        return Err(Error::Format(format!("line 2: expected 6 grid values, found {}", meta.len())));
    }
    let grid = Grid::new(
        parse_num(&meta[0], "nx", 2)?,
        parse_num(&meta[1], "ny", 2)?,
        parse_num(&meta[2], "hx", 2)?,
        parse_num(&meta[3], "hy", 2)?,
        parse_num(&meta[4], "x0", 2)?,
        parse_num(&meta[5], "y0", 2)?,
    )?;
    let mut data = Vec::with_capacity(grid.len());
    for (j, rec) in records.enumerate() {
        let rec = rec?;
        let line = j + 3;
        if j >= grid.ny {
            return Err(Error::Format(format!("line {line}: more than ny = {} rows", grid.ny)));
        }
        if rec.len() != grid.nx {
            return Err(Error::Format(format!("line {line}: expected nx = {} values, found {}", grid.nx, rec.len())));
        }
        for v in rec.iter() {
            data.push(parse_num::<f64>(v, "value", line)?);
        }
    }
    if data.len() != grid.len() {
        return Err(Error::Format(format!("expected ny = {} rows, found {}", grid.ny, data.len() / grid.nx)));
    }
    let field = ScalarField::from_vec(grid, data)?;
    field.check_finite("csv")?;
    Ok(field)
}

pub fn write_scalar_field(path: &Path, field: &ScalarField) -> Result<()> {
    atomic_write(path, scalar_field_to_csv(field)?.as_bytes())
}

pub fn read_scalar_field(path: &Path) -> Result<ScalarField> {
    scalar_field_from_csv(&fs::read_to_string(path)?)
}

/// Isothermic patch as JSON: grid plus row-major `u`, `k1`, `k2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchJson {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl PatchJson {
    pub fn from_patch(p: &IsothermicPatch) -> Self {
        Self { grid: *p.grid(), u: p.u.values().to_vec(), k1: p.k1.values().to_vec(), k2: p.k2.values().to_vec() }
    }

    pub fn into_patch(self) -> Result<IsothermicPatch> {
        self.grid.validate()?;
        IsothermicPatch::new(
            ScalarField::from_vec(self.grid, self.u)?,
            ScalarField::from_vec(self.grid, self.k1)?,
            ScalarField::from_vec(self.grid, self.k2)?,
        )
    }
}

pub fn write_patch(path: &Path, patch: &IsothermicPatch) -> Result<()> {
    write_json(path, &PatchJson::from_patch(patch))
}

pub fn read_patch(path: &Path) -> Result<IsothermicPatch> {
    read_json::<PatchJson>(path)?.into_patch()
}

/// OBJ with `v` and `vn` lines in grid order and two triangles per cell.
pub fn surface_to_obj(surface: &EuclideanSurface) -> String {
    let g = surface.grid();
    let mut s = String::new();
    for p in surface.points.values() {
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    for n in surface.normals.values() {
        let _ = writeln!(s, "vn {:.16e} {:.16e} {:.16e}", n.x, n.y, n.z);
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let a = g.index(i, j) + 1;
            let b = g.index(i + 1, j) + 1;
            let c = g.index(i + 1, j + 1) + 1;
            let d = g.index(i, j + 1) + 1;
            let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
            let _ = writeln!(s, "f {a}//{a} {c}//{c} {d}//{d}");
        }
    }
    s
}

pub fn write_obj(path: &Path, surface: &EuclideanSurface) -> Result<()> {
    atomic_write(path, surface_to_obj(surface).as_bytes())
}

pub fn surface_to_csv(surface: &EuclideanSurface) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "j", "x", "y", "z", "nx", "ny", "nz", "E", "F", "G", "e", "f", "g"])?;
    for ((i, j), p) in surface.points.iter_nodes() {
        let n = surface.normals.at(i, j);
        let (a, b) = (&surface.first, &surface.second);
        let mut rec = vec![i.to_string(), j.to_string()];
        rec.extend(
            [p.x, p.y, p.z, n.x, n.y, n.z, *a.xx.at(i, j), *a.xy.at(i, j), *a.yy.at(i, j), *b.xx.at(i, j), *b.xy.at(i, j), *b.yy.at(i, j)]
                .iter()
                .map(f64::to_string),
        );
        w.write_record(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_surface_csv(path: &Path, surface: &EuclideanSurface) -> Result<()> {
    atomic_write(path, surface_to_csv(surface)?.as_bytes())
}

pub fn triple_to_csv(triple: &SurfaceTriple) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["i".to_string(), "j".to_string()];
    for name in ["n", "f", "fhat"] {
        header.extend((1..=5).map(|k| format!("{name}{k}")));
    }
    w.write_record(&header)?;
    for ((i, j), n) in triple.n.iter_nodes() {
        let mut rec = vec![i.to_string(), j.to_string()];
        for v in [n, triple.f.at(i, j), triple.fhat.at(i, j)] {
            rec.extend(v.components().iter().map(f64::to_string));
        }
        w.write_record(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_triple_csv(path: &Path, triple: &SurfaceTriple) -> Result<()> {
    atomic_write(path, triple_to_csv(triple)?.as_bytes())
}
