use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{MeshError, TriMesh};
use crate::geometry::Pt3;

/// Loads an OBJ or STL (binary or ASCII) mesh and multiplies every vertex by `units`.
pub fn load_mesh(path: impl AsRef<Path>, units: f64) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let (vertices, triangles) = match ext.as_str() {
        "obj" => read_obj(path)?,
        "stl" => read_stl(path)?,
        other => {
            return Err(MeshError::Parse(format!(
                "unsupported mesh extension '{other}'"
            )))
        }
    };
    if triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    let vertices = vertices
        .into_iter()
        .map(|v| Pt3::from(v.coords * units))
        .collect();
    TriMesh::new(vertices, triangles)
}

fn read_obj(path: &Path) -> Result<(Vec<Pt3>, Vec<[usize; 3]>), MeshError> {
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: false,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj(path, &opts).map_err(|e| MeshError::Parse(e.to_string()))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for model in models {
        let m = model.mesh;
        let base = vertices.len();
        vertices.extend(
            m.positions
                .chunks_exact(3)
                .map(|p| Pt3::new(p[0] as f64, p[1] as f64, p[2] as f64)),
        );
        triangles.extend(m.indices.chunks_exact(3).map(|t| {
            [
                base + t[0] as usize,
                base + t[1] as usize,
                base + t[2] as usize,
            ]
        }));
    }
    Ok((vertices, triangles))
}

fn read_stl(path: &Path) -> Result<(Vec<Pt3>, Vec<[usize; 3]>), MeshError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mesh = stl_io::read_stl(&mut reader).map_err(|e| MeshError::Parse(e.to_string()))?;
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| Pt3::new(v[0] as f64, v[1] as f64, v[2] as f64))
        .collect();
    let triangles = mesh.faces.iter().map(|f| f.vertices).collect();
    Ok((vertices, triangles))
}

/// Writes the mesh as a plain OBJ (vertices and faces only).
pub fn write_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in mesh.vertices() {
        writeln!(w, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}
