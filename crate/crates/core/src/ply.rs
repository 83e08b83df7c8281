//! ASCII PLY export with per-vertex colors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::geometry::Pt3;

/// Color for `t ∈ [0, 1]`: red at 0, white at 0.5, blue at 1.
pub fn red_white_blue(t: f64) -> [u8; 3] {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let byte = |v: f64| (v * 255.0).round() as u8;
    if t < 0.5 {
        let s = t * 2.0;
        [255, byte(s), byte(s)]
    } else {
        let s = (1.0 - t) * 2.0;
        [byte(s), byte(s), 255]
    }
}

/// Writes vertices (optionally colored) and triangles as ASCII PLY.
pub fn write_ply(
    path: impl AsRef<Path>,
    vertices: &[Pt3],
    faces: &[[usize; 3]],
    colors: Option<&[[u8; 3]]>,
    comments: &[String],
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ply_to(&mut w, vertices, faces, colors, comments)?;
    w.flush()
}

pub fn write_ply_to<W: Write>(
    w: &mut W,
    vertices: &[Pt3],
    faces: &[[usize; 3]],
    colors: Option<&[[u8; 3]]>,
    comments: &[String],
) -> io::Result<()> {
    if let Some(c) = colors {
        if c.len() != vertices.len() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "one color per vertex required",
            ));
        }
    }
    writeln!(w, "ply\nformat ascii 1.0")?;
    for c in comments {
        writeln!(w, "comment {}", c.replace('\n', " "))?;
    }
    writeln!(w, "element vertex {}", vertices.len())?;
    writeln!(w, "property float x\nproperty float y\nproperty float z")?;
    if colors.is_some() {
        writeln!(
            w,
            "property uchar red\nproperty uchar green\nproperty uchar blue"
        )?;
    }
    writeln!(w, "element face {}", faces.len())?;
    writeln!(w, "property list uchar int vertex_indices\nend_header")?;
    for (i, v) in vertices.iter().enumerate() {
        match colors {
            Some(c) => writeln!(
                w,
                "{} {} {} {} {} {}",
                v.x, v.y, v.z, c[i][0], c[i][1], c[i][2]
            )?,
            None => writeln!(w, "{} {} {}", v.x, v.y, v.z)?,
        }
    }
    for f in faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_ends() {
        assert_eq!(red_white_blue(0.0), [255, 0, 0]);
        assert_eq!(red_white_blue(0.5), [255, 255, 255]);
        assert_eq!(red_white_blue(1.0), [0, 0, 255]);
        assert_eq!(red_white_blue(f64::NAN), [255, 0, 0]);
    }

    #[test]
    fn header_and_body() {
        let mut buf = Vec::new();
        let v = [
            Pt3::new(0.0, 0.0, 0.0),
            Pt3::new(1.0, 0.0, 0.0),
            Pt3::new(0.0, 1.0, 0.0),
        ];
        write_ply_to(
            &mut buf,
            &v,
            &[[0, 1, 2]],
            Some(&[[1, 2, 3]; 3]),
            &["hello".into()],
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("ply\nformat ascii 1.0\ncomment hello\nelement vertex 3\n"));
        assert!(s.contains("property uchar red"));
        assert!(s.contains("1 0 0 1 2 3\n"));
        assert!(s.ends_with("3 0 1 2\n"));
        assert!(write_ply_to(&mut Vec::new(), &v, &[], Some(&[[0, 0, 0]]), &[]).is_err());
    }
}
