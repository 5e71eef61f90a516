//! Built-in patches and the plain-text patch and coloring formats.
//!
//! A patch file holds one `q r` axial pair per line; `#` starts a comment.
//! A coloring file is a patch file with one extra line `black i j k ...`
//! listing black face indices (in patch order).

use cle_core::hexgrid::{build_patch, FaceCoord, HexPatch, PatchError, FACE_NEIGHBOR_OFFSETS};

#[derive(Debug, thiserror::Error)]
pub enum PatchSpecError {
    #[error("unknown patch `{0}` (expected hex1, pair2, flower7, rhombus N or a file path)")]
    Unknown(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Patch(#[from] PatchError),
}

/// Face coordinates of a named patch: `hex1`, `pair2`, `flower7`, `rhombusN` or `rhombus N`.
pub fn named_faces(name: &str) -> Option<Vec<FaceCoord>> {
    let name = name.trim();
    let coords: Vec<(i32, i32)> = match name {
        "hex1" => vec![(0, 0)],
        "pair2" => vec![(0, 0), (1, 0)],
        "flower7" => {
            let mut c = vec![(0, 0)];
            c.extend(FACE_NEIGHBOR_OFFSETS);
            c
        }
        _ => {
            let n: i32 = name.strip_prefix("rhombus")?.trim().parse().ok()?;
            if n < 1 {
                return None;
            }
            (0..n).flat_map(|r| (0..n).map(move |q| (q, r))).collect()
        }
    };
    Some(coords.into_iter().map(|(q, r)| FaceCoord::new(q, r)).collect())
}

/// Parses patch text; returns the faces and the black list if a `black` line is present.
pub fn parse_patch_text(text: &str) -> Result<(Vec<FaceCoord>, Option<Vec<usize>>), PatchSpecError> {
    let mut faces = Vec::new();
    let mut black = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| PatchSpecError::Parse { line: i + 1, msg: msg.to_string() };
        if let Some(rest) = line.strip_prefix("black") {
            let ids = rest
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| err("bad face index")))
                .collect::<Result<Vec<_>, _>>()?;
            black = Some(ids);
            continue;
        }
        let mut it = line.split_whitespace();
        let q = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("expected `q r`"))?;
        let r = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("expected `q r`"))?;
        if it.next().is_some() {
            return Err(err("trailing tokens"));
        }
        faces.push(FaceCoord::new(q, r));
    }
    Ok((faces, black))
}

/// Resolves a built-in name or reads a patch file.
pub fn load_faces(spec: &str) -> Result<(Vec<FaceCoord>, Option<Vec<usize>>), PatchSpecError> {
    if let Some(f) = named_faces(spec) {
        return Ok((f, None));
    }
    let path = std::path::Path::new(spec);
    if !path.exists() {
        return Err(PatchSpecError::Unknown(spec.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| PatchSpecError::Io { path: spec.to_string(), source })?;
    parse_patch_text(&text)
}

pub fn load_patch(spec: &str, root_choice: usize) -> Result<(HexPatch, Option<Vec<usize>>), PatchSpecError> {
    let (faces, black) = load_faces(spec)?;
    Ok((build_patch(&faces, root_choice)?, black))
}

/// Patch as text in the file format, faces in patch order.
pub fn patch_to_text(p: &HexPatch, black: Option<&[usize]>) -> String {
    let mut s = String::new();
    for f in p.faces() {
        s.push_str(&format!("{} {}\n", f.q, f.r));
    }
    if let Some(b) = black {
        let ids: Vec<String> = b.iter().map(usize::to_string).collect();
        s.push_str(&format!("black {}\n", ids.join(" ")));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_sizes() {
        assert_eq!(named_faces("hex1").unwrap().len(), 1);
        assert_eq!(named_faces("pair2").unwrap().len(), 2);
        assert_eq!(named_faces("flower7").unwrap().len(), 7);
        assert_eq!(named_faces("rhombus 3").unwrap().len(), 9);
        assert_eq!(named_faces("rhombus4").unwrap().len(), 16);
        assert!(named_faces("rhombus 0").is_none());
        assert!(named_faces("ring").is_none());
    }

    #[test]
    fn text_round_trip() {
        let (p, _) = load_patch("flower7", 0).unwrap();
        let text = patch_to_text(&p, Some(&[0, 3]));
        let (faces, black) = parse_patch_text(&text).unwrap();
        assert_eq!(faces, p.faces());
        assert_eq!(black, Some(vec![0, 3]));
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = parse_patch_text("# c\n0 0\n1\n").unwrap_err();
        assert!(matches!(e, PatchSpecError::Parse { line: 3, .. }));
        assert!(parse_patch_text("0 0 0\n").is_err());
        assert!(parse_patch_text("black x\n").is_err());
    }
}
