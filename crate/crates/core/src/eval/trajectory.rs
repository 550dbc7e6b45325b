use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;

/// Orthonormality tolerance for parsed poses. Odometry files commonly carry
/// six to nine significant digits.
const PARSE_TOL: f64 = 1e-4;

/// Ordered camera-to-world poses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub poses: Vec<RigidTransform>,
    pub timestamps: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(poses: Vec<RigidTransform>) -> Self {
        Trajectory {
            poses,
            timestamps: None,
        }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Expresses every pose relative to frame `index`, which becomes the
    /// identity.
    pub fn rebase(&self, index: usize) -> Trajectory {
        let inv = self.poses[index].invert();
        Trajectory {
            poses: self.poses.iter().map(|p| inv.compose(p)).collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.poses.iter().map(|p| p.translation()).collect()
    }
}

/// One pose per line: the 12 entries of the row-major `3x4 [R|t]` block.
pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    for p in &traj.poses {
        let m = p.matrix();
        let row: Vec<String> = m[..3]
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| format!("{x:.16e}"))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let mut poses = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(line_no, "pose", e.to_string()))?;
        if vals.len() != 12 {
            return Err(Error::parse(
                line_no,
                "pose",
                format!("expected 12 values, found {}", vals.len()),
            ));
        }
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m[..3].iter_mut().enumerate() {
            row.copy_from_slice(&vals[4 * i..4 * i + 4]);
        }
        m[3][3] = 1.0;
        let pose = RigidTransform::from_matrix_tol(m, PARSE_TOL)
            .map_err(|e| Error::parse(line_no, "pose", e.to_string()))?;
        poses.push(pose);
    }
    Ok(Trajectory::new(poses))
}

pub fn save_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_trajectory(traj)).map_err(|e| Error::io(path, e))
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pose_to_transform, PoseParams};

    #[test]
    fn text_round_trip_is_bit_exact() {
        let traj = Trajectory::new(
            (0..4)
                .map(|k| {
                    let k = k as f64;
                    pose_to_transform(&PoseParams::new(0.1 * k, -0.03 * k, 0.7 / (k + 1.0), k / 3.0, 1e-17, -k))
                        .unwrap()
                })
                .collect(),
        );
        let back = parse_trajectory(&format_trajectory(&traj)).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_trajectory("1 0 0 0 0 1 0 0 0 0 1\n").is_err());
        assert!(parse_trajectory("1 0 0 0 0 1 0 0 0 0 1 x\n").is_err());
        match parse_trajectory("1 0 0 0 0 1 0 0 0 0 1 0\n2 0 0 0 0 1 0 0 0 0 1 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rebase_makes_reference_identity() {
        let traj = Trajectory::new(vec![
            pose_to_transform(&PoseParams::new(0.2, 0.1, 0.0, 1.0, 2.0, 3.0)).unwrap(),
            pose_to_transform(&PoseParams::new(0.0, 0.3, 0.1, -1.0, 0.0, 5.0)).unwrap(),
        ]);
        let r = traj.rebase(1);
        assert!(r.poses[1].max_abs_diff(&RigidTransform::identity()) < 1e-15);
    }
}
