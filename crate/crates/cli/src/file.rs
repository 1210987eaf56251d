//! JSON trajectory files and CSV export.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tribody::jacobi::{delta_theta, to_jacobi};
use tribody::{Configuration, DiscretePath, PhaseState, Vec2};

use crate::error::CliError;

type Xy = [[f64; 2]; 3];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Command that wrote the file.
    pub producer: String,
    /// Extension that built a full orbit (`henon`, `antisymmetric`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub actions: BTreeMap<String, f64>,
    /// Boundary parameters and other scalar results.
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub masses: [f64; 3],
    pub times: Vec<f64>,
    pub positions: Vec<Xy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Xy>>,
    #[serde(default)]
    pub metadata: Metadata,
}

fn xy(q: &[Vec2; 3]) -> Xy {
    q.map(|p| [p.x, p.y])
}

fn vecs(a: &Xy) -> [Vec2; 3] {
    a.map(|p| Vec2::new(p[0], p[1]))
}

impl TrajectoryFile {
    pub fn from_states(states: &[PhaseState], producer: &str) -> Self {
        Self {
            masses: [1.0; 3],
            times: states.iter().map(|s| s.time).collect(),
            positions: states.iter().map(|s| xy(&s.q)).collect(),
            velocities: Some(states.iter().map(|s| xy(&s.v)).collect()),
            metadata: Metadata {
                producer: producer.into(),
                ..Default::default()
            },
        }
    }

    pub fn from_path(p: &DiscretePath, producer: &str) -> Self {
        Self {
            masses: [1.0; 3],
            times: p.times().to_vec(),
            positions: p.nodes().iter().map(|c| xy(c.positions())).collect(),
            velocities: None,
            metadata: Metadata {
                producer: producer.into(),
                ..Default::default()
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.masses != [1.0; 3] {
            return bad(format!("masses must be [1, 1, 1], got {:?}", self.masses));
        }
        let n = self.times.len();
        if n == 0 {
            return bad("no samples".into());
        }
        if self.positions.len() != n {
            return bad(format!("{n} times but {} position rows", self.positions.len()));
        }
        if let Some(v) = &self.velocities {
            if v.len() != n {
                return bad(format!("{n} times but {} velocity rows", v.len()));
            }
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("times must be strictly increasing".into());
        }
        let finite = self.times.iter().all(|t| t.is_finite())
            && self.positions.iter().flatten().flatten().all(|x| x.is_finite())
            && self
                .velocities
                .iter()
                .flatten()
                .flatten()
                .flatten()
                .all(|x| x.is_finite());
        if !finite {
            return bad("non-finite value".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn states(&self) -> Result<Vec<PhaseState>, CliError> {
        let v = self
            .velocities
            .as_ref()
            .ok_or_else(|| CliError::Validation("file has no velocities".into()))?;
        Ok((0..self.len())
            .map(|k| PhaseState::raw(vecs(&self.positions[k]), vecs(&v[k]), self.times[k]))
            .collect())
    }

    pub fn path(&self) -> Result<DiscretePath, CliError> {
        let nodes = self
            .positions
            .iter()
            .map(|q| Configuration::new(vecs(q)))
            .collect();
        DiscretePath::new(self.times.clone(), nodes).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let f: Self = serde_json::from_str(s).map_err(|e| CliError::Validation(format!("malformed trajectory file: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| CliError::io(path, e))
    }

    /// `t,q1x,q1y,q2x,q2y,q3x,q3y` plus velocity columns when present.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut header = String::from("t,q1x,q1y,q2x,q2y,q3x,q3y");
        if self.velocities.is_some() {
            header.push_str(",v1x,v1y,v2x,v2y,v3x,v3y");
        }
        writeln!(out, "{header}")?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k]];
            row.extend(self.positions[k].iter().flatten());
            if let Some(v) = &self.velocities {
                row.extend(v[k].iter().flatten());
            }
            writeln!(out, "{}", join(&row))?;
        }
        Ok(())
    }

    /// `t,Z1x,Z1y,Z2x,Z2y,dtheta`; the angle is left empty where one Jacobi
    /// vector vanishes.
    pub fn write_jacobi_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "t,Z1x,Z1y,Z2x,Z2y,dtheta")?;
        for k in 0..self.len() {
            let j = to_jacobi(&Configuration::new(vecs(&self.positions[k])));
            let row = join(&[self.times[k], j.z1.x, j.z1.y, j.z2.x, j.z2.y]);
            match delta_theta(&j) {
                Ok(d) => writeln!(out, "{row},{d}")?,
                Err(_) => writeln!(out, "{row},")?,
            }
        }
        Ok(())
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> TrajectoryFile {
        let s = tribody::states::broucke_henon_t0();
        TrajectoryFile::from_states(&[s, s.at_time(0.5)], "test")
    }

    #[test]
    fn validation_catches_inconsistent_lengths() {
        let mut f = sample();
        assert!(f.validate().is_ok());
        f.positions.pop();
        assert!(matches!(f.validate(), Err(CliError::Validation(_))));
        let mut f = sample();
        f.masses = [1.0, 2.0, 1.0];
        assert!(f.validate().is_err());
        let mut f = sample();
        f.times[1] = 0.0;
        assert!(f.validate().is_err());
    }

    #[test]
    fn truncated_json_is_a_validation_error() {
        let s = sample().to_json().unwrap();
        assert!(matches!(
            TrajectoryFile::from_json(&s[..s.len() / 2]),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let f = sample();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), f.len() + 1);
        assert!(text.starts_with("t,q1x,q1y,q2x,q2y,q3x,q3y,v1x"));
    }

    #[test]
    fn collision_rows_leave_the_angle_empty() {
        let q = [[-1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]];
        let f = TrajectoryFile {
            masses: [1.0; 3],
            times: vec![0.0],
            positions: vec![q],
            velocities: None,
            metadata: Metadata::default(),
        };
        let mut buf = Vec::new();
        f.write_jacobi_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(1).unwrap().ends_with(','));
    }

    fn any_f64() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e3..1e3f64,
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
        ]
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            rows in proptest::collection::vec(proptest::array::uniform12(any_f64()), 1..20),
            tol in any_f64(),
        ) {
            let n = rows.len();
            let f = TrajectoryFile {
                masses: [1.0; 3],
                times: (0..n).map(|k| k as f64 / 7.0).collect(),
                positions: rows.iter().map(|r| [[r[0], r[1]], [r[2], r[3]], [r[4], r[5]]]).collect(),
                velocities: Some(rows.iter().map(|r| [[r[6], r[7]], [r[8], r[9]], [r[10], r[11]]]).collect()),
                metadata: Metadata {
                    producer: "prop".into(),
                    tolerances: [("tol".to_string(), tol)].into(),
                    ..Default::default()
                },
            };
            let back = TrajectoryFile::from_json(&f.to_json().unwrap()).unwrap();
            let bits = |g: &TrajectoryFile| -> Vec<u64> {
                g.times.iter()
                    .chain(g.positions.iter().flatten().flatten())
                    .chain(g.velocities.iter().flatten().flatten().flatten())
                    .chain(g.metadata.tolerances.values())
                    .map(|x| x.to_bits())
                    .collect()
            };
            prop_assert_eq!(bits(&f), bits(&back));
        }
    }
}
