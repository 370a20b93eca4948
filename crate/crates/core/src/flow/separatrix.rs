use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::geometry::P3;
use super::scene::{CriticalPoint, FlowScene, SceneKind};
use super::trace::{trace, Direction, Lift, StopRule, Terminus};
use super::FlowError;

/// A branch of a saddle's descending or ascending curve, seeded at
/// `p + branch * eps * e` (descending) or `p + branch * eps * a` (ascending).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separatrix {
    pub origin: Lift,
    pub direction: Direction,
    /// `+1` or `-1`.
    pub branch: i8,
    /// Orientation sign of the branch: with `D(p)` oriented by `e` and the
    /// co-orientation of the ascending curve given by `a`, both equal the
    /// branch sign.
    pub sign: i8,
    pub samples: Vec<P3>,
    pub arclength: Vec<f64>,
    pub values: Vec<f64>,
    pub terminus: Terminus,
}

pub fn seed(scene: &FlowScene, cp: &CriticalPoint, shift: [i64; 2], direction: Direction, branch: i8) -> P3 {
    let d = match direction {
        Direction::Descending => cp.orientation[0],
        Direction::Ascending => cp.ascending.expect("saddle"),
    };
    let base = scene.lattice().shift(&cp.position, shift);
    scene.retract(&(base + d * (branch as f64 * scene.numerics().eps)))
}

/// Traces one branch from the lift `cp + shift`, stopping at `level` if given.
pub fn trace_branch(
    scene: &FlowScene,
    cp: &CriticalPoint,
    shift: [i64; 2],
    direction: Direction,
    branch: i8,
    level: Option<f64>,
) -> Result<Separatrix, FlowError> {
    let origin = Lift { id: cp.id.clone(), shift };
    let start = seed(scene, cp, shift, direction, branch);
    let stop = StopRule { level, origin: Some(origin.clone()) };
    let t = trace(scene, &start, direction, &stop).map_err(|e| FlowError::Branch {
        branch: format!("{} {:?} {:+}", cp.id, direction, branch),
        source: Box::new(e),
    })?;
    let mut samples = vec![scene.lattice().shift(&cp.position, shift)];
    samples.extend(t.samples);
    let mut values = vec![cp.value + scene.lattice().value_shift(shift)];
    values.extend(t.values);
    let mut arclength = vec![0.0];
    arclength.extend(t.arclength.iter().map(|s| s + scene.numerics().eps));
    Ok(Separatrix { origin, direction, branch, sign: branch, samples, arclength, values, terminus: t.terminus })
}

/// All four branches of every saddle. On circle-valued scenes branches are
/// cut at `depth` (default 1) below, resp. above, the saddle value.
pub fn extract_separatrices(scene: &FlowScene, depth: Option<f64>) -> Result<Vec<Separatrix>, FlowError> {
    scene.model()?;
    let circle = scene.kind() == SceneKind::CircleValued;
    let depth = depth.unwrap_or(1.0);
    let jobs: Vec<(&CriticalPoint, Direction, i8)> = scene
        .critical_of_index(1)
        .into_iter()
        .flat_map(|c| {
            [Direction::Descending, Direction::Ascending]
                .into_iter()
                .flat_map(move |d| [1i8, -1].into_iter().map(move |b| (c, d, b)))
        })
        .collect();
    jobs.par_iter()
        .map(|(c, d, b)| {
            let level = circle.then(|| match d {
                Direction::Descending => c.value - depth,
                Direction::Ascending => c.value + depth,
            });
            trace_branch(scene, c, [0, 0], *d, *b, level)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connection {
    pub from: String,
    pub direction: Direction,
    pub branch: i8,
    pub to: Lift,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnosis {
    pub pass: bool,
    pub connections: Vec<Connection>,
}

/// On surfaces almost transversality means no flow line joins two saddles.
pub fn check_almost_transversality(scene: &FlowScene) -> Result<Diagnosis, FlowError> {
    let seps = extract_separatrices(scene, None)?;
    Ok(diagnose(scene, &seps))
}

pub fn diagnose(scene: &FlowScene, seps: &[Separatrix]) -> Diagnosis {
    let connections: Vec<Connection> = seps
        .iter()
        .filter_map(|s| {
            let lift = s.terminus.critical()?;
            (scene.critical(&lift.id)?.index == 1).then(|| Connection {
                from: s.origin.id.clone(),
                direction: s.direction,
                branch: s.branch,
                to: lift.clone(),
            })
        })
        .collect();
    Diagnosis { pass: connections.is_empty(), connections }
}

/// CSV with one row per sample: origin, direction, branch, x, y, z, f, arclength.
pub fn separatrix_csv(seps: &[Separatrix]) -> String {
    let mut out = String::from("origin,direction,branch,x,y,z,f,arclength\n");
    for s in seps {
        let dir = match s.direction {
            Direction::Descending => "descending",
            Direction::Ascending => "ascending",
        };
        for ((p, f), a) in s.samples.iter().zip(&s.values).zip(&s.arclength) {
            let _ = writeln!(out, "{},{},{},{:.12},{:.12},{:.12},{:.12},{:.12}", s.origin.id, dir, s.branch, p.x, p.y, p.z, f, a);
        }
    }
    out
}
