//! Station layouts: small fixed-pathloss networks and square wraparound grids
//! with a frequency reuse plan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of 20 MHz channels assumed available in the 5 GHz band (240 MHz).
pub const TOTAL_CHANNELS: usize = 12;

pub type StationId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Ap,
    Sta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub role: Role,
    pub position: Position,
    /// Index of the serving cell (equal to the AP's cell for the AP itself).
    pub cell: usize,
    /// Channel group of the serving cell.
    pub channel_group: usize,
}

/// How large-scale gain between two stations is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    /// Propagation given directly by two pathloss values rather than geometry.
    FixedPathloss {
        intercell_pl_db: f64,
        intracell_pl_db: f64,
    },
    /// Square grid of cells with toroidal distance.
    Grid {
        cells_per_side: usize,
        isd_m: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub stations: Vec<Station>,
    pub world_side: f64,
    pub wraparound: bool,
    pub isd: f64,
    pub n_cells: usize,
    pub stas_per_ap: usize,
    pub layout: Layout,
}

impl Topology {
    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn station(&self, id: StationId) -> Result<&Station> {
        self.stations.get(id).ok_or(Error::UnknownStation(id))
    }

    pub fn aps(&self) -> impl Iterator<Item = &Station> {
        self.stations.iter().filter(|s| s.role == Role::Ap)
    }

    pub fn stas(&self) -> impl Iterator<Item = &Station> {
        self.stations.iter().filter(|s| s.role == Role::Sta)
    }

    pub fn ap_of_cell(&self, cell: usize) -> Option<StationId> {
        self.aps().find(|s| s.cell == cell).map(|s| s.id)
    }

    pub fn stas_of_cell(&self, cell: usize) -> Vec<StationId> {
        self.stas().filter(|s| s.cell == cell).map(|s| s.id).collect()
    }

    pub fn distance(&self, a: StationId, b: StationId) -> Result<f64> {
        let pa = self.station(a)?.position;
        let pb = self.station(b)?.position;
        Ok(if self.wraparound {
            wraparound_distance(pa, pb, self.world_side)
        } else {
            (pa.x - pb.x).hypot(pa.y - pb.y)
        })
    }

    /// Shifts every station by `(dx, dy)` on the torus.
    pub fn translated(&self, dx: f64, dy: f64) -> Topology {
        let mut t = self.clone();
        for s in &mut t.stations {
            s.position.x = (s.position.x + dx).rem_euclid(self.world_side);
            s.position.y = (s.position.y + dy).rem_euclid(self.world_side);
        }
        t
    }
}

/// Euclidean distance minimised over the toroidal images of `b`.
pub fn wraparound_distance(a: Position, b: Position, world_side: f64) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs().rem_euclid(world_side);
        d.min(world_side - d)
    };
    wrap(a.x - b.x).hypot(wrap(a.y - b.y))
}

/// Small co-channel network whose propagation is given by two pathloss values:
/// `intracell_pl_db` between any two stations of a cell and `intercell_pl_db`
/// between any two stations of different cells.
pub fn build_small_network(
    n_aps: usize,
    intercell_pl_db: f64,
    intracell_pl_db: f64,
    stas_per_ap: usize,
) -> Result<Topology> {
    if !(1..=4).contains(&n_aps) {
        return Err(Error::Topology(format!("n_aps must be in 1..=4, got {n_aps}")));
    }
    if stas_per_ap == 0 {
        return Err(Error::Topology("stas_per_ap must be positive".into()));
    }
    // Positions are only for plotting: cells on a 2x2 layout, STAs on a ring.
    let spacing = 20.0;
    let mut stations = Vec::new();
    for cell in 0..n_aps {
        let cx = spacing * (cell % 2) as f64 + spacing / 2.0;
        let cy = spacing * (cell / 2) as f64 + spacing / 2.0;
        stations.push(Station {
            id: stations.len(),
            role: Role::Ap,
            position: Position::new(cx, cy),
            cell,
            channel_group: 0,
        });
        for k in 0..stas_per_ap {
            let a = 2.0 * std::f64::consts::PI * k as f64 / stas_per_ap as f64;
            stations.push(Station {
                id: stations.len(),
                role: Role::Sta,
                position: Position::new(cx + 3.0 * a.cos(), cy + 3.0 * a.sin()),
                cell,
                channel_group: 0,
            });
        }
    }
    Ok(Topology {
        stations,
        world_side: 2.0 * spacing,
        wraparound: false,
        isd: spacing,
        n_cells: n_aps,
        stas_per_ap,
        layout: Layout::FixedPathloss {
            intercell_pl_db,
            intracell_pl_db,
        },
    })
}

/// Assignment of grid cells to channel groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub reuse_factor: usize,
    pub channel_of_cell: Vec<usize>,
    pub channels_per_group: usize,
}

impl FrequencyPlan {
    pub fn n_groups(&self) -> usize {
        self.reuse_factor
    }

    pub fn cells_in_group(&self, group: usize) -> Vec<usize> {
        self.channel_of_cell
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == group)
            .map(|(c, _)| c)
            .collect()
    }

    /// Reuse plan on an `n x n` torus of cells.
    ///
    /// Co-channel cells form a subgroup of `Z_n x Z_n` of index `reuse`; among
    /// all such subgroups the one with the largest minimum toroidal separation
    /// is chosen, and its cosets are the channel groups.
    pub fn square_grid(n: usize, reuse: usize) -> Result<FrequencyPlan> {
        if n == 0 || reuse == 0 {
            return Err(Error::Topology("grid size and reuse must be positive".into()));
        }
        if TOTAL_CHANNELS % reuse != 0 {
            return Err(Error::Topology(format!(
                "reuse {reuse} does not divide the {TOTAL_CHANNELS} available channels"
            )));
        }
        let cells = n * n;
        if cells % reuse != 0 {
            return Err(Error::Topology(format!(
                "reuse {reuse} does not tile a {n}x{n} grid"
            )));
        }
        let order = cells / reuse;
        let mut best: Option<(f64, Vec<bool>)> = None;
        for g1 in 0..cells {
            for g2 in g1..cells {
                let members = subgroup(n, (g1 % n, g1 / n), (g2 % n, g2 / n));
                if members.iter().filter(|&&m| m).count() != order {
                    continue;
                }
                let sep = min_separation(n, &members);
                if best.as_ref().is_none_or(|(s, _)| sep > *s + 1e-12) {
                    best = Some((sep, members));
                }
            }
        }
        let (_, members) = best.ok_or_else(|| {
            Error::Topology(format!("no reuse-{reuse} pattern tiles a {n}x{n} torus"))
        })?;
        let lattice: Vec<(usize, usize)> = (0..cells)
            .filter(|&c| members[c])
            .map(|c| (c % n, c / n))
            .collect();
        let mut channel_of_cell = vec![usize::MAX; cells];
        let mut next = 0;
        for c in 0..cells {
            if channel_of_cell[c] != usize::MAX {
                continue;
            }
            let (x, y) = (c % n, c / n);
            for &(lx, ly) in &lattice {
                let m = (x + lx) % n + ((y + ly) % n) * n;
                channel_of_cell[m] = next;
            }
            next += 1;
        }
        Ok(FrequencyPlan {
            reuse_factor: reuse,
            channel_of_cell,
            channels_per_group: (TOTAL_CHANNELS / reuse).max(1),
        })
    }
}

fn subgroup(n: usize, a: (usize, usize), b: (usize, usize)) -> Vec<bool> {
    let mut members = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = (i * a.0 + j * b.0) % n;
            let y = (i * a.1 + j * b.1) % n;
            members[x + y * n] = true;
        }
    }
    members
}

fn min_separation(n: usize, members: &[bool]) -> f64 {
    let wrap = |d: usize| d.min(n - d) as f64;
    members
        .iter()
        .enumerate()
        .filter(|&(c, &m)| m && c != 0)
        .map(|(c, _)| wrap(c % n).hypot(wrap(c / n)))
        .fold(f64::INFINITY, f64::min)
}

/// Square wraparound grid of `n x n` cells with APs at the cell centres and
/// `stas_per_ap` STAs uniform in a square of side `sta_spread * isd` around
/// each AP (`sta_spread = 1` fills the whole cell).
pub fn build_grid_network(
    n_cells_per_side: usize,
    isd: f64,
    reuse: usize,
    stas_per_ap: usize,
    sta_spread: f64,
    seed: u64,
) -> Result<(Topology, FrequencyPlan)> {
    if n_cells_per_side == 0 || stas_per_ap == 0 {
        return Err(Error::Topology("grid size and STA count must be positive".into()));
    }
    if !(isd > 0.0) {
        return Err(Error::Topology(format!("isd must be positive, got {isd}")));
    }
    if !(sta_spread > 0.0 && sta_spread <= 1.0) {
        return Err(Error::Topology(format!("sta_spread must be in (0, 1], got {sta_spread}")));
    }
    let plan = FrequencyPlan::square_grid(n_cells_per_side, reuse)?;
    let n = n_cells_per_side;
    let world = n as f64 * isd;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stations = Vec::with_capacity(n * n * (stas_per_ap + 1));
    for cell in 0..n * n {
        let cx = (cell % n) as f64 * isd + isd / 2.0;
        let cy = (cell / n) as f64 * isd + isd / 2.0;
        let group = plan.channel_of_cell[cell];
        stations.push(Station {
            id: stations.len(),
            role: Role::Ap,
            position: Position::new(cx, cy),
            cell,
            channel_group: group,
        });
        for _ in 0..stas_per_ap {
            let ux: f64 = rng.random::<f64>() - 0.5;
            let uy: f64 = rng.random::<f64>() - 0.5;
            let x = (cx + ux * sta_spread * isd).rem_euclid(world);
            let y = (cy + uy * sta_spread * isd).rem_euclid(world);
            stations.push(Station {
                id: stations.len(),
                role: Role::Sta,
                position: Position::new(x, y),
                cell,
                channel_group: group,
            });
        }
    }
    Ok((
        Topology {
            stations,
            world_side: world,
            wraparound: true,
            isd,
            n_cells: n * n,
            stas_per_ap,
            layout: Layout::Grid {
                cells_per_side: n,
                isd_m: isd,
            },
        },
        plan,
    ))
}

/// Zero-mean Gaussian shadowing in dB, one symmetric draw per station pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowingField {
    pub sigma_db: f64,
    n: usize,
    /// Upper-triangular storage, row-major over `a < b`.
    values: Vec<f64>,
}

impl ShadowingField {
    pub fn generate(n: usize, sigma_db: f64, seed: u64) -> Self {
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        if sigma_db > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sigma_db).expect("finite sigma");
            for _ in 0..n * n.saturating_sub(1) / 2 {
                values.push(normal.sample(&mut rng));
            }
        } else {
            values.resize(n * n.saturating_sub(1) / 2, 0.0);
        }
        Self { sigma_db, n, values }
    }

    pub fn get(&self, a: StationId, b: StationId) -> f64 {
        if a == b {
            return 0.0;
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        // Offset of row i in the packed triangle, then column j.
        let row = i * (2 * self.n - i - 1) / 2;
        self.values[row + (j - i - 1)]
    }
}
