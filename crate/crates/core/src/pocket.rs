//! Growth hotspots on a docked ligand: free grid volume around each ligand
//! heavy atom and the receptor residues in contact with it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub type Point = [f64; 3];

pub fn distance(a: &Point, b: &Point) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidueId {
    pub chain: String,
    pub resname: String,
    pub resseq: i32,
    pub icode: String,
}

impl fmt::Display for ResidueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}{}", self.chain, self.resname, self.resseq, self.icode)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructAtom {
    /// Element symbol as written, e.g. "C", "CL".
    pub element: String,
    pub coords: Point,
    pub name: String,
    pub occupancy: f64,
    /// Index into [`Structure::residues`].
    pub residue: usize,
}

impl StructAtom {
    pub fn is_heavy(&self) -> bool {
        !(self.element.eq_ignore_ascii_case("H") || self.element.eq_ignore_ascii_case("D"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residue {
    pub id: ResidueId,
    pub atoms: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("atom {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("atom {0} does not belong to exactly one residue")]
    Membership(usize),
    #[error("structure has no heavy atoms")]
    NoHeavyAtoms,
    #[error("invalid grid settings: {0}")]
    Grid(&'static str),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("contact threshold must be positive")]
    BadContact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    atoms: Vec<StructAtom>,
    residues: Vec<Residue>,
}

impl Structure {
    pub fn new(atoms: Vec<StructAtom>, residues: Vec<Residue>) -> Result<Structure, StructureError> {
        let mut owner = vec![usize::MAX; atoms.len()];
        for (ri, r) in residues.iter().enumerate() {
            for &a in &r.atoms {
                if a >= atoms.len() || owner[a] != usize::MAX || atoms[a].residue != ri {
                    return Err(StructureError::Membership(a.min(atoms.len().saturating_sub(1))));
                }
                owner[a] = ri;
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            if owner[i] == usize::MAX {
                return Err(StructureError::Membership(i));
            }
            if !a.coords.iter().all(|c| c.is_finite()) {
                return Err(StructureError::NonFinite(i));
            }
        }
        Ok(Structure { atoms, residues })
    }

    pub fn atoms(&self) -> &[StructAtom] {
        &self.atoms
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn heavy_atoms(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| self.atoms[i].is_heavy()).collect()
    }
}

/// Uniform cell list over a point set. Queries return exactly what an
/// exhaustive scan would, since candidate cells are padded by one cell on
/// every side and the final test uses [`distance`].
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    points: Vec<Point>,
    ids: Vec<usize>,
    origin: Point,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl SpatialIndex {
    /// `ids[i]` is reported for `points[i]`; `cell` should be close to the
    /// typical query radius.
    pub fn new(points: Vec<Point>, ids: Vec<usize>, cell: f64) -> SpatialIndex {
        assert_eq!(points.len(), ids.len());
        let cell = if cell > 0.0 { cell } else { 1.0 };
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &points {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let mut dims = [1usize; 3];
        for d in 0..3 {
            dims[d] = (libm::floor((hi[d] - lo[d]) / cell) as usize + 1).min(1 << 10);
        }
        let slot = |p: &Point| -> usize {
            let mut c = [0usize; 3];
            for d in 0..3 {
                let v = libm::floor((p[d] - lo[d]) / cell);
                c[d] = (v.max(0.0) as usize).min(dims[d] - 1);
            }
            (c[0] * dims[1] + c[1]) * dims[2] + c[2]
        };
        let ncell = dims[0] * dims[1] * dims[2];
        let mut starts = vec![0usize; ncell + 1];
        for p in &points {
            starts[slot(p) + 1] += 1;
        }
        for i in 0..ncell {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut items = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let s = slot(p);
            items[fill[s]] = i;
            fill[s] += 1;
        }
        SpatialIndex {
            points,
            ids,
            origin: lo,
            cell,
            dims,
            starts,
            items,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn visit(&self, q: &Point, r: f64, mut f: impl FnMut(usize) -> bool) {
        if self.points.is_empty() {
            return;
        }
        let mut range = [(0usize, 0usize); 3];
        for d in 0..3 {
            let lo = libm::floor((q[d] - r - self.origin[d]) / self.cell) - 1.0;
            let hi = libm::floor((q[d] + r - self.origin[d]) / self.cell) + 1.0;
            let max = (self.dims[d] - 1) as f64;
            // the edge cells also hold every clamped point beyond them
            if hi < 0.0 || lo > max {
                return;
            }
            range[d] = (lo.max(0.0) as usize, hi.min(max) as usize);
        }
        for x in range[0].0..=range[0].1 {
            for y in range[1].0..=range[1].1 {
                for z in range[2].0..=range[2].1 {
                    let c = (x * self.dims[1] + y) * self.dims[2] + z;
                    for &i in &self.items[self.starts[c]..self.starts[c + 1]] {
                        if distance(q, &self.points[i]) <= r && !f(i) {
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Whether some point lies within `r` (inclusive) of `q`.
    pub fn any_within(&self, q: &Point, r: f64) -> bool {
        let mut found = false;
        self.visit(q, r, |_| {
            found = true;
            false
        });
        found
    }

    /// Ids of all points within `r` (inclusive) of `q`, ascending, deduplicated.
    pub fn ids_within(&self, q: &Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(q, r, |i| {
            out.push(self.ids[i]);
            true
        });
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub edge: f64,
    pub resolution: f64,
    pub receptor_clearance: f64,
    pub ligand_clearance: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            edge: 5.0,
            resolution: 0.5,
            receptor_clearance: 2.2,
            ligand_clearance: 1.2,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), StructureError> {
        let finite = [self.edge, self.resolution, self.receptor_clearance, self.ligand_clearance]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(StructureError::Grid("non-finite value"));
        }
        if self.edge <= 0.0 {
            return Err(StructureError::Grid("edge must be positive"));
        }
        if self.resolution <= 0.0 || self.resolution > self.edge {
            return Err(StructureError::Grid("resolution must be in (0, edge]"));
        }
        if self.receptor_clearance <= 0.0 || self.ligand_clearance <= 0.0 {
            return Err(StructureError::Grid("clearances must be positive"));
        }
        Ok(())
    }

    /// Lattice steps on each side of the center.
    pub fn half_steps(&self) -> i64 {
        libm::floor(self.edge / 2.0 / self.resolution + 1e-9) as i64
    }

    /// Lattice points around `center`, endpoints included.
    pub fn lattice(&self, center: &Point) -> impl Iterator<Item = Point> + '_ {
        let h = self.half_steps();
        let c = *center;
        let res = self.resolution;
        (-h..=h).flat_map(move |i| {
            (-h..=h).flat_map(move |j| {
                (-h..=h).map(move |k| [c[0] + i as f64 * res, c[1] + j as f64 * res, c[2] + k as f64 * res])
            })
        })
    }

    pub fn cell_volume(&self) -> f64 {
        self.resolution * self.resolution * self.resolution
    }
}

/// Spatial indexes over the heavy atoms of a receptor and ligand.
#[derive(Clone, Debug)]
pub struct Pocket<'a> {
    pub receptor: &'a Structure,
    pub ligand: &'a Structure,
    receptor_index: SpatialIndex,
    ligand_index: SpatialIndex,
    residue_index: SpatialIndex,
}

impl<'a> Pocket<'a> {
    pub fn new(receptor: &'a Structure, ligand: &'a Structure, cfg: &GridConfig, d_c: f64) -> Pocket<'a> {
        let heavy = |s: &Structure| -> (Vec<Point>, Vec<usize>) {
            s.heavy_atoms().into_iter().map(|i| (s.atoms()[i].coords, i)).unzip()
        };
        let (rp, ri) = heavy(receptor);
        let (lp, li) = heavy(ligand);
        let residues: Vec<usize> = ri.iter().map(|&i| receptor.atoms()[i].residue).collect();
        Pocket {
            receptor,
            ligand,
            receptor_index: SpatialIndex::new(rp.clone(), ri, cfg.receptor_clearance),
            ligand_index: SpatialIndex::new(lp, li, cfg.ligand_clearance),
            residue_index: SpatialIndex::new(rp, residues, d_c),
        }
    }

    /// Free lattice points around `center`: farther than the receptor
    /// clearance from every receptor heavy atom and farther than the ligand
    /// clearance from every ligand heavy atom.
    pub fn grid_count(&self, center: &Point, cfg: &GridConfig) -> usize {
        cfg.lattice(center)
            .filter(|g| {
                !self.receptor_index.any_within(g, cfg.receptor_clearance)
                    && !self.ligand_index.any_within(g, cfg.ligand_clearance)
            })
            .count()
    }

    /// Residue indices with a heavy atom within `d_c` (inclusive).
    pub fn neighboring_residues(&self, center: &Point, d_c: f64) -> Vec<usize> {
        self.residue_index.ids_within(center, d_c)
    }

    /// Volume, count and contacts for one ligand atom.
    pub fn evaluate(&self, ligand_atom: usize, cfg: &GridConfig, d_c: f64) -> Site {
        let atom = &self.ligand.atoms()[ligand_atom];
        let grid_count = self.grid_count(&atom.coords, cfg);
        Site {
            ligand_atom_index: ligand_atom,
            element: atom.element.clone(),
            grid_count,
            volume: grid_count as f64 * cfg.cell_volume(),
            residues: self.neighboring_residues(&atom.coords, d_c),
        }
    }
}

/// Unranked per-atom result.
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub ligand_atom_index: usize,
    pub element: String,
    pub grid_count: usize,
    pub volume: f64,
    /// Receptor residue indices, ascending.
    pub residues: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hotspot {
    pub rank: usize,
    pub ligand_atom_index: usize,
    pub element: String,
    pub volume: f64,
    pub grid_count: usize,
    pub neighbors: Vec<ResidueId>,
}

/// Sorts sites by volume, largest first, lower atom index first on ties,
/// and keeps the top `k`.
pub fn rank_sites(mut sites: Vec<Site>, receptor: &Structure, k: usize) -> Vec<Hotspot> {
    sites.sort_by(|a, b| {
        b.grid_count
            .cmp(&a.grid_count)
            .then(a.ligand_atom_index.cmp(&b.ligand_atom_index))
    });
    sites
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, s)| Hotspot {
            rank: i + 1,
            ligand_atom_index: s.ligand_atom_index,
            element: s.element,
            volume: s.volume,
            grid_count: s.grid_count,
            neighbors: s.residues.iter().map(|&r| receptor.residues()[r].id.clone()).collect(),
        })
        .collect()
}

pub fn check_inputs(ligand: &Structure, k: usize, d_c: f64, cfg: &GridConfig) -> Result<(), StructureError> {
    cfg.validate()?;
    if k == 0 {
        return Err(StructureError::ZeroK);
    }
    if !(d_c > 0.0 && d_c.is_finite()) {
        return Err(StructureError::BadContact);
    }
    if ligand.heavy_atoms().is_empty() {
        return Err(StructureError::NoHeavyAtoms);
    }
    Ok(())
}

/// Top-`k` hotspots of `ligand` in `receptor`.
pub fn identify_hotspots(
    receptor: &Structure,
    ligand: &Structure,
    k: usize,
    d_c: f64,
    cfg: &GridConfig,
) -> Result<Vec<Hotspot>, StructureError> {
    check_inputs(ligand, k, d_c, cfg)?;
    let pocket = Pocket::new(receptor, ligand, cfg, d_c);
    let sites = ligand.heavy_atoms().into_iter().map(|i| pocket.evaluate(i, cfg, d_c)).collect();
    Ok(rank_sites(sites, receptor, k))
}

/// Fixed-wording paragraph describing a hotspot for a downstream prompt.
pub fn context_paragraph(h: &Hotspot, d_c: f64, fragmentation: &str) -> String {
    let mut s = format!(
        "Hotspot {} is ligand atom {} ({}) with {:.3} A^3 of unoccupied volume ({} grid points). ",
        h.rank, h.ligand_atom_index, h.element, h.volume, h.grid_count
    );
    if h.neighbors.is_empty() {
        s.push_str(&format!("No receptor residues lie within {d_c:.1} A. "));
    } else {
        let list: Vec<String> = h.neighbors.iter().map(|r| format!("{r}")).collect();
        s.push_str(&format!("Receptor residues within {d_c:.1} A: {}. ", list.join(", ")));
    }
    s.push_str("Current ligand fragmentation: ");
    s.push_str(fragmentation);
    s.push('.');
    s
}
