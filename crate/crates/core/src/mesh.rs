use std::collections::HashMap;

use crate::cube::{exp2i, DyadicCube};
use crate::error::{dom_err, par_err, Result};

/// Mesh flavors. `Uniform` subdivides the root cube into 2^(n*depth)
/// equal cells. `Graded` is 1-d only: dyadic bands [2^-j-1, 2^-j) for
/// j = 0..=bands, each split into `per_band` equal cells, so power-law
/// densities near the origin are resolved with geometric accuracy. The
/// leftover interval [0, 2^-(bands+1)) is a truncation zone carrying no
/// cells; step functions vanish there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform { depth: u32 },
    Graded { bands: u32, per_band: u32 },
}

/// Cells covered by a cube: a contiguous position range in 1-d, an
/// explicit list for higher dimensions.
#[derive(Debug, Clone)]
enum CellSpan {
    Range(u32, u32),
    List(Vec<u32>),
}

/// Half-open interval of the 1-d root [0,1); endpoints are exact dyadic
/// rationals in every use here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub fn new(lo: f64, hi: f64) -> Self {
        Region { lo, hi }
    }

    pub fn measure(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// How a dyadic cube relates to a mesh: either it is one of the mesh's
/// enumerable cubes (a union of cells), or it sits strictly inside a
/// single cell (where every step function is constant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    Exact(usize),
    SubCell { leaf: usize },
}

/// A dyadic mesh: the tree of all dyadic cubes that are unions of cells,
/// stored as an arena with ids in topological order (parents first).
/// Leaves correspond one-to-one to cells, except the graded mesh's
/// truncation-zone leaf which owns no cell.
#[derive(Debug)]
pub struct Mesh {
    dim: u32,
    kind: MeshKind,
    cubes: Vec<DyadicCube>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    span: Vec<CellSpan>,
    lookup: HashMap<DyadicCube, usize>,
    cell_leaf: Vec<usize>,
    // 1-d geometry; empty for dim >= 2
    cell_lo: Vec<f64>,
    cell_hi: Vec<f64>,
    cell_measure: Vec<f64>,
}

pub const NO_PARENT: usize = usize::MAX;

impl Mesh {
    pub fn uniform(dim: u32, depth: u32) -> Result<Mesh> {
        if dim == 0 || dim > 2 {
            return par_err("uniform meshes support dim 1 or 2");
        }
        if (dim * depth) >= 26 {
            return par_err("uniform mesh too fine (2^(dim*depth) cells)");
        }
        let n = dim as usize;
        let mut cubes = Vec::new();
        for level in 0..=depth {
            let side = 1u64 << level;
            let mut idx = vec![0u64; n];
            loop {
                cubes.push(DyadicCube::new(level, idx.clone())?);
                // odometer over the index vector, last axis fastest
                let mut ax = n;
                loop {
                    if ax == 0 {
                        break;
                    }
                    ax -= 1;
                    idx[ax] += 1;
                    if idx[ax] < side {
                        break;
                    }
                    idx[ax] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        let lookup: HashMap<_, _> = cubes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let ncells = 1usize << (n as u32 * depth);
        let first_cell_id = cubes.len() - ncells;
        let mut parent = vec![NO_PARENT; cubes.len()];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); cubes.len()];
        for (id, c) in cubes.iter().enumerate() {
            if let Some(p) = c.parent() {
                let pid = lookup[&p];
                parent[id] = pid;
                children[pid].push(id);
            }
        }
        let mut span = Vec::with_capacity(cubes.len());
        for c in &cubes {
            if dim == 1 {
                let shift = depth - c.level();
                let a = (c.index()[0] << shift) as u32;
                span.push(CellSpan::Range(a, a + (1u32 << shift)));
            } else {
                let shift = depth - c.level();
                let w = 1u64 << shift;
                let mut cells = Vec::with_capacity((w * w) as usize);
                let (r0, c0) = (c.index()[0] << shift, c.index()[1] << shift);
                for r in r0..r0 + w {
                    for cc in c0..c0 + w {
                        cells.push((r << depth | cc) as u32);
                    }
                }
                span.push(CellSpan::List(cells));
            }
        }
        let cell_leaf: Vec<usize> = (0..ncells).map(|i| first_cell_id + i).collect();
        let (cell_lo, cell_hi): (Vec<f64>, Vec<f64>) = if dim == 1 {
            (0..ncells)
                .map(|i| {
                    let s = exp2i(-(depth as i64));
                    (i as f64 * s, (i + 1) as f64 * s)
                })
                .unzip()
        } else {
            (Vec::new(), Vec::new())
        };
        let cm = exp2i(-((n as i64) * depth as i64));
        Ok(Mesh {
            dim,
            kind: MeshKind::Uniform { depth },
            cubes,
            parent,
            children,
            span,
            lookup,
            cell_leaf,
            cell_lo,
            cell_hi,
            cell_measure: vec![cm; ncells],
        })
    }

    pub fn graded(bands: u32, per_band: u32) -> Result<Mesh> {
        if per_band == 0 || !per_band.is_power_of_two() {
            return par_err("per_band must be a power of two");
        }
        let kappa = per_band.trailing_zeros();
        if bands as i64 + 1 + kappa as i64 > 1000 {
            return par_err("graded mesh exceeds the f64-safe depth");
        }
        let j_top = bands;
        let k = per_band;
        let ncells = ((j_top + 1) * k) as usize;
        // cells ascend by position: band `bands` (innermost) first
        let mut cell_lo = Vec::with_capacity(ncells);
        let mut cell_hi = Vec::with_capacity(ncells);
        for j in (0..=j_top).rev() {
            let e = -((j + 1 + kappa) as i64);
            for i in 0..k {
                cell_lo.push((k + i) as f64 * exp2i(e));
                cell_hi.push((k + i + 1) as f64 * exp2i(e));
            }
        }
        let cell_measure: Vec<f64> = cell_lo
            .iter()
            .zip(&cell_hi)
            .map(|(a, b)| b - a)
            .collect();

        let pos_base = |j: u32| -> u32 { (j_top - j) * k };
        let mut cubes = Vec::new();
        let mut parent = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut span = Vec::new();
        // prefixes [0, 2^-l) for l = 0..=bands+1; the last is the zone leaf
        for l in 0..=j_top + 1 {
            cubes.push(DyadicCube::line(l, 0));
            parent.push(if l == 0 { NO_PARENT } else { (l - 1) as usize });
            children.push(Vec::new());
            if l > 0 {
                children[(l - 1) as usize].push(l as usize);
            }
            let hi = if l <= j_top { (j_top + 1 - l) * k } else { 0 };
            span.push(CellSpan::Range(0, hi));
        }
        // per-band dyadic trees, band top [2^-j-1, 2^-j) hangs off prefix j
        for j in 0..=j_top {
            let mut level_ids: Vec<usize> = Vec::new();
            for t in 0..=kappa {
                let mut next = Vec::with_capacity(1 << (t + 1));
                for i in 0..(1u32 << t) {
                    let id = cubes.len();
                    cubes.push(DyadicCube::line(j + 1 + t, ((1u32 << t) + i) as u64));
                    children.push(Vec::new());
                    let pid = if t == 0 {
                        j as usize
                    } else {
                        level_ids[(i / 2) as usize]
                    };
                    parent.push(pid);
                    children[pid].push(id);
                    let w = k >> t;
                    let a = pos_base(j) + i * w;
                    span.push(CellSpan::Range(a, a + w));
                    next.push(id);
                }
                level_ids = next;
            }
        }
        let lookup: HashMap<_, _> = cubes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let mut cell_leaf = vec![usize::MAX; ncells];
        for (id, sp) in span.iter().enumerate() {
            if children[id].is_empty() {
                if let CellSpan::Range(a, b) = sp {
                    if b > a {
                        debug_assert_eq!(b - a, 1);
                        cell_leaf[*a as usize] = id;
                    }
                }
            }
        }
        debug_assert!(cell_leaf.iter().all(|&l| l != usize::MAX));
        Ok(Mesh {
            dim: 1,
            kind: MeshKind::Graded {
                bands,
                per_band,
            },
            cubes,
            parent,
            children,
            span,
            lookup,
            cell_leaf,
            cell_lo,
            cell_hi,
            cell_measure,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn ncells(&self) -> usize {
        self.cell_measure.len()
    }

    pub fn ncubes(&self) -> usize {
        self.cubes.len()
    }

    pub fn root_id(&self) -> usize {
        0
    }

    pub fn cube(&self, id: usize) -> &DyadicCube {
        &self.cubes[id]
    }

    pub fn id_of(&self, q: &DyadicCube) -> Option<usize> {
        self.lookup.get(q).copied()
    }

    pub fn parent_of(&self, id: usize) -> Option<usize> {
        match self.parent[id] {
            NO_PARENT => None,
            p => Some(p),
        }
    }

    pub fn children_of(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.children[id].is_empty()
    }

    pub fn leaf_of_cell(&self, cell: u32) -> usize {
        self.cell_leaf[cell as usize]
    }

    pub fn measure(&self, id: usize) -> f64 {
        self.cubes[id].measure()
    }

    pub fn cell_measure(&self, cell: u32) -> f64 {
        self.cell_measure[cell as usize]
    }

    pub fn cell_measures(&self) -> &[f64] {
        &self.cell_measure
    }

    /// Contiguous cell range of a cube (1-d meshes).
    pub fn cell_range(&self, id: usize) -> Option<(u32, u32)> {
        match &self.span[id] {
            CellSpan::Range(a, b) => Some((*a, *b)),
            CellSpan::List(_) => None,
        }
    }

    pub fn ncells_of(&self, id: usize) -> usize {
        match &self.span[id] {
            CellSpan::Range(a, b) => (b - a) as usize,
            CellSpan::List(v) => v.len(),
        }
    }

    pub fn for_each_cell(&self, id: usize, mut f: impl FnMut(u32)) {
        match &self.span[id] {
            CellSpan::Range(a, b) => (*a..*b).for_each(&mut f),
            CellSpan::List(v) => v.iter().copied().for_each(&mut f),
        }
    }

    /// Locate the mesh id of a dyadic cube, or the cell it sits inside.
    pub fn resolve(&self, q: &DyadicCube) -> Result<Resolved> {
        if q.dim() != self.dim {
            return dom_err("cube dimension does not match mesh");
        }
        if let Some(id) = self.id_of(q) {
            return Ok(Resolved::Exact(id));
        }
        let mut walk = q.clone();
        while let Some(p) = walk.parent() {
            if let Some(id) = self.id_of(&p) {
                if self.is_leaf(id) {
                    return Ok(Resolved::SubCell { leaf: id });
                }
                // q lives between mesh cubes: impossible by construction
                return dom_err("cube is not aligned with the mesh");
            }
            walk = p;
        }
        dom_err("cube outside mesh root")
    }

    /// 1-d cell bounds.
    pub fn cell_bounds(&self, cell: u32) -> (f64, f64) {
        (self.cell_lo[cell as usize], self.cell_hi[cell as usize])
    }

    pub fn cell_center(&self, cell: u32) -> f64 {
        0.5 * (self.cell_lo[cell as usize] + self.cell_hi[cell as usize])
    }

    /// First cell at-or-right-of x, by cell upper bound (1-d).
    fn first_cell_after(&self, x: f64) -> u32 {
        self.cell_hi.partition_point(|&h| h <= x) as u32
    }

    /// Cells intersecting [lo, hi) in a half-open sense (1-d).
    pub fn region_cells(&self, reg: Region) -> (u32, u32) {
        debug_assert_eq!(self.dim, 1);
        if reg.hi <= reg.lo {
            return (0, 0);
        }
        let a = self.first_cell_after(reg.lo);
        let b = self.cell_lo.partition_point(|&l| l < reg.hi) as u32;
        (a, b.max(a))
    }

    /// The dilate 3Q ∩ [0,1)^n as cells; 1-d callers can use
    /// `dilate3_region` for the exact interval.
    pub fn dilate3_cells(&self, q: &DyadicCube) -> Result<Vec<u32>> {
        self.resolve(q)?; // domain check
        let b = q.dilated3_bounds();
        if self.dim == 1 {
            let (a, z) = self.region_cells(Region::new(b[0].0, b[0].1));
            Ok((a..z).collect())
        } else {
            let MeshKind::Uniform { depth } = self.kind else {
                return dom_err("graded meshes are 1-d");
            };
            let s = exp2i(-(depth as i64));
            let n = 1u64 << depth;
            let mut out = Vec::new();
            let rr: Vec<(u64, u64)> = b
                .iter()
                .map(|&(lo, hi)| {
                    let a = (lo / s).floor() as u64;
                    let z = (((hi / s).ceil() as u64).min(n)).max(a);
                    (a, z)
                })
                .collect();
            for r in rr[0].0..rr[0].1 {
                for c in rr[1].0..rr[1].1 {
                    out.push((r << depth | c) as u32);
                }
            }
            Ok(out)
        }
    }

    pub fn dilate3_region(&self, q: &DyadicCube) -> Result<Region> {
        if self.dim != 1 {
            return dom_err("dilate3_region is 1-d");
        }
        self.resolve(q)?;
        let b = q.dilated3_bounds()[0];
        Ok(Region::new(b.0, b.1))
    }

    /// Ancestor chain of a cell from its leaf up to the root.
    pub fn ancestors_of_cell(&self, cell: u32) -> AncestorIter<'_> {
        AncestorIter {
            mesh: self,
            cur: Some(self.cell_leaf[cell as usize]),
        }
    }

    /// Ids in topological order (parents before children) — the arena
    /// order itself, kept as an invariant of both constructors.
    pub fn ids(&self) -> std::ops::Range<usize> {
        0..self.cubes.len()
    }
}

pub struct AncestorIter<'a> {
    mesh: &'a Mesh,
    cur: Option<usize>,
}

impl<'a> Iterator for AncestorIter<'a> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let id = self.cur?;
        self.cur = self.mesh.parent_of(id);
        Some(id)
    }
}
