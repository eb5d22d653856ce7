use std::collections::{BTreeSet, HashMap};

use super::ball::orient;
use super::{sorted3, CellSet, FacetRef, MeshError, Point3, Region, SimplicialMesh, FACE_VERTICES};

/// Bound on the recursion depth of the conforming closure.
const MAX_CASCADE_DEPTH: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FaceTag {
    Interface,
    Outer,
}

fn face_tags(mesh: &SimplicialMesh) -> HashMap<[usize; 3], FaceTag> {
    let mut tags = HashMap::with_capacity(mesh.interface_facets().len() + mesh.outer_facets().len());
    for f in mesh.interface_facets() {
        tags.insert(sorted3(mesh.facet_vertices(*f)), FaceTag::Interface);
    }
    for f in mesh.outer_facets() {
        tags.insert(sorted3(mesh.facet_vertices(*f)), FaceTag::Outer);
    }
    tags
}

/// Assembles a mesh from cells and tagged faces; interface facets are
/// recorded on their molecular side.
fn assemble(
    vertices: Vec<Point3>,
    cells: Vec<[usize; 4]>,
    regions: Vec<Region>,
    tags: &HashMap<[usize; 3], FaceTag>,
) -> SimplicialMesh {
    let mut interface = Vec::new();
    let mut outer = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for (f, lv) in FACE_VERTICES.iter().enumerate() {
            let key = sorted3([cell[lv[0]], cell[lv[1]], cell[lv[2]]]);
            match tags.get(&key) {
                Some(FaceTag::Outer) => outer.push(FacetRef { cell: c, face: f as u8 }),
                Some(FaceTag::Interface) if regions[c] == Region::Molecular => {
                    interface.push(FacetRef { cell: c, face: f as u8 })
                }
                _ => {}
            }
        }
    }
    SimplicialMesh::from_parts_unchecked(vertices, cells, regions, interface, outer)
}

/// Eight children of a cell with all edge midpoints `m` in local edge order.
/// The inner octahedron is split along its shortest diagonal; the remaining
/// four vertices form the cycle a, b, a', b' of opposite pairs.
fn red_children(vertices: &[Point3], v: [usize; 4], m: [usize; 6]) -> [[usize; 4]; 8] {
    let [v0, v1, v2, v3] = v;
    let [m01, m02, m03, m12, m13, m23] = m;
    let diagonals = [(m01, m23), (m02, m13), (m03, m12)];
    let len = |(p, q): (usize, usize)| vertices[p].distance(vertices[q]);
    let mut best = 0;
    for k in 1..3 {
        if len(diagonals[k]) < len(diagonals[best]) {
            best = k;
        }
    }
    let (p, q) = diagonals[best];
    let (a, a2) = diagonals[(best + 1) % 3];
    let (b, b2) = diagonals[(best + 2) % 3];
    [
        [v0, m01, m02, m03],
        [m01, v1, m12, m13],
        [m02, m12, v2, m23],
        [m03, m13, m23, v3],
        [p, q, a, b],
        [p, q, b, a2],
        [p, q, a2, b2],
        [p, q, b2, a],
    ]
}

/// Red refinement: every cell splits into eight children and every tagged
/// face into four.
pub fn refine_uniform(mesh: &SimplicialMesh) -> SimplicialMesh {
    let table = mesh.edge_table();
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let orig = mesh.vertices();
    vertices.extend(table.edges.iter().map(|[a, b]| orig[*a].midpoint(orig[*b])));

    let mut cells = Vec::with_capacity(mesh.num_cells() * 8);
    let mut regions = Vec::with_capacity(mesh.num_cells() * 8);
    for (c, cell) in mesh.cells().iter().enumerate() {
        let children = red_children(&vertices, *cell, table.cell_edges[c].map(|k| nv + k));
        for mut ch in children {
            orient(&vertices, &mut ch);
            cells.push(ch);
            regions.push(mesh.region(c));
        }
    }

    let edge_index: HashMap<[usize; 2], usize> =
        table.edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let m = |a: usize, b: usize| nv + edge_index[&[a.min(b), a.max(b)]];
    let mut tags = HashMap::new();
    for (list, tag) in [
        (mesh.interface_facets(), FaceTag::Interface),
        (mesh.outer_facets(), FaceTag::Outer),
    ] {
        for f in list {
            let [a, b, c] = mesh.facet_vertices(*f);
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            for t in [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]] {
                tags.insert(sorted3(t), tag);
            }
        }
    }
    assemble(vertices, cells, regions, &tags)
}

/// How marked cells are refined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MarkedMode {
    /// Each marked cell is bisected at least once along its longest edge.
    #[default]
    Bisect,
    /// Every edge of each marked cell is bisected by longest-edge closure.
    SplitAllEdges,
    /// Marked cells are split into eight; neighbours are closed with the
    /// one-edge, one-face or eight-child patterns.
    RedGreen,
}

impl MarkedMode {
    pub fn name(self) -> &'static str {
        match self {
            MarkedMode::Bisect => "bisect",
            MarkedMode::SplitAllEdges => "split",
            MarkedMode::RedGreen => "red-green",
        }
    }

    pub fn parse(s: &str) -> Option<MarkedMode> {
        match s {
            "bisect" => Some(MarkedMode::Bisect),
            "split" => Some(MarkedMode::SplitAllEdges),
            "red-green" | "redgreen" => Some(MarkedMode::RedGreen),
            _ => None,
        }
    }
}

/// Longest-edge bisection of the marked cells with conforming closure.
pub fn refine_marked(mesh: &SimplicialMesh, marked: &CellSet) -> Result<SimplicialMesh, MeshError> {
    refine_marked_with(mesh, marked, MarkedMode::Bisect)
}

pub fn refine_marked_with(
    mesh: &SimplicialMesh,
    marked: &CellSet,
    mode: MarkedMode,
) -> Result<SimplicialMesh, MeshError> {
    if let Some(c) = marked.iter().find(|&c| c >= mesh.num_cells()) {
        return Err(MeshError::InvalidParameters(format!("marked cell {c} is out of range")));
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    if mode == MarkedMode::RedGreen {
        return Ok(refine_red_green(mesh, marked));
    }
    let mut b = Bisector::new(mesh);
    match mode {
        MarkedMode::RedGreen => unreachable!(),
        MarkedMode::Bisect => {
            for c in marked.iter() {
                while b.alive[c] {
                    let e = b.longest_edge(c);
                    b.refine_edge(e, 0)?;
                }
            }
        }
        MarkedMode::SplitAllEdges => {
            let edges: BTreeSet<[usize; 2]> = marked
                .iter()
                .flat_map(|c| {
                    let cell = mesh.cells()[c];
                    super::EDGE_VERTICES.map(|[i, j]| [cell[i].min(cell[j]), cell[i].max(cell[j])])
                })
                .collect();
            let mut edges: Vec<[usize; 2]> = edges.into_iter().collect();
            // Longest first keeps the closure cascades short.
            edges.sort_by(|x, y| b.edge_order(*y, *x));
            for e in edges {
                b.refine_edge(e, 0)?;
            }
        }
    }
    Ok(b.finish())
}

/// Local edges of local face `f`.
const FACE_EDGES: [[usize; 3]; 4] = [[3, 4, 5], [1, 2, 5], [0, 2, 4], [0, 1, 3]];

/// Completes an edge mask to one of the admissible patterns: none, a single
/// edge, the three edges of one face, or all six.
fn close_pattern(mask: u8) -> u8 {
    let count = mask.count_ones();
    if count <= 1 || count == 6 {
        return mask;
    }
    for fe in FACE_EDGES {
        let face: u8 = fe.iter().map(|k| 1u8 << k).sum();
        if mask & !face == 0 {
            return face;
        }
    }
    0b11_1111
}

fn refine_red_green(mesh: &SimplicialMesh, marked: &CellSet) -> SimplicialMesh {
    let table = mesh.edge_table();
    let ne = table.edges.len();
    let mut edge_cells: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (c, es) in table.cell_edges.iter().enumerate() {
        for &e in es {
            edge_cells[e].push(c);
        }
    }
    let mut flagged = vec![false; ne];
    let mut queue: Vec<usize> = Vec::new();
    for c in marked.iter() {
        for &e in &table.cell_edges[c] {
            if !flagged[e] {
                flagged[e] = true;
                queue.extend(&edge_cells[e]);
            }
        }
    }
    let mask_of = |flagged: &[bool], c: usize| -> u8 {
        table.cell_edges[c].iter().enumerate().filter(|(_, &e)| flagged[e]).map(|(k, _)| 1u8 << k).sum()
    };
    while let Some(c) = queue.pop() {
        let mask = mask_of(&flagged, c);
        let closed = close_pattern(mask);
        if closed == mask {
            continue;
        }
        for k in 0..6 {
            let e = table.cell_edges[c][k];
            if closed & (1 << k) != 0 && !flagged[e] {
                flagged[e] = true;
                queue.extend(&edge_cells[e]);
            }
        }
    }

    let nv = mesh.num_vertices();
    let orig = mesh.vertices();
    let mut vertices = orig.to_vec();
    let mut midpoint = vec![usize::MAX; ne];
    for e in 0..ne {
        if flagged[e] {
            let [a, b] = table.edges[e];
            midpoint[e] = vertices.len();
            vertices.push(orig[a].midpoint(orig[b]));
        }
    }
    debug_assert!(vertices.len() >= nv);

    let mut cells = Vec::with_capacity(mesh.num_cells() * 2);
    let mut regions = Vec::with_capacity(mesh.num_cells() * 2);
    for (c, cell) in mesh.cells().iter().enumerate() {
        let mask = mask_of(&flagged, c);
        let m = table.cell_edges[c].map(|e| midpoint[e]);
        let mut children: Vec<[usize; 4]> = Vec::with_capacity(8);
        match mask.count_ones() {
            0 => children.push(*cell),
            1 => {
                let k = mask.trailing_zeros() as usize;
                let [i, j] = super::EDGE_VERTICES[k];
                let (mut left, mut right) = (*cell, *cell);
                left[j] = m[k];
                right[i] = m[k];
                children.extend([left, right]);
            }
            3 => {
                let f = (0..4)
                    .find(|&f| FACE_EDGES[f].iter().all(|k| mask & (1 << k) != 0))
                    .expect("closed pattern");
                let apex = cell[f];
                let mid = |i: usize, j: usize| {
                    let k = super::EDGE_VERTICES.iter().position(|e| *e == [i.min(j), i.max(j)]).unwrap();
                    m[k]
                };
                let others: Vec<usize> = (0..4).filter(|&v| v != f).collect();
                let [a, b, cc] = [others[0], others[1], others[2]];
                let (mab, mbc, mca) = (mid(a, b), mid(b, cc), mid(cc, a));
                children.extend([
                    [apex, cell[a], mab, mca],
                    [apex, cell[b], mbc, mab],
                    [apex, cell[cc], mca, mbc],
                    [apex, mab, mbc, mca],
                ]);
            }
            6 => children.extend(red_children(&vertices, *cell, m)),
            n => unreachable!("unclosed pattern with {n} edges"),
        }
        for mut ch in children {
            orient(&vertices, &mut ch);
            cells.push(ch);
            regions.push(mesh.region(c));
        }
    }

    let edge_index: HashMap<[usize; 2], usize> =
        table.edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let mid = |a: usize, b: usize| midpoint[edge_index[&[a.min(b), a.max(b)]]];
    let mut tags = HashMap::new();
    for (list, tag) in [
        (mesh.interface_facets(), FaceTag::Interface),
        (mesh.outer_facets(), FaceTag::Outer),
    ] {
        for f in list {
            let [a, b, c] = mesh.facet_vertices(*f);
            let split = [(a, b, c), (b, c, a), (c, a, b)].map(|(x, y, _)| mid(x, y) != usize::MAX);
            let subfaces: Vec<[usize; 3]> = match split {
                [false, false, false] => vec![[a, b, c]],
                [true, true, true] => {
                    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                    vec![[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
                }
                _ => {
                    let k = split.iter().position(|s| *s).expect("one split edge");
                    let (x, y, z) = [(a, b, c), (b, c, a), (c, a, b)][k];
                    let mm = mid(x, y);
                    vec![[x, mm, z], [mm, y, z]]
                }
            };
            for t in subfaces {
                tags.insert(sorted3(t), tag);
            }
        }
    }
    assemble(vertices, cells, regions, &tags)
}

/// Applies `rounds` passes of bisection to the cells containing any of `points`.
pub fn refine_around_points(
    mesh: &SimplicialMesh,
    points: &[Point3],
    rounds: usize,
) -> Result<SimplicialMesh, MeshError> {
    let mut current = mesh.clone();
    for _ in 0..rounds {
        let mut marked = CellSet::new();
        for p in points {
            let p = *p;
            for c in 0..current.num_cells() {
                let b = super::locate::barycentric(&current.cell_points(c), p);
                if b.iter().all(|&l| l >= -1e-12) {
                    marked.insert(c);
                }
            }
        }
        current = refine_marked_with(&current, &marked, MarkedMode::SplitAllEdges)?;
    }
    Ok(current)
}

struct Bisector {
    vertices: Vec<Point3>,
    cells: Vec<[usize; 4]>,
    regions: Vec<Region>,
    alive: Vec<bool>,
    edge_cells: HashMap<[usize; 2], Vec<usize>>,
    tags: HashMap<[usize; 3], FaceTag>,
}

impl Bisector {
    fn new(mesh: &SimplicialMesh) -> Self {
        let mut b = Bisector {
            vertices: mesh.vertices().to_vec(),
            cells: Vec::with_capacity(mesh.num_cells() * 2),
            regions: Vec::with_capacity(mesh.num_cells() * 2),
            alive: Vec::with_capacity(mesh.num_cells() * 2),
            edge_cells: HashMap::with_capacity(mesh.num_cells() * 2),
            tags: face_tags(mesh),
        };
        for (c, cell) in mesh.cells().iter().enumerate() {
            b.push_cell(*cell, mesh.region(c));
        }
        b
    }

    fn push_cell(&mut self, cell: [usize; 4], region: Region) -> usize {
        let id = self.cells.len();
        self.cells.push(cell);
        self.regions.push(region);
        self.alive.push(true);
        for [i, j] in super::EDGE_VERTICES {
            let key = [cell[i].min(cell[j]), cell[i].max(cell[j])];
            self.edge_cells.entry(key).or_default().push(id);
        }
        id
    }

    fn kill_cell(&mut self, id: usize) {
        self.alive[id] = false;
        let cell = self.cells[id];
        for [i, j] in super::EDGE_VERTICES {
            let key = [cell[i].min(cell[j]), cell[i].max(cell[j])];
            if let Some(list) = self.edge_cells.get_mut(&key) {
                list.retain(|&c| c != id);
                if list.is_empty() {
                    self.edge_cells.remove(&key);
                }
            }
        }
    }

    fn edge_len_sq(&self, e: [usize; 2]) -> f64 {
        (self.vertices[e[0]] - self.vertices[e[1]]).norm_sq()
    }

    /// Total order on edges: length, then vertex indices.
    fn edge_order(&self, a: [usize; 2], b: [usize; 2]) -> std::cmp::Ordering {
        self.edge_len_sq(a)
            .partial_cmp(&self.edge_len_sq(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    }

    fn longest_edge(&self, c: usize) -> [usize; 2] {
        let cell = self.cells[c];
        super::EDGE_VERTICES
            .iter()
            .map(|[i, j]| [cell[*i].min(cell[*j]), cell[*i].max(cell[*j])])
            .max_by(|a, b| self.edge_order(*a, *b))
            .unwrap()
    }

    /// Bisects edge `e` in every cell sharing it, first refining neighbours
    /// whose longest edge is a different one.
    fn refine_edge(&mut self, e: [usize; 2], depth: usize) -> Result<(), MeshError> {
        if depth > MAX_CASCADE_DEPTH {
            return Err(MeshError::NonTermination(MAX_CASCADE_DEPTH));
        }
        loop {
            let star = match self.edge_cells.get(&e) {
                Some(s) => s.clone(),
                None => return Ok(()),
            };
            if let Some(&c) = star.iter().find(|&&c| self.longest_edge(c) != e) {
                let le = self.longest_edge(c);
                self.refine_edge(le, depth + 1)?;
                continue;
            }
            let m = self.vertices.len();
            self.vertices.push(self.vertices[e[0]].midpoint(self.vertices[e[1]]));
            for c in star {
                self.bisect(c, e, m);
            }
            return Ok(());
        }
    }

    fn bisect(&mut self, c: usize, e: [usize; 2], m: usize) {
        let cell = self.cells[c];
        let region = self.regions[c];
        self.kill_cell(c);
        let others: Vec<usize> = cell.iter().copied().filter(|v| *v != e[0] && *v != e[1]).collect();
        for other in &others {
            let key = sorted3([e[0], e[1], *other]);
            if let Some(tag) = self.tags.remove(&key) {
                self.tags.insert(sorted3([e[0], m, *other]), tag);
                self.tags.insert(sorted3([m, e[1], *other]), tag);
            }
        }
        for keep in [e[0], e[1]] {
            let mut child = cell;
            for v in child.iter_mut() {
                if *v != keep && (*v == e[0] || *v == e[1]) {
                    *v = m;
                }
            }
            orient(&self.vertices, &mut child);
            self.push_cell(child, region);
        }
    }

    fn finish(self) -> SimplicialMesh {
        let mut cells = Vec::new();
        let mut regions = Vec::new();
        for (c, cell) in self.cells.iter().enumerate() {
            if self.alive[c] {
                cells.push(*cell);
                regions.push(self.regions[c]);
            }
        }
        assemble(self.vertices, cells, regions, &self.tags)
    }
}
