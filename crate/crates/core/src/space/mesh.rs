//! Triangle meshes: validation, generators, OFF/OBJ ingestion and the P1
//! finite-element operators (cotangent stiffness, lumped mass, face gradients).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::CsrMatrix;

/// Relative area threshold (against the squared bounding-box diagonal) below
/// which a triangle is rejected as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// A triangle mesh. When `periods` is set, edge vectors use the minimum-image
/// convention in x and y, which represents flat tori without an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<[f64; 2]>,
}

type V3 = [f64; 3];

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}
fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
fn normalize(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

impl Mesh {
    /// Validated mesh.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            periods: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_periods(mut self, periods: [f64; 2]) -> Result<Self> {
        self.periods = Some(periods);
        self.validate()?;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vector from vertex `a` to vertex `b`.
    pub fn edge_vector(&self, a: usize, b: usize) -> [f64; 3] {
        let mut d = sub(self.vertices[b], self.vertices[a]);
        if let Some([px, py]) = self.periods {
            d[0] -= px * (d[0] / px).round();
            d[1] -= py * (d[1] / py).round();
        }
        d
    }

    fn face_area_vector(&self, t: [usize; 3]) -> V3 {
        let e1 = self.edge_vector(t[0], t[1]);
        let e2 = self.edge_vector(t[0], t[2]);
        scale(cross(e1, e2), 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 || self.triangles.is_empty() {
            return Err(invalid("mesh", "needs at least one triangle"));
        }
        if let Some(p) = self.periods {
            if !(p[0] > 0.0 && p[1] > 0.0) {
                return Err(invalid("periods", "must be positive"));
            }
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for v in &self.vertices {
            for c in 0..3 {
                if !v[c].is_finite() {
                    return Err(invalid("vertices", "non-finite coordinate"));
                }
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        let diag2 = dot(sub(hi, lo), sub(hi, lo)).max(f64::MIN_POSITIVE);
        for (index, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                return Err(invalid("triangles", format!("triangle {index} indexes a missing vertex")));
            }
            let area = norm(self.face_area_vector(*t));
            if !(area > DEGENERATE_AREA * diag2) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateTriangle { index, area });
            }
        }
        let components = self.components();
        if components != 1 {
            return Err(Error::DisconnectedMesh { components });
        }
        Ok(())
    }

    fn components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (find(&mut parent, t[k]), find(&mut parent, t[(k + 1) % 3]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// True when some edge belongs to exactly one triangle.
    pub fn has_boundary(&self) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().any(|&c| c == 1)
    }

    /// Unit icosphere after `level` rounds of 4-to-1 subdivision
    /// (level 4 has 2562 vertices).
    pub fn icosphere(level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<V3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .into_iter()
        .map(normalize)
        .collect();
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut mid = |a: usize, b: usize, verts: &mut Vec<V3>| -> usize {
                *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let m = normalize(scale([
                        verts[a][0] + verts[b][0],
                        verts[a][1] + verts[b][1],
                        verts[a][2] + verts[b][2],
                    ], 0.5));
                    verts.push(m);
                    verts.len() - 1
                })
            };
            for [a, b, c] in triangles {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        Self {
            vertices,
            triangles,
            periods: None,
        }
    }

    /// Icosphere whose vertices are spring-relaxed on the sphere: each vertex
    /// moves to the normalized mean of its neighbours (Gauss-Seidel sweeps)
    /// until no vertex moves by more than `1e-12` in a sweep. Relaxation removes the
    /// density kinks along the edges of the base icosahedron, which otherwise
    /// cap the cotangent Laplacian at first-order pointwise accuracy there.
    pub fn relaxed_icosphere(level: usize) -> Self {
        let mut mesh = Self::icosphere(level);
        let n = mesh.vertices.len();
        let mut neighbours = vec![Vec::new(); n];
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !neighbours[a].contains(&b) {
                    neighbours[a].push(b);
                    neighbours[b].push(a);
                }
            }
        }
        for _ in 0..100_000 {
            let old = mesh.vertices.clone();
            for v in 0..n {
                let mut s = [0.0; 3];
                for &u in &neighbours[v] {
                    s = add(s, mesh.vertices[u]);
                }
                mesh.vertices[v] = normalize(s);
            }
            // the spring energy keeps decreasing along Möbius boosts towards a
            // collapsed configuration; re-centering removes that drift
            let centre = scale(mesh.vertices.iter().fold([0.0; 3], |a, v| add(a, *v)), 1.0 / n as f64);
            let mut moved: f64 = 0.0;
            for (v, o) in mesh.vertices.iter_mut().zip(&old) {
                *v = normalize(sub(*v, centre));
                moved = moved.max(norm(sub(*v, *o)));
            }
            if moved < 1e-12 {
                break;
            }
        }
        mesh
    }

    /// Periodic `nx x ny` grid on the flat torus `[0, a) x [0, b)`, each cell
    /// split along one diagonal.
    pub fn flat_torus(nx: usize, ny: usize, a: f64, b: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(invalid("grid", "torus grid needs at least 3x3 cells"));
        }
        let id = |i: usize, j: usize| (i % nx) * ny + (j % ny);
        let mut vertices = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                vertices.push([a * i as f64 / nx as f64, b * j as f64 / ny as f64, 0.0]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self {
            vertices,
            triangles,
            periods: None,
        }
        .with_periods([a, b])
    }

    pub fn from_off_str(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let header = tokens.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
        if header != "OFF" {
            return Err(Error::Parse(format!("expected OFF header, found `{header}`")));
        }
        let mut next_num = |what: &str| -> Result<f64> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of OFF file reading {what}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{what}: {e}")))
        };
        let nv = next_num("vertex count")? as usize;
        let nf = next_num("face count")? as usize;
        let _ne = next_num("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([next_num("vertex")?, next_num("vertex")?, next_num("vertex")?]);
        }
        let mut triangles = Vec::with_capacity(nf);
        for f in 0..nf {
            let k = next_num("face size")? as usize;
            if k != 3 {
                return Err(Error::Parse(format!("face {f} has {k} vertices; only triangles are supported")));
            }
            triangles.push([
                next_num("face")? as usize,
                next_num("face")? as usize,
                next_num("face")? as usize,
            ]);
        }
        Self::new(vertices, triangles)
    }

    pub fn from_obj_str(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it
                        .take(3)
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                    if c.len() != 3 {
                        return Err(Error::Parse(format!("line {}: vertex needs 3 coordinates", lineno + 1)));
                    }
                    vertices.push([c[0], c[1], c[2]]);
                }
                Some("f") => {
                    let idx: Vec<usize> = it
                        .map(|s| {
                            let head = s.split('/').next().unwrap_or("");
                            let v: i64 = head
                                .parse()
                                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                            if v > 0 {
                                Ok(v as usize - 1)
                            } else if v < 0 && (-v) as usize <= vertices.len() {
                                Ok(vertices.len() - (-v) as usize)
                            } else {
                                Err(Error::Parse(format!("line {}: bad index {v}", lineno + 1)))
                            }
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() != 3 {
                        return Err(Error::Parse(format!(
                            "line {}: only triangles are supported",
                            lineno + 1
                        )));
                    }
                    triangles.push([idx[0], idx[1], idx[2]]);
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles)
    }

    /// Read an `.off` or `.obj` file.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Self::from_off_str(&text),
            Some("obj") => Self::from_obj_str(&text),
            other => Err(Error::Unsupported(format!("mesh extension {other:?}"))),
        }
    }

    pub fn to_off_string(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            s.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        for t in &self.triangles {
            s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        s
    }
}

/// Assembled P1 operators on a validated mesh.
#[derive(Debug, Clone)]
pub(crate) struct MeshOperators {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    pub face_area: Vec<f64>,
    /// Gradients of the three barycentric hat functions per face.
    pub face_grads: Vec<[V3; 3]>,
    /// Lumped-mass share of each corner of each face.
    pub corner_share: Vec<[f64; 3]>,
    pub vertex_faces: Vec<Vec<(usize, usize)>>,
    /// Tangent frame per vertex: two orthonormal ambient vectors.
    pub frames: Vec<[V3; 2]>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub max_edge: f64,
}

/// Mixed Voronoi area of each corner of a triangle with corner positions `p`:
/// circumcentric cells for non-obtuse triangles, `area/2` at an obtuse corner
/// and `area/4` at the other two otherwise.
fn voronoi_shares(p: &[V3; 3], area: f64) -> [f64; 3] {
    let edge = |i: usize, j: usize| sub(p[j], p[i]);
    let cot = |i: usize| {
        let (u, v) = (edge(i, (i + 1) % 3), edge(i, (i + 2) % 3));
        dot(u, v) / norm(cross(u, v))
    };
    let c = [cot(0), cot(1), cot(2)];
    if let Some(obtuse) = (0..3).find(|&i| c[i] < 0.0) {
        let mut s = [0.25 * area; 3];
        s[obtuse] = 0.5 * area;
        return s;
    }
    let sq = |i: usize, j: usize| dot(edge(i, j), edge(i, j));
    let mut s = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        s[i] = (sq(i, j) * c[k] + sq(i, k) * c[j]) / 8.0;
    }
    s
}

impl MeshOperators {
    pub fn assemble(mesh: &Mesh) -> Self {
        let n = mesh.vertex_count();
        let nf = mesh.triangles.len();
        let mut triplets = Vec::with_capacity(nf * 9);
        let mut mass = vec![0.0; n];
        let mut face_area = Vec::with_capacity(nf);
        let mut face_grads = Vec::with_capacity(nf);
        let mut corner_share = Vec::with_capacity(nf);
        let mut vertex_faces = vec![Vec::new(); n];
        let mut normals = vec![[0.0; 3]; n];

        for (f, t) in mesh.triangles.iter().enumerate() {
            let p = [[0.0; 3], mesh.edge_vector(t[0], t[1]), mesh.edge_vector(t[0], t[2])];
            let av = scale(cross(p[1], p[2]), 0.5);
            let area = norm(av);
            let nrm = scale(av, 1.0 / area);
            let mut g = [[0.0; 3]; 3];
            for i in 0..3 {
                let e = sub(p[(i + 2) % 3], p[(i + 1) % 3]);
                g[i] = scale(cross(nrm, e), 1.0 / (2.0 * area));
            }
            let share = voronoi_shares(&p, area);
            for i in 0..3 {
                for j in 0..3 {
                    triplets.push((t[i], t[j], area * dot(g[i], g[j])));
                }
                mass[t[i]] += share[i];
                vertex_faces[t[i]].push((f, i));
                for c in 0..3 {
                    normals[t[i]][c] += av[c];
                }
            }
            face_area.push(area);
            face_grads.push(g);
            corner_share.push(share);
        }
        // exact symmetry of the assembled stiffness
        let stiffness = CsrMatrix::from_triplets(n, &triplets);
        let mut sym = Vec::with_capacity(stiffness.nnz());
        for i in 0..n {
            for (j, v) in stiffness.row(i) {
                sym.push((i, j, 0.5 * (v + stiffness.get(j, i))));
            }
        }
        let stiffness = CsrMatrix::from_triplets(n, &sym);

        let frames = normals
            .iter()
            .map(|nv| {
                let nn = normalize(*nv);
                let axis = if nn[0].abs() <= nn[1].abs() && nn[0].abs() <= nn[2].abs() {
                    [1.0, 0.0, 0.0]
                } else if nn[1].abs() <= nn[2].abs() {
                    [0.0, 1.0, 0.0]
                } else {
                    [0.0, 0.0, 1.0]
                };
                let e1 = normalize(sub(axis, scale(nn, dot(axis, nn))));
                let e2 = cross(nn, e1);
                [e1, e2]
            })
            .collect();

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut max_edge: f64 = 0.0;
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !adjacency[a].iter().any(|e| e.0 == b) {
                    let len = norm(mesh.edge_vector(a, b));
                    adjacency[a].push((b, len));
                    adjacency[b].push((a, len));
                    max_edge = max_edge.max(len);
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|e| e.0);
        }

        Self {
            stiffness,
            mass,
            face_area,
            face_grads,
            corner_share,
            vertex_faces,
            frames,
            adjacency,
            max_edge,
        }
    }

    fn face_gradient(&self, mesh: &Mesh, f: usize, u: &[f64]) -> V3 {
        let t = mesh.triangles[f];
        let g = &self.face_grads[f];
        let mut out = [0.0; 3];
        for i in 0..3 {
            for c in 0..3 {
                out[c] += u[t[i]] * g[i][c];
            }
        }
        out
    }

    /// Area-weighted vertex average of face gradients, in the vertex frame.
    pub fn vertex_gradients(&self, mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
        let face: Vec<V3> = (0..mesh.triangles.len())
            .map(|f| self.face_gradient(mesh, f, u))
            .collect();
        (0..mesh.vertex_count())
            .map(|v| {
                let mut acc = [0.0; 3];
                let mut w = 0.0;
                for &(f, _) in &self.vertex_faces[v] {
                    let a = self.face_area[f];
                    for c in 0..3 {
                        acc[c] += a * face[f][c];
                    }
                    w += a;
                }
                let acc = scale(acc, 1.0 / w);
                let [e1, e2] = self.frames[v];
                [dot(acc, e1), dot(acc, e2)]
            })
            .collect()
    }

    /// Per-vertex `|∇u|²` consistent with the stiffness: `Σ_v m_v e_v = uᵀ S u`.
    pub fn dirichlet_density(&self, mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        let sq: Vec<f64> = (0..mesh.triangles.len())
            .map(|f| {
                let g = self.face_gradient(mesh, f, u);
                dot(g, g)
            })
            .collect();
        (0..mesh.vertex_count())
            .map(|v| {
                let s: f64 = self.vertex_faces[v]
                    .iter()
                    .map(|&(f, i)| self.corner_share[f][i] * sq[f])
                    .sum();
                s / self.mass[v]
            })
            .collect()
    }

    /// Single-source shortest paths on the edge graph; entries beyond `cutoff` stay infinite.
    pub fn dijkstra(&self, source: usize, cutoff: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source));
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, len) in &self.adjacency[v] {
                let nd = d + len;
                if nd < dist[w] && nd <= cutoff {
                    dist[w] = nd;
                    heap.push(Entry(nd, w));
                }
            }
        }
        dist
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on distance, ties by vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}
