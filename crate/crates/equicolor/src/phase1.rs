//! Phase 1: random partial coloring plus exact checkers for the four
//! conditions a usable partial coloring must satisfy, wrapped in a
//! resampling loop.
//!
//! The four conditions, checked over the palette `1..=t`:
//!
//! 1. every edge has at least `k*gamma/5` uncolored vertices;
//! 2. every edge misses at most `ceil(10/gamma)` colors;
//! 3. no vertex v admits `z` distinct incident edges paired with `z`
//!    distinct colors such that each edge misses its paired color — decided
//!    exactly by maximum bipartite matching;
//! 4. every color class has at least `n*(1+gamma/4)*a*ln(k)/k` vertices.
//!
//! The loop resamples the variable scope of a violated type-1/2/3 event
//! (lowest-index event first) until none remain, then restarts the whole
//! phase if condition 4 fails: a color class depends on every vertex, so
//! per-event resampling has no local scope to work with. Thresholds always
//! compare an exact integer count against the real threshold.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::hypergraph::{EdgeId, Hypergraph, Vertex};
use crate::matching::max_matching;
use crate::params::ColoringParams;

/// Sentinel for an uncolored vertex; real colors are `1..=t`.
pub const UNCOLORED: u32 = 0;
pub type Color = u32;

/// Optional sink for one-line-per-event resampling traces.
pub type TraceSink<'a> = Option<&'a mut dyn Write>;

#[derive(Debug, Error)]
pub enum Phase1Error {
    #[error("resample cap {cap} exceeded; remaining violations: {report}")]
    ResampleCapExceeded { cap: usize, report: ViolationReport },
    #[error("restart cap {cap} exceeded; last violations: {report}")]
    RestartCapExceeded { cap: usize, report: ViolationReport },
    #[error("assignment has {found} entries, expected {expected}")]
    BadAssignmentLength { expected: usize, found: usize },
    #[error("vertex {vertex} has color {color} outside 0..={t}")]
    ColorOutOfRange { vertex: Vertex, color: Color, t: usize },
}

/// A vertex-to-color-or-uncolored assignment with the two caches every
/// checker needs: per-color class sizes and per-edge uncolored counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialColoring {
    /// Color per vertex, `UNCOLORED` or `1..=t`. Slot 0 unused.
    assignment: Vec<Color>,
    /// Vertices per color. Slot 0 unused.
    color_counts: Vec<usize>,
    uncolored_total: usize,
    per_edge_uncolored: Vec<usize>,
    t: usize,
}

impl PartialColoring {
    /// Each vertex independently stays uncolored with probability `q`, else
    /// takes a uniform color in `1..=t` (so each color has probability `p`).
    pub fn sample<R: Rng>(h: &Hypergraph, params: &ColoringParams, rng: &mut R) -> Self {
        let n = h.n();
        let mut assignment = vec![UNCOLORED; n + 1];
        for slot in assignment.iter_mut().skip(1) {
            if !rng.random_bool(params.q) {
                *slot = 1 + rng.random_range(0..params.t as Color);
            }
        }
        Self::from_parts(h, params.t, assignment)
    }

    /// Builds a coloring from explicit per-vertex colors (index `v - 1`,
    /// `UNCOLORED` allowed), validating the palette bound.
    pub fn from_assignment(
        h: &Hypergraph,
        t: usize,
        colors: &[Color],
    ) -> Result<Self, Phase1Error> {
        if colors.len() != h.n() {
            return Err(Phase1Error::BadAssignmentLength {
                expected: h.n(),
                found: colors.len(),
            });
        }
        let mut assignment = vec![UNCOLORED; h.n() + 1];
        for (i, &c) in colors.iter().enumerate() {
            if c as usize > t {
                return Err(Phase1Error::ColorOutOfRange {
                    vertex: (i + 1) as Vertex,
                    color: c,
                    t,
                });
            }
            assignment[i + 1] = c;
        }
        Ok(Self::from_parts(h, t, assignment))
    }

    fn from_parts(h: &Hypergraph, t: usize, assignment: Vec<Color>) -> Self {
        let mut color_counts = vec![0usize; t + 1];
        let mut uncolored_total = 0;
        for &c in &assignment[1..] {
            match c {
                UNCOLORED => uncolored_total += 1,
                c => color_counts[c as usize] += 1,
            }
        }
        let per_edge_uncolored = h
            .edges()
            .map(|(_, e)| e.iter().filter(|&&v| assignment[v as usize] == UNCOLORED).count())
            .collect();
        PartialColoring {
            assignment,
            color_counts,
            uncolored_total,
            per_edge_uncolored,
            t,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `UNCOLORED` (0) or the color in `1..=t`.
    pub fn color_of(&self, v: Vertex) -> Color {
        self.assignment[v as usize]
    }

    pub fn is_uncolored(&self, v: Vertex) -> bool {
        self.assignment[v as usize] == UNCOLORED
    }

    pub fn class_count(&self, c: Color) -> usize {
        self.color_counts[c as usize]
    }

    pub fn uncolored_count(&self) -> usize {
        self.uncolored_total
    }

    pub fn per_edge_uncolored(&self, f: EdgeId) -> usize {
        self.per_edge_uncolored[f]
    }

    /// Colors in `1..=t` to each vertex slot, index `v - 1`.
    pub fn colors(&self) -> &[Color] {
        &self.assignment[1..]
    }

    /// From-scratch audit that both caches match the assignment.
    pub fn consistent_with(&self, h: &Hypergraph) -> bool {
        let rebuilt = Self::from_parts(h, self.t, self.assignment.clone());
        rebuilt == *self
    }
}

/// Colors in `1..=t` absent from edge `f`, ascending.
pub(crate) fn edge_missing_colors(
    h: &Hypergraph,
    pc: &PartialColoring,
    f: EdgeId,
    t: usize,
) -> Vec<Color> {
    let mut present = vec![false; t + 1];
    for &v in h.edge(f) {
        let c = pc.color_of(v);
        if c != UNCOLORED {
            present[c as usize] = true;
        }
    }
    (1..=t as Color).filter(|&c| !present[c as usize]).collect()
}

/// Edges with fewer than `k*gamma/5` uncolored vertices.
pub fn check_condition1(h: &Hypergraph, pc: &PartialColoring, params: &ColoringParams) -> Vec<EdgeId> {
    (0..h.num_edges())
        .filter(|&f| (pc.per_edge_uncolored(f) as f64) < params.thresh_uncolored)
        .collect()
}

/// Edges missing more than `ceil(10/gamma)` colors.
pub fn check_condition2(h: &Hypergraph, pc: &PartialColoring, params: &ColoringParams) -> Vec<EdgeId> {
    if params.t <= params.thresh_missing {
        // An edge cannot miss more colors than the palette holds.
        return Vec::new();
    }
    (0..h.num_edges())
        .filter(|&f| edge_missing_colors(h, pc, f, params.t).len() > params.thresh_missing)
        .collect()
}

/// Whether `z` distinct incident edges of `v` can be paired with `z`
/// distinct colors such that each edge misses its paired color. This is a
/// system of distinct representatives, i.e. a bipartite matching of size z
/// between the incident edges (those missing anything) and the colors they
/// miss.
fn vertex_matching_reaches(
    h: &Hypergraph,
    v: Vertex,
    z: usize,
    t: usize,
    missing_of: &mut dyn FnMut(EdgeId) -> Vec<Color>,
) -> bool {
    if z == 0 {
        return true;
    }
    if h.degree(v) < z || t < z {
        return false;
    }
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut color_slot = vec![usize::MAX; t + 1];
    let mut n_colors = 0;
    for &f in h.incident(v) {
        let missing = missing_of(f);
        if missing.is_empty() {
            continue;
        }
        let row = missing
            .iter()
            .map(|&c| {
                if color_slot[c as usize] == usize::MAX {
                    color_slot[c as usize] = n_colors;
                    n_colors += 1;
                }
                color_slot[c as usize]
            })
            .collect();
        adj.push(row);
    }
    if adj.len() < z || n_colors < z {
        return false;
    }
    max_matching(&adj, n_colors, Some(z)) >= z
}

/// Vertices admitting a size-z edge/missing-color matching.
pub fn check_condition3(h: &Hypergraph, pc: &PartialColoring, params: &ColoringParams) -> Vec<Vertex> {
    let (t, z) = (params.t, params.z);
    if z > t {
        return Vec::new();
    }
    let missing: Vec<Vec<Color>> = (0..h.num_edges())
        .map(|f| edge_missing_colors(h, pc, f, t))
        .collect();
    h.vertices()
        .filter(|&v| vertex_matching_reaches(h, v, z, t, &mut |f| missing[f].clone()))
        .collect()
}

/// Colors whose class is smaller than `n*(1+gamma/4)*a*ln(k)/k`.
pub fn check_condition4(h: &Hypergraph, pc: &PartialColoring, params: &ColoringParams) -> Vec<Color> {
    let floor = params.class_floor(h.n());
    (1..=params.t as Color)
        .filter(|&c| (pc.class_count(c) as f64) < floor)
        .collect()
}

/// The violations of all four conditions; empty iff the partial coloring is
/// usable by the completion phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub bad_edges_c1: Vec<EdgeId>,
    pub bad_edges_c2: Vec<EdgeId>,
    pub bad_vertices_c3: Vec<Vertex>,
    pub bad_colors_c4: Vec<Color>,
}

impl ViolationReport {
    pub fn compute(h: &Hypergraph, pc: &PartialColoring, params: &ColoringParams) -> Self {
        ViolationReport {
            bad_edges_c1: check_condition1(h, pc, params),
            bad_edges_c2: check_condition2(h, pc, params),
            bad_vertices_c3: check_condition3(h, pc, params),
            bad_colors_c4: check_condition4(h, pc, params),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bad_edges_c1.is_empty()
            && self.bad_edges_c2.is_empty()
            && self.bad_vertices_c3.is_empty()
            && self.bad_colors_c4.is_empty()
    }
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "c1: {} edges, c2: {} edges, c3: {} vertices, c4: {} colors",
            self.bad_edges_c1.len(),
            self.bad_edges_c2.len(),
            self.bad_vertices_c3.len(),
            self.bad_colors_c4.len()
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Phase1Stats {
    pub resamples: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Edge1(EdgeId),
    Edge2(EdgeId),
    Vertex3(Vertex),
}

/// Incremental state for the resampling loop: the coloring caches plus
/// per-edge per-color occurrence counts, per-edge missing-color counts, and
/// the ordered set of currently violated type-1/2/3 events.
struct Engine<'a> {
    h: &'a Hypergraph,
    params: &'a ColoringParams,
    pc: PartialColoring,
    /// `edge_color[f][c]`: vertices of f carrying color c. Slot 0 unused.
    edge_color: Vec<Vec<u32>>,
    /// Colors in `1..=t` with zero occurrences in f.
    missing_count: Vec<usize>,
    violated: BTreeSet<Event>,
    c2_active: bool,
    c3_active: bool,
}

impl<'a> Engine<'a> {
    fn new(h: &'a Hypergraph, params: &'a ColoringParams, pc: PartialColoring) -> Self {
        let t = params.t;
        let mut edge_color = vec![vec![0u32; t + 1]; h.num_edges()];
        let mut missing_count = vec![0usize; h.num_edges()];
        for (f, edge) in h.edges() {
            for &v in edge {
                let c = pc.color_of(v);
                if c != UNCOLORED {
                    edge_color[f][c as usize] += 1;
                }
            }
            missing_count[f] = (1..=t).filter(|&c| edge_color[f][c] == 0).count();
        }
        let mut engine = Engine {
            h,
            params,
            pc,
            edge_color,
            missing_count,
            violated: BTreeSet::new(),
            c2_active: params.t > params.thresh_missing,
            c3_active: params.z <= params.t,
        };
        for f in 0..h.num_edges() {
            engine.refresh_edge_events(f);
        }
        if engine.c3_active {
            for v in engine.h.vertices() {
                engine.refresh_vertex_event(v);
            }
        }
        engine
    }

    fn edge1_violated(&self, f: EdgeId) -> bool {
        (self.pc.per_edge_uncolored(f) as f64) < self.params.thresh_uncolored
    }

    fn edge2_violated(&self, f: EdgeId) -> bool {
        self.c2_active && self.missing_count[f] > self.params.thresh_missing
    }

    fn vertex3_violated(&self, v: Vertex) -> bool {
        let t = self.params.t;
        vertex_matching_reaches(self.h, v, self.params.z, t, &mut |f| {
            if self.missing_count[f] == 0 {
                return Vec::new();
            }
            (1..=t as Color)
                .filter(|&c| self.edge_color[f][c as usize] == 0)
                .collect()
        })
    }

    fn refresh_edge_events(&mut self, f: EdgeId) {
        if self.edge1_violated(f) {
            self.violated.insert(Event::Edge1(f));
        } else {
            self.violated.remove(&Event::Edge1(f));
        }
        if self.edge2_violated(f) {
            self.violated.insert(Event::Edge2(f));
        } else {
            self.violated.remove(&Event::Edge2(f));
        }
    }

    fn refresh_vertex_event(&mut self, v: Vertex) {
        if self.vertex3_violated(v) {
            self.violated.insert(Event::Vertex3(v));
        } else {
            self.violated.remove(&Event::Vertex3(v));
        }
    }

    fn lowest_violated(&self) -> Option<Event> {
        self.violated.iter().next().copied()
    }

    /// The vertices whose colors the event depends on.
    fn scope(&self, event: Event) -> Vec<Vertex> {
        match event {
            Event::Edge1(f) | Event::Edge2(f) => self.h.edge(f).to_vec(),
            Event::Vertex3(v) => {
                let mut vs = BTreeSet::new();
                for &f in self.h.incident(v) {
                    vs.extend(self.h.edge(f).iter().copied());
                }
                vs.into_iter().collect()
            }
        }
    }

    /// Redraws every vertex in the event's scope, then re-evaluates exactly
    /// the events whose inputs changed: type-1/2 events of touched edges,
    /// and type-3 events of vertices incident to an edge whose missing-color
    /// SET (not just counts) changed.
    fn resample<R: Rng>(&mut self, event: Event, rng: &mut R) {
        let mut touched: BTreeSet<EdgeId> = BTreeSet::new();
        let mut missing_changed: BTreeSet<EdgeId> = BTreeSet::new();
        for v in self.scope(event) {
            let new = if rng.random_bool(self.params.q) {
                UNCOLORED
            } else {
                1 + rng.random_range(0..self.params.t as Color)
            };
            self.apply(v, new, &mut touched, &mut missing_changed);
        }
        for &f in &touched {
            self.refresh_edge_events(f);
        }
        if self.c3_active {
            let mut dirty: BTreeSet<Vertex> = BTreeSet::new();
            for &f in &missing_changed {
                dirty.extend(self.h.edge(f).iter().copied());
            }
            for v in dirty {
                self.refresh_vertex_event(v);
            }
        }
    }

    fn apply(
        &mut self,
        v: Vertex,
        new: Color,
        touched: &mut BTreeSet<EdgeId>,
        missing_changed: &mut BTreeSet<EdgeId>,
    ) {
        let old = self.pc.assignment[v as usize];
        if old == new {
            return;
        }
        self.pc.assignment[v as usize] = new;
        match old {
            UNCOLORED => self.pc.uncolored_total -= 1,
            c => self.pc.color_counts[c as usize] -= 1,
        }
        match new {
            UNCOLORED => self.pc.uncolored_total += 1,
            c => self.pc.color_counts[c as usize] += 1,
        }
        for &f in self.h.incident(v) {
            touched.insert(f);
            match old {
                UNCOLORED => self.pc.per_edge_uncolored[f] -= 1,
                c => {
                    self.edge_color[f][c as usize] -= 1;
                    if self.edge_color[f][c as usize] == 0 {
                        self.missing_count[f] += 1;
                        missing_changed.insert(f);
                    }
                }
            }
            match new {
                UNCOLORED => self.pc.per_edge_uncolored[f] += 1,
                c => {
                    self.edge_color[f][c as usize] += 1;
                    if self.edge_color[f][c as usize] == 1 {
                        self.missing_count[f] -= 1;
                        missing_changed.insert(f);
                    }
                }
            }
        }
    }

    /// Shadow recomputation of every cache and the violated set; test hook.
    #[cfg(test)]
    fn audit(&self) -> bool {
        if !self.pc.consistent_with(self.h) {
            return false;
        }
        let fresh = Engine::new(self.h, self.params, self.pc.clone());
        fresh.edge_color == self.edge_color
            && fresh.missing_count == self.missing_count
            && fresh.violated == self.violated
    }
}

/// Samples partial colorings and resamples violated events until conditions
/// 1-3 hold, restarting from fresh randomness whenever condition 4 fails at
/// the end of a stabilization. The resample cap applies per attempt; the
/// returned stats count totals.
pub fn run_phase1<R: Rng>(
    h: &Hypergraph,
    params: &ColoringParams,
    rng: &mut R,
    resample_cap: usize,
    restart_cap: usize,
    trace: &mut TraceSink<'_>,
) -> Result<(PartialColoring, Phase1Stats), Phase1Error> {
    let mut total_resamples = 0usize;
    let mut last_report = ViolationReport::default();
    for attempt in 0..restart_cap {
        let pc = PartialColoring::sample(h, params, rng);
        let mut engine = Engine::new(h, params, pc);
        let mut attempt_resamples = 0usize;
        while let Some(event) = engine.lowest_violated() {
            if attempt_resamples >= resample_cap {
                return Err(Phase1Error::ResampleCapExceeded {
                    cap: resample_cap,
                    report: ViolationReport::compute(h, &engine.pc, params),
                });
            }
            attempt_resamples += 1;
            total_resamples += 1;
            if let Some(w) = trace.as_deref_mut() {
                let (kind, id) = match event {
                    Event::Edge1(f) => ("A", f as u64),
                    Event::Edge2(f) => ("B", f as u64),
                    Event::Vertex3(v) => ("C", v as u64),
                };
                let _ = writeln!(w, "phase1 resample event={kind} id={id} iter={total_resamples}");
            }
            engine.resample(event, rng);
        }
        if check_condition4(h, &engine.pc, params).is_empty() {
            return Ok((
                engine.pc,
                Phase1Stats {
                    resamples: total_resamples,
                    restarts: attempt,
                },
            ));
        }
        last_report = ViolationReport::compute(h, &engine.pc, params);
        if let Some(w) = trace.as_deref_mut() {
            let _ = writeln!(w, "phase1 restart attempt={}", attempt + 1);
        }
    }
    Err(Phase1Error::RestartCapExceeded {
        cap: restart_cap,
        report: last_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_bounded;
    use crate::params::params_with_override;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn all_same(h: &Hypergraph, t: usize, c: Color) -> PartialColoring {
        PartialColoring::from_assignment(h, t, &vec![c; h.n()]).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let h = gen_bounded(64, 4, 6, 32, &mut rng(7)).unwrap();
        let params = params_with_override(4, 1.0, 2).unwrap();
        let a = PartialColoring::sample(&h, &params, &mut rng(11));
        let b = PartialColoring::sample(&h, &params, &mut rng(11));
        assert_eq!(a, b);
        let c = PartialColoring::sample(&h, &params, &mut rng(12));
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_matches_uncolored_probability() {
        // Edgeless carrier: sampling only looks at n and the palette.
        let h = Hypergraph::new(100_000, 1000, Vec::new()).unwrap();
        let params = crate::params::derive_params(1000, 1.0, 0.5).unwrap();
        let n = h.n() as f64;
        let sigma = (params.q * (1.0 - params.q) / n).sqrt();
        for seed in 0..100 {
            let pc = PartialColoring::sample(&h, &params, &mut rng(seed));
            let frac = pc.uncolored_count() as f64 / n;
            assert!(
                (frac - params.q).abs() <= 4.0 * sigma,
                "seed {seed}: fraction {frac} vs q {}",
                params.q
            );
        }
    }

    #[test]
    fn sampling_single_color_palette() {
        let h = Hypergraph::new(50_000, 50, Vec::new()).unwrap();
        let params = params_with_override(50, 1.0, 1).unwrap();
        let n = h.n() as f64;
        let sigma = (params.q * (1.0 - params.q) / n).sqrt();
        let pc = PartialColoring::sample(&h, &params, &mut rng(3));
        let frac = pc.uncolored_count() as f64 / n;
        assert!((frac - params.q).abs() <= 4.0 * sigma);
        assert_eq!(pc.class_count(1) + pc.uncolored_count(), h.n());
    }

    #[test]
    fn condition1_extremes() {
        let h = gen_bounded(32, 4, 8, 16, &mut rng(1)).unwrap();
        let params = params_with_override(4, 1.0, 2).unwrap();
        let all_unc = all_same(&h, params.t, UNCOLORED);
        assert!(check_condition1(&h, &all_unc, &params).is_empty());
        let all_col = all_same(&h, params.t, 1);
        assert_eq!(check_condition1(&h, &all_col, &params).len(), h.num_edges());
    }

    #[test]
    fn condition1_exact_threshold_not_returned() {
        // Single edge, k = 8, t = 2: threshold k*gamma/5 ~ 1.477, so exactly
        // ceil(1.477) = 2 uncolored vertices must pass.
        let h = Hypergraph::new(8, 8, vec![(1..=8).collect()]).unwrap();
        let params = params_with_override(8, 1.0, 2).unwrap();
        let need = params.thresh_uncolored.ceil() as usize;
        let mut colors = vec![1 as Color; 8];
        for slot in colors.iter_mut().take(need) {
            *slot = UNCOLORED;
        }
        let pc = PartialColoring::from_assignment(&h, params.t, &colors).unwrap();
        assert!(check_condition1(&h, &pc, &params).is_empty());
        // One fewer uncolored vertex violates.
        colors[0] = 1;
        let pc = PartialColoring::from_assignment(&h, params.t, &colors).unwrap();
        assert_eq!(check_condition1(&h, &pc, &params), vec![0]);
    }

    #[test]
    fn condition2_vacuous_when_palette_small() {
        let h = Hypergraph::new(8, 8, vec![(1..=8).collect()]).unwrap();
        // t = 2 <= ceil(10/gamma): cannot miss more colors than exist.
        let params = params_with_override(8, 1.0, 2).unwrap();
        assert!(params.t <= params.thresh_missing);
        let pc = all_same(&h, params.t, UNCOLORED);
        assert!(check_condition2(&h, &pc, &params).is_empty());
    }

    #[test]
    fn condition2_threshold_boundary() {
        // k = 100, t = 3 gives gamma ~ 6.24 and thresh_missing = 2 < t.
        let h = Hypergraph::new(100, 100, vec![(1..=100).collect()]).unwrap();
        let params = params_with_override(100, 1.0, 3).unwrap();
        assert_eq!(params.thresh_missing, 2);
        // Fully uncolored edge misses all 3 > 2 colors.
        let pc = all_same(&h, params.t, UNCOLORED);
        assert_eq!(check_condition2(&h, &pc, &params), vec![0]);
        // Exactly thresh_missing = 2 colors missing is allowed.
        let pc = all_same(&h, params.t, 1);
        assert!(check_condition2(&h, &pc, &params).is_empty());
    }

    /// Two k=32 edges sharing vertex 1, palette of 7 colors.
    fn two_edge_instance() -> (Hypergraph, ColoringParams) {
        let e1: Vec<Vertex> = (1..=32).collect();
        let e2: Vec<Vertex> = std::iter::once(1).chain(33..=63).collect();
        let h = Hypergraph::new(63, 32, vec![e1, e2]).unwrap();
        let params = params_with_override(32, 1.0, 7).unwrap().with_z(2);
        (h, params)
    }

    /// Colors vertices so edge 0 misses exactly `miss0` and edge 1 misses
    /// exactly `miss1` of the 7 colors.
    fn color_missing(h: &Hypergraph, miss0: &[Color], miss1: &[Color]) -> PartialColoring {
        let mut colors = vec![UNCOLORED; h.n()];
        let mut fill = |vs: std::ops::RangeInclusive<u32>, missing: &[Color]| {
            let palette: Vec<Color> = (1..=7).filter(|c| !missing.contains(c)).collect();
            for (i, v) in vs.enumerate() {
                colors[(v - 1) as usize] = palette[i % palette.len()];
            }
        };
        fill(2..=32, miss0);
        fill(33..=63, miss1);
        // Vertex 1 takes a color missing from neither edge.
        let shared = (1..=7)
            .find(|c| !miss0.contains(c) && !miss1.contains(c))
            .unwrap();
        colors[0] = shared;
        PartialColoring::from_assignment(h, 7, &colors).unwrap()
    }

    #[test]
    fn condition3_needs_distinct_colors() {
        let (h, params) = two_edge_instance();
        // Both edges missing only color 7: matching size 1 < z = 2.
        let pc = color_missing(&h, &[7], &[7]);
        assert!(check_condition3(&h, &pc, &params).is_empty());
        // Distinct missing colors: vertex 1 is the only vertex in 2 edges.
        let pc = color_missing(&h, &[7], &[5]);
        assert_eq!(check_condition3(&h, &pc, &params), vec![1]);
    }

    #[test]
    fn condition3_low_degree_never_returned() {
        let (h, params) = two_edge_instance();
        let pc = color_missing(&h, &[7], &[5]);
        // Every vertex but 1 has degree 1 < z = 2, whatever it misses.
        for v in check_condition3(&h, &pc, &params) {
            assert_eq!(v, 1);
        }
        let params_z3 = params.with_z(3);
        assert!(check_condition3(&h, &pc, &params_z3).is_empty());
    }

    #[test]
    fn condition4_extremes() {
        let h = Hypergraph::new(50, 50, vec![(1..=50).collect()]).unwrap();
        let params = params_with_override(50, 1.0, 1).unwrap();
        // Everything color 1: class of n = 50 >= floor ~ 15.4.
        let pc = all_same(&h, params.t, 1);
        assert!(check_condition4(&h, &pc, &params).is_empty());
        let pc = all_same(&h, params.t, UNCOLORED);
        assert_eq!(check_condition4(&h, &pc, &params), vec![1]);
    }

    #[test]
    fn condition4_exact_threshold_not_returned() {
        let h = Hypergraph::new(50, 50, vec![(1..=50).collect()]).unwrap();
        let params = params_with_override(50, 1.0, 2).unwrap();
        let floor = params.class_floor(h.n());
        let need = floor.ceil() as usize;
        let mut colors = vec![UNCOLORED; 50];
        for slot in colors.iter_mut().take(need) {
            *slot = 1;
        }
        for slot in colors.iter_mut().skip(need).take(need) {
            *slot = 2;
        }
        let pc = PartialColoring::from_assignment(&h, params.t, &colors).unwrap();
        assert!(check_condition4(&h, &pc, &params).is_empty());
        // Dropping one vertex from class 2 violates it.
        colors[2 * need - 1] = UNCOLORED;
        let pc = PartialColoring::from_assignment(&h, params.t, &colors).unwrap();
        assert_eq!(check_condition4(&h, &pc, &params), vec![2]);
    }

    #[test]
    fn checkers_are_pure() {
        let h = gen_bounded(48, 3, 6, 24, &mut rng(5)).unwrap();
        let params = params_with_override(3, 1.0, 2).unwrap().with_z(2);
        let pc = PartialColoring::sample(&h, &params, &mut rng(6));
        let first = ViolationReport::compute(&h, &pc, &params);
        let second = ViolationReport::compute(&h, &pc, &params);
        assert_eq!(first, second);
    }

    #[test]
    fn run_phase1_no_edges_only_condition4() {
        let h = Hypergraph::new(200, 5, Vec::new()).unwrap();
        let params = params_with_override(5, 1.0, 2).unwrap();
        let (pc, stats) = run_phase1(&h, &params, &mut rng(9), 1000, 100, &mut None).unwrap();
        assert_eq!(stats.resamples, 0);
        let floor = params.class_floor(h.n());
        for c in 1..=params.t as Color {
            assert!(pc.class_count(c) as f64 >= floor);
        }
        assert!(ViolationReport::compute(&h, &pc, &params).is_empty());
    }

    #[test]
    fn run_phase1_triangle_caps_or_passes() {
        // Triangle with t = 1: conditions 1 and 4 cannot hold together, so
        // the run must exhaust its restart budget honestly.
        let h = Hypergraph::parse("2 3 3\n1 2\n2 3\n1 3\n").unwrap();
        let params = params_with_override(2, 1.0, 1).unwrap();
        match run_phase1(&h, &params, &mut rng(2), 500, 25, &mut None) {
            Ok((pc, _)) => assert!(ViolationReport::compute(&h, &pc, &params).is_empty()),
            Err(Phase1Error::RestartCapExceeded { .. }) => {}
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn run_phase1_success_passes_fresh_recheck() {
        let h = gen_bounded(4096, 32, 32, 128, &mut rng(21)).unwrap();
        let params = params_with_override(32, 1.0, 8).unwrap();
        for seed in 0..5 {
            let cap = 50 * (h.num_edges() + h.n());
            let (pc, _) = run_phase1(&h, &params, &mut rng(100 + seed), cap, 1000, &mut None).unwrap();
            assert!(pc.consistent_with(&h));
            assert!(ViolationReport::compute(&h, &pc, &params).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn engine_incremental_state_matches_shadow_recompute() {
        let h = gen_bounded(40, 3, 5, 24, &mut rng(31)).unwrap();
        // Small palette with active condition 2 and 3 paths.
        let params = params_with_override(3, 1.0, 2).unwrap().with_z(2);
        let mut r = rng(32);
        let pc = PartialColoring::sample(&h, &params, &mut r);
        let mut engine = Engine::new(&h, &params, pc);
        assert!(engine.audit());
        let mut steps = 0;
        while let Some(event) = engine.lowest_violated() {
            engine.resample(event, &mut r);
            assert!(engine.audit(), "cache drift after step {steps}");
            steps += 1;
            if steps > 2000 {
                break;
            }
        }
    }

    #[test]
    fn trace_emits_one_line_per_resample() {
        let h = gen_bounded(64, 4, 6, 24, &mut rng(41)).unwrap();
        let params = params_with_override(4, 1.0, 2).unwrap();
        let mut buf: Vec<u8> = Vec::new();
        let result = run_phase1(&h, &params, &mut rng(42), 5000, 100, &mut Some(&mut buf));
        let text = String::from_utf8(buf).unwrap();
        let resample_lines = text.lines().filter(|l| l.contains("resample")).count();
        if let Ok((_, stats)) = result {
            assert_eq!(resample_lines, stats.resamples);
        }
    }
}
