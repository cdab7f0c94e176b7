//! Weighted graphs `(V, w, m)` materialised as finite windows.
//!
//! Vertices carry opaque string ids and are stored in lexicographic id order;
//! all internal indices refer to that order. A window of an infinite graph
//! flags its rim with `boundary`: those vertices may be missing neighbours,
//! so nothing that needs their full neighbourhood is trusted.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Number, Rational};

/// One incident edge as seen from a vertex.
#[derive(Debug, Clone)]
pub struct Adjacent {
    pub to: usize,
    pub weight: Rational,
    pub weight_f: f64,
    pub length: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<Rational>,
    measure_f: Vec<f64>,
    boundary: Vec<bool>,
    adj: Vec<Vec<Adjacent>>,
    edge_count: usize,
    metric_mode: MetricMode,
    connected: bool,
    interior_connected: bool,
}

/// Real-valued assignment on (part of) a window. `None` marks vertices
/// without a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    values: Vec<Option<T>>,
}

pub type ScalarField = Field<f64>;
pub type ExactField = Field<Rational>;

impl<T: Clone> Field<T> {
    pub fn empty(n: usize) -> Self {
        Self {
            values: vec![None; n],
        }
    }

    pub fn total(values: Vec<T>) -> Self {
        Self {
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> Option<T>) -> Self {
        Self {
            values: (0..n).map(&mut f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<&T> {
        self.values.get(v).and_then(Option::as_ref)
    }

    pub fn set(&mut self, v: usize, value: T) {
        self.values[v] = Some(value);
    }

    pub fn clear(&mut self, v: usize) {
        self.values[v] = None;
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Field<U> {
        Field {
            values: self.values.iter().map(|v| v.as_ref().map(&mut f)).collect(),
        }
    }

    /// Keeps only the values on `set`.
    pub fn restrict(&self, set: &[usize]) -> Self {
        let mut out = Self::empty(self.values.len());
        for &v in set {
            if let Some(x) = self.get(v) {
                out.set(v, x.clone());
            }
        }
        out
    }
}

impl ScalarField {
    pub fn to_json(&self, g: &WeightedGraph) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for v in 0..g.len() {
            if let Some(x) = self.get(v) {
                map.insert(g.id(v).to_string(), serde_json::json!(x));
            }
        }
        serde_json::json!({ "values": map })
    }

    pub fn from_json(g: &WeightedGraph, value: &serde_json::Value) -> Result<Self> {
        let values = value
            .get("values")
            .and_then(|v| v.as_object())
            .ok_or_else(|| Error::Parse("field JSON needs an object `values`".into()))?;
        let mut out = Self::empty(g.len());
        for (id, x) in values {
            let v = g.index_of(id)?;
            let x = x
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("values.{id} is not a number")))?;
            out.set(v, x);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
struct PendingEdge {
    weight: Rational,
    length: Option<Rational>,
}

/// Incremental description of a graph; `build` validates it.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<(String, Rational, bool)>,
    edges: Vec<(String, String, Rational, Option<Rational>)>,
    metric_mode: MetricMode,
}

/// Which path metric a graph document asks for.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    #[default]
    Combinatorial,
    EdgeLengths,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: impl Into<String>, measure: Rational, boundary: bool) -> &mut Self {
        self.vertices.push((id.into(), measure, boundary));
        self
    }

    pub fn metric(&mut self, mode: MetricMode) -> &mut Self {
        self.metric_mode = mode;
        self
    }

    pub fn edge(&mut self, u: impl Into<String>, v: impl Into<String>, weight: Rational) -> &mut Self {
        self.edges.push((u.into(), v.into(), weight, None));
        self
    }

    pub fn edge_with_length(
        &mut self,
        u: impl Into<String>,
        v: impl Into<String>,
        weight: Rational,
        length: Rational,
    ) -> &mut Self {
        self.edges.push((u.into(), v.into(), weight, Some(length)));
        self
    }

    pub fn build(&self) -> Result<WeightedGraph> {
        let mut sorted: Vec<&(String, Rational, bool)> = self.vertices.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateVertex(pair[0].0.clone()));
            }
        }
        let ids: Vec<String> = sorted.iter().map(|v| v.0.clone()).collect();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut measure = Vec::with_capacity(ids.len());
        let mut boundary = Vec::with_capacity(ids.len());
        for (id, m, b) in &sorted {
            if !m.is_positive() {
                return Err(Error::NonpositiveMeasure(id.clone()));
            }
            measure.push(m.clone());
            boundary.push(*b);
        }

        let mut pending: BTreeMap<(usize, usize), PendingEdge> = BTreeMap::new();
        for (u, v, w, len) in &self.edges {
            let iu = *index.get(u).ok_or_else(|| Error::UnknownVertex(u.clone()))?;
            let iv = *index.get(v).ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            if w.is_negative() {
                return Err(Error::NegativeWeight(u.clone(), v.clone()));
            }
            if iu == iv {
                if w.is_positive() {
                    return Err(Error::SelfLoop(u.clone()));
                }
                continue;
            }
            if let Some(l) = len {
                if !l.is_positive() {
                    return Err(Error::NonpositiveLength(u.clone(), v.clone()));
                }
            }
            let key = (iu.min(iv), iu.max(iv));
            match pending.get(&key) {
                Some(prev) if prev.weight != *w || (len.is_some() && prev.length != *len) => {
                    return Err(Error::AsymmetricWeight(u.clone(), v.clone()));
                }
                Some(_) => {}
                None => {
                    pending.insert(
                        key,
                        PendingEdge {
                            weight: w.clone(),
                            length: len.clone(),
                        },
                    );
                }
            }
        }

        let mut adj: Vec<Vec<Adjacent>> = vec![Vec::new(); ids.len()];
        let mut edge_count = 0;
        for ((a, b), e) in pending {
            if e.weight.is_zero() {
                continue;
            }
            edge_count += 1;
            let wf = to_f64(&e.weight);
            adj[a].push(Adjacent {
                to: b,
                weight: e.weight.clone(),
                weight_f: wf,
                length: e.length.clone(),
            });
            adj[b].push(Adjacent {
                to: a,
                weight: e.weight,
                weight_f: wf,
                length: e.length,
            });
        }
        for list in &mut adj {
            list.sort_by_key(|a| a.to);
        }
        let measure_f = measure.iter().map(to_f64).collect();
        let mut g = WeightedGraph {
            ids,
            index,
            measure,
            measure_f,
            boundary,
            adj,
            edge_count,
            metric_mode: self.metric_mode,
            connected: false,
            interior_connected: false,
        };
        let all = vec![true; g.len()];
        g.connected = g.components(&all).len() <= 1;
        let interior: Vec<bool> = g.boundary.iter().map(|b| !b).collect();
        g.interior_connected = g.components(&interior).len() <= 1;
        Ok(g)
    }
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        ids.iter().map(|id| self.index_of(id.as_ref())).collect()
    }

    pub fn measure(&self, v: usize) -> &Rational {
        &self.measure[v]
    }

    pub fn measure_f(&self, v: usize) -> f64 {
        self.measure_f[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn metric_mode(&self) -> MetricMode {
        self.metric_mode
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn is_interior_connected(&self) -> bool {
        self.interior_connected
    }

    pub fn neighbors(&self, v: usize) -> &[Adjacent] {
        &self.adj[v]
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<&Adjacent> {
        let list = &self.adj[u];
        list.binary_search_by_key(&v, |a| a.to).ok().map(|i| &list[i])
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edge(u, v).is_some()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &Adjacent)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |a| a.to > u).map(move |a| (u, a)))
    }

    /// `Deg(x) = sum_y w(x,y) / m(x)`.
    pub fn degree(&self, x: usize) -> Rational {
        let total: Rational = self.adj[x].iter().map(|a| &a.weight).sum();
        total / &self.measure[x]
    }

    pub fn degree_f(&self, x: usize) -> f64 {
        self.adj[x].iter().map(|a| a.weight_f).sum::<f64>() / self.measure_f[x]
    }

    /// `q(x,y) = w(x,y) / m(x)`, zero for non-adjacent pairs.
    pub fn transition_rate(&self, x: usize, y: usize) -> Rational {
        match self.edge(x, y) {
            Some(a) => &a.weight / &self.measure[x],
            None => Rational::zero(),
        }
    }

    pub fn transition_rate_f(&self, x: usize, y: usize) -> f64 {
        self.edge(x, y)
            .map(|a| a.weight_f / self.measure_f[x])
            .unwrap_or(0.0)
    }

    /// `Δf(x) = (1/m(x)) sum_y w(x,y) (f(y) - f(x))`.
    pub fn laplacian_at<T: Number>(&self, f: &Field<T>, x: usize) -> Result<T> {
        let fx = f
            .get(x)
            .ok_or_else(|| Error::MissingValue(self.ids[x].clone()))?;
        let mut acc = T::nil();
        for a in &self.adj[x] {
            let fy = f
                .get(a.to)
                .ok_or_else(|| Error::MissingValue(self.ids[a.to].clone()))?;
            acc = acc + T::from_parts(&a.weight, a.weight_f) * (fy.clone() - fx.clone());
        }
        Ok(acc.div(&T::from_parts(&self.measure[x], self.measure_f[x])))
    }

    /// Δf on every vertex whose closed neighbourhood carries values and is
    /// not on the boundary.
    pub fn laplacian<T: Number>(&self, f: &Field<T>) -> Field<T> {
        Field::from_fn(self.len(), |x| {
            if self.boundary[x] {
                None
            } else {
                self.laplacian_at(f, x).ok()
            }
        })
    }

    /// `<f, g> = sum f(x) g(x) m(x)` for `f` supported in the interior.
    pub fn inner_product<T: Number>(&self, f: &Field<T>, g: &Field<T>) -> Result<T> {
        let mut acc = T::nil();
        for x in 0..self.len() {
            let Some(fx) = f.get(x) else { continue };
            if *fx == T::nil() {
                continue;
            }
            if self.boundary[x] {
                return Err(Error::SupportTouchesBoundary(self.ids[x].clone()));
            }
            let gx = g
                .get(x)
                .ok_or_else(|| Error::MissingValue(self.ids[x].clone()))?;
            acc = acc + fx.clone() * gx.clone() * T::from_parts(&self.measure[x], self.measure_f[x]);
        }
        Ok(acc)
    }

    /// Connected components of the subgraph induced on `mask`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if !mask[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for a in &self.adj[u] {
                    if mask[a.to] && !seen[a.to] {
                        seen[a.to] = true;
                        comp.push(a.to);
                        queue.push_back(a.to);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected_set(&self, set: &[usize]) -> bool {
        if set.is_empty() {
            return true;
        }
        let mut mask = vec![false; self.len()];
        for &v in set {
            mask[v] = true;
        }
        self.components(&mask).len() == 1
    }

    /// Hop distances from `sources` inside `mask`.
    pub fn hop_distances(&self, sources: &[usize], mask: &[bool]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices have a distance");
            for a in &self.adj[u] {
                if mask[a.to] && dist[a.to].is_none() {
                    dist[a.to] = Some(du + 1);
                    queue.push_back(a.to);
                }
            }
        }
        dist
    }

    /// A tree here is a connected graph with `|E| = |V| - 1`.
    pub fn is_tree(&self) -> bool {
        self.connected && self.edge_count + 1 == self.len()
    }

    /// Connected components of `V \ K`, classified by whether they leave the
    /// window (the stand-in for being infinite).
    pub fn count_ends(&self, k: &[usize]) -> Result<EndsReport> {
        let mut mask = vec![true; self.len()];
        for &v in k {
            if self.boundary[v] {
                return Err(Error::KTouchesBoundary(self.ids[v].clone()));
            }
            mask[v] = false;
        }
        let components = self
            .components(&mask)
            .into_iter()
            .map(|vertices| {
                let touches_boundary = vertices.iter().any(|&v| self.boundary[v]);
                let measure = vertices.iter().map(|&v| &self.measure[v]).sum();
                let infinite_measure = touches_boundary && self.tail_mass_persists(k, &vertices);
                EndComponent {
                    vertices,
                    touches_boundary,
                    measure,
                    infinite_measure,
                }
            })
            .collect::<Vec<_>>();
        let infinite = components.iter().filter(|c| c.touches_boundary).count();
        Ok(EndsReport {
            infinite,
            finite: components.len() - infinite,
            components,
        })
    }

    // Window proxy for m(component) = ∞: among the hop layers around K that
    // lie inside the window (up to the nearest rim vertex), the mean layer
    // mass of the outer half must be at least half that of the inner half.
    // Summable tails such as geometric chains fail this.
    fn tail_mass_persists(&self, k: &[usize], comp: &[usize]) -> bool {
        let mut mask = vec![false; self.len()];
        for &v in comp.iter().chain(k) {
            mask[v] = true;
        }
        let hops = self.hop_distances(k, &mask);
        let depth = comp
            .iter()
            .filter(|&&v| self.boundary[v])
            .filter_map(|&v| hops[v])
            .min()
            .unwrap_or(0);
        let half = depth.div_ceil(2);
        let (mut inner, mut outer) = (Rational::zero(), Rational::zero());
        for &v in comp {
            match hops[v] {
                Some(h) if h > depth => {}
                Some(h) if h > half => outer += &self.measure[v],
                Some(_) => inner += &self.measure[v],
                None => {}
            }
        }
        if depth <= 1 {
            return true;
        }
        let layers = |n: usize| Rational::from_integer(n.into());
        !inner.is_zero() && outer * layers(2 * half) >= inner * layers(depth - half)
    }

    /// Total measure of a vertex set.
    pub fn set_measure(&self, set: &[usize]) -> Rational {
        set.iter().map(|&v| &self.measure[v]).sum()
    }

    /// Vertices at hop distance ≥ `layers` from every boundary vertex.
    pub fn interior_layers(&self, layers: usize) -> Vec<bool> {
        let rim: Vec<usize> = (0..self.len()).filter(|&v| self.boundary[v]).collect();
        let all = vec![true; self.len()];
        let hops = self.hop_distances(&rim, &all);
        hops.iter()
            .map(|h| h.is_none_or(|h| h >= layers))
            .collect()
    }

    /// Minimum and maximum of `m`, `w` and `Deg` over a vertex set.
    pub fn geometry_bounds(&self, set: &[usize]) -> GeometryBounds {
        let mut b = GeometryBounds {
            min_measure: f64::INFINITY,
            max_measure: 0.0,
            min_weight: f64::INFINITY,
            max_weight: 0.0,
            max_degree: 0.0,
        };
        for &v in set {
            b.min_measure = b.min_measure.min(self.measure_f[v]);
            b.max_measure = b.max_measure.max(self.measure_f[v]);
            b.max_degree = b.max_degree.max(self.degree_f(v));
            for a in &self.adj[v] {
                b.min_weight = b.min_weight.min(a.weight_f);
                b.max_weight = b.max_weight.max(a.weight_f);
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeometryBounds {
    pub min_measure: f64,
    pub max_measure: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub max_degree: f64,
}

#[derive(Debug, Clone)]
pub struct EndComponent {
    pub vertices: Vec<usize>,
    pub touches_boundary: bool,
    pub measure: Rational,
    pub infinite_measure: bool,
}

#[derive(Debug, Clone)]
pub struct EndsReport {
    /// Components of `V \ K` reaching the window rim.
    pub infinite: usize,
    pub finite: usize,
    pub components: Vec<EndComponent>,
}

impl EndsReport {
    pub fn infinite_measure_ends(&self) -> usize {
        self.components.iter().filter(|c| c.infinite_measure).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn path3() -> WeightedGraph {
        let mut b = GraphBuilder::new();
        for i in 0..3 {
            b.vertex(i.to_string(), int(1), false);
        }
        b.edge("0", "1", int(1)).edge("1", "2", int(1));
        b.build().unwrap()
    }

    #[test]
    fn path_on_three_vertices() {
        let g = path3();
        assert_eq!(g.len(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_connected());
        assert!(g.is_tree());
        assert_eq!(g.degree(1), int(2));
        assert_eq!(g.degree(0), int(1));
    }

    #[test]
    fn rejects_bad_input() {
        let mut b = GraphBuilder::new();
        b.vertex("0", int(0), false);
        assert_eq!(b.build().unwrap_err(), Error::NonpositiveMeasure("0".into()));

        let mut b = GraphBuilder::new();
        b.vertex("a", int(1), false).vertex("a", int(1), false);
        assert_eq!(b.build().unwrap_err(), Error::DuplicateVertex("a".into()));

        let mut b = GraphBuilder::new();
        b.vertex("a", int(1), false).vertex("b", int(1), false);
        b.edge("a", "b", int(1)).edge("b", "a", int(2));
        assert!(matches!(b.build().unwrap_err(), Error::AsymmetricWeight(..)));

        let mut b = GraphBuilder::new();
        b.vertex("a", int(1), false);
        b.edge("a", "a", int(1));
        assert_eq!(b.build().unwrap_err(), Error::SelfLoop("a".into()));

        let mut b = GraphBuilder::new();
        b.vertex("a", int(1), false).vertex("b", int(1), false);
        b.edge("a", "b", int(-1));
        assert!(matches!(b.build().unwrap_err(), Error::NegativeWeight(..)));
    }

    #[test]
    fn isolated_vertex_has_degree_zero() {
        let mut b = GraphBuilder::new();
        b.vertex("x", ratio(1, 3), false);
        let g = b.build().unwrap();
        assert_eq!(g.degree(0), int(0));
        assert_eq!(g.transition_rate(0, 0), int(0));
    }

    #[test]
    fn laplacian_needs_neighbour_values() {
        let g = path3();
        let mut f = ScalarField::empty(3);
        f.set(1, 1.0);
        f.set(0, 0.0);
        assert_eq!(g.laplacian_at(&f, 1).unwrap_err(), Error::MissingValue("2".into()));
        f.set(2, 2.0);
        assert_eq!(g.laplacian_at(&f, 1).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_rejects_boundary_support() {
        let mut b = GraphBuilder::new();
        b.vertex("a", int(2), true).vertex("b", int(3), false);
        b.edge("a", "b", int(1));
        let g = b.build().unwrap();
        let f = ScalarField::total(vec![0.0, 1.0]);
        let h = ScalarField::total(vec![5.0, 7.0]);
        assert_eq!(g.inner_product(&f, &h).unwrap(), 21.0);
        let f = ScalarField::total(vec![1.0, 0.0]);
        assert!(matches!(
            g.inner_product(&f, &h),
            Err(Error::SupportTouchesBoundary(_))
        ));
    }
}
