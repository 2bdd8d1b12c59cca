//! Pareto dominance, fast non-dominated sorting and crowding distance for
//! bi-objective minimization.

/// `(fpr, fnr)`, both minimized.
pub type Objectives = [f64; 2];

/// `a` is no worse than `b` in every objective and strictly better in one.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Fronts as lists of indices into the sorted slice; front 0 is the
/// non-dominated set. Indices inside a front are ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrontSet {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontSet {
    pub fn len(&self) -> usize {
        self.fronts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fronts.is_empty()
    }

    /// Front index of every individual.
    pub fn ranks(&self, n: usize) -> Vec<usize> {
        let mut ranks = vec![usize::MAX; n];
        for (r, front) in self.fronts.iter().enumerate() {
            for &i in front {
                ranks[i] = r;
            }
        }
        ranks
    }
}

/// Deb's fast non-dominated sort, `O(M N^2)`.
pub fn fast_nondominated_sort(objs: &[Objectives]) -> FrontSet {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];

    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(&objs[p], &objs[q]) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&objs[q], &objs[p]) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    FrontSet { fronts }
}

/// Crowding distance of each member of one front, in input order.
///
/// For each objective the front is sorted by that objective; the two ends
/// get `+inf` and every interior member adds the gap between its neighbours
/// divided by the objective's range. A zero range contributes nothing.
pub fn crowding_distance_assignment(front: &[Objectives]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        dist.fill(f64::INFINITY);
        return dist;
    }
    let mut order: Vec<usize> = (0..n).collect();
    #[allow(clippy::needless_range_loop)]
    for m in 0..2 {
        order.sort_by(|&a, &b| front[a][m].total_cmp(&front[b][m]));
        let (first, last) = (order[0], order[n - 1]);
        dist[first] = f64::INFINITY;
        dist[last] = f64::INFINITY;
        let range = front[last][m] - front[first][m];
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let gap = front[order[k + 1]][m] - front[order[k - 1]][m];
            dist[order[k]] += gap / range;
        }
    }
    dist
}
