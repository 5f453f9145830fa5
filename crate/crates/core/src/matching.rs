//! Maximum bipartite matching by augmenting paths (Kuhn).

pub struct Bipartite {
    adj: Vec<Vec<usize>>,
    n_right: usize,
}

impl Bipartite {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        Bipartite { adj: vec![Vec::new(); n_left], n_right }
    }

    pub fn neighbours(&self, l: usize) -> &[usize] {
        &self.adj[l]
    }

    pub fn edge(&mut self, l: usize, r: usize) {
        self.adj[l].push(r);
    }

    /// Returns `match_left[l] = Some(r)` for a maximum matching.
    pub fn max_matching(&self) -> Vec<Option<usize>> {
        let mut match_right: Vec<Option<usize>> = vec![None; self.n_right];
        let mut seen = vec![0usize; self.n_right];
        for l in 0..self.adj.len() {
            self.augment(l, l + 1, &mut seen, &mut match_right);
        }
        let mut match_left = vec![None; self.adj.len()];
        for (r, l) in match_right.iter().enumerate() {
            if let Some(l) = l {
                match_left[*l] = Some(r);
            }
        }
        match_left
    }

    fn augment(&self, l: usize, stamp: usize, seen: &mut [usize], mr: &mut [Option<usize>]) -> bool {
        for &r in &self.adj[l] {
            if seen[r] == stamp {
                continue;
            }
            seen[r] = stamp;
            if mr[r].is_none() || self.augment(mr[r].unwrap(), stamp, seen, mr) {
                mr[r] = Some(l);
                return true;
            }
        }
        false
    }

    pub fn matching_size(&self) -> usize {
        self.max_matching().iter().filter(|m| m.is_some()).count()
    }
}
