//! Subsets of a system's cells under the `p = 1` energy, with incremental
//! updates.  By the discrete coarea formula the `p = 1` energy of any
//! function is the integral over `t` of the energies of its superlevel sets,
//! so `p = 1` problems are finished on sets.

use super::system::PairEnergy;
use crate::prelude::*;

pub(crate) struct SetState<'s, S: PairEnergy> {
    sys: &'s S,
    inside: Vec<bool>,
    /// `S_c = Σ_{b ∈ A, b ≠ c} w_cb`.
    linked: Vec<f64>,
    energy: f64,
    /// Per-cell mass counted by ratio objectives.
    mass: Vec<f64>,
    mass_in: f64,
}

impl<'s, S: PairEnergy> SetState<'s, S> {
    pub fn new(sys: &'s S, inside: Vec<bool>, mass: Vec<f64>) -> Self {
        let n = sys.len();
        let mut linked = vec![0.0; n];
        for a in 0..n {
            let ia = inside[a];
            let mut acc = 0.0;
            sys.for_each_upper(a, |b, w| {
                if ia {
                    linked[b] += w;
                }
                if inside[b] {
                    acc += w;
                }
            });
            linked[a] += acc;
        }
        let energy = (0..n).filter(|&a| inside[a]).map(|a| 2.0 * (sys.degree(a) - linked[a])).sum();
        let mass_in = (0..n).filter(|&a| inside[a]).map(|a| mass[a]).sum();
        SetState { sys, inside, linked, energy, mass, mass_in }
    }

    #[cfg(test)]
    pub fn energy(&self) -> f64 {
        self.energy
    }

    #[cfg(test)]
    pub fn mass(&self) -> f64 {
        self.mass_in
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    /// Energy change if `c` switches side.
    #[inline]
    pub fn flip_delta(&self, c: usize) -> f64 {
        let d = 2.0 * self.sys.degree(c) - 4.0 * self.linked[c];
        if self.inside[c] {
            -d
        } else {
            d
        }
    }

    fn mass_delta(&self, c: usize) -> f64 {
        if self.inside[c] {
            -self.mass[c]
        } else {
            self.mass[c]
        }
    }

    pub fn flip(&mut self, c: usize) {
        let delta = self.flip_delta(c);
        self.mass_in += self.mass_delta(c);
        self.energy += delta;
        let sign = if self.inside[c] { -1.0 } else { 1.0 };
        self.inside[c] = !self.inside[c];
        for b in 0..self.sys.len() {
            if b != c {
                self.linked[b] += sign * self.sys.weight(c, b);
            }
        }
    }

    /// Adds cells in the given order and returns the prefix length whose set
    /// minimises `objective(energy, mass)`; ties go to the longer prefix.
    /// Only prefixes ending where `breaks` is true are candidates (prefix 0
    /// always is).  The state is left at the chosen prefix.
    pub fn sweep(&mut self, order: &[usize], breaks: &[bool], objective: impl Fn(f64, f64) -> f64) -> usize {
        let mut best = (objective(self.energy, self.mass_in), 0);
        for (k, &c) in order.iter().enumerate() {
            self.flip(c);
            if breaks[k] {
                let v = objective(self.energy, self.mass_in);
                if v <= best.0 {
                    best = (v, k + 1);
                }
            }
        }
        for &c in order[best.1..].iter().rev() {
            self.flip(c);
        }
        best.1
    }

    /// Best-improvement single-cell flips among `movable` until none lowers
    /// `objective(energy, mass)` by more than `rel_tol`.  Returns the number
    /// of flips and whether a local optimum was reached within `limit`.
    pub fn polish(
        &mut self,
        movable: &[bool],
        objective: impl Fn(f64, f64) -> f64,
        rel_tol: f64,
        limit: usize,
    ) -> (usize, bool) {
        for flips in 0..limit {
            let current = objective(self.energy, self.mass_in);
            let mut best: Option<(f64, usize)> = None;
            for c in 0..self.sys.len() {
                if !movable[c] {
                    continue;
                }
                let v = objective(self.energy + self.flip_delta(c), self.mass_in + self.mass_delta(c));
                if v < current - rel_tol * current.abs() && best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, c));
                }
            }
            match best {
                Some((_, c)) => self.flip(c),
                None => return (flips, true),
            }
        }
        (limit, false)
    }
}

/// Orders `candidates` by decreasing value (ties by position) and marks the
/// positions after which the next value is strictly smaller.
pub(crate) fn level_order(values: &[f64], candidates: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let breaks = (0..order.len()).map(|k| k + 1 == order.len() || values[order[k + 1]] < values[order[k]]).collect();
    (order, breaks)
}
