// Reference evaluator for joint moments of free variables built only from the
// defining property: an alternating product of centered elements taken from
// different variables has zero expectation. Used by tests as an oracle that
// shares no code with the lattice formulas.

use std::collections::HashMap;

pub struct FreeOracle {
    // moments[v][k - 1] = E(x_v^k)
    moments: Vec<Vec<f64>>,
    memo: HashMap<Vec<(usize, usize)>, f64>,
}

impl FreeOracle {
    pub fn new(moments: Vec<Vec<f64>>) -> Self {
        FreeOracle {
            moments,
            memo: HashMap::new(),
        }
    }

    /// `E(x_{w_1} x_{w_2} ⋯)` for a word of variable indices.
    pub fn moment(&mut self, word: &[usize]) -> f64 {
        let runs = to_runs(word.iter().map(|&v| (v, 1)));
        self.runs_moment(runs)
    }

    fn single(&self, v: usize, p: usize) -> f64 {
        if p == 0 {
            1.0
        } else {
            self.moments[v][p - 1]
        }
    }

    fn runs_moment(&mut self, runs: Vec<(usize, usize)>) -> f64 {
        match runs.len() {
            0 => return 1.0,
            1 => return self.single(runs[0].0, runs[0].1),
            _ => {}
        }
        if let Some(&v) = self.memo.get(&runs) {
            return v;
        }
        // 0 = E(Π (a_i - m_i)) = Σ_S Π_{i∉S} (-m_i) E(Π_{i∈S} a_i)
        let s = runs.len();
        let means: Vec<f64> = runs.iter().map(|&(v, p)| self.single(v, p)).collect();
        let full = (1usize << s) - 1;
        let mut acc = 0.0;
        for mask in 0..full {
            let mut coeff = 1.0;
            for (i, m) in means.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    coeff *= -m;
                }
            }
            if coeff == 0.0 {
                continue;
            }
            let sub = to_runs((0..s).filter(|i| mask & (1 << i) != 0).map(|i| runs[i]));
            acc += coeff * self.runs_moment(sub);
        }
        let value = -acc;
        self.memo.insert(runs, value);
        value
    }
}

// merges adjacent letters of the same variable into powers
fn to_runs(letters: impl Iterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (v, p) in letters {
        match runs.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => runs.push((v, p)),
        }
    }
    runs
}
