use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::symexpr::{NormalForm, Symbol, TermAtom, Q};

/// Sparse rows `sum_j a_ij u_j = b_i`, one per independent term atom.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub unknowns: Vec<Symbol>,
    pub rows: Vec<BTreeMap<usize, Q>>,
    pub rhs: Vec<Q>,
    pub atoms: Vec<TermAtom>,
    index: HashMap<Symbol, usize>,
}

impl LinearSystem {
    pub fn new(unknowns: Vec<Symbol>) -> Self {
        let index = unknowns
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        LinearSystem {
            unknowns,
            index,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Collect `residual = 0` by term atom after stripping the unknowns.
    ///
    /// Each term must contain at most one unknown, to the first power, and
    /// unknowns may not occur inside kernel arguments.
    pub fn add_residual(&mut self, residual: &NormalForm) -> Result<()> {
        let mut groups: BTreeMap<TermAtom, (BTreeMap<usize, Q>, Q)> = BTreeMap::new();
        for (t, c) in residual.terms() {
            let mut hit: Option<(usize, &Symbol)> = None;
            for (s, e) in t.mono() {
                if let Some(&i) = self.index.get(s) {
                    if *e != 1 || hit.is_some() {
                        return Err(Error::NonlinearInConstants(
                            NormalForm::from_term(t.clone(), c.clone()).to_string(),
                        ));
                    }
                    hit = Some((i, s));
                }
            }
            for k in t.kernels() {
                if k.arg.symbols().iter().any(|s| self.index.contains_key(s)) {
                    return Err(Error::NonlinearInConstants(
                        NormalForm::from_term(t.clone(), c.clone()).to_string(),
                    ));
                }
            }
            match hit {
                Some((i, s)) => {
                    let key = t.without(s);
                    let entry = groups.entry(key).or_default();
                    let v = entry.0.entry(i).or_insert_with(Q::zero);
                    *v += c;
                    if v.is_zero() {
                        entry.0.remove(&i);
                    }
                }
                None => {
                    let entry = groups.entry(t.clone()).or_default();
                    entry.1 -= c;
                }
            }
        }
        for (atom, (row, rhs)) in groups {
            if row.is_empty() && rhs.is_zero() {
                continue;
            }
            self.rows.push(row);
            self.rhs.push(rhs);
            self.atoms.push(atom);
        }
        Ok(())
    }

    pub fn is_solution(&self, v: &[Q]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, b)| {
            let mut s = Q::zero();
            for (j, a) in row {
                s += a * &v[*j];
            }
            &s == b
        })
    }
}

/// Particular solution plus a reduced basis of the homogeneous solutions.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    pub unknowns: Vec<Symbol>,
    pub particular: Vec<Q>,
    pub nullspace: Vec<Vec<Q>>,
    pub rank: usize,
}

impl SolutionSpace {
    pub fn dim(&self) -> usize {
        self.nullspace.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.particular.iter().all(|c| c.is_zero())
    }

    /// Whether `v` is a homogeneous solution.
    pub fn contains_direction(&self, v: &[Q]) -> bool {
        in_span(&self.nullspace, v)
    }

    /// Whether `v` solves the (possibly inhomogeneous) system.
    pub fn contains(&self, v: &[Q]) -> bool {
        let d: Vec<Q> = v.iter().zip(&self.particular).map(|(a, b)| a - b).collect();
        in_span(&self.nullspace, &d)
    }
}

/// Incremental reduced row echelon form over sparse rows.
#[derive(Default)]
struct Echelon {
    pivots: BTreeMap<usize, (BTreeMap<usize, Q>, Q)>,
}

fn axpy(row: &mut BTreeMap<usize, Q>, f: &Q, other: &BTreeMap<usize, Q>) {
    for (j, a) in other {
        let v = row.entry(*j).or_insert_with(Q::zero);
        *v -= f * a;
        if v.is_zero() {
            row.remove(j);
        }
    }
}

impl Echelon {
    /// Returns `false` when the row reduces to `0 = nonzero`.
    fn insert(&mut self, mut row: BTreeMap<usize, Q>, mut rhs: Q) -> bool {
        let hits: Vec<usize> = row
            .keys()
            .filter(|c| self.pivots.contains_key(c))
            .copied()
            .collect();
        for c in hits {
            let f = row[&c].clone();
            let (prow, prhs) = &self.pivots[&c];
            axpy(&mut row, &f, prow);
            rhs -= &f * prhs;
        }
        let Some((&lead, lv)) = row.iter().next() else {
            return rhs.is_zero();
        };
        let inv = Q::one() / lv;
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        for (prow, prhs) in self.pivots.values_mut() {
            if let Some(f) = prow.get(&lead).cloned() {
                axpy(prow, &f, &row);
                *prhs -= &f * &rhs;
            }
        }
        self.pivots.insert(lead, (row, rhs));
        true
    }
}

pub fn solve_linear(sys: &LinearSystem) -> Result<SolutionSpace> {
    let n = sys.unknowns.len();
    let mut ech = Echelon::default();
    for (i, (row, b)) in sys.rows.iter().zip(&sys.rhs).enumerate() {
        if !ech.insert(row.clone(), b.clone()) {
            return Err(Error::Inconsistent(format!(
                "equation for atom `{}` cannot be satisfied",
                NormalForm::from_term(sys.atoms[i].clone(), Q::one())
            )));
        }
    }
    let mut particular = vec![Q::zero(); n];
    for (c, (_, b)) in &ech.pivots {
        particular[*c] = b.clone();
    }
    let mut nullspace = Vec::new();
    for f in 0..n {
        if ech.pivots.contains_key(&f) {
            continue;
        }
        let mut v = vec![Q::zero(); n];
        v[f] = Q::one();
        for (c, (row, _)) in &ech.pivots {
            if let Some(a) = row.get(&f) {
                v[*c] = -a.clone();
            }
        }
        nullspace.push(v);
    }
    Ok(SolutionSpace {
        unknowns: sys.unknowns.clone(),
        particular,
        nullspace: rref(nullspace),
        rank: ech.pivots.len(),
    })
}

/// Reduced row echelon form of dense rows; zero rows are dropped.
pub fn rref(rows: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    rref_with_order(rows, None)
}

/// RREF where pivots are searched in the given column order.
pub fn rref_with_order(mut rows: Vec<Vec<Q>>, order: Option<&[usize]>) -> Vec<Vec<Q>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let cols: Vec<usize> = match order {
        Some(o) => o.to_vec(),
        None => (0..ncols).collect(),
    };
    let mut r = 0;
    for &c in &cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Q::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (a, b) in row.iter_mut().zip(&pivot) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    rref(rows.to_vec()).len()
}

pub fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return true;
    }
    let mut rows = basis.to_vec();
    let before = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == before
}

/// Basis of `{w : <w, b> = 0 for every row b}`, in RREF.
pub fn annihilator(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut sys = LinearSystem::new((0..ncols).map(|i| Symbol::param(&format!("w{}", i))).collect());
    for r in rows {
        let row: BTreeMap<usize, Q> = r
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.clone()))
            .collect();
        sys.rows.push(row);
        sys.rhs.push(Q::zero());
        sys.atoms.push(TermAtom::one());
    }
    solve_linear(&sys).expect("homogeneous").nullspace
}
