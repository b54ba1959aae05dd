//! Finitely generated matrix groups: word balls, finitely supported
//! functions, convolution and the Sobolev / Schwartz norms.

mod function;
mod io;

pub use function::{
    convolve, schwartz_norm, sobolev_norm, xi_summability_partial, xi_table, GroupFunction,
};
pub use io::{BallRecord, ElementRecord};

use hashbrown::HashTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{BuildHasher, Hash, Hasher};

use crate::error::{Error, Result};
use crate::lie::{cartan_projection, log_sv_2x2, ChamberVector, GroupElement};

/// Largest supported matrix size for ball enumeration.
pub const MAX_DIM: usize = 4;
/// Default cap on the number of ball elements.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;
/// Scale of the rounded keys in floating mode (entries rounded to 1e-8).
const FLOAT_KEY_SCALE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    ExactInteger,
    Floating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    pub name: String,
    pub generators: Vec<GroupElement>,
    pub arithmetic: Arithmetic,
}

impl GroupPresentation {
    pub fn new(name: &str, generators: Vec<GroupElement>) -> Result<Self> {
        let n = generators
            .first()
            .map(|g| g.dim())
            .ok_or_else(|| Error::InvalidParameter("presentation needs a generator".into()))?;
        if n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if generators.iter().any(|g| g.dim() != n) {
            return Err(Error::InvalidParameter(
                "generators must share one dimension".into(),
            ));
        }
        let integral = generators.iter().all(|g| {
            let inv = g.inverse();
            g.matrix()
                .iter()
                .chain(inv.matrix().iter())
                .all(|x| x.fract() == 0.0 && x.abs() < 1e15)
        });
        Ok(Self {
            name: name.to_string(),
            generators,
            arithmetic: if integral {
                Arithmetic::ExactInteger
            } else {
                Arithmetic::Floating
            },
        })
    }

    /// Free subgroup of SL(2,Z) generated by `[[1,2],[0,1]]` and `[[1,0],[2,1]]`.
    pub fn sanov() -> Self {
        Self::from_literals("sanov", "1,2;0,1 | 1,0;2,1").expect("valid built-in")
    }

    /// SL(2,Z) generated by `S = [[0,-1],[1,0]]` and `T = [[1,1],[0,1]]`.
    pub fn sl2z() -> Self {
        Self::from_literals("sl2z", "0,-1;1,0 | 1,1;0,1").expect("valid built-in")
    }

    /// SL(3,Z) generated by the elementary matrices `e_ij(1)`, `i != j`.
    pub fn sl3z() -> Self {
        let mut gens = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let rows: Vec<Vec<f64>> = (0..3)
                        .map(|r| {
                            (0..3)
                                .map(|c| f64::from(u8::from(r == c || (r == i && c == j))))
                                .collect()
                        })
                        .collect();
                    gens.push(GroupElement::from_rows(&rows).expect("unimodular"));
                }
            }
        }
        Self::new("sl3z", gens).expect("valid built-in")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "sanov" => Ok(Self::sanov()),
            "sl2z" | "sl2" => Ok(Self::sl2z()),
            "sl3z" | "sl3" => Ok(Self::sl3z()),
            other => Err(Error::UnknownPresentation(other.to_string())),
        }
    }

    /// Generators written as matrix literals separated by `|`, e.g.
    /// `"1,2;0,1 | 1,0;2,1"`.
    pub fn from_literals(name: &str, literals: &str) -> Result<Self> {
        let gens = literals
            .split('|')
            .map(|s| GroupElement::parse(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, gens)
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// Generators followed by those inverses that are not already listed.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let mut out = self.generators.clone();
        for g in &self.generators {
            let mut inv = g.inverse();
            if self.arithmetic == Arithmetic::ExactInteger {
                inv = GroupElement::from_matrix_unchecked(inv.matrix().map(|x| x.round()));
            }
            let dup = out
                .iter()
                .any(|h| (h.matrix() - inv.matrix()).amax() < 1e-12);
            if !dup {
                out.push(inv);
            }
        }
        out
    }
}

type Key = [i64; MAX_DIM * MAX_DIM];

/// Breadth-first ball `B_R` of the word metric, with exact lookup.
pub struct BallIndex {
    presentation: GroupPresentation,
    generators: Vec<GroupElement>,
    n: usize,
    radius: u32,
    keys: Vec<i64>,
    floats: Option<Vec<f64>>,
    word_length: Vec<u16>,
    parent: Vec<u32>,
    via: Vec<u16>,
    chamber: Vec<f64>,
    table: HashTable<u32>,
    hasher: hashbrown::DefaultHashBuilder,
}

impl fmt::Debug for BallIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BallIndex")
            .field("presentation", &self.presentation.name)
            .field("radius", &self.radius)
            .field("len", &self.len())
            .finish()
    }
}

pub fn generate_ball(p: &GroupPresentation, radius: u32) -> Result<BallIndex> {
    generate_ball_capped(p, radius, DEFAULT_BALL_CAP)
}

pub fn generate_ball_capped(p: &GroupPresentation, radius: u32, cap: usize) -> Result<BallIndex> {
    let n = p.dim();
    let k = n * n;
    let generators = p.symmetric_generators();
    let exact = p.arithmetic == Arithmetic::ExactInteger;
    let mut ball = BallIndex {
        presentation: p.clone(),
        generators,
        n,
        radius,
        keys: Vec::new(),
        floats: (!exact).then(Vec::new),
        word_length: Vec::new(),
        parent: Vec::new(),
        via: Vec::new(),
        chamber: Vec::new(),
        table: HashTable::new(),
        hasher: Default::default(),
    };
    let identity: Vec<f64> = (0..k)
        .map(|i| f64::from(u8::from(i % (n + 1) == 0)))
        .collect();
    let id_key = ball.key_of(&identity)?;
    ball.insert_key(
        &id_key[..k],
        (!exact).then_some(&identity[..]),
        0,
        u32::MAX,
        u16::MAX,
    );
    let gen_entries: Vec<Vec<f64>> = ball
        .generators
        .iter()
        .map(|g| row_major(g.matrix(), n))
        .collect();
    let gen_ints: Vec<Vec<i64>> = gen_entries
        .iter()
        .map(|e| e.iter().map(|&x| x as i64).collect())
        .collect();
    let mut level_start = 0;
    for level in 1..=radius {
        let level_end = ball.len();
        for x in level_start..level_end {
            for (s, (gf, gi)) in gen_entries.iter().zip(&gen_ints).enumerate() {
                if exact {
                    let key = mul_int(&ball.keys[x * k..(x + 1) * k], gi, n)?;
                    check_exact(&key[..k])?;
                    match ball.find_key(&key[..k]) {
                        Some(_) => {}
                        None => {
                            if ball.len() >= cap {
                                return Err(Error::BallOverflow { cap });
                            }
                            ball.insert_key(&key[..k], None, level as u16, x as u32, s as u16);
                        }
                    }
                } else {
                    let a = &ball.floats.as_ref().expect("floating ball")[x * k..(x + 1) * k];
                    let product = mul_float(a, gf, n);
                    match ball.lookup(&product)? {
                        Some(_) => {}
                        None => {
                            if ball.len() >= cap {
                                return Err(Error::BallOverflow { cap });
                            }
                            let key = ball.key_of(&product)?;
                            ball.insert_key(
                                &key[..k],
                                Some(&product),
                                level as u16,
                                x as u32,
                                s as u16,
                            );
                        }
                    }
                }
            }
        }
        level_start = level_end;
    }
    ball.compute_chambers()?;
    Ok(ball)
}

/// Integer entries must stay exactly representable as `f64`.
fn check_exact(key: &[i64]) -> Result<()> {
    if key.iter().all(|v| v.unsigned_abs() < (1u64 << 53)) {
        Ok(())
    } else {
        Err(Error::IntegerOverflow)
    }
}

fn row_major(m: &nalgebra::DMatrix<f64>, n: usize) -> Vec<f64> {
    (0..n * n).map(|i| m[(i / n, i % n)]).collect()
}

fn mul_int(a: &[i64], b: &[i64], n: usize) -> Result<Key> {
    let mut out = [0i64; MAX_DIM * MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            let mut acc: i64 = 0;
            for l in 0..n {
                let t = a[i * n + l]
                    .checked_mul(b[l * n + j])
                    .ok_or(Error::IntegerOverflow)?;
                acc = acc.checked_add(t).ok_or(Error::IntegerOverflow)?;
            }
            out[i * n + j] = acc;
        }
    }
    Ok(out)
}

fn mul_float(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|l| a[i * n + l] * b[l * n + j]).sum();
        }
    }
    out
}

impl BallIndex {
    fn key_of(&self, entries: &[f64]) -> Result<Key> {
        let mut key = [0i64; MAX_DIM * MAX_DIM];
        for (slot, &x) in key.iter_mut().zip(entries) {
            let v = if self.floats.is_some() {
                (x * FLOAT_KEY_SCALE).round()
            } else {
                x
            };
            if !v.is_finite() || v.abs() >= 9.0e18 {
                return Err(Error::IntegerOverflow);
            }
            *slot = v as i64;
        }
        Ok(key)
    }

    fn hash_key(&self, key: &[i64]) -> u64 {
        let mut h = self.hasher.build_hasher();
        key.hash(&mut h);
        h.finish()
    }

    fn stored_key(&self, i: usize) -> &[i64] {
        let k = self.n * self.n;
        &self.keys[i * k..(i + 1) * k]
    }

    /// Index of the element with the given row-major entries.
    pub fn lookup(&self, entries: &[f64]) -> Result<Option<usize>> {
        let k = self.n * self.n;
        let key = self.key_of(entries)?;
        let found = self.find_key(&key[..k]);
        if let (Some(i), Some(floats)) = (found, &self.floats) {
            let stored = &floats[i * k..(i + 1) * k];
            let scale = stored.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            let gap = stored
                .iter()
                .zip(entries)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            if gap > 1e-10 * scale {
                return Err(Error::KeyCollision {
                    first: i,
                    second: self.len(),
                });
            }
        }
        Ok(found)
    }

    fn find_key(&self, key: &[i64]) -> Option<usize> {
        let hash = self.hash_key(key);
        self.table
            .find(hash, |&i| self.stored_key(i as usize) == key)
            .map(|&i| i as usize)
    }

    fn insert_key(
        &mut self,
        key: &[i64],
        floats: Option<&[f64]>,
        level: u16,
        parent: u32,
        via: u16,
    ) {
        let hash = self.hash_key(key);
        let index = self.word_length.len() as u32;
        self.keys.extend_from_slice(key);
        if let (Some(f), Some(entries)) = (&mut self.floats, floats) {
            f.extend_from_slice(entries);
        }
        self.word_length.push(level);
        self.parent.push(parent);
        self.via.push(via);
        let k = self.n * self.n;
        let keys = &self.keys;
        let hasher = &self.hasher;
        self.table.insert_unique(hash, index, |&i| {
            let mut h = hasher.build_hasher();
            keys[i as usize * k..(i as usize + 1) * k].hash(&mut h);
            h.finish()
        });
    }

    fn compute_chambers(&mut self) -> Result<()> {
        let n = self.n;
        let chambers: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let e = self.entries(i);
                if n == 2 {
                    let h = log_sv_2x2(e[0], e[1], e[2], e[3]);
                    Ok(vec![h, -h])
                } else {
                    Ok(cartan_projection(&self.element(i))?.values().to_vec())
                }
            })
            .collect::<Result<_>>()?;
        self.chamber = chambers.into_iter().flatten().collect();
        Ok(())
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    /// Generators used for the breadth-first search (inverses appended).
    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.word_length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_length.is_empty()
    }

    /// Number of elements of word length at most `r`; elements are stored
    /// in breadth-first order, so this is a prefix.
    pub fn prefix_len(&self, r: u32) -> usize {
        self.word_length.partition_point(|&w| u32::from(w) <= r)
    }

    pub fn word_length(&self, i: usize) -> u32 {
        u32::from(self.word_length[i])
    }

    /// Row-major entries of element `i`.
    pub fn entries(&self, i: usize) -> Vec<f64> {
        let k = self.n * self.n;
        match &self.floats {
            Some(f) => f[i * k..(i + 1) * k].to_vec(),
            None => self.keys[i * k..(i + 1) * k]
                .iter()
                .map(|&v| v as f64)
                .collect(),
        }
    }

    pub fn element(&self, i: usize) -> GroupElement {
        GroupElement::from_matrix_unchecked(nalgebra::DMatrix::from_row_slice(
            self.n,
            self.n,
            &self.entries(i),
        ))
    }

    pub fn chamber(&self, i: usize) -> ChamberVector {
        ChamberVector::from_sorted_unchecked(self.chamber[i * self.n..(i + 1) * self.n].to_vec())
    }

    /// `L(gamma_i)`.
    pub fn length(&self, i: usize) -> f64 {
        self.chamber[i * self.n..(i + 1) * self.n]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_length(&self) -> f64 {
        (0..self.len()).map(|i| self.length(i)).fold(0.0, f64::max)
    }

    /// Generator indices of the breadth-first word for element `i`.
    pub fn word(&self, i: usize) -> Vec<u16> {
        let mut out = Vec::with_capacity(self.word_length[i] as usize);
        let mut j = i;
        while self.parent[j] != u32::MAX {
            out.push(self.via[j]);
            j = self.parent[j] as usize;
        }
        out.reverse();
        out
    }

    /// Word spelled with `a, b, ...` for the given generators and upper case
    /// for appended inverses.
    pub fn word_string(&self, i: usize) -> String {
        let g = self.presentation.generators.len();
        let letters: Vec<char> = self
            .word(i)
            .iter()
            .map(|&s| {
                let s = s as usize;
                if s < g {
                    (b'a' + s as u8) as char
                } else {
                    let base = self.inverse_of_generator(s);
                    (b'A' + base as u8) as char
                }
            })
            .collect();
        if letters.is_empty() {
            "e".into()
        } else {
            letters.into_iter().collect()
        }
    }

    fn inverse_of_generator(&self, s: usize) -> usize {
        let inv = self.generators[s].inverse();
        self.presentation
            .generators
            .iter()
            .position(|g| (g.matrix() - inv.matrix()).amax() < 1e-9)
            .unwrap_or(s)
    }

    /// Index of `gamma_i * gamma'_j` for `gamma'` in `other`.
    pub fn product_index(
        &self,
        left: &BallIndex,
        i: usize,
        right: &BallIndex,
        j: usize,
    ) -> Result<Option<usize>> {
        let n = self.n;
        let k = n * n;
        if self.floats.is_none() && left.floats.is_none() && right.floats.is_none() {
            let p = mul_int(
                &left.keys[i * k..(i + 1) * k],
                &right.keys[j * k..(j + 1) * k],
                n,
            )?;
            return Ok(self.find_key(&p[..k]));
        }
        self.lookup(&mul_float(&left.entries(i), &right.entries(j), n))
    }

    /// Index of `gamma_i^-1` within this ball.
    pub fn inverse_index(&self, i: usize) -> Result<Option<usize>> {
        let mut inv = row_major(self.element(i).inverse().matrix(), self.n);
        if self.floats.is_none() {
            inv.iter_mut().for_each(|x| *x = x.round());
        }
        self.lookup(&inv)
    }

    pub fn same_group(&self, other: &BallIndex) -> bool {
        self.presentation == other.presentation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_is_identity() {
        let b = generate_ball(&GroupPresentation::sanov(), 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.word_length(0), 0);
        assert_eq!(b.length(0), 0.0);
        assert_eq!(b.word_string(0), "e");
    }

    #[test]
    fn free_counts() {
        for r in 0..=6 {
            let b = generate_ball(&GroupPresentation::sanov(), r).unwrap();
            assert_eq!(b.len(), 2 * 3usize.pow(r) - 1);
        }
    }

    #[test]
    fn sl2z_counts_and_nesting() {
        let p = GroupPresentation::sl2z();
        let sizes: Vec<usize> = (1..=8)
            .map(|r| generate_ball(&p, r).unwrap().len())
            .collect();
        assert_eq!(sizes, vec![5, 16, 36, 68, 120, 204, 340, 560]);
        let big = generate_ball(&p, 6).unwrap();
        let small = generate_ball(&p, 5).unwrap();
        assert_eq!(big.prefix_len(5), small.len());
        for i in 0..small.len() {
            assert_eq!(big.entries(i), small.entries(i));
        }
    }

    #[test]
    fn words_and_inverses() {
        let b = generate_ball(&GroupPresentation::sanov(), 3).unwrap();
        for i in 0..b.len() {
            let mut g = GroupElement::identity(2);
            for &s in &b.word(i) {
                g = &g * &b.generators()[s as usize];
            }
            assert_eq!(row_major(g.matrix(), 2), b.entries(i));
            let j = b.inverse_index(i).unwrap().unwrap();
            assert_eq!(b.product_index(&b, i, &b, j).unwrap(), Some(0));
        }
    }

    #[test]
    fn cap_and_floating_mode() {
        assert_eq!(
            generate_ball_capped(&GroupPresentation::sanov(), 5, 100).unwrap_err(),
            Error::BallOverflow { cap: 100 }
        );
        let c = 0.5f64.cos();
        let s = 0.5f64.sin();
        let p = GroupPresentation::new(
            "rot-shear",
            vec![
                GroupElement::from_rows(&[vec![c, -s], vec![s, c]]).unwrap(),
                GroupElement::parse("1,2;0,1").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(p.arithmetic, Arithmetic::Floating);
        let b = generate_ball(&p, 3).unwrap();
        assert!(b.len() > 1 && b.len() <= 2 * 27 - 1);
    }

    #[test]
    fn sl3z_ball() {
        let b = generate_ball(&GroupPresentation::sl3z(), 2).unwrap();
        assert_eq!(b.generators().len(), 12);
        assert!(b.len() > 13);
        assert!(b.length(b.len() - 1) > 0.0);
    }
}
