//! Cayley–Dickson algebras ℂ, ℍ and 𝕆.
//!
//! Products are defined by the doubling rule
//!
//! ```text
//! (a, b)(c, d) = (ac − d̄b, da + bc̄)
//! ```
//!
//! applied recursively from ℝ. The recursion is kept as
//! [`multiply_doubling`]; the hot path [`multiply`] uses a basis table
//! derived from it once per level. Coefficients are generic over [`Coeff`]
//! so that identities on integer inputs are checked in exact `i64`
//! arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{LabError, Result};

/// Doubling level: 1 → ℂ, 2 → ℍ, 3 → 𝕆.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraLevel(u8);

impl AlgebraLevel {
    pub const COMPLEX: AlgebraLevel = AlgebraLevel(1);
    pub const QUATERNION: AlgebraLevel = AlgebraLevel(2);
    pub const OCTONION: AlgebraLevel = AlgebraLevel(3);

    pub fn new(level: u8) -> Result<Self> {
        match level {
            1..=3 => Ok(AlgebraLevel(level)),
            _ => Err(LabError::Usage(format!(
                "algebra level must be 1, 2 or 3, got {level}"
            ))),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Real dimension 2^level.
    pub fn dim(self) -> usize {
        1 << self.0
    }

    pub fn imaginary_dim(self) -> usize {
        self.dim() - 1
    }

    /// n such that the unit imaginary sphere is Sⁿ (and the frame sphere is S^{n+1}).
    pub fn sphere_dim(self) -> usize {
        self.dim() - 2
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "complex",
            2 => "quaternion",
            _ => "octonion",
        }
    }
}

impl fmt::Display for AlgebraLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (level {})", self.name(), self.0)
    }
}

/// Coefficient ring for algebra elements.
pub trait Coeff:
    Copy
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i8(v: i8) -> Self;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i8(v: i8) -> Self {
        f64::from(v)
    }
}

impl Coeff for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i8(v: i8) -> Self {
        i64::from(v)
    }
}

/// An element of the level-`level` algebra; `coords[0]` is the real part.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<T = f64> {
    level: AlgebraLevel,
    coords: Vec<T>,
}

pub type AlgebraElement = Element<f64>;

impl<T: Coeff> Element<T> {
    pub fn from_coords(level: AlgebraLevel, coords: Vec<T>) -> Result<Self> {
        if coords.len() != level.dim() {
            return Err(LabError::Usage(format!(
                "{} elements have {} coordinates, got {}",
                level.name(),
                level.dim(),
                coords.len()
            )));
        }
        Ok(Element { level, coords })
    }

    pub fn zero(level: AlgebraLevel) -> Self {
        Element {
            level,
            coords: vec![T::zero(); level.dim()],
        }
    }

    pub fn one(level: AlgebraLevel) -> Self {
        Self::basis(level, 0)
    }

    /// Basis element: 0 is the identity, 1.. are the imaginary units.
    pub fn basis(level: AlgebraLevel, index: usize) -> Self {
        assert!(index < level.dim(), "basis index {index} out of range");
        let mut e = Self::zero(level);
        e.coords[index] = T::one();
        e
    }

    /// Pure imaginary element with the given imaginary coordinates.
    pub fn imaginary(level: AlgebraLevel, im: &[T]) -> Result<Self> {
        let mut coords = Vec::with_capacity(level.dim());
        coords.push(T::zero());
        coords.extend_from_slice(im);
        Self::from_coords(level, coords)
    }

    pub fn level(&self) -> AlgebraLevel {
        self.level
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn real(&self) -> T {
        self.coords[0]
    }

    pub fn imaginary_part(&self) -> &[T] {
        &self.coords[1..]
    }

    pub fn conjugate(&self) -> Self {
        Element {
            level: self.level,
            coords: conj_slice(&self.coords),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Element {
            level: self.level,
            coords: self.coords.iter().map(|&c| c * s).collect(),
        }
    }

    /// Σ coordsᵢ², equal to ⟨a, a⟩.
    pub fn norm_sq(&self) -> T {
        self.coords
            .iter()
            .fold(T::zero(), |acc, &c| acc + c * c)
    }
}

impl Element<f64> {
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn from_i64(e: &Element<i64>) -> Self {
        Element {
            level: e.level,
            coords: e.coords.iter().map(|&c| c as f64).collect(),
        }
    }

    /// Max-norm distance, used by tolerance checks.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_levels<T>(a: &Element<T>, b: &Element<T>) -> Result<()> {
    if a.level != b.level {
        return Err(LabError::LevelMismatch {
            left: a.level.0,
            right: b.level.0,
        });
    }
    Ok(())
}

fn conj_slice<T: Coeff>(a: &[T]) -> Vec<T> {
    a.iter()
        .enumerate()
        .map(|(i, &c)| if i == 0 { c } else { -c })
        .collect()
}

fn cd_mul<T: Coeff>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len();
    if n == 1 {
        return vec![a[0] * b[0]];
    }
    let h = n / 2;
    let (p, q) = a.split_at(h);
    let (r, s) = b.split_at(h);
    let pr = cd_mul(p, r);
    let sbar_q = cd_mul(&conj_slice(s), q);
    let sp = cd_mul(s, p);
    let q_rbar = cd_mul(q, &conj_slice(r));
    pr.iter()
        .zip(&sbar_q)
        .map(|(&x, &y)| x - y)
        .chain(sp.iter().zip(&q_rbar).map(|(&x, &y)| x + y))
        .collect()
}

/// Product by direct Cayley–Dickson recursion. Reference path for [`multiply`].
pub fn multiply_doubling<T: Coeff>(a: &Element<T>, b: &Element<T>) -> Result<Element<T>> {
    check_levels(a, b)?;
    Ok(Element {
        level: a.level,
        coords: cd_mul(&a.coords, &b.coords),
    })
}

/// eᵢeⱼ = sign[i][j] · e_{index[i][j]} over the full basis (including 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTable {
    dim: usize,
    index: Vec<usize>,
    sign: Vec<i8>,
}

impl BasisTable {
    fn from_doubling(level: AlgebraLevel) -> Self {
        let dim = level.dim();
        let mut index = vec![0; dim * dim];
        let mut sign = vec![0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let p = cd_mul(
                    Element::<i64>::basis(level, i).coords(),
                    Element::<i64>::basis(level, j).coords(),
                );
                let (k, &v) = p
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| v != 0)
                    .expect("basis product is a signed basis element");
                index[i * dim + j] = k;
                sign[i * dim + j] = v as i8;
            }
        }
        BasisTable { dim, index, sign }
    }

    pub fn for_level(level: AlgebraLevel) -> &'static BasisTable {
        static TABLES: [OnceLock<BasisTable>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        TABLES[usize::from(level.0) - 1].get_or_init(|| BasisTable::from_doubling(level))
    }

    /// (sign, k) with eᵢeⱼ = sign·e_k.
    pub fn product(&self, i: usize, j: usize) -> (i8, usize) {
        (self.sign[i * self.dim + j], self.index[i * self.dim + j])
    }
}

/// Bilinear product via the basis table.
pub fn multiply<T: Coeff>(a: &Element<T>, b: &Element<T>) -> Result<Element<T>> {
    check_levels(a, b)?;
    Ok(mul_table(a, b))
}

fn mul_table<T: Coeff>(a: &Element<T>, b: &Element<T>) -> Element<T> {
    let table = BasisTable::for_level(a.level);
    let dim = table.dim;
    let mut out = vec![T::zero(); dim];
    for (i, &ai) in a.coords.iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (j, &bj) in b.coords.iter().enumerate() {
            let (s, k) = table.product(i, j);
            let term = ai * bj;
            out[k] = if s > 0 { out[k] + term } else { out[k] - term };
        }
    }
    Element {
        level: a.level,
        coords: out,
    }
}

/// ⟨a, b⟩ = real part of ½(a·b̄ + b·ā), i.e. the Euclidean dot product.
pub fn inner(a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    check_levels(a, b)?;
    let ab = mul_table(a, &b.conjugate());
    let ba = mul_table(b, &a.conjugate());
    Ok(0.5 * (ab.coords[0] + ba.coords[0]))
}

pub fn norm(a: &AlgebraElement) -> f64 {
    a.norm()
}

/// [a, b, c] = (ab)c − a(bc).
pub fn associator<T: Coeff>(a: &Element<T>, b: &Element<T>, c: &Element<T>) -> Result<Element<T>> {
    check_levels(a, b)?;
    check_levels(b, c)?;
    let left = mul_table(&mul_table(a, b), c);
    let right = mul_table(a, &mul_table(b, c));
    Ok(&left - &right)
}

/// [a, b] = ab − ba.
pub fn commutator<T: Coeff>(a: &Element<T>, b: &Element<T>) -> Result<Element<T>> {
    check_levels(a, b)?;
    Ok(&mul_table(a, b) - &mul_table(b, a))
}

/// Matrix of z ↦ a·z.
pub fn left_matrix(a: &AlgebraElement) -> DMatrix<f64> {
    let table = BasisTable::for_level(a.level);
    let dim = table.dim;
    let mut m = DMatrix::zeros(dim, dim);
    for (i, &ai) in a.coords.iter().enumerate() {
        for col in 0..dim {
            let (s, k) = table.product(i, col);
            m[(k, col)] += f64::from(s) * ai;
        }
    }
    m
}

/// Matrix of z ↦ z·a.
pub fn right_matrix(a: &AlgebraElement) -> DMatrix<f64> {
    let table = BasisTable::for_level(a.level);
    let dim = table.dim;
    let mut m = DMatrix::zeros(dim, dim);
    for (j, &aj) in a.coords.iter().enumerate() {
        for col in 0..dim {
            let (s, k) = table.product(col, j);
            m[(k, col)] += f64::from(s) * aj;
        }
    }
    m
}

impl<T: Coeff> Add for &Element<T> {
    type Output = Element<T>;
    fn add(self, rhs: &Element<T>) -> Element<T> {
        assert_eq!(self.level, rhs.level, "level mismatch in addition");
        Element {
            level: self.level,
            coords: self.coords.iter().zip(&rhs.coords).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Coeff> Sub for &Element<T> {
    type Output = Element<T>;
    fn sub(self, rhs: &Element<T>) -> Element<T> {
        assert_eq!(self.level, rhs.level, "level mismatch in subtraction");
        Element {
            level: self.level,
            coords: self.coords.iter().zip(&rhs.coords).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Coeff> Neg for &Element<T> {
    type Output = Element<T>;
    fn neg(self) -> Element<T> {
        Element {
            level: self.level,
            coords: self.coords.iter().map(|&a| -a).collect(),
        }
    }
}

/// Panics on level mismatch; use [`multiply`] for a checked product.
impl<T: Coeff> Mul for &Element<T> {
    type Output = Element<T>;
    fn mul(self, rhs: &Element<T>) -> Element<T> {
        assert_eq!(self.level, rhs.level, "level mismatch in product");
        mul_table(self, rhs)
    }
}

// Positively oriented triples (i, j, k) with eᵢeⱼ = e_k, generated once from
// the doubling rule. `structure_constants_match_doubling` regenerates them.
const QUATERNION_TRIPLES: [[u8; 3]; 1] = [[1, 2, 3]];
const OCTONION_TRIPLES: [[u8; 3]; 7] = [
    [1, 2, 3],
    [1, 4, 5],
    [1, 7, 6],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 6, 5],
];

/// Totally antisymmetric a_ijk with eᵢeⱼ = −δᵢⱼ + a_ijk e_k, indices 1..dim−1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    level: AlgebraLevel,
    m: usize,
    a: Vec<i8>,
}

impl StructureConstants {
    fn empty(level: AlgebraLevel) -> Self {
        let m = level.imaginary_dim();
        StructureConstants {
            level,
            m,
            a: vec![0; m * m * m],
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        ((i - 1) * self.m + (j - 1)) * self.m + (k - 1)
    }

    /// The table frozen in source.
    pub fn frozen(level: AlgebraLevel) -> Self {
        let mut sc = Self::empty(level);
        let triples: &[[u8; 3]] = match level.0 {
            1 => &[],
            2 => &QUATERNION_TRIPLES,
            _ => &OCTONION_TRIPLES,
        };
        for t in triples {
            let [i, j, k] = t.map(usize::from);
            for (p, q, r, s) in [
                (i, j, k, 1),
                (j, k, i, 1),
                (k, i, j, 1),
                (j, i, k, -1),
                (i, k, j, -1),
                (k, j, i, -1),
            ] {
                let at = sc.idx(p, q, r);
                sc.a[at] = s;
            }
        }
        sc
    }

    /// Regenerates the table from the doubling recursion.
    pub fn from_doubling(level: AlgebraLevel) -> Self {
        let mut sc = Self::empty(level);
        let m = sc.m;
        for i in 1..=m {
            for j in 1..=m {
                if i == j {
                    continue;
                }
                let p = cd_mul(
                    Element::<i64>::basis(level, i).coords(),
                    Element::<i64>::basis(level, j).coords(),
                );
                for k in 1..=m {
                    let at = sc.idx(i, j, k);
                    sc.a[at] = p[k] as i8;
                }
            }
        }
        sc
    }

    pub fn level(&self) -> AlgebraLevel {
        self.level
    }

    /// a_ijk for imaginary indices in 1..=dim−1.
    pub fn get(&self, i: usize, j: usize, k: usize) -> i8 {
        self.a[self.idx(i, j, k)]
    }

    /// Every nonzero entry as [i, j, k, sign].
    pub fn triples(&self) -> Vec<[i64; 4]> {
        let mut out = Vec::new();
        for i in 1..=self.m {
            for j in 1..=self.m {
                for k in 1..=self.m {
                    let s = self.get(i, j, k);
                    if s != 0 {
                        out.push([i as i64, j as i64, k as i64, i64::from(s)]);
                    }
                }
            }
        }
        out
    }

    /// eᵢeⱼ rebuilt from the rule −δᵢⱼ + a_ijk e_k (i, j ≥ 1).
    pub fn basis_product(&self, i: usize, j: usize) -> Element<i64> {
        let mut e = Element::<i64>::zero(self.level);
        if i == j {
            e.coords[0] = -1;
        }
        for k in 1..=self.m {
            e.coords[k] = i64::from(self.get(i, j, k));
        }
        e
    }
}
