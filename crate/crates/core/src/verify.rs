//! Numerical verification of the identities behind the constructions.
//!
//! Each check reports the worst residual over its samples together with a
//! bound. `AtMost` checks are identities; `AtLeast` checks are negative
//! controls that must stay away from zero. All sampling is seeded from the
//! run seed, so a summary is reproducible bit for bit.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::acs::{
    nijenhuis_chart, nijenhuis_fd, random_tangent_triple, tau_chart, tau_from_nijenhuis,
    acs_chart_matrix, calabi_defect, tensor_to_ambient, validate_acs, AcsRef,
    OctonionicAcs, RotatedAcs,
};
use crate::algebra::{associator, AlgebraElement, AlgebraLevel, Element, StructureConstants};
use crate::config::{Model, RunConfig};
use crate::error::Result;
use crate::geometry::{lie_bracket_fd, Chart, FdParams, Matrix, SpherePoint, Vector};
use crate::hspace::{associativity_defect, moufang_defect, multiply_h, HMultiplication};
use crate::kirchhoff::{
    extend_j, frame_field, from_algebra, kirchhoff_frame, pole, sigma_inverse, sigma_tilde,
    to_algebra, classical_frame,
};
use crate::parallelism::{
    classical_bracket_closed_form, constancy_scan, structure_functions_chart,
    structure_functions_fd,
};
use crate::sampling::{chunk_seed, par_sample, random_gaussian, random_point_outside_caps, random_unit};
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Which identity of the construction this exercises.
    pub anchor: &'static str,
    /// Worst residual; the largest value for `AtMost`, the smallest for `AtLeast`.
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub version: &'static str,
    pub model: Model,
    pub seed: u64,
    pub samples: usize,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl VerificationSummary {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Suite<'a> {
    config: &'a RunConfig,
    checks: Vec<Check>,
    tag: u64,
}

impl Suite<'_> {
    /// Seed of the next check; independent of which checks ran before.
    fn seed(&mut self) -> u64 {
        self.tag += 1;
        chunk_seed(self.config.seed, 0x5eed_0000 + self.tag)
    }

    fn push(&mut self, name: &str, anchor: &'static str, bound: Bound, tolerance: f64, value: Result<f64>) {
        let tolerance = self
            .config
            .tolerance_overrides
            .get(name)
            .copied()
            .unwrap_or(tolerance);
        let (residual, error) = match value {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let pass = match bound {
            Bound::AtMost => residual <= tolerance,
            Bound::AtLeast => residual >= tolerance,
        };
        self.checks.push(Check {
            name: name.to_string(),
            anchor,
            residual,
            tolerance,
            bound,
            pass,
            error,
        });
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m: f64 = 0.0;
    for v in values {
        m = m.max(v?);
    }
    Ok(m)
}

fn min_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = f64::INFINITY;
    for v in values {
        m = m.min(v?);
    }
    Ok(m)
}

fn unit_element(rng: &mut ChaCha8Rng, level: AlgebraLevel) -> AlgebraElement {
    Element::from_coords(level, random_unit(rng, level.dim()).as_slice().to_vec()).expect("level dimension")
}

fn gaussian_element(rng: &mut ChaCha8Rng, level: AlgebraLevel) -> AlgebraElement {
    Element::from_coords(level, random_gaussian(rng, level.dim()).as_slice().to_vec()).expect("level dimension")
}

/// 2[a, b, c] computed in Im A for vectors of the imaginary layout.
fn twice_associator(level: AlgebraLevel, a: &Vector, b: &Vector, c: &Vector) -> Vector {
    let el = |v: &Vector| Element::imaginary(level, v.as_slice()).expect("imaginary dimension");
    let assoc = associator(&el(a), &el(b), &el(c)).expect("same level");
    Vector::from_column_slice(assoc.imaginary_part()) * 2.0
}

/// The chart at whose pole `x` is farthest from, between north and south.
fn far_chart(x: &Vector) -> Chart {
    if x[x.len() - 1] > 0.0 {
        Chart::south(x.len())
    } else {
        Chart::north(x.len())
    }
}

/// Unit point with |last coordinate| ≤ 0.3, inside both coordinate charts.
fn equatorial_point(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    let mut x = random_unit(rng, dim);
    let last = dim - 1;
    x[last] *= 0.3;
    x.normalize()
}

/// Runs the suite for the configured model.
pub fn verify(config: &RunConfig) -> Result<VerificationSummary> {
    config.validate()?;
    let model = config.model;
    let level = model.level();
    let rotation = match model {
        Model::Rotated => {
            let base: AcsRef = Arc::new(OctonionicAcs::new(level)?);
            Some(RotatedAcs::random(base, config.rotation_seed))
        }
        _ => None,
    };
    let acs: AcsRef = match &rotation {
        Some(r) => Arc::new(r.clone()),
        None => Arc::new(OctonionicAcs::new(level)?),
    };
    let mut s = Suite {
        config,
        checks: Vec::new(),
        tag: 0,
    };
    algebra_checks(&mut s, level);
    acs_checks(&mut s, model, &acs, rotation.as_ref().map(|r| r.rotation()));
    kirchhoff_checks(&mut s, model, &acs, rotation.as_ref().map(|r| r.rotation()));
    parallelism_checks(&mut s, model, &acs);
    hspace_checks(&mut s, model, &acs);
    let pass = s.checks.iter().all(|c| c.pass);
    Ok(VerificationSummary {
        version: VERSION,
        model,
        seed: config.seed,
        samples: config.samples,
        pass,
        checks: s.checks,
    })
}

fn algebra_checks(s: &mut Suite, level: AlgebraLevel) {
    let n = s.config.samples;
    let frozen = StructureConstants::frozen(level);
    let doubled = StructureConstants::from_doubling(level);
    let mismatches = frozen
        .triples()
        .iter()
        .filter(|t| doubled.get(t[0] as usize, t[1] as usize, t[2] as usize) as i64 != t[3])
        .count()
        + doubled
            .triples()
            .iter()
            .filter(|t| frozen.get(t[0] as usize, t[1] as usize, t[2] as usize) as i64 != t[3])
            .count();
    s.push(
        "structure-constants",
        "structure constants regenerated by doubling",
        Bound::AtMost,
        0.0,
        Ok(mismatches as f64),
    );

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let a = gaussian_element(rng, level);
        let b = gaussian_element(rng, level);
        Ok(((&a * &b).norm() - a.norm() * b.norm()).abs())
    });
    s.push("norm-multiplicative", "composition algebra norm", Bound::AtMost, 1e-12, max_of(v));

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let a = unit_element(rng, level);
        let b = unit_element(rng, level);
        let c = unit_element(rng, level);
        let left = &(&a * &b) * &(&c * &a);
        let right = &(&a * &(&b * &c)) * &a;
        let alt = &(&(&a * &a) * &b) - &(&a * &(&a * &b));
        Ok(left.max_abs_diff(&right).max(alt.norm()))
    });
    s.push("moufang-alternative", "Moufang identity and alternativity", Bound::AtMost, 1e-12, max_of(v));
}

fn acs_checks(s: &mut Suite, model: Model, acs: &AcsRef, g: Option<&Matrix>) {
    let n = s.config.samples;
    let params = s.config.params();
    let level = model.level();
    let seed = s.seed();
    let r = validate_acs(acs.as_ref(), n, seed);
    s.push("acs-square", "J² = −Id on tangent spaces", Bound::AtMost, 1e-10, Ok(r.square));
    s.push("acs-tangency", "J_y preserves T_y", Bound::AtMost, 1e-10, Ok(r.tangency));
    s.push("acs-hermitian", "J_y is orthogonal", Bound::AtMost, 1e-10, Ok(r.hermitian));

    let dim = acs.ambient_dim();
    let seed = s.seed();
    let samples: Vec<Result<(f64, f64)>> = par_sample(n, seed, |rng, _| {
        let (a, b, c) = random_tangent_triple(rng, dim);
        let fd = nijenhuis_fd(acs.as_ref(), &a, &b, &c, &params)?;
        let exact = match g {
            Some(g) => {
                let pull = |v: &Vector| g.tr_mul(v);
                g * twice_associator(level, &pull(a.as_vector()), &pull(&b.v), &pull(&c.v))
            }
            None => twice_associator(level, a.as_vector(), &b.v, &c.v),
        };
        Ok(((&fd.v - exact).amax(), fd.v.norm()))
    });
    let (errs, norms): (Vec<_>, Vec<_>) = samples
        .into_iter()
        .map(|r| match r {
            Ok((e, m)) => (Ok(e), Ok(m)),
            Err(e) => (Err(e), Ok(f64::NAN)),
        })
        .unzip();
    s.push(
        "nijenhuis-associator",
        "Nijenhuis tensor equals twice the associator",
        Bound::AtMost,
        1e-5,
        max_of(errs),
    );
    if model == Model::Quaternion {
        s.push("nijenhuis-vanishes", "quaternionic structure is integrable", Bound::AtMost, 1e-5, max_of(norms));
    } else {
        s.push("nijenhuis-nonzero", "octonionic structure is not integrable", Bound::AtLeast, 0.1, max_of(norms));
    }

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let (a, b, c) = random_tangent_triple(rng, dim);
        let chart = far_chart(a.as_vector());
        let u = chart.forward(a.as_vector());
        let t = nijenhuis_chart(acs.as_ref(), &chart, &u, &params)?;
        let pushed = tensor_to_ambient(&chart, a.as_vector(), &t, &b.v, &c.v);
        let fd = nijenhuis_fd(acs.as_ref(), &a, &b, &c, &params)?;
        Ok((pushed - fd.v).amax())
    });
    s.push("nijenhuis-chart", "chart formula agrees with brackets", Bound::AtMost, 1e-4, max_of(v));

    let seed = s.seed();
    let v = par_sample(n.min(50), seed, |rng, _| {
        let x = equatorial_point(rng, dim);
        let b = crate::sampling::random_tangent(rng, &SpherePoint::new(x.clone())?).v;
        let c = crate::sampling::random_tangent(rng, &SpherePoint::new(x.clone())?).v;
        let north = Chart::north(dim);
        let south = Chart::south(dim);
        let tn = nijenhuis_chart(acs.as_ref(), &north, &north.forward(&x), &params)?;
        let ts = nijenhuis_chart(acs.as_ref(), &south, &south.forward(&x), &params)?;
        Ok((tensor_to_ambient(&north, &x, &tn, &b, &c) - tensor_to_ambient(&south, &x, &ts, &b, &c)).amax())
    });
    s.push("chart-overlap", "tensor is chart independent", Bound::AtMost, 1e-4, max_of(v));

    let seed = s.seed();
    let pairs: Vec<Result<(f64, f64)>> = par_sample(n.min(50), seed, |rng, _| {
        let x = random_unit(rng, dim);
        let chart = far_chart(&x);
        let u = chart.forward(&x);
        let tau = tau_chart(acs.as_ref(), &chart, &u, &params)?;
        let nij = nijenhuis_chart(acs.as_ref(), &chart, &u, &params)?;
        let jm = acs_chart_matrix(acs.as_ref(), &chart, &u);
        Ok((tau.max_abs_diff(&tau_from_nijenhuis(&jm, &nij)), tau.max_abs()))
    });
    let (errs, sizes): (Vec<_>, Vec<_>) = pairs
        .into_iter()
        .map(|r| match r {
            Ok((e, m)) => (Ok(e), Ok(m)),
            Err(e) => (Err(e), Ok(f64::NAN)),
        })
        .unzip();
    s.push("tau-identity", "τ = −J·N", Bound::AtMost, 1e-4, max_of(errs));
    if model == Model::Quaternion {
        s.push("tau-vanishes", "τ vanishes for an integrable structure", Bound::AtMost, 1e-5, max_of(sizes));
    } else {
        s.push("tau-nonzero", "τ detects non-integrability", Bound::AtLeast, 0.1, max_of(sizes));
    }

    let seed = s.seed();
    let v = par_sample(n.min(20), seed, |rng, _| {
        let x = random_unit(rng, dim);
        let chart = far_chart(&x);
        let u = chart.forward(&x);
        let f = |w: &Vector| chart.inverse(w)[0];
        let d = calabi_defect(acs.as_ref(), f, &chart, &u, &params)?;
        Ok(d.amax())
    });
    if model == Model::Quaternion {
        s.push("calabi-vanishes", "dJdJ = JdJd for an integrable structure", Bound::AtMost, 1e-4, max_of(v));
    } else {
        s.push("calabi-defect", "dJdJ ≠ JdJd on S⁶", Bound::AtLeast, 1e-2, max_of(v));
    }
}

fn kirchhoff_checks(s: &mut Suite, model: Model, acs: &AcsRef, g: Option<&Matrix>) {
    let n = s.config.samples;
    let m = acs.ambient_dim();
    let dim = m + 1;
    let level = model.level();
    let j = acs.as_ref();

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let y = random_unit(rng, m);
        let jt = extend_j(j, &y)?;
        Ok((&jt.matrix * &jt.matrix + Matrix::identity(dim, dim)).amax())
    });
    s.push("extended-square", "J̃_y² = −Id on the extended space", Bound::AtMost, 1e-10, max_of(v));

    let at_e = sigma_tilde(j, &pole(dim)).map(|f| (f.sigma_tilde - Matrix::identity(dim, dim)).amax());
    s.push("sigma-at-identity", "σ̃ₑ = Id", Bound::AtMost, 1e-12, at_e);

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let x = random_unit(rng, dim);
        let f = sigma_tilde(j, &x)?;
        let id = Matrix::identity(dim, dim);
        let orth = (f.sigma_tilde.tr_mul(&f.sigma_tilde) - &id).amax();
        let inv = (&f.sigma_tilde * sigma_inverse(&f)? - &id).amax();
        let maps_e = (f.apply(&pole(dim)) - &x).amax();
        Ok(orth.max(inv).max(maps_e))
    });
    s.push(
        "sigma-orthogonal",
        "σ̃ₓ is orthogonal with σ̃ₓ(e) = x and inverse α − βJ̃_y",
        Bound::AtMost,
        1e-10,
        max_of(v),
    );

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let x = SpherePoint::new(random_unit(rng, dim))?;
        let f = sigma_tilde(j, x.as_vector())?;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let closed = frame_field(j, i, &x)?.v;
            let direct = f.sigma_tilde.column(i).into_owned();
            worst = worst.max((&closed - direct).amax()).max(closed.dot(x.as_vector()).abs());
        }
        Ok(worst)
    });
    s.push("frame-closed-form", "closed form of the frame fields", Bound::AtMost, 1e-12, max_of(v));

    if model.is_algebraic() {
        let seed = s.seed();
        let v = par_sample(n, seed, |rng, _| {
            let x = random_gaussian(rng, dim);
            let y = random_gaussian(rng, dim);
            let f = sigma_tilde(j, &x)?;
            let yx = from_algebra(&(&to_algebra(level, &y) * &to_algebra(level, &x)));
            Ok((f.apply(&y) - yx).amax())
        });
        s.push("sigma-right-multiplication", "σ̃ₓ(y) = y·x", Bound::AtMost, 1e-12, max_of(v));
    } else if let Some(g) = g {
        let mut big = Matrix::identity(dim, dim);
        big.view_mut((0, 0), (m, m)).copy_from(g);
        let base = OctonionicAcs::new(level).expect("octonion level");
        let seed = s.seed();
        let v = par_sample(n, seed, |rng, _| {
            let x = random_gaussian(rng, dim);
            let y = random_gaussian(rng, dim);
            let rotated = sigma_tilde(j, &x)?.apply(&y);
            let pulled = sigma_tilde(&base, &big.tr_mul(&x))?.apply(&big.tr_mul(&y));
            Ok((rotated - &big * pulled).amax())
        });
        s.push(
            "sigma-equivariance",
            "rotating J conjugates the frame",
            Bound::AtMost,
            1e-12,
            max_of(v),
        );
    }
}

fn parallelism_checks(s: &mut Suite, model: Model, acs: &AcsRef) {
    let n = s.config.samples;
    let params = s.config.params();
    let level = model.level();
    let dim = level.dim();

    let result = classical_frame(level).map(|frame| {
        let seed = s.seed();
        let v = par_sample(n.min(50), seed, |rng, _| {
            let x = SpherePoint::new(random_unit(rng, dim))?;
            let mut worst: f64 = 0.0;
            for a in 0..frame.len() {
                for b in (a + 1)..frame.len() {
                    let fd = lie_bracket_fd(frame[a].as_ref(), frame[b].as_ref(), &x, &params)?;
                    let exact = classical_bracket_closed_form(level, a, b, &x)?;
                    worst = worst.max((fd.v - exact.v).amax());
                }
            }
            Ok(worst)
        });
        max_of(v)
    });
    s.push(
        "classical-bracket",
        "closed-form bracket of left-multiplication fields",
        Bound::AtMost,
        1e-5,
        result.and_then(|r| r),
    );
    let conv = classical_frame(level).and_then(|frame| {
        let x = SpherePoint::new(Vector::from_fn(dim, |i, _| 0.3 + 0.1 * i as f64))?;
        let exact = classical_bracket_closed_form(level, 0, 1, &x)?.v;
        let err = |h: f64| -> Result<f64> {
            let p = FdParams { h, ..params };
            Ok((lie_bracket_fd(frame[0].as_ref(), frame[1].as_ref(), &x, &p)?.v - &exact).norm())
        };
        Ok((err(2e-2)? / err(1e-2)? - 4.0).abs())
    });
    s.push(
        "bracket-convergence",
        "central differences converge at second order",
        Bound::AtMost,
        0.5,
        conv,
    );

    let frame = kirchhoff_frame(acs);
    let seed = s.seed();
    let e = pole(dim);
    let v = par_sample(n.min(50), seed, |rng, _| {
        let p = random_point_outside_caps(rng, &e, 0.1);
        let chart = Chart::stereographic(&SpherePoint::new(-p.as_vector())?);
        let u = chart.forward(p.as_vector());
        let c = structure_functions_chart(&frame, &chart, &u, &params)?;
        let f = structure_functions_fd(&frame, &p, &params)?;
        Ok(c.t.max_abs_diff(&f.t))
    });
    s.push("structure-chart", "chart formula for structure functions", Bound::AtMost, 1e-4, max_of(v));

    let seed = s.seed();
    let scan = constancy_scan(&frame, n, seed, &params);
    let (dev, torsion) = match scan {
        Ok(r) => (Ok(r.max_dev), Ok(r.min_torsion_norm)),
        Err(e) => {
            let msg = e.to_string();
            (Err(e), Err(crate::LabError::Validation(msg)))
        }
    };
    if model == Model::Quaternion {
        s.push("structure-constant", "quaternionic frame has constant structure functions", Bound::AtMost, 1e-4, dev);
    } else {
        s.push("structure-varies", "octonionic frame has varying structure functions", Bound::AtLeast, 0.1, dev);
    }
    s.push("torsion-nonzero", "flat connection has nonzero torsion", Bound::AtLeast, 0.5, torsion);
}

fn hspace_checks(s: &mut Suite, model: Model, acs: &AcsRef) {
    let n = s.config.samples;
    let dim = acs.ambient_dim() + 1;
    let ambient = HMultiplication::ambient(acs.clone());
    let sphere = HMultiplication::sphere(acs.clone());

    let seed = s.seed();
    let v = par_sample(n, seed, |rng, _| {
        let x = random_gaussian(rng, dim);
        let y = random_gaussian(rng, dim);
        let p = multiply_h(&ambient, &x, &y)?;
        Ok((p.norm() - x.norm() * y.norm()).abs())
    });
    s.push("norm-product", "|m̂(x, y)| = |x||y|", Bound::AtMost, 1e-10, max_of(v));

    let seed = s.seed();
    let e = pole(dim);
    let v = par_sample(n, seed, |rng, _| {
        let x = random_unit(rng, dim);
        let l = (multiply_h(&sphere, &e, &x)? - &x).amax();
        let r = (multiply_h(&sphere, &x, &e)? - &x).amax();
        Ok(l.max(r))
    });
    s.push("two-sided-identity", "e is a two-sided identity", Bound::AtMost, 1e-12, max_of(v));

    let seed = s.seed();
    let moufang = moufang_defect(&sphere, 10 * n, seed).map(|r| r.max);
    s.push("moufang-defect", "induced multiplication is Moufang", Bound::AtMost, 1e-9, moufang);

    let seed = s.seed();
    let assoc = associativity_defect(&sphere, 10 * n, seed).map(|r| r.max);
    if model == Model::Quaternion {
        s.push("assoc-defect", "S³ multiplication is associative", Bound::AtMost, 1e-9, assoc);
    } else {
        s.push("assoc-defect", "S⁷ multiplication is not associative", Bound::AtLeast, 0.5, assoc);
    }
}

/// Worst `AtLeast` margin, for callers that sweep seeds.
pub fn weakest_control(summary: &VerificationSummary) -> f64 {
    min_of(
        summary
            .checks
            .iter()
            .filter(|c| c.bound == Bound::AtLeast)
            .map(|c| Ok(c.residual / c.tolerance)),
    )
    .unwrap_or(f64::INFINITY)
}
