//! Response expansions over normal field amplitudes, Poisson brackets,
//! ordered covariances, and the matrix commutator correspondence.
//!
//! A stationary state n of the oscillator responds linearly to the field
//! modes that connect it to neighboring states. The response is encoded as
//!
//! x_n(t) − x_nn = Σ_k x_nk a_nk e^{−i ω_kn t} + c.c.,   p_nk = −i m ω_kn x_nk,
//!
//! where a_nk are canonically normalized normal amplitudes (a mode of
//! frequency ω carries energy ħω|a|²). Poisson brackets are taken with
//! respect to (a, a*): {f, g} = Σ (∂f/∂a ∂g/∂a* − ∂g/∂a ∂f/∂a*).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::oscillator::OscillatorParams;
use crate::report::{CheckEntry, ToleranceKind};
use crate::response::{DampingConvention, susceptibility_at};
use crate::units::NaturalUnits;
use crate::zpf::FieldRealization;

/// One transition of a response expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    /// Index of the connected state k.
    pub target: usize,
    /// Transition frequency ω_kn (positive for upward transitions).
    pub omega: f64,
    /// Position response coefficient x_nk.
    pub x: Complex64,
    /// Momentum response coefficient p_nk = −i m ω_kn x_nk.
    pub p: Complex64,
}

/// Linear response expansion of a stationary state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseExpansion {
    pub state: usize,
    pub x_diag: f64,
    pub p_diag: f64,
    pub mass: f64,
    pub transitions: Vec<Transition>,
}

impl ResponseExpansion {
    /// Σ_k ω_kn |x_nk|², the sum-rule weight (equals ħ/2m when normalized).
    pub fn sum_rule(&self) -> f64 {
        self.transitions
            .iter()
            .map(|t| t.omega * t.x.norm_sqr())
            .sum()
    }

    /// All response coefficients scaled by λ (normalization probes).
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.transitions {
            t.x *= lambda;
            t.p *= lambda;
        }
        out
    }

    /// Coefficients rotated to time t: x_nk ↦ x_nk e^{−i ω_kn t}. Brackets and
    /// ordered covariances are invariant under this rotation.
    pub fn at_time(&self, t: f64) -> Self {
        let mut out = self.clone();
        for tr in &mut out.transitions {
            let rot = Complex64::from_polar(1.0, -tr.omega * t);
            tr.x *= rot;
            tr.p *= rot;
        }
        out
    }

    fn same_transition_set(&self, other: &Self) -> bool {
        self.transitions.len() == other.transitions.len()
            && self
                .transitions
                .iter()
                .zip(&other.transitions)
                .all(|(a, b)| a.target == b.target && a.omega == b.omega)
    }
}

/// Harmonic-oscillator response expansion for state n: transitions to n ± 1
/// at ω = ±ω₀ with |x_{n,n+1}|² = (n+1) ħ/2mω₀ and |x_{n,n−1}|² = n ħ/2mω₀.
/// Phases are fixed real non-negative; only |x_nk|² is observable.
pub fn build_ho_expansion(n: usize, units: &NaturalUnits, omega0: f64) -> ResponseExpansion {
    let scale = units.hbar / (2.0 * units.m * omega0);
    let mut transitions = Vec::with_capacity(2);
    if n > 0 {
        let x = (n as f64 * scale).sqrt();
        transitions.push(transition(n - 1, -omega0, x, units.m));
    }
    let x_up = ((n as f64 + 1.0) * scale).sqrt();
    transitions.push(transition(n + 1, omega0, x_up, units.m));
    ResponseExpansion {
        state: n,
        x_diag: 0.0,
        p_diag: 0.0,
        mass: units.m,
        transitions,
    }
}

fn transition(target: usize, omega: f64, x: f64, mass: f64) -> Transition {
    let x = Complex64::new(x, 0.0);
    Transition {
        target,
        omega,
        x,
        p: Complex64::new(0.0, -mass * omega) * x,
    }
}

/// Poisson bracket {x, p} with respect to the normal amplitudes, evaluated
/// analytically from two expansions. States n ≠ n′ involve disjoint sets of
/// independent amplitudes, so the bracket vanishes; for n = n′ it is
/// Σ_k (x_nk p*_nk − p_nk x*_nk) = 2 i m Σ_k ω_kn |x_nk|².
pub fn poisson_bracket_aa(x_of: &ResponseExpansion, p_of: &ResponseExpansion) -> Result<Complex64> {
    if x_of.state != p_of.state {
        return Ok(Complex64::ZERO);
    }
    if !x_of.same_transition_set(p_of) {
        return Err(CoreError::MismatchedExpansions(format!(
            "state {} expansions carry different transition sets",
            x_of.state
        )));
    }
    let mut acc = Complex64::ZERO;
    for (a, b) in x_of.transitions.iter().zip(&p_of.transitions) {
        acc += a.x * b.p.conj() - b.p * a.x.conj();
    }
    Ok(acc)
}

/// Ordered (one-sided) covariances of x and p for a stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderedCovariances {
    /// C(xp) = Σ_k x_nk p*_nk = i m Σ_k ω_kn |x_nk|².
    pub c_xp: Complex64,
    /// C(px) = Σ_k p_nk x*_nk = −C(xp).
    pub c_px: Complex64,
}

impl OrderedCovariances {
    pub fn difference(&self) -> Complex64 {
        self.c_xp - self.c_px
    }

    pub fn symmetrized(&self) -> Complex64 {
        self.c_xp + self.c_px
    }
}

pub fn ordered_covariances(expansion: &ResponseExpansion) -> OrderedCovariances {
    let mut c_xp = Complex64::ZERO;
    let mut c_px = Complex64::ZERO;
    for t in &expansion.transitions {
        c_xp += t.x * t.p.conj();
        c_px += t.p * t.x.conj();
    }
    OrderedCovariances { c_xp, c_px }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity_scaled(dim: usize, z: Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = z;
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    max = max.max(self[(i, j)].norm());
                }
            }
        }
        max
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..=i {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Row-major [re, im] pairs for serialization.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.data.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Position and momentum response matrices truncated at n_max.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    pub x: ComplexMatrix,
    pub p: ComplexMatrix,
    /// ω_kn antisymmetric frequency table, row-major (k, n).
    pub omega: Vec<f64>,
    pub dim: usize,
}

impl ResponseMatrix {
    /// Assemble matrices from per-state expansions for n = 0..=n_max.
    /// Transitions leading outside the truncation are dropped; this is what
    /// produces the −iħ·n_max commutator artifact at the top state.
    pub fn from_expansions(expansions: &[ResponseExpansion]) -> Result<Self> {
        let dim = expansions.len();
        if dim == 0 {
            return Err(CoreError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut x = ComplexMatrix::zeros(dim);
        let mut p = ComplexMatrix::zeros(dim);
        let mut omega = vec![0.0; dim * dim];
        for (n, exp) in expansions.iter().enumerate() {
            if exp.state != n {
                return Err(CoreError::MismatchedExpansions(format!(
                    "expansion at position {n} describes state {}",
                    exp.state
                )));
            }
            for t in &exp.transitions {
                if t.target >= dim {
                    continue;
                }
                x[(n, t.target)] = t.x;
                p[(n, t.target)] = t.p;
                omega[t.target * dim + n] = t.omega;
                omega[n * dim + t.target] = -t.omega;
            }
        }
        let tol = 1e-12;
        if !x.is_hermitian(tol) || !p.is_hermitian(tol) {
            return Err(CoreError::MismatchedExpansions(
                "assembled response matrices are not Hermitian".into(),
            ));
        }
        Ok(Self { x, p, omega, dim })
    }

    pub fn ho(n_max: usize, units: &NaturalUnits, omega0: f64) -> Self {
        let expansions: Vec<_> = (0..=n_max)
            .map(|n| build_ho_expansion(n, units, omega0))
            .collect();
        Self::from_expansions(&expansions).expect("oscillator expansions are consistent")
    }

    pub fn omega_kn(&self, k: usize, n: usize) -> f64 {
        self.omega[k * self.dim + n]
    }
}

/// X·P − P·X.
pub fn commutator_matrix(matrices: &ResponseMatrix) -> ComplexMatrix {
    matrices
        .x
        .mul(&matrices.p)
        .sub(&matrices.p.mul(&matrices.x))
}

/// X·P + P·X.
pub fn anticommutator_matrix(matrices: &ResponseMatrix) -> ComplexMatrix {
    matrices
        .x
        .mul(&matrices.p)
        .add(&matrices.p.mul(&matrices.x))
}

/// Cross-checks between the expansion algebra and the truncated matrices.
/// Failures come back as failed report entries, not errors. Interior states
/// exclude the top two, where truncation distorts the matrix products.
pub fn correspondence_check(
    expansions: &[ResponseExpansion],
    matrices: &ResponseMatrix,
) -> Vec<CheckEntry> {
    let mut entries = Vec::new();
    let commutator = commutator_matrix(matrices);
    let anticommutator = anticommutator_matrix(matrices);
    let interior = matrices.dim.saturating_sub(2);
    for exp in expansions.iter().filter(|e| e.state < interior) {
        let n = exp.state;
        let bracket = poisson_bracket_aa(exp, exp).expect("expansion is self-consistent");
        entries.push(CheckEntry::complex(
            format!("bracket_equals_commutator_n{n}"),
            bracket,
            commutator[(n, n)],
            1e-10,
            ToleranceKind::Absolute,
            "canonical bracket over normal amplitudes vs matrix commutator",
        ));
        let cov = ordered_covariances(exp);
        let anti_ref = anticommutator[(n, n)] - Complex64::new(2.0 * exp.x_diag * exp.p_diag, 0.0);
        entries.push(CheckEntry::complex(
            format!("symmetrized_covariance_equals_anticommutator_n{n}"),
            cov.symmetrized(),
            anti_ref,
            1e-10,
            ToleranceKind::Absolute,
            "ordered covariance sum vs matrix anticommutator",
        ));
    }
    entries
}

/// Linear map from normal amplitudes to the oscillator state (x, p) at a
/// fixed time.
pub trait ResponseMap {
    fn n_modes(&self) -> usize;
    fn evaluate(&self, amplitudes: &[Complex64], t: f64) -> (f64, f64);
}

/// The stationary spectral response of the oscillator to a sampled band,
/// expressed over canonically normalized amplitudes: per unit a_α the drive
/// contributes field amplitude E_α/√2, hence
/// x(a, t) = Σ_α 2 Re[(e/m) χ(ω_α) (E_α/√2) a_α e^{−i ω_α t}].
pub struct SpectralResponseMap {
    omegas: Vec<f64>,
    /// c_α = (e/m) χ(ω_α) E_α / √2
    coefficients: Vec<Complex64>,
    mass: f64,
    base: Vec<Complex64>,
}

impl SpectralResponseMap {
    pub fn new(
        params: &OscillatorParams,
        field: &FieldRealization,
        convention: DampingConvention,
    ) -> Result<Self> {
        params.validate()?;
        let omega_min = field
            .frequencies
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let omega_max = field.omega_max();
        if !(omega_min < params.omega0 && params.omega0 < omega_max) {
            return Err(CoreError::BandExcludesResonance {
                omega0: params.omega0,
                omega_min,
                omega_max,
            });
        }
        let coefficients = field
            .frequencies
            .iter()
            .zip(&field.amplitudes)
            .map(|(&w, &e_amp)| {
                susceptibility_at(w, params.omega0, params.tau, convention)
                    * (params.e / params.m)
                    * (e_amp * std::f64::consts::FRAC_1_SQRT_2)
            })
            .collect();
        Ok(Self {
            omegas: field.frequencies.clone(),
            coefficients,
            mass: params.m,
            base: field.normal_amplitudes(),
        })
    }

    /// The amplitudes realized by the sampled field (|a| = 1/√2).
    pub fn base_point(&self) -> &[Complex64] {
        &self.base
    }

    /// Analytic value of {x, p} for this map: 2 i m Σ_α ω_α |c_α|².
    pub fn analytic_bracket(&self) -> Complex64 {
        let s: f64 = self
            .omegas
            .iter()
            .zip(&self.coefficients)
            .map(|(&w, c)| w * c.norm_sqr())
            .sum();
        Complex64::new(0.0, 2.0 * self.mass * s)
    }

    /// Analytic single-mode contribution 2 i m ω_α |c_α|².
    pub fn analytic_mode_contribution(&self, alpha: usize) -> Complex64 {
        let c = self.coefficients[alpha];
        Complex64::new(0.0, 2.0 * self.mass * self.omegas[alpha] * c.norm_sqr())
    }

    /// Collapse the band response onto a single effective transition at ω₀,
    /// preserving the resonance-weighted total Σ ω_α |c_α|².
    pub fn induced_expansion(&self, omega0: f64) -> ResponseExpansion {
        let total: f64 = self
            .omegas
            .iter()
            .zip(&self.coefficients)
            .map(|(&w, c)| w * c.norm_sqr())
            .sum();
        let x = (total / omega0).sqrt();
        ResponseExpansion {
            state: 0,
            x_diag: 0.0,
            p_diag: 0.0,
            mass: self.mass,
            transitions: vec![transition(1, omega0, x, self.mass)],
        }
    }
}

impl ResponseMap for SpectralResponseMap {
    fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    fn evaluate(&self, amplitudes: &[Complex64], t: f64) -> (f64, f64) {
        assert_eq!(amplitudes.len(), self.omegas.len());
        let mut x = 0.0;
        let mut p = 0.0;
        for ((&w, c), a) in self.omegas.iter().zip(&self.coefficients).zip(amplitudes) {
            let z = c * a * Complex64::from_polar(1.0, -w * t);
            x += 2.0 * z.re;
            // p = m ẋ: each term picks up −iω
            p += 2.0 * (z * Complex64::new(0.0, -self.mass * w)).re;
        }
        (x, p)
    }
}

/// Finite-difference Poisson bracket {x, p} with respect to (Re a_α, Im a_α):
/// {x, p} = (i/2) Σ_α (∂x/∂u_α ∂p/∂v_α − ∂x/∂v_α ∂p/∂u_α).
///
/// The map must be linear in the amplitudes (checked by superposition);
/// central differences are then exact for any step.
pub fn poisson_bracket_numeric(
    map: &impl ResponseMap,
    base: &[Complex64],
    t: f64,
    step: f64,
) -> Result<Complex64> {
    let n = map.n_modes();
    assert_eq!(base.len(), n);

    // superposition check: f(0) = 0 and f(a + d) = f(a) + f(d)
    let zero = vec![Complex64::ZERO; n];
    let (x0, p0) = map.evaluate(&zero, t);
    let (xa, pa) = map.evaluate(base, t);
    let delta: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(0.01 * ((i % 7) as f64 + 1.0), -0.02 * ((i % 3) as f64)))
        .collect();
    let shifted: Vec<Complex64> = base.iter().zip(&delta).map(|(b, d)| b + d).collect();
    let (xd, pd) = map.evaluate(&delta, t);
    let (xs, ps) = map.evaluate(&shifted, t);
    let scale = xa.abs().max(pa.abs()).max(1e-300);
    let residual =
        ((xs - xa - xd - x0).abs() + (ps - pa - pd - p0).abs() + x0.abs() + p0.abs()) / scale;
    if residual > 1e-6 {
        return Err(CoreError::NonlinearResponse { residual });
    }

    let mut work = base.to_vec();
    let mut acc = Complex64::ZERO;
    for alpha in 0..n {
        let orig = work[alpha];
        let mut probe = |offset: Complex64| {
            work[alpha] = orig + offset;
            let out = map.evaluate(&work, t);
            work[alpha] = orig;
            out
        };
        let (x_up, p_up) = probe(Complex64::new(step, 0.0));
        let (x_dn, p_dn) = probe(Complex64::new(-step, 0.0));
        let (x_vp, p_vp) = probe(Complex64::new(0.0, step));
        let (x_vn, p_vn) = probe(Complex64::new(0.0, -step));
        let x_u = (x_up - x_dn) / (2.0 * step);
        let p_u = (p_up - p_dn) / (2.0 * step);
        let x_v = (x_vp - x_vn) / (2.0 * step);
        let p_v = (p_vp - p_vn) / (2.0 * step);
        acc += Complex64::new(0.0, 0.5) * (x_u * p_v - x_v * p_u);
    }
    Ok(acc)
}
