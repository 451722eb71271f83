//! Dense operators on truncated tensor-product Hilbert spaces.
//!
//! Subsystem order is fixed by the [`HilbertSpec`]: the magnon mode first,
//! then spins in index order. Composite indices are row-major over that
//! order (the first subsystem is the most significant digit), which is the
//! ordering of `kron(A, B)`. Qubit basis: index 0 is |g>, index 1 is |e>.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const NORM_TOL: f64 = 1e-10;
pub const PSD_FLOOR: f64 = -1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Boson { cutoff: usize },
    Qubit,
}

impl Subsystem {
    pub fn dim(&self) -> usize {
        match self {
            Subsystem::Boson { cutoff } => *cutoff,
            Subsystem::Qubit => 2,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::Boson { cutoff } => write!(f, "boson({cutoff})"),
            Subsystem::Qubit => write!(f, "qubit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    subsystems: Vec<Subsystem>,
}

impl HilbertSpec {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::SpecMismatch("empty subsystem list".into()));
        }
        for s in &subsystems {
            if let Subsystem::Boson { cutoff } = s {
                if *cutoff < 2 {
                    return Err(Error::Domain(format!("boson cutoff must be >= 2, got {cutoff}")));
                }
            }
        }
        Ok(Self { subsystems })
    }

    /// One magnon mode followed by `spins` qubits.
    pub fn magnon_spins(cutoff: usize, spins: usize) -> Result<Self> {
        let mut v = vec![Subsystem::Boson { cutoff }];
        v.extend(std::iter::repeat_n(Subsystem::Qubit, spins));
        Self::new(v)
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![Subsystem::Qubit; n])
    }

    pub fn boson(cutoff: usize) -> Result<Self> {
        Self::new(vec![Subsystem::Boson { cutoff }])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.subsystems.iter().map(Subsystem::dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(Subsystem::dim).collect()
    }

    pub fn tags(&self) -> Vec<String> {
        self.subsystems.iter().map(ToString::to_string).collect()
    }

    /// Index of the first boson, if any.
    pub fn boson_slot(&self) -> Option<usize> {
        self.subsystems
            .iter()
            .position(|s| matches!(s, Subsystem::Boson { .. }))
    }

    /// Slots of all qubits in order.
    pub fn qubit_slots(&self) -> Vec<usize> {
        self.subsystems
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Subsystem::Qubit))
            .map(|(i, _)| i)
            .collect()
    }

    /// Quantum numbers of a composite basis index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut out = vec![0; dims.len()];
        for (slot, d) in dims.iter().enumerate().rev() {
            out[slot] = index % d;
            index /= d;
        }
        out
    }

    pub fn encode(&self, levels: &[usize]) -> Result<usize> {
        let dims = self.dims();
        if levels.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: levels.len(),
            });
        }
        let mut index = 0;
        for (l, d) in levels.iter().zip(&dims) {
            if l >= d {
                return Err(Error::Domain(format!("level {l} out of range for dimension {d}")));
            }
            index = index * d + l;
        }
        Ok(index)
    }

    pub fn concat(&self, other: &HilbertSpec) -> HilbertSpec {
        let mut v = self.subsystems.clone();
        v.extend_from_slice(&other.subsystems);
        HilbertSpec { subsystems: v }
    }

    /// Same layout with every boson cutoff replaced.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<HilbertSpec> {
        Self::new(
            self.subsystems
                .iter()
                .map(|s| match s {
                    Subsystem::Boson { .. } => Subsystem::Boson { cutoff },
                    q => *q,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    spec: HilbertSpec,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn new(spec: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let d = spec.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { spec, matrix })
    }

    pub fn identity(spec: &HilbertSpec) -> Self {
        let d = spec.dim();
        Self {
            spec: spec.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(spec: &HilbertSpec) -> Self {
        let d = spec.dim();
        Self {
            spec: spec.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// max |A - A^dag| over entries.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            spec: self.spec.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    /// Eigenvalues in ascending order (hermitian operators only).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_hermitian(1e-9 * self.max_abs().max(1.0)) {
            return Err(Error::NonHermitian(self.hermiticity_error()));
        }
        let mut v: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        Ok(v)
    }

    pub fn dump(&self) -> OperatorDump {
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.matrix[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        OperatorDump {
            dimension: d,
            spec: self.spec.tags(),
            entries,
        }
    }
}

/// Row-major JSON form of an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub dimension: usize,
    pub spec: Vec<String>,
    pub entries: Vec<[f64; 2]>,
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn check_same(a: &HilbertSpec, b: &HilbertSpec) {
    assert_eq!(a, b, "operator arithmetic across different Hilbert spaces");
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        check_same(&self.spec, &rhs.spec);
        OperatorMatrix {
            spec: self.spec.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        check_same(&self.spec, &rhs.spec);
        OperatorMatrix {
            spec: self.spec.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        check_same(&self.spec, &rhs.spec);
        OperatorMatrix {
            spec: self.spec.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Mul<&OperatorMatrix> for f64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        rhs.scale(self)
    }
}

impl Mul<&OperatorMatrix> for C64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            spec: rhs.spec.clone(),
            matrix: rhs.matrix.map(|z| z * self),
        }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(-1.0)
    }
}

/// Truncated bosonic annihilation operator: sqrt(n) on the (n-1, n) superdiagonal.
pub fn annihilation(cutoff: usize) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::boson(cutoff)?;
    let mut m = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(spec, m)
}

pub fn number(cutoff: usize) -> Result<OperatorMatrix> {
    let a = annihilation(cutoff)?;
    Ok(&a.dagger() * &a)
}

#[derive(Debug, Clone)]
pub struct QubitOps {
    pub sigma_z: OperatorMatrix,
    pub sigma_plus: OperatorMatrix,
    pub sigma_minus: OperatorMatrix,
}

/// Pauli operators with sigma_z |e> = +|e> and sigma_- |e> = |g>.
pub fn qubit_ops() -> QubitOps {
    let spec = HilbertSpec::qubits(1).expect("single qubit spec");
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let sigma_z = CMatrix::from_row_slice(2, 2, &[-one, z, z, one]);
    let sigma_minus = CMatrix::from_row_slice(2, 2, &[z, one, z, z]);
    let sigma_plus = sigma_minus.adjoint();
    QubitOps {
        sigma_z: OperatorMatrix::new(spec.clone(), sigma_z).unwrap(),
        sigma_plus: OperatorMatrix::new(spec.clone(), sigma_plus).unwrap(),
        sigma_minus: OperatorMatrix::new(spec, sigma_minus).unwrap(),
    }
}

/// `op` acting on `slot`, identity elsewhere.
pub fn embed(op: &OperatorMatrix, slot: usize, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let sub = spec
        .subsystems()
        .get(slot)
        .ok_or_else(|| Error::SpecMismatch(format!("slot {slot} out of range for {} subsystems", spec.len())))?;
    if sub.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: sub.dim(),
            found: op.dim(),
        });
    }
    let dims = spec.dims();
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    let m = CMatrix::identity(left, left)
        .kronecker(op.matrix())
        .kronecker(&CMatrix::identity(right, right));
    OperatorMatrix::new(spec.clone(), m)
}

/// Tensor product a (x) b with concatenated subsystem lists.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix {
        spec: a.spec.concat(&b.spec),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { spec: HilbertSpec, vector: CVector },
    Mixed { spec: HilbertSpec, matrix: CMatrix },
}

impl QuantumState {
    pub fn pure(spec: HilbertSpec, vector: CVector) -> Result<Self> {
        if vector.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: vector.len(),
            });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state vector norm {norm} != 1")));
        }
        Ok(Self::Pure { spec, vector })
    }

    pub fn mixed(spec: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let d = spec.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        validate_density(&matrix)?;
        Ok(Self::Mixed { spec, matrix })
    }

    /// Product basis state from per-subsystem levels.
    pub fn basis(spec: &HilbertSpec, levels: &[usize]) -> Result<Self> {
        let idx = spec.encode(levels)?;
        let mut v = CVector::zeros(spec.dim());
        v[idx] = c(1.0, 0.0);
        Self::pure(spec.clone(), v)
    }

    pub fn spec(&self) -> &HilbertSpec {
        match self {
            Self::Pure { spec, .. } | Self::Mixed { spec, .. } => spec,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            Self::Pure { vector, .. } => vector * vector.adjoint(),
            Self::Mixed { matrix, .. } => matrix.clone(),
        }
    }

    pub fn into_mixed(self) -> Self {
        match self {
            Self::Pure { spec, vector } => Self::Mixed {
                matrix: &vector * vector.adjoint(),
                spec,
            },
            m => m,
        }
    }
}

pub(crate) fn validate_density(m: &CMatrix) -> Result<()> {
    let herm = max_abs(&(m - m.adjoint()));
    if herm > NORM_TOL {
        return Err(Error::InvalidState(format!("density matrix not hermitian ({herm:e})")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
        return Err(Error::InvalidState(format!("density matrix trace {tr} != 1")));
    }
    let min = min_eigenvalue(m);
    if min < PSD_FLOOR {
        return Err(Error::InvalidState(format!(
            "density matrix eigenvalue {min:e} below floor"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn expectation(state: &QuantumState, op: &OperatorMatrix) -> Result<C64> {
    if state.spec() != op.spec() {
        return Err(Error::SpecMismatch(format!(
            "state {:?} vs operator {:?}",
            state.spec().tags(),
            op.spec().tags()
        )));
    }
    Ok(match state {
        QuantumState::Pure { vector, .. } => vector.dotc(&(op.matrix() * vector)),
        QuantumState::Mixed { matrix, .. } => trace_product(matrix, op.matrix()),
    })
}

/// tr(A B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let d = a.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Partial trace keeping the listed slots (in the given order of the spec).
pub fn partial_trace(rho: &CMatrix, spec: &HilbertSpec, keep: &[usize]) -> Result<(HilbertSpec, CMatrix)> {
    let dims = spec.dims();
    if rho.nrows() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho.nrows(),
        });
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::SpecMismatch("partial trace slot out of range".into()));
    }
    let kept = HilbertSpec::new(keep.iter().map(|&k| spec.subsystems()[k]).collect())?;
    let dk = kept.dim();
    let mut out = CMatrix::zeros(dk, dk);
    let d = spec.dim();
    let levels: Vec<Vec<usize>> = (0..d).map(|i| spec.decode(i)).collect();
    let reduced_index = |lv: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + lv[k]);
    for i in 0..d {
        for j in 0..d {
            let (li, lj) = (&levels[i], &levels[j]);
            let traced_equal = (0..dims.len()).filter(|s| !keep.contains(s)).all(|s| li[s] == lj[s]);
            if traced_equal {
                out[(reduced_index(li), reduced_index(lj))] += rho[(i, j)];
            }
        }
    }
    Ok((kept, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn annihilation_small() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.matrix()[(0, 1)], c(1.0, 0.0));
        assert_eq!(a.matrix()[(0, 0)], c(0.0, 0.0));
        assert_eq!(a.matrix()[(1, 0)], c(0.0, 0.0));
        assert_eq!(a.matrix()[(1, 1)], c(0.0, 0.0));
        let a4 = annihilation(4).unwrap();
        assert!((a4.matrix()[(2, 3)].re - 3f64.sqrt()).abs() < 1e-15);
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn commutator_identity_below_cutoff() {
        let n = 8;
        let a = annihilation(n).unwrap();
        let comm = a.commutator(&a.dagger());
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((comm.matrix()[(i, j)] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        // truncation artefact lives in the last level only
        assert!((comm.matrix()[(n - 1, n - 1)].re + (n as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn pauli_conventions() {
        let q = qubit_ops();
        let proj_e = &q.sigma_plus * &q.sigma_minus;
        assert_eq!(proj_e.matrix()[(1, 1)], c(1.0, 0.0));
        assert_eq!(proj_e.matrix()[(0, 0)], c(0.0, 0.0));
        let comm = q.sigma_plus.commutator(&q.sigma_minus);
        assert!((&comm - &q.sigma_z).max_abs() < 1e-15);
        assert_eq!(q.sigma_z.eigenvalues().unwrap(), vec![-1.0, 1.0]);
        // sigma_- |e> = |g>
        let e = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let g = q.sigma_minus.matrix() * e;
        assert_eq!(g[0], c(1.0, 0.0));
    }

    #[test]
    fn embedded_spins_commute() {
        let spec = HilbertSpec::magnon_spins(3, 2).unwrap();
        let q = qubit_ops();
        let z1 = embed(&q.sigma_z, 1, &spec).unwrap();
        let z2 = embed(&q.sigma_z, 2, &spec).unwrap();
        assert_eq!(z1.commutator(&z2).max_abs(), 0.0);
        let id = embed(&OperatorMatrix::identity(&HilbertSpec::qubits(1).unwrap()), 2, &spec).unwrap();
        assert_eq!(id, OperatorMatrix::identity(&spec));
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let spec = HilbertSpec::magnon_spins(3, 1).unwrap();
        let q = qubit_ops();
        assert!(matches!(
            embed(&q.sigma_z, 0, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(embed(&q.sigma_z, 5, &spec).is_err());
    }

    #[test]
    fn embed_trace_identity() {
        let spec = HilbertSpec::magnon_spins(4, 2).unwrap();
        let n = number(4).unwrap();
        let e = embed(&n, 0, &spec).unwrap();
        // tr(n) = 0 + 1 + 2 + 3, complement dimension 4
        assert!((e.trace() - c(6.0 * 4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn embed_matches_kron_ordering() {
        let spec = HilbertSpec::magnon_spins(3, 1).unwrap();
        let a = embed(&annihilation(3).unwrap(), 0, &spec).unwrap();
        // a |n=1, e> = |0, e>
        let from = spec.encode(&[1, 1]).unwrap();
        let to = spec.encode(&[0, 1]).unwrap();
        assert_eq!(a.matrix()[(to, from)], c(1.0, 0.0));
        assert_eq!(spec.decode(from), vec![1, 1]);
    }

    #[test]
    fn fock_expectations() {
        let spec = HilbertSpec::boson(5).unwrap();
        let n = number(5).unwrap();
        for k in 0..5 {
            let s = QuantumState::basis(&spec, &[k]).unwrap();
            let v = expectation(&s, &n).unwrap();
            assert!((v.re - k as f64).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
        let mut rho = CMatrix::zeros(5, 5);
        rho[(0, 0)] = c(0.5, 0.0);
        rho[(1, 1)] = c(0.5, 0.0);
        let mixed = QuantumState::mixed(spec, rho).unwrap();
        assert!((expectation(&mixed, &n).unwrap().re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_states_rejected() {
        let spec = HilbertSpec::qubits(1).unwrap();
        assert!(QuantumState::pure(spec.clone(), CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 0)] = c(1.5, 0.0);
        rho[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(QuantumState::mixed(spec, rho), Err(Error::InvalidState(_))));
    }

    #[test]
    fn partial_trace_of_product() {
        let spec = HilbertSpec::magnon_spins(3, 2).unwrap();
        let s = QuantumState::basis(&spec, &[2, 1, 0]).unwrap();
        let (kept, r) = partial_trace(&s.density_matrix(), &spec, &[1, 2]).unwrap();
        assert_eq!(kept.dim(), 4);
        assert!((r[(2, 2)].re - 1.0).abs() < 1e-15);
        assert!((r.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dump_is_row_major() {
        let a = annihilation(3).unwrap();
        let d = a.dump();
        assert_eq!(d.dimension, 3);
        assert_eq!(d.spec, vec!["boson(3)".to_string()]);
        assert_eq!(d.entries[1], [1.0, 0.0]);
        assert_eq!(d.entries[3], [0.0, 0.0]);
        let json = serde_json::to_string(&d).unwrap();
        let back: OperatorDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn embed_preserves_hermiticity_and_norm(
            re in proptest::collection::vec(-1.0f64..1.0, 9),
            im in proptest::collection::vec(-1.0f64..1.0, 9),
            slot in 0usize..3,
        ) {
            let spec = HilbertSpec::new(vec![Subsystem::Qubit, Subsystem::Boson { cutoff: 3 }, Subsystem::Qubit]).unwrap();
            let d = spec.subsystems()[slot].dim();
            let mut m = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = c(re[i * 3 + j], im[i * 3 + j]);
                }
            }
            let h = (&m + m.adjoint()).scale(0.5);
            let local = OperatorMatrix::new(HilbertSpec::new(vec![spec.subsystems()[slot]]).unwrap(), h).unwrap();
            let big = embed(&local, slot, &spec).unwrap();
            prop_assert!(big.is_hermitian(1e-12));
            let spectral = |o: &OperatorMatrix| o.eigenvalues().unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            prop_assert!((spectral(&big) - spectral(&local)).abs() < 1e-10);
        }
    }
}
