//! Density operators and pure vectors over labelled registers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, checked_dim_product, dim_cap, eig_hermitian, svd, vec_norm, ComplexMatrix, C64, ZERO,
};
use crate::random::{random_density, random_unit_vector, seeded_rng};

/// Tolerance on trace, PSD-ness and Hermiticity of a density operator.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factors. The first register is the most significant index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(regs: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let registers: Vec<Register> = regs
            .into_iter()
            .map(|(l, d)| Register {
                label: l.into(),
                dim: d,
            })
            .collect();
        for (i, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(Error::Dimension(format!(
                    "register {} has dimension 0",
                    r.label
                )));
            }
            if registers[..i].iter().any(|o| o.label == r.label) {
                return Err(Error::Dimension(format!(
                    "duplicate register label {}",
                    r.label
                )));
            }
        }
        Ok(RegisterLayout { registers })
    }

    /// Single register.
    pub fn single(label: &str, dim: usize) -> Self {
        RegisterLayout {
            registers: vec![Register {
                label: label.to_string(),
                dim,
            }],
        }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::Dimension(format!("no register labelled {label}")))
    }

    pub fn indices_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.registers[self.index_of(label)?].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.registers.iter().any(|r| r.label == label)
    }

    /// Layout made of the listed registers in the listed order.
    pub fn select(&self, labels: &[&str]) -> Result<RegisterLayout> {
        let idx = self.indices_of(labels)?;
        RegisterLayout::new(idx.iter().map(|&i| {
            let r = &self.registers[i];
            (r.label.clone(), r.dim)
        }))
    }

    /// Concatenation; labels must stay unique.
    pub fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        RegisterLayout::new(
            self.registers
                .iter()
                .chain(&other.registers)
                .map(|r| (r.label.clone(), r.dim)),
        )
    }

    /// Labels present here but not in `exclude`, in layout order.
    pub fn complement(&self, exclude: &[&str]) -> Vec<&str> {
        self.labels()
            .into_iter()
            .filter(|l| !exclude.contains(l))
            .collect()
    }
}

/// Density operator with its register layout.
#[derive(Clone, Debug)]
pub struct QuantumState {
    layout: RegisterLayout,
    matrix: ComplexMatrix,
    pure: bool,
}

impl QuantumState {
    /// Validate and wrap a density operator. Tiny anti-Hermitian parts are
    /// removed.
    pub fn new(layout: RegisterLayout, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "layout {:?} has dimension {} but the matrix is {}x{}",
                layout.labels(),
                layout.total_dim(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermitian_defect();
        if defect > STATE_TOL {
            return Err(Error::Input(format!(
                "density operator is not Hermitian (defect {defect:e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace_re();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::Input(format!(
                "density operator has trace {tr}, expected 1"
            )));
        }
        let lmin = eig_hermitian(&matrix)?.min();
        if lmin < -STATE_TOL {
            return Err(Error::Input(format!(
                "density operator is not positive semidefinite (minimum eigenvalue {lmin:e})"
            )));
        }
        Ok(Self::from_parts(layout, matrix))
    }

    /// Wrap without validation; used internally for operators known to be states.
    pub(crate) fn from_parts(layout: RegisterLayout, matrix: ComplexMatrix) -> Self {
        let purity = matrix.trace_product(&matrix).re;
        QuantumState {
            layout,
            matrix,
            pure: purity >= 1.0 - 1e-9,
        }
    }

    /// One-register state.
    pub fn single(label: &str, matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(RegisterLayout::single(label, d), matrix)
    }

    /// I/d on one register.
    pub fn maximally_mixed(label: &str, dim: usize) -> Self {
        Self::from_parts(
            RegisterLayout::single(label, dim),
            ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        )
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// Reduced state on the listed registers, in the listed order.
    pub fn marginal(&self, labels: &[&str]) -> Result<QuantumState> {
        let keep = self.layout.indices_of(labels)?;
        let m = linalg::partial_trace(&self.matrix, &self.layout.dims(), &keep)?;
        Ok(Self::from_parts(self.layout.select(labels)?, m))
    }

    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let layout = self.layout.concat(&other.layout)?;
        let m = linalg::tensor(&self.matrix, &other.matrix)?;
        Ok(Self::from_parts(layout, m))
    }

    /// Same state, registers reordered to `order` (all labels, each once).
    pub fn permute_registers(&self, order: &[&str]) -> Result<QuantumState> {
        let perm = self.layout.indices_of(order)?;
        let m = linalg::permute_matrix(&self.matrix, &self.layout.dims(), &perm)?;
        Ok(Self::from_parts(self.layout.select(order)?, m))
    }

    /// Rename registers in place of order.
    pub fn relabel(&self, labels: &[&str]) -> Result<QuantumState> {
        if labels.len() != self.layout.len() {
            return Err(Error::Dimension(
                "relabel needs one label per register".into(),
            ));
        }
        let layout = RegisterLayout::new(
            labels
                .iter()
                .zip(self.layout.registers())
                .map(|(l, r)| (l.to_string(), r.dim)),
        )?;
        Ok(Self::from_parts(layout, self.matrix.clone()))
    }
}

/// Unit vector with its register layout.
#[derive(Clone, Debug)]
pub struct PureVector {
    layout: RegisterLayout,
    amplitudes: Vec<C64>,
}

impl PureVector {
    pub fn new(layout: RegisterLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "layout {:?} has dimension {} but {} amplitudes were given",
                layout.labels(),
                layout.total_dim(),
                amplitudes.len()
            )));
        }
        let n = vec_norm(&amplitudes);
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::Input(format!(
                "state vector has norm {n}, expected 1"
            )));
        }
        Ok(PureVector { layout, amplitudes })
    }

    /// Wrap without the norm check. Intermediate protocol vectors may be
    /// deliberately unnormalized projections.
    pub fn from_parts(layout: RegisterLayout, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(layout.total_dim(), amplitudes.len());
        PureVector { layout, amplitudes }
    }

    /// Computational basis vector |index⟩ on one register.
    pub fn basis(label: &str, dim: usize, index: usize) -> Self {
        let mut a = vec![ZERO; dim];
        a[index] = C64::new(1.0, 0.0);
        PureVector::from_parts(RegisterLayout::single(label, dim), a)
    }

    /// (|00⟩ + … + |d−1,d−1⟩)/√d on two registers.
    pub fn maximally_entangled(first: &str, second: &str, dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        let mut a = vec![ZERO; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = C64::new(s, 0.0);
        }
        PureVector::from_parts(
            RegisterLayout {
                registers: vec![
                    Register {
                        label: first.into(),
                        dim,
                    },
                    Register {
                        label: second.into(),
                        dim,
                    },
                ],
            },
            a,
        )
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }

    pub fn density(&self) -> QuantumState {
        QuantumState::from_parts(self.layout.clone(), ComplexMatrix::outer(&self.amplitudes))
    }

    /// Reduced state on the listed registers without forming |ψ⟩⟨ψ|.
    pub fn marginal(&self, labels: &[&str]) -> Result<QuantumState> {
        let keep = self.layout.indices_of(labels)?;
        let m = linalg::reduced_from_vector(&self.amplitudes, &self.layout.dims(), &keep)?;
        Ok(QuantumState::from_parts(self.layout.select(labels)?, m))
    }

    pub fn tensor(&self, other: &PureVector) -> Result<PureVector> {
        let layout = self.layout.concat(&other.layout)?;
        checked_dim_product(&[self.dim(), other.dim()], dim_cap(), "state vector")?;
        Ok(PureVector::from_parts(
            layout,
            linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        ))
    }

    pub fn permute_registers(&self, order: &[&str]) -> Result<PureVector> {
        let perm = self.layout.indices_of(order)?;
        let a = linalg::permute_vector(&self.amplitudes, &self.layout.dims(), &perm)?;
        Ok(PureVector::from_parts(self.layout.select(order)?, a))
    }

    pub fn relabel(&self, labels: &[&str]) -> Result<PureVector> {
        if labels.len() != self.layout.len() {
            return Err(Error::Dimension(
                "relabel needs one label per register".into(),
            ));
        }
        let layout = RegisterLayout::new(
            labels
                .iter()
                .zip(self.layout.registers())
                .map(|(l, r)| (l.to_string(), r.dim)),
        )?;
        Ok(PureVector::from_parts(layout, self.amplitudes.clone()))
    }

    /// Apply `op` (d_out × d_in) to the listed registers jointly. The listed
    /// registers are replaced by `outputs`, which take the position of the
    /// first listed register.
    pub fn apply(
        &self,
        targets: &[&str],
        op: &ComplexMatrix,
        outputs: &[(&str, usize)],
    ) -> Result<PureVector> {
        let tidx = self.layout.indices_of(targets)?;
        let din: usize = tidx.iter().map(|&i| self.layout.registers[i].dim).product();
        let dout: usize = outputs.iter().map(|o| o.1).product();
        if op.cols() != din || op.rows() != dout {
            return Err(Error::Dimension(format!(
                "operator is {}x{} but acts {din} -> {dout}",
                op.rows(),
                op.cols()
            )));
        }
        let rest = self.layout.complement(targets);
        let mut order = rest.clone();
        order.extend_from_slice(targets);
        let moved = self.permute_registers(&order)?;
        let r: usize = rest
            .iter()
            .map(|l| self.layout.dim_of(l).unwrap())
            .product();
        let total = checked_dim_product(&[r, dout], dim_cap(), "state vector")?;
        let opt = op.transpose();
        let mut out = vec![ZERO; total];
        linalg::gemm_into(&moved.amplitudes, r, din, opt.data(), dout, &mut out);

        let first = tidx.iter().copied().min().unwrap_or(0);
        let first_label = &self.layout.registers[first].label;
        let mut new_regs: Vec<(String, usize)> = Vec::new();
        let mut final_order: Vec<String> = Vec::new();
        for reg in &self.layout.registers {
            if reg.label == *first_label {
                final_order.extend(outputs.iter().map(|(l, _)| l.to_string()));
            }
            if !targets.contains(&reg.label.as_str()) {
                final_order.push(reg.label.clone());
            }
        }
        for l in &rest {
            new_regs.push((l.to_string(), self.layout.dim_of(l)?));
        }
        for (l, d) in outputs {
            new_regs.push((l.to_string(), *d));
        }
        let staged = PureVector::from_parts(RegisterLayout::new(new_regs)?, out);
        let order: Vec<&str> = final_order.iter().map(|s| s.as_str()).collect();
        staged.permute_registers(&order)
    }

    /// Apply a basis permutation given as a map on register digit tuples.
    /// `f` receives the digits (layout order) and rewrites them in place;
    /// it must be a bijection.
    pub fn map_basis(&self, mut f: impl FnMut(&mut [usize])) -> PureVector {
        let dims = self.layout.dims();
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut digits = vec![0usize; n];
        let mut work = vec![0usize; n];
        for &amp in &self.amplitudes {
            if amp.re != 0.0 || amp.im != 0.0 {
                work.copy_from_slice(&digits);
                f(&mut work);
                let target: usize = work.iter().zip(&strides).map(|(d, s)| d * s).sum();
                out[target] += amp;
            }
            // increment the mixed-radix counter
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        PureVector::from_parts(self.layout.clone(), out)
    }
}

/// Swap pairs of equal-dimension registers, with the pairs chosen by the
/// basis value of `control`. Linear extension covers superpositions over
/// control values.
pub fn controlled_swap(
    psi: &PureVector,
    control: &str,
    pairs_for: impl Fn(usize) -> Vec<(String, String)>,
) -> Result<PureVector> {
    let layout = psi.layout();
    let c = layout.index_of(control)?;
    let dc = layout.registers()[c].dim;
    let mut table: Vec<Vec<(usize, usize)>> = Vec::with_capacity(dc);
    for v in 0..dc {
        let mut pairs = Vec::new();
        for (a, b) in pairs_for(v) {
            let ia = layout.index_of(&a)?;
            let ib = layout.index_of(&b)?;
            if ia == c || ib == c {
                return Err(Error::Dimension(
                    "controlled swap may not target its control".into(),
                ));
            }
            if layout.registers()[ia].dim != layout.registers()[ib].dim {
                return Err(Error::Dimension(format!(
                    "cannot swap {a} and {b}: dimensions differ"
                )));
            }
            pairs.push((ia, ib));
        }
        table.push(pairs);
    }
    Ok(psi.map_basis(|d| {
        for &(a, b) in &table[d[c]] {
            d.swap(a, b);
        }
    }))
}

/// Distribution used by [`random_state`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    PureHaar,
    MixedGinibre,
}

pub fn random_state(layout: RegisterLayout, kind: RandomKind, seed: u64) -> QuantumState {
    let mut rng = seeded_rng(seed);
    let d = layout.total_dim();
    let m = match kind {
        RandomKind::PureHaar => ComplexMatrix::outer(&random_unit_vector(&mut rng, d)),
        RandomKind::MixedGinibre => random_density(&mut rng, d),
    };
    QuantumState::from_parts(layout, m)
}

pub fn random_pure(layout: RegisterLayout, seed: u64) -> PureVector {
    let mut rng = seeded_rng(seed);
    let v = random_unit_vector(&mut rng, layout.total_dim());
    PureVector::from_parts(layout, v)
}

/// Canonical purification Σ √λ_i |v_i⟩|i⟩ over the support of ρ, with the
/// ancilla (dimension rank ρ) appended last. Eigenvalues are taken in
/// descending order.
pub fn purify_with_label(rho: &QuantumState, ancilla: &str) -> Result<PureVector> {
    let e = eig_hermitian(rho.matrix())?;
    let cut = linalg::support_cutoff(e.max());
    let support: Vec<usize> = (0..e.dim())
        .rev()
        .filter(|&i| e.eigenvalues[i] > cut)
        .collect();
    let r = support.len().max(1);
    let d = rho.dim();
    let mut amps = vec![ZERO; d * r];
    for (k, &i) in support.iter().enumerate() {
        let w = e.eigenvalues[i].sqrt();
        let v = e.vector(i);
        for x in 0..d {
            amps[x * r + k] = v[x] * w;
        }
    }
    let layout = rho.layout().concat(&RegisterLayout::single(ancilla, r))?;
    Ok(PureVector::from_parts(layout, amps))
}

/// [`purify_with_label`] with the ancilla labelled "purifier".
pub fn purify(rho: &QuantumState) -> Result<PureVector> {
    purify_with_label(rho, "purifier")
}

/// Isometry V maximizing Re Tr(V·M) for M of size d_y × d_z (d_z ≥ d_y),
/// returned as a d_z × d_y matrix along with the attained value Σ s_i.
pub fn maximizing_isometry(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let (dy, dz) = (m.rows(), m.cols());
    if dz < dy {
        return Err(Error::Dimension(format!(
            "target dimension {dz} is smaller than source dimension {dy}; pad the target"
        )));
    }
    let s = svd(m)?;
    // M = U S W†, V = W_k U† attains Tr(S).
    let mut v = ComplexMatrix::zeros(dz, dy);
    for k in 0..dy {
        let wk = s.v.column(k);
        let uk = s.u.column(k);
        for z in 0..dz {
            for y in 0..dy {
                v[(z, y)] += wk[z] * uk[y].conj();
            }
        }
    }
    Ok((v, s.s.iter().sum()))
}

/// Output of [`uhlmann_isometry`].
#[derive(Clone, Debug)]
pub struct UhlmannIsometry {
    /// Maps the remaining registers of `a` into those of `b`.
    pub isometry: ComplexMatrix,
    /// |⟨b|(I⊗V)|a⟩|, equal to the fidelity of the shared marginals.
    pub overlap: f64,
}

/// Uhlmann isometry between two purifications sharing the registers `shared`.
/// Both vectors are reordered so the shared registers come first; the
/// remaining registers keep their layout order.
pub fn uhlmann_isometry(
    a: &PureVector,
    b: &PureVector,
    shared: &[&str],
) -> Result<UhlmannIsometry> {
    let xa = a.layout().select(shared)?;
    let xb = b.layout().select(shared)?;
    if xa != xb {
        return Err(Error::Dimension(
            "shared registers have different dimensions in the two vectors".into(),
        ));
    }
    let ya = a.layout().complement(shared);
    let zb = b.layout().complement(shared);
    let mut oa: Vec<&str> = shared.to_vec();
    oa.extend(&ya);
    let mut ob: Vec<&str> = shared.to_vec();
    ob.extend(&zb);
    let av = a.permute_registers(&oa)?;
    let bv = b.permute_registers(&ob)?;
    let dx = xa.total_dim();
    let dy = a.dim() / dx;
    let dz = b.dim() / dx;
    // M_{y,z} = Σ_x a_{x,y} conj(b_{x,z}), so ⟨b|(I⊗V)|a⟩ = Tr(V·M).
    let mut m = ComplexMatrix::zeros(dy, dz);
    for x in 0..dx {
        let ar = &av.amplitudes()[x * dy..(x + 1) * dy];
        let br = &bv.amplitudes()[x * dz..(x + 1) * dz];
        for (y, ay) in ar.iter().enumerate() {
            if ay.re == 0.0 && ay.im == 0.0 {
                continue;
            }
            for (z, bz) in br.iter().enumerate() {
                m[(y, z)] += ay * bz.conj();
            }
        }
    }
    let (v, overlap) = maximizing_isometry(&m)?;
    Ok(UhlmannIsometry {
        isometry: v,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::fidelity;
    use crate::linalg::inner;
    use crate::random::{random_density_rank, seeded_rng};

    fn layout(regs: &[(&str, usize)]) -> RegisterLayout {
        RegisterLayout::new(regs.iter().map(|(l, d)| (*l, *d))).unwrap()
    }

    #[test]
    fn random_states_are_normalized_psd_and_deterministic() {
        for seed in 0..20 {
            let l = layout(&[("A", 2), ("B", 3)]);
            for kind in [RandomKind::PureHaar, RandomKind::MixedGinibre] {
                let s = random_state(l.clone(), kind, seed);
                assert!((s.matrix().trace_re() - 1.0).abs() < 1e-10);
                assert!(eig_hermitian(s.matrix()).unwrap().min() >= -1e-12);
                let again = random_state(l.clone(), kind, seed);
                assert_eq!(s.matrix(), again.matrix());
            }
        }
        assert!(random_state(layout(&[("A", 3)]), RandomKind::PureHaar, 42).is_pure());
    }

    #[test]
    fn purify_pure_input_is_trivial() {
        let v = random_pure(layout(&[("A", 3)]), 5);
        let p = purify(&v.density()).unwrap();
        assert_eq!(p.layout().dim_of("purifier").unwrap(), 1);
        let ov = inner(v.amplitudes(), p.amplitudes()).norm();
        assert!((ov - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let p = purify(&QuantumState::maximally_mixed("A", 2)).unwrap();
        let w = p.marginal(&["purifier"]).unwrap();
        assert!(
            w.matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale(0.5))
                < 1e-12
        );
        let s = 0.5f64.sqrt();
        let mags: Vec<f64> = p.amplitudes().iter().map(|z| z.norm()).collect();
        assert!(mags.iter().filter(|m| (*m - s).abs() < 1e-12).count() == 2);
    }

    #[test]
    fn purification_round_trip() {
        let mut rng = seeded_rng(3);
        for rank in 1..=3 {
            let rho = QuantumState::single("A", random_density_rank(&mut rng, 3, rank)).unwrap();
            let p = purify(&rho).unwrap();
            assert_eq!(p.layout().dim_of("purifier").unwrap(), rank);
            let back = p.marginal(&["A"]).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn uhlmann_identical_vectors() {
        let a = random_pure(layout(&[("X", 2), ("Y", 3)]), 8);
        let u = uhlmann_isometry(&a, &a, &["X"]).unwrap();
        assert!((u.overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uhlmann_orthogonal_supports() {
        let a = PureVector::basis("X", 2, 0)
            .tensor(&PureVector::basis("Y", 2, 1))
            .unwrap();
        let b = PureVector::basis("X", 2, 1)
            .tensor(&PureVector::basis("Z", 2, 0))
            .unwrap();
        let u = uhlmann_isometry(&a, &b, &["X"]).unwrap();
        assert!(u.overlap.abs() < 1e-12);
        let g = u.isometry.adjoint().matmul(&u.isometry);
        assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-9);
    }

    #[test]
    fn uhlmann_matches_marginal_fidelity() {
        for seed in 0..50 {
            let a = random_pure(layout(&[("X", 2), ("Y", 2)]), 2 * seed);
            let b = random_pure(layout(&[("X", 2), ("Z", 3)]), 2 * seed + 1);
            let u = uhlmann_isometry(&a, &b, &["X"]).unwrap();
            let f = fidelity(
                a.marginal(&["X"]).unwrap().matrix(),
                b.marginal(&["X"]).unwrap().matrix(),
            )
            .unwrap();
            assert!((u.overlap - f).abs() < 1e-8, "seed {seed}");
            let g = u.isometry.adjoint().matmul(&u.isometry);
            assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-9);
            let moved = a.apply(&["Y"], &u.isometry, &[("Z", 3)]).unwrap();
            let attained = inner(b.amplitudes(), moved.amplitudes()).norm();
            assert!((attained - f).abs() < 1e-8);
        }
    }

    #[test]
    fn permutations_and_swaps() {
        let v = random_pure(layout(&[("A", 2), ("B", 3), ("C", 2)]), 1);
        let same = v.permute_registers(&["A", "B", "C"]).unwrap();
        assert_eq!(same.amplitudes(), v.amplitudes());
        let s = controlled_swap(&v, "B", |_| vec![("A".into(), "C".into())]).unwrap();
        let back = controlled_swap(&s, "B", |_| vec![("A".into(), "C".into())]).unwrap();
        let diff = back
            .amplitudes()
            .iter()
            .zip(v.amplitudes())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(diff < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let rho = v.density().permute_registers(&["C", "A", "B"]).unwrap();
        assert!((rho.matrix().trace_re() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_swap_only_fires_on_selected_values() {
        let v = PureVector::basis("K", 2, 1)
            .tensor(&PureVector::basis("A", 2, 0))
            .unwrap()
            .tensor(&PureVector::basis("B", 2, 1))
            .unwrap();
        let s = controlled_swap(&v, "K", |k| {
            if k == 1 {
                vec![("A".into(), "B".into())]
            } else {
                vec![]
            }
        })
        .unwrap();
        // |1⟩|0⟩|1⟩ → |1⟩|1⟩|0⟩
        assert!((s.amplitudes()[6].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_moves_outputs_to_first_target_position() {
        let v = random_pure(layout(&[("A", 2), ("B", 3), ("C", 2)]), 4);
        let id = ComplexMatrix::identity(4);
        let w = v.apply(&["C", "A"], &id, &[("D", 2), ("E", 2)]).unwrap();
        assert_eq!(w.layout().labels(), vec!["D", "E", "B"]);
        let direct = v.permute_registers(&["C", "A", "B"]).unwrap();
        let diff = w
            .amplitudes()
            .iter()
            .zip(direct.amplitudes())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(diff < 1e-15);
    }

    #[test]
    fn state_validation() {
        let bad = ComplexMatrix::from_real_diag(&[0.6, 0.3]);
        assert!(matches!(
            QuantumState::single("A", bad),
            Err(Error::Input(_))
        ));
        let neg = ComplexMatrix::from_real_diag(&[1.2, -0.2]);
        assert!(matches!(
            QuantumState::single("A", neg),
            Err(Error::Input(_))
        ));
        assert!(RegisterLayout::new([("A", 2), ("A", 2)]).is_err());
    }
}
