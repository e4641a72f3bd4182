use std::collections::BTreeMap;

use super::decoder::{decoding_analysis, isometry_defect};
use super::resources::{c_label, l_label, mu_vector, xi_vector, SigmaPurification};
use super::{
    index_split, Partition, ProtocolConfig, ProtocolTranscript, Regime, StepCheck, StepState,
};
use crate::entropies::{dh_eps, dmax, purified_distance, Bits, CertificateKind};
use crate::error::{Error, Result};
use crate::linalg::{
    checked_dim_product, dim_cap, eig_hermitian, extend_orthonormal, support_cutoff, svd, tensor,
    with_scoped_cap, ComplexMatrix, C64, SUPPORT_REL_CUTOFF, ZERO,
};
use crate::states::{controlled_swap, PureVector, QuantumState};

/// One recorded operation of a forward run.
#[derive(Clone, Debug)]
enum Step {
    Apply {
        name: &'static str,
        inputs: Vec<(String, usize)>,
        outputs: Vec<(String, usize)>,
        op: ComplexMatrix,
    },
    BlockSwap {
        n: usize,
        b: usize,
    },
    DecodeSwap {
        b: usize,
    },
}

impl Step {
    fn name(&self) -> &'static str {
        match self {
            Step::Apply { name, .. } => name,
            Step::BlockSwap { .. } => "block_swap",
            Step::DecodeSwap { .. } => "decode_swap",
        }
    }

    fn forward(&self, psi: &PureVector) -> Result<PureVector> {
        match self {
            Step::Apply {
                inputs,
                outputs,
                op,
                ..
            } => {
                let t: Vec<&str> = inputs.iter().map(|(l, _)| l.as_str()).collect();
                let o: Vec<(&str, usize)> = outputs.iter().map(|(l, d)| (l.as_str(), *d)).collect();
                psi.apply(&t, op, &o)
            }
            Step::BlockSwap { n, b } => block_swap(psi, *n, *b),
            Step::DecodeSwap { b } => decode_swap(psi, *b),
        }
    }

    fn backward(&self, psi: &PureVector) -> Result<PureVector> {
        match self {
            Step::Apply {
                inputs,
                outputs,
                op,
                ..
            } => {
                let t: Vec<&str> = outputs.iter().map(|(l, _)| l.as_str()).collect();
                let o: Vec<(&str, usize)> = inputs.iter().map(|(l, d)| (l.as_str(), *d)).collect();
                psi.apply(&t, &op.adjoint(), &o)
            }
            // both swaps are involutions
            _ => self.forward(psi),
        }
    }

    fn operator_defect(&self) -> Option<f64> {
        match self {
            Step::Apply { op, .. } => Some(isometry_defect(op)),
            _ => None,
        }
    }
}

/// Controlled on J₁ = j₁, swap C_{b·j₁+t} ↔ C_t and L_{b·j₁+t} ↔ L_t for
/// t = 1…b, skipping slots beyond n.
fn block_swap(psi: &PureVector, n: usize, b: usize) -> Result<PureVector> {
    controlled_swap(psi, "J1", |j1| {
        let mut pairs = Vec::new();
        if j1 == 0 {
            return pairs;
        }
        for t in 1..=b {
            let src = b * j1 + t;
            if src <= n {
                pairs.push((c_label(t), c_label(src)));
                pairs.push((l_label(t), l_label(src)));
            }
        }
        pairs
    })
}

/// Controlled on J′₂ = j ≥ 2, swap C_j ↔ C₁. Values 0 (empty outcome) and 1
/// do nothing.
fn decode_swap(psi: &PureVector, b: usize) -> Result<PureVector> {
    let _ = b;
    controlled_swap(psi, "J2p", |v| {
        if v >= 2 {
            vec![(c_label(1), c_label(v))]
        } else {
            Vec::new()
        }
    })
}

/// W: |j⟩_J ↦ |j₁⟩_{J₁}|j₂⟩_{J₂}, with J₂ storing j₂ − 1.
fn index_split_isometry(n: usize, b: usize) -> Result<(ComplexMatrix, usize)> {
    let m1 = (n - 1) / b + 1;
    let mut w = ComplexMatrix::zeros(m1 * b, n);
    for j in 1..=n {
        let (j1, j2) = index_split(j, n, b)?;
        w[(j1 * b + j2 - 1, j - 1)] = C64::new(1.0, 0.0);
    }
    Ok((w, m1))
}

fn regs(labels: &[String], dims: &[usize]) -> Vec<(String, usize)> {
    labels.iter().cloned().zip(dims.iter().copied()).collect()
}

/// Newton–Schulz iteration W ← (3W − (WW†)W)/2 towards orthonormal rows.
/// Rows must already be close to orthonormal.
fn orthonormalize_rows(mut w: ComplexMatrix) -> Result<ComplexMatrix> {
    if w.rows() == 0 {
        return Ok(w);
    }
    let id = ComplexMatrix::identity(w.rows());
    for _ in 0..6 {
        let g = w.matmul(&w.adjoint());
        let defect = g.max_abs_diff(&id);
        if defect <= 1e-14 {
            return Ok(w);
        }
        if defect > 0.5 {
            return Err(Error::Numeric(format!(
                "Uhlmann image rows are far from orthonormal (defect {defect:e})"
            )));
        }
        w = &w.scale(1.5) - &g.matmul(&w).scale(0.5);
    }
    Ok(w)
}

/// Alice's Uhlmann isometry V′ taking ξ to the purification of ξ_{RBC₁…C_n}
/// closest to μ, as two factors: Y† onto the Schmidt span of ξ's Alice side
/// (register K), then an isometry from K into J, A, L₁…L_n.
///
/// Only the Schmidt span of ξ on A, C, L₁…L_n matters, so the overlap matrix
/// is formed in that r-dimensional basis and never at full size.
fn alice_isometry(
    phi: &PureVector,
    purif: &SigmaPurification,
    n: usize,
) -> Result<(Step, Step, f64)> {
    let d = phi.layout().dims();
    let (dr, da, db, dc) = (d[0], d[1], d[2], d[3]);
    let dl = purif.dl;
    // Schmidt form of Φ across RB | AC
    let phi4 = phi.permute_registers(&["R", "B", "A", "C"])?;
    let m = ComplexMatrix::from_vec(dr * db, da * dc, phi4.into_amplitudes())?;
    let s = svd(&m)?;
    let s0 = s.s.first().copied().unwrap_or(0.0);
    let terms: Vec<usize> = (0..s.s.len())
        .filter(|&i| s.s[i] * s.s[i] > SUPPORT_REL_CUTOFF * s0 * s0)
        .collect();

    let lcount = checked_dim_product(&vec![dl; n], dim_cap(), "Schmidt span")?;
    let r = terms.len() * lcount;
    let dy = da * dc * lcount;
    let dz = n * da * lcount;
    checked_dim_product(
        &[dr * db, dc.pow(n as u32), dz],
        dim_cap(),
        &format!("protocol state for n = {n}"),
    )?;

    // a[i][k][α] = (⟨u_i|_{RB} ⊗ ⟨v_k|_C) |Φ⟩, a vector on A
    let amps = phi.amplitudes();
    let mut a = vec![vec![vec![ZERO; da]; dl]; terms.len()];
    for (ti, &i) in terms.iter().enumerate() {
        let u = s.u.column(i);
        for (k, vk) in purif.vectors.iter().enumerate() {
            for (alpha, slot) in a[ti][k].iter_mut().enumerate() {
                let mut acc = ZERO;
                for x in 0..dr {
                    for y in 0..db {
                        let uc = u[x * db + y].conj();
                        for (c, vc) in vk.iter().enumerate() {
                            acc += uc * vc.conj() * amps[((x * da + alpha) * db + y) * dc + c];
                        }
                    }
                }
                *slot = acc;
            }
        }
    }

    // K[m, z] = √λ_m conj(⟨x_m|μ⟩[z]) has n·d_A nonzeros per row: slot j
    // carries Φ (L_j = 0) and every other slot returns √λ_{k_t} on L_t = k_t.
    let mut ycomp = ComplexMatrix::zeros(r, dy);
    let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dz];
    let scale = 1.0 / (n as f64).sqrt();
    let mut ks = vec![0usize; n];
    for (ti, &i) in terms.iter().enumerate() {
        let w = s.v.column(i);
        for kidx in 0..lcount {
            let m = ti * lcount + kidx;
            let mut rem = kidx;
            for t in (0..n).rev() {
                ks[t] = rem % dl;
                rem /= dl;
            }
            let lam: f64 = ks.iter().map(|&k| purif.weights[k].sqrt()).product();
            for j in 0..n {
                let kj = ks[j];
                let others = lam / purif.weights[kj].sqrt();
                let lstr = kidx - kj * dl.pow((n - 1 - j) as u32);
                let coeff = s.s[i] * lam * others * scale;
                for alpha in 0..da {
                    let v = a[ti][kj][alpha].conj() * coeff;
                    if v.re != 0.0 || v.im != 0.0 {
                        cols[(j * da + alpha) * lcount + lstr].push((m, v));
                    }
                }
            }
            // conj(y_m) = w_i ⊗ e_k
            for (ac, wz) in w.iter().enumerate() {
                ycomp[(m, ac * lcount + kidx)] = *wz;
            }
        }
    }

    let mut kk = ComplexMatrix::zeros(r, r);
    for col in &cols {
        for &(m1, v1) in col {
            for &(m2, v2) in col {
                kk[(m1, m2)] += v1 * v2.conj();
            }
        }
    }
    let e = eig_hermitian(&kk.hermitian_part())?;
    let mut u = ComplexMatrix::zeros(r, r);
    let mut sv = vec![0.0; r];
    for dst in 0..r {
        let src = r - 1 - dst;
        u.set_column(dst, &e.vector(src));
        sv[dst] = e.eigenvalues[src].max(0.0).sqrt();
    }
    // Pᵀ = (U†K)ᵀ, so row z of `pt` is column z of P
    let mut pt = vec![ZERO; dz * r];
    for (z, col) in cols.iter().enumerate() {
        let row = &mut pt[z * r..(z + 1) * r];
        for &(m, v) in col {
            let urow = &u.data()[m * r..(m + 1) * r];
            for (dst, um) in row.iter_mut().zip(urow) {
                *dst += um.conj() * v;
            }
        }
    }
    drop(cols);

    // rows of W: conj(P_m)/s_m on the numerical support of K, then polished
    let smax = sv.first().copied().unwrap_or(0.0);
    // below this level P's rows are dominated by eigensolver noise
    let kept: Vec<usize> = (0..r)
        .filter(|&m| smax > 0.0 && sv[m] > 1e-6 * smax)
        .collect();
    let mut wk = ComplexMatrix::zeros(kept.len(), dz);
    for (q, &m) in kept.iter().enumerate() {
        for z in 0..dz {
            wk[(q, z)] = pt[z * r + m].conj() / sv[m];
        }
    }
    drop(pt);
    let wk = orthonormalize_rows(wk)?;
    let mut wmat = ComplexMatrix::zeros(r, dz);
    for (q, &m) in kept.iter().enumerate() {
        wmat.data_mut()[m * dz..(m + 1) * dz].copy_from_slice(&wk.data()[q * dz..(q + 1) * dz]);
    }
    if kept.len() < r {
        let filled: Vec<Vec<C64>> = (0..kept.len())
            .map(|q| wk.data()[q * dz..(q + 1) * dz].to_vec())
            .collect();
        let missing: Vec<usize> = (0..r).filter(|m| !kept.contains(m)).collect();
        let extra = extend_orthonormal(&filled, dz, missing.len());
        if extra.len() < missing.len() {
            return Err(Error::Dimension(format!(
                "Alice's output space (dimension {dz}) cannot hold the Schmidt span of rank {r}"
            )));
        }
        for (m, v) in missing.iter().zip(extra) {
            wmat.data_mut()[m * dz..(m + 1) * dz].copy_from_slice(&v);
        }
    }
    // T = W U†, returned as d_Z × r
    let t = u.conj().matmul(&wmat).transpose();
    let overlap: f64 = sv.iter().sum();

    let mut zo: Vec<String> = vec!["J".into(), "A".into()];
    zo.extend((1..=n).map(l_label));
    let mut yl: Vec<String> = vec!["A".into(), "C".into()];
    yl.extend((1..=n).map(l_label));
    let mut yd = vec![da, dc];
    yd.extend(std::iter::repeat_n(dl, n));
    let mut zd = vec![n, da];
    zd.extend(std::iter::repeat_n(dl, n));
    let inward = Step::Apply {
        name: "alice_isometry_in",
        inputs: regs(&yl, &yd),
        outputs: vec![("K".into(), r)],
        op: ycomp,
    };
    let outward = Step::Apply {
        name: "alice_isometry_out",
        inputs: vec![("K".into(), r)],
        outputs: regs(&zo, &zd),
        op: t,
    };
    Ok((inward, outward, overlap))
}

/// Replace every register outside `keep` by one register "env" of dimension
/// rank ρ_keep. The map is an isometry on the support of the current state,
/// so all later marginals on `keep` and on registers created afterwards are
/// unchanged.
fn compression_step(psi: &PureVector, keep: &[&str]) -> Result<Step> {
    let rest: Vec<String> = psi
        .layout()
        .complement(keep)
        .into_iter()
        .map(String::from)
        .collect();
    let rest_refs: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
    let mut order: Vec<&str> = keep.to_vec();
    order.extend(&rest_refs);
    let moved = psi.permute_registers(&order)?;
    let dk: usize = keep
        .iter()
        .map(|l| psi.layout().dim_of(l))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .product();
    let de = psi.dim() / dk;
    let rho = moved.marginal(keep)?.into_matrix();
    let e = eig_hermitian(&rho)?;
    let cut = support_cutoff(e.max());
    let support: Vec<usize> = (0..dk).rev().filter(|&i| e.eigenvalues[i] > cut).collect();
    let r = support.len().max(1);
    let amps = moved.amplitudes();
    let mut op = ComplexMatrix::zeros(r, de);
    for (row, &i) in support.iter().enumerate() {
        let ui = e.vector(i);
        let norm = e.eigenvalues[i].sqrt();
        // f_i(e) = Σ_k conj(u_i(k)) ψ(k, e) / √λ_i; the operator row is conj(f_i)
        for (kx, uk) in ui.iter().enumerate() {
            if uk.re == 0.0 && uk.im == 0.0 {
                continue;
            }
            let c = uk.conj() / norm;
            let src = &amps[kx * de..(kx + 1) * de];
            let dst = &mut op.data_mut()[row * de..(row + 1) * de];
            for (dz, sz) in dst.iter_mut().zip(src) {
                *dz += c * sz;
            }
        }
        for z in op.data_mut()[row * de..(row + 1) * de].iter_mut() {
            *z = z.conj();
        }
    }
    let op = orthonormalize_rows(op)?;
    let inputs = rest
        .iter()
        .map(|l| Ok((l.clone(), psi.layout().dim_of(l)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Step::Apply {
        name: "environment_compression",
        inputs,
        outputs: vec![("env".into(), r)],
        op,
    })
}

/// F² = ⟨Φ|ρ|Φ⟩ of the (possibly subnormalized) marginal of `psi` on
/// R, A, B and `c` against the pure target Φ (laid out R, A, B, C).
fn overlap_with_target(psi: &PureVector, phi: &PureVector, c: &str) -> Result<f64> {
    let rho = psi.marginal(&["R", "A", "B", c])?.into_matrix();
    let a = phi.amplitudes();
    Ok(rho.sandwich(a, a).re.clamp(0.0, 1.0))
}

/// Input Φ rearranged to R, A, B, C according to the partition.
fn canonical_input(phi: &PureVector, part: &Partition) -> Result<PureVector> {
    let labels = [
        part.r.as_str(),
        part.a.as_str(),
        part.b.as_str(),
        part.c.as_str(),
    ];
    if phi.layout().len() != 4 {
        return Err(Error::Input(format!(
            "the input must have exactly the four registers {labels:?}, found {:?}",
            phi.layout().labels()
        )));
    }
    let nrm = phi.norm();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!("input vector has norm {nrm}")));
    }
    phi.permute_registers(&labels)?
        .relabel(&["R", "A", "B", "C"])
}

struct Forward {
    transcript: ProtocolTranscript,
    steps: Vec<Step>,
    final_state: PureVector,
    phi: PureVector,
    run_cap: usize,
}

fn check_eps(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Parameter(format!(
            "{name} must lie in (0, 1), got {x}"
        )));
    }
    Ok(())
}

fn simulate(phi_in: &PureVector, config: &ProtocolConfig, record: bool) -> Result<Forward> {
    check_eps("eps1", config.eps1)?;
    check_eps("eps2", config.eps2)?;
    let phi = canonical_input(phi_in, &config.partition)?;
    let dims = phi.layout().dims();
    let (dr, da, db, dc) = (dims[0], dims[1], dims[2], dims[3]);

    let phi_c = phi.marginal(&["C"])?;
    let sigma_state = match &config.sigma_c {
        Some(m) => QuantumState::single("C", m.clone())?,
        None => phi_c.clone(),
    };
    if sigma_state.dim() != dc {
        return Err(Error::Dimension(format!(
            "sigma_C has dimension {}, register C has {dc}",
            sigma_state.dim()
        )));
    }
    let sigma = sigma_state.matrix().clone();

    // k := D_max(Φ′_RBC ‖ Φ′_RB ⊗ σ_C)
    let rbc = match &config.smoothed_rbc {
        Some(m) => {
            let exact = phi.marginal(&["R", "B", "C"])?.into_matrix();
            let dist = purified_distance(m, &exact)?;
            if dist > config.eps1 + 1e-9 {
                return Err(Error::Parameter(format!(
                    "smoothed state lies at purified distance {dist} > eps1"
                )));
            }
            m.clone()
        }
        None => phi.marginal(&["R", "B", "C"])?.into_matrix(),
    };
    let rb = crate::linalg::partial_trace(&rbc, &[dr, db, dc], &[0, 1])?;
    let k = match dmax(&rbc, &tensor(&rb, &sigma)?)?.value {
        Bits::Finite(v) => v,
        Bits::Infinite => {
            return Err(Error::Input(
                "supp Φ_RBC is not contained in supp Φ_RB ⊗ σ_C".into(),
            ))
        }
    };

    let eps2_sq = config.eps2 * config.eps2;
    let phi_bc = phi.marginal(&["B", "C"])?.into_matrix();
    let phi_b = phi.marginal(&["B"])?.into_matrix();
    let dh = dh_eps(&phi_bc, &tensor(&phi_b, &sigma)?, eps2_sq)?;
    let dh_value = match dh.value {
        Bits::Finite(v) => v,
        Bits::Infinite => {
            return Err(Error::Input(
                "D_H is infinite: the test never errs on Φ_B ⊗ σ_C".into(),
            ))
        }
    };
    let pi_bc = match &dh.certificate {
        Some((CertificateKind::TestOperator, m)) => m.clone(),
        _ => {
            return Err(Error::Contract(
                "hypothesis test returned no test operator".into(),
            ))
        }
    };

    let n_formula = || -> Result<usize> {
        let v = (k.exp2() / (config.eps1 * config.eps1)).ceil();
        if !v.is_finite() || v > 1e9 {
            return Err(Error::DimensionCap {
                what: format!("protocol with n = {v}"),
                required: u128::MAX,
                cap: dim_cap(),
            });
        }
        Ok((v as usize).max(1))
    };
    let n = match (config.derive_params, config.n) {
        (false, Some(n)) => n,
        _ => n_formula()?,
    };
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let b_from_formula = config.derive_params || config.b.is_none();
    let b = if b_from_formula {
        let v = (eps2_sq * dh_value.exp2()).ceil();
        (v.max(1.0) as usize).min(n)
    } else {
        config.b.unwrap()
    };
    if b == 0 || b > n {
        return Err(Error::Parameter(format!(
            "block size b = {b} must lie in 1..={n}"
        )));
    }
    let n_from_formula = config.derive_params || config.n.is_none();

    let purif = SigmaPurification::new(&sigma_state)?;
    let dl = purif.dl;
    let (w_op, m1) = index_split_isometry(n, b)?;
    let mut state_dims = vec![dr, da, db, dc];
    state_dims.extend(std::iter::repeat_n(dc * dl, n));
    let state_dim = checked_dim_product(
        &state_dims,
        dim_cap(),
        &format!("protocol state for n = {n}"),
    )?;
    // while J (or J₁J₂) is held the vector is larger than the input-sized
    // state by at most this factor
    let index_factor = n.max(m1 * b).max(dc).div_ceil(dc);
    let run_cap = dim_cap().max(state_dim.saturating_mul(index_factor));
    with_scoped_cap(run_cap, || -> Result<Forward> {
        let mut steps: Vec<Step> = Vec::new();
        let mut checks: Vec<StepCheck> = Vec::new();
        let mut snapshots: Vec<StepState> = Vec::new();
        let mut record_state = |name: &str, psi: &PureVector, defect: Option<f64>| {
            checks.push(StepCheck {
                step: name.to_string(),
                norm_defect: (psi.norm() - 1.0).abs(),
                operator_defect: defect,
            });
            if config.store_states {
                snapshots.push(StepState::from_vector(name, psi));
            }
        };

        // Alice's isometry (or the injected target state)
        let (mut psi, split_fidelity) = if config.inject_mu {
            let mu = mu_vector(&phi, &purif, n, "J")?;
            record_state("inject_mu", &mu, None);
            (mu, 1.0)
        } else {
            let xi = xi_vector(&phi, &purif, n)?;
            record_state("append_theta", &xi, None);
            let (inward, outward, overlap) = alice_isometry(&phi, &purif, n)?;
            let mut psi = xi;
            for step in [inward, outward] {
                psi = step.forward(&psi)?;
                record_state(step.name(), &psi, step.operator_defect());
                if record {
                    steps.push(step);
                }
            }
            (psi, overlap.min(1.0))
        };

        // J₁ stays in place: the copy sent to Bob would hold the same basis
        // value, so controls on it are controls on J₁
        let w_step = Step::Apply {
            name: "index_split",
            inputs: vec![("J".into(), n)],
            outputs: vec![("J1".into(), m1), ("J2".into(), b)],
            op: w_op,
        };
        psi = w_step.forward(&psi)?;
        record_state("index_split", &psi, w_step.operator_defect());
        if record {
            steps.push(w_step);
        }

        let swap = Step::BlockSwap { n, b };
        psi = swap.forward(&psi)?;
        record_state("block_swap", &psi, None);
        if record {
            steps.push(swap);
        }

        let mut keep: Vec<String> = vec!["R".into(), "A".into(), "B".into(), "J2".into()];
        keep.extend((1..=b).map(c_label));
        let keep_refs: Vec<&str> = keep.iter().map(|s| s.as_str()).collect();
        let compress = compression_step(&psi, &keep_refs)?;
        psi = compress.forward(&psi)?;
        record_state("environment_compression", &psi, compress.operator_defect());
        if record {
            steps.push(compress);
        }

        let (decoding, _ops, vb) =
            decoding_analysis(&phi, &sigma, &purif, &pi_bc, dh_value, config.eps2, b)?;
        let mut bc: Vec<(String, usize)> = vec![("B".into(), db)];
        bc.extend((1..=b).map(|t| (c_label(t), dc)));
        let mut bc_out = bc.clone();
        bc_out.push(("J2p".into(), b + 1));
        let vb_step = Step::Apply {
            name: "decoder",
            inputs: bc,
            outputs: bc_out,
            op: vb,
        };
        psi = vb_step.forward(&psi)?;
        record_state("decoder", &psi, vb_step.operator_defect());
        if record {
            steps.push(vb_step);
        }
        let dswap = Step::DecodeSwap { b };
        psi = dswap.forward(&psi)?;
        record_state("decode_swap", &psi, None);
        if record {
            steps.push(dswap);
        }

        let f2 = overlap_with_target(&psi, &phi, "C1")?;
        let measured_p = (1.0 - f2).max(0.0).sqrt();
        let jj = psi.marginal(&["J2", "J2p"])?.into_matrix();
        let mut success = 0.0;
        let mut empty = 0.0;
        for j in 0..b {
            success += jj[(j * (b + 1) + j + 1, j * (b + 1) + j + 1)].re;
            empty += jj[(j * (b + 1), j * (b + 1))].re;
        }

        let ratio = (k.exp2() / n as f64).min(1.0);
        let split_bound = ratio.sqrt();
        let x = decoding.exact_error.clamp(0.0, 1.0);
        let decode_bound = (2.0 * x - x * x).max(0.0).sqrt();
        let guaranteed = 3.0 * config.eps1 + 6.0 * config.eps2;
        let regime = if n_from_formula && b_from_formula && guaranteed <= 1.0 {
            Regime::Guarantee
        } else {
            Regime::TrendOnly
        };
        let guaranteed_p = (regime == Regime::Guarantee).then_some(guaranteed);
        let max_residual = checks
            .iter()
            .map(|c| c.norm_defect.max(c.operator_defect.unwrap_or(0.0)))
            .fold(0.0, f64::max);
        let mut extras = BTreeMap::new();
        extras.insert("j1_register_qubits".to_string(), 0.5 * (m1 as f64).log2());
        extras.insert("l_dimension".to_string(), dl as f64);

        let transcript = ProtocolTranscript {
            reversed: false,
            mu_injected: config.inject_mu,
            k,
            dh_value,
            n,
            b,
            n_from_formula,
            b_from_formula,
            j1_dim: m1,
            qubits_sent: 0.5 * ((n / b) as f64).log2(),
            measured_p,
            regime,
            guaranteed_p,
            guarantee_met: guaranteed_p.map(|g| measured_p <= g + 1e-6),
            split_fidelity,
            split_bound,
            decode_bound,
            derived_bound: (split_bound + decode_bound).min(1.0),
            loose_bound: (3.0 * split_bound + 6.0 * config.eps2).min(1.0),
            decode_success_prob: success,
            no_output_mass: empty,
            decoding,
            steps: checks,
            max_residual,
            reversal_leakage: None,
            mirror_measured_p: None,
            eps1: config.eps1,
            eps2: config.eps2,
            seed: config.seed,
            extras,
            step_states: config.store_states.then_some(snapshots),
        };
        Ok(Forward {
            transcript,
            steps,
            final_state: psi,
            phi,
            run_cap,
        })
    })
}

/// Simulate the redistribution protocol on Φ_RABC (C starts with Alice,
/// who also holds A) and report costs and distances.
pub fn run_protocol(phi: &PureVector, config: &ProtocolConfig) -> Result<ProtocolTranscript> {
    Ok(simulate(phi, config, false)?.transcript)
}

/// The convex-split purification μ replaces the
/// output of Alice's isometry, so the only error left is decoding.
pub fn run_protocol_injected(
    phi: &PureVector,
    config: &ProtocolConfig,
) -> Result<ProtocolTranscript> {
    let mut c = config.clone();
    c.inject_mu = true;
    run_protocol(phi, &c)
}

/// The mirrored protocol: run forward with A and B exchanged (C starts with
/// B), then undo that run on the actual input. The final state of the
/// mirrored run is projected onto Φ to obtain the junk state j*, and the
/// adjoint of every recorded step is applied to Φ ⊗ j*. Mass pushed outside
/// the range of an isometry is counted as failure (`reversal_leakage`), so
/// the reported distance upper-bounds that of any unitary completion.
pub fn run_protocol_reversed(
    phi: &PureVector,
    config: &ProtocolConfig,
) -> Result<ProtocolTranscript> {
    if config.inject_mu {
        return Err(Error::Contract(
            "the reversed run does not support μ injection".into(),
        ));
    }
    let mut mirrored = config.clone();
    std::mem::swap(&mut mirrored.partition.a, &mut mirrored.partition.b);
    let fwd = simulate(phi, &mirrored, true)?;
    with_scoped_cap(fwd.run_cap, || undo_mirrored(fwd))
}

fn undo_mirrored(fwd: Forward) -> Result<ProtocolTranscript> {
    let out = &fwd.final_state;

    let mut order: Vec<&str> = vec!["R", "A", "B", "C1"];
    let rest = out.layout().complement(&order);
    order.extend(rest.iter().copied());
    let moved = out.permute_registers(&order)?;
    let ds = fwd.phi.dim();
    let de = moved.dim() / ds;
    let target = fwd.phi.amplitudes();
    let mut junk = vec![ZERO; de];
    for (s, t) in target.iter().enumerate() {
        let tc = t.conj();
        for (j, z) in junk
            .iter_mut()
            .zip(&moved.amplitudes()[s * de..(s + 1) * de])
        {
            *j += tc * z;
        }
    }
    let jn = crate::linalg::vec_norm(&junk);
    if jn <= 1e-14 {
        return Err(Error::Numeric(
            "mirrored run ends orthogonal to the target".into(),
        ));
    }
    junk.iter_mut().for_each(|z| *z /= jn);
    let rest_layout = moved.layout().select(&rest)?;
    let start = fwd
        .phi
        .relabel(&["R", "A", "B", "C1"])?
        .tensor(&PureVector::from_parts(rest_layout, junk))?;

    let mut psi = start;
    let mut checks = Vec::new();
    for step in fwd.steps.iter().rev() {
        psi = step.backward(&psi)?;
        checks.push(StepCheck {
            step: format!("undo_{}", step.name()),
            norm_defect: (psi.norm() - 1.0).abs(),
            operator_defect: None,
        });
    }
    let kept = psi.norm().powi(2);
    let f2 = overlap_with_target(&psi, &fwd.phi, "C")?;

    let mut t = fwd.transcript;
    t.reversed = true;
    t.mirror_measured_p = Some(t.measured_p);
    t.measured_p = (1.0 - f2).max(0.0).sqrt();
    t.guarantee_met = t.guaranteed_p.map(|g| t.measured_p <= g + 1e-6);
    t.reversal_leakage = Some((1.0 - kept).max(0.0));
    t.steps.extend(checks);
    Ok(t)
}
