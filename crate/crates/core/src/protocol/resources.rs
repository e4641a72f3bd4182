//! Shared states of the protocol: the σ purification, θ and the convex-split
//! purification μ.

use crate::error::{Error, Result};
use crate::linalg::{checked_dim_product, dim_cap, C64, ZERO};
use crate::states::{purify_with_label, PureVector, QuantumState, RegisterLayout};

/// Canonical purification Σ_l √λ_l |v_l⟩_C |l⟩_L of σ_C.
#[derive(Clone, Debug)]
pub(crate) struct SigmaPurification {
    pub dc: usize,
    pub dl: usize,
    /// Amplitudes indexed c·d_L + l.
    pub amps: Vec<C64>,
    pub weights: Vec<f64>,
    /// v_l on C.
    pub vectors: Vec<Vec<C64>>,
}

impl SigmaPurification {
    pub fn new(sigma: &QuantumState) -> Result<Self> {
        let p = purify_with_label(sigma, "L")?;
        let dc = sigma.dim();
        let dl = p.dim() / dc;
        let amps = p.into_amplitudes();
        let mut weights = Vec::with_capacity(dl);
        let mut vectors = Vec::with_capacity(dl);
        for l in 0..dl {
            let col: Vec<C64> = (0..dc).map(|c| amps[c * dl + l]).collect();
            let w: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            let s = w.sqrt();
            vectors.push(col.iter().map(|z| z / s).collect());
            weights.push(w);
        }
        Ok(SigmaPurification {
            dc,
            dl,
            amps,
            weights,
            vectors,
        })
    }

    /// |σ⟩ on registers (c, l).
    pub fn pair(&self, c: &str, l: &str) -> Result<PureVector> {
        Ok(PureVector::from_parts(
            RegisterLayout::new([(c, self.dc), (l, self.dl)])?,
            self.amps.clone(),
        ))
    }
}

pub(crate) fn c_label(j: usize) -> String {
    format!("C{j}")
}

pub(crate) fn l_label(j: usize) -> String {
    format!("L{j}")
}

/// Φ_{RABC} ⊗ |σ⟩_{C₁L₁} ⊗ … ⊗ |σ⟩_{C_nL_n}; `phi` must be laid out R, A, B, C.
pub(crate) fn xi_vector(
    phi: &PureVector,
    purif: &SigmaPurification,
    n: usize,
) -> Result<PureVector> {
    let mut v = phi.clone();
    for j in 1..=n {
        v = v.tensor(&purif.pair(&c_label(j), &l_label(j))?)?;
    }
    Ok(v)
}

/// (1/√n) Σ_j |j⟩_J |Φ⟩_{RABC_j} |0⟩_{L_j} ⊗_{t≠j} |σ⟩_{C_tL_t}, laid out
/// R, A, B, J, C₁, L₁, …, C_n, L_n. `phi` must be laid out R, A, B, C.
pub(crate) fn mu_vector(
    phi: &PureVector,
    purif: &SigmaPurification,
    n: usize,
    j_label: &str,
) -> Result<PureVector> {
    let d = phi.layout().dims();
    if d.len() != 4 || d[3] != purif.dc {
        return Err(Error::Dimension(format!(
            "expected R, A, B, C with d_C = {}, got dims {d:?}",
            purif.dc
        )));
    }
    let (dr, da, db, dc, dl) = (d[0], d[1], d[2], d[3], purif.dl);
    let pair = dc * dl;
    let cap = dim_cap();
    let what = format!("protocol state for n = {n}");
    let pairs_total = checked_dim_product(&vec![pair; n], cap, &what)?;
    let rab = dr * da * db;
    let total = checked_dim_product(&[rab, n, pairs_total], cap, &what)?;
    let scale = 1.0 / (n as f64).sqrt();
    let phi_amps = phi.amplitudes();
    let mut amps = vec![ZERO; total];
    let mut digits = vec![0usize; n];
    for x in 0..rab {
        for j in 0..n {
            let base = (x * n + j) * pairs_total;
            digits.iter_mut().for_each(|g| *g = 0);
            for p in 0..pairs_total {
                let dj = digits[j];
                if dj % dl == 0 {
                    let mut amp = phi_amps[x * dc + dj / dl];
                    if amp.re != 0.0 || amp.im != 0.0 {
                        for (t, &g) in digits.iter().enumerate() {
                            if t != j {
                                amp *= purif.amps[g];
                            }
                        }
                        amps[base + p] = amp * scale;
                    }
                }
                for g in digits.iter_mut().rev() {
                    *g += 1;
                    if *g < pair {
                        break;
                    }
                    *g = 0;
                }
            }
        }
    }
    let mut regs: Vec<(String, usize)> = vec![
        ("R".into(), dr),
        ("A".into(), da),
        ("B".into(), db),
        (j_label.into(), n),
    ];
    for j in 1..=n {
        regs.push((c_label(j), dc));
        regs.push((l_label(j), dl));
    }
    Ok(PureVector::from_parts(RegisterLayout::new(regs)?, amps))
}
