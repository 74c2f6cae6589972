use super::placement::scaled;
use super::{members, subsets_of_size, CachePlacement, DemandMatrix, SubspaceDecomposition};
use crate::gf::PrimeField;
use crate::linalg::{Matrix, Subspace};
use crate::lp::LpSolution;
use crate::rational::{int, Rational};

/// One multicast message X_S: coded rows over F_p^{N·B}, where file n owns
/// columns [nB, (n+1)B).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub subset: u32,
    pub rows: Matrix,
}

impl Message {
    pub fn users(&self) -> Vec<usize> {
        members(self.subset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryTranscript {
    pub messages: Vec<Message>,
    pub block: usize,
}

impl DeliveryTranscript {
    pub fn total_symbols(&self) -> usize {
        self.messages.iter().map(|m| m.rows.rows()).sum()
    }

    /// Transmitted symbols normalized by B.
    pub fn load(&self) -> Rational {
        int(self.total_symbols() as i64) / int(self.block as i64)
    }

    pub fn find(&self, subset: u32) -> Option<&Message> {
        self.messages.iter().find(|m| m.subset == subset)
    }

    /// Copy with the message at `index` removed.
    pub fn without(&self, index: usize) -> DeliveryTranscript {
        let mut messages = self.messages.clone();
        messages.remove(index);
        DeliveryTranscript {
            messages,
            block: self.block,
        }
    }

    fn stacked(&self, field: PrimeField, width: usize) -> Matrix {
        let parts: Vec<&Matrix> = self.messages.iter().map(|m| &m.rows).collect();
        Matrix::vstack(field, width, &parts).expect("messages share the row width")
    }
}

/// X_S = Σ_{k∈S} (-1)^{position of k in S} Σ_n d_{k,n} C'_{n,S\k}, where
/// C'_{n,T} embeds the leading η_{|T|}B rows of V_{T,n} into file n's block.
fn build_message(
    dec: &SubspaceDecomposition,
    d: &DemandMatrix,
    subset: u32,
    rows: usize,
) -> Message {
    let b = dec.block_length();
    let files = dec.files();
    let field = d.matrix().field();
    let mut out = Matrix::zeros(field, rows, files * b);
    for (pos, k) in members(subset).into_iter().enumerate() {
        let rest = subset & !(1 << k);
        let sign = if pos % 2 == 0 { 1 } else { field.neg(1) };
        for n in 0..files {
            let coef = field.mul(sign, d.coefficient(k, n));
            if coef == 0 {
                continue;
            }
            let v = dec.basis(n, rest);
            for i in 0..rows {
                let dst = &mut out.row_mut(i)[n * b..(n + 1) * b];
                for (x, &y) in dst.iter_mut().zip(v.row(i)) {
                    if y != 0 {
                        *x = field.add(*x, field.mul(coef, y));
                    }
                }
            }
        }
    }
    Message { subset, rows: out }
}

fn build(
    dec: &SubspaceDecomposition,
    sol: &LpSolution,
    d: &DemandMatrix,
    leaders_only: bool,
) -> DeliveryTranscript {
    let k = dec.users();
    let b = dec.block_length();
    let leaders = d.leader_mask();
    let mut messages = Vec::new();
    for s in 1..=k {
        let rows = scaled(&sol.eta[s - 1], b, "eta").expect("decomposition checked the scaling");
        for subset in subsets_of_size(k, s) {
            if leaders_only && subset & leaders == 0 {
                continue;
            }
            messages.push(build_message(dec, d, subset, rows));
        }
    }
    DeliveryTranscript { messages, block: b }
}

/// Messages for every S that meets the leader set, empty ones included.
pub fn deliver(
    _pl: &CachePlacement,
    dec: &SubspaceDecomposition,
    sol: &LpSolution,
    d: &DemandMatrix,
) -> DeliveryTranscript {
    build(dec, sol, d, true)
}

/// Messages for every nonempty S, with no leader omission.
pub fn deliver_all(
    _pl: &CachePlacement,
    dec: &SubspaceDecomposition,
    sol: &LpSolution,
    d: &DemandMatrix,
) -> DeliveryTranscript {
    build(dec, sol, d, false)
}

/// Whether every message of `full` missing from `sent` lies in the row span
/// of the messages actually sent.
pub fn verify_leader_omission(sent: &DeliveryTranscript, full: &DeliveryTranscript) -> bool {
    let omitted: Vec<&Message> = full
        .messages
        .iter()
        .filter(|m| m.rows.rows() > 0 && sent.find(m.subset).is_none())
        .collect();
    if omitted.is_empty() {
        return true;
    }
    let width = omitted[0].rows.cols();
    let span = Subspace::row_span(&sent.stacked(omitted[0].rows.field(), width));
    omitted.iter().all(|m| span.contains_all(&m.rows))
}

/// Rows of d_k ⊗ I_B: the B symbols user k wants.
fn target_rows(d: &DemandMatrix, user: usize, files: usize, b: usize) -> Matrix {
    let field = d.matrix().field();
    let mut t = Matrix::zeros(field, b, files * b);
    for n in 0..files {
        let c = d.coefficient(user, n);
        for i in 0..b {
            t.set(i, n * b + i, c);
        }
    }
    t
}

fn reduce_by_cache(pl: &CachePlacement, user: usize, m: &mut Matrix) {
    let b = pl.block();
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        for n in 0..pl.cfg().files() {
            pl.space(user, n).reduce_in_place(&mut row[n * b..(n + 1) * b]);
        }
    }
}

/// Per user, whether cache plus transcript determine its demanded function.
/// The cache is block diagonal over files, so both message and target rows
/// are reduced modulo the cache file by file before the span test.
pub fn verify_decoding(
    pl: &CachePlacement,
    tr: &DeliveryTranscript,
    d: &DemandMatrix,
) -> Vec<bool> {
    let files = pl.cfg().files();
    let b = pl.block();
    (0..pl.cfg().users())
        .map(|k| {
            let mut sent = tr.stacked(pl.field(), files * b);
            reduce_by_cache(pl, k, &mut sent);
            let mut target = target_rows(d, k, files, b);
            reduce_by_cache(pl, k, &mut target);
            Subspace::row_span(&sent).contains_all(&target)
        })
        .collect()
}

/// The same check with the cache written out as explicit generator rows.
pub fn verify_decoding_naive(
    pl: &CachePlacement,
    tr: &DeliveryTranscript,
    d: &DemandMatrix,
) -> Vec<bool> {
    let files = pl.cfg().files();
    let b = pl.block();
    (0..pl.cfg().users())
        .map(|k| {
            let mut gens = tr.stacked(pl.field(), files * b);
            let mut row = vec![0u64; files * b];
            for n in 0..files {
                let e = pl.matrix(k, n);
                for j in 0..e.cols() {
                    row.iter_mut().for_each(|x| *x = 0);
                    for i in 0..b {
                        row[n * b + i] = e.get(i, j);
                    }
                    gens.push_row(&row);
                }
            }
            crate::linalg::in_rowspan(&target_rows(d, k, files, b), &gens)
                .expect("widths agree")
        })
        .collect()
}
