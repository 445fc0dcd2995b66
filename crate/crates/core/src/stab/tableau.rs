//! Destabilizer tableau with bit-packed rows.
//!
//! Rows `0..n` hold destabilizers, rows `n..2n` stabilizers and row `2n` is
//! scratch space for deterministic measurements. Each row stores its X and Z
//! bits in `words = ceil(n / 64)` machine words plus one sign bit. Global
//! phase is not tracked.

use num_complex::Complex64;
use rand::Rng;

use super::dense::{DenseState, MAX_DENSE_QUBITS};
use super::pauli::{CliffordGate, Pauli};
use super::StabError;

/// Initial product state of a fresh register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    AllZero,
    AllPlus,
}

/// Outcome of a computational-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: bool,
    pub deterministic: bool,
}

/// A signed Pauli string, used when building or inspecting tableaux.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliRow {
    pub negative: bool,
    pub paulis: Vec<Pauli>,
}

#[derive(Clone, Debug)]
pub struct StabilizerRegister {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
    sites: Vec<u32>,
    oracle: Option<DenseState>,
}

#[inline]
fn bit(q: usize) -> (usize, u64) {
    (q >> 6, 1u64 << (q & 63))
}

impl StabilizerRegister {
    pub fn new(n: usize, init: InitialState) -> Result<Self, StabError> {
        if n == 0 {
            return Err(StabError::EmptyRegister);
        }
        let words = n.div_ceil(64);
        let rows = 2 * n + 1;
        let mut reg = Self {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
            sites: vec![0; n],
            oracle: None,
        };
        for q in 0..n {
            let (w, m) = bit(q);
            match init {
                // destabilizer X_q, stabilizer Z_q
                InitialState::AllZero => {
                    reg.xs[q * words + w] |= m;
                    reg.zs[(q + n) * words + w] |= m;
                }
                InitialState::AllPlus => {
                    reg.zs[q * words + w] |= m;
                    reg.xs[(q + n) * words + w] |= m;
                }
            }
        }
        Ok(reg)
    }

    /// Same as [`new`](Self::new) but shadowed by a dense state vector that
    /// replays every operation; see [`dense_oracle`](Self::dense_oracle).
    pub fn new_traced(n: usize, init: InitialState) -> Result<Self, StabError> {
        let mut reg = Self::new(n, init)?;
        reg.oracle = Some(match init {
            InitialState::AllZero => DenseState::zero(n)?,
            InitialState::AllPlus => DenseState::plus(n)?,
        });
        Ok(reg)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_traced(&self) -> bool {
        self.oracle.is_some()
    }

    pub fn site(&self, q: usize) -> u32 {
        self.sites[q]
    }

    pub fn sites(&self) -> &[u32] {
        &self.sites
    }

    pub fn set_site(&mut self, q: usize, site: u32) -> Result<(), StabError> {
        self.check_qubit(q)?;
        self.sites[q] = site;
        Ok(())
    }

    pub fn set_all_sites(&mut self, site: u32) {
        self.sites.iter_mut().for_each(|s| *s = site);
    }

    fn check_qubit(&self, q: usize) -> Result<(), StabError> {
        if q >= self.n {
            Err(StabError::QubitOutOfRange {
                qubit: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn apply_gate(&mut self, g: CliffordGate) -> Result<(), StabError> {
        for q in g.qubits() {
            self.check_qubit(q)?;
        }
        match g {
            CliffordGate::Cz(a, b) if a == b => {
                return Err(StabError::CoincidentOperands { qubit: a })
            }
            CliffordGate::Cnot { control, target } if control == target => {
                return Err(StabError::CoincidentOperands { qubit: control })
            }
            _ => {}
        }
        self.apply_gate_unchecked(g);
        Ok(())
    }

    pub(crate) fn apply_gate_unchecked(&mut self, g: CliffordGate) {
        let rows = 2 * self.n;
        let wn = self.words;
        match g {
            CliffordGate::Hadamard(q) => {
                let (w, m) = bit(q);
                for r in 0..rows {
                    let i = r * wn + w;
                    let (x, z) = (self.xs[i] & m, self.zs[i] & m);
                    if x != 0 && z != 0 {
                        self.signs[r] ^= true;
                    }
                    if (x != 0) != (z != 0) {
                        self.xs[i] ^= m;
                        self.zs[i] ^= m;
                    }
                }
            }
            CliffordGate::Phase(q) => {
                let (w, m) = bit(q);
                for r in 0..rows {
                    let i = r * wn + w;
                    if self.xs[i] & m != 0 {
                        if self.zs[i] & m != 0 {
                            self.signs[r] ^= true;
                        }
                        self.zs[i] ^= m;
                    }
                }
            }
            CliffordGate::PhaseInv(q) => {
                let (w, m) = bit(q);
                for r in 0..rows {
                    let i = r * wn + w;
                    if self.xs[i] & m != 0 {
                        if self.zs[i] & m == 0 {
                            self.signs[r] ^= true;
                        }
                        self.zs[i] ^= m;
                    }
                }
            }
            CliffordGate::Cnot { control, target } => {
                let (wc, mc) = bit(control);
                let (wt, mt) = bit(target);
                for r in 0..rows {
                    let ic = r * wn + wc;
                    let it = r * wn + wt;
                    let xc = self.xs[ic] & mc != 0;
                    let zc = self.zs[ic] & mc != 0;
                    let xt = self.xs[it] & mt != 0;
                    let zt = self.zs[it] & mt != 0;
                    if xc && zt && (xt == zc) {
                        self.signs[r] ^= true;
                    }
                    if xc {
                        self.xs[it] ^= mt;
                    }
                    if zt {
                        self.zs[ic] ^= mc;
                    }
                }
            }
            CliffordGate::Cz(a, b) => {
                let (wa, ma) = bit(a);
                let (wb, mb) = bit(b);
                for r in 0..rows {
                    let ia = r * wn + wa;
                    let ib = r * wn + wb;
                    let xa = self.xs[ia] & ma != 0;
                    let za = self.zs[ia] & ma != 0;
                    let xb = self.xs[ib] & mb != 0;
                    let zb = self.zs[ib] & mb != 0;
                    if xa && xb && (za != zb) {
                        self.signs[r] ^= true;
                    }
                    if xb {
                        self.zs[ia] ^= ma;
                    }
                    if xa {
                        self.zs[ib] ^= mb;
                    }
                }
            }
        }
        if let Some(o) = self.oracle.as_mut() {
            o.apply_gate(g);
        }
    }

    /// Applies a Pauli operator: only sign bits change.
    pub fn apply_pauli(&mut self, p: Pauli, q: usize) -> Result<(), StabError> {
        self.check_qubit(q)?;
        self.apply_pauli_unchecked(p, q);
        Ok(())
    }

    pub(crate) fn apply_pauli_unchecked(&mut self, p: Pauli, q: usize) {
        if p == Pauli::I {
            return;
        }
        let (px, pz) = p.bits();
        let (w, m) = bit(q);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let x = self.xs[i] & m != 0;
            let z = self.zs[i] & m != 0;
            if (x && pz) ^ (z && px) {
                self.signs[r] ^= true;
            }
        }
        if let Some(o) = self.oracle.as_mut() {
            o.apply_pauli(p, q);
        }
    }

    /// `row h <- row i * row h`, with the sign computed from the phase
    /// exponents of the single-qubit products.
    fn rowsum(&mut self, h: usize, i: usize) {
        let wn = self.words;
        let mut pos: u32 = 0;
        let mut neg: u32 = 0;
        for w in 0..wn {
            let x1 = self.xs[i * wn + w];
            let z1 = self.zs[i * wn + w];
            let x2 = self.xs[h * wn + w];
            let z2 = self.zs[h * wn + w];
            let p = (x1 & z1 & z2 & !x2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
            let n = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
            pos += p.count_ones();
            neg += n.count_ones();
            self.xs[h * wn + w] = x1 ^ x2;
            self.zs[h * wn + w] = z1 ^ z2;
        }
        let total =
            2 * (self.signs[h] as i64) + 2 * (self.signs[i] as i64) + pos as i64 - neg as i64;
        let t = total.rem_euclid(4);
        debug_assert!(t == 0 || t == 2, "rowsum of anticommuting rows");
        self.signs[h] = t == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let wn = self.words;
        self.xs.copy_within(src * wn..(src + 1) * wn, dst * wn);
        self.zs.copy_within(src * wn..(src + 1) * wn, dst * wn);
        self.signs[dst] = self.signs[src];
    }

    fn clear_row(&mut self, r: usize) {
        let wn = self.words;
        self.xs[r * wn..(r + 1) * wn].fill(0);
        self.zs[r * wn..(r + 1) * wn].fill(0);
        self.signs[r] = false;
    }

    fn x_bit(&self, r: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.xs[r * self.words + w] & m != 0
    }

    fn z_bit(&self, r: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.zs[r * self.words + w] & m != 0
    }

    /// Outcome a Z measurement of `q` would give, if it is determined.
    pub fn peek_z(&mut self, q: usize) -> Result<Option<bool>, StabError> {
        self.check_qubit(q)?;
        let n = self.n;
        if (n..2 * n).any(|r| self.x_bit(r, q)) {
            return Ok(None);
        }
        Ok(Some(self.deterministic_outcome(q)))
    }

    fn deterministic_outcome(&mut self, q: usize) -> bool {
        let n = self.n;
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.x_bit(i, q) {
                self.rowsum(scratch, i + n);
            }
        }
        self.signs[scratch]
    }

    /// Computational-basis measurement. Deterministic outcomes draw nothing
    /// from `rng`.
    pub fn measure_z<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        rng: &mut R,
    ) -> Result<Measurement, StabError> {
        self.check_qubit(q)?;
        let n = self.n;
        let pivot = (n..2 * n).find(|&r| self.x_bit(r, q));
        let m = match pivot {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && i != p - n && self.x_bit(i, q) {
                        self.rowsum(i, p);
                    }
                }
                self.copy_row(p - n, p);
                self.clear_row(p);
                let (w, m) = bit(q);
                self.zs[p * self.words + w] |= m;
                let outcome: bool = rng.random();
                self.signs[p] = outcome;
                Measurement {
                    outcome,
                    deterministic: false,
                }
            }
            None => Measurement {
                outcome: self.deterministic_outcome(q),
                deterministic: true,
            },
        };
        if let Some(o) = self.oracle.as_mut() {
            o.project(q, m.outcome);
        }
        Ok(m)
    }

    fn row(&self, r: usize) -> PauliRow {
        PauliRow {
            negative: self.signs[r],
            paulis: (0..self.n)
                .map(|q| Pauli::from_bits(self.x_bit(r, q), self.z_bit(r, q)))
                .collect(),
        }
    }

    pub fn stabilizers(&self) -> Vec<PauliRow> {
        (self.n..2 * self.n).map(|r| self.row(r)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliRow> {
        (0..self.n).map(|r| self.row(r)).collect()
    }

    /// Tensor product; `other`'s qubits follow this register's qubits.
    pub fn join(&self, other: &StabilizerRegister) -> Result<StabilizerRegister, StabError> {
        let n = self.n + other.n;
        let words = n.div_ceil(64);
        let rows = 2 * n + 1;
        let mut out = StabilizerRegister {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
            sites: self.sites.iter().chain(&other.sites).copied().collect(),
            oracle: None,
        };
        let mut place =
            |src: &StabilizerRegister, src_row: usize, dst_row: usize, offset: usize| {
                for q in 0..src.n {
                    let (w, m) = bit(q + offset);
                    if src.x_bit(src_row, q) {
                        out.xs[dst_row * words + w] |= m;
                    }
                    if src.z_bit(src_row, q) {
                        out.zs[dst_row * words + w] |= m;
                    }
                }
                out.signs[dst_row] = src.signs[src_row];
            };
        for r in 0..self.n {
            place(self, r, r, 0);
            place(self, self.n + r, n + r, 0);
        }
        for r in 0..other.n {
            place(other, r, self.n + r, self.n);
            place(other, other.n + r, n + self.n + r, self.n);
        }
        if let (Some(a), Some(b)) = (&self.oracle, &other.oracle) {
            if n <= MAX_DENSE_QUBITS {
                out.oracle = Some(a.join(b)?);
            }
        }
        Ok(out)
    }

    /// Returns the state of the qubits in `keep` (new qubit `i` is old qubit
    /// `keep[i]`). Fails unless the rest of the register is in a product
    /// state with them.
    pub fn extract(&self, keep: &[usize]) -> Result<StabilizerRegister, StabError> {
        let n = self.n;
        let mut is_kept = vec![false; n];
        for &q in keep {
            self.check_qubit(q)?;
            if is_kept[q] {
                return Err(StabError::CoincidentOperands { qubit: q });
            }
            is_kept[q] = true;
        }
        if keep.is_empty() {
            return Err(StabError::EmptyRegister);
        }
        let mut work = self.clone();
        work.oracle = None;
        // eliminate support on dropped qubits
        let mut pivoted = vec![false; n];
        for q in (0..n).filter(|&q| !is_kept[q]) {
            for use_x in [true, false] {
                let has = |w: &StabilizerRegister, r: usize| {
                    if use_x {
                        w.x_bit(n + r, q)
                    } else {
                        w.z_bit(n + r, q)
                    }
                };
                let Some(p) = (0..n).find(|&r| !pivoted[r] && has(&work, r)) else {
                    continue;
                };
                pivoted[p] = true;
                for r in (0..n).filter(|&r| !pivoted[r]) {
                    if has(&work, r) {
                        work.rowsum(n + r, n + p);
                    }
                }
            }
        }
        let free: Vec<usize> = (0..n).filter(|&r| !pivoted[r]).collect();
        if free.len() != keep.len() {
            return Err(StabError::NotSeparable);
        }
        let stabs: Vec<PauliRow> = free
            .iter()
            .map(|&r| PauliRow {
                negative: work.signs[n + r],
                paulis: keep
                    .iter()
                    .map(|&q| Pauli::from_bits(work.x_bit(n + r, q), work.z_bit(n + r, q)))
                    .collect(),
            })
            .collect();
        let mut out = Self::from_stabilizers(&stabs)?;
        out.sites = keep.iter().map(|&q| self.sites[q]).collect();
        if let Some(o) = &self.oracle {
            out.oracle = Some(o.extract(keep)?);
        }
        Ok(out)
    }

    /// Builds a register from `n` independent, commuting stabilizer
    /// generators on `n` qubits, completing them with destabilizers.
    pub fn from_stabilizers(stabs: &[PauliRow]) -> Result<StabilizerRegister, StabError> {
        let k = stabs.len();
        if k == 0 {
            return Err(StabError::EmptyRegister);
        }
        if stabs.iter().any(|s| s.paulis.len() != k) {
            return Err(StabError::NotSeparable);
        }
        let mut reg = Self::new(k, InitialState::AllZero)?;
        let wn = reg.words;
        for r in 0..2 * k {
            reg.clear_row(r);
        }
        for (i, s) in stabs.iter().enumerate() {
            let r = k + i;
            for (q, p) in s.paulis.iter().enumerate() {
                let (x, z) = p.bits();
                let (w, m) = bit(q);
                if x {
                    reg.xs[r * wn + w] |= m;
                }
                if z {
                    reg.zs[r * wn + w] |= m;
                }
            }
            reg.signs[r] = s.negative;
        }
        for i in 0..k {
            for j in i + 1..k {
                if reg.symp(k + i, k + j) {
                    return Err(StabError::NonCommuting);
                }
            }
        }
        let destabs = symplectic_complement(&reg, k)?;
        for (i, d) in destabs.into_iter().enumerate() {
            reg.xs[i * wn..(i + 1) * wn].copy_from_slice(&d[..wn]);
            reg.zs[i * wn..(i + 1) * wn].copy_from_slice(&d[wn..]);
        }
        Ok(reg)
    }

    /// Dense amplitudes of the shadow state (traced registers only).
    pub fn dense_oracle(&self) -> Result<Vec<Complex64>, StabError> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(StabError::OracleTooLarge {
                n: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        self.oracle
            .as_ref()
            .map(|o| o.amplitudes().to_vec())
            .ok_or(StabError::NotTraced)
    }

    pub fn dense_state(&self) -> Option<&DenseState> {
        self.oracle.as_ref()
    }

    fn symp(&self, a: usize, b: usize) -> bool {
        let wn = self.words;
        let mut acc = 0u32;
        for w in 0..wn {
            acc += ((self.xs[a * wn + w] & self.zs[b * wn + w])
                ^ (self.zs[a * wn + w] & self.xs[b * wn + w]))
                .count_ones();
        }
        acc & 1 == 1
    }

    /// Checks the tableau invariants: stabilizers commute pairwise,
    /// destabilizers commute pairwise, and destabilizer `i` anticommutes
    /// exactly with stabilizer `i`.
    pub fn is_consistent(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if self.symp(n + i, n + j) || self.symp(i, j) {
                    return false;
                }
                if self.symp(i, n + j) != (i == j) {
                    return false;
                }
            }
        }
        true
    }

    /// GF(2) rank of the full `2n x 2n` generator matrix.
    pub fn generator_rank(&self) -> usize {
        let wn = self.words;
        let mut rows: Vec<Vec<u64>> = (0..2 * self.n)
            .map(|r| {
                let mut v = self.xs[r * wn..(r + 1) * wn].to_vec();
                v.extend_from_slice(&self.zs[r * wn..(r + 1) * wn]);
                v
            })
            .collect();
        gf2_rank(&mut rows, 2 * wn * 64)
    }
}

fn gf2_rank(rows: &mut [Vec<u64>], cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let (w, m) = (c >> 6, 1u64 << (c & 63));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & m != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & m != 0 {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// Destabilizers for the stabilizer rows `k..2k` of `reg`, as packed
/// `[x words.., z words..]` vectors.
fn symplectic_complement(reg: &StabilizerRegister, k: usize) -> Result<Vec<Vec<u64>>, StabError> {
    let wn = reg.words;
    let cols = 2 * k;
    // rows of [S~ | I] where S~ swaps the x and z halves of each stabilizer
    let aug_words = (cols + k).div_ceil(64);
    let set = |v: &mut Vec<u64>, c: usize| v[c >> 6] |= 1u64 << (c & 63);
    let get = |v: &Vec<u64>, c: usize| v[c >> 6] & (1u64 << (c & 63)) != 0;
    let mut aug: Vec<Vec<u64>> = (0..k)
        .map(|j| {
            let mut v = vec![0u64; aug_words];
            for q in 0..k {
                if reg.z_bit(k + j, q) {
                    set(&mut v, q);
                }
                if reg.x_bit(k + j, q) {
                    set(&mut v, k + q);
                }
            }
            set(&mut v, cols + j);
            v
        })
        .collect();
    let mut pivots = Vec::with_capacity(k);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..k).find(|&r| get(&aug[r], c)) else {
            continue;
        };
        aug.swap(rank, p);
        let pivot = aug[rank].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != rank && get(row, c) {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == k {
            break;
        }
    }
    if rank != k {
        return Err(StabError::DependentGenerators);
    }
    // d_i = sum_l E[l][i] e_{pivot_l}; column c < k is an x bit, else z bit
    let mut destabs: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            let mut d = vec![0u64; 2 * wn];
            for (l, &c) in pivots.iter().enumerate() {
                if get(&aug[l], cols + i) {
                    let (w, m) = bit(c % k);
                    let off = if c < k { 0 } else { wn };
                    d[off + w] ^= m;
                }
            }
            d
        })
        .collect();
    let symp = |a: &[u64], b: &[u64]| {
        let mut acc = 0u32;
        for w in 0..wn {
            acc += ((a[w] & b[wn + w]) ^ (a[wn + w] & b[w])).count_ones();
        }
        acc & 1 == 1
    };
    let stab = |j: usize| {
        let mut v = reg.xs[(k + j) * wn..(k + j + 1) * wn].to_vec();
        v.extend_from_slice(&reg.zs[(k + j) * wn..(k + j + 1) * wn]);
        v
    };
    for i in 0..k {
        for j in 0..i {
            if symp(&destabs[i], &destabs[j]) {
                let s = stab(j);
                destabs[i].iter_mut().zip(&s).for_each(|(a, b)| *a ^= b);
            }
        }
    }
    Ok(destabs)
}
