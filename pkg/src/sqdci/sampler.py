"""Exact LUCJ-style state preparation and bitstring sampling.

The statevector is simulated in the fixed (n_alpha, n_beta) sector:
orbital-rotation layers exp(K) are decomposed into adjacent two-level
Givens rotations applied directly to the determinant basis, and the
density-density layer exp(iJ) is a diagonal phase. Both conserve
particle number exactly, so the state never leaves the sector.

Bitstring layout: bit 0 is leftmost; bits [0, n) hold the alpha orbital
occupations and bits [n, 2n) the beta occupations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import rng
from .errors import CapacityError, ConfigError
from .hamiltonian import Determinant, hartree_fock_determinant, sector_basis

SECTOR_DIMENSION_CAP = 10_000_000


@dataclass
class BitstringCounts:
    """Multiset of sampled bitstrings with shot counts."""

    n_qubits: int
    entries: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for key, count in self.entries.items():
            if len(key) != self.n_qubits or set(key) - {"0", "1"}:
                raise ConfigError(f"bad bitstring {key!r} for n_qubits={self.n_qubits}")
            if count < 0:
                raise ConfigError(f"negative count for {key!r}")

    @property
    def total_shots(self) -> int:
        return sum(self.entries.values())

    def merged_with(self, other: "BitstringCounts") -> "BitstringCounts":
        if other.n_qubits != self.n_qubits:
            raise ConfigError("n_qubits mismatch")
        merged = dict(self.entries)
        for key, count in other.entries.items():
            merged[key] = merged.get(key, 0) + count
        return BitstringCounts(self.n_qubits, merged)


@dataclass
class NoiseModel:
    """Independent per-bit readout flips."""

    flip_probability: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ConfigError("flip probability must be in [0, 1]")


@dataclass
class LUCJParams:
    """Layered cluster-Jastrow circuit parameters.

    Each layer is a pair (K, J): K is a real antisymmetric n x n
    orbital-rotation generator applied identically to both spins, J is a
    real symmetric 2n x 2n density-density coupling over spin-orbitals
    (None means no phase layer). ``final_rotation`` is an optional
    trailing K-type generator.
    """

    layers: list
    final_rotation: np.ndarray | None = None

    def __post_init__(self):
        checked = []
        for K, J in self.layers:
            K = np.asarray(K, dtype=float)
            if np.max(np.abs(K + K.T)) > 1e-12:
                raise ConfigError("K generator is not antisymmetric")
            if J is not None:
                J = np.asarray(J, dtype=float)
                if J.shape != (2 * K.shape[0],) * 2:
                    raise ConfigError("J must be 2n x 2n over spin-orbitals")
                if np.max(np.abs(J - J.T)) > 1e-12:
                    raise ConfigError("J coupling is not symmetric")
            checked.append((K, J))
        self.layers = checked
        if self.final_rotation is not None:
            K = np.asarray(self.final_rotation, dtype=float)
            if np.max(np.abs(K + K.T)) > 1e-12:
                raise ConfigError("final rotation is not antisymmetric")
            self.final_rotation = K

    @staticmethod
    def zero(n_orb: int, n_layers: int = 1) -> "LUCJParams":
        return LUCJParams(layers=[(np.zeros((n_orb, n_orb)), None)
                                  for _ in range(n_layers)])


@dataclass
class SectorState:
    """Normalized amplitudes over the canonical sector determinant basis."""

    n_orb: int
    n_alpha: int
    n_beta: int
    amplitudes: np.ndarray

    def basis(self) -> list[Determinant]:
        return sector_basis(self.n_orb, self.n_alpha, self.n_beta)


def determinant_to_bitstring(det: Determinant, n_orb: int) -> str:
    alpha = "".join("1" if det.alpha >> i & 1 else "0" for i in range(n_orb))
    beta = "".join("1" if det.beta >> i & 1 else "0" for i in range(n_orb))
    return alpha + beta


def bitstring_to_determinant(bits: str, n_orb: int) -> Determinant:
    if len(bits) != 2 * n_orb:
        raise ConfigError("bitstring length does not match 2 * n_orb")
    alpha = sum(1 << i for i in range(n_orb) if bits[i] == "1")
    beta = sum(1 << i for i in range(n_orb) if bits[n_orb + i] == "1")
    return Determinant(alpha, beta)


def _givens_decompose(unitary: np.ndarray):
    """QR-style elimination of exp(K) into adjacent-plane rotations.

    Returns (rotations, diagonal_signs) with G_m ... G_1 U = diag(signs),
    each rotation a tuple (upper_row, angle) acting in the plane
    (upper_row, upper_row + 1).
    """
    mat = np.array(unitary, dtype=float)
    n = mat.shape[0]
    rotations = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            if abs(mat[row, col]) < 1e-15:
                continue
            theta = np.arctan2(mat[row, col], mat[row - 1, col])
            c, s = np.cos(theta), np.sin(theta)
            upper = c * mat[row - 1] + s * mat[row]
            lower = -s * mat[row - 1] + c * mat[row]
            mat[row - 1], mat[row] = upper, lower
            rotations.append((row - 1, theta))
    signs = np.sign(np.diag(mat))
    return rotations, signs


def _apply_spin_givens(amps, dets, index, orbital, theta, spin):
    """Rotate amplitudes in the adjacent orbital plane (orbital, orbital+1)."""
    c, s = np.cos(theta), np.sin(theta)
    a_bit, b_bit = 1 << orbital, 1 << (orbital + 1)
    for i, det in enumerate(dets):
        bits = det.alpha if spin == 0 else det.beta
        # Act once per mixed pair: pick the representative with the upper
        # orbital occupied and the lower one empty.
        if not (bits & b_bit and not bits & a_bit):
            continue
        flipped = bits ^ a_bit ^ b_bit
        partner = (Determinant(flipped, det.beta) if spin == 0
                   else Determinant(det.alpha, flipped))
        j = index[partner]
        # Adjacent orbitals: no occupied orbital lies strictly between,
        # so the fermionic parity is +1.
        ci, cj = amps[i], amps[j]
        amps[i] = c * ci - s * cj
        amps[j] = s * ci + c * cj


def apply_orbital_rotation(amps: np.ndarray, dets: list[Determinant],
                           generator: np.ndarray) -> np.ndarray:
    """Apply exp(K) (same rotation on both spins) to sector amplitudes."""
    K = np.asarray(generator, dtype=float)
    if np.max(np.abs(K + K.T)) > 1e-12:
        raise ConfigError("rotation generator is not antisymmetric")
    unitary = scipy.linalg.expm(K)
    rotations, signs = _givens_decompose(unitary)
    amps = np.array(amps, dtype=complex)
    index = {d: i for i, d in enumerate(dets)}

    # U = G_1^T ... G_m^T D: apply D first, then rotations in reverse
    # with negated angles.
    flipped = [p for p, sign in enumerate(signs) if sign < 0]
    if flipped:
        for i, det in enumerate(dets):
            parity = sum((det.alpha >> p & 1) + (det.beta >> p & 1)
                         for p in flipped)
            if parity & 1:
                amps[i] = -amps[i]
    for orbital, theta in reversed(rotations):
        _apply_spin_givens(amps, dets, index, orbital, -theta, spin=0)
        _apply_spin_givens(amps, dets, index, orbital, -theta, spin=1)
    return amps


def _occupation_matrix(dets, n_orb):
    occ = np.zeros((len(dets), 2 * n_orb))
    for i, det in enumerate(dets):
        for p in range(n_orb):
            if det.alpha >> p & 1:
                occ[i, p] = 1.0
            if det.beta >> p & 1:
                occ[i, n_orb + p] = 1.0
    return occ


def lucj_state(params: LUCJParams, n_orb: int, n_alpha: int,
               n_beta: int) -> SectorState:
    """Exact sector statevector of the layered cluster-Jastrow circuit.

    Starting from the RHF determinant, each layer applies exp(K) then
    the diagonal phase exp(i sum_{p sigma, r tau} J n n); the final
    rotation, if present, is applied last. The result has unit norm.
    """
    from math import comb
    dim = comb(n_orb, n_alpha) * comb(n_orb, n_beta)
    if dim > SECTOR_DIMENSION_CAP:
        raise CapacityError(f"sector dimension {dim} over simulation bound")
    dets = sector_basis(n_orb, n_alpha, n_beta)
    occ = None
    amps = np.zeros(dim, dtype=complex)
    hf = hartree_fock_determinant(n_alpha, n_beta)
    amps[dets.index(hf)] = 1.0
    for K, J in params.layers:
        if K.shape != (n_orb, n_orb):
            raise ConfigError("K generator has wrong shape")
        amps = apply_orbital_rotation(amps, dets, K)
        if J is not None and np.any(J):
            if occ is None:
                occ = _occupation_matrix(dets, n_orb)
            phases = np.einsum("dp,pq,dq->d", occ, J, occ)
            amps = amps * np.exp(1j * phases)
    if params.final_rotation is not None:
        amps = apply_orbital_rotation(amps, dets, params.final_rotation)
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-10:
        raise ArithmeticError(f"state norm drifted to {norm}")
    return SectorState(n_orb=n_orb, n_alpha=n_alpha, n_beta=n_beta,
                       amplitudes=amps)


def state_from_ci_vector(vector: np.ndarray, n_orb: int, n_alpha: int,
                         n_beta: int) -> SectorState:
    """Wrap a CI eigenvector (over the canonical sector basis) for sampling."""
    vector = np.asarray(vector)
    from math import comb
    if len(vector) != comb(n_orb, n_alpha) * comb(n_orb, n_beta):
        raise ConfigError("CI vector has wrong sector dimension")
    amps = vector.astype(complex) / np.linalg.norm(vector)
    return SectorState(n_orb=n_orb, n_alpha=n_alpha, n_beta=n_beta,
                       amplitudes=amps)


def sample_counts(state: SectorState, shots: int, seed: int) -> BitstringCounts:
    """Multinomial sampling of |amplitude|^2 with a seeded Philox stream."""
    if shots <= 0:
        raise ConfigError("shots must be positive")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    gen = rng.stream(seed, "sample")
    draws = gen.multinomial(shots, probs)
    dets = state.basis()
    entries = {}
    for i in np.nonzero(draws)[0]:
        entries[determinant_to_bitstring(dets[i], state.n_orb)] = int(draws[i])
    return BitstringCounts(2 * state.n_orb, entries)


def apply_readout_noise(counts: BitstringCounts,
                        noise: NoiseModel) -> BitstringCounts:
    """Flip each bit of each shot independently with the model probability."""
    p = noise.flip_probability
    if p == 0.0:
        return BitstringCounts(counts.n_qubits, dict(counts.entries))
    gen = rng.stream(noise.seed, "readout-noise")
    nq = counts.n_qubits
    out: dict[str, int] = {}
    for key in sorted(counts.entries):
        count = counts.entries[key]
        bits = np.frombuffer(key.encode(), dtype=np.uint8) - ord("0")
        flips = gen.random((count, nq)) < p
        rows = bits[None, :] ^ flips.astype(np.uint8)
        uniq, mult = np.unique(rows, axis=0, return_counts=True)
        for row, m in zip(uniq, mult):
            s = "".join("1" if b else "0" for b in row)
            out[s] = out.get(s, 0) + int(m)
    return BitstringCounts(nq, out)


def lucj_params_from_ccsd(t1: np.ndarray | None, t2: np.ndarray,
                          n_layers: int) -> LUCJParams:
    """Derive layer parameters from coupled-cluster amplitudes.

    The doubles tensor is matricized as M[(i,a),(j,b)] = t2[i,j,a,b] and
    eigendecomposed; the ``n_layers`` largest-|eigenvalue| modes each
    yield an orbital-rotation generator (the antisymmetric completion of
    the reshaped eigenvector) and a rank-one density-density coupling
    weighted by the eigenvalue. Singles fold into the final rotation.

    Each retained mode expands to a conjugated pair of layers
    (rotate in, phase, rotate back) so that the first-order action on
    the reference reproduces the doubles excitations.
    """
    t2 = np.asarray(t2, dtype=float)
    nocc, nocc2, nvirt, nvirt2 = t2.shape
    if nocc != nocc2 or nvirt != nvirt2:
        raise ConfigError("t2 must have shape (occ, occ, virt, virt)")
    if np.max(np.abs(t2 - t2.transpose(1, 0, 3, 2))) > 1e-10:
        raise ConfigError("t2 lacks the required index symmetry")
    n_orb = nocc + nvirt
    n_elec = 2 * nocc

    mat = t2.transpose(0, 2, 1, 3).reshape(nocc * nvirt, nocc * nvirt)
    evals, evecs = np.linalg.eigh(mat)
    order = np.argsort(-np.abs(evals), kind="stable")
    rank = int(np.sum(np.abs(evals) > 1e-14))
    if rank == 0:
        # Zero amplitudes: all-zero layers reproduce the reference.
        layers = [(np.zeros((n_orb, n_orb)), None) for _ in range(n_layers)]
        return LUCJParams(layers=layers,
                          final_rotation=_t1_generator(t1, nocc, nvirt))
    if n_layers > rank:
        raise ConfigError(f"n_layers={n_layers} exceeds t2 rank {rank}")

    layers = []
    for mode in order[:n_layers]:
        lam = evals[mode]
        block = evecs[:, mode].reshape(nocc, nvirt)
        sym = np.zeros((n_orb, n_orb))
        sym[:nocc, nocc:] = block
        sym[nocc:, :nocc] = block.T
        svals, svecs = np.linalg.eigh(sym)
        if np.linalg.det(svecs) < 0:
            svecs = svecs.copy()
            svecs[:, 0] = -svecs[:, 0]
        gen = _real_log_orthogonal(svecs)
        ss = np.concatenate([svals, svals])
        coupling = lam * np.outer(ss, ss)
        # Uniform shift: cancels the scalar (occupied-trace) phase the
        # squared mode operator picks up on the reference; a constant
        # added to J contributes phase c * N^2 within a fixed sector.
        coupling = coupling - 2.0 * lam / n_elec**2
        layers.append((-gen, coupling))
        layers.append((gen, None))
    return LUCJParams(layers=layers,
                      final_rotation=_t1_generator(t1, nocc, nvirt))


def _t1_generator(t1, nocc, nvirt):
    if t1 is None:
        return None
    t1 = np.asarray(t1, dtype=float)
    if t1.shape != (nocc, nvirt):
        raise ConfigError("t1 must have shape (occ, virt)")
    if not np.any(t1):
        return np.zeros((nocc + nvirt,) * 2)
    gen = np.zeros((nocc + nvirt,) * 2)
    gen[nocc:, :nocc] = t1.T
    gen[:nocc, nocc:] = -t1
    return gen


def _real_log_orthogonal(orthogonal: np.ndarray) -> np.ndarray:
    """Real antisymmetric logarithm of a special orthogonal matrix."""
    log = scipy.linalg.logm(orthogonal)
    log = np.real(log)
    log = 0.5 * (log - log.T)
    if np.max(np.abs(scipy.linalg.expm(log) - orthogonal)) > 1e-8:
        raise ArithmeticError("failed to take a real logarithm of rotation")
    return log


def write_counts(counts: BitstringCounts, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n_qubits={counts.n_qubits}\n")
        for key in sorted(counts.entries):
            fh.write(f"{key} {counts.entries[key]}\n")


def read_counts(path) -> BitstringCounts:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("n_qubits="):
            raise ConfigError("counts file must start with 'n_qubits=<int>'")
        try:
            nq = int(header.split("=", 1)[1])
        except ValueError as exc:
            raise ConfigError("bad n_qubits header") from exc
        entries = {}
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"malformed counts line: {raw!r}")
            bits, count_str = parts
            if len(bits) != nq or set(bits) - {"0", "1"}:
                raise ConfigError(f"bitstring length mismatch: {raw!r}")
            try:
                count = int(count_str)
            except ValueError as exc:
                raise ConfigError(f"malformed count: {raw!r}") from exc
            if count < 0:
                raise ConfigError(f"negative count: {raw!r}")
            entries[bits] = entries.get(bits, 0) + count
    return BitstringCounts(nq, entries)
