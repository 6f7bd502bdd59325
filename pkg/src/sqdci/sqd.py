"""Sample-based diagonalization: filtering, recovery, batching, extension.

The self-consistent loop: iteration 1 diagonalizes batches drawn from
the Hamming-valid shots only; later iterations first repair the invalid
shots toward the current mean orbital occupations, then re-draw batches
from the combined pool. The excitation extension re-diagonalizes each
final batch eigenstate over its singles/doubles-augmented basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import CapacityError, ConfigError, EmptyValidSampleError
from .hamiltonian import (ActiveSpaceHamiltonian, Determinant,
                          occupied_orbitals,
                          single_and_double_excitations)
from .sampler import BitstringCounts, bitstring_to_determinant
from .solver import DavidsonOptions, solve_subspace

EXTENSION_DIMENSION_CAP = 50_000_000


@dataclass
class RecoveryConfig:
    """Loop shape of the self-consistent recovery protocol."""

    iterations: int = 10
    batches: int = 16
    samples_per_batch: int = 1000
    seed: int = 0
    closure: bool = True

    def __post_init__(self):
        if self.iterations < 1 or self.batches < 1 or self.samples_per_batch < 1:
            raise ConfigError("iterations, batches, samples_per_batch must be >= 1")


@dataclass
class ExtensionThresholds:
    """Amplitude thresholds for the excitation extension."""

    discard_below: float = 1e-2
    doubles_above: float = 1e-1

    def __post_init__(self):
        if not 0 <= self.discard_below <= self.doubles_above <= 1:
            raise ConfigError("need 0 <= discard_below <= doubles_above <= 1")


@dataclass
class BatchSolution:
    basis: list[Determinant]
    vector: np.ndarray
    energy: float
    shot_weight: int
    raw_dimension: int = 0  # distinct sampled determinants before closure


@dataclass
class SQDResult:
    energy: float
    energy_history: list[float]
    occupations: np.ndarray
    basis: list[Determinant]
    dimension: int
    raw_dimension: int
    batches: list[BatchSolution] = field(default_factory=list)
    n_orb: int = 0


def partition_by_hamming(counts: BitstringCounts, n_alpha: int,
                         n_beta: int) -> tuple[BitstringCounts, BitstringCounts]:
    """Split shots into sector-valid and forbidden configurations."""
    if counts.n_qubits % 2:
        raise ConfigError("counts must have an even number of qubits")
    n = counts.n_qubits // 2
    valid, invalid = {}, {}
    for key, count in counts.entries.items():
        if key[:n].count("1") == n_alpha and key[n:].count("1") == n_beta:
            valid[key] = count
        else:
            invalid[key] = count
    return (BitstringCounts(counts.n_qubits, valid),
            BitstringCounts(counts.n_qubits, invalid))


def _repair_half(bits: list[int], target: int, occ: np.ndarray,
                 gen: np.random.Generator, eps: float = 1e-6) -> None:
    weight = sum(bits)
    while weight > target:
        candidates = [p for p in range(len(bits)) if bits[p]]
        weights = np.array([1.0 - occ[p] + eps for p in candidates])
        pick = candidates[gen.choice(len(candidates), p=weights / weights.sum())]
        bits[pick] = 0
        weight -= 1
    while weight < target:
        candidates = [p for p in range(len(bits)) if not bits[p]]
        weights = np.array([occ[p] + eps for p in candidates])
        pick = candidates[gen.choice(len(candidates), p=weights / weights.sum())]
        bits[pick] = 1
        weight += 1


def recover_configurations(invalid: BitstringCounts, occupations: np.ndarray,
                           n_alpha: int, n_beta: int,
                           seed: int) -> BitstringCounts:
    """Repair forbidden shots toward the reference orbital occupations.

    Per spin half: excess set bits are cleared with probability
    proportional to (1 - <n_p> + eps), missing ones are set with
    probability proportional to (<n_p> + eps). Every output shot is
    sector-valid by construction.
    """
    occupations = np.asarray(occupations, dtype=float)
    if np.any(occupations < 0) or np.any(occupations > 1):
        raise ConfigError("occupations must lie in [0, 1]")
    n = invalid.n_qubits // 2
    gen = rng.stream(seed, "recovery")
    out: dict[str, int] = {}
    for key in sorted(invalid.entries):
        for _ in range(invalid.entries[key]):
            alpha = [1 if key[p] == "1" else 0 for p in range(n)]
            beta = [1 if key[n + p] == "1" else 0 for p in range(n)]
            _repair_half(alpha, n_alpha, occupations[:n], gen)
            _repair_half(beta, n_beta, occupations[n:], gen)
            repaired = "".join(map(str, alpha + beta))
            out[repaired] = out.get(repaired, 0) + 1
    return BitstringCounts(invalid.n_qubits, out)


def build_subspace(samples: BitstringCounts, closure: bool) -> list[Determinant]:
    """Determinant basis from sector-valid samples.

    With closure on, the basis is the Cartesian product of the unique
    alpha and beta strings observed; ordering is canonical (alpha value,
    then beta value).
    """
    if not samples.entries:
        raise ConfigError("empty sample set")
    n = samples.n_qubits // 2
    dets = [bitstring_to_determinant(key, n) for key in samples.entries]
    if not closure:
        return sorted(set(dets))
    alphas = sorted({d.alpha for d in dets})
    betas = sorted({d.beta for d in dets})
    return [Determinant(a, b) for a in alphas for b in betas]


def _empirical_occupations(counts: BitstringCounts) -> np.ndarray:
    total = counts.total_shots
    occ = np.zeros(counts.n_qubits)
    for key, count in counts.entries.items():
        occ += count * np.array([1.0 if c == "1" else 0.0 for c in key])
    return occ / total


def _eigenvector_occupations(basis, vector, n_orb):
    occ = np.zeros(2 * n_orb)
    weights = np.abs(np.asarray(vector)) ** 2
    for det, w in zip(basis, weights):
        for p in occupied_orbitals(det.alpha):
            occ[p] += w
        for p in occupied_orbitals(det.beta):
            occ[n_orb + p] += w
    return occ


def _draw_batch(counts: BitstringCounts, size: int,
                gen: np.random.Generator) -> BitstringCounts:
    """Weighted draw without replacement of distinct configurations."""
    keys = sorted(counts.entries)
    weights = np.array([counts.entries[k] for k in keys], dtype=float)
    if len(keys) <= size:
        return BitstringCounts(counts.n_qubits, dict(counts.entries))
    picks = gen.choice(len(keys), size=size, replace=False,
                       p=weights / weights.sum())
    entries = {keys[i]: counts.entries[keys[i]] for i in sorted(picks)}
    return BitstringCounts(counts.n_qubits, entries)


def sqd_ground_state(ham: ActiveSpaceHamiltonian, counts: BitstringCounts,
                     cfg: RecoveryConfig,
                     solver_opts: DavidsonOptions | None = None) -> SQDResult:
    """Run the full recovery/batching/diagonalization loop."""
    if counts.total_shots == 0:
        raise ConfigError("counts are empty")
    if counts.n_qubits != 2 * ham.n_orb:
        raise ConfigError("counts qubit number does not match Hamiltonian")
    valid, invalid = partition_by_hamming(counts, ham.n_alpha, ham.n_beta)
    if valid.total_shots == 0:
        raise EmptyValidSampleError(
            "no sampled configuration has the correct Hamming weights")

    occupations = _empirical_occupations(valid)
    history: list[float] = []
    batches: list[BatchSolution] = []
    best: BatchSolution | None = None

    for iteration in range(1, cfg.iterations + 1):
        if iteration == 1 or invalid.total_shots == 0:
            pool = valid
        else:
            recovered = recover_configurations(
                invalid, occupations, ham.n_alpha, ham.n_beta,
                seed=rng.stream(cfg.seed, "recover-seed", iteration)
                .integers(2**63))
            pool = valid.merged_with(recovered)

        batches = []
        for b in range(cfg.batches):
            gen = rng.stream(cfg.seed, "batch", iteration, b)
            batch_counts = _draw_batch(pool, cfg.samples_per_batch, gen)
            basis = build_subspace(batch_counts, cfg.closure)
            solved = solve_subspace(ham, basis, solver_opts)
            batches.append(BatchSolution(basis=solved.basis,
                                         vector=solved.vector,
                                         energy=solved.energy,
                                         shot_weight=batch_counts.total_shots,
                                         raw_dimension=len(batch_counts.entries)))
        best = min(batches, key=lambda s: s.energy)
        history.append(best.energy)
        total_weight = sum(s.shot_weight for s in batches)
        occupations = sum(
            (s.shot_weight / total_weight)
            * _eigenvector_occupations(s.basis, s.vector, ham.n_orb)
            for s in batches)
        occupations = np.clip(occupations, 0.0, 1.0)

    return SQDResult(energy=best.energy, energy_history=history,
                     occupations=_eigenvector_occupations(
                         best.basis, best.vector, ham.n_orb),
                     basis=best.basis, dimension=len(best.basis),
                     raw_dimension=best.raw_dimension, batches=batches,
                     n_orb=ham.n_orb)


def extend_subspace(eigenvector: np.ndarray, basis: list[Determinant],
                    thresholds: ExtensionThresholds,
                    n_orb: int) -> list[Determinant]:
    """Excitation extension of a subspace eigenstate.

    Keeps configurations with |amplitude| >= discard_below, adds all
    their single excitations, and all double excitations of those with
    |amplitude| > doubles_above; the result is deduplicated and stays in
    the particle-number sector.
    """
    eigenvector = np.asarray(eigenvector)
    if len(eigenvector) != len(basis):
        raise ConfigError("eigenvector/basis dimension mismatch")
    retained = [d for d, c in zip(basis, eigenvector)
                if abs(c) >= thresholds.discard_below]
    out = set(retained)
    for det, coeff in zip(basis, eigenvector):
        if abs(coeff) < thresholds.discard_below:
            continue
        if abs(coeff) > thresholds.doubles_above:
            out.update(single_and_double_excitations(det, n_orb))
        else:
            out.update(_singles_only(det, n_orb))
    return sorted(out)


def _singles_only(det: Determinant, n_orb: int) -> list[Determinant]:
    occ_a = occupied_orbitals(det.alpha)
    occ_b = occupied_orbitals(det.beta)
    vir_a = [p for p in range(n_orb) if not det.alpha >> p & 1]
    vir_b = [p for p in range(n_orb) if not det.beta >> p & 1]
    singles = [Determinant(det.alpha ^ (1 << h) ^ (1 << p), det.beta)
               for h in occ_a for p in vir_a]
    singles += [Determinant(det.alpha, det.beta ^ (1 << h) ^ (1 << p))
                for h in occ_b for p in vir_b]
    return singles


def ext_sqd(ham: ActiveSpaceHamiltonian, prior: SQDResult,
            thresholds: ExtensionThresholds | None = None,
            batches: int | None = None,
            solver_opts: DavidsonOptions | None = None,
            dimension_cap: int = EXTENSION_DIMENSION_CAP) -> SQDResult:
    """Excitation-extended re-diagonalization of the final SQD batches.

    Each batch eigenstate is extended independently (single iteration,
    no recovery); every extension includes the prior winning basis, so
    the best extended energy cannot exceed the prior energy.
    """
    if not prior.batches:
        raise ConfigError("prior result carries no batch eigenstates")
    thresholds = thresholds or ExtensionThresholds()
    pool = prior.batches if batches is None else prior.batches[:batches]
    solutions = []
    for batch in pool:
        extended = set(extend_subspace(batch.vector, batch.basis,
                                       thresholds, ham.n_orb))
        extended.update(batch.basis)
        extended.update(prior.basis)
        if len(extended) > dimension_cap:
            raise CapacityError(
                f"extended dimension {len(extended)} exceeds cap {dimension_cap}")
        ext_basis = sorted(extended)
        solved = solve_subspace(ham, ext_basis, solver_opts)
        solutions.append(BatchSolution(basis=solved.basis,
                                       vector=solved.vector,
                                       energy=solved.energy,
                                       shot_weight=batch.shot_weight))
    best = min(solutions, key=lambda s: s.energy)
    return SQDResult(energy=best.energy, energy_history=[best.energy],
                     occupations=_eigenvector_occupations(
                         best.basis, best.vector, ham.n_orb),
                     basis=best.basis, dimension=len(best.basis),
                     raw_dimension=len(best.basis), batches=solutions,
                     n_orb=ham.n_orb)
