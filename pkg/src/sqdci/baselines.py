"""Heat-bath CI and its excitation extension, used as classical benchmarks.

Only the variational stage is implemented (no perturbative correction);
the extension step shares :func:`sqdci.sqd.extend_subspace` with the
sampled-subspace pipeline so both methods densify identically.
"""

from __future__ import annotations

from dataclasses import dataclass


from .errors import CapacityError, ConfigError
from .hamiltonian import ActiveSpaceHamiltonian, connected_determinants
from .solver import DavidsonOptions, SubspaceResult, solve_subspace
from .sqd import ExtensionThresholds, extend_subspace

HCI_DIMENSION_CAP = 2_000_000


@dataclass
class HCIOptions:
    epsilon1: float = 1e-4
    max_iterations: int = 50
    energy_tol: float = 1e-9

    def __post_init__(self):
        if self.epsilon1 < 0:
            raise ConfigError("epsilon1 must be nonnegative")
        if self.energy_tol <= 0:
            raise ConfigError("energy_tol must be positive")


def hci_variational(ham: ActiveSpaceHamiltonian,
                    opts: HCIOptions | None = None,
                    solver_opts: DavidsonOptions | None = None) -> SubspaceResult:
    """Variational heat-bath selection from the HF determinant.

    Each sweep adds every determinant coupled to the current wavefunction
    with |H_{d'd} c_d| >= epsilon1, then re-diagonalizes; stops when the
    space is stable or the energy change drops below energy_tol.
    """
    opts = opts or HCIOptions()
    basis = [ham.hf_determinant()]
    current = solve_subspace(ham, basis, solver_opts)
    sweeps = 0
    for sweeps in range(1, opts.max_iterations + 1):
        in_basis = set(current.basis)
        new = set()
        for det, coeff in zip(current.basis, current.vector):
            amp = abs(coeff)
            if amp < 1e-14:
                continue
            for other, _ in connected_determinants(ham, det,
                                                   opts.epsilon1 / amp):
                if other not in in_basis:
                    new.add(other)
        if not new:
            break
        basis = sorted(in_basis | new)
        if len(basis) > HCI_DIMENSION_CAP:
            raise CapacityError(f"HCI space grew past {HCI_DIMENSION_CAP}")
        previous_energy = current.energy
        current = solve_subspace(ham, basis, solver_opts)
        if abs(previous_energy - current.energy) < opts.energy_tol:
            break
    current.diagnostics["hci_sweeps"] = sweeps
    current.diagnostics["epsilon1"] = opts.epsilon1
    return current


def ext_hci(ham: ActiveSpaceHamiltonian, prior: SubspaceResult,
            thresholds: ExtensionThresholds | None = None,
            solver_opts: DavidsonOptions | None = None,
            dimension_cap: int = 50_000_000) -> SubspaceResult:
    """Excitation extension of an HCI ground state (single re-diagonalization)."""
    thresholds = thresholds or ExtensionThresholds()
    extended = set(extend_subspace(prior.vector, prior.basis, thresholds,
                                   ham.n_orb))
    extended.update(prior.basis)
    if len(extended) > dimension_cap:
        raise CapacityError(
            f"extended dimension {len(extended)} exceeds cap {dimension_cap}")
    result = solve_subspace(ham, sorted(extended), solver_opts)
    result.diagnostics["extended_from"] = len(prior.basis)
    return result
