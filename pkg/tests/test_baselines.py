import pytest

from conftest import random_hamiltonian
from sqdci.baselines import HCIOptions, ext_hci, hci_variational
from sqdci.errors import ConfigError
from sqdci.hamiltonian import diagonal_element
from sqdci.solver import fci_ground_state
from sqdci.sqd import ExtensionThresholds, extend_subspace


def test_huge_epsilon_keeps_hf_only(ham_4e4o):
    result = hci_variational(ham_4e4o, HCIOptions(epsilon1=1e6))
    assert result.dimension == 1
    assert result.energy == pytest.approx(
        diagonal_element(ham_4e4o, ham_4e4o.hf_determinant()), abs=1e-12)


def test_zero_epsilon_reaches_fci(ham_2e2o, ham_4e4o):
    for ham in (ham_2e2o, ham_4e4o):
        result = hci_variational(ham, HCIOptions(epsilon1=0.0))
        exact = fci_ground_state(ham)
        assert result.energy == pytest.approx(exact.energy, abs=1e-10)


def test_energy_monotone_in_epsilon(ham_4e4o):
    energies = [hci_variational(ham_4e4o, HCIOptions(epsilon1=eps)).energy
                for eps in (1e-1, 1e-3, 1e-5, 0.0)]
    for tighter, looser in zip(energies[1:], energies):
        assert tighter <= looser + 1e-12


def test_hci_variational_above_fci(ham_4e4o):
    exact = fci_ground_state(ham_4e4o)
    result = hci_variational(ham_4e4o, HCIOptions(epsilon1=1e-2))
    assert result.energy >= exact.energy - 1e-12


def test_hci_diagnostics():
    ham = random_hamiltonian(4, 2, 2, seed=31)
    result = hci_variational(ham, HCIOptions(epsilon1=1e-3))
    assert result.diagnostics["epsilon1"] == 1e-3
    assert result.diagnostics["hci_sweeps"] >= 1


def test_hci_options_validation():
    with pytest.raises(ConfigError):
        HCIOptions(epsilon1=-1.0)
    with pytest.raises(ConfigError):
        HCIOptions(energy_tol=0.0)


def test_ext_hci_reaches_fci_on_small_sector(ham_2e2o):
    prior = hci_variational(ham_2e2o, HCIOptions(epsilon1=1e-1))
    result = ext_hci(ham_2e2o, prior, ExtensionThresholds(0.0, 0.0))
    exact = fci_ground_state(ham_2e2o)
    assert result.energy == pytest.approx(exact.energy, abs=1e-9)


def test_ext_hci_noop_thresholds(ham_4e4o):
    prior = hci_variational(ham_4e4o, HCIOptions(epsilon1=1e-2))
    result = ext_hci(ham_4e4o, prior, ExtensionThresholds(1.0, 1.0))
    assert result.energy == pytest.approx(prior.energy, abs=1e-12)


def test_ext_hci_never_above_hci(ham_4e4o):
    prior = hci_variational(ham_4e4o, HCIOptions(epsilon1=1e-2))
    result = ext_hci(ham_4e4o, prior)
    assert result.energy <= prior.energy + 1e-12
    hf_energy = diagonal_element(ham_4e4o, ham_4e4o.hf_determinant())
    assert prior.energy <= hf_energy + 1e-12


def test_extension_code_path_shared(ham_4e4o):
    # Both extension consumers call the same function; identical inputs
    # must give identical extended spaces.
    prior = hci_variational(ham_4e4o, HCIOptions(epsilon1=1e-2))
    a = extend_subspace(prior.vector, prior.basis, ExtensionThresholds(),
                        ham_4e4o.n_orb)
    b = extend_subspace(prior.vector, prior.basis, ExtensionThresholds(),
                        ham_4e4o.n_orb)
    assert a == b
