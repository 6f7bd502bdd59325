"""Unit conventions.

All energies are Hartree internally; eV appears only at reporting
boundaries.
"""

# CODATA value, eV per Hartree.
EV_PER_HARTREE = 27.211386245988


def hartree_to_ev(energy):
    return energy * EV_PER_HARTREE
