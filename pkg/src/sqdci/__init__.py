"""Selected-CI engine with sample-based quantum diagonalization.

Core objects live in submodules:

* :mod:`sqdci.hamiltonian` -- determinants, active-space Hamiltonians,
  Slater-Condon matrix elements and projected matvecs.
* :mod:`sqdci.fcidump` -- FCIDUMP reader/writer.
* :mod:`sqdci.solver` -- Davidson and dense eigensolvers, FCI driver.
* :mod:`sqdci.sampler` -- LUCJ statevector simulation, multinomial shot
  sampling, readout noise, counts-file I/O.
* :mod:`sqdci.sqd` -- configuration recovery, batching, subspace
  diagonalization and the excitation extension (Ext-SQD).
* :mod:`sqdci.baselines` -- heat-bath CI and its excitation extension.
* :mod:`sqdci.activespace` -- orbital ranking and inside-out selection.
* :mod:`sqdci.cli` -- command-line pipeline.
"""

__version__ = "0.1.0"
