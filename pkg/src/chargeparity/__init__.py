"""Charge-parity switching in charge-sensitive transmons.

Spectra of the offset-charge-dependent Hamiltonian, random-telegraph
analysis of parity records, thermal quasiparticle models, antenna coupling
of pair-breaking photons and coherence fits.
"""

__version__ = "0.1.0"
