"""Unit conventions: Hartree atomic units everywhere, except time delays.

Lengths are in bohr, energies in hartree, cross-sections in bohr^2.
Time delays are exported in attoseconds using the fixed conversion below so
that outputs are bit-reproducible.
"""

# 1 atomic time unit in attoseconds (fixed, quoted in every delay header).
AS_PER_ATOMIC_TIME = 24.188843265

# eV per hartree, used only for CLI-facing convenience echoes.
EV_PER_HARTREE = 27.211386245988


def wave_number(energy: float) -> float:
    """k = sqrt(2 E) for an electron of kinetic energy E (hartree)."""
    if energy <= 0.0:
        raise ValueError(f"wave number requires E > 0, got {energy}")
    return (2.0 * energy) ** 0.5
