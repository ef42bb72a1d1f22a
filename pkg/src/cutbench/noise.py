"""Three-parameter stochastic noise model.

After every gate a depolarizing event fires with probability ``p1`` (one-qubit
gates) or ``p2`` (two-qubit gates) and applies a uniformly random
non-identity Pauli on the touched qubits.  Every recorded measurement result
flips with probability ``p_ro``.

The ``brisbane-like`` preset is a hand-picked stand-in for a current
superconducting device, not calibration data.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_ro: float = 0.0
    preset_name: str = "custom"

    def __post_init__(self):
        for name in ("p1", "p2", "p_ro"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} is not a probability")

    @property
    def is_ideal(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_ro == 0.0


PRESETS = {
    "brisbane-like": NoiseModel(p1=3e-4, p2=8e-3, p_ro=1.5e-2, preset_name="brisbane-like"),
    "ideal": NoiseModel(preset_name="ideal"),
}


def get_noise(name: str | NoiseModel | None) -> NoiseModel | None:
    """Resolve a preset name; ``None`` and ``"none"`` mean noiseless."""
    if name is None or isinstance(name, NoiseModel):
        return name
    if name.lower() == "none":
        return None
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown noise preset {name!r}; known: {sorted(PRESETS)}") from None
