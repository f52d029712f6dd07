"""Level schemes, trap parameters and pulse programs.

Units: hbar = 1, every frequency is an angular frequency in the same
(arbitrary) unit and durations are in its inverse.

Levels of one ion are indexed ``0..d-1`` (computational), ``d..2d-1``
(auxiliary partner of each computational level, ``aux(j) = d + j``) and
optionally ``2d`` (a shelf level used only by the phase gate).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from ..core import complex_to_pair, pair_to_complex
from ..errors import DimensionError, FormatError, QuditError

INTERACTIONS = ("V", "U+", "U-")
LAMB_DICKE_WARN = 0.3


@dataclass(frozen=True)
class LevelScheme:
    """Internal level energies of a ``d``-level ion plus its auxiliary manifold.

    Coupling is between neighbouring computational levels only. The raising
    operator of a transition points from its lower-energy level to its
    upper-energy level, so a zigzag of energies gives the Lambda-type ladder.
    """

    energies: tuple[float, ...]
    aux_energies: tuple[float, ...]
    shelf_energy: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "aux_energies", tuple(float(e) for e in self.aux_energies))
        d = len(self.energies)
        if d < 2:
            raise DimensionError("a level scheme needs at least two computational levels")
        if len(self.aux_energies) != d:
            raise DimensionError("one auxiliary partner per computational level is required")
        ladder = self.transition_frequencies
        if any(w <= 0 for w in ladder) or len(set(ladder)) != len(ladder):
            raise QuditError(f"neighbouring transition frequencies must be distinct and nonzero: {ladder}")
        partner = [abs(self.aux_energies[j] - self.energies[j]) for j in range(d)]
        if any(w <= 0 for w in partner) or len(set(partner)) != d:
            raise QuditError(f"partner transition frequencies must be distinct and nonzero: {partner}")
        if set(self.aux_energies) & set(self.energies):
            raise QuditError("auxiliary levels must not coincide with computational levels")

    @classmethod
    def default(cls, d: int, shelf: bool = True) -> "LevelScheme":
        """Zigzag ladder (even levels low, odd levels high) with auxiliaries above."""
        energies = [0.37 * j if j % 2 == 0 else 10.0 + 1.3 * j for j in range(d)]
        aux = [energies[j] + 50.0 + 2.1 * j for j in range(d)]
        return cls(tuple(energies), tuple(aux), 200.0 if shelf else None)

    @property
    def d(self) -> int:
        return len(self.energies)

    @property
    def transition_frequencies(self) -> tuple[float, ...]:
        e = self.energies
        return tuple(abs(e[j + 1] - e[j]) for j in range(len(e) - 1))

    @property
    def num_levels(self) -> int:
        return 2 * self.d + (self.shelf_energy is not None)

    def aux(self, j: int) -> int:
        return self.d + j

    @property
    def shelf(self) -> int:
        if self.shelf_energy is None:
            raise QuditError("level scheme has no shelf level")
        return 2 * self.d

    def energy(self, level: int) -> float:
        d = self.d
        if level < d:
            return self.energies[level]
        if level < 2 * d:
            return self.aux_energies[level - d]
        if level == 2 * d and self.shelf_energy is not None:
            return self.shelf_energy
        raise DimensionError(f"level {level} not in scheme")

    def oriented(self, a: int, b: int) -> tuple[int, int]:
        """``(lower, upper)`` of the transition between levels ``a`` and ``b``."""
        return (a, b) if self.energy(a) < self.energy(b) else (b, a)

    def aux_above(self) -> bool:
        above = [self.aux_energies[j] > self.energies[j] for j in range(self.d)]
        if len(set(above)) != 1:
            raise QuditError("auxiliary manifold must lie entirely above or below its partners")
        return above[0]

    def to_dict(self) -> dict:
        return {
            "transitions": list(self.transition_frequencies),
            "energies": list(self.energies),
            "aux_energies": list(self.aux_energies),
            "shelf_energy": self.shelf_energy,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LevelScheme":
        return cls(tuple(doc["energies"]), tuple(doc["aux_energies"]), doc.get("shelf_energy"))


@dataclass(frozen=True)
class TrapConfig:
    """Centre-of-mass mode of a linear trap holding ``q`` ions.

    ``eta`` holds Lamb-Dicke parameters per driven sideband transition; a
    single value is broadcast to every transition.
    """

    nu_x: float = 1.0
    q: int = 2
    eta: tuple[float, ...] = (0.1,)
    n_max: int = 3

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if not self.eta:
            raise QuditError("at least one Lamb-Dicke parameter is required")
        if any(not 0 < e < 1 for e in self.eta):
            raise QuditError(f"Lamb-Dicke parameters must lie in (0, 1): {self.eta}")
        if any(e > LAMB_DICKE_WARN for e in self.eta):
            warnings.warn(
                f"Lamb-Dicke parameter above {LAMB_DICKE_WARN}; first-order expansion is questionable",
                stacklevel=2,
            )
        if self.n_max < 1:
            raise QuditError("phonon cutoff n_max must be >= 1")
        if self.q < 1:
            raise QuditError("trap needs at least one ion")

    def eta_for(self, k: int) -> float:
        return self.eta[0] if len(self.eta) == 1 else self.eta[k]

    def to_dict(self) -> dict:
        return {"nu_x": self.nu_x, "q": self.q, "eta": list(self.eta), "n_max": self.n_max}

    @classmethod
    def from_dict(cls, doc: dict) -> "TrapConfig":
        return cls(float(doc["nu_x"]), int(doc["q"]), tuple(doc["eta"]), int(doc["n_max"]))


@dataclass(frozen=True)
class PulseSegment:
    """One constant-amplitude pulse.

    ``transitions`` lists the driven level pairs, matched index by index with
    ``rabi``; ``None`` means the computational ladder ``(j, j+1)``.
    ``detuning`` is added to the energy of the second level of every pair
    in the rotating frame. ``ion`` selects the ion in a multi-ion program.
    """

    interaction: str
    rabi: tuple[complex, ...]
    t: float
    sw_phase: float | None = None
    ion: int = 0
    transitions: tuple[tuple[int, int], ...] | None = None
    detuning: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.interaction not in INTERACTIONS:
            raise QuditError(f"unknown interaction {self.interaction!r}")
        object.__setattr__(self, "rabi", tuple(complex(r) for r in self.rabi))
        expected = 0.0 if self.interaction == "V" else math.pi / 2
        if self.sw_phase is None:
            object.__setattr__(self, "sw_phase", expected)
        elif abs(self.sw_phase - expected) > 1e-12:
            raise QuditError(
                f"{self.interaction} needs the ion at a standing-wave "
                f"{'antinode (phase 0)' if expected == 0 else 'node (phase pi/2)'}"
            )
        if self.t < 0:
            raise QuditError("pulse duration must be non-negative")
        if self.transitions is not None:
            trans = tuple((int(a), int(b)) for a, b in self.transitions)
            if len(trans) != len(self.rabi):
                raise DimensionError("one Rabi frequency per transition is required")
            object.__setattr__(self, "transitions", trans)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        if self.transitions is not None:
            return self.transitions
        return tuple((j, j + 1) for j in range(len(self.rabi)))

    def inverse(self) -> "PulseSegment":
        """The same pulse with every Rabi frequency and the detuning negated.

        The Hamiltonian is odd in these controls, so this is the exact inverse.
        """
        return PulseSegment(
            self.interaction,
            tuple(-r for r in self.rabi),
            self.t,
            self.sw_phase,
            self.ion,
            self.transitions,
            -self.detuning,
            f"{self.label} reversed".strip(),
        )

    def to_dict(self) -> dict:
        out: dict = {
            "interaction": self.interaction,
            "rabi": [complex_to_pair(r) for r in self.rabi],
            "t": self.t,
            "sw_phase": self.sw_phase,
            "ion": self.ion,
        }
        if self.transitions is not None:
            out["transitions"] = [list(p) for p in self.transitions]
        if self.detuning:
            out["detuning"] = self.detuning
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "PulseSegment":
        trans = doc.get("transitions")
        return cls(
            doc["interaction"],
            tuple(pair_to_complex(p) for p in doc["rabi"]),
            float(doc["t"]),
            float(doc["sw_phase"]),
            int(doc.get("ion", 0)),
            None if trans is None else tuple(tuple(p) for p in trans),
            float(doc.get("detuning", 0.0)),
            str(doc.get("label", "")),
        )


@dataclass(frozen=True)
class PulseProgram:
    d: int
    scheme: LevelScheme
    trap: TrapConfig
    segments: tuple[PulseSegment, ...] = ()
    n_ions: int = 1
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.scheme.d != self.d:
            raise DimensionError(f"scheme has {self.scheme.d} levels, program declares d={self.d}")
        for s in self.segments:
            if not 0 <= s.ion < self.n_ions:
                raise DimensionError(f"segment addresses ion {s.ion} of {self.n_ions}")
            for a, b in s.pairs():
                if not (0 <= a < self.scheme.num_levels and 0 <= b < self.scheme.num_levels):
                    raise DimensionError(f"transition ({a}, {b}) outside the level scheme")

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "n_ions": self.n_ions,
            "scheme": self.scheme.to_dict(),
            "trap": self.trap.to_dict(),
            "segments": [s.to_dict() for s in self.segments],
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "PulseProgram":
        try:
            return cls(
                int(doc["d"]),
                LevelScheme.from_dict(doc["scheme"]),
                TrapConfig.from_dict(doc["trap"]),
                tuple(PulseSegment.from_dict(s) for s in doc["segments"]),
                int(doc.get("n_ions", 1)),
                dict(doc.get("metadata", {})),
            )
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, QuditError) as exc:
            raise FormatError(f"bad pulse program: {exc}") from exc


def dumps_program(p: PulseProgram) -> str:
    return json.dumps(p.to_dict())


def loads_program(text: str) -> PulseProgram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("pulse program must be a JSON object")
    return PulseProgram.from_dict(doc)


def ladder_rabi(rabi: Sequence[complex], d: int) -> tuple[complex, ...]:
    rabi = tuple(complex(r) for r in rabi)
    if len(rabi) != d - 1:
        raise DimensionError(f"expected {d - 1} Rabi frequencies, got {len(rabi)}")
    return rabi
