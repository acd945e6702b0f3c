"""Certificate types returned by the decision procedures."""

import enum
from dataclasses import dataclass, field

import numpy as np

from ._validation import SchemaError


class Verdict(str, enum.Enum):
    PROVEN = "PROVEN"
    REFUTED = "REFUTED"
    NO_COUNTEREXAMPLE = "NO_COUNTEREXAMPLE"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    GENERATOR_PAIRS = "generator_pairs"
    SAMPLED = "sampled"


@dataclass(frozen=True, eq=False)
class Certificate:
    """Outcome of a decision procedure.

    ``witness`` is a pair of vectors and is present exactly when the verdict is
    REFUTED.  Sampling can refute but never prove.
    """

    verdict: Verdict
    method: Method
    witness: tuple = None
    samples_used: int = 0
    seed: int = None
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        object.__setattr__(self, "method", Method(self.method))
        if (self.witness is not None) != (self.verdict is Verdict.REFUTED):
            raise ValueError("a witness is required for, and only for, REFUTED")
        if self.method is Method.SAMPLED and self.verdict is Verdict.PROVEN:
            raise ValueError("a sampled certificate cannot be PROVEN")
        if self.witness is not None:
            w = tuple(np.array(v, dtype=float) for v in self.witness)
            if len(w) != 2:
                raise ValueError("witness must be a pair of vectors")
            object.__setattr__(self, "witness", w)

    @property
    def refuted(self):
        return self.verdict is Verdict.REFUTED

    def __eq__(self, other):
        if not isinstance(other, Certificate):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "method": self.method.value,
            "witness": None if self.witness is None else [w.tolist() for w in self.witness],
            "samples_used": int(self.samples_used),
            "seed": self.seed,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            w = d.get("witness")
            return cls(
                verdict=d["verdict"],
                method=d["method"],
                witness=None if w is None else tuple(w),
                samples_used=int(d.get("samples_used", 0)),
                seed=d.get("seed"),
                note=d.get("note", ""),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"invalid certificate: {exc}") from None


def combine(verdicts):
    """Conjunction of per-part verdicts: any REFUTED wins, PROVEN needs all PROVEN."""
    verdicts = [Verdict(v) for v in verdicts]
    if any(v is Verdict.REFUTED for v in verdicts):
        return Verdict.REFUTED
    if verdicts and all(v is Verdict.PROVEN for v in verdicts):
        return Verdict.PROVEN
    return Verdict.NO_COUNTEREXAMPLE


@dataclass(frozen=True, eq=False)
class PolyhedronReport:
    per_facet: list = field(default_factory=list)
    sharp_declared: bool = True

    @property
    def invariant(self):
        return combine(c.verdict for _, c in self.per_facet)

    @property
    def isotone(self):
        # invariance and isotonicity coincide for sharp polyhedra
        return self.invariant

    def __eq__(self, other):
        if not isinstance(other, PolyhedronReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self):
        return {
            "invariant": self.invariant.value,
            "isotone": self.isotone.value,
            "sharp_declared": self.sharp_declared,
            "per_facet": [{"facet": int(i), "certificate": c.to_dict()} for i, c in self.per_facet],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            facets = [(int(f["facet"]), Certificate.from_dict(f["certificate"])) for f in d["per_facet"]]
            return cls(facets, bool(d.get("sharp_declared", True)))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"invalid polyhedron report: {exc}") from None
