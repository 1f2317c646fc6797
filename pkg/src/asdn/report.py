"""Result containers shared by the bound and analyzer modules."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class Status(str, enum.Enum):
    VERIFIED = "verified"
    ASSUMED = "assumed"
    FAILED = "failed"


class BoundKind(str, enum.Enum):
    LOWER_MAJ = "lower_maj"
    LOWER_PSI = "lower_psi"
    UPPER_SYMKL = "upper_symkl"


def json_number(v):
    """Floats for JSON output: infinities as strings, numpy scalars unwrapped."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int) or (hasattr(v, "dtype") and getattr(v.dtype, "kind", "") in "iu"):
        return int(v)
    if isinstance(v, float) or hasattr(v, "__float__"):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return v


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, str):
        return obj
    return json_number(obj)


@dataclass
class HypothesisResult:
    name: str
    status: Status
    detail: str = ""
    witness: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status is Status.VERIFIED

    def to_dict(self):
        return _jsonify({"name": self.name, "status": self.status, "detail": self.detail,
                         "witness": self.witness})


@dataclass
class BoundReport:
    value: float
    kind: BoundKind
    params: dict = field(default_factory=dict)
    hypotheses: list = field(default_factory=list)
    fingerprint: str = ""

    @property
    def valid(self):
        """False when any hypothesis check failed; the value is then only indicative."""
        return not any(h.status is Status.FAILED for h in self.hypotheses)

    def hypothesis(self, name):
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "value": json_number(self.value),
            "valid": self.valid,
            "params": _jsonify(self.params),
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "fingerprint": self.fingerprint,
        }
