import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


def _clean(value: Any) -> Any:
    """NaN and inf have no JSON spelling; they are written as null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    return value


@dataclass
class MetricsReport:
    kind: str
    method: str
    visibility: Optional[float] = None
    peak_positions: List[float] = field(default_factory=list)
    peak_separation: Optional[float] = None
    fwhm_per_peak: List[float] = field(default_factory=list)
    runtime_seconds: float = 0.0
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Reproducible fields only; runtime_seconds is reported separately."""
        data = {
            "kind": self.kind,
            "method": self.method,
            "visibility": self.visibility,
            "peak_positions": list(self.peak_positions),
            "peak_separation": self.peak_separation,
            "fwhm_per_peak": list(self.fwhm_per_peak),
        }
        data.update(self.extras)
        return _clean(data)
