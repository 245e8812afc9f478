"""Per-iteration convergence records."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from neuro_qp.models.problem import Solution

TRACE_COLUMNS = ['iter', 'cost', 'violation', 'messages', 'mac_ops', 'saturations']


@dataclass
class TraceRecord:
    iter: int
    cost: float
    violation: float
    messages: int = 0
    mac_ops: int = 0
    saturations: int = 0
    x: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class ConvergenceTrace:
    """Records for the initial state (iter 0) and every executed iteration."""

    records: List[TraceRecord] = field(default_factory=list)
    solution: Optional[Solution] = None

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    @property
    def iterations(self) -> int:
        return max(len(self.records) - 1, 0)

    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def violations(self) -> np.ndarray:
        return np.array([r.violation for r in self.records])

    def snapshots(self) -> Dict[int, np.ndarray]:
        return {r.iter: r.x for r in self.records if r.x is not None}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.iter, r.cost, r.violation, r.messages, r.mac_ops, r.saturations) for r in self.records],
            columns=TRACE_COLUMNS,
        )

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'records': [
                {'iter': r.iter, 'cost': r.cost, 'violation': r.violation, 'messages': r.messages,
                 'mac_ops': r.mac_ops, 'saturations': r.saturations}
                for r in self.records
            ],
            'solution': self.solution.to_dict() if self.solution is not None else None,
        }
