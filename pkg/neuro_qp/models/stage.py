"""Per-stage MPC model: cost and dynamics blocks over a horizon."""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np


@dataclass(frozen=True, eq=False)
class StageModel:
    """Stage data for a linear-quadratic MPC problem.

    Stage j (0 <= j < horizon) carries cost blocks S (states x states),
    K (controls x states), T (controls x controls), linear terms q, r and
    dynamics x_{j+1} = E x_j + F u_j + c. The terminal state has its own
    cost block and linear term.
    """

    n_states: int
    n_controls: int
    horizon: int
    S: List[np.ndarray] = field(repr=False)
    K: List[np.ndarray] = field(repr=False)
    T: List[np.ndarray] = field(repr=False)
    q: List[np.ndarray] = field(repr=False)
    r: List[np.ndarray] = field(repr=False)
    E: List[np.ndarray] = field(repr=False)
    F: List[np.ndarray] = field(repr=False)
    c: List[np.ndarray] = field(repr=False)
    S_terminal: np.ndarray = field(repr=False)
    q_terminal: np.ndarray = field(repr=False)
    x_init: np.ndarray = field(repr=False)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return (self.horizon + 1) * self.n_states + self.horizon * self.n_controls

    @property
    def n_cons(self) -> int:
        return (self.horizon + 1) * self.n_states

    def stage_hessian(self, j: int) -> np.ndarray:
        """Full stage cost block [[S, K'], [K, T]]."""
        return np.block([[self.S[j], self.K[j].T], [self.K[j], self.T[j]]])

    def condition_estimate(self) -> float:
        """Largest stage-block condition number (dense eigensolve per block)."""
        worst = 1.0
        blocks = [self.stage_hessian(j) for j in range(self.horizon)] + [self.S_terminal]
        for block in blocks:
            eig = np.linalg.eigvalsh(block)
            if eig[0] <= 0:
                return float('inf')
            worst = max(worst, eig[-1] / eig[0])
        return float(worst)

    def feasible_point(self) -> np.ndarray:
        """Roll the dynamics forward from x_init with zero controls; returns z in tiled order."""
        ns, nc = self.n_states, self.n_controls
        z = np.zeros(self.n_vars)
        x = np.array(self.x_init, dtype=np.float64)
        for j in range(self.horizon):
            offset = j * (ns + nc)
            z[offset:offset + ns] = x
            x = self.E[j] @ x + self.c[j]
        z[self.horizon * (ns + nc):] = x
        return z

    def replace(self, **changes: Any) -> 'StageModel':
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return StageModel(**values)


def stage_offset(model: StageModel, j: int) -> int:
    """Index of x_j in the tiled decision vector."""
    return j * (model.n_states + model.n_controls)
