"""Event-based fixed-point network solver.

Two layers of neurons exchange graded messages over quantized synapses.
Gradient neurons hold x; constraint neurons hold the dual accumulator w and
its gated output v. A state value is transmitted only when its magnitude
exceeds ``event_threshold`` raw units, and only transmitted values cost
multiply-accumulates at the receiving side.

One timestep:
  1. gradient neurons update x <- proj(x - alpha (Qx + p + A'v)) from the
     accumulators filled during the previous timestep
  2. they emit x to the Q and A synapses
  3. constraint neurons update w <- w + beta (Ax - k), v <- relu_gate(w)
  4. they emit v to the A' synapses
  5. alpha halves every alpha period, beta doubles every beta period
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from neuro_qp.exceptions import DimensionMismatchError, QuantizationError
from neuro_qp.fxp.formats import (
    FxpFormat,
    FxpTensor,
    OpCounter,
    as_format,
    quantize_vector,
    relu_raw,
    sat_add,
    sat_sub,
    scale_by,
    shift_halve,
)
from neuro_qp.fxp.matrix import QuantizedMatrix, fxp_spmv, quantize_matrix
from neuro_qp.models.problem import QpProblem, Solution, evaluate_cost, evaluate_violation
from neuro_qp.models.sparse import SparseMatrix
from neuro_qp.models.trace import ConvergenceTrace, TraceRecord
from neuro_qp.solvers.reference import HyperParams

logger = logging.getLogger(__name__)

DEFAULT_EXP_RANGE = (-16, 16)


@dataclass(frozen=True)
class NetworkConfig:
    """Hardware-facing knobs of the network: number formats, schedule, event threshold, core size.

    ``alpha_period``/``beta_period`` override the HyperParams schedule when set.
    """

    state_fmt: FxpFormat = FxpFormat(24, 6)
    weight_bits: int = 8
    scalar_fmt: FxpFormat = FxpFormat(24, 16)
    alpha_period: Optional[int] = None
    beta_period: Optional[int] = None
    max_iters: int = 500
    neurons_per_core: int = 256
    event_threshold: int = 0
    exp_range: Optional[Tuple[int, int]] = DEFAULT_EXP_RANGE
    sync_cost: int = 64

    def __post_init__(self):
        object.__setattr__(self, 'state_fmt', as_format(self.state_fmt))
        object.__setattr__(self, 'scalar_fmt', as_format(self.scalar_fmt))
        if self.exp_range is not None:
            object.__setattr__(self, 'exp_range', tuple(int(e) for e in self.exp_range))
        if not 2 <= self.weight_bits <= 16:
            raise ValueError(f"weight_bits must be in [2, 16], got {self.weight_bits}")
        if self.neurons_per_core < 1:
            raise ValueError(f"neurons_per_core must be >= 1, got {self.neurons_per_core}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.event_threshold < 0:
            raise ValueError(f"event_threshold must be >= 0, got {self.event_threshold}")
        for name in ('alpha_period', 'beta_period'):
            period = getattr(self, name)
            if period is not None and period < 1:
                raise ValueError(f"{name} must be >= 1, got {period}")

    @classmethod
    def from_settings(cls, settings: Any, **overrides: Any) -> 'NetworkConfig':
        """Build a config from a Settings object; explicit overrides that are not None win."""
        values: Dict[str, Any] = {
            'state_fmt': settings.state_fmt,
            'weight_bits': settings.weight_bits,
            'scalar_fmt': settings.scalar_fmt,
            'alpha_period': settings.alpha_period,
            'beta_period': settings.beta_period,
            'max_iters': settings.iters,
            'neurons_per_core': settings.neurons_per_core,
            'sync_cost': settings.sync_cost,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'state_fmt': str(self.state_fmt),
            'weight_bits': self.weight_bits,
            'scalar_fmt': str(self.scalar_fmt),
            'alpha_period': self.alpha_period,
            'beta_period': self.beta_period,
            'max_iters': self.max_iters,
            'neurons_per_core': self.neurons_per_core,
            'event_threshold': self.event_threshold,
            'exp_range': list(self.exp_range) if self.exp_range is not None else None,
            'sync_cost': self.sync_cost,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NetworkConfig':
        values = dict(data)
        if values.get('exp_range') is not None:
            values['exp_range'] = tuple(values['exp_range'])
        return cls(**values)


@dataclass(frozen=True)
class IterationEvents:
    """Events of one timestep (iter 0 is the priming emission of the initial state)."""

    iter: int
    messages: int = 0
    synaptic_events: int = 0
    mac_ops: int = 0
    received: int = 0
    neuron_updates: int = 0
    saturations: int = 0


@dataclass
class EventStats:
    messages_sent: int = 0
    synaptic_events: int = 0
    mac_ops: int = 0
    received: int = 0
    neuron_updates: int = 0
    saturations: int = 0
    breakdown: List[IterationEvents] = field(default_factory=list)

    def add(self, delta: IterationEvents) -> None:
        self.messages_sent += delta.messages
        self.synaptic_events += delta.synaptic_events
        self.mac_ops += delta.mac_ops
        self.received += delta.received
        self.neuron_updates += delta.neuron_updates
        self.saturations += delta.saturations
        self.breakdown.append(delta)

    def balanced(self) -> bool:
        """Sender-side fan-out, executed MACs and receiver-side fan-in agree, in total and per timestep."""
        def agree(events: Any) -> bool:
            return events.synaptic_events == events.mac_ops == events.received

        return agree(self) and all(agree(d) for d in self.breakdown)

    def copy(self) -> 'EventStats':
        return EventStats(self.messages_sent, self.synaptic_events, self.mac_ops, self.received,
                          self.neuron_updates, self.saturations, list(self.breakdown))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'messages_sent': self.messages_sent,
            'synaptic_events': self.synaptic_events,
            'mac_ops': self.mac_ops,
            'received': self.received,
            'neuron_updates': self.neuron_updates,
            'saturations': self.saturations,
            'breakdown': [asdict(d) for d in self.breakdown],
        }


def _state_vector(what: str, value: Optional[Any], size: int) -> np.ndarray:
    if value is None:
        return np.zeros(size)
    value = np.asarray(value, dtype=np.float64)
    if value.shape != (size,):
        raise DimensionMismatchError(what, size, value.size)
    return value


class Network:
    """Fixed-point recurrent network solving one QpProblem.

    The problem is expected to be preconditioned upstream; quantization
    uses one power-of-two scale per weight matrix.
    """

    def __init__(self, problem: QpProblem, hp: HyperParams, cfg: Optional[NetworkConfig] = None):
        self.problem = problem
        self.hp = hp
        self.cfg = cfg or NetworkConfig()
        self.alpha_period = self.cfg.alpha_period or hp.alpha_decay_period
        self.beta_period = self.cfg.beta_period or hp.beta_growth_period
        self.counter = OpCounter()

        fmt = self.cfg.state_fmt
        self.Q = self._quantize('Q', problem.Q)
        self.A = self._quantize('A', problem.A)
        self.AT = self._quantize('A transpose', problem.A.T)
        self.p = quantize_vector(problem.p, fmt, self.counter)
        self.k = quantize_vector(problem.k, fmt, self.counter)
        self._bounds = None
        if problem.box is not None:
            self._bounds = (quantize_vector(problem.box.lower, fmt).raw, quantize_vector(problem.box.upper, fmt).raw)
        if self.counter.saturations:
            logger.warning("%d bias entries saturated in %s", self.counter.saturations, fmt)
        self._ineq = problem.ineq_mask

        scalar_fmt = self.cfg.scalar_fmt
        self.alpha0 = quantize_vector([hp.alpha0], scalar_fmt)
        self.beta0 = quantize_vector([hp.beta0], scalar_fmt)
        if self.alpha0.raw[0] == 0:
            raise QuantizationError(f"alpha0={hp.alpha0:g} underflows {scalar_fmt}; use more fraction bits")
        if problem.n_cons and self.beta0.raw[0] == 0:
            raise QuantizationError(f"beta0={hp.beta0:g} underflows {scalar_fmt}; use more fraction bits")
        self._beta_cap = min(int(round(int(self.beta0.raw[0]) * hp.beta_cap_factor)), scalar_fmt.max_raw)

        self._x_fanout = self.Q.col_nnz() + self.A.col_nnz()
        self._v_fanout = self.AT.col_nnz()
        self.received = np.zeros(self.n_neurons, dtype=np.int64)
        self.warm_start()
        logger.info("Built network: %d gradient neurons, %d constraint neurons, %d synapses",
                    self.n_gradient, self.n_constraint, self.n_synapses)

    def _quantize(self, name: str, m: SparseMatrix) -> QuantizedMatrix:
        q = quantize_matrix(m, self.cfg.weight_bits, self.cfg.exp_range)
        if m.nnz and q.nnz == 0:
            raise QuantizationError(
                f"{name} collapsed to all zeros at {self.cfg.weight_bits}-bit weights "
                f"(scale exponent {q.scale_exp}); widen weight_bits or precondition the problem"
            )
        if q.nnz < m.nnz:
            logger.debug("%s: %d of %d weights rounded to zero", name, m.nnz - q.nnz, m.nnz)
        return q

    @property
    def n_gradient(self) -> int:
        return self.problem.n_vars

    @property
    def n_constraint(self) -> int:
        return self.problem.n_cons

    @property
    def n_neurons(self) -> int:
        return self.n_gradient + self.n_constraint

    @property
    def n_synapses(self) -> int:
        return self.Q.nnz + self.A.nnz + self.AT.nnz

    @property
    def stalled(self) -> bool:
        """alpha has underflowed to zero and the last step left x unchanged."""
        return bool(self.alpha.raw[0] == 0 and self._primal_change == 0)

    def _project(self, x: FxpTensor) -> FxpTensor:
        if self._bounds is None:
            return x
        return FxpTensor(np.clip(x.raw, self._bounds[0], self._bounds[1]), x.fmt, saturations=x.saturations)

    def _emit(self, t: FxpTensor) -> Tuple[FxpTensor, np.ndarray]:
        mask = np.abs(t.raw) > self.cfg.event_threshold
        return FxpTensor(np.where(mask, t.raw, 0), t.fmt), mask

    def _send_x(self) -> Tuple[int, int, int, Optional[FxpTensor]]:
        """Emit x to the Q and A synapses; returns (messages, synaptic events, MACs received, A x)."""
        fmt = self.cfg.state_fmt
        message, mask = self._emit(self.x)
        L = self.n_gradient
        self._qx = fxp_spmv(self.Q, message, fmt, self.counter)
        fan_in = self.Q.active_fan_in(mask)
        self.received[:L] += fan_in
        received = int(fan_in.sum())
        ax = None
        if self.n_constraint:
            ax = fxp_spmv(self.A, message, fmt, self.counter)
            fan_in = self.A.active_fan_in(mask)
            self.received[L:] += fan_in
            received += int(fan_in.sum())
        return int(mask.sum()), int(self._x_fanout[mask].sum()), received, ax

    def _send_v(self) -> Tuple[int, int, int]:
        message, mask = self._emit(self.v)
        self._atv = fxp_spmv(self.AT, message, self.cfg.state_fmt, self.counter)
        fan_in = self.AT.active_fan_in(mask)
        self.received[:self.n_gradient] += fan_in
        return int(mask.sum()), int(self._v_fanout[mask].sum()), int(fan_in.sum())

    def warm_start(self, x0: Optional[Any] = None, v0: Optional[Any] = None, w0: Optional[Any] = None) -> None:
        """Install (quantized) initial states, reset the schedule and counters, and prime the synapses.

        With only ``v0`` given, w starts at v0; with only ``w0``, v = relu_gate(w0).
        """
        L, M = self.n_gradient, self.n_constraint
        fmt = self.cfg.state_fmt
        x0 = _state_vector('x0', x0, L)
        v0 = None if v0 is None else _state_vector('v0', v0, M)
        w0 = _state_vector('w0', w0 if w0 is not None else v0, M)

        self.counter.reset()
        self.x = self._project(quantize_vector(x0, fmt, self.counter))
        self.w = quantize_vector(w0, fmt, self.counter)
        self.v = quantize_vector(v0, fmt, self.counter) if v0 is not None else relu_raw(self.w, self._ineq)
        self.alpha = FxpTensor(self.alpha0.raw.copy(), self.cfg.scalar_fmt)
        self.beta = FxpTensor(self.beta0.raw.copy(), self.cfg.scalar_fmt)
        self.iteration = 0
        self._primal_change = 0
        self.stats = EventStats()
        self.received[:] = 0

        x_messages, x_events, x_received, _ = self._send_x()
        v_messages, v_events, v_received = self._send_v()
        self.stats.add(IterationEvents(
            iter=0,
            messages=x_messages + v_messages,
            synaptic_events=x_events + v_events,
            mac_ops=self.counter.macs,
            received=x_received + v_received,
            saturations=self.counter.saturations,
        ))

    def step(self) -> IterationEvents:
        """Run one synchronous timestep and return its event counts."""
        fmt = self.cfg.state_fmt
        counter = self.counter
        macs, saturations = counter.macs, counter.saturations

        grad = sat_add(self._qx, self.p, counter)
        if self.n_constraint:
            grad = sat_add(grad, self._atv, counter)
        x_prev = self.x.raw
        self.x = self._project(sat_sub(self.x, scale_by(self.alpha, grad, counter), counter))
        messages, events, received, ax = self._send_x()

        if self.n_constraint:
            residual = sat_sub(ax, self.k, counter)
            self.w = sat_add(self.w, scale_by(self.beta, residual, counter), counter)
            self.v = relu_raw(self.w, self._ineq)
            v_messages, v_events, v_received = self._send_v()
            messages += v_messages
            events += v_events
            received += v_received

        self._primal_change = int(np.max(np.abs(self.x.raw - x_prev))) if self.n_gradient else 0
        self.iteration += 1
        self._advance_schedule()

        delta = IterationEvents(
            iter=self.iteration,
            messages=messages,
            synaptic_events=events,
            mac_ops=counter.macs - macs,
            received=received,
            neuron_updates=self.n_neurons,
            saturations=counter.saturations - saturations,
        )
        self.stats.add(delta)
        if delta.saturations:
            logger.debug("iteration %d: %d saturations", self.iteration, delta.saturations)
        return delta

    def _advance_schedule(self) -> None:
        t = self.iteration
        if t % self.alpha_period == 0 and self.alpha.raw[0] > 0:
            self.alpha = shift_halve(self.alpha)
            logger.debug("iteration %d: alpha -> %d raw", t, self.alpha.raw[0])
        if t % self.beta_period == 0 and self.beta.raw[0] < self._beta_cap:
            self.beta = FxpTensor([min(int(self.beta.raw[0]) << 1, self._beta_cap)], self.cfg.scalar_fmt)
            logger.debug("iteration %d: beta -> %d raw", t, self.beta.raw[0])

    def _record(self, trace: ConvergenceTrace, events: IterationEvents, snapshot_every: int) -> None:
        x = self.x.dequantize()
        violation, _ = evaluate_violation(self.problem, x)
        snapshot = x if snapshot_every and self.iteration % snapshot_every == 0 else None
        trace.append(TraceRecord(
            iter=self.iteration,
            cost=evaluate_cost(self.problem, x),
            violation=violation,
            messages=events.messages,
            mac_ops=events.mac_ops,
            saturations=events.saturations,
            x=snapshot,
        ))

    def solve(self, budget: Optional[int] = None,
              snapshot_every: int = 0) -> Tuple[Solution, ConvergenceTrace, EventStats]:
        """Run up to ``budget`` timesteps (config max_iters by default), stopping early once stalled.

        Cost and violation are evaluated in float from the dequantized state.
        """
        budget = self.cfg.max_iters if budget is None else budget
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        trace = ConvergenceTrace()
        self._record(trace, self.stats.breakdown[-1], snapshot_every)
        for _ in range(budget):
            events = self.step()
            self._record(trace, events, snapshot_every)
            if self.stalled:
                logger.info("alpha underflowed with no primal change at iteration %d", self.iteration)
                break

        base = Solution.from_x(self.problem, self.x.dequantize(), iterations=self.iteration,
                               converged=self.stalled)
        solution = replace(base, v=self.v.dequantize(), w=self.w.dequantize())
        trace.solution = solution
        logger.info("network solve finished: %d iterations, %d messages, %d MACs, %d saturations",
                    self.iteration, self.stats.messages_sent, self.stats.mac_ops, self.stats.saturations)
        return solution, trace, self.stats.copy()

    def effective_hyperparams(self) -> HyperParams:
        """The float schedule this network actually runs (dequantized alpha0/beta0 and periods)."""
        beta0_raw = int(self.beta0.raw[0])
        cap_factor = self._beta_cap / beta0_raw if beta0_raw else self.hp.beta_cap_factor
        return self.hp.replace(
            alpha0=float(self.alpha0.dequantize()[0]),
            beta0=float(self.beta0.dequantize()[0]) if beta0_raw else self.hp.beta0,
            alpha_decay_period=self.alpha_period,
            beta_growth_period=self.beta_period,
            max_iters=self.cfg.max_iters,
            beta_cap_factor=cap_factor,
        )

    def workload(self) -> Tuple[np.ndarray, int]:
        """Per-neuron work (updates + MACs received) and the number of timesteps it spans.

        Before any step every neuron is assumed to emit once.
        """
        if self.iteration == 0:
            fan_in = np.concatenate([self.Q.row_nnz() + self.AT.row_nnz(), self.A.row_nnz()])
            return fan_in + 1, 1
        return self.received + self.iteration, self.iteration


def build_network(problem: QpProblem, hp: HyperParams, cfg: Optional[NetworkConfig] = None) -> Network:
    return Network(problem, hp, cfg)


def step(network: Network) -> IterationEvents:
    return network.step()


def solve(network: Network, budget: Optional[int] = None,
          snapshot_every: int = 0) -> Tuple[Solution, ConvergenceTrace, EventStats]:
    return network.solve(budget, snapshot_every)


def warm_start(network: Network, x0: Any, v0: Optional[Any] = None, w0: Optional[Any] = None) -> None:
    network.warm_start(x0, v0, w0)

