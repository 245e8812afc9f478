"""Benchmark spec files: which problems, which solvers, which study."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from neuro_qp.exceptions import BenchSpecError
from neuro_qp.fxp.formats import as_format
from neuro_qp.mpc.generator import GeneratorSpec
from neuro_qp.solvers.network import NetworkConfig
from neuro_qp.utils.files import SCHEMA_VERSION, read_json, resolve_relative

logger = logging.getLogger(__name__)

STUDIES = ('gap', 'scaling', 'warmstart')
MODES = ('float-gd', 'float-gdcc', 'float-pipg', 'fxp')
REFERENCES = ('auto', 'pipg', 'kkt')


@dataclass(frozen=True)
class SolverSpec:
    name: str
    mode: str = 'fxp'
    fmt: str = 'Q17.6'
    weight_bits: int = 8
    scalar_fmt: str = 'Q7.16'
    alpha_period: int = 100
    beta_period: int = 100
    event_threshold: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise BenchSpecError(f"solver '{self.name}': unknown mode '{self.mode}' (expected one of {', '.join(MODES)})")
        try:
            as_format(self.fmt)
            as_format(self.scalar_fmt)
        except ValueError as e:
            raise BenchSpecError(f"solver '{self.name}': {e}") from e

    @property
    def is_fxp(self) -> bool:
        return self.mode == 'fxp'

    def network_config(self, budget: int, neurons_per_core: int, sync_cost: int) -> NetworkConfig:
        return NetworkConfig(
            state_fmt=as_format(self.fmt),
            weight_bits=self.weight_bits,
            scalar_fmt=as_format(self.scalar_fmt),
            alpha_period=self.alpha_period,
            beta_period=self.beta_period,
            max_iters=budget,
            neurons_per_core=neurons_per_core,
            event_threshold=self.event_threshold,
            sync_cost=sync_cost,
        )

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SolverSpec':
        if 'name' not in data:
            raise BenchSpecError("solver entry is missing 'name'")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise BenchSpecError(f"solver '{data['name']}': unknown fields {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class ProblemSource:
    """A problem file on disk or a generator recipe."""

    path: Optional[str] = None
    generate: Optional[GeneratorSpec] = None

    def __post_init__(self):
        if (self.path is None) == (self.generate is None):
            raise BenchSpecError("problem entry needs exactly one of 'path' or 'generate'")

    @property
    def label(self) -> str:
        if self.path is not None:
            return self.path.replace('\\', '/').rsplit('/', 1)[-1].rsplit('.', 1)[0]
        g = self.generate
        return f"N{g.horizon}_x{g.n_states}_u{g.n_controls}_s{g.seed}"

    def with_seed_offset(self, offset: int) -> 'ProblemSource':
        if self.generate is None or offset == 0:
            return self
        g = self.generate
        return ProblemSource(generate=GeneratorSpec(**{**g.to_dict(), 'seed': g.seed + offset}))

    def to_dict(self) -> Dict[str, Any]:
        if self.path is not None:
            return {'path': self.path}
        return {'generate': self.generate.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional[str] = None) -> 'ProblemSource':
        if 'path' in data:
            return cls(path=resolve_relative(data['path'], base))
        if 'generate' in data:
            try:
                return cls(generate=GeneratorSpec.from_dict(data['generate']))
            except (TypeError, ValueError) as e:
                raise BenchSpecError(f"invalid generator entry: {e}") from e
        raise BenchSpecError("problem entry needs 'path' or 'generate'")


@dataclass(frozen=True)
class WarmstartSpec:
    magnitude: float = 0.01
    chain_length: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.chain_length < 2:
            raise BenchSpecError(f"warm-start chain_length must be >= 2, got {self.chain_length}")
        if self.magnitude < 0:
            raise BenchSpecError(f"perturbation magnitude must be >= 0, got {self.magnitude}")


@dataclass(frozen=True)
class BenchSpec:
    study: str = 'gap'
    problems: Tuple[ProblemSource, ...] = ()
    solvers: Tuple[SolverSpec, ...] = (SolverSpec('fxp'),)
    budget: int = 500
    gap_target: float = 0.08
    repetitions: int = 1
    precondition: bool = True
    reference: str = 'auto'
    reference_iters: int = 20000
    neurons_per_core: int = 256
    sync_cost: int = 64
    warmstart: Optional[WarmstartSpec] = None
    output_dir: str = 'bench_out'

    def __post_init__(self):
        if self.study not in STUDIES:
            raise BenchSpecError(f"unknown study '{self.study}' (expected one of {', '.join(STUDIES)})")
        if not 0 < self.gap_target < 1:
            raise BenchSpecError(f"gap_target must be in (0, 1), got {self.gap_target}")
        if self.repetitions < 1:
            raise BenchSpecError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.budget < 1:
            raise BenchSpecError(f"budget must be >= 1, got {self.budget}")
        if self.reference not in REFERENCES:
            raise BenchSpecError(f"unknown reference '{self.reference}' (expected one of {', '.join(REFERENCES)})")
        if not self.problems:
            raise BenchSpecError("bench spec lists no problems")
        if not self.solvers:
            raise BenchSpecError("bench spec lists no solvers")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise BenchSpecError("solver names must be unique")
        labels = [p.with_seed_offset(rep).label for p in self.problems
                  for rep in range(self.repetitions if p.generate is not None else 1)]
        repeated = sorted({label for label in labels if labels.count(label) > 1})
        if repeated:
            raise BenchSpecError(f"problem labels must be unique, repeated: {', '.join(repeated)}")
        if self.study == 'warmstart':
            if self.warmstart is None:
                object.__setattr__(self, 'warmstart', WarmstartSpec())
            if any(p.generate is None for p in self.problems):
                raise BenchSpecError("warm-start study needs generator-sourced problems")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': SCHEMA_VERSION,
            'study': self.study,
            'problems': [p.to_dict() for p in self.problems],
            'solvers': [s.to_dict() for s in self.solvers],
            'budget': self.budget,
            'gap_target': self.gap_target,
            'repetitions': self.repetitions,
            'precondition': self.precondition,
            'reference': self.reference,
            'reference_iters': self.reference_iters,
            'neurons_per_core': self.neurons_per_core,
            'sync_cost': self.sync_cost,
            'warmstart': self.warmstart.__dict__.copy() if self.warmstart is not None else None,
            'output_dir': self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional[str] = None) -> 'BenchSpec':
        if not isinstance(data, dict):
            raise BenchSpecError("bench spec must be a JSON object")
        if data.get('version') != SCHEMA_VERSION:
            raise BenchSpecError(f"bench spec version {data.get('version')!r} is not supported "
                                 f"(expected {SCHEMA_VERSION})")
        problems: List[ProblemSource] = [ProblemSource.from_dict(p, base) for p in data.get('problems', [])]
        horizons = data.get('horizons') or []
        if horizons:
            template = dict(data.get('generator', {}))
            for N in horizons:
                problems.append(ProblemSource.from_dict({'generate': {**template, 'horizon': N}}))
        solvers = tuple(SolverSpec.from_dict(s) for s in data.get('solvers', [{'name': 'fxp'}]))
        warm = data.get('warmstart')
        values: Dict[str, Any] = {
            key: data[key] for key in (
                'study', 'budget', 'gap_target', 'repetitions', 'precondition', 'reference',
                'reference_iters', 'neurons_per_core', 'sync_cost', 'output_dir',
            ) if key in data
        }
        try:
            return cls(
                problems=tuple(problems),
                solvers=solvers,
                warmstart=WarmstartSpec(**warm) if warm is not None else None,
                **values,
            )
        except TypeError as e:
            raise BenchSpecError(f"invalid bench spec: {e}") from e


def load_bench_spec(path: str) -> BenchSpec:
    return BenchSpec.from_dict(read_json(path, 'bench spec'), base=path)
