"""
Parameter scans

Evaluates the cooling rates on a one- or two-dimensional grid of any
numeric SystemParams fields, optionally following the optimum line
Δ = Δ_opt(δc). Cells are independent and run on a process pool; results
are assembled in row-major order regardless of completion order. A cell
that fails records its error code instead of aborting the scan, and a
heating cell records a sentinel instead of a steady-state number.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from cavcool.amplitudes import DEFAULT_POLE_FLOOR, delta_opt, rates_weak_drive
from cavcool.emission import EmissionPattern
from cavcool.errors import CavcoolError, DivergentOptimum
from cavcool.limits import standing_wave_rates
from cavcool.liouvillian import InternalSpace, numerical_rates
from cavcool.mcwf import default_workers
from cavcool.models import DriveKind, RateResult, SystemParams
from cavcool.records import metadata_for, write_csv, write_gnuplot_matrix

logger = logging.getLogger(__name__)

SCAN_OUTPUTS = ("n_st", "w", "a_plus", "a_minus", "d")
HEATING = "H"
ERROR = "ERR"

_NON_SCANNABLE = {"drive", "nu"}


class Engine(str, Enum):
    """How cell rates are computed"""

    ANALYTIC = "analytic"
    LIOUVILLIAN = "liouvillian"


def _field_name(name: str) -> str:
    for field_name, info in SystemParams.model_fields.items():
        if name in (field_name, info.alias):
            return field_name
    raise ValueError(f"unknown parameter '{name}'")


class ScanAxis(BaseModel):
    """One scanned parameter and its evenly spaced range"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(..., description="SystemParams field to vary")
    start: float
    stop: float
    points: int = Field(..., ge=2)

    @field_validator("name")
    @classmethod
    def _known_parameter(cls, value: str) -> str:
        name = _field_name(value)
        if name in _NON_SCANNABLE:
            raise ValueError(f"'{value}' cannot be scanned")
        return name

    @field_validator("start", "stop")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("scan range must be finite")
        return value

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    @classmethod
    def parse(cls, text: str) -> "ScanAxis":
        """``name:start:stop:points``"""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"axis '{text}' is not name:start:stop:points")
        name, start, stop, points = parts
        return cls(name=name, start=float(start), stop=float(stop), points=int(points))


class ScanSpec(BaseModel):
    """A full scan: base point, axes, requested outputs and engine"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    base: SystemParams = Field(default_factory=SystemParams)
    axis1: ScanAxis
    axis2: Optional[ScanAxis] = None
    outputs: List[str] = Field(default_factory=lambda: list(SCAN_OUTPUTS))
    engine: Engine = Engine.ANALYTIC
    follow_optimum: bool = Field(False, description="Set Δ = Δ_opt(δc) in every cell")
    emission: EmissionPattern = Field(default_factory=EmissionPattern)
    n_cavity: int = Field(6, ge=2, description="Cavity truncation of the liouvillian engine")
    pole_floor: float = Field(DEFAULT_POLE_FLOOR, gt=0)

    @field_validator("outputs")
    @classmethod
    def _known_outputs(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in SCAN_OUTPUTS]
        if unknown:
            raise ValueError(f"unknown outputs {unknown}; choose from {list(SCAN_OUTPUTS)}")
        if not value:
            raise ValueError("at least one output is required")
        return value

    @model_validator(mode="after")
    def _consistent_axes(self) -> "ScanSpec":
        names = [self.axis1.name] + ([self.axis2.name] if self.axis2 else [])
        if len(set(names)) != len(names):
            raise ValueError("the two axes must scan different parameters")
        if self.follow_optimum and "delta" in names:
            raise ValueError("delta is fixed by the optimum line and cannot be scanned with it")
        return self

    @property
    def shape(self) -> tuple:
        return (self.axis1.points, self.axis2.points if self.axis2 else 1)


@dataclass
class ScanCell:
    """Result at one grid point"""

    i: int
    j: int
    x: float
    y: Optional[float]
    delta: Optional[float] = None
    values: Dict[str, float] = field(default_factory=dict)
    heating: bool = False
    error: Optional[str] = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "heating" if self.heating else "ok"

    def output(self, name: str):
        """Number, heating sentinel or error marker for one output"""
        if self.error is not None:
            return ERROR
        if name == "n_st" and self.heating:
            return HEATING
        return self.values[name]


def cell_params(spec: ScanSpec, x: float, y: Optional[float]) -> SystemParams:
    changes = {spec.axis1.name: float(x)}
    if spec.axis2 is not None:
        changes[spec.axis2.name] = float(y)
    p = spec.base.replace(**changes)
    if spec.follow_optimum:
        p = p.replace(delta=delta_opt(p.delta_c, p))
    return p


def cell_rates(spec: ScanSpec, p: SystemParams) -> RateResult:
    if spec.engine == Engine.LIOUVILLIAN:
        return numerical_rates(p, InternalSpace(spec.n_cavity), spec.emission, variant=p.drive)
    if p.drive == DriveKind.STANDING_WAVE:
        return standing_wave_rates(p, spec.emission, spec.pole_floor)
    return rates_weak_drive(p, spec.emission, pole_floor=spec.pole_floor)


def evaluate_cell(spec: ScanSpec, i: int, j: int) -> ScanCell:
    """Compute one cell, recording failures instead of raising"""
    x = float(spec.axis1.values()[i])
    y = float(spec.axis2.values()[j]) if spec.axis2 is not None else None
    cell = ScanCell(i=i, j=j, x=x, y=y)
    try:
        p = cell_params(spec, x, y)
        cell.delta = p.delta
        rates = cell_rates(spec, p)
    except CavcoolError as e:
        cell.error = e.code
        return cell
    except ValidationError:
        cell.error = "invalid_params"
        return cell
    except np.linalg.LinAlgError:
        cell.error = "linalg_error"
        return cell
    except (ArithmeticError, ValueError) as e:
        logger.debug(f"Cell ({i}, {j}) failed: {type(e).__name__}: {e}")
        cell.error = "numeric_error"
        return cell

    record = rates.as_dict()
    cell.heating = rates.is_heating
    cell.values = {name: record[name] for name in spec.outputs if record[name] is not None}
    if any(not math.isfinite(value) for value in cell.values.values()):
        cell.error = "non_finite"
    return cell


def _evaluate_task(task) -> ScanCell:
    spec, i, j = task
    return evaluate_cell(spec, i, j)


@dataclass
class ScanResult:
    """Cells of a finished scan in row-major order"""

    spec: ScanSpec
    cells: List[ScanCell]

    @property
    def xs(self) -> np.ndarray:
        return self.spec.axis1.values()

    @property
    def ys(self) -> Optional[np.ndarray]:
        return self.spec.axis2.values() if self.spec.axis2 is not None else None

    def cell(self, i: int, j: int = 0) -> ScanCell:
        return self.cells[i * self.spec.shape[1] + j]

    def line(self, name: str, j: int = 0) -> np.ndarray:
        """Values along axis 1 with heating and error cells as NaN"""
        values = []
        for i in range(self.spec.axis1.points):
            value = self.cell(i, j).output(name)
            values.append(value if isinstance(value, float) else math.nan)
        return np.asarray(values)

    def header(self) -> List[str]:
        columns = [self.spec.axis1.name]
        if self.spec.axis2 is not None:
            columns.append(self.spec.axis2.name)
        if self.spec.follow_optimum:
            columns.append("delta")
        return columns + list(self.spec.outputs) + ["status", "error"]

    def rows(self) -> List[list]:
        out = []
        for cell in self.cells:
            row: list = [cell.x]
            if self.spec.axis2 is not None:
                row.append(cell.y)
            if self.spec.follow_optimum:
                row.append(cell.delta if cell.delta is not None else ERROR)
            row.extend(cell.output(name) for name in self.spec.outputs)
            row.extend([cell.status, cell.error or ""])
            out.append(row)
        return out

    def write_csv(self, stream: IO[str]) -> None:
        metadata = metadata_for(
            self.spec.base,
            self.spec.engine.value,
            follow_optimum=self.spec.follow_optimum,
            emission=self.spec.emission.kind.value,
        )
        write_csv(stream, self.header(), self.rows(), metadata)

    def write_gnuplot(self, stream: IO[str], output: str = "n_st") -> None:
        ys = self.ys if self.ys is not None else [0.0]
        values = [
            [self.cell(i, j).output(output) for j in range(len(ys))]
            for i in range(len(self.xs))
        ]
        write_gnuplot_matrix(stream, self.xs, ys, values)


def run_scan(spec: ScanSpec, workers: Optional[int] = None) -> ScanResult:
    """
    Evaluate every cell of a scan.

    Args:
        spec: Scan definition
        workers: Process count (CAVCOOL_WORKERS or the CPU count when omitted)
    """
    n1, n2 = spec.shape
    tasks = [(spec, i, j) for i in range(n1) for j in range(n2)]
    workers = workers or default_workers()
    report_every = max(1, len(tasks) // 10)
    logger.info(f"Scanning {len(tasks)} cells ({spec.engine.value}) on {workers} worker(s)")

    cells: List[ScanCell] = []
    if workers == 1:
        iterator = map(_evaluate_task, tasks)
        executor = None
    else:
        executor = ProcessPoolExecutor(max_workers=workers)
        iterator = executor.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
    try:
        for count, cell in enumerate(iterator, start=1):
            cells.append(cell)
            if count % report_every == 0 or count == len(tasks):
                logger.info(f"Cells: {count}/{len(tasks)} ({100 * count // len(tasks)}%)")
    finally:
        if executor is not None:
            executor.shutdown()

    failed = sum(1 for cell in cells if cell.error is not None)
    if failed:
        logger.warning(f"{failed} of {len(cells)} cells failed; see the error column")
    return ScanResult(spec=spec, cells=cells)


def delta_opt_curve(p: SystemParams, delta_c_values: Sequence[float]) -> List[tuple]:
    """(δc, Δ_opt(δc)) pairs, with None where the optimum diverges"""
    curve = []
    for delta_c in delta_c_values:
        try:
            curve.append((float(delta_c), delta_opt(float(delta_c), p)))
        except DivergentOptimum:
            curve.append((float(delta_c), None))
    return curve


def local_minima(values: Sequence[float]) -> List[int]:
    """Indices of interior points lower than both finite neighbours"""
    values = np.asarray(values, dtype=float)
    found = []
    for k in range(1, values.size - 1):
        left, here, right = values[k - 1], values[k], values[k + 1]
        if np.isfinite(left) and np.isfinite(here) and np.isfinite(right):
            if here < left and here < right:
                found.append(k)
    return found
