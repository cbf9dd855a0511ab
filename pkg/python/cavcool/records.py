"""
Output records

CSV tables carry ``# key: value`` metadata lines (params hash, git hash,
engine and the full parameter set as one JSON line) ahead of the header
row. Floats are written with ``repr`` so reruns are byte-identical.

Trajectory ensembles go to a little-endian binary file:

    b"CCTR"  <u2 version>  <u4 header length>  <JSON header>
    per trajectory:
        <u4 index> <u8 seed> <u4 n_jumps>
        n_jumps × (<f8 time> <u1 channel> <f8 cos_theta>)
        3 × n_times × <f8>   (phonons, excitation, photons)
"""

import csv
import hashlib
import json
import logging
import math
import subprocess
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from cavcool.mcwf import Jump, JumpChannel, Trajectory
from cavcool.models import SystemParams

logger = logging.getLogger(__name__)

MAGIC = b"CCTR"
FORMAT_VERSION = 1

_PREAMBLE = np.dtype([("magic", "S4"), ("version", "<u2"), ("header_length", "<u4")])
_RECORD_HEAD = np.dtype([("index", "<u4"), ("seed", "<u8"), ("n_jumps", "<u4")])
_JUMP = np.dtype([("time", "<f8"), ("channel", "u1"), ("cos_theta", "<f8")])


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def params_hash(p: SystemParams) -> str:
    """First 16 hex digits of the sha256 of the canonical parameter JSON"""
    return hashlib.sha256(canonical_json(p.to_record()).encode("utf-8")).hexdigest()[:16]


def git_hash(cwd: Optional[Path] = None) -> str:
    """Commit of the working tree, or ``unknown`` outside a repository"""
    try:
        result = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=cwd,
            capture_output=True,
            text=True,
            timeout=5,
            check=False,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    value = result.stdout.strip()
    return value if result.returncode == 0 and value else "unknown"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def metadata_for(p: SystemParams, engine: str, **extra: Any) -> Dict[str, str]:
    """Standard metadata block for a result table"""
    metadata = {
        "params_hash": params_hash(p),
        "git_hash": git_hash(),
        "engine": engine,
        "params": canonical_json(p.to_record()),
    }
    for key, value in extra.items():
        metadata[key] = format_value(value)
    return metadata


def write_csv(
    stream: IO[str],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Optional[Dict[str, str]] = None,
) -> None:
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}: {value}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def read_csv(stream: IO[str]) -> Tuple[Dict[str, str], List[str], List[List[str]]]:
    """Metadata, header and raw string rows of a table written by write_csv"""
    metadata: Dict[str, str] = {}
    body: List[str] = []
    for line in stream:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            metadata[key.strip()] = value.strip()
        else:
            body.append(line)
    records = [record for record in csv.reader(body) if record]
    if not records:
        return metadata, [], []
    return metadata, records[0], records[1:]


def params_from_metadata(metadata: Dict[str, str]) -> SystemParams:
    """Rebuild the SystemParams recorded in a table header"""
    return SystemParams.model_validate(json.loads(metadata["params"]))


def write_gnuplot_matrix(
    stream: IO[str], xs: Sequence[float], ys: Sequence[float], values: Sequence[Sequence[Any]]
) -> None:
    """``x y value`` triples, one blank-line-separated block per x"""
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            stream.write(f"{format_value(x)} {format_value(y)} {format_value(values[i][j])}\n")
        stream.write("\n")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def to_json(data: Any) -> str:
    """Indented JSON with numpy values converted and NaN written as null"""

    def clean(value: Any) -> Any:
        if isinstance(value, float) and not math.isfinite(value):
            return None
        if isinstance(value, dict):
            return {key: clean(item) for key, item in value.items()}
        if isinstance(value, (list, tuple)):
            return [clean(item) for item in value]
        return value

    text = json.dumps(data, default=_json_default, sort_keys=True)
    return json.dumps(clean(json.loads(text)), indent=2, sort_keys=True)


def write_trajectories(
    path: Path, trajectories: Sequence[Trajectory], p: SystemParams, seed: int
) -> None:
    """Write an ensemble in the binary record layout"""
    n_times = int(trajectories[0].times.size) if trajectories else 0
    header = canonical_json(
        {
            "params_hash": params_hash(p),
            "seed": seed,
            "n_times": n_times,
            "n_trajectories": len(trajectories),
            "times": trajectories[0].times.tolist() if trajectories else [],
        }
    ).encode("utf-8")
    with open(path, "wb") as f:
        preamble = np.array([(MAGIC, FORMAT_VERSION, len(header))], dtype=_PREAMBLE)
        f.write(preamble.tobytes())
        f.write(header)
        for trajectory in trajectories:
            head = np.array(
                [(trajectory.index, trajectory.seed, trajectory.n_jumps)], dtype=_RECORD_HEAD
            )
            f.write(head.tobytes())
            jumps = np.array(
                [(j.time, int(j.channel), j.cos_theta) for j in trajectory.jumps], dtype=_JUMP
            )
            f.write(jumps.tobytes())
            observables = np.concatenate(
                [trajectory.phonons, trajectory.excitation, trajectory.photons]
            )
            f.write(observables.astype("<f8").tobytes())
    logger.info(f"Wrote {len(trajectories)} trajectories to {path}")


def read_trajectories(path: Path) -> Tuple[dict, List[Trajectory]]:
    """Read a file written by write_trajectories"""
    data = Path(path).read_bytes()
    preamble = np.frombuffer(data, dtype=_PREAMBLE, count=1)[0]
    if bytes(preamble["magic"]) != MAGIC:
        raise ValueError(f"{path} is not a trajectory record file")
    if int(preamble["version"]) != FORMAT_VERSION:
        raise ValueError(f"unsupported trajectory format version {int(preamble['version'])}")
    offset = _PREAMBLE.itemsize
    length = int(preamble["header_length"])
    header = json.loads(data[offset : offset + length].decode("utf-8"))
    offset += length

    times = np.asarray(header["times"], dtype=float)
    n_times = header["n_times"]
    trajectories: List[Trajectory] = []
    for _ in range(header["n_trajectories"]):
        head = np.frombuffer(data, dtype=_RECORD_HEAD, count=1, offset=offset)[0]
        offset += _RECORD_HEAD.itemsize
        n_jumps = int(head["n_jumps"])
        jumps = np.frombuffer(data, dtype=_JUMP, count=n_jumps, offset=offset)
        offset += _JUMP.itemsize * n_jumps
        observables = np.frombuffer(data, dtype="<f8", count=3 * n_times, offset=offset)
        offset += 8 * 3 * n_times
        trajectories.append(
            Trajectory(
                index=int(head["index"]),
                seed=int(head["seed"]),
                times=times.copy(),
                jumps=[
                    Jump(float(j["time"]), JumpChannel(int(j["channel"])), float(j["cos_theta"]))
                    for j in jumps
                ],
                phonons=observables[:n_times].copy(),
                excitation=observables[n_times : 2 * n_times].copy(),
                photons=observables[2 * n_times :].copy(),
            )
        )
    return header, trajectories
