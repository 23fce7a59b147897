"""TOML instance files with a ``problem`` discriminator, one instance per file.

    problem = "npp"        weights = [...]
    problem = "knapsack"   weights = [...], values = [...], capacity = W
    problem = "tsp"        dist = [[...], ...]
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import tomli
import tomli_w

from wavenet.errors import InvalidInstance
from wavenet.kp import KpInstance
from wavenet.npp import NppInstance
from wavenet.tsp import TspInstance

ProblemInstance = Union[NppInstance, KpInstance, TspInstance]

PROBLEMS = {"npp": ("weights",), "knapsack": ("weights", "values", "capacity"), "tsp": ("dist",)}


class InstanceParseError(InvalidInstance):
    """Malformed file; ``line`` is set when the TOML reader reports one."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


def _int_list(data: dict, key: str) -> list[int]:
    val = data[key]
    if not isinstance(val, list):
        raise InstanceParseError("expected an array of integers", field=key)
    for j, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InstanceParseError(f"entry {j} is {x!r}, expected an integer", field=key)
    return val


def from_dict(data: dict) -> ProblemInstance:
    kind = data.get("problem")
    if kind not in PROBLEMS:
        raise InstanceParseError(
            f"problem must be one of {sorted(PROBLEMS)}, got {kind!r}", field="problem"
        )
    need = PROBLEMS[kind]
    for key in need:
        if key not in data:
            raise InstanceParseError("missing", field=key)
    extra = sorted(set(data) - set(need) - {"problem"})
    if extra:
        raise InstanceParseError(f"unexpected key for problem {kind!r}", field=extra[0])
    if kind == "npp":
        return NppInstance(tuple(_int_list(data, "weights")))
    if kind == "knapsack":
        cap = data["capacity"]
        if isinstance(cap, bool) or not isinstance(cap, int):
            raise InstanceParseError(f"expected an integer, got {cap!r}", field="capacity")
        return KpInstance(tuple(_int_list(data, "weights")), tuple(_int_list(data, "values")), cap)
    rows = data["dist"]
    if not isinstance(rows, list):
        raise InstanceParseError("expected an array of arrays", field="dist")
    matrix = []
    for j, row in enumerate(rows):
        matrix.append(tuple(_int_list({f"dist[{j}]": row}, f"dist[{j}]")))
    return TspInstance(tuple(matrix))


def to_dict(instance: ProblemInstance) -> dict:
    if isinstance(instance, NppInstance):
        return {"problem": "npp", "weights": list(instance.weights)}
    if isinstance(instance, KpInstance):
        return {
            "problem": "knapsack",
            "weights": list(instance.weights),
            "values": list(instance.values),
            "capacity": instance.capacity,
        }
    if isinstance(instance, TspInstance):
        return {"problem": "tsp", "dist": [list(r) for r in instance.dist]}
    raise TypeError(f"not a problem instance: {type(instance).__name__}")


def problem_kind(instance: ProblemInstance) -> str:
    return to_dict(instance)["problem"]


def loads(text: str) -> ProblemInstance:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None and "line " in str(exc):
            tail = str(exc).rsplit("line ", 1)[1]
            digits = "".join(c for c in tail if c.isdigit())
            line = int(digits) if digits else None
        raise InstanceParseError(str(exc), line=line) from exc
    return from_dict(data)


def dumps(instance: ProblemInstance) -> str:
    return tomli_w.dumps(to_dict(instance))


def parse_instance(path: str | Path) -> ProblemInstance:
    return loads(Path(path).read_text())


def write_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance))
