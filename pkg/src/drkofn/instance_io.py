"""Instance files: {"n": int, "k": int, "tests": [{"cost", "lo", "hi"}, ...]}."""

from __future__ import annotations

import json
from typing import Any

from .model import Instance, InstanceError, make_instance

_TOP = ("n", "k", "tests")
_TEST = ("cost", "lo", "hi")


def to_dict(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "k": inst.k,
        "tests": [{"cost": c, "lo": l, "hi": r} for c, l, r in zip(inst.costs, inst.lo, inst.hi)],
    }


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=2)


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InstanceError(f"{where} must be a number")
    return float(x)


def from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    extra = set(data) - set(_TOP)
    if extra:
        raise InstanceError(f"unknown field(s) {sorted(extra)}")
    missing = [f for f in _TOP if f not in data]
    if missing:
        raise InstanceError(f"missing field(s) {missing}")
    n, k, tests = data["n"], data["k"], data["tests"]
    if isinstance(n, bool) or not isinstance(n, int) or isinstance(k, bool) or not isinstance(k, int):
        raise InstanceError("n and k must be integers")
    if not isinstance(tests, list) or len(tests) != n:
        raise InstanceError(f"tests must be a list of length n={n}")
    costs, lo, hi = [], [], []
    for i, t in enumerate(tests, start=1):
        if not isinstance(t, dict):
            raise InstanceError(f"test {i} must be an object")
        extra = set(t) - set(_TEST)
        if extra:
            raise InstanceError(f"unknown field(s) {sorted(extra)} in test {i}")
        for f in _TEST:
            if f not in t:
                raise InstanceError(f"test {i} is missing {f!r}")
        costs.append(_number(t["cost"], f"test {i} cost"))
        lo.append(_number(t["lo"], f"test {i} lo"))
        hi.append(_number(t["hi"], f"test {i} hi"))
    return make_instance(k, costs, lo, hi)


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path: str) -> Instance:
    with open(path) as fh:
        return loads(fh.read())


def save(inst: Instance, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst))
        fh.write("\n")
