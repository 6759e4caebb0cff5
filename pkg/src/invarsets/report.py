"""Scenario execution: configuration parsing, check dispatch, report
assembly, and CSV trajectory export.

A scenario is one JSON object describing a model, a check, a quantity
selection, an initial state, and tolerances.  Reports echo the
configuration and carry the numerical evidence behind the verdict, so a
directory of scenario files doubles as executable documentation of the
claims being certified.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .core import (
    ConservedQuantitySet,
    SystemDefinition,
    as_state,
    format_float,
    stack_quantities,
)
from .differentiate import jacobian
from .errors import UsageError
from .integrate import Trajectory, flow_adaptive, monitor_drift
from .invariance import (
    verify_rank_invariance,
    verify_set_persistence,
    verify_vanishing_invariance,
)
from .coincidence import canonical_symplectic_matrix, verify_coincidence
from . import kepler as kepler_model
from . import toda

VALID_MODELS = ("kepler", "toda-periodic", "toda-nonperiodic")
VALID_CHECKS = (
    "rank-invariance",
    "n-invariance",
    "set-persistence",
    "coincidence",
    "oracle-equality",
    "drift",
)


@dataclass
class RunReport:
    label: str
    check: str
    verdict: str
    evidence: dict[str, Any]
    config: dict[str, Any]
    elapsed_seconds: float
    tool_version: str = __version__

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "check": self.check,
            "verdict": self.verdict,
            "evidence": self.evidence,
            "config": self.config,
            "elapsed_seconds": self.elapsed_seconds,
            "tool_version": self.tool_version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load_scenario(path) -> dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"scenario file not found: {p}")
    try:
        config = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"scenario file {p} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError(f"scenario file {p} must contain a JSON object")
    return config


def _model_of(config) -> tuple[str, SystemDefinition, dict[str, Any]]:
    model = config.get("model")
    if not isinstance(model, dict) or "kind" not in model:
        raise UsageError('scenario needs a "model" object with a "kind" field')
    kind = model["kind"]
    if kind == "kepler":
        return kind, kepler_model.kepler_field(), {"a": float(model.get("a", 1.0))}
    if kind == "toda-periodic":
        n = int(model.get("n", 4))
        return kind, toda.periodic_field(n), {"n": n}
    if kind == "toda-nonperiodic":
        n = int(model.get("n", 4))
        return kind, toda.nonperiodic_field(n), {"n": n}
    raise UsageError(f"unknown model '{kind}'; valid models: {', '.join(VALID_MODELS)}")


def _quantity_from_token(token: str, kind: str, params: dict[str, Any]) -> ConservedQuantitySet:
    if kind == "toda-periodic" and token.startswith("I") and token[1:].isdigit():
        degrees = tuple(int(c) for c in token[1:])
        if any(d not in (1, 2, 3) for d in degrees):
            raise UsageError(f"quantity '{token}': closed forms cover degrees 1..3")
        return toda.periodic_invariants(params["n"], degrees)
    if kind == "toda-nonperiodic" and token.startswith("F") and token[1:].isdigit():
        degrees = tuple(int(c) for c in token[1:])
        if any(d not in (1, 2, 3) for d in degrees):
            raise UsageError(f"quantity '{token}': closed forms cover degrees 1..3")
        return toda.nonperiodic_invariants(params["n"], degrees)
    if kind == "kepler":
        parts = {
            "H": kepler_model.hamiltonian,
            "A": kepler_model.angular_momentum,
            "K": lambda: kepler_model.combined_invariant(params["a"]),
        }
        if all(c in parts for c in token):
            return stack_quantities([parts[c]() for c in token])
    raise UsageError(
        f"quantity '{token}' is not available for model '{kind}' "
        "(toda-periodic: I1..I123; toda-nonperiodic: F1..F123; kepler: H, A, K "
        "and concatenations like HA)"
    )


def _quantity_of(config, kind: str, params: dict[str, Any]) -> ConservedQuantitySet:
    token = config.get("quantity")
    if token is None:
        raise UsageError('scenario needs a "quantity" field')
    if isinstance(token, list):
        return stack_quantities([_quantity_from_token(t, kind, params) for t in token])
    return _quantity_from_token(str(token), kind, params)


def _initial_state(config, kind: str, params: dict[str, Any], dim: int) -> np.ndarray:
    entry = config.get("initial_state")
    if entry is None:
        raise UsageError('scenario needs an "initial_state" field')
    if isinstance(entry, list):
        return as_state(entry, dim)
    if not isinstance(entry, dict):
        raise UsageError('"initial_state" must be a vector or an object')
    if "set_id" in entry:
        if kind == "kepler":
            raise UsageError("explicit set samples apply to the lattice models")
        return toda.explicit_set_sample(entry["set_id"], params["n"], entry.get("params", {}))
    if "circular" in entry:
        if kind != "kepler":
            raise UsageError("circular samples apply to the kepler model")
        c = entry["circular"]
        return kepler_model.circular_sample(float(c.get("a", params["a"])), float(c.get("theta", 0.0)))
    if "random" in entry:
        r = entry["random"]
        rng = np.random.default_rng(int(r.get("seed", 0)))
        return float(r.get("scale", 1.0)) * rng.standard_normal(dim)
    raise UsageError('"initial_state" object needs one of: set_id, circular, random')


def _drift_evidence(drift) -> dict[str, Any]:
    if drift is None:
        return {}
    return {
        "drift_labels": list(drift.labels),
        "max_drift": [float(v) for v in drift.max_drift],
        "drift_time_of_max": [float(t) for t in drift.time_of_max],
    }


def _tol(config, key: str, default: float) -> float:
    return float(config.get("tolerances", {}).get(key, default))


def _common_kwargs(config) -> dict[str, float | int]:
    integ = config.get("integ", {})
    return {
        "abs_tol": float(integ.get("abs_tol", 1e-10)),
        "rel_tol": float(integ.get("rel_tol", 1e-10)),
        "sample_count": int(integ.get("sample_count", 401)),
    }


def _run_invariance_check(config, kind, system, params) -> tuple[str, dict[str, Any]]:
    check = config["check"]
    quantity = _quantity_of(config, kind, params)
    x0 = _initial_state(config, kind, params, system.dim)
    t_end = float(config.get("t_end", 10.0))
    kw = _common_kwargs(config)
    if check == "rank-invariance":
        rep = verify_rank_invariance(
            system, quantity, x0, t_end,
            rank_tol=float(config.get("rank_tol", 1e-8)),
            conservation_tol=_tol(config, "conservation", 1e-8),
            **kw,
        )
        ranks = [] if rep.sample_values is None else sorted({int(v) for v in rep.sample_values})
        evidence = {
            "initial_rank": rep.initial_rank,
            "ranks_seen": ranks,
            "min_margin": float(rep.min_margin),
            "message": rep.message,
            "equilibrium": rep.equilibrium,
        }
        evidence.update(_drift_evidence(rep.drift))
        return rep.verdict, evidence
    if check == "n-invariance":
        rep = verify_vanishing_invariance(
            system, quantity, x0,
            order=int(config.get("order", 1)),
            t_end=t_end,
            abs_tol=_tol(config, "vanishing", 1e-8),
            conservation_tol=_tol(config, "conservation", 1e-8),
            integ_abs_tol=kw["abs_tol"],
            integ_rel_tol=kw["rel_tol"],
            sample_count=kw["sample_count"],
        )
        evidence = {
            "worst_residual": float(rep.worst_value),
            "worst_time": float(rep.worst_time),
            "threshold": rep.threshold,
            "message": rep.message,
        }
        evidence.update(_drift_evidence(rep.drift))
        return rep.verdict, evidence
    if check == "set-persistence":
        set_id = config.get("set_id")
        if set_id is None:
            state_entry = config.get("initial_state")
            set_id = state_entry.get("set_id") if isinstance(state_entry, dict) else None
        if set_id is None:
            raise UsageError('set-persistence needs a "set_id" (top level or in initial_state)')
        n = params["n"]
        desc_quantity = toda.explicit_set_quantity(set_id, n)
        rep = verify_set_persistence(
            system,
            lambda s: toda.explicit_set_residual(set_id, n, s),
            x0,
            t_end,
            tol=_tol(config, "residual", 1e-7),
            quantity=desc_quantity,
            **kw,
        )
        evidence = {
            "set_id": set_id,
            "max_residual": float(rep.worst_value),
            "worst_time": float(rep.worst_time),
            "tol": rep.threshold,
            "message": rep.message,
            "equilibrium": rep.equilibrium,
        }
        evidence.update(_drift_evidence(rep.drift))
        return rep.verdict, evidence
    raise UsageError(f"unhandled invariance check '{check}'")


def _run_coincidence(config, kind, system, params) -> tuple[str, dict[str, Any]]:
    if kind != "kepler":
        raise UsageError("the coincidence check is wired for the kepler model")
    a = params["a"]
    x0 = _initial_state(config, kind, params, 4)
    t_end = float(config.get("t_end", 2.0 * np.pi * a**3))
    kw = _common_kwargs(config)
    block = canonical_symplectic_matrix(2)
    rep = verify_coincidence(
        lambda x, g, _b=block: _b @ g,
        kepler_model.hamiltonian(),
        kepler_model.linear_pair_hamiltonian(a),
        x0,
        t_end,
        deviation_tol=_tol(config, "deviation", 1e-6),
        hypothesis_tol=_tol(config, "hypothesis", 1e-8),
        **kw,
    )
    evidence = {
        "agreement_residual": float(rep.e_residual),
        "difference_drift": float(rep.difference_drift),
        "max_deviation": float(rep.max_deviation),
        "max_deviation_time": float(rep.max_deviation_time),
        "message": rep.message,
    }
    return rep.verdict, evidence


def _run_oracle_equality(config, kind, system, params) -> tuple[str, dict[str, Any]]:
    n = params.get("n")
    if n is None:
        raise UsageError("oracle-equality applies to the lattice models")
    seed = int(config.get("seed", 0))
    samples = int(config.get("samples", 100))
    value_tol = _tol(config, "value", 1e-12)
    gradient_tol = _tol(config, "gradient", 1e-6)
    rng = np.random.default_rng(seed)

    worst_value = 0.0
    worst_gradient = 0.0
    worst_lax = 0.0
    if kind == "toda-periodic":
        pairs = [(toda.henon_closed_form(n, m), toda.henon_invariant_oracle(n, m)) for m in (1, 2, 3)]
        for _ in range(samples):
            z = rng.standard_normal(2 * n)
            for closed, enum in pairs:
                a = float(closed.values_at(z)[0])
                b = float(enum.values_at(z)[0])
                worst_value = max(worst_value, abs(a - b) / max(1.0, abs(a)))
                g = jacobian(closed, z)
                fd = jacobian(enum, z)
                scale = max(1.0, float(np.max(np.abs(g))))
                worst_gradient = max(worst_gradient, float(np.max(np.abs(g - fd))) / scale)
    else:
        quantities = [toda.flaschka_invariant(n, k) for k in (1, 2, 3)]
        for _ in range(samples):
            z = rng.standard_normal(2 * n - 1)
            for k, q in zip((1, 2, 3), quantities):
                a = float(q.values_at(z)[0])
                b = toda.trace_invariant_value(n, k, z)
                worst_value = max(worst_value, abs(a - b) / max(1.0, abs(a)))
                g = jacobian(q, z)
                fd_q = ConservedQuantitySet(dim=2 * n - 1, k=1, value=q.value, labels=q.labels)
                fd = jacobian(fd_q, z)
                scale = max(1.0, float(np.max(np.abs(g))))
                worst_gradient = max(worst_gradient, float(np.max(np.abs(g - fd))) / scale)
            worst_lax = max(worst_lax, toda.lax_commutator_residual(n, z))
    ok = worst_value <= value_tol and worst_gradient <= gradient_tol and worst_lax <= value_tol
    evidence = {
        "samples": samples,
        "seed": seed,
        "max_value_mismatch": worst_value,
        "max_gradient_mismatch": worst_gradient,
        "max_lax_residual": worst_lax,
        "value_tol": value_tol,
        "gradient_tol": gradient_tol,
    }
    return ("pass" if ok else "fail"), evidence


def _run_drift(config, kind, system, params) -> tuple[str, dict[str, Any]]:
    quantity = _quantity_of(config, kind, params)
    x0 = _initial_state(config, kind, params, system.dim)
    t_end = float(config.get("t_end", 10.0))
    kw = _common_kwargs(config)
    traj = flow_adaptive(system, x0, t_end, **kw)
    drift = monitor_drift(traj, quantity)
    tol = _tol(config, "drift", 1e-8)
    verdict = "pass" if drift.worst <= tol else "fail"
    evidence = {"worst_drift": drift.worst, "tol": tol}
    evidence.update(_drift_evidence(drift))
    return verdict, evidence


def run_scenario(config: dict[str, Any]) -> RunReport:
    """Execute one scenario and return its report.

    Configuration problems raise :class:`UsageError`; numerical verdicts
    (including hypothesis errors) are reported, not raised.
    """
    started = time.perf_counter()
    check = config.get("check")
    if check not in VALID_CHECKS:
        raise UsageError(f"unknown check '{check}'; valid checks: {', '.join(VALID_CHECKS)}")
    kind, system, params = _model_of(config)

    if check in ("rank-invariance", "n-invariance", "set-persistence"):
        verdict, evidence = _run_invariance_check(config, kind, system, params)
    elif check == "coincidence":
        verdict, evidence = _run_coincidence(config, kind, system, params)
    elif check == "oracle-equality":
        verdict, evidence = _run_oracle_equality(config, kind, system, params)
    else:
        verdict, evidence = _run_drift(config, kind, system, params)

    return RunReport(
        label=str(config.get("label", "unnamed")),
        check=check,
        verdict=verdict,
        evidence=evidence,
        config=config,
        elapsed_seconds=time.perf_counter() - started,
    )


def scenario_trajectory(config: dict[str, Any]) -> tuple[Trajectory, ConservedQuantitySet, SystemDefinition]:
    """Integrate the scenario's model from its initial state (for exports)."""
    kind, system, params = _model_of(config)
    quantity = _quantity_of(config, kind, params)
    x0 = _initial_state(config, kind, params, system.dim)
    t_end = float(config.get("t_end", 10.0))
    kw = _common_kwargs(config)
    traj = flow_adaptive(system, x0, t_end, **kw)
    return traj, quantity, system


def export_trajectory(
    traj: Trajectory,
    quantity: ConservedQuantitySet,
    path,
    component_names: tuple[str, ...] | None = None,
) -> None:
    """Write a trajectory as CSV: time, state components, quantity values,
    and the singular values of the quantity's Jacobian at each sample.

    Numbers carry 17 significant digits, so reimporting reproduces the
    doubles bit-exactly.
    """
    names = component_names or tuple(f"x{i + 1}" for i in range(traj.dim))
    if len(names) != traj.dim:
        raise UsageError(f"{len(names)} component names for dimension {traj.dim}")
    n_sigma = min(quantity.k, traj.dim)
    header = (
        ["t"]
        + list(names)
        + list(quantity.labels)
        + [f"sigma{i + 1}" for i in range(n_sigma)]
    )
    lines = [",".join(header)]
    for t, s in zip(traj.times, traj.states):
        values = quantity.values_at(s)
        sv = np.linalg.svd(jacobian(quantity, s), compute_uv=False)
        row = (
            [format_float(t)]
            + [format_float(v) for v in s]
            + [format_float(v) for v in values]
            + [format_float(v) for v in sv]
        )
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def run_directory(directory) -> list[RunReport]:
    """Run every *.json scenario in a directory (sorted by name)."""
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {d}")
    paths = sorted(d.glob("*.json"))
    if not paths:
        raise UsageError(f"no scenario files (*.json) in {d}")
    return [run_scenario(load_scenario(p)) for p in paths]
