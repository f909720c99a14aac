"""Verification suites: every relation over families x parameters x random functionals.

Reports are plain dicts with a stable schema so they can be diffed between
runs.  Every entry carries the seed and parameters needed to rerun it.
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import lru_cache

import numpy as np

from . import transforms as tr
from .files import ConfigError, KernelLibrary
from .functionals import DROP_TOL, CylinderFunctional
from .kernels import (
    FAMILIES,
    Grid,
    IteratedFamily,
    KernelFn,
    SystemSolutionSet,
    builtin_family,
    check_system,
    family_kernels,
    l2_norm,
    s_combine,
)
from .oracle import (
    DEFAULT_SEED,
    McConfig,
    brownian_paths,
    check_variance_of_Zs,
    closed_form_wiener_integral,
    mc_generalized_wiener_integral,
)

SCHEMA_VERSION = 1

IDENTITIES = (
    "system",
    "inverse",
    "fft-of-gcp",
    "gcp-of-fft",
    "unit-kernels",
    "equal-kernels",
    "iterated-collapse",
    "mixed-collapse",
    "rescale",
    "iterated-gcp",
    "iterated-gcp-split",
    "mixed-gcp",
    "grand-chain",
)

NOTES = [
    "transform formulas on cylinder functionals do not depend on the L_p index; p is not a parameter",
    "functional equality is checked as canonical measure equality (merge-tolerance pairing) "
    "plus agreement at sampled Brownian paths, a surrogate for scale-invariant a.e. equality",
    "Monte Carlo checks hold in expectation at real lambda > 0 only",
]

RATIONALS = (1 / 4, 1 / 3, 1 / 2, 2 / 3, 3 / 4, 1.0, 4 / 3, 3 / 2, 2.0)
BETAS = (0.25, 1.0, 4.0)

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_HYPOTHESIS = "hypothesis-violated"
STATUS_ERROR = "error"


@dataclass
class Tolerances:
    hypothesis: float = tr.HYPOTHESIS_TOL
    measure: float = 1e-9
    inverse: float = 1e-10
    rescale: float = 1e-12
    pointwise: float = 1e-8
    system: float = 1e-10
    drop: float = DROP_TOL

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"tolerance {name} must be positive, got {value}")


@dataclass
class SuiteConfig:
    grid_n: int = 1024
    horizon: float = 1.0
    families: list[str] = field(default_factory=lambda: list(FAMILIES))
    q_values: list[float] = field(default_factory=lambda: [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
    identities: list[str] = field(default_factory=lambda: list(IDENTITIES))
    n_paths: int = 32
    n_functionals: int = 10
    max_atoms: int = 5
    seed: int = DEFAULT_SEED
    mc: McConfig = field(default_factory=McConfig)
    mc_cells: int = 20
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if any(q == 0 or not math.isfinite(q) for q in self.q_values):
            raise ConfigError("q values must be finite and nonzero")
        unknown = [i for i in self.identities if i not in IDENTITIES]
        if unknown:
            raise ConfigError(f"unknown identities {unknown}; known: {list(IDENTITIES)}")
        unknown = [f for f in self.families if f not in FAMILIES]
        if unknown:
            raise ConfigError(f"unknown families {unknown}; known: {list(FAMILIES)}")
        if self.n_paths < 0 or self.n_functionals < 1 or self.max_atoms < 1:
            raise ConfigError("n_paths >= 0, n_functionals >= 1 and max_atoms >= 1 required")
        if self.format not in ("json", "text"):
            raise ConfigError(f"format must be json or text, got {self.format!r}")
        try:
            self.grid = Grid(self.horizon, self.grid_n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def describe(self) -> dict:
        return {
            "grid": {"horizon": self.horizon, "n_intervals": self.grid_n},
            "families": list(self.families),
            "q_values": list(self.q_values),
            "identities": list(self.identities),
            "n_paths": self.n_paths,
            "n_functionals": self.n_functionals,
            "max_atoms": self.max_atoms,
            "seed": self.seed,
            "mc": {
                "n_samples": self.mc.n_samples,
                "seed": self.mc.seed,
                "lambdas": list(self.mc.lambdas),
                "grid": {"horizon": self.mc.grid.horizon, "n_intervals": self.mc.grid.n_intervals},
                "cells": self.mc_cells,
            },
            "tolerances": asdict(self.tolerances),
        }


# --- randomized inputs ---------------------------------------------------------


def cell_rng(seed: int, *labels) -> np.random.Generator:
    """Generator keyed by ``seed`` and string labels, independent of run order."""
    key = [zlib.crc32(str(x).encode()) for x in labels]
    return np.random.default_rng([int(seed) & (2**63 - 1), *key])


@lru_cache(maxsize=8)
def kernel_pool(grid: Grid) -> tuple[KernelFn, ...]:
    pool = [KernelFn.constant(grid, 1.0, "1"), KernelFn(grid, grid.nodes, "t")]
    for name in FAMILIES:
        try:
            pool.extend(family_kernels(name, grid))
        except ValueError:
            continue
    return tuple(pool)


def random_weight(rng: np.random.Generator) -> complex:
    r = math.sqrt(rng.uniform(0.05, 1.0))
    return complex(r * np.exp(2j * np.pi * rng.uniform()))


def random_functional(grid: Grid, rng: np.random.Generator, max_atoms: int = 5,
                      pool=None) -> CylinderFunctional:
    """Atoms with weights in the unit disk at rationally scaled registry kernels."""
    pool = kernel_pool(grid) if pool is None else pool
    n = int(rng.integers(1, max_atoms + 1))
    atoms = []
    for _ in range(n):
        k = pool[int(rng.integers(len(pool)))]
        scale = RATIONALS[int(rng.integers(len(RATIONALS)))] * rng.choice([-1.0, 1.0])
        atoms.append((random_weight(rng), scale * k))
    return CylinderFunctional.from_atoms(grid, atoms)


def random_chain(rng: np.random.Generator, kernels, length: int) -> list[KernelFn]:
    return [RATIONALS[int(rng.integers(len(RATIONALS)))] * kernels[int(rng.integers(len(kernels)))]
            for _ in range(length)]


def same_sign_list(rng: np.random.Generator, q: float, n: int) -> list[float]:
    return [q * float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])) for _ in range(n)]


# --- families as suite cases -------------------------------------------------


@dataclass
class FamilyCase:
    name: str
    system: SystemSolutionSet
    builtin: bool
    hs: tuple[KernelFn, ...]
    k1s: tuple[KernelFn, ...]
    k2s: tuple[KernelFn, ...]
    chain: tuple[KernelFn, ...]
    kernels: tuple[KernelFn, ...]
    native_grand: tuple | None = None


def _split(k: KernelFn) -> tuple[KernelFn, KernelFn]:
    return 0.6 * k, 0.8 * k


def family_case(name: str, grid: Grid, system: SystemSolutionSet | None = None) -> FamilyCase:
    if system is not None:
        fam = system
    else:
        fam = builtin_family(name, grid)
    sys_ = fam.system if isinstance(fam, IteratedFamily) else fam
    hs = _split(sys_.h)
    k1s, k2s = _split(sys_.k1), (sys_.k2,)
    chain = (sys_.h, sys_.k1, sys_.k2, sys_.s1)
    native_grand = None
    if isinstance(fam, IteratedFamily):
        if len(fam.hs) > 1:
            hs, chain = fam.hs, fam.hs
        if len(fam.k1_chain) > 1 or len(fam.k2_chain) > 1:
            k1s, k2s = fam.k1_chain, fam.k2_chain
            chain = fam.k2_chain
            n, m = len(k1s), len(k2s)
            native_grand = (tuple(math.sqrt(n) * k for k in k1s),
                            tuple(math.sqrt(m) * k for k in k2s))
    kernels = (sys_.h, sys_.k1, sys_.k2, sys_.s1, sys_.s2)
    return FamilyCase(name, sys_, system is None, tuple(hs), tuple(k1s), tuple(k2s),
                      tuple(chain), kernels, native_grand)


# --- the suite -------------------------------------------------------------------


@dataclass
class VerificationReport:
    kind: str
    config: dict
    entries: list[dict]
    summary: dict
    exit_status: int
    notes: list[str] = field(default_factory=lambda: list(NOTES))
    generated_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "generated_at": self.generated_at,
            "config": self.config,
            "notes": self.notes,
            "summary": self.summary,
            "exit_status": self.exit_status,
            "entries": self.entries,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def to_text(self) -> str:
        return render_text(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(d["kind"], d["config"], d["entries"], d["summary"], d["exit_status"],
                   d.get("notes", []), d.get("generated_at", ""))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def _sort_key(e: dict):
    return (e["identity"], e["family"], json.dumps(_jsonable(e["parameters"]), sort_keys=True))


def _entry(identity, family, params, status, seed, measure=None, pointwise=None,
           tol=None, ptol=None, runtime=0.0, detail=None) -> dict:
    e = {
        "identity": identity,
        "family": family,
        "parameters": params,
        "status": status,
        "max_measure_discrepancy": measure,
        "max_pointwise_discrepancy": pointwise,
        "tolerance": tol,
        "pointwise_tolerance": ptol,
        "seed": seed,
        "runtime_s": round(runtime, 6),
    }
    if detail:
        e["detail"] = detail
    return e


class _Cell:
    """Accumulates per-trial IdentityChecks into one report entry."""

    def __init__(self):
        self.measure = 0.0
        self.pointwise = None
        self.passed = True
        self.tol = None
        self.ptol = None
        self.worst: dict | None = None

    def add(self, check: tr.IdentityCheck, trial_params: dict):
        self.tol, self.ptol = check.tol, check.pointwise_tol
        if check.measure_discrepancy >= self.measure:
            self.measure = check.measure_discrepancy
            self.worst = dict(trial_params, comparisons=check.comparisons)
        if check.pointwise_discrepancy is not None:
            self.pointwise = max(self.pointwise or 0.0, check.pointwise_discrepancy)
        if not check.passed:
            self.passed = False
            self.worst = dict(trial_params, comparisons=check.comparisons,
                              pointwise=check.pointwise)


def _run_trials(identity, case: FamilyCase, q, cfg: SuiteConfig, paths, functionals):
    grid = cfg.grid
    tol = cfg.tolerances
    rng = cell_rng(cfg.seed, identity, case.name, q)
    cell = _Cell()
    kw = dict(paths=paths, tol=tol.measure, pointwise_tol=tol.pointwise)
    hyp = dict(hypothesis_tol=tol.hypothesis)
    params = {"q": q, "trials": cfg.n_functionals}
    n_trials = 1 if functionals is not None else cfg.n_functionals
    for trial in range(n_trials):
        if functionals is not None:
            F, G = functionals
        else:
            F = random_functional(grid, rng, cfg.max_atoms)
            G = random_functional(grid, rng, cfg.max_atoms)
        s = case.system
        tp = {"trial": trial}
        if identity == "inverse":
            chk = tr.gfft_inverse_check(F, tr.TransformSpec(q, s.h), tol.inverse)
        elif identity == "rescale":
            beta = BETAS[trial % len(BETAS)]
            tp["beta"] = beta
            chk = tr.rescale_parameter_check(F, q, s.h, beta, tol.rescale)
        elif identity == "fft-of-gcp":
            chk = tr.verify_transform_of_convolution(F, G, s.h, s.k1, s.k2, q, **kw, **hyp)
        elif identity == "gcp-of-fft":
            chk = tr.verify_convolution_of_transforms(F, G, s.h, s.k1, s.k2, q, **kw, **hyp)
        elif identity == "unit-kernels":
            chk = tr.verify_equal_kernels(F, G, KernelFn.constant(grid, 1.0), q, **kw)
        elif identity == "equal-kernels":
            chk = tr.verify_equal_kernels(F, G, s.h, q, **kw)
        elif identity == "iterated-collapse":
            chk = tr.collapse_equal_q(F, q, case.chain, **kw)
        elif identity == "mixed-collapse":
            qs = same_sign_list(rng, q, len(case.chain))
            tp["q_list"] = qs
            chk = tr.collapse_mixed_q(F, tr.MixedChainSpec.from_lists(qs, case.chain), **kw)
        elif identity == "iterated-gcp":
            chk = tr.verify_iterated_convolution(F, G, case.hs, s.k1, s.k2, q, **kw, **hyp)
        elif identity == "iterated-gcp-split":
            chk = tr.verify_iterated_convolution_split(F, G, s.h, case.k1s, case.k2s, q,
                                                       **kw, **hyp)
        elif identity == "mixed-gcp":
            q1, q2 = same_sign_list(rng, q, 2)
            tp.update(q1=q1, q2=q2)
            chk = tr.verify_lemma_mixed_convolution(F, G, s.h, s.k1, s.k2, q, q1, q2,
                                                    **kw, **hyp)
        elif identity == "grand-chain":
            chk = _grand_trial(F, G, case, q, rng, trial, tp, kw, hyp)
        else:  # pragma: no cover - guarded by SuiteConfig
            raise ConfigError(identity)
        cell.add(chk, tp)
    return cell, params


def _grand_trial(F, G, case: FamilyCase, q, rng, trial, tp, kw, hyp):
    if trial == 0 and case.native_grand is not None:
        hs1, hs2 = case.native_grand
        qs1, qs2 = [q] * len(hs1), [q] * len(hs2)
        h = case.system.h
        q1 = q2 = q
        tp["construction"] = "native"
    else:
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        hs1 = random_chain(rng, case.kernels, n)
        hs2 = random_chain(rng, case.kernels, m)
        qs1, qs2 = same_sign_list(rng, q, n), same_sign_list(rng, q, m)
        q1, q2 = same_sign_list(rng, q, 2)
        sk1 = tr.MixedChainSpec.from_lists(qs1, hs1).combined_kernel()
        sk2 = tr.MixedChainSpec.from_lists(qs2, hs2).combined_kernel()
        h = KernelFn(sk1.grid, np.sqrt(sk1.values * sk2.values), "sqrt(s1 s2)")
        tp["construction"] = "random"
    tp.update(q_list1=list(qs1), q_list2=list(qs2), q1=q1, q2=q2,
              n=len(hs1), m=len(hs2))
    return tr.verify_grand_identity(F, G, h, hs1, qs1, hs2, qs2, q, q1, q2, **kw, **hyp)


def _system_entry(case: FamilyCase, cfg: SuiteConfig) -> dict:
    t0 = time.perf_counter()
    chk = check_system(case.system, cfg.tolerances.system)
    if chk.passed:
        status = STATUS_PASS
    else:
        status = STATUS_FAIL if case.builtin else STATUS_HYPOTHESIS
    return _entry("system", case.name, {"residuals": list(chk.residuals), "scale": chk.scale},
                  status, cfg.seed, measure=max(chk.residuals), tol=chk.tol * chk.scale,
                  runtime=time.perf_counter() - t0)


def cells(cfg: SuiteConfig, cases: list[FamilyCase]):
    """Enumerate (identity, case, q) in a fixed order; ``case`` is None for unit kernels."""
    for identity in cfg.identities:
        if identity == "system":
            for case in cases:
                yield identity, case, None
        elif identity == "unit-kernels":
            for q in cfg.q_values:
                yield identity, None, q
        else:
            for case in cases:
                for q in cfg.q_values:
                    yield identity, case, q


def run_suite(cfg: SuiteConfig, library: KernelLibrary | None = None,
              functionals: tuple[CylinderFunctional, CylinderFunctional] | None = None
              ) -> VerificationReport:
    """Run every enabled relation; exit status 0 iff no deterministic check failed.

    Cells whose kernel hypotheses fail are reported as ``hypothesis-violated``
    and do not affect the exit status.
    """
    grid = cfg.grid
    names = list(cfg.families)
    if library is not None:
        names += [n for n in library.families if n not in names]
    cases = []
    for name in names:
        if name not in FAMILIES:
            raise ConfigError(f"unknown family {name!r}")
        try:
            cases.append(family_case(name, grid))
        except ValueError as exc:
            raise ConfigError(f"family {name}: {exc}") from None
    if library is not None:
        custom = library.custom_system()
        if custom is not None:
            cases.append(family_case(custom.name, grid, custom))
    paths = brownian_paths(grid, cfg.seed, cfg.n_paths) if cfg.n_paths else None
    unit = None
    entries = []
    for identity, case, q in cells(cfg, cases):
        if identity == "system":
            entries.append(_system_entry(case, cfg))
            continue
        if case is None:
            if unit is None:
                one = KernelFn.constant(grid, 1.0, "1")
                unit = FamilyCase("unit", SystemSolutionSet.from_kernels(one, one, one, "unit"),
                                  True, (one,), (one,), (one,), (one,), (one,))
            case = unit
        t0 = time.perf_counter()
        seed_labels = [identity, case.name, q]
        try:
            cell, params = _run_trials(identity, case, q, cfg, paths, functionals)
            status = STATUS_PASS if cell.passed else STATUS_FAIL
            e = _entry(identity, case.name, params, status, cfg.seed, cell.measure,
                       cell.pointwise, cell.tol, cell.ptol, time.perf_counter() - t0,
                       None if cell.passed else cell.worst)
        except (tr.HypothesisViolation, tr.SignConditionError) as exc:
            e = _entry(identity, case.name, {"q": q}, STATUS_HYPOTHESIS, cfg.seed,
                       runtime=time.perf_counter() - t0, detail={"message": str(exc)})
        except ValueError as exc:
            e = _entry(identity, case.name, {"q": q}, STATUS_ERROR, cfg.seed,
                       runtime=time.perf_counter() - t0, detail={"message": str(exc)})
        e["seed_labels"] = seed_labels
        entries.append(e)
    entries.sort(key=_sort_key)
    counts = {s: sum(e["status"] == s for e in entries)
              for s in (STATUS_PASS, STATUS_FAIL, STATUS_HYPOTHESIS, STATUS_ERROR)}
    status = 1 if counts[STATUS_FAIL] or counts[STATUS_ERROR] else 0
    summary = {"cells": len(entries), "counts": counts,
               "runtime_s": round(sum(e["runtime_s"] for e in entries), 3)}
    config = cfg.describe()
    if library is not None:
        config["kernel_file"] = library.source
    return VerificationReport("verify", config, entries, summary, status)


# --- Monte Carlo -------------------------------------------------------------------


def _mc_cell_inputs(cfg: SuiteConfig, cell: int, pool):
    rng = cell_rng(cfg.mc.seed, "mc", cell)
    lam = cfg.mc.lambdas[cell % len(cfg.mc.lambdas)]
    h = pool[cell % len(pool)]
    n_atoms = int(rng.integers(1, 4))
    atoms = []
    for _ in range(n_atoms):
        u = pool[int(rng.integers(len(pool)))]
        size = l2_norm(u * h)
        if size == 0:
            u, size = KernelFn.constant(h.grid, 1.0, "1"), l2_norm(h)
        # ||u h||^2 / lambda of order one keeps the characteristic function away from 0
        r = rng.uniform(0.5, 1.5) * math.sqrt(lam) / size
        atoms.append((random_weight(rng), r * u))
    return lam, h, CylinderFunctional.from_atoms(h.grid, atoms)


def _variance_pairs(grid: Grid):
    one = KernelFn.constant(grid, 1.0, "1")
    pairs = [(one, one),
             (KernelFn.from_callable(grid, np.sin, "sin"), KernelFn.from_callable(grid, np.cos, "cos"))]
    for name in ("poly", "trig1", "hyperbolic"):
        s = builtin_family(name, grid)
        pairs.append((s.h, s.k1))
    return pairs


def mc_check(cfg: SuiteConfig) -> VerificationReport:
    """Monte Carlo oracle against closed forms and the ``Z_s`` variance law.

    Exit status 2 when fewer than 95% of integral cells fall within
    3 standard errors or any variance check misses by more than 4 sigma.
    """
    grid = cfg.mc.grid
    pool = [k for k in kernel_pool(grid) if l2_norm(k) > 0]
    entries = []
    for cell in range(cfg.mc_cells):
        t0 = time.perf_counter()
        lam, h, F = _mc_cell_inputs(cfg, cell, pool)
        seed = int(cell_rng(cfg.mc.seed, "mc-seed", cell).integers(2**63))
        mc_cfg = McConfig(cfg.mc.n_samples, seed, cfg.mc.lambdas, grid)
        est = mc_generalized_wiener_integral(F, h, lam, mc_cfg)
        exact = closed_form_wiener_integral(F, h, lam)
        err = abs(est.mean - exact)
        ok = est.within(exact, 3.0)
        entries.append({
            "identity": "mc-integral", "family": h.tag or "kernel",
            "parameters": {"cell": cell, "lambda": lam, "n_atoms": len(F)},
            "status": STATUS_PASS if ok else STATUS_FAIL,
            "estimate": est.mean, "closed_form": exact, "abs_error": err,
            "std_error": est.std_error, "n_samples": est.n_samples,
            "z": err / est.std_error if est.std_error > 0 else None,
            "seed": seed, "runtime_s": round(time.perf_counter() - t0, 6),
        })
    for j, (h1, h2) in enumerate(_variance_pairs(grid)):
        t0 = time.perf_counter()
        seed = int(cell_rng(cfg.mc.seed, "zs-seed", j).integers(2**63))
        chk = check_variance_of_Zs(h1, h2, McConfig(cfg.mc.n_samples, seed, cfg.mc.lambdas, grid))
        entries.append({
            "identity": "zs-variance", "family": f"{h1.tag},{h2.tag}",
            "parameters": {"pair": j},
            "status": STATUS_PASS if chk.passed else STATUS_FAIL,
            "sample_variance": chk.sample_variance, "expected": chk.expected,
            "sigma": chk.sigma, "z": chk.z, "n_samples": chk.n_samples,
            "seed": seed, "runtime_s": round(time.perf_counter() - t0, 6),
        })
    entries.sort(key=_sort_key)
    integrals = [e for e in entries if e["identity"] == "mc-integral"]
    per_lambda = []
    for lam in cfg.mc.lambdas:
        rows = [e for e in integrals if e["parameters"]["lambda"] == lam]
        if rows:
            within = sum(e["status"] == STATUS_PASS for e in rows)
            per_lambda.append({"lambda": lam, "cells": len(rows), "within_3se": within,
                               "rate": within / len(rows)})
    rate = (sum(e["status"] == STATUS_PASS for e in integrals) / len(integrals)) if integrals else 1.0
    variance_ok = all(e["status"] == STATUS_PASS for e in entries if e["identity"] == "zs-variance")
    ok = rate >= 0.95 and variance_ok
    summary = {"cells": len(entries), "pass_rate": rate, "required_rate": 0.95,
               "variance_checks_passed": variance_ok, "per_lambda": per_lambda,
               "runtime_s": round(sum(e["runtime_s"] for e in entries), 3)}
    return VerificationReport("mc-check", cfg.describe(), entries, summary, 0 if ok else 2)


# --- family table -------------------------------------------------------------------


def list_families(names=None, grid: Grid | None = None) -> list[dict]:
    """One row per registered family (filtered by ``names``) with system residuals."""
    grid = grid or Grid()
    rows = []
    for name, info in FAMILIES.items():
        if names is not None and name not in names:
            continue
        fam = builtin_family(name, grid)
        system = fam.system if isinstance(fam, IteratedFamily) else fam
        chk = check_system(system)
        rows.append({"name": name, "title": info.title, "formulas": dict(info.formulas),
                     "residuals": list(chk.residuals), "passed": chk.passed})
    return rows


def render_families(rows: list[dict]) -> str:
    lines = [f"{'family':<16}{'res(i)':>11}{'res(ii)':>11}{'res(iii)':>11}  formulas"]
    for r in rows:
        f = "; ".join(f"{k}={v}" for k, v in r["formulas"].items())
        a, b, c = r["residuals"]
        lines.append(f"{r['name']:<16}{a:>11.2e}{b:>11.2e}{c:>11.2e}  {f}")
    return "\n".join(lines)


def render_text(d: dict) -> str:
    out = [f"{d['kind']} report (schema {d['schema_version']}), exit status {d['exit_status']}"]
    s = d["summary"]
    if d["kind"] == "verify":
        out.append("counts: " + ", ".join(f"{k}={v}" for k, v in s["counts"].items()))
        out.append(f"{'identity':<20}{'family':<16}{'q':>7}  {'status':<20}"
                   f"{'measure':>11}{'pointwise':>11}")
        for e in d["entries"]:
            q = e["parameters"].get("q")
            qs = "" if q is None else f"{q:g}"
            m, p = e["max_measure_discrepancy"], e["max_pointwise_discrepancy"]
            out.append(f"{e['identity']:<20}{e['family']:<16}{qs:>7}  {e['status']:<20}"
                       f"{'' if m is None else format(m, '.2e'):>11}"
                       f"{'' if p is None else format(p, '.2e'):>11}")
    else:
        out.append(f"integral pass rate {s['pass_rate']:.3f} (required {s['required_rate']}); "
                   f"variance checks {'ok' if s['variance_checks_passed'] else 'FAILED'}")
        for row in s["per_lambda"]:
            out.append(f"  lambda={row['lambda']:g}: {row['within_3se']}/{row['cells']} within 3 s.e.")
        for e in d["entries"]:
            z = e.get("z")
            zs = "n/a" if z is None else f"{z:+.2f}"
            out.append(f"{e['identity']:<14}{e['family']:<28}{e['status']:<6} z={zs}")
    out.extend(f"note: {n}" for n in d.get("notes", []))
    return "\n".join(out)
