"""Line-oriented kernel and functional definition files.

Kernel file::

    # comments and blank lines are ignored
    family trig1              # registers trig1.h, trig1.k1, ... trig1.s2
    samples data/h.csv h      # one real per grid node; name defaults to the file stem

Functional file::

    functional F              # optional header; atoms before any header belong to F
    atom 1.0 0.0 trig1.h
    atom 0.5 -0.5 2*t         # optional <scale>* prefix on the kernel reference

Besides names from the kernel file, ``one`` (constant 1) and ``t`` are always
available as references.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .functionals import CylinderFunctional
from .kernels import (
    FAMILIES,
    Grid,
    IteratedFamily,
    KernelFn,
    SystemSolutionSet,
    builtin_family,
    s_combine,
)


class ConfigError(ValueError):
    """Malformed definition file or suite configuration."""


@dataclass
class KernelLibrary:
    grid: Grid
    kernels: dict[str, KernelFn] = field(default_factory=dict)
    families: list[str] = field(default_factory=list)
    source: str | None = None

    def add_family(self, name: str):
        if name not in FAMILIES:
            raise ConfigError(f"unknown family {name!r}")
        fam = builtin_family(name, self.grid)
        system = fam.system if isinstance(fam, IteratedFamily) else fam
        for key in ("h", "k1", "k2", "s1", "s2"):
            self.kernels[f"{name}.{key}"] = getattr(system, key)
        if isinstance(fam, IteratedFamily):
            for label, chain in (("H", fam.hs), ("K1", fam.k1_chain), ("K2", fam.k2_chain)):
                for j, k in enumerate(chain, 1):
                    self.kernels[f"{name}.{label}{j}"] = k
        if name not in self.families:
            self.families.append(name)

    def resolve(self, ref: str) -> KernelFn:
        scale = 1.0
        name = ref
        if "*" in ref:
            head, name = ref.split("*", 1)
            try:
                scale = float(head)
            except ValueError:
                raise ConfigError(f"bad scale in kernel reference {ref!r}") from None
        if name == "one":
            k = KernelFn.constant(self.grid, 1.0, "1")
        elif name == "t":
            k = KernelFn(self.grid, self.grid.nodes, "t")
        elif name in self.kernels:
            k = self.kernels[name]
        else:
            raise ConfigError(f"unknown kernel reference {name!r}")
        return k if scale == 1.0 else scale * k

    def custom_system(self, name: str = "custom") -> SystemSolutionSet | None:
        """A solution-set candidate from sample kernels named ``h``, ``k1``, ``k2``.

        ``s1``/``s2`` are taken from the file when present and otherwise
        completed canonically.
        """
        if not all(k in self.kernels for k in ("h", "k1", "k2")):
            return None
        h, k1, k2 = (self.kernels[k] for k in ("h", "k1", "k2"))
        s1 = self.kernels.get("s1") or s_combine([h, k1])
        s2 = self.kernels.get("s2") or s_combine([h, k2])
        return SystemSolutionSet(h, k1, k2, s1, s2, name)


def _lines(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _read_samples(path: Path, grid: Grid) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float).reshape(-1)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read samples from {path}: {exc}") from None
    if len(values) != grid.n_nodes:
        raise ConfigError(f"{path} has {len(values)} samples, grid needs {grid.n_nodes}")
    return values


def load_kernel_file(path, grid: Grid) -> KernelLibrary:
    path = Path(path)
    lib = KernelLibrary(grid, source=str(path))
    for lineno, words in _lines(path):
        verb = words[0]
        if verb == "family" and len(words) == 2:
            lib.add_family(words[1])
        elif verb == "samples" and len(words) in (2, 3):
            csv = Path(words[1])
            if not csv.is_absolute():
                csv = path.parent / csv
            name = words[2] if len(words) == 3 else csv.stem
            try:
                lib.kernels[name] = KernelFn(grid, _read_samples(csv, grid), name)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
        else:
            raise ConfigError(f"{path}:{lineno}: expected 'family <name>' or "
                              f"'samples <csv-path> [name]', got {' '.join(words)!r}")
    return lib


def load_functional_file(path, library: KernelLibrary) -> dict[str, CylinderFunctional]:
    path = Path(path)
    atoms: dict[str, list] = {}
    current = "F"
    for lineno, words in _lines(path):
        if words[0] == "functional" and len(words) == 2:
            current = words[1]
            atoms.setdefault(current, [])
        elif words[0] == "atom" and len(words) == 4:
            try:
                weight = complex(float(words[1]), float(words[2]))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad weight") from None
            try:
                point = library.resolve(words[3])
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
            atoms.setdefault(current, []).append((weight, point))
        else:
            raise ConfigError(f"{path}:{lineno}: expected 'atom <re> <im> <kernel-ref>', "
                              f"got {' '.join(words)!r}")
    if not atoms:
        raise ConfigError(f"{path} defines no functionals")
    return {name: CylinderFunctional.from_atoms(library.grid, a) for name, a in atoms.items()}
