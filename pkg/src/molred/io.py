"""File helpers, DOT export and the bundled fixtures."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .couple import Couple, couple_from_json
from .forest import ForestState
from .molecule import Molecule, molecule_from_json

PathLike = Union[str, os.PathLike]


def atomic_write(path: PathLike, text: str) -> None:
    """Write to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def read_json(path: PathLike):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path: PathLike, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2) + "\n")


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_text(molecule: Molecule, forest: Optional[ForestState] = None, name: str = "molecule") -> str:
    """Deterministic DOT: atoms by id, bonds by id, G bonds in red, degenerate atoms filled."""
    in_g = forest.bond_ids() if forest is not None else set()
    lines = [f"digraph {_quote(name)} {{"]
    for a in molecule.atoms():
        attrs = ' [style=filled, fillcolor="gray80"]' if a.degenerate else ""
        lines.append(f"  {_quote(a.id)}{attrs};")
    for b in molecule.bonds():
        attrs = [f'label="{b.id}"']
        if b.id in in_g:
            attrs.append("color=red")
        if b.kind.value == "INJECTED":
            attrs.append("style=dashed")
        lines.append(f"  {_quote(b.tail)} -> {_quote(b.head)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(molecule: Molecule, forest_snapshot: Optional[ForestState], path: PathLike) -> None:
    if forest_snapshot is not None:
        unknown = set(molecule.atom_ids()) - set(forest_snapshot.vertices)
        if unknown:
            raise ValueError(f"forest does not cover atoms {sorted(unknown)[:3]}")
    atomic_write(path, dot_text(molecule, forest_snapshot))


# ---------------------------------------------------------------- fixtures


def fixture_dir() -> Path:
    return Path(str(resources.files("molred") / "fixtures"))


@dataclass
class Fixture:
    name: str
    couple: Couple
    molecule: Molecule
    dimension: int
    names: dict[str, str]
    script: dict
    expected_edges: list[tuple[str, str]]

    @property
    def script_path(self) -> Path:
        return fixture_dir() / f"{self.name}.script.json"

    @property
    def molecule_path(self) -> Path:
        return fixture_dir() / f"{self.name}.molecule.json"


def load_fixture(name: str = "worked-example") -> Fixture:
    base = fixture_dir()
    couple = couple_from_json(read_json(base / f"{name}.couple.json"))
    molecule, dim = molecule_from_json(read_json(base / f"{name}.molecule.json"))
    names = read_json(base / f"{name}.names.json")["names"]
    script = read_json(base / f"{name}.script.json")
    edges = [tuple(e) for e in read_json(base / f"{name}.expected-g.json")["edges"]]
    return Fixture(name, couple, molecule, dim, names, script, edges)
