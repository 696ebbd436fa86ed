"""Versioned JSON model documents.

A document holds the scaling transform, the feature schema, an echo of every
configuration setting and one payload per tree (nodes with their planes plus
the growth trace). Floats are written with ``repr`` precision, so
serialize -> deserialize -> serialize is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

from .data import ScalingTransform
from .errors import SchemaMismatch, VersionMismatch
from .forest import Forest
from .split import SplitPlane
from .tree import Node, ObliqueTree, SplitEvent

FORMAT_VERSION = 1

Model = Union[ObliqueTree, Forest]


def _plane_dict(plane: SplitPlane) -> dict:
    return {"subset": list(plane.subset), "theta": [float(v) for v in plane.theta], "s": float(plane.s)}


def tree_to_dict(tree: ObliqueTree) -> dict:
    nodes = []
    for node in tree.nodes:
        entry = {
            "id": node.id, "born": node.born, "layer": node.layer, "count": node.count,
            "value": float(node.value), "sse": float(node.sse), "errors": int(node.errors),
            "split": None,
        }
        if not node.is_leaf:
            entry["split"] = dict(_plane_dict(node.plane), left=node.left, right=node.right)
        nodes.append(entry)
    trace = [{"node": e.node, "layer": e.layer, "gain": float(e.gain),
              "sse_after": float(e.sse_after), "errors_after": int(e.errors_after)} for e in tree.trace]
    return {
        "task": tree.task, "n_features": tree.n_features, "n_train": tree.n_train, "t_n": tree.t_n,
        "nodes": nodes, "trace": trace, "carried": [list(c) for c in tree.carried],
    }


def tree_from_dict(d: dict) -> ObliqueTree:
    nodes = []
    for e in d["nodes"]:
        split = e["split"]
        plane = SplitPlane(split["subset"], split["theta"], split["s"]) if split else None
        nodes.append(Node(e["id"], e["born"], e["layer"], e["count"], e["value"], e["sse"], e["errors"],
                          plane, split["left"] if split else None, split["right"] if split else None))
    trace = [SplitEvent(e["node"], e["layer"], nodes[e["node"]].plane, e["gain"], e["sse_after"],
                        e["errors_after"]) for e in d["trace"]]
    carried = [tuple(c) for c in d["carried"]]
    return ObliqueTree(nodes, trace, d["task"], d["n_features"], d["n_train"], d["t_n"], carried)


@dataclass
class ModelDocument:
    model: Model
    scaling: ScalingTransform
    feature_names: tuple[str, ...]
    target_name: str
    params: dict[str, Any]

    @property
    def kind(self) -> str:
        return "forest" if isinstance(self.model, Forest) else "tree"

    @property
    def task(self) -> str:
        return self.model.task

    @property
    def trees(self) -> list[ObliqueTree]:
        return self.model.trees if isinstance(self.model, Forest) else [self.model]

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "task": self.task,
            "feature_names": list(self.feature_names),
            "target_name": self.target_name,
            "scaling": {"mins": [float(v) for v in self.scaling.mins],
                        "ranges": [float(v) for v in self.scaling.ranges]},
            "params": self.params,
            "aggregation": self.model.aggregation if isinstance(self.model, Forest) else None,
            "trees": [tree_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ModelDocument:
        version = d.get("format_version") if isinstance(d, dict) else None
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"model format version {version!r}, expected {FORMAT_VERSION}")
        try:
            trees = [tree_from_dict(t) for t in d["trees"]]
            if d["kind"] == "forest":
                model: Model = Forest(trees, d["task"], d["aggregation"])
            elif d["kind"] == "tree" and len(trees) == 1:
                model = trees[0]
            else:
                raise SchemaMismatch(f"bad model kind {d['kind']!r}")
            scaling = ScalingTransform(d["scaling"]["mins"], d["scaling"]["ranges"])
            return cls(model, scaling, tuple(d["feature_names"]), d["target_name"], d["params"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaMismatch):
                raise
            raise SchemaMismatch(f"malformed model document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> ModelDocument:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"model file is not JSON: {exc}") from exc
        return cls.from_dict(d)


def save_model(doc: ModelDocument, path: str | Path) -> None:
    Path(path).write_text(doc.dumps(), encoding="utf-8")


def load_model(path: str | Path) -> ModelDocument:
    return ModelDocument.loads(Path(path).read_text(encoding="utf-8"))
