"""JSON Lines interchange format, one app per line.

::

    {"app_id": str, "label": "benign"|"malware"|null,
     "classes": [{"name": str, "methods": [str], "resolvable": bool}],
     "edges": [{"src": str, "dst": str, "w": int}]}

Two optional keys are written only when needed: ``nodes`` lists isolated
nodes, and ``mode`` marks graphs that were already abstracted.
"""

from __future__ import annotations

import io
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

from .callgraph import AbstractionMode, CallGraph, ClassInfo, parse_api_name
from .exceptions import ApiParseError, InterchangeError

log = logging.getLogger(__name__)

LABELS = ("benign", "malware")
_KNOWN_KEYS = frozenset({"app_id", "label", "classes", "edges", "nodes", "mode"})


@dataclass(frozen=True)
class AppRecord:
    app_id: str
    label: str | None
    graph: CallGraph

    def with_label(self, label: str | None) -> "AppRecord":
        return AppRecord(self.app_id, label, self.graph)

    def with_graph(self, graph: CallGraph) -> "AppRecord":
        return AppRecord(self.app_id, self.label, graph)


def record_from_dict(obj: dict, lineno: int | None = None) -> AppRecord:
    where = f"line {lineno}: " if lineno is not None else ""
    if not isinstance(obj, dict):
        raise InterchangeError(f"{where}record must be a JSON object")
    unknown = set(obj) - _KNOWN_KEYS
    if unknown:
        log.warning("%signoring unknown keys %s", where, sorted(unknown))
    try:
        app_id = obj["app_id"]
        edges_in = obj.get("edges", [])
        classes_in = obj.get("classes", [])
    except KeyError as exc:
        raise InterchangeError(f"{where}missing key {exc.args[0]!r}") from None
    if not isinstance(app_id, str) or not app_id:
        raise InterchangeError(f"{where}app_id must be a non-empty string")
    label = obj.get("label")
    if label is not None and label not in LABELS:
        raise InterchangeError(f"{where}label must be one of {LABELS} or null, got {label!r}")
    mode = AbstractionMode(obj.get("mode", "raw"))

    classes: dict[str, ClassInfo] = {}
    for c in classes_in:
        try:
            name = c["name"]
            info = ClassInfo(tuple(c.get("methods", [])), bool(c.get("resolvable", True)))
        except (KeyError, TypeError) as exc:
            raise InterchangeError(f"{where}bad class entry {c!r}") from exc
        if name in classes:
            raise InterchangeError(f"{where}duplicate class {name!r}")
        classes[name] = info

    edges = []
    seen = set()
    for e in edges_in:
        try:
            src, dst, w = e["src"], e["dst"], e["w"]
        except (KeyError, TypeError) as exc:
            raise InterchangeError(f"{where}bad edge entry {e!r}") from exc
        if isinstance(w, bool) or not isinstance(w, int) or w < 1:
            raise InterchangeError(f"{where}edge {src}->{dst}: weight must be an integer >= 1")
        if mode is AbstractionMode.RAW:
            try:
                parse_api_name(src)
                parse_api_name(dst)
            except ApiParseError as exc:
                raise InterchangeError(f"{where}{exc}") from None
        if (src, dst) in seen:
            log.warning("%sduplicate edge %s->%s merged", where, src, dst)
        seen.add((src, dst))
        edges.append((src, dst, w))

    graph = CallGraph(edges, nodes=obj.get("nodes", []), mode=mode, classes=classes)
    return AppRecord(app_id, label, graph)


def record_to_dict(rec: AppRecord) -> dict:
    g = rec.graph
    out: dict = {
        "app_id": rec.app_id,
        "label": rec.label,
        "classes": [{"name": name, "methods": list(info.methods), "resolvable": info.resolvable}
                    for name, info in g.classes.items()],
        "edges": [{"src": u, "dst": v, "w": w} for u, v, w in g.edges],
    }
    touched = {u for u, _, _ in g.edges} | {v for _, v, _ in g.edges}
    isolated = [n for n in g.nodes if n not in touched]
    if isolated:
        out["nodes"] = isolated
    if g.mode is not AbstractionMode.RAW:
        out["mode"] = g.mode.value
    return out


def dumps_record(rec: AppRecord) -> str:
    return json.dumps(record_to_dict(rec), ensure_ascii=False, separators=(",", ":"))


def iter_records(source: str | Path | io.TextIOBase) -> Iterator[AppRecord]:
    """Stream records from a path or open text file, one line at a time."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_records(fh)
        return
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InterchangeError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        yield record_from_dict(obj, lineno)


def load_records(source) -> list[AppRecord]:
    records = list(iter_records(source))
    ids = [r.app_id for r in records]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise InterchangeError(f"duplicate app_id {dup!r}")
    return records


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_records(path: str | Path, records: Iterable[AppRecord]) -> None:
    atomic_write_text(path, "".join(dumps_record(r) + "\n" for r in records))
