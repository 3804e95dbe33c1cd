"""Dataset loading: CoLA-style TSV and generic JSON lines."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Instance:
    id: str
    fields: dict[str, str] = field(default_factory=dict)
    gold: int | None = None

    @property
    def text(self) -> str:
        return self.fields.get("text", "")


def check_unique(instances: Sequence[Instance]) -> None:
    seen: set[str] = set()
    for x in instances:
        if x.id in seen:
            raise ValidationError(f"duplicate instance id {x.id!r}")
        seen.add(x.id)


def load_cola_tsv(path) -> list[Instance]:
    """Read a CoLA file: source, label (0/1), original annotation, sentence.

    Ids are zero-based row indices.
    """
    path = Path(path)
    out: list[Instance] = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(path, lineno, f"expected 4 tab-separated columns, got {len(row)}")
            label = row[1].strip()
            if label not in ("0", "1"):
                raise ParseError(path, lineno, f"acceptability label must be 0 or 1, got {label!r}")
            out.append(Instance(str(len(out)), {"text": row[3]}, int(label)))
    return out


DEFAULT_FIELD_JOIN = " "


def render_fields(record: dict, text_fields: Sequence[str], template: str | None = None) -> str:
    """Build the ``text`` block from several fields.

    With one field the value is used as is. With several and no template,
    each becomes ``Name: value`` (so claim/abstract gives
    ``Claim: ... Abstract: ...``).
    """
    if template is not None:
        return template.format(**{k: record[k] for k in text_fields})
    if len(text_fields) == 1:
        return str(record[text_fields[0]])
    return DEFAULT_FIELD_JOIN.join(f"{k.capitalize()}: {record[k]}" for k in text_fields)


def load_jsonl(
    path,
    text_fields: Sequence[str] = ("text",),
    label_field: str | None = "label",
    positive_value: str = "1",
    render_template: str | None = None,
    extra_fields: Sequence[str] = (),
) -> list[Instance]:
    """Read one JSON object per line.

    ``gold`` is 1 when the label equals ``positive_value`` ignoring case, 0
    otherwise. When ``label_field`` is None every instance is unlabeled;
    when it is set, every line must carry it. ``extra_fields`` are copied
    through as strings (e.g. a hidden quality for simulated judges).
    """
    path = Path(path)
    text_fields = list(text_fields)
    if not text_fields:
        raise ValidationError("at least one text field is required")
    out: list[Instance] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise ParseError(path, lineno, "expected a JSON object")
            missing = [k for k in [*text_fields, *extra_fields] if k not in rec]
            if label_field is not None and label_field not in rec:
                missing.append(label_field)
            if missing:
                raise ParseError(path, lineno, f"missing field(s) {missing}")
            fields = {k: str(rec[k]) for k in text_fields}
            fields.update({k: str(rec[k]) for k in extra_fields})
            fields["text"] = render_fields(rec, text_fields, render_template)
            gold = None
            if label_field is not None:
                gold = int(str(rec[label_field]).strip().lower() == str(positive_value).strip().lower())
            iid = str(rec["id"]) if "id" in rec else str(len(out))
            out.append(Instance(iid, fields, gold))
    check_unique(out)
    return out


def write_jsonl(instances: Sequence[Instance], path, label_field: str = "label") -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for x in instances:
            rec = {"id": x.id, **x.fields}
            if x.gold is not None:
                rec[label_field] = x.gold
            fh.write(json.dumps(rec) + "\n")


def synthetic_dataset(n: int, seed: int = 0, scale: float = 200.0, positive_fraction: float = 0.5) -> tuple[list[Instance], dict[str, float]]:
    """Instances with distinct hidden qualities; the top ``positive_fraction`` are positive.

    Qualities are normal with standard deviation ``scale`` on the Elo
    scale, so a gap of one sd gives the better item roughly a 76% chance
    under a Bradley-Terry judge.
    """
    rng = np.random.default_rng(seed)
    q = rng.normal(0.0, scale, size=n)
    while len(np.unique(q)) < n:
        q = rng.normal(0.0, scale, size=n)
    n_pos = int(round(positive_fraction * n))
    rank = np.argsort(np.argsort(-q))
    instances = [
        Instance(f"s{i:04d}", {"text": f"item {i}", "quality": repr(float(q[i]))}, int(rank[i] < n_pos))
        for i in range(n)
    ]
    return instances, {x.id: float(q[i]) for i, x in enumerate(instances)}
