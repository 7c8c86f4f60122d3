"""Experiment reports: CSV rows under a ``#``-prefixed JSON header line."""

from dataclasses import dataclass, field
import csv
import datetime
import io
import json
import math

import numpy as np

COLUMNS = ("experiment", "row", "check", "invariant", "params", "value", "target", "passed")


def _plain(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return x


@dataclass
class Row:
    check: str
    invariant: str
    params: dict
    value: object
    target: str
    passed: bool

    def cells(self):
        value = self.value
        if isinstance(value, (float, np.floating)):
            value = repr(float(value))
        elif not isinstance(value, str):
            value = json.dumps(_plain(value), sort_keys=True)
        return [
            self.check,
            self.invariant,
            json.dumps(_plain(self.params), sort_keys=True),
            value,
            self.target,
            "pass" if self.passed else "FAIL",
        ]


@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    env: dict = field(default_factory=dict)

    def add(self, check, invariant, params, value, target, passed):
        self.rows.append(Row(check, invariant, params, value, target, bool(passed)))

    @property
    def passed(self):
        return bool(self.rows) and all(r.passed for r in self.rows)

    def header(self, timestamp=True):
        head = {"experiment": self.experiment, "passed": self.passed, **_plain(self.env)}
        if timestamp:
            head["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        return "# " + json.dumps(head, sort_keys=True)

    def body(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for i, r in enumerate(self.rows):
            w.writerow([self.experiment, i] + r.cells())
        return buf.getvalue()

    def to_csv(self, timestamp=True):
        return self.header(timestamp) + "\n" + self.body()

    def to_json(self):
        data = {
            "experiment": self.experiment,
            "passed": self.passed,
            "env": _plain(self.env),
            "rows": [dict(zip(COLUMNS[2:], r.cells())) for r in self.rows],
        }
        return json.dumps(data, sort_keys=True, indent=1)

    def write(self, path):
        """Write CSV (``.csv`` or anything else) or JSON (``.json``)."""
        text = self.to_json() if str(path).endswith(".json") else self.to_csv()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_rows(path):
    """Result rows of a CSV report, header line skipped."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
