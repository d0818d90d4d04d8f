"""Per-slot click records from Monte Carlo runs, with JSON-lines persistence.

A record is one detector click: (time slot, telescope id, detector id in
{1, 2}, accepted flag, delay-setting index).  Records are stored columnar for
speed; serialization is line-oriented JSON with a schema-version header line
so logs are streamable and diffable.  Serialization is byte-deterministic for
identical runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA = "entscope.eventlog.v1"


@dataclass
class EventLog:
    scheme: str
    n_slots: int
    deltas: tuple[float, ...]
    slot: np.ndarray
    telescope: np.ndarray
    detector: np.ndarray
    accepted: np.ndarray
    delta_index: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.slot = np.asarray(self.slot, dtype=np.int64)
        self.telescope = np.asarray(self.telescope, dtype=np.int64)
        self.detector = np.asarray(self.detector, dtype=np.int64)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        self.delta_index = np.asarray(self.delta_index, dtype=np.int64)
        self.validate()

    def validate(self) -> None:
        n = len(self.slot)
        for name in ("telescope", "detector", "accepted", "delta_index"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} length mismatch")
        if n and np.any(np.diff(self.slot) < 0):
            raise ValueError("slots must be non-decreasing")
        if n and (self.slot.min() < 0 or self.slot.max() >= self.n_slots):
            raise ValueError("slot index out of range")
        if n and not np.all(np.isin(self.detector, (1, 2))):
            raise ValueError("detector ids must be 1 or 2")
        if n and (self.delta_index.min() < 0 or self.delta_index.max() >= len(self.deltas)):
            raise ValueError("delta index out of range")

    def __len__(self) -> int:
        return len(self.slot)

    def n_accepted_slots(self) -> int:
        return len(np.unique(self.slot[self.accepted]))

    def write_jsonl(self, path) -> None:
        header = {
            "schema": SCHEMA,
            "scheme": self.scheme,
            "n_slots": self.n_slots,
            "deltas": list(self.deltas),
            "meta": self.meta,
        }
        deltas = np.asarray(self.deltas, dtype=float)
        with open(path, "w", encoding="ascii") as fh:
            fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
            for i in range(len(self.slot)):
                rec = {
                    "acc": bool(self.accepted[i]),
                    "delta": float(deltas[self.delta_index[i]]),
                    "det": int(self.detector[i]),
                    "slot": int(self.slot[i]),
                    "tel": int(self.telescope[i]),
                }
                fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "EventLog":
        with open(path, "r", encoding="ascii") as fh:
            header = json.loads(fh.readline())
            if header.get("schema") != SCHEMA:
                raise ValueError(f"{path}: unsupported schema {header.get('schema')!r}")
            deltas = tuple(float(d) for d in header["deltas"])
            lookup = {d: i for i, d in enumerate(deltas)}
            cols = {"slot": [], "tel": [], "det": [], "acc": [], "di": []}
            for line in fh:
                rec = json.loads(line)
                cols["slot"].append(rec["slot"])
                cols["tel"].append(rec["tel"])
                cols["det"].append(rec["det"])
                cols["acc"].append(rec["acc"])
                cols["di"].append(lookup[rec["delta"]])
        return cls(
            scheme=header["scheme"],
            n_slots=int(header["n_slots"]),
            deltas=deltas,
            slot=np.array(cols["slot"], dtype=np.int64),
            telescope=np.array(cols["tel"], dtype=np.int64),
            detector=np.array(cols["det"], dtype=np.int64),
            accepted=np.array(cols["acc"], dtype=bool),
            delta_index=np.array(cols["di"], dtype=np.int64),
            meta=header.get("meta", {}),
        )


def fringe_counts(log: EventLog) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-delay success/total counts for fringe fitting.

    Coincidence schemes: per accepted slot, success means both telescopes
    fired the same detector index (correlated outcome).  Direct detection:
    success means the accepted click landed on detector 1.
    Returns (deltas, n_success, n_total) aligned with the delay schedule.
    """
    n_deltas = len(log.deltas)
    deltas = np.asarray(log.deltas, dtype=float)
    acc = np.flatnonzero(log.accepted)
    if log.scheme == "direct":
        di = log.delta_index[acc]
        total = np.bincount(di, minlength=n_deltas)
        success = np.bincount(di[log.detector[acc] == 1], minlength=n_deltas)
        return deltas, success, total
    if log.scheme == "w_state":
        raise ValueError("fringe_counts handles two-telescope schemes; "
                         "use pair_counts for telescope arrays")
    if len(acc) % 2:
        raise ValueError("accepted coincidence records must come in pairs")
    first, second = acc[0::2], acc[1::2]
    if np.any(log.slot[first] != log.slot[second]):
        raise ValueError("accepted pair records must share a slot")
    di = log.delta_index[first]
    total = np.bincount(di, minlength=n_deltas)
    same = log.detector[first] == log.detector[second]
    success = np.bincount(di[same], minlength=n_deltas)
    return deltas, success, total


def pair_counts(log: EventLog, n_telescopes: int) -> dict[tuple[int, int], tuple[int, int]]:
    """Telescope-array coincidences: {(i, j): (n_correlated, n_total)}, i < j."""
    acc = np.flatnonzero(log.accepted)
    if len(acc) % 2:
        raise ValueError("accepted coincidence records must come in pairs")
    first, second = acc[0::2], acc[1::2]
    if np.any(log.slot[first] != log.slot[second]):
        raise ValueError("accepted pair records must share a slot")
    ti, tj = log.telescope[first], log.telescope[second]
    same = log.detector[first] == log.detector[second]
    out: dict[tuple[int, int], tuple[int, int]] = {}
    for i in range(n_telescopes):
        for j in range(i + 1, n_telescopes):
            sel = (ti == i) & (tj == j)
            out[(i, j)] = (int(same[sel].sum()), int(sel.sum()))
    return out
